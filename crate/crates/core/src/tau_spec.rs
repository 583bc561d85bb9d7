//! JSON input specifications: the fiber function τ and perturbed-map
//! descriptions used by the command line and the bindings.
//!
//! τ spec forms:
//! `{"type":"trigpoly","constant":c,"terms":[{"k":1,"cos":1.0,"sin":0.0}]}`,
//! `{"type":"samples","values":[...]}`,
//! `{"type":"fat_hole","lambda":0.6}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circle::{CircleFunction, TrigPoly, TrigTerm, DEFAULT_GRID};
use crate::families;

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid tau spec: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Circle(#[from] crate::circle::CircleError),
    #[error(transparent)]
    Family(#[from] crate::families::FamilyError),
    #[error("term frequency k must be >= 1")]
    ZeroFrequency,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TermSpec {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Serialized description of a circle function.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum TauSpec {
    Trigpoly {
        #[serde(default)]
        constant: f64,
        terms: Vec<TermSpec>,
    },
    Samples {
        values: Vec<f64>,
    },
    FatHole {
        lambda: f64,
    },
}

impl TauSpec {
    pub fn from_json(s: &str) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(s)?)
    }

    /// Materializes the function. `grid` overrides the default resolution
    /// (trig polynomials default to 4096; fat-hole picks the smallest
    /// power of two its transitions allow; samples keep their length).
    pub fn build(&self, grid: Option<usize>) -> Result<CircleFunction, SpecError> {
        match self {
            TauSpec::Trigpoly { constant, terms } => {
                if terms.iter().any(|t| t.k == 0) {
                    return Err(SpecError::ZeroFrequency);
                }
                let poly = TrigPoly::new(
                    *constant,
                    terms
                        .iter()
                        .map(|t| TrigTerm { k: t.k, cos: t.cos, sin: t.sin })
                        .collect(),
                );
                let floor = 2 * poly.degree() as usize + 2;
                let n = grid.unwrap_or(DEFAULT_GRID).max(floor);
                Ok(CircleFunction::from_trig_poly(poly, n)?)
            }
            TauSpec::Samples { values } => {
                Ok(CircleFunction::from_samples_auto(values.clone())?)
            }
            TauSpec::FatHole { lambda } => {
                let n = match grid {
                    Some(n) => n,
                    None => {
                        let params = families::fat_hole_params(*lambda)?;
                        let eps_min =
                            params.epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
                        let need = (32.0 * params.t0 / eps_min).ceil() as usize;
                        need.next_power_of_two()
                    }
                };
                Ok(families::build_fat_hole(*lambda, n)?.0)
            }
        }
    }

    /// Round-trippable spec for a computed function: the closed form when
    /// there is one, raw samples otherwise.
    pub fn describe(f: &CircleFunction) -> TauSpec {
        match f.closed_form() {
            Some(p) => TauSpec::Trigpoly {
                constant: p.constant,
                terms: p
                    .terms
                    .iter()
                    .map(|t| TermSpec { k: t.k, cos: t.cos, sin: t.sin })
                    .collect(),
            },
            None => TauSpec::Samples { values: f.samples().to_vec() },
        }
    }
}

/// Perturbed-map description: either an affine base with an explicit fiber
/// perturbation, or one of the built-in families.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    Perturbation {
        #[serde(default = "default_ell")]
        ell: u32,
        lambda: f64,
        tau: TauSpec,
        perturbation: PerturbationSpec,
    },
    Builtin(BuiltinMapSpec),
}

fn default_ell() -> u32 {
    2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum PerturbationSpec {
    VerticalTrig { delta: f64, k: u32 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum BuiltinMapSpec {
    LogQuadratic { lambda: f64, c_mod: f64, c_arg: f64 },
    RescaledLimit { lambda: f64, alpha: f64 },
}

impl MapSpec {
    pub fn from_json(s: &str) -> Result<Self, SpecError> {
        Ok(serde_json::from_str(s)?)
    }
}
