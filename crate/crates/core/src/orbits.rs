//! Periodic orbits of the expanding map `m_ℓ` in exact rational arithmetic,
//! Birkhoff sums along them, and signed-sum witnesses certifying that a
//! function is not a coboundary.
//!
//! A period-`p` point is `θ = j/(ℓ^p − 1)`; its orbit is generated by
//! `j ↦ jℓ mod (ℓ^p − 1)`. Keeping the numerators as integers avoids the
//! error blow-up of repeated floating-point multiplication by ℓ.

use serde::Serialize;
use thiserror::Error;

use crate::circle::CircleFunction;

#[derive(Debug, Error)]
pub enum OrbitError {
    #[error("ell^p - 1 overflows with ell = {0}, p = {1}")]
    Overflow(u32, u32),
    #[error("p_max must be >= 1")]
    EmptyRange,
}

/// One periodic orbit of `m_ℓ`, stored exactly as `θ_0 = j/(ℓ^p − 1)`.
#[derive(Debug, Clone, Serialize)]
pub struct PeriodicOrbit {
    /// Least period.
    pub period: u32,
    /// Numerator of the lexicographically least orbit point.
    pub numerator: u64,
    /// Common denominator `ℓ^p − 1`.
    pub denominator: u64,
    /// Orbit points `θ, ℓθ, …, ℓ^{p−1}θ` as floats.
    pub points: Vec<f64>,
    /// Birkhoff sum `Σ τ(point)` once bound to a function; 0 until then.
    pub birkhoff_sum: f64,
}

impl PeriodicOrbit {
    pub fn theta0(&self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }

    pub fn birkhoff_average(&self) -> f64 {
        self.birkhoff_sum / self.period as f64
    }

    /// Evaluates and stores the Birkhoff sum of `tau` along the orbit.
    pub fn bind(&mut self, tau: &CircleFunction) -> f64 {
        self.birkhoff_sum = self.points.iter().map(|&th| tau.evaluate(th)).sum();
        self.birkhoff_sum
    }
}

fn checked_pow(ell: u32, p: u32) -> Option<u64> {
    (ell as u64).checked_pow(p)
}

/// All orbits of least period `≤ p_max`, each listed once through its
/// lexicographically least numerator.
pub fn periodic_orbits(ell: u32, p_max: u32) -> Result<Vec<PeriodicOrbit>, OrbitError> {
    if p_max < 1 {
        return Err(OrbitError::EmptyRange);
    }
    // The walk multiplies numerators below ell^p - 1 by ell, so ell^(p+1)
    // must stay exact.
    checked_pow(ell, p_max)
        .and_then(|v| v.checked_mul(ell as u64))
        .ok_or(OrbitError::Overflow(ell, p_max))?;
    let mut out = Vec::new();
    for p in 1..=p_max {
        let modulus = checked_pow(ell, p).unwrap() - 1;
        // Walk the orbit of j under multiplication by ell mod (ell^p - 1);
        // emit it when j is the least numerator and the length is exactly p
        // (shorter orbits were listed under their own denominator).
        for j in 0..modulus {
            let mut orbit = Vec::with_capacity(p as usize);
            let mut x = j;
            let mut is_min = true;
            loop {
                orbit.push(x);
                x = (x * ell as u64) % modulus;
                if x < j {
                    is_min = false;
                    break;
                }
                if x == j {
                    break;
                }
            }
            if is_min && orbit.len() == p as usize {
                let points = orbit.iter().map(|&n| n as f64 / modulus as f64).collect();
                out.push(PeriodicOrbit {
                    period: p,
                    numerator: j,
                    denominator: modulus,
                    points,
                    birkhoff_sum: 0.0,
                });
            }
        }
    }
    Ok(out)
}

/// Outcome of the signed-witness search.
#[derive(Debug, Clone, Serialize)]
pub struct BirkhoffExtremes {
    pub best_positive: Option<PeriodicOrbit>,
    pub best_negative: Option<PeriodicOrbit>,
}

/// Finds the orbits of period `≤ p_max` maximizing and minimizing the
/// Birkhoff average of `tau`, reported as witnesses only when the sum's sign
/// survives the interpolation margin `p·lip(τ)/N` (one grid cell per orbit
/// point cannot fake a sign beyond that).
pub fn birkhoff_extremes(
    tau: &CircleFunction,
    ell: u32,
    p_max: u32,
) -> Result<BirkhoffExtremes, OrbitError> {
    let mut orbits = periodic_orbits(ell, p_max)?;
    let cell_err = tau.lip_bound() / tau.n_samples() as f64;
    let mut best_pos: Option<PeriodicOrbit> = None;
    let mut best_neg: Option<PeriodicOrbit> = None;
    for o in &mut orbits {
        o.bind(tau);
        let margin = o.period as f64 * cell_err;
        if o.birkhoff_sum > margin
            && best_pos
                .as_ref()
                .map(|b| o.birkhoff_average() > b.birkhoff_average())
                .unwrap_or(true)
            {
                best_pos = Some(o.clone());
            }
        if o.birkhoff_sum < -margin
            && best_neg
                .as_ref()
                .map(|b| o.birkhoff_average() < b.birkhoff_average())
                .unwrap_or(true)
            {
                best_neg = Some(o.clone());
            }
    }
    Ok(BirkhoffExtremes { best_positive: best_pos, best_negative: best_neg })
}

/// Verdict of the periodic-sum coboundary test. A coboundary telescopes to
/// zero along every cycle, so strict signed sums in both directions certify
/// a non-coboundary; anything else is inconclusive at finite period.
#[derive(Debug, Clone, Serialize)]
pub enum CoboundaryVerdict {
    NotCoboundary {
        positive: PeriodicOrbit,
        negative: PeriodicOrbit,
        mean_subtracted: bool,
    },
    Inconclusive {
        mean_subtracted: bool,
    },
}

pub fn coboundary_witness(
    tau: &CircleFunction,
    ell: u32,
    p_max: u32,
) -> Result<CoboundaryVerdict, OrbitError> {
    let mean = tau.mean();
    let mean_subtracted = mean.abs() > 1e-12;
    let shifted;
    let f = if mean_subtracted {
        shifted = CircleFunction::from_samples(
            tau.samples().iter().map(|v| v - mean).collect(),
            tau.lip_bound(),
        )
        .expect("same grid");
        &shifted
    } else {
        tau
    };
    let ext = birkhoff_extremes(f, ell, p_max)?;
    Ok(match (ext.best_positive, ext.best_negative) {
        (Some(positive), Some(negative)) => {
            CoboundaryVerdict::NotCoboundary { positive, negative, mean_subtracted }
        }
        _ => CoboundaryVerdict::Inconclusive { mean_subtracted },
    })
}
