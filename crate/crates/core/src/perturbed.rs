//! Graph transforms for Lipschitz cylinder maps near the affine model:
//! constant estimation from finite differences, the fiberwise max/min
//! transfer operators on Lipschitz graphs, perturbed attractor boundaries,
//! the log-coordinate quadratic-like family, and its rescaled affine limit.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::affine::{BoundaryPair, SkewParams};
use crate::circle::{CircleFunction, TrigPoly, TrigTerm, TAU_2PI};
use crate::frac;

#[derive(Debug, Error)]
pub enum PerturbedError {
    #[error("no admissible graph Lipschitz budget: the map shears too strongly for graph preservation ({0})")]
    FailsPreservation(String),
    #[error("estimated vertical contraction lambda_hat = {0} is not below 1")]
    NotContracting(f64),
    #[error("graph transform iteration cap {0} exceeded (last step {1:.3e})")]
    IterationCap(u32, f64),
    #[error("base coordinate of the image is not strictly increasing near s = {0}")]
    MonotonicityViolation(f64),
    #[error("|c| = {0} must be smaller than 1 - lambda = {1}")]
    TranslationTooLarge(f64, f64),
    #[error("rescaled strip of half-height {0} exceeds the map domain {1}")]
    DomainOverflow(f64, f64),
    #[error("input graph violates the budget: {0}")]
    BadGraph(String),
}

/// Evaluation contract for a lifted cylinder map `F̃(s, t) = (f̃, g̃)` on the
/// strip `ℝ × [−T0, T0]`, satisfying `F̃(s+1, t) = F̃(s, t) + (ℓ, 0)`.
pub trait CylinderMap: Sync {
    fn eval(&self, s: f64, t: f64) -> (f64, f64);
    fn degree(&self) -> u32;
    fn strip_half_height(&self) -> f64;
}

/// Lift of the affine skew product to the universal cover.
#[derive(Debug, Clone)]
pub struct AffineLift {
    pub params: SkewParams,
}

impl AffineLift {
    pub fn new(params: SkewParams) -> Self {
        AffineLift { params }
    }
}

impl CylinderMap for AffineLift {
    fn eval(&self, s: f64, t: f64) -> (f64, f64) {
        (
            self.params.ell as f64 * s,
            self.params.lambda * t + self.params.tau.evaluate(frac(s)),
        )
    }

    fn degree(&self) -> u32 {
        self.params.ell
    }

    fn strip_half_height(&self) -> f64 {
        self.params.t0
    }
}

/// Additive fiber perturbation `g̃ ↦ g̃ + δ sin(2πks)` of another map.
pub struct VerticalTrig<M> {
    pub base: M,
    pub delta: f64,
    pub k: u32,
}

impl<M: CylinderMap> CylinderMap for VerticalTrig<M> {
    fn eval(&self, s: f64, t: f64) -> (f64, f64) {
        let (f, g) = self.base.eval(s, t);
        (f, g + self.delta * (TAU_2PI * self.k as f64 * s).sin())
    }

    fn degree(&self) -> u32 {
        self.base.degree()
    }

    fn strip_half_height(&self) -> f64 {
        self.base.strip_half_height()
    }
}

/// The quadratic-like family `z ↦ (λ|z| + 1 − λ) z²/|z|² + c` on `ℂ*`, read
/// in logarithmic coordinates `z = exp(2π(t + iθ))`. Degree 2; the strip is
/// chosen inside the trapping region (log-radii below `|c|/(1−λ)` up to a
/// safety factor).
pub struct LogQuadraticMap {
    pub lambda: f64,
    pub c: Complex64,
    t0: f64,
}

impl LogQuadraticMap {
    pub fn new(lambda: f64, c: Complex64) -> Result<Self, PerturbedError> {
        if c.norm() >= 1.0 - lambda {
            return Err(PerturbedError::TranslationTooLarge(c.norm(), 1.0 - lambda));
        }
        // Degenerate strip for c = 0 is widened so the unit circle has a
        // neighborhood to contract in.
        let t0 = (1.5 * c.norm() / (TAU_2PI * (1.0 - lambda))).max(1e-3 / TAU_2PI);
        Ok(LogQuadraticMap { lambda, c, t0 })
    }

    /// Builds from the modulus and the argument of `c` in turns.
    pub fn from_polar(lambda: f64, c_mod: f64, c_arg: f64) -> Result<Self, PerturbedError> {
        Self::new(lambda, Complex64::from_polar(c_mod, TAU_2PI * c_arg))
    }

    pub fn with_strip(lambda: f64, c: Complex64, t0: f64) -> Result<Self, PerturbedError> {
        let m = Self::new(lambda, c)?;
        Ok(LogQuadraticMap { t0, ..m })
    }
}

impl CylinderMap for LogQuadraticMap {
    fn eval(&self, s: f64, t: f64) -> (f64, f64) {
        // w = (λ e^{2πt} + 1 − λ) e^{4πis} + c = R e^{4πis} (1 + u) with
        // u = c e^{−4πis}/R; |u| < 1, so the continuous argument lift is
        // 2s + arg(1 + u)/2π and the radius is R|1 + u|.
        let r = self.lambda * (TAU_2PI * t).exp() + 1.0 - self.lambda;
        let phase = Complex64::from_polar(1.0, -2.0 * TAU_2PI * s);
        let one_plus_u = Complex64::new(1.0, 0.0) + self.c * phase / r;
        let f = 2.0 * s + one_plus_u.arg() / TAU_2PI;
        let g = (r * one_plus_u.norm()).ln() / TAU_2PI;
        (f, g)
    }

    fn degree(&self) -> u32 {
        2
    }

    fn strip_half_height(&self) -> f64 {
        self.t0
    }
}

/// The rescaled limit of the quadratic-like family at angle `α`: the affine
/// map with `τ_α(θ) = cos(2π(α − 2θ))/2π`, degree 2.
pub fn rescaled_limit(lambda: f64, alpha: f64) -> AffineLift {
    let poly = TrigPoly::new(
        0.0,
        vec![TrigTerm {
            k: 2,
            cos: (TAU_2PI * alpha).cos() / TAU_2PI,
            sin: (TAU_2PI * alpha).sin() / TAU_2PI,
        }],
    );
    let tau = CircleFunction::from_trig_poly(poly, crate::circle::DEFAULT_GRID)
        .expect("grid above Nyquist floor");
    AffineLift::new(SkewParams::new(2, lambda, tau).expect("valid parameters"))
}

/// Conjugation by the fiber rescaling `h_η(θ, t) = (θ, ηt)`:
/// `(s, t) ↦ (f̃(s, ηt), g̃(s, ηt)/η)` on the strip of half-height `t0/η`.
pub struct RescaleConjugate<M> {
    pub inner: M,
    pub eta: f64,
}

impl<M: CylinderMap> RescaleConjugate<M> {
    pub fn new(inner: M, eta: f64) -> Result<Self, PerturbedError> {
        if eta.is_nan() || eta <= 0.0 {
            return Err(PerturbedError::DomainOverflow(eta, 0.0));
        }
        Ok(RescaleConjugate { inner, eta })
    }
}

impl<M: CylinderMap> CylinderMap for RescaleConjugate<M> {
    fn eval(&self, s: f64, t: f64) -> (f64, f64) {
        let (f, g) = self.inner.eval(s, self.eta * t);
        (f, g / self.eta)
    }

    fn degree(&self) -> u32 {
        self.inner.degree()
    }

    fn strip_half_height(&self) -> f64 {
        self.inner.strip_half_height() / self.eta
    }
}

/// Graph-preservation constants of a cylinder map: expansion floor `ℓ0`,
/// vertical contraction `λ0`, cross-coupling bounds `C12`, `C21`, the graph
/// Lipschitz budget `C`, and the resulting operator contraction factor
/// `λ̂ = (λ0ℓ0 + C21C12)/(ℓ0 − C12C)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GraphConstants {
    pub ell0: f64,
    pub lambda0: f64,
    pub c12: f64,
    pub c21: f64,
    pub c: f64,
    pub lambda_hat: f64,
}

impl GraphConstants {
    /// Sensitivity of the fixed-point boundaries to map perturbations:
    /// an ε-move of the map moves the boundaries by at most
    /// `(1 + C)/(1 − λ̂) · ε`.
    pub fn amplification(&self) -> f64 {
        (1.0 + self.c) / (1.0 - self.lambda_hat)
    }
}

/// Estimates the constants by finite-difference probing of the strip.
///
/// Safety factors 0.95 / 1.05 compensate for sampled suprema. The budget `C`
/// is the smallest admissible solution of the preservation inequality, lifted
/// to the reference graph constant when one is supplied (the affine boundary
/// Lipschitz bound, so the fixed points lie inside the budget).
pub fn estimate_constants(
    map: &dyn CylinderMap,
    n_s: usize,
    n_t: usize,
    lip_reference: Option<f64>,
) -> Result<GraphConstants, PerturbedError> {
    assert!(n_s >= 8 && n_t >= 3, "probe grid too coarse");
    let t0 = map.strip_half_height();
    let ds = 1.0 / n_s as f64;
    let dt = 2.0 * t0 / (n_t - 1) as f64;

    let mut ell0_raw = f64::INFINITY;
    let mut lambda0_raw: f64 = 0.0;
    let mut c12_raw: f64 = 0.0;
    let mut c21_raw: f64 = 0.0;

    for j in 0..n_t {
        let t = -t0 + j as f64 * dt;
        let mut prev = map.eval(0.0, t);
        for i in 1..=n_s {
            let s = i as f64 * ds;
            let cur = map.eval(s, t);
            ell0_raw = ell0_raw.min((cur.0 - prev.0) / ds);
            c21_raw = c21_raw.max(((cur.1 - prev.1) / ds).abs());
            prev = cur;
        }
    }
    for i in 0..n_s {
        let s = i as f64 * ds;
        let mut prev = map.eval(s, -t0);
        for j in 1..n_t {
            let t = -t0 + j as f64 * dt;
            let cur = map.eval(s, t);
            c12_raw = c12_raw.max(((cur.0 - prev.0) / dt).abs());
            lambda0_raw = lambda0_raw.max(((cur.1 - prev.1) / dt).abs());
            prev = cur;
        }
    }

    let ell0 = 0.95 * ell0_raw;
    let lambda0 = 1.05 * lambda0_raw;
    let c12 = 1.05 * c12_raw;
    let c21 = 1.05 * c21_raw;

    if ell0 <= 0.0 {
        return Err(PerturbedError::FailsPreservation(format!(
            "expansion floor {ell0:.3e} is not positive"
        )));
    }
    // Preservation needs C12 C² − (ℓ0 − λ0) C + C21 ≤ 0 for some C < ℓ0/C12.
    let c = if c12 < 1e-12 {
        if ell0 <= lambda0 {
            return Err(PerturbedError::FailsPreservation(format!(
                "no expansion gap: ell0 = {ell0:.3}, lambda0 = {lambda0:.3}"
            )));
        }
        let c_lo = c21 / (ell0 - lambda0);
        c_lo.max(lip_reference.unwrap_or(c_lo))
    } else {
        let disc = (ell0 - lambda0).powi(2) - 4.0 * c12 * c21;
        if disc < 0.0 || ell0 <= lambda0 {
            return Err(PerturbedError::FailsPreservation(format!(
                "discriminant {disc:.3e} of the budget inequality is negative"
            )));
        }
        let c_lo = ((ell0 - lambda0) - disc.sqrt()) / (2.0 * c12);
        let c_hi = ((ell0 - lambda0) + disc.sqrt()) / (2.0 * c12);
        c_lo.max(lip_reference.unwrap_or(c_lo)).min(c_hi)
    };

    let lambda_hat = (lambda0 * ell0 + c21 * c12) / (ell0 - c12 * c);
    Ok(GraphConstants { ell0, lambda0, c12, c21, c, lambda_hat })
}

/// Pushes the graph of `rho` forward by the map and reads the extremal
/// branch back as a function over the base.
///
/// The base coordinate `s ↦ f̃(s, ρ(s))` is strictly increasing when the
/// constants admit a budget, so each branch is inverted by monotone
/// bisection onto the target grid; the fiberwise max (`+`) or min (`−`) over
/// the ℓ branches is returned. The result is again `C`-Lipschitz.
pub fn graph_transform(
    map: &dyn CylinderMap,
    gc: &GraphConstants,
    rho: &CircleFunction,
    take_max: bool,
) -> Result<CircleFunction, PerturbedError> {
    let t0 = map.strip_half_height();
    if rho.sup_norm() > t0 * (1.0 + 1e-9) {
        return Err(PerturbedError::BadGraph(format!(
            "sup {:.3} exceeds strip half-height {:.3}",
            rho.sup_norm(),
            t0
        )));
    }
    let n = rho.n_samples();
    let ell = map.degree() as usize;
    let phi = |s: f64| map.eval(s, rho.interpolate(s)).0;

    // Monotonicity probe; estimated constants must catch a folding graph.
    let probe: Vec<f64> = (0..=n).map(|i| phi(i as f64 / n as f64)).collect();
    for i in 0..n {
        if probe[i + 1] <= probe[i] {
            return Err(PerturbedError::MonotonicityViolation(i as f64 / n as f64));
        }
    }
    let a = probe[0];

    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = i as f64 / n as f64;
            let mut best = if take_max { f64::NEG_INFINITY } else { f64::INFINITY };
            for j in 0..ell {
                // Shift x + j into the fundamental image interval [a, a+ℓ).
                let v = x + j as f64;
                let shift = ((a - v) / ell as f64).ceil();
                let target = v + shift * ell as f64;
                let mut lo = 0.0;
                let mut hi = 1.0;
                for _ in 0..50 {
                    let mid = 0.5 * (lo + hi);
                    if phi(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let s = 0.5 * (lo + hi);
                let t = map.eval(s, rho.interpolate(s)).1;
                best = if take_max { best.max(t) } else { best.min(t) };
            }
            best
        })
        .collect();
    Ok(CircleFunction::from_samples(out, gc.c).expect("grid >= 2"))
}

/// Iterates the extremal graph transforms from the constants `±T0` until
/// successive sup-distance drops below `tol·(1−λ̂)`.
pub fn perturbed_boundaries(
    map: &dyn CylinderMap,
    gc: &GraphConstants,
    n_grid: usize,
    tol: f64,
) -> Result<BoundaryPair, PerturbedError> {
    if gc.lambda_hat >= 1.0 {
        return Err(PerturbedError::NotContracting(gc.lambda_hat));
    }
    let t0 = map.strip_half_height();
    let stop = tol * (1.0 - gc.lambda_hat);
    let cap = {
        let target = stop / (2.0 * t0);
        if target >= 1.0 {
            16
        } else {
            (target.ln() / gc.lambda_hat.ln()).ceil() as u32 + 16
        }
    };

    let mut iterations = 0;
    let mut run = |start: f64, take_max: bool| -> Result<CircleFunction, PerturbedError> {
        let mut rho = CircleFunction::constant(start, n_grid);
        for it in 1..=cap {
            let next = graph_transform(map, gc, &rho, take_max)?;
            let diff = next.sup_dist(&rho);
            rho = next;
            if diff < stop {
                iterations = iterations.max(it);
                return Ok(rho);
            }
        }
        Err(PerturbedError::IterationCap(cap, stop))
    };

    let plus = run(t0, true)?;
    let minus = run(-t0, false)?;
    let residual = graph_transform(map, gc, &plus, true)?
        .sup_dist(&plus)
        .max(graph_transform(map, gc, &minus, false)?.sup_dist(&minus));
    Ok(BoundaryPair { rho_plus: plus, rho_minus: minus, residual, iterations })
}

/// Fiberwise annulus margin for a general cylinder map: the minimum over the
/// base of (lowest point of the image of the upper boundary) − (highest
/// point of the image of the lower boundary).
pub fn map_annulus_margin(
    map: &dyn CylinderMap,
    gc: &GraphConstants,
    pair: &BoundaryPair,
) -> Result<f64, PerturbedError> {
    let low_of_plus = graph_transform(map, gc, &pair.rho_plus, false)?;
    let high_of_minus = graph_transform(map, gc, &pair.rho_minus, true)?;
    Ok(low_of_plus
        .samples()
        .iter()
        .zip(high_of_minus.samples())
        .map(|(a, b)| a - b)
        .fold(f64::INFINITY, f64::min))
}
