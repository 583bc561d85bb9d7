//! The skew product `A_{λ,τ}(θ, t) = (ℓθ, λt + τ(θ))`: trapping region,
//! solenoid semiconjugacy, and the upper/lower attractor boundaries as fixed
//! points of the max/min boundary operators.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::circle::CircleFunction;
use crate::{circle_dist, frac};

#[derive(Debug, Error)]
pub enum AffineError {
    #[error("ell must be >= 2, got {0}")]
    BadDegree(u32),
    #[error("lambda must lie in (0,1), got {0}")]
    BadLambda(f64),
    #[error("trapping bound violated: (1-lambda)*T0 = {0} does not exceed sup|tau| = {1}")]
    NotTrapping(f64, f64),
    #[error("boundary iteration cap {0} exceeded (residual {1:.3e}); tolerance unreachable at this grid")]
    IterationCap(u32, f64),
    #[error("itinerary depths differ: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("backward-orbit consistency violated at step {0}: m_ell(theta_{{k+1}}) != theta_k")]
    NotBackwardOrbit(usize),
    #[error("itinerary must have depth >= 1 for t_lambda")]
    EmptyItinerary,
}

/// Parameters `(ℓ, λ, τ)` of the skew product, plus the trapping bound `T0`.
#[derive(Debug, Clone)]
pub struct SkewParams {
    pub ell: u32,
    pub lambda: f64,
    pub tau: CircleFunction,
    pub t0: f64,
}

impl SkewParams {
    /// Builds the parameter triple with `T0` from [`trapping_radius`].
    pub fn new(ell: u32, lambda: f64, tau: CircleFunction) -> Result<Self, AffineError> {
        let t0 = trapping_radius(lambda, &tau)?;
        Self::with_t0(ell, lambda, tau, t0)
    }

    /// Builds with an explicit `T0`, checking `(1−λ)T0 > sup|τ|`.
    pub fn with_t0(ell: u32, lambda: f64, tau: CircleFunction, t0: f64) -> Result<Self, AffineError> {
        if ell < 2 {
            return Err(AffineError::BadDegree(ell));
        }
        if !(0.0 < lambda && lambda < 1.0) {
            return Err(AffineError::BadLambda(lambda));
        }
        let sup = tau.sup_norm();
        if (1.0 - lambda) * t0 <= sup {
            return Err(AffineError::NotTrapping((1.0 - lambda) * t0, sup));
        }
        Ok(SkewParams { ell, lambda, tau, t0 })
    }

    /// One forward step `(θ, t) ↦ (ℓθ mod 1, λt + τ(θ))`.
    pub fn apply(&self, theta: f64, t: f64) -> (f64, f64) {
        (
            frac(self.ell as f64 * frac(theta)),
            self.lambda * t + self.tau.evaluate(theta),
        )
    }
}

/// `T0 = 1.05·sup|τ|/(1−λ)`, strictly trapping whenever `sup|τ| > 0`;
/// returns 1 for `τ ≡ 0`.
pub fn trapping_radius(lambda: f64, tau: &CircleFunction) -> Result<f64, AffineError> {
    if !(0.0 < lambda && lambda < 1.0) {
        return Err(AffineError::BadLambda(lambda));
    }
    let sup = tau.sup_norm();
    if sup == 0.0 {
        Ok(1.0)
    } else {
        Ok(1.05 * sup / (1.0 - lambda))
    }
}

/// The `ℓ` preimages `{(θ+j)/ℓ : j = 0,…,ℓ−1}` of `θ` under `m_ℓ`, sorted.
pub fn preimages(ell: u32, theta: f64) -> Vec<f64> {
    let th = frac(theta);
    (0..ell).map(|j| (th + j as f64) / ell as f64).collect()
}

/// A finite backward orbit `(θ_0, …, θ_D)` of `m_ℓ`: a depth-`D` truncation
/// of a solenoid point over `θ_0`.
#[derive(Debug, Clone)]
pub struct Itinerary {
    thetas: Vec<f64>,
}

impl Itinerary {
    /// Validates `m_ℓ(θ_{k+1}) = θ_k` to within `1e−9` on the circle.
    /// At least the base point `θ_0` is required (depth 0).
    pub fn new(ell: u32, thetas: Vec<f64>) -> Result<Self, AffineError> {
        if thetas.is_empty() {
            return Err(AffineError::EmptyItinerary);
        }
        for k in 0..thetas.len().saturating_sub(1) {
            let forward = frac(ell as f64 * frac(thetas[k + 1]));
            if circle_dist(forward, thetas[k]) > 1e-9 {
                return Err(AffineError::NotBackwardOrbit(k));
            }
        }
        Ok(Itinerary { thetas })
    }

    /// Extends `θ_0` backward by the given preimage branch choices.
    pub fn from_branches(ell: u32, theta0: f64, branches: &[u32]) -> Self {
        let mut thetas = Vec::with_capacity(branches.len() + 1);
        thetas.push(frac(theta0));
        for &j in branches {
            let prev = *thetas.last().unwrap();
            thetas.push((prev + (j % ell) as f64) / ell as f64);
        }
        Itinerary { thetas }
    }

    pub fn depth(&self) -> usize {
        self.thetas.len() - 1
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }
}

/// Partial sum of the fiber series `t_λ(θ̄) = Σ_{k≥1} λ^{k−1} τ(θ_k)` over a
/// finite itinerary, together with the geometric tail bound
/// `λ^D sup|τ| / (1−λ)`.
pub fn t_lambda(p: &SkewParams, it: &Itinerary) -> Result<(f64, f64), AffineError> {
    let d = it.depth();
    if d == 0 {
        return Err(AffineError::EmptyItinerary);
    }
    let mut value = 0.0;
    let mut coef = 1.0;
    for k in 1..=d {
        value += coef * p.tau.evaluate(it.thetas[k]);
        coef *= p.lambda;
    }
    let tail = coef * p.tau.sup_norm() / (1.0 - p.lambda);
    Ok((value, tail))
}

/// Adapted solenoid metric `Σ_{k=0}^{D} λ^k dist_T(θ_k, θ'_k)` on two
/// itineraries of equal depth.
pub fn dist_lambda(a: &Itinerary, b: &Itinerary, lambda: f64) -> Result<f64, AffineError> {
    if a.thetas.len() != b.thetas.len() {
        return Err(AffineError::DepthMismatch(a.depth(), b.depth()));
    }
    let mut dist = 0.0;
    let mut coef = 1.0;
    for (x, y) in a.thetas.iter().zip(&b.thetas) {
        dist += coef * circle_dist(*x, *y);
        coef *= lambda;
    }
    Ok(dist)
}

/// Converged upper and lower boundaries with the functional-equation defect
/// on the grid and the iteration count.
#[derive(Debug, Clone)]
pub struct BoundaryPair {
    pub rho_plus: CircleFunction,
    pub rho_minus: CircleFunction,
    pub residual: f64,
    pub iterations: u32,
}

impl BoundaryPair {
    pub fn n_grid(&self) -> usize {
        self.rho_plus.n_samples()
    }

    /// `min_θ (ρ+ − ρ−)` on the grid.
    pub fn jordan_gap(&self) -> f64 {
        self.rho_plus
            .samples()
            .iter()
            .zip(self.rho_minus.samples())
            .map(|(p, m)| p - m)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Precomputed data for one sweep of the boundary operator
/// `(Tρ)(θ) = extremum over θ' ∈ m_ℓ^{-1}(θ) of λρ(θ') + τ(θ')`.
struct BoundaryOperator {
    ell: usize,
    n: usize,
    lambda: f64,
    /// τ evaluated at the preimage points (i + jN)/(ℓN), flattened by i then j.
    tau_pre: Vec<f64>,
}

impl BoundaryOperator {
    fn new(p: &SkewParams, n: usize) -> Self {
        let ell = p.ell as usize;
        let mut tau_pre = Vec::with_capacity(n * ell);
        for i in 0..n {
            for j in 0..ell {
                let x = (i as f64 / n as f64 + j as f64) / ell as f64;
                tau_pre.push(p.tau.evaluate(x));
            }
        }
        BoundaryOperator { ell, n, lambda: p.lambda, tau_pre }
    }

    /// ρ at the preimage point (i + jN)/(ℓN), by linear interpolation on the
    /// N-grid. Preimages of grid points generally fall between grid points.
    #[inline]
    fn rho_at_preimage(&self, rho: &[f64], i: usize, j: usize) -> f64 {
        let pos = (i + j * self.n) as f64 / self.ell as f64;
        let base = pos.floor() as usize;
        let fr = pos - base as f64;
        let a = rho[base % self.n];
        if fr == 0.0 {
            a
        } else {
            let b = rho[(base + 1) % self.n];
            a + (b - a) * fr
        }
    }

    fn sweep(&self, rho: &[f64], take_max: bool) -> Vec<f64> {
        (0..self.n)
            .into_par_iter()
            .map(|i| {
                let mut best = if take_max { f64::NEG_INFINITY } else { f64::INFINITY };
                for j in 0..self.ell {
                    let v = self.lambda * self.rho_at_preimage(rho, i, j)
                        + self.tau_pre[i * self.ell + j];
                    best = if take_max { best.max(v) } else { best.min(v) };
                }
                best
            })
            .collect()
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Iteration cap: enough contraction steps to close the gap from the
/// constant-`T0` start, plus slack.
fn iteration_cap(lambda: f64, t0: f64, tol: f64) -> u32 {
    let target = tol * (1.0 - lambda) / (2.0 * t0);
    if target >= 1.0 {
        return 16;
    }
    (target.ln() / lambda.ln()).ceil() as u32 + 16
}

/// Solves the boundary functional equations by contraction iteration from
/// the constants `±T0` on an `n_grid` uniform grid.
///
/// Stops when successive iterates are closer than `tol·(1−λ)` in sup norm,
/// which bounds the true sup error by `tol`. The reported residual is the
/// final defect of the functional equation on the grid.
pub fn boundary_fixed_point(
    p: &SkewParams,
    n_grid: usize,
    tol: f64,
) -> Result<BoundaryPair, AffineError> {
    assert!(tol > 0.0, "tol must be positive");
    let op = BoundaryOperator::new(p, n_grid);
    let cap = iteration_cap(p.lambda, p.t0, tol);
    let stop = tol * (1.0 - p.lambda);

    let mut iterations = 0;
    let mut run = |start: f64, take_max: bool| -> Result<Vec<f64>, AffineError> {
        let mut rho = vec![start; n_grid];
        for it in 1..=cap {
            let next = op.sweep(&rho, take_max);
            let diff = sup_diff(&next, &rho);
            rho = next;
            if diff < stop {
                iterations = iterations.max(it);
                return Ok(rho);
            }
        }
        let diff = sup_diff(&op.sweep(&rho, take_max), &rho);
        Err(AffineError::IterationCap(cap, diff))
    };

    let plus = run(p.t0, true)?;
    let minus = run(-p.t0, false)?;

    let residual = sup_diff(&op.sweep(&plus, true), &plus)
        .max(sup_diff(&op.sweep(&minus, false), &minus));

    // Certified bound for the limits plus the noise a tol-sized sample error
    // can add to a difference quotient.
    let lip = p.tau.lip_bound() / (p.ell as f64 - p.lambda) + 2.0 * tol * n_grid as f64;
    Ok(BoundaryPair {
        rho_plus: CircleFunction::from_samples(plus, lip).expect("grid >= 2"),
        rho_minus: CircleFunction::from_samples(minus, lip).expect("grid >= 2"),
        residual,
        iterations,
    })
}

/// One sweep of the boundary operator on arbitrary sample data; exposed for
/// contraction measurements.
pub fn boundary_operator_step(p: &SkewParams, rho: &CircleFunction, take_max: bool) -> CircleFunction {
    let op = BoundaryOperator::new(p, rho.n_samples());
    let out = op.sweep(rho.samples(), take_max);
    CircleFunction::from_samples_auto(out).expect("grid >= 2")
}

/// Samples the attractor through the solenoid semiconjugacy: each point is
/// `(θ_0, t_λ(θ̄))` for a random backward orbit θ̄ truncated at `depth`,
/// branches chosen uniformly. Deterministic for a fixed seed.
pub fn sample_attractor(
    p: &SkewParams,
    n_points: usize,
    depth: usize,
    seed: u64,
) -> Vec<(f64, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_points);
    for _ in 0..n_points {
        let theta0: f64 = rng.random();
        let mut theta = theta0;
        let mut value = 0.0;
        let mut coef = 1.0;
        for _ in 0..depth {
            let j = rng.random_range(0..p.ell);
            theta = (theta + j as f64) / p.ell as f64;
            value += coef * p.tau.evaluate(theta);
            coef *= p.lambda;
        }
        out.push((theta0, value));
    }
    out
}

/// CSV export `theta,rho_minus,rho_plus`, one row per grid point.
pub fn boundaries_to_csv(pair: &BoundaryPair) -> String {
    let n = pair.n_grid();
    let mut s = String::from("theta,rho_minus,rho_plus\n");
    for i in 0..n {
        s.push_str(&format!(
            "{:.12e},{:.12e},{:.12e}\n",
            i as f64 / n as f64,
            pair.rho_minus.samples()[i],
            pair.rho_plus.samples()[i],
        ));
    }
    s
}

/// CSV export `theta,t` for point clouds.
pub fn points_to_csv(points: &[(f64, f64)]) -> String {
    let mut s = String::from("theta,t\n");
    for (theta, t) in points {
        s.push_str(&format!("{:.12e},{:.12e}\n", theta, t));
    }
    s
}
