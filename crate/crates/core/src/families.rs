//! Builders and verifiers for the two worked attractor families: the
//! fat-hole construction (non-empty interior, not an annulus, robust under
//! Lipschitz perturbation) and annulus detection for the log-coordinate
//! quadratic-like family.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::affine::{boundary_fixed_point, BoundaryPair, SkewParams};
use crate::circle::CircleFunction;
use crate::frac;
use crate::perturbed::{
    estimate_constants, map_annulus_margin, perturbed_boundaries, rescaled_limit,
    LogQuadraticMap, PerturbedError,
};

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("lambda must lie in (1/2, 1) for the fat-hole construction, got {0}")]
    BadLambda(f64),
    #[error("grid of {n} samples too coarse for the transition slope; need at least {need}")]
    GridTooCoarse { n: usize, need: usize },
    #[error("boundary pair residual {0:.3e} too large for verification")]
    Unconverged(f64),
    #[error(transparent)]
    Affine(#[from] crate::affine::AffineError),
}

/// Exact rational `num/den` for cycle points of the doubling map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Frac {
    pub num: u64,
    pub den: u64,
}

impl Frac {
    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }
}

/// All constants of the fat-hole construction at one λ.
///
/// The circle carries a period-`p` cycle `θ_0, …, θ_{p−1}` of the doubling
/// map (the orbit of `1/(2^p − 1)`, labelled so that `I_0 = (θ_0, θ_1)` is
/// the long interval through 1). The function τ vanishes on the shrunken
/// `I_0`, sits at `λ'` on the other shrunken intervals, and spikes to `T0`
/// exactly at the cycle points.
#[derive(Debug, Clone, Serialize)]
pub struct FatHoleParams {
    pub lambda: f64,
    /// Cycle period: minimal p with λ + … + λ^{p−1} > 1.
    pub p: u32,
    pub eta: f64,
    /// Cycle in dynamical order: θ_0 = 2^{p−1}/(2^p−1), θ_{j+1} = 2θ_j.
    pub theta_cycle: Vec<Frac>,
    /// Excess length |I_0| − 1/2 = 1/(2(2^p − 1)).
    pub delta: f64,
    pub t0: f64,
    /// Escape-time threshold (λ − λ^N)/(1−λ) + λ^N T0/(1−λ).
    pub t1: f64,
    /// Escape-depth cap N: minimal N ≥ 2 with T0/λ > T1.
    pub n_cap: u32,
    /// Transition half-widths ε_0, …, ε_{p−1}; ε_0 is the largest (the
    /// shrunken intervals must cover each other's closures under doubling,
    /// cyclically), all below δ·2^{−N+1}.
    pub epsilons: Vec<f64>,
    pub lambda_prime: f64,
}

impl FatHoleParams {
    /// Geometric sum λ + λ² + … + λ^{p−1}.
    pub fn lambda_sum(&self) -> f64 {
        geometric_sum(self.lambda, self.p)
    }

    /// Interval `I_j = (θ_j, θ_{j+1 mod p})` as floats.
    pub fn interval(&self, j: usize) -> (f64, f64) {
        let p = self.p as usize;
        (
            self.theta_cycle[j].to_f64(),
            self.theta_cycle[(j + 1) % p].to_f64(),
        )
    }

    /// Shrunken interval `I_j^{ε_j} = (θ_j + ε_j, θ_{j+1} − ε_j)`.
    pub fn shrunken_interval(&self, j: usize) -> (f64, f64) {
        let (a, b) = self.interval(j);
        (frac(a + self.epsilons[j]), frac(b - self.epsilons[j]))
    }

    /// Checks every displayed constraint of the construction; returns the
    /// list of violated ones (empty when all hold).
    pub fn violated_constraints(&self) -> Vec<String> {
        let mut bad = Vec::new();
        let s = self.lambda_sum();
        if s * self.eta <= 1.0 {
            bad.push(format!("(lambda+...+lambda^(p-1))*eta = {} <= 1", s * self.eta));
        }
        if self.t0 <= 1.0 / (1.0 - self.lambda) {
            bad.push(format!("T0 = {} <= 1/(1-lambda)", self.t0));
        }
        if self.t0 / self.lambda <= self.t1 {
            bad.push(format!("T0/lambda = {} <= T1 = {}", self.t0 / self.lambda, self.t1));
        }
        let cap = self.delta * 2f64.powi(-(self.n_cap as i32) + 1);
        if !(0.0 < self.epsilons[0] && self.epsilons[0] < cap) {
            bad.push(format!("epsilon_0 = {} outside (0, {})", self.epsilons[0], cap));
        }
        for j in 1..(self.p as usize - 1) {
            if 2.0 * self.epsilons[j] >= self.epsilons[j + 1] {
                bad.push(format!("2*epsilon_{} >= epsilon_{}", j, j + 1));
            }
        }
        if !(self.lambda * self.eta < self.lambda_prime && self.lambda_prime < self.lambda) {
            bad.push(format!("lambda' = {} outside (lambda*eta, lambda)", self.lambda_prime));
        }
        let (a, b) = self.interval(0);
        let len_i0 = frac(b - a);
        if len_i0 <= 0.5 {
            bad.push(format!("|I_0| = {len_i0} <= 1/2"));
        }
        bad
    }
}

fn geometric_sum(lambda: f64, p: u32) -> f64 {
    (1..p).map(|j| lambda.powi(j as i32)).sum()
}

/// Derives all fat-hole constants at `lambda` by exact arithmetic; no
/// sampling happens here, so any λ ∈ (1/2, 1) is feasible.
pub fn fat_hole_params(lambda: f64) -> Result<FatHoleParams, FamilyError> {
    if !(0.5 < lambda && lambda < 1.0) {
        return Err(FamilyError::BadLambda(lambda));
    }
    let mut p = 2u32;
    while geometric_sum(lambda, p) <= 1.0 {
        p += 1;
    }
    let s = geometric_sum(lambda, p);
    // midpoint of (1/S, 1) keeps the cycle-sum condition strict
    let eta = 0.5 * (1.0 / s + 1.0);

    let den = (1u64 << p) - 1;
    let mut theta_cycle = Vec::with_capacity(p as usize);
    theta_cycle.push(Frac { num: 1 << (p - 1), den }); // θ_0
    for j in 1..p {
        theta_cycle.push(Frac { num: 1 << (j - 1), den });
    }
    let delta = 1.0 / (2.0 * den as f64);

    let t0 = 1.2 / (1.0 - lambda);
    let mut n_cap = 2u32;
    let t1_of = |n: u32| {
        (lambda - lambda.powi(n as i32)) / (1.0 - lambda)
            + lambda.powi(n as i32) * t0 / (1.0 - lambda)
    };
    while t0 / lambda <= t1_of(n_cap) {
        n_cap += 1;
    }
    let t1 = t1_of(n_cap);

    // ε ladder: ε_1 < ε_2 < … < ε_{p−1} < ε_0 with ratio 2.5, topped by
    // ε_0 = 0.9·δ·2^{1−N}. The top slot goes to ε_0 so the doubled shrunken
    // interval I_{p−1} still covers the closure of I_0's shrinkage.
    let cap = delta * 2f64.powi(-(n_cap as i32) + 1);
    let eps0 = 0.9 * cap;
    let mut epsilons = vec![0.0; p as usize];
    epsilons[0] = eps0;
    let mut e = eps0 / 2.5;
    for j in (1..p as usize).rev() {
        epsilons[j] = e;
        e /= 2.5;
    }

    let lambda_prime = 0.5 * (lambda * eta + lambda);

    Ok(FatHoleParams {
        lambda,
        p,
        eta,
        theta_cycle,
        delta,
        t0,
        t1,
        n_cap,
        epsilons,
        lambda_prime,
    })
}

/// Cubic smoothstep on [0, 1].
fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * (3.0 - 2.0 * x)
}

/// Evaluates the fat-hole τ exactly from the parameters: plateaus on the
/// shrunken intervals, `C¹` transitions of width `ε_j` at each end, value
/// `T0` at every cycle point.
pub fn fat_hole_tau_exact(params: &FatHoleParams, theta: f64) -> f64 {
    let p = params.p as usize;
    let th = frac(theta);
    for j in 0..p {
        let (a, b) = params.interval(j);
        let len = frac(b - a);
        let u = frac(th - a);
        if u < len || (j == 0 && u == len) {
            let eps = params.epsilons[j];
            let plateau = if j == 0 { 0.0 } else { params.lambda_prime };
            if u < eps {
                return plateau + (params.t0 - plateau) * smoothstep(1.0 - u / eps);
            }
            if u > len - eps {
                return plateau + (params.t0 - plateau) * smoothstep((u - (len - eps)) / eps);
            }
            return plateau;
        }
    }
    params.t0 // exactly at a cycle point
}

/// Builds the sampled fat-hole τ at `n_samples` grid points.
///
/// The steepest transition has slope `1.5·T0/min_j ε_j`; the grid must put
/// at least `32·T0/min_j ε_j` samples on the circle to resolve it.
pub fn build_fat_hole(
    lambda: f64,
    n_samples: usize,
) -> Result<(CircleFunction, FatHoleParams), FamilyError> {
    let params = fat_hole_params(lambda)?;
    let eps_min = params.epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
    let need = (32.0 * params.t0 / eps_min).ceil() as usize;
    if n_samples < need {
        return Err(FamilyError::GridTooCoarse { n: n_samples, need });
    }
    let samples: Vec<f64> = (0..n_samples)
        .map(|i| fat_hole_tau_exact(&params, i as f64 / n_samples as f64))
        .collect();
    let lip = 1.5 * params.t0 / eps_min;
    let tau = CircleFunction::from_samples(samples, lip).expect("grid >= 2");
    Ok((tau, params))
}

/// Verification report for the fat-hole construction.
#[derive(Debug, Clone, Serialize)]
pub struct FatHoleReport {
    /// sup |ρ−| — the lower boundary collapses onto the equator.
    pub rho_minus_sup: f64,
    pub lower_boundary_flat: bool,
    /// worst |ρ+(θ_j) − T0/(1−λ)| over the cycle.
    pub cycle_error: f64,
    pub cycle_values_attained: bool,
    /// ρ+(θ_0 + 1/2), which must stay below T0/λ.
    pub antipode_value: f64,
    pub antipode_below_escape: bool,
    /// Annulus margin evaluated at θ_1 (negative: not an annulus).
    pub margin_at_theta1: f64,
    pub margin_negative: bool,
    /// Forward-invariance of the rasterized interior region R.
    pub region_invariant: bool,
    pub all_pass: bool,
}

/// Checks the five boundary/interior properties of the construction against
/// a converged boundary pair.
pub fn verify_fat_hole(
    params: &FatHoleParams,
    skew: &SkewParams,
    pair: &BoundaryPair,
    tol_flat: f64,
    tol_cycle: f64,
) -> Result<FatHoleReport, FamilyError> {
    if pair.residual > tol_cycle {
        return Err(FamilyError::Unconverged(pair.residual));
    }
    let lambda = params.lambda;
    let t0 = params.t0;

    let rho_minus_sup = pair.rho_minus.sup_norm();
    let lower_boundary_flat = rho_minus_sup < tol_flat;

    let target = t0 / (1.0 - lambda);
    let cycle_error = params
        .theta_cycle
        .iter()
        .map(|f| (pair.rho_plus.interpolate(f.to_f64()) - target).abs())
        .fold(0.0, f64::max);
    let cycle_values_attained = cycle_error < tol_cycle;

    let antipode = frac(params.theta_cycle[0].to_f64() + 0.5);
    let antipode_value = pair.rho_plus.interpolate(antipode);
    let antipode_below_escape = antipode_value < t0 / lambda - tol_cycle;

    // margin at θ_1: preimages are θ_0 + 1/2 (inside the flat part of I_0)
    // and θ_0 itself.
    let theta1 = params.theta_cycle[1].to_f64();
    let margin_at_theta1 = {
        let mut lo_plus = f64::INFINITY;
        let mut hi_minus = f64::NEG_INFINITY;
        for x in crate::affine::preimages(skew.ell, theta1) {
            let t = skew.tau.evaluate(x);
            lo_plus = lo_plus.min(lambda * pair.rho_plus.interpolate(x) + t);
            hi_minus = hi_minus.max(lambda * pair.rho_minus.interpolate(x) + t);
        }
        lo_plus - hi_minus
    };
    let margin_negative = margin_at_theta1 < 0.0;

    let region_invariant = region_invariance_witness(params, skew, pair, 2048, 512);

    let all_pass = lower_boundary_flat
        && cycle_values_attained
        && antipode_below_escape
        && margin_negative
        && region_invariant;
    Ok(FatHoleReport {
        rho_minus_sup,
        lower_boundary_flat,
        cycle_error,
        cycle_values_attained,
        antipode_value,
        antipode_below_escape,
        margin_at_theta1,
        margin_negative,
        region_invariant,
        all_pass,
    })
}

/// Interior region `R = R_1 ∪ R_2`: the band from the lower boundary up to
/// height λ, plus boxes over the shrunken intervals. Rasterized test that
/// the forward image covers R with one-cell margin.
pub fn region_invariance_witness(
    params: &FatHoleParams,
    skew: &SkewParams,
    pair: &BoundaryPair,
    w: usize,
    h: usize,
) -> bool {
    let lambda = params.lambda;
    let s = params.lambda_sum();
    let eta_prime = 0.5 * (1.0 + s * params.eta);
    let p = params.p as usize;

    let boxes: Vec<(f64, f64, f64)> = {
        let mut v = Vec::new();
        let (a0, b0) = params.shrunken_interval(0);
        v.push((a0, b0, eta_prime));
        for j in 2..p {
            let (a, b) = params.shrunken_interval(j);
            v.push((a, b, geometric_sum(lambda, j as u32 + 1) * params.eta));
        }
        v
    };
    let in_arc = |a: f64, b: f64, th: f64| -> bool {
        // closed arc from a to b going right (may wrap)
        frac(th - a) <= frac(b - a)
    };
    let t_lo = -0.05;
    let t_hi = eta_prime.max(s * params.eta) * 1.05 + 0.05;
    let cell_h = (t_hi - t_lo) / h as f64;

    let in_region = |th: f64, t: f64| -> bool {
        if t >= pair.rho_minus.interpolate(th) && t <= lambda {
            return true;
        }
        boxes
            .iter()
            .any(|&(a, b, top)| in_arc(a, b, th) && t >= lambda && t <= top)
    };

    // Region mask at cell centers and covered mask from forward images of a
    // dense sample of R.
    let mut mask = vec![false; w * h];
    let mut hit = vec![false; w * h];
    for i in 0..w {
        for j in 0..h {
            let th = (i as f64 + 0.5) / w as f64;
            let t = t_lo + (j as f64 + 0.5) * cell_h;
            if in_region(th, t) {
                mask[i * h + j] = true;
            }
        }
    }
    for i in 0..w {
        for j in 0..h {
            for a in 0..3 {
                for b in 0..3 {
                    let th = (i as f64 + (a as f64 + 0.5) / 3.0) / w as f64;
                    let t = t_lo + (j as f64 + (b as f64 + 0.5) / 3.0) * cell_h;
                    if !in_region(th, t) {
                        continue;
                    }
                    let (th2, t2) = skew.apply(th, t);
                    let ci = (th2 * w as f64) as usize % w;
                    let cj = (t2 - t_lo) / cell_h;
                    if cj >= 0.0 && (cj as usize) < h {
                        hit[ci * h + cj as usize] = true;
                    }
                }
            }
        }
    }
    // Erode the region by one cell, dilate the hits by one, then demand
    // containment.
    let idx = |i: usize, j: usize| i * h + j;
    let mut ok = true;
    'outer: for i in 0..w {
        for j in 1..h - 1 {
            if !mask[idx(i, j)] {
                continue;
            }
            let li = (i + w - 1) % w;
            let ri = (i + 1) % w;
            let interior = mask[idx(li, j)]
                && mask[idx(ri, j)]
                && mask[idx(i, j - 1)]
                && mask[idx(i, j + 1)];
            if !interior {
                continue;
            }
            let mut covered = false;
            'search: for di in [w - 1, 0, 1] {
                for dj in [-1i64, 0, 1] {
                    let jj = j as i64 + dj;
                    if jj >= 0 && (jj as usize) < h && hit[idx((i + di) % w, jj as usize)] {
                        covered = true;
                        break 'search;
                    }
                }
            }
            if !covered {
                ok = false;
                break 'outer;
            }
        }
    }
    ok
}

/// Cell centers of the rasterized interior region R, for rendering.
pub fn region_points(
    params: &FatHoleParams,
    pair: &BoundaryPair,
    n_theta: usize,
    n_t: usize,
) -> Vec<(f64, f64)> {
    let lambda = params.lambda;
    let s = params.lambda_sum();
    let eta_prime = 0.5 * (1.0 + s * params.eta);
    let p = params.p as usize;
    let mut boxes = vec![{
        let (a, b) = params.shrunken_interval(0);
        (a, b, eta_prime)
    }];
    for j in 2..p {
        let (a, b) = params.shrunken_interval(j);
        boxes.push((a, b, geometric_sum(lambda, j as u32 + 1) * params.eta));
    }
    let t_lo = -0.05;
    let t_hi = eta_prime.max(s * params.eta) * 1.05;
    let mut out = Vec::new();
    for i in 0..n_theta {
        let th = (i as f64 + 0.5) / n_theta as f64;
        for j in 0..n_t {
            let t = t_lo + (j as f64 + 0.5) * (t_hi - t_lo) / n_t as f64;
            let in_band = t >= pair.rho_minus.interpolate(th) && t <= lambda;
            let in_box = boxes
                .iter()
                .any(|&(a, b, top)| frac(th - a) <= frac(b - a) && t >= lambda && t <= top);
            if in_band || in_box {
                out.push((th, t));
            }
        }
    }
    out
}

/// One entry of the log-quadratic annulus scan.
#[derive(Debug, Clone, Serialize)]
pub struct LogQuadraticEntry {
    pub c_mod: f64,
    pub alpha: f64,
    pub fails_preservation: bool,
    pub lambda_hat: f64,
    pub jordan_gap: f64,
    pub annulus_margin: f64,
    pub annulus: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct LogQuadraticScan {
    pub lambda: f64,
    pub entries: Vec<LogQuadraticEntry>,
}

/// Sweeps `(|c|, α)`, computing perturbed boundaries in log coordinates and
/// the degree-2 annulus margin for each map. Preservation failures are
/// recorded, not fatal.
pub fn annulus_scan_log_quadratic(
    lambda: f64,
    c_mods: &[f64],
    alphas: &[f64],
    n_grid: usize,
    tol: f64,
) -> LogQuadraticScan {
    let mut entries = Vec::new();
    for &c_mod in c_mods {
        for &alpha in alphas {
            let c = Complex64::from_polar(c_mod, crate::circle::TAU_2PI * alpha);
            let entry = scan_one(lambda, c_mod, alpha, c, n_grid, tol);
            entries.push(entry);
        }
    }
    LogQuadraticScan { lambda, entries }
}

/// Uniform α grid of `n` points on the circle.
pub fn uniform_alphas(n: usize) -> Vec<f64> {
    let n = n.max(1);
    (0..n).map(|i| i as f64 / n as f64).collect()
}

fn scan_one(
    lambda: f64,
    c_mod: f64,
    alpha: f64,
    c: Complex64,
    n_grid: usize,
    tol: f64,
) -> LogQuadraticEntry {
    let failed = |reason: f64| LogQuadraticEntry {
        c_mod,
        alpha,
        fails_preservation: true,
        lambda_hat: reason,
        jordan_gap: f64::NAN,
        annulus_margin: f64::NAN,
        annulus: false,
    };
    let map = match LogQuadraticMap::new(lambda, c) {
        Ok(m) => m,
        Err(_) => return failed(f64::NAN),
    };
    let gc = match estimate_constants(&map, 256, 9, None) {
        Ok(gc) if gc.lambda_hat < 1.0 => gc,
        Ok(gc) => return failed(gc.lambda_hat),
        Err(_) => return failed(f64::NAN),
    };
    let pair = match perturbed_boundaries(&map, &gc, n_grid, tol) {
        Ok(p) => p,
        Err(_) => return failed(gc.lambda_hat),
    };
    let margin = map_annulus_margin(&map, &gc, &pair).unwrap_or(f64::NAN);
    let gap = pair.jordan_gap();
    LogQuadraticEntry {
        c_mod,
        alpha,
        fails_preservation: false,
        lambda_hat: gc.lambda_hat,
        jordan_gap: gap,
        annulus_margin: margin,
        annulus: margin > tol && gap > tol,
    }
}

/// Classifies the rescaled limit map through the perturbed-map machinery;
/// the same attractor is reachable through the affine solver, which tests
/// use as a cross-check.
pub fn rescaled_limit_boundaries(
    lambda: f64,
    alpha: f64,
    n_grid: usize,
    tol: f64,
) -> Result<(SkewParams, BoundaryPair), PerturbedError> {
    let lift = rescaled_limit(lambda, alpha);
    let params = lift.params.clone();
    let gc = estimate_constants(
        &lift,
        256,
        9,
        Some(params.tau.lip_bound() / (params.ell as f64 - params.lambda)),
    )?;
    let pair = perturbed_boundaries(&lift, &gc, n_grid, tol)?;
    Ok((params, pair))
}

/// Affine route to the same boundaries, for cross-checks and rendering.
pub fn fat_hole_boundaries(
    lambda: f64,
    n_samples: usize,
    tol: f64,
) -> Result<(SkewParams, FatHoleParams, BoundaryPair), FamilyError> {
    let (tau, params) = build_fat_hole(lambda, n_samples)?;
    let skew = SkewParams::with_t0(2, lambda, tau, params.t0 / (1.0 - lambda) * 1.05)?;
    let pair = boundary_fixed_point(&skew, n_samples, tol)?;
    Ok((skew, params, pair))
}
