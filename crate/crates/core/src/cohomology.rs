//! The cohomological operators `L_λ μ = μ∘m_ℓ − λμ` on circle functions,
//! the spectral functionals `D_k`, solvability tests, the λ-scan for Jordan
//! parameters, and the canonical finite decomposition
//! `τ = L_{λ_1} ∘ … ∘ L_{λ_m} μ` with an irreducible residual.
//!
//! Sign convention: `L_λ μ = μ∘m_ℓ − λμ` throughout (some sources state the
//! negated operator; all identities here use this orientation).

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::circle::{CircleFunction, FourierSpectrum, TrigPoly, TrigTerm, DEFAULT_GRID};

#[derive(Debug, Error)]
pub enum CohomologyError {
    #[error("k = {0} must be >= 1 and not divisible by ell = {1}")]
    BadFrequency(u32, u32),
    #[error("lambda = {0} must lie in (0, 1]")]
    BadLambda(f64),
    #[error("lambda = 1 requires zero mean, got integral {0:.3e}")]
    NonzeroMean(f64),
    #[error(transparent)]
    Circle(#[from] crate::circle::CircleError),
}

/// Applies `L_λ: μ ↦ μ∘m_ℓ − λμ`.
///
/// Closed forms propagate exactly (a term at frequency `k` contributes at
/// `ℓk` and `k`). On sample data the grid is closed under `θ ↦ ℓθ`, so the
/// result is exact on the same grid. The certified bound grows by `ℓ + λ`.
pub fn apply_l(ell: u32, lambda: f64, mu: &CircleFunction) -> CircleFunction {
    let n = mu.n_samples();
    if let Some(p) = mu.closed_form() {
        let mut terms = Vec::with_capacity(2 * p.terms.len());
        for t in &p.terms {
            terms.push(TrigTerm { k: ell * t.k, cos: t.cos, sin: t.sin });
            terms.push(TrigTerm { k: t.k, cos: -lambda * t.cos, sin: -lambda * t.sin });
        }
        let poly = TrigPoly::new((1.0 - lambda) * p.constant, terms).simplify(0.0);
        let grid = n.max(2 * poly.degree() as usize + 2);
        return CircleFunction::from_trig_poly(poly, grid).expect("grid above Nyquist floor");
    }
    let s = mu.samples();
    let out: Vec<f64> = (0..n)
        .map(|i| s[(ell as usize * i) % n] - lambda * s[i])
        .collect();
    CircleFunction::from_samples(out, (ell as f64 + lambda) * mu.lip_bound())
        .expect("grid >= 2")
}

/// Composition `L_{λ_1} ∘ … ∘ L_{λ_m} μ`.
pub fn apply_l_chain(ell: u32, lambdas: &[f64], mu: &CircleFunction) -> CircleFunction {
    let mut f = mu.clone();
    for &l in lambdas.iter().rev() {
        f = apply_l(ell, l, &f);
    }
    f
}

/// Value of `D_k(τ) = Σ_{n≥0} λ^n (τ̂(ℓ^n k) + τ̂(−ℓ^n k))` with its
/// truncation depth and a bound on the dropped tail.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DkValue {
    pub value: f64,
    pub truncation_n: u32,
    pub truncation_error: f64,
}

/// Evaluates the functional `D_k` by summing the λ-weighted coefficient
/// tower over the ℓ-adic frequency orbit of `k`.
///
/// Closed forms truncate exactly (coefficients vanish beyond the degree);
/// sampled functions truncate at the spectral resolution `N/2` and report
/// the geometric tail bound from the certified Lipschitz decay.
pub fn dk_functional(
    tau: &CircleFunction,
    ell: u32,
    lambda: f64,
    k: u32,
    spectrum: &FourierSpectrum,
) -> Result<DkValue, CohomologyError> {
    if k == 0 || k.is_multiple_of(ell) {
        return Err(CohomologyError::BadFrequency(k, ell));
    }
    if !(0.0 < lambda && lambda <= 1.0) {
        return Err(CohomologyError::BadLambda(lambda));
    }
    let exact = tau.closed_form().is_some();
    let top = if exact {
        tau.closed_form().map(|p| p.degree()).unwrap_or(0).max(k)
    } else {
        spectrum.k_max()
    };
    let mut value = 0.0;
    let mut coef = 1.0;
    let mut q = k as u64;
    let mut n = 0u32;
    while q <= top as u64 {
        let c = spectrum.coeff(q as i64);
        value += coef * 2.0 * c.re;
        coef *= lambda;
        q *= ell as u64;
        n += 1;
    }
    let truncation_n = n.saturating_sub(1);
    let truncation_error = if exact {
        0.0
    } else {
        // |τ̂(q)| ≤ lip/(4q) beyond the stored band; the dropped terms are
        // dominated by a geometric series with ratio λ/ℓ. The plain
        // geometric tail of the kernel series gives a second bound.
        let r = lambda / ell as f64;
        let decay_tail = coef * 2.0 * tau.lip_bound() / (4.0 * q as f64) / (1.0 - r);
        let sup_hat = (-(spectrum.k_max() as i64)..=spectrum.k_max() as i64)
            .map(|m| spectrum.coeff(m).norm())
            .fold(0.0, f64::max)
            .max(tau.lip_bound() / (4.0 * q as f64));
        let geometric_tail = if lambda < 1.0 {
            coef * 2.0 * sup_hat / (1.0 - lambda)
        } else {
            f64::INFINITY
        };
        decay_tail.min(geometric_tail)
    };
    Ok(DkValue { value, truncation_n, truncation_error })
}

/// `D_k` table over a set of admissible frequencies at one λ.
#[derive(Debug, Clone, Serialize)]
pub struct DkTable {
    pub lambda: f64,
    pub entries: Vec<(u32, DkValue)>,
}

pub fn dk_table(
    tau: &CircleFunction,
    ell: u32,
    lambda: f64,
    k_ceiling: u32,
    spectrum: &FourierSpectrum,
) -> Result<DkTable, CohomologyError> {
    let mut entries = Vec::new();
    for k in 1..=k_ceiling {
        if k % ell != 0 {
            entries.push((k, dk_functional(tau, ell, lambda, k, spectrum)?));
        }
    }
    Ok(DkTable { lambda, entries })
}

/// Outcome of a cohomological solve `L_λ μ = τ`.
#[derive(Debug, Clone)]
pub enum SolveOutcome {
    /// Candidate solution with the sup-norm defect `‖L_λ μ − τ‖_∞` on the grid.
    Solved { mu: CircleFunction, residual: f64 },
    /// No continuous solution detected at this resolution: some candidate
    /// coefficient exceeded the Lipschitz decay ceiling, or the defect of the
    /// reconstructed candidate stayed above tolerance.
    NotSolvable { reason: String },
}

impl SolveOutcome {
    pub fn solved_within(&self, tol: f64) -> bool {
        matches!(self, SolveOutcome::Solved { residual, .. } if *residual < tol)
    }

    pub fn mu(&self) -> Option<&CircleFunction> {
        match self {
            SolveOutcome::Solved { mu, .. } => Some(mu),
            SolveOutcome::NotSolvable { .. } => None,
        }
    }
}

/// Attempts to solve `L_λ μ = τ` spectrally.
///
/// Coefficients of the candidate are the partial sums
/// `b(ℓ^n k) = −λ^{−(n+1)} Σ_{j≤n} λ^j τ̂(ℓ^j k)` for `ℓ∤k`, with
/// `b(0) = τ̂(0)/(1−λ)` (for `λ = 1` the mean must vanish and `b(0) = 0`).
/// Divergence is declared when any `|b(q)|` exceeds twice the decay ceiling
/// `‖τ‖_L/(4q)` that a Lipschitz solution would have to obey.
pub fn solve_l(
    tau: &CircleFunction,
    ell: u32,
    lambda: f64,
    k_max: u32,
    tol: f64,
) -> Result<SolveOutcome, CohomologyError> {
    if !(0.0 < lambda && lambda <= 1.0) {
        return Err(CohomologyError::BadLambda(lambda));
    }
    let spectrum = tau.fourier(k_max.min((tau.n_samples() / 2).saturating_sub(1) as u32))?;
    let mean = spectrum.coeff(0).re;
    let constant = if lambda == 1.0 {
        if mean.abs() >= tol {
            return Err(CohomologyError::NonzeroMean(mean));
        }
        0.0
    } else {
        mean / (1.0 - lambda)
    };

    // Ceiling on solution coefficients: a Lipschitz μ with L_λ μ = τ has
    // ‖μ‖_L ≤ ‖τ‖_L/(ℓ−λ) ≤ ‖τ‖_L, hence |μ̂(q)| ≤ ‖τ‖_L/(4q).
    let lip = tau.lip_bound();
    let ceiling = |q: f64| 2.0 * lip / (4.0 * q) + 1e-12;

    let mut coeffs: Vec<(u32, Complex64)> = Vec::new();
    for k in 1..=k_max {
        if k % ell == 0 {
            continue;
        }
        let mut partial = Complex64::new(0.0, 0.0);
        let mut lam_j = 1.0;
        let mut lam_n1 = 1.0; // λ^{n+1}
        let mut q = k as u64;
        let mut n = 0;
        loop {
            partial += lam_j * spectrum.coeff(q as i64);
            lam_n1 *= lambda;
            let b = -partial / lam_n1;
            if b.norm() > ceiling(q as f64) {
                return Ok(SolveOutcome::NotSolvable {
                    reason: format!(
                        "coefficient at frequency {q} grew to {:.3e}, beyond the Lipschitz decay ceiling {:.3e}",
                        b.norm(),
                        ceiling(q as f64)
                    ),
                });
            }
            if b.norm() > 1e-14 {
                coeffs.push((q as u32, b));
            }
            lam_j *= lambda;
            n += 1;
            let next = q * ell as u64;
            // Walk a few levels past k_max so slow divergence is still seen,
            // as long as the spectrum has content there (it is zero beyond
            // k_max, which freezes the partial sums).
            if next > k_max as u64 || n > 64 {
                break;
            }
            q = next;
        }
    }

    let terms: Vec<TrigTerm> = coeffs
        .into_iter()
        .map(|(q, b)| TrigTerm { k: q, cos: 2.0 * b.re, sin: -2.0 * b.im })
        .collect();
    // Drop float-noise coefficients so repeated solves do not accrete
    // spurious high frequencies.
    let scale = terms
        .iter()
        .map(|t| t.cos.abs().max(t.sin.abs()))
        .fold(constant.abs(), f64::max);
    let poly = TrigPoly::new(constant, terms).simplify(1e-12 * scale.max(1e-300));
    let grid = tau
        .n_samples()
        .max(2 * poly.degree() as usize + 2)
        .max(DEFAULT_GRID.min(4 * poly.degree() as usize + 4));
    let mu = CircleFunction::from_trig_poly(poly, grid)?;

    let image = apply_l(ell, lambda, &mu);
    // Defect on τ's own working grid: sample values are the authoritative
    // data for sampled input, and closed forms evaluate exactly anywhere.
    let n = tau.n_samples();
    let residual = (0..n)
        .map(|i| {
            let th = i as f64 / n as f64;
            (image.evaluate(th) - tau.samples()[i]).abs()
        })
        .fold(0.0, f64::max);
    Ok(SolveOutcome::Solved { mu, residual })
}

/// Canonical spectral representative: the trig polynomial with coefficient
/// `D_k(τ)/2` at frequencies `±k` for each `ℓ∤k`, i.e.
/// `τ_c(θ) = Σ_{ℓ∤k} D_k(τ) cos(2πkθ)`. The difference `τ − τ_c` kills every
/// `D_k` and is therefore always solvable.
pub fn canonical_representative(
    tau: &CircleFunction,
    ell: u32,
    lambda: f64,
    k_max: u32,
) -> Result<CircleFunction, CohomologyError> {
    let spectrum = tau.fourier(k_max.min((tau.n_samples() / 2).saturating_sub(1) as u32))?;
    let mut terms = Vec::new();
    for k in 1..=k_max {
        if k % ell == 0 {
            continue;
        }
        let d = dk_functional(tau, ell, lambda, k, &spectrum)?;
        if d.value.abs() > 1e-14 {
            terms.push(TrigTerm::cos_term(k, d.value));
        }
    }
    let poly = TrigPoly::new(0.0, terms);
    let grid = tau.n_samples().max(2 * poly.degree() as usize + 2);
    Ok(CircleFunction::from_trig_poly(poly, grid)?)
}

/// One detected Jordan parameter with its multiplicity and the indicator
/// value at the refined root.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct JordanParameter {
    pub lambda: f64,
    pub multiplicity: u32,
    pub g_value: f64,
}

/// Uniform λ-grid specification for scans.
#[derive(Debug, Clone, Copy)]
pub struct LambdaGrid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl LambdaGrid {
    pub fn new(start: f64, stop: f64, count: usize) -> Self {
        assert!(count >= 2 && start > 0.0 && stop <= 1.0 && start < stop);
        LambdaGrid { start, stop, count }
    }

    /// Default scan grid over (0, 1], including the coboundary endpoint.
    pub fn default_scan() -> Self {
        LambdaGrid::new(0.02, 1.0, 197)
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|i| self.start + i as f64 * h).collect()
    }
}

/// Frequencies probed by the Jordan indicator; spectra of Lipschitz
/// functions decay, so small `k` dominates.
pub const SCAN_K_CEILING: u32 = 64;

struct ScanContext<'a> {
    tau: &'a CircleFunction,
    ell: u32,
    spectrum: FourierSpectrum,
    ks: Vec<u32>,
    k_max: u32,
    tol: f64,
}

impl<'a> ScanContext<'a> {
    fn new(
        tau: &'a CircleFunction,
        ell: u32,
        tol: f64,
        k_ceiling: u32,
    ) -> Result<Self, CohomologyError> {
        let k_max = match tau.closed_form() {
            Some(p) => p.degree().max(1).max(k_ceiling),
            None => (k_ceiling as usize).min(tau.n_samples() / 2 - 1).max(1) as u32,
        };
        let spectrum = tau.fourier(k_max.min((tau.n_samples() / 2 - 1) as u32))?;
        let ks = (1..=k_ceiling.min(k_max))
            .filter(|k| !k.is_multiple_of(ell))
            .collect();
        Ok(ScanContext { tau, ell, spectrum, ks, k_max, tol })
    }

    fn dk(&self, k: u32, lambda: f64) -> f64 {
        dk_functional(self.tau, self.ell, lambda, k, &self.spectrum)
            .map(|d| d.value)
            .unwrap_or(0.0)
    }

    /// Jordan indicator `g(λ) = max_k |D_k(τ)(λ)|`.
    fn g(&self, lambda: f64) -> f64 {
        self.ks.iter().map(|&k| self.dk(k, lambda).abs()).fold(0.0, f64::max)
    }

    /// Solve residual at one λ (∞ when divergent), mean-shifting at λ = 1.
    fn residual_at(&self, lambda: f64) -> (f64, Option<CircleFunction>) {
        let shifted;
        let tau = if lambda == 1.0 {
            let mean = self.tau.mean();
            if mean.abs() > self.tol {
                shifted = subtract_constant(self.tau, mean);
                &shifted
            } else {
                self.tau
            }
        } else {
            self.tau
        };
        match solve_l(tau, self.ell, lambda, self.k_max, self.tol) {
            Ok(SolveOutcome::Solved { mu, residual }) => (residual, Some(mu)),
            _ => (f64::INFINITY, None),
        }
    }

    /// Polishes a candidate by minimizing the solve residual in a small
    /// bracket. The bracketing root search leaves errors ~1e-8 in λ, which
    /// the coefficient recursion amplifies geometrically; driving the
    /// residual itself down recovers λ to machine scale so the quotient
    /// stays clean for the next peel.
    fn polished_confirm(&self, lambda0: f64) -> Option<(f64, CircleFunction)> {
        if lambda0 >= 1.0 - 1e-9 {
            let (residual, mu) = self.residual_at(1.0);
            return if residual < self.tol { Some((1.0, mu?)) } else { None };
        }
        let mut lo = (lambda0 - 2e-6).max(1e-6);
        let mut hi = (lambda0 + 2e-6).min(1.0 - 1e-12);
        while hi - lo > 1e-13 {
            let m1 = lo + (hi - lo) / 3.0;
            let m2 = hi - (hi - lo) / 3.0;
            if self.residual_at(m1).0 <= self.residual_at(m2).0 {
                hi = m2;
            } else {
                lo = m1;
            }
        }
        let lambda = 0.5 * (lo + hi);
        let (residual, mu) = self.residual_at(lambda);
        if residual < self.tol {
            Some((lambda, mu?))
        } else {
            None
        }
    }
}

fn subtract_constant(f: &CircleFunction, c: f64) -> CircleFunction {
    if let Some(p) = f.closed_form() {
        let poly = TrigPoly::new(p.constant - c, p.terms.clone());
        CircleFunction::from_trig_poly(poly, f.n_samples()).expect("same grid")
    } else {
        let samples = f.samples().iter().map(|v| v - c).collect();
        CircleFunction::from_samples(samples, f.lip_bound()).expect("same grid")
    }
}

/// Scans `(0, 1]` for parameters λ* where `L_λ μ = τ` is solvable.
///
/// Candidates are bracketed on the grid two ways: sign changes of an
/// individual `D_k` are refined by bisection, and dips of the indicator
/// `g = max_k |D_k|` (which tangent zeros of even multiplicity produce) are
/// refined by ternary search. Every candidate is confirmed by an actual
/// solve, and multiplicities are computed by peeling the factor and
/// recursing on the quotient at the same λ.
pub fn scan_jordan(
    tau: &CircleFunction,
    ell: u32,
    grid: &LambdaGrid,
    tol: f64,
) -> Result<Vec<JordanParameter>, CohomologyError> {
    scan_jordan_with_ceiling(tau, ell, grid, tol, SCAN_K_CEILING)
}

/// [`scan_jordan`] with an explicit frequency ceiling for the indicator.
pub fn scan_jordan_with_ceiling(
    tau: &CircleFunction,
    ell: u32,
    grid: &LambdaGrid,
    tol: f64,
    k_ceiling: u32,
) -> Result<Vec<JordanParameter>, CohomologyError> {
    let ctx = ScanContext::new(tau, ell, tol, k_ceiling)?;
    if is_numerically_constant(tau) {
        return Ok(Vec::new());
    }

    let lambdas = grid.points();
    let g_vals: Vec<f64> = lambdas.par_iter().map(|&l| ctx.g(l)).collect();
    let g_scale = g_vals.iter().cloned().fold(0.0, f64::max).max(1e-9);

    let mut candidates: Vec<f64> = Vec::new();

    // Sign-change brackets per frequency (odd-order roots).
    for &k in &ctx.ks {
        let vals: Vec<f64> = lambdas.iter().map(|&l| ctx.dk(k, l)).collect();
        if vals.iter().all(|v| v.abs() < 1e-13 * g_scale.max(1.0)) {
            continue; // tower carries no content at this frequency
        }
        for w in 0..lambdas.len() - 1 {
            if vals[w] * vals[w + 1] < 0.0 {
                let mut lo = lambdas[w];
                let mut hi = lambdas[w + 1];
                let mut flo = vals[w];
                while hi - lo > 1e-8 {
                    let mid = 0.5 * (lo + hi);
                    let fm = ctx.dk(k, mid);
                    if flo * fm <= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                }
                candidates.push(0.5 * (lo + hi));
            }
        }
    }

    // Indicator dips (covers even-order tangent roots).
    for i in 0..lambdas.len() {
        let here = g_vals[i];
        let left = if i > 0 { g_vals[i - 1] } else { f64::INFINITY };
        let right = if i + 1 < lambdas.len() { g_vals[i + 1] } else { f64::INFINITY };
        if here <= left && here <= right && here < 0.25 * g_scale {
            let lo = if i > 0 { lambdas[i - 1] } else { lambdas[0] };
            let hi = if i + 1 < lambdas.len() { lambdas[i + 1] } else { *lambdas.last().unwrap() };
            let (lmin, gmin) = ternary_min(|l| ctx.g(l), lo, hi, 1e-8);
            if gmin < (tol.sqrt() * g_scale).max(tol) {
                candidates.push(lmin);
            }
        }
    }

    candidates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    candidates.dedup_by(|a, b| (*a - *b).abs() < 1e-5);

    let mut out = Vec::new();
    for lambda in candidates {
        // Snap near-unit candidates onto the coboundary endpoint.
        let lambda = if (lambda - 1.0).abs() < 1e-6 { 1.0 } else { lambda };
        if let Some((polished, mult)) = multiplicity_by_peeling(&ctx, lambda) {
            out.push(JordanParameter {
                lambda: polished,
                multiplicity: mult,
                g_value: ctx.g(polished),
            });
        }
    }
    Ok(out)
}

fn ternary_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, width: f64) -> (f64, f64) {
    while hi - lo > width {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if f(m1) <= f(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let mid = 0.5 * (lo + hi);
    (mid, f(mid))
}

fn is_numerically_constant(f: &CircleFunction) -> bool {
    let (lo, hi, _) = f.extrema();
    hi - lo < 1e-12
}

/// Peels `L_λ` as long as the quotient stays solvable, capped by the
/// coboundary order bound plus slack. Returns the polished λ and the count.
fn multiplicity_by_peeling(ctx: &ScanContext<'_>, lambda: f64) -> Option<(f64, u32)> {
    let cap = match coboundary_order_bound(ctx.tau, ctx.ell, ctx.k_max) {
        Ok(CoboundaryOrder::Bounded(m)) => m + 8,
        _ => 16,
    };
    let (lambda, first) = ctx.polished_confirm(lambda)?;
    let mut mult = 1u32;
    let mut current = first;
    while mult < cap {
        let probe = if lambda == 1.0 {
            subtract_constant(&current, current.mean())
        } else {
            current.clone()
        };
        match solve_l(&probe, ctx.ell, lambda, ctx.k_max, ctx.tol) {
            Ok(SolveOutcome::Solved { mu, residual }) if residual < ctx.tol => {
                mult += 1;
                current = mu;
            }
            _ => break,
        }
    }
    Some((lambda, mult))
}

/// Result of the canonical decomposition: peeled factors (repetitions encode
/// multiplicity, in descending order) and the irreducible residual.
#[derive(Debug, Clone)]
pub struct Decomposition {
    pub factors: Vec<f64>,
    pub residual: CircleFunction,
    pub residual_irreducible: bool,
}

/// Writes `τ = L_{λ_1} ∘ … ∘ L_{λ_m} μ` by repeatedly scanning for solvable
/// parameters and peeling the largest one. Constant τ decomposes trivially.
///
/// A nonzero mean rules out `λ = 1` factors (the image of `L_1` has zero
/// mean); means through `λ < 1` factors are carried exactly by the solver,
/// so re-applying the factor chain to the residual reproduces τ.
pub fn decompose(
    tau: &CircleFunction,
    ell: u32,
    grid: &LambdaGrid,
    tol: f64,
) -> Result<Decomposition, CohomologyError> {
    let mut factors = Vec::new();
    let mut current = tau.clone();
    if is_numerically_constant(&current) {
        return Ok(Decomposition { factors, residual: current, residual_irreducible: true });
    }
    let cap = 64;
    while factors.len() < cap {
        let skip_one = current.mean().abs() > tol;
        let found = scan_jordan(&current, ell, grid, tol)?;
        let best = found
            .iter()
            .map(|j| j.lambda)
            .filter(|&l| !(skip_one && l >= 1.0 - 1e-9))
            .fold(f64::NEG_INFINITY, f64::max);
        if !best.is_finite() {
            break;
        }
        let ctx = ScanContext::new(&current, ell, tol, SCAN_K_CEILING)?;
        match ctx.residual_at(best) {
            (residual, Some(mu)) if residual < tol => {
                factors.push(best);
                current = mu;
                if is_numerically_constant(&current) {
                    break;
                }
            }
            _ => break,
        }
    }
    let residual_irreducible = scan_jordan(&current, ell, grid, tol)?.is_empty();
    Ok(Decomposition { factors, residual: current, residual_irreducible })
}

/// Outcome of the coboundary order bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoboundaryOrder {
    Bounded(u32),
    /// No nonzero coefficient at the scanned resolution (τ numerically
    /// constant); the bound formula does not apply.
    Unbounded,
}

/// Upper bound on how many times `L_1` can divide τ, from the first
/// non-vanishing coefficient along an ℓ-adic tower:
/// `m ≤ (‖τ‖_L + 4kℓ^{p+1}|τ̂(ℓ^{p+1}k)|) / (4kℓ^{p+1}|τ̂(ℓ^p k)|)`.
pub fn coboundary_order_bound(
    tau: &CircleFunction,
    ell: u32,
    k_max: u32,
) -> Result<CoboundaryOrder, CohomologyError> {
    let band = k_max.min((tau.n_samples() / 2).saturating_sub(1) as u32);
    let spectrum = tau.fourier(band)?;
    let zero_tol = 1e-10;
    for k in 1..=band {
        if k % ell == 0 {
            continue;
        }
        let mut q = k as u64;
        let mut p = 0u32;
        while q <= band as u64 {
            let mag = spectrum.coeff(q as i64).norm();
            if mag > zero_tol {
                let next = (q * ell as u64) as i64;
                let next_mag = spectrum.coeff(next).norm();
                let denom = 4.0 * k as f64 * (ell as f64).powi(p as i32 + 1);
                let bound = (tau.lip_bound() + denom * next_mag) / (denom * mag);
                return Ok(CoboundaryOrder::Bounded(bound.floor() as u32));
            }
            q *= ell as u64;
            p += 1;
        }
    }
    Ok(CoboundaryOrder::Unbounded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::TAU_2PI;

    fn cosk(k: u32, a: f64, n: usize) -> CircleFunction {
        CircleFunction::from_trig_poly(TrigPoly::new(0.0, vec![TrigTerm::cos_term(k, a)]), n)
            .unwrap()
    }

    #[test]
    fn l_one_kills_constants() {
        let c = CircleFunction::constant(3.7, 64);
        let out = apply_l(2, 1.0, &c);
        assert!(out.sup_norm() < 1e-14);
    }

    #[test]
    fn l_lambda_on_unit_constant() {
        let c = CircleFunction::constant(1.0, 64);
        let out = apply_l(2, 0.4, &c);
        assert!((out.evaluate(0.123) - 0.6).abs() < 1e-14);
    }

    #[test]
    fn l_half_of_cosine() {
        // L_{0.5} cos 2πθ = cos 4πθ − 0.5 cos 2πθ for ℓ = 2
        let out = apply_l(2, 0.5, &cosk(1, 1.0, 64));
        let expect = TrigPoly::new(
            0.0,
            vec![TrigTerm::cos_term(1, -0.5), TrigTerm::cos_term(2, 1.0)],
        );
        for i in 0..64 {
            let th = i as f64 / 64.0;
            assert!((out.evaluate(th) - expect.eval(th)).abs() < 1e-13);
        }
        let p = out.closed_form().unwrap();
        assert_eq!(p.terms.len(), 2);
    }

    #[test]
    fn apply_l_exact_on_samples() {
        // Samples-only path must agree with the closed-form path on the grid.
        let n = 128;
        let mu_closed = cosk(3, 0.7, n);
        let mu_sampled =
            CircleFunction::from_samples(mu_closed.samples().to_vec(), mu_closed.lip_bound())
                .unwrap();
        let a = apply_l(2, 0.8, &mu_closed);
        let b = apply_l(2, 0.8, &mu_sampled);
        for i in 0..n {
            let th = i as f64 / n as f64;
            assert!((a.evaluate(th) - b.samples()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn solve_recovers_cosine_from_its_image() {
        let tau = apply_l(2, 0.5, &cosk(1, 1.0, 64));
        match solve_l(&tau, 2, 0.5, 16, 1e-8).unwrap() {
            SolveOutcome::Solved { mu, residual } => {
                assert!(residual < 1e-10);
                let s = mu.fourier(4).unwrap();
                assert!((s.coeff(1).re - 0.5).abs() < 1e-12);
                assert!(s.coeff(1).im.abs() < 1e-12);
                assert!(mu.sup_dist(&cosk(1, 1.0, mu.n_samples())) < 1e-10);
            }
            SolveOutcome::NotSolvable { reason } => panic!("should solve: {reason}"),
        }
    }

    #[test]
    fn solve_zero_function() {
        let out = solve_l(&CircleFunction::zero(64), 2, 0.5, 8, 1e-8).unwrap();
        match out {
            SolveOutcome::Solved { mu, residual } => {
                assert_eq!(residual, 0.0);
                assert!(mu.sup_norm() < 1e-14);
            }
            _ => panic!("zero is solvable"),
        }
    }

    #[test]
    fn solve_detects_divergence_for_bare_cosine() {
        // b(2^n) = −0.5/λ^{n+1} grows like 2^{n+1}: beyond the decay ceiling.
        let out = solve_l(&cosk(1, 1.0, 256), 2, 0.5, 64, 1e-8).unwrap();
        assert!(matches!(out, SolveOutcome::NotSolvable { .. }));
    }

    #[test]
    fn solve_at_lambda_one_requires_zero_mean() {
        let c = CircleFunction::constant(1.0, 64);
        assert!(matches!(
            solve_l(&c, 2, 1.0, 8, 1e-8),
            Err(CohomologyError::NonzeroMean(_))
        ));
    }

    #[test]
    fn dk_of_cosine_is_one_for_all_lambda() {
        let tau = cosk(1, 1.0, 256);
        let s = tau.fourier(64).unwrap();
        for lambda in [0.1, 0.5, 0.9, 1.0] {
            let d = dk_functional(&tau, 2, lambda, 1, &s).unwrap();
            assert!((d.value - 1.0).abs() < 1e-13);
            assert_eq!(d.truncation_error, 0.0);
        }
    }

    #[test]
    fn dk_linear_in_lambda_for_peeled_cosine() {
        // τ = cos 4πθ − λ0 cos 2πθ gives D_1(λ) = λ − λ0.
        let lambda0 = 0.37;
        let tau = CircleFunction::from_trig_poly(
            TrigPoly::new(
                0.0,
                vec![TrigTerm::cos_term(2, 1.0), TrigTerm::cos_term(1, -lambda0)],
            ),
            256,
        )
        .unwrap();
        let s = tau.fourier(64).unwrap();
        for lambda in [0.2, 0.37, 0.8] {
            let d = dk_functional(&tau, 2, lambda, 1, &s).unwrap();
            assert!((d.value - (lambda - lambda0)).abs() < 1e-13);
        }
    }


    #[test]
    fn dk_table_lists_admissible_frequencies() {
        let tau = cosk(1, 1.0, 256);
        let s = tau.fourier(64).unwrap();
        let t = dk_table(&tau, 2, 0.5, 8, &s).unwrap();
        let ks: Vec<u32> = t.entries.iter().map(|(k, _)| *k).collect();
        assert_eq!(ks, vec![1, 3, 5, 7]);
        assert!((t.entries[0].1.value - 1.0).abs() < 1e-13);
        assert_eq!(t.lambda, 0.5);
    }

    #[test]
    fn dk_rejects_divisible_frequency() {
        let tau = cosk(1, 1.0, 64);
        let s = tau.fourier(16).unwrap();
        assert!(matches!(
            dk_functional(&tau, 2, 0.5, 4, &s),
            Err(CohomologyError::BadFrequency(4, 2))
        ));
    }

    #[test]
    fn dk_matches_quadrature_oracle() {
        // Independent route: D_k(τ) = ∫ τ ν_k by the trapezoid rule with the
        // kernel ν_k summed directly.
        let tau = CircleFunction::from_trig_poly(
            TrigPoly::new(
                0.0,
                vec![
                    TrigTerm { k: 1, cos: 0.4, sin: -0.3 },
                    TrigTerm { k: 3, cos: -0.2, sin: 0.0 },
                    TrigTerm { k: 6, cos: 0.1, sin: 0.5 },
                ],
            ),
            512,
        )
        .unwrap();
        let ell = 2u32;
        let lambda = 0.6;
        let s = tau.fourier(128).unwrap();
        for k in [1u32, 3, 5] {
            let d = dk_functional(&tau, ell, lambda, k, &s).unwrap();
            let n = 4096;
            let mut acc = 0.0;
            for i in 0..n {
                let th = i as f64 / n as f64;
                let mut nu = 0.0;
                let mut q = k as f64;
                let mut coef = 1.0;
                for _ in 0..12 {
                    nu += coef * 2.0 * (TAU_2PI * q * th).cos();
                    q *= ell as f64;
                    coef *= lambda;
                }
                acc += tau.evaluate(th) * nu;
            }
            acc /= n as f64;
            assert!((d.value - acc).abs() < 1e-9, "k = {k}: {} vs {}", d.value, acc);
        }
    }

    #[test]
    fn canonical_representative_is_fixed_by_pure_tower_content() {
        // τ = cos 2πθ: D_1 = 1 and no other tower content, so τ_c = τ and
        // the difference solves trivially.
        let tau = cosk(1, 1.0, 256);
        let tc = canonical_representative(&tau, 2, 0.5, 32).unwrap();
        assert!(tc.sup_dist(&tau.resample(tc.n_samples()).unwrap()) < 1e-12);
    }

    #[test]
    fn canonical_representative_of_image_vanishes() {
        let tau = apply_l(2, 0.5, &cosk(1, 1.0, 64));
        let tc = canonical_representative(&tau, 2, 0.5, 32).unwrap();
        assert!(tc.sup_norm() < 1e-12);
        assert_eq!(
            canonical_representative(&CircleFunction::zero(64), 2, 0.5, 8)
                .unwrap()
                .sup_norm(),
            0.0
        );
    }

    #[test]
    fn difference_with_canonical_representative_is_solvable() {
        let tau = CircleFunction::from_trig_poly(
            TrigPoly::new(
                0.0,
                vec![TrigTerm { k: 1, cos: 0.8, sin: 0.0 }, TrigTerm { k: 2, cos: 0.5, sin: 0.0 }],
            ),
            256,
        )
        .unwrap();
        let lambda = 0.45;
        let tc = canonical_representative(&tau, 2, lambda, 64).unwrap();
        let n = tau.n_samples().max(tc.n_samples());
        let diff: Vec<f64> = (0..n)
            .map(|i| {
                let th = i as f64 / n as f64;
                tau.evaluate(th) - tc.evaluate(th)
            })
            .collect();
        let diff = CircleFunction::from_samples_auto(diff).unwrap();
        let out = solve_l(&diff, 2, lambda, 64, 1e-6).unwrap();
        assert!(out.solved_within(1e-6), "τ − τ_c must be solvable");
    }

    #[test]
    fn scan_finds_nothing_for_bare_cosine() {
        let got = scan_jordan(&cosk(1, 1.0, 256), 2, &LambdaGrid::default_scan(), 1e-6).unwrap();
        assert!(got.is_empty());
    }

    #[test]
    fn scan_finds_single_factor() {
        let tau = apply_l(2, 0.5, &cosk(1, 1.0, 64));
        let got = scan_jordan(&tau, 2, &LambdaGrid::default_scan(), 1e-6).unwrap();
        assert_eq!(got.len(), 1);
        assert!((got[0].lambda - 0.5).abs() < 1e-4);
        assert_eq!(got[0].multiplicity, 1);
    }

    #[test]
    fn scan_detects_double_factor_multiplicity() {
        let tau = apply_l(2, 0.5, &apply_l(2, 0.5, &cosk(1, 1.0, 64)));
        let got = scan_jordan(&tau, 2, &LambdaGrid::default_scan(), 1e-6).unwrap();
        assert_eq!(got.len(), 1, "{got:?}");
        assert!((got[0].lambda - 0.5).abs() < 1e-4);
        assert_eq!(got[0].multiplicity, 2);
    }

    #[test]
    fn decompose_irreducible_residual() {
        let d = decompose(&cosk(1, 1.0, 256), 2, &LambdaGrid::default_scan(), 1e-6).unwrap();
        assert!(d.factors.is_empty());
        assert!(d.residual_irreducible);
    }

    #[test]
    fn decompose_inverts_three_factor_chain() {
        let mu = cosk(1, 1.0, 64);
        let tau = apply_l_chain(2, &[1.0, 0.7, 0.5], &mu);
        let d = decompose(&tau, 2, &LambdaGrid::default_scan(), 1e-6).unwrap();
        assert_eq!(d.factors.len(), 3, "{:?}", d.factors);
        let mut sorted = d.factors.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((sorted[0] - 1.0).abs() < 1e-3);
        assert!((sorted[1] - 0.7).abs() < 1e-3);
        assert!((sorted[2] - 0.5).abs() < 1e-3);
        let worst = (0..256)
            .map(|i| {
                let th = i as f64 / 256.0;
                (d.residual.evaluate(th) - mu.evaluate(th)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "residual off by {worst}");
        assert!(d.residual_irreducible);
    }

    #[test]
    fn decompose_constant_is_trivial() {
        let c = CircleFunction::constant(5.0, 64);
        let d = decompose(&c, 2, &LambdaGrid::default_scan(), 1e-6).unwrap();
        assert!(d.factors.is_empty());
        assert!((d.residual.evaluate(0.2) - 5.0).abs() < 1e-12);
    }

    #[test]
    fn coboundary_bound_for_cosines() {
        // cos 2πθ: k=1, p=0 ⇒ (2π + 0)/(8·0.5) = π/2, floor 1.
        let b = coboundary_order_bound(&cosk(1, 1.0, 256), 2, 64).unwrap();
        assert_eq!(b, CoboundaryOrder::Bounded(1));
        // cos 4πθ: k=1, p=1 ⇒ (4π + 0)/(16·0.5) = π/2, floor 1.
        let b = coboundary_order_bound(&cosk(2, 1.0, 256), 2, 64).unwrap();
        assert_eq!(b, CoboundaryOrder::Bounded(1));
        let b = coboundary_order_bound(&CircleFunction::zero(64), 2, 16).unwrap();
        assert_eq!(b, CoboundaryOrder::Unbounded);
    }

    #[test]
    fn mean_transforms_by_one_minus_lambda() {
        let mu = CircleFunction::from_trig_poly(
            TrigPoly::new(2.0, vec![TrigTerm::cos_term(1, 1.0)]),
            64,
        )
        .unwrap();
        let out = apply_l(2, 0.3, &mu);
        assert!((out.mean() - 0.7 * 2.0).abs() < 1e-12);
        let out1 = apply_l(2, 1.0, &mu);
        assert!(out1.mean().abs() < 1e-12);
    }
}
