//! Sampled Lipschitz functions on the circle `ℝ/ℤ` and their spectra.
//!
//! A [`CircleFunction`] stores values on the uniform grid `θ = i/N` together
//! with a certified Lipschitz bound and, when the function is a trigonometric
//! polynomial, its exact closed form. Evaluation between grid points is
//! piecewise linear: the unique reconstruction that never inflates the
//! Lipschitz constant. Spectral operations prefer the closed form and fall
//! back to the FFT of the samples.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frac;

pub const TAU_2PI: f64 = std::f64::consts::TAU;

/// Default grid size for trig-polynomial inputs.
pub const DEFAULT_GRID: usize = 4096;

#[derive(Debug, Error, PartialEq)]
pub enum CircleError {
    #[error("grid of {n} samples is below the Nyquist floor {floor} for degree {degree}")]
    BelowNyquist { n: usize, floor: usize, degree: u32 },
    #[error("need at least two samples, got {0}")]
    TooFewSamples(usize),
    #[error("k_max = {k_max} too large for grid of {n} samples (need k_max < N/2)")]
    KMaxTooLarge { k_max: u32, n: usize },
    #[error("samples disagree with closed form by {0:.3e} (limit 1e-12)")]
    ClosedFormMismatch(f64),
}

/// One term `a·cos(2πkθ) + b·sin(2πkθ)` of a trigonometric polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrigTerm {
    pub k: u32,
    pub cos: f64,
    pub sin: f64,
}

impl TrigTerm {
    pub fn cos_term(k: u32, a: f64) -> Self {
        TrigTerm { k, cos: a, sin: 0.0 }
    }
}

/// A real trigonometric polynomial `c + Σ_k a_k cos(2πkθ) + b_k sin(2πkθ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub constant: f64,
    pub terms: Vec<TrigTerm>,
}

impl TrigPoly {
    pub fn new(constant: f64, terms: Vec<TrigTerm>) -> Self {
        TrigPoly { constant, terms }
    }

    pub fn zero() -> Self {
        TrigPoly { constant: 0.0, terms: Vec::new() }
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|t| t.k).max().unwrap_or(0)
    }

    pub fn eval(&self, theta: f64) -> f64 {
        let mut v = self.constant;
        for t in &self.terms {
            let arg = TAU_2PI * t.k as f64 * theta;
            v += t.cos * arg.cos() + t.sin * arg.sin();
        }
        v
    }

    /// Sup bound on the derivative: `2π Σ k (|a_k| + |b_k|)`.
    pub fn derivative_sup_bound(&self) -> f64 {
        TAU_2PI
            * self
                .terms
                .iter()
                .map(|t| t.k as f64 * (t.cos.abs() + t.sin.abs()))
                .sum::<f64>()
    }

    /// Exact Fourier coefficient at frequency `k` (any sign):
    /// `(a − i·b)/2` at `+k`, conjugate at `−k`, the constant at `0`.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k == 0 {
            return Complex64::new(self.constant, 0.0);
        }
        let ka = k.unsigned_abs() as u32;
        let mut c = Complex64::new(0.0, 0.0);
        for t in &self.terms {
            if t.k == ka {
                c += Complex64::new(t.cos / 2.0, -t.sin / 2.0);
            }
        }
        if k < 0 {
            c.conj()
        } else {
            c
        }
    }

    /// Collects duplicate frequencies and drops negligible terms.
    pub fn simplify(&self, tol: f64) -> TrigPoly {
        let mut by_k: std::collections::BTreeMap<u32, (f64, f64)> = Default::default();
        for t in &self.terms {
            let e = by_k.entry(t.k).or_insert((0.0, 0.0));
            e.0 += t.cos;
            e.1 += t.sin;
        }
        let terms = by_k
            .into_iter()
            .filter(|&(_, (a, b))| a.abs() > tol || b.abs() > tol)
            .map(|(k, (a, b))| TrigTerm { k, cos: a, sin: b })
            .collect();
        TrigPoly { constant: self.constant, terms }
    }
}

/// A real-valued function on `ℝ/ℤ`: `N` samples at `θ = i/N`, an optional
/// exact trig-polynomial form, and a certified upper bound on the best
/// Lipschitz constant.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CircleFunction {
    n_samples: usize,
    samples: Vec<f64>,
    closed_form: Option<TrigPoly>,
    lip_bound: f64,
}

impl CircleFunction {
    /// Samples a trigonometric polynomial on `n_samples` grid points.
    ///
    /// Requires `n_samples ≥ 2·deg + 2` so the grid resolves every term.
    /// The Lipschitz bound is the derivative sup bound of the closed form.
    pub fn from_trig_poly(poly: TrigPoly, n_samples: usize) -> Result<Self, CircleError> {
        if n_samples < 2 {
            return Err(CircleError::TooFewSamples(n_samples));
        }
        let degree = poly.degree();
        let floor = 2 * degree as usize + 2;
        if n_samples < floor {
            return Err(CircleError::BelowNyquist { n: n_samples, floor, degree });
        }
        let samples = (0..n_samples)
            .map(|i| poly.eval(i as f64 / n_samples as f64))
            .collect();
        let lip_bound = poly.derivative_sup_bound();
        Ok(CircleFunction { n_samples, samples, closed_form: Some(poly), lip_bound })
    }

    /// Plain sample data with a certified Lipschitz bound. The bound must
    /// dominate the discrete difference quotients.
    pub fn from_samples(samples: Vec<f64>, lip_bound: f64) -> Result<Self, CircleError> {
        if samples.len() < 2 {
            return Err(CircleError::TooFewSamples(samples.len()));
        }
        let n = samples.len();
        let f = CircleFunction { n_samples: n, samples, closed_form: None, lip_bound };
        debug_assert!(f.discrete_lip_estimate() <= f.lip_bound * (1.0 + 1e-9) + 1e-12);
        Ok(f)
    }

    /// Sample data with the discrete difference-quotient estimate as bound.
    pub fn from_samples_auto(samples: Vec<f64>) -> Result<Self, CircleError> {
        if samples.len() < 2 {
            return Err(CircleError::TooFewSamples(samples.len()));
        }
        let n = samples.len();
        let mut f = CircleFunction { n_samples: n, samples, closed_form: None, lip_bound: 0.0 };
        f.lip_bound = f.discrete_lip_estimate();
        Ok(f)
    }

    pub fn zero(n_samples: usize) -> Self {
        CircleFunction::from_trig_poly(TrigPoly::zero(), n_samples).expect("n >= 2")
    }

    pub fn constant(c: f64, n_samples: usize) -> Self {
        CircleFunction::from_trig_poly(TrigPoly::new(c, Vec::new()), n_samples).expect("n >= 2")
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn closed_form(&self) -> Option<&TrigPoly> {
        self.closed_form.as_ref()
    }

    pub fn lip_bound(&self) -> f64 {
        self.lip_bound
    }

    /// Largest discrete difference quotient `|f(θ_{i+1}) − f(θ_i)|·N`.
    pub fn discrete_lip_estimate(&self) -> f64 {
        let n = self.n_samples;
        (0..n)
            .map(|i| (self.samples[(i + 1) % n] - self.samples[i]).abs() * n as f64)
            .fold(0.0, f64::max)
    }

    /// Evaluates at `θ` (mod 1): exactly through the closed form when
    /// present, otherwise by linear interpolation between adjacent samples.
    pub fn evaluate(&self, theta: f64) -> f64 {
        match &self.closed_form {
            Some(p) => p.eval(theta),
            None => self.interpolate(theta),
        }
    }

    /// Piecewise-linear interpolation of the samples, ignoring any closed form.
    pub fn interpolate(&self, theta: f64) -> f64 {
        let n = self.n_samples;
        let x = frac(theta) * n as f64;
        let i = x.floor() as usize;
        let (i, fr) = if i >= n { (0, 0.0) } else { (i, x - i as f64) };
        let a = self.samples[i];
        let b = self.samples[(i + 1) % n];
        a + (b - a) * fr
    }

    /// Mean of the samples (`≈ ∫ f`; exact for resolved trig polynomials).
    pub fn mean(&self) -> f64 {
        if let Some(p) = &self.closed_form {
            return p.constant;
        }
        self.samples.iter().sum::<f64>() / self.n_samples as f64
    }

    /// Minimum, maximum and sup norm.
    ///
    /// Sample extrema are exact for the piecewise-linear reconstruction. With
    /// a closed form, cells whose order-zero bound (cell tent under the
    /// certified Lipschitz constant) could beat the sample extrema are
    /// refined by dense evaluation.
    pub fn extrema(&self) -> (f64, f64, f64) {
        let n = self.n_samples;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &v in &self.samples {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if let Some(p) = &self.closed_form {
            let half_cell = 0.5 / n as f64;
            let slack = self.lip_bound * half_cell;
            for i in 0..n {
                let a = self.samples[i];
                let b = self.samples[(i + 1) % n];
                let mid = 0.5 * (a + b);
                if mid + slack > hi || mid - slack < lo {
                    let t0 = i as f64 / n as f64;
                    for j in 1..32 {
                        let v = p.eval(t0 + j as f64 / 32.0 / n as f64);
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
            }
        }
        (lo, hi, lo.abs().max(hi.abs()))
    }

    pub fn sup_norm(&self) -> f64 {
        self.extrema().2
    }

    /// Sup distance on the common grid. Panics if grids differ.
    pub fn sup_dist(&self, other: &CircleFunction) -> f64 {
        assert_eq!(self.n_samples, other.n_samples, "grid mismatch");
        self.samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Fourier coefficients `f̂(k)` for `|k| ≤ k_max`.
    ///
    /// Closed forms are read off exactly; otherwise the DFT of the samples is
    /// scaled by `1/N`. Requires `k_max < N/2`.
    pub fn fourier(&self, k_max: u32) -> Result<FourierSpectrum, CircleError> {
        if 2 * (k_max as usize) >= self.n_samples {
            return Err(CircleError::KMaxTooLarge { k_max, n: self.n_samples });
        }
        let coeffs = match &self.closed_form {
            Some(p) => (-(k_max as i64)..=k_max as i64).map(|k| p.coeff(k)).collect(),
            None => {
                let n = self.n_samples;
                let mut buf: Vec<Complex64> =
                    self.samples.iter().map(|&v| Complex64::new(v, 0.0)).collect();
                FftPlanner::new().plan_fft_forward(n).process(&mut buf);
                // Forward FFT computes Σ_i f_i e^{-2πik i/N}; scaling by 1/N
                // gives the Riemann sum for f̂(k). Negative k wraps to N−k.
                (-(k_max as i64)..=k_max as i64)
                    .map(|k| {
                        let idx = k.rem_euclid(n as i64) as usize;
                        buf[idx] / n as f64
                    })
                    .collect()
            }
        };
        Ok(FourierSpectrum { k_max, coeffs })
    }

    /// Rebuilds the sample grid at a new resolution.
    ///
    /// Closed forms are resampled exactly; sampled data is interpolated
    /// (only meaningful for refinement or compatible grids).
    pub fn resample(&self, n_samples: usize) -> Result<CircleFunction, CircleError> {
        match &self.closed_form {
            Some(p) => CircleFunction::from_trig_poly(p.clone(), n_samples),
            None => {
                let samples = (0..n_samples)
                    .map(|i| self.interpolate(i as f64 / n_samples as f64))
                    .collect();
                CircleFunction::from_samples(samples, self.lip_bound)
            }
        }
    }

    /// Checks the stored invariants; used by tests and input validation.
    pub fn validate(&self) -> Result<(), CircleError> {
        if self.n_samples < 2 || self.samples.len() != self.n_samples {
            return Err(CircleError::TooFewSamples(self.samples.len()));
        }
        if let Some(p) = &self.closed_form {
            let worst = (0..self.n_samples)
                .map(|i| (p.eval(i as f64 / self.n_samples as f64) - self.samples[i]).abs())
                .fold(0.0, f64::max);
            if worst > 1e-12 {
                return Err(CircleError::ClosedFormMismatch(worst));
            }
        }
        Ok(())
    }
}

/// Complex Fourier coefficient table on `[−k_max, k_max]`.
#[derive(Debug, Clone)]
pub struct FourierSpectrum {
    k_max: u32,
    coeffs: Vec<Complex64>,
}

impl FourierSpectrum {
    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Coefficient at frequency `k`; zero outside the stored band.
    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() > self.k_max as u64 {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k + self.k_max as i64) as usize]
    }
}
