//! Numerics for solenoidal attractors of skew-product endomorphisms of the
//! cylinder `(θ, t) ↦ (ℓθ, λt + τ(θ))`.
//!
//! The crate is organised around a sampled representation of Lipschitz
//! functions on the circle ([`circle::CircleFunction`]) and provides:
//!
//! * the affine skew-product dynamics, its trapping region and the upper and
//!   lower attractor boundaries as contraction fixed points ([`affine`]),
//! * the cohomological operators `L_λ μ = μ∘m_ℓ − λμ`, the spectral
//!   functionals `D_k`, λ-scans and the canonical finite decomposition
//!   ([`cohomology`]),
//! * exact rational enumeration of `m_ℓ`-periodic orbits and Birkhoff-sum
//!   witnesses ([`orbits`]),
//! * topology classification of attractors (Jordan curve / closed annulus /
//!   neither) together with the contact sets of the upper boundary
//!   ([`topology`]),
//! * graph transforms for Lipschitz cylinder maps close to the affine model,
//!   including the log-coordinate quadratic-like family and its rescaled
//!   limit ([`perturbed`]),
//! * builders and verifiers for the two worked attractor families
//!   ([`families`]),
//! * JSON input specifications and PGM raster output ([`tau_spec`],
//!   [`raster`]).

pub mod affine;
pub mod circle;
pub mod cohomology;
pub mod families;
pub mod orbits;
pub mod perturbed;
pub mod raster;
pub mod tau_spec;
pub mod topology;

pub use affine::{boundary_fixed_point, BoundaryPair, Itinerary, SkewParams};
pub use circle::{CircleFunction, FourierSpectrum, TrigPoly, TrigTerm};
pub use cohomology::{apply_l, decompose, solve_l, Decomposition, SolveOutcome};
pub use topology::{classify, AttractorClassification, Verdict};

/// Wraps a real number into `[0, 1)`.
pub fn frac(x: f64) -> f64 {
    let f = x - x.floor();
    if f >= 1.0 {
        0.0
    } else {
        f
    }
}

/// Distance on `ℝ/ℤ`: length of the shorter arc between `a` and `b`.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (frac(a) - frac(b)).abs();
    d.min(1.0 - d)
}

/// Configures the global thread pool from the `SOLENOID_THREADS` environment
/// variable. Called once by binaries; no-op on subsequent calls or when the
/// variable is unset (all cores).
pub fn init_threads_from_env() {
    if let Ok(v) = std::env::var("SOLENOID_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_wraps_into_unit_interval() {
        assert_eq!(frac(0.25), 0.25);
        assert_eq!(frac(1.25), 0.25);
        assert_eq!(frac(-0.25), 0.75);
        assert_eq!(frac(3.0), 0.0);
    }

    #[test]
    fn circle_dist_takes_shorter_arc() {
        assert!((circle_dist(0.1, 0.9) - 0.2).abs() < 1e-15);
        assert!((circle_dist(0.0, 0.5) - 0.5).abs() < 1e-15);
        assert_eq!(circle_dist(0.3, 0.3), 0.0);
    }
}
