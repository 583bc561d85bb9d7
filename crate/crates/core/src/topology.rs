//! Topology classification of the attractor from converged boundaries:
//! Jordan curve, closed annulus, not an annulus, or honestly undetermined;
//! plus the contact set of the upper boundary and its maximal invariant
//! subset.

use serde::Serialize;
use thiserror::Error;

use crate::affine::{BoundaryPair, SkewParams};

#[derive(Debug, Error)]
pub enum TopologyError {
    #[error("boundary pair not converged: residual {0:.3e} exceeds {1:.3e}")]
    Unconverged(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    JordanCurve,
    ClosedAnnulus,
    NotAnnulus,
    Undetermined,
}

/// Classification outcome with the quantities the verdict was read from.
#[derive(Debug, Clone, Serialize)]
pub struct AttractorClassification {
    pub verdict: Verdict,
    /// `min_θ (ρ+ − ρ−)` on the grid.
    pub jordan_gap: f64,
    /// Fiberwise slack of the annulus inequality; positive means the image
    /// of the upper boundary stays above the image of the lower one.
    pub annulus_margin: f64,
    /// Largest uncovered sub-length of `[ρ−(θ), ρ+(θ)]` by the images of the
    /// preimage fibers; zero means the band is forward self-covering.
    pub union_defect: f64,
    pub notes: String,
}

/// Fiberwise annulus margin:
/// `min_θ [ min_{θ'} (λρ+(θ') + τ(θ')) − max_{θ'} (λρ−(θ') + τ(θ')) ]`
/// with θ' running over the ℓ preimages of θ.
pub fn annulus_margin(p: &SkewParams, b: &BoundaryPair) -> f64 {
    per_theta_stats(p, b)
        .map(|(lo_plus, hi_minus, _, _)| lo_plus - hi_minus)
        .fold(f64::INFINITY, f64::min)
}

/// Coverage defect of the band under one forward step: for each grid θ the
/// ℓ image intervals `[λρ−(θ')+τ(θ'), λρ+(θ')+τ(θ')]` are merged and the
/// largest uncovered gap inside `[ρ−(θ), ρ+(θ)]` is measured; the maximum
/// over θ is returned.
pub fn union_defect(p: &SkewParams, b: &BoundaryPair) -> f64 {
    let n = b.n_grid();
    let ell = p.ell as usize;
    let rp = b.rho_plus.samples();
    let rm = b.rho_minus.samples();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let mut intervals: Vec<(f64, f64)> = (0..ell)
            .map(|j| {
                let x = (i as f64 / n as f64 + j as f64) / ell as f64;
                let t = p.tau.evaluate(x);
                (
                    p.lambda * b.rho_minus.interpolate(x) + t,
                    p.lambda * b.rho_plus.interpolate(x) + t,
                )
            })
            .collect();
        intervals.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (lo, hi) = (rm[i], rp[i]);
        let mut cursor = lo;
        let mut gap: f64 = 0.0;
        for (a, bb) in intervals {
            if a > cursor {
                gap = gap.max(a.min(hi) - cursor);
            }
            cursor = cursor.max(bb);
            if cursor >= hi {
                break;
            }
        }
        if cursor < hi {
            gap = gap.max(hi - cursor);
        }
        worst = worst.max(gap);
    }
    worst
}

fn per_theta_stats<'a>(
    p: &'a SkewParams,
    b: &'a BoundaryPair,
) -> impl Iterator<Item = (f64, f64, f64, f64)> + 'a {
    let n = b.n_grid();
    let ell = p.ell as usize;
    (0..n).map(move |i| {
        let mut lo_plus = f64::INFINITY;
        let mut hi_minus = f64::NEG_INFINITY;
        let mut hi_plus = f64::NEG_INFINITY;
        let mut lo_minus = f64::INFINITY;
        for j in 0..ell {
            let x = (i as f64 / n as f64 + j as f64) / ell as f64;
            let t = p.tau.evaluate(x);
            let ip = p.lambda * b.rho_plus.interpolate(x) + t;
            let im = p.lambda * b.rho_minus.interpolate(x) + t;
            lo_plus = lo_plus.min(ip);
            hi_plus = hi_plus.max(ip);
            hi_minus = hi_minus.max(im);
            lo_minus = lo_minus.min(im);
        }
        (lo_plus, hi_minus, hi_plus, lo_minus)
    })
}

/// Decides the attractor topology.
///
/// Order of tests: a collapsed gap means a Jordan curve; a positive margin
/// certifies a closed annulus; for `ℓ = 2` a decisively negative margin
/// rules the annulus out both ways; otherwise the coverage defect
/// arbitrates, and a borderline defect is reported as undetermined. The
/// verdict is never `ClosedAnnulus` for `λ ≤ 1/ℓ`.
pub fn classify(
    p: &SkewParams,
    b: &BoundaryPair,
    tol_j: f64,
    tol_a: f64,
) -> Result<AttractorClassification, TopologyError> {
    let conv_limit = tol_j.max(tol_a);
    if b.residual > conv_limit {
        return Err(TopologyError::Unconverged(b.residual, conv_limit));
    }
    let jordan_gap = b.jordan_gap();
    let margin = annulus_margin(p, b);
    let defect = union_defect(p, b);
    let annulus_allowed = p.lambda > 1.0 / p.ell as f64;

    let mut notes = String::new();
    let verdict = if jordan_gap < tol_j {
        Verdict::JordanCurve
    } else if margin > tol_a && annulus_allowed {
        Verdict::ClosedAnnulus
    } else if margin > tol_a {
        // Positive margin is impossible below λ = 1/ℓ; treat as numerical.
        notes.push_str("positive margin discarded: lambda <= 1/ell forbids an annulus; ");
        Verdict::Undetermined
    } else if p.ell == 2 && margin < -tol_a {
        Verdict::NotAnnulus
    } else if defect < tol_a {
        if annulus_allowed {
            Verdict::ClosedAnnulus
        } else {
            notes.push_str("covering holds but lambda <= 1/ell forbids an annulus; ");
            Verdict::Undetermined
        }
    } else if defect > 2.0 * tol_a {
        Verdict::NotAnnulus
    } else {
        notes.push_str("defect within tolerance band of the grid resolution; ");
        Verdict::Undetermined
    };
    Ok(AttractorClassification {
        verdict,
        jordan_gap,
        annulus_margin: margin,
        union_defect: defect,
        notes,
    })
}

/// Contact set of the upper boundary: grid points where the maximum in the
/// functional equation is attained by the forward image,
/// `|λρ+(θ) + τ(θ) − ρ+(ℓθ)| < tol`; and the estimate of its maximal
/// invariant subset (points whose forward orbit stays within one grid cell
/// of the contact set for `horizon` steps).
pub fn contact_set(
    p: &SkewParams,
    b: &BoundaryPair,
    tol: f64,
    horizon: usize,
) -> (Vec<usize>, Vec<usize>) {
    let n = b.n_grid();
    let rp = b.rho_plus.samples();
    let ell = p.ell as usize;
    let mut mask = vec![false; n];
    for i in 0..n {
        let theta = i as f64 / n as f64;
        let image = p.lambda * rp[i] + p.tau.evaluate(theta);
        if (image - rp[(ell * i) % n]).abs() < tol {
            mask[i] = true;
        }
    }
    // Dilate by one cell: a forward orbit is only known to grid accuracy.
    let dilated: Vec<bool> = (0..n)
        .map(|i| mask[i] || mask[(i + 1) % n] || mask[(i + n - 1) % n])
        .collect();
    let d_plus: Vec<usize> = (0..n).filter(|&i| mask[i]).collect();
    let k_plus: Vec<usize> = d_plus
        .iter()
        .copied()
        .filter(|&i| {
            let mut idx = i;
            for _ in 0..horizon {
                idx = (ell * idx) % n;
                if !dilated[idx] {
                    return false;
                }
            }
            true
        })
        .collect();
    (d_plus, k_plus)
}
