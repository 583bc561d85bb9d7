//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured quantities (run with `--nocapture` to see them). Tolerances
//! are pinned in the assertions.

use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use solenoid_core::affine::{
    boundary_fixed_point, sample_attractor, dist_lambda, t_lambda, Itinerary, SkewParams,
};
use solenoid_core::circle::{CircleFunction, TrigPoly, TrigTerm, TAU_2PI};
use solenoid_core::cohomology::{
    apply_l, apply_l_chain, dk_functional, scan_jordan, decompose, LambdaGrid,
};
use solenoid_core::families::{build_fat_hole, verify_fat_hole};
use solenoid_core::orbits::{coboundary_witness, CoboundaryVerdict};
use solenoid_core::perturbed::{
    estimate_constants, graph_transform, perturbed_boundaries, rescaled_limit, AffineLift,
    CylinderMap, LogQuadraticMap, RescaleConjugate, VerticalTrig,
};
use solenoid_core::topology::{classify, Verdict};

fn cos1(n: usize) -> CircleFunction {
    CircleFunction::from_trig_poly(TrigPoly::new(0.0, vec![TrigTerm::cos_term(1, 1.0)]), n)
        .unwrap()
}

fn elapsed_under(start: Instant, secs: f64, what: &str) {
    let dt = start.elapsed().as_secs_f64();
    assert!(dt < secs, "{what}: runtime {dt:.1}s exceeds {secs}s");
}

#[test]
fn criterion_1_jordan_reconstruction() {
    let start = Instant::now();
    let mu = cos1(4096);
    let tau = apply_l(2, 0.5, &mu);
    let p = SkewParams::new(2, 0.5, tau.clone()).unwrap();
    let b = boundary_fixed_point(&p, 4096, 1e-6).unwrap();

    let dist_plus = b.rho_plus.sup_dist(&mu.resample(4096).unwrap());
    let dist_minus = b.rho_minus.sup_dist(&mu.resample(4096).unwrap());
    assert!(dist_plus < 1e-5, "upper boundary off by {dist_plus}");
    assert!(dist_minus < 1e-5, "lower boundary off by {dist_minus}");

    let c = classify(&p, &b, 1e-5, 1e-5).unwrap();
    assert_eq!(c.verdict, Verdict::JordanCurve);

    let found = scan_jordan(&tau, 2, &LambdaGrid::default_scan(), 1e-6).unwrap();
    assert_eq!(found.len(), 1, "expected exactly one Jordan parameter: {found:?}");
    assert!((found[0].lambda - 0.5).abs() < 1e-3);
    assert_eq!(found[0].multiplicity, 1);

    elapsed_under(start, 5.0, "criterion 1");
    println!(
        "criterion 1 PASS: |rho+ - mu| = {dist_plus:.2e}, |rho- - mu| = {dist_minus:.2e}, \
         verdict JordanCurve, scan = [({:.6}, {})]",
        found[0].lambda, found[0].multiplicity
    );
}

#[test]
fn criterion_2_exact_boundary_value_and_witnesses() {
    let start = Instant::now();
    let tau = cos1(4096);
    let p = SkewParams::new(2, 0.9, tau.clone()).unwrap();
    let b = boundary_fixed_point(&p, 4096, 1e-6).unwrap();
    let at_zero = b.rho_plus.samples()[0];
    assert!((at_zero - 10.0).abs() < 1e-4, "rho+(0) = {at_zero}");

    let spectrum = tau.fourier(128).unwrap();
    for i in 0..=89 {
        let lambda = 0.1 + i as f64 * 0.01;
        let d = dk_functional(&tau, 2, lambda, 1, &spectrum).unwrap();
        assert!(
            (d.value - 1.0).abs() <= d.truncation_error + 1e-12,
            "D_1 at lambda={lambda}: {} (trunc {})",
            d.value,
            d.truncation_error
        );
    }

    match coboundary_witness(&tau, 2, 2).unwrap() {
        CoboundaryVerdict::NotCoboundary { positive, negative, .. } => {
            assert_eq!(positive.theta0(), 0.0);
            assert!((positive.birkhoff_sum - 1.0).abs() < 1e-10);
            assert_eq!((negative.numerator, negative.denominator), (1, 3));
            assert!((negative.birkhoff_sum + 1.0).abs() < 1e-10);
        }
        v => panic!("expected NotCoboundary, got {v:?}"),
    }

    elapsed_under(start, 5.0, "criterion 2");
    println!("criterion 2 PASS: rho+(0) = {at_zero:.6} (anchor 10), D_1 = 1 on the lambda grid, witnesses (0, +1) and (1/3, -1)");
}

#[test]
fn criterion_3_annulus_emergence() {
    let start = Instant::now();
    let mut emerged = Vec::new();
    for lambda in [0.9, 0.95, 0.99] {
        let p = SkewParams::new(2, lambda, cos1(4096)).unwrap();
        let b = boundary_fixed_point(&p, 4096, 1e-6).unwrap();
        let c = classify(&p, &b, 1e-5, 1e-5).unwrap();
        if c.verdict == Verdict::ClosedAnnulus && c.annulus_margin > 0.0 {
            emerged.push((lambda, c.annulus_margin));
        }
    }
    assert!(!emerged.is_empty(), "no annulus detected for lambda in {{0.9, 0.95, 0.99}}");

    for lambda in [0.3, 0.4, 0.5] {
        let p = SkewParams::new(2, lambda, cos1(4096)).unwrap();
        let b = boundary_fixed_point(&p, 4096, 1e-6).unwrap();
        let c = classify(&p, &b, 1e-5, 1e-5).unwrap();
        assert_ne!(
            c.verdict,
            Verdict::ClosedAnnulus,
            "lambda = {lambda} <= 1/ell cannot give an annulus"
        );
    }

    elapsed_under(start, 30.0, "criterion 3");
    println!("criterion 3 PASS: annuli at {emerged:?}; no annulus verdict for lambda <= 1/2");
}

#[test]
fn criterion_4_decomposition_inverse() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(12345);
    let factor_pool = [0.3, 0.5, 0.7, 1.0];
    let grid = LambdaGrid::default_scan();

    for case in 0..20 {
        // random zero-mean trig polynomial of degree <= 8
        let deg = rng.random_range(1..=8usize);
        let terms: Vec<TrigTerm> = (1..=deg)
            .map(|k| TrigTerm {
                k: k as u32,
                cos: rng.random_range(-1.0..1.0),
                sin: rng.random_range(-1.0..1.0),
            })
            .collect();
        let mu = CircleFunction::from_trig_poly(TrigPoly::new(0.0, terms), 512).unwrap();

        let len = rng.random_range(1..=3usize);
        let mut factors: Vec<f64> =
            (0..len).map(|_| factor_pool[rng.random_range(0..4)]).collect();
        factors.sort_by(|a, b| b.partial_cmp(a).unwrap());

        // norm-growth invariant along the chain, via discrete estimates
        let mut cur = mu.clone();
        for &l in factors.iter().rev() {
            let next = apply_l(2, l, &cur);
            let lhs = next.discrete_lip_estimate();
            let rhs = (2.0 - l) * cur.discrete_lip_estimate();
            assert!(
                lhs >= rhs * (1.0 - 1e-3),
                "case {case}: norm growth {lhs} < (2-{l})*{}",
                cur.discrete_lip_estimate()
            );
            cur = next;
        }
        let tau = apply_l_chain(2, &factors, &mu);

        let d = decompose(&tau, 2, &grid, 1e-6).unwrap();
        let mut got = d.factors.clone();
        got.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert_eq!(got.len(), factors.len(), "case {case}: {got:?} vs {factors:?}");
        for (g, f) in got.iter().zip(&factors) {
            assert!((g - f).abs() < 1e-3, "case {case}: factor {g} vs {f}");
        }
        let worst = (0..512)
            .map(|i| {
                let th = i as f64 / 512.0;
                (d.residual.evaluate(th) - mu.evaluate(th)).abs()
            })
            .fold(0.0, f64::max);
        assert!(worst < 1e-4, "case {case}: residual off by {worst}");
    }

    elapsed_under(start, 60.0, "criterion 4");
    println!("criterion 4 PASS: 20 random factor chains recovered (multiset within 1e-3, residual within 1e-4)");
}

#[test]
fn criterion_5_fat_hole_verification() {
    let start = Instant::now();
    let n = 1 << 17;
    let (tau, params) = build_fat_hole(0.6, n).unwrap();
    assert!(params.violated_constraints().is_empty(), "{:?}", params.violated_constraints());

    let skew = SkewParams::new(2, 0.6, tau).unwrap();
    let pair = boundary_fixed_point(&skew, n, 1e-6).unwrap();
    let report = verify_fat_hole(&params, &skew, &pair, 1e-3, 1e-2).unwrap();

    assert!(report.lower_boundary_flat, "sup|rho-| = {}", report.rho_minus_sup);
    assert!(report.cycle_values_attained, "cycle error {}", report.cycle_error);
    assert!(
        report.antipode_value < 5.0,
        "rho+(1/30) = {} must stay below T0/lambda = 5",
        report.antipode_value
    );
    assert!(report.antipode_below_escape);
    assert!(report.margin_negative, "margin at theta_1 = {}", report.margin_at_theta1);
    assert!(report.region_invariant, "interior region witness failed");
    assert!(report.all_pass);

    let c = classify(&skew, &pair, 1e-5, 1e-5).unwrap();
    assert_eq!(c.verdict, Verdict::NotAnnulus);
    // the two image intervals over theta_1 are disjoint, so the band is not
    // forward self-covering
    assert!(c.union_defect > 1e-3, "union defect {}", c.union_defect);

    elapsed_under(start, 300.0, "criterion 5");
    println!(
        "criterion 5 PASS: sup|rho-| = {:.2e}, cycle err = {:.2e}, rho+(1/30) = {:.4} < 5, \
         margin(theta_1) = {:.3}, region invariant, verdict NotAnnulus",
        report.rho_minus_sup, report.cycle_error, report.antipode_value, report.margin_at_theta1
    );
}

#[test]
fn criterion_6_perturbation_continuity() {
    let start = Instant::now();
    let n = 2048;
    let lambda = 0.9;
    let tau = cos1(n);
    let skew = SkewParams::new(2, lambda, tau.clone()).unwrap();
    let lift = AffineLift::new(skew.clone());
    let reference = tau.lip_bound() / (2.0 - lambda);
    let gc = estimate_constants(&lift, 256, 9, Some(reference)).unwrap();

    let affine = boundary_fixed_point(&skew, n, 1e-7).unwrap();
    let zero_pert = perturbed_boundaries(&lift, &gc, n, 1e-7).unwrap();
    let d_plus = zero_pert.rho_plus.sup_dist(&affine.rho_plus);
    let d_minus = zero_pert.rho_minus.sup_dist(&affine.rho_minus);
    assert!(d_plus < 2e-6 && d_minus < 2e-6, "zero-perturbation mismatch {d_plus}, {d_minus}");

    // measured contraction factor of the extremal transform
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_factor: f64 = 0.0;
    for _ in 0..8 {
        let a = random_budget_graph(&mut rng, &gc, skew.t0, n);
        let b = random_budget_graph(&mut rng, &gc, skew.t0, n);
        let ta = graph_transform(&lift, &gc, &a, true).unwrap();
        let tb = graph_transform(&lift, &gc, &b, true).unwrap();
        let num = ta.sup_dist(&tb);
        let den = a.sup_dist(&b);
        if den > 1e-12 {
            worst_factor = worst_factor.max(num / den);
        }
    }
    assert!(
        worst_factor <= gc.lambda_hat + 0.02,
        "contraction factor {worst_factor} exceeds lambda_hat {} + 0.02",
        gc.lambda_hat
    );

    // vertical perturbations: bounded by (1+C)/(1-lambda_hat)*delta, and
    // close to linear response across a decade
    let amplification = gc.amplification();
    let mut diffs = Vec::new();
    for delta in [1e-4, 1e-3] {
        let pert = VerticalTrig { base: AffineLift::new(skew.clone()), delta, k: 1 };
        let gc_p = estimate_constants(&pert, 256, 9, Some(reference)).unwrap();
        let b = perturbed_boundaries(&pert, &gc_p, n, 1e-7).unwrap();
        let diff = b
            .rho_plus
            .sup_dist(&affine.rho_plus)
            .max(b.rho_minus.sup_dist(&affine.rho_minus));
        assert!(
            diff <= amplification * delta,
            "delta = {delta}: boundary moved {diff}, bound {}",
            amplification * delta
        );
        diffs.push(diff);
    }
    let ratio = diffs[1] / diffs[0];
    assert!(
        (2.0..=50.0).contains(&ratio),
        "response ratio {ratio} across one decade is far from linear"
    );

    elapsed_under(start, 60.0, "criterion 6");
    println!(
        "criterion 6 PASS: zero-pert match {:.2e}, contraction {:.3} <= {:.3}, \
         response {:.2e}/{:.2e} (ratio {:.1})",
        d_plus.max(d_minus),
        worst_factor,
        gc.lambda_hat + 0.02,
        diffs[0],
        diffs[1],
        ratio
    );
}

fn random_budget_graph(
    rng: &mut ChaCha8Rng,
    gc: &solenoid_core::perturbed::GraphConstants,
    t0: f64,
    n: usize,
) -> CircleFunction {
    let deg = rng.random_range(1..=4u32);
    let terms: Vec<TrigTerm> = (1..=deg)
        .map(|k| TrigTerm {
            k,
            cos: rng.random_range(-1.0..1.0),
            sin: rng.random_range(-1.0..1.0),
        })
        .collect();
    let poly = TrigPoly::new(rng.random_range(-0.5..0.5), terms);
    // scale into the Lipschitz budget and the strip
    let lip = poly.derivative_sup_bound();
    let scale = (gc.c / lip).min(t0 / (poly.eval(0.0).abs() + 2.0)).min(1.0) * 0.5;
    let scaled = TrigPoly::new(
        poly.constant * scale,
        poly.terms
            .iter()
            .map(|t| TrigTerm { k: t.k, cos: t.cos * scale, sin: t.sin * scale })
            .collect(),
    );
    CircleFunction::from_trig_poly(scaled, n).unwrap()
}

#[test]
fn criterion_7_rescaling_limit() {
    let start = Instant::now();
    let lambda = 0.8;
    let limit = rescaled_limit(lambda, 0.0);
    let t_span = limit.params.t0;

    let mut sups = Vec::new();
    for eta in [1e-1, 1e-2, 1e-3] {
        let inner = LogQuadraticMap::new(lambda, num_complex::Complex64::new(eta, 0.0)).unwrap();
        let conj = RescaleConjugate::new(inner, eta).unwrap();
        assert!(conj.strip_half_height() >= t_span);
        let mut sup: f64 = 0.0;
        for i in 0..64 {
            for j in 0..9 {
                let s = i as f64 / 64.0;
                let t = -t_span + j as f64 * (2.0 * t_span / 8.0);
                let (f0, g0) = conj.eval(s, t);
                let (f1, g1) = limit.eval(s, t);
                sup = sup.max((f0 - f1).abs().max((g0 - g1).abs()));
            }
        }
        sups.push(sup);
    }
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "not monotone: {sups:?}");
    assert!(sups[2] < 5e-3, "eta = 1e-3 defect {} >= 5e-3", sups[2]);

    let inner = LogQuadraticMap::new(lambda, num_complex::Complex64::new(1e-3, 0.0)).unwrap();
    let conj = RescaleConjugate::new(inner, 1e-3).unwrap();
    let (_, g) = conj.eval(0.0, 0.0);
    let anchor_err = (g - 1.0 / TAU_2PI).abs();
    assert!(anchor_err < 5e-3, "anchor error {anchor_err}");

    elapsed_under(start, 5.0, "criterion 7");
    println!(
        "criterion 7 PASS: probe sups {:?} decreasing, final {:.2e} < 5e-3, anchor err {:.2e}",
        sups, sups[2], anchor_err
    );
}

#[test]
fn criterion_8_semiconjugacy_band() {
    let start = Instant::now();
    let n = 4096;
    let lambda = 0.9;
    let tau = cos1(n);
    let p = SkewParams::new(2, lambda, tau.clone()).unwrap();
    let b = boundary_fixed_point(&p, n, 1e-6).unwrap();

    let depth = 128; // tail lambda^128 * 10 ~ 1.4e-5, well under the band slack
    let points = sample_attractor(&p, 10_000, depth, 2024);
    for &(theta, t) in &points {
        let hi = b.rho_plus.interpolate(theta) + 1e-3;
        let lo = b.rho_minus.interpolate(theta) - 1e-3;
        assert!(t <= hi && t >= lo, "point ({theta}, {t}) escapes [{lo}, {hi}]");
    }

    // t_lambda Lipschitz constant on the adapted metric
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let lip_factor = tau.lip_bound() / lambda;
    for _ in 0..1000 {
        let d = 32;
        let mk = |rng: &mut ChaCha8Rng| {
            let theta0: f64 = rng.random();
            let branches: Vec<u32> = (0..d).map(|_| rng.random_range(0..2)).collect();
            Itinerary::from_branches(2, theta0, &branches)
        };
        let a = mk(&mut rng);
        let bb = mk(&mut rng);
        let (va, _) = t_lambda(&p, &a).unwrap();
        let (vb, _) = t_lambda(&p, &bb).unwrap();
        let dist = dist_lambda(&a, &bb, lambda).unwrap();
        let tail = 2.0 * lambda.powi(d) * tau.sup_norm() / (1.0 - lambda);
        assert!(
            (va - vb).abs() <= lip_factor * dist + tail + 1e-12,
            "lipschitz violated: |{va} - {vb}| > {lip_factor} * {dist}"
        );
    }

    elapsed_under(start, 10.0, "criterion 8");
    println!("criterion 8 PASS: 10^4 samples inside the boundary band, t_lambda Lipschitz on 10^3 pairs");
}
