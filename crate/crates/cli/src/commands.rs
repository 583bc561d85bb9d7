//! Subcommand implementations.

use serde_json::json;

use solenoid_core::affine::{
    boundaries_to_csv, boundary_fixed_point, sample_attractor, BoundaryPair, SkewParams,
};
use solenoid_core::circle::CircleFunction;
use solenoid_core::cohomology::{decompose, scan_jordan, solve_l, LambdaGrid, SolveOutcome};
use solenoid_core::families;
use solenoid_core::orbits;
use solenoid_core::perturbed::{
    estimate_constants, map_annulus_margin, perturbed_boundaries, rescaled_limit, AffineLift,
    CylinderMap, LogQuadraticMap, VerticalTrig,
};
use solenoid_core::raster;
use solenoid_core::tau_spec::{BuiltinMapSpec, MapSpec, TauSpec};
use solenoid_core::topology;

use crate::output::{self, CliError};
use crate::{Command, ExampleCommand, SystemArgs};

pub fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Boundaries(sys) => boundaries(sys),
        Command::Classify(sys) => classify(sys),
        Command::ScanJordan { system, lambda_min, lambda_max, lambda_steps } => {
            scan(system, lambda_min, lambda_max, lambda_steps)
        }
        Command::SolveCohomology { system, k_max } => solve_cohomology(system, k_max),
        Command::Decompose(sys) => decompose_cmd(sys),
        Command::Birkhoff { system, max_period } => birkhoff(system, max_period),
        Command::Render { system, example, width, height, points, depth } => {
            render(system, example, width, height, points, depth)
        }
        Command::Example(ex) => example(ex),
        Command::Perturbed { map, grid, tol, out, boundaries_out } => {
            perturbed(&map, grid, tol, out, boundaries_out)
        }
    }
}

fn build_tau(sys: &SystemArgs) -> Result<CircleFunction, CliError> {
    match &sys.tau {
        Some(arg) => {
            let text = output::path_or_inline(arg)?;
            let spec = TauSpec::from_json(&text).map_err(CliError::input)?;
            spec.build(sys.grid).map_err(CliError::input)
        }
        None => Ok(CircleFunction::zero(sys.grid.unwrap_or(4096))),
    }
}

fn build_system(sys: &SystemArgs) -> Result<(SkewParams, usize), CliError> {
    let tau = build_tau(sys)?;
    let n = sys.grid.unwrap_or_else(|| tau.n_samples());
    let p = SkewParams::new(sys.ell, sys.lambda, tau).map_err(CliError::input)?;
    Ok((p, n))
}

fn solve_boundaries(p: &SkewParams, n: usize, tol: f64) -> Result<BoundaryPair, CliError> {
    boundary_fixed_point(p, n, tol).map_err(CliError::numeric)
}

fn boundaries(sys: SystemArgs) -> Result<(), CliError> {
    let (p, n) = build_system(&sys)?;
    let pair = solve_boundaries(&p, n, sys.tol)?;
    output::write_text(sys.out.as_ref(), &boundaries_to_csv(&pair))
}

fn classify(sys: SystemArgs) -> Result<(), CliError> {
    let (p, n) = build_system(&sys)?;
    let pair = solve_boundaries(&p, n, sys.tol)?;
    let c = topology::classify(&p, &pair, 10.0 * sys.tol, 10.0 * sys.tol)
        .map_err(CliError::numeric)?;
    let v = json!({
        "verdict": format!("{:?}", c.verdict),
        "jordan_gap": c.jordan_gap,
        "annulus_margin": c.annulus_margin,
        "union_defect": c.union_defect,
        "notes": c.notes,
        "residual": pair.residual,
        "iterations": pair.iterations,
    });
    output::write_text(sys.out.as_ref(), &output::to_json_string(&v))
}

fn scan(sys: SystemArgs, lo: f64, hi: f64, steps: usize) -> Result<(), CliError> {
    if !(0.0 < lo && lo < hi && hi <= 1.0 && steps >= 2) {
        return Err(CliError::Input(format!("bad lambda grid [{lo}, {hi}] x {steps}")));
    }
    let tau = build_tau(&sys)?;
    let grid = LambdaGrid::new(lo, hi, steps);
    let found = scan_jordan(&tau, sys.ell, &grid, sys.tol).map_err(CliError::numeric)?;
    let v: Vec<_> = found
        .iter()
        .map(|j| json!({"lambda": j.lambda, "mult": j.multiplicity, "g_value": j.g_value}))
        .collect();
    output::write_text(sys.out.as_ref(), &output::to_json_string(&serde_json::Value::Array(v)))
}

fn solve_cohomology(sys: SystemArgs, k_max: u32) -> Result<(), CliError> {
    let tau = build_tau(&sys)?;
    if !(0.0 < sys.lambda && sys.lambda <= 1.0) {
        return Err(CliError::Input(format!("lambda = {} outside (0, 1]", sys.lambda)));
    }
    match solve_l(&tau, sys.ell, sys.lambda, k_max, sys.tol).map_err(CliError::input)? {
        SolveOutcome::Solved { mu, residual } if residual < sys.tol => {
            let v = json!({
                "mu_spec": TauSpec::describe(&mu),
                "residual": residual,
                "tol": sys.tol,
            });
            output::write_text(sys.out.as_ref(), &output::to_json_string(&v))
        }
        SolveOutcome::Solved { residual, .. } => Err(CliError::Numeric(format!(
            "no solution within tolerance: residual {residual:.3e} >= {:.3e}",
            sys.tol
        ))),
        SolveOutcome::NotSolvable { reason } => {
            Err(CliError::Numeric(format!("not solvable: {reason}")))
        }
    }
}

fn decompose_cmd(sys: SystemArgs) -> Result<(), CliError> {
    let tau = build_tau(&sys)?;
    let grid = LambdaGrid::default_scan();
    let d = decompose(&tau, sys.ell, &grid, sys.tol).map_err(CliError::numeric)?;
    let v = json!({
        "factors": d.factors,
        "residual_spec": TauSpec::describe(&d.residual),
        "residual_norm": d.residual.sup_norm(),
        "residual_irreducible": d.residual_irreducible,
        "tol": sys.tol,
    });
    output::write_text(sys.out.as_ref(), &output::to_json_string(&v))
}

fn birkhoff(sys: SystemArgs, max_period: u32) -> Result<(), CliError> {
    let tau = build_tau(&sys)?;
    let mut orbits = orbits::periodic_orbits(sys.ell, max_period).map_err(CliError::input)?;
    for o in &mut orbits {
        o.bind(&tau);
    }
    let witness = orbits::coboundary_witness(&tau, sys.ell, max_period).map_err(CliError::input)?;
    let rows: Vec<_> = orbits
        .iter()
        .map(|o| {
            json!({
                "period": o.period,
                "theta0": format!("{}/{}", o.numerator, o.denominator),
                "points": o.points,
                "birkhoff_sum": o.birkhoff_sum,
                "birkhoff_average": o.birkhoff_average(),
            })
        })
        .collect();
    let witness_json = match &witness {
        orbits::CoboundaryVerdict::NotCoboundary { positive, negative, mean_subtracted } => json!({
            "verdict": "NotCoboundary",
            "positive": {"theta0": positive.theta0(), "sum": positive.birkhoff_sum},
            "negative": {"theta0": negative.theta0(), "sum": negative.birkhoff_sum},
            "mean_subtracted": mean_subtracted,
        }),
        orbits::CoboundaryVerdict::Inconclusive { mean_subtracted } => json!({
            "verdict": "Inconclusive",
            "mean_subtracted": mean_subtracted,
        }),
    };
    let v = json!({"orbits": rows, "coboundary_witness": witness_json});
    output::write_text(sys.out.as_ref(), &output::to_json_string(&v))
}

fn render(
    sys: SystemArgs,
    example: Option<String>,
    width: usize,
    height: usize,
    points: usize,
    depth: usize,
) -> Result<(), CliError> {
    let img = match example.as_deref() {
        Some("fat-hole") => {
            let n = sys.grid.unwrap_or(1 << 17);
            let (_, params, pair) =
                families::fat_hole_boundaries(sys.lambda, n, sys.tol).map_err(CliError::numeric)?;
            let overlay = families::region_points(&params, &pair, width, height);
            let top = pair.rho_plus.sup_norm() * 1.05;
            raster::render_band(&pair, width, height, (-0.2, top), 100, &overlay)
                .map_err(CliError::numeric)?
        }
        Some(other) => {
            return Err(CliError::Input(format!(
                "unknown example '{other}' (supported: fat-hole)"
            )))
        }
        None => {
            let (p, n) = build_system(&sys)?;
            let pair = solve_boundaries(&p, n, sys.tol)?;
            let cloud = sample_attractor(&p, points, depth, sys.seed);
            let span = p.t0 * 1.05;
            raster::render_band(&pair, width, height, (-span, span), 100, &cloud)
                .map_err(CliError::numeric)?
        }
    };
    output::write_bytes(sys.out.as_ref(), &img.to_pgm())
}

fn example(cmd: ExampleCommand) -> Result<(), CliError> {
    match cmd {
        ExampleCommand::FatHole { lambda, grid, tol, build_only, out } => {
            let params = families::fat_hole_params(lambda).map_err(CliError::input)?;
            let n = grid.unwrap_or_else(|| {
                let eps_min = params.epsilons.iter().cloned().fold(f64::INFINITY, f64::min);
                ((32.0 * params.t0 / eps_min).ceil() as usize).next_power_of_two()
            });
            let (tau, params) = families::build_fat_hole(lambda, n).map_err(CliError::input)?;
            let mut v = json!({
                "tau_spec": TauSpec::describe(&tau),
                "params": params,
                "violated_constraints": params.violated_constraints(),
            });
            if !build_only {
                let skew = SkewParams::new(2, lambda, tau).map_err(CliError::input)?;
                let pair = solve_boundaries(&skew, n, tol)?;
                let report = families::verify_fat_hole(&params, &skew, &pair, 1e-3, 1e-2)
                    .map_err(CliError::numeric)?;
                let c = topology::classify(&skew, &pair, 10.0 * tol, 10.0 * tol)
                    .map_err(CliError::numeric)?;
                v["verify"] = serde_json::to_value(&report).expect("serializable");
                v["verdict"] = json!(format!("{:?}", c.verdict));
            }
            output::write_text(out.as_ref(), &output::to_json_string(&v))
        }
        ExampleCommand::LogQuadratic { lambda, c_mod, c_arg, alpha_samples, grid, tol, out } => {
            let alphas = match c_arg {
                Some(arg) => vec![arg],
                None => families::uniform_alphas(alpha_samples),
            };
            let report = families::annulus_scan_log_quadratic(lambda, &c_mod, &alphas, grid, tol);
            let v = serde_json::to_value(&report).expect("serializable");
            output::write_text(out.as_ref(), &output::to_json_string(&v))
        }
    }
}

fn perturbed(
    map_arg: &str,
    grid: usize,
    tol: f64,
    out: Option<std::path::PathBuf>,
    boundaries_out: Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    let text = output::path_or_inline(map_arg)?;
    let spec = MapSpec::from_json(&text).map_err(CliError::input)?;

    let (map, reference): (Box<dyn CylinderMap>, Option<f64>) = match spec {
        MapSpec::Perturbation { ell, lambda, tau, perturbation } => {
            let tau = tau.build(Some(grid)).map_err(CliError::input)?;
            let r = tau.lip_bound() / (ell as f64 - lambda);
            let base =
                AffineLift::new(SkewParams::new(ell, lambda, tau).map_err(CliError::input)?);
            let solenoid_core::tau_spec::PerturbationSpec::VerticalTrig { delta, k } = perturbation;
            (Box::new(VerticalTrig { base, delta, k }), Some(r))
        }
        MapSpec::Builtin(BuiltinMapSpec::LogQuadratic { lambda, c_mod, c_arg }) => (
            Box::new(LogQuadraticMap::from_polar(lambda, c_mod, c_arg).map_err(CliError::input)?),
            None,
        ),
        MapSpec::Builtin(BuiltinMapSpec::RescaledLimit { lambda, alpha }) => {
            let lift = rescaled_limit(lambda, alpha);
            let r = lift.params.tau.lip_bound() / (2.0 - lambda);
            (Box::new(lift), Some(r))
        }
    };

    run_perturbed(map.as_ref(), reference, grid, tol, out, boundaries_out)
}

fn run_perturbed(
    map: &dyn CylinderMap,
    reference: Option<f64>,
    grid: usize,
    tol: f64,
    out: Option<std::path::PathBuf>,
    boundaries_out: Option<std::path::PathBuf>,
) -> Result<(), CliError> {
    let gc = estimate_constants(map, 256, 9, reference).map_err(CliError::numeric)?;
    let pair = perturbed_boundaries(map, &gc, grid, tol).map_err(CliError::numeric)?;
    let margin = map_annulus_margin(map, &gc, &pair).map_err(CliError::numeric)?;
    let gap = pair.jordan_gap();
    let verdict = if gap < 20.0 * tol {
        "JordanCurve"
    } else if margin > 10.0 * tol {
        "ClosedAnnulus"
    } else if map.degree() == 2 && margin < -10.0 * tol {
        "NotAnnulus"
    } else {
        "Undetermined"
    };
    let v = json!({
        "constants": gc,
        "residual": pair.residual,
        "iterations": pair.iterations,
        "jordan_gap": gap,
        "annulus_margin": margin,
        "verdict": verdict,
    });
    if let Some(path) = boundaries_out {
        output::write_to(&path, &boundaries_to_csv(&pair))?;
    }
    output::write_text(out.as_ref(), &output::to_json_string(&v))
}
