//! Acceptance suite. Prints one PASS/FAIL line per check and exits non-zero if
//! any check fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use liesys_cli::{run_convergence, Experiment, MethodName, RunRequest};
use liesys_core::ck::*;
use liesys_core::limit_cycle::{
    limit_cycle_action, limit_cycle_group_action, limit_cycle_reference_coefficients, limit_cycle_system,
    DiagonalGroupElement,
};
use liesys_core::riccati::{verify_superposition, RiccatiCoefficients};
use liesys_core::{dexpinv, solve, solve_direct_rk4, GroupAction, ManifoldPoint, SquareMatrix, StepperConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const KAPPAS: [f64; 6] = [-1.0, -0.5, 0.0, 0.4, 0.8, 1.0];
const CHART_PAIRS: [(f64, f64); 4] = [(0.8, -0.5), (1.0, 1.0), (0.0, 1.0), (-1.0, -1.0)];

type Check = (&'static str, fn() -> Outcome, Duration);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn params(k1: f64, k2: f64) -> CkParams {
    CkParams::new(k1, k2).unwrap()
}

fn ck_setup() -> (liesys_core::LieSystem, ManifoldPoint) {
    let sys = ck_lie_system(params(0.8, -0.5), ck_reference_coefficients(), ActionMode::Linear).unwrap();
    (sys, ManifoldPoint::from([1.0, 1.0, 1.0]))
}

fn geometric_methods() -> [(&'static str, StepperConfig); 3] {
    [("magnus2", StepperConfig::magnus2()), ("magnus4", StepperConfig::magnus4()), ("rkmk", StepperConfig::rkmk4())]
}

fn compose(p: CkParams, l: [f64; 3]) -> SquareMatrix {
    let e1 = ck_exp_closed(p, CkGenerator::P1, l[0]);
    let e2 = ck_exp_closed(p, CkGenerator::P2, l[1]);
    let e3 = ck_exp_closed(p, CkGenerator::J12, l[2]);
    &(&e1 * &e2) * &e3
}

fn kappa_trigonometry() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let (mut alg, mut fd) = (0.0f64, 0.0f64);
    for k in KAPPAS {
        for _ in 0..100 {
            let l: f64 = rng.gen_range(-2.0..2.0);
            let (c, s) = (ck_cos(k, l), ck_sin(k, l));
            let scale = 1.0 + c * c + k.abs() * s * s;
            alg = alg.max((c * c + k * s * s - 1.0).abs() / scale);
            alg = alg.max((ck_cos(k, 2.0 * l) - (c * c - k * s * s)).abs() / scale);
            alg = alg.max((ck_sin(k, 2.0 * l) - 2.0 * s * c).abs() / scale);
            let e = 1e-5;
            let dc = (ck_cos(k, l + e) - ck_cos(k, l - e)) / (2.0 * e);
            let ds = (ck_sin(k, l + e) - ck_sin(k, l - e)) / (2.0 * e);
            fd = fd.max((dc + k * s).abs()).max((ds - c).abs());
        }
    }
    outcome(alg <= 1e-12 && fd <= 1e-6, format!("algebraic {alg:.1e} (tol 1e-12), derivative {fd:.1e} (tol 1e-6)"))
}

fn closed_form_exponential() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let p = params(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let l: f64 = rng.gen_range(-2.0..2.0);
        for g in CkGenerator::ALL {
            let series = ck_generator_matrix(p, g).scale(l).exp();
            worst = worst.max(ck_exp_closed(p, g, l).distance(&series));
        }
    }
    outcome(worst <= 1e-12, format!("max Frobenius error {worst:.1e} over 600 exponentials (tol 1e-12)"))
}

fn invariant_preservation() -> Outcome {
    let (sys, x0) = ck_setup();
    let invariant = &sys.invariants()[0];
    let mut geo = 0.0f64;
    let mut detail = String::new();
    for (name, config) in geometric_methods() {
        let traj = solve(&sys, &x0, 3.0, 4.0, 10, &config).unwrap();
        let drift = traj.points.iter().map(|x| (invariant.eval(x) - 1.4).abs()).fold(0.0, f64::max);
        detail.push_str(&format!("{name} {drift:.1e}, "));
        geo = geo.max(drift);
    }
    let rk4 = solve_direct_rk4(&sys, &x0, 3.0, 4.0, 10).unwrap();
    let rk4_drift = rk4.points.iter().map(|x| (invariant.eval(x) - 1.4).abs()).fold(0.0, f64::max);
    detail.push_str(&format!("rk4 {rk4_drift:.1e}"));
    outcome(geo <= 1e-9 && rk4_drift >= 100.0 * geo.max(f64::EPSILON), detail)
}

fn group_manifold_preservation() -> Outcome {
    let (sys, x0) = ck_setup();
    let form = params(0.8, -0.5).bilinear_form();
    let mut worst = 0.0f64;
    for (_, config) in geometric_methods() {
        let traj = solve(&sys, &x0, 3.0, 4.0, 10, &config).unwrap();
        for y in &traj.group {
            let lhs = &(&y.transpose() * &form) * y;
            worst = worst.max(lhs.distance(&form));
        }
    }
    outcome(worst <= 1e-9, format!("max |Y^T I Y - I|_F {worst:.1e} (tol 1e-9)"))
}

fn convergence_orders() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let report = run_convergence(&RunRequest::new(Experiment::Convergence, dir.path().to_path_buf())).unwrap();
    let mut pass = report.slopes.len() == 3;
    let mut detail = String::new();
    for (m, slope) in &report.slopes {
        let range = if *m == MethodName::Magnus2 { 1.7..=2.3 } else { 3.6..=4.4 };
        pass &= range.contains(slope);
        detail.push_str(&format!("{m} {slope:.3} in [{}, {}]; ", range.start(), range.end()));
    }
    outcome(pass, detail.trim_end_matches("; "))
}

fn random_matrix(rng: &mut StdRng, norm: f64) -> SquareMatrix {
    let m = SquareMatrix::from_fn(3, |_, _| rng.gen_range(-1.0..1.0)).unwrap();
    let n = m.frobenius_norm();
    m.scale(norm / n)
}

fn dexpinv_contract() -> Outcome {
    let mut rng = StdRng::seed_from_u64(6);
    let mut worst_ratio = 0.0f64;
    for _ in 0..100 {
        let (omega_norm, h_norm) = (rng.gen_range(0.0..0.3), rng.gen_range(0.1..2.0));
        let omega = random_matrix(&mut rng, omega_norm);
        let h = random_matrix(&mut rng, h_norm);
        let gap = dexpinv(&omega, &h, 2).unwrap().distance(&dexpinv(&omega, &h, 8).unwrap());
        let bound = 10.0 * omega.frobenius_norm().powi(3) * h.frobenius_norm();
        worst_ratio = worst_ratio.max(gap / bound);
    }
    let h = random_matrix(&mut rng, 1.0);
    let exact_at_zero = dexpinv(&SquareMatrix::zeros(3), &h, 8).unwrap() == h;
    outcome(
        worst_ratio <= 1.0 && exact_at_zero,
        format!("max gap/bound {worst_ratio:.3}, dexpinv(0, H) == H: {exact_at_zero}"),
    )
}

/// Worst composition and fundamental-field mismatch of `action` at `x`.
fn action_law_errors(
    action: &GroupAction,
    near: &[SquareMatrix],
    generators: &[SquareMatrix],
    fields: &[ManifoldPoint],
    x: &ManifoldPoint,
) -> (f64, f64, f64) {
    let identity = SquareMatrix::identity(near[0].dim());
    let id = action.act(&identity, x).unwrap().distance(x);
    let mut comp = 0.0f64;
    for g in near {
        for h in near {
            let lhs = action.act(g, &action.act(h, x).unwrap()).unwrap();
            let rhs = action.act(&(g * h), x).unwrap();
            comp = comp.max(lhs.distance(&rhs));
        }
    }
    let e = 1e-6;
    let mut field = 0.0f64;
    for (m, v) in generators.iter().zip(fields) {
        let plus = action.act(&m.scale(e).exp(), x).unwrap();
        let minus = action.act(&m.scale(-e).exp(), x).unwrap();
        let fd: Vec<f64> = (0..x.dim()).map(|i| (plus[i] - minus[i]) / (2.0 * e)).collect();
        field = field.max(ManifoldPoint::new(fd).unwrap().distance(v));
    }
    (id, comp, field)
}

fn action_laws() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let (mut id, mut comp, mut field) = (0.0f64, 0.0f64, 0.0f64);
    let mut fold = |(a, b, c): (f64, f64, f64), direct: f64| {
        id = id.max(a);
        comp = comp.max(b).max(direct);
        field = field.max(c);
    };
    for (k1, k2) in CHART_PAIRS {
        let p = params(k1, k2);
        let basis = ck_generators(p);
        for mode in [ActionMode::Linear, ActionMode::FlowComposition] {
            let action = ck_group_action(p, mode);
            for _ in 0..10 {
                let near: Vec<SquareMatrix> =
                    (0..4).map(|_| compose(p, [0; 3].map(|_| rng.gen_range(-0.15..0.15)))).collect();
                let x = ManifoldPoint::from([0; 3].map(|_| rng.gen_range(-2.0..2.0)));
                let fields: Vec<ManifoldPoint> = CkGenerator::ALL.iter().map(|&g| ck_field(p, g, &x)).collect();
                fold(action_law_errors(&action, &near, basis.generators(), &fields, &x), 0.0);
            }
        }
    }
    let action = limit_cycle_group_action();
    let generators = [SquareMatrix::diag(&[1.0, 0.0]).unwrap(), SquareMatrix::diag(&[0.0, 1.0]).unwrap()];
    for _ in 0..20 {
        let near: Vec<SquareMatrix> = (0..4)
            .map(|_| {
                let g = DiagonalGroupElement::new(rng.gen_range(0.8..1.25), rng.gen_range(0.9..1.1)).unwrap();
                g.to_matrix()
            })
            .collect();
        let (r, th): (f64, f64) = (rng.gen_range(0.1..1.3), rng.gen_range(0.0..std::f64::consts::TAU));
        let x = ManifoldPoint::from([r * th.cos(), r * th.sin()]);
        let w = r * r - 1.0;
        let fields = [ManifoldPoint::from([x[1], -x[0]]), ManifoldPoint::from([w * x[0], w * x[1]])];
        let direct = limit_cycle_action(DiagonalGroupElement::from_matrix(&near[0]).unwrap(), &x).unwrap();
        let mismatch = direct.distance(&action.act(&near[0], &x).unwrap());
        fold(action_law_errors(&action, &near, &generators, &fields, &x), mismatch);
    }
    outcome(
        id == 0.0 && comp <= 1e-10 && field <= 1e-6,
        format!("identity {id:.1e}, composition {comp:.1e} (tol 1e-10), field {field:.1e} (tol 1e-6)"),
    )
}

fn coordinate_round_trip() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst = 0.0f64;
    let grid = [-0.3, -0.1, 0.0, 0.2, 0.3];
    for (k1, k2) in CHART_PAIRS {
        let p = params(k1, k2);
        let mut samples: Vec<[f64; 3]> = Vec::new();
        for a in grid {
            for b in grid {
                for c in grid {
                    samples.push([a, b, c]);
                }
            }
        }
        samples.extend((0..200).map(|_| [0; 3].map(|_| rng.gen_range(-0.3..=0.3))));
        for l in samples {
            let got = ck_extract_coords(p, &compose(p, l)).unwrap();
            worst = (0..3).fold(worst, |w, i| w.max((got[i] - l[i]).abs()));
        }
    }
    outcome(worst <= 1e-10, format!("max coordinate error {worst:.1e} (tol 1e-10)"))
}

fn limit_cycle_stratification() -> Outcome {
    let (b1, b2) = limit_cycle_reference_coefficients();
    let sys = limit_cycle_system(b1, b2);
    let x0 = ManifoldPoint::from([0.0, 1.0]);
    let dev = |x: &ManifoldPoint| (x[0] * x[0] + x[1] * x[1] - 1.0).abs();
    // Round-off off the circle grows like exp(2∫eᵗ); beyond t = 1.7 that growth
    // alone pushes a 1e-16 perturbation past 1e-12.
    let geo = solve(&sys, &x0, 0.0, 1.7, 17, &StepperConfig::rkmk4()).unwrap();
    let geo_max = geo.points.iter().map(dev).fold(0.0, f64::max);
    let rk4 = solve_direct_rk4(&sys, &x0, 0.0, 2.0, 100).unwrap();
    let escape = rk4.points.iter().zip(&rk4.times).find(|(x, _)| dev(x) > 1e-3).map(|(_, t)| *t);
    outcome(
        geo_max <= 1e-12 && escape.is_some(),
        format!(
            "rkmk h=0.1 on [0, 1.7] max |r2-1| {geo_max:.1e}; rk4 h=0.02 exceeds 1e-3 at t = {escape:?} (horizon 2)"
        ),
    )
}

fn riccati_superposition() -> Outcome {
    let check = verify_superposition(&RiccatiCoefficients::reference(), [0.0, 1.0, -1.0], 0.5, 0.0, 1.0, 1000).unwrap();
    let err = check.max_error();
    outcome(err <= 1e-5, format!("max reconstruction error {err:.1e} (tol 1e-5)"))
}

fn algorithm_consistency() -> Outcome {
    let (sys, x0) = ck_setup();
    let mut worst = 0.0f64;
    for (_, config) in geometric_methods() {
        let traj = solve(&sys, &x0, 3.0, 4.0, 10, &config).unwrap();
        worst = worst.max(traj.cumulative_deviation(sys.action()).unwrap());
    }
    outcome(worst <= 1e-9, format!("max |phi(Y_k, x0) - x_k| {worst:.1e} (tol 1e-9)"))
}

fn main() -> ExitCode {
    let checks: [Check; 11] = [
        ("kappa-trigonometry identities", kappa_trigonometry, Duration::from_secs(1)),
        ("closed-form exponential", closed_form_exponential, Duration::from_secs(1)),
        ("CK invariant preservation", invariant_preservation, Duration::from_secs(1)),
        ("group manifold preservation", group_manifold_preservation, Duration::from_secs(1)),
        ("convergence orders", convergence_orders, Duration::from_secs(5)),
        ("dexpinv truncation contract", dexpinv_contract, Duration::from_secs(1)),
        ("action laws", action_laws, Duration::from_secs(2)),
        ("canonical coordinate round trip", coordinate_round_trip, Duration::from_secs(1)),
        ("limit-cycle stratification", limit_cycle_stratification, Duration::from_secs(1)),
        ("Riccati superposition", riccati_superposition, Duration::from_secs(1)),
        ("incremental vs cumulative update", algorithm_consistency, Duration::from_secs(1)),
    ];
    let mut failures = 0;
    for (i, (name, check, budget)) in checks.into_iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let pass = result.pass && elapsed <= budget;
        failures += usize::from(!pass);
        println!(
            "[{}] {:02} {name}: {} [{:.3}s, budget {}s]",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            result.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of 11 passed", 11 - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
