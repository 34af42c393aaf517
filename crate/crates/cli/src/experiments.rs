use std::fmt::Write as _;
use std::path::PathBuf;
use std::thread;

use liesys_core::ck::{ck_lie_system, ck_reference_coefficients, ActionMode, CkParams};
use liesys_core::limit_cycle::{limit_cycle_reference_coefficients, limit_cycle_system};
use liesys_core::riccati::{verify_superposition, RiccatiCoefficients};
use liesys_core::{
    estimate_order, global_error, rk4_direct_step, solve, solve_direct_rk4, LieSystem, ManifoldPoint, Stepper,
    StepperConfig, Trajectory,
};

use crate::error::HarnessError;
use crate::output::{format_number, CsvTable};
use crate::request::{Experiment, MethodName, Resolution, RunRequest};

pub const RICCATI_TOLERANCE: f64 = 1e-5;
const ESCAPE_THRESHOLD: f64 = 1e-3;
const CONVERGENCE_LEVELS: usize = 4;

#[derive(Clone, Debug)]
pub enum Report {
    Ck(CkReport),
    LimitCycle(LimitCycleReport),
    Convergence(ConvergenceReport),
    Riccati(RiccatiReport),
}

impl Report {
    /// False when the run completed but its verdict is negative: a limit-cycle
    /// pair left the action domain or the Riccati check failed.
    pub fn success(&self) -> bool {
        match self {
            Report::LimitCycle(r) => !r.has_domain_error(),
            Report::Riccati(r) => r.passed(),
            _ => true,
        }
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        match self {
            Report::Ck(r) => {
                let _ = writeln!(s, "ck: {} steps with {}", r.steps, r.method);
                let _ = writeln!(s, "  invariant drift geometric {:.3e}, rk4 {:.3e}", r.geometric_drift, r.rk4_drift);
            }
            Report::LimitCycle(r) => {
                for o in &r.outcomes {
                    let _ = write!(
                        s,
                        "limit-cycle {} h={}: {} rows, max |r2-1| {:.3e}",
                        o.method, o.h, o.rows, o.max_circle_deviation
                    );
                    if let Some(t) = o.first_escape {
                        let _ = write!(s, ", leaves 1e-3 band at t={t}");
                    }
                    if let Some(why) = &o.stopped {
                        let _ = write!(s, ", stopped: {why}");
                    }
                    s.push('\n');
                }
            }
            Report::Convergence(r) => {
                for (m, slope) in &r.slopes {
                    let _ = writeln!(s, "convergence {m}: slope {slope:.3}");
                }
            }
            Report::Riccati(r) => {
                let verdict = if r.passed() { "PASS" } else { "FAIL" };
                let _ =
                    writeln!(s, "riccati-check: max error {:.3e} ({verdict} at {RICCATI_TOLERANCE:e})", r.max_error);
            }
        }
        s
    }
}

pub fn run(req: &RunRequest) -> Result<Report, HarnessError> {
    Ok(match req.experiment {
        Experiment::Ck => Report::Ck(run_ck(req)?),
        Experiment::LimitCycle => Report::LimitCycle(run_limit_cycle(req)?),
        Experiment::Convergence => Report::Convergence(run_convergence(req)?),
        Experiment::RiccatiCheck => Report::Riccati(run_riccati_check(req)?),
    })
}

fn point(coords: Vec<f64>) -> Result<ManifoldPoint, HarnessError> {
    ManifoldPoint::new(coords).map_err(HarnessError::numerical("initial point"))
}

fn ck_system(req: &RunRequest) -> Result<LieSystem, HarnessError> {
    let params = CkParams::new(req.kappa1, req.kappa2).map_err(HarnessError::numerical("curvature parameters"))?;
    ck_lie_system(params, ck_reference_coefficients(), ActionMode::Linear)
        .map_err(HarnessError::numerical("building the Cayley-Klein system"))
}

fn geometric(method: MethodName) -> StepperConfig {
    method.config().expect("geometric method")
}

fn reference_stride(reference: usize, n: usize) -> Result<usize, HarnessError> {
    if !reference.is_multiple_of(n) {
        return Err(HarnessError::Invalid(format!("reference steps {reference} must be a multiple of {n}")));
    }
    Ok(reference / n)
}

#[derive(Clone, Debug)]
pub struct CkReport {
    pub files: Vec<PathBuf>,
    pub method: MethodName,
    pub steps: usize,
    /// `max_k |I(x_k) − I(x_0)|` of the geometric column.
    pub geometric_drift: f64,
    pub rk4_drift: f64,
}

/// Trajectory of the chosen method plus the invariant along the tiny-step
/// reference (`exact`), a geometric method and direct RK4. With `--method rk4`
/// the geometric column uses RKMK.
pub fn run_ck(req: &RunRequest) -> Result<CkReport, HarnessError> {
    req.validate()?;
    let sys = ck_system(req)?;
    let x0 = point(req.initial_point())?;
    let n = req.steps()?;
    let n_ref = req.reference_steps()?;
    let stride = reference_stride(n_ref, n)?;
    let method = req.method.unwrap_or(MethodName::Rkmk);
    let geo_method = if method == MethodName::Rk4 { MethodName::Rkmk } else { method };

    let context = |what: &str| HarnessError::numerical(format!("ck {what} run"));
    let reference = solve(&sys, &x0, req.t0, req.t1, n_ref, &StepperConfig::magnus4()).map_err(context("reference"))?;
    let geo = solve(&sys, &x0, req.t0, req.t1, n, &geometric(geo_method)).map_err(context(geo_method.as_str()))?;
    let rk4 = solve_direct_rk4(&sys, &x0, req.t0, req.t1, n).map_err(context("rk4"))?;
    let shown = if method == MethodName::Rk4 { &rk4 } else { &geo };

    let mut trajectory = CsvTable::new(&["t", "x0", "x1", "x2"]);
    for (t, x) in shown.times.iter().zip(&shown.points) {
        trajectory.push_numbers(&[*t, x[0], x[1], x[2]]);
    }
    let invariant = &sys.invariants()[0];
    let mut track = CsvTable::new(&["t", "exact", "geometric", "rk4"]);
    for k in 0..=n {
        track.push_numbers(&[
            geo.times[k],
            invariant.eval(&reference.points[k * stride]),
            invariant.eval(&geo.points[k]),
            invariant.eval(&rk4.points[k]),
        ]);
    }
    let files = vec![req.out.join("ck_trajectory.csv"), req.out.join("ck_invariant.csv")];
    trajectory.write(&files[0])?;
    track.write(&files[1])?;
    Ok(CkReport {
        files,
        method,
        steps: n,
        geometric_drift: geo.invariant_drift(invariant),
        rk4_drift: rk4.invariant_drift(invariant),
    })
}

#[derive(Clone, Debug)]
pub struct PairOutcome {
    pub method: MethodName,
    pub h: f64,
    pub path: PathBuf,
    pub rows: usize,
    pub max_circle_deviation: f64,
    /// First grid time with `|r² − 1| > 10⁻³`.
    pub first_escape: Option<f64>,
    /// Why the run ended early, with the offending step.
    pub stopped: Option<String>,
}

#[derive(Clone, Debug)]
pub struct LimitCycleReport {
    pub outcomes: Vec<PairOutcome>,
}

impl LimitCycleReport {
    pub fn has_domain_error(&self) -> bool {
        self.outcomes.iter().any(|o| o.stopped.is_some())
    }
}

fn limit_cycle_pairs(req: &RunRequest) -> Result<Vec<(MethodName, Resolution)>, HarnessError> {
    let default_h = Resolution::StepSize(0.1);
    Ok(match (req.method, req.resolution) {
        (Some(m), r) => vec![(m, r.unwrap_or(default_h))],
        (None, Some(r)) => vec![(MethodName::Rkmk, r), (MethodName::Rk4, r)],
        (None, None) => vec![
            (MethodName::Rkmk, default_h),
            (MethodName::Rk4, Resolution::StepSize(0.02)),
            (MethodName::Rk4, Resolution::StepSize(0.01)),
        ],
    })
}

/// One file `limit_cycle_<method>_h<h>.csv` per method/step-size pair. A pair
/// that leaves the action domain keeps the rows computed so far.
pub fn run_limit_cycle(req: &RunRequest) -> Result<LimitCycleReport, HarnessError> {
    req.validate()?;
    let (b1, b2) = limit_cycle_reference_coefficients();
    let sys = limit_cycle_system(b1, b2);
    let x0 = point(req.initial_point())?;
    let mut outcomes = Vec::new();
    for (method, resolution) in limit_cycle_pairs(req)? {
        let n = if req.span() > 0.0 { req.steps_for(resolution)? } else { 0 };
        let h = match resolution {
            Resolution::StepSize(h) => h,
            Resolution::Steps(_) if n > 0 => req.span() / n as f64,
            Resolution::Steps(_) => 0.0,
        };
        let path = req.out.join(format!("limit_cycle_{method}_h{h}.csv"));
        let mut samples = vec![(req.t0, x0.clone())];
        let mut stopped = None;
        if n > 0 {
            match method.config() {
                Some(config) => {
                    let stepper = Stepper::new(&sys, &config, x0.clone(), req.t0, req.t1, n)
                        .map_err(HarnessError::numerical("limit-cycle setup"))?;
                    for step in stepper {
                        match step {
                            Ok(s) => samples.push((s.t, s.point)),
                            Err(e) => stopped = Some(e.to_string()),
                        }
                    }
                }
                None => {
                    let h = req.span() / n as f64;
                    let mut x = x0.clone();
                    for k in 0..n {
                        let t = req.t0 + k as f64 * h;
                        match rk4_direct_step(|s, p| sys.rhs(s, p), t, h, &x) {
                            Ok(next) => {
                                x = next;
                                samples.push((req.t0 + (k + 1) as f64 * h, x.clone()));
                            }
                            Err(e) => {
                                stopped = Some(format!("step {}: {e}", k + 1));
                                break;
                            }
                        }
                    }
                }
            }
        }
        let mut table = CsvTable::new(&["t", "x", "y", "r2"]);
        let mut radii = Vec::with_capacity(samples.len());
        for (t, x) in &samples {
            let r2 = x[0] * x[0] + x[1] * x[1];
            table.push_numbers(&[*t, x[0], x[1], r2]);
            radii.push((*t, r2));
        }
        table.write(&path)?;
        let (max_circle_deviation, first_escape) = circle_stats(&radii);
        outcomes.push(PairOutcome { method, h, path, rows: table.len(), max_circle_deviation, first_escape, stopped });
    }
    Ok(LimitCycleReport { outcomes })
}

fn circle_stats(rows: &[(f64, f64)]) -> (f64, Option<f64>) {
    let max = rows.iter().map(|(_, r2)| (r2 - 1.0).abs()).fold(0.0, f64::max);
    let escape = rows.iter().find(|(_, r2)| (r2 - 1.0).abs() > ESCAPE_THRESHOLD).map(|(t, _)| *t);
    (max, escape)
}

#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub path: PathBuf,
    /// `(method, h, E_N)` in output order.
    pub errors: Vec<(MethodName, f64, f64)>,
    pub slopes: Vec<(MethodName, f64)>,
}

/// Global errors of the geometric methods on the Cayley–Klein problem for
/// `h, h/2, h/4, h/8` against a Magnus-4 reference, with a fitted slope per
/// method.
pub fn run_convergence(req: &RunRequest) -> Result<ConvergenceReport, HarnessError> {
    req.validate()?;
    let sys = ck_system(req)?;
    let x0 = point(req.initial_point())?;
    let n0 = req.steps()?;
    let levels: Vec<usize> = (0..CONVERGENCE_LEVELS).map(|i| n0 << i).collect();
    let n_ref = req.reference_steps()?;
    reference_stride(n_ref, *levels.last().expect("levels"))?;
    let methods: Vec<MethodName> = match req.method {
        Some(m) => vec![m],
        None => MethodName::GEOMETRIC.to_vec(),
    };

    let reference = solve(&sys, &x0, req.t0, req.t1, n_ref, &StepperConfig::magnus4())
        .map_err(HarnessError::numerical("convergence reference run"))?;
    let jobs: Vec<(MethodName, usize)> = methods.iter().flat_map(|&m| levels.iter().map(move |&n| (m, n))).collect();
    let results: Vec<Result<f64, HarnessError>> = thread::scope(|scope| {
        let handles: Vec<_> = jobs
            .iter()
            .map(|&(m, n)| {
                let (sys, x0, reference) = (&sys, &x0, &reference);
                scope.spawn(move || -> Result<f64, HarnessError> {
                    let context = || HarnessError::numerical(format!("convergence {m} with {n} steps"));
                    let traj: Trajectory = solve(sys, x0, req.t0, req.t1, n, &geometric(m)).map_err(context())?;
                    global_error(&traj, reference).map_err(context())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("convergence worker panicked")).collect()
    });

    let mut table = CsvTable::new(&["h", "error", "method"]);
    let mut errors = Vec::new();
    for (&(m, n), e) in jobs.iter().zip(results) {
        let e = e?;
        let h = req.span() / n as f64;
        table.push(vec![format_number(h), format_number(e), m.to_string()]);
        errors.push((m, h, e));
    }
    let mut slopes = Vec::new();
    for &m in &methods {
        let (hs, es): (Vec<f64>, Vec<f64>) = errors.iter().filter(|r| r.0 == m).map(|r| (r.1, r.2)).unzip();
        let slope = estimate_order(&hs, &es).map_err(HarnessError::numerical(format!("fitting the {m} slope")))?;
        table.push(vec!["slope".into(), format_number(slope), m.to_string()]);
        slopes.push((m, slope));
    }
    let path = req.out.join("convergence.csv");
    table.write(&path)?;
    Ok(ConvergenceReport { path, errors, slopes })
}

#[derive(Clone, Debug)]
pub struct RiccatiReport {
    pub path: PathBuf,
    pub max_error: f64,
    pub rows: usize,
}

impl RiccatiReport {
    pub fn passed(&self) -> bool {
        self.max_error <= RICCATI_TOLERANCE
    }
}

/// Integrates the particular solutions from the first three initial values and
/// a fourth from the last, and compares the fourth with its superposition.
pub fn run_riccati_check(req: &RunRequest) -> Result<RiccatiReport, HarnessError> {
    req.validate()?;
    let x = req.initial_point();
    let n = req.steps()?;
    let h = req.span() / n as f64;
    let check = verify_superposition(&RiccatiCoefficients::reference(), [x[0], x[1], x[2]], x[3], req.t0, req.t1, n)
        .map_err(|e| {
            let context = match e.step() {
                Some(k) => format!("riccati superposition at t = {}", req.t0 + k as f64 * h),
                None => "riccati superposition".to_owned(),
            };
            HarnessError::Numerical { context, source: e }
        })?;
    let mut table = CsvTable::new(&["t", "direct", "superposed", "abs_err"]);
    for ((t, d), s) in check.times.iter().zip(&check.direct).zip(&check.superposed) {
        table.push_numbers(&[*t, *d, *s, (d - s).abs()]);
    }
    let path = req.out.join("riccati.csv");
    table.write(&path)?;
    Ok(RiccatiReport { path, max_error: check.max_error(), rows: table.len() })
}
