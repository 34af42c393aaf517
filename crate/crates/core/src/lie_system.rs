//! Lie systems on a manifold and their solution through the group.
//!
//! A [`LieSystem`] bundles the algebra `M_1..M_r`, the coefficients `b_α(t)`,
//! the fundamental vector fields `X_α` on the manifold and a [`GroupAction`]
//! whose infinitesimal generators are those fields. [`solve`] integrates
//! `dY/dt = A(t) Y` one increment at a time and moves the manifold point with
//! `x_{k+1} = φ(exp(Ω_k), x_k)`.

use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Index;

use crate::algebra::{AlgebraBasis, CoefficientSet};
use crate::error::{Error, Result};
use crate::integrators::{group_increment, rk4_direct_step, StepperConfig};
use crate::matrix::SquareMatrix;

/// Coordinates of a point on the manifold `N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ManifoldPoint(Vec<f64>);

impl ManifoldPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if !coords.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("manifold point"));
        }
        Ok(Self(coords))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `self + s·dir`, without the finiteness check.
    pub fn offset(&self, s: f64, dir: &ManifoldPoint) -> ManifoldPoint {
        ManifoldPoint(self.0.iter().zip(&dir.0).map(|(a, b)| a + s * b).collect())
    }

    pub fn distance(&self, other: &ManifoldPoint) -> f64 {
        libm::sqrt(self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum())
    }
}

impl<const N: usize> From<[f64; N]> for ManifoldPoint {
    fn from(coords: [f64; N]) -> Self {
        Self(coords.to_vec())
    }
}

impl Index<usize> for ManifoldPoint {
    type Output = f64;

    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

pub type VectorField = Arc<dyn Fn(&ManifoldPoint) -> ManifoldPoint + Send + Sync>;
pub type Flow = Arc<dyn Fn(f64, &ManifoldPoint) -> ManifoldPoint + Send + Sync>;
pub type CoordinateExtractor = Arc<dyn Fn(&SquareMatrix) -> Result<Vec<f64>> + Send + Sync>;
pub type DomainGuard = Arc<dyn Fn(&SquareMatrix, &ManifoldPoint) -> bool + Send + Sync>;

/// Action built from the flows of the fundamental fields: the group element is
/// split into canonical coordinates of the second kind
/// `g = exp(λ_1 M_1)···exp(λ_r M_r)` and the flows are applied innermost
/// last-first, `Φ_1(λ_1, Φ_2(λ_2, … Φ_r(λ_r, x)))`.
#[derive(Clone)]
pub struct FlowComposition {
    flows: Vec<Flow>,
    extractor: CoordinateExtractor,
    guard: Option<DomainGuard>,
}

impl FlowComposition {
    pub fn new(flows: Vec<Flow>, extractor: CoordinateExtractor) -> Self {
        Self { flows, extractor, guard: None }
    }

    /// Restricts the action to pairs `(g, x)` accepted by `guard`.
    pub fn with_guard(mut self, guard: DomainGuard) -> Self {
        self.guard = Some(guard);
        self
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn coordinates(&self, g: &SquareMatrix) -> Result<Vec<f64>> {
        let lambdas = (self.extractor)(g)?;
        if lambdas.len() != self.flows.len() {
            return Err(Error::ArityMismatch { expected: self.flows.len(), found: lambdas.len() });
        }
        Ok(lambdas)
    }
}

/// A (possibly local) Lie group action `φ: G × N → N`.
#[derive(Clone)]
pub enum GroupAction {
    /// `φ(g, x) = g·x`.
    Linear,
    FlowComposition(FlowComposition),
}

impl GroupAction {
    pub fn in_domain(&self, g: &SquareMatrix, x: &ManifoldPoint) -> bool {
        match self {
            GroupAction::Linear => g.dim() == x.dim(),
            GroupAction::FlowComposition(fc) => fc.guard.as_ref().is_none_or(|guard| guard(g, x)),
        }
    }

    pub fn act(&self, g: &SquareMatrix, x: &ManifoldPoint) -> Result<ManifoldPoint> {
        let out = match self {
            GroupAction::Linear => ManifoldPoint(g.mul_vec(x.coords())?),
            GroupAction::FlowComposition(fc) => {
                if !self.in_domain(g, x) {
                    return Err(Error::OutsideActionDomain);
                }
                let lambdas = fc.coordinates(g)?;
                fc.flows.iter().zip(&lambdas).rev().fold(x.clone(), |p, (flow, &lambda)| flow(lambda, &p))
            }
        };
        if !out.is_finite() {
            return Err(Error::NonFinite("group action image"));
        }
        Ok(out)
    }
}

impl fmt::Debug for GroupAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupAction::Linear => f.write_str("Linear"),
            GroupAction::FlowComposition(fc) => f
                .debug_struct("FlowComposition")
                .field("flows", &fc.flows.len())
                .field("guarded", &fc.guard.is_some())
                .finish(),
        }
    }
}

/// A named first integral of a Lie system.
#[derive(Clone)]
pub struct Invariant {
    pub name: String,
    f: Arc<dyn Fn(&ManifoldPoint) -> f64 + Send + Sync>,
}

impl Invariant {
    pub fn new(name: impl Into<String>, f: impl Fn(&ManifoldPoint) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f) }
    }

    pub fn eval(&self, x: &ManifoldPoint) -> f64 {
        (self.f)(x)
    }
}

impl fmt::Debug for Invariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Invariant").field("name", &self.name).finish()
    }
}

/// `dx/dt = Σ_α b_α(t) X_α(x)` together with everything needed to solve it on
/// the group.
#[derive(Clone, Debug)]
pub struct LieSystem {
    basis: AlgebraBasis,
    coeffs: CoefficientSet,
    fields: Vec<VectorFieldEntry>,
    action: GroupAction,
    manifold_dim: usize,
    invariants: Vec<Invariant>,
}

#[derive(Clone)]
struct VectorFieldEntry(VectorField);

impl fmt::Debug for VectorFieldEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("VectorField")
    }
}

impl LieSystem {
    /// `fields[α]` must be the fundamental vector field of `basis.generator(α)`
    /// under `action`.
    pub fn new(
        basis: AlgebraBasis,
        coeffs: CoefficientSet,
        fields: Vec<VectorField>,
        action: GroupAction,
        manifold_dim: usize,
    ) -> Result<Self> {
        let r = basis.len();
        if coeffs.len() != r {
            return Err(Error::ArityMismatch { expected: r, found: coeffs.len() });
        }
        if fields.len() != r {
            return Err(Error::ArityMismatch { expected: r, found: fields.len() });
        }
        if let GroupAction::FlowComposition(fc) = &action {
            if fc.flows.len() != r {
                return Err(Error::ArityMismatch { expected: r, found: fc.flows.len() });
            }
        }
        if matches!(action, GroupAction::Linear) && basis.dim() != manifold_dim {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: manifold_dim });
        }
        Ok(Self {
            basis,
            coeffs,
            fields: fields.into_iter().map(VectorFieldEntry).collect(),
            action,
            manifold_dim,
            invariants: Vec::new(),
        })
    }

    pub fn with_invariant(mut self, invariant: Invariant) -> Self {
        self.invariants.push(invariant);
        self
    }

    pub fn basis(&self) -> &AlgebraBasis {
        &self.basis
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coeffs
    }

    pub fn action(&self) -> &GroupAction {
        &self.action
    }

    pub fn manifold_dim(&self) -> usize {
        self.manifold_dim
    }

    pub fn invariants(&self) -> &[Invariant] {
        &self.invariants
    }

    /// Same system with the action replaced (e.g. linear vs flow composition).
    pub fn with_action(mut self, action: GroupAction) -> Result<Self> {
        if let GroupAction::FlowComposition(fc) = &action {
            if fc.flows.len() != self.basis.len() {
                return Err(Error::ArityMismatch { expected: self.basis.len(), found: fc.flows.len() });
            }
        }
        self.action = action;
        Ok(self)
    }

    pub fn field(&self, alpha: usize, x: &ManifoldPoint) -> ManifoldPoint {
        (self.fields[alpha].0)(x)
    }

    /// `Σ_α b_α(t) X_α(x)`.
    pub fn rhs(&self, t: f64, x: &ManifoldPoint) -> Result<ManifoldPoint> {
        if x.dim() != self.manifold_dim {
            return Err(Error::DimensionMismatch { expected: self.manifold_dim, found: x.dim() });
        }
        let b = self.coeffs.values(t)?;
        let mut out = ManifoldPoint(alloc::vec![0.0; self.manifold_dim]);
        for (alpha, w) in b.iter().enumerate() {
            if *w != 0.0 {
                out = out.offset(*w, &self.field(alpha, x));
            }
        }
        if !out.is_finite() {
            return Err(Error::NonFinite("vector field"));
        }
        Ok(out)
    }
}

/// One state produced by a [`Stepper`].
#[derive(Clone, Debug)]
pub struct Step {
    pub index: usize,
    pub t: f64,
    pub point: ManifoldPoint,
    pub group: SquareMatrix,
}

/// Iterator over the steps `1..=N` of the group-based method. Stops after the
/// first error so that a partial trajectory can be kept.
pub struct Stepper<'a> {
    sys: &'a LieSystem,
    config: &'a StepperConfig,
    t0: f64,
    h: f64,
    steps: usize,
    k: usize,
    x: ManifoldPoint,
    y: SquareMatrix,
    failed: bool,
}

impl<'a> Stepper<'a> {
    pub fn new(
        sys: &'a LieSystem,
        config: &'a StepperConfig,
        x0: ManifoldPoint,
        t0: f64,
        t1: f64,
        steps: usize,
    ) -> Result<Self> {
        let h = step_size(t0, t1, steps)?;
        if x0.dim() != sys.manifold_dim {
            return Err(Error::DimensionMismatch { expected: sys.manifold_dim, found: x0.dim() });
        }
        config.validate()?;
        Ok(Self { sys, config, t0, h, steps, k: 0, x: x0, y: SquareMatrix::identity(sys.basis.dim()), failed: false })
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    fn advance(&mut self) -> Result<Step> {
        let tk = self.t0 + self.k as f64 * self.h;
        let omega = group_increment(&self.sys.basis, &self.sys.coeffs, self.config, tk, self.h)?;
        let increment = omega.exp();
        let y = &increment * &self.y;
        if !y.is_finite() {
            return Err(Error::NonFinite("group element"));
        }
        let x = self.sys.action.act(&increment, &self.x)?;
        self.k += 1;
        self.x = x.clone();
        self.y = y.clone();
        Ok(Step { index: self.k, t: self.t0 + self.k as f64 * self.h, point: x, group: y })
    }
}

impl Iterator for Stepper<'_> {
    type Item = Result<Step>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed || self.k >= self.steps {
            return None;
        }
        let step = self.k + 1;
        let out = self.advance().map_err(|e| e.at_step(step));
        self.failed = out.is_err();
        Some(out)
    }
}

fn step_size(t0: f64, t1: f64, steps: usize) -> Result<f64> {
    if !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidInterval("interval bounds must be finite"));
    }
    if !(t1 > t0) {
        return Err(Error::InvalidInterval("t1 must exceed t0"));
    }
    if steps == 0 {
        return Err(Error::InvalidInterval("at least one step required"));
    }
    Ok((t1 - t0) / steps as f64)
}

/// Time-stamped manifold states `x_0..x_N`, with the group elements `Y_0..Y_N`
/// when produced by a group method (empty for direct integration).
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub points: Vec<ManifoldPoint>,
    pub group: Vec<SquareMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `max_k |I(x_k) − I(x_0)|`.
    pub fn invariant_drift(&self, invariant: &Invariant) -> f64 {
        let Some(first) = self.points.first() else { return 0.0 };
        let i0 = invariant.eval(first);
        self.points.iter().map(|x| (invariant.eval(x) - i0).abs()).fold(0.0, f64::max)
    }

    /// `max_k ‖φ(Y_k, x_0) − x_k‖`: how far the incremental update strays from
    /// transporting the initial point with the accumulated group element.
    pub fn cumulative_deviation(&self, action: &GroupAction) -> Result<f64> {
        let x0 = self.points.first().ok_or(Error::Degenerate("empty trajectory"))?;
        if self.group.len() != self.points.len() {
            return Err(Error::Degenerate("trajectory carries no group elements"));
        }
        let mut worst: f64 = 0.0;
        for (k, (y, x)) in self.group.iter().zip(&self.points).enumerate() {
            let cumulative = action.act(y, x0).map_err(|e| e.at_step(k))?;
            worst = worst.max(cumulative.distance(x));
        }
        Ok(worst)
    }
}

/// Solves the Lie system on `[t0, t1]` with `steps` equal steps, returning
/// `x_0..x_N` and `Y_0 = I..Y_N`.
pub fn solve(
    sys: &LieSystem,
    x0: &ManifoldPoint,
    t0: f64,
    t1: f64,
    steps: usize,
    config: &StepperConfig,
) -> Result<Trajectory> {
    let stepper = Stepper::new(sys, config, x0.clone(), t0, t1, steps)?;
    let mut traj = Trajectory {
        times: alloc::vec![t0],
        points: alloc::vec![x0.clone()],
        group: alloc::vec![SquareMatrix::identity(sys.basis.dim())],
    };
    for step in stepper {
        let step = step?;
        traj.times.push(step.t);
        traj.points.push(step.point);
        traj.group.push(step.group);
    }
    Ok(traj)
}

/// Classical RK4 applied directly to `sys.rhs` in manifold coordinates.
pub fn solve_direct_rk4(sys: &LieSystem, x0: &ManifoldPoint, t0: f64, t1: f64, steps: usize) -> Result<Trajectory> {
    let h = step_size(t0, t1, steps)?;
    if x0.dim() != sys.manifold_dim {
        return Err(Error::DimensionMismatch { expected: sys.manifold_dim, found: x0.dim() });
    }
    let mut traj = Trajectory { times: alloc::vec![t0], points: alloc::vec![x0.clone()], group: Vec::new() };
    let mut x = x0.clone();
    for k in 0..steps {
        let t = t0 + k as f64 * h;
        x = rk4_direct_step(|s, p| sys.rhs(s, p), t, h, &x).map_err(|e| e.at_step(k + 1))?;
        traj.times.push(t0 + (k + 1) as f64 * h);
        traj.points.push(x.clone());
    }
    Ok(traj)
}

/// `E_N = max_k ‖x(t_k) − x_k‖₂`, with `reference` subsampled onto the grid of
/// `traj`. The reference grid must refine the trajectory grid by an integer
/// factor.
pub fn global_error(traj: &Trajectory, reference: &Trajectory) -> Result<f64> {
    if traj.is_empty() || reference.is_empty() {
        return Err(Error::Degenerate("empty trajectory"));
    }
    let (n, m) = (traj.len() - 1, reference.len() - 1);
    let stride = if n == 0 {
        0
    } else {
        if m % n != 0 {
            return Err(Error::Degenerate("reference grid does not refine the trajectory grid"));
        }
        m / n
    };
    let scale = traj.times.iter().fold(1.0f64, |acc, t| acc.max(t.abs()));
    let mut worst: f64 = 0.0;
    for (k, (t, x)) in traj.times.iter().zip(&traj.points).enumerate() {
        let r = k * stride;
        if (reference.times[r] - t).abs() > 1e-9 * scale {
            return Err(Error::Degenerate("reference grid does not match trajectory times"));
        }
        if reference.points[r].dim() != x.dim() {
            return Err(Error::DimensionMismatch { expected: x.dim(), found: reference.points[r].dim() });
        }
        worst = worst.max(reference.points[r].distance(x));
    }
    Ok(worst)
}

/// Least-squares slope of `log(error)` against `log(h)`.
pub fn estimate_order(hs: &[f64], errors: &[f64]) -> Result<f64> {
    if hs.len() != errors.len() {
        return Err(Error::ArityMismatch { expected: hs.len(), found: errors.len() });
    }
    if hs.len() < 2 {
        return Err(Error::Degenerate("at least two step sizes required"));
    }
    if hs.windows(2).any(|w| !(w[1] < w[0])) || hs.iter().any(|&h| !(h > 0.0)) {
        return Err(Error::Degenerate("step sizes must be positive and strictly decreasing"));
    }
    if errors.iter().any(|&e| !(e > 0.0) || !e.is_finite()) {
        return Err(Error::Degenerate("errors must be positive and finite"));
    }
    let xs: Vec<f64> = hs.iter().map(|&h| libm::log(h)).collect();
    let ys: Vec<f64> = errors.iter().map(|&e| libm::log(e)).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Coefficient;
    use alloc::vec;

    fn rotation_system(coeff: Coefficient) -> LieSystem {
        let m = SquareMatrix::from_rows([[0.0, 1.0], [-1.0, 0.0]]).unwrap();
        let basis = AlgebraBasis::from_generators(vec![m]).unwrap();
        let field: VectorField = Arc::new(|x: &ManifoldPoint| ManifoldPoint::from([x[1], -x[0]]));
        LieSystem::new(basis, CoefficientSet::new(vec![coeff]), vec![field], GroupAction::Linear, 2)
            .unwrap()
            .with_invariant(Invariant::new("r2", |x| x[0] * x[0] + x[1] * x[1]))
    }

    #[test]
    fn zero_coefficients_leave_point_fixed() {
        let sys = rotation_system(Coefficient::constant(0.0));
        let x0 = ManifoldPoint::from([0.3, -0.7]);
        let traj = solve(&sys, &x0, 0.0, 1.0, 10, &StepperConfig::rkmk4()).unwrap();
        assert_eq!(traj.len(), 11);
        assert!(traj.points.iter().all(|p| *p == x0));
        let direct = solve_direct_rk4(&sys, &x0, 0.0, 1.0, 10).unwrap();
        assert!(direct.points.iter().all(|p| *p == x0));
    }

    #[test]
    fn produces_exactly_n_plus_one_states() {
        let sys = rotation_system(Coefficient::constant(1.0));
        let x0 = ManifoldPoint::from([1.0, 0.0]);
        let traj = solve(&sys, &x0, 0.0, 2.0, 7, &StepperConfig::magnus2()).unwrap();
        assert_eq!(traj.times.len(), 8);
        assert_eq!(traj.group.len(), 8);
        assert_eq!(traj.times[0], 0.0);
        assert!((traj.times[7] - 2.0).abs() < 1e-15);
        // Constant A: exp(hA) per step is exact.
        let exact = ManifoldPoint::from([libm::cos(2.0), -libm::sin(2.0)]);
        assert!(traj.points[7].distance(&exact) < 1e-13);
        assert!(traj.invariant_drift(&sys.invariants()[0]) < 1e-14);
        assert!(traj.cumulative_deviation(sys.action()).unwrap() < 1e-14);
    }

    #[test]
    fn rejects_bad_setup() {
        let sys = rotation_system(Coefficient::constant(1.0));
        let x0 = ManifoldPoint::from([1.0, 0.0]);
        let cfg = StepperConfig::magnus2();
        assert!(matches!(solve(&sys, &x0, 1.0, 1.0, 4, &cfg), Err(Error::InvalidInterval(_))));
        assert!(matches!(solve(&sys, &x0, 0.0, 1.0, 0, &cfg), Err(Error::InvalidInterval(_))));
        let bad = ManifoldPoint::from([1.0, 0.0, 0.0]);
        assert!(matches!(solve(&sys, &bad, 0.0, 1.0, 1, &cfg), Err(Error::DimensionMismatch { .. })));
        assert!(ManifoldPoint::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn stepper_reports_failing_step() {
        // Coefficient blows up at t = 0.5.
        let sys = rotation_system(Coefficient::new(|t| if t < 0.5 { 1.0 } else { f64::NAN }));
        let x0 = ManifoldPoint::from([1.0, 0.0]);
        let cfg = StepperConfig::magnus2();
        let steps: Vec<_> = Stepper::new(&sys, &cfg, x0.clone(), 0.0, 1.0, 10).unwrap().collect();
        // midpoints 0.05, 0.15, .., 0.45 succeed; step 6 evaluates at 0.55
        assert_eq!(steps.len(), 6);
        assert!(steps[..5].iter().all(|s| s.is_ok()));
        let err = steps[5].as_ref().unwrap_err();
        assert_eq!(err.step(), Some(6));
        assert_eq!(err.root(), &Error::NonFinite("coefficient value"));
        assert_eq!(solve(&sys, &x0, 0.0, 1.0, 10, &cfg).unwrap_err().step(), Some(6));
    }

    #[test]
    fn global_error_examples() {
        let traj = Trajectory {
            times: vec![0.0, 0.5, 1.0],
            points: vec![ManifoldPoint::from([0.0]), ManifoldPoint::from([1.0]), ManifoldPoint::from([2.0])],
            group: vec![],
        };
        assert_eq!(global_error(&traj, &traj).unwrap(), 0.0);

        let mut reference = Trajectory::default();
        for k in 0..=4 {
            reference.times.push(k as f64 * 0.25);
            let v = if k == 2 { 1.3 } else { k as f64 * 0.5 };
            reference.points.push(ManifoldPoint::from([v]));
        }
        assert!((global_error(&traj, &reference).unwrap() - 0.3).abs() < 1e-15);

        reference.times.pop();
        reference.points.pop();
        assert!(global_error(&traj, &reference).is_err());
    }

    #[test]
    fn estimate_order_examples() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let e2: Vec<f64> = hs.iter().map(|h| 3.0 * h * h).collect();
        let e4: Vec<f64> = hs.iter().map(|h| 0.7 * h * h * h * h).collect();
        assert!((estimate_order(&hs, &e2).unwrap() - 2.0).abs() < 1e-12);
        assert!((estimate_order(&hs, &e4).unwrap() - 4.0).abs() < 1e-12);
        assert!(estimate_order(&[0.1], &[1.0]).is_err());
        assert!(estimate_order(&[0.1, 0.2], &[1.0, 2.0]).is_err());
        assert!(estimate_order(&[0.2, 0.1], &[1.0, 0.0]).is_err());
    }
}
