//! One-step Lie group integrators for `dY/dt = A(t) Y`.
//!
//! Each scheme produces an algebra increment `Ω_k` in first-order canonical
//! coordinates centred at `Y_k`, and the group is advanced with
//! `Y_{k+1} = exp(Ω_k) Y_k`. Re-centring every step keeps `Ω_k = O(h)`, well
//! inside the region where the exponential is a diffeomorphism.

use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{dexpinv, AlgebraBasis, CoefficientSet, MAX_BERNOULLI};
use crate::error::{Error, Result};
use crate::lie_system::ManifoldPoint;
use crate::matrix::SquareMatrix;

/// Convergence bound of the Magnus series, `∫_0^{2π} dξ / (4 + ξ(1 − cot(ξ/2)))`.
pub const MAGNUS_RADIUS: f64 = 1.086868702;

const SIMPSON_PANELS: usize = 512;

/// Explicit Runge–Kutta coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ButcherTable {
    a: Vec<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
    order: usize,
}

impl ButcherTable {
    /// `a` is given row by row and must be strictly lower triangular.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>, c: Vec<f64>, order: usize) -> Result<Self> {
        let s = b.len();
        if s == 0 {
            return Err(Error::InvalidButcherTable("no stages"));
        }
        if c.len() != s || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::InvalidButcherTable("inconsistent stage count"));
        }
        if order == 0 {
            return Err(Error::InvalidButcherTable("order must be positive"));
        }
        if a.iter().flatten().chain(&b).chain(&c).any(|v| !v.is_finite()) {
            return Err(Error::InvalidButcherTable("non-finite coefficient"));
        }
        for (l, row) in a.iter().enumerate() {
            if row[l..].iter().any(|&v| v != 0.0) {
                return Err(Error::InvalidButcherTable("not explicit (a must be strictly lower triangular)"));
            }
        }
        if c[0] != 0.0 {
            return Err(Error::InvalidButcherTable("explicit methods need c_1 = 0"));
        }
        if (b.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidButcherTable("weights must sum to one"));
        }
        Ok(Self { a: a.into_iter().flatten().collect(), b, c, order })
    }

    /// The classical four-stage, fourth-order table.
    pub fn rk4() -> Self {
        Self::new(
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            vec![0.0, 0.5, 0.5, 1.0],
            4,
        )
        .expect("classical RK4 table is valid")
    }

    /// Explicit midpoint rule; as an RKMK method with `j = 0` it coincides
    /// with the second-order Magnus scheme.
    pub fn midpoint() -> Self {
        Self::new(vec![vec![0.0, 0.0], vec![0.5, 0.0]], vec![0.0, 1.0], vec![0.0, 0.5], 2)
            .expect("midpoint table is valid")
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn a(&self, l: usize, m: usize) -> f64 {
        self.a[l * self.stages() + m]
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// `Ω = h A(t_k + h/2)`.
    Magnus2,
    /// Fourth-order Magnus from the Taylor expansion of `A` about the midpoint.
    Magnus4,
    /// Runge–Kutta–Munthe-Kaas with `dexp⁻¹` truncated at `truncation`.
    Rkmk { table: ButcherTable, truncation: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepperConfig {
    pub method: Method,
    /// Finite-difference step for coefficient derivatives lacking an analytic
    /// form (Magnus 4 only); `None` uses [`crate::default_fd_step`].
    pub fd_step: Option<f64>,
}

impl StepperConfig {
    pub fn magnus2() -> Self {
        Self { method: Method::Magnus2, fd_step: None }
    }

    pub fn magnus4() -> Self {
        Self { method: Method::Magnus4, fd_step: None }
    }

    /// RKMK on the classical RK4 table with `j = 2`.
    pub fn rkmk4() -> Self {
        Self { method: Method::Rkmk { table: ButcherTable::rk4(), truncation: 2 }, fd_step: None }
    }

    pub fn rkmk(table: ButcherTable, truncation: usize) -> Result<Self> {
        let config = Self { method: Method::Rkmk { table, truncation }, fd_step: None };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if let Method::Rkmk { table, truncation } = &self.method {
            if *truncation > MAX_BERNOULLI {
                return Err(Error::UnsupportedOrder { requested: *truncation, max: MAX_BERNOULLI });
            }
            if *truncation + 2 < table.order() {
                return Err(Error::TruncationTooLow { truncation: *truncation, order: table.order() });
            }
        }
        if let Some(step) = self.fd_step {
            if !(step > 0.0) || !step.is_finite() {
                return Err(Error::InvalidInterval("finite-difference step must be positive"));
            }
        }
        Ok(())
    }
}

pub fn magnus2_increment(basis: &AlgebraBasis, coeffs: &CoefficientSet, tk: f64, h: f64) -> Result<SquareMatrix> {
    check_step(h)?;
    Ok(basis.assemble(coeffs, tk + 0.5 * h)?.scale(h))
}

/// `Ω = h a₀ + h³ (a₂ − [a₀, a₁])` with `a₀ = A(t½)`, `a₁ = Ȧ(t½)/12`,
/// `a₂ = Ä(t½)/24`, `t½ = t_k + h/2`.
pub fn magnus4_increment(basis: &AlgebraBasis, coeffs: &CoefficientSet, tk: f64, h: f64) -> Result<SquareMatrix> {
    magnus4_with_step(basis, coeffs, tk, h, None)
}

fn magnus4_with_step(
    basis: &AlgebraBasis,
    coeffs: &CoefficientSet,
    tk: f64,
    h: f64,
    fd_step: Option<f64>,
) -> Result<SquareMatrix> {
    check_step(h)?;
    let mid = tk + 0.5 * h;
    let a0 = basis.assemble(coeffs, mid)?;
    let (d1, d2) = basis.assemble_derivatives(coeffs, mid, fd_step)?;
    let a1 = d1.scale(1.0 / 12.0);
    let a2 = d2.scale(1.0 / 24.0);
    let correction = &a2 - &a0.commutator(&a1)?;
    Ok(a0.scale(h).add_scaled(h * h * h, &correction))
}

/// Stagewise `Θ_l = h Σ_m a_lm F_m`, `F_l = dexp⁻¹_{Θ_l}(A(t_k + c_l h))`,
/// returning `Θ = h Σ_l b_l F_l`.
pub fn rkmk_increment(
    basis: &AlgebraBasis,
    coeffs: &CoefficientSet,
    table: &ButcherTable,
    truncation: usize,
    tk: f64,
    h: f64,
) -> Result<SquareMatrix> {
    check_step(h)?;
    if truncation + 2 < table.order() {
        return Err(Error::TruncationTooLow { truncation, order: table.order() });
    }
    let s = table.stages();
    let dim = basis.dim();
    let mut stages: Vec<SquareMatrix> = Vec::with_capacity(s);
    for l in 0..s {
        let mut theta = SquareMatrix::zeros(dim);
        for (m, f) in stages.iter().enumerate() {
            let a = table.a(l, m);
            if a != 0.0 {
                theta = theta.add_scaled(h * a, f);
            }
        }
        let a_stage = basis.assemble(coeffs, tk + table.c()[l] * h)?;
        stages.push(dexpinv(&theta, &a_stage, truncation)?);
    }
    let mut out = SquareMatrix::zeros(dim);
    for (b, f) in table.b().iter().zip(&stages) {
        out = out.add_scaled(h * b, f);
    }
    Ok(out)
}

/// Increment `Ω_k` for the configured method.
pub fn group_increment(
    basis: &AlgebraBasis,
    coeffs: &CoefficientSet,
    config: &StepperConfig,
    tk: f64,
    h: f64,
) -> Result<SquareMatrix> {
    let omega = match &config.method {
        Method::Magnus2 => magnus2_increment(basis, coeffs, tk, h)?,
        Method::Magnus4 => magnus4_with_step(basis, coeffs, tk, h, config.fd_step)?,
        Method::Rkmk { table, truncation } => rkmk_increment(basis, coeffs, table, *truncation, tk, h)?,
    };
    if !omega.is_finite() {
        return Err(Error::NonFinite("algebra increment"));
    }
    Ok(omega)
}

fn check_step(h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidInterval("step size must be positive"));
    }
    Ok(())
}

/// Times `t_0..t_N`, group elements `Y_0..Y_N` and increments `Ω_0..Ω_{N−1}`.
#[derive(Clone, Debug)]
pub struct GroupTrajectory {
    pub times: Vec<f64>,
    pub elements: Vec<SquareMatrix>,
    pub increments: Vec<SquareMatrix>,
}

/// Integrates `dY/dt = A(t) Y`, `Y(t0) = y0`, with `steps` equal steps.
pub fn integrate_group(
    basis: &AlgebraBasis,
    coeffs: &CoefficientSet,
    config: &StepperConfig,
    t0: f64,
    t1: f64,
    steps: usize,
    y0: &SquareMatrix,
) -> Result<GroupTrajectory> {
    config.validate()?;
    if !(t1 > t0) {
        return Err(Error::InvalidInterval("t1 must exceed t0"));
    }
    if steps == 0 {
        return Err(Error::InvalidInterval("at least one step required"));
    }
    if y0.dim() != basis.dim() {
        return Err(Error::DimensionMismatch { expected: basis.dim(), found: y0.dim() });
    }
    let det = y0.determinant();
    if !(det.abs() > f64::EPSILON * libm::pow(y0.frobenius_norm(), y0.dim() as f64)) {
        return Err(Error::Singular);
    }
    let h = (t1 - t0) / steps as f64;
    let mut out = GroupTrajectory {
        times: Vec::with_capacity(steps + 1),
        elements: Vec::with_capacity(steps + 1),
        increments: Vec::with_capacity(steps),
    };
    out.times.push(t0);
    out.elements.push(y0.clone());
    for k in 0..steps {
        let tk = t0 + k as f64 * h;
        let omega = group_increment(basis, coeffs, config, tk, h).map_err(|e| e.at_step(k + 1))?;
        let next = &omega.exp() * &out.elements[k];
        if !next.is_finite() {
            return Err(Error::NonFinite("group element").at_step(k + 1));
        }
        out.times.push(t0 + (k + 1) as f64 * h);
        out.elements.push(next);
        out.increments.push(omega);
    }
    Ok(out)
}

/// Result of [`magnus_radius_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RadiusCheck {
    /// Simpson estimate of `∫ ‖A(ξ)‖_F dξ`.
    pub integral: f64,
    /// Whether the integral exceeds [`MAGNUS_RADIUS`].
    pub exceeds: bool,
}

/// Informational check of the Magnus convergence condition over `[t0, t1]`.
/// What matters for the schemes is the per-step integral, since every step
/// re-centres the coordinates.
pub fn magnus_radius_check(basis: &AlgebraBasis, coeffs: &CoefficientSet, t0: f64, t1: f64) -> Result<RadiusCheck> {
    if !(t1 > t0) {
        return Err(Error::InvalidInterval("t1 must exceed t0"));
    }
    let n = SIMPSON_PANELS;
    let dt = (t1 - t0) / n as f64;
    let norm_at = |k: usize| -> Result<f64> { Ok(basis.assemble(coeffs, t0 + k as f64 * dt)?.frobenius_norm()) };
    let mut sum = norm_at(0)? + norm_at(n)?;
    for k in 1..n {
        sum += if k % 2 == 1 { 4.0 } else { 2.0 } * norm_at(k)?;
    }
    let integral = sum * dt / 3.0;
    Ok(RadiusCheck { integral, exceeds: integral > MAGNUS_RADIUS })
}

/// One classical RK4 step on raw coordinates.
pub fn rk4_direct_step<F>(f: F, t: f64, h: f64, x: &ManifoldPoint) -> Result<ManifoldPoint>
where
    F: Fn(f64, &ManifoldPoint) -> Result<ManifoldPoint>,
{
    let k1 = f(t, x)?;
    let k2 = f(t + 0.5 * h, &x.offset(0.5 * h, &k1))?;
    let k3 = f(t + 0.5 * h, &x.offset(0.5 * h, &k2))?;
    let k4 = f(t + h, &x.offset(h, &k3))?;
    let coords: Vec<f64> = (0..x.dim()).map(|i| x[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
    ManifoldPoint::new(coords)
}
