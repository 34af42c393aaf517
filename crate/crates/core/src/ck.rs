//! Cayley–Klein groups `SO_{κ1,κ2}(3)` acting on ambient `ℝ³`.
//!
//! Generators follow the group-side convention
//!
//! ```text
//! M_P1  = [[0, κ1, 0], [-1, 0, 0], [0, 0, 0]]
//! M_P2  = [[0, 0, κ1κ2], [0, 0, 0], [-1, 0, 0]]
//! M_J12 = [[0, 0, 0], [0, 0, κ2], [0, -1, 0]]
//! ```
//!
//! so that `exp(λ M_α)` is exactly the flow matrix of the fundamental field
//! `X_α` and the action is `φ(g, x) = g·x`. The quadratic form
//! `I(x) = x0² + κ1 x1² + κ1κ2 x2²` is preserved by every group element.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{AlgebraBasis, Coefficient, CoefficientSet};
use crate::error::{Error, Result};
use crate::lie_system::{
    CoordinateExtractor, Flow, FlowComposition, GroupAction, Invariant, LieSystem, ManifoldPoint, VectorField,
};
use crate::matrix::SquareMatrix;

/// Below this magnitude a curvature parameter is treated as exactly zero.
pub const KAPPA_ZERO: f64 = 1e-30;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CkParams {
    pub kappa1: f64,
    pub kappa2: f64,
}

impl CkParams {
    pub fn new(kappa1: f64, kappa2: f64) -> Result<Self> {
        if !kappa1.is_finite() || !kappa2.is_finite() {
            return Err(Error::NonFinite("curvature parameters"));
        }
        Ok(Self { kappa1, kappa2 })
    }

    /// Curvature parameter governing the one-parameter subgroup of `generator`.
    pub fn kappa_for(&self, generator: CkGenerator) -> f64 {
        match generator {
            CkGenerator::P1 => self.kappa1,
            CkGenerator::P2 => self.kappa1 * self.kappa2,
            CkGenerator::J12 => self.kappa2,
        }
    }

    /// `I_κ = diag(1, κ1, κ1κ2)`.
    pub fn bilinear_form(&self) -> SquareMatrix {
        SquareMatrix::diag(&[1.0, self.kappa1, self.kappa1 * self.kappa2]).expect("finite parameters")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CkGenerator {
    P1,
    P2,
    J12,
}

impl CkGenerator {
    pub const ALL: [CkGenerator; 3] = [CkGenerator::P1, CkGenerator::P2, CkGenerator::J12];

    pub fn index(self) -> usize {
        self as usize
    }
}

fn sign_class(kappa: f64) -> core::cmp::Ordering {
    if kappa.abs() < KAPPA_ZERO {
        core::cmp::Ordering::Equal
    } else if kappa > 0.0 {
        core::cmp::Ordering::Greater
    } else {
        core::cmp::Ordering::Less
    }
}

/// κ-cosine: `cos(√κ λ)`, `1`, or `cosh(√−κ λ)`.
pub fn ck_cos(kappa: f64, lambda: f64) -> f64 {
    use core::cmp::Ordering::*;
    match sign_class(kappa) {
        Greater => libm::cos(libm::sqrt(kappa) * lambda),
        Equal => 1.0,
        Less => libm::cosh(libm::sqrt(-kappa) * lambda),
    }
}

/// κ-sine: `sin(√κ λ)/√κ`, `λ`, or `sinh(√−κ λ)/√−κ`.
pub fn ck_sin(kappa: f64, lambda: f64) -> f64 {
    use core::cmp::Ordering::*;
    match sign_class(kappa) {
        Greater => {
            let r = libm::sqrt(kappa);
            libm::sin(r * lambda) / r
        }
        Equal => lambda,
        Less => {
            let r = libm::sqrt(-kappa);
            libm::sinh(r * lambda) / r
        }
    }
}

pub fn ck_tan(kappa: f64, lambda: f64) -> Result<f64> {
    let c = ck_cos(kappa, lambda);
    if c == 0.0 {
        return Err(Error::TangentPole);
    }
    Ok(ck_sin(kappa, lambda) / c)
}

/// κ-versed sine `(1 − C_κ(λ))/κ`, or `λ²/2` when κ = 0.
pub fn ck_versin(kappa: f64, lambda: f64) -> f64 {
    if sign_class(kappa) == core::cmp::Ordering::Equal {
        0.5 * lambda * lambda
    } else {
        (1.0 - ck_cos(kappa, lambda)) / kappa
    }
}

/// Inverse of the κ-tangent on its principal branch.
fn ck_arctan(kappa: f64, tangent: f64, what: &'static str) -> Result<f64> {
    use core::cmp::Ordering::*;
    match sign_class(kappa) {
        Greater => {
            let r = libm::sqrt(kappa);
            Ok(libm::atan(tangent * r) / r)
        }
        Equal => Ok(tangent),
        Less => {
            let r = libm::sqrt(-kappa);
            let u = tangent * r;
            if !(u.abs() < 1.0) {
                return Err(Error::OutsideChart(what));
            }
            Ok(libm::atanh(u) / r)
        }
    }
}

/// Inverse of the κ-sine on its principal branch.
fn ck_arcsin(kappa: f64, sine: f64, what: &'static str) -> Result<f64> {
    use core::cmp::Ordering::*;
    match sign_class(kappa) {
        Greater => {
            let r = libm::sqrt(kappa);
            let u = sine * r;
            if !(u.abs() < 1.0) {
                return Err(Error::OutsideChart(what));
            }
            Ok(libm::asin(u) / r)
        }
        Equal => Ok(sine),
        Less => {
            let r = libm::sqrt(-kappa);
            Ok(libm::asinh(sine * r) / r)
        }
    }
}

pub fn ck_generator_matrix(params: CkParams, generator: CkGenerator) -> SquareMatrix {
    let CkParams { kappa1: k1, kappa2: k2 } = params;
    let rows = match generator {
        CkGenerator::P1 => [[0.0, k1, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]],
        CkGenerator::P2 => [[0.0, 0.0, k1 * k2], [0.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        CkGenerator::J12 => [[0.0, 0.0, 0.0], [0.0, 0.0, k2], [0.0, -1.0, 0.0]],
    };
    SquareMatrix::from_rows(rows).expect("finite parameters")
}

/// Basis `(M_P1, M_P2, M_J12)` with `[M_P1, M_P2] = −κ1 M_J12`,
/// `[M_J12, M_P1] = −M_P2`, `[M_J12, M_P2] = κ2 M_P1`.
pub fn ck_generators(params: CkParams) -> AlgebraBasis {
    let (k1, k2) = (params.kappa1, params.kappa2);
    let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
    let (p1, p2, j12) = (0, 1, 2);
    c[p1][p2][j12] = -k1;
    c[p2][p1][j12] = k1;
    c[j12][p1][p2] = -1.0;
    c[p1][j12][p2] = 1.0;
    c[j12][p2][p1] = k2;
    c[p2][j12][p1] = -k2;
    let generators = CkGenerator::ALL.iter().map(|&g| ck_generator_matrix(params, g)).collect();
    AlgebraBasis::new(generators, c).expect("Cayley-Klein generators are independent and closed")
}

/// Closed form of `exp(λ M_α)`.
pub fn ck_exp_closed(params: CkParams, generator: CkGenerator, lambda: f64) -> SquareMatrix {
    let kappa = params.kappa_for(generator);
    let (c, s) = (ck_cos(kappa, lambda), ck_sin(kappa, lambda));
    let rows = match generator {
        CkGenerator::P1 => [[c, kappa * s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]],
        CkGenerator::P2 => [[c, 0.0, kappa * s], [0.0, 1.0, 0.0], [-s, 0.0, c]],
        CkGenerator::J12 => [[1.0, 0.0, 0.0], [0.0, c, kappa * s], [0.0, -s, c]],
    };
    SquareMatrix::from_rows(rows).expect("finite entries")
}

/// Flow `Φ_α(λ, x)` of the fundamental field of `generator`.
pub fn ck_flow(params: CkParams, generator: CkGenerator, lambda: f64, x: &ManifoldPoint) -> ManifoldPoint {
    let kappa = params.kappa_for(generator);
    let (c, s) = (ck_cos(kappa, lambda), ck_sin(kappa, lambda));
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let coords = match generator {
        CkGenerator::P1 => [x0 * c + kappa * x1 * s, x1 * c - x0 * s, x2],
        CkGenerator::P2 => [x0 * c + kappa * x2 * s, x1, x2 * c - x0 * s],
        CkGenerator::J12 => [x0, x1 * c + kappa * x2 * s, x2 * c - x1 * s],
    };
    ManifoldPoint::from(coords)
}

/// Fundamental vector field `M_α·x` of `generator`.
pub fn ck_field(params: CkParams, generator: CkGenerator, x: &ManifoldPoint) -> ManifoldPoint {
    let CkParams { kappa1: k1, kappa2: k2 } = params;
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    let v = match generator {
        CkGenerator::P1 => [k1 * x1, -x0, 0.0],
        CkGenerator::P2 => [k1 * k2 * x2, 0.0, -x0],
        CkGenerator::J12 => [0.0, k2 * x2, -x1],
    };
    ManifoldPoint::from(v)
}

/// Canonical coordinates of the second kind: the `(λ1, λ2, λ3)` near zero with
/// `g = exp(λ1 M_P1) exp(λ2 M_P2) exp(λ3 M_J12)`.
pub fn ck_extract_coords(params: CkParams, g: &SquareMatrix) -> Result<[f64; 3]> {
    if g.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: g.dim() });
    }
    let (g11, g21, g31) = (g.get(0, 0), g.get(1, 0), g.get(2, 0));
    let (g32, g33) = (g.get(2, 1), g.get(2, 2));
    if !(g11 > 0.0) {
        return Err(Error::OutsideChart("g11 must be positive"));
    }
    if !(g33 > 0.0) {
        return Err(Error::OutsideChart("g33 must be positive"));
    }
    let l1 = ck_arctan(params.kappa1, -g21 / g11, "lambda1 branch")?;
    let l2 = ck_arcsin(params.kappa1 * params.kappa2, -g31, "lambda2 branch")?;
    let l3 = ck_arctan(params.kappa2, -g32 / g33, "lambda3 branch")?;
    Ok([l1, l2, l3])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ActionMode {
    /// `g·x`.
    Linear,
    /// `Φ_P1(λ1, Φ_P2(λ2, Φ_J12(λ3, x)))` from the extracted coordinates.
    FlowComposition,
}

pub fn ck_action(params: CkParams, g: &SquareMatrix, x: &ManifoldPoint, mode: ActionMode) -> Result<ManifoldPoint> {
    if x.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: x.dim() });
    }
    match mode {
        ActionMode::Linear => ManifoldPoint::new(g.mul_vec(x.coords())?),
        ActionMode::FlowComposition => {
            let [l1, l2, l3] = ck_extract_coords(params, g)?;
            let inner = ck_flow(params, CkGenerator::J12, l3, x);
            let mid = ck_flow(params, CkGenerator::P2, l2, &inner);
            Ok(ck_flow(params, CkGenerator::P1, l1, &mid))
        }
    }
}

/// The [`GroupAction`] corresponding to `mode`.
pub fn ck_group_action(params: CkParams, mode: ActionMode) -> GroupAction {
    match mode {
        ActionMode::Linear => GroupAction::Linear,
        ActionMode::FlowComposition => {
            let flows: Vec<Flow> = CkGenerator::ALL
                .iter()
                .map(|&gen| -> Flow { Arc::new(move |lambda, x: &ManifoldPoint| ck_flow(params, gen, lambda, x)) })
                .collect();
            let extractor: CoordinateExtractor = Arc::new(move |g| Ok(ck_extract_coords(params, g)?.to_vec()));
            GroupAction::FlowComposition(FlowComposition::new(flows, extractor))
        }
    }
}

/// `I(x) = x0² + κ1 x1² + κ1κ2 x2²`.
pub fn ck_invariant(params: CkParams, x: &ManifoldPoint) -> f64 {
    let CkParams { kappa1: k1, kappa2: k2 } = params;
    x[0] * x[0] + k1 * x[1] * x[1] + k1 * k2 * x[2] * x[2]
}

/// Right-hand side of the CK Lie system in ambient coordinates.
pub fn ck_system_rhs(params: CkParams, coeffs: &CoefficientSet, t: f64, x: &ManifoldPoint) -> Result<ManifoldPoint> {
    if coeffs.len() != 3 {
        return Err(Error::ArityMismatch { expected: 3, found: coeffs.len() });
    }
    if x.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: x.dim() });
    }
    let b = coeffs.values(t)?;
    let CkParams { kappa1: k1, kappa2: k2 } = params;
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    ManifoldPoint::new(vec![b[0] * k1 * x1 + b[1] * k1 * k2 * x2, -b[0] * x0 + b[2] * k2 * x2, -b[1] * x0 - b[2] * x1])
}

/// The CK Lie system with coefficients `(b1, b2, b12)` and the invariant `I`
/// attached.
pub fn ck_lie_system(params: CkParams, coeffs: CoefficientSet, mode: ActionMode) -> Result<LieSystem> {
    let fields: Vec<VectorField> = CkGenerator::ALL
        .iter()
        .map(|&gen| -> VectorField { Arc::new(move |x: &ManifoldPoint| ck_field(params, gen, x)) })
        .collect();
    let sys = LieSystem::new(ck_generators(params), coeffs, fields, ck_group_action(params, mode), 3)?;
    Ok(sys.with_invariant(Invariant::new("I", move |x| ck_invariant(params, x))))
}

/// `b1 = t²`, `b2 = sin t`, `b12 = ln(t + 1)` with analytic derivatives.
pub fn ck_reference_coefficients() -> CoefficientSet {
    CoefficientSet::new(vec![
        Coefficient::new(|t| t * t).with_derivatives(|t| 2.0 * t, |_| 2.0),
        Coefficient::new(libm::sin).with_derivatives(libm::cos, |t| -libm::sin(t)),
        Coefficient::new(|t| libm::log(t + 1.0))
            .with_derivatives(|t| 1.0 / (t + 1.0), |t| -1.0 / ((t + 1.0) * (t + 1.0))),
    ])
}
