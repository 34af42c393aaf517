//! The planar system
//!
//! ```text
//! dx/dt =  b1(t) y + b2(t) (x² + y² − 1) x
//! dy/dt = −b1(t) x + b2(t) (x² + y² − 1) y
//! ```
//!
//! whose Vessiot–Guldberg algebra is abelian and integrates to a local action
//! of the positive diagonal group `diag(a, b)`. The unit circle and the origin
//! are orbits.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::algebra::{AlgebraBasis, Coefficient, CoefficientSet};
use crate::error::{Error, Result};
use crate::lie_system::{
    CoordinateExtractor, DomainGuard, Flow, FlowComposition, GroupAction, Invariant, LieSystem, ManifoldPoint,
    VectorField,
};
use crate::matrix::SquareMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagonalGroupElement {
    a: f64,
    b: f64,
}

impl DiagonalGroupElement {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a > 0.0 && b > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::OutsideChart("diagonal entries must be positive and finite"));
        }
        Ok(Self { a, b })
    }

    pub const fn identity() -> Self {
        Self { a: 1.0, b: 1.0 }
    }

    /// Reads `diag(a, b)` back from a 2×2 matrix; off-diagonal entries must
    /// vanish.
    pub fn from_matrix(g: &SquareMatrix) -> Result<Self> {
        if g.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, found: g.dim() });
        }
        if g.get(0, 1) != 0.0 || g.get(1, 0) != 0.0 {
            return Err(Error::OutsideChart("group element is not diagonal"));
        }
        Self::new(g.get(0, 0), g.get(1, 1))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Canonical coordinates `(ln a, ln b)`.
    pub fn coordinates(&self) -> [f64; 2] {
        [libm::log(self.a), libm::log(self.b)]
    }

    pub fn compose(&self, other: &Self) -> Self {
        Self { a: self.a * other.a, b: self.b * other.b }
    }

    pub fn to_matrix(&self) -> SquareMatrix {
        SquareMatrix::diag(&[self.a, self.b]).expect("finite entries")
    }
}

fn radius_sq(p: &ManifoldPoint) -> f64 {
    p[0] * p[0] + p[1] * p[1]
}

/// Clockwise rotation by `t`.
pub fn rotation_flow(t: f64, p: &ManifoldPoint) -> ManifoldPoint {
    let (s, c) = (libm::sin(t), libm::cos(t));
    ManifoldPoint::from([p[0] * c + p[1] * s, -p[0] * s + p[1] * c])
}

/// `x² + y² − 1` without cancelling against the rounded `x² + y²`.
fn circle_offset(p: &ManifoldPoint) -> f64 {
    libm::fma(p[0], p[0], libm::fma(p[1], p[1], -1.0))
}

/// Radial flow `p / √(r² − (r² − 1) e^{2t})`, evaluated as
/// `p / √(1 − (r² − 1)(e^{2t} − 1))`; non-finite outside its domain.
pub fn radial_flow(t: f64, p: &ManifoldPoint) -> ManifoldPoint {
    let scale = 1.0 / libm::sqrt(1.0 - circle_offset(p) * libm::expm1(2.0 * t));
    ManifoldPoint::from([p[0] * scale, p[1] * scale])
}

fn in_domain(b: f64, p: &ManifoldPoint) -> bool {
    let r2 = radius_sq(p);
    r2 - (r2 - 1.0) * b * b > 0.0
}

pub fn limit_cycle_action(g: DiagonalGroupElement, p: &ManifoldPoint) -> Result<ManifoldPoint> {
    if p.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: p.dim() });
    }
    if !in_domain(g.b, p) {
        return Err(Error::OutsideActionDomain);
    }
    let [l1, l2] = g.coordinates();
    let out = rotation_flow(l1, &radial_flow(l2, p));
    if !out.is_finite() {
        return Err(Error::NonFinite("limit cycle action"));
    }
    Ok(out)
}

/// The flow-composition action with its domain guard.
pub fn limit_cycle_group_action() -> GroupAction {
    let flows: Vec<Flow> = vec![Arc::new(rotation_flow), Arc::new(radial_flow)];
    let extractor: CoordinateExtractor = Arc::new(|g| Ok(DiagonalGroupElement::from_matrix(g)?.coordinates().to_vec()));
    let guard: DomainGuard = Arc::new(|g, p| g.dim() == 2 && p.dim() == 2 && in_domain(g.get(1, 1), p));
    GroupAction::FlowComposition(FlowComposition::new(flows, extractor).with_guard(guard))
}

pub fn limit_cycle_basis() -> AlgebraBasis {
    let generators =
        vec![SquareMatrix::diag(&[1.0, 0.0]).expect("finite"), SquareMatrix::diag(&[0.0, 1.0]).expect("finite")];
    AlgebraBasis::new(generators, vec![vec![vec![0.0; 2]; 2]; 2]).expect("abelian basis")
}

pub fn limit_cycle_system(b1: Coefficient, b2: Coefficient) -> LieSystem {
    let fields: Vec<VectorField> = vec![
        Arc::new(|p: &ManifoldPoint| ManifoldPoint::from([p[1], -p[0]])),
        Arc::new(|p: &ManifoldPoint| {
            let w = radius_sq(p) - 1.0;
            ManifoldPoint::from([w * p[0], w * p[1]])
        }),
    ];
    LieSystem::new(limit_cycle_basis(), CoefficientSet::new(vec![b1, b2]), fields, limit_cycle_group_action(), 2)
        .expect("consistent limit cycle system")
        .with_invariant(Invariant::new("r2", radius_sq))
}

/// `b1 = 1 + t²`, `b2 = eᵗ`.
pub fn limit_cycle_reference_coefficients() -> (Coefficient, Coefficient) {
    (
        Coefficient::new(|t| 1.0 + t * t).with_derivatives(|t| 2.0 * t, |_| 2.0),
        Coefficient::new(libm::exp).with_derivatives(libm::exp, libm::exp),
    )
}
