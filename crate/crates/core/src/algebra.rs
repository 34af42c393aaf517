//! Matrix Lie algebras, t-dependent coefficients and the `dexp⁻¹` series.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::matrix::{central_derivatives_scalar, default_fd_step, SquareMatrix};

const CLOSURE_TOL: f64 = 1e-10;
const ANTISYMMETRY_TOL: f64 = 1e-12;
const GRAM_CONDITION_TOL: f64 = 1e-12;

/// An ordered basis `M_1..M_r` of a matrix Lie algebra together with its
/// structure constants `[M_α, M_β] = Σ_γ c[α][β][γ] M_γ`.
#[derive(Clone, Debug)]
pub struct AlgebraBasis {
    generators: Vec<SquareMatrix>,
    constants: Vec<f64>,
}

impl AlgebraBasis {
    /// Validates declared structure constants (`constants[α][β][γ]`) against
    /// the actual commutators of `generators`.
    pub fn new(generators: Vec<SquareMatrix>, constants: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let r = generators.len();
        check_generators(&generators)?;
        if constants.len() != r {
            return Err(Error::ArityMismatch { expected: r, found: constants.len() });
        }
        let mut flat = Vec::with_capacity(r * r * r);
        for row in &constants {
            if row.len() != r {
                return Err(Error::ArityMismatch { expected: r, found: row.len() });
            }
            for c in row {
                if c.len() != r {
                    return Err(Error::ArityMismatch { expected: r, found: c.len() });
                }
                flat.extend_from_slice(c);
            }
        }
        let basis = Self { generators, constants: flat };
        basis.check_constants()?;
        Ok(basis)
    }

    /// Derives the structure constants by projecting each commutator onto the
    /// span of the generators; fails if the span is not closed under brackets.
    pub fn from_generators(generators: Vec<SquareMatrix>) -> Result<Self> {
        check_generators(&generators)?;
        let r = generators.len();
        let gram: Vec<f64> = (0..r * r).map(|k| generators[k / r].dot(&generators[k % r])).collect();
        let mut constants = vec![0.0; r * r * r];
        for a in 0..r {
            for b in 0..r {
                let bracket = generators[a].commutator(&generators[b])?;
                let rhs: Vec<f64> = generators.iter().map(|g| g.dot(&bracket)).collect();
                let c = solve_spd(&gram, &rhs, r).ok_or(Error::DependentGenerators)?;
                constants[(a * r + b) * r..(a * r + b + 1) * r].copy_from_slice(&c);
            }
        }
        let basis = Self { generators, constants };
        basis.check_constants()?;
        Ok(basis)
    }

    fn check_constants(&self) -> Result<()> {
        let r = self.len();
        for a in 0..r {
            for b in 0..r {
                for g in 0..r {
                    let sym = self.constant(a, b, g) + self.constant(b, a, g);
                    if sym.abs() > ANTISYMMETRY_TOL {
                        return Err(Error::StructureConstants { alpha: a, beta: b, residual: sym.abs() });
                    }
                }
                let bracket = self.generators[a].commutator(&self.generators[b])?;
                let coeffs: Vec<f64> = (0..r).map(|g| self.constant(a, b, g)).collect();
                let residual = bracket.distance(&self.combine(&coeffs)?);
                if residual > CLOSURE_TOL {
                    return Err(Error::StructureConstants { alpha: a, beta: b, residual });
                }
            }
        }
        Ok(())
    }

    /// Number of generators `r`.
    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// Matrix dimension `n`.
    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn generators(&self) -> &[SquareMatrix] {
        &self.generators
    }

    pub fn generator(&self, alpha: usize) -> &SquareMatrix {
        &self.generators[alpha]
    }

    pub fn constant(&self, alpha: usize, beta: usize, gamma: usize) -> f64 {
        let r = self.len();
        self.constants[(alpha * r + beta) * r + gamma]
    }

    /// `Σ_α w_α M_α`.
    pub fn combine(&self, weights: &[f64]) -> Result<SquareMatrix> {
        if weights.len() != self.len() {
            return Err(Error::ArityMismatch { expected: self.len(), found: weights.len() });
        }
        let mut acc = SquareMatrix::zeros(self.dim());
        for (w, m) in weights.iter().zip(&self.generators) {
            acc = acc.add_scaled(*w, m);
        }
        if !acc.is_finite() {
            return Err(Error::NonFinite("algebra element"));
        }
        Ok(acc)
    }

    /// `A(t) = Σ_α b_α(t) M_α`.
    pub fn assemble(&self, coeffs: &CoefficientSet, t: f64) -> Result<SquareMatrix> {
        self.check_arity(coeffs)?;
        self.combine(&coeffs.values(t)?)
    }

    /// `(Ȧ(t), Ä(t))`, using analytic coefficient derivatives where supplied
    /// and central differences otherwise. `fd_step` defaults to
    /// [`default_fd_step`].
    pub fn assemble_derivatives(
        &self,
        coeffs: &CoefficientSet,
        t: f64,
        fd_step: Option<f64>,
    ) -> Result<(SquareMatrix, SquareMatrix)> {
        self.check_arity(coeffs)?;
        let (d1, d2) = coeffs.derivatives(t, fd_step)?;
        Ok((self.combine(&d1)?, self.combine(&d2)?))
    }

    fn check_arity(&self, coeffs: &CoefficientSet) -> Result<()> {
        if coeffs.len() != self.len() {
            return Err(Error::ArityMismatch { expected: self.len(), found: coeffs.len() });
        }
        Ok(())
    }
}

fn check_generators(generators: &[SquareMatrix]) -> Result<()> {
    let first = generators.first().ok_or(Error::DependentGenerators)?;
    for g in generators {
        if g.dim() != first.dim() {
            return Err(Error::DimensionMismatch { expected: first.dim(), found: g.dim() });
        }
    }
    let r = generators.len();
    let gram: Vec<f64> = (0..r * r).map(|k| generators[k / r].dot(&generators[k % r])).collect();
    if cholesky_min_ratio(&gram, r) <= GRAM_CONDITION_TOL {
        return Err(Error::DependentGenerators);
    }
    Ok(())
}

/// Smallest squared Cholesky pivot relative to the largest diagonal entry;
/// zero when the matrix is not numerically positive definite.
fn cholesky_min_ratio(a: &[f64], n: usize) -> f64 {
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(0.0, f64::max);
    if !(max_diag > 0.0) {
        return 0.0;
    }
    let mut l = vec![0.0; n * n];
    let mut min_pivot = f64::INFINITY;
    for j in 0..n {
        let d = a[j * n + j] - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
        if d <= 0.0 {
            return 0.0;
        }
        min_pivot = min_pivot.min(d);
        let ljj = libm::sqrt(d);
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let s = a[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
            l[i * n + j] = s / ljj;
        }
    }
    min_pivot / max_diag
}

fn solve_spd(a: &[f64], b: &[f64], n: usize) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let d = a[j * n + j] - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
        if d <= 0.0 {
            return None;
        }
        let ljj = libm::sqrt(d);
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let s = a[i * n + j] - (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum::<f64>();
            l[i * n + j] = s / ljj;
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (b[i] - (0..i).map(|k| l[i * n + k] * y[k]).sum::<f64>()) / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (y[i] - (i + 1..n).map(|k| l[k * n + i] * x[k]).sum::<f64>()) / l[i * n + i];
    }
    Some(x)
}

pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// One t-dependent coefficient `b_α(t)`, optionally with analytic first and
/// second derivatives.
#[derive(Clone)]
pub struct Coefficient {
    value: ScalarFn,
    first: Option<ScalarFn>,
    second: Option<ScalarFn>,
}

impl Coefficient {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { value: Arc::new(f), first: None, second: None }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c).with_derivatives(|_| 0.0, |_| 0.0)
    }

    pub fn with_derivatives(
        mut self,
        first: impl Fn(f64) -> f64 + Send + Sync + 'static,
        second: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.first = Some(Arc::new(first));
        self.second = Some(Arc::new(second));
        self
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.first.is_some() && self.second.is_some()
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        finite((self.value)(t), "coefficient value")
    }

    /// `(ḃ(t), b̈(t))`.
    pub fn derivatives(&self, t: f64, fd_step: Option<f64>) -> Result<(f64, f64)> {
        let step = fd_step.unwrap_or_else(|| default_fd_step(t));
        let fd = || central_derivatives_scalar(|s| (self.value)(s), t, step);
        let (d1, d2) = match (&self.first, &self.second) {
            (Some(f1), Some(f2)) => (f1(t), f2(t)),
            (Some(f1), None) => (f1(t), fd()?.1),
            (None, Some(f2)) => (fd()?.0, f2(t)),
            (None, None) => fd()?,
        };
        Ok((finite(d1, "coefficient derivative")?, finite(d2, "coefficient derivative")?))
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Coefficient")
            .field("analytic_first", &self.first.is_some())
            .field("analytic_second", &self.second.is_some())
            .finish()
    }
}

fn finite(v: f64, what: &'static str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// The coefficients `b_1(t)..b_r(t)` of a Lie system, in basis order.
#[derive(Clone, Debug, Default)]
pub struct CoefficientSet(Vec<Coefficient>);

impl CoefficientSet {
    pub fn new(coeffs: Vec<Coefficient>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(r: usize) -> Self {
        Self((0..r).map(|_| Coefficient::constant(0.0)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, alpha: usize) -> &Coefficient {
        &self.0[alpha]
    }

    pub fn values(&self, t: f64) -> Result<Vec<f64>> {
        self.0.iter().map(|c| c.eval(t)).collect()
    }

    pub fn derivatives(&self, t: f64, fd_step: Option<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
        let pairs = self.0.iter().map(|c| c.derivatives(t, fd_step)).collect::<Result<Vec<_>>>()?;
        Ok(pairs.into_iter().unzip())
    }
}

impl FromIterator<Coefficient> for CoefficientSet {
    fn from_iter<I: IntoIterator<Item = Coefficient>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Highest supported Bernoulli index (and `dexp⁻¹` truncation order).
pub const MAX_BERNOULLI: usize = 10;

// B_j with the B_1 = -1/2 convention.
const BERNOULLI: [f64; MAX_BERNOULLI + 1] =
    [1.0, -1.0 / 2.0, 1.0 / 6.0, 0.0, -1.0 / 30.0, 0.0, 1.0 / 42.0, 0.0, -1.0 / 30.0, 0.0, 5.0 / 66.0];

const FACTORIAL: [f64; MAX_BERNOULLI + 1] =
    [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0, 362880.0, 3628800.0];

pub fn bernoulli(j: usize) -> Result<f64> {
    BERNOULLI.get(j).copied().ok_or(Error::UnsupportedOrder { requested: j, max: MAX_BERNOULLI })
}

/// Truncated `dexp⁻¹_Ω(H) = Σ_{i=0}^{order} (B_i / i!) ad_Ω^i(H)`.
///
/// Accuracy is only meaningful for `‖Ω‖_F ≤ 1`; the full series converges for
/// `‖Ω‖ < π`.
pub fn dexpinv(omega: &SquareMatrix, h: &SquareMatrix, order: usize) -> Result<SquareMatrix> {
    if order > MAX_BERNOULLI {
        return Err(Error::UnsupportedOrder { requested: order, max: MAX_BERNOULLI });
    }
    if omega.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: omega.dim(), found: h.dim() });
    }
    let mut acc = h.clone();
    let mut ad = h.clone();
    for i in 1..=order {
        ad = omega.commutator(&ad)?;
        let w = BERNOULLI[i] / FACTORIAL[i];
        if w != 0.0 {
            acc = acc.add_scaled(w, &ad);
        }
    }
    Ok(acc)
}
