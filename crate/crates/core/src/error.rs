use alloc::boxed::Box;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Operands of incompatible size.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// A matrix was requested with zero dimension or a data buffer of the wrong length.
    InvalidShape {
        dim: usize,
        len: usize,
    },
    /// NaN or infinity where a finite value is required.
    NonFinite(&'static str),
    /// Number of coefficient functions, fields or flows does not match the algebra.
    ArityMismatch {
        expected: usize,
        found: usize,
    },
    /// Generators are linearly dependent (or numerically so).
    DependentGenerators,
    /// Declared structure constants are not antisymmetric or do not reproduce the commutators.
    StructureConstants {
        alpha: usize,
        beta: usize,
        residual: f64,
    },
    /// Requested truncation order is beyond the tabulated Bernoulli numbers.
    UnsupportedOrder {
        requested: usize,
        max: usize,
    },
    /// RKMK truncation order too low for the order of the Butcher table.
    TruncationTooLow {
        truncation: usize,
        order: usize,
    },
    InvalidButcherTable(&'static str),
    /// `t1 <= t0`, zero steps, non-positive step size and similar.
    InvalidInterval(&'static str),
    /// Singular matrix where an invertible one is needed.
    Singular,
    /// Point/element pair outside the domain of a local group action.
    OutsideActionDomain,
    /// Group element outside the chart of canonical coordinates of the second kind.
    OutsideChart(&'static str),
    /// κ-tangent evaluated at a zero of the κ-cosine.
    TangentPole,
    /// Inputs that make a formula degenerate (coincident solutions, zero denominators).
    Degenerate(&'static str),
    /// Failure while producing step `step` of a trajectory.
    AtStep {
        step: usize,
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::AtStep { .. } => e,
            e => Error::AtStep { step, source: Box::new(e) },
        }
    }

    /// The innermost error, with any step annotation stripped.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            e => e,
        }
    }

    /// Step index at which a trajectory computation failed, if known.
    pub fn step(&self) -> Option<usize> {
        match self {
            Error::AtStep { step, .. } => Some(*step),
            _ => None,
        }
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidShape { dim, len } => {
                write!(f, "invalid matrix shape: dim {dim} with {len} entries")
            }
            Error::NonFinite(what) => write!(f, "non-finite value in {what}"),
            Error::ArityMismatch { expected, found } => {
                write!(f, "arity mismatch: expected {expected} entries, found {found}")
            }
            Error::DependentGenerators => f.write_str("generators are linearly dependent"),
            Error::StructureConstants { alpha, beta, residual } => {
                write!(f, "structure constants inconsistent for pair ({alpha}, {beta}): residual {residual:e}")
            }
            Error::UnsupportedOrder { requested, max } => {
                write!(f, "order {requested} unsupported (maximum {max})")
            }
            Error::TruncationTooLow { truncation, order } => {
                write!(f, "dexp^-1 truncation {truncation} too low for a method of order {order} (need >= order - 2)")
            }
            Error::InvalidButcherTable(why) => write!(f, "invalid Butcher table: {why}"),
            Error::InvalidInterval(why) => write!(f, "invalid integration setup: {why}"),
            Error::Singular => f.write_str("matrix is singular"),
            Error::OutsideActionDomain => f.write_str("outside the domain of the group action"),
            Error::OutsideChart(why) => {
                write!(f, "group element outside the coordinate chart ({why}); reduce the step size")
            }
            Error::TangentPole => f.write_str("kappa-tangent evaluated at a pole"),
            Error::Degenerate(why) => write!(f, "degenerate input: {why}"),
            Error::AtStep { step, source } => write!(f, "step {step}: {source}"),
        }
    }
}

impl core::error::Error for Error {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Error::AtStep { source, .. } => Some(source.as_ref()),
            _ => None,
        }
    }
}
