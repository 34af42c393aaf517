//! Structure-preserving integration of Lie systems.
//!
//! A Lie system `dx/dt = Σ b_α(t) X_α(x)` is solved by integrating its
//! automorphic counterpart `dY/dt = A(t) Y`, `A(t) = Σ b_α(t) M_α`, on a matrix
//! Lie group with a Magnus or Runge–Kutta–Munthe-Kaas scheme, and pushing each
//! group increment through a Lie group action onto the manifold. Whatever the
//! action preserves (a quadratic form, a circle, a stratum) the discrete
//! trajectory preserves as well.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled; transcendental functions come from `libm` in both configurations
//! so results are bit-identical across builds.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod algebra;
pub mod ck;
pub mod error;
pub mod integrators;
pub mod lie_system;
pub mod limit_cycle;
pub mod matrix;
pub mod riccati;

pub use algebra::{bernoulli, dexpinv, AlgebraBasis, Coefficient, CoefficientSet};
pub use error::{Error, Result};
pub use integrators::{
    integrate_group, magnus2_increment, magnus4_increment, magnus_radius_check, rk4_direct_step, rkmk_increment,
    ButcherTable, GroupTrajectory, Method, RadiusCheck, StepperConfig,
};
pub use lie_system::{
    estimate_order, global_error, solve, solve_direct_rk4, FlowComposition, GroupAction, Invariant, LieSystem,
    ManifoldPoint, Step, Stepper, Trajectory,
};
pub use matrix::{central_second_derivatives, default_fd_step, SquareMatrix};
