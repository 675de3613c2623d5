//! Numerics for the graphs of Weierstrass-type functions
//! `W(x) = Σ λⁿ g(bⁿx)` with `g(u) = cos(2πu)` or `g(u) = dist(u, ℤ)`.
//!
//! The crate evaluates the series and its driving baker-map dynamics, the
//! strong-stable fibers of the associated skew product, and the estimators
//! built on them: box counting, local dimension through fiber-bounded
//! neighbourhoods, the telescoping identity, measure-scaling exponents,
//! densities of the `Θ` series, and the critical parameter `λ_b`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod critical;
pub mod dimension;
pub mod dynamics;
pub mod error;
pub mod fibers;
pub mod fit;
pub mod mc;
pub mod measures;
pub mod quadrature;
pub mod schedule;
pub mod weierstrass;

pub use critical::{h_b, solve_lambda_b, CriticalResult};
pub use dynamics::{DigitWord, OrbitState, SymbolicPoint};
pub use error::{Error, Result};
pub use fibers::ThetaEvaluator;
pub use fit::ScalingFit;
pub use schedule::TruncationSchedule;
pub use weierstrass::{dimension_formula, RidgeFunction, SystemParams, WeierstrassFunction};
