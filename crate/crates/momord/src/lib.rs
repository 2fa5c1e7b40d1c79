//! Method-of-moments estimators for one-parameter distribution families,
//! with grid-based checkers for the stochastic-order and total-positivity
//! conditions under which those estimators preserve parameter order, and a
//! deterministic Monte Carlo harness that verifies the order-preservation
//! claims empirically.
//!
//! The numeric core is generic over the scalar type through the [`Real`]
//! trait (any `num_traits::Float` with the usual conversion bounds, so `f64`
//! and `f32` both work); the crate root exports `f64` aliases for the common
//! types.

pub mod families;
pub mod mc;
pub mod moments;
pub mod orders;
pub mod quad;
pub mod real;
pub mod rng;
pub mod specfun;

pub use real::Real;

/// `f64` alias for [`families::Family`].
pub type Family64 = families::Family<f64>;
/// `f64` alias for [`families::ExpFamily`].
pub type ExpFamily64 = families::ExpFamily<f64>;
/// `f64` alias for [`families::Builtin`].
pub type Builtin64 = families::Builtin<f64>;
/// `f64` alias for [`families::Support`].
pub type Support64 = families::Support<f64>;
/// `f64` alias for [`moments::MomentSpec`].
pub type MomentSpec64 = moments::MomentSpec<f64>;
/// `f64` alias for [`moments::Estimate`].
pub type Estimate64 = moments::Estimate<f64>;
/// `f64` alias for [`orders::Grid`].
pub type Grid64 = orders::Grid<f64>;
/// `f64` alias for [`orders::OrderReport`].
pub type OrderReport64 = orders::OrderReport<f64>;
