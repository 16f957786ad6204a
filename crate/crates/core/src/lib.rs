//! Product integrals on finite-dimensional matrix Lie groups, computed through
//! Lax propagators, the integral transform `𝔗` and generalized BCDH expansions,
//! with brute-force oracles (left Riemann products, RK4) for cross-checking.
//!
//! Everything is generic over the scalar type (`f32` or `f64`); the aliases
//! below fix the common instantiations.

pub mod algebra;
pub mod bcdh;
pub mod curvegroup;
pub mod curves;
pub mod error;
pub mod lax;
pub mod linalg;
pub mod prodint;
pub mod quad;
pub mod scalar;
pub mod transform;

pub use algebra::{bracket, exp_matrix, log_matrix, AlgebraDescriptor, AlgebraRef, Element, GroupPoint};
pub use bcdh::{bcdh_classical, bcdh_forms, bcdh_pair, series_apply, EndoSeriesInput, Regime, SeriesKind};
pub use curvegroup::{curve_bracket, inverse, star};
pub use curves::{integrate, picard_terms, reparametrize, reverse, CoeffFn, Curve, CurveSpec, Sign, Term};
pub use error::{Error, Result};
pub use lax::{lax_propagate, propagator_matrix, propagator_sweep, Propagator};
pub use linalg::Matrix;
pub use prodint::{bcdh_log, check_identities, evaluate, nilpotent_log, ode_evolve, riemann_product, Method, Trajectory};
pub use scalar::Real;
pub use transform::{iterate_t, nilpotent_collapse, transform_t};

pub type Matrix64 = Matrix<f64>;
pub type Matrix32 = Matrix<f32>;
pub type Algebra64 = AlgebraRef<f64>;
pub type Algebra32 = AlgebraRef<f32>;
pub type Element64 = Element<f64>;
pub type Element32 = Element<f32>;
pub type GroupPoint64 = GroupPoint<f64>;
pub type GroupPoint32 = GroupPoint<f32>;
pub type Curve64 = Curve<f64>;
pub type Curve32 = Curve<f32>;
pub type Trajectory64 = Trajectory<f64>;
pub type Trajectory32 = Trajectory<f32>;
