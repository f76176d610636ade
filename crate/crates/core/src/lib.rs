//! Characteristic curves and compatibility relations of the two-dimensional
//! Euler adjoint equations, with tools to check discrete adjoint fields
//! against them.
//!
//! The algebraic modules ([`gas`], [`jacobians`], [`forms`], [`analytic`]) are
//! generic over the scalar type through [`Real`] (`f32` or `f64`); grid data,
//! tracing and integration work in `f64`. The aliases below name the `f64`
//! instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod compat;
pub mod error;
pub mod field;
pub mod forms;
pub mod gas;
pub mod identities;
pub mod jacobians;
pub mod linalg;
pub mod sampling;
pub mod scalar;
pub mod tracer;

pub use compat::{k_integrals, CompatKind, CompatReport};
pub use error::{Error, Result};
pub use field::{Adjoint2, FieldGrid, FlowField, FnField, SamplePoint};
pub use forms::{
    characteristic_directions, characteristic_residual, form_matrix, streamtrace_residuals,
};
pub use gas::{prandtl_meyer, primitive_from_conservative, riemann_invariants};
pub use jacobians::{
    characteristic_determinant, coefficient_table, coefficient_table_factored, left_eigenvectors,
};
pub use scalar::Real;
pub use tracer::{
    resample_adjoint_rates, trace, Curve, Disk, Family, Sense, Termination, TraceConfig,
};

pub type Gas = gas::GasModel<f64>;
pub type State2 = gas::ConservState2<f64>;
pub type State3 = gas::ConservState3<f64>;
pub type Primitive = gas::Primitive2<f64>;
pub type Dir = jacobians::Direction<f64>;
pub type Coeffs = jacobians::CoeffTable<f64>;
pub type CharDirs = forms::CharDirections<f64>;
pub type Rate = forms::AdjointRate<f64>;
pub type Residual = forms::FormResidual<f64>;
pub type Stripes = analytic::StripeField<f64>;
pub type StripeProfile = analytic::Profile<f64>;
