//! Exact real computation in the Cauchy-function model.
//!
//! A real `x` is given by an approximator `n -> d` with dyadic `d` and
//! `|d - x| <= 2^-n`. On top of the exact [`Dyadic`] type this crate
//! provides C² integrands with certified derivative bounds, a streaming
//! trapezoidal integrator whose result is within `2^-n` of `∫₀ˣ f`, and
//! instrumentation that measures how the working space of that integrator
//! grows with `n`.

pub mod cf;
pub mod cli;
pub mod dyadic;
pub mod expr;
pub mod funclib;
pub mod integrator;
pub mod profiler;

pub use cf::{check_consistency, node_oracle, CauchyReal, OracleMachine};
pub use dyadic::{Decimal, Dyadic, ParseDyadicError, Rounding};
pub use funclib::{Bounds, C2Function};
pub use integrator::{
    integral_as_function, integrate_oracle, integrate_to_dyadic, make_schedule, ErrorBudget,
    Integration, PrecisionSchedule,
};
pub use profiler::{fit_space_growth, profile_integration, GrowthFit, ResourceReport};
