//! Independent numerical references: exact propagation, propagation under
//! effective generators, and nested quadrature of the builder integrals.
//!
//! Nothing here touches the tone algebra; the only input is pointwise
//! evaluation of `H_I(t)` (or of a series, for [`propagate_series`]).

pub mod nested;
pub mod propagate;
pub mod quadrature;

pub use nested::{quad_oracle, OracleError};
pub use propagate::{default_steps, fidelity_distance, propagate_exact, propagate_series, PropagationResult};
