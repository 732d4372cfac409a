//! Cyclic system types, the nonlinearity catalog and condition checkers.

mod conditions;
pub mod presets;
mod scalar_fn;
mod system;

pub use conditions::{
    check_compartmental, check_conditions, check_conditions_on, check_flux, Condition,
    ConditionOptions, ConditionReport, Interval, Violation,
};
pub use presets::{mapk_gains, MapkParams};
pub use scalar_fn::{sat, ScalarFn, Table, ANTIDERIVATIVE_TOL};
pub use system::{CompartmentalSystem, GainVector, LinearCyclicSystem, NonlinearCyclicSystem};
