pub mod error;
pub mod linalg;
pub mod lyapunov;
pub mod model;
pub mod ode;
pub mod pde;
pub mod quadrature;
pub mod scenario;
pub mod secant;
pub mod trajectory;

pub use error::{Error, Result};
