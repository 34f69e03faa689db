pub mod bessel;
pub mod cli;
pub mod entropy;
pub mod error;
pub mod gamma;
pub mod meijer;
pub mod order_derivative;
pub mod quadrature;
pub mod resolvent;
pub mod series;
pub mod verify;

pub use error::{Error, Estimate, Result};
