pub mod constants;
pub mod csl;
pub mod dynamics;
pub mod error;
pub mod estimation;
pub mod hybrid;
pub mod quadrature;
pub mod squeezing;
pub mod sweep;
pub mod symplectic;

pub use error::{Error, Result};
