pub mod curve;
pub mod deriv;
pub mod error;
pub mod infoquant;
pub mod quadrature;
pub mod specfun;
pub mod spectra;
pub mod thermo;
pub mod wigner;

pub use error::{Error, Result};
