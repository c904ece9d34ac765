pub mod error;
pub mod interp;
pub mod quad;
pub mod specfun;

pub use error::{Error, Result};
pub mod potentials;
pub mod gap_solver;
pub mod gl_coeff;
pub mod whh;
pub mod landau;
