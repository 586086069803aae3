pub mod algebra;
pub mod cbmin;
pub mod conic;
pub mod cpmap;
pub mod decnorm;
pub mod error;
pub mod instance;
pub mod matrix;
pub mod multdomain;
pub mod report;
pub mod suite;
pub mod tensor;
pub mod testkit;

pub use error::{Error, Result};
