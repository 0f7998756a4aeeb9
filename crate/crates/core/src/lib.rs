pub mod error;
pub mod fuzz;
pub mod group;
pub mod kirillov;
pub mod matrix;
pub mod padic;
pub mod regular;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use padic::{LocalField, Scalar, Val, Q};
