pub mod banded;
pub mod cmv;
pub mod covering;
pub mod error;
pub mod harness;
pub mod poly;
pub mod polynomial;
pub mod rational;
pub mod transfer;

pub use error::{Error, Result};
