pub mod analytic;
pub mod engine;
pub mod error;
pub mod modes;
pub mod units;
pub use error::{Error, Result};
