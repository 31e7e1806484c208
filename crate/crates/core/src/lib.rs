pub mod error;
pub mod numerics;
pub mod params;
pub mod bath;
pub mod couplings;
pub mod dynamics;
pub mod observables;
pub mod cli;

pub use error::{Error, Result};
