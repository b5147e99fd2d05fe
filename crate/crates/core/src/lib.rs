pub mod bench;
pub mod error;
pub mod estimators;
pub mod io;
pub mod par;
pub mod seed;
pub mod spectral;
pub mod synth;

pub use error::{Error, Result};
