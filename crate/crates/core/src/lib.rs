pub mod cli;
pub mod codec;
pub mod error;
pub mod extensions;
pub mod geoprocess;
pub mod gml;
pub mod model;
pub mod ops;
pub mod synth;
pub mod validator;

pub use error::{Error, Result};
