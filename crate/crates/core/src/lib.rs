pub mod alphabet;
pub mod codec;
pub mod distortion;
pub mod error;
pub mod experiment;
pub mod image;
pub mod oracle;
pub mod pareto;
pub mod search;
pub mod spheres;

pub use error::{Error, Result};
