//! Inference on the modal location of rotationally symmetric distributions
//! on the unit sphere when concentration may vanish with the sample size.

pub mod cli;
pub mod error;
pub mod geom;
pub mod io;
pub mod limits;
pub mod mc;
pub mod model;
pub mod sampling;
pub mod specfn;
pub mod stats;
pub mod zones;

pub use error::{Error, Result};
