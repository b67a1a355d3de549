pub mod dsp;
pub mod error;
pub mod frameio;
pub mod geometry;
pub mod mrc;
pub mod pipeline;
pub mod roi;
pub mod seeds;
pub mod simulator;
pub mod tracking;
pub mod vitals;

pub use error::{Error, Result};
