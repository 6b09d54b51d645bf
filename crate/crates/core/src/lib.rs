//! Ruin asymptotics, limiting overshoot and undershoot laws, and a Monte Carlo
//! first-passage simulator for spectrally positive Lévy risk processes whose ascending
//! ladder height is a killed tempered stable subordinator with drift (the GTSC class).

pub mod cli;
pub mod error;
pub mod laws;
pub mod model;
pub mod simulator;
pub mod special_functions;
pub mod verify;

pub use error::{Error, Result};
