//! Detection of a target seen by a radar both directly and through a
//! reconfigurable intelligent surface (RIS).

pub mod config;
pub mod detectors;
pub mod error;
pub mod geometry;
pub mod hermitian;
pub mod montecarlo;
pub mod ris_design;
pub mod rng;
pub mod signal_model;
pub mod special;

pub use error::{Error, Result};
