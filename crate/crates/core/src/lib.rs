//! Open symmetric inclusion process with slow reservoirs: exact simulation,
//! duality, stationary dual moments, the limiting heat equation, and the
//! experiments that tie the particle system to its continuum limit.

#![allow(clippy::needless_range_loop)]

pub mod duality;
pub mod error;
pub mod harness;
pub mod kmc;
pub mod linalg;
pub mod model;
pub mod pde;
pub mod rng;
pub mod stationary;
pub mod stats;

pub use error::{Error, Result};
pub use model::{Configuration, DualConfiguration, ModelParams, Regime};
