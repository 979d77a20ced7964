//! Optimistic no-regret learning in games, with numeric certificates for
//! path lengths, regret, potential monotonicity and spectral stability.

pub mod bspp;
pub mod builtins;
pub mod classes;
pub mod continuous;
pub mod error;
pub mod fisher;
pub mod game;
pub mod io;
pub mod learners;
pub mod metrics;
pub mod par;
pub mod potential;
pub mod regularizers;

pub use error::{Error, Result};
