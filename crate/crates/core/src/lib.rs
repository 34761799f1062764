//! Non-intersecting Brownian bridge ensembles and their lattice walk
//! approximations.

pub mod avoid;
pub mod bridge;
pub mod cli;
pub mod config;
pub mod domain;
pub mod error;
pub mod glauber;
pub mod rng;
pub mod special;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
