//! Computable pieces of the nonlocal-games story: game values over classical,
//! quantum and commuting strategies, measurement simulation, synchronous
//! tracial correlations, moment maps, and a 3-tape Turing machine.

#![allow(clippy::needless_range_loop)]

pub mod classical;
pub mod error;
pub mod game;
pub mod linalg;
pub mod moments;
pub mod protocols;
pub mod quantum;
pub mod rng;
pub mod seesaw;
pub mod synchronous;
pub mod tm;

pub use error::{Error, Result};
