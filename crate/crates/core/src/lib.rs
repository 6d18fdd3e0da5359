//! Engine for the online labeling (file maintenance) game.
//!
//! An adversary feeds keys one at a time, an algorithm keeps them stored in
//! sorted order inside an array of `m` cells, and every (re)placement of a
//! key costs one unit. The crate provides the game loop and cost accounting,
//! the segment-table adversary with its auditor, and several labeling
//! algorithms to play against it.

pub mod adversary;
pub mod algorithms;
pub mod cell;
pub mod error;
pub mod game;
pub mod rng;
pub mod segment;

pub use cell::CellIndex;
pub use error::GameError;
pub use game::{Configuration, GameConfig, Key, StepTrace};
