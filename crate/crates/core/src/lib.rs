//! Cone-aligned training of cost predictors for binary linear programs.
//!
//! A linear model predicts the cost vector of a binary program from features.
//! Instead of solving the program during training, each prediction is pulled
//! toward the optimal subcone of the true solution: the cone of cost vectors
//! under which that solution stays optimal for the LP relaxation.

pub mod cone;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod exec;
pub mod linalg;
pub mod losses;
pub mod problems;
pub mod projection;
pub mod seeds;
pub mod training;

pub use error::{Error, Result};
