//! Simulator, property checker and fuzzing harness for luminous mobile
//! robots gathering under synchronous and asynchronous adversaries.

pub mod algorithms;
pub mod checker;
pub mod cli;
pub mod engine;
pub mod fuzz;
pub mod geometry;
pub mod line_patterns;
pub mod model;
pub mod plot;
pub mod potentials;
pub mod rat;
