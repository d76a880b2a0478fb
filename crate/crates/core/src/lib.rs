//! Entity resolution with matching dependencies.

pub mod blocking;
pub mod chase;
pub mod classify;
pub mod fixtures;
pub mod mdlang;
pub mod merge;
pub mod pipeline;
pub mod relcore;
pub mod simlib;
