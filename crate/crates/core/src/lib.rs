//! Composer and solver for orthodox forced-mate chess problems.
//!
//! The pipeline samples positions from a fixed piece set (optionally biased
//! by blended cross-domain feature vectors), proves their exact distance to
//! mate, filters them by composition conventions, ranks them with a small
//! aesthetics model and archives the survivors with full solution trees.

pub mod board;
pub mod solver;
pub mod conventions;
pub mod aesthetics;
pub mod substrate;
pub mod archive;
pub mod composer;
