//! Exact-rational toolkit for probabilistic automata: PCTL/PCTL* fragment
//! model checking and the depth-indexed, branching and weak (bi)simulations
//! that characterize them, plus a brute-force logical oracle.

#![allow(clippy::needless_range_loop, clippy::large_enum_variant, clippy::should_implement_trait)]

pub mod error;
pub mod harness;
pub mod logic;
pub mod model;
pub mod oracle;
pub mod reach;
pub mod relations;

pub use error::{Error, Result};
