//! Fixture corpus, random automata and the property suites.

pub mod fixtures;
pub mod generate;
pub mod report;
pub mod suites;
pub mod taxonomy;
