pub mod automaton;
pub mod combine;
pub mod compose;
pub mod format;
pub mod lp;
pub mod rational;
pub mod relation;
pub mod stateset;

pub use automaton::{AutomatonBuilder, Distribution, ProbAutomaton, StateId};
pub use compose::interleave;
pub use format::{parse_model, write_model};
pub use rational::Rational;
pub use relation::Relation;
pub use stateset::StateSet;
