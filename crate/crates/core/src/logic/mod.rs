//! PCTL* formulae: syntax, sublogics and model checking.

pub mod ast;
pub mod check;
pub mod fragment;
pub mod parser;

pub use ast::{depth, Cmp, PathFormula, StateFormula};
pub use check::{check, path_values, sat, CheckOptions};
pub use fragment::{classify, in_fragment, normalize_depth1, FragmentTag};
pub use parser::{parse_formula, parse_path};
