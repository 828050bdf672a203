//! The categorical calculus: syntax tree, parser, printer and safety checker.

mod ast;
mod lexer;
mod parser;
mod print;
mod safety;

use std::fmt;

pub use ast::{
    CalculusQuery, Formula, Quantifier, RangeExpr, RangeTerm, RelationshipMembership, Term, TreeAxis,
};
pub use parser::{parse, parse_formula, KEYWORDS};
pub use print::quote_ident;
pub use safety::check_safety;

/// A syntax error at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    /// The offending source line followed by a caret under the column.
    pub fn caret(&self, src: &str) -> String {
        let line = src.lines().nth(self.line.saturating_sub(1)).unwrap_or("");
        format!("{line}\n{}^", " ".repeat(self.col.saturating_sub(1)))
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}
