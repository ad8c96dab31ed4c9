//! A small text language for describing experiment scenarios.
//!
//! A scenario document is a sequence of lines. Each line either binds a name
//! to a value or schedules an experiment with `run`:
//!
//! ```text
//! A = arith(0,3)
//! f = assign(K=2, free=~A, fix{}, tail=periodic("0"))
//! F = parity{0..3}
//! run irrelevance(F, A, f)
//! ```
//!
//! Values cover coalition descriptions (`finite`, `arith`, `geom`,
//! `periodic`, and the `~ | &` operators), partial assignments (`assign`),
//! choice functions (`dictator`, `parity`, `majority`, `table`), utility
//! streams (`stream`), tree oracles (`identity`, `factor`, `ones`, `fixed`)
//! and coalition families (`Dplus`, `infinite`, `cosingleton`, `cofinite`).
//! Names must be bound before they are used and cannot be rebound.
//!
//! [`parse`] turns text into a [`ScenarioDoc`], reporting the first problem
//! with its line, column and the set of tokens that would have been accepted.
//! [`ScenarioDoc::print`] renders the document back in a canonical spelling;
//! parsing canonical text reproduces the document exactly, and printing a
//! freshly parsed document is already canonical. [`resolve`] then builds the
//! concrete values and typed experiment requests behind the names.

mod ast;
mod parse;
mod resolve;
mod token;

pub use ast::{coalition_text, Binding, Directive, Expr, Item, ScenarioDoc};
pub use parse::{parse, parse_coalition_text};
pub use resolve::{resolve, ResolvedDoc, ResolvedRun, RunSpec, Value};
pub use token::{lex_line, Token, TokenKind};

use thiserror::Error;

/// Problems found while reading or resolving a scenario document.
///
/// Lines and columns are 1-based and count characters, not bytes.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SpecError {
    #[error("line {line}, column {column}: expected {}, found {found}", render_expected(expected))]
    Parse {
        line: usize,
        column: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("line {line}: the name '{name}' is already bound")]
    DuplicateName { line: usize, name: String },
    #[error("line {line}, column {column}: unknown name '{name}'")]
    UnknownName {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("line {line}: binding '{name}': {detail}")]
    Binding {
        line: usize,
        name: String,
        detail: String,
    },
    #[error("line {line}: run {op}: {detail}")]
    Directive {
        line: usize,
        op: String,
        detail: String,
    },
    #[error("inline expression: {detail}")]
    Argument { detail: String },
}

impl SpecError {
    /// Position of the error when it has one, as (line, column).
    pub fn position(&self) -> Option<(usize, usize)> {
        match self {
            SpecError::Parse { line, column, .. } | SpecError::UnknownName { line, column, .. } => {
                Some((*line, *column))
            }
            SpecError::DuplicateName { line, .. }
            | SpecError::Binding { line, .. }
            | SpecError::Directive { line, .. } => Some((*line, 1)),
            SpecError::Argument { .. } => None,
        }
    }
}

fn render_expected(expected: &[String]) -> String {
    if expected.is_empty() {
        "nothing".to_string()
    } else {
        expected.join(" or ")
    }
}
