//! The `.pdft` textual notation.
//!
//! Documents are line oriented: one statement per line (or separated by
//! `;`), `#` starts a comment. A minimal model:
//!
//! ```text
//! model demo alert min
//! dynamic f = expr "20 + 0.5 * t"
//! component C1
//!   out p8
//!   state ok priority 9
//!   state ko priority 1
//!   transition init from . to ok
//!   transition t4 from ok to ko when f > 37 do {p8}
//! ```
//!
//! Omitted transition clauses default to `when true`, `do {}`, `time 0`,
//! `prio 0`, `prob 1`; omitted event weights default to 1.

mod lexer;
mod parser;
mod serialize;

pub use serialize::{serialize_model, SerializeError};

use std::fmt;

use serde::Serialize;

use crate::model::Model;

/// 1-based position of a token in a document.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SourceSpan {
    pub line: usize,
    pub column: usize,
    pub length: usize,
}

impl SourceSpan {
    pub fn new(line: usize, column: usize, length: usize) -> Self {
        SourceSpan { line, column, length }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParseDiagnostic {
    pub severity: Severity,
    pub message: String,
    pub span: SourceSpan,
}

impl ParseDiagnostic {
    pub fn error(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseDiagnostic {
            severity: Severity::Error,
            message: message.into(),
            span,
        }
    }

    pub fn warning(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseDiagnostic {
            severity: Severity::Warning,
            message: message.into(),
            span,
        }
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}:{}: {sev}: {}", self.span.line, self.span.column, self.message)
    }
}

/// Everything the parser learned about a document. `model` is present iff
/// no diagnostic is an error.
#[derive(Debug, Clone)]
pub struct ParseOutcome {
    pub model: Option<Model>,
    pub diagnostics: Vec<ParseDiagnostic>,
}

impl ParseOutcome {
    pub fn errors(&self) -> impl Iterator<Item = &ParseDiagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }
}

/// Parses and validates a document, keeping warnings alongside the model.
pub fn parse_document(text: &str) -> ParseOutcome {
    parser::parse(text)
}

/// Parses and validates a document. On failure every diagnostic (errors
/// and warnings) is returned.
pub fn parse_model(text: &str) -> Result<Model, Vec<ParseDiagnostic>> {
    let out = parser::parse(text);
    out.model.ok_or(out.diagnostics)
}

const RESERVED: &[&str] = &[
    "model", "alert", "dynamic", "component", "state", "priority", "in", "out", "transition", "from", "to",
    "when", "do", "time", "prio", "prob", "event", "weight", "and", "or", "not", "true", "false", "all",
    "any", "expr", "poisson", "series", "consumable", "rate",
];

pub(crate) fn is_reserved(word: &str) -> bool {
    RESERVED.contains(&word)
}

/// Whether `s` can be written as a name in a document.
pub fn is_valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !is_reserved(s)
}
