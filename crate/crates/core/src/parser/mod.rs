//! Surface syntax for series literals, map expressions and polynomials over
//! series, plus the matching renderers.
//!
//! Series: `3/2*t^(5/2) - t^3 + O(t^4)`. Fractional and negative exponents
//! need parentheses. Maps: `phi := (x*(1 + y^2/(x^2+y^2))^(1/4), y)`.
//! Whitespace is ignored; input is ASCII.

mod lexer;
mod map;
mod poly;
mod series;

use std::fmt;

use thiserror::Error;

pub use map::{parse_map, parse_map_with_vars, render_expr, render_map};
pub use poly::{parse_coeff_list, parse_poly};
pub use series::{parse_arc, parse_series, render_param_series, render_series, render_series_with};

pub(crate) use lexer::Cursor;

/// Byte range `[start, end)` into the parsed input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl SourceSpan {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        SourceSpan { start, end }
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("at {span}: expected {expected}, found {found}")]
    Syntax { span: SourceSpan, expected: String, found: String },
    #[error("at {span}: exponent {exp} appears twice")]
    DuplicateExponent { span: SourceSpan, exp: String },
    #[error("at {span}: unknown variable `{name}`")]
    UnknownVariable { span: SourceSpan, name: String },
    #[error("at {span}: exponents must be rational literals such as 2 or (1/4)")]
    NonRationalExponent { span: SourceSpan },
    #[error("at {span}: {what}")]
    Unsupported { span: SourceSpan, what: String },
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax { span, .. }
            | ParseError::DuplicateExponent { span, .. }
            | ParseError::UnknownVariable { span, .. }
            | ParseError::NonRationalExponent { span }
            | ParseError::Unsupported { span, .. } => *span,
        }
    }
}
