use thiserror::Error;

use super::ast::Span;
use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected {found}, expected {}", .expected.join(" or "))]
    Syntax { found: String, expected: Vec<String> },
    #[error("unexpected character `{0}`")]
    BadChar(char),
    #[error("malformed number `{0}`")]
    BadNumber(String),
    #[error("`{0}` is a reserved word")]
    Reserved(String),
    #[error("duplicate {namespace} name `{name}`")]
    Duplicate { namespace: &'static str, name: String },
    #[error("unknown identifier `{0}`")]
    UnknownIdentifier(String),
    #[error("unknown space `{0}`")]
    UnknownSpace(String),
    #[error("space dimension must be a positive integer")]
    BadDimension,
    #[error("frequency must be positive")]
    NonPositiveFrequency,
    #[error("frequency must be a real scalar")]
    NonRealFrequency,
    #[error("expression nesting exceeds {0} levels")]
    TooDeep(usize),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct ParseError {
    pub span: Span,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn new(span: Span, kind: ParseErrorKind) -> Self {
        Self { span, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileErrorKind {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("total dimension {dim} exceeds the cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("matrix literal must be square, found {rows} rows of lengths {lens:?}")]
    NotSquare { rows: usize, lens: Vec<usize> },
    #[error("matrix entries must be scalars")]
    NonScalarEntry,
    #[error("`{builtin}` needs a space of dimension 2, `{space}` has {dim}")]
    PauliDim { builtin: &'static str, space: String, dim: usize },
    #[error("projector index ({i}, {j}) out of range for dimension {dim}")]
    ProjIndex { i: usize, j: usize, dim: usize },
    #[error("non-finite value")]
    NonFinite,
    #[error(transparent)]
    Model(ModelError),
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{span}: {kind}")]
pub struct CompileError {
    pub span: Span,
    pub kind: CompileErrorKind,
}

impl CompileError {
    pub fn new(span: Span, kind: CompileErrorKind) -> Self {
        Self { span, kind }
    }
}

/// Parse or compile failure.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum DslError {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),
    #[error("compile error at {0}")]
    Compile(#[from] CompileError),
}
