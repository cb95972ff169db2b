//! `.ham` model description files.
//!
//! ```text
//! space qubit 2
//! param g = 0.1
//! op drive = g * sp(qubit)
//! tone drive omega = 10.0
//! ```

pub mod ast;
pub mod compile;
pub mod error;
pub mod parser;
pub mod serialize;

pub use ast::{ModelSpecAst, Span};
pub use compile::compile_model;
pub use error::{CompileError, CompileErrorKind, DslError, ParseError, ParseErrorKind};
pub use parser::parse_model;
pub use serialize::serialize_model;

use crate::model::MultiToneHamiltonian;

/// Parses and compiles model text.
pub fn load_model_str(text: &str) -> Result<MultiToneHamiltonian, DslError> {
    Ok(compile_model(&parse_model(text)?)?)
}
