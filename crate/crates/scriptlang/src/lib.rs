//! LabScript: the array language every exercise script is written in.
//!
//! The crate is split along the usual pipeline: [`lexer`] turns source into
//! tokens, [`parser`] builds a [`Program`], and [`interp`] runs it against a
//! [`Registry`] of builtins under a set of [`ExecLimits`]. Everything a script
//! leaves behind is captured in an [`ExecOutcome`]: the final [`Workspace`],
//! the figures it drew and whatever it printed.

pub mod ast;
pub mod error;
pub mod figure;
pub mod interp;
pub mod lexer;
pub mod parser;
pub mod registry;
pub mod stdlib;
pub mod value;

pub use ast::{Expr, ExprKind, Ident, Program, Stmt, StmtKind};
pub use error::{ErrorKind, Position, ScriptError};
pub use figure::{Curve, FigureData, Figures};
pub use interp::{execute, ExecLimits, ExecOutcome, ExecStatus, Interpreter};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_source};
pub use registry::{Arity, Builtin, BuiltinError, CallContext, FnBuiltin, Registry, RegistryError};
pub use value::{Value, Workspace};

/// Prefix of the names only builtins and drivers may write.
pub const RESERVED_PREFIX: &str = "__";

/// Maximum nesting depth of list values.
pub const MAX_LIST_DEPTH: usize = 8;

/// Returns true when `name` lives in the reserved grader namespace.
pub fn is_reserved(name: &str) -> bool {
    name.starts_with(RESERVED_PREFIX)
}

/// Lexically valid identifier: a letter or underscore followed by letters,
/// digits and underscores.
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && lexer::keyword(name).is_none()
}
