use std::fmt;

use serde::{Deserialize, Serialize};

/// 1-based line/column of a token in the source text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Position {
    pub line: u32,
    pub col: u32,
}

impl Position {
    pub fn new(line: u32, col: u32) -> Self {
        Self { line, col }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Lexical,
    Syntax,
    UndefinedIdentifier,
    Index,
    Shape,
    Type,
    UnknownFunction,
    Builtin,
    ReservedName,
    ResourceExceeded,
}

/// Any failure raised while tokenizing, parsing or running a script.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, thiserror::Error)]
pub struct ScriptError {
    pub kind: ErrorKind,
    pub message: String,
    pub pos: Option<Position>,
}

impl ScriptError {
    pub fn new(kind: ErrorKind, message: impl Into<String>, pos: Option<Position>) -> Self {
        Self {
            kind,
            message: message.into(),
            pos,
        }
    }

    pub fn at(kind: ErrorKind, message: impl Into<String>, pos: Position) -> Self {
        Self::new(kind, message, Some(pos))
    }

    /// Attach a position if the error does not carry one yet.
    pub fn or_at(mut self, pos: Position) -> Self {
        if self.pos.is_none() {
            self.pos = Some(pos);
        }
        self
    }

    pub fn is_resource(&self) -> bool {
        self.kind == ErrorKind::ResourceExceeded
    }
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            ErrorKind::Lexical => "Lexical error",
            ErrorKind::Syntax => "Syntax error",
            ErrorKind::ResourceExceeded => "Resource limit exceeded",
            _ => "Error",
        };
        match self.pos {
            Some(pos) => write!(f, "{label} at {pos}: {}", self.message),
            None => write!(f, "{label}: {}", self.message),
        }
    }
}
