use std::fmt;

use thiserror::Error;

use crate::lattice::Subset;

/// A position-tagged failure from one of the text parsers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    /// Byte offset into the parsed string.
    pub offset: usize,
    /// 1-based line in the enclosing model file, when known.
    pub line: Option<usize>,
    /// Dotted field path (`system.structure`, `dependence.rate.2`, ...), when known.
    pub field: Option<String>,
    pub message: String,
}

impl ParseError {
    pub fn new(offset: usize, message: impl Into<String>) -> Self {
        Self {
            offset,
            line: None,
            field: None,
            message: message.into(),
        }
    }

    pub fn at_line(mut self, line: usize) -> Self {
        self.line.get_or_insert(line);
        self
    }

    pub fn in_field(mut self, field: impl Into<String>) -> Self {
        self.field.get_or_insert_with(|| field.into());
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(line) = self.line {
            write!(f, "line {line}: ")?;
        }
        if let Some(field) = &self.field {
            write!(f, "{field}: ")?;
        }
        write!(f, "{} (at byte {})", self.message, self.offset)
    }
}

impl std::error::Error for ParseError {}

/// Why a set function fails to describe a semicoherent system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    EmptySetWorks,
    FullSetFails,
    /// `smaller ⊊ larger` with v(smaller) = 1 and v(larger) = 0.
    NotMonotone { smaller: Subset, larger: Subset },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::EmptySetWorks => write!(f, "v(empty set) = 1, expected 0"),
            Violation::FullSetFails => write!(f, "v(all components) = 0, expected 1"),
            Violation::NotMonotone { smaller, larger } => write!(
                f,
                "not monotone: v({smaller}) = 1 but v({larger}) = 0 although {smaller} is a proper subset of {larger}"
            ),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    Parse(#[from] ParseError),

    #[error("structural error: {0}")]
    Structure(String),

    #[error("{count} units exceed the exact-table limit of {max}")]
    TooManyUnits { count: usize, max: usize },

    #[error("set function is not semicoherent: {0}")]
    NotSemicoherent(Violation),

    #[error("constant nodes have no binary set-function counterpart")]
    ConstantInBinary,

    #[error("variable x{0} has no binding")]
    UnboundVariable(usize),

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("invalid model: {0}")]
    Model(String),

    #[error("oracle contract violation: {0}")]
    Oracle(String),

    #[error("quadrature missed its tolerance (achieved error bound {achieved:e})")]
    Tolerance { achieved: f64 },

    #[error("sampling failed at draw {draw}: {message}")]
    Sampling { draw: u64, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
