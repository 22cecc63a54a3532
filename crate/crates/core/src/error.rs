use std::fmt;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Channel counts or shapes that cannot be combined.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A method precondition that the input or parameters violate.
    #[error("constraint violated: {0}")]
    Constraint(String),

    /// A query outside the domain of a function (e.g. spline span).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("format error: {0}")]
    Format(String),

    /// Accuracy-delta rows absent for the listed `(dataset, method)` pairs.
    #[error("missing accuracy rows for {}", format_pairs(.0))]
    MissingRows(Vec<(String, String)>),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(d, m)| format!("({d}, {m})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    pub(crate) fn constraint(msg: impl Into<String>) -> Self {
        Error::Constraint(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn dimension(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}

/// Non-fatal conditions reported alongside a result.
#[derive(Debug, Clone, PartialEq)]
pub enum Warning {
    /// The training split has a single distinct value, so min-max scaling maps everything to 0.
    DegenerateRange { value: f64 },
    /// A mixing method had no partner in the class and copied the reference instead.
    SingletonClass { index: usize, class: usize },
    /// A class with fewer than two members contributes no within-class variance.
    SmallClass { class: usize, size: usize },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DegenerateRange { value } => {
                write!(f, "training values are constant ({value}); normalized to 0")
            }
            Warning::SingletonClass { index, class } => write!(
                f,
                "pattern {index}: class {class} has no other member, copied unchanged"
            ),
            Warning::SmallClass { class, size } => write!(
                f,
                "class {class} has {size} pattern(s); contributes 0 to intra-class variance"
            ),
        }
    }
}
