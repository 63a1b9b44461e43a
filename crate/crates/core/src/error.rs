use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid design: {}", .0.join("; "))]
    InvalidDesign(Vec<String>),

    #[error("singular information matrix: pivot {pivot:.3e} at column {column} is below threshold {threshold:.3e}")]
    Singular {
        column: usize,
        pivot: f64,
        threshold: f64,
    },

    #[error("enumeration needs {rows} rows, above the cap of {cap}; use the closed-form cost instead")]
    CapExceeded { rows: u128, cap: usize },

    #[error("unsupported Hadamard order {order}: {reason}")]
    UnsupportedOrder { order: usize, reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short machine-readable tag used by the command line front end.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDesign(_) => "invalid_design",
            Error::Singular { .. } => "singular",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::UnsupportedOrder { .. } => "unsupported_order",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub(crate) fn invalid_arg(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
