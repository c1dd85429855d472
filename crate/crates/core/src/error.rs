use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A configuration value violates its invariant. `field` is the dotted
    /// path of the offending key, e.g. `controller.lowlim_m`.
    #[error("invalid `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A runtime input violates an operation precondition.
    #[error("invalid input: {0}")]
    Input(String),

    /// Pixel lookup outside the depth matrix. Always a caller bug.
    #[error("pixel ({x}, {y}) is outside the {width}x{height} depth map")]
    OutOfBounds {
        x: i64,
        y: i64,
        width: usize,
        height: usize,
    },
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Prefix the field path of a config error, leaving other variants untouched.
    pub fn within(self, prefix: &str) -> Self {
        match self {
            Error::Config { field, reason } => Error::Config {
                field: format!("{prefix}.{field}"),
                reason,
            },
            other => other,
        }
    }
}
