use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("threshold violated: {0}")]
    Threshold(String),

    #[error("numerical blowup at t = {time}")]
    Blowup { time: f64 },

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Bebutov fixed point could not be bracketed.
    #[error("horizon {horizon} too small to bracket the fixed point; widen the horizon")]
    WidenHorizon { horizon: f64 },

    #[error("config error at `{path}`: {msg}")]
    Config { path: String, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn threshold(msg: impl Into<String>) -> Self {
        Error::Threshold(msg.into())
    }

    /// Process exit status used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } | Error::Input(_) | Error::Io(_) => 2,
            Error::Threshold(_) | Error::Infeasible(_) => 3,
            Error::Blowup { .. } => 4,
            Error::InsufficientData(_) | Error::WidenHorizon { .. } => 1,
        }
    }
}
