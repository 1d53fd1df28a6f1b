use std::fmt;

/// Exit status 2 for configuration and usage problems, 3 for bad input data.
#[derive(Debug)]
pub enum Failure {
    Config(String),
    Data(String),
}

impl Failure {
    pub fn config(msg: impl Into<String>) -> Self {
        Failure::Config(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Failure::Data(msg.into())
    }

    pub fn is_config(&self) -> bool {
        matches!(self, Failure::Config(_))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Data(m) => write!(f, "data error: {m}"),
        }
    }
}

impl std::error::Error for Failure {}

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

/// Exit status for an error raised anywhere in a command.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return if f.is_config() { EXIT_CONFIG } else { EXIT_DATA };
    }
    if let Some(e) = err.downcast_ref::<sweetmark::Error>() {
        return if e.is_config() { EXIT_CONFIG } else { EXIT_DATA };
    }
    EXIT_DATA
}
