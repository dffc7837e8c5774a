//! Exit-code classification.

use std::fmt;

/// Exit code for bad flags, unreadable configs and missing input paths.
pub const EXIT_USAGE: u8 = 1;
/// Exit code for corrupt or inconsistent data found while working.
pub const EXIT_DATA: u8 = 2;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

pub type CliResult<T> = Result<T, Failure>;

pub fn usage(msg: impl fmt::Display) -> Failure {
    Failure {
        code: EXIT_USAGE,
        error: anyhow::anyhow!("{msg}"),
    }
}

pub fn data(msg: impl fmt::Display) -> Failure {
    Failure {
        code: EXIT_DATA,
        error: anyhow::anyhow!("{msg}"),
    }
}

/// Attach an exit code and context to any error.
pub trait Classify<T> {
    fn usage_err(self, ctx: impl fmt::Display) -> CliResult<T>;
    fn data_err(self, ctx: impl fmt::Display) -> CliResult<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn usage_err(self, ctx: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| Failure {
            code: EXIT_USAGE,
            error: e.into().context(ctx.to_string()),
        })
    }

    fn data_err(self, ctx: impl fmt::Display) -> CliResult<T> {
        self.map_err(|e| Failure {
            code: EXIT_DATA,
            error: e.into().context(ctx.to_string()),
        })
    }
}
