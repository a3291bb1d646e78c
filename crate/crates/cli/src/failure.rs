use std::fmt;

/// An error paired with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

pub const USAGE: u8 = 1;
pub const DATA: u8 = 2;
pub const NUMERIC: u8 = 3;

pub type CmdResult<T = ()> = Result<T, Failure>;

impl Failure {
    pub fn usage(msg: impl fmt::Display) -> Self {
        Failure {
            code: USAGE,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn data(error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code: DATA,
            error: error.into(),
        }
    }
}

impl From<jrme::Error> for Failure {
    fn from(e: jrme::Error) -> Self {
        let code = match e {
            jrme::Error::Config(_) => USAGE,
            jrme::Error::NonFinite { .. } => NUMERIC,
            _ => DATA,
        };
        Failure { code, error: e.into() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::data(e)
    }
}

/// Attaches context to any error convertible to a [`Failure`], keeping its code.
pub trait Context<T> {
    fn context(self, msg: impl fmt::Display) -> CmdResult<T>;
}

impl<T, E: Into<Failure>> Context<T> for Result<T, E> {
    fn context(self, msg: impl fmt::Display) -> CmdResult<T> {
        self.map_err(|e| {
            let f: Failure = e.into();
            Failure {
                code: f.code,
                error: f.error.context(msg.to_string()),
            }
        })
    }
}
