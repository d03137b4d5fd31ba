use std::fmt;

pub const PLACEMENT_FAILED: u8 = 2;
pub const MALFORMED_INPUT: u8 = 3;
pub const EMPTY_DATASET: u8 = 4;
pub const FEATURE_MISMATCH: u8 = 5;

/// Marks an error with the process exit code it should produce.
#[derive(Debug)]
pub struct Coded {
    pub code: u8,
    pub what: String,
}

impl fmt::Display for Coded {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.what)
    }
}

pub trait OrExit<T> {
    fn or_exit(self, code: u8, what: impl Into<String>) -> anyhow::Result<T>;
}

impl<T, E: Into<anyhow::Error>> OrExit<T> for Result<T, E> {
    fn or_exit(self, code: u8, what: impl Into<String>) -> anyhow::Result<T> {
        self.map_err(|e| {
            e.into().context(Coded {
                code,
                what: what.into(),
            })
        })
    }
}

pub fn coded(code: u8, what: impl Into<String>) -> anyhow::Error {
    anyhow::Error::msg(Coded {
        code,
        what: what.into(),
    })
}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    err.downcast_ref::<Coded>().map_or(1, |c| c.code)
}
