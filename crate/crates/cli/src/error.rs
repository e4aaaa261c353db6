use std::fmt;

/// Bad flags, unknown presets, unreadable inputs. Exit code 1.
#[derive(Debug)]
pub struct UsageError(pub String);

/// A run that hit a numerical failure such as a singular matrix. Exit code 2.
#[derive(Debug)]
pub struct NumericalError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for NumericalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
impl std::error::Error for NumericalError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Maps an error chain to the process exit code.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    if err.chain().any(|e| e.is::<NumericalError>()) {
        2
    } else {
        1
    }
}
