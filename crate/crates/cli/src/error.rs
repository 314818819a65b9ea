//! Failure records and exit codes.

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PARAMS: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_DATA: i32 = 5;
pub const EXIT_COMPUTE: i32 = 6;

/// Written to stderr as one JSON line.
#[derive(Debug, Serialize)]
pub struct ErrorRecord {
    pub code: String,
    pub message: String,
    pub context: Value,
}

#[derive(Debug)]
pub struct CliError {
    pub exit: i32,
    pub record: ErrorRecord,
}

pub type CliResult<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn new(exit: i32, code: &str, message: impl Into<String>) -> Self {
        Self {
            exit,
            record: ErrorRecord {
                code: code.to_string(),
                message: message.into(),
                context: Value::Object(Default::default()),
            },
        }
    }

    pub fn params(message: impl Into<String>) -> Self {
        Self::new(EXIT_PARAMS, "invalid_parameter", message)
    }

    pub fn io(path: &Path, err: std::io::Error) -> Self {
        Self::new(EXIT_IO, "io", err.to_string()).with("path", path.display().to_string())
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        if let Value::Object(map) = &mut self.record.context {
            map.insert(key.to_string(), value.into());
        }
        self
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&self.record).unwrap_or_else(|_| {
            json!({"code": "internal", "message": "unserializable error", "context": {}}).to_string()
        })
    }
}

impl From<edr_core::Error> for CliError {
    fn from(err: edr_core::Error) -> Self {
        use edr_core::Error as E;
        let exit = match &err {
            E::Io { .. } => EXIT_IO,
            E::Domain(_) => EXIT_PARAMS,
            E::Parse { .. } | E::Ordering { .. } | E::Alignment(_) | E::InsufficientData { .. } | E::EmptyResult(_) => {
                EXIT_DATA
            }
            _ => EXIT_COMPUTE,
        };
        let out = Self::new(exit, err.code(), err.to_string());
        match &err {
            E::Io { path, .. } => out.with("path", path.display().to_string()),
            E::Parse { line, .. } | E::Ordering { line, .. } => out.with("line", *line),
            _ => out,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn core_errors_map_to_distinct_exits() {
        let parse: CliError = edr_core::Error::Parse {
            line: 4,
            message: "x".into(),
        }
        .into();
        assert_eq!(parse.exit, EXIT_DATA);
        assert_eq!(parse.record.context["line"], 4);
        let solve: CliError = edr_core::Error::NoRealSolution("x".into()).into();
        assert_eq!(solve.exit, EXIT_COMPUTE);
        assert_eq!(solve.record.code, "no_real_solution");
        let line = CliError::params("bad").with("command", "rnc").to_json_line();
        let v: Value = serde_json::from_str(&line).unwrap();
        assert_eq!(v["code"], "invalid_parameter");
        assert_eq!(v["context"]["command"], "rnc");
    }
}
