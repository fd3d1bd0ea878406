use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {message}")]
    Config {
        message: String,
        key: Option<String>,
    },
    #[error("infeasible plan: {0}")]
    Infeasible(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("simulation failed: {0}")]
    Runtime(String),
}

#[derive(Debug, Serialize)]
struct Report<'a> {
    error: &'a str,
    code: i32,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    key: Option<&'a str>,
}

impl CliError {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Maps a JSON decoding failure, naming the offending key when serde
    /// reports one as missing or unknown.
    pub fn from_json(err: serde_json::Error) -> Self {
        let text = err.to_string();
        let key = ["missing field `", "unknown field `"]
            .iter()
            .find_map(|prefix| {
                let start = text.find(prefix)? + prefix.len();
                let len = text[start..].find('`')?;
                Some(text[start..start + len].to_string())
            });
        CliError::Config { message: text, key }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Runtime(_) => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config { .. } => "config",
            CliError::Infeasible(_) => "infeasible_plan",
            CliError::Io { .. } => "io",
            CliError::Runtime(_) => "runtime",
        }
    }

    /// Single-line JSON error report.
    pub fn report(&self) -> String {
        let key = match self {
            CliError::Config { key, .. } => key.as_deref(),
            _ => None,
        };
        let report = Report {
            error: self.kind(),
            code: self.exit_code(),
            message: self.to_string(),
            key,
        };
        serde_json::to_string(&report)
            .unwrap_or_else(|_| format!("{{\"error\":\"{}\"}}", self.kind()))
    }
}
