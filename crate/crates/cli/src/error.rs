use std::path::PathBuf;

use gqms_core::ValidationReport;
use serde_json::{json, Value};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("file not found: {}", .0.display())]
    FileNotFound(PathBuf),

    #[error("cannot parse {}: {message}", path.display())]
    Parse { path: PathBuf, message: String },

    #[error("model failed validation: {}", summary(.0))]
    Validation(ValidationReport),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid arguments: {0}")]
    Usage(String),

    #[error("M' from ker C (dim {kerc}) and from the commutator span (dim {span}) disagree")]
    CrosscheckMismatch { kerc: usize, span: usize },

    #[error("{failures} of {models} random models disagree, first at index {first} (seed {seed})")]
    RandomCrosscheckMismatch { failures: usize, models: usize, first: usize, seed: u64 },

    #[error(transparent)]
    Core(gqms_core::Error),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl From<gqms_core::Error> for CliError {
    fn from(e: gqms_core::Error) -> Self {
        match e {
            gqms_core::Error::Unsupported(msg) => CliError::Unsupported(msg),
            other => CliError::Core(other),
        }
    }
}

fn summary(r: &ValidationReport) -> String {
    r.failures.iter().map(|f| f.to_string()).collect::<Vec<_>>().join("; ")
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::FileNotFound(_) => "FileNotFound",
            CliError::Parse { .. } => "ParseError",
            CliError::Validation(_) => "ValidationFailed",
            CliError::Unsupported(_) => "Unsupported",
            CliError::Usage(_) => "UsageError",
            CliError::CrosscheckMismatch { .. } | CliError::RandomCrosscheckMismatch { .. } => "CrosscheckMismatch",
            CliError::Core(_) => "ComputationFailed",
            CliError::Io(_) => "IoError",
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::FileNotFound(_) => 2,
            CliError::Parse { .. } => 3,
            CliError::Validation(_) => 4,
            CliError::Unsupported(_) => 5,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> Value {
        let details = match self {
            CliError::FileNotFound(p) => json!({ "path": p }),
            CliError::Parse { path, .. } => json!({ "path": path }),
            CliError::Validation(r) => json!({ "failures": r.failures }),
            CliError::CrosscheckMismatch { kerc, span } => json!({ "dim_kerc": kerc, "dim_mprime": span }),
            CliError::RandomCrosscheckMismatch { failures, models, first, seed } => {
                json!({ "failures": failures, "models": models, "first": first, "seed": seed })
            }
            _ => Value::Null,
        };
        json!({
            "error": {
                "kind": self.kind(),
                "message": self.to_string(),
                "exit_code": self.exit_code(),
                "details": details,
            }
        })
    }
}

/// Classifies a load failure of `path`.
pub fn load_error(path: &std::path::Path, e: gqms_core::Error) -> CliError {
    match e {
        gqms_core::Error::Io(io) if io.kind() == std::io::ErrorKind::NotFound => CliError::FileNotFound(path.to_path_buf()),
        gqms_core::Error::Io(io) => CliError::Io(io),
        gqms_core::Error::Unsupported(msg) => CliError::Unsupported(msg),
        other => CliError::Parse {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    }
}
