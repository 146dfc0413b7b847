use serde_json::json;
use thiserror::Error;

/// Failure of a run, classified by exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numerical check `{invariant}` failed: {source}")]
    Numerical {
        invariant: &'static str,
        #[source]
        source: xxz_lindblad::Error,
    },

    #[error(transparent)]
    Core(xxz_lindblad::Error),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Output(String),
}

impl CliError {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        CliError::Io {
            context: context.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical { .. } => 3,
            _ => 1,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical { .. } => "numerical",
            CliError::Core(_) => "computation",
            CliError::Io { .. } => "io",
            CliError::Output(_) => "output",
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        if let CliError::Numerical { invariant, .. } = self {
            v["invariant"] = json!(invariant);
        }
        v
    }
}

impl From<xxz_lindblad::Error> for CliError {
    fn from(e: xxz_lindblad::Error) -> Self {
        use xxz_lindblad::Error as E;
        let invariant = match &e {
            E::Defective { .. } => "diagonalizability",
            E::EigenSolver { .. } => "eigensolver convergence",
            E::PositivityViolation { .. } => "steady-state positivity",
            E::NumericalQuality(_) => "numerical quality",
            E::Stiffness { .. } => "integrator step size",
            E::SpectrumMismatch(_) => "spectrum consistency",
            E::InvalidModel(_) | E::ResourceLimit { .. } => return CliError::Config(e.to_string()),
            _ => return CliError::Core(e),
        };
        CliError::Numerical { invariant, source: e }
    }
}
