use thiserror::Error;

/// Failures surfaced by the command line, each with its exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("input error: {0}")]
    Input(String),
    #[error("constraint violation:\n{}", .0.join("\n"))]
    Constraint(Vec<String>),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io(_) => 2,
            CliError::Constraint(_) => 3,
            CliError::Certification(_) => 4,
        }
    }
}

impl From<quarklet_core::Error> for CliError {
    fn from(e: quarklet_core::Error) -> Self {
        use quarklet_core::Error as E;
        match e {
            E::InvalidOrder { .. }
            | E::UnsupportedOrder { .. }
            | E::InvalidDelta(_)
            | E::LevelTooCoarse { .. }
            | E::BoundTooLarge { .. } => CliError::Input(e.to_string()),
            other => CliError::Constraint(vec![other.to_string()]),
        }
    }
}
