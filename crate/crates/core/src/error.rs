use std::fmt;
use std::path::PathBuf;

use thiserror::Error;

/// One violated parameter invariant. `field` is the parameter's config key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Prefixes the field with a config section, e.g. `rho` -> `model.rho`.
    pub fn within(mut self, section: &str) -> Self {
        self.field = format!("{section}.{}", self.field);
        self
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Every invariant a parameter set violates. Never empty when returned as an error.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Violations(pub Vec<Violation>);

impl Violations {
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Violation> {
        self.0.iter()
    }

    pub fn mentions(&self, field: &str) -> bool {
        self.0.iter().any(|v| v.field == field)
    }

    pub(crate) fn push(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Violation::new(field, message));
    }

    pub(crate) fn into_result(self) -> Result<(), Violations> {
        if self.0.is_empty() {
            Ok(())
        } else {
            Err(self)
        }
    }
}

impl fmt::Display for Violations {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl std::error::Error for Violations {}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(#[from] Violations),

    #[error("invalid integration config: {0}")]
    InvalidConfig(String),

    #[error("negative control {value} at t = {t}")]
    NegativeControl { t: f64, value: f64 },

    #[error("{0} does not depreciate, so its stock has no finite steady state")]
    NoSteadyState(&'static str),

    #[error("storage share s = {0} must lie in [0, 1)")]
    StorageShare(f64),

    #[error("quadrature needs at least 3 samples, got {0}")]
    TooFewSamples(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("search maximizer {x} hit the bracket boundary [{lo}, {hi}]")]
    SearchBoundary { x: f64, lo: f64, hi: f64 },

    #[error(
        "reported optima are irreconcilable: psi = {psi_base} from the first scenario, \
         {psi_tax} from the second (residual {residual})"
    )]
    Irreconcilable { psi_base: f64, psi_tax: f64, residual: f64 },

    #[error("scenario '{scenario}': {source}")]
    Scenario {
        scenario: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by bad inputs rather than by the environment.
    pub fn is_validation(&self) -> bool {
        match self {
            Error::Io { .. } => false,
            Error::Scenario { source, .. } => source.is_validation(),
            _ => true,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
