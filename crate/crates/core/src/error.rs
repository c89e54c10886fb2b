use thiserror::Error;

/// Errors raised by the numerical modules and the command-line front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// φ is undefined when γ lies on the symmetry axis.
    #[error("self-rotation angle undefined: gamma1^2 + gamma2^2 = {0:e}")]
    VerticalState(f64),

    #[error("integrator could not satisfy tolerance {tol:e} (at t = {t})")]
    ToleranceNotMet { tol: f64, t: f64 },

    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },

    #[error("no section crossing found before t = {horizon}")]
    NoCrossingFound { horizon: f64 },

    #[error("linear system for the section momentum is singular (gamma3 = {gamma3})")]
    SingularSystem { gamma3: f64 },

    #[error("energy level {h} lies below the reduced-energy minimum {min}")]
    NoRoot { h: f64, min: f64 },

    #[error("turning point not bracketed by the gamma3 scan")]
    RootNotBracketed,

    #[error("loop sample at alpha = {alpha} could not be mapped to a torus: {reason}")]
    LoopHitsSingularity { alpha: f64, reason: String },

    #[error("winding ambiguous: gap {gap} rad remains after {inserted} refinements")]
    WindingAmbiguous { gap: f64, inserted: usize },

    #[error("{failed} of {total} reproduction checks failed")]
    ChecksFailed { failed: usize, total: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Configuration and I/O problems are user errors; everything else is numerical.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config(_) | Error::Io(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::VerticalState(_) => "VerticalStateError",
            Error::ToleranceNotMet { .. } => "ToleranceNotMet",
            Error::StepSizeUnderflow { .. } => "StepSizeUnderflow",
            Error::NoCrossingFound { .. } => "NoCrossingFound",
            Error::SingularSystem { .. } => "SingularSystem",
            Error::NoRoot { .. } => "NoRoot",
            Error::RootNotBracketed => "RootNotBracketed",
            Error::LoopHitsSingularity { .. } => "LoopHitsSingularity",
            Error::WindingAmbiguous { .. } => "WindingAmbiguous",
            Error::ChecksFailed { .. } => "ChecksFailed",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
