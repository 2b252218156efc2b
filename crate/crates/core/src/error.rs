use thiserror::Error;

pub type Result<T> = std::result::Result<T, LevyError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevyError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("table profile is not non-increasing at r = {radius}")]
    NonMonotoneTable { radius: f64 },

    #[error("the Lévy integral ∫(1 ∧ |z|²) n(z) dz diverges ({0})")]
    DivergentLevyIntegral(String),

    #[error("total jump mass is finite ({total_mass}); the process is compound Poisson")]
    CompoundPoisson { total_mass: f64 },

    #[error("quadrature failed to reach tolerance: {context} (estimate {value}, error {error})")]
    QuadratureFailure {
        context: String,
        value: f64,
        error: f64,
    },

    #[error("oscillatory quadrature failed at |z| = {frequency}: {context}")]
    OscillatoryQuadratureFailure { frequency: f64, context: String },

    #[error("root bracket failure: {0}")]
    BracketFailure(String),

    #[error("direction sampling budget exhausted: {0}")]
    DirectionSamplingExhausted(String),

    #[error("scaling window too narrow: [{lo}, {hi}] spans less than one decade")]
    WindowTooNarrow { lo: f64, hi: f64 },

    #[error("integral diverges: {0}")]
    DivergentIntegral(String),

    #[error("e^(-t Re Ψ) is not integrable at t = {t} within budget: {reason}")]
    NotIntegrable { t: f64, reason: String },

    #[error("oscillation budget exceeded at x = {x}: {panels} panels")]
    OscillationBudgetExceeded { x: f64, panels: usize },

    #[error("centering mode precondition failed: {0}")]
    ModePreconditionFailed(String),

    #[error("no lower scaling estimate available: {0}")]
    ScalingUnavailable(String),

    #[error("jump budget exceeded: expected {expected:.3e} jumps, budget {budget:.3e}")]
    JumpBudgetExceeded { expected: f64, budget: f64 },

    #[error("empty grid")]
    EmptyGrid,

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("malformed input: {0}")]
    Parse(String),
}

impl From<std::io::Error> for LevyError {
    fn from(e: std::io::Error) -> Self {
        LevyError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for LevyError {
    fn from(e: serde_json::Error) -> Self {
        LevyError::Parse(e.to_string())
    }
}
