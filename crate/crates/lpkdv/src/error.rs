use thiserror::Error;

/// Crate-wide error type. Every variant carries enough context to print a
/// single-line diagnostic; `code()` gives a stable machine-parsable tag.
#[derive(Debug, Error)]
pub enum Error {
    #[error("corner-solve denominator below tolerance at cell ({n},{m})")]
    SingularQuad { n: i64, m: i64 },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("prolonged defects not proportional across the window (spread {spread:.6e})")]
    RatioNotConstant { spread: f64 },

    #[error("weight w={0} invalid for this master-symmetry variant")]
    InvalidW(f64),

    #[error("no decay at the +n edge: {0}")]
    NoDecay(String),

    #[error("reflection evolution factor has a pole at kappa0 = |q|")]
    PoleAtQ,

    #[error("floating-point overflow in {0}")]
    Overflow(String),

    #[error("vanishing difference: {0}")]
    ZeroDifference(String),

    #[error("alternate-row step denominator vanished at n={n}")]
    SingularStep { n: i64 },

    #[error("staircase seed refinement failed, best residual {residual:.6e}")]
    NewtonFailure { residual: f64 },

    #[error("p+q must be positive for the similarity map, got {0}")]
    NegativePQSum(f64),

    #[error("lattice site ({n},{m}) outside the stored window")]
    OutOfWindow { n: i64, m: i64 },

    #[error("potential denominator below tolerance at cell ({n},{m})")]
    DivergentDenominator { n: i64, m: i64 },

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("degenerate spec: {0}")]
    Degenerate(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable identifier for scripted consumers of stderr.
    pub fn code(&self) -> &'static str {
        match self {
            Error::SingularQuad { .. } => "SINGULAR_QUAD",
            Error::WindowTooSmall(_) => "WINDOW_TOO_SMALL",
            Error::RatioNotConstant { .. } => "RATIO_NOT_CONSTANT",
            Error::InvalidW(_) => "INVALID_W",
            Error::NoDecay(_) => "NO_DECAY",
            Error::PoleAtQ => "POLE_AT_Q",
            Error::Overflow(_) => "OVERFLOW",
            Error::ZeroDifference(_) => "ZERO_DIFFERENCE",
            Error::SingularStep { .. } => "SINGULAR_STEP",
            Error::NewtonFailure { .. } => "NEWTON_FAILURE",
            Error::NegativePQSum(_) => "NEGATIVE_PQ_SUM",
            Error::OutOfWindow { .. } => "OUT_OF_WINDOW",
            Error::DivergentDenominator { .. } => "DIVERGENT_DENOMINATOR",
            Error::InvalidSpec(_) => "INVALID_SPEC",
            Error::InvalidParams(_) => "INVALID_PARAMS",
            Error::Degenerate(_) => "DEGENERATE",
            Error::Io(_) => "IO",
            Error::Parse(_) => "PARSE",
        }
    }

    /// Process exit status: 2 for I/O and parse failures, 1 for module errors.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Io(_) | Error::Parse(_) => 2,
            _ => 1,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
