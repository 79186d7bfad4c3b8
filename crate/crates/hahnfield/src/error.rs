use std::fmt;

/// Errors raised by field construction and series operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two series over structurally different spines were combined.
    SpineMismatch,
    /// An exponent refers to a spine index outside the spine.
    InvalidIndex(usize),
    /// Inversion or logarithmic derivative of the zero series.
    DivisionByZero,
    /// An operation that needs a leading term was given the zero series.
    ZeroSeries,
    /// `v(a)` equals the least upper bound of the log-derivative valuations,
    /// so no asymptotic integral exists.
    NoAsymptoticIntegral(String),
    /// The Rosenlicht candidate formula degenerated (constant intermediate).
    DegenerateCandidate,
    /// The pre-logarithm has no entry for a spine index in the exponent support.
    MissingPrelog(String),
    /// A coefficient-field hook (log or exp) is undefined at the given value.
    HookUndefined(String),
    /// Exponential extension would exceed the tower depth budget.
    DepthExceeded(u32),
    /// The exponential-logarithmic tower is unavailable because the field's
    /// pre-logarithm fails the series-morphism conditions.
    TowerUnavailable,
    /// Logarithm of a non-positive series.
    NotPositive,
    /// The 1-unit logarithm was fed a series of non-positive valuation.
    NotInfinitesimal,
    /// Numeric evaluation outside the germ domain (x too small) or without germs.
    GermDomain(String),
    /// Expression syntax error with a 1-based column.
    Parse { col: usize, msg: String },
    /// Malformed field configuration.
    Config(String),
    /// Operation not defined for this spine family.
    UnsupportedSpine(String),
    /// A structural invariant failed; indicates an unvalidated spec.
    Internal(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SpineMismatch => write!(f, "series over different spines"),
            Error::InvalidIndex(i) => write!(f, "spine index {i} out of range"),
            Error::DivisionByZero => write!(f, "division by zero series"),
            Error::ZeroSeries => write!(f, "zero series has no leading term"),
            Error::NoAsymptoticIntegral(w) => {
                write!(f, "no asymptotic integral: v(a) equals theta-tilde = {w}")
            }
            Error::DegenerateCandidate => {
                write!(f, "asymptotic integral candidate degenerated to a constant")
            }
            Error::MissingPrelog(t) => write!(f, "pre-logarithm undefined for {t}"),
            Error::HookUndefined(what) => write!(f, "coefficient hook undefined: {what}"),
            Error::DepthExceeded(d) => write!(f, "tower depth budget {d} exceeded"),
            Error::TowerUnavailable => write!(
                f,
                "exponential extension unavailable: pre-logarithm is not a series morphism"
            ),
            Error::NotPositive => write!(f, "logarithm of a non-positive series"),
            Error::NotInfinitesimal => {
                write!(f, "1-unit logarithm needs a series of positive valuation")
            }
            Error::GermDomain(m) => write!(f, "germ evaluation: {m}"),
            Error::Parse { col, msg } => write!(f, "syntax error at column {col}: {msg}"),
            Error::Config(m) => write!(f, "field config: {m}"),
            Error::UnsupportedSpine(m) => write!(f, "unsupported spine family: {m}"),
            Error::Internal(m) => write!(f, "internal invariant violated: {m}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
