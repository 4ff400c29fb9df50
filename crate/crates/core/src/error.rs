use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside the allowed range {range}")]
    Range {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("cannot normalize a zero or non-finite vector ({0}, {1}, {2})")]
    ZeroVector(f64, f64, f64),

    /// A setting pair is coincident (difference direction) or antipodal
    /// (sum direction). Carries the offending angle.
    #[error("degenerate setting pair: angle {angle} rad has no well-defined direction")]
    DegeneratePair { angle: f64 },

    #[error("degenerate settings: pair {index} is {reason}")]
    DegenerateSettings { index: usize, reason: &'static str },

    #[error("vectors are linearly dependent (|triple product| = {0:e})")]
    LinearlyDependent(f64),

    #[error("angles ({0}, {1}, {2}) are not realizable by three unit vectors")]
    UnrealizableAngles(f64, f64, f64),

    #[error("no violation is possible at visibility {0} (requires V > 2/3)")]
    NoViolationPossible(f64),

    #[error("threshold visibility undefined: left-hand side at V = 1 is zero")]
    UndefinedThreshold,

    #[error("invalid outcome table: {0}")]
    Domain(String),

    #[error("invalid settings: {0}")]
    Settings(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    what: &'static str,
    value: f64,
    ok: bool,
    range: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Range { what, value, range })
    }
}
