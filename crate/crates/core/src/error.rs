//! Crate-wide error type.
//!
//! Every fallible operation reports through [`Error`]. A series that is
//! zero to working precision is a distinct state, not a valuation of
//! infinity; callers that hit [`Error::NonzeroUndetectable`] must either
//! treat the value as zero on purpose or retry at higher precision.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Named reason a tower spec was rejected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SpecViolation {
    /// v(beta) = -b requires b > 0 and gcd(b, p) = 1.
    GcdViolated { b: i64, p: u64 },
    /// beta must have strictly negative valuation.
    BetaValuation { v: i64 },
    /// omega_0 must be exactly 1.
    OmegaZeroNotOne,
    /// v(omega_n) <= ... <= v(omega_1) <= v(omega_0) = 0 violated at index i.
    OmegaOrdering { i: usize },
    /// Leading residues of an equal-valuation run are F_p-dependent.
    FpDependence { run_start: usize, run_end: usize },
    /// epsilon_0 must be zero.
    EpsilonZeroNonzero,
    /// epsilon_i must satisfy v(eps_i) > v(phi^n(omega_i) beta).
    EpsilonTooLarge { i: usize, v: i64, min_allowed: i64 },
    /// Error term bound violated at index i (the tower is outside the
    /// supported class).
    BoundViolated { i: usize },
}

impl std::fmt::Display for SpecViolation {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpecViolation::GcdViolated { b, p } => {
                write!(fm, "gcd(b, p) != 1 or b <= 0: b = {b}, p = {p}")
            }
            SpecViolation::BetaValuation { v } => {
                write!(fm, "v(beta) must be negative, got {v}")
            }
            SpecViolation::OmegaZeroNotOne => write!(fm, "omega_0 != 1"),
            SpecViolation::OmegaOrdering { i } => {
                write!(fm, "omega ordering violated at index {i}")
            }
            SpecViolation::FpDependence { run_start, run_end } => write!(
                fm,
                "F_p-dependence among leading residues of omegas {run_start}..={run_end}"
            ),
            SpecViolation::EpsilonZeroNonzero => write!(fm, "epsilon_0 != 0"),
            SpecViolation::EpsilonTooLarge { i, v, min_allowed } => write!(
                fm,
                "v(epsilon_{i}) = {v} must exceed v(phi^n(omega_{i}) beta) = {min_allowed}"
            ),
            SpecViolation::BoundViolated { i } => {
                write!(fm, "error bound violated at index {i}")
            }
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum Error {
    /// All stored coefficients are zero: the value is zero to working
    /// precision and its valuation cannot be certified. Retry with at
    /// least the suggested precision if a nonzero value was expected.
    #[error("zero to working precision (abs precision {precision}); retry with precision >= {}",
            suggested_retry(*.precision))]
    NonzeroUndetectable { precision: i64 },

    #[error("division by a series that is zero to working precision")]
    DivisionByZero,

    /// x^p - x = c has no root (absolute trace of c is nonzero).
    #[error("x^p - x = c has no solution in F_q")]
    NoSolution,

    #[error("invalid tower spec: {0}")]
    InvalidSpec(SpecViolation),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precision loss: {0}")]
    PrecisionLoss(String),

    /// A valuation identity that must hold at every recursion step failed.
    #[error("{check} check failed at (i, j) = ({i}, {j}): {detail}")]
    LemmaViolation {
        check: &'static str,
        i: usize,
        j: usize,
        detail: String,
    },

    /// (sigma_i - 1) X_j^{(j)} was expected to be a base-field constant
    /// equal to the matching inverse-matrix entry.
    #[error("group action on X_{j}^{{({j})}} by sigma_{i} is not the expected constant: {detail}")]
    AssumptionFailed { i: usize, j: usize, detail: String },

    /// A scaffold row valuation disagreed with the norm oracle.
    #[error("valuation mismatch at a = {a:?}: predicted {expected}, oracle measured {got}")]
    Mismatch { a: Vec<u8>, expected: i64, got: i64 },

    #[error("group algebra element is not a 1-unit")]
    NotOneUnit,

    #[error("identity check failed: {0}")]
    IdentityFailed(String),
}

fn suggested_retry(prec: i64) -> i64 {
    prec.saturating_mul(2).max(64)
}

impl Error {
    /// Short machine-readable code, stable across releases.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonzeroUndetectable { .. } => "NonzeroUndetectable",
            Error::DivisionByZero => "DivisionByZero",
            Error::NoSolution => "NoSolution",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidInput(_) => "InvalidInput",
            Error::PrecisionLoss(_) => "PrecisionLoss",
            Error::LemmaViolation { .. } => "LemmaViolation",
            Error::AssumptionFailed { .. } => "AssumptionFailed",
            Error::Mismatch { .. } => "Mismatch",
            Error::NotOneUnit => "NotOneUnit",
            Error::IdentityFailed(_) => "IdentityFailed",
        }
    }
}
