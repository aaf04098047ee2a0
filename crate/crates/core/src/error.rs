use thiserror::Error;

/// Errors raised by the library. Every variant carries enough context to name
/// the offending argument.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u32),
    #[error("unsupported parameters: {0}")]
    Unsupported(String),
    #[error("modulus {0} is reducible")]
    ReducibleModulus(String),
    #[error("syntax error at offset {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("element is zero or its leading term is not known: {0}")]
    ZeroOrUnknownLeadingTerm(String),
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("operands live over different fields")]
    SpecMismatch,
    #[error("element has negative valuation")]
    NegativeValuation,
    #[error("coefficient ring has p-torsion")]
    TorsionRing,
    #[error("Witt vector lengths differ or exceed the supported maximum")]
    LengthMismatch,
    #[error("Witt vector does not live over the residue ring of the target")]
    ResidueMismatch,
    #[error("Cartier iteration did not stabilize inside the window")]
    NonConvergence,
    #[error("symbol entry {0} is zero")]
    ZeroEntry(usize),
    #[error("degree mismatch: expected {expected}, got {got}")]
    DegreeMismatch { expected: usize, got: usize },
    #[error("not a class: {0}")]
    NotAClass(String),
    #[error("entry {0} is not a unit")]
    NonUnitEntry(usize),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("parameter lies in the Artin-Schreier image; extension is trivial")]
    TrivialExtension,
    #[error("only symbols with a single entry from the extension are supported")]
    MultipleLEntries,
    #[error("hypothesis violated: {0}")]
    HypothesisViolation(String),
    #[error("quotient too large to enumerate: {0} elements")]
    TooLarge(u128),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("malformed JSON input: {0}")]
    Json(String),
}

impl Error {
    pub fn precision(what: impl Into<String>) -> Self {
        Error::PrecisionExhausted(what.into())
    }

    pub fn is_precision(&self) -> bool {
        matches!(self, Error::PrecisionExhausted(_) | Error::NonConvergence)
    }
}

pub type Result<T> = std::result::Result<T, Error>;
