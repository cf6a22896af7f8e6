use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("modulus not irreducible: {0}")]
    ReducibleModulus(String),
    #[error("invalid modulus: {0}")]
    InvalidModulus(String),
    #[error("field too large: {p}^{degree} elements does not fit in 64 bits")]
    FieldTooLarge { p: u64, degree: usize },
    #[error("operands belong to different rings")]
    MixedRings,
    #[error("division by zero")]
    DivisionByZero,
    #[error("{q} is not a power of the characteristic {p}")]
    NotCharacteristicPower { p: u64, q: u64 },
    #[error("not right-divisible in A{{tau}}: leading coefficient {0} is not a unit")]
    NotRightDivisible(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("coefficient outside the carrier field")]
    CoefficientOutsideField,
    #[error("moduli are not pairwise coprime")]
    NonCoprimeModuli,
    #[error("polynomial {0} is not a monic irreducible")]
    NotPrimeIdeal(String),
    #[error("parse error in {input:?}: {reason}")]
    Parse { input: String, reason: String },
    #[error("invalid Drinfeld module: {0}")]
    InvalidModule(String),
    #[error("bad prime {0}: reduction does not preserve the rank")]
    BadPrime(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("points are A-linearly dependent: {0}")]
    DependentPoints(String),
    #[error("invariant violation: {0}")]
    InvariantViolation(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    pub(crate) fn parse(input: &str, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.into(),
            reason: reason.into(),
        }
    }
}
