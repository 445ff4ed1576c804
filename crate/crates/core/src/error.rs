use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("term of degree {degree} at byte {pos}; every term must have total degree 3")]
    Degree { pos: usize, degree: u32 },
    #[error("the zero form does not define a curve")]
    ZeroForm,
    #[error("coefficient out of range: {0}")]
    Overflow(String),
    #[error("curve is singular{}", witness_suffix(.0))]
    Singular(Option<String>),
    #[error("prime {0} is a prime of bad reduction")]
    BadPrime(u64),
    #[error("point {0} is not on the curve")]
    NotOnCurve(String),
    #[error("generators are dependent (regulator determinant {0:e})")]
    Dependent(f64),
    #[error("generator {0} is a torsion point")]
    TorsionGenerator(String),
    #[error("torsion list is not closed under the group law: {0}")]
    TorsionNotClosed(String),
    #[error("point {0} is not in the span of the Mordell-Weil basis")]
    NotInSpan(String),
    #[error("canonical height did not converge: {0}")]
    NonConvergence(String),
    #[error("(a, b, m) = ({a}, {b}, {m}) violates 1/a + m^2/b < 3")]
    Inadmissible { a: u32, b: u32, m: u32 },
    #[error("evaluation rank {found} != expected dimension {expected} after {attempts} primes")]
    RankDeficient { found: usize, expected: usize, attempts: usize },
    #[error("matrix has full column rank {0}; no auxiliary form exists")]
    NoAuxiliaryForm(usize),
    #[error("pair is not on X_R: {0}")]
    NotOnDescentCurve(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error("{0}")]
    Format(String),
}

fn witness_suffix(w: &Option<String>) -> String {
    match w {
        Some(s) => format!(" ({s})"),
        None => String::new(),
    }
}
