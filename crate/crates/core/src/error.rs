use alloc::string::String;
use core::fmt;

/// Errors raised by the exact kernel.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Error {
    /// Vectors or matrices whose sizes do not agree.
    DimensionMismatch { expected: usize, found: usize },
    EmptyInput,
    /// The point set or ball spans a proper affine subspace.
    NotFullDimensional,
    OriginNotInterior,
    /// An H-representation whose region is unbounded.
    Unbounded,
    DependentBasis,
    NotSymmetric,
    /// The geometry kernel refuses dimensions above the configured cap.
    DimensionCap { dim: usize, cap: usize, vertices: usize },
    NotInjective,
    Singular,
    KernelNotProper,
    /// Two operators or arrows whose spaces do not line up.
    SpaceMismatch(&'static str),
    /// A stated hypothesis of a construction does not hold for the data.
    Hypothesis(String),
    /// A recomputed certificate disagrees with a declared class.
    CertificateMismatch(String),
    /// The γ-parameter of an arrow is below one.
    GammaBelowOne,
    NoCatalogMatch,
    /// A factoring pair does not commute with the push-out legs.
    NotCommuting(&'static str),
    /// Malformed request for an enumeration or search.
    Invalid(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::EmptyInput => f.write_str("empty input"),
            Error::NotFullDimensional => f.write_str("polytope is not full-dimensional"),
            Error::OriginNotInterior => f.write_str("origin is not an interior point"),
            Error::Unbounded => f.write_str("inequalities define an unbounded region"),
            Error::DependentBasis => f.write_str("basis vectors are linearly dependent"),
            Error::NotSymmetric => f.write_str("unit ball is not centrally symmetric"),
            Error::DimensionCap { dim, cap, vertices } => write!(
                f,
                "dimension {dim} exceeds geometry cap {cap} ({vertices} vertices)"
            ),
            Error::NotInjective => f.write_str("operator is not injective"),
            Error::Singular => f.write_str("matrix is singular"),
            Error::KernelNotProper => f.write_str("kernel is not a proper subspace"),
            Error::SpaceMismatch(what) => write!(f, "space mismatch: {what}"),
            Error::Hypothesis(what) => write!(f, "hypothesis violated: {what}"),
            Error::CertificateMismatch(what) => write!(f, "certificate mismatch: {what}"),
            Error::GammaBelowOne => f.write_str("gamma below one"),
            Error::NoCatalogMatch => f.write_str("no catalog entry matches at the requested tolerance"),
            Error::NotCommuting(what) => write!(f, "factoring pair does not commute: {what}"),
            Error::Invalid(what) => write!(f, "invalid request: {what}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
