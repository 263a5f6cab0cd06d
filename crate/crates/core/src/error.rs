use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq)]
#[non_exhaustive]
pub enum Error {
    /// Operands live on different numbers of generators.
    RankMismatch {
        left: usize,
        right: usize,
    },
    OrbitalOutOfRange {
        index: usize,
        modes: usize,
    },
    EmptyCombination,
    /// A dense Fock-space or Gram construction would exceed its size cap.
    ResourceLimit {
        what: &'static str,
        size: usize,
        cap: usize,
    },
    NotHermitian {
        defect: f64,
    },
    /// The operator has terms of degree above four.
    NotTwoBody {
        degree: u32,
    },
    /// A target term lies outside the span reachable from the Gram basis.
    Unrepresentable {
        mask: u64,
    },
    Unnormalized {
        norm: f64,
    },
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    InvalidParameter(&'static str),
    NotConverged,
    Infeasible,
    Eigendecomposition,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::RankMismatch { left, right } => {
                write!(f, "rank mismatch: {left} vs {right} generators")
            }
            Error::OrbitalOutOfRange { index, modes } => {
                write!(f, "orbital index {index} out of range for {modes} orbitals")
            }
            Error::EmptyCombination => f.write_str("linear combination of zero operators"),
            Error::ResourceLimit { what, size, cap } => {
                write!(f, "{what} of size {size} exceeds the configured cap {cap}")
            }
            Error::NotHermitian { defect } => {
                write!(f, "operator is not Hermitian (defect {defect:e})")
            }
            Error::NotTwoBody { degree } => {
                write!(f, "not a two-body Hamiltonian: term of degree {degree}")
            }
            Error::Unrepresentable { mask } => {
                write!(
                    f,
                    "term with mask {mask:#x} is not reachable from the Gram basis"
                )
            }
            Error::Unnormalized { norm } => write!(f, "state is not normalized (norm {norm})"),
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
            Error::NotConverged => f.write_str("solver did not converge"),
            Error::Infeasible => {
                f.write_str("dual program appears infeasible (diverging multipliers)")
            }
            Error::Eigendecomposition => f.write_str("eigendecomposition failed"),
        }
    }
}

impl core::error::Error for Error {}
