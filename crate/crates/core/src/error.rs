use thiserror::Error;

/// Errors raised by the decision-diagram engine and the dense reference.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite complex value ({re}, {im})")]
    NonFinite { re: f64, im: f64 },

    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),

    /// All successor weights of a prospective node are zero.
    #[error("degenerate node: all successor weights are zero")]
    DegenerateNode,

    #[error("degenerate state: amplitude vector is all zero")]
    DegenerateState,

    #[error("amplitude vector length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("basis index {index} out of range for {sites} sites")]
    IndexOutOfRange { index: u64, sites: usize },

    #[error("site count mismatch: {left} vs {right}")]
    SiteMismatch { left: usize, right: usize },

    #[error("site {site} out of range for a {sites}-site system")]
    InvalidSite { site: usize, sites: usize },

    #[error("two-site gate targets coincide at site {0}")]
    CoincidentTargets(usize),

    #[error("system must have at least {min} sites, got {sites}")]
    TooFewSites { sites: usize, min: usize },

    #[error("bit string entries must be 0 or 1, got {0}")]
    InvalidBit(u8),

    #[error("expectation value has imaginary residue {imag:e} (non-Hermitian operand or numeric failure)")]
    ImaginaryResidue { real: f64, imag: f64 },

    #[error("{sites} sites exceeds the dense reference cap of {cap}")]
    OverDenseCap { sites: usize, cap: usize },

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid evolution plan: {0}")]
    InvalidPlan(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },
}

impl Error {
    /// True for failures of a numeric contract, as opposed to bad input.
    pub fn is_numeric_contract(&self) -> bool {
        matches!(self, Error::ImaginaryResidue { .. } | Error::NonHermitian(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
