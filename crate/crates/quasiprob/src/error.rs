use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Crate-wide error type.
///
/// Variants split into two families, which the CLI maps to exit codes:
/// configuration/validation failures (bad specs, unphysical parameters,
/// guards that can be checked before any heavy computation) and numerical
/// failures discovered while evaluating (aliasing, boundary mass, residuals).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid state spec: {0}")]
    InvalidSpec(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("state leaks into the truncation boundary: top-level population {population:.3e} exceeds {limit:.0e}")]
    Leakage { population: f64, limit: f64 },

    #[error("moment order n+m = {order} exceeds the truncation-safety margin dim/2 = {margin}")]
    Truncation { order: usize, margin: usize },

    #[error("dimension mismatch: {0}x{0} operator vs {1}x{1} state")]
    DimensionMismatch(usize, usize),

    #[error("grid step {step} too coarse to resolve Wigner structure (limit {limit})")]
    GridTooCoarse { step: f64, limit: f64 },

    #[error("smoothing kernel reach 6·max(σ₁,σ₂) = {reach:.4} exceeds a quarter of the grid extent ({quarter:.4})")]
    KernelExceedsGrid { reach: f64, quarter: f64 },

    #[error("characteristic function does not decay at the Nyquist boundary: max |χ| = {max_boundary:.3e} (limit {limit:.0e})")]
    Aliasing { max_boundary: f64, limit: f64 },

    #[error("field mass at the grid boundary (max |value| = {max_boundary:.3e}, limit {limit:.0e}) would bias the moment")]
    BoundaryMass { max_boundary: f64, limit: f64 },

    #[error("target operator is not in the ordered-monomial span up to the requested degree: residual {residual:.3e}")]
    NotInSpan { residual: f64 },

    #[error("ordering parameters inconsistent with field widths: {0}")]
    ParamMismatch(String),

    #[error("s = {0} is above -1, i.e. below the Husimi smoothing floor sigma1*sigma2 = 1/4")]
    UnphysicalS(f64),

    #[error("detector efficiency {value} outside (0, 1]")]
    UnphysicalEfficiency { value: f64 },

    #[error("sampling distribution has negative mass: min cell value {min:.3e} below -1e-9")]
    NonPhysicalDistribution { min: f64 },

    #[error("need at least {min} samples, got {got}")]
    InsufficientSamples { got: u64, min: u64 },

    #[error("field violates a type invariant: {0}")]
    FieldInvariant(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable identifier, used in machine-parsable CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidArgument(_) => "InvalidArgument",
            Error::Leakage { .. } => "LeakageError",
            Error::Truncation { .. } => "TruncationError",
            Error::DimensionMismatch(..) => "DimensionMismatch",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::KernelExceedsGrid { .. } => "KernelExceedsGrid",
            Error::Aliasing { .. } => "AliasingError",
            Error::BoundaryMass { .. } => "BoundaryMassError",
            Error::NotInSpan { .. } => "NotInSpan",
            Error::ParamMismatch(_) => "ParamMismatch",
            Error::UnphysicalS(_) => "UnphysicalS",
            Error::UnphysicalEfficiency { .. } => "UnphysicalEfficiency",
            Error::NonPhysicalDistribution { .. } => "NonPhysicalDistribution",
            Error::InsufficientSamples { .. } => "InsufficientSamples",
            Error::FieldInvariant(_) => "FieldInvariant",
            Error::Parse(_) => "ParseError",
            Error::Io(_) => "IoError",
        }
    }

    /// True for errors a front end should treat as configuration problems
    /// (reject before computing), false for numerical failures.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::Aliasing { .. }
                | Error::BoundaryMass { .. }
                | Error::NotInSpan { .. }
                | Error::NonPhysicalDistribution { .. }
                | Error::FieldInvariant(_)
                | Error::Io(_)
        )
    }
}
