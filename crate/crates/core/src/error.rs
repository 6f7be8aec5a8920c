use alloc::string::String;

/// Every failure the library reports.
///
/// The variant names double as stable tags in CSV and JSON output, see
/// [`Error::tag`].
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension must be a positive integer, got {0}")]
    Dimension(i64),
    #[error("{0}")]
    Range(String),
    #[error("scaling relation (gamma+n)/q + beta = (alpha+n)/p violated: {0}")]
    Scaling(String),
    #[error("forward operator requires alpha <= beta(p-1): alpha = {alpha}, beta(p-1) = {bound}")]
    ForwardConstraint { alpha: f64, bound: f64 },
    #[error("adjoint operator requires (alpha+n)/p - beta > 0, got {0}")]
    AdjointConstraint(f64),
    #[error("radius must be positive, got {0}")]
    Domain(f64),
    #[error("divergent: {0}")]
    Divergence(String),
    #[error("unsupported exponent: {0}")]
    UnsupportedExponent(String),
    #[error("sampling produced a non-finite value at {0}")]
    Sampling(String),
    #[error("substitution is degenerate: {0}")]
    DegenerateSubstitution(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid profile: {0}")]
    Profile(String),
}

impl Error {
    /// Short machine-readable name of the violated constraint.
    pub fn tag(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "DimensionError",
            Error::Range(_) => "RangeError",
            Error::Scaling(_) => "ScalingError",
            Error::ForwardConstraint { .. } => "ForwardConstraintError",
            Error::AdjointConstraint(_) => "AdjointConstraintError",
            Error::Domain(_) => "DomainError",
            Error::Divergence(_) => "DivergenceError",
            Error::UnsupportedExponent(_) => "UnsupportedExponentError",
            Error::Sampling(_) => "SamplingError",
            Error::DegenerateSubstitution(_) => "DegenerateSubstitutionError",
            Error::Unsupported(_) => "UnsupportedError",
            Error::Profile(_) => "ProfileError",
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
