use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("conjugate is unbounded: derivative stays below {slope} on [{lo:e}, {hi:e}]")]
    UnboundedConjugate { slope: f64, lo: f64, hi: f64 },

    #[error("norm overflow: modular exceeds 1 for every scale up to {0:e}")]
    NormOverflow(f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("normalization infeasible after {expansions} bracket expansions")]
    NormalizationInfeasible { expansions: usize },

    #[error("singularity is not removable: {0}")]
    NoRemovableSingularity(String),

    #[error("energy overflow: {0}")]
    EnergyOverflow(String),

    #[error("evaluation error: {0}")]
    Evaluation(String),

    #[error("mesh error: {0}")]
    Mesh(String),

    #[error("range error: {0}")]
    Range(String),

    /// The linear term b₂·∇u is not admissible for the requested integrand.
    #[error("G-mode refused: {0}")]
    BNotDualIntegrable(String),
}

impl Error {
    /// Stable machine-readable code, used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DOMAIN_ERROR",
            Error::UnboundedConjugate { .. } => "CONJUGATE_UNBOUNDED",
            Error::NormOverflow(_) => "NORM_OVERFLOW",
            Error::Precondition(_) => "PRECONDITION_VIOLATED",
            Error::NormalizationInfeasible { .. } => "NORMALIZATION_INFEASIBLE",
            Error::NoRemovableSingularity(_) => "NO_REMOVABLE_SINGULARITY",
            Error::EnergyOverflow(_) => "ENERGY_OVERFLOW",
            Error::Evaluation(_) => "EVALUATION_ERROR",
            Error::Mesh(_) => "MESH_ERROR",
            Error::Range(_) => "RANGE_ERROR",
            Error::BNotDualIntegrable(_) => "GAP_PRECONDITION_B_NOT_DUAL_INTEGRABLE",
        }
    }

    /// True when the caller asked for something outside an operation's contract,
    /// as opposed to a numerical failure inside a valid request.
    pub fn is_precondition(&self) -> bool {
        matches!(
            self,
            Error::Domain(_)
                | Error::Precondition(_)
                | Error::NoRemovableSingularity(_)
                | Error::Range(_)
                | Error::BNotDualIntegrable(_)
        )
    }
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {x}")))
    }
}
