use alloc::string::String;
use core::fmt;

/// Errors surfaced by graph construction, community fitting, panel assembly,
/// and estimation.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Operation requires a non-empty graph.
    EmptyGraph,
    /// Node id not present in the graph.
    UnknownNode(String),
    /// A subscriber referenced by an operation has no profile.
    MissingProfile(String),
    /// A panel subscriber has no core/periphery label.
    MissingLabel(String),
    /// Adoption month falls outside the study window.
    AdoptionOutsideWindow(String),
    /// Community fit objective became non-finite at the given iteration.
    Diverged { iteration: u32 },
    /// Ego-network too small for the requested operation.
    EgoTooSmall { members: usize, needed: usize },
    /// Cross-validation grid was empty.
    EmptyKGrid,
    /// Ego-network has no edges, so no background density exists.
    NoBackgroundDensity,
    /// Response vector is constant, nothing to fit.
    DegenerateResponse,
    /// Newton-Raphson failed to converge within the iteration budget.
    NoConvergence { iterations: u32, grad_norm: f64 },
    /// Quasi-complete separation detected on the named column.
    Separation(String),
    /// Instrument column has (numerically) zero variance.
    DegenerateInstrument(String),
    /// Normal-equation / information matrix not positive definite.
    SingularMatrix(String),
    /// Invalid configuration value.
    InvalidConfig(String),
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::EmptyGraph => write!(f, "empty graph"),
            CoreError::UnknownNode(id) => write!(f, "unknown node: {id}"),
            CoreError::MissingProfile(id) => write!(f, "missing profile for subscriber: {id}"),
            CoreError::MissingLabel(id) => write!(f, "missing core/periphery label for subscriber: {id}"),
            CoreError::AdoptionOutsideWindow(id) => {
                write!(f, "adoption month outside study window for subscriber: {id}")
            }
            CoreError::Diverged { iteration } => {
                write!(f, "diverged: non-finite objective at iteration {iteration}")
            }
            CoreError::EgoTooSmall { members, needed } => {
                write!(f, "ego-network too small: {members} members, need at least {needed}")
            }
            CoreError::EmptyKGrid => write!(f, "empty K grid"),
            CoreError::NoBackgroundDensity => write!(f, "no background density: ego-network has no edges"),
            CoreError::DegenerateResponse => write!(f, "degenerate response: all 0 or all 1"),
            CoreError::NoConvergence { iterations, grad_norm } => {
                write!(f, "no convergence after {iterations} iterations (gradient norm {grad_norm:.3e})")
            }
            CoreError::Separation(col) => write!(f, "separation: column {col} diverging"),
            CoreError::DegenerateInstrument(col) => {
                write!(f, "weak/degenerate instrument: {col} has zero variance")
            }
            CoreError::SingularMatrix(what) => write!(f, "singular matrix in {what}"),
            CoreError::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}
