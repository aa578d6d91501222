use thiserror::Error;

/// Errors raised by the scattering library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported Bessel order {order} (maximum {max})")]
    UnsupportedOrder { order: u32, max: u32 },
    #[error("overflow: {0}")]
    Overflow(String),
    #[error("kernel singularity: source and target coincide")]
    Singularity,
    #[error("target at distance {distance:.3e} from the boundary is closer than the node spacing {spacing:.3e}")]
    NearSingular { distance: f64, spacing: f64 },
    #[error("target lies inside the scatterer")]
    InteriorPoint,
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("undersampled: {got} samples given, at least {min} required")]
    Undersampled { got: usize, min: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("invalid a-priori data: H0 = {h0} must satisfy 0 < H0 < H1 = {h1}")]
    InvalidAprioriData { h0: f64, h1: f64 },
    #[error("linear system numerically singular (condition estimate {condition:.3e})")]
    SingularSystem { condition: f64 },
    #[error("boundary residual {residual:.3e} above tolerance {tolerance:.3e} at n = {n}")]
    Accuracy { residual: f64, tolerance: f64, n: usize },
    #[error("direction grids differ ({0} vs {1} directions)")]
    MismatchedGrids(usize, usize),
    #[error("quadrature did not converge: relative change {change:.3e} under refinement")]
    QuadratureNotConverged { change: f64 },
    #[error("probe region intersects a scatterer")]
    RegionIntersects,
    #[error("too few valid records for the fit: {got} (need {min})")]
    TooFewRecords { got: usize, min: usize },
    #[error("csv: {0}")]
    Csv(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
