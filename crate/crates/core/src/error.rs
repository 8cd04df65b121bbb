use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("tangent vector is zero; the punctured tangent bundle excludes y = 0")]
    ZeroVector,
    #[error("Finsler norm is not positive ({value:e})")]
    NonPositiveNorm { value: f64 },
    #[error("fundamental tensor is not positive definite at this fiber point")]
    NotPositiveDefinite,
    #[error("trajectory left the chart along axis {axis} (coordinate {value:e})")]
    LeftChart { axis: usize, value: f64 },
    #[error("contact volume density degenerates ({value:e})")]
    DegenerateDensity { value: f64 },
    #[error("contact volume density changes sign across the grid")]
    DensitySignChange,
    #[error("horizontal part of [G, V^] does not vanish ({value:e})")]
    HorizontalLeak { value: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T, E = GeometryError> = std::result::Result<T, E>;
