use thiserror::Error;

/// Errors produced anywhere in the torsion pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum TorsionError {
    #[error("boundary composition fails in degree {degree}: max |d_(k-1) d_k| = {residual:e}")]
    NonChainComplex { degree: usize, residual: f64 },

    #[error("generator {generator} is not orthogonal: max |G^T G - I| = {residual:e}")]
    BadRepresentation { generator: usize, residual: f64 },

    #[error("invalid generator index {index} (representation has {count} generators)")]
    BadGenerator { index: usize, count: usize },

    #[error("invalid cell structure: {0}")]
    BadCells(String),

    #[error("preset `{0}` is acyclic only for a nonzero angle")]
    NotAcyclicPreset(&'static str),

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("complex is not acyclic: degree {degree} has homology of dimension {dim}")]
    NotAcyclic { degree: usize, dim: usize },

    #[error("operator has a kernel of dimension {kernel_dim}; logarithm trace is undefined in strict mode")]
    NotInvertible { kernel_dim: usize },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off:e})")]
    ConvergenceFailure { sweeps: usize, off: f64 },

    #[error("{value} is not an eigenvalue of the degree-{degree} Laplacian")]
    NotAnEigenvalue { degree: usize, value: f64 },

    #[error("pivot selection failed in degree {degree}: submatrix is rank deficient")]
    PivotFailure { degree: usize },

    #[error("finite-difference derivative is not converging quadratically (ratio {ratio:.3})")]
    StepTooLarge { ratio: f64 },

    #[error("zeta function has a pole at s = {0}")]
    PoleAtOne(f64),

    #[error("spectral zeta function has a pole at s = {s} (heat coefficient {coefficient:e})")]
    PoleHit { s: f64, coefficient: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimated error {estimate:e})")]
    QuadratureFailure { tol: f64, estimate: f64 },

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("unsupported partition: {0}")]
    UnsupportedPartition(String),
}

pub type Result<T> = std::result::Result<T, TorsionError>;
