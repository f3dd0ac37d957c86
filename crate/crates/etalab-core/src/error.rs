use alloc::string::String;
use alloc::vec::Vec;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("grid {0:?} rejected: sizes must be even and at least 8, in 1 to 3 dimensions")]
    BadGrid(Vec<usize>),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("repeated coordinate in a form component")]
    RepeatedIndex,
    #[error("grid of {n} points cannot resolve the flat width {eps}")]
    CoarseProfile { n: usize, eps: f64 },
    #[error("not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("not an orthogonal projection (residual {0:.3e})")]
    NotProjection(f64),
    #[error("not hermitian (residual {0:.3e})")]
    NotHermitian(f64),
    #[error("projection eigenvalue {0:.4} lies in the aliasing band, refine the grid")]
    Aliasing(f64),
    #[error("boundary operator has a {0}-dimensional kernel but no lagrangian subspace")]
    MissingLagrangian(usize),
    #[error("invalid boundary model: {0}")]
    InvalidModel(String),
    #[error("boundary condition gives no self-adjoint realization (residual {0:.3e})")]
    NotSelfAdjoint(f64),
    #[error("path too coarse in s (tail fraction {0:.3e})")]
    CoarsePath(f64),
    #[error("eigensolver did not converge")]
    Eigensolver,
    #[error("branch matching ambiguous on [{lo}, {hi}]")]
    AmbiguousBranches { lo: f64, hi: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = core::result::Result<T, Error>;
