use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Γ-unitary (residual {residual:.3e} > {tol:.1e})")]
    NotGammaUnitary { residual: f64, tol: f64 },
    #[error("determinant is not one (|det - 1| = {deviation:.3e})")]
    DeterminantNotOne { deviation: f64 },
    #[error("matrix is not in su(m,n) (residual {residual:.3e})")]
    NotInAlgebra { residual: f64 },
    #[error("commutator [X{a}, X{b}] leaves the span of the basis (residual {residual:.3e})")]
    BasisNotClosed { a: usize, b: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point is outside the ball (1 - |Z|^2 = {margin:.3e})")]
    OutsideDomain { margin: f64 },
    #[error("normalisation constant is only known for m = 2 (got m = {m})")]
    NormalizationUnknown { m: usize },
    #[error("truncated space has {dim} states, above the bound {bound}")]
    CutoffTooLarge { dim: usize, bound: usize },
    #[error("truncation leakage {leakage:.3e} exceeds {bound:.1e}")]
    LeakageExceeded { leakage: f64, bound: f64 },
    #[error("no convergence up to cutoff {cutoff} (last change {change:.3e})")]
    TruncationNotConverged { cutoff: usize, change: f64 },
    #[error("least-squares fit is ill-conditioned (condition estimate {condition:.3e})")]
    FitIllConditioned { condition: f64 },
    #[error("propagator pole at N = {n}, l = {l}")]
    PoleHit { n: u32, l: u32 },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
