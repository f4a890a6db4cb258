//! Linear operators: general maps between Euclidean spaces, self-adjoint
//! positive semidefinite operators, spectral estimation and the symmetric
//! Gauss-Seidel proximal construction.

mod mmio;
mod sgs;
mod spectral;

pub use mmio::{read_matrix_market, write_matrix_market, MatrixMarketFormat};
pub use sgs::{sgs_operator, sgs_sweep, BlockQuadratic};
pub use spectral::{estimate_lambda_max, LambdaEstimate};

use nalgebra::{DMatrix, DVector};

use crate::error::{check_dim, Error, Result};

/// A linear map `M: R^cols -> R^rows` together with its adjoint.
pub trait LinearMap: Send + Sync + std::fmt::Debug {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `v -> M v`
    fn apply(&self, v: &DVector<f64>) -> DVector<f64>;
    /// `w -> M^T w`
    fn adjoint_apply(&self, w: &DVector<f64>) -> DVector<f64>;
    /// Dense materialization, used for composite operators such as `M^T M`.
    fn to_dense(&self) -> DMatrix<f64>;

    fn is_identity(&self) -> bool {
        false
    }

    /// `M^T M` as a dense self-adjoint operator.
    fn gram(&self) -> SelfAdjointOp {
        if self.is_identity() {
            return SelfAdjointOp::scaled_identity(self.cols(), 1.0);
        }
        let m = self.to_dense();
        SelfAdjointOp::Dense(m.tr_mul(&m))
    }
}

/// Dense matrix-backed linear map.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMap {
    matrix: DMatrix<f64>,
}

impl DenseMap {
    pub fn new(matrix: DMatrix<f64>) -> Self {
        DenseMap { matrix }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }
}

impl LinearMap for DenseMap {
    fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }

    fn adjoint_apply(&self, w: &DVector<f64>) -> DVector<f64> {
        self.matrix.tr_mul(w)
    }

    fn to_dense(&self) -> DMatrix<f64> {
        self.matrix.clone()
    }
}

/// The identity map on `R^dim`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IdentityMap {
    pub dim: usize,
}

impl LinearMap for IdentityMap {
    fn rows(&self) -> usize {
        self.dim
    }

    fn cols(&self) -> usize {
        self.dim
    }

    fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        v.clone()
    }

    fn adjoint_apply(&self, w: &DVector<f64>) -> DVector<f64> {
        w.clone()
    }

    fn to_dense(&self) -> DMatrix<f64> {
        DMatrix::identity(self.dim, self.dim)
    }

    fn is_identity(&self) -> bool {
        true
    }
}

/// A self-adjoint positive semidefinite operator.
///
/// The structured variants are kept distinct from `Dense` so subproblem
/// solvers can recognise metrics that admit closed-form proximal steps.
#[derive(Debug, Clone, PartialEq)]
pub enum SelfAdjointOp {
    Zero { dim: usize },
    ScaledIdentity { dim: usize, scale: f64 },
    Diagonal(DVector<f64>),
    Dense(DMatrix<f64>),
}

impl SelfAdjointOp {
    pub fn zero(dim: usize) -> Self {
        SelfAdjointOp::Zero { dim }
    }

    pub fn scaled_identity(dim: usize, scale: f64) -> Self {
        SelfAdjointOp::ScaledIdentity { dim, scale }
    }

    /// Wraps a dense matrix, checking symmetry to `1e-12` relative.
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidArgument(format!(
                "self-adjoint operator must be square, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let scale = matrix.amax().max(f64::MIN_POSITIVE);
        let asym = (&matrix - matrix.transpose()).amax();
        if asym > 1e-12 * scale {
            return Err(Error::InvalidArgument(format!(
                "matrix is not symmetric (max asymmetry {asym:.3e})"
            )));
        }
        Ok(SelfAdjointOp::Dense(matrix))
    }

    pub fn dim(&self) -> usize {
        match self {
            SelfAdjointOp::Zero { dim } | SelfAdjointOp::ScaledIdentity { dim, .. } => *dim,
            SelfAdjointOp::Diagonal(d) => d.len(),
            SelfAdjointOp::Dense(m) => m.nrows(),
        }
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        match self {
            SelfAdjointOp::Zero { dim } => DVector::zeros(*dim),
            SelfAdjointOp::ScaledIdentity { scale, .. } => v * *scale,
            SelfAdjointOp::Diagonal(d) => d.component_mul(v),
            SelfAdjointOp::Dense(m) => m * v,
        }
    }

    /// `<v, G v>`
    pub fn quadform(&self, v: &DVector<f64>) -> f64 {
        match self {
            SelfAdjointOp::Zero { .. } => 0.0,
            SelfAdjointOp::ScaledIdentity { scale, .. } => scale * v.norm_squared(),
            SelfAdjointOp::Diagonal(d) => d.iter().zip(v.iter()).map(|(di, vi)| di * vi * vi).sum(),
            SelfAdjointOp::Dense(m) => v.dot(&(m * v)),
        }
    }

    /// `||v||_G = sqrt(<v, G v>)`; negative rounding noise is clamped to zero.
    pub fn seminorm(&self, v: &DVector<f64>) -> f64 {
        self.quadform(v).max(0.0).sqrt()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            SelfAdjointOp::Zero { dim } => DMatrix::zeros(*dim, *dim),
            SelfAdjointOp::ScaledIdentity { dim, scale } => DMatrix::identity(*dim, *dim) * *scale,
            SelfAdjointOp::Diagonal(d) => DMatrix::from_diagonal(d),
            SelfAdjointOp::Dense(m) => m.clone(),
        }
    }

    /// Diagonal entries, when the operator is structurally diagonal.
    pub fn as_diagonal(&self) -> Option<DVector<f64>> {
        match self {
            SelfAdjointOp::Zero { dim } => Some(DVector::zeros(*dim)),
            SelfAdjointOp::ScaledIdentity { dim, scale } => Some(DVector::from_element(*dim, *scale)),
            SelfAdjointOp::Diagonal(d) => Some(d.clone()),
            SelfAdjointOp::Dense(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            SelfAdjointOp::Zero { .. } => true,
            SelfAdjointOp::ScaledIdentity { scale, .. } => *scale == 0.0,
            SelfAdjointOp::Diagonal(d) => d.iter().all(|&x| x == 0.0),
            SelfAdjointOp::Dense(m) => m.iter().all(|&x| x == 0.0),
        }
    }

    pub fn scale(&self, alpha: f64) -> SelfAdjointOp {
        match self {
            SelfAdjointOp::Zero { dim } => SelfAdjointOp::Zero { dim: *dim },
            SelfAdjointOp::ScaledIdentity { dim, scale } => SelfAdjointOp::ScaledIdentity {
                dim: *dim,
                scale: scale * alpha,
            },
            SelfAdjointOp::Diagonal(d) => SelfAdjointOp::Diagonal(d * alpha),
            SelfAdjointOp::Dense(m) => SelfAdjointOp::Dense(m * alpha),
        }
    }

    /// `self + other`, keeping the cheapest structure that represents the sum.
    pub fn add(&self, other: &SelfAdjointOp) -> Result<SelfAdjointOp> {
        check_dim("operator sum", self.dim(), other.dim())?;
        use SelfAdjointOp::*;
        Ok(match (self, other) {
            (Zero { .. }, x) | (x, Zero { .. }) => x.clone(),
            (ScaledIdentity { dim, scale: a }, ScaledIdentity { scale: b, .. }) => ScaledIdentity {
                dim: *dim,
                scale: a + b,
            },
            (Dense(a), b) | (b, Dense(a)) => Dense(a + b.to_dense()),
            (a, b) => Diagonal(a.as_diagonal().unwrap() + b.as_diagonal().unwrap()),
        })
    }

    /// `self - other`. The result need not be positive semidefinite; callers
    /// use it for the weighted seminorms of the certificate quantities.
    pub fn sub(&self, other: &SelfAdjointOp) -> Result<SelfAdjointOp> {
        self.add(&other.scale(-1.0))
    }
}

/// Sampled check of the positive semidefinite invariant:
/// `<v, G v> >= -tol * ||v||^2` on `samples` pseudo-random directions.
pub fn sampled_min_rayleigh(op: &SelfAdjointOp, samples: usize, seed: u64) -> f64 {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let v = DVector::from_fn(op.dim(), |_, _| StandardNormal.sample(&mut rng));
        let nn = v.norm_squared();
        if nn > 0.0 {
            worst = worst.min(op.quadform(&v) / nn);
        }
    }
    worst
}
