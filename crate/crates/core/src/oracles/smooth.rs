use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};
use crate::linops::SelfAdjointOp;

/// A convex function with Lipschitz gradient and two PSD operators
/// `lower_op ⪯ upper_op` sandwiching its Bregman distance:
///
/// `1/2 ||x - x'||^2_lower <= f(x) - f(x') - <x - x', grad f(x')> <= 1/2 ||x - x'||^2_upper`.
pub trait SmoothTerm: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &DVector<f64>) -> f64;
    fn gradient(&self, x: &DVector<f64>) -> DVector<f64>;
    /// Majorant curvature.
    fn upper_op(&self) -> &SelfAdjointOp;
    /// Minorant curvature.
    fn lower_op(&self) -> &SelfAdjointOp;

    /// True when `x -> gradient(x)` is affine, so gradients of affine
    /// combinations may be combined instead of recomputed.
    fn has_affine_gradient(&self) -> bool {
        false
    }
}

/// `1/2 <x, P x> + <q, x>`, majorized exactly by its own Hessian.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTerm {
    hessian: SelfAdjointOp,
    linear: DVector<f64>,
}

impl QuadraticTerm {
    pub fn new(hessian: SelfAdjointOp, linear: DVector<f64>) -> Result<Self> {
        check_dim("quadratic term linear part", hessian.dim(), linear.len())?;
        Ok(QuadraticTerm { hessian, linear })
    }

    /// The identically zero function on `R^dim`.
    pub fn zero(dim: usize) -> Self {
        QuadraticTerm {
            hessian: SelfAdjointOp::zero(dim),
            linear: DVector::zeros(dim),
        }
    }
}

impl SmoothTerm for QuadraticTerm {
    fn dim(&self) -> usize {
        self.linear.len()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        0.5 * self.hessian.quadform(x) + self.linear.dot(x)
    }

    fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        self.hessian.apply(x) + &self.linear
    }

    fn upper_op(&self) -> &SelfAdjointOp {
        &self.hessian
    }

    fn lower_op(&self) -> &SelfAdjointOp {
        &self.hessian
    }

    fn has_affine_gradient(&self) -> bool {
        true
    }
}

/// `f(x') + <x - x', grad f(x')> + 1/2 ||x - x'||^2_curvature`
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticMajorant {
    pub anchor: DVector<f64>,
    pub constant: f64,
    pub slope: DVector<f64>,
    pub curvature: SelfAdjointOp,
}

impl QuadraticMajorant {
    pub fn evaluate(&self, x: &DVector<f64>) -> f64 {
        let d = x - &self.anchor;
        self.constant + self.slope.dot(&d) + 0.5 * self.curvature.quadform(&d)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.slope + self.curvature.apply(&(x - &self.anchor))
    }
}

/// Quadratic upper model of `term` anchored at `anchor`, tight there.
pub fn quadratic_majorant(term: &dyn SmoothTerm, anchor: &DVector<f64>) -> Result<QuadraticMajorant> {
    check_dim("majorant anchor", term.dim(), anchor.len())?;
    let constant = term.value(anchor);
    if !constant.is_finite() {
        return Err(Error::InvalidArgument("smooth term is not finite at the anchor".into()));
    }
    Ok(QuadraticMajorant {
        anchor: anchor.clone(),
        constant,
        slope: term.gradient(anchor),
        curvature: term.upper_op().clone(),
    })
}
