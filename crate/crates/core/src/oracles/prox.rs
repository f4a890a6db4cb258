use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// A closed proper convex function accessed through its value and its
/// diagonally weighted proximal map
/// `prox(v, w) = argmin_x g(x) + 1/2 sum_i w_i (x_i - v_i)^2`.
pub trait ProxOracle: Send + Sync + std::fmt::Debug {
    /// Extended-real value; `f64::INFINITY` outside the domain.
    fn value(&self, x: &DVector<f64>) -> f64;

    fn prox(&self, v: &DVector<f64>, weights: &DVector<f64>) -> Result<DVector<f64>>;

    /// True for the identically zero function.
    fn is_zero(&self) -> bool {
        false
    }

    /// For functions of the form `g(x) = g_1(x_1)` that only see a leading
    /// block: the block length and the oracle for `g_1`.
    fn first_block(&self) -> Option<(usize, &dyn ProxOracle)> {
        None
    }
}

fn check_weights(weights: &DVector<f64>) -> Result<()> {
    if weights.iter().all(|&w| w > 0.0 && w.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidArgument("prox weights must be strictly positive".into()))
    }
}

/// Componentwise soft-thresholding `sign(v_i) max(|v_i| - mu / w_i, 0)`.
pub fn prox_l1(v: &DVector<f64>, mu: f64, weights: &DVector<f64>) -> Result<DVector<f64>> {
    check_dim("prox_l1 weights", v.len(), weights.len())?;
    check_weights(weights)?;
    if mu.is_nan() || mu < 0.0 {
        return Err(Error::InvalidArgument(format!("l1 weight must be nonnegative, got {mu}")));
    }
    Ok(v.zip_map(weights, |vi, wi| {
        let t = mu / wi;
        if vi > t {
            vi - t
        } else if vi < -t {
            vi + t
        } else {
            0.0
        }
    }))
}

/// Euclidean projection onto the nonnegative orthant.
pub fn project_nonneg(v: &DVector<f64>) -> DVector<f64> {
    v.map(|x| x.max(0.0))
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ZeroProx;

impl ProxOracle for ZeroProx {
    fn value(&self, _x: &DVector<f64>) -> f64 {
        0.0
    }

    fn prox(&self, v: &DVector<f64>, weights: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("prox weights", v.len(), weights.len())?;
        check_weights(weights)?;
        Ok(v.clone())
    }

    fn is_zero(&self) -> bool {
        true
    }
}

/// `mu ||x||_1`
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct L1Norm {
    mu: f64,
}

impl L1Norm {
    pub fn new(mu: f64) -> Result<Self> {
        if mu >= 0.0 && mu.is_finite() {
            Ok(L1Norm { mu })
        } else {
            Err(Error::InvalidArgument(format!("l1 weight must be nonnegative, got {mu}")))
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

impl ProxOracle for L1Norm {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.mu * x.lp_norm(1)
    }

    fn prox(&self, v: &DVector<f64>, weights: &DVector<f64>) -> Result<DVector<f64>> {
        prox_l1(v, self.mu, weights)
    }

    fn is_zero(&self) -> bool {
        self.mu == 0.0
    }
}

/// Indicator of the nonnegative orthant.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct NonnegOrthant;

impl ProxOracle for NonnegOrthant {
    fn value(&self, x: &DVector<f64>) -> f64 {
        if x.iter().all(|&xi| xi >= 0.0) {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// The objective is separable, so positive weights never move the
    /// per-coordinate minimizer away from the plain projection.
    fn prox(&self, v: &DVector<f64>, weights: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("projection weights", v.len(), weights.len())?;
        check_weights(weights)?;
        Ok(project_nonneg(v))
    }
}

/// `g(x) = inner(x[..len])`: a nonsmooth term acting on the leading block only.
#[derive(Debug)]
pub struct FirstBlock<P> {
    inner: P,
    len: usize,
}

impl<P: ProxOracle> FirstBlock<P> {
    pub fn new(inner: P, len: usize) -> Self {
        FirstBlock { inner, len }
    }
}

impl<P: ProxOracle> ProxOracle for FirstBlock<P> {
    fn value(&self, x: &DVector<f64>) -> f64 {
        self.inner.value(&x.rows(0, self.len.min(x.len())).into_owned())
    }

    fn prox(&self, v: &DVector<f64>, weights: &DVector<f64>) -> Result<DVector<f64>> {
        check_dim("prox weights", v.len(), weights.len())?;
        if v.len() < self.len {
            return Err(Error::DimensionMismatch {
                context: "first-block prox",
                expected: self.len,
                actual: v.len(),
            });
        }
        check_weights(weights)?;
        let head = self.inner.prox(
            &v.rows(0, self.len).into_owned(),
            &weights.rows(0, self.len).into_owned(),
        )?;
        let mut out = v.clone();
        out.rows_mut(0, self.len).copy_from(&head);
        Ok(out)
    }

    fn is_zero(&self) -> bool {
        self.inner.is_zero()
    }

    fn first_block(&self) -> Option<(usize, &dyn ProxOracle)> {
        Some((self.len, &self.inner))
    }
}
