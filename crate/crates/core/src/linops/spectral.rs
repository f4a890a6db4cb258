use nalgebra::DVector;

use super::SelfAdjointOp;
use crate::error::{Error, Result};

/// Result of a power-iteration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEstimate {
    /// Safeguarded upper estimate of the largest eigenvalue.
    pub value: f64,
    /// Final Rayleigh quotient before the safety factor was applied.
    pub rayleigh: f64,
    /// Eigen-residual `||G v - theta v||` at the final iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
///
/// Starts from the normalized all-ones vector and stops once the eigen-residual
/// falls below `tol` times the Rayleigh quotient. The returned `value` is
/// `(theta + residual) * (1 + 10 tol)`, which keeps `value * I - op` positive
/// semidefinite when the iteration has locked onto the top eigenvector.
/// When `max_iter` is exhausted the best estimate is still returned, with
/// `converged == false`.
pub fn estimate_lambda_max(op: &SelfAdjointOp, tol: f64, max_iter: usize) -> Result<LambdaEstimate> {
    let n = op.dim();
    if n == 0 {
        return Err(Error::InvalidArgument(
            "cannot estimate the spectrum of a zero-dimensional operator".into(),
        ));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidArgument(format!("tolerance must lie in (0,1), got {tol}")));
    }

    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut theta = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter.max(1) {
        iterations += 1;
        let gv = op.apply(&v);
        theta = v.dot(&gv);
        residual = (&gv - &v * theta).norm();
        let gnorm = gv.norm();
        if gnorm == 0.0 {
            // v lies in the kernel; for a PSD operator started from the
            // all-ones vector this only happens for the zero operator.
            theta = 0.0;
            residual = 0.0;
            converged = true;
            break;
        }
        if residual <= tol * theta.abs() {
            converged = true;
            break;
        }
        v = gv / gnorm;
    }

    let value = (theta + residual) * (1.0 + 10.0 * tol);
    Ok(LambdaEstimate {
        value,
        rayleigh: theta,
        residual,
        iterations,
        converged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn identity_has_unit_top_eigenvalue() {
        let est = estimate_lambda_max(&SelfAdjointOp::scaled_identity(5, 1.0), 1e-12, 100).unwrap();
        assert!(est.converged);
        assert!((est.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn diagonal_operator() {
        let op = SelfAdjointOp::Diagonal(DVector::from_vec(vec![1.0, 2.0, 3.0]));
        let est = estimate_lambda_max(&op, 1e-12, 10_000).unwrap();
        assert!(est.converged);
        assert!((est.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn random_psd_matches_dense_eigensolver() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let g = DMatrix::from_fn(8, 8, |_, _| StandardNormal.sample(&mut rng));
        let m: DMatrix<f64> = g.tr_mul(&g);
        let exact = m.clone().symmetric_eigen().eigenvalues.max();
        let est = estimate_lambda_max(&SelfAdjointOp::Dense(m), 1e-10, 100_000).unwrap();
        assert!(est.converged);
        assert!(((est.value - exact) / exact).abs() <= 1e-8, "{} vs {}", est.value, exact);
        assert!(est.value >= exact);
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(matches!(
            estimate_lambda_max(&SelfAdjointOp::zero(0), 1e-8, 10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn exhausted_budget_reports_flag() {
        let op = SelfAdjointOp::Diagonal(DVector::from_vec(vec![1.0, 0.999, 0.5]));
        let est = estimate_lambda_max(&op, 1e-14, 3).unwrap();
        assert!(!est.converged);
        assert_eq!(est.iterations, 3);
        assert!(est.value > 0.9);
    }

    #[test]
    fn zero_operator_is_zero() {
        let est = estimate_lambda_max(&SelfAdjointOp::zero(4), 1e-8, 10).unwrap();
        assert!(est.converged);
        assert_eq!(est.value, 0.0);
    }
}
