use std::sync::Arc;

use nalgebra::DMatrix;

use super::BenchInstance;
use crate::error::{Error, Result};
use crate::linops::{estimate_lambda_max, DenseMap, IdentityMap, SelfAdjointOp};
use crate::oracles::{BenchSmoothTerm, L1Norm, NonnegOrthant, QuadraticTerm, SmoothTerm};
use crate::solver::{ProblemSpec, ProximalTerm};

/// Relative tolerance and iteration cap for the power iteration behind `T`.
const LAMBDA_TOL: f64 = 1e-9;
const LAMBDA_MAX_ITER: usize = 100_000;

/// Largest eigenvalue of `Sigma^_h1 + sigma H^T H`, overestimated slightly so
/// that `T = lambda I - (Sigma^_h1 + sigma H^T H)` is PSD.
pub fn bench_lambda(h1_upper: &SelfAdjointOp, h: &DMatrix<f64>, sigma: f64) -> Result<f64> {
    let op = SelfAdjointOp::Dense(h1_upper.to_dense() + h.tr_mul(h) * sigma);
    let est = estimate_lambda_max(&op, LAMBDA_TOL, LAMBDA_MAX_ITER)?;
    if est.converged {
        return Ok(est.value);
    }
    log::warn!(
        "power iteration stalled after {} steps (residual {:.3e}); using a dense eigensolve",
        est.iterations,
        est.residual
    );
    let top = op.to_dense().symmetric_eigenvalues().max();
    Ok(top * (1.0 + 10.0 * LAMBDA_TOL))
}

/// The benchmark as a two-block program:
/// `f1 = 0`, `f2` the orthant indicator, `A^* = I`, `B^* = H`,
/// `h1` the penalized quadratic, `h2 = mu ||.||_1`, `S = 0` and
/// `T = lambda_max(Sigma^_h1 + sigma H^T H) I - (Sigma^_h1 + sigma H^T H)`.
pub fn to_problem_spec(inst: &BenchInstance, sigma: f64) -> Result<ProblemSpec> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")));
    }
    let h1 = BenchSmoothTerm::new(Arc::new(inst.clone()));
    let lambda = bench_lambda(h1.upper_op(), &inst.h, sigma)?;
    Ok(ProblemSpec {
        f1: Arc::new(QuadraticTerm::zero(inst.m)),
        f2: Arc::new(NonnegOrthant),
        h1: Arc::new(h1),
        h2: Arc::new(L1Norm::new(inst.mu)?),
        a_map: Arc::new(IdentityMap { dim: inst.m }),
        b_map: Arc::new(DenseMap::new(inst.h.clone())),
        c: inst.c.clone(),
        s_term: ProximalTerm::Zero,
        t_term: ProximalTerm::IdentityComplement { lambda },
        dual_scale: 1.0 + inst.b.norm(),
    })
}
