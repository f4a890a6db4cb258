//! The majorized generalized ADMM and the two baseline schemes.

mod problem;
mod run;
mod steps;

pub use problem::{Metric, PreparedProblem, ProblemSpec, ProximalTerm};
pub use run::{solve, solve_gadmm_m, solve_m_admm, solve_m_gadmm, SolveReport, SolverKind, Termination, Trajectory};
pub use steps::{relax_step, x_update, y_update, z_update, YStep};

use nalgebra::DVector;

use crate::error::{check_dim, Error, Result};

/// `(x^k, y^k, z^k)`
#[derive(Debug, Clone, PartialEq)]
pub struct IterateTriple {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub k: usize,
}

/// The relaxed point `(x~^k, y~^k, z~^k)` that anchors iteration `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedTriple {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
    pub k: usize,
}

impl IterateTriple {
    pub fn zeros(spec: &ProblemSpec) -> Self {
        IterateTriple {
            x: DVector::zeros(spec.x_dim()),
            y: DVector::zeros(spec.y_dim()),
            z: DVector::zeros(spec.z_dim()),
            k: 0,
        }
    }

    pub(crate) fn check(&self, spec: &ProblemSpec) -> Result<()> {
        check_dim("iterate x", spec.x_dim(), self.x.len())?;
        check_dim("iterate y", spec.y_dim(), self.y.len())?;
        check_dim("iterate z", spec.z_dim(), self.z.len())
    }
}

impl RelaxedTriple {
    pub fn zeros(spec: &ProblemSpec) -> Self {
        IterateTriple::zeros(spec).into()
    }

    pub(crate) fn check(&self, spec: &ProblemSpec) -> Result<()> {
        check_dim("relaxed x", spec.x_dim(), self.x.len())?;
        check_dim("relaxed y", spec.y_dim(), self.y.len())?;
        check_dim("relaxed z", spec.z_dim(), self.z.len())
    }
}

impl From<IterateTriple> for RelaxedTriple {
    fn from(t: IterateTriple) -> Self {
        RelaxedTriple {
            x: t.x,
            y: t.y,
            z: t.z,
            k: t.k,
        }
    }
}

impl From<RelaxedTriple> for IterateTriple {
    fn from(t: RelaxedTriple) -> Self {
        IterateTriple {
            x: t.x,
            y: t.y,
            z: t.z,
            k: t.k,
        }
    }
}

/// Upper end of the admissible dual step-length interval, `(1 + sqrt 5) / 2`.
pub const GOLDEN_RATIO: f64 = 1.618_033_988_749_895;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Penalty, `> 0`.
    pub sigma: f64,
    /// Relaxation factor in `(0, 2)` (G-ADMM-M and M-GADMM).
    pub rho: f64,
    /// Dual step length in `(0, (1 + sqrt 5)/2)` (M-ADMM only).
    pub tau: f64,
    /// Target for the KKT residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Weight `lambda` in `(1/2, 1]` used by the certificate quantities.
    pub certificate_lambda: f64,
    /// Evaluate the dual-update chain identity each iteration and the
    /// certificate sequence at the end of a G-ADMM-M run. Implies
    /// `record_trajectory`.
    pub record_certificates: bool,
    pub record_trajectory: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            sigma: 0.8,
            rho: 1.9,
            tau: 1.618,
            tol: 1e-5,
            max_iter: 20_000,
            certificate_lambda: 0.75,
            record_certificates: false,
            record_trajectory: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return bad(format!("sigma must be positive, got {}", self.sigma));
        }
        if !(self.rho > 0.0 && self.rho < 2.0) {
            return bad(format!("rho must lie in (0, 2), got {}", self.rho));
        }
        if !(self.tau > 0.0 && self.tau < GOLDEN_RATIO) {
            return bad(format!("tau must lie in (0, (1+sqrt 5)/2), got {}", self.tau));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.certificate_lambda > 0.5 && self.certificate_lambda <= 1.0) {
            return bad(format!(
                "certificate lambda must lie in (1/2, 1], got {}",
                self.certificate_lambda
            ));
        }
        Ok(())
    }
}
