use std::sync::Arc;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{check_dim, Error, Result};
use crate::linops::{sampled_min_rayleigh, sgs_operator, sgs_sweep, BlockQuadratic, LinearMap, SelfAdjointOp};
use crate::oracles::{ProxOracle, SmoothTerm};

/// How a semi-proximal term (`S` on the x-block, `T` on the y-block) is chosen.
///
/// For a block with smooth curvature `Sigma` and constraint map `M` the
/// subproblem metric is `Sigma + P + sigma M M^*`, where `P` is the proximal
/// operator built here.
#[derive(Debug, Clone, PartialEq)]
pub enum ProximalTerm {
    Zero,
    Explicit(SelfAdjointOp),
    /// `P = lambda I - (Sigma + sigma M M^*)`, which turns the metric into `lambda I`.
    IdentityComplement { lambda: f64 },
    /// `P = U D^{-1} U^T` from the block split of `Sigma + sigma M M^*`; the
    /// subproblem is then solved by one symmetric Gauss-Seidel sweep.
    SymmetricGaussSeidel { block_dims: Vec<usize> },
}

/// `min f1(x) + f2(x) + h1(y) + h2(y)  s.t.  A^* x + B^* y = c`.
///
/// `a_map` and `b_map` are the maps `A^*` and `B^*` into the constraint space.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub f1: Arc<dyn SmoothTerm>,
    pub f2: Arc<dyn ProxOracle>,
    pub h1: Arc<dyn SmoothTerm>,
    pub h2: Arc<dyn ProxOracle>,
    pub a_map: Arc<dyn LinearMap>,
    pub b_map: Arc<dyn LinearMap>,
    pub c: DVector<f64>,
    pub s_term: ProximalTerm,
    pub t_term: ProximalTerm,
    /// Denominator of the dual part of the KKT residual (`1 + ||b||` for the
    /// benchmark family).
    pub dual_scale: f64,
}

impl ProblemSpec {
    pub fn x_dim(&self) -> usize {
        self.a_map.cols()
    }

    pub fn y_dim(&self) -> usize {
        self.b_map.cols()
    }

    pub fn z_dim(&self) -> usize {
        self.c.len()
    }

    fn check_dims(&self) -> Result<()> {
        check_dim("A^* rows vs c", self.c.len(), self.a_map.rows())?;
        check_dim("B^* rows vs c", self.c.len(), self.b_map.rows())?;
        check_dim("f1 dimension", self.x_dim(), self.f1.dim())?;
        check_dim("h1 dimension", self.y_dim(), self.h1.dim())?;
        if !(self.dual_scale > 0.0 && self.dual_scale.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "dual residual scale must be positive, got {}",
                self.dual_scale
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
enum MetricSolver {
    /// Strictly positive diagonal; closed-form weighted prox.
    Diagonal(DVector<f64>),
    /// Positive definite dense metric; only usable with a zero nonsmooth term.
    Dense(Cholesky<f64, Dyn>),
    Sgs(BlockQuadratic),
}

/// A subproblem metric (`F` or the y-block operator `H`) and its solver.
#[derive(Debug, Clone)]
pub struct Metric {
    op: SelfAdjointOp,
    solver: MetricSolver,
}

impl Metric {
    pub fn op(&self) -> &SelfAdjointOp {
        &self.op
    }

    /// `argmin_u g(u) + 1/2 <u, M u> + <linear, u>`
    pub fn minimize(&self, g: &dyn ProxOracle, linear: &DVector<f64>) -> Result<DVector<f64>> {
        match &self.solver {
            MetricSolver::Diagonal(d) => {
                let v = -linear.component_div(d);
                g.prox(&v, d)
            }
            MetricSolver::Dense(chol) => {
                if !g.is_zero() {
                    return Err(Error::Subproblem(
                        "dense metric needs a zero nonsmooth term; declare a diagonal or sGS proximal term".into(),
                    ));
                }
                Ok(chol.solve(&(-linear)))
            }
            MetricSolver::Sgs(q) => {
                let first = if g.is_zero() {
                    None
                } else {
                    match g.first_block() {
                        Some((len, inner)) if len == q.block_dims()[0] => Some(inner),
                        _ => {
                            return Err(Error::Subproblem(
                                "sGS metric needs a nonsmooth term acting on the first block only".into(),
                            ))
                        }
                    }
                };
                sgs_sweep(q, first, linear, &DVector::zeros(linear.len())).map_err(|e| Error::Subproblem(e.to_string()))
            }
        }
    }
}

/// A problem with its proximal operators materialized for a fixed `sigma`.
#[derive(Debug, Clone)]
pub struct PreparedProblem {
    spec: ProblemSpec,
    sigma: f64,
    s_op: SelfAdjointOp,
    t_op: SelfAdjointOp,
    x_metric: Metric,
    y_metric: Metric,
}

fn spd_factor(m: DMatrix<f64>, what: &str) -> Result<Cholesky<f64, Dyn>> {
    Cholesky::new(m).ok_or_else(|| Error::Invariant(format!("{what} is not positive definite")))
}

/// Diagonal of a dense operator whose off-diagonal entries are all zero, as
/// for `M M^*` with a signed permutation `M`.
fn exact_diagonal(op: &SelfAdjointOp) -> Option<DVector<f64>> {
    let SelfAdjointOp::Dense(m) = op else { return None };
    let off = m.iter().enumerate().any(|(idx, &v)| v != 0.0 && idx % m.nrows() != idx / m.nrows());
    (!off).then(|| m.diagonal())
}

/// Builds the proximal operator and the metric `Sigma + P + sigma M M^*`.
fn build_block(
    term: &ProximalTerm,
    curvature: &SelfAdjointOp,
    map: &dyn LinearMap,
    sigma: f64,
    what: &str,
) -> Result<(SelfAdjointOp, Metric)> {
    let n = curvature.dim();
    let base = curvature.add(&map.gram().scale(sigma))?;
    let (p, op, structured) = match term {
        ProximalTerm::Zero => (SelfAdjointOp::zero(n), base, None),
        ProximalTerm::Explicit(p) => {
            check_dim("proximal term", n, p.dim())?;
            let op = base.add(p)?;
            (p.clone(), op, None)
        }
        ProximalTerm::IdentityComplement { lambda } => {
            if !(*lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidArgument(format!("identity shift must be positive, got {lambda}")));
            }
            let id = SelfAdjointOp::scaled_identity(n, *lambda);
            (id.sub(&base)?, id, None)
        }
        ProximalTerm::SymmetricGaussSeidel { block_dims } => {
            let q = BlockQuadratic::from_dense(base.to_dense(), block_dims.clone())?;
            let s = sgs_operator(&q);
            let op = SelfAdjointOp::Dense(q.matrix() + s.to_dense());
            (s, op, Some(q))
        }
    };

    let min_p = sampled_min_rayleigh(&p, 16, 0x5eed);
    let scale = op.to_dense().amax().max(1.0);
    if min_p < -1e-10 * scale {
        return Err(Error::Invariant(format!(
            "proximal term on the {what} block is not positive semidefinite (Rayleigh quotient {min_p:.3e})"
        )));
    }

    let solver = match structured {
        Some(q) => {
            spd_factor(op.to_dense(), &format!("{what}-block metric"))?;
            MetricSolver::Sgs(q)
        }
        None => match op.as_diagonal().or_else(|| exact_diagonal(&op)) {
            Some(d) => {
                if d.iter().any(|&v| v.is_nan() || v <= 0.0) {
                    return Err(Error::Invariant(format!("{what}-block metric is not positive definite")));
                }
                MetricSolver::Diagonal(d)
            }
            None => MetricSolver::Dense(spd_factor(op.to_dense(), &format!("{what}-block metric"))?),
        },
    };
    Ok((p, Metric { op, solver }))
}

impl PreparedProblem {
    /// Materializes `S`, `T`, `F = Sigma_f + S + sigma A A^*` and
    /// `H = Sigma_h + T + sigma B B^*`, and checks `F > 0`, `H > 0`,
    /// `Sigma_h + T > 0` and `S, T >= 0` (the latter by sampling).
    pub fn new(spec: &ProblemSpec, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!("sigma must be positive, got {sigma}")));
        }
        spec.check_dims()?;
        let (s_op, x_metric) = build_block(&spec.s_term, spec.f1.upper_op(), &*spec.a_map, sigma, "x")?;
        let (t_op, y_metric) = build_block(&spec.t_term, spec.h1.upper_op(), &*spec.b_map, sigma, "y")?;

        let sh_t = spec.h1.upper_op().add(&t_op)?;
        let pd = match sh_t.as_diagonal() {
            Some(d) => d.iter().all(|&v| v > 0.0),
            None => Cholesky::new(sh_t.to_dense()).is_some(),
        };
        if !pd {
            return Err(Error::Invariant("Sigma_h1 + T is not positive definite".into()));
        }

        Ok(PreparedProblem {
            spec: spec.clone(),
            sigma,
            s_op,
            t_op,
            x_metric,
            y_metric,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn s_op(&self) -> &SelfAdjointOp {
        &self.s_op
    }

    pub fn t_op(&self) -> &SelfAdjointOp {
        &self.t_op
    }

    /// `F`
    pub fn x_metric(&self) -> &Metric {
        &self.x_metric
    }

    /// The y-block operator `H`.
    pub fn y_metric(&self) -> &Metric {
        &self.y_metric
    }
}
