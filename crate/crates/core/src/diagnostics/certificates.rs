use std::io::Write;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linops::SelfAdjointOp;
use crate::solver::{IterateTriple, PreparedProblem, Trajectory};

/// Anchor `(x_bar, y_bar, z_bar)` for the error quantities `x_e = x - x_bar` etc.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePoint {
    pub x: DVector<f64>,
    pub y: DVector<f64>,
    pub z: DVector<f64>,
}

impl From<&IterateTriple> for ReferencePoint {
    fn from(t: &IterateTriple) -> Self {
        ReferencePoint {
            x: t.x.clone(),
            y: t.y.clone(),
            z: t.z.clone(),
        }
    }
}

/// Certificate quantities at index `k` of a G-ADMM-M run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificateRecord {
    pub k: usize,
    pub psi: f64,
    pub theta: f64,
    pub delta: f64,
    pub xi: f64,
    /// `eta_k` from its inner-product definition.
    pub eta: f64,
    /// `eta_k` from the telescoped expansion in squared norms.
    pub eta_expanded: f64,
    /// `||A^* x^k + B^* y^k - c||`
    pub primal_residual: f64,
}

/// Per-iteration slacks of the two descent inequalities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescentSlack {
    pub k: usize,
    /// `Psi_k - Psi_{k+1} - theta_k - sigma (2 - rho) ||A^* x^k + B^* y^k - c||^2`
    pub pivot: f64,
    /// `E_k - E_{k+1} - (delta_k - xi_k)`
    pub convergence: f64,
    /// Allowed negative slack, `1e-6 (1 + Psi_k)`.
    pub tolerance: f64,
}

impl DescentSlack {
    pub fn holds(&self) -> bool {
        self.pivot >= -self.tolerance && self.convergence >= -self.tolerance
    }
}

/// Operators and cached images shared by the certificate formulas.
struct Context<'a> {
    traj: &'a Trajectory,
    reference: &'a ReferencePoint,
    sigma: f64,
    rho: f64,
    lambda: f64,
    c: &'a DVector<f64>,
    /// `A^* x^k`, `B^* y^k`, `A^* x_bar`, `B^* y_bar`
    ax: Vec<DVector<f64>>,
    by: Vec<DVector<f64>>,
    ax_ref: DVector<f64>,
    by_ref: DVector<f64>,
    /// `Sigma^_f1 + S`, `Sigma^_h1 + T`, `F`
    xs: SelfAdjointOp,
    yt: SelfAdjointOp,
    f_op: SelfAdjointOp,
    sig_f_hat: SelfAdjointOp,
    sig_h_hat: SelfAdjointOp,
    theta_x: SelfAdjointOp,
    theta_y: SelfAdjointOp,
    delta_x: SelfAdjointOp,
    delta_y: SelfAdjointOp,
}

impl<'a> Context<'a> {
    fn new(
        prob: &'a PreparedProblem,
        traj: &'a Trajectory,
        reference: &'a ReferencePoint,
        rho: f64,
        lambda: f64,
    ) -> Result<Self> {
        if !(rho > 0.0 && rho < 2.0) {
            return Err(Error::InvalidConfig(format!("rho must lie in (0, 2), got {rho}")));
        }
        if traj.relaxed.len() != traj.iterates.len() + 1 {
            return Err(Error::InvalidArgument(
                "certificates need a G-ADMM-M trajectory with one more relaxed point than iterates".into(),
            ));
        }
        let spec = prob.spec();
        let sf_hat = spec.f1.upper_op();
        let sf = spec.f1.lower_op();
        let sh_hat = spec.h1.upper_op();
        let sh = spec.h1.lower_op();
        let xs = sf_hat.add(prob.s_op())?;
        let yt = sh_hat.add(prob.t_op())?;
        let two = 2.0 - rho;
        Ok(Context {
            traj,
            reference,
            sigma: prob.sigma(),
            rho,
            lambda,
            c: &spec.c,
            ax: traj.iterates.iter().map(|t| spec.a_map.apply(&t.x)).collect(),
            by: traj.iterates.iter().map(|t| spec.b_map.apply(&t.y)).collect(),
            ax_ref: spec.a_map.apply(&reference.x),
            by_ref: spec.b_map.apply(&reference.y),
            theta_x: sf.scale(0.5).sub(sf_hat)?.add(&xs.scale(two))?,
            theta_y: sh.scale(0.5).sub(sh_hat)?.add(&yt.scale(two))?,
            delta_x: sf.scale(0.5),
            delta_y: sh.scale(0.5).add(&yt.scale(two))?,
            f_op: prob.x_metric().op().clone(),
            sig_f_hat: sf_hat.clone(),
            sig_h_hat: sh_hat.clone(),
            xs,
            yt,
        })
    }

    fn it(&self, k: usize) -> &IterateTriple {
        &self.traj.iterates[k]
    }

    /// `z_e^k + sigma (rho - 1) A^* x_e^k`
    fn a_vec(&self, k: usize) -> DVector<f64> {
        let axe = &self.ax[k] - &self.ax_ref;
        (&self.it(k).z - &self.reference.z) + axe * (self.sigma * (self.rho - 1.0))
    }

    /// `A^* x^k + B^* y^j - c`
    fn r(&self, k: usize, j: usize) -> DVector<f64> {
        &self.ax[k] + &self.by[j] - self.c
    }

    fn psi(&self, k: usize) -> f64 {
        let (s, r) = (self.sigma, self.rho);
        let axe = &self.ax[k] - &self.ax_ref;
        let xte = &self.traj.relaxed[k + 1].x - &self.reference.x;
        let yte = &self.traj.relaxed[k].y - &self.reference.y;
        self.a_vec(k).norm_squared() / (s * r)
            + s * (2.0 - r) * axe.norm_squared()
            + self.xs.quadform(&xte) / r
            + self.yt.quadform(&yte) / r
    }

    /// `x~^{k+1} - x^{k+1}` and `y~^k - y^k`
    fn displacements(&self, k: usize) -> (DVector<f64>, DVector<f64>) {
        (
            &self.traj.relaxed[k + 1].x - &self.it(k + 1).x,
            &self.traj.relaxed[k].y - &self.it(k).y,
        )
    }

    fn theta(&self, k: usize) -> f64 {
        let (dx, dy) = self.displacements(k);
        self.theta_x.quadform(&dx) + self.theta_y.quadform(&dy)
    }

    fn xi(&self, k: usize) -> f64 {
        let (dx, dy) = self.displacements(k);
        self.sig_f_hat.quadform(&dx) + self.sig_h_hat.quadform(&dy)
    }

    fn delta(&self, k: usize) -> f64 {
        let (s, r, l) = (self.sigma, self.rho, self.lambda);
        let two = 2.0 - r;
        let (dx, dy) = self.displacements(k);
        let dx_prev = &self.traj.relaxed[k].x - &self.it(k).x;
        let dby = &self.by[k] - &self.by[k - 1];
        let step = &self.it(k + 1).x - &self.it(k).x;
        self.delta_x.quadform(&dx)
            + self.delta_y.quadform(&dy)
            + (1.0 - l) * two * self.xs.quadform(&dx_prev)
            + s * (2.0 * l - 1.0) * two * self.r(k + 1, k).norm_squared()
            + s * (1.0 - l) * two / 2.0 * dby.norm_squared()
            + l * two * two / r * self.f_op.quadform(&step)
    }

    fn eta(&self, k: usize) -> f64 {
        let axe1 = &self.ax[k + 1] - &self.ax_ref;
        let bye = &self.by[k] - &self.by_ref;
        let ze1 = &self.it(k + 1).z - &self.reference.z;
        let ze = &self.it(k).z - &self.reference.z;
        axe1.dot(&ze1) + bye.dot(&(ze + self.r(k, k) * self.sigma))
    }

    fn eta_expanded(&self, k: usize) -> f64 {
        let (s, r) = (self.sigma, self.rho);
        let axe1 = &self.ax[k + 1] - &self.ax_ref;
        let axe = &self.ax[k] - &self.ax_ref;
        (self.a_vec(k + 1).norm_squared() - self.a_vec(k).norm_squared()) / (2.0 * s * r)
            + s * (2.0 - r) / 2.0
                * (self.r(k, k).norm_squared() + axe1.norm_squared() - axe.norm_squared())
    }

    /// `Psi_k + (2 - rho) ||x~^k - x^k||^2 + sigma (1 - lambda)(2 - rho) ||A^* x^k + B^* y^{k-1} - c||^2`
    fn energy(&self, k: usize, psi: f64) -> f64 {
        let two = 2.0 - self.rho;
        let dx = &self.traj.relaxed[k].x - &self.it(k).x;
        psi + two * self.xs.quadform(&dx) + self.sigma * (1.0 - self.lambda) * two * self.r(k, k - 1).norm_squared()
    }

    fn record(&self, k: usize) -> CertificateRecord {
        CertificateRecord {
            k,
            psi: self.psi(k),
            theta: self.theta(k),
            delta: self.delta(k),
            xi: self.xi(k),
            eta: self.eta(k),
            eta_expanded: self.eta_expanded(k),
            primal_residual: self.r(k, k).norm(),
        }
    }

    /// Indices `1..=N-2` for a trajectory with `N` iterates.
    fn range(&self) -> std::ops::RangeInclusive<usize> {
        let n = self.traj.iterates.len();
        if n < 3 {
            #[allow(clippy::reversed_empty_ranges)]
            return 1..=0;
        }
        1..=n - 2
    }
}

/// Certificate records for every `k >= 1` whose defining iterates are
/// available (`k + 1` must exist). Short trajectories give an empty sequence.
pub fn certificate_bundle(
    prob: &PreparedProblem,
    traj: &Trajectory,
    reference: &ReferencePoint,
    rho: f64,
    lambda: f64,
) -> Result<Vec<CertificateRecord>> {
    let ctx = Context::new(prob, traj, reference, rho, lambda)?;
    Ok(ctx.range().map(|k| ctx.record(k)).collect())
}

/// Slacks of
/// `Psi_k - Psi_{k+1} >= theta_k + sigma (2 - rho) ||A^* x^k + B^* y^k - c||^2` and
/// `E_k - E_{k+1} >= delta_k - xi_k` for every `k >= 1` with `k + 1` available.
pub fn check_descent_inequality(
    prob: &PreparedProblem,
    traj: &Trajectory,
    reference: &ReferencePoint,
    rho: f64,
    lambda: f64,
) -> Result<Vec<DescentSlack>> {
    let ctx = Context::new(prob, traj, reference, rho, lambda)?;
    let range = ctx.range();
    if range.is_empty() {
        return Ok(Vec::new());
    }
    let psi: Vec<f64> = (*range.start()..=range.end() + 1).map(|k| ctx.psi(k)).collect();
    let at = |k: usize| psi[k - 1];
    Ok(range
        .map(|k| {
            let lhs = at(k) - at(k + 1);
            let pivot = lhs - ctx.theta(k) - ctx.sigma * (2.0 - rho) * ctx.r(k, k).norm_squared();
            let conv = ctx.energy(k, at(k)) - ctx.energy(k + 1, at(k + 1)) - (ctx.delta(k) - ctx.xi(k));
            DescentSlack {
                k,
                pivot,
                convergence: conv,
                tolerance: 1e-6 * (1.0 + at(k)),
            }
        })
        .collect())
}

/// Relative defects of the dual-update chain
/// `z^{k+1} = z^k + sigma rho (A^* x^{k+1} + B^* y^k - c) + sigma (rho - 1) A^*(x^k - x^{k+1})`,
/// recomputed from a recorded G-ADMM-M trajectory.
pub fn chain_identity_residuals(prob: &PreparedProblem, traj: &Trajectory, rho: f64) -> Vec<f64> {
    let spec = prob.spec();
    let s = prob.sigma();
    traj.iterates
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let ax1 = spec.a_map.apply(&b.x);
            let predicted = &a.z
                + (&ax1 + spec.b_map.apply(&a.y) - &spec.c) * (s * rho)
                + spec.a_map.apply(&(&a.x - &b.x)) * (s * (rho - 1.0));
            (&b.z - predicted).norm() / (1.0 + b.z.norm())
        })
        .collect()
}

/// Writes `k,psi,theta,delta,xi,eta,primal_residual,res`, taking `res` from
/// the run's residual history (empty when unavailable).
pub fn write_certificate_csv<W: Write>(w: W, records: &[CertificateRecord], residuals: &[f64]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let io = |e: csv::Error| Error::Io(e.to_string());
    out.write_record(["k", "psi", "theta", "delta", "xi", "eta", "primal_residual", "res"])
        .map_err(io)?;
    for r in records {
        let res = residuals.get(r.k).map(|v| format!("{v:e}")).unwrap_or_default();
        out.write_record([
            r.k.to_string(),
            format!("{:e}", r.psi),
            format!("{:e}", r.theta),
            format!("{:e}", r.delta),
            format!("{:e}", r.xi),
            format!("{:e}", r.eta),
            format!("{:e}", r.primal_residual),
            res,
        ])
        .map_err(io)?;
    }
    out.flush()?;
    Ok(())
}
