use std::time::{Duration, Instant};

use nalgebra::DVector;

use super::steps::{x_step, y_step, YStep};
use super::{relax_step, IterateTriple, PreparedProblem, RelaxedTriple, SolverConfig};
use crate::diagnostics::{certificate_bundle, residual_parts, CertificateRecord, ReferencePoint};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    /// Majorized semi-proximal ADMM with dual step `tau`.
    MAdmm,
    /// Majorized generalized ADMM in Eckstein-Bertsekas form, relaxation `rho`.
    MGadmm,
    /// Majorized generalized ADMM with relaxation of the full triple.
    GadmmM,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::MAdmm, SolverKind::MGadmm, SolverKind::GadmmM];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::MAdmm => "M-ADMM",
            SolverKind::MGadmm => "M-GADMM",
            SolverKind::GadmmM => "G-ADMM-M",
        }
    }
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "m-admm" | "madmm" => Ok(SolverKind::MAdmm),
            "m-gadmm" | "mgadmm" => Ok(SolverKind::MGadmm),
            "g-admm-m" | "gadmm-m" | "gadmmm" => Ok(SolverKind::GadmmM),
            _ => Err(Error::InvalidArgument(format!("unknown solver '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIter,
    SubproblemFailure,
}

/// Recorded iterates. For G-ADMM-M, `iterates[k]` is `w^k` and `relaxed[k]`
/// is `w~^k`, with one more relaxed point than iterates. For the baselines,
/// `iterates[0]` is the initial point and `relaxed` is empty.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    pub iterates: Vec<IterateTriple>,
    pub relaxed: Vec<RelaxedTriple>,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub solver: SolverKind,
    pub final_iterate: IterateTriple,
    /// Element of `dh2(y)` paired with `final_iterate` in the residual.
    pub final_subgradient: DVector<f64>,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    /// Certificates against the final iterate as reference point.
    pub certificate_history: Option<Vec<CertificateRecord>>,
    /// `||z^{k+1} - predicted|| / (1 + ||z^{k+1}||)` for the dual-update
    /// chain, one entry per iteration after the first.
    pub chain_residuals: Option<Vec<f64>>,
    pub trajectory: Option<Trajectory>,
    pub wall_time: Duration,
    pub termination: Termination,
    /// Message of the subproblem error that ended the run, if any.
    pub failure: Option<String>,
}

impl SolveReport {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::INFINITY)
    }
}

fn check_setup(prob: &PreparedProblem, cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.sigma != prob.sigma() {
        return Err(Error::InvalidConfig(format!(
            "problem was prepared for sigma = {} but the configuration uses {}",
            prob.sigma(),
            cfg.sigma
        )));
    }
    Ok(())
}

/// Runs the selected scheme from the zero point.
pub fn solve(kind: SolverKind, prob: &PreparedProblem, cfg: &SolverConfig) -> Result<SolveReport> {
    let init = IterateTriple::zeros(prob.spec());
    match kind {
        SolverKind::GadmmM => solve_gadmm_m(prob, cfg, &init.into()),
        SolverKind::MAdmm => solve_m_admm(prob, cfg, &init),
        SolverKind::MGadmm => solve_m_gadmm(prob, cfg, &init),
    }
}

/// G-ADMM-M. Each iteration computes `x^k, z^k, y^k` from the relaxed point
/// `w~^k`, evaluates the residual at `w^k`, then relaxes to `w~^{k+1}`.
pub fn solve_gadmm_m(prob: &PreparedProblem, cfg: &SolverConfig, init: &RelaxedTriple) -> Result<SolveReport> {
    check_setup(prob, cfg)?;
    let spec = prob.spec();
    init.check(spec)?;
    let (sigma, rho) = (prob.sigma(), cfg.rho);
    let c = &spec.c;
    let record = cfg.record_trajectory || cfg.record_certificates;
    let start = Instant::now();

    let mut rel = RelaxedTriple { k: 0, ..init.clone() };
    // A^* x~ and B^* y~, kept current by linearity of the relaxation.
    let mut ax_t = spec.a_map.apply(&rel.x);
    let mut by_t = spec.b_map.apply(&rel.y);
    // Gradients at the relaxed point. An affine grad h1 follows the
    // relaxation like the images above instead of being recomputed.
    let h1_affine = spec.h1.has_affine_gradient();
    let mut gf_t = spec.f1.gradient(&rel.x);
    let mut gh_t = spec.h1.gradient(&rel.y);

    let mut history = Vec::new();
    let mut chain = cfg.record_certificates.then(Vec::new);
    let mut traj = record.then(|| Trajectory {
        iterates: Vec::new(),
        relaxed: vec![rel.clone()],
    });
    // (z^k, A^* x^k, B^* y^k) of the previous pass, for the chain identity.
    let mut prev: Option<(DVector<f64>, DVector<f64>, DVector<f64>)> = None;
    let mut last: Option<(IterateTriple, DVector<f64>)> = None;
    let mut termination = Termination::MaxIter;
    let mut failure = None;

    for k in 0..cfg.max_iter {
        let x = match x_step(prob, &rel.x, &gf_t, &((&ax_t + &by_t - c) * sigma + &rel.z)) {
            Ok(x) => x,
            Err(e) => {
                termination = Termination::SubproblemFailure;
                failure = Some(e.to_string());
                break;
            }
        };
        let ax = spec.a_map.apply(&x);
        let r_t = &ax + &by_t - c;
        let z = &rel.z + &r_t * sigma;
        let YStep { y, subgradient } = match y_step(prob, &rel.y, &gh_t, &(r_t * sigma + &z)) {
            Ok(s) => s,
            Err(e) => {
                termination = Termination::SubproblemFailure;
                failure = Some(e.to_string());
                break;
            }
        };
        let by = spec.b_map.apply(&y);
        let gh = spec.h1.gradient(&y);
        let res = residual_parts(spec, &ax, &by, &gh, &z, &subgradient);
        history.push(res);

        if let (Some(chain), Some((pz, pax, pby))) = (chain.as_mut(), prev.as_ref()) {
            let predicted = pz + (&ax + pby - c) * (sigma * rho) + (pax - &ax) * (sigma * (rho - 1.0));
            chain.push((&z - predicted).norm() / (1.0 + z.norm()));
        }

        let current = IterateTriple { x, y, z, k };
        // The relaxed point after the final pass is kept too; certificate
        // sequences need x~^{k+1}.
        rel = relax_step(&rel, &current, rho);
        if rho == 1.0 {
            ax_t = ax.clone();
            by_t = by.clone();
            gh_t = gh;
        } else {
            ax_t += (&ax - &ax_t) * rho;
            by_t += (&by - &by_t) * rho;
            if h1_affine {
                gh_t += (&gh - &gh_t) * rho;
            } else {
                gh_t = spec.h1.gradient(&rel.y);
            }
        }
        gf_t = spec.f1.gradient(&rel.x);
        if let Some(t) = traj.as_mut() {
            t.iterates.push(current.clone());
            t.relaxed.push(rel.clone());
        }
        if chain.is_some() {
            prev = Some((current.z.clone(), ax, by));
        }
        last = Some((current, subgradient));

        if !res.is_finite() {
            termination = Termination::SubproblemFailure;
            failure = Some(format!("non-finite residual at iteration {k}"));
            break;
        }
        if res <= cfg.tol {
            termination = Termination::Converged;
            break;
        }
    }
    let wall_time = start.elapsed();

    let (final_iterate, final_subgradient) =
        last.unwrap_or_else(|| (init.clone().into(), DVector::zeros(spec.y_dim())));
    let certificate_history = if cfg.record_certificates {
        let reference = ReferencePoint::from(&final_iterate);
        Some(certificate_bundle(
            prob,
            traj.as_ref().expect("trajectory is recorded with certificates"),
            &reference,
            rho,
            cfg.certificate_lambda,
        )?)
    } else {
        None
    };
    if !cfg.record_trajectory {
        traj = None;
    }

    Ok(SolveReport {
        solver: SolverKind::GadmmM,
        final_iterate,
        final_subgradient,
        iterations: history.len(),
        residual_history: history,
        certificate_history,
        chain_residuals: chain,
        trajectory: traj,
        wall_time,
        termination,
        failure,
    })
}

/// Majorized semi-proximal ADMM with dual step length `tau`:
/// `x^{k+1}` from `(y^k, z^k)`, `y^{k+1}` from `(x^{k+1}, z^k)`, both anchored
/// at the previous iterate, then `z^{k+1} = z^k + tau sigma r^{k+1}`.
pub fn solve_m_admm(prob: &PreparedProblem, cfg: &SolverConfig, init: &IterateTriple) -> Result<SolveReport> {
    baseline(SolverKind::MAdmm, prob, cfg, init)
}

/// Majorized generalized ADMM in Eckstein-Bertsekas form: after the
/// x-step, `A^* x^{k+1}` is replaced by
/// `u = rho A^* x^{k+1} - (1 - rho)(B^* y^k - c)` in the y-step and in the
/// dual update `z^{k+1} = z^k + sigma (u + B^* y^{k+1} - c)`.
pub fn solve_m_gadmm(prob: &PreparedProblem, cfg: &SolverConfig, init: &IterateTriple) -> Result<SolveReport> {
    baseline(SolverKind::MGadmm, prob, cfg, init)
}

fn baseline(kind: SolverKind, prob: &PreparedProblem, cfg: &SolverConfig, init: &IterateTriple) -> Result<SolveReport> {
    check_setup(prob, cfg)?;
    let spec = prob.spec();
    init.check(spec)?;
    let sigma = prob.sigma();
    let c = &spec.c;
    let start = Instant::now();

    let mut cur = IterateTriple { k: 0, ..init.clone() };
    let mut ax = spec.a_map.apply(&cur.x);
    let mut by = spec.b_map.apply(&cur.y);
    let mut subgrad = DVector::zeros(spec.y_dim());
    // grad h1(y^k), shared by the residual and the next y-step.
    let mut gh = spec.h1.gradient(&cur.y);
    let mut history = Vec::new();
    let mut traj = cfg.record_trajectory.then(|| Trajectory {
        iterates: vec![cur.clone()],
        relaxed: Vec::new(),
    });
    let mut termination = Termination::MaxIter;
    let mut failure = None;

    for k in 0..cfg.max_iter {
        let x = match x_step(prob, &cur.x, &spec.f1.gradient(&cur.x), &((&ax + &by - c) * sigma + &cur.z)) {
            Ok(x) => x,
            Err(e) => {
                termination = Termination::SubproblemFailure;
                failure = Some(e.to_string());
                break;
            }
        };
        let ax_new = spec.a_map.apply(&x);
        // Constraint-space image of the x-block as seen by the y-step.
        let u = match kind {
            SolverKind::MGadmm => &ax_new * cfg.rho - (&by - c) * (1.0 - cfg.rho),
            _ => ax_new.clone(),
        };
        let step = y_step(prob, &cur.y, &gh, &((&u + &by - c) * sigma + &cur.z));
        let YStep { y, subgradient } = match step {
            Ok(s) => s,
            Err(e) => {
                termination = Termination::SubproblemFailure;
                failure = Some(e.to_string());
                break;
            }
        };
        let by_new = spec.b_map.apply(&y);
        let z = match kind {
            SolverKind::MGadmm => &cur.z + (&u + &by_new - c) * sigma,
            _ => &cur.z + (&ax_new + &by_new - c) * (cfg.tau * sigma),
        };
        gh = spec.h1.gradient(&y);
        let res = residual_parts(spec, &ax_new, &by_new, &gh, &z, &subgradient);
        history.push(res);

        cur = IterateTriple { x, y, z, k: k + 1 };
        ax = ax_new;
        by = by_new;
        subgrad = subgradient;
        if let Some(t) = traj.as_mut() {
            t.iterates.push(cur.clone());
        }

        if !res.is_finite() {
            termination = Termination::SubproblemFailure;
            failure = Some(format!("non-finite residual at iteration {k}"));
            break;
        }
        if res <= cfg.tol {
            termination = Termination::Converged;
            break;
        }
    }

    Ok(SolveReport {
        solver: kind,
        final_iterate: cur,
        final_subgradient: subgrad,
        iterations: history.len(),
        residual_history: history,
        certificate_history: None,
        chain_residuals: None,
        trajectory: traj,
        wall_time: start.elapsed(),
        termination,
        failure,
    })
}
