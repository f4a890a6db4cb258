use rayon::prelude::*;

use super::{generate_instance, to_problem_spec, ChiMode};
use crate::diagnostics::objective_value;
use crate::error::{Error, Result};
use crate::solver::{solve, PreparedProblem, SolverConfig, SolverKind, Termination};

/// One benchmark run.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub m: usize,
    pub n: usize,
    pub solver: SolverKind,
    pub seed: u64,
    pub iterations: usize,
    /// Seconds.
    pub wall_time: f64,
    pub res: f64,
    pub termination: Termination,
    /// Objective value at the final iterate.
    pub objective: f64,
}

impl BenchRow {
    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Environment variable capping the number of concurrent runs.
pub const THREADS_ENV: &str = "GADMM_THREADS";

fn thread_cap() -> Option<usize> {
    let raw = std::env::var(THREADS_ENV).ok()?;
    match raw.trim().parse::<usize>() {
        Ok(n) if n > 0 => Some(n),
        _ => {
            log::warn!("ignoring {THREADS_ENV}={raw:?}; expected a positive integer");
            None
        }
    }
}

/// Runs every solver in `solvers` on every `(size, seed)` instance from the
/// zero point. Rows are ordered by size, then seed, then solver. Runs that
/// fail to converge are kept with their termination status.
///
/// `cfg.rho` is used by G-ADMM-M and M-GADMM, `cfg.tau` by M-ADMM.
pub fn run_benchmark(
    sizes: &[(usize, usize)],
    chi: ChiMode,
    seeds: &[u64],
    cfg: &SolverConfig,
    solvers: &[SolverKind],
) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let cases: Vec<(usize, usize, u64)> = sizes
        .iter()
        .flat_map(|&(m, n)| seeds.iter().map(move |&s| (m, n, s)))
        .collect();

    pool.install(|| {
        let problems: Vec<PreparedProblem> = cases
            .par_iter()
            .map(|&(m, n, seed)| {
                let inst = generate_instance(m, n, chi, seed)?;
                PreparedProblem::new(&to_problem_spec(&inst, cfg.sigma)?, cfg.sigma)
            })
            .collect::<Result<_>>()?;

        let jobs: Vec<(usize, SolverKind)> = (0..cases.len())
            .flat_map(|i| solvers.iter().map(move |&s| (i, s)))
            .collect();
        jobs.par_iter()
            .map(|&(i, kind)| {
                let (m, n, seed) = cases[i];
                let prob = &problems[i];
                let report = solve(kind, prob, cfg)?;
                log::info!(
                    "({m},{n}) seed {seed} {kind}: {} iterations, res {:.3e}, {:?}",
                    report.iterations,
                    report.final_residual(),
                    report.termination
                );
                let fin = &report.final_iterate;
                Ok(BenchRow {
                    m,
                    n,
                    solver: kind,
                    seed,
                    iterations: report.iterations,
                    wall_time: report.wall_time.as_secs_f64(),
                    res: report.final_residual(),
                    termination: report.termination,
                    objective: objective_value(prob.spec(), &fin.x, &fin.y),
                })
            })
            .collect()
    })
}
