use std::fs::File;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

use gadmm::bench::{emit_report, generate_instance, reference_solution, run_benchmark, to_problem_spec, ChiMode, ReportFormat};
use gadmm::diagnostics::{
    chain_identity_residuals, check_descent_inequality, check_operator_identities, kkt_residual, write_certificate_csv,
    ReferencePoint,
};
use gadmm::linops::{sgs_operator, sgs_sweep, BlockQuadratic};
use gadmm::{solve_gadmm_m, PreparedProblem, RelaxedTriple, SolverConfig, SolverKind};

#[derive(Parser)]
#[command(name = "gadmm", version, about = "Majorized generalized ADMM benchmarks and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the solvers on generated benchmark instances.
    Bench(BenchArgs),
    /// Run the identity, sGS and certificate checks.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct BenchArgs {
    /// Row counts; paired with --n by position.
    #[arg(long, value_delimiter = ',', required = true)]
    m: Vec<usize>,
    /// Column counts; paired with --m by position.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    /// Penalty weight: 0, 2mu or a number.
    #[arg(long, default_value = "0")]
    chi: ChiMode,
    /// Seeds as a list (0,3,7) or an inclusive range (0..4).
    #[arg(long, default_value = "0")]
    seeds: String,
    #[arg(long, default_value_t = 0.8)]
    sigma: f64,
    #[arg(long, default_value_t = 1.9)]
    rho: f64,
    #[arg(long, default_value_t = 1.618)]
    tau: f64,
    #[arg(long, default_value_t = 1e-5)]
    tol: f64,
    #[arg(long, default_value_t = 20_000)]
    max_iter: usize,
    /// Comma-separated subset of M-ADMM, M-GADMM, G-ADMM-M.
    #[arg(long, value_delimiter = ',', default_value = "M-ADMM,M-GADMM,G-ADMM-M")]
    solvers: Vec<SolverKind>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or table.
    #[arg(long, default_value = "table")]
    format: ReportFormat,
}

#[derive(Args)]
struct VerifyArgs {
    /// Benchmark size used for the certificate check.
    #[arg(long, default_value_t = 60)]
    m: usize,
    #[arg(long, default_value_t = 150)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the certificate sequence to this CSV file.
    #[arg(long)]
    certificates: Option<PathBuf>,
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, String> {
    let bad = || format!("invalid seed list '{s}'");
    if let Some((a, b)) = s.split_once("..") {
        let a: u64 = a.trim().parse().map_err(|_| bad())?;
        let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        return Ok((a..=b).collect());
    }
    s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(1)
}

fn run_bench(args: BenchArgs) -> ExitCode {
    if args.m.len() != args.n.len() {
        return usage("--m and --n must list the same number of sizes");
    }
    let seeds = match parse_seeds(&args.seeds) {
        Ok(s) => s,
        Err(e) => return usage(e),
    };
    let cfg = SolverConfig {
        sigma: args.sigma,
        rho: args.rho,
        tau: args.tau,
        tol: args.tol,
        max_iter: args.max_iter,
        ..SolverConfig::default()
    };
    if let Err(e) = cfg.validate() {
        return usage(e);
    }
    let sizes: Vec<(usize, usize)> = args.m.iter().copied().zip(args.n.iter().copied()).collect();
    let rows = match run_benchmark(&sizes, args.chi, &seeds, &cfg, &args.solvers) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let text = match emit_report(&rows, args.format) {
        Ok(t) => t,
        Err(e) => return usage(e),
    };
    let written = match &args.out {
        Some(path) => File::create(path).and_then(|mut f| f.write_all(text.as_bytes())),
        None => std::io::stdout().write_all(text.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return ExitCode::from(1);
    }
    if rows.iter().all(|r| r.converged()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn report(name: &str, ok: bool, detail: String) -> bool {
    println!("{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn verify_sgs() -> bool {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let blocks = rng.gen_range(2..=4);
        let dims: Vec<usize> = (0..blocks).map(|_| rng.gen_range(1..=7)).collect();
        let n: usize = dims.iter().sum();
        let g = DMatrix::from_fn(n + 3, n, |_, _| StandardNormal.sample(&mut rng));
        let q = g.tr_mul(&g) / n as f64 + DMatrix::identity(n, n) * 0.05;
        let ell = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let anchor = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let Ok(bq) = BlockQuadratic::from_dense(q.clone(), dims) else {
            return report("sGS equivalence", false, "block split failed".into());
        };
        let s = sgs_operator(&bq).to_dense();
        let rhs = -&ell + &s * &anchor;
        let Some(direct) = (&q + &s).cholesky().map(|c| c.solve(&rhs)) else {
            return report("sGS equivalence", false, "Q + S not positive definite".into());
        };
        match sgs_sweep(&bq, None, &ell, &anchor) {
            Ok(x) => worst = worst.max((x - direct).norm() / (1.0 + rhs.norm())),
            Err(e) => return report("sGS equivalence", false, e.to_string()),
        }
    }
    report("sGS equivalence", worst <= 1e-10, format!("max relative error {worst:.2e} over 20 instances"))
}

fn verify_certificates(args: &VerifyArgs) -> Result<bool, gadmm::Error> {
    let inst = generate_instance(args.m, args.n, ChiMode::Zero, args.seed)?;
    let cfg = SolverConfig {
        record_trajectory: true,
        ..SolverConfig::default()
    };
    let prob = PreparedProblem::new(&to_problem_spec(&inst, cfg.sigma)?, cfg.sigma)?;
    let zero = RelaxedTriple::zeros(prob.spec());

    let run = solve_gadmm_m(&prob, &cfg, &zero)?;
    let traj = run.trajectory.as_ref().expect("trajectory requested");
    let chain = chain_identity_residuals(&prob, traj, cfg.rho);
    let worst_chain = chain.iter().copied().fold(0.0, f64::max);
    let mut ok = report(
        "dual-update chain identity",
        worst_chain <= 1e-8,
        format!("max relative defect {worst_chain:.2e} over {} iterations", chain.len()),
    );

    let sol = reference_solution(&inst)?;
    let ref_res = kkt_residual(prob.spec(), &sol.triple, &sol.subgradient)?;
    ok &= report(
        "reference point",
        ref_res <= 1e-10,
        format!("interior-point residual {ref_res:.2e} after {} iterations", sol.interior_point_iterations),
    );
    let reference = ReferencePoint::from(&sol.triple);
    let slacks = check_descent_inequality(&prob, traj, &reference, cfg.rho, cfg.certificate_lambda)?;
    let failing = slacks.iter().filter(|s| !s.holds()).count();
    ok &= report(
        "descent inequalities",
        failing == 0,
        format!("{failing} of {} iterations outside tolerance", slacks.len()),
    );

    if let Some(path) = &args.certificates {
        let records = gadmm::diagnostics::certificate_bundle(&prob, traj, &reference, cfg.rho, cfg.certificate_lambda)?;
        write_certificate_csv(File::create(path)?, &records, &run.residual_history)?;
    }
    Ok(ok)
}

fn run_verify(args: VerifyArgs) -> ExitCode {
    let ids = match check_operator_identities(1000, 16, 1) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let mut ok = report(
        "operator identities",
        ids.passes(1e-10),
        format!("max relative violation {:.2e} ({})", ids.max_violation, ids.worst),
    );
    ok &= verify_sgs();
    match verify_certificates(&args) {
        Ok(pass) => ok &= pass,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Bench(args) => run_bench(args),
        Command::Verify(args) => run_verify(args),
    }
}
