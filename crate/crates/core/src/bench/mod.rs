//! The composite quadratic benchmark family: seeded instances, their
//! two-block formulation, an interior-point reference solution, a multi-solver
//! runner and report formatting.

mod instance;
mod problem;
mod reference;
mod report;
mod runner;

pub use instance::{generate_instance, BenchInstance, ChiMode};
pub use problem::{bench_lambda, to_problem_spec};
pub use reference::{reference_solution, ReferenceSolution};
pub use report::{emit_report, parse_csv, ReportFormat, CSV_HEADER};
pub use runner::{run_benchmark, BenchRow, THREADS_ENV};
