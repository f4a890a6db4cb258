//! Majorized generalized ADMM for
//!
//! `min f1(x) + f2(x) + h1(y) + h2(y)  s.t.  A^* x + B^* y = c`
//!
//! with smooth `f1`, `h1` handled through quadratic majorants and nonsmooth
//! `f2`, `h2` through proximal maps. Also provides the M-ADMM and M-GADMM
//! baselines, convergence certificates and a benchmark problem family.

pub mod bench;
pub mod diagnostics;
pub mod error;
pub mod linops;
pub mod oracles;
pub mod solver;

pub use error::{Error, Result};
pub use solver::{
    solve, solve_gadmm_m, solve_m_admm, solve_m_gadmm, IterateTriple, PreparedProblem, ProblemSpec, ProximalTerm,
    RelaxedTriple, SolveReport, SolverConfig, SolverKind, Termination,
};
