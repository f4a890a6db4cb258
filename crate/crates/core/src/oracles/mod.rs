//! Smooth-term oracles (value, gradient, majorant operators) and proximal
//! oracles for the nonsmooth terms.

mod bench_term;
mod prox;
mod smooth;

pub use bench_term::{bench_h1_gradient, BenchSmoothTerm};
pub use prox::{prox_l1, project_nonneg, FirstBlock, L1Norm, NonnegOrthant, ProxOracle, ZeroProx};
pub use smooth::{quadratic_majorant, QuadraticMajorant, QuadraticTerm, SmoothTerm};
