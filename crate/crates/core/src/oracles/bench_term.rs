use std::sync::Arc;

use nalgebra::DVector;

use super::SmoothTerm;
use crate::bench::BenchInstance;
use crate::error::{check_dim, Result};
use crate::linops::SelfAdjointOp;

/// The smooth part of the benchmark objective,
/// `h(y) = 1/2 <y, Q y> - <b, y> + chi/2 ||max(D (d - H y), 0)||^2`,
/// with majorant `Q + chi H^T D^2 H` and minorant `Q`.
#[derive(Debug, Clone)]
pub struct BenchSmoothTerm {
    inst: Arc<BenchInstance>,
    upper: SelfAdjointOp,
    lower: SelfAdjointOp,
}

impl BenchSmoothTerm {
    pub fn new(inst: Arc<BenchInstance>) -> Self {
        let lower = SelfAdjointOp::Dense(inst.q.clone());
        let upper = if inst.chi == 0.0 {
            lower.clone()
        } else {
            let dh = inst.scaled_h();
            SelfAdjointOp::Dense(&inst.q + dh.tr_mul(&dh) * inst.chi)
        };
        BenchSmoothTerm { inst, upper, lower }
    }

    pub fn instance(&self) -> &BenchInstance {
        &self.inst
    }

    /// `max(D (d - H y), 0)`
    fn penalty_residual(&self, y: &DVector<f64>) -> DVector<f64> {
        let inst = &*self.inst;
        let u = (&inst.d - &inst.h * y).component_mul(&inst.row_scale);
        u.map(|t| t.max(0.0))
    }
}

impl SmoothTerm for BenchSmoothTerm {
    fn dim(&self) -> usize {
        self.inst.n
    }

    fn value(&self, y: &DVector<f64>) -> f64 {
        let inst = &*self.inst;
        let mut v = 0.5 * y.dot(&(&inst.q * y)) - inst.b.dot(y);
        if inst.chi != 0.0 {
            v += 0.5 * inst.chi * self.penalty_residual(y).norm_squared();
        }
        v
    }

    fn gradient(&self, y: &DVector<f64>) -> DVector<f64> {
        let inst = &*self.inst;
        let mut g = &inst.q * y - &inst.b;
        if inst.chi != 0.0 {
            // Zero branch of max(., 0) at kinks.
            let p = self.penalty_residual(y).component_mul(&inst.row_scale);
            g -= inst.h.tr_mul(&p) * inst.chi;
        }
        g
    }

    fn upper_op(&self) -> &SelfAdjointOp {
        &self.upper
    }

    fn lower_op(&self) -> &SelfAdjointOp {
        &self.lower
    }

    fn has_affine_gradient(&self) -> bool {
        self.inst.chi == 0.0
    }
}

/// `Q y - b - chi H^T D max(D (d - H y), 0)`
pub fn bench_h1_gradient(y: &DVector<f64>, data: &BenchInstance) -> Result<DVector<f64>> {
    check_dim("benchmark gradient point", data.n, y.len())?;
    let mut g = &data.q * y - &data.b;
    if data.chi != 0.0 {
        let u = (&data.d - &data.h * y).component_mul(&data.row_scale);
        let p = u.map(|t| t.max(0.0)).component_mul(&data.row_scale);
        g -= data.h.tr_mul(&p) * data.chi;
    }
    Ok(g)
}
