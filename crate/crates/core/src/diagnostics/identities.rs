use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linops::SelfAdjointOp;

/// Largest relative violation found by [`check_operator_identities`].
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub trials: usize,
    pub max_violation: f64,
    /// Name of the relation attaining `max_violation`.
    pub worst: &'static str,
}

impl IdentityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.max_violation <= tol
    }
}

/// Relative defect of `lhs = rhs`, scaled by the magnitudes of the terms.
fn rel(lhs: f64, rhs: f64, scale: f64) -> f64 {
    (lhs - rhs).abs() / scale.max(1.0)
}

/// Violations of the seminorm relations for one operator and vector set:
/// the inequality `|u|^2 + |v|^2 >= 1/2 |u - v|^2`, both forms of
/// `2 <u, G v>`, and the four-point identity
/// `2 <u1 - u2, G (v1 - v2)> = |u1 - v2|^2 + |u2 - v1|^2 - |u1 - v1|^2 - |u2 - v2|^2`.
pub fn identity_violations(g: &SelfAdjointOp, u: &DVector<f64>, v: &DVector<f64>, w: &[DVector<f64>; 4]) -> [f64; 4] {
    let q = |a: &DVector<f64>| g.quadform(a);
    let (uu, vv, d, s) = (q(u), q(v), q(&(u - v)), q(&(u + v)));
    let cross = 2.0 * u.dot(&g.apply(v));
    let scale = uu.abs() + vv.abs() + d.abs() + s.abs() + cross.abs();

    let ineq = ((0.5 * d - (uu + vv)).max(0.0)) / scale.max(1.0);
    let left = rel(cross, uu + vv - d, scale);
    let right = rel(cross, s - uu - vv, scale);

    let [u1, u2, v1, v2] = w;
    let lhs = 2.0 * (u1 - u2).dot(&g.apply(&(v1 - v2)));
    let terms = [q(&(u1 - v2)), q(&(u2 - v1)), q(&(u1 - v1)), q(&(u2 - v2))];
    let rhs = terms[0] + terms[1] - terms[2] - terms[3];
    let four = rel(lhs, rhs, lhs.abs() + terms.iter().map(|t| t.abs()).sum::<f64>());
    [ineq, left, right, four]
}

/// Samples `trials` random PSD operators `G = W^T W` of random rank (the zero
/// operator included) with random vectors of mixed scale, and returns the
/// worst relative violation of the seminorm inequality and identities.
pub fn check_operator_identities(trials: usize, dim: usize, seed: u64) -> Result<IdentityReport> {
    if trials == 0 || dim == 0 {
        return Err(Error::InvalidArgument("trials and dim must be positive".into()));
    }
    const NAMES: [&str; 4] = ["seminorm inequality", "polarization (difference)", "polarization (sum)", "four-point identity"];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = IdentityReport {
        trials,
        max_violation: 0.0,
        worst: NAMES[0],
    };
    for _ in 0..trials {
        let rank = rng.gen_range(0..=dim);
        let w = DMatrix::from_fn(rank, dim, |_, _| StandardNormal.sample(&mut rng));
        let g = if rank == 0 {
            SelfAdjointOp::zero(dim)
        } else {
            SelfAdjointOp::Dense(w.tr_mul(&w))
        };
        let vec = |rng: &mut ChaCha8Rng| {
            let scale = 10f64.powf(rng.gen_range(-3.0..3.0));
            DVector::from_fn(dim, |_, _| {
                let s: f64 = StandardNormal.sample(rng);
                scale * s
            })
        };
        let (u, v) = (vec(&mut rng), vec(&mut rng));
        let pts = [vec(&mut rng), vec(&mut rng), vec(&mut rng), vec(&mut rng)];
        for (viol, name) in identity_violations(&g, &u, &v, &pts).into_iter().zip(NAMES) {
            if viol > report.max_violation {
                report.max_violation = viol;
                report.worst = name;
            }
        }
    }
    Ok(report)
}
