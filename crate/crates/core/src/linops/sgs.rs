use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use super::SelfAdjointOp;
use crate::error::{check_dim, Error, Result};
use crate::oracles::ProxOracle;

/// A symmetric PSD quadratic `Q = U + Sigma + U^T` split into diagonal blocks
/// `Sigma_i` and strictly upper blocks `U_ij` (`i < j`).
#[derive(Debug, Clone)]
pub struct BlockQuadratic {
    q: DMatrix<f64>,
    block_dims: Vec<usize>,
    offsets: Vec<usize>,
    diag_factors: Vec<Cholesky<f64, Dyn>>,
}

impl BlockQuadratic {
    /// Splits a dense symmetric matrix into the given block sizes.
    ///
    /// Every diagonal block must be positive definite with smallest eigenvalue
    /// above `1e-12` times its largest; otherwise the offending block index
    /// (zero-based) is reported.
    pub fn from_dense(q: DMatrix<f64>, block_dims: Vec<usize>) -> Result<Self> {
        if !q.is_square() {
            return Err(Error::InvalidArgument("block quadratic must be square".into()));
        }
        if block_dims.is_empty() || block_dims.contains(&0) {
            return Err(Error::InvalidArgument("block sizes must be positive".into()));
        }
        check_dim("block sizes", q.nrows(), block_dims.iter().sum())?;
        let scale = q.amax().max(f64::MIN_POSITIVE);
        if (&q - q.transpose()).amax() > 1e-12 * scale {
            return Err(Error::InvalidArgument("block quadratic is not symmetric".into()));
        }

        let mut offsets = Vec::with_capacity(block_dims.len() + 1);
        let mut acc = 0;
        for &d in &block_dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);

        let mut diag_factors = Vec::with_capacity(block_dims.len());
        for (i, &d) in block_dims.iter().enumerate() {
            let block = q.view((offsets[i], offsets[i]), (d, d)).into_owned();
            let eig = block.clone().symmetric_eigen().eigenvalues;
            let top = eig.amax();
            if eig.min().is_nan() || eig.min() <= 1e-12 * top {
                return Err(Error::SingularBlock { block: i });
            }
            let chol = Cholesky::new(block).ok_or(Error::SingularBlock { block: i })?;
            diag_factors.push(chol);
        }

        Ok(BlockQuadratic {
            q,
            block_dims,
            offsets,
            diag_factors,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.nrows()
    }

    pub fn num_blocks(&self) -> usize {
        self.block_dims.len()
    }

    pub fn block_dims(&self) -> &[usize] {
        &self.block_dims
    }

    /// The full operator `Q`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.q
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    /// `Q_ij` as a view.
    fn block(&self, i: usize, j: usize) -> nalgebra::DMatrixView<'_, f64> {
        self.q
            .view((self.offsets[i], self.offsets[j]), (self.block_dims[i], self.block_dims[j]))
    }

    /// Strictly block-upper part `U`.
    pub fn upper(&self) -> DMatrix<f64> {
        let n = self.dim();
        let mut u = DMatrix::zeros(n, n);
        for i in 0..self.num_blocks() {
            for j in (i + 1)..self.num_blocks() {
                u.view_mut((self.offsets[i], self.offsets[j]), (self.block_dims[i], self.block_dims[j]))
                    .copy_from(&self.block(i, j));
            }
        }
        u
    }

    /// `sum_{j != i} Q_ij x_j`, reading `x` block-wise.
    fn coupling(&self, i: usize, x: &DVector<f64>) -> DVector<f64> {
        let mut acc = DVector::zeros(self.block_dims[i]);
        for j in 0..self.num_blocks() {
            if j != i {
                acc += self.block(i, j) * x.rows(self.offsets[j], self.block_dims[j]);
            }
        }
        acc
    }
}

/// `S = U Sigma^{-1} U^T`, the proximal operator whose addition to `Q` turns one
/// symmetric Gauss-Seidel sweep into an exact minimization.
pub fn sgs_operator(q: &BlockQuadratic) -> SelfAdjointOp {
    let n = q.dim();
    if q.num_blocks() == 1 {
        return SelfAdjointOp::zero(n);
    }
    let u = q.upper();
    // Sigma^{-1} U^T, block row by block row.
    let ut = u.transpose();
    let mut sinv_ut = DMatrix::zeros(n, n);
    for i in 0..q.num_blocks() {
        let r = q.range(i);
        let rows = ut.rows(r.start, r.len()).into_owned();
        let solved = q.diag_factors[i].solve(&rows);
        sinv_ut.rows_mut(r.start, r.len()).copy_from(&solved);
    }
    let s = &u * sinv_ut;
    // Symmetrize away rounding so the result is exactly self-adjoint.
    let s = (&s + s.transpose()) * 0.5;
    SelfAdjointOp::Dense(s)
}

/// Minimizes `g(x_1) + 1/2 <x, Q x> + <linear_term, x> + 1/2 ||x - anchor||_S^2`
/// with `S = sgs_operator(q)` by a backward sweep over blocks `s..2`, a
/// proximal step on block 1, then a forward sweep over `2..s`.
///
/// With `prox_first == None` the result solves `(Q + S) x = -linear_term + S anchor`.
/// A proximal step needs block 1's diagonal to be diagonal, since prox oracles
/// only accept per-coordinate weights.
pub fn sgs_sweep(
    q: &BlockQuadratic,
    prox_first: Option<&dyn ProxOracle>,
    linear_term: &DVector<f64>,
    anchor: &DVector<f64>,
) -> Result<DVector<f64>> {
    let n = q.dim();
    check_dim("sGS linear term", n, linear_term.len())?;
    check_dim("sGS anchor", n, anchor.len())?;
    let s = q.num_blocks();

    let block_solve = |i: usize, x: &DVector<f64>| -> DVector<f64> {
        let rhs = -(linear_term.rows(q.offsets[i], q.block_dims[i]) + q.coupling(i, x));
        q.diag_factors[i].solve(&rhs)
    };

    // Backward sweep: blocks below i sit at the anchor, blocks above i hold
    // the freshly computed predictor values.
    let mut x = anchor.clone();
    for i in (1..s).rev() {
        let xi = block_solve(i, &x);
        check_finite(&xi, i)?;
        x.rows_mut(q.offsets[i], q.block_dims[i]).copy_from(&xi);
    }

    // Block 1, with the nonsmooth term.
    let x1 = match prox_first {
        None => block_solve(0, &x),
        Some(p) if p.is_zero() => block_solve(0, &x),
        Some(p) => {
            let sigma1 = q.block(0, 0).into_owned();
            let d = sigma1.diagonal();
            let off = &sigma1 - DMatrix::from_diagonal(&d);
            if off.amax() != 0.0 {
                return Err(Error::BlockSolve {
                    block: 0,
                    reason: "nonsmooth block needs a diagonal Sigma_1 for the weighted prox".into(),
                });
            }
            let r1 = linear_term.rows(0, q.block_dims[0]) + q.coupling(0, &x);
            let v = -r1.component_div(&d);
            p.prox(&v, &d).map_err(|e| Error::BlockSolve {
                block: 0,
                reason: e.to_string(),
            })?
        }
    };
    check_finite(&x1, 0)?;
    x.rows_mut(0, q.block_dims[0]).copy_from(&x1);

    // Forward sweep.
    for i in 1..s {
        let xi = block_solve(i, &x);
        check_finite(&xi, i)?;
        x.rows_mut(q.offsets[i], q.block_dims[i]).copy_from(&xi);
    }
    Ok(x)
}

fn check_finite(v: &DVector<f64>, block: usize) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::BlockSolve {
            block,
            reason: "non-finite block solution".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::L1Norm;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_psd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n + 2, n, |_, _| StandardNormal.sample(&mut rng));
        g.tr_mul(&g) / (n as f64) + DMatrix::identity(n, n) * 0.1
    }

    fn randv(n: usize, seed: u64) -> DVector<f64> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng))
    }

    /// Independent dense computation of `U Sigma^{-1} U^T`.
    fn dense_sgs(q: &DMatrix<f64>, dims: &[usize]) -> DMatrix<f64> {
        let n = q.nrows();
        let mut u = DMatrix::zeros(n, n);
        let mut sig = DMatrix::zeros(n, n);
        let mut off = vec![0];
        for d in dims {
            off.push(off.last().unwrap() + d);
        }
        for i in 0..n {
            for j in 0..n {
                let bi = off.iter().rposition(|&o| o <= i).unwrap();
                let bj = off.iter().rposition(|&o| o <= j).unwrap();
                if bi < bj {
                    u[(i, j)] = q[(i, j)];
                } else if bi == bj {
                    sig[(i, j)] = q[(i, j)];
                }
            }
        }
        &u * sig.try_inverse().unwrap() * u.transpose()
    }

    #[test]
    fn single_block_gives_zero_operator() {
        let q = BlockQuadratic::from_dense(random_psd(4, 1), vec![4]).unwrap();
        assert!(sgs_operator(&q).is_zero());
    }

    #[test]
    fn two_by_two_scalar_blocks() {
        let q = BlockQuadratic::from_dense(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]), vec![1, 1])
            .unwrap();
        let s = sgs_operator(&q).to_dense();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0 / 3.0, 0.0, 0.0, 0.0]);
        assert!((s - expected).amax() < 1e-15);
    }

    #[test]
    fn three_blocks_match_dense_oracle() {
        let qm = random_psd(9, 3);
        let dims = vec![2, 3, 4];
        let q = BlockQuadratic::from_dense(qm.clone(), dims.clone()).unwrap();
        let s = sgs_operator(&q).to_dense();
        assert!((s - dense_sgs(&qm, &dims)).amax() < 1e-12);
    }

    #[test]
    fn singular_block_is_identified() {
        let mut qm = random_psd(4, 5);
        for k in 0..4 {
            qm[(2, k)] = 0.0;
            qm[(k, 2)] = 0.0;
        }
        match BlockQuadratic::from_dense(qm, vec![2, 1, 1]) {
            Err(Error::SingularBlock { block }) => assert_eq!(block, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn single_block_sweep_is_direct_solve() {
        let qm = random_psd(5, 8);
        let q = BlockQuadratic::from_dense(qm.clone(), vec![5]).unwrap();
        let l = randv(5, 9);
        let x = sgs_sweep(&q, None, &l, &randv(5, 10)).unwrap();
        assert!((&qm * &x + &l).amax() < 1e-12);
    }

    #[test]
    fn two_block_sweep_matches_dense_solve() {
        let qm = random_psd(6, 11);
        let q = BlockQuadratic::from_dense(qm.clone(), vec![2, 4]).unwrap();
        let s = dense_sgs(&qm, &[2, 4]);
        let l = randv(6, 12);
        let a = randv(6, 13);
        let x = sgs_sweep(&q, None, &l, &a).unwrap();
        let rhs = -&l + &s * &a;
        let direct = (&qm + &s).lu().solve(&rhs).unwrap();
        assert!((x - &direct).amax() <= 1e-10 * (1.0 + rhs.norm()));
    }

    /// Two scalar blocks with an l1 term on block 1: compare with a brute-force
    /// grid search refined around the best cell.
    #[test]
    fn prox_block_matches_grid_oracle() {
        let qm = DMatrix::from_row_slice(2, 2, &[2.0, 0.7, 0.7, 1.5]);
        let q = BlockQuadratic::from_dense(qm.clone(), vec![1, 1]).unwrap();
        let s = sgs_operator(&q).to_dense();
        let l = DVector::from_vec(vec![-1.3, 0.4]);
        let a = DVector::from_vec(vec![0.2, -0.5]);
        let mu = 0.6;
        let obj = |x0: f64, x1: f64| {
            let x = DVector::from_vec(vec![x0, x1]);
            let d = &x - &a;
            mu * x0.abs() + 0.5 * x.dot(&(&qm * &x)) + l.dot(&x) + 0.5 * d.dot(&(&s * &d))
        };
        let (mut c0, mut c1, mut h) = (0.0, 0.0, 2.0);
        for _ in 0..60 {
            let mut best = (f64::INFINITY, c0, c1);
            for i in -20..=20 {
                for j in -20..=20 {
                    let (p0, p1) = (c0 + h * i as f64 / 20.0, c1 + h * j as f64 / 20.0);
                    let f = obj(p0, p1);
                    if f < best.0 {
                        best = (f, p0, p1);
                    }
                }
            }
            c0 = best.1;
            c1 = best.2;
            h *= 0.25;
        }
        let prox = L1Norm::new(mu).unwrap();
        let x = sgs_sweep(&q, Some(&prox), &l, &a).unwrap();
        assert!((x[0] - c0).abs() < 1e-6 && (x[1] - c1).abs() < 1e-6, "{x} vs ({c0},{c1})");
    }

    #[test]
    fn prox_needs_diagonal_first_block() {
        let q = BlockQuadratic::from_dense(random_psd(4, 2), vec![2, 2]).unwrap();
        let prox = L1Norm::new(1.0).unwrap();
        let err = sgs_sweep(&q, Some(&prox), &randv(4, 1), &randv(4, 2)).unwrap_err();
        assert!(matches!(err, Error::BlockSolve { block: 0, .. }));
    }
}
