#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use gadmm::linops::{DenseMap, SelfAdjointOp};
use gadmm::oracles::{QuadraticTerm, ZeroProx};
use gadmm::{IterateTriple, ProblemSpec, ProximalTerm};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss_vec(r: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| StandardNormal.sample(r))
}

pub fn gauss_mat(r: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(r))
}

/// `W^T W / cols + shift I`
pub fn spd(r: &mut ChaCha8Rng, n: usize, shift: f64) -> DMatrix<f64> {
    let w = gauss_mat(r, n, n);
    let m = w.tr_mul(&w) / n as f64 + DMatrix::identity(n, n) * shift;
    (&m + m.transpose()) * 0.5
}

/// Data of `min 1/2 <x,Px> + <p,x> + 1/2 <y,Ry> + <r,y>  s.t.  Ax + By = c`
/// with dense `A`, `B` acting as the constraint maps.
#[derive(Debug, Clone)]
pub struct Quadratic {
    pub p: DMatrix<f64>,
    pub pl: DVector<f64>,
    pub r: DMatrix<f64>,
    pub rl: DVector<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DVector<f64>,
}

impl Quadratic {
    pub fn random(seed: u64, nx: usize, ny: usize, m: usize) -> Self {
        let mut g = rng(seed);
        Quadratic {
            p: spd(&mut g, nx, 0.5),
            pl: gauss_vec(&mut g, nx),
            r: spd(&mut g, ny, 0.5),
            rl: gauss_vec(&mut g, ny),
            a: gauss_mat(&mut g, m, nx),
            b: gauss_mat(&mut g, m, ny),
            c: gauss_vec(&mut g, m),
        }
    }

    pub fn spec(&self, s_term: ProximalTerm, t_term: ProximalTerm) -> ProblemSpec {
        ProblemSpec {
            f1: Arc::new(QuadraticTerm::new(SelfAdjointOp::Dense(self.p.clone()), self.pl.clone()).unwrap()),
            f2: Arc::new(ZeroProx),
            h1: Arc::new(QuadraticTerm::new(SelfAdjointOp::Dense(self.r.clone()), self.rl.clone()).unwrap()),
            h2: Arc::new(ZeroProx),
            a_map: Arc::new(DenseMap::new(self.a.clone())),
            b_map: Arc::new(DenseMap::new(self.b.clone())),
            c: self.c.clone(),
            s_term,
            t_term,
            dual_scale: 1.0 + self.rl.norm(),
        }
    }

    /// Exact KKT point from the saddle-point system
    /// `[P 0 A^T; 0 R B^T; A B 0] (x, y, z) = (-p, -r, c)`.
    pub fn kkt_point(&self) -> IterateTriple {
        let (nx, ny, m) = (self.p.nrows(), self.r.nrows(), self.c.len());
        let dim = nx + ny + m;
        let mut k = DMatrix::zeros(dim, dim);
        k.view_mut((0, 0), (nx, nx)).copy_from(&self.p);
        k.view_mut((nx, nx), (ny, ny)).copy_from(&self.r);
        k.view_mut((0, nx + ny), (nx, m)).copy_from(&self.a.transpose());
        k.view_mut((nx, nx + ny), (ny, m)).copy_from(&self.b.transpose());
        k.view_mut((nx + ny, 0), (m, nx)).copy_from(&self.a);
        k.view_mut((nx + ny, nx), (m, ny)).copy_from(&self.b);
        let mut rhs = DVector::zeros(dim);
        rhs.rows_mut(0, nx).copy_from(&(-&self.pl));
        rhs.rows_mut(nx, ny).copy_from(&(-&self.rl));
        rhs.rows_mut(nx + ny, m).copy_from(&self.c);
        let sol = k.lu().solve(&rhs).expect("saddle-point system is nonsingular");
        IterateTriple {
            x: sol.rows(0, nx).into_owned(),
            y: sol.rows(nx, ny).into_owned(),
            z: sol.rows(nx + ny, m).into_owned(),
            k: 0,
        }
    }
}
