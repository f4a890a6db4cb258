use clarabel::algebra::CscMatrix;
use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus};
use nalgebra::{DMatrix, DVector};

use super::BenchInstance;
use crate::error::{Error, Result};
use crate::solver::IterateTriple;

/// A KKT triple of a benchmark instance computed independently of the
/// splitting methods, with the element of `d(mu ||.||_1)(y)` that pairs
/// with it in the residual.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSolution {
    pub triple: IterateTriple,
    pub subgradient: DVector<f64>,
    pub interior_point_iterations: u32,
}

/// Relative distance from `mu` below which a multiplier counts as strictly
/// inside the subdifferential of `|.|` at zero.
const INTERIOR_MARGIN: f64 = 1e-6;

/// `grad h1(y) + H^T z`
fn smooth_dual_gradient(inst: &BenchInstance, y: &DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    let mut g = &inst.q * y - &inst.b + inst.h.tr_mul(z);
    if inst.chi != 0.0 {
        let u = (&inst.d - &inst.h * y).component_mul(&inst.row_scale);
        let p = u.map(|t| t.max(0.0)).component_mul(&inst.row_scale);
        g -= inst.h.tr_mul(&p) * inst.chi;
    }
    g
}

/// Builds a CSC matrix column by column from `(row, value)` lists whose rows
/// are increasing.
fn csc(rows: usize, cols: Vec<Vec<(usize, f64)>>) -> CscMatrix<f64> {
    let mut colptr = Vec::with_capacity(cols.len() + 1);
    let (mut rowval, mut nzval) = (Vec::new(), Vec::new());
    colptr.push(0);
    let n = cols.len();
    for col in cols {
        for (r, v) in col {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    CscMatrix::new(rows, n, colptr, rowval, nzval)
}

/// Solves the benchmark as a conic QP with an interior-point method.
///
/// Variables are `(y, t, w)` with `|y| <= t` and, when `chi > 0`,
/// `w >= max(D (d - H y), 0)`:
///
/// `min 1/2 <y, Q y> - <b, y> + mu <1, t> + chi/2 ||w||^2  s.t.  H y <= c`.
///
/// The multiplier of `H y <= c` is `z`, and `x = max(c - H y, 0)`.
pub fn reference_solution(inst: &BenchInstance) -> Result<ReferenceSolution> {
    let (m, n) = (inst.m, inst.n);
    let penalized = inst.chi != 0.0;
    let nw = if penalized { m } else { 0 };
    let nv = 2 * n + nw;
    let rows = m + 2 * n + 2 * nw;

    // Upper triangle of blockdiag(Q, 0, chi I).
    let mut p_cols: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|j| (0..=j).map(|i| (i, inst.q[(i, j)])).filter(|&(_, v)| v != 0.0).collect())
        .collect();
    p_cols.extend((0..n).map(|_| Vec::new()));
    p_cols.extend((0..nw).map(|i| vec![(2 * n + i, inst.chi)]));

    let mut a_cols: Vec<Vec<(usize, f64)>> = Vec::with_capacity(nv);
    for j in 0..n {
        let mut col: Vec<(usize, f64)> = (0..m).map(|i| (i, inst.h[(i, j)])).collect();
        col.push((m + j, 1.0));
        col.push((m + n + j, -1.0));
        if penalized {
            col.extend((0..m).map(|i| (m + 2 * n + i, -inst.row_scale[i] * inst.h[(i, j)])));
        }
        a_cols.push(col);
    }
    for j in 0..n {
        a_cols.push(vec![(m + j, -1.0), (m + n + j, -1.0)]);
    }
    for i in 0..nw {
        a_cols.push(vec![(m + 2 * n + i, -1.0), (m + 2 * n + m + i, -1.0)]);
    }

    let mut q = vec![0.0; nv];
    let mut rhs = vec![0.0; rows];
    for j in 0..n {
        q[j] = -inst.b[j];
        q[n + j] = inst.mu;
    }
    rhs[..m].copy_from_slice(inst.c.as_slice());
    for i in 0..nw {
        rhs[m + 2 * n + i] = -inst.row_scale[i] * inst.d[i];
    }

    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .max_iter(200)
        .tol_gap_abs(1e-12)
        .tol_gap_rel(1e-12)
        .tol_feas(1e-12)
        .tol_ktratio(1e-10)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("{e:?}")))?;
    let p = csc(nv, p_cols);
    let a = csc(rows, a_cols);
    let cones = [NonnegativeConeT(rows)];
    let mut solver = DefaultSolver::new(&p, &q, &a, &rhs, &cones, settings)
        .map_err(|e| Error::Subproblem(format!("reference solver setup: {e:?}")))?;
    solver.solve();
    let sol = &solver.solution;
    if !matches!(sol.status, SolverStatus::Solved | SolverStatus::AlmostSolved) {
        return Err(Error::Subproblem(format!("reference solver stopped with status {:?}", sol.status)));
    }

    let z = DVector::from_column_slice(&sol.z[..m]);
    let y = DVector::from_column_slice(&sol.x[..n]);
    let mut best = assemble(inst, snap_zeros(inst, y, &z), z);
    if let Some(polished) = polish(inst, &best) {
        if polished.1 < best.1 {
            best = polished;
        }
    }
    let (triple, _, subgradient) = (best.0, best.1, best.2);
    Ok(ReferenceSolution {
        triple,
        subgradient,
        interior_point_iterations: sol.iterations,
    })
}

/// Interior-point iterates only approach the zeros of `y`; components whose
/// multiplier is strictly inside `(-mu, mu)` are zero at the solution.
fn snap_zeros(inst: &BenchInstance, mut y: DVector<f64>, z: &DVector<f64>) -> DVector<f64> {
    let grad = smooth_dual_gradient(inst, &y, z);
    for j in 0..inst.n {
        let v = -grad[j];
        if v.abs() < inst.mu * (1.0 - INTERIOR_MARGIN) || v * y[j] < 0.0 {
            y[j] = 0.0;
        }
    }
    y
}

/// Completes `(y, z)` to a triple with its subgradient and an unnormalized
/// KKT defect `max(||x + H y - c||, ||grad h1(y) + H^T z + v||)`.
fn assemble(inst: &BenchInstance, y: DVector<f64>, z: DVector<f64>) -> (IterateTriple, f64, DVector<f64>) {
    let grad = smooth_dual_gradient(inst, &y, &z);
    let v = DVector::from_fn(inst.n, |j, _| {
        if y[j] == 0.0 {
            (-grad[j]).clamp(-inst.mu, inst.mu)
        } else {
            inst.mu * y[j].signum()
        }
    });
    let slack = &inst.c - &inst.h * &y;
    let x = slack.map(|t| t.max(0.0));
    let defect = (&x - &slack).norm().max((&grad + &v).norm());
    (IterateTriple { x, y, z, k: 0 }, defect, v)
}

/// Re-solves the stationarity and complementarity equations on the active
/// set of `start` (support and signs of `y`, rows with `z_i > slack_i`).
/// Returns `None` when the result leaves the active set's sign pattern.
/// Only the unpenalized family is handled; the penalty term makes the
/// equations piecewise.
fn polish(inst: &BenchInstance, start: &(IterateTriple, f64, DVector<f64>)) -> Option<(IterateTriple, f64, DVector<f64>)> {
    if inst.chi != 0.0 {
        return None;
    }
    let t = &start.0;
    let slack = &inst.c - &inst.h * &t.y;
    let supp: Vec<usize> = (0..inst.n).filter(|&j| t.y[j] != 0.0).collect();
    let act: Vec<usize> = (0..inst.m).filter(|&i| t.z[i] > slack[i]).collect();
    let (ns, na) = (supp.len(), act.len());
    if ns + na == 0 {
        return None;
    }
    // [H_AS   0    ] [y_S]   [c_A                 ]
    // [Q_SS   H_AS^T] [z_A] = [b_S - mu sign(y_S)  ]
    let mut k = DMatrix::zeros(na + ns, ns + na);
    let mut rhs = DVector::zeros(na + ns);
    for (r, &i) in act.iter().enumerate() {
        for (c, &j) in supp.iter().enumerate() {
            k[(r, c)] = inst.h[(i, j)];
            k[(na + c, ns + r)] = inst.h[(i, j)];
        }
        rhs[r] = inst.c[i];
    }
    for (r, &j) in supp.iter().enumerate() {
        for (c, &jj) in supp.iter().enumerate() {
            k[(na + r, c)] = inst.q[(j, jj)];
        }
        rhs[na + r] = inst.b[j] - inst.mu * t.y[j].signum();
    }
    let sol = k.svd(true, true).solve(&rhs, 1e-12).ok()?;
    let mut y = DVector::zeros(inst.n);
    let mut z = DVector::zeros(inst.m);
    for (c, &j) in supp.iter().enumerate() {
        if sol[c] * t.y[j] <= 0.0 {
            return None;
        }
        y[j] = sol[c];
    }
    for (r, &i) in act.iter().enumerate() {
        if sol[ns + r] < 0.0 {
            return None;
        }
        z[i] = sol[ns + r];
    }
    let out = assemble(inst, y, z);
    let grad = smooth_dual_gradient(inst, &out.0.y, &out.0.z);
    let inactive_ok = (0..inst.n).all(|j| out.0.y[j] != 0.0 || grad[j].abs() <= inst.mu * (1.0 + 1e-12));
    inactive_ok.then_some(out)
}
