use nalgebra::DVector;

use crate::error::{check_dim, Result};
use crate::solver::{IterateTriple, ProblemSpec};

/// `max(||A^* x + B^* y - c|| / (1 + ||c||), ||grad h1(y) + B z + v|| / dual_scale)`
///
/// `v` is the element of `dh2(y)` produced by the y-subproblem.
pub fn kkt_residual(spec: &ProblemSpec, triple: &IterateTriple, v: &DVector<f64>) -> Result<f64> {
    triple.check(spec)?;
    check_dim("h2 subgradient", spec.y_dim(), v.len())?;
    let ax = spec.a_map.apply(&triple.x);
    let by = spec.b_map.apply(&triple.y);
    let (p, d) = residual_terms(spec, &ax, &by, &spec.h1.gradient(&triple.y), &triple.z, v);
    Ok(p.max(d))
}

/// Same as [`kkt_residual`] with `A^* x`, `B^* y` and `grad h1(y)` supplied
/// by the caller.
pub(crate) fn residual_parts(
    spec: &ProblemSpec,
    ax: &DVector<f64>,
    by: &DVector<f64>,
    grad_y: &DVector<f64>,
    z: &DVector<f64>,
    v: &DVector<f64>,
) -> f64 {
    let (primal, dual) = residual_terms(spec, ax, by, grad_y, z, v);
    primal.max(dual)
}

fn residual_terms(
    spec: &ProblemSpec,
    ax: &DVector<f64>,
    by: &DVector<f64>,
    grad_y: &DVector<f64>,
    z: &DVector<f64>,
    v: &DVector<f64>,
) -> (f64, f64) {
    let primal = (ax + by - &spec.c).norm() / (1.0 + spec.c.norm());
    let dual = (grad_y + spec.b_map.adjoint_apply(z) + v).norm() / spec.dual_scale;
    (primal, dual)
}

/// The normalized primal and dual parts of the KKT residual separately.
pub fn kkt_residual_terms(spec: &ProblemSpec, triple: &IterateTriple, v: &DVector<f64>) -> Result<(f64, f64)> {
    triple.check(spec)?;
    check_dim("h2 subgradient", spec.y_dim(), v.len())?;
    let ax = spec.a_map.apply(&triple.x);
    let by = spec.b_map.apply(&triple.y);
    Ok(residual_terms(spec, &ax, &by, &spec.h1.gradient(&triple.y), &triple.z, v))
}

/// `f1(x) + f2(x) + h1(y) + h2(y)`
pub fn objective_value(spec: &ProblemSpec, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
    spec.f1.value(x) + spec.f2.value(x) + spec.h1.value(y) + spec.h2.value(y)
}
