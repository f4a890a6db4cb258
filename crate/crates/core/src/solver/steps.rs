use nalgebra::DVector;

use super::{IterateTriple, PreparedProblem, RelaxedTriple};
use crate::error::{check_dim, Result};

/// Output of a y-subproblem: the minimizer and the element of `dh2(y)`
/// read off its optimality condition.
#[derive(Debug, Clone, PartialEq)]
pub struct YStep {
    pub y: DVector<f64>,
    pub subgradient: DVector<f64>,
}

/// `argmin f2(x) + 1/2 <x, F x> + <grad f1(anchor) + A dual - F anchor, x>`
pub(crate) fn x_step(
    prob: &PreparedProblem,
    anchor: &DVector<f64>,
    grad: &DVector<f64>,
    dual: &DVector<f64>,
) -> Result<DVector<f64>> {
    let spec = prob.spec();
    let metric = prob.x_metric();
    let g = grad + spec.a_map.adjoint_apply(dual) - metric.op().apply(anchor);
    metric.minimize(&*spec.f2, &g)
}

/// `argmin h2(y) + 1/2 <y, H y> + <grad h1(anchor) + B dual - H anchor, y>`.
/// The subgradient is `-(linear + H y)`, which lies in `dh2(y)` exactly.
/// `grad` is `grad h1(anchor)`.
pub(crate) fn y_step(
    prob: &PreparedProblem,
    anchor: &DVector<f64>,
    grad: &DVector<f64>,
    dual: &DVector<f64>,
) -> Result<YStep> {
    let spec = prob.spec();
    let metric = prob.y_metric();
    let linear = grad + spec.b_map.adjoint_apply(dual) - metric.op().apply(anchor);
    let y = metric.minimize(&*spec.h2, &linear)?;
    let subgradient = -(linear + metric.op().apply(&y));
    Ok(YStep { y, subgradient })
}

/// The x-subproblem of one G-ADMM-M pass, anchored at the relaxed point.
pub fn x_update(prob: &PreparedProblem, relaxed: &RelaxedTriple) -> Result<DVector<f64>> {
    relaxed.check(prob.spec())?;
    let spec = prob.spec();
    let r = spec.a_map.apply(&relaxed.x) + spec.b_map.apply(&relaxed.y) - &spec.c;
    x_step(prob, &relaxed.x, &spec.f1.gradient(&relaxed.x), &(r * prob.sigma() + &relaxed.z))
}

/// `z = z~ + sigma (A^* x + B^* y~ - c)`
pub fn z_update(prob: &PreparedProblem, relaxed: &RelaxedTriple, x_new: &DVector<f64>) -> Result<DVector<f64>> {
    relaxed.check(prob.spec())?;
    let spec = prob.spec();
    check_dim("x update", spec.x_dim(), x_new.len())?;
    let r = spec.a_map.apply(x_new) + spec.b_map.apply(&relaxed.y) - &spec.c;
    Ok(&relaxed.z + r * prob.sigma())
}

/// The y-subproblem of one G-ADMM-M pass, using the new `x` and `z`.
pub fn y_update(
    prob: &PreparedProblem,
    relaxed: &RelaxedTriple,
    x_new: &DVector<f64>,
    z_new: &DVector<f64>,
) -> Result<YStep> {
    relaxed.check(prob.spec())?;
    let spec = prob.spec();
    check_dim("x update", spec.x_dim(), x_new.len())?;
    check_dim("z update", spec.z_dim(), z_new.len())?;
    let r = spec.a_map.apply(x_new) + spec.b_map.apply(&relaxed.y) - &spec.c;
    y_step(prob, &relaxed.y, &spec.h1.gradient(&relaxed.y), &(r * prob.sigma() + z_new))
}

/// `w~ + rho (w - w~)`. With `rho == 1` the current iterate is returned
/// bit for bit.
pub fn relax_step(relaxed: &RelaxedTriple, current: &IterateTriple, rho: f64) -> RelaxedTriple {
    let k = relaxed.k + 1;
    if rho == 1.0 {
        return RelaxedTriple {
            x: current.x.clone(),
            y: current.y.clone(),
            z: current.z.clone(),
            k,
        };
    }
    let mix = |t: &DVector<f64>, c: &DVector<f64>| t + (c - t) * rho;
    RelaxedTriple {
        x: mix(&relaxed.x, &current.x),
        y: mix(&relaxed.y, &current.y),
        z: mix(&relaxed.z, &current.z),
        k,
    }
}
