use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Penalty weight selection for the benchmark family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ChiMode {
    Zero,
    /// `chi = 2 mu`
    TwiceMu,
    Value(f64),
}

impl ChiMode {
    pub fn resolve(self, mu: f64) -> f64 {
        match self {
            ChiMode::Zero => 0.0,
            ChiMode::TwiceMu => 2.0 * mu,
            ChiMode::Value(v) => v,
        }
    }
}

impl std::str::FromStr for ChiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "0" | "zero" => Ok(ChiMode::Zero),
            "2mu" | "2*mu" => Ok(ChiMode::TwiceMu),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|v| *v >= 0.0 && v.is_finite())
                .map(ChiMode::Value)
                .ok_or_else(|| Error::InvalidArgument(format!("chi must be 0, 2mu or a nonnegative number, got '{other}'"))),
        }
    }
}

impl std::fmt::Display for ChiMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChiMode::Zero => write!(f, "0"),
            ChiMode::TwiceMu => write!(f, "2mu"),
            ChiMode::Value(v) => write!(f, "{v}"),
        }
    }
}

/// Data of the composite quadratic benchmark
///
/// `min 1/2 <y,Qy> - <b,y> + chi/2 ||max(D(d - Hy), 0)||^2 + mu ||y||_1 + indicator(x >= 0)`
/// `s.t. H y + x = c`.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchInstance {
    pub m: usize,
    pub n: usize,
    /// `n x n`, symmetric PSD.
    pub q: DMatrix<f64>,
    /// `m x n`
    pub h: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: DVector<f64>,
    /// `c - 5 e`
    pub d: DVector<f64>,
    /// Diagonal of `D`: inverse row norms of `H`.
    pub row_scale: DVector<f64>,
    pub chi: f64,
    /// `5 sqrt(n)`
    pub mu: f64,
    pub seed: u64,
}

impl BenchInstance {
    /// `D H`, whose rows have unit norm.
    pub fn scaled_h(&self) -> DMatrix<f64> {
        let mut dh = self.h.clone();
        for (i, mut row) in dh.row_iter_mut().enumerate() {
            row *= self.row_scale[i];
        }
        dh
    }

    /// Full objective at `(x, y)`; infinite when `x` leaves the orthant.
    pub fn objective(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        if x.iter().any(|&t| t < 0.0) {
            return f64::INFINITY;
        }
        let mut v = 0.5 * y.dot(&(&self.q * y)) - self.b.dot(y) + self.mu * y.lp_norm(1);
        if self.chi != 0.0 {
            let u = (&self.d - &self.h * y).component_mul(&self.row_scale);
            v += 0.5 * self.chi * u.map(|t| t.max(0.0)).norm_squared();
        }
        v
    }
}

/// Draws a benchmark instance. All randomness comes from a ChaCha8 stream
/// seeded with `seed`, consumed in the order `G`, `H`, `b`, `e`, `y0`, so
/// equal arguments give bit-identical instances.
///
/// `Q = G^T G / n` with `G` an `n x n` standard normal matrix; `H`, `b`, `e`
/// are standard normal and `y0` is normal with variance `1/n`.
/// `c = H y0 + |e|`, so `(x, y) = (|e|, y0)` is feasible for every shape.
/// A standard normal `c` leaves `H y <= c` empty with high probability
/// once `m > n`.
pub fn generate_instance(m: usize, n: usize, chi: ChiMode, seed: u64) -> Result<BenchInstance> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("instance dimensions must be positive, got ({m}, {n})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = || -> f64 { StandardNormal.sample(&mut rng) };

    let g = DMatrix::from_fn(n, n, |_, _| draw());
    let h = DMatrix::from_fn(m, n, |_, _| draw());
    let b = DVector::from_fn(n, |_, _| draw());
    let e = DVector::from_fn(m, |_, _| draw());
    let y0 = DVector::from_fn(n, |_, _| draw() / (n as f64).sqrt());
    let c = &h * &y0 + e.abs();

    let mut q = g.tr_mul(&g) / n as f64;
    // Exact symmetry; the product is symmetric only up to rounding.
    q = (&q + q.transpose()) * 0.5;

    let row_scale = DVector::from_fn(m, |i, _| {
        let norm = h.row(i).norm();
        if norm > 0.0 {
            1.0 / norm
        } else {
            log::warn!("row {i} of H is zero; using unit scaling");
            1.0
        }
    });
    let d = c.add_scalar(-5.0);
    let mu = 5.0 * (n as f64).sqrt();

    Ok(BenchInstance {
        m,
        n,
        q,
        h,
        b,
        c,
        d,
        row_scale,
        chi: chi.resolve(mu),
        mu,
        seed,
    })
}
