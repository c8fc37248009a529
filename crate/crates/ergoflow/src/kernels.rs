//! Positive-definite kernels, their gradients, and bandwidth selection.
//!
//! The Gaussian RBF kernel `k(a, b) = exp(-||a-b||^2 / (2 h^2))` is the sole
//! family: it is characteristic, which the ergodicity guarantee of the MMD
//! metric requires. The enum leaves room for future families.

use crate::error::{Error, Result};
use crate::types::Point;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    GaussianRbf,
}

/// Kernel family plus bandwidth `h` in length units of the ambient space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    pub family: KernelFamily,
    pub bandwidth: f64,
}

impl KernelParams {
    pub fn gaussian(bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::InvalidKernel(format!(
                "bandwidth must be positive and finite, got {bandwidth}"
            )));
        }
        Ok(Self { family: KernelFamily::GaussianRbf, bandwidth })
    }

    /// `1 / (2 h^2)`, the coefficient of the squared distance.
    #[inline]
    pub(crate) fn inv_two_h2(&self) -> f64 {
        1.0 / (2.0 * self.bandwidth * self.bandwidth)
    }

    /// `1 / h^2`, the coefficient in the kernel gradient.
    #[inline]
    pub(crate) fn inv_h2(&self) -> f64 {
        1.0 / (self.bandwidth * self.bandwidth)
    }
}

/// Raw RBF evaluation on coordinate slices. Callers guarantee equal lengths.
#[inline]
pub(crate) fn rbf(a: &[f64], b: &[f64], inv_two_h2: f64) -> f64 {
    let mut sq = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        let d = x - y;
        sq += d * d;
    }
    (-sq * inv_two_h2).exp()
}

/// Evaluates `k(a, b) = exp(-||a-b||^2 / (2 h^2))`, in `(0, 1]`.
pub fn kernel_eval(a: &Point, b: &Point, p: &KernelParams) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    Ok(rbf(&a.coords, &b.coords, p.inv_two_h2()))
}

/// Gradient of the kernel with respect to its first argument:
/// `dk/da = -(a - b) / h^2 * k(a, b)`.
pub fn kernel_grad_a(a: &Point, b: &Point, p: &KernelParams) -> Result<Vec<f64>> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let k = rbf(&a.coords, &b.coords, p.inv_two_h2());
    let c = -p.inv_h2() * k;
    Ok(a.coords
        .iter()
        .zip(b.coords.iter())
        .map(|(x, y)| c * (x - y))
        .collect())
}

/// Median of the pairwise Euclidean distances over all unordered pairs.
///
/// Deterministic, scale-adaptive default bandwidth for the MMD metric.
pub fn median_heuristic_bandwidth(points: &[Point]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::DegenerateBandwidth(format!(
            "need at least 2 points, got {}",
            points.len()
        )));
    }
    let dim = points[0].dim();
    if points.iter().any(|p| p.dim() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: 0 });
    }
    let mut dists = Vec::with_capacity(points.len() * (points.len() - 1) / 2);
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            dists.push(crate::types::euclidean(&points[i].coords, &points[j].coords));
        }
    }
    dists.sort_by(|a, b| a.total_cmp(b));
    let n = dists.len();
    let median = if n % 2 == 1 {
        dists[n / 2]
    } else {
        0.5 * (dists[n / 2 - 1] + dists[n / 2])
    };
    if median <= 0.0 {
        return Err(Error::DegenerateBandwidth(
            "pairwise distances have zero median (points coincide)".into(),
        ));
    }
    Ok(median)
}
