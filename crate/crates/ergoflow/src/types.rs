//! Shared geometric and statistical value types.
//!
//! All types here are immutable value types after construction and safe to
//! share across threads. Reals are `f64` throughout.

use crate::error::{Error, Result};

/// A point in the ambient space `R^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: Vec<f64>,
}

impl Point {
    /// Builds a point, rejecting empty or non-finite coordinates.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidConfig("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("point coordinates".into()));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }
}

/// Euclidean distance between two coordinate slices of equal length.
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A discrete-time state trajectory together with its projection into the
/// ambient search space.
///
/// `states[t]` is the full robot state; `projected[t]` is its image under the
/// owning dynamics model's projection. Both have length `T >= 1`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub states: Vec<Vec<f64>>,
    pub projected: Vec<Point>,
    pub dt: f64,
}

impl Trajectory {
    pub fn new(states: Vec<Vec<f64>>, projected: Vec<Point>, dt: f64) -> Result<Self> {
        if states.is_empty() || states.len() != projected.len() {
            return Err(Error::DimensionMismatch {
                expected: states.len().max(1),
                got: projected.len(),
            });
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("trajectory dt must be positive, got {dt}")));
        }
        Ok(Self { states, projected, dt })
    }

    /// Builds a trajectory whose states are the projected points themselves.
    /// Convenient when no richer dynamics state exists.
    pub fn from_points(points: Vec<Point>, dt: f64) -> Result<Self> {
        let states = points.iter().map(|p| p.coords.clone()).collect();
        Self::new(states, points, dt)
    }

    /// Number of states `T`.
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// An ordered control sequence `u_0 .. u_{T-2}`.
///
/// Under the rollout convention, applying the sequence to an initial state
/// produces a trajectory with one more state than there are controls.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSequence {
    pub controls: Vec<Vec<f64>>,
}

impl ControlSequence {
    pub fn new(controls: Vec<Vec<f64>>) -> Self {
        Self { controls }
    }

    pub fn zeros(len: usize, dim: usize) -> Self {
        Self { controls: vec![vec![0.0; dim]; len] }
    }

    pub fn len(&self) -> usize {
        self.controls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.controls.is_empty()
    }
}

/// A weighted point set representing a probability measure on the ambient
/// space. Weights are nonnegative and sum to one within 1e-12.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalMeasure {
    points: Vec<Point>,
    weights: Vec<f64>,
}

impl EmpiricalMeasure {
    /// Measure with uniform weights `1/M`.
    pub fn uniform(points: Vec<Point>) -> Result<Self> {
        let m = points.len();
        let raw = vec![1.0; m.max(1)];
        Self::weighted(points, &raw)
    }

    /// Measure with weights proportional to `raw`.
    pub fn weighted(points: Vec<Point>, raw: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidMeasure("measure needs at least one point".into()));
        }
        if points.len() != raw.len() {
            return Err(Error::DimensionMismatch { expected: points.len(), got: raw.len() });
        }
        let dim = points[0].dim();
        if points.iter().any(|p| p.dim() != dim) {
            return Err(Error::InvalidMeasure("all points must share one dimension".into()));
        }
        let weights = normalize_weights(raw)?;
        Ok(Self { points, weights })
    }

    /// Rebuilds a measure from already-normalized parts. Used internally by
    /// push-forward, which must keep weights bit-identical.
    pub(crate) fn from_normalized_parts(points: Vec<Point>, weights: Vec<f64>) -> Self {
        Self { points, weights }
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points[0].dim()
    }
}

/// Rescales nonnegative weights to sum to one.
///
/// Inputs already summing to one within 1e-12 are returned unchanged, which
/// makes normalization exactly idempotent.
pub fn normalize_weights(raw: &[f64]) -> Result<Vec<f64>> {
    if raw.is_empty() {
        return Err(Error::InvalidMeasure("empty weight vector".into()));
    }
    for (i, w) in raw.iter().enumerate() {
        if !w.is_finite() {
            return Err(Error::InvalidMeasure(format!("weight {i} is not finite")));
        }
        if *w < 0.0 {
            return Err(Error::InvalidMeasure(format!("weight {i} is negative ({w})")));
        }
    }
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidMeasure("weights sum to zero".into()));
    }
    if (sum - 1.0).abs() <= 1e-12 {
        return Ok(raw.to_vec());
    }
    Ok(raw.iter().map(|w| w / sum).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn normalize_symmetric_pair() {
        assert_eq!(normalize_weights(&[2.0, 2.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn normalize_preserves_proportions() {
        assert_eq!(normalize_weights(&[1.0, 0.0, 3.0]).unwrap(), vec![0.25, 0.0, 0.75]);
    }

    #[test]
    fn normalize_rejects_all_zero() {
        assert!(matches!(normalize_weights(&[0.0, 0.0]), Err(Error::InvalidMeasure(_))));
    }

    #[test]
    fn normalize_rejects_negative() {
        assert!(normalize_weights(&[1.0, -0.5]).is_err());
    }

    #[test]
    fn normalize_is_idempotent_exactly() {
        let raw = [0.3, 1.7, 2.4, 0.01];
        let once = normalize_weights(&raw).unwrap();
        let twice = normalize_weights(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn measure_weights_sum_to_one() {
        let m = EmpiricalMeasure::weighted(vec![pt(&[0.0, 0.0]), pt(&[1.0, 1.0])], &[3.0, 1.0]).unwrap();
        let s: f64 = m.weights().iter().sum();
        assert!((s - 1.0).abs() <= 1e-12);
        assert_eq!(m.weights(), &[0.75, 0.25]);
    }

    #[test]
    fn measure_rejects_mixed_dimensions() {
        let r = EmpiricalMeasure::uniform(vec![pt(&[0.0, 0.0]), pt(&[1.0])]);
        assert!(r.is_err());
    }

    #[test]
    fn point_rejects_non_finite() {
        assert!(Point::new(vec![f64::NAN]).is_err());
        assert!(Point::new(vec![]).is_err());
    }

    #[test]
    fn trajectory_lengths_must_match() {
        let states = vec![vec![0.0, 0.0]];
        assert!(Trajectory::new(states, vec![], 0.1).is_err());
    }
}
