//! Vector fields generating the discrete flows.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::flows::grid::GriddedField;
use crate::linalg::Mat;
use crate::types::Point;

/// Step used for the central-difference Jacobians of fields without an
/// analytic one.
const FD_STEP: f64 = 1e-6;

/// A velocity field `(point, t) -> velocity` on the ambient space.
#[derive(Debug, Clone)]
pub enum VectorField {
    /// Uniform velocity everywhere.
    Constant { velocity: Vec<f64> },
    /// Rigid rotation about `center` at `rate` rad/s (2-D): `v = rate * R90 (w - c)`.
    RigidRotation { center: Vec<f64>, rate: f64 },
    /// Vortex; same parameterization as the rigid rotation but tagged
    /// separately so scenario configs can calibrate it by peak speed.
    Vortex { center: Vec<f64>, rate: f64 },
    /// Undamped two-well Duffing oscillator (2-D): `v = (x2, x1 - x1^3)`.
    Duffing,
    /// Unit pull toward the nearest target at `max_speed`, with a hard stop
    /// inside `stop_radius`.
    Attractor { targets: Vec<Point>, max_speed: f64, stop_radius: f64 },
    /// Bilinear-in-space, nearest-frame-in-time gridded data (2-D).
    /// `None` marks a declared-but-unloaded grid.
    Gridded(Option<Arc<GriddedField>>),
    /// Superposition (sum) of member fields.
    Composed(Vec<VectorField>),
}

impl VectorField {
    /// Vortex about the center of `[x0, x1] x [y0, y1]` calibrated so the
    /// peak speed over the box (attained at the corners) equals `peak_speed`.
    pub fn vortex_calibrated(domain: [f64; 4], peak_speed: f64) -> Result<Self> {
        let [x0, x1, y0, y1] = domain;
        if !(x1 > x0 && y1 > y0) || !peak_speed.is_finite() || peak_speed <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "vortex calibration needs a proper box and positive peak speed, got {domain:?}, {peak_speed}"
            )));
        }
        let center = vec![0.5 * (x0 + x1), 0.5 * (y0 + y1)];
        let r_max = 0.5 * ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();
        Ok(VectorField::Vortex { center, rate: peak_speed / r_max })
    }

    /// Short family tag for reports.
    pub fn family(&self) -> &'static str {
        match self {
            VectorField::Constant { .. } => "constant",
            VectorField::RigidRotation { .. } => "rigid_rotation",
            VectorField::Vortex { .. } => "vortex",
            VectorField::Duffing => "duffing",
            VectorField::Attractor { .. } => "attractor",
            VectorField::Gridded(_) => "gridded",
            VectorField::Composed(_) => "composed",
        }
    }

    /// Ambient dimension the field is defined on, when fixed by the family.
    pub fn dim(&self) -> Option<usize> {
        match self {
            VectorField::Constant { velocity } => Some(velocity.len()),
            VectorField::RigidRotation { center, .. } | VectorField::Vortex { center, .. } => {
                Some(center.len())
            }
            VectorField::Duffing => Some(2),
            VectorField::Attractor { targets, .. } => targets.first().map(|p| p.dim()),
            VectorField::Gridded(_) => Some(2),
            VectorField::Composed(fields) => fields.iter().find_map(|f| f.dim()),
        }
    }

    /// Velocity at `point` and time `t` seconds.
    pub fn velocity(&self, point: &[f64], t: f64) -> Result<Vec<f64>> {
        let v = match self {
            VectorField::Constant { velocity } => {
                check_dim(velocity.len(), point.len())?;
                velocity.clone()
            }
            VectorField::RigidRotation { center, rate }
            | VectorField::Vortex { center, rate } => {
                check_dim(2, point.len())?;
                check_dim(2, center.len())?;
                let dx = point[0] - center[0];
                let dy = point[1] - center[1];
                vec![-rate * dy, rate * dx]
            }
            VectorField::Duffing => {
                check_dim(2, point.len())?;
                let x1 = point[0];
                let x2 = point[1];
                vec![x2, x1 - x1 * x1 * x1]
            }
            VectorField::Attractor { targets, max_speed, stop_radius } => {
                if targets.is_empty() {
                    return Err(Error::InvalidConfig("attractor field has no targets".into()));
                }
                check_dim(targets[0].dim(), point.len())?;
                let (_, nearest) = targets
                    .iter()
                    .enumerate()
                    .map(|(i, tgt)| (crate::types::euclidean(&tgt.coords, point), i))
                    .fold((f64::INFINITY, 0), |best, (d, i)| {
                        if d < best.0 { (d, i) } else { best }
                    });
                let tgt = &targets[nearest].coords;
                let dist = crate::types::euclidean(tgt, point);
                if dist <= *stop_radius {
                    vec![0.0; point.len()]
                } else {
                    let scale = max_speed / dist.max(1e-9);
                    tgt.iter().zip(point.iter()).map(|(a, b)| scale * (a - b)).collect()
                }
            }
            VectorField::Gridded(data) => match data {
                Some(grid) => grid.velocity(point, t)?,
                None => return Err(Error::UninitializedField),
            },
            VectorField::Composed(fields) => {
                if fields.is_empty() {
                    return Err(Error::InvalidConfig("composed field has no members".into()));
                }
                let mut acc = vec![0.0; point.len()];
                for f in fields {
                    let v = f.velocity(point, t)?;
                    check_dim(acc.len(), v.len())?;
                    for (a, b) in acc.iter_mut().zip(v.iter()) {
                        *a += b;
                    }
                }
                acc
            }
        };
        if v.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(format!("{} field velocity", self.family())));
        }
        Ok(v)
    }

    /// Jacobian `dv/dw` at `point`. Analytic where the family admits one,
    /// central differences (step 1e-6) otherwise.
    pub(crate) fn jacobian(&self, point: &[f64], t: f64) -> Result<Mat> {
        match self {
            VectorField::Constant { velocity } => Ok(Mat::zeros(velocity.len(), velocity.len())),
            VectorField::RigidRotation { rate, .. } | VectorField::Vortex { rate, .. } => {
                Ok(Mat::from_rows(&[&[0.0, -rate], &[*rate, 0.0]]))
            }
            VectorField::Duffing => {
                let x1 = point[0];
                Ok(Mat::from_rows(&[&[0.0, 1.0], &[1.0 - 3.0 * x1 * x1, 0.0]]))
            }
            VectorField::Composed(fields) => {
                let n = point.len();
                let mut acc = Mat::zeros(n, n);
                for f in fields {
                    acc.add_scaled(&f.jacobian(point, t)?, 1.0);
                }
                Ok(acc)
            }
            _ => self.jacobian_fd(point, t),
        }
    }

    fn jacobian_fd(&self, point: &[f64], t: f64) -> Result<Mat> {
        let n = point.len();
        let mut jac = Mat::zeros(n, n);
        let mut probe = point.to_vec();
        for j in 0..n {
            probe[j] = point[j] + FD_STEP;
            let plus = self.velocity(&probe, t)?;
            probe[j] = point[j] - FD_STEP;
            let minus = self.velocity(&probe, t)?;
            probe[j] = point[j];
            for i in 0..n {
                jac.set(i, j, (plus[i] - minus[i]) / (2.0 * FD_STEP));
            }
        }
        Ok(jac)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rigid_rotation_is_perpendicular() {
        let f = VectorField::RigidRotation { center: vec![0.0, 0.0], rate: 1.0 };
        assert_eq!(f.velocity(&[1.0, 0.0], 0.0).unwrap(), vec![0.0, 1.0]);
    }

    #[test]
    fn duffing_fixed_point() {
        // (1, 0): x1' = x2 = 0, x2' = x1 - x1^3 = 0
        let f = VectorField::Duffing;
        assert_eq!(f.velocity(&[1.0, 0.0], 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn constant_field_everywhere() {
        let f = VectorField::Constant { velocity: vec![2.0, 0.0] };
        assert_eq!(f.velocity(&[-3.0, 7.0], 12.0).unwrap(), vec![2.0, 0.0]);
    }

    #[test]
    fn unloaded_grid_errors() {
        let f = VectorField::Gridded(None);
        assert!(matches!(f.velocity(&[0.0, 0.0], 0.0), Err(Error::UninitializedField)));
    }

    #[test]
    fn attractor_pulls_toward_nearest_and_stops() {
        let f = VectorField::Attractor {
            targets: vec![
                Point::new(vec![0.0, 0.0]).unwrap(),
                Point::new(vec![10.0, 0.0]).unwrap(),
            ],
            max_speed: 2.0,
            stop_radius: 0.5,
        };
        let v = f.velocity(&[8.0, 0.0], 0.0).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-12 && v[1].abs() < 1e-12);
        assert_eq!(f.velocity(&[0.3, 0.0], 0.0).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn composed_field_sums_members() {
        let f = VectorField::Composed(vec![
            VectorField::Constant { velocity: vec![1.0, 0.0] },
            VectorField::Constant { velocity: vec![0.0, -2.0] },
        ]);
        assert_eq!(f.velocity(&[0.0, 0.0], 0.0).unwrap(), vec![1.0, -2.0]);
    }

    #[test]
    fn vortex_calibration_hits_peak_at_corner() {
        let f = VectorField::vortex_calibrated([0.0, 1.0, 0.0, 1.0], 3.46).unwrap();
        let v = f.velocity(&[1.0, 1.0], 0.0).unwrap();
        let speed = (v[0] * v[0] + v[1] * v[1]).sqrt();
        assert!((speed - 3.46).abs() < 1e-12);
    }

    #[test]
    fn duffing_jacobian_matches_fd() {
        let f = VectorField::Duffing;
        let p = [0.4, -0.8];
        let analytic = f.jacobian(&p, 0.0).unwrap();
        let fd = f.jacobian_fd(&p, 0.0).unwrap();
        for (a, b) in analytic.data.iter().zip(fd.data.iter()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}
