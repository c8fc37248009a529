//! Discrete flow maps: one-step maps on the ambient space with composition,
//! optional inversion, Jacobians, and measure push-forward.
//!
//! A flow advances a point by one step of duration `dt`. Composition over
//! `steps` applications realizes the discrete flow map; for autonomous
//! flows the semigroup law holds by construction. Analytic families
//! (translation, rotation) use exact closed-form maps; field-derived flows
//! take one RK4 step over `dt`.

mod field;
mod grid;

pub use field::VectorField;
pub use grid::{load_gridded_field, GriddedField};

use crate::error::{Error, Result};
use crate::kernels; // used in doc tests elsewhere; keep module simple
use crate::linalg::{rotation2, Mat};
use crate::types::{EmpiricalMeasure, Point};

#[derive(Debug, Clone)]
enum FlowKind {
    Identity,
    /// Exact map `w -> w + step` per application.
    Translation { step: Vec<f64> },
    /// Exact 2-D rotation by `angle` radians about `center` per application.
    Rotation { center: Vec<f64>, angle: f64 },
    /// One RK4 step of the field over dt per application.
    FieldRk4 { field: VectorField },
}

/// A one-step map on the ambient space, applied `steps` times to realize the
/// flow at step `t`. Zero steps is the identity exactly.
#[derive(Debug, Clone)]
pub struct DiscreteFlow {
    kind: FlowKind,
    dt: f64,
    invertible: bool,
    time_varying: bool,
    pub lipschitz_hint: Option<f64>,
}

impl DiscreteFlow {
    /// The identity flow (zero field).
    pub fn identity(dt: f64) -> Self {
        Self {
            kind: FlowKind::Identity,
            dt,
            invertible: true,
            time_varying: false,
            lipschitz_hint: Some(1.0),
        }
    }

    /// Builds the discrete flow induced by a velocity field with step `dt`.
    ///
    /// Constant and rotation fields get exact maps and are invertible; the
    /// Duffing field integrates with RK4 and inverts numerically; attractor,
    /// gridded, and composed fields are treated as non-invertible.
    pub fn from_field(field: VectorField, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidConfig(format!("flow dt must be positive, got {dt}")));
        }
        let flow = match field {
            VectorField::Constant { velocity } => Self {
                kind: FlowKind::Translation {
                    step: velocity.iter().map(|v| v * dt).collect(),
                },
                dt,
                invertible: true,
                time_varying: false,
                lipschitz_hint: Some(1.0),
            },
            VectorField::RigidRotation { center, rate }
            | VectorField::Vortex { center, rate } => Self {
                kind: FlowKind::Rotation { center, angle: rate * dt },
                dt,
                invertible: true,
                time_varying: false,
                lipschitz_hint: Some(1.0),
            },
            VectorField::Duffing => Self {
                kind: FlowKind::FieldRk4 { field: VectorField::Duffing },
                dt,
                invertible: true,
                time_varying: false,
                lipschitz_hint: None,
            },
            other => {
                let time_varying = field_time_varying(&other);
                Self {
                    kind: FlowKind::FieldRk4 { field: other },
                    dt,
                    invertible: false,
                    time_varying,
                    lipschitz_hint: None,
                }
            }
        };
        Ok(flow)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn invertible(&self) -> bool {
        self.invertible
    }

    pub fn time_varying(&self) -> bool {
        self.time_varying
    }

    /// True when composed maps collapse to a single closed form, making
    /// `map_from` O(1) in the step count.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.kind, FlowKind::FieldRk4 { .. })
    }

    /// One step starting from absolute step index `step_index`
    /// (time `step_index * dt` for time-varying fields).
    pub fn step_from(&self, point: &[f64], step_index: usize) -> Result<Vec<f64>> {
        let out = match &self.kind {
            FlowKind::Identity => point.to_vec(),
            FlowKind::Translation { step } => {
                check_dim(step.len(), point.len())?;
                point.iter().zip(step.iter()).map(|(p, s)| p + s).collect()
            }
            FlowKind::Rotation { center, angle } => rotate(point, center, *angle)?,
            FlowKind::FieldRk4 { field } => {
                let t = step_index as f64 * self.dt;
                rk4_step(field, point, t, self.dt)?
            }
        };
        if out.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("flow step".into()));
        }
        Ok(out)
    }

    /// `steps`-fold composition starting at absolute step `start_step`.
    /// Zero steps returns the point unchanged, exactly.
    pub fn map_from(&self, point: &[f64], start_step: usize, steps: usize) -> Result<Vec<f64>> {
        match &self.kind {
            FlowKind::Identity => Ok(point.to_vec()),
            FlowKind::Translation { step } => {
                check_dim(step.len(), point.len())?;
                let k = steps as f64;
                Ok(point.iter().zip(step.iter()).map(|(p, s)| p + k * s).collect())
            }
            FlowKind::Rotation { center, angle } => {
                if steps == 0 {
                    return Ok(point.to_vec());
                }
                rotate(point, center, *angle * steps as f64)
            }
            FlowKind::FieldRk4 { .. } => {
                let mut cur = point.to_vec();
                for k in 0..steps {
                    cur = self.step_from(&cur, start_step + k)?;
                }
                Ok(cur)
            }
        }
    }

    /// The flow map at step `steps` applied to `point` (from step 0).
    pub fn map(&self, point: &[f64], steps: usize) -> Result<Vec<f64>> {
        self.map_from(point, 0, steps)
    }

    /// `steps`-fold composition of the inverse step map.
    ///
    /// Analytic flows invert exactly; field-derived invertible flows apply
    /// RK4 steps of the negated field (valid for autonomous fields).
    pub fn inverse_map(&self, point: &[f64], steps: usize) -> Result<Vec<f64>> {
        if !self.invertible {
            return Err(Error::NonInvertibleFlow);
        }
        match &self.kind {
            FlowKind::Identity => Ok(point.to_vec()),
            FlowKind::Translation { step } => {
                check_dim(step.len(), point.len())?;
                let k = steps as f64;
                Ok(point.iter().zip(step.iter()).map(|(p, s)| p - k * s).collect())
            }
            FlowKind::Rotation { center, angle } => {
                if steps == 0 {
                    return Ok(point.to_vec());
                }
                rotate(point, center, -*angle * steps as f64)
            }
            FlowKind::FieldRk4 { field } => {
                let mut cur = point.to_vec();
                for _ in 0..steps {
                    cur = rk4_step_negated(field, &cur, self.dt)?;
                    if cur.iter().any(|c| !c.is_finite()) {
                        return Err(Error::NonFinite("inverse flow step".into()));
                    }
                }
                Ok(cur)
            }
        }
    }

    /// Forward map together with its Jacobian at `point`.
    pub(crate) fn map_jacobian_from(
        &self,
        point: &[f64],
        start_step: usize,
        steps: usize,
    ) -> Result<(Vec<f64>, Mat)> {
        let n = point.len();
        match &self.kind {
            FlowKind::Identity => Ok((point.to_vec(), Mat::identity(n))),
            FlowKind::Translation { .. } => {
                Ok((self.map_from(point, start_step, steps)?, Mat::identity(n)))
            }
            FlowKind::Rotation { angle, .. } => {
                check_dim(2, n)?;
                let mapped = self.map_from(point, start_step, steps)?;
                let jac = if steps == 0 {
                    Mat::identity(2)
                } else {
                    rotation2(*angle * steps as f64)
                };
                Ok((mapped, jac))
            }
            FlowKind::FieldRk4 { field } => {
                let mut cur = point.to_vec();
                let mut jac = Mat::identity(n);
                for k in 0..steps {
                    let t = (start_step + k) as f64 * self.dt;
                    let step_jac = rk4_tangent(field, &cur, t, self.dt)?;
                    jac = step_jac.matmul(&jac);
                    cur = rk4_step(field, &cur, t, self.dt)?;
                }
                Ok((cur, jac))
            }
        }
    }

    /// Inverse map together with its Jacobian at `point`.
    pub(crate) fn inverse_map_jacobian(
        &self,
        point: &[f64],
        steps: usize,
    ) -> Result<(Vec<f64>, Mat)> {
        if !self.invertible {
            return Err(Error::NonInvertibleFlow);
        }
        let n = point.len();
        match &self.kind {
            FlowKind::Identity => Ok((point.to_vec(), Mat::identity(n))),
            FlowKind::Translation { .. } => Ok((self.inverse_map(point, steps)?, Mat::identity(n))),
            FlowKind::Rotation { angle, .. } => {
                check_dim(2, n)?;
                let mapped = self.inverse_map(point, steps)?;
                let jac = if steps == 0 {
                    Mat::identity(2)
                } else {
                    rotation2(-*angle * steps as f64)
                };
                Ok((mapped, jac))
            }
            FlowKind::FieldRk4 { field } => {
                let mut cur = point.to_vec();
                let mut jac = Mat::identity(n);
                for _ in 0..steps {
                    let step_jac = rk4_tangent_negated(field, &cur, self.dt)?;
                    jac = step_jac.matmul(&jac);
                    cur = rk4_step_negated(field, &cur, self.dt)?;
                }
                Ok((cur, jac))
            }
        }
    }
}

/// Transports a measure along the flow: every point is mapped `steps` steps
/// forward, weights and count are preserved exactly.
pub fn push_forward_measure(
    measure: &EmpiricalMeasure,
    flow: &DiscreteFlow,
    steps: usize,
) -> Result<EmpiricalMeasure> {
    let mut points = Vec::with_capacity(measure.len());
    for p in measure.points() {
        points.push(Point { coords: flow.map(&p.coords, steps)? });
    }
    Ok(EmpiricalMeasure::from_normalized_parts(points, measure.weights().to_vec()))
}

fn field_time_varying(field: &VectorField) -> bool {
    match field {
        VectorField::Gridded(Some(g)) => g.time_varying(),
        VectorField::Composed(fields) => fields.iter().any(field_time_varying),
        _ => false,
    }
}

fn rotate(point: &[f64], center: &[f64], angle: f64) -> Result<Vec<f64>> {
    check_dim(2, point.len())?;
    check_dim(2, center.len())?;
    let (s, c) = angle.sin_cos();
    let dx = point[0] - center[0];
    let dy = point[1] - center[1];
    Ok(vec![center[0] + c * dx - s * dy, center[1] + s * dx + c * dy])
}

fn rk4_step(field: &VectorField, x: &[f64], t: f64, dt: f64) -> Result<Vec<f64>> {
    let k1 = field.velocity(x, t)?;
    let k2 = field.velocity(&axpy(x, &k1, 0.5 * dt), t + 0.5 * dt)?;
    let k3 = field.velocity(&axpy(x, &k2, 0.5 * dt), t + 0.5 * dt)?;
    let k4 = field.velocity(&axpy(x, &k3, dt), t + dt)?;
    let mut out = x.to_vec();
    for i in 0..out.len() {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// RK4 step of the negated (autonomous) field.
fn rk4_step_negated(field: &VectorField, x: &[f64], dt: f64) -> Result<Vec<f64>> {
    let neg = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|c| -c).collect() };
    let k1 = neg(field.velocity(x, 0.0)?);
    let k2 = neg(field.velocity(&axpy(x, &k1, 0.5 * dt), 0.0)?);
    let k3 = neg(field.velocity(&axpy(x, &k2, 0.5 * dt), 0.0)?);
    let k4 = neg(field.velocity(&axpy(x, &k3, dt), 0.0)?);
    let mut out = x.to_vec();
    for i in 0..out.len() {
        out[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(out)
}

/// Forward-mode linearization of one RK4 step:
/// `J = I + dt/6 (J1 + 2 J2 + 2 J3 + J4)` with the stage Jacobians chained
/// through the stage states.
fn rk4_tangent(field: &VectorField, x: &[f64], t: f64, dt: f64) -> Result<Mat> {
    let n = x.len();
    let ident = Mat::identity(n);

    let k1 = field.velocity(x, t)?;
    let a1 = field.jacobian(x, t)?;

    let x2 = axpy(x, &k1, 0.5 * dt);
    let k2 = field.velocity(&x2, t + 0.5 * dt)?;
    let mut inner = ident.clone();
    inner.add_scaled(&a1, 0.5 * dt);
    let a2 = field.jacobian(&x2, t + 0.5 * dt)?.matmul(&inner);

    let x3 = axpy(x, &k2, 0.5 * dt);
    let k3 = field.velocity(&x3, t + 0.5 * dt)?;
    let mut inner = ident.clone();
    inner.add_scaled(&a2, 0.5 * dt);
    let a3 = field.jacobian(&x3, t + 0.5 * dt)?.matmul(&inner);

    let x4 = axpy(x, &k3, dt);
    let mut inner = ident.clone();
    inner.add_scaled(&a3, dt);
    let a4 = field.jacobian(&x4, t + dt)?.matmul(&inner);

    let mut jac = ident;
    jac.add_scaled(&a1, dt / 6.0);
    jac.add_scaled(&a2, dt / 3.0);
    jac.add_scaled(&a3, dt / 3.0);
    jac.add_scaled(&a4, dt / 6.0);
    Ok(jac)
}

fn rk4_tangent_negated(field: &VectorField, x: &[f64], dt: f64) -> Result<Mat> {
    let n = x.len();
    let ident = Mat::identity(n);
    let neg = |v: Vec<f64>| -> Vec<f64> { v.into_iter().map(|c| -c).collect() };
    let neg_jac = |mut m: Mat| -> Mat {
        m.scale(-1.0);
        m
    };

    let k1 = neg(field.velocity(x, 0.0)?);
    let a1 = neg_jac(field.jacobian(x, 0.0)?);

    let x2 = axpy(x, &k1, 0.5 * dt);
    let k2 = neg(field.velocity(&x2, 0.0)?);
    let mut inner = ident.clone();
    inner.add_scaled(&a1, 0.5 * dt);
    let a2 = neg_jac(field.jacobian(&x2, 0.0)?).matmul(&inner);

    let x3 = axpy(x, &k2, 0.5 * dt);
    let k3 = neg(field.velocity(&x3, 0.0)?);
    let mut inner = ident.clone();
    inner.add_scaled(&a2, 0.5 * dt);
    let a3 = neg_jac(field.jacobian(&x3, 0.0)?).matmul(&inner);

    let x4 = axpy(x, &k3, dt);
    let mut inner = ident.clone();
    inner.add_scaled(&a3, dt);
    let a4 = neg_jac(field.jacobian(&x4, 0.0)?).matmul(&inner);

    let mut jac = ident;
    jac.add_scaled(&a1, dt / 6.0);
    jac.add_scaled(&a2, dt / 3.0);
    jac.add_scaled(&a3, dt / 3.0);
    jac.add_scaled(&a4, dt / 6.0);
    Ok(jac)
}

fn axpy(x: &[f64], k: &[f64], s: f64) -> Vec<f64> {
    x.iter().zip(k.iter()).map(|(a, b)| a + s * b).collect()
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
    use std::f64::consts::PI;

    fn pt(coords: &[f64]) -> Point {
        Point::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn identity_flow_leaves_points() {
        let f = DiscreteFlow::identity(0.1);
        assert_eq!(f.step_from(&[1.0, -2.0], 0).unwrap(), vec![1.0, -2.0]);
        assert_eq!(f.map(&[1.0, -2.0], 17).unwrap(), vec![1.0, -2.0]);
    }

    #[test]
    fn constant_field_steps_exactly() {
        let f = DiscreteFlow::from_field(
            VectorField::Constant { velocity: vec![1.0, 0.0] },
            0.5,
        )
        .unwrap();
        assert_eq!(f.step_from(&[2.0, 3.0], 0).unwrap(), vec![2.5, 3.0]);
    }

    #[test]
    fn constant_field_composes_exactly() {
        let f = DiscreteFlow::from_field(
            VectorField::Constant { velocity: vec![1.0, 0.0] },
            1.0,
        )
        .unwrap();
        assert_eq!(f.map(&[0.0, 0.0], 3).unwrap(), vec![3.0, 0.0]);
    }

    #[test]
    fn rotation_quarter_turn() {
        let f = DiscreteFlow::from_field(
            VectorField::RigidRotation { center: vec![0.0, 0.0], rate: PI / 2.0 },
            1.0,
        )
        .unwrap();
        let out = f.step_from(&[1.0, 0.0], 0).unwrap();
        assert!((out[0]).abs() < 1e-12 && (out[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_steps_is_identity_exactly() {
        for flow in [
            DiscreteFlow::identity(0.1),
            DiscreteFlow::from_field(VectorField::Duffing, 0.01).unwrap(),
            DiscreteFlow::from_field(
                VectorField::RigidRotation { center: vec![0.5, 0.5], rate: 2.0 },
                0.1,
            )
            .unwrap(),
        ] {
            assert_eq!(flow.map(&[0.3, 0.4], 0).unwrap(), vec![0.3, 0.4]);
        }
    }

    #[test]
    fn semigroup_holds_for_autonomous_flows() {
        let flows = [
            DiscreteFlow::from_field(VectorField::Duffing, 0.01).unwrap(),
            DiscreteFlow::from_field(
                VectorField::RigidRotation { center: vec![0.1, -0.2], rate: 0.7 },
                0.05,
            )
            .unwrap(),
            DiscreteFlow::from_field(VectorField::Constant { velocity: vec![0.3, 0.9] }, 0.2)
                .unwrap(),
        ];
        for flow in &flows {
            for (s, t) in [(0usize, 5usize), (3, 7), (20, 30), (50, 0)] {
                let w = [0.4, -0.3];
                let two_leg = flow.map(&flow.map(&w, s).unwrap(), t).unwrap();
                let direct = flow.map(&w, s + t).unwrap();
                let err = crate::types::euclidean(&two_leg, &direct);
                assert!(err <= 1e-12, "semigroup error {err} at ({s},{t})");
            }
        }
    }

    #[test]
    fn rotation_inverse_round_trip_exact() {
        let f = DiscreteFlow::from_field(
            VectorField::RigidRotation { center: vec![0.0, 0.0], rate: 1.3 },
            0.1,
        )
        .unwrap();
        let w = [0.8, -0.6];
        let fwd = f.map(&w, 23).unwrap();
        let back = f.inverse_map(&fwd, 23).unwrap();
        assert!(crate::types::euclidean(&back, &w) <= 1e-12);
    }

    #[test]
    fn inverse_map_zero_steps_is_identity() {
        let f = DiscreteFlow::identity(1.0);
        assert_eq!(f.inverse_map(&[5.0, 6.0], 0).unwrap(), vec![5.0, 6.0]);
    }

    #[test]
    fn non_invertible_flow_rejects_inverse() {
        let f = DiscreteFlow::from_field(
            VectorField::Attractor {
                targets: vec![pt(&[0.0, 0.0])],
                max_speed: 1.0,
                stop_radius: 0.1,
            },
            0.1,
        )
        .unwrap();
        assert!(matches!(f.inverse_map(&[1.0, 1.0], 1), Err(Error::NonInvertibleFlow)));
    }

    #[test]
    fn duffing_round_trip_within_rk4_tolerance() {
        let f = DiscreteFlow::from_field(VectorField::Duffing, 0.01).unwrap();
        let w = [0.5, 0.2];
        let fwd = f.map(&w, 100).unwrap();
        let back = f.inverse_map(&fwd, 100).unwrap();
        let err = crate::types::euclidean(&back, &w);
        assert!(err <= 1e-6, "round trip error {err}");
    }

    #[test]
    fn rigid_flows_are_isometries() {
        let f = DiscreteFlow::from_field(
            VectorField::RigidRotation { center: vec![0.2, 0.1], rate: 2.1 },
            0.07,
        )
        .unwrap();
        let a = [0.9, 0.3];
        let b = [-0.4, 0.8];
        let d0 = crate::types::euclidean(&a, &b);
        let da = f.map(&a, 31).unwrap();
        let db = f.map(&b, 31).unwrap();
        assert!((crate::types::euclidean(&da, &db) - d0).abs() <= 1e-12);
    }

    #[test]
    fn push_forward_translates_points_and_keeps_weights() {
        let m = EmpiricalMeasure::weighted(
            vec![pt(&[0.0, 0.0]), pt(&[1.0, 1.0])],
            &[0.3, 0.7],
        )
        .unwrap();
        let f = DiscreteFlow::from_field(VectorField::Constant { velocity: vec![0.0, 1.0] }, 1.0)
            .unwrap();
        let out = push_forward_measure(&m, &f, 2).unwrap();
        assert_eq!(out.points()[0].coords, vec![0.0, 2.0]);
        assert_eq!(out.points()[1].coords, vec![1.0, 3.0]);
        assert_eq!(out.weights(), &[0.3, 0.7]);
        assert_eq!(out.len(), 2);
    }

    #[test]
    fn push_forward_zero_steps_is_identical() {
        let m = EmpiricalMeasure::uniform(vec![pt(&[0.3, 0.4]), pt(&[1.0, 2.0])]).unwrap();
        let f = DiscreteFlow::from_field(VectorField::Duffing, 0.05).unwrap();
        let out = push_forward_measure(&m, &f, 0).unwrap();
        assert_eq!(out, m);
    }

    #[test]
    fn rk4_tangent_matches_fd_of_step() {
        let field = VectorField::Duffing;
        let flow = DiscreteFlow::from_field(field.clone(), 0.05).unwrap();
        let x = [0.3, -0.7];
        let (_, jac) = flow.map_jacobian_from(&x, 0, 1).unwrap();
        let eps = 1e-6;
        for j in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[j] += eps;
            xm[j] -= eps;
            let fp = flow.step_from(&xp, 0).unwrap();
            let fm = flow.step_from(&xm, 0).unwrap();
            for i in 0..2 {
                let fd = (fp[i] - fm[i]) / (2.0 * eps);
                assert!((jac.get(i, j) - fd).abs() < 1e-8, "({i},{j})");
            }
        }
    }
}
