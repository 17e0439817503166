//! Spherical 5R parallel linkage: closed-form inverse kinematics, analytic
//! forward kinematics for the nominal design, numerical loop closure for
//! perturbed designs, the inverse Jacobian, and singularity scans.
//!
//! # Model
//!
//! Five hinge axes meet at the rotation center. Traversing the loop, link `i`
//! applies `Rot(z, theta_i) * Rot(x, alpha_i)`; the chain closes when the
//! product is the identity. Hinges 1 and 2 are actuated and sit on the
//! chassis (the link with twist `alpha_1` between them); hinges 3-5 are
//! passive. The end-effector is the distal link between hinges 3 and 4, and
//! its pointer `N` is the hinge-4 axis expressed in the chassis frame.
//!
//! # Coordinates
//!
//! Actuator I/O uses the *chart* angles of the closed-form IK
//! (`theta1 = atan(Ny*Nz/(Nx^2+Nz^2))`, `theta2 = atan2(Nx, Nz)`). The hinge-1
//! dihedral differs from the chart angle by the exact transmission map
//! `tan t1 = tan(theta1)/cos^2(theta2)` (hinge 2 needs no map). `JointState`
//! always stores dihedrals; [`actuator_to_hinge`]/[`hinge_to_actuator`]
//! convert. For the nominal design the two routes agree to machine precision,
//! which the tests and the acceptance suite verify against each other.

use crate::rotation::{wrap_angle, UnitQuaternion};
use nalgebra::{Matrix3, Vector3};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

/// Link twist angles between consecutive hinge axes, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DesignParams {
    pub alpha: [f64; 5],
}

/// Hinge dihedral angles, radians. Fields 1-2 actuated, 3-5 passive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointState {
    pub theta: [f64; 5],
}

/// End-effector pose: unit pointer `N` in the chassis frame plus the full
/// orientation of the distal link; `N` is the orientation's image of +z.
#[derive(Debug, Clone, Copy)]
pub struct EndEffectorPose {
    pub normal: [f64; 3],
    pub orientation: UnitQuaternion,
}

/// Angular velocity components of the end-effector, expressed in the
/// end-effector body frame (the frame of [`EndEffectorPose::orientation`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodyRates {
    pub omega_x: f64,
    pub omega_y: f64,
    pub omega_z: f64,
}

#[derive(Debug, Error)]
pub enum KinematicsError {
    #[error("input vector is not unit length (|N| = {norm})")]
    NotUnit { norm: f64 },
    #[error("orientation leaves the reachable hemisphere (N_z = {nz})")]
    OutOfHemisphere { nz: f64 },
    #[error("no reachable unit pointer for the requested actuator angles")]
    Unreachable,
    #[error("loop closure did not converge after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Newton system numerically singular (condition number {cond:.3e})")]
    SingularStep { cond: f64 },
    #[error("inverse Jacobian singular (|sin theta5| = {sin_theta5:.3e})")]
    Singular { sin_theta5: f64 },
}

/// Converged loop-closure residual bound.
pub const LOOP_CLOSURE_TOL: f64 = 1e-8;
/// Newton iteration cap.
pub const MAX_NEWTON_ITERS: usize = 50;
/// Central-difference step for numeric Jacobians.
pub const FD_STEP: f64 = 1e-6;
/// Condition-number limit for the 3x3 Newton system.
pub const NEWTON_COND_LIMIT: f64 = 1e12;
/// Hemisphere slack on N_z.
pub const HEMISPHERE_EPS: f64 = 1e-9;

/// Passive home configuration closing the nominal loop at zero actuation.
pub const HOME_PASSIVE: [f64; 3] = [FRAC_PI_2, -FRAC_PI_2, FRAC_PI_2];

impl DesignParams {
    /// Nominal design: every twist is a right angle.
    pub fn nominal() -> Self {
        Self { alpha: [FRAC_PI_2; 5] }
    }

    /// Nominal twists plus per-link offsets.
    pub fn perturbed(offsets: [f64; 5]) -> Self {
        let mut alpha = [FRAC_PI_2; 5];
        for (a, o) in alpha.iter_mut().zip(offsets) {
            *a += o;
        }
        Self { alpha }
    }

    pub fn validate(&self) -> Result<(), KinematicsError> {
        for a in self.alpha {
            if !(a.is_finite() && a > -PI && a <= PI) {
                return Err(KinematicsError::Unreachable);
            }
        }
        Ok(())
    }
}

impl JointState {
    pub fn new(theta: [f64; 5]) -> Self {
        Self { theta: theta.map(wrap_angle) }
    }

    pub fn home() -> Self {
        Self::new([0.0, 0.0, HOME_PASSIVE[0], HOME_PASSIVE[1], HOME_PASSIVE[2]])
    }
}

impl EndEffectorPose {
    /// Derive the pose from an orientation; the pointer is the rotated +z.
    pub fn from_orientation(orientation: UnitQuaternion) -> Self {
        Self { normal: orientation.rotate([0.0, 0.0, 1.0]), orientation }
    }
}

fn qz(theta: f64) -> UnitQuaternion {
    let (s, c) = (theta / 2.0).sin_cos();
    UnitQuaternion::new(c, 0.0, 0.0, s)
}

fn qx(alpha: f64) -> UnitQuaternion {
    let (s, c) = (alpha / 2.0).sin_cos();
    UnitQuaternion::new(c, s, 0.0, 0.0)
}

/// Chassis orientation of the loop's start frame (z along the hinge-2 axis).
///
/// Maps start-frame (x, y, z) to chassis (y, z, x): the actuated hinge axes
/// land on the chassis x and y axes and the home pointer on +z.
fn chassis_mount() -> UnitQuaternion {
    let m = Matrix3::new(0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0);
    UnitQuaternion::from_matrix(&crate::rotation::RotationMatrix(m))
}

/// Transmission map: chart actuator angles to hinge dihedrals.
pub fn actuator_to_hinge(theta1: f64, theta2: f64) -> (f64, f64) {
    let c2 = theta2.cos();
    (theta1.sin().atan2(theta1.cos() * c2 * c2), theta2)
}

/// Inverse transmission map: hinge dihedrals to chart actuator angles.
pub fn hinge_to_actuator(t1: f64, t2: f64) -> (f64, f64) {
    let c2 = t2.cos();
    ((t1.sin() * c2 * c2).atan2(t1.cos()), t2)
}

/// Closed-form inverse kinematics of the nominal design.
///
/// `n` is the unit end-effector pointer in the chassis frame, restricted to
/// the upper hemisphere chart. At the chart edge (`|N_z| < 1e-9`) the answer
/// is pinned to `(0, pi/2)`.
pub fn inverse_kinematics(n: [f64; 3]) -> Result<(f64, f64), KinematicsError> {
    let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    if (norm - 1.0).abs() > 1e-6 {
        return Err(KinematicsError::NotUnit { norm });
    }
    if n[2] < -HEMISPHERE_EPS {
        return Err(KinematicsError::OutOfHemisphere { nz: n[2] });
    }
    if n[2].abs() < HEMISPHERE_EPS {
        return Ok((0.0, FRAC_PI_2));
    }
    let theta1 = (n[1] * n[2] / (n[0] * n[0] + n[2] * n[2])).atan();
    let theta2 = n[0].atan2(n[2]);
    Ok((theta1, theta2))
}

/// Analytic forward kinematics of the nominal design: the exact inverse of
/// [`inverse_kinematics`] on the hemisphere chart, with the full orientation
/// of the distal link.
pub fn forward_kinematics_ideal(
    theta1: f64,
    theta2: f64,
) -> Result<EndEffectorPose, KinematicsError> {
    if !(theta1.is_finite() && theta2.is_finite())
        || theta1.abs() >= FRAC_PI_2
        || !(-FRAC_PI_2..=FRAC_PI_2).contains(&theta2)
    {
        return Err(KinematicsError::Unreachable);
    }
    let (s1, c1) = theta1.sin_cos();
    let (s2, c2) = theta2.sin_cos();
    // N_y from tan(theta1) = N_y cos(theta2) / sqrt(1 - N_y^2), in the stable
    // sin/cos form; sqrt(1 - N_y^2) reduces to the cancellation-free product
    // c1 c2 / d, then N_x = r sin(theta2), N_z = r cos(theta2).
    let d = (s1 * s1 + c1 * c1 * c2 * c2).sqrt();
    let n = if d < 1e-12 {
        // theta1 = 0, theta2 = +-pi/2: pointer on the chart edge
        [s2.signum(), 0.0, 0.0]
    } else {
        let ny = s1 / d;
        let r = c1 * c2 / d;
        [r * s2, ny, r * c2]
    };
    let pose = pose_from_chain_normal(theta2, n, &DesignParams::nominal());
    Ok(pose)
}

/// Orientation of the distal link given the hinge-2 dihedral and the pointer.
///
/// The passive hinge-3 dihedral is recovered in closed form from the pointer
/// (the pointer is orthogonal to the hinge-3 axis), then the orientation is
/// the chain product up to the distal link. The pose keeps the analytic
/// pointer: near the chart edge it is far better conditioned than the
/// quaternion chain's image of +z (the two agree to machine precision in the
/// absolute sense).
fn pose_from_chain_normal(t2: f64, n: [f64; 3], params: &DesignParams) -> EndEffectorPose {
    let g1 = chassis_mount().compose(qz(t2)).compose(qx(params.alpha[1]));
    let w = g1.conjugate().rotate(n);
    let p3 = w[0].atan2(-w[1]);
    let orientation = g1.compose(qz(p3)).compose(qx(params.alpha[2]));
    EndEffectorPose { normal: n, orientation }
}

/// Orientation defect of the loop product as a rotation vector; zero iff the
/// chain closes.
pub fn loop_closure_residual(state: &JointState, params: &DesignParams) -> [f64; 3] {
    let mut q = UnitQuaternion::IDENTITY;
    for i in 0..5 {
        q = q.compose(qz(state.theta[i])).compose(qx(params.alpha[i]));
    }
    q.to_rotation_vector()
}

fn residual_vec(t1: f64, t2: f64, passive: &[f64; 3], params: &DesignParams) -> Vector3<f64> {
    let state = JointState { theta: [t1, t2, passive[0], passive[1], passive[2]] };
    let r = loop_closure_residual(&state, params);
    Vector3::new(r[0], r[1], r[2])
}

/// Numeric Jacobian of the closure residual over the passive angles.
fn passive_jacobian(t1: f64, t2: f64, passive: &[f64; 3], params: &DesignParams) -> Matrix3<f64> {
    let mut j = Matrix3::zeros();
    for col in 0..3 {
        let mut hi = *passive;
        let mut lo = *passive;
        hi[col] += FD_STEP;
        lo[col] -= FD_STEP;
        let d = (residual_vec(t1, t2, &hi, params) - residual_vec(t1, t2, &lo, params))
            / (2.0 * FD_STEP);
        j.set_column(col, &d);
    }
    j
}

fn condition_number(j: &Matrix3<f64>) -> f64 {
    let sv = j.singular_values();
    let (max, min) = (sv.max(), sv.min());
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Damped Newton solve of the closure over the passive angles with the hinge
/// dihedrals `(t1, t2)` held fixed.
fn close_loop_from(
    t1: f64,
    t2: f64,
    params: &DesignParams,
    guess: [f64; 3],
) -> Result<JointState, KinematicsError> {
    let mut x = guess;
    let mut rn = residual_vec(t1, t2, &x, params).norm();
    for iter in 0..MAX_NEWTON_ITERS {
        if rn < 1e-11 {
            return Ok(JointState::new([t1, t2, x[0], x[1], x[2]]));
        }
        let j = passive_jacobian(t1, t2, &x, params);
        let cond = condition_number(&j);
        if cond > NEWTON_COND_LIMIT {
            if rn <= LOOP_CLOSURE_TOL {
                return Ok(JointState::new([t1, t2, x[0], x[1], x[2]]));
            }
            return Err(KinematicsError::SingularStep { cond });
        }
        let r = residual_vec(t1, t2, &x, params);
        let mut dx = j.lu().solve(&(-r)).ok_or(KinematicsError::SingularStep { cond })?;
        let n = dx.norm();
        if n > 0.5 {
            dx *= 0.5 / n;
        }
        // halve the step while the residual does not decrease
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..8 {
            let cand = [x[0] + lambda * dx.x, x[1] + lambda * dx.y, x[2] + lambda * dx.z];
            let cn = residual_vec(t1, t2, &cand, params).norm();
            if cn < rn {
                x = cand;
                rn = cn;
                accepted = true;
                break;
            }
            lambda /= 2.0;
        }
        if !accepted {
            if rn <= LOOP_CLOSURE_TOL {
                return Ok(JointState::new([t1, t2, x[0], x[1], x[2]]));
            }
            return Err(KinematicsError::NoConvergence { iterations: iter + 1, residual: rn });
        }
    }
    if rn <= LOOP_CLOSURE_TOL {
        return Ok(JointState::new([t1, t2, x[0], x[1], x[2]]));
    }
    Err(KinematicsError::NoConvergence { iterations: MAX_NEWTON_ITERS, residual: rn })
}

/// Close the loop in hinge-dihedral coordinates, warm-startable.
///
/// Without a guess the solve starts from the home branch and falls back to a
/// short continuation from home for far targets.
pub fn close_loop(
    t1: f64,
    t2: f64,
    params: &DesignParams,
    guess: Option<&JointState>,
) -> Result<JointState, KinematicsError> {
    params.validate()?;
    let start = match guess {
        Some(s) => [s.theta[2], s.theta[3], s.theta[4]],
        None => HOME_PASSIVE,
    };
    match close_loop_from(t1, t2, params, start) {
        Ok(s) => Ok(s),
        Err(first_err) => {
            // continuation from home toward the target
            for steps in [8usize, 32] {
                let mut ok = true;
                let mut p = HOME_PASSIVE;
                for k in 1..=steps {
                    let f = k as f64 / steps as f64;
                    match close_loop_from(f * t1, f * t2, params, p) {
                        Ok(s) => p = [s.theta[2], s.theta[3], s.theta[4]],
                        Err(_) => {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    return close_loop_from(t1, t2, params, p);
                }
            }
            Err(first_err)
        }
    }
}

/// Numerical forward kinematics: drive-map the chart actuator angles, close
/// the loop over the passive hinges, and return the full joint state.
///
/// On the nominal design the resulting pose agrees with
/// [`forward_kinematics_ideal`] to well below 1e-7 rad.
pub fn solve_passive(
    theta1: f64,
    theta2: f64,
    params: &DesignParams,
    guess: Option<&JointState>,
) -> Result<JointState, KinematicsError> {
    let (t1, t2) = actuator_to_hinge(theta1, theta2);
    close_loop(t1, t2, params, guess)
}

/// Pose of the distal link for a (closed) joint state.
pub fn end_effector_pose(state: &JointState, params: &DesignParams) -> EndEffectorPose {
    let orientation = chassis_mount()
        .compose(qz(state.theta[1]))
        .compose(qx(params.alpha[1]))
        .compose(qz(state.theta[2]))
        .compose(qx(params.alpha[2]));
    EndEffectorPose::from_orientation(orientation)
}

/// Inverse Jacobian mapping end-effector body rates to actuated hinge rates.
///
/// Rows act on [`BodyRates`] components: row 1 yields the hinge-2 dihedral
/// rate, row 2 the hinge-1 rate, and row 3 spans the infeasible direction
/// (its product with any feasible body rate is zero). Rows 1 and 3 are an
/// orthonormal pair. Singular exactly where `sin(theta5)` vanishes.
pub fn inverse_jacobian(state: &JointState) -> Result<[[f64; 3]; 3], KinematicsError> {
    let (s3, c3) = state.theta[2].sin_cos();
    let (s4, c4) = state.theta[3].sin_cos();
    let s5 = state.theta[4].sin();
    if s5.abs() <= 1e-9 {
        return Err(KinematicsError::Singular { sin_theta5: s5 });
    }
    Ok([[s3, 0.0, -c3], [-c4 / s5, -s4 / s5, 0.0], [c3, 0.0, s3]])
}

/// Apply the inverse Jacobian: body rates to `(theta2_dot, theta1_dot, 0)`.
pub fn actuator_rates(state: &JointState, rates: &BodyRates) -> Result<(f64, f64), KinematicsError> {
    let j = inverse_jacobian(state)?;
    let w = [rates.omega_x, rates.omega_y, rates.omega_z];
    let dot = |row: &[f64; 3]| row[0] * w[0] + row[1] * w[1] + row[2] * w[2];
    Ok((dot(&j[1]), dot(&j[0])))
}

/// Rectangular actuator-angle grid for singularity scans, chart coordinates.
#[derive(Debug, Clone)]
pub struct ScanGrid {
    pub theta1: Vec<f64>,
    pub theta2: Vec<f64>,
}

impl ScanGrid {
    /// `n x n` grid over `[-half_range, half_range]^2`.
    pub fn square(half_range: f64, n: usize) -> Self {
        let axis: Vec<f64> = if n <= 1 {
            vec![0.0]
        } else {
            (0..n).map(|i| -half_range + 2.0 * half_range * i as f64 / (n - 1) as f64).collect()
        };
        Self { theta1: axis.clone(), theta2: axis }
    }

    pub fn is_empty(&self) -> bool {
        self.theta1.is_empty() || self.theta2.is_empty()
    }
}

/// One scanned grid point.
#[derive(Debug, Clone, Copy)]
pub struct ScanPoint {
    pub theta1: f64,
    pub theta2: f64,
    pub sin_theta5: f64,
    pub condition_number: f64,
    pub reachable: bool,
}

/// Singularity metric thresholds for marking a scan point singular.
pub const SCAN_SIN_EPS: f64 = 1e-6;
pub const SCAN_COND_LIMIT: f64 = 1e8;

impl ScanPoint {
    pub fn is_singular(&self) -> bool {
        !self.reachable
            || self.sin_theta5.abs() < SCAN_SIN_EPS
            || self.condition_number > SCAN_COND_LIMIT
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScanReport {
    pub points: Vec<ScanPoint>,
}

impl ScanReport {
    pub fn min_abs_sin_theta5(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.reachable)
            .map(|p| p.sin_theta5.abs())
            .min_by(|a, b| a.total_cmp(b))
    }

    pub fn max_condition_number(&self) -> Option<f64> {
        self.points
            .iter()
            .filter(|p| p.reachable)
            .map(|p| p.condition_number)
            .max_by(|a, b| a.total_cmp(b))
    }

    pub fn unreachable_count(&self) -> usize {
        self.points.iter().filter(|p| !p.reachable).count()
    }

    pub fn singular_fraction(&self) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        self.points.iter().filter(|p| p.is_singular()).count() as f64 / self.points.len() as f64
    }

    /// CSV rows: `theta1,theta2,sin_theta5,condition_number,reachable`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("theta1,theta2,sin_theta5,condition_number,reachable\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:.9e},{:.9e},{:.9e},{:.9e},{}\n",
                p.theta1, p.theta2, p.sin_theta5, p.condition_number, p.reachable
            ));
        }
        out
    }
}

/// Sweep the actuator grid, closing the loop at each point (warm-started along
/// rows) and recording `|sin theta5|` and the passive-Jacobian condition
/// number. Unreachable points are recorded, not fatal.
pub fn singularity_scan(params: &DesignParams, grid: &ScanGrid) -> ScanReport {
    let mut report = ScanReport::default();
    if grid.is_empty() {
        return report;
    }
    for &a1 in &grid.theta1 {
        let mut warm: Option<JointState> = None;
        for &a2 in &grid.theta2 {
            let solved = solve_passive(a1, a2, params, warm.as_ref())
                .or_else(|_| solve_passive(a1, a2, params, None));
            match solved {
                Ok(state) => {
                    let (t1, t2) = actuator_to_hinge(a1, a2);
                    let passive = [state.theta[2], state.theta[3], state.theta[4]];
                    let cond = condition_number(&passive_jacobian(t1, t2, &passive, params));
                    report.points.push(ScanPoint {
                        theta1: a1,
                        theta2: a2,
                        sin_theta5: state.theta[4].sin(),
                        condition_number: cond,
                        reachable: true,
                    });
                    warm = Some(state);
                }
                Err(_) => {
                    report.points.push(ScanPoint {
                        theta1: a1,
                        theta2: a2,
                        sin_theta5: f64::NAN,
                        condition_number: f64::NAN,
                        reachable: false,
                    });
                    warm = None;
                }
            }
        }
    }
    report
}
