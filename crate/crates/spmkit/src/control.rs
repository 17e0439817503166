//! Open-loop model-based control: desired orientation -> relative rotation ->
//! predicted actuator angles -> plant -> observed orientation, with tracking
//! reports, a virtual-endpoint series, and a loop-rate benchmark.
//!
//! The loop is strictly open: no feedback from the observed orientation ever
//! reaches the commands.

use crate::mechanism::forward_kinematics_ideal;
use crate::neural::AnglePredictor;
use crate::plant::{Plant, PlantConfig, PlantError};
use crate::rotation::{quat_to_euler, relative_rotation, wrap_angle, EulerAngles, UnitQuaternion};
use std::f64::consts::TAU;
use std::fmt::Write as _;
use std::time::Instant;
use thiserror::Error;

/// Timestamped desired end-effector orientations in the world frame.
#[derive(Debug, Clone)]
pub struct DesiredTrajectory {
    pub times: Vec<f64>,
    pub orientations: Vec<UnitQuaternion>,
}

#[derive(Debug, Error)]
pub enum ControlError {
    #[error("trajectory must contain at least two strictly increasing timestamps")]
    BadTrajectory,
    #[error("benchmark needs at least 1000 steps, got {0}")]
    TooFewSteps(usize),
    #[error(transparent)]
    Plant(#[from] PlantError),
}

impl DesiredTrajectory {
    pub fn new(times: Vec<f64>, orientations: Vec<UnitQuaternion>) -> Result<Self, ControlError> {
        if times.len() < 2 || times.len() != orientations.len() {
            return Err(ControlError::BadTrajectory);
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ControlError::BadTrajectory);
        }
        Ok(Self { times, orientations })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Smooth two-axis sweep through the reachable workspace: a Lissajous
    /// figure in actuator space pushed through the ideal forward kinematics.
    pub fn default_sweep(duration: f64, rate_hz: f64, chassis_mount: UnitQuaternion) -> Self {
        let n = (duration * rate_hz).round().max(2.0) as usize;
        let dt = 1.0 / rate_hz;
        let mut times = Vec::with_capacity(n);
        let mut orientations = Vec::with_capacity(n);
        for k in 0..n {
            let t = k as f64 * dt;
            let a = 0.5 * (TAU * 0.10 * t).sin();
            let b = 0.4 * (TAU * 0.13 * t).sin();
            let pose = forward_kinematics_ideal(a, b).expect("sweep stays inside the chart");
            times.push(t);
            orientations.push(chassis_mount.compose(pose.orientation));
        }
        Self { times, orientations }
    }

    /// Constant orientation, sampled at a fixed rate.
    pub fn hold(orientation: UnitQuaternion, duration: f64, rate_hz: f64) -> Self {
        let n = (duration * rate_hz).round().max(2.0) as usize;
        let times = (0..n).map(|k| k as f64 / rate_hz).collect();
        Self { times, orientations: vec![orientation; n] }
    }
}

/// Per-step tracking series plus per-axis MAE and the achieved loop rate.
#[derive(Debug, Clone)]
pub struct TrackingReport {
    pub times: Vec<f64>,
    pub desired: Vec<EulerAngles>,
    pub actual: Vec<EulerAngles>,
    pub desired_q01: Vec<UnitQuaternion>,
    pub actual_q01: Vec<UnitQuaternion>,
    pub mae_phi_deg: f64,
    pub mae_psi_deg: f64,
    pub mae_theta_deg: f64,
    pub loop_hz: f64,
    pub unreachable_steps: usize,
}

impl TrackingReport {
    /// CSV: per-step desired/actual Euler angles in degrees, then a comment
    /// block with the per-axis MAE and the achieved rate.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,des_phi,des_psi,des_theta,act_phi,act_psi,act_theta\n");
        for i in 0..self.times.len() {
            let (d, a) = (&self.desired[i], &self.actual[i]);
            let _ = writeln!(
                out,
                "{:.9e},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                self.times[i],
                d.phi.to_degrees(),
                d.psi.to_degrees(),
                d.theta.to_degrees(),
                a.phi.to_degrees(),
                a.psi.to_degrees(),
                a.theta.to_degrees()
            );
        }
        let _ = writeln!(out, "# mae_phi_deg {:.6}", self.mae_phi_deg);
        let _ = writeln!(out, "# mae_psi_deg {:.6}", self.mae_psi_deg);
        let _ = writeln!(out, "# mae_theta_deg {:.6}", self.mae_theta_deg);
        let _ = writeln!(out, "# loop_hz {:.1}", self.loop_hz);
        let _ = writeln!(out, "# unreachable_steps {}", self.unreachable_steps);
        out
    }
}

/// Drive the plant open-loop along the desired trajectory with the given
/// inverse-kinematics predictor.
///
/// Each step computes the desired relative rotation, predicts the actuator
/// angles, commands the servos through the plant dynamics, and records the
/// observed orientation. Desired orientations outside the hemisphere chart
/// are counted and the previous command is held.
pub fn track(
    predictor: &dyn AnglePredictor,
    plant_config: &PlantConfig,
    trajectory: &DesiredTrajectory,
) -> Result<TrackingReport, ControlError> {
    if trajectory.len() < 2 {
        return Err(ControlError::BadTrajectory);
    }
    let q0 = plant_config.chassis_mount;
    let mut plant = Plant::new(plant_config.clone())?;
    let n = trajectory.len();
    let mut report = TrackingReport {
        times: Vec::with_capacity(n),
        desired: Vec::with_capacity(n),
        actual: Vec::with_capacity(n),
        desired_q01: Vec::with_capacity(n),
        actual_q01: Vec::with_capacity(n),
        mae_phi_deg: 0.0,
        mae_psi_deg: 0.0,
        mae_theta_deg: 0.0,
        loop_hz: 0.0,
        unreachable_steps: 0,
    };
    let mut command = [0.0_f64; 2];
    let started = Instant::now();
    for i in 0..n {
        let q1_d = trajectory.orientations[i];
        let q01_d = relative_rotation(q0, q1_d);
        let pointer = q01_d.rotate([0.0, 0.0, 1.0]);
        if pointer[2] >= -1e-9 {
            let (t1, t2) = predictor.predict_angles(q01_d);
            command = [t1, t2];
        } else {
            report.unreachable_steps += 1;
        }
        let dt = if i + 1 < n {
            trajectory.times[i + 1] - trajectory.times[i]
        } else {
            trajectory.times[i] - trajectory.times[i - 1]
        };
        let sample = plant.step_to_angle(command, dt.clamp(1e-4, 0.1))?;
        report.times.push(trajectory.times[i]);
        report.desired_q01.push(q01_d);
        report.actual_q01.push(sample.q01);
        report.desired.push(quat_to_euler(q01_d));
        report.actual.push(quat_to_euler(sample.q01));
    }
    let elapsed = started.elapsed().as_secs_f64();
    report.loop_hz = n as f64 / elapsed.max(1e-9);

    let mut sums = [0.0_f64; 3];
    for (d, a) in report.desired.iter().zip(&report.actual) {
        sums[0] += wrap_angle(d.phi - a.phi).abs();
        sums[1] += wrap_angle(d.psi - a.psi).abs();
        sums[2] += wrap_angle(d.theta - a.theta).abs();
    }
    let count = report.times.len() as f64;
    report.mae_phi_deg = (sums[0] / count).to_degrees();
    report.mae_psi_deg = (sums[1] / count).to_degrees();
    report.mae_theta_deg = (sums[2] / count).to_degrees();
    Ok(report)
}

/// Positions of a virtual end-effector along the output frame's z axis.
pub fn virtual_endpoint_series(report: &TrackingReport) -> Vec<[f64; 3]> {
    report.actual_q01.iter().map(|q| q.rotate([0.0, 0.0, 1.0])).collect()
}

/// CSV for the virtual endpoint series: `t_s,x,y,z`.
pub fn virtual_endpoint_csv(report: &TrackingReport) -> String {
    let mut out = String::from("t_s,x,y,z\n");
    for (t, p) in report.times.iter().zip(virtual_endpoint_series(report)) {
        let _ = writeln!(out, "{:.9e},{:.9e},{:.9e},{:.9e}", t, p[0], p[1], p[2]);
    }
    out
}

/// Measure the end-to-end open-loop step rate (predict + plant step +
/// bookkeeping) over the default sweep, in Hz.
pub fn loop_benchmark(
    predictor: &dyn AnglePredictor,
    plant_config: &PlantConfig,
    steps: usize,
) -> Result<f64, ControlError> {
    if steps < 1000 {
        return Err(ControlError::TooFewSteps(steps));
    }
    let q0 = plant_config.chassis_mount;
    let mut plant = Plant::new(plant_config.clone())?;
    let dt = 0.005;
    let mut sink = 0.0;
    let started = Instant::now();
    for k in 0..steps {
        let t = k as f64 * dt;
        let a = 0.5 * (TAU * 0.10 * t).sin();
        let b = 0.4 * (TAU * 0.13 * t).sin();
        let pose = forward_kinematics_ideal(a, b).expect("sweep stays inside the chart");
        let q01_d = relative_rotation(q0, q0.compose(pose.orientation));
        let (t1, t2) = predictor.predict_angles(q01_d);
        let sample = plant.step_to_angle([t1, t2], dt)?;
        sink += sample.q01.w;
    }
    let elapsed = started.elapsed().as_secs_f64();
    std::hint::black_box(sink);
    Ok(steps as f64 / elapsed.max(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neural::AnalyticIk;
    use crate::rotation::quat_angle_error;
    use approx::assert_abs_diff_eq;

    #[test]
    fn stationary_tracking_on_ideal_plant_is_exact() {
        let cfg = PlantConfig::ideal();
        let home = forward_kinematics_ideal(0.0, 0.0).unwrap().orientation;
        let traj = DesiredTrajectory::hold(home, 1.0, 100.0);
        let report = track(&AnalyticIk, &cfg, &traj).unwrap();
        assert!(report.mae_phi_deg <= 1e-9);
        assert!(report.mae_psi_deg <= 1e-9);
        assert!(report.mae_theta_deg <= 1e-9);
        assert_eq!(report.unreachable_steps, 0);
    }

    #[test]
    fn oracle_model_on_ideal_plant_adds_no_error() {
        let cfg = PlantConfig::ideal();
        let traj = DesiredTrajectory::default_sweep(5.0, 100.0, cfg.chassis_mount);
        let report = track(&AnalyticIk, &cfg, &traj).unwrap();
        assert!(report.mae_phi_deg <= 1e-6, "phi {}", report.mae_phi_deg);
        assert!(report.mae_psi_deg <= 1e-6, "psi {}", report.mae_psi_deg);
        assert!(report.mae_theta_deg <= 1e-6, "theta {}", report.mae_theta_deg);
    }

    #[test]
    fn frame_consistency_recomposes_desired() {
        let mut cfg = PlantConfig::ideal();
        cfg.chassis_mount = UnitQuaternion::from_axis_angle([0.2, 0.9, 0.1], 0.8);
        let traj = DesiredTrajectory::default_sweep(2.0, 50.0, cfg.chassis_mount);
        let report = track(&AnalyticIk, &cfg, &traj).unwrap();
        for (i, q01d) in report.desired_q01.iter().enumerate() {
            let recomposed = cfg.chassis_mount.compose(*q01d);
            assert!(quat_angle_error(recomposed, traj.orientations[i]) < 1e-10);
        }
    }

    #[test]
    fn reported_mae_matches_stored_series() {
        let cfg = PlantConfig::default_imperfect();
        let traj = DesiredTrajectory::default_sweep(2.0, 50.0, cfg.chassis_mount);
        let report = track(&AnalyticIk, &cfg, &traj).unwrap();
        let n = report.times.len() as f64;
        let mut mae_phi = 0.0;
        for (d, a) in report.desired.iter().zip(&report.actual) {
            mae_phi += wrap_angle(d.phi - a.phi).abs();
        }
        assert_abs_diff_eq!((mae_phi / n).to_degrees(), report.mae_phi_deg, epsilon = 1e-12);
        assert!(report.loop_hz > 0.0);
    }

    #[test]
    fn virtual_endpoint_examples() {
        let report = TrackingReport {
            times: vec![0.0, 0.01],
            desired: vec![],
            actual: vec![],
            desired_q01: vec![],
            actual_q01: vec![
                UnitQuaternion::IDENTITY,
                UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], std::f64::consts::FRAC_PI_2),
            ],
            mae_phi_deg: 0.0,
            mae_psi_deg: 0.0,
            mae_theta_deg: 0.0,
            loop_hz: 1.0,
            unreachable_steps: 0,
        };
        let pts = virtual_endpoint_series(&report);
        for (g, w) in pts[0].iter().zip([0.0, 0.0, 1.0]) {
            assert_abs_diff_eq!(g, &w, epsilon = 1e-12);
        }
        for (g, w) in pts[1].iter().zip([0.0, -1.0, 0.0]) {
            assert_abs_diff_eq!(g, &w, epsilon = 1e-12);
        }
        for p in &pts {
            let n: f64 = p.iter().map(|v| v * v).sum();
            assert_abs_diff_eq!(n.sqrt(), 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn unreachable_steps_recorded_not_fatal() {
        let cfg = PlantConfig::ideal();
        // flip below the hemisphere for part of the trajectory
        let down = UnitQuaternion::from_axis_angle([1.0, 0.0, 0.0], std::f64::consts::PI);
        let home = forward_kinematics_ideal(0.0, 0.0).unwrap().orientation;
        let times: Vec<f64> = (0..50).map(|k| k as f64 * 0.01).collect();
        let orientations: Vec<UnitQuaternion> =
            (0..50).map(|k| if k % 2 == 0 { home } else { home.compose(down) }).collect();
        let traj = DesiredTrajectory::new(times, orientations).unwrap();
        let report = track(&AnalyticIk, &cfg, &traj).unwrap();
        assert_eq!(report.unreachable_steps, 25);
    }

    #[test]
    fn benchmark_validates_step_count() {
        assert!(matches!(
            loop_benchmark(&AnalyticIk, &PlantConfig::ideal(), 10),
            Err(ControlError::TooFewSteps(10))
        ));
    }
}
