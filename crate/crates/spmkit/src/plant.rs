//! Simulated stand-in for the physical laminate manipulator.
//!
//! The plant wraps the perturbed-linkage kinematics with servo dynamics,
//! deterministic imperfections (twist offsets, command zero offsets, a
//! compliance sag that scales the rotation away from home, a fixed flexure
//! bias) and quaternion measurement noise. All randomness flows from seeded
//! per-profile ChaCha streams, so identical configurations produce
//! bit-identical datasets.

use crate::mechanism::{
    end_effector_pose, forward_kinematics_ideal, solve_passive, DesignParams, JointState,
    KinematicsError,
};
use crate::rotation::{relative_rotation, UnitQuaternion};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, UnitSphere};
use std::f64::consts::TAU;
use thiserror::Error;

/// Imperfection, noise and servo parameters of the simulated hardware.
#[derive(Debug, Clone)]
pub struct PlantConfig {
    /// Per-link twist offsets from the nominal right angles, radians.
    pub design_perturbations: [f64; 5],
    /// Hinge zero offsets, radians. Entries 0-1 offset the actuated commands;
    /// entries 2-4 form a fixed flexure-neutral bias rotation of the pose.
    pub joint_zero_offsets: [f64; 5],
    /// Scales the pose's rotation away from home by `1 + gain` (load-free sag).
    pub hinge_compliance_gain: f64,
    /// First-order servo lag time constant, seconds; zero = instantaneous.
    pub servo_time_constant: f64,
    /// Servo slew limit, rad/s.
    pub servo_rate_limit: f64,
    /// Std of the axis-angle measurement noise, radians.
    pub quaternion_noise_std: f64,
    /// Chassis mount orientation Q0 (world frame of the fixed markers).
    pub chassis_mount: UnitQuaternion,
    pub rng_seed: u64,
}

impl PlantConfig {
    /// Perfect plant: ideal kinematics, instant servos, no noise.
    pub fn ideal() -> Self {
        Self {
            design_perturbations: [0.0; 5],
            joint_zero_offsets: [0.0; 5],
            hinge_compliance_gain: 0.0,
            servo_time_constant: 0.0,
            servo_rate_limit: 50.0,
            quaternion_noise_std: 0.0,
            chassis_mount: UnitQuaternion::IDENTITY,
            rng_seed: 42,
        }
    }

    /// Default imperfect plant: about a degree of twist error per link, half
    /// a degree of command zero error, 2% compliance, 0.2 deg mocap noise.
    pub fn default_imperfect() -> Self {
        let d = |v: f64| v.to_radians();
        Self {
            design_perturbations: [d(1.0), d(-0.8), d(0.9), d(-1.1), d(0.7)],
            joint_zero_offsets: [d(0.5), d(-0.4), d(0.3), d(-0.2), d(0.25)],
            hinge_compliance_gain: 0.02,
            servo_time_constant: 0.02,
            servo_rate_limit: 8.0,
            quaternion_noise_std: d(0.2),
            chassis_mount: UnitQuaternion::IDENTITY,
            rng_seed: 42,
        }
    }

    /// Same imperfection pattern scaled by `s` (noise included).
    pub fn scaled_imperfect(s: f64) -> Self {
        let base = Self::default_imperfect();
        Self {
            design_perturbations: base.design_perturbations.map(|v| v * s),
            joint_zero_offsets: base.joint_zero_offsets.map(|v| v * s),
            hinge_compliance_gain: base.hinge_compliance_gain * s,
            quaternion_noise_std: base.quaternion_noise_std * s,
            ..base
        }
    }

    pub fn validate(&self) -> Result<(), PlantError> {
        let limit = 10.0_f64.to_radians();
        for v in self.design_perturbations.iter().chain(self.joint_zero_offsets.iter()) {
            if !v.is_finite() || v.abs() > limit {
                return Err(PlantError::InvalidConfig(format!(
                    "offset {v} rad exceeds the 10 degree limit"
                )));
            }
        }
        if self.servo_time_constant < 0.0 || !self.servo_time_constant.is_finite() {
            return Err(PlantError::InvalidConfig("servo time constant must be >= 0".into()));
        }
        if self.quaternion_noise_std < 0.0 || !self.quaternion_noise_std.is_finite() {
            return Err(PlantError::InvalidConfig("noise std must be >= 0".into()));
        }
        if !self.servo_rate_limit.is_finite() || self.servo_rate_limit <= 0.0 {
            return Err(PlantError::InvalidConfig("servo rate limit must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum PlantError {
    #[error("plant kinematics failed (profile {profile_id}, t = {time_s:.4} s): {source}")]
    Singular {
        profile_id: u32,
        time_s: f64,
        #[source]
        source: KinematicsError,
    },
    #[error("invalid plant configuration: {0}")]
    InvalidConfig(String),
    #[error("dataset needs at least one velocity profile")]
    NoProfiles,
    #[error("dataset parse error: {0}")]
    Parse(String),
}

/// Sinusoidal velocity command profile for both servos.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityProfile {
    pub id: u32,
    /// Per-servo velocity amplitude, rad/s.
    pub amplitude: [f64; 2],
    /// Per-servo frequency, Hz.
    pub frequency: [f64; 2],
    /// Per-servo phase, radians.
    pub phase: [f64; 2],
    /// Profile duration, seconds.
    pub duration: f64,
}

impl VelocityProfile {
    pub fn rates_at(&self, t: f64) -> [f64; 2] {
        [
            self.amplitude[0] * (TAU * self.frequency[0] * t + self.phase[0]).sin(),
            self.amplitude[1] * (TAU * self.frequency[1] * t + self.phase[1]).sin(),
        ]
    }

    pub fn validate(&self, rate_limit: f64) -> Result<(), PlantError> {
        if !self.duration.is_finite() || self.duration <= 0.0 {
            return Err(PlantError::InvalidConfig(format!(
                "profile {} duration must be > 0",
                self.id
            )));
        }
        for (a, f) in self.amplitude.iter().zip(self.frequency) {
            if !(*a >= 0.0 && a.is_finite() && f > 0.0) {
                return Err(PlantError::InvalidConfig(format!("profile {} malformed", self.id)));
            }
            if *a > rate_limit {
                return Err(PlantError::InvalidConfig(format!(
                    "profile {} amplitude {a} exceeds the servo rate limit {rate_limit}",
                    self.id
                )));
            }
        }
        Ok(())
    }
}

/// Default mocap-style sample rate, Hz.
pub const DEFAULT_SAMPLE_RATE: f64 = 180.0;

/// Eleven distinct sinusoidal profiles covering the hemisphere chart with
/// angle excursions of roughly 0.5-1.3 rad.
pub fn default_profiles() -> Vec<VelocityProfile> {
    const TABLE: [(f64, f64, f64, f64); 11] = [
        (0.20, 0.050, 0.28, 0.090),
        (0.30, 0.080, 0.22, 0.130),
        (0.40, 0.110, 0.50, 0.170),
        (0.25, 0.140, 0.35, 0.095),
        (0.55, 0.170, 0.30, 0.075),
        (0.35, 0.200, 0.60, 0.155),
        (0.65, 0.230, 0.40, 0.115),
        (0.45, 0.260, 0.70, 0.205),
        (0.75, 0.290, 0.45, 0.135),
        (0.42, 0.120, 0.80, 0.300),
        (0.24, 0.065, 0.55, 0.240),
    ];
    TABLE
        .iter()
        .enumerate()
        .map(|(k, &(a1, f1, a2, f2))| VelocityProfile {
            id: k as u32,
            amplitude: [a1, a2],
            frequency: [f1, f2],
            phase: [0.3 * k as f64, TAU * k as f64 / 11.0 + 1.0],
            duration: 54.04,
        })
        .collect()
}

/// One recorded observation: relative quaternion plus the servo encoder
/// angles that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub t_s: f64,
    pub q01: UnitQuaternion,
    pub theta1: f64,
    pub theta2: f64,
    pub profile_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
}

/// Ordered samples with a profile-stratified 80/20 split.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub split: Vec<Split>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn iter_split(&self, split: Split) -> impl Iterator<Item = &Sample> {
        self.samples.iter().zip(&self.split).filter(move |(_, s)| **s == split).map(|(x, _)| x)
    }

    pub fn counts(&self) -> (usize, usize) {
        let train = self.split.iter().filter(|s| **s == Split::Train).count();
        (train, self.split.len() - train)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("t_s,q01_w,q01_x,q01_y,q01_z,theta1_rad,theta2_rad,profile_id,split\n");
        for (s, sp) in self.samples.iter().zip(&self.split) {
            out.push_str(&format!(
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{:.8e},{},{}\n",
                s.t_s,
                s.q01.w,
                s.q01.x,
                s.q01.y,
                s.q01.z,
                s.theta1,
                s.theta2,
                s.profile_id,
                if *sp == Split::Train { "train" } else { "test" }
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, PlantError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| PlantError::Parse("empty file".into()))?;
        if header.trim() != "t_s,q01_w,q01_x,q01_y,q01_z,theta1_rad,theta2_rad,profile_id,split" {
            return Err(PlantError::Parse(format!("unexpected header: {header}")));
        }
        let mut samples = Vec::new();
        let mut split = Vec::new();
        for (ln, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 9 {
                return Err(PlantError::Parse(format!("line {}: expected 9 fields", ln + 2)));
            }
            let num = |i: usize| -> Result<f64, PlantError> {
                fields[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| PlantError::Parse(format!("line {}: {e}", ln + 2)))
            };
            let q01 = UnitQuaternion::new(num(1)?, num(2)?, num(3)?, num(4)?);
            samples.push(Sample {
                t_s: num(0)?,
                q01,
                theta1: num(5)?,
                theta2: num(6)?,
                profile_id: fields[7]
                    .trim()
                    .parse()
                    .map_err(|e| PlantError::Parse(format!("line {}: {e}", ln + 2)))?,
            });
            split.push(match fields[8].trim() {
                "train" => Split::Train,
                "test" => Split::Test,
                other => {
                    return Err(PlantError::Parse(format!("line {}: bad split '{other}'", ln + 2)))
                }
            });
        }
        Ok(Self { samples, split })
    }
}

/// Servo and measurement state of one simulated plant instance.
#[derive(Debug, Clone)]
pub struct PlantState {
    pub servo_angle: [f64; 2],
    pub servo_rate: [f64; 2],
    pub time: f64,
    warm: Option<JointState>,
    rng: ChaCha8Rng,
}

/// A running plant: perturbed kinematics plus servo dynamics and noise.
#[derive(Debug, Clone)]
pub struct Plant {
    config: PlantConfig,
    params: DesignParams,
    home: UnitQuaternion,
    bias: UnitQuaternion,
    profile_id: u32,
    pub state: PlantState,
}

impl Plant {
    pub fn new(config: PlantConfig) -> Result<Self, PlantError> {
        Self::for_profile(config, 0)
    }

    /// Plant with the RNG stream of a given profile id.
    pub fn for_profile(config: PlantConfig, profile_id: u32) -> Result<Self, PlantError> {
        config.validate()?;
        let params = DesignParams::perturbed(config.design_perturbations);
        let home = forward_kinematics_ideal(0.0, 0.0)
            .expect("home pose is always reachable")
            .orientation;
        let z = &config.joint_zero_offsets;
        let bias = UnitQuaternion::from_rotation_vector([z[2], z[3], z[4]]);
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(2 * profile_id as u64 + 1);
        Ok(Self {
            config,
            params,
            home,
            bias,
            profile_id,
            state: PlantState {
                servo_angle: [0.0; 2],
                servo_rate: [0.0; 2],
                time: 0.0,
                warm: None,
                rng,
            },
        })
    }

    pub fn config(&self) -> &PlantConfig {
        &self.config
    }

    /// Force the servo angles (test and benchmark hook).
    pub fn set_servo_angles(&mut self, angles: [f64; 2]) {
        self.state.servo_angle = angles;
        self.state.servo_rate = [0.0; 2];
    }

    fn check_dt(dt: f64) -> Result<(), PlantError> {
        if !(dt > 0.0 && dt <= 0.1) {
            return Err(PlantError::InvalidConfig(format!("dt = {dt} outside (0, 0.1]")));
        }
        Ok(())
    }

    /// Advance the servos under a velocity command (exact first-order lag
    /// integration), then observe.
    pub fn step_rate(&mut self, commanded: [f64; 2], dt: f64) -> Result<Sample, PlantError> {
        Self::check_dt(dt)?;
        let tau = self.config.servo_time_constant;
        let lim = self.config.servo_rate_limit;
        for (i, &raw) in commanded.iter().enumerate() {
            let cmd = raw.clamp(-lim, lim);
            if tau <= 0.0 {
                self.state.servo_angle[i] += cmd * dt;
                self.state.servo_rate[i] = cmd;
            } else {
                let k = (-dt / tau).exp();
                let v0 = self.state.servo_rate[i];
                self.state.servo_angle[i] += cmd * dt + (v0 - cmd) * tau * (1.0 - k);
                self.state.servo_rate[i] = cmd + (v0 - cmd) * k;
            }
        }
        self.state.time += dt;
        self.observe()
    }

    /// Advance the servos toward a position command (rate-limited first-order
    /// approach), then observe.
    pub fn step_to_angle(&mut self, commanded: [f64; 2], dt: f64) -> Result<Sample, PlantError> {
        Self::check_dt(dt)?;
        let tau = self.config.servo_time_constant;
        let max_step = self.config.servo_rate_limit * dt;
        for (i, &target) in commanded.iter().enumerate() {
            let err = target - self.state.servo_angle[i];
            let raw = if tau <= 0.0 { err } else { err * (1.0 - (-dt / tau).exp()) };
            let step = raw.clamp(-max_step, max_step);
            self.state.servo_angle[i] += step;
            self.state.servo_rate[i] = step / dt;
        }
        self.state.time += dt;
        self.observe()
    }

    /// Measure the end-effector: close the perturbed loop at the true hinge
    /// commands, apply sag and bias, mount into the world frame, add
    /// measurement noise, and report the relative quaternion.
    pub fn observe(&mut self) -> Result<Sample, PlantError> {
        let z = &self.config.joint_zero_offsets;
        let a1 = self.state.servo_angle[0] + z[0];
        let a2 = self.state.servo_angle[1] + z[1];
        let joints = solve_passive(a1, a2, &self.params, self.state.warm.as_ref())
            .or_else(|_| solve_passive(a1, a2, &self.params, None))
            .map_err(|source| PlantError::Singular {
                profile_id: self.profile_id,
                time_s: self.state.time,
                source,
            })?;
        self.state.warm = Some(joints);
        let q = end_effector_pose(&joints, &self.params).orientation;

        // sag: scale the rotation away from home, then the fixed flexure bias
        let rel = relative_rotation(self.home, q);
        let v = rel.to_rotation_vector();
        let g = 1.0 + self.config.hinge_compliance_gain;
        let warped = UnitQuaternion::from_rotation_vector([v[0] * g, v[1] * g, v[2] * g]);
        let q_true = self.home.compose(warped).compose(self.bias);

        let q1 = self.config.chassis_mount.compose(q_true);
        let q1_obs = if self.config.quaternion_noise_std > 0.0 {
            let axis: [f64; 3] = UnitSphere.sample(&mut self.state.rng);
            let angle = Normal::new(0.0, self.config.quaternion_noise_std)
                .expect("validated std")
                .sample(&mut self.state.rng);
            q1.compose(UnitQuaternion::from_axis_angle(axis, angle))
        } else {
            q1
        };
        let q01 = relative_rotation(self.config.chassis_mount, q1_obs);
        Ok(Sample {
            t_s: self.state.time,
            q01,
            theta1: self.state.servo_angle[0],
            theta2: self.state.servo_angle[1],
            profile_id: self.profile_id,
        })
    }
}

/// Run every profile through its own plant instance and assemble the
/// stratified 80/20 split. Deterministic in (config, profiles, rate).
pub fn generate_dataset(
    config: &PlantConfig,
    profiles: &[VelocityProfile],
    sample_rate: f64,
) -> Result<Dataset, PlantError> {
    if profiles.is_empty() {
        return Err(PlantError::NoProfiles);
    }
    if !sample_rate.is_finite() || sample_rate <= 0.0 {
        return Err(PlantError::InvalidConfig("sample rate must be > 0".into()));
    }
    let dt = 1.0 / sample_rate;
    let mut samples = Vec::new();
    let mut split = Vec::new();
    for profile in profiles {
        profile.validate(config.servo_rate_limit)?;
        let mut plant = Plant::for_profile(config.clone(), profile.id)?;
        let n = (profile.duration * sample_rate).round() as usize;
        let start = samples.len();
        samples.push(plant.observe()?);
        for k in 1..n {
            let t_prev = (k - 1) as f64 * dt;
            samples.push(plant.step_rate(profile.rates_at(t_prev), dt)?);
        }
        // stratified split inside this profile
        let count = samples.len() - start;
        let n_train = (count as f64 * 0.8).round() as usize;
        let mut idx: Vec<usize> = (0..count).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        rng.set_stream(2 * profile.id as u64 + 2);
        idx.shuffle(&mut rng);
        let mut marks = vec![Split::Test; count];
        for &i in idx.iter().take(n_train) {
            marks[i] = Split::Train;
        }
        split.extend(marks);
    }
    Ok(Dataset { samples, split })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::inverse_kinematics;
    use crate::rotation::quat_angle_error;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_plant_matches_ideal_fk() {
        let mut plant = Plant::new(PlantConfig::ideal()).unwrap();
        for (a1, a2) in [(0.0, 0.0), (0.4, -0.3), (-0.8, 0.6), (1.0, 0.9)] {
            plant.set_servo_angles([a1, a2]);
            let s = plant.observe().unwrap();
            let ideal = forward_kinematics_ideal(a1, a2).unwrap();
            assert!(quat_angle_error(s.q01, ideal.orientation) < 1e-9);
        }
    }

    #[test]
    fn ideal_plant_ik_fidelity() {
        let mut plant = Plant::new(PlantConfig::ideal()).unwrap();
        let mut a = (-1.1, 0.7);
        for _ in 0..50 {
            plant.set_servo_angles([a.0, a.1]);
            let s = plant.observe().unwrap();
            let n = s.q01.rotate([0.0, 0.0, 1.0]);
            let (t1, t2) = inverse_kinematics(n).unwrap();
            assert_abs_diff_eq!(t1, s.theta1, epsilon = 1e-7);
            assert_abs_diff_eq!(t2, s.theta2, epsilon = 1e-7);
            a = (a.0 * -0.93 + 0.011, a.1 * -0.89 + 0.017);
        }
    }

    #[test]
    fn zero_rate_leaves_state_and_noise_statistics_hold() {
        let mut cfg = PlantConfig::ideal();
        cfg.quaternion_noise_std = 0.002;
        let mut plant = Plant::new(cfg).unwrap();
        plant.set_servo_angles([0.3, -0.2]);
        let clean = {
            let mut p2 = Plant::new(PlantConfig::ideal()).unwrap();
            p2.set_servo_angles([0.3, -0.2]);
            p2.observe().unwrap().q01
        };
        let mut sumsq = 0.0;
        let n = 10_000;
        for _ in 0..n {
            let s = plant.step_rate([0.0, 0.0], 0.005).unwrap();
            assert_abs_diff_eq!(s.theta1, 0.3, epsilon = 1e-12);
            assert_abs_diff_eq!(s.theta2, -0.2, epsilon = 1e-12);
            let d = quat_angle_error(s.q01, clean);
            sumsq += d * d;
        }
        let rms = (sumsq / n as f64).sqrt();
        assert!((rms - 0.002).abs() < 0.2 * 0.002, "rms {rms} vs std 0.002");
    }

    #[test]
    fn velocity_step_lag_offset() {
        let tau = 0.05;
        let v0 = 0.4;
        let mut cfg = PlantConfig::ideal();
        cfg.servo_time_constant = tau;
        let mut plant = Plant::new(cfg).unwrap();
        let dt = 1e-3;
        let steps = (tau / dt).round() as usize;
        let mut s = plant.observe().unwrap();
        for _ in 0..steps {
            s = plant.step_rate([v0, 0.0], dt).unwrap();
        }
        let t = steps as f64 * dt;
        let offset = v0 * t - s.theta1;
        let expected = v0 * tau * (1.0 - (-t / tau).exp());
        assert_abs_diff_eq!(offset, expected, epsilon = 1e-12);
        // at t = tau the offset is 63.2% of its asymptote
        assert_abs_diff_eq!(offset / (v0 * tau), 1.0 - (-1.0_f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn default_dataset_size_and_split() {
        let profiles = default_profiles();
        assert_eq!(profiles.len(), 11);
        // count without simulating the full default duration
        let n_per = (54.04 * DEFAULT_SAMPLE_RATE).round() as usize;
        assert_eq!(n_per, 9727);
        assert_eq!(n_per * 11, 106_997);
        assert!((106_997_i64 - 107_000).abs() <= 11);
    }

    #[test]
    fn small_dataset_split_arithmetic() {
        let profile = VelocityProfile {
            id: 0,
            amplitude: [0.2, 0.2],
            frequency: [0.2, 0.3],
            phase: [0.0, 1.0],
            duration: 1.0,
        };
        let ds = generate_dataset(&PlantConfig::ideal(), &[profile], 100.0).unwrap();
        assert_eq!(ds.len(), 100);
        let (train, test) = ds.counts();
        assert_eq!((train, test), (80, 20));
    }

    #[test]
    fn generation_is_deterministic() {
        let profiles: Vec<_> = default_profiles()
            .into_iter()
            .take(2)
            .map(|mut p| {
                p.duration = 2.0;
                p
            })
            .collect();
        let cfg = PlantConfig::default_imperfect();
        let a = generate_dataset(&cfg, &profiles, 60.0).unwrap();
        let b = generate_dataset(&cfg, &profiles, 60.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn csv_round_trip() {
        let profile = VelocityProfile {
            id: 3,
            amplitude: [0.3, 0.25],
            frequency: [0.15, 0.21],
            phase: [0.4, 2.0],
            duration: 1.5,
        };
        let ds = generate_dataset(&PlantConfig::default_imperfect(), &[profile], 50.0).unwrap();
        let back = Dataset::from_csv(&ds.to_csv()).unwrap();
        assert_eq!(ds.len(), back.len());
        assert_eq!(ds.split, back.split);
        for (a, b) in ds.samples.iter().zip(&back.samples) {
            assert_abs_diff_eq!(a.theta1, b.theta1, epsilon = 1e-7);
            assert!(quat_angle_error(a.q01, b.q01) < 1e-7);
        }
    }

    #[test]
    fn analytic_ik_error_monotone_in_imperfection() {
        let profile = VelocityProfile {
            id: 0,
            amplitude: [0.3, 0.35],
            frequency: [0.1, 0.13],
            phase: [0.0, 1.2],
            duration: 5.0,
        };
        let mut prev = -1.0;
        for scale in [0.0, 1.0, 2.0, 4.0] {
            let mut cfg = PlantConfig::scaled_imperfect(scale);
            cfg.quaternion_noise_std = 0.0; // keep the comparison deterministic
            let ds = generate_dataset(&cfg, &[profile], 60.0).unwrap();
            let mut err = 0.0;
            for s in &ds.samples {
                let n = s.q01.rotate([0.0, 0.0, 1.0]);
                let (t1, t2) = inverse_kinematics(n).unwrap();
                err += (t1 - s.theta1).abs() + (t2 - s.theta2).abs();
            }
            err /= ds.len() as f64;
            assert!(err >= prev - 1e-12, "error {err} decreased from {prev} at scale {scale}");
            prev = err;
        }
    }
}
