//! Python bindings: the main kinematics types and the plant/train/track
//! pipeline, importable as `spmkit_py`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use spmkit::control::{self, DesiredTrajectory};
use spmkit::mechanism;
use spmkit::neural::{self, AnalyticIk, MlpHyperparams};
use spmkit::plant::{self, PlantConfig, Split};
use spmkit::rotation;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

type JointTuple = (f64, f64, f64, f64, f64);
type SampleTuple = (f64, Quaternion, f64, f64);

/// Unit quaternion with canonical sign.
#[pyclass(frozen, from_py_object)]
#[derive(Clone)]
struct Quaternion {
    inner: rotation::UnitQuaternion,
}

#[pymethods]
impl Quaternion {
    #[new]
    fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { inner: rotation::UnitQuaternion::new(w, x, y, z) }
    }

    #[staticmethod]
    fn identity() -> Self {
        Self { inner: rotation::UnitQuaternion::IDENTITY }
    }

    #[staticmethod]
    fn from_axis_angle(axis: (f64, f64, f64), angle: f64) -> Self {
        Self { inner: rotation::UnitQuaternion::from_axis_angle([axis.0, axis.1, axis.2], angle) }
    }

    /// Intrinsic Z-Y-X Euler angles (yaw, pitch, roll), radians.
    #[staticmethod]
    fn from_euler(phi: f64, psi: f64, theta: f64) -> Self {
        Self { inner: rotation::euler_to_quat(rotation::EulerAngles { phi, psi, theta }) }
    }

    fn compose(&self, other: &Quaternion) -> Quaternion {
        Quaternion { inner: self.inner.compose(other.inner) }
    }

    fn conjugate(&self) -> Quaternion {
        Quaternion { inner: self.inner.conjugate() }
    }

    fn rotate(&self, v: (f64, f64, f64)) -> (f64, f64, f64) {
        let r = self.inner.rotate([v.0, v.1, v.2]);
        (r[0], r[1], r[2])
    }

    fn to_euler(&self) -> (f64, f64, f64) {
        let e = rotation::quat_to_euler(self.inner);
        (e.phi, e.psi, e.theta)
    }

    /// Geodesic angle to another rotation, radians.
    fn angle_to(&self, other: &Quaternion) -> f64 {
        rotation::quat_angle_error(self.inner, other.inner)
    }

    fn components(&self) -> (f64, f64, f64, f64) {
        let [w, x, y, z] = self.inner.components();
        (w, x, y, z)
    }

    fn __repr__(&self) -> String {
        let [w, x, y, z] = self.inner.components();
        format!("Quaternion({w:.9}, {x:.9}, {y:.9}, {z:.9})")
    }
}

/// Relative rotation q01 with q0 * q01 = q1.
#[pyfunction]
fn relative_rotation(q0: &Quaternion, q1: &Quaternion) -> Quaternion {
    Quaternion { inner: rotation::relative_rotation(q0.inner, q1.inner) }
}

/// Closed-form inverse kinematics of the nominal design.
#[pyfunction]
fn inverse_kinematics(n: (f64, f64, f64)) -> PyResult<(f64, f64)> {
    mechanism::inverse_kinematics([n.0, n.1, n.2]).map_err(value_err)
}

/// Analytic forward kinematics: returns (pointer, orientation).
#[pyfunction]
fn forward_kinematics_ideal(theta1: f64, theta2: f64) -> PyResult<((f64, f64, f64), Quaternion)> {
    let pose = mechanism::forward_kinematics_ideal(theta1, theta2).map_err(value_err)?;
    Ok((
        (pose.normal[0], pose.normal[1], pose.normal[2]),
        Quaternion { inner: pose.orientation },
    ))
}

/// Numerical forward kinematics on a (possibly twist-perturbed) design:
/// returns the five hinge dihedrals and the end-effector orientation.
#[pyfunction]
#[pyo3(signature = (theta1, theta2, alpha_offsets_deg=None))]
fn solve_passive(
    theta1: f64,
    theta2: f64,
    alpha_offsets_deg: Option<(f64, f64, f64, f64, f64)>,
) -> PyResult<(JointTuple, Quaternion)> {
    let params = match alpha_offsets_deg {
        Some(o) => mechanism::DesignParams::perturbed(
            [o.0, o.1, o.2, o.3, o.4].map(f64::to_radians),
        ),
        None => mechanism::DesignParams::nominal(),
    };
    let state = mechanism::solve_passive(theta1, theta2, &params, None).map_err(value_err)?;
    let pose = mechanism::end_effector_pose(&state, &params);
    let t = state.theta;
    Ok(((t[0], t[1], t[2], t[3], t[4]), Quaternion { inner: pose.orientation }))
}

/// Inverse Jacobian rows for a joint state (five hinge dihedrals).
#[pyfunction]
fn inverse_jacobian(joints: JointTuple) -> PyResult<Vec<Vec<f64>>> {
    let state =
        mechanism::JointState::new([joints.0, joints.1, joints.2, joints.3, joints.4]);
    let j = mechanism::inverse_jacobian(&state).map_err(value_err)?;
    Ok(j.iter().map(|row| row.to_vec()).collect())
}

fn config_for(ideal: bool, seed: Option<u64>) -> PlantConfig {
    let mut cfg = if ideal { PlantConfig::ideal() } else { PlantConfig::default_imperfect() };
    if let Some(s) = seed {
        cfg.rng_seed = s;
    }
    cfg
}

/// Simulated imperfect plant with servo dynamics and measurement noise.
#[pyclass]
struct Plant {
    inner: plant::Plant,
}

#[pymethods]
impl Plant {
    #[new]
    #[pyo3(signature = (ideal=false, seed=None))]
    fn new(ideal: bool, seed: Option<u64>) -> PyResult<Self> {
        Ok(Self { inner: plant::Plant::new(config_for(ideal, seed)).map_err(value_err)? })
    }

    fn set_servo_angles(&mut self, theta1: f64, theta2: f64) {
        self.inner.set_servo_angles([theta1, theta2]);
    }

    /// Advance under a velocity command; returns (t, q01, theta1, theta2).
    fn step_rate(&mut self, rate1: f64, rate2: f64, dt: f64) -> PyResult<SampleTuple> {
        let s = self.inner.step_rate([rate1, rate2], dt).map_err(value_err)?;
        Ok((s.t_s, Quaternion { inner: s.q01 }, s.theta1, s.theta2))
    }

    /// Advance toward a position command; returns (t, q01, theta1, theta2).
    fn step_to_angle(&mut self, theta1: f64, theta2: f64, dt: f64) -> PyResult<SampleTuple> {
        let s = self.inner.step_to_angle([theta1, theta2], dt).map_err(value_err)?;
        Ok((s.t_s, Quaternion { inner: s.q01 }, s.theta1, s.theta2))
    }

    fn observe(&mut self) -> PyResult<SampleTuple> {
        let s = self.inner.observe().map_err(value_err)?;
        Ok((s.t_s, Quaternion { inner: s.q01 }, s.theta1, s.theta2))
    }
}

/// Sampled motion dataset with a stratified train/test split.
#[pyclass]
struct Dataset {
    inner: plant::Dataset,
}

#[pymethods]
impl Dataset {
    /// Run the built-in velocity profiles (truncated to `n_profiles`, each
    /// clipped to `duration_s`) on the ideal or default-imperfect plant.
    #[staticmethod]
    #[pyo3(signature = (ideal=false, duration_s=5.0, rate_hz=60.0, seed=42, n_profiles=11))]
    fn generate(
        ideal: bool,
        duration_s: f64,
        rate_hz: f64,
        seed: u64,
        n_profiles: usize,
    ) -> PyResult<Self> {
        let cfg = config_for(ideal, Some(seed));
        let profiles: Vec<_> = plant::default_profiles()
            .into_iter()
            .take(n_profiles.max(1))
            .map(|mut p| {
                p.duration = duration_s;
                p
            })
            .collect();
        let inner = plant::generate_dataset(&cfg, &profiles, rate_hz).map_err(value_err)?;
        Ok(Self { inner })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// (train, test) sample counts.
    fn counts(&self) -> (usize, usize) {
        self.inner.counts()
    }

    fn save_csv(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.inner.to_csv()).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[staticmethod]
    fn load_csv(path: &str) -> PyResult<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Ok(Self { inner: plant::Dataset::from_csv(&text).map_err(value_err)? })
    }
}

/// Trained inverse-kinematics MLP.
#[pyclass]
struct IkModel {
    inner: neural::IkModel,
}

#[pymethods]
impl IkModel {
    /// Train on the dataset's training split.
    #[staticmethod]
    #[pyo3(signature = (dataset, hidden_units=64, max_iterations=300, step_size=3e-3, tolerance=1e-6, batch_size=256, seed=7))]
    fn train(
        dataset: &Dataset,
        hidden_units: usize,
        max_iterations: usize,
        step_size: f64,
        tolerance: f64,
        batch_size: usize,
        seed: u64,
    ) -> PyResult<Self> {
        let hp = MlpHyperparams {
            hidden_units,
            max_iterations,
            step_size,
            tolerance,
            batch_size,
            rng_seed: seed,
            ..MlpHyperparams::default()
        };
        Ok(Self { inner: neural::train(&dataset.inner, &hp).map_err(value_err)? })
    }

    fn predict(&self, q01: &Quaternion) -> (f64, f64) {
        neural::predict(&self.inner, q01.inner)
    }

    /// Held-out per-joint MAE in degrees: (mae_theta1, mae_theta2, samples).
    fn evaluate(&self, dataset: &Dataset) -> (f64, f64, usize) {
        let r = neural::evaluate(&self.inner, &dataset.inner, Split::Test);
        (r.mae_theta1_deg, r.mae_theta2_deg, r.samples)
    }

    fn save(&self, path: &str) -> PyResult<()> {
        neural::save_model(&self.inner, std::path::Path::new(path)).map_err(value_err)
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self { inner: neural::load_model(std::path::Path::new(path)).map_err(value_err)? })
    }

    #[getter]
    fn epochs_run(&self) -> usize {
        self.inner.epochs_run
    }

    #[getter]
    fn final_loss(&self) -> f64 {
        self.inner.final_loss
    }
}

/// Open-loop tracking of the default sweep; returns per-axis Euler MAE in
/// degrees plus the achieved loop rate: (phi, psi, theta, hz).
#[pyfunction]
#[pyo3(signature = (model, ideal=false, duration_s=10.0, rate_hz=100.0, seed=None))]
fn track_sweep(
    model: &IkModel,
    ideal: bool,
    duration_s: f64,
    rate_hz: f64,
    seed: Option<u64>,
) -> PyResult<(f64, f64, f64, f64)> {
    let cfg = config_for(ideal, seed);
    let traj = DesiredTrajectory::default_sweep(duration_s, rate_hz, cfg.chassis_mount);
    let r = control::track(&model.inner, &cfg, &traj).map_err(value_err)?;
    Ok((r.mae_phi_deg, r.mae_psi_deg, r.mae_theta_deg, r.loop_hz))
}

/// Same sweep tracked with the analytic inverse kinematics instead of a
/// trained model.
#[pyfunction]
#[pyo3(signature = (ideal=false, duration_s=10.0, rate_hz=100.0, seed=None))]
fn track_sweep_analytic(
    ideal: bool,
    duration_s: f64,
    rate_hz: f64,
    seed: Option<u64>,
) -> PyResult<(f64, f64, f64, f64)> {
    let cfg = config_for(ideal, seed);
    let traj = DesiredTrajectory::default_sweep(duration_s, rate_hz, cfg.chassis_mount);
    let r = control::track(&AnalyticIk, &cfg, &traj).map_err(value_err)?;
    Ok((r.mae_phi_deg, r.mae_psi_deg, r.mae_theta_deg, r.loop_hz))
}

#[pymodule]
fn spmkit_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Quaternion>()?;
    m.add_class::<Plant>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<IkModel>()?;
    m.add_function(wrap_pyfunction!(relative_rotation, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_kinematics, m)?)?;
    m.add_function(wrap_pyfunction!(forward_kinematics_ideal, m)?)?;
    m.add_function(wrap_pyfunction!(solve_passive, m)?)?;
    m.add_function(wrap_pyfunction!(inverse_jacobian, m)?)?;
    m.add_function(wrap_pyfunction!(track_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(track_sweep_analytic, m)?)?;
    Ok(())
}
