//! Learned inverse kinematics: a single-hidden-layer tanh MLP trained with
//! Adam on (relative quaternion -> actuator angles) pairs.
//!
//! Everything is implemented here: forward pass, backpropagation, the Adam
//! update with bias correction, feature normalization, early stopping, and a
//! versioned plain-text model format with full round-trip precision. Training
//! is single-threaded and bitwise deterministic for a fixed dataset and seed.

use crate::plant::{Dataset, Sample, Split};
use crate::rotation::UnitQuaternion;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::fmt::Write as _;
use std::time::Instant;
use thiserror::Error;

/// Hidden-layer activation. Only tanh is implemented; the field exists so the
/// model file stays self-describing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpHyperparams {
    pub hidden_units: usize,
    pub activation: Activation,
    /// Relative epoch-loss improvement below which patience is consumed.
    pub tolerance: f64,
    /// Epoch cap.
    pub max_iterations: usize,
    pub step_size: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub rng_seed: u64,
}

impl Default for MlpHyperparams {
    fn default() -> Self {
        Self {
            hidden_units: 2700,
            activation: Activation::Tanh,
            tolerance: 1e-3,
            max_iterations: 1000,
            step_size: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            batch_size: 256,
            rng_seed: 7,
        }
    }
}

impl MlpHyperparams {
    pub fn validate(&self) -> Result<(), TrainError> {
        if self.hidden_units == 0 || self.max_iterations == 0 || self.batch_size == 0 {
            return Err(TrainError::InvalidHyperparams(
                "hidden_units, max_iterations and batch_size must be >= 1".into(),
            ));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.tolerance) || !positive(self.step_size) {
            return Err(TrainError::InvalidHyperparams(
                "tolerance and step_size must be > 0".into(),
            ));
        }
        Ok(())
    }
}

/// Trained model: normalization, weights, and training metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct IkModel {
    pub hyperparams: MlpHyperparams,
    pub norm_mean: [f64; 4],
    pub norm_scale: [f64; 4],
    pub w1: DMatrix<f64>,
    pub b1: DVector<f64>,
    pub w2: DMatrix<f64>,
    pub b2: DVector<f64>,
    pub final_loss: f64,
    pub epochs_run: usize,
    pub train_seconds: f64,
}

/// Per-joint mean absolute error plus the raw residual series.
#[derive(Debug, Clone)]
pub struct EvalReport {
    pub mae_theta1_deg: f64,
    pub mae_theta2_deg: f64,
    /// Per-sample (theta1, theta2) prediction residuals, radians.
    pub residuals: Vec<(f64, f64)>,
    pub samples: usize,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("training split is empty")]
    EmptySplit,
    #[error("training diverged: loss became non-finite at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("invalid hyperparameters: {0}")]
    InvalidHyperparams(String),
}

#[derive(Debug, Error)]
pub enum ModelIoError {
    #[error("model file format error: {0}")]
    Format(String),
    #[error("unsupported model version '{found}' (supported: '{supported}')")]
    Version { found: String, supported: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

const MODEL_MAGIC: &str = "spmkit-ik-model";
const MODEL_VERSION: &str = "v1";

fn features(q: UnitQuaternion) -> [f64; 4] {
    // UnitQuaternion is canonical-signed by construction, so the double-cover
    // sign ambiguity never reaches the network.
    q.components()
}

/// Adam state for one parameter block.
struct Adam {
    m: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl Adam {
    fn new(rows: usize, cols: usize) -> Self {
        Self { m: DMatrix::zeros(rows, cols), v: DMatrix::zeros(rows, cols) }
    }

    /// One bias-corrected Adam update; `t` is the global step count (1-based).
    fn update(&mut self, w: &mut DMatrix<f64>, g: &DMatrix<f64>, hp: &MlpHyperparams, t: i32) {
        let b1c = 1.0 - hp.beta1.powi(t);
        let b2c = 1.0 - hp.beta2.powi(t);
        for i in 0..w.len() {
            self.m[i] = hp.beta1 * self.m[i] + (1.0 - hp.beta1) * g[i];
            self.v[i] = hp.beta2 * self.v[i] + (1.0 - hp.beta2) * g[i] * g[i];
            let m_hat = self.m[i] / b1c;
            let v_hat = self.v[i] / b2c;
            w[i] -= hp.step_size * m_hat / (v_hat.sqrt() + hp.epsilon);
        }
    }
}

struct Gradients {
    w1: DMatrix<f64>,
    b1: DMatrix<f64>,
    w2: DMatrix<f64>,
    b2: DMatrix<f64>,
}

/// Forward + backward pass over one batch (columns are samples); returns the
/// batch MSE and the parameter gradients.
fn batch_gradients(
    w1: &DMatrix<f64>,
    b1: &DVector<f64>,
    w2: &DMatrix<f64>,
    b2: &DVector<f64>,
    x: &DMatrix<f64>,
    t: &DMatrix<f64>,
) -> (f64, Gradients) {
    let n = x.ncols() as f64;
    let mut z1 = w1 * x;
    for mut col in z1.column_iter_mut() {
        col += b1;
    }
    let a1 = z1.map(f64::tanh);
    let mut y = w2 * &a1;
    for mut col in y.column_iter_mut() {
        col += b2;
    }
    let err = &y - t;
    let loss = err.iter().map(|e| e * e).sum::<f64>() / (n * 2.0);

    // dL/dY for MSE averaged over batch and both outputs
    let dy = err.map(|e| e / n);
    let gw2 = &dy * a1.transpose();
    let gb2 = DMatrix::from_column_slice(dy.nrows(), 1, dy.column_sum().as_slice());
    let mut da1 = w2.transpose() * &dy;
    // tanh' = 1 - tanh^2
    for (d, a) in da1.iter_mut().zip(a1.iter()) {
        *d *= 1.0 - a * a;
    }
    let gw1 = &da1 * x.transpose();
    let gb1 = DMatrix::from_column_slice(da1.nrows(), 1, da1.column_sum().as_slice());
    (loss, Gradients { w1: gw1, b1: gb1, w2: gw2, b2: gb2 })
}

fn split_matrices(dataset: &Dataset, split: Split) -> (DMatrix<f64>, DMatrix<f64>) {
    let samples: Vec<&Sample> = dataset.iter_split(split).collect();
    let n = samples.len();
    let mut x = DMatrix::zeros(4, n);
    let mut t = DMatrix::zeros(2, n);
    for (j, s) in samples.iter().enumerate() {
        let f = features(s.q01);
        for i in 0..4 {
            x[(i, j)] = f[i];
        }
        t[(0, j)] = s.theta1;
        t[(1, j)] = s.theta2;
    }
    (x, t)
}

/// Train an MLP on the dataset's training split.
///
/// Stops at `max_iterations` epochs or once the best epoch loss has failed to
/// improve by a relative `tolerance` for 10 consecutive epochs.
pub fn train(dataset: &Dataset, hp: &MlpHyperparams) -> Result<IkModel, TrainError> {
    hp.validate()?;
    let started = Instant::now();
    let (x_raw, targets) = split_matrices(dataset, Split::Train);
    let n = x_raw.ncols();
    if n == 0 {
        return Err(TrainError::EmptySplit);
    }

    // per-feature normalization from the training split
    let mut norm_mean = [0.0; 4];
    let mut norm_scale = [0.0; 4];
    for i in 0..4 {
        let row = x_raw.row(i);
        let mean = row.sum() / n as f64;
        let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        norm_mean[i] = mean;
        norm_scale[i] = var.sqrt().max(1e-8);
    }
    let mut x = x_raw;
    for i in 0..4 {
        let (mean, scale) = (norm_mean[i], norm_scale[i]);
        for v in x.row_mut(i).iter_mut() {
            *v = (*v - mean) / scale;
        }
    }

    let h = hp.hidden_units;
    let mut rng = ChaCha8Rng::seed_from_u64(hp.rng_seed);
    let glorot = |rng: &mut ChaCha8Rng, rows: usize, cols: usize| {
        let bound = (6.0 / (rows + cols) as f64).sqrt();
        DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-bound..bound))
    };
    let mut w1 = glorot(&mut rng, h, 4);
    let mut b1 = DVector::zeros(h);
    let mut w2 = glorot(&mut rng, 2, h);
    let mut b2 = DVector::zeros(2);

    let mut adam_w1 = Adam::new(h, 4);
    let mut adam_b1 = Adam::new(h, 1);
    let mut adam_w2 = Adam::new(2, h);
    let mut adam_b2 = Adam::new(2, 1);

    let mut order: Vec<usize> = (0..n).collect();
    let mut step = 0i32;
    let mut best_loss = f64::INFINITY;
    let mut stall = 0usize;
    let mut epoch_loss = f64::INFINITY;
    let mut epochs_run = 0;
    // plateau schedule: halve the step size partway through the patience
    // window; an improving epoch resets both counters
    let mut run_hp = hp.clone();
    let mut decays = 0usize;

    for epoch in 0..hp.max_iterations {
        epochs_run = epoch + 1;
        // Fisher-Yates shuffle under the training stream
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut loss_sum = 0.0;
        let mut batches = 0.0;
        let mut start = 0;
        while start < n {
            let end = (start + hp.batch_size).min(n);
            let cols = &order[start..end];
            let xb = x.select_columns(cols);
            let tb = targets.select_columns(cols);
            let (loss, g) = batch_gradients(&w1, &b1, &w2, &b2, &xb, &tb);
            loss_sum += loss;
            batches += 1.0;
            step += 1;
            adam_w1.update(&mut w1, &g.w1, &run_hp, step);
            let mut b1m = DMatrix::from_column_slice(h, 1, b1.as_slice());
            adam_b1.update(&mut b1m, &g.b1, &run_hp, step);
            b1 = DVector::from_column_slice(b1m.as_slice());
            adam_w2.update(&mut w2, &g.w2, &run_hp, step);
            let mut b2m = DMatrix::from_column_slice(2, 1, b2.as_slice());
            adam_b2.update(&mut b2m, &g.b2, &run_hp, step);
            b2 = DVector::from_column_slice(b2m.as_slice());
            start = end;
        }
        epoch_loss = loss_sum / batches;
        if !epoch_loss.is_finite() {
            return Err(TrainError::Diverged { epoch });
        }
        // an improvement below double-precision noise is not an improvement
        let improved =
            epoch_loss < best_loss * (1.0 - hp.tolerance) && best_loss - epoch_loss > 1e-15;
        if improved {
            stall = 0;
        } else {
            stall += 1;
            if stall >= 10 {
                break;
            }
            if (stall == 4 || stall == 8) && decays < 6 {
                run_hp.step_size /= 2.0;
                decays += 1;
            }
        }
        best_loss = best_loss.min(epoch_loss);
    }

    Ok(IkModel {
        hyperparams: hp.clone(),
        norm_mean,
        norm_scale,
        w1,
        b1,
        w2,
        b2,
        final_loss: epoch_loss,
        epochs_run,
        train_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Single forward pass: relative quaternion to predicted actuator angles.
pub fn predict(model: &IkModel, q01: UnitQuaternion) -> (f64, f64) {
    let f = features(q01);
    let mut x = [0.0; 4];
    for (i, xi) in x.iter_mut().enumerate() {
        *xi = (f[i] - model.norm_mean[i]) / model.norm_scale[i];
    }
    let h = model.hyperparams.hidden_units;
    let mut out = [model.b2[0], model.b2[1]];
    for j in 0..h {
        let mut z = model.b1[j];
        for (i, xi) in x.iter().enumerate() {
            z += model.w1[(j, i)] * xi;
        }
        let a = z.tanh();
        out[0] += model.w2[(0, j)] * a;
        out[1] += model.w2[(1, j)] * a;
    }
    (out[0], out[1])
}

/// Anything that maps a relative quaternion to actuator angles; lets the
/// analytic inverse kinematics stand in for a trained model in comparisons.
pub trait AnglePredictor {
    fn predict_angles(&self, q01: UnitQuaternion) -> (f64, f64);
}

impl AnglePredictor for IkModel {
    fn predict_angles(&self, q01: UnitQuaternion) -> (f64, f64) {
        predict(self, q01)
    }
}

/// The nominal closed-form inverse kinematics used as a predictor. Pointers
/// that leave the hemisphere chart get the chart-edge answer.
#[derive(Debug, Clone, Copy, Default)]
pub struct AnalyticIk;

impl AnglePredictor for AnalyticIk {
    fn predict_angles(&self, q01: UnitQuaternion) -> (f64, f64) {
        let n = q01.rotate([0.0, 0.0, 1.0]);
        crate::mechanism::inverse_kinematics(n).unwrap_or((0.0, std::f64::consts::FRAC_PI_2))
    }
}

/// Per-joint MAE of a predictor over one dataset split.
pub fn evaluate_predictor(
    predictor: &dyn AnglePredictor,
    dataset: &Dataset,
    split: Split,
) -> EvalReport {
    let mut residuals = Vec::new();
    let (mut e1, mut e2) = (0.0, 0.0);
    for s in dataset.iter_split(split) {
        let (p1, p2) = predictor.predict_angles(s.q01);
        let (r1, r2) = (p1 - s.theta1, p2 - s.theta2);
        e1 += r1.abs();
        e2 += r2.abs();
        residuals.push((r1, r2));
    }
    let n = residuals.len().max(1) as f64;
    EvalReport {
        mae_theta1_deg: (e1 / n).to_degrees(),
        mae_theta2_deg: (e2 / n).to_degrees(),
        samples: residuals.len(),
        residuals,
    }
}

/// Per-joint MAE of a trained model over one dataset split.
pub fn evaluate(model: &IkModel, dataset: &Dataset, split: Split) -> EvalReport {
    evaluate_predictor(model, dataset, split)
}

fn write_matrix(out: &mut String, name: &str, m: &DMatrix<f64>) {
    let _ = writeln!(out, "{name} {} {}", m.nrows(), m.ncols());
    for r in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|c| format!("{}", m[(r, c)])).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

/// Serialize to the versioned plain-text format (shortest round-trip floats).
pub fn model_to_string(model: &IkModel) -> String {
    let hp = &model.hyperparams;
    let mut out = String::new();
    let _ = writeln!(out, "{MODEL_MAGIC} {MODEL_VERSION}");
    let _ = writeln!(out, "hidden_units {}", hp.hidden_units);
    let _ = writeln!(out, "activation tanh");
    let _ = writeln!(out, "tolerance {}", hp.tolerance);
    let _ = writeln!(out, "max_iterations {}", hp.max_iterations);
    let _ = writeln!(out, "step_size {}", hp.step_size);
    let _ = writeln!(out, "beta1 {}", hp.beta1);
    let _ = writeln!(out, "beta2 {}", hp.beta2);
    let _ = writeln!(out, "epsilon {}", hp.epsilon);
    let _ = writeln!(out, "batch_size {}", hp.batch_size);
    let _ = writeln!(out, "rng_seed {}", hp.rng_seed);
    let _ = writeln!(out, "final_loss {}", model.final_loss);
    let _ = writeln!(out, "epochs_run {}", model.epochs_run);
    let _ = writeln!(out, "train_seconds {}", model.train_seconds);
    let mean: Vec<String> = model.norm_mean.iter().map(|v| format!("{v}")).collect();
    let scale: Vec<String> = model.norm_scale.iter().map(|v| format!("{v}")).collect();
    let _ = writeln!(out, "norm_mean {}", mean.join(" "));
    let _ = writeln!(out, "norm_scale {}", scale.join(" "));
    write_matrix(&mut out, "w1", &model.w1);
    write_matrix(&mut out, "b1", &DMatrix::from_column_slice(model.b1.len(), 1, model.b1.as_slice()));
    write_matrix(&mut out, "w2", &model.w2);
    write_matrix(&mut out, "b2", &DMatrix::from_column_slice(model.b2.len(), 1, model.b2.as_slice()));
    out.push_str("end\n");
    out
}

pub fn save_model(model: &IkModel, path: &std::path::Path) -> Result<(), ModelIoError> {
    std::fs::write(path, model_to_string(model))?;
    Ok(())
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    line_no: usize,
}

impl<'a> LineReader<'a> {
    fn next(&mut self) -> Result<&'a str, ModelIoError> {
        self.line_no += 1;
        self.lines.next().ok_or_else(|| {
            ModelIoError::Format(format!("unexpected end of file at line {}", self.line_no))
        })
    }
}

fn parse_kv<'a>(reader: &mut LineReader<'a>, key: &str) -> Result<&'a str, ModelIoError> {
    let line = reader.next()?;
    let (k, v) = line
        .split_once(' ')
        .ok_or_else(|| ModelIoError::Format(format!("malformed line '{line}'")))?;
    if k != key {
        return Err(ModelIoError::Format(format!("expected key '{key}', found '{k}'")));
    }
    Ok(v.trim())
}

fn parse_num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T, ModelIoError> {
    s.parse().map_err(|_| ModelIoError::Format(format!("bad {what}: '{s}'")))
}

fn parse_matrix(reader: &mut LineReader<'_>, name: &str) -> Result<DMatrix<f64>, ModelIoError> {
    let header = reader.next()?;
    let mut parts = header.split_whitespace();
    let found = parts.next().unwrap_or("");
    if found != name {
        return Err(ModelIoError::Format(format!("expected matrix '{name}', found '{found}'")));
    }
    let rows: usize = parse_num(parts.next().unwrap_or(""), "matrix rows")?;
    let cols: usize = parse_num(parts.next().unwrap_or(""), "matrix cols")?;
    let mut m = DMatrix::zeros(rows, cols);
    for r in 0..rows {
        let line = reader.next()?;
        let mut it = line.split_whitespace();
        for c in 0..cols {
            let tok = it
                .next()
                .ok_or_else(|| ModelIoError::Format(format!("{name}: row {r} too short")))?;
            m[(r, c)] = parse_num(tok, "matrix entry")?;
        }
        if it.next().is_some() {
            return Err(ModelIoError::Format(format!("{name}: row {r} too long")));
        }
    }
    Ok(m)
}

pub fn model_from_string(text: &str) -> Result<IkModel, ModelIoError> {
    let mut reader = LineReader { lines: text.lines(), line_no: 0 };
    let head = reader.next()?;
    let mut parts = head.split_whitespace();
    if parts.next() != Some(MODEL_MAGIC) {
        return Err(ModelIoError::Format(format!("not a model file (header '{head}')")));
    }
    let version = parts.next().unwrap_or("").to_string();
    if version != MODEL_VERSION {
        return Err(ModelIoError::Version { found: version, supported: MODEL_VERSION.into() });
    }
    let hidden_units: usize = parse_num(parse_kv(&mut reader, "hidden_units")?, "hidden_units")?;
    let act = parse_kv(&mut reader, "activation")?;
    if act != "tanh" {
        return Err(ModelIoError::Format(format!("unsupported activation '{act}'")));
    }
    let tolerance = parse_num(parse_kv(&mut reader, "tolerance")?, "tolerance")?;
    let max_iterations = parse_num(parse_kv(&mut reader, "max_iterations")?, "max_iterations")?;
    let step_size = parse_num(parse_kv(&mut reader, "step_size")?, "step_size")?;
    let beta1 = parse_num(parse_kv(&mut reader, "beta1")?, "beta1")?;
    let beta2 = parse_num(parse_kv(&mut reader, "beta2")?, "beta2")?;
    let epsilon = parse_num(parse_kv(&mut reader, "epsilon")?, "epsilon")?;
    let batch_size = parse_num(parse_kv(&mut reader, "batch_size")?, "batch_size")?;
    let rng_seed = parse_num(parse_kv(&mut reader, "rng_seed")?, "rng_seed")?;
    let final_loss = parse_num(parse_kv(&mut reader, "final_loss")?, "final_loss")?;
    let epochs_run = parse_num(parse_kv(&mut reader, "epochs_run")?, "epochs_run")?;
    let train_seconds = parse_num(parse_kv(&mut reader, "train_seconds")?, "train_seconds")?;
    let parse4 = |s: &str, what: &str| -> Result<[f64; 4], ModelIoError> {
        let vals: Vec<f64> =
            s.split_whitespace().map(|t| parse_num(t, what)).collect::<Result<_, _>>()?;
        vals.try_into().map_err(|_| ModelIoError::Format(format!("{what} needs 4 values")))
    };
    let norm_mean = parse4(parse_kv(&mut reader, "norm_mean")?, "norm_mean")?;
    let norm_scale = parse4(parse_kv(&mut reader, "norm_scale")?, "norm_scale")?;
    let w1 = parse_matrix(&mut reader, "w1")?;
    let b1m = parse_matrix(&mut reader, "b1")?;
    let w2 = parse_matrix(&mut reader, "w2")?;
    let b2m = parse_matrix(&mut reader, "b2")?;
    if reader.next()? != "end" {
        return Err(ModelIoError::Format("missing trailing 'end'".into()));
    }
    if w1.nrows() != hidden_units
        || w1.ncols() != 4
        || w2.nrows() != 2
        || w2.ncols() != hidden_units
    {
        return Err(ModelIoError::Format("weight shapes disagree with hidden_units".into()));
    }
    if norm_scale.iter().any(|s| !s.is_finite() || *s <= 0.0) {
        return Err(ModelIoError::Format("normalization scales must be positive".into()));
    }
    Ok(IkModel {
        hyperparams: MlpHyperparams {
            hidden_units,
            activation: Activation::Tanh,
            tolerance,
            max_iterations,
            step_size,
            beta1,
            beta2,
            epsilon,
            batch_size,
            rng_seed,
        },
        norm_mean,
        norm_scale,
        w1,
        b1: DVector::from_column_slice(b1m.as_slice()),
        w2,
        b2: DVector::from_column_slice(b2m.as_slice()),
        final_loss,
        epochs_run,
        train_seconds,
    })
}

pub fn load_model(path: &std::path::Path) -> Result<IkModel, ModelIoError> {
    model_from_string(&std::fs::read_to_string(path)?)
}

/// Numerical self-checks for the training machinery, exposed so external
/// verification suites can exercise the backpropagation and optimizer paths
/// without reaching into internals.
pub mod selfcheck {
    use super::*;

    /// Worst relative error between analytic backprop gradients and central
    /// finite differences (step 1e-5) on a small network over the dataset's
    /// training split. Probes every parameter of the toy network.
    pub fn gradient_fd_max_rel_error(hidden_units: usize, dataset: &Dataset, seed: u64) -> f64 {
        let (x, t) = split_matrices(dataset, Split::Train);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w1 = DMatrix::from_fn(hidden_units, 4, |_, _| rng.random_range(-0.5..0.5));
        let b1 = DVector::from_fn(hidden_units, |_, _| rng.random_range(-0.2..0.2));
        let w2 = DMatrix::from_fn(2, hidden_units, |_, _| rng.random_range(-0.5..0.5));
        let b2 = DVector::from_fn(2, |_, _| rng.random_range(-0.2..0.2));
        let (_, g) = batch_gradients(&w1, &b1, &w2, &b2, &x, &t);

        let h = 1e-5;
        let mut worst: f64 = 0.0;
        let mut probe = |analytic: f64, lp: f64, lm: f64| {
            let fd = (lp - lm) / (2.0 * h);
            worst = worst.max((analytic - fd).abs() / fd.abs().max(1e-8));
        };
        for r in 0..w1.nrows() {
            for c in 0..w1.ncols() {
                let mut wp = w1.clone();
                wp[(r, c)] += h;
                let mut wm = w1.clone();
                wm[(r, c)] -= h;
                let (lp, _) = batch_gradients(&wp, &b1, &w2, &b2, &x, &t);
                let (lm, _) = batch_gradients(&wm, &b1, &w2, &b2, &x, &t);
                probe(g.w1[(r, c)], lp, lm);
            }
        }
        for r in 0..w2.nrows() {
            for c in 0..w2.ncols() {
                let mut wp = w2.clone();
                wp[(r, c)] += h;
                let mut wm = w2.clone();
                wm[(r, c)] -= h;
                let (lp, _) = batch_gradients(&w1, &b1, &wp, &b2, &x, &t);
                let (lm, _) = batch_gradients(&w1, &b1, &wm, &b2, &x, &t);
                probe(g.w2[(r, c)], lp, lm);
            }
        }
        for i in 0..b1.len() {
            let mut bp = b1.clone();
            bp[i] += h;
            let mut bm = b1.clone();
            bm[i] -= h;
            let (lp, _) = batch_gradients(&w1, &bp, &w2, &b2, &x, &t);
            let (lm, _) = batch_gradients(&w1, &bm, &w2, &b2, &x, &t);
            probe(g.b1[(i, 0)], lp, lm);
        }
        for i in 0..b2.len() {
            let mut bp = b2.clone();
            bp[i] += h;
            let mut bm = b2.clone();
            bm[i] -= h;
            let (lp, _) = batch_gradients(&w1, &b1, &w2, &bp, &x, &t);
            let (lm, _) = batch_gradients(&w1, &b1, &w2, &bm, &x, &t);
            probe(g.b2[(i, 0)], lp, lm);
        }
        worst
    }

    /// One bias-corrected Adam update of a single scalar parameter from
    /// zeroed moments; comparable against the closed form
    /// `w - step_size * g / (|g| + epsilon)`.
    pub fn adam_single_step(hp: &MlpHyperparams, w0: f64, gradient: f64) -> f64 {
        let mut w = DMatrix::from_element(1, 1, w0);
        let g = DMatrix::from_element(1, 1, gradient);
        let mut adam = Adam::new(1, 1);
        adam.update(&mut w, &g, hp, 1);
        w[(0, 0)]
    }
}
