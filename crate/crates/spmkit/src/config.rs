//! Flat key=value run configuration.
//!
//! One human-editable file carries the plant, sampling-profile, training and
//! evaluation settings. Unknown keys are hard errors so typos in imperfection
//! magnitudes cannot pass silently. All angles (and angle-derived rates) in
//! config files are degrees; everything internal is radians. Missing keys
//! fall back to the built-in defaults.

use crate::neural::MlpHyperparams;
use crate::plant::{default_profiles, PlantConfig, VelocityProfile, DEFAULT_SAMPLE_RATE};
use crate::rotation::UnitQuaternion;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: unknown configuration key '{key}'")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("configuration invalid: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub plant: PlantConfig,
    pub profiles: Vec<VelocityProfile>,
    pub sample_rate_hz: f64,
    pub hyperparams: MlpHyperparams,
    pub track_duration_s: f64,
    pub track_rate_hz: f64,
    /// Half-range of the singularity-scan grid, radians.
    pub scan_half_range: f64,
    pub scan_grid: usize,
    /// Twist of the grounded link used by `scan`, radians.
    pub scan_alpha1: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plant: PlantConfig::default_imperfect(),
            profiles: default_profiles(),
            sample_rate_hz: DEFAULT_SAMPLE_RATE,
            hyperparams: MlpHyperparams::default(),
            track_duration_s: 20.0,
            track_rate_hz: 200.0,
            scan_half_range: 1.2,
            scan_grid: 31,
            scan_alpha1: std::f64::consts::FRAC_PI_2,
        }
    }
}

fn parse_f64(v: &str, line: usize) -> Result<f64, ConfigError> {
    v.trim()
        .parse()
        .map_err(|_| ConfigError::Malformed { line, msg: format!("expected a number, got '{v}'") })
}

fn parse_list(v: &str, n: usize, line: usize) -> Result<Vec<f64>, ConfigError> {
    let vals: Vec<f64> =
        v.split(',').map(|s| parse_f64(s, line)).collect::<Result<_, _>>()?;
    if vals.len() != n {
        return Err(ConfigError::Malformed {
            line,
            msg: format!("expected {n} comma-separated values, got {}", vals.len()),
        });
    }
    Ok(vals)
}

/// Parse a configuration file's text into a resolved [`RunConfig`].
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut profiles: BTreeMap<u32, VelocityProfile> = BTreeMap::new();
    let mut saw_profile = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ConfigError::Malformed {
            line,
            msg: "expected 'key = value'".into(),
        })?;
        let key = key.trim();
        let value = value.trim();
        match key {
            "alpha_offsets_deg" => {
                let v = parse_list(value, 5, line)?;
                for (dst, src) in cfg.plant.design_perturbations.iter_mut().zip(v) {
                    *dst = src.to_radians();
                }
            }
            "joint_zero_offsets_deg" => {
                let v = parse_list(value, 5, line)?;
                for (dst, src) in cfg.plant.joint_zero_offsets.iter_mut().zip(v) {
                    *dst = src.to_radians();
                }
            }
            "hinge_compliance_gain" => cfg.plant.hinge_compliance_gain = parse_f64(value, line)?,
            "servo_time_constant_s" => cfg.plant.servo_time_constant = parse_f64(value, line)?,
            "servo_rate_limit_deg_s" => {
                cfg.plant.servo_rate_limit = parse_f64(value, line)?.to_radians()
            }
            "quaternion_noise_std_deg" => {
                cfg.plant.quaternion_noise_std = parse_f64(value, line)?.to_radians()
            }
            "chassis_mount_quat" => {
                let v = parse_list(value, 4, line)?;
                cfg.plant.chassis_mount = UnitQuaternion::new(v[0], v[1], v[2], v[3]);
            }
            "rng_seed" => {
                cfg.plant.rng_seed = value.parse().map_err(|_| ConfigError::Malformed {
                    line,
                    msg: format!("expected an integer seed, got '{value}'"),
                })?
            }
            "sample_rate_hz" => cfg.sample_rate_hz = parse_f64(value, line)?,
            "hidden_units" => {
                cfg.hyperparams.hidden_units =
                    value.parse().map_err(|_| ConfigError::Malformed {
                        line,
                        msg: format!("expected an integer, got '{value}'"),
                    })?
            }
            "tolerance" => cfg.hyperparams.tolerance = parse_f64(value, line)?,
            "max_iterations" => {
                cfg.hyperparams.max_iterations =
                    value.parse().map_err(|_| ConfigError::Malformed {
                        line,
                        msg: format!("expected an integer, got '{value}'"),
                    })?
            }
            "step_size" => cfg.hyperparams.step_size = parse_f64(value, line)?,
            "beta1" => cfg.hyperparams.beta1 = parse_f64(value, line)?,
            "beta2" => cfg.hyperparams.beta2 = parse_f64(value, line)?,
            "epsilon" => cfg.hyperparams.epsilon = parse_f64(value, line)?,
            "batch_size" => {
                cfg.hyperparams.batch_size =
                    value.parse().map_err(|_| ConfigError::Malformed {
                        line,
                        msg: format!("expected an integer, got '{value}'"),
                    })?
            }
            "train_rng_seed" => {
                cfg.hyperparams.rng_seed = value.parse().map_err(|_| ConfigError::Malformed {
                    line,
                    msg: format!("expected an integer seed, got '{value}'"),
                })?
            }
            "track_duration_s" => cfg.track_duration_s = parse_f64(value, line)?,
            "track_rate_hz" => cfg.track_rate_hz = parse_f64(value, line)?,
            "scan_half_range_deg" => cfg.scan_half_range = parse_f64(value, line)?.to_radians(),
            "scan_grid" => {
                cfg.scan_grid = value.parse().map_err(|_| ConfigError::Malformed {
                    line,
                    msg: format!("expected an integer, got '{value}'"),
                })?
            }
            "scan_alpha1_deg" => cfg.scan_alpha1 = parse_f64(value, line)?.to_radians(),
            _ => {
                if let Some(id_str) = key.strip_prefix("profile_") {
                    let id: u32 = id_str.parse().map_err(|_| ConfigError::UnknownKey {
                        key: key.to_string(),
                        line,
                    })?;
                    // amp1_deg_s, f1_hz, phase1_deg, amp2_deg_s, f2_hz, phase2_deg, duration_s
                    let v = parse_list(value, 7, line)?;
                    saw_profile = true;
                    profiles.insert(
                        id,
                        VelocityProfile {
                            id,
                            amplitude: [v[0].to_radians(), v[3].to_radians()],
                            frequency: [v[1], v[4]],
                            phase: [v[2].to_radians(), v[5].to_radians()],
                            duration: v[6],
                        },
                    );
                } else {
                    return Err(ConfigError::UnknownKey { key: key.to_string(), line });
                }
            }
        }
    }
    if saw_profile {
        cfg.profiles = profiles.into_values().collect();
    }
    cfg.plant.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    cfg.hyperparams.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
    if !(cfg.sample_rate_hz > 0.0 && cfg.track_rate_hz > 0.0 && cfg.track_duration_s > 0.0) {
        return Err(ConfigError::Invalid("rates and durations must be positive".into()));
    }
    if cfg.scan_grid == 0 {
        return Err(ConfigError::Invalid("scan_grid must be >= 1".into()));
    }
    Ok(cfg)
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig, ConfigError> {
    parse_config(&std::fs::read_to_string(path)?)
}

/// Canonical text form of a resolved configuration; hashing this plus the
/// tool version pins a run for the manifest.
pub fn canonical_string(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let p = &cfg.plant;
    let _ = writeln!(s, "alpha_offsets_rad {:?}", p.design_perturbations);
    let _ = writeln!(s, "joint_zero_offsets_rad {:?}", p.joint_zero_offsets);
    let _ = writeln!(s, "hinge_compliance_gain {}", p.hinge_compliance_gain);
    let _ = writeln!(s, "servo_time_constant_s {}", p.servo_time_constant);
    let _ = writeln!(s, "servo_rate_limit_rad_s {}", p.servo_rate_limit);
    let _ = writeln!(s, "quaternion_noise_std_rad {}", p.quaternion_noise_std);
    let _ = writeln!(s, "chassis_mount_quat {:?}", p.chassis_mount.components());
    let _ = writeln!(s, "rng_seed {}", p.rng_seed);
    let _ = writeln!(s, "sample_rate_hz {}", cfg.sample_rate_hz);
    for pr in &cfg.profiles {
        let _ = writeln!(
            s,
            "profile {} {:?} {:?} {:?} {}",
            pr.id, pr.amplitude, pr.frequency, pr.phase, pr.duration
        );
    }
    let h = &cfg.hyperparams;
    let _ = writeln!(
        s,
        "mlp {} {} {} {} {} {} {} {} {}",
        h.hidden_units,
        h.tolerance,
        h.max_iterations,
        h.step_size,
        h.beta1,
        h.beta2,
        h.epsilon,
        h.batch_size,
        h.rng_seed
    );
    let _ = writeln!(s, "track {} {}", cfg.track_duration_s, cfg.track_rate_hz);
    let _ = writeln!(s, "scan {} {} {}", cfg.scan_half_range, cfg.scan_grid, cfg.scan_alpha1);
    s
}

/// FNV-1a 64-bit hash, hex-encoded; used for run manifests.
pub fn fnv1a_hex(data: &str) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for b in data.bytes() {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{hash:016x}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn defaults_when_empty() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.profiles.len(), 11);
        assert_eq!(cfg.hyperparams.hidden_units, 2700);
        assert_abs_diff_eq!(cfg.sample_rate_hz, 180.0);
    }

    #[test]
    fn unknown_key_is_a_hard_error() {
        let err = parse_config("alpha_offests_deg = 1,2,3,4,5\n").unwrap_err();
        match err {
            ConfigError::UnknownKey { key, line } => {
                assert_eq!(key, "alpha_offests_deg");
                assert_eq!(line, 1);
            }
            other => panic!("expected UnknownKey, got {other:?}"),
        }
    }

    #[test]
    fn degrees_convert_at_the_boundary() {
        let text = "alpha_offsets_deg = 1, -1, 0.5, 0, 0\nquaternion_noise_std_deg = 0.3\nservo_rate_limit_deg_s = 400\n";
        let cfg = parse_config(text).unwrap();
        assert_abs_diff_eq!(cfg.plant.design_perturbations[0], 1.0_f64.to_radians());
        assert_abs_diff_eq!(cfg.plant.quaternion_noise_std, 0.3_f64.to_radians());
        assert_abs_diff_eq!(cfg.plant.servo_rate_limit, 400.0_f64.to_radians());
    }

    #[test]
    fn profiles_replace_defaults_when_given() {
        let text = "profile_0 = 20, 0.1, 0, 15, 0.2, 90, 2.5\n";
        let cfg = parse_config(text).unwrap();
        assert_eq!(cfg.profiles.len(), 1);
        let p = &cfg.profiles[0];
        assert_abs_diff_eq!(p.amplitude[0], 20.0_f64.to_radians());
        assert_abs_diff_eq!(p.phase[1], 90.0_f64.to_radians());
        assert_abs_diff_eq!(p.duration, 2.5);
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# a comment\n\nsample_rate_hz = 90\n";
        let cfg = parse_config(text).unwrap();
        assert_abs_diff_eq!(cfg.sample_rate_hz, 90.0);
    }

    #[test]
    fn canonical_string_is_stable() {
        let a = canonical_string(&RunConfig::default());
        let b = canonical_string(&RunConfig::default());
        assert_eq!(a, b);
        assert_eq!(fnv1a_hex(&a), fnv1a_hex(&b));
        assert_eq!(fnv1a_hex("").len(), 16);
    }

    #[test]
    fn out_of_range_offsets_rejected() {
        let err = parse_config("alpha_offsets_deg = 45, 0, 0, 0, 0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Invalid(_)));
    }
}
