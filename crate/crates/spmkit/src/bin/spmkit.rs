//! Command-line surface for the toolkit: dataset generation, training,
//! evaluation, open-loop tracking, singularity scans and benchmarks.
//!
//! Exit codes: 2 configuration/input error, 3 plant singularity, 4 training
//! divergence, 5 tracking failure, 6 scan failure, 7 benchmark failure.

use clap::{Parser, Subcommand};
use spmkit::config::{canonical_string, fnv1a_hex, load_config, RunConfig};
use spmkit::control::{loop_benchmark, track, virtual_endpoint_csv, DesiredTrajectory};
use spmkit::mechanism::{forward_kinematics_ideal, singularity_scan, DesignParams, ScanGrid};
use spmkit::neural::{evaluate, load_model, predict, save_model, train, TrainError};
use spmkit::plant::{generate_dataset, Dataset, PlantError, Split};
use spmkit::rotation::UnitQuaternion;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "spmkit", version, about = "2-DOF spherical parallel manipulator toolkit")]
struct Cli {
    /// Flat key=value configuration file (defaults are built in).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the plant and training RNG seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Suppress informational output.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate the configured velocity profiles and write the dataset CSV
    /// plus a reproducibility manifest.
    Generate,
    /// Train the inverse-kinematics model on a dataset and report held-out
    /// per-joint MAE.
    Train {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Evaluate a saved model on a dataset's test split.
    Evaluate {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Open-loop tracking of a desired sweep with a saved model.
    Track {
        #[arg(long)]
        model: PathBuf,
        /// Track the home orientation instead of the default sweep.
        #[arg(long)]
        hold_home: bool,
    },
    /// Sweep the actuator grid and report singularity metrics.
    Scan {
        /// Override the grounded-link twist, degrees.
        #[arg(long)]
        alpha1_deg: Option<f64>,
    },
    /// Measure prediction latency and the open-loop step rate.
    Bench {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        steps: usize,
    },
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

fn load_run_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => load_config(path).map_err(|e| Failure::new(2, e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.plant.rng_seed = seed;
        cfg.hyperparams.rng_seed = seed;
    }
    Ok(cfg)
}

fn ensure_out(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::new(2, format!("cannot create output directory: {e}")))
}

fn write_artifact(path: &Path, text: &str) -> Result<(), Failure> {
    std::fs::write(path, text).map_err(|e| Failure::new(2, format!("cannot write {path:?}: {e}")))
}

fn read_dataset(path: &Path) -> Result<Dataset, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::new(2, format!("cannot read dataset {path:?}: {e}")))?;
    Dataset::from_csv(&text).map_err(|e| Failure::new(2, e.to_string()))
}

fn plant_failure(e: PlantError) -> Failure {
    match e {
        PlantError::Singular { .. } => Failure::new(3, e.to_string()),
        other => Failure::new(2, other.to_string()),
    }
}

fn cmd_generate(cli: &Cli) -> Result<(), Failure> {
    let cfg = load_run_config(cli)?;
    ensure_out(&cli.out)?;
    let dataset =
        generate_dataset(&cfg.plant, &cfg.profiles, cfg.sample_rate_hz).map_err(plant_failure)?;
    let csv_path = cli.out.join("dataset.csv");
    write_artifact(&csv_path, &dataset.to_csv())?;
    let (n_train, n_test) = dataset.counts();
    let manifest = format!(
        "tool spmkit {}\nconfig_hash {}\nseed {}\nsamples {}\ntrain {}\ntest {}\n",
        env!("CARGO_PKG_VERSION"),
        fnv1a_hex(&canonical_string(&cfg)),
        cfg.plant.rng_seed,
        dataset.len(),
        n_train,
        n_test,
    );
    write_artifact(&cli.out.join("dataset.manifest.txt"), &manifest)?;
    if !cli.quiet {
        println!("wrote {} samples to {}", dataset.len(), csv_path.display());
        println!("wrote {}", cli.out.join("dataset.manifest.txt").display());
    }
    Ok(())
}

fn cmd_train(cli: &Cli, dataset_path: &Path) -> Result<(), Failure> {
    let cfg = load_run_config(cli)?;
    ensure_out(&cli.out)?;
    let dataset = read_dataset(dataset_path)?;
    let (n_train, n_test) = dataset.counts();
    if n_train == 0 {
        return Err(Failure::new(2, "dataset has no training split"));
    }
    if n_test == 0 {
        return Err(Failure::new(2, "dataset has no test split; cannot evaluate"));
    }
    let model = train(&dataset, &cfg.hyperparams).map_err(|e| match e {
        TrainError::Diverged { .. } => Failure::new(4, e.to_string()),
        other => Failure::new(2, other.to_string()),
    })?;
    let report = evaluate(&model, &dataset, Split::Test);
    let model_path = cli.out.join("model.txt");
    save_model(&model, &model_path).map_err(|e| Failure::new(2, e.to_string()))?;
    let summary = format!(
        "tool spmkit {}\nconfig_hash {}\nseed {}\ntrain_samples {}\ntest_samples {}\nepochs {}\nfinal_loss {}\ntrain_seconds {:.1}\nmae_theta1_deg {:.4}\nmae_theta2_deg {:.4}\n",
        env!("CARGO_PKG_VERSION"),
        fnv1a_hex(&canonical_string(&cfg)),
        cfg.hyperparams.rng_seed,
        n_train,
        n_test,
        model.epochs_run,
        model.final_loss,
        model.train_seconds,
        report.mae_theta1_deg,
        report.mae_theta2_deg,
    );
    write_artifact(&cli.out.join("train_report.txt"), &summary)?;
    if !cli.quiet {
        println!("model written to {}", model_path.display());
        println!(
            "held-out MAE: theta1 {:.4} deg, theta2 {:.4} deg ({} epochs, {:.1} s)",
            report.mae_theta1_deg, report.mae_theta2_deg, model.epochs_run, model.train_seconds
        );
    }
    Ok(())
}

fn cmd_evaluate(cli: &Cli, model_path: &Path, dataset_path: &Path) -> Result<(), Failure> {
    ensure_out(&cli.out)?;
    let model = load_model(model_path).map_err(|e| Failure::new(2, e.to_string()))?;
    let dataset = read_dataset(dataset_path)?;
    if dataset.counts().1 == 0 {
        return Err(Failure::new(2, "dataset has no test split"));
    }
    let report = evaluate(&model, &dataset, Split::Test);
    let summary = format!(
        "test_samples {}\nmae_theta1_deg {:.4}\nmae_theta2_deg {:.4}\n",
        report.samples, report.mae_theta1_deg, report.mae_theta2_deg
    );
    write_artifact(&cli.out.join("eval_report.txt"), &summary)?;
    if !cli.quiet {
        print!("{summary}");
    }
    Ok(())
}

fn cmd_track(cli: &Cli, model_path: &Path, hold_home: bool) -> Result<(), Failure> {
    let cfg = load_run_config(cli)?;
    ensure_out(&cli.out)?;
    let model = load_model(model_path).map_err(|e| Failure::new(2, e.to_string()))?;
    let trajectory = if hold_home {
        let home = cfg
            .plant
            .chassis_mount
            .compose(forward_kinematics_ideal(0.0, 0.0).expect("home reachable").orientation);
        DesiredTrajectory::hold(home, cfg.track_duration_s, cfg.track_rate_hz)
    } else {
        DesiredTrajectory::default_sweep(
            cfg.track_duration_s,
            cfg.track_rate_hz,
            cfg.plant.chassis_mount,
        )
    };
    let report =
        track(&model, &cfg.plant, &trajectory).map_err(|e| Failure::new(5, e.to_string()))?;
    write_artifact(&cli.out.join("tracking.csv"), &report.to_csv())?;
    write_artifact(&cli.out.join("endpoints.csv"), &virtual_endpoint_csv(&report))?;
    if !cli.quiet {
        println!(
            "per-axis Euler MAE: phi {:.4} deg, psi {:.4} deg, theta {:.4} deg",
            report.mae_phi_deg, report.mae_psi_deg, report.mae_theta_deg
        );
        println!(
            "loop rate {:.0} Hz, unreachable steps {}",
            report.loop_hz, report.unreachable_steps
        );
        println!("wrote {}", cli.out.join("tracking.csv").display());
        println!("wrote {}", cli.out.join("endpoints.csv").display());
    }
    Ok(())
}

fn cmd_scan(cli: &Cli, alpha1_deg: Option<f64>) -> Result<(), Failure> {
    let cfg = load_run_config(cli)?;
    ensure_out(&cli.out)?;
    let alpha1 = alpha1_deg.map(f64::to_radians).unwrap_or(cfg.scan_alpha1);
    let mut params = DesignParams::nominal();
    params.alpha[0] = alpha1;
    params.validate().map_err(|e| Failure::new(6, e.to_string()))?;
    let grid = ScanGrid::square(cfg.scan_half_range, cfg.scan_grid);
    let report = singularity_scan(&params, &grid);
    write_artifact(&cli.out.join("scan.csv"), &report.to_csv())?;
    if !cli.quiet {
        println!(
            "scanned {} points: min |sin theta5| {:?}, max condition {:?}, unreachable {}, singular fraction {:.3}",
            report.points.len(),
            report.min_abs_sin_theta5(),
            report.max_condition_number(),
            report.unreachable_count(),
            report.singular_fraction()
        );
        println!("wrote {}", cli.out.join("scan.csv").display());
    }
    Ok(())
}

fn cmd_bench(cli: &Cli, model_path: &Path, steps: usize) -> Result<(), Failure> {
    let cfg = load_run_config(cli)?;
    ensure_out(&cli.out)?;
    let model = load_model(model_path).map_err(|e| Failure::new(2, e.to_string()))?;

    // prediction latency over a spread of inputs
    let n_pred = 10_000;
    let inputs: Vec<UnitQuaternion> = (0..64)
        .map(|k| {
            let a = 0.9 * ((k as f64) * 0.37).sin();
            let b = 0.9 * ((k as f64) * 0.73).cos();
            forward_kinematics_ideal(a, b).expect("inside chart").orientation
        })
        .collect();
    let started = Instant::now();
    let mut sink = 0.0;
    for i in 0..n_pred {
        let (t1, t2) = predict(&model, inputs[i % inputs.len()]);
        sink += t1 + t2;
    }
    std::hint::black_box(sink);
    let latency_ms = started.elapsed().as_secs_f64() * 1000.0 / n_pred as f64;

    let hz =
        loop_benchmark(&model, &cfg.plant, steps).map_err(|e| Failure::new(7, e.to_string()))?;
    let summary = format!(
        "predict_calls {n_pred}\nmean_predict_latency_ms {latency_ms:.6}\nloop_steps {steps}\nloop_rate_hz {hz:.1}\n"
    );
    write_artifact(&cli.out.join("bench.txt"), &summary)?;
    if !cli.quiet {
        print!("{summary}");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate => cmd_generate(&cli),
        Command::Train { dataset } => cmd_train(&cli, dataset),
        Command::Evaluate { model, dataset } => cmd_evaluate(&cli, model, dataset),
        Command::Track { model, hold_home } => cmd_track(&cli, model, *hold_home),
        Command::Scan { alpha1_deg } => cmd_scan(&cli, *alpha1_deg),
        Command::Bench { model, steps } => cmd_bench(&cli, model, *steps),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
