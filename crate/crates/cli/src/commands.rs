//! The subcommand implementations. Each returns the process exit code on
//! a completed run (0 success, 1 quality-gate failure); usage, IO, and
//! config problems surface as errors, which the caller maps to exit 2.

use crate::config::RunConfig;
use fdesq_core::backtest::{backtest, emit_report, train_adjuster};
use fdesq_core::fdes::{gradient_check_cases, run_gradient_check, save_network, FdesNetwork};
use fdesq_core::gan::{load_adjuster, save_adjuster, write_history_csv};
use fdesq_core::market::{ingest_csv, normalize, rolling_windows, write_samples_csv, PriceSeries};
use fdesq_core::screen::{screen_universe, write_pairs_csv};
use fdesq_core::synth::event_market;
use fdesq_core::{Error, Result};
use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

const GRADCHECK_INSTANCES: usize = 100;
const GRADCHECK_STEP: f64 = 1e-6;
const GRADCHECK_THRESHOLD: f64 = 1e-4;

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn ensure_out_dir(config: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&config.paths.out).map_err(|e| io_err(&config.paths.out, e))
}

/// Every artifact-writing command drops the resolved configuration next to
/// its outputs, so a result directory always names the run that filled it.
fn echo_config(config: &RunConfig) -> Result<()> {
    let text = toml::to_string_pretty(config)
        .map_err(|e| Error::Parameter(format!("config echo serialization failed: {e}")))?;
    let path = config.paths.out.join("config_echo.toml");
    std::fs::write(&path, text).map_err(|e| io_err(&path, e))
}

/// All `*.csv` files under `dir`, sorted by file name for deterministic
/// ordering.
fn csv_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    let mut files = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| io_err(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// The series a ticker-bound command operates on: an ingested file in the
/// data directory when present, otherwise the simulator's output. Either
/// way the series carries the configured ticker, not the file stem, so
/// artifact names stay consistent across the pipeline.
fn resolve_series(config: &RunConfig) -> Result<PriceSeries> {
    let data_path = config.paths.data.join(format!("{}.csv", config.ticker));
    let sim_path = config.paths.out.join(format!("sim_{}.csv", config.ticker));
    for candidate in [&data_path, &sim_path] {
        if candidate.is_file() {
            let series = ingest_csv(candidate)?;
            return PriceSeries::new(
                &config.ticker,
                series.dates().to_vec(),
                series.closes().to_vec(),
            );
        }
    }
    Err(Error::Input(format!(
        "no series for ticker `{}`: looked for {} and {}",
        config.ticker,
        data_path.display(),
        sim_path.display()
    )))
}

pub fn cmd_gradcheck(config: &RunConfig, corrupt: bool) -> Result<i32> {
    let perturbation = if corrupt { 0.01 } else { 0.0 };
    let mut worst = 0.0f64;
    for (k, case) in gradient_check_cases(GRADCHECK_INSTANCES, config.seed).iter().enumerate() {
        let err = run_gradient_check(case, GRADCHECK_STEP, perturbation)?;
        println!(
            "case {k:>3}: N={} L={} delta={:<4} max rel err {err:.3e}",
            case.dim, case.depth, case.sharpness
        );
        worst = worst.max(err);
    }
    if worst < GRADCHECK_THRESHOLD {
        println!("gradcheck: {GRADCHECK_INSTANCES} instances, worst {worst:.3e}, all under {GRADCHECK_THRESHOLD:e}");
        Ok(0)
    } else {
        println!("gradcheck: FAILED, worst {worst:.3e} reaches {GRADCHECK_THRESHOLD:e}");
        Ok(1)
    }
}

pub fn cmd_ingest(config: &RunConfig) -> Result<i32> {
    let files = csv_files(&config.paths.data)?;
    if files.is_empty() {
        return Err(Error::Input(format!(
            "no ticker CSVs in {}",
            config.paths.data.display()
        )));
    }
    ensure_out_dir(config)?;
    echo_config(config)?;
    let scheme = config.decay_scheme()?;
    for file in &files {
        let series = ingest_csv(file)?;
        let normalized = normalize(&series)?;
        let samples = rolling_windows(&normalized, config.window.length, 1, scheme)?;
        let out = config.paths.out.join(format!("samples_{}.csv", series.ticker()));
        write_samples_csv(&samples, &out)?;
        let lo = series.closes().iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = series.closes().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        println!(
            "{}: {} days, {} samples, close [{lo:.2}, {hi:.2}]",
            series.ticker(),
            series.len(),
            samples.len()
        );
    }
    Ok(0)
}

pub fn cmd_screen(config: &RunConfig) -> Result<i32> {
    let files = csv_files(&config.paths.data)?;
    let universe = files.iter().map(|f| ingest_csv(f)).collect::<Result<Vec<_>>>()?;
    let outcome = screen_universe(&universe, &config.screen_config())?;
    for warning in &outcome.warnings {
        log::warn!("{warning}");
    }
    ensure_out_dir(config)?;
    echo_config(config)?;
    let out = config.paths.out.join("pairs.csv");
    write_pairs_csv(&outcome.results, &out)?;
    let selected = outcome.results.iter().filter(|r| r.selected).count();
    println!("{selected} selected of {} evaluated", outcome.results.len());
    Ok(0)
}

pub fn cmd_simulate(config: &RunConfig) -> Result<i32> {
    let (series, truth) = event_market(&config.market_config())?;
    ensure_out_dir(config)?;
    echo_config(config)?;

    let series_path = config.paths.out.join(format!("sim_{}.csv", config.ticker));
    let mut text = String::from("date,close\n");
    for (date, close) in series.dates().iter().zip(series.closes()) {
        let _ = writeln!(text, "{date},{close}");
    }
    std::fs::write(&series_path, text).map_err(|e| io_err(&series_path, e))?;

    // Ground truth: every applied matrix in the network text format (one
    // layer, sharpness 1.0), deduplicated by content, plus the schedule
    // tying steps to labels and matrix files.
    let truth_dir = config.paths.out.join(format!("truth_{}", config.ticker));
    std::fs::create_dir_all(&truth_dir).map_err(|e| io_err(&truth_dir, e))?;
    let mut matrix_files: HashMap<Vec<u8>, String> = HashMap::new();
    let mut schedule = String::from("step,label,matrix_file\n");
    for (k, (matrix, label)) in truth.applied.iter().enumerate() {
        let step = k + 1;
        let key: Vec<u8> = matrix.as_slice().iter().flat_map(|v| v.to_bits().to_le_bytes()).collect();
        let name = match matrix_files.get(&key) {
            Some(name) => name.clone(),
            None => {
                let name = format!("m{step:04}.fdes");
                let net = FdesNetwork::new(vec![matrix.clone()], 1.0)?;
                save_network(&net, &truth_dir.join(&name))?;
                matrix_files.insert(key, name.clone());
                name
            }
        };
        let _ = writeln!(schedule, "{step},{label},{name}");
    }
    let schedule_path = truth_dir.join("schedule.csv");
    std::fs::write(&schedule_path, schedule).map_err(|e| io_err(&schedule_path, e))?;

    let mut state0 = String::new();
    for v in truth.states[0].as_slice() {
        let _ = writeln!(state0, "{v}");
    }
    let state0_path = truth_dir.join("state0.txt");
    std::fs::write(&state0_path, state0).map_err(|e| io_err(&state0_path, e))?;

    println!(
        "simulated {}: {} days, {} scheduled events ({} distinct matrices)",
        config.ticker,
        series.len(),
        truth.applied.len(),
        matrix_files.len()
    );
    Ok(0)
}

pub fn cmd_train(config: &RunConfig) -> Result<i32> {
    let series = resolve_series(config)?;
    let bt = config.backtest_config()?;
    let gan = config.gan_config();
    let (model, history) = train_adjuster(&series, &bt, &gan)?;
    ensure_out_dir(config)?;
    echo_config(config)?;
    let model_path = config.paths.out.join(format!("adjuster_{}.fdes", config.ticker));
    save_adjuster(&model, &model_path)?;
    let history_path = config.paths.out.join(format!("history_{}.csv", config.ticker));
    write_history_csv(&history, &history_path)?;
    let final_acc = history.last().map(|r| r.d_acc).unwrap_or(f64::NAN);
    println!(
        "trained adjuster for {}: {} rounds, final discriminator accuracy {final_acc:.3}",
        config.ticker,
        history.len()
    );
    Ok(0)
}

pub fn cmd_backtest(config: &RunConfig) -> Result<i32> {
    let series = resolve_series(config)?;
    let model_path = config.paths.out.join(format!("adjuster_{}.fdes", config.ticker));
    let model = load_adjuster(&model_path)?;
    let bt = config.backtest_config()?;
    let report = backtest(&series, &bt, Some(&model))?;
    for warning in &report.warnings {
        log::warn!("{warning}");
    }
    ensure_out_dir(config)?;
    echo_config(config)?;
    emit_report(&report, &config.paths.out)?;
    println!(
        "{} baseline ({}): rmse {:.4}, directional accuracy {:.3} (break-even benchmark 0.5)",
        report.ticker, bt.baseline, report.baseline.rmse, report.baseline.directional_accuracy
    );
    println!(
        "{} adjusted: rmse {:.4}, directional accuracy {:.3} (break-even benchmark 0.5)",
        report.ticker, report.adjusted.rmse, report.adjusted.directional_accuracy
    );
    if report.adjusted.directional_accuracy > 0.5 {
        Ok(0)
    } else {
        println!("quality gate: adjusted strategy does not beat the 0.5 benchmark");
        Ok(1)
    }
}
