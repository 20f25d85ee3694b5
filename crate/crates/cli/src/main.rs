mod args;

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use wifi_survey::alignment::match_scans;
use wifi_survey::dataset::{build_dataset, dataset_from_located, heatmap};
use wifi_survey::evaluation::{ablate, density, density_report, ground_truth_consistency, metrics};
use wifi_survey::io::{
    load_fingerprint_csv, load_grid_truth, load_odometry_csv, load_scan_log, save_fingerprint_csv, save_grid_truth,
    save_odometry_csv, save_scan_log, write_heatmap_csv,
};
use wifi_survey::localizer::{predict_dataset, train, TrainConfig};
use wifi_survey::scenario::ScenarioConfig;
use wifi_survey::{Error, FingerprintDataset, Mlp};

use args::{Cli, Command, Mode};

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

fn run(command: Command) -> CmdResult {
    match command {
        Command::Simulate { scenario, mode, out_dir } => simulate(&scenario, mode, &out_dir),
        Command::Align { odometry, scans, out } => align(&odometry, &scans, &out),
        Command::Train { dataset, model_out, scenario, seed, epochs, patience, batch_size, learning_rate, loss_out } => {
            let mut cfg = base_config(scenario.as_deref())?;
            if let Some(v) = seed {
                cfg.rng_seed = v;
            }
            if let Some(v) = epochs {
                cfg.epochs_max = v;
            }
            if let Some(v) = patience {
                cfg.patience = v;
            }
            if let Some(v) = batch_size {
                cfg.batch_size = v;
            }
            if let Some(v) = learning_rate {
                cfg.learning_rate = v;
            }
            cfg.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let loss_out = loss_out.unwrap_or_else(|| model_out.with_extension("loss.csv"));
            train_cmd(&dataset, &model_out, &loss_out, &cfg)
        }
        Command::Eval { dataset, model, train_dataset, area, json } => {
            eval(&dataset, &model, train_dataset.as_deref(), area, json)
        }
        Command::Ablate { dataset, fractions, seeds, scenario, epochs } => {
            if seeds == 0 {
                return Err(Failure::Usage("--seeds must be at least 1".into()));
            }
            if let Some(f) = fractions.iter().find(|f| !(**f > 0.0 && **f <= 1.0)) {
                return Err(Failure::Usage(format!("fraction {f} outside (0, 1]")));
            }
            let mut cfg = base_config(scenario.as_deref())?;
            if let Some(v) = epochs {
                cfg.epochs_max = v;
            }
            let ds = load_dataset(&dataset)?;
            let seeds: Vec<u64> = (1..=seeds).collect();
            println!("{}", ablate::<f64>(&ds, &fractions, &cfg, &seeds)?);
            Ok(())
        }
        Command::Heatmap { dataset, ap, cell, out } => {
            if !(cell > 0.0 && cell.is_finite()) {
                return Err(Failure::Usage(format!("--cell must be positive, got {cell}")));
            }
            let ds = load_dataset(&dataset)?;
            let grid = heatmap(&ds, &ap, cell)?;
            write_heatmap_csv(&grid, create(&out)?)?;
            println!("cells {}", grid.cells.len());
            println!("samples {}", grid.total_samples());
            Ok(())
        }
        Command::CompareTruth { robot, grid, area, robot_duration, grid_duration } => {
            compare_truth(&robot, &grid, area, robot_duration, grid_duration)
        }
    }
}

fn base_config(scenario: Option<&Path>) -> Result<TrainConfig, Error> {
    match scenario {
        Some(path) => Ok(ScenarioConfig::load(path)?.train),
        None => Ok(TrainConfig::default()),
    }
}

/// Fingerprint CSV, or grid-truth JSON when the extension is `.json`.
fn load_dataset(path: &Path) -> Result<FingerprintDataset, Error> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) {
        dataset_from_located(&load_grid_truth(path)?)
    } else {
        load_fingerprint_csv(path)
    }
}

fn create(path: &Path) -> Result<fs::File, Error> {
    Ok(fs::File::create(path)?)
}

fn simulate(scenario: &Path, mode: Mode, out_dir: &Path) -> CmdResult {
    let sc = ScenarioConfig::load(scenario)?;
    fs::create_dir_all(out_dir).map_err(Error::from)?;
    let names = &sc.outputs;
    match mode {
        Mode::Continuous => {
            let rec = sc.record()?;
            save_odometry_csv(&rec.odometry, out_dir.join(&names.odometry))?;
            save_odometry_csv(&rec.true_poses, out_dir.join(&names.true_poses))?;
            save_scan_log(&rec.scans, out_dir.join(&names.scans))?;
            println!("scenario {}", sc.name);
            println!("odometry_samples {}", rec.odometry.len());
            println!("scans {}", rec.scans.len());
            println!("duration_s {}", rec.duration());
        }
        Mode::Grid => {
            println!("scenario {}", sc.name);
            for &spacing in &sc.grid_spacings {
                let scans = sc.grid_scans(spacing)?;
                let name = names.grid_truth_for(spacing);
                save_grid_truth(&scans, out_dir.join(&name))?;
                println!("grid {spacing} m: {} scans -> {name}", scans.len());
            }
            let test = sc.held_out_scans()?;
            save_grid_truth(&test, out_dir.join(&names.test_scans))?;
            println!("test scans {} -> {}", test.len(), names.test_scans);
        }
    }
    Ok(())
}

fn align(odometry: &Path, scans: &Path, out: &Path) -> CmdResult {
    let odo = load_odometry_csv(odometry)?;
    let scans = load_scan_log(scans)?;
    let al = match_scans(&scans, &odo)?;
    let ds = build_dataset(&al, &scans, &odo)?;
    save_fingerprint_csv(&ds, out)?;
    let gaps: Vec<f64> = al.matches.iter().map(|&(s, o)| (scans[s].t - odo[o].t).abs()).collect();
    let mean_gap = gaps.iter().sum::<f64>() / gaps.len() as f64;
    println!("dtw_cost {}", al.total_cost);
    println!("path_length {}", al.path.len());
    println!("scans {}", scans.len());
    println!("odometry_samples {}", odo.len());
    println!("mean_time_gap_s {mean_gap:.6}");
    println!("max_time_gap_s {:.6}", al.max_time_gap(&scans, &odo));
    println!("out_of_span {}", al.out_of_span.len());
    println!("rows {}", ds.len());
    Ok(())
}

fn train_cmd(dataset: &Path, model_out: &Path, loss_out: &Path, cfg: &TrainConfig) -> CmdResult {
    let ds = load_dataset(dataset)?;
    let (model, report) = train::<f64>(&ds, cfg)?;
    model.save(model_out)?;
    fs::write(loss_out, report.to_csv()).map_err(Error::from)?;
    println!("train_rows {}", report.n_train);
    println!("val_rows {}", report.n_val);
    println!("epochs {}", report.epochs.len());
    println!("best_epoch {}", report.best_epoch);
    println!("best_val_loss {}", report.best_val_loss);
    println!("stopped_early {}", report.stopped_early);
    Ok(())
}

fn eval(dataset: &Path, model: &Path, train_dataset: Option<&Path>, area: Option<f64>, json: bool) -> CmdResult {
    let ds = load_dataset(dataset)?;
    let model = Mlp::load(model)?;
    let preds = predict_dataset(&model, &ds)?;
    let truths: Vec<(f64, f64)> = ds.rows.iter().map(|r| (r.x, r.y)).collect();
    let mut report = metrics(&preds, &truths)?;
    if let Some(path) = train_dataset {
        report = report.with_density(load_dataset(path)?.len(), area.unwrap_or(0.0));
    }
    if json {
        println!("{}", report.to_json());
    } else {
        println!("{report}");
    }
    Ok(())
}

fn bounding_area(sets: &[&FingerprintDataset]) -> f64 {
    let (mut lo, mut hi) = ((f64::INFINITY, f64::INFINITY), (f64::NEG_INFINITY, f64::NEG_INFINITY));
    for r in sets.iter().flat_map(|d| &d.rows) {
        lo = (lo.0.min(r.x), lo.1.min(r.y));
        hi = (hi.0.max(r.x), hi.1.max(r.y));
    }
    (hi.0 - lo.0) * (hi.1 - lo.1)
}

fn compare_truth(
    robot: &Path,
    grid: &Path,
    area: Option<f64>,
    robot_duration: Option<f64>,
    grid_duration: Option<f64>,
) -> CmdResult {
    let robot = load_dataset(robot)?;
    let grid = load_dataset(grid)?;
    let c = ground_truth_consistency(&robot, &grid)?;
    println!("mean_abs_rssi_diff_db {:.4}", c.mean_abs_rssi_diff_db);
    println!("compared_rps {}", c.compared_rps);
    println!("mean_neighbor_distance_m {:.4}", c.mean_neighbor_distance_m);

    let area = area.unwrap_or_else(|| bounding_area(&[&robot, &grid]));
    let span = match (robot.rows.first(), robot.rows.last()) {
        (Some(a), Some(b)) => b.t - a.t,
        _ => 0.0,
    };
    let rd = density_report(&robot, area, robot_duration.unwrap_or(span))?;
    println!("area_m2 {area:.4}");
    println!("robot_rps {}", robot.len());
    println!("robot_rp_per_m2 {:.4}", rd.rp_per_m2);
    println!("robot_rp_per_s {:.4}", rd.rp_per_s);
    // The grid duration only scales RP/s, so any positive value works when it is absent.
    let gd = density(grid.len(), area, grid_duration.unwrap_or(1.0))?;
    println!("grid_rps {}", grid.len());
    println!("grid_rp_per_m2 {:.4}", gd.rp_per_m2);
    println!("rp_per_m2_ratio {:.4}", rd.rp_per_m2 / gd.rp_per_m2);
    if grid_duration.is_some() {
        println!("grid_rp_per_s {:.4}", gd.rp_per_s);
        println!("rp_per_s_ratio {:.4}", rd.rp_per_s / gd.rp_per_s);
    }
    Ok(())
}
