//! `drift bench`: the preconfigured comparison grids (figure analogs).
//!
//! | figure | dataset  | sweep                  | fixed                        |
//! |--------|----------|------------------------|------------------------------|
//! | 3      | mnist    | modes 20/30/50         | hidden 64-128-64, batch 32   |
//! | 4      | mnist    | batch 2/32/256         | modes 30, hidden 64          |
//! | 5      | cifar100 | modes 40/80/150        | hidden 64-128-64, batch 128  |
//! | 6      | cifar100 | resize none / 80x80    | modes 80, hidden 64-128-64, batch 128 |
//! | 7      | cifar100 | batch 2/128            | modes 80, hidden 32          |
//!
//! Every figure crosses its sweep with the three methods. Output files are
//! deterministic for a fixed seed; wall-clock timings go to stderr only.

use crate::data::DataArgs;
use clap::Args;
use drift_core::experiment::{
    run_grid_on, summarize_records, write_csv, DatasetKind, ExperimentConfig, RunRecord, SweepAxis,
};
use drift_core::transform::ChannelPolicy;
use drift_core::{Error, Result};
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Which figure's grid to run (3-7)
    #[arg(long, value_name = "FIG", value_parser = clap::value_parser!(u8).range(3..=7))]
    pub figure: u8,

    /// Output directory (created if missing)
    #[arg(long, value_name = "PATH", default_value = "bench-out")]
    pub out_dir: PathBuf,

    /// Desk-scale stratified subsample per class; without a value, 500/class
    /// on mnist and 50/class on cifar100
    #[arg(long, value_name = "K", num_args = 0..=1, default_missing_value = "0")]
    pub subsample: Option<usize>,

    /// Override the per-figure default epoch count
    #[arg(long, value_name = "E")]
    pub epochs: Option<usize>,

    /// Base seed for the grid
    #[arg(long, value_name = "S", default_value_t = 42)]
    pub seed: u64,

    #[command(flatten)]
    pub data: DataArgs,
}

struct FigureSpec {
    dataset: DatasetKind,
    modes: usize,
    hidden: Vec<usize>,
    batch: usize,
    sweep: Vec<SweepAxis>,
}

fn figure_spec(figure: u8) -> FigureSpec {
    match figure {
        3 => FigureSpec {
            dataset: DatasetKind::Mnist,
            modes: 30,
            hidden: vec![64, 128, 64],
            batch: 32,
            sweep: vec![SweepAxis::Modes(vec![20, 30, 50])],
        },
        4 => FigureSpec {
            dataset: DatasetKind::Mnist,
            modes: 30,
            hidden: vec![64],
            batch: 32,
            sweep: vec![SweepAxis::BatchSize(vec![2, 32, 256])],
        },
        5 => FigureSpec {
            dataset: DatasetKind::Cifar100,
            modes: 80,
            hidden: vec![64, 128, 64],
            batch: 128,
            sweep: vec![SweepAxis::Modes(vec![40, 80, 150])],
        },
        6 => FigureSpec {
            dataset: DatasetKind::Cifar100,
            modes: 80,
            hidden: vec![64, 128, 64],
            batch: 128,
            sweep: vec![SweepAxis::Resize(vec![None, Some((80, 80))])],
        },
        7 => FigureSpec {
            dataset: DatasetKind::Cifar100,
            modes: 80,
            hidden: vec![32],
            batch: 128,
            sweep: vec![SweepAxis::BatchSize(vec![2, 128])],
        },
        other => unreachable!("clap restricts --figure, got {other}"),
    }
}

pub fn run(args: BenchArgs) -> Result<()> {
    let spec = figure_spec(args.figure);
    let subsample = match args.subsample {
        // --subsample without a value picks the desk-scale default.
        Some(0) => Some(match spec.dataset {
            DatasetKind::Mnist => 500,
            DatasetKind::Cifar100 => 50,
        }),
        other => other,
    };
    let base = ExperimentConfig {
        dataset: spec.dataset,
        method: drift_core::experiment::Method::Drift,
        modes: spec.modes,
        channel_policy: ChannelPolicy::Average,
        resize: None,
        hidden_layers: spec.hidden,
        batch_size: spec.batch,
        epochs: args.epochs.unwrap_or_else(|| spec.dataset.default_epochs()),
        seed: args.seed,
        subsample_per_class: subsample,
        standardize: true,
    };
    base.validate()?;

    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;
    let (train, test) = args.data.load(spec.dataset)?;
    eprintln!(
        "figure {}: {} grid on {} train / {} test samples{}",
        args.figure,
        spec.dataset,
        train.len(),
        test.len(),
        match subsample {
            Some(k) => format!(" (subsample {k}/class)"),
            None => String::new(),
        }
    );

    let runs = run_grid_on(&base, &spec.sweep, &train, &test);
    let mut records: Vec<RunRecord> = Vec::new();
    let mut failures = 0usize;
    for (i, run) in runs.iter().enumerate() {
        match &run.outcome {
            Ok(rec) => {
                eprintln!(
                    "  [{}/{}] {} modes={} batch={} seed={}: test_acc={:.4} ({:.1}s)",
                    i + 1,
                    runs.len(),
                    run.config.method,
                    run.config.modes,
                    run.config.batch_size,
                    run.config.seed,
                    rec.metrics.last().map(|m| m.test_acc).unwrap_or(f64::NAN),
                    rec.wall_time_s
                );
                records.push(rec.clone());
            }
            Err(err) => {
                failures += 1;
                eprintln!("  [{}/{}] {} failed: {err}", i + 1, runs.len(), run.config.method);
            }
        }
    }

    let csv_path = args.out_dir.join(format!("fig{}.csv", args.figure));
    write_csv(&records, &csv_path)?;
    let summary = summarize_records(&records);
    let summary_path = args.out_dir.join(format!("fig{}_summary.txt", args.figure));
    std::fs::write(&summary_path, &summary).map_err(|e| Error::io(&summary_path, e))?;

    print!("{summary}");
    println!(
        "wrote {} and {} ({} records, {} failures)",
        csv_path.display(),
        summary_path.display(),
        records.len(),
        failures
    );
    Ok(())
}
