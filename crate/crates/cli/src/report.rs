//! `drift report`: recompute per-run summaries from metrics CSVs and rank
//! the methods within each configuration.

use clap::Args;
use drift_core::experiment::{format_significant, gap_stats, read_csv, CsvRow};
use drift_core::mlp::EpochMetrics;
use drift_core::Result;
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct ReportArgs {
    /// Metrics CSV files produced by `train` or `bench`
    #[arg(long = "in", value_name = "CSV", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
}

struct RunSummary {
    file: String,
    run_id: usize,
    dataset: String,
    method: String,
    modes: usize,
    batch_size: usize,
    hidden: String,
    final_train_acc: f64,
    final_test_acc: f64,
    final_gap: f64,
    loss_gap: f64,
    stability: f64,
}

fn summarize(file: &str, rows: &[CsvRow]) -> Result<Vec<RunSummary>> {
    // Group rows by run_id, preserving epoch order within each run.
    let mut by_run: BTreeMap<usize, Vec<&CsvRow>> = BTreeMap::new();
    for row in rows {
        by_run.entry(row.run_id).or_default().push(row);
    }
    let mut out = Vec::new();
    for (run_id, rows) in by_run {
        let metrics: Vec<EpochMetrics> = rows.iter().map(|r| r.metrics()).collect();
        let stats = gap_stats(&metrics)?;
        let last = rows.last().expect("non-empty group");
        out.push(RunSummary {
            file: file.to_string(),
            run_id,
            dataset: last.dataset.clone(),
            method: last.method.clone(),
            modes: last.modes,
            batch_size: last.batch_size,
            hidden: last.hidden.clone(),
            final_train_acc: last.train_acc,
            final_test_acc: last.test_acc,
            final_gap: stats.final_gap,
            loss_gap: stats.loss_gap,
            stability: stats.stability,
        });
    }
    Ok(out)
}

pub fn run(args: ReportArgs) -> Result<()> {
    let mut summaries = Vec::new();
    for path in &args.inputs {
        let rows = read_csv(path)?;
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| path.display().to_string());
        summaries.extend(summarize(&name, &rows)?);
    }
    if summaries.is_empty() {
        println!("no runs");
        return Ok(());
    }

    println!(
        "{:<18} {:<6} {:<9} {:<7} {:<6} {:<6} {:<11} {:<12} {:<12} {:<11} {:<10} {}",
        "file", "run", "dataset", "method", "modes", "batch", "hidden",
        "train_acc", "test_acc", "final_gap", "loss_gap", "stability"
    );
    for s in &summaries {
        println!(
            "{:<18} {:<6} {:<9} {:<7} {:<6} {:<6} {:<11} {:<12} {:<12} {:<11} {:<10} {}",
            s.file,
            s.run_id,
            s.dataset,
            s.method,
            s.modes,
            s.batch_size,
            s.hidden,
            format_significant(s.final_train_acc, 6),
            format_significant(s.final_test_acc, 6),
            format_significant(s.final_gap, 6),
            format_significant(s.loss_gap, 6),
            format_significant(s.stability, 6),
        );
    }

    // Rank methods inside each (dataset, batch, hidden, modes-ignored-for-full)
    // configuration by final test accuracy.
    let mut groups: BTreeMap<(String, usize, String, usize), Vec<&RunSummary>> = BTreeMap::new();
    for s in &summaries {
        let modes_key = if s.method == "full" { 0 } else { s.modes };
        groups
            .entry((s.dataset.clone(), s.batch_size, s.hidden.clone(), modes_key))
            .or_default()
            .push(s);
    }
    println!("\nmethod ranking per configuration (by final test accuracy):");
    for ((dataset, batch, hidden, modes), mut group) in groups {
        group.sort_by(|a, b| b.final_test_acc.partial_cmp(&a.final_test_acc).unwrap());
        let ranking = group
            .iter()
            .map(|s| format!("{}({})", s.method, format_significant(s.final_test_acc, 4)))
            .collect::<Vec<_>>()
            .join(" > ");
        let modes_shown = if modes == 0 { "-".to_string() } else { modes.to_string() };
        println!("  {dataset} batch={batch} hidden={hidden} modes={modes_shown}: {ranking}");
    }
    Ok(())
}
