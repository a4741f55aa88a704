//! `drift train`: one configuration end to end, metrics CSV out, final
//! metrics and gap statistics on stdout.

use crate::data::DataArgs;
use clap::Args;
use drift_core::experiment::{
    format_significant, gap_stats, parse_resize, run_experiment_on, write_csv, DatasetKind,
    ExperimentConfig,
};
use drift_core::transform::ChannelPolicy;
use drift_core::{Error, Result};
use std::path::PathBuf;

pub fn parse_hidden(list: &str) -> Result<Vec<usize>> {
    if list.is_empty() || list == "none" {
        return Ok(vec![]);
    }
    list.split([',', '-'])
        .map(|h| {
            h.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad hidden layer size `{h}`")))
        })
        .collect()
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Dataset: mnist or cifar100
    #[arg(long, value_name = "D")]
    pub dataset: String,

    /// Feature method: drift, pca, or full
    #[arg(long, value_name = "M")]
    pub method: String,

    /// Mode count (drift) / component count (pca); ignored by full
    #[arg(long, value_name = "N", default_value_t = 30)]
    pub modes: usize,

    /// Mini-batch size
    #[arg(long, value_name = "B", default_value_t = 32)]
    pub batch: usize,

    /// Hidden layer sizes, comma separated (e.g. 64,128,64); empty for none
    #[arg(long, value_name = "LIST", default_value = "64,128,64")]
    pub hidden: String,

    /// Epochs (default: 30 for mnist, 50 for cifar100)
    #[arg(long, value_name = "E")]
    pub epochs: Option<usize>,

    /// Seed for subsampling, initialization, and shuffling
    #[arg(long, value_name = "S", default_value_t = 42)]
    pub seed: u64,

    /// Resize images to WxH before the transform
    #[arg(long, value_name = "WxH")]
    pub resize: Option<String>,

    /// Multi-channel handling: grayscale, average, or concat
    #[arg(long, value_name = "P", default_value = "average")]
    pub channel_policy: String,

    /// Stratified subsample per class (train strict, test capped)
    #[arg(long, value_name = "K")]
    pub subsample: Option<usize>,

    /// Skip feature standardization (drift/pca only)
    #[arg(long)]
    pub no_standardize: bool,

    /// Output CSV of per-epoch metrics
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,

    #[command(flatten)]
    pub data: DataArgs,
}

impl TrainArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let dataset: DatasetKind = self.dataset.parse()?;
        let cfg = ExperimentConfig {
            dataset,
            method: self.method.parse()?,
            modes: self.modes,
            channel_policy: self.channel_policy.parse::<ChannelPolicy>()?,
            resize: self.resize.as_deref().map(parse_resize).transpose()?,
            hidden_layers: parse_hidden(&self.hidden)?,
            batch_size: self.batch,
            epochs: self.epochs.unwrap_or_else(|| dataset.default_epochs()),
            seed: self.seed,
            subsample_per_class: self.subsample,
            standardize: !self.no_standardize,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn run(args: TrainArgs) -> Result<()> {
    let cfg = args.to_config()?;
    let (train, test) = args.data.load(cfg.dataset)?;
    let record = run_experiment_on(&cfg, &train, &test)?;
    write_csv(std::slice::from_ref(&record), &args.out)?;

    if let Some(last) = record.metrics.last() {
        let stats = gap_stats(&record.metrics)?;
        println!(
            "{} {} modes={} feature_dim={} batch={} epochs={} seed={}",
            cfg.dataset, cfg.method, cfg.modes, record.feature_dim, cfg.batch_size, cfg.epochs,
            cfg.seed
        );
        println!(
            "final epoch {}: train_loss={} train_acc={} test_loss={} test_acc={}",
            last.epoch,
            format_significant(last.train_loss, 6),
            format_significant(last.train_acc, 6),
            format_significant(last.test_loss, 6),
            format_significant(last.test_acc, 6),
        );
        println!(
            "gap_stats: final_gap={} loss_gap={} stability={}",
            format_significant(stats.final_gap, 6),
            format_significant(stats.loss_gap, 6),
            format_significant(stats.stability, 6),
        );
        println!("wall_time_s={:.1}", record.wall_time_s);
    } else {
        println!("no epochs were run");
    }
    println!("wrote {}", args.out.display());
    Ok(())
}
