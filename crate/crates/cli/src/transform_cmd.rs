//! `drift transform`: fit the configured feature pipeline on the training
//! split and export one split's feature vectors as CSV.

use crate::data::DataArgs;
use clap::Args;
use drift_core::dataset;
use drift_core::experiment::{parse_resize, DatasetKind, ExperimentConfig, FittedPipeline, Method};
use drift_core::transform::{write_features_csv, ChannelPolicy};
use drift_core::{Error, Result};
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct TransformArgs {
    /// Dataset: mnist or cifar100
    #[arg(long, value_name = "D")]
    pub dataset: String,

    /// Feature method: drift, pca, or full
    #[arg(long, value_name = "M")]
    pub method: String,

    /// Mode count (drift) / component count (pca); ignored by full
    #[arg(long, value_name = "N", default_value_t = 30)]
    pub modes: usize,

    /// Which split to export
    #[arg(long, value_name = "SPLIT", default_value = "test",
          value_parser = ["train", "test"])]
    pub split: String,

    /// Resize images to WxH before the transform
    #[arg(long, value_name = "WxH")]
    pub resize: Option<String>,

    /// Multi-channel handling: grayscale, average, or concat
    #[arg(long, value_name = "P", default_value = "average")]
    pub channel_policy: String,

    /// Stratified subsample per class (applies to both splits)
    #[arg(long, value_name = "K")]
    pub subsample: Option<usize>,

    /// Skip feature standardization (drift/pca only)
    #[arg(long)]
    pub no_standardize: bool,

    /// Seed for subsampling
    #[arg(long, value_name = "S", default_value_t = 42)]
    pub seed: u64,

    /// Output CSV (`sample_id,f0,...,label`)
    #[arg(long, value_name = "CSV")]
    pub out: PathBuf,

    #[command(flatten)]
    pub data: DataArgs,
}

pub fn run(args: TransformArgs) -> Result<()> {
    let kind: DatasetKind = args.dataset.parse()?;
    let method: Method = args.method.parse()?;
    let policy: ChannelPolicy = args.channel_policy.parse()?;
    let resize = args.resize.as_deref().map(parse_resize).transpose()?;

    let cfg = ExperimentConfig {
        dataset: kind,
        method,
        modes: args.modes,
        channel_policy: policy,
        resize,
        hidden_layers: vec![],
        batch_size: 1,
        epochs: 0,
        seed: args.seed,
        subsample_per_class: args.subsample,
        standardize: !args.no_standardize,
    };
    cfg.validate()?;

    let (mut train, mut test) = args.data.load(kind)?;
    if let Some((w, h)) = resize {
        train = dataset::resize_bilinear(&train, w, h)?;
        test = dataset::resize_bilinear(&test, w, h)?;
    }
    if let Some(per_class) = args.subsample {
        train = dataset::subsample(&train, per_class, args.seed)?;
        test = dataset::subsample_capped(&test, per_class, args.seed)?;
    }

    let pipeline = FittedPipeline::fit(&cfg, &train)?;
    let (feats, labels) = match args.split.as_str() {
        "train" => (pipeline.transform(&train)?, train.labels()),
        "test" => (pipeline.transform(&test)?, test.labels()),
        other => return Err(Error::invalid(format!("unknown split `{other}`"))),
    };
    write_features_csv(&args.out, &feats, labels)?;
    println!(
        "wrote {} ({} samples x {} features, {} split, method {})",
        args.out.display(),
        feats.nrows(),
        feats.ncols(),
        args.split,
        method
    );
    Ok(())
}
