//! Data location: `--data-dir` flag, then `DRIFT_DATA_DIR`, then `./data`,
//! with per-file override flags for nonstandard names.

use clap::Args;
use drift_core::dataset::{load_cifar100, load_mnist, load_cifar100_dir, load_mnist_dir};
use drift_core::experiment::DatasetKind;
use drift_core::{Dataset, Error, Real, Result};
use std::path::PathBuf;

#[derive(Args, Debug, Clone)]
pub struct DataArgs {
    /// Directory holding the dataset files (default: $DRIFT_DATA_DIR or ./data)
    #[arg(long, value_name = "PATH")]
    pub data_dir: Option<PathBuf>,

    /// MNIST: explicit training-images file (overrides name inference)
    #[arg(long, value_name = "FILE")]
    pub train_images: Option<PathBuf>,

    /// MNIST: explicit training-labels file
    #[arg(long, value_name = "FILE")]
    pub train_labels: Option<PathBuf>,

    /// MNIST: explicit test-images file
    #[arg(long, value_name = "FILE")]
    pub test_images: Option<PathBuf>,

    /// MNIST: explicit test-labels file
    #[arg(long, value_name = "FILE")]
    pub test_labels: Option<PathBuf>,

    /// CIFAR-100: explicit training binary
    #[arg(long, value_name = "FILE")]
    pub train_bin: Option<PathBuf>,

    /// CIFAR-100: explicit test binary
    #[arg(long, value_name = "FILE")]
    pub test_bin: Option<PathBuf>,
}

impl DataArgs {
    pub fn dir(&self) -> PathBuf {
        if let Some(dir) = &self.data_dir {
            return dir.clone();
        }
        if let Ok(env) = std::env::var("DRIFT_DATA_DIR") {
            if !env.is_empty() {
                return PathBuf::from(env);
            }
        }
        PathBuf::from("data")
    }

    /// Load `(train, test)` for `kind`, honoring per-file overrides.
    pub fn load(&self, kind: DatasetKind) -> Result<(Dataset<Real>, Dataset<Real>)> {
        let dir = self.dir();
        match kind {
            DatasetKind::Mnist => {
                let explicit = [
                    &self.train_images,
                    &self.train_labels,
                    &self.test_images,
                    &self.test_labels,
                ];
                if explicit.iter().any(|p| p.is_some()) {
                    let need = |p: &Option<PathBuf>, flag: &str| {
                        p.clone().ok_or_else(|| {
                            Error::invalid(format!(
                                "--{flag} is required when overriding MNIST files"
                            ))
                        })
                    };
                    let train = load_mnist(
                        &need(&self.train_images, "train-images")?,
                        &need(&self.train_labels, "train-labels")?,
                    )?;
                    let test = load_mnist(
                        &need(&self.test_images, "test-images")?,
                        &need(&self.test_labels, "test-labels")?,
                    )?;
                    Ok((train, test))
                } else {
                    load_mnist_dir(&dir)
                }
            }
            DatasetKind::Cifar100 => match (&self.train_bin, &self.test_bin) {
                (Some(train), Some(test)) => Ok((load_cifar100(train)?, load_cifar100(test)?)),
                (None, None) => load_cifar100_dir(&dir),
                _ => Err(Error::invalid(
                    "--train-bin and --test-bin must be given together",
                )),
            },
        }
    }
}

/// When a dataset file is simply absent, tell the user where to get it.
pub fn print_download_hint_if_missing_data(err: &Error) {
    let Error::Io { path, source } = err else {
        return;
    };
    if source.kind() != std::io::ErrorKind::NotFound {
        return;
    }
    let name = path.to_string_lossy();
    if name.contains("idx") || name.contains("ubyte") {
        eprintln!(
            "hint: MNIST files (raw or .gz) belong in the data directory:\n\
             \x20  train-images-idx3-ubyte.gz  train-labels-idx1-ubyte.gz\n\
             \x20  t10k-images-idx3-ubyte.gz   t10k-labels-idx1-ubyte.gz\n\
             \x20 download: https://yann.lecun.com/exdb/mnist/ (or any mirror)"
        );
    } else if name.contains(".bin") || name.contains("cifar") {
        eprintln!(
            "hint: CIFAR-100 binaries belong in the data directory as train.bin/test.bin\n\
             \x20 (or cifar-100-binary/train.bin, .../test.bin)\n\
             \x20 download: https://www.cs.toronto.edu/~kriz/cifar.html (cifar-100-binary.tar.gz)"
        );
    }
}
