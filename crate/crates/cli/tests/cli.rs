//! Black-box CLI tests: exit codes, file outputs, determinism. Runs against
//! small synthetic datasets written into temp dirs.

use drift_core::dataset::{write_cifar100, write_mnist};
use drift_core::modal::ModalBasis;
use drift_core::synth;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn drift_bin() -> &'static str {
    env!("CARGO_BIN_EXE_drift")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(drift_bin())
        .args(args)
        .current_dir(dir)
        .env_remove("DRIFT_DATA_DIR")
        .output()
        .expect("binary runs")
}

/// Write a small synthetic MNIST-shaped dataset under `dir/data`.
fn write_digit_fixture(dir: &Path) -> PathBuf {
    let data = dir.join("data");
    std::fs::create_dir_all(&data).unwrap();
    let train = synth::digits::<f64>(8, 41);
    let test = synth::digits::<f64>(4, 42);
    write_mnist(
        &train,
        &data.join("train-images-idx3-ubyte"),
        &data.join("train-labels-idx1-ubyte"),
    )
    .unwrap();
    write_mnist(
        &test,
        &data.join("t10k-images-idx3-ubyte"),
        &data.join("t10k-labels-idx1-ubyte"),
    )
    .unwrap();
    data
}

fn write_shape_fixture(dir: &Path) -> PathBuf {
    // All 100 classes must be present: the strict train-side subsample
    // requires every class to be populated.
    let data = dir.join("data");
    std::fs::create_dir_all(&data).unwrap();
    let train = synth::rgb_shapes::<f64>(100, 5, 43);
    let test = synth::rgb_shapes::<f64>(100, 2, 44);
    write_cifar100(&train, &data.join("train.bin")).unwrap();
    write_cifar100(&test, &data.join("test.bin")).unwrap();
    data
}

#[test]
fn gen_basis_writes_documented_binary_size_and_orthogonal_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["gen-basis", "--modes", "9", "--width", "28", "--height", "28", "--out", "b.bin"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let size = std::fs::metadata(tmp.path().join("b.bin")).unwrap().len();
    assert_eq!(size, 3 * 4 + 9 * 784 * 8);

    // Re-read the CSV and check the shapes are orthonormal.
    let text = std::fs::read_to_string(tmp.path().join("b.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "mode_index,n,m,x,y,value");
    let mut shapes = vec![vec![0.0f64; 784]; 9];
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        let k: usize = f[0].parse().unwrap();
        let x: usize = f[3].parse().unwrap();
        let y: usize = f[4].parse().unwrap();
        shapes[k][y * 28 + x] = f[5].parse().unwrap();
    }
    for a in 0..9 {
        for b in 0..9 {
            let dot: f64 = shapes[a].iter().zip(&shapes[b]).map(|(x, y)| x * y).sum();
            let want = if a == b { 1.0 } else { 0.0 };
            assert!((dot - want).abs() < 1e-9, "gram[{a},{b}] = {dot}");
        }
    }

    // The binary is loadable and matches.
    let basis = ModalBasis::<f64>::read_binary(&tmp.path().join("b.bin")).unwrap();
    assert_eq!(basis.len(), 9);
}

#[test]
fn gen_basis_rejects_zero_modes_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["gen-basis", "--modes", "0", "--width", "8", "--height", "8", "--out", "b.bin"],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("--modes"), "stderr: {stderr}");
}

#[test]
fn unknown_flags_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["gen-basis", "--modes", "4", "--width", "8", "--height", "8", "--out", "b.bin", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn train_writes_csv_and_prints_stats() {
    let tmp = tempfile::tempdir().unwrap();
    write_digit_fixture(tmp.path());
    let out = run_in(
        tmp.path(),
        &[
            "train", "--dataset", "mnist", "--method", "drift", "--modes", "10",
            "--batch", "8", "--hidden", "16", "--epochs", "3", "--seed", "7",
            "--out", "run.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("final epoch 3"), "stdout: {stdout}");
    assert!(stdout.contains("gap_stats"), "stdout: {stdout}");
    let text = std::fs::read_to_string(tmp.path().join("run.csv")).unwrap();
    assert_eq!(text.lines().count(), 4); // header + 3 epochs
    assert!(text.lines().nth(1).unwrap().contains(",drift,10,10,8,16,7,1,"));
}

#[test]
fn train_pca_with_oversized_k_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    write_digit_fixture(tmp.path());
    let out = run_in(
        tmp.path(),
        &[
            "train", "--dataset", "mnist", "--method", "pca", "--modes", "999999",
            "--epochs", "1", "--out", "run.csv",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("exceeds"), "stderr: {stderr}");
}

#[test]
fn missing_data_dir_exits_1_with_download_hint() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(
        tmp.path(),
        &["train", "--dataset", "mnist", "--method", "drift", "--epochs", "1", "--out", "x.csv"],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("hint"), "stderr: {stderr}");
    assert!(stderr.to_lowercase().contains("mnist"), "stderr: {stderr}");
}

#[test]
fn train_same_seed_twice_is_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    write_digit_fixture(tmp.path());
    let args = [
        "train", "--dataset", "mnist", "--method", "pca", "--modes", "8",
        "--batch", "4", "--hidden", "12", "--epochs", "2", "--seed", "99",
        "--out", "a.csv",
    ];
    assert!(run_in(tmp.path(), &args).status.success());
    let mut args2 = args;
    args2[args.len() - 1] = "b.csv";
    assert!(run_in(tmp.path(), &args2).status.success());
    let a = std::fs::read(tmp.path().join("a.csv")).unwrap();
    let b = std::fs::read(tmp.path().join("b.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn transform_exports_feature_csv() {
    let tmp = tempfile::tempdir().unwrap();
    write_digit_fixture(tmp.path());
    let out = run_in(
        tmp.path(),
        &[
            "transform", "--dataset", "mnist", "--method", "drift", "--modes", "6",
            "--split", "test", "--out", "feats.csv",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(tmp.path().join("feats.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "sample_id,f0,f1,f2,f3,f4,f5,label");
    assert_eq!(text.lines().count(), 41); // header + 4 per class x 10
}

#[test]
fn bench_rejects_unknown_figure_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_in(tmp.path(), &["bench", "--figure", "9", "--out-dir", "out"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bench_figure_4_produces_nine_records_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    write_digit_fixture(tmp.path());
    let out = run_in(
        tmp.path(),
        &[
            "bench", "--figure", "4", "--out-dir", "out", "--subsample", "6",
            "--epochs", "2",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out/fig4.csv")).unwrap();
    // 9 records x 2 epochs + header.
    assert_eq!(csv.lines().count(), 19);
    let summary = std::fs::read_to_string(tmp.path().join("out/fig4_summary.txt")).unwrap();
    assert_eq!(summary.lines().count(), 10); // header + 9 runs

    // Batch sizes 2, 32, 256 crossed with the three methods.
    for needle in [",drift,30,", ",pca,30,", ",full,30,"] {
        assert!(csv.contains(needle), "missing {needle}");
    }
}

#[test]
fn bench_cifar_figure_7_runs_on_shape_fixture() {
    let tmp = tempfile::tempdir().unwrap();
    write_shape_fixture(tmp.path());
    let out = run_in(
        tmp.path(),
        &[
            "bench", "--figure", "7", "--out-dir", "out", "--subsample", "4",
            "--epochs", "2",
        ],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(tmp.path().join("out/fig7.csv")).unwrap();
    // batches {2, 128} x 3 methods x 2 epochs + header.
    assert_eq!(csv.lines().count(), 13);
    assert!(csv.contains(",cifar100,"));
}

#[test]
fn report_on_header_only_csv_prints_no_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("empty.csv");
    drift_core::experiment::write_csv(&[], &path).unwrap();
    let out = run_in(tmp.path(), &["report", "--in", "empty.csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("no runs"));
}

#[test]
fn report_summarizes_bench_output_and_recomputes_stability() {
    let tmp = tempfile::tempdir().unwrap();
    write_digit_fixture(tmp.path());
    assert!(run_in(
        tmp.path(),
        &["bench", "--figure", "4", "--out-dir", "out", "--subsample", "5", "--epochs", "3"],
    )
    .status
    .success());

    let out = run_in(tmp.path(), &["report", "--in", "out/fig4.csv"]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    // 9 runs + table header + ranking section.
    let table_rows = stdout
        .lines()
        .filter(|l| l.starts_with("fig4.csv"))
        .count();
    assert_eq!(table_rows, 9, "stdout: {stdout}");
    assert!(stdout.contains("method ranking"), "stdout: {stdout}");

    // Stability column equals an independent recomputation from the CSV.
    let rows = drift_core::experiment::read_csv(&tmp.path().join("out/fig4.csv")).unwrap();
    let run0: Vec<f64> = rows
        .iter()
        .filter(|r| r.run_id == 0)
        .map(|r| r.test_loss)
        .collect();
    let tail = &run0[run0.len() / 2..];
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let mean = diffs.iter().sum::<f64>() / diffs.len() as f64;
    let expected =
        (diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / diffs.len() as f64).sqrt();
    let line = stdout
        .lines()
        .find(|l| l.starts_with("fig4.csv") && l.contains(" 0 "))
        .unwrap();
    let shown = line.split_whitespace().last().unwrap();
    let formatted = drift_core::experiment::format_significant(expected, 6);
    assert_eq!(shown, formatted, "line: {line}");
}

#[test]
fn report_names_malformed_line() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.csv");
    let mut text = String::from(drift_core::experiment::CSV_HEADER);
    text.push('\n');
    text.push_str("0,mnist,drift,8,8,8,16,42,1,oops,0.5,0.6,0.7\n");
    std::fs::write(&path, text).unwrap();
    let out = run_in(tmp.path(), &["report", "--in", "bad.csv"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2"), "stderr: {stderr}");
}

#[test]
fn data_dir_env_fallback_is_honored() {
    let tmp = tempfile::tempdir().unwrap();
    let data = write_digit_fixture(tmp.path());
    let out = Command::new(drift_bin())
        .args([
            "train", "--dataset", "mnist", "--method", "full", "--epochs", "1",
            "--batch", "16", "--hidden", "8", "--out", "env.csv",
        ])
        .current_dir(tmp.path().join("data")) // cwd without ./data
        .env("DRIFT_DATA_DIR", &data)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
