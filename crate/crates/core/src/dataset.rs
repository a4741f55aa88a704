//! MNIST (IDX) and CIFAR-100 binary ingestion, bilinear resizing, and
//! class-stratified subsampling.
//!
//! Pixel layout is channel-major then row-major: an image with `C` channels
//! on a `W x H` grid is stored as `C` planes of `W*H` values, each plane
//! row-major (`j * W + i`). That matches the CIFAR binary layout directly and
//! is the single flattening convention shared with the modal basis. Pixels
//! are byte values scaled by `1/255`, so everything lives in `[0, 1]`.
//!
//! Loaders accept raw files or gzip-compressed ones (detected by the
//! `0x1f 0x8b` prefix, regardless of file name).

use crate::error::{Error, ParseKind, Result};
use crate::scalar::{cast, Scalar};
use flate2::read::MultiGzDecoder;
use ndarray::{Array2, ArrayView1, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;
const CIFAR_RECORD: usize = 3074;

/// One image: `channels` planes of `width * height` values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T> {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    pub pixels: Vec<T>,
}

impl<T: Scalar> Image<T> {
    pub fn new(width: usize, height: usize, channels: usize, pixels: Vec<T>) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 {
            return Err(Error::invalid("image dimensions must be positive"));
        }
        if pixels.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "image of {width}x{height}x{channels} needs {} pixels, got {}",
                width * height * channels,
                pixels.len()
            )));
        }
        Ok(Image {
            width,
            height,
            channels,
            pixels,
        })
    }

    /// Value at `(x, y)` in channel `c`.
    #[inline]
    pub fn at(&self, x: usize, y: usize, c: usize) -> T {
        self.pixels[c * self.width * self.height + y * self.width + x]
    }
}

/// A labeled image collection of uniform shape.
#[derive(Debug, Clone)]
pub struct Dataset<T> {
    width: usize,
    height: usize,
    channels: usize,
    num_classes: usize,
    /// `len x (width*height*channels)`, one flattened image per row.
    pixels: Array2<T>,
    labels: Vec<u8>,
}

impl<T: Scalar> Dataset<T> {
    /// Build a dataset from parts, checking every invariant (label range,
    /// pixel range, shape consistency).
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        num_classes: usize,
        pixels: Array2<T>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if width == 0 || height == 0 || channels == 0 || num_classes == 0 {
            return Err(Error::invalid("dataset dimensions must be positive"));
        }
        if pixels.nrows() != labels.len() {
            return Err(Error::invalid(format!(
                "{} images but {} labels",
                pixels.nrows(),
                labels.len()
            )));
        }
        if pixels.ncols() != width * height * channels {
            return Err(Error::invalid(format!(
                "rows of length {} do not match {width}x{height}x{channels}",
                pixels.ncols()
            )));
        }
        if let Some((i, &l)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l as usize >= num_classes)
        {
            return Err(Error::invalid(format!(
                "label {l} at sample {i} is outside 0..{num_classes}"
            )));
        }
        let zero = T::zero();
        let one = T::one();
        if pixels.iter().any(|&v| !(v >= zero && v <= one)) {
            return Err(Error::invalid("pixel values must lie in [0, 1]"));
        }
        Ok(Self::from_parts(width, height, channels, num_classes, pixels, labels))
    }

    /// Internal constructor for outputs that preserve the invariants by
    /// construction (loads, resizes, row selections).
    fn from_parts(
        width: usize,
        height: usize,
        channels: usize,
        num_classes: usize,
        pixels: Array2<T>,
        labels: Vec<u8>,
    ) -> Self {
        Dataset {
            width,
            height,
            channels,
            num_classes,
            pixels,
            labels,
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    /// Flattened length of one image: `width * height * channels`.
    pub fn feature_len(&self) -> usize {
        self.width * self.height * self.channels
    }

    /// The `len x feature_len` pixel matrix.
    pub fn pixels(&self) -> &Array2<T> {
        &self.pixels
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    /// Flattened pixels of sample `i`.
    pub fn sample(&self, i: usize) -> ArrayView1<'_, T> {
        self.pixels.row(i)
    }

    /// Owned copy of sample `i` as an [`Image`].
    pub fn image(&self, i: usize) -> Image<T> {
        Image {
            width: self.width,
            height: self.height,
            channels: self.channels,
            pixels: self.pixels.row(i).to_vec(),
        }
    }

    fn select(&self, indices: &[usize]) -> Dataset<T> {
        let pixels = self.pixels.select(Axis(0), indices);
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        Dataset::from_parts(
            self.width,
            self.height,
            self.channels,
            self.num_classes,
            pixels,
            labels,
        )
    }
}

/// Read a file, transparently gunzipping when it starts with `0x1f 0x8b`.
fn read_maybe_gz(path: &Path) -> Result<Vec<u8>> {
    let raw = fs::read(path).map_err(|e| Error::io(path, e))?;
    if raw.len() >= 2 && raw[0] == 0x1f && raw[1] == 0x8b {
        let mut out = Vec::new();
        MultiGzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| Error::parse(path, ParseKind::BadValue(format!("gzip: {e}"))))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

fn parse_idx_images<T: Scalar>(path: &Path, bytes: &[u8]) -> Result<(usize, usize, Array2<T>)> {
    if bytes.len() < 16 {
        return Err(Error::parse(
            path,
            ParseKind::Truncated {
                expected_bytes: 16,
                found_bytes: bytes.len() as u64,
            },
        ));
    }
    let magic = be_u32(bytes, 0);
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::parse(
            path,
            ParseKind::BadMagic {
                expected: IDX_IMAGES_MAGIC,
                found: magic,
            },
        ));
    }
    let count = be_u32(bytes, 4) as usize;
    let rows = be_u32(bytes, 8) as usize;
    let cols = be_u32(bytes, 12) as usize;
    let expected = 16 + count * rows * cols;
    if bytes.len() < expected {
        return Err(Error::parse(
            path,
            ParseKind::Truncated {
                expected_bytes: expected as u64,
                found_bytes: bytes.len() as u64,
            },
        ));
    }
    if bytes.len() > expected {
        return Err(Error::parse(
            path,
            ParseKind::BadValue(format!(
                "{} trailing bytes after {count} images",
                bytes.len() - expected
            )),
        ));
    }
    let values: Vec<T> = bytes[16..]
        .iter()
        .map(|&b| cast::<T>(f64::from(b) / 255.0))
        .collect();
    let pixels = Array2::from_shape_vec((count, rows * cols), values).expect("sized above");
    Ok((cols, rows, pixels))
}

fn parse_idx_labels(path: &Path, bytes: &[u8], num_classes: usize) -> Result<Vec<u8>> {
    if bytes.len() < 8 {
        return Err(Error::parse(
            path,
            ParseKind::Truncated {
                expected_bytes: 8,
                found_bytes: bytes.len() as u64,
            },
        ));
    }
    let magic = be_u32(bytes, 0);
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::parse(
            path,
            ParseKind::BadMagic {
                expected: IDX_LABELS_MAGIC,
                found: magic,
            },
        ));
    }
    let count = be_u32(bytes, 4) as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(Error::parse(
            path,
            ParseKind::Truncated {
                expected_bytes: expected as u64,
                found_bytes: bytes.len() as u64,
            },
        ));
    }
    if bytes.len() > expected {
        return Err(Error::parse(
            path,
            ParseKind::BadValue(format!(
                "{} trailing bytes after {count} labels",
                bytes.len() - expected
            )),
        ));
    }
    let labels = bytes[8..].to_vec();
    if let Some((i, &l)) = labels
        .iter()
        .enumerate()
        .find(|(_, &l)| l as usize >= num_classes)
    {
        return Err(Error::parse(
            path,
            ParseKind::BadValue(format!("label {l} at sample {i} is outside 0..{num_classes}")),
        ));
    }
    Ok(labels)
}

/// Load one MNIST split from an IDX image file and an IDX label file.
///
/// Big-endian magic `0x00000803` (images) / `0x00000801` (labels), byte
/// pixels scaled by `1/255`, ten classes.
pub fn load_mnist<T: Scalar>(images_path: &Path, labels_path: &Path) -> Result<Dataset<T>> {
    let image_bytes = read_maybe_gz(images_path)?;
    let (width, height, pixels) = parse_idx_images::<T>(images_path, &image_bytes)?;
    let label_bytes = read_maybe_gz(labels_path)?;
    let labels = parse_idx_labels(labels_path, &label_bytes, 10)?;
    if pixels.nrows() != labels.len() {
        return Err(Error::parse(
            labels_path,
            ParseKind::CountMismatch {
                images: pixels.nrows(),
                labels: labels.len(),
            },
        ));
    }
    Ok(Dataset::from_parts(width, height, 1, 10, pixels, labels))
}

/// Load one CIFAR-100 split from the binary format: 3074-byte records of
/// `[coarse, fine, 1024 R, 1024 G, 1024 B]`. The coarse label is ignored;
/// fine labels give 100 classes.
pub fn load_cifar100<T: Scalar>(bin_path: &Path) -> Result<Dataset<T>> {
    let bytes = read_maybe_gz(bin_path)?;
    if bytes.len() % CIFAR_RECORD != 0 {
        return Err(Error::parse(
            bin_path,
            ParseKind::Truncated {
                expected_bytes: (bytes.len().div_ceil(CIFAR_RECORD) * CIFAR_RECORD) as u64,
                found_bytes: bytes.len() as u64,
            },
        ));
    }
    let count = bytes.len() / CIFAR_RECORD;
    let mut labels = Vec::with_capacity(count);
    let mut values = Vec::with_capacity(count * 3072);
    for r in 0..count {
        let rec = &bytes[r * CIFAR_RECORD..(r + 1) * CIFAR_RECORD];
        let fine = rec[1];
        if fine > 99 {
            return Err(Error::parse(
                bin_path,
                ParseKind::BadValue(format!("record {r}: fine label {fine} is outside 0..=99")),
            ));
        }
        labels.push(fine);
        values.extend(rec[2..].iter().map(|&b| cast::<T>(f64::from(b) / 255.0)));
    }
    let pixels = Array2::from_shape_vec((count, 3072), values).expect("sized above");
    Ok(Dataset::from_parts(32, 32, 3, 100, pixels, labels))
}

fn quantize<T: Scalar>(v: T) -> u8 {
    let x = v.to_f64().unwrap_or(0.0) * 255.0;
    x.round().clamp(0.0, 255.0) as u8
}

/// Write a single-channel dataset back to IDX image + label files.
pub fn write_mnist<T: Scalar>(
    ds: &Dataset<T>,
    images_path: &Path,
    labels_path: &Path,
) -> Result<()> {
    if ds.channels() != 1 {
        return Err(Error::invalid("IDX image export requires a single channel"));
    }
    let mut img = Vec::with_capacity(16 + ds.len() * ds.feature_len());
    img.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
    img.extend_from_slice(&(ds.len() as u32).to_be_bytes());
    img.extend_from_slice(&(ds.height() as u32).to_be_bytes());
    img.extend_from_slice(&(ds.width() as u32).to_be_bytes());
    img.extend(ds.pixels.iter().map(|&v| quantize(v)));
    fs::write(images_path, img).map_err(|e| Error::io(images_path, e))?;

    let mut lab = Vec::with_capacity(8 + ds.len());
    lab.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
    lab.extend_from_slice(&(ds.len() as u32).to_be_bytes());
    lab.extend_from_slice(&ds.labels);
    fs::write(labels_path, lab).map_err(|e| Error::io(labels_path, e))
}

/// Write a 32x32x3 dataset to the CIFAR-100 binary format. The coarse label
/// byte (which this crate never reads) is written as zero.
pub fn write_cifar100<T: Scalar>(ds: &Dataset<T>, bin_path: &Path) -> Result<()> {
    if ds.channels() != 3 || ds.width() != 32 || ds.height() != 32 {
        return Err(Error::invalid("CIFAR-100 export requires 32x32x3 images"));
    }
    let mut out = Vec::with_capacity(ds.len() * CIFAR_RECORD);
    for i in 0..ds.len() {
        out.push(0);
        out.push(ds.labels[i]);
        out.extend(ds.pixels.row(i).iter().map(|&v| quantize(v)));
    }
    fs::write(bin_path, out).map_err(|e| Error::io(bin_path, e))
}

/// Bilinear resize of one image with half-pixel-center alignment.
///
/// The source coordinate of destination pixel `d` is
/// `(d + 0.5) * src/dst - 0.5`, clamped to the valid range, then the four
/// neighbors are blended per channel. Convex blending keeps values in
/// `[0, 1]`.
pub fn resize_bilinear_image<T: Scalar>(
    img: &Image<T>,
    new_width: usize,
    new_height: usize,
) -> Result<Image<T>> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::invalid("resize target must be at least 1x1"));
    }
    let (sw, sh, c) = (img.width, img.height, img.channels);
    let mut pixels = Vec::with_capacity(new_width * new_height * c);
    let x_scale = sw as f64 / new_width as f64;
    let y_scale = sh as f64 / new_height as f64;
    for ch in 0..c {
        let plane = &img.pixels[ch * sw * sh..(ch + 1) * sw * sh];
        for dy in 0..new_height {
            let sy = ((dy as f64 + 0.5) * y_scale - 0.5).clamp(0.0, (sh - 1) as f64);
            let y0 = sy.floor() as usize;
            let y1 = (y0 + 1).min(sh - 1);
            let fy = sy - y0 as f64;
            for dx in 0..new_width {
                let sx = ((dx as f64 + 0.5) * x_scale - 0.5).clamp(0.0, (sw - 1) as f64);
                let x0 = sx.floor() as usize;
                let x1 = (x0 + 1).min(sw - 1);
                let fx = sx - x0 as f64;
                let v00 = plane[y0 * sw + x0].to_f64().unwrap();
                let v01 = plane[y0 * sw + x1].to_f64().unwrap();
                let v10 = plane[y1 * sw + x0].to_f64().unwrap();
                let v11 = plane[y1 * sw + x1].to_f64().unwrap();
                let top = v00 * (1.0 - fx) + v01 * fx;
                let bottom = v10 * (1.0 - fx) + v11 * fx;
                pixels.push(cast::<T>(top * (1.0 - fy) + bottom * fy));
            }
        }
    }
    Ok(Image {
        width: new_width,
        height: new_height,
        channels: c,
        pixels,
    })
}

/// Bilinear resize of every image in a dataset.
pub fn resize_bilinear<T: Scalar>(
    ds: &Dataset<T>,
    new_width: usize,
    new_height: usize,
) -> Result<Dataset<T>> {
    if new_width == 0 || new_height == 0 {
        return Err(Error::invalid("resize target must be at least 1x1"));
    }
    let cols = new_width * new_height * ds.channels();
    let mut pixels = Array2::<T>::zeros((ds.len(), cols));
    for i in 0..ds.len() {
        let resized = resize_bilinear_image(&ds.image(i), new_width, new_height)?;
        let row = Array2::from_shape_vec((1, cols), resized.pixels).expect("sized");
        pixels.row_mut(i).assign(&row.row(0));
    }
    Ok(Dataset::from_parts(
        new_width,
        new_height,
        ds.channels(),
        ds.num_classes(),
        pixels,
        ds.labels.clone(),
    ))
}

fn stratified_pick<T: Scalar>(
    ds: &Dataset<T>,
    per_class: usize,
    seed: u64,
    strict: bool,
) -> Result<Vec<usize>> {
    if per_class == 0 {
        return Err(Error::invalid("subsample: per_class must be at least 1"));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.num_classes()];
    for (i, &l) in ds.labels.iter().enumerate() {
        by_class[l as usize].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = Vec::with_capacity(per_class * ds.num_classes());
    for (class, indices) in by_class.iter_mut().enumerate() {
        if strict && indices.len() < per_class {
            return Err(Error::invalid(format!(
                "subsample: class {class} has {} samples, need {per_class}",
                indices.len()
            )));
        }
        indices.shuffle(&mut rng);
        picks.extend(indices.iter().take(per_class).copied());
    }
    picks.shuffle(&mut rng);
    Ok(picks)
}

/// Deterministic class-stratified subsample: exactly `per_class` samples of
/// every class, chosen and ordered by the seeded generator. Errors, naming
/// the class, when a class has fewer than `per_class` samples.
pub fn subsample<T: Scalar>(ds: &Dataset<T>, per_class: usize, seed: u64) -> Result<Dataset<T>> {
    let picks = stratified_pick(ds, per_class, seed, true)?;
    Ok(ds.select(&picks))
}

/// Like [`subsample`], but classes with fewer than `per_class` samples
/// contribute everything they have instead of failing. Used for held-out
/// splits, which are usually smaller per class than training splits.
pub fn subsample_capped<T: Scalar>(
    ds: &Dataset<T>,
    per_class: usize,
    seed: u64,
) -> Result<Dataset<T>> {
    let picks = stratified_pick(ds, per_class, seed, false)?;
    Ok(ds.select(&picks))
}

fn find_existing(dir: &Path, stems: &[&str]) -> Option<PathBuf> {
    for stem in stems {
        for suffix in ["", ".gz"] {
            let candidate = dir.join(format!("{stem}{suffix}"));
            if candidate.is_file() {
                return Some(candidate);
            }
        }
    }
    None
}

fn require(dir: &Path, stems: &[&str]) -> Result<PathBuf> {
    find_existing(dir, stems).ok_or_else(|| {
        Error::io(
            dir.join(stems[0]),
            std::io::Error::new(
                std::io::ErrorKind::NotFound,
                format!("no file named {} (or .gz) under {}", stems.join(" / "), dir.display()),
            ),
        )
    })
}

/// Locate and load the standard-named MNIST files under `dir`, returning
/// `(train, test)`. Both hyphenated (`train-images-idx3-ubyte`) and dotted
/// (`train-images.idx3-ubyte`) names are accepted, raw or gzipped.
pub fn load_mnist_dir<T: Scalar>(dir: &Path) -> Result<(Dataset<T>, Dataset<T>)> {
    let train_images = require(dir, &["train-images-idx3-ubyte", "train-images.idx3-ubyte"])?;
    let train_labels = require(dir, &["train-labels-idx1-ubyte", "train-labels.idx1-ubyte"])?;
    let test_images = require(dir, &["t10k-images-idx3-ubyte", "t10k-images.idx3-ubyte"])?;
    let test_labels = require(dir, &["t10k-labels-idx1-ubyte", "t10k-labels.idx1-ubyte"])?;
    Ok((
        load_mnist(&train_images, &train_labels)?,
        load_mnist(&test_images, &test_labels)?,
    ))
}

/// Locate and load the standard-named CIFAR-100 files under `dir` (either
/// directly or in a `cifar-100-binary/` subdirectory), returning
/// `(train, test)`.
pub fn load_cifar100_dir<T: Scalar>(dir: &Path) -> Result<(Dataset<T>, Dataset<T>)> {
    let train = require(dir, &["train.bin", "cifar-100-binary/train.bin"])?;
    let test = require(dir, &["test.bin", "cifar-100-binary/test.bin"])?;
    Ok((load_cifar100(&train)?, load_cifar100(&test)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gz_prefix_detection() {
        let dir = std::env::temp_dir().join(format!("drift-gz-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let plain = dir.join("plain.bin");
        fs::write(&plain, [1u8, 2, 3]).unwrap();
        assert_eq!(read_maybe_gz(&plain).unwrap(), vec![1, 2, 3]);

        let gzed = dir.join("data.gz");
        let mut enc =
            flate2::write::GzEncoder::new(Vec::new(), flate2::Compression::default());
        std::io::Write::write_all(&mut enc, &[9u8, 8, 7, 6]).unwrap();
        fs::write(&gzed, enc.finish().unwrap()).unwrap();
        assert_eq!(read_maybe_gz(&gzed).unwrap(), vec![9, 8, 7, 6]);
        fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn quantize_round_trips_byte_values() {
        for b in [0u8, 1, 17, 128, 254, 255] {
            let v = f64::from(b) / 255.0;
            assert_eq!(quantize::<f64>(v), b);
        }
    }
}
