//! Sampled plate mode shapes: generation, ordering, and the orthonormal basis.
//!
//! A simply supported rectangular plate of size `W x H` vibrates in modes
//! `sin(n*pi*x/W) * sin(m*pi*y/H)` for positive integers `n, m`. We sample
//! those at half-pixel centers `x = i + 0.5`, `y = j + 0.5`, which keeps the
//! sampled modes exactly orthogonal (they coincide with a DST-II grid) and
//! avoids all-zero border rows. Flattening is row-major: pixel `(i, j)` lands
//! at index `j * W + i`, matching the dataset layout.

use crate::error::{Error, ParseKind, Result};
use crate::scalar::{cast, Scalar};
use ndarray::{Array2, ArrayView1, ArrayView2};
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

/// Half-wave counts of one plate mode: `n` along x (width), `m` along y.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModeIndex {
    pub n: u32,
    pub m: u32,
}

/// Sample the `(n, m)` mode shape on a `width x height` pixel grid.
///
/// The result is indexed `[j, i]` (row `j` is the y coordinate) with
/// `out[[j, i]] = sin(n*pi*(i+0.5)/width) * sin(m*pi*(j+0.5)/height)`.
/// Values are in `[-1, 1]` and not normalized. `n` beyond `width` (or `m`
/// beyond `height`) would alias onto lower modes and is rejected.
pub fn mode_shape<T: Scalar>(n: u32, m: u32, width: usize, height: usize) -> Result<Array2<T>> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "mode_shape: grid {width}x{height} must be at least 1x1"
        )));
    }
    if n == 0 || n as usize > width {
        return Err(Error::invalid(format!(
            "mode_shape: n={n} out of range 1..={width}"
        )));
    }
    if m == 0 || m as usize > height {
        return Err(Error::invalid(format!(
            "mode_shape: m={m} out of range 1..={height}"
        )));
    }
    let u: Vec<f64> = (0..width)
        .map(|i| (f64::from(n) * PI * (i as f64 + 0.5) / width as f64).sin())
        .collect();
    let v: Vec<f64> = (0..height)
        .map(|j| (f64::from(m) * PI * (j as f64 + 0.5) / height as f64).sin())
        .collect();
    Ok(Array2::from_shape_fn((height, width), |(j, i)| {
        cast::<T>(v[j] * u[i])
    }))
}

/// The `count` lowest-frequency modes for a `width x height` grid.
///
/// Modes are ordered by the frequency proxy `(n/W)^2 + (m/H)^2`, ties broken
/// lexicographically by `(n, m)`. The comparison uses the exact integer key
/// `(n*H)^2 + (m*W)^2`, so the order is platform-independent and
/// `enumerate_modes(N)` is always a prefix of `enumerate_modes(N+1)`.
pub fn enumerate_modes(count: usize, width: usize, height: usize) -> Result<Vec<ModeIndex>> {
    if width == 0 || height == 0 {
        return Err(Error::invalid(format!(
            "enumerate_modes: grid {width}x{height} must be at least 1x1"
        )));
    }
    if count == 0 {
        return Err(Error::invalid("enumerate_modes: count must be at least 1"));
    }
    if count > width * height {
        return Err(Error::invalid(format!(
            "enumerate_modes: {count} modes requested but a {width}x{height} grid supports only {}",
            width * height
        )));
    }
    let mut pairs: Vec<ModeIndex> = (1..=width as u32)
        .flat_map(|n| (1..=height as u32).map(move |m| ModeIndex { n, m }))
        .collect();
    let key = |mi: &ModeIndex| {
        let a = u64::from(mi.n) * height as u64;
        let b = u64::from(mi.m) * width as u64;
        a * a + b * b
    };
    pairs.sort_by(|x, y| key(x).cmp(&key(y)).then((x.n, x.m).cmp(&(y.n, y.m))));
    pairs.truncate(count);
    Ok(pairs)
}

/// An orthonormal basis of flattened, sampled mode shapes.
///
/// Row `k` of [`vectors`](Self::vectors) is the mode `modes[k]` sampled by
/// [`mode_shape`], flattened row-major and divided by its L2 norm. The rows
/// are pairwise orthogonal, so the Gram matrix is the identity.
#[derive(Debug, Clone)]
pub struct ModalBasis<T> {
    width: usize,
    height: usize,
    modes: Vec<ModeIndex>,
    vectors: Array2<T>,
}

/// Build the basis of the `count` lowest-frequency modes on a grid.
pub fn build_basis<T: Scalar>(count: usize, width: usize, height: usize) -> Result<ModalBasis<T>> {
    let modes = enumerate_modes(count, width, height)?;
    let mut vectors = Array2::<T>::zeros((count, width * height));
    for (k, mi) in modes.iter().enumerate() {
        let shape = mode_shape::<T>(mi.n, mi.m, width, height)?;
        let flat = shape.into_shape_with_order(width * height).expect("contiguous");
        let norm = flat.iter().map(|&x| x * x).sum::<T>().sqrt();
        vectors.row_mut(k).assign(&flat.mapv(|x| x / norm));
    }
    Ok(ModalBasis {
        width,
        height,
        modes,
        vectors,
    })
}

impl<T: Scalar> ModalBasis<T> {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of modes (rows).
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    /// The `count x (width*height)` matrix of normalized rows.
    pub fn vectors(&self) -> ArrayView2<'_, T> {
        self.vectors.view()
    }

    pub fn row(&self, k: usize) -> ArrayView1<'_, T> {
        self.vectors.row(k)
    }

    /// Write the basis as the binary export format: three little-endian u32
    /// (`N`, `W`, `H`) followed by `N*W*H` little-endian f64 values, row-major.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        let header = [self.len() as u32, self.width as u32, self.height as u32];
        for v in header {
            w.write_all(&v.to_le_bytes()).map_err(|e| Error::io(path, e))?;
        }
        for &x in self.vectors.iter() {
            let x64 = x.to_f64().expect("scalar converts to f64");
            w.write_all(&x64.to_le_bytes()).map_err(|e| Error::io(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Read a basis written by [`write_binary`](Self::write_binary).
    ///
    /// The container stores only the vectors; the mode indices are re-derived
    /// from `(N, W, H)` via [`enumerate_modes`], which reproduces anything
    /// this crate wrote.
    pub fn read_binary(path: &Path) -> Result<ModalBasis<T>> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut r = BufReader::new(file);
        let mut head = [0u8; 12];
        r.read_exact(&mut head).map_err(|e| Error::io(path, e))?;
        let n = u32::from_le_bytes(head[0..4].try_into().unwrap()) as usize;
        let width = u32::from_le_bytes(head[4..8].try_into().unwrap()) as usize;
        let height = u32::from_le_bytes(head[8..12].try_into().unwrap()) as usize;
        let modes = enumerate_modes(n, width, height)?;
        let mut raw = vec![0u8; n * width * height * 8];
        r.read_exact(&mut raw).map_err(|_| {
            Error::parse(
                path,
                ParseKind::Truncated {
                    expected_bytes: 12 + (n * width * height * 8) as u64,
                    found_bytes: std::fs::metadata(path).map(|m| m.len()).unwrap_or(0),
                },
            )
        })?;
        let values: Vec<T> = raw
            .chunks_exact(8)
            .map(|c| cast::<T>(f64::from_le_bytes(c.try_into().unwrap())))
            .collect();
        let vectors = Array2::from_shape_vec((n, width * height), values).expect("sized above");
        Ok(ModalBasis {
            width,
            height,
            modes,
            vectors,
        })
    }
}
