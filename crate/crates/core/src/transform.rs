//! Feature extraction: DRIFT (cosine similarity against the modal basis),
//! PCA fitted on training pixels, raw-pixel passthrough, and per-feature
//! standardization.

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg;
use crate::modal::ModalBasis;
use crate::scalar::{cast, Scalar};
use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

/// Per-sample feature vectors, one row per sample.
pub type FeatureMatrix<T> = Array2<T>;

/// Norms at or below this count as "no signal" for cosine similarity.
const NORM_FLOOR: f64 = 1e-12;

/// Cosine of the angle between two vectors, clamped to `[-1, 1]`.
///
/// A vector with norm at most `1e-12` has no direction; its similarity to
/// anything is defined as 0 rather than NaN (an all-black image has no modal
/// content).
pub fn cosine_similarity<T: Scalar>(u: ArrayView1<T>, v: ArrayView1<T>) -> Result<T> {
    if u.len() != v.len() {
        return Err(Error::invalid(format!(
            "cosine_similarity: lengths {} and {} differ",
            u.len(),
            v.len()
        )));
    }
    if u.is_empty() {
        return Err(Error::invalid("cosine_similarity: empty vectors"));
    }
    let floor = cast::<T>(NORM_FLOOR);
    let nu = u.dot(&u).sqrt();
    let nv = v.dot(&v).sqrt();
    if nu <= floor || nv <= floor {
        return Ok(T::zero());
    }
    let c = u.dot(&v) / (nu * nv);
    Ok(num_traits::clamp(c, -T::one(), T::one()))
}

/// How multi-channel images map onto the single-channel mode shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelPolicy {
    /// Collapse to luma `0.299 R + 0.587 G + 0.114 B` first (`N` features).
    Grayscale,
    /// Mean of the per-channel similarities (`N` features). The default:
    /// it keeps every channel's signal at the single-basis feature count.
    #[default]
    Average,
    /// Per-channel similarities concatenated channel-major (`C*N` features).
    Concat,
}

impl ChannelPolicy {
    /// Feature count produced for `channels`-channel input and `modes` basis rows.
    pub fn feature_dim(&self, channels: usize, modes: usize) -> usize {
        match self {
            ChannelPolicy::Concat => channels * modes,
            _ => modes,
        }
    }
}

impl FromStr for ChannelPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grayscale" => Ok(ChannelPolicy::Grayscale),
            "average" => Ok(ChannelPolicy::Average),
            "concat" => Ok(ChannelPolicy::Concat),
            other => Err(Error::invalid(format!(
                "unknown channel policy `{other}` (expected grayscale, average, or concat)"
            ))),
        }
    }
}

impl std::fmt::Display for ChannelPolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ChannelPolicy::Grayscale => "grayscale",
            ChannelPolicy::Average => "average",
            ChannelPolicy::Concat => "concat",
        };
        f.write_str(s)
    }
}

/// Cosine similarities of each row of `planes` against every basis row.
///
/// Basis rows are unit-norm, so the cosine reduces to the inner product
/// scaled by the plane norm; the whole thing is one matrix product. Rows may
/// hold any real values (this is the scale-invariant core under
/// [`drift_transform`]); zero-norm rows map to all-zero features.
pub fn drift_project<T: Scalar>(
    planes: &Array2<T>,
    basis: &ModalBasis<T>,
) -> Result<FeatureMatrix<T>> {
    if planes.ncols() != basis.width() * basis.height() {
        return Err(Error::invalid(format!(
            "drift_project: plane length {} does not match basis {}x{}",
            planes.ncols(),
            basis.width(),
            basis.height()
        )));
    }
    Ok(cosine_block(planes, basis))
}

fn cosine_block<T: Scalar>(planes: &Array2<T>, basis: &ModalBasis<T>) -> Array2<T> {
    let mut sims = planes.dot(&basis.vectors().t());
    let floor = cast::<T>(NORM_FLOOR);
    for (mut row, plane) in sims.outer_iter_mut().zip(planes.outer_iter()) {
        let norm = plane.dot(&plane).sqrt();
        if norm <= floor {
            row.fill(T::zero());
        } else {
            row.mapv_inplace(|x| num_traits::clamp(x / norm, -T::one(), T::one()));
        }
    }
    sims
}

/// Project every image onto the modal basis by cosine similarity.
///
/// Single-channel images are compared directly; multi-channel images are
/// reduced per `policy`. Output rows have `N` features (grayscale/average)
/// or `C*N` (concat, channel-major). Every value lies in `[-1, 1]`.
pub fn drift_transform<T: Scalar>(
    ds: &Dataset<T>,
    basis: &ModalBasis<T>,
    policy: ChannelPolicy,
) -> Result<FeatureMatrix<T>> {
    if ds.width() != basis.width() || ds.height() != basis.height() {
        return Err(Error::invalid(format!(
            "drift_transform: dataset is {}x{} but basis is {}x{}",
            ds.width(),
            ds.height(),
            basis.width(),
            basis.height()
        )));
    }
    let (n, c) = (ds.len(), ds.channels());
    let plane_len = ds.width() * ds.height();
    let modes = basis.len();

    if c == 1 {
        return Ok(cosine_block(ds.pixels(), basis));
    }

    match policy {
        ChannelPolicy::Grayscale => {
            if c != 3 {
                return Err(Error::invalid(format!(
                    "grayscale policy needs 1 or 3 channels, got {c}"
                )));
            }
            let weights = [0.299, 0.587, 0.114].map(cast::<T>);
            let mut luma = Array2::<T>::zeros((n, plane_len));
            for (ch, w) in weights.into_iter().enumerate() {
                let plane = ds.pixels().slice(s![.., ch * plane_len..(ch + 1) * plane_len]);
                luma.scaled_add(w, &plane);
            }
            Ok(cosine_block(&luma, basis))
        }
        ChannelPolicy::Average => {
            let mut acc = Array2::<T>::zeros((n, modes));
            for ch in 0..c {
                let plane = ds
                    .pixels()
                    .slice(s![.., ch * plane_len..(ch + 1) * plane_len])
                    .to_owned();
                acc += &cosine_block(&plane, basis);
            }
            let inv = T::one() / cast::<T>(c as f64);
            Ok(acc.mapv(|x| x * inv))
        }
        ChannelPolicy::Concat => {
            let mut out = Array2::<T>::zeros((n, c * modes));
            for ch in 0..c {
                let plane = ds
                    .pixels()
                    .slice(s![.., ch * plane_len..(ch + 1) * plane_len])
                    .to_owned();
                out.slice_mut(s![.., ch * modes..(ch + 1) * modes])
                    .assign(&cosine_block(&plane, basis));
            }
            Ok(out)
        }
    }
}

/// Flattened raw pixels, channel-major then row-major; `W*H*C` columns.
pub fn full_transform<T: Scalar>(ds: &Dataset<T>) -> FeatureMatrix<T> {
    ds.pixels().clone()
}

/// A fitted PCA reduction: training mean and the top-k principal directions.
#[derive(Debug, Clone)]
pub struct PcaModel<T> {
    mean: Array1<T>,
    /// `k x D`, rows orthonormal, ordered by descending explained variance.
    components: Array2<T>,
}

impl<T: Scalar> PcaModel<T> {
    pub fn k(&self) -> usize {
        self.components.nrows()
    }

    pub fn dim(&self) -> usize {
        self.components.ncols()
    }

    pub fn mean(&self) -> ArrayView1<'_, T> {
        self.mean.view()
    }

    pub fn components(&self) -> &Array2<T> {
        &self.components
    }

    /// `(x - mean) . components^T`; output has `k` columns.
    pub fn transform(&self, feats: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>> {
        if feats.ncols() != self.dim() {
            return Err(Error::invalid(format!(
                "pca_transform: {} columns but the model was fitted on {}",
                feats.ncols(),
                self.dim()
            )));
        }
        let centered = feats - &self.mean;
        Ok(centered.dot(&self.components.t()))
    }

    /// Map projections back to the original space: `z . components + mean`.
    pub fn inverse_transform(&self, projected: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>> {
        if projected.ncols() != self.k() {
            return Err(Error::invalid(format!(
                "pca inverse_transform: {} columns but k = {}",
                projected.ncols(),
                self.k()
            )));
        }
        Ok(projected.dot(&self.components) + &self.mean)
    }
}

/// Fit PCA on a training feature matrix.
///
/// The components are the top-k right singular vectors of the mean-centered
/// matrix, in descending singular-value order. Internally this solves the
/// smaller of the two symmetric eigenproblems — the `D x D` scatter matrix
/// `Xc^T Xc` or the `n x n` Gram matrix `Xc Xc^T` (the two give the same
/// components) — exactly for small sides and by subspace iteration for large
/// ones. All internal math runs in `f64` regardless of `T`.
///
/// Sign convention: each component's entry of largest magnitude is made
/// positive (first index wins ties), so results are deterministic. Directions
/// with zero singular value are completed deterministically from canonical
/// basis vectors.
pub fn pca_fit<T: Scalar>(train: &FeatureMatrix<T>, k: usize) -> Result<PcaModel<T>> {
    let (n, d) = train.dim();
    if n < 2 {
        return Err(Error::invalid(format!(
            "pca_fit: need at least 2 training rows, got {n}"
        )));
    }
    if k == 0 || k > n.min(d) {
        return Err(Error::invalid(format!(
            "pca_fit: k = {k} exceeds min(rows, cols) = {}",
            n.min(d)
        )));
    }

    let x = train.mapv(|v| v.to_f64().expect("scalar to f64"));
    let mean = x.mean_axis(Axis(0)).expect("n >= 2");
    let centered = &x - &mean;

    let mut components = if d <= n {
        // Scatter-matrix route: eigenvectors are the components directly.
        let scatter = centered.t().dot(&centered);
        let (_, vecs) = eigen_desc_topk(&scatter, k);
        vecs.t().to_owned()
    } else {
        // Gram route: map n-space eigenvectors u back through Xc^T.
        let gram = centered.dot(&centered.t());
        let (vals, vecs) = eigen_desc_topk(&gram, k);
        let scale = vals[0].max(0.0);
        let mut rows = Array2::<f64>::zeros((k, d));
        for i in 0..k {
            if vals[i] > 1e-12 * scale.max(1.0) {
                let v = centered.t().dot(&vecs.column(i));
                let norm = v.dot(&v).sqrt();
                rows.row_mut(i).assign(&v.mapv(|x| x / norm));
            }
            // Zero-variance directions are left as zero rows and completed below.
        }
        rows
    };

    // Polish to orthonormal rows; degenerate rows become deterministic
    // completions from canonical basis vectors.
    let mut cols = components.t().to_owned();
    linalg::orthonormalize_columns(&mut cols);
    components = cols.t().to_owned();

    for mut row in components.rows_mut() {
        // First index wins ties, hence strict >.
        let mut pivot = 0;
        for (i, &v) in row.iter().enumerate() {
            if v.abs() > row[pivot].abs() {
                pivot = i;
            }
        }
        if row[pivot] < 0.0 {
            row.mapv_inplace(|x| -x);
        }
    }

    Ok(PcaModel {
        mean: mean.mapv(cast::<T>),
        components: components.mapv(cast::<T>),
    })
}

fn eigen_desc_topk(matrix: &Array2<f64>, k: usize) -> (Array1<f64>, Array2<f64>) {
    if matrix.nrows() <= linalg::JACOBI_MAX {
        let (vals, vecs) = linalg::symmetric_eigen_desc(matrix.view());
        (
            vals.slice(s![..k]).to_owned(),
            vecs.slice(s![.., ..k]).to_owned(),
        )
    } else {
        linalg::symmetric_topk(matrix.view(), k)
    }
}

/// See [`PcaModel::transform`].
pub fn pca_transform<T: Scalar>(
    model: &PcaModel<T>,
    feats: &FeatureMatrix<T>,
) -> Result<FeatureMatrix<T>> {
    model.transform(feats)
}

/// Per-feature affine normalization fitted on training data.
#[derive(Debug, Clone)]
pub struct Standardizer<T> {
    mean: Array1<T>,
    /// Population standard deviation, floored at `1e-8`.
    std: Array1<T>,
}

impl<T: Scalar> Standardizer<T> {
    pub fn mean(&self) -> ArrayView1<'_, T> {
        self.mean.view()
    }

    pub fn std(&self) -> ArrayView1<'_, T> {
        self.std.view()
    }

    /// `(x - mean) / std` per column. Constant training columns map to zero.
    pub fn apply(&self, feats: &FeatureMatrix<T>) -> Result<FeatureMatrix<T>> {
        if feats.ncols() != self.mean.len() {
            return Err(Error::invalid(format!(
                "standardizer: {} columns but fitted on {}",
                feats.ncols(),
                self.mean.len()
            )));
        }
        Ok((feats - &self.mean) / &self.std)
    }
}

/// Fit per-column mean and (population) standard deviation on training rows.
pub fn standardizer_fit<T: Scalar>(train: &FeatureMatrix<T>) -> Result<Standardizer<T>> {
    if train.nrows() < 2 {
        return Err(Error::invalid(format!(
            "standardizer_fit: need at least 2 rows, got {}",
            train.nrows()
        )));
    }
    let mean = train.mean_axis(Axis(0)).expect("rows >= 2");
    let n = cast::<T>(train.nrows() as f64);
    let floor = cast::<T>(1e-8);
    let std = train
        .axis_iter(Axis(1))
        .zip(mean.iter())
        .map(|(col, &mu)| {
            let var = col.iter().map(|&v| (v - mu) * (v - mu)).sum::<T>() / n;
            var.sqrt().max(floor)
        })
        .collect::<Array1<T>>();
    Ok(Standardizer { mean, std })
}

/// See [`Standardizer::apply`].
pub fn standardizer_apply<T: Scalar>(
    s: &Standardizer<T>,
    feats: &FeatureMatrix<T>,
) -> Result<FeatureMatrix<T>> {
    s.apply(feats)
}

/// Export features as CSV with header `sample_id,f0,...,label`, one row per
/// sample, full-precision values.
pub fn write_features_csv<T: Scalar>(
    path: &Path,
    feats: &FeatureMatrix<T>,
    labels: &[u8],
) -> Result<()> {
    if feats.nrows() != labels.len() {
        return Err(Error::invalid(format!(
            "features/labels length mismatch: {} vs {}",
            feats.nrows(),
            labels.len()
        )));
    }
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    write!(w, "sample_id").map_err(io)?;
    for j in 0..feats.ncols() {
        write!(w, ",f{j}").map_err(io)?;
    }
    writeln!(w, ",label").map_err(io)?;
    for (i, row) in feats.outer_iter().enumerate() {
        write!(w, "{i}").map_err(io)?;
        for v in row.iter() {
            write!(w, ",{v}").map_err(io)?;
        }
        writeln!(w, ",{}", labels[i]).map_err(io)?;
    }
    w.flush().map_err(io)
}
