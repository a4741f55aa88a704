//! Dense symmetric eigenroutines backing the PCA fit.
//!
//! Two engines, both deterministic:
//! - [`symmetric_eigen_desc`]: full eigendecomposition by cyclic Jacobi
//!   rotations. Accurate and simple; used for matrices up to
//!   [`JACOBI_MAX`] on a side.
//! - [`symmetric_topk`]: block subspace iteration with Rayleigh-Ritz
//!   extraction for the leading eigenpairs of large matrices. Each sweep is
//!   GEMM-dominated, so covariance sizes in the thousands stay fast.

use ndarray::{s, Array1, Array2, ArrayView2};
use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Largest side length handed to the Jacobi solver by callers.
pub(crate) const JACOBI_MAX: usize = 512;

/// Full eigendecomposition of a symmetric matrix via cyclic Jacobi sweeps.
///
/// Returns `(eigenvalues, eigenvectors)` sorted by descending eigenvalue;
/// eigenvector `i` is column `i`.
pub(crate) fn symmetric_eigen_desc(matrix: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "symmetric eigensolver needs a square matrix");
    let mut a = matrix.to_owned();
    let mut v = Array2::<f64>::eye(n);
    if n <= 1 {
        return (a.diag().to_owned(), v);
    }

    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let tol = 1e-15 * scale;
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for p in 0..n - 1 {
            for q in p + 1..n {
                off += a[[p, q]] * a[[p, q]];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[[p, p]];
                let aqq = a[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = {
                    let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
                    sign / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;

                a[[p, p]] = app - t * apq;
                a[[q, q]] = aqq + t * apq;
                a[[p, q]] = 0.0;
                a[[q, p]] = 0.0;
                for k in 0..n {
                    if k != p && k != q {
                        let akp = a[[k, p]];
                        let akq = a[[k, q]];
                        a[[k, p]] = c * akp - sn * akq;
                        a[[p, k]] = a[[k, p]];
                        a[[k, q]] = sn * akp + c * akq;
                        a[[q, k]] = a[[k, q]];
                    }
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - sn * vkq;
                    v[[k, q]] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // Descending by eigenvalue; index ties keep original order for determinism.
    order.sort_by(|&i, &j| a[[j, j]].partial_cmp(&a[[i, i]]).unwrap().then(i.cmp(&j)));
    let values = Array1::from_iter(order.iter().map(|&i| a[[i, i]]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    (values, vectors)
}

/// Leading `k` eigenpairs of a large symmetric positive semi-definite matrix
/// by block subspace iteration with Rayleigh-Ritz extraction.
///
/// Deterministic: the start block comes from a fixed-seed generator, and the
/// sweep loop has no data-dependent ordering. Ritz values are returned in
/// descending order, so downstream variance ordering is exact by
/// construction.
pub(crate) fn symmetric_topk(matrix: ArrayView2<f64>, k: usize) -> (Array1<f64>, Array2<f64>) {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols());
    assert!(k >= 1 && k <= n);
    if n <= JACOBI_MAX {
        let (vals, vecs) = symmetric_eigen_desc(matrix);
        return (
            vals.slice(s![..k]).to_owned(),
            vecs.slice(s![.., ..k]).to_owned(),
        );
    }

    let oversample = (k / 2).clamp(8, 64);
    let block = (k + oversample).min(n);

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ba51_5000_0001);
    let mut v = Array2::<f64>::zeros((n, block));
    for x in v.iter_mut() {
        *x = rng.sample::<f64, _>(StandardNormal);
    }
    orthonormalize_columns(&mut v);

    let mut prev: Option<Array1<f64>> = None;
    let max_sweeps = 400;
    for sweep in 0..max_sweeps {
        let mut y = matrix.dot(&v);
        orthonormalize_columns(&mut y);
        let ay = matrix.dot(&y);
        let t = y.t().dot(&ay);
        let (theta, u) = symmetric_eigen_desc(t.view());
        v = y.dot(&u);

        let top = theta.slice(s![..k]).to_owned();
        if let Some(p) = &prev {
            let scale = top[0].abs().max(1e-300);
            let delta = top
                .iter()
                .zip(p.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            if delta <= 1e-12 * scale && sweep >= 3 {
                return (top, v.slice(s![.., ..k]).to_owned());
            }
        }
        prev = Some(top);
    }
    let theta = prev.expect("at least one sweep ran");
    (theta, v.slice(s![.., ..k]).to_owned())
}

/// In-place modified Gram-Schmidt with a second pass for stability.
///
/// Columns that collapse to (numerical) zero are replaced by canonical basis
/// vectors orthogonalized against the block, keeping the result deterministic
/// on rank-deficient input.
pub(crate) fn orthonormalize_columns(v: &mut Array2<f64>) {
    let (n, cols) = v.dim();
    for j in 0..cols {
        for _pass in 0..2 {
            for i in 0..j {
                let proj = v.column(i).dot(&v.column(j));
                let vi = v.column(i).to_owned();
                v.column_mut(j).scaled_add(-proj, &vi);
            }
        }
        let norm = v.column(j).dot(&v.column(j)).sqrt();
        if norm > 1e-12 {
            v.column_mut(j).mapv_inplace(|x| x / norm);
            continue;
        }
        // Degenerate column: deterministically complete the block.
        let mut replaced = false;
        for e in 0..n {
            v.column_mut(j).fill(0.0);
            v[[e, j]] = 1.0;
            for i in 0..j {
                let proj = v.column(i).dot(&v.column(j));
                let vi = v.column(i).to_owned();
                v.column_mut(j).scaled_add(-proj, &vi);
            }
            let norm = v.column(j).dot(&v.column(j)).sqrt();
            if norm > 1e-6 {
                v.column_mut(j).mapv_inplace(|x| x / norm);
                replaced = true;
                break;
            }
        }
        assert!(replaced, "could not complete an orthonormal block");
    }
}
