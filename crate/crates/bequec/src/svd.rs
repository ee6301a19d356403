//! Truncated singular value decomposition.
//!
//! Small matrices go through nalgebra's dense SVD. Larger ones use subspace
//! iteration on the Gram matrix of the shorter side, run to machine-precision
//! convergence, so both paths return the exact top-k triplets up to roundoff.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Dimension at or below which the dense SVD path is used.
const DENSE_CUTOFF: usize = 160;
/// Oversampling columns for the iterative path.
const OVERSAMPLE: usize = 10;
/// Relative eigenvalue-change tolerance declaring the iteration converged.
const CONV_TOL: f64 = 1e-15;
const MAX_ITERS: usize = 600;
/// Fixed stream for the iteration's starting block, so results depend only on
/// the input matrix.
const INIT_SEED: u64 = 0x5eed_5eed_5eed_5eed;

/// Top-k singular triplets `u diag(sigma) v^T`.
#[derive(Debug, Clone)]
pub struct SvdPair {
    /// Left factor, `rows x k`, orthonormal columns.
    pub u: DMatrix<f64>,
    /// Singular values, nonincreasing.
    pub sigma: DVector<f64>,
    /// Right factor, `cols x k`, orthonormal columns.
    pub v: DMatrix<f64>,
}

impl SvdPair {
    /// Splits the left factor into a top slab of `rows_top` rows and the rest.
    pub fn split_u(&self, rows_top: usize) -> (DMatrix<f64>, DMatrix<f64>) {
        let top = self.u.rows(0, rows_top).into_owned();
        let bottom = self.u.rows(rows_top, self.u.nrows() - rows_top).into_owned();
        (top, bottom)
    }
}

/// Computes the top-`k` singular triplets of `a`.
pub fn truncated_svd_k(a: &DMatrix<f64>, k: usize) -> Result<SvdPair> {
    let (m, n) = a.shape();
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if k > m.min(n) {
        return Err(Error::Parameter(format!(
            "k = {k} exceeds min dimension of a {m}x{n} matrix"
        )));
    }
    if m.min(n) <= DENSE_CUTOFF {
        dense_topk(a, k)
    } else {
        iterative_topk(a, k)
    }
}

fn dense_topk(a: &DMatrix<f64>, k: usize) -> Result<SvdPair> {
    let svd = a.clone().svd(true, true);
    let u_full = svd.u.expect("requested u");
    let vt_full = svd.v_t.expect("requested v_t");
    let s = &svd.singular_values;

    // nalgebra does not guarantee descending order.
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&i, &j| s[j].partial_cmp(&s[i]).expect("finite singular values"));

    let mut u = DMatrix::zeros(a.nrows(), k);
    let mut v = DMatrix::zeros(a.ncols(), k);
    let mut sigma = DVector::zeros(k);
    for (out, &idx) in order.iter().take(k).enumerate() {
        u.set_column(out, &u_full.column(idx));
        v.set_column(out, &vt_full.row(idx).transpose());
        sigma[out] = s[idx];
    }
    Ok(SvdPair { u, sigma, v })
}

/// Subspace iteration on the Gram matrix of the shorter side, with a
/// Rayleigh-Ritz step at convergence. The two-sided products `a^T (a x)` avoid
/// forming the Gram matrix explicitly.
fn iterative_topk(a: &DMatrix<f64>, k: usize) -> Result<SvdPair> {
    let (m, n) = a.shape();
    let tall = m >= n;
    let side = m.min(n);
    let d = (k + OVERSAMPLE).min(side);

    let mut rng = ChaCha8Rng::seed_from_u64(INIT_SEED);
    let mut x = DMatrix::from_fn(side, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    orthonormalize(&mut x);

    let apply = |x: &DMatrix<f64>| -> DMatrix<f64> {
        if tall {
            a.tr_mul(&(a * x))
        } else {
            a * &a.tr_mul(x)
        }
    };

    let mut prev_evals: Option<DVector<f64>> = None;
    for _ in 0..MAX_ITERS {
        let gx = apply(&x);
        // Ritz values of the current block, before re-orthonormalization.
        let t = x.tr_mul(&gx);
        let evals = sorted_eigenvalues(&t);
        let mut y = gx;
        orthonormalize(&mut y);
        x = y;

        if let Some(prev) = &prev_evals {
            let scale = evals[0].max(f64::MIN_POSITIVE);
            let drift = (0..k)
                .map(|i| (evals[i] - prev[i]).abs())
                .fold(0.0_f64, f64::max);
            if drift <= CONV_TOL * scale {
                break;
            }
        }
        prev_evals = Some(evals);
    }

    // Rayleigh-Ritz on the converged block.
    let gx = apply(&x);
    let t = x.tr_mul(&gx);
    let sym = (&t + t.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[j]
            .partial_cmp(&eig.eigenvalues[i])
            .expect("finite eigenvalues")
    });

    let mut w = DMatrix::zeros(d, k);
    let mut sigma = DVector::zeros(k);
    for (out, &idx) in order.iter().take(k).enumerate() {
        w.set_column(out, &eig.eigenvectors.column(idx));
        sigma[out] = eig.eigenvalues[idx].max(0.0).sqrt();
    }
    let short_side = &x * &w;

    // Recover the long side as a * v / sigma (or a^T u / sigma).
    let mut long_side = if tall {
        a * &short_side
    } else {
        a.tr_mul(&short_side)
    };
    for j in 0..k {
        if sigma[j] > f64::MIN_POSITIVE {
            long_side.column_mut(j).scale_mut(1.0 / sigma[j]);
        }
    }
    orthonormalize(&mut long_side);

    let (u, v) = if tall {
        (long_side, short_side)
    } else {
        (short_side, long_side)
    };
    Ok(SvdPair { u, sigma, v })
}

/// In-place orthonormalization by modified Gram-Schmidt with one
/// re-orthogonalization pass. Columns that vanish are replaced by fresh
/// deterministic directions so the basis keeps full width.
fn orthonormalize(x: &mut DMatrix<f64>) {
    let (rows, cols) = x.shape();
    let mut rng = ChaCha8Rng::seed_from_u64(INIT_SEED ^ 1);
    for j in 0..cols {
        for _pass in 0..2 {
            for i in 0..j {
                let dot = x.column(j).dot(&x.column(i));
                let prev = x.column(i).into_owned();
                x.column_mut(j).axpy(-dot, &prev, 1.0);
            }
        }
        let mut norm = x.column(j).norm();
        if norm <= 1e-300 {
            let fresh = DVector::from_fn(rows, |_, _| rng.sample::<f64, _>(StandardNormal));
            x.set_column(j, &fresh);
            for i in 0..j {
                let dot = x.column(j).dot(&x.column(i));
                let prev = x.column(i).into_owned();
                x.column_mut(j).axpy(-dot, &prev, 1.0);
            }
            norm = x.column(j).norm();
        }
        x.column_mut(j).scale_mut(1.0 / norm);
    }
}

fn sorted_eigenvalues(t: &DMatrix<f64>) -> DVector<f64> {
    let sym = (t + t.transpose()) * 0.5;
    let mut evals: Vec<f64> = sym.symmetric_eigen().eigenvalues.iter().copied().collect();
    evals.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    DVector::from_vec(evals)
}
