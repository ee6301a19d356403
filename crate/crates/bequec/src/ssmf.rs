//! Membership extraction from the estimated subspace.
//!
//! The rows of the subspace estimate live (up to noise) in the convex hull of
//! K extreme rows belonging to anchor nodes. SPA picks those rows greedily;
//! the membership matrix is then recovered by inverting the anchor submatrix,
//! either directly or through simplex-constrained least squares.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Residual rows below `SPA_TOL * max_initial_norm` count as numerically zero.
const SPA_TOL: f64 = 1e-12;
/// Condition number of the anchor submatrix above which a warning is logged.
const COND_WARN: f64 = 1e10;
/// Constrained solver iteration cap and movement stopping threshold.
const CLS_MAX_ITERS: usize = 2000;
const CLS_MOVE_TOL: f64 = 1e-10;

/// Anchor rows selected by SPA.
#[derive(Debug, Clone)]
pub struct AnchorSet {
    /// Node indices in selection order.
    pub indices: Vec<usize>,
    /// `K x K` matrix of the corresponding rows of the input.
    pub g_hat: DMatrix<f64>,
}

/// Successive projection: greedily selects `k` rows of `u_hat` by maximum
/// residual norm, projecting the rest onto the orthogonal complement of each
/// pick. Ties go to the lower row index.
pub fn spa(u_hat: &DMatrix<f64>, k: usize) -> Result<AnchorSet> {
    let n = u_hat.nrows();
    if k == 0 {
        return Err(Error::Parameter("k must be at least 1".into()));
    }
    if n < k {
        return Err(Error::Parameter(format!(
            "need at least {k} rows, got {n}"
        )));
    }

    let mut resid = u_hat.clone();
    let mut indices = Vec::with_capacity(k);
    let mut scale = 0.0_f64;
    for step in 0..k {
        let mut best = 0;
        let mut best_norm = -1.0;
        for i in 0..n {
            let norm = resid.row(i).norm();
            if norm > best_norm {
                best_norm = norm;
                best = i;
            }
        }
        if step == 0 {
            scale = best_norm;
        }
        if best_norm <= SPA_TOL * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::RankDeficient(format!(
                "residual rows vanish after {step} of {k} picks"
            )));
        }
        indices.push(best);
        let dir = resid.row(best).transpose() / best_norm;
        // project every row onto the complement of the picked direction
        let weights = &resid * &dir; // n x 1
        for i in 0..n {
            let w = weights[i];
            for c in 0..resid.ncols() {
                resid[(i, c)] -= w * dir[c];
            }
        }
    }

    let mut g_hat = DMatrix::zeros(k, u_hat.ncols());
    for (r, &idx) in indices.iter().enumerate() {
        g_hat.set_row(r, &u_hat.row(idx));
    }
    let sv = g_hat.clone().svd(false, false).singular_values;
    let cond = sv.max() / sv.min().max(f64::MIN_POSITIVE);
    if cond > COND_WARN {
        warn!("anchor matrix condition number {cond:e}; recovery may be unstable");
    }
    Ok(AnchorSet { indices, g_hat })
}

/// Unconstrained recovery `M = G^{-T} U^T`.
pub fn membership_direct(u_hat: &DMatrix<f64>, g_hat: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_dims(u_hat, g_hat)?;
    let lu = g_hat.transpose().lu();
    lu.solve(&u_hat.transpose())
        .ok_or_else(|| Error::RankDeficient("anchor matrix is singular".into()))
}

/// Simplex-constrained recovery: per node `n`, minimizes
/// `|| u_hat(n,:)^T - g_hat^T m ||^2` over the probability simplex by
/// accelerated projected gradient.
pub fn membership_constrained(
    u_hat: &DMatrix<f64>,
    g_hat: &DMatrix<f64>,
) -> Result<DMatrix<f64>> {
    check_dims(u_hat, g_hat)?;
    let k = g_hat.nrows();
    let n = u_hat.nrows();
    let smax = g_hat.clone().svd(false, false).singular_values.max();
    if smax <= 0.0 {
        return Err(Error::RankDeficient("anchor matrix is zero".into()));
    }
    let step = 1.0 / (smax * smax);
    let gt = g_hat.transpose();
    let gram = g_hat * &gt; // k x k, gradient = gram * m - g_hat * u

    let mut out = DMatrix::zeros(k, n);
    let mut stuck = 0usize;
    for col in 0..n {
        let target = g_hat * u_hat.row(col).transpose(); // k x 1
        let mut m = DVector::from_element(k, 1.0 / k as f64);
        let mut y = m.clone();
        let mut t = 1.0_f64;
        let mut converged = false;
        for _ in 0..CLS_MAX_ITERS {
            let grad = &gram * &y - &target;
            let next = simplex_project(&(&y - grad * step));
            let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
            let movement = (&next - &m).amax();
            y = &next + (&next - &m) * ((t - 1.0) / t_next);
            m = next;
            t = t_next;
            if movement < CLS_MOVE_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            stuck += 1;
        }
        out.set_column(col, &m);
    }
    if stuck > 0 {
        warn!("constrained solver hit the iteration cap on {stuck} columns; best iterates kept");
    }
    Ok(out)
}

/// Euclidean projection onto the probability simplex by sort-and-threshold.
pub fn simplex_project(v: &DVector<f64>) -> DVector<f64> {
    let k = v.len();
    let mut sorted: Vec<f64> = v.iter().copied().collect();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted.iter().enumerate() {
        cumsum += u;
        let candidate = (cumsum - 1.0) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    DVector::from_fn(k, |i, _| (v[i] - theta).max(0.0))
}

fn check_dims(u_hat: &DMatrix<f64>, g_hat: &DMatrix<f64>) -> Result<()> {
    let k = g_hat.nrows();
    if g_hat.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "anchor matrix must be square, got {k}x{}",
            g_hat.ncols()
        )));
    }
    if u_hat.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "u_hat has {} columns, expected {k}",
            u_hat.ncols()
        )));
    }
    Ok(())
}
