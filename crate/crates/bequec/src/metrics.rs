//! Evaluation metrics and permutation alignment.
//!
//! Membership estimates are only identifiable up to a relabeling of the
//! clusters, so every comparison first aligns rows (or labels) with the
//! Hungarian algorithm and then scores the aligned pair.

use log::warn;
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph_model::MembershipMatrix;

/// An optimal row-to-row assignment and its objective value.
#[derive(Debug, Clone)]
pub struct AlignmentResult {
    /// `permutation[i]` is the column assigned to row `i`.
    pub permutation: Vec<usize>,
    /// Total cost under that assignment.
    pub cost: f64,
}

/// Spectral-norm distance between `range(u_hat)` and `range(M^T)`.
///
/// Computes `|| P_M_perp Q_U ||_2` where `Q_U` is an orthonormal basis of
/// `u_hat` and `P_M_perp` projects onto the orthogonal complement of
/// `range(M^T)`. Returns a value in `[0, 1]`.
pub fn subspace_distance(u_hat: &DMatrix<f64>, m: &MembershipMatrix) -> Result<f64> {
    if u_hat.nrows() != m.n() {
        return Err(Error::DimensionMismatch(format!(
            "u_hat has {} rows, membership has {} nodes",
            u_hat.nrows(),
            m.n()
        )));
    }
    let q_u = orthonormal_basis(u_hat)?;
    let mm = m.matrix(); // K x N

    // M M^T is K x K; solve instead of forming the N x N projector.
    let gram = mm * mm.transpose();
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("membership matrix M has rank below K".into()))?;
    let m_qu = mm * &q_u; // K x k
    let coeff = chol.solve(&m_qu);
    let resid = &q_u - mm.transpose() * coeff; // N x k
    let top = resid.svd(false, false).singular_values.max();
    Ok(top.clamp(0.0, 1.0))
}

/// Orthonormal basis of the column span, failing on rank deficiency.
fn orthonormal_basis(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = a.ncols();
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("requested u");
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin < 1e-12 * smax {
        return Err(Error::RankDeficient(format!(
            "column rank below {k}: sigma ratio {:e}",
            smin / smax.max(f64::MIN_POSITIVE)
        )));
    }
    // nalgebra's thin SVD U already spans the column space.
    Ok(u)
}

/// Minimum-cost assignment on a square cost matrix, O(K^3).
pub fn hungarian(cost: &DMatrix<f64>) -> Result<AlignmentResult> {
    let n = cost.nrows();
    if cost.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "cost matrix must be square, got {}x{}",
            n,
            cost.ncols()
        )));
    }
    if n == 0 {
        return Ok(AlignmentResult {
            permutation: Vec::new(),
            cost: 0.0,
        });
    }

    // Shortest-augmenting-path formulation with row/column potentials;
    // indices are 1-based internally with 0 as the virtual start column.
    let inf = f64::INFINITY;
    let mut pot_u = vec![0.0; n + 1];
    let mut pot_v = vec![0.0; n + 1];
    let mut matched = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[(i0 - 1, j - 1)] - pot_u[i0] - pot_v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    pot_u[matched[j]] += delta;
                    pot_v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched[j0] = matched[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut permutation = vec![0usize; n];
    for j in 1..=n {
        permutation[matched[j] - 1] = j - 1;
    }
    let total = (0..n).map(|i| cost[(i, permutation[i])]).sum();
    Ok(AlignmentResult {
        permutation,
        cost: total,
    })
}

/// Row-normalized squared distances used as the MSE assignment cost.
///
/// Entry `(i, j)` is the squared distance between normalized row `i` of
/// `m_hat` and normalized row `j` of `m`.
fn normalized_row_cost(m_hat: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = m.nrows();
    let mut cost = DMatrix::zeros(k, k);
    let rows_hat = normalized_rows(m_hat)?;
    let rows_ref = normalized_rows(m)?;
    for i in 0..k {
        for j in 0..k {
            cost[(i, j)] = (&rows_hat[i] - &rows_ref[j]).norm_squared();
        }
    }
    Ok(cost)
}

fn normalized_rows(m: &DMatrix<f64>) -> Result<Vec<DVector<f64>>> {
    m.row_iter()
        .enumerate()
        .map(|(i, row)| {
            let v = row.transpose();
            let norm = v.norm();
            if norm <= 0.0 {
                return Err(Error::UndefinedMetric(format!(
                    "row {i} has zero norm; normalized MSE undefined"
                )));
            }
            Ok(v / norm)
        })
        .collect()
}

/// MSE between row-normalized membership matrices, minimized over cluster
/// relabelings, together with the minimizing assignment.
pub fn mse_aligned(m_hat: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<(f64, AlignmentResult)> {
    check_same_shape(m_hat, m)?;
    let cost = normalized_row_cost(m_hat, m)?;
    let align = hungarian(&cost)?;
    let value = align.cost / m.nrows() as f64;
    Ok((value, align))
}

/// Permutation-minimized mean squared error of row-normalized memberships.
pub fn mse(m_hat: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64> {
    Ok(mse_aligned(m_hat, m)?.0)
}

/// `min_P ||P M - M_hat||_F / ||M||_F` over row permutations `P`.
pub fn relative_error(m_hat: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(m_hat, m)?;
    let k = m.nrows();
    let mut cost = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            cost[(i, j)] = (m_hat.row(i) - m.row(j)).norm_squared();
        }
    }
    let align = hungarian(&cost)?;
    let denom = m.norm();
    if denom <= 0.0 {
        return Err(Error::UndefinedMetric("reference matrix has zero norm".into()));
    }
    Ok(align.cost.max(0.0).sqrt() / denom)
}

/// Spearman rank correlation averaged over MSE-aligned membership rows.
pub fn spearman_src(m_hat: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<f64> {
    let (_, align) = mse_aligned(m_hat, m)?;
    let k = m.nrows();
    let mut total = 0.0;
    for i in 0..k {
        let a: Vec<f64> = m_hat.row(i).iter().copied().collect();
        let b: Vec<f64> = m.row(align.permutation[i]).iter().copied().collect();
        match spearman(&a, &b) {
            Some(r) => total += r,
            None => warn!("constant membership row {i}; SRC contribution set to 0"),
        }
    }
    Ok(total / k as f64)
}

/// Spearman correlation with average ranks for ties; `None` when either
/// sequence is constant.
fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    let ra = average_ranks(a);
    let rb = average_ranks(b);
    pearson(&ra, &rb)
}

fn average_ranks(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].partial_cmp(&x[b]).expect("finite values"));
    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && x[idx[j + 1]] == x[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for t in i..=j {
            ranks[idx[t]] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (&x, &y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va <= 0.0 || vb <= 0.0 {
        return None;
    }
    Some(cov / (va * vb).sqrt())
}

/// Hard labels by per-column argmax; ties go to the lowest index.
pub fn round_to_labels(m_hat: &DMatrix<f64>) -> Vec<usize> {
    m_hat
        .column_iter()
        .map(|col| {
            let mut best = 0;
            for i in 1..col.len() {
                if col[i] > col[best] {
                    best = i;
                }
            }
            best
        })
        .collect()
}

/// Contingency table after mapping each labeling's distinct values to dense
/// indices, padded square.
fn contingency(labels_hat: &[usize], labels: &[usize]) -> Result<DMatrix<f64>> {
    if labels_hat.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "label vectors of length {} and {}",
            labels_hat.len(),
            labels.len()
        )));
    }
    let dense = |ls: &[usize]| -> Vec<usize> {
        let mut uniq: Vec<usize> = ls.to_vec();
        uniq.sort_unstable();
        uniq.dedup();
        ls.iter()
            .map(|l| uniq.binary_search(l).expect("member"))
            .collect()
    };
    let a = dense(labels_hat);
    let b = dense(labels);
    let ka = a.iter().copied().max().map_or(0, |m| m + 1);
    let kb = b.iter().copied().max().map_or(0, |m| m + 1);
    let side = ka.max(kb);
    let mut table = DMatrix::zeros(side, side);
    for (&i, &j) in a.iter().zip(&b) {
        table[(i, j)] += 1.0;
    }
    Ok(table)
}

/// Best-permutation clustering accuracy, in percent.
pub fn clustering_accuracy(labels_hat: &[usize], labels: &[usize]) -> Result<f64> {
    let table = contingency(labels_hat, labels)?;
    if labels.is_empty() {
        return Err(Error::UndefinedMetric("empty label vectors".into()));
    }
    // Hungarian minimizes, so negate to maximize matches.
    let align = hungarian(&(-&table))?;
    Ok(-align.cost / labels.len() as f64 * 100.0)
}

/// Normalized mutual information with sqrt-of-entropies normalization.
/// Degenerate labelings with zero entropy yield 0.
pub fn nmi(labels_hat: &[usize], labels: &[usize]) -> Result<f64> {
    let table = contingency(labels_hat, labels)?;
    let n: f64 = table.sum();
    if n <= 0.0 {
        return Err(Error::UndefinedMetric("empty label vectors".into()));
    }
    let rows: Vec<f64> = table.row_iter().map(|r| r.sum()).collect();
    let cols: Vec<f64> = table.column_iter().map(|c| c.sum()).collect();
    let mut mi = 0.0;
    for i in 0..table.nrows() {
        for j in 0..table.ncols() {
            let nij = table[(i, j)];
            if nij > 0.0 {
                mi += nij / n * ((nij * n) / (rows[i] * cols[j])).ln();
            }
        }
    }
    let entropy = |margin: &[f64]| -> f64 {
        margin
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| -(v / n) * (v / n).ln())
            .sum()
    };
    let denom = (entropy(&rows) * entropy(&cols)).sqrt();
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((mi / denom).clamp(0.0, 1.0))
}

fn check_same_shape(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

/// All permutations of `0..k`, for brute-force oracles in tests.
#[cfg(test)]
pub(crate) fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..k).collect();
    heap_permute(&mut items, k, &mut out);
    out
}

#[cfg(test)]
fn heap_permute(items: &mut Vec<usize>, n: usize, out: &mut Vec<Vec<usize>>) {
    if n <= 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..n {
        heap_permute(items, n - 1, out);
        if n % 2 == 0 {
            items.swap(i, n - 1);
        } else {
            items.swap(0, n - 1);
        }
    }
}
