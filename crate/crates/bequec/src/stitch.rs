//! Subspace stitching: estimate `range(M^T)` from the queried block chain.
//!
//! Each queried pair of blocks sharing a column group is stacked and
//! decomposed; the split left factor carries one slab of the target subspace
//! per row group, expressed in a local basis. `pair_stitch` transports a slab
//! into the reference frame of an already-estimated neighbor, and
//! `estimate_range` chains these transports outward from the middle of the
//! plan.

use nalgebra::DMatrix;

use crate::blocks::BlockSet;
use crate::error::{Error, Result};
use crate::query_plan::QueryPlan;
use crate::svd::{truncated_svd_k, SvdPair};

/// A block pair is degenerate when `sigma_k(C) < RANK_TOL * sigma_1(C)`.
const RANK_TOL: f64 = 1e-10;
/// Singular values below `PINV_TOL * sigma_1` are treated as zero in the
/// pseudo-inverse.
const PINV_TOL: f64 = 1e-12;

/// Estimated basis of `range(M^T)`, one slab per group.
#[derive(Debug, Clone)]
pub struct SubspaceEstimate {
    slabs: Vec<DMatrix<f64>>,
    assembled: DMatrix<f64>,
}

impl SubspaceEstimate {
    /// Builds the estimate from per-group slabs, placing each slab's rows at
    /// the node indices of its group.
    pub fn from_slabs(slabs: Vec<DMatrix<f64>>, plan: &QueryPlan) -> Result<Self> {
        let n = plan.num_nodes();
        if slabs.len() != plan.num_groups() {
            return Err(Error::DimensionMismatch(format!(
                "{} slabs for {} groups",
                slabs.len(),
                plan.num_groups()
            )));
        }
        let k = slabs[0].ncols();
        let mut assembled = DMatrix::zeros(n, k);
        for (l, slab) in slabs.iter().enumerate() {
            let group = plan.partition().group(l);
            if slab.nrows() != group.len() || slab.ncols() != k {
                return Err(Error::DimensionMismatch(format!(
                    "slab {l} is {}x{}, expected {}x{k}",
                    slab.nrows(),
                    slab.ncols(),
                    group.len()
                )));
            }
            for (r, &node) in group.iter().enumerate() {
                for c in 0..k {
                    assembled[(node, c)] = slab[(r, c)];
                }
            }
        }
        Ok(Self { slabs, assembled })
    }

    /// Per-group slabs in group order.
    pub fn slabs(&self) -> &[DMatrix<f64>] {
        &self.slabs
    }

    /// The `N x K` estimate with rows in node-index order.
    pub fn assembled(&self) -> &DMatrix<f64> {
        &self.assembled
    }
}

/// Transports the unknown slab of a stacked block pair into the frame of a
/// known reference slab.
///
/// Stacks `C = [a_lower; a_upper]` (both sharing a column group), takes the
/// top-`k` SVD, splits the left factor into `(u_lower, u_upper)` and returns
/// `u_lower * pinv(u_upper) * u_ref`.
pub fn pair_stitch(
    a_lower: &DMatrix<f64>,
    a_upper: &DMatrix<f64>,
    u_ref: &DMatrix<f64>,
    k: usize,
) -> Result<DMatrix<f64>> {
    if a_lower.ncols() != a_upper.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "stacked blocks must share a column group: {} vs {} columns",
            a_lower.ncols(),
            a_upper.ncols()
        )));
    }
    if u_ref.nrows() != a_upper.nrows() || u_ref.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "u_ref is {}x{}, expected {}x{k}",
            u_ref.nrows(),
            u_ref.ncols(),
            a_upper.nrows()
        )));
    }
    let svd = stacked_svd(a_lower, a_upper, k)?;
    let (u_lower, u_upper) = svd.split_u(a_lower.nrows());
    Ok(&u_lower * pinv(&u_upper) * u_ref)
}

/// Top-`k` SVD of the vertical stack with the degeneracy gate.
fn stacked_svd(top: &DMatrix<f64>, bottom: &DMatrix<f64>, k: usize) -> Result<SvdPair> {
    let mut c = DMatrix::zeros(top.nrows() + bottom.nrows(), top.ncols());
    c.rows_mut(0, top.nrows()).copy_from(top);
    c.rows_mut(top.nrows(), bottom.nrows()).copy_from(bottom);
    let svd = truncated_svd_k(&c, k)?;
    let ratio = svd.sigma[k - 1] / svd.sigma[0].max(f64::MIN_POSITIVE);
    if svd.sigma[0] <= 0.0 || ratio < RANK_TOL {
        return Err(Error::DegenerateSvd { k, ratio });
    }
    Ok(svd)
}

/// Moore-Penrose pseudo-inverse via the thin SVD.
fn pinv(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, true);
    let u = svd.u.expect("requested u");
    let vt = svd.v_t.expect("requested v_t");
    let smax = svd.singular_values.max();
    let mut inv = DMatrix::zeros(vt.nrows(), u.ncols());
    for i in 0..svd.singular_values.len() {
        let s = svd.singular_values[i];
        if s > PINV_TOL * smax {
            inv[(i, i)] = 1.0 / s;
        }
    }
    vt.transpose() * inv * u.transpose()
}

/// Runs the stitching chain over a plan: seed the middle anchor pair with one
/// stacked SVD, then transport slabs forward and backward along the chain.
pub fn estimate_range(blocks: &BlockSet, plan: &QueryPlan, k: usize) -> Result<SubspaceEstimate> {
    let l = plan.num_groups();
    if l < 2 {
        return Err(Error::InvalidPlan(
            "estimate_range needs at least 2 groups; decompose the single block directly".into(),
        ));
    }
    for g in 0..l {
        if plan.partition().group(g).len() < k {
            return Err(Error::InvalidPlan(format!(
                "group {g} has fewer than K = {k} nodes"
            )));
        }
    }

    let anchors = plan.anchors();
    let stitches = plan.stitches();
    // Middle seed index: anchor T covers row groups l_T and l_{T+1} at once.
    let t = l / 2 - 1;

    let mut slabs: Vec<Option<DMatrix<f64>>> = vec![None; l];

    let (la, ma) = anchors[t];
    let (ls, _) = stitches[t];
    let a1 = blocks.block(la, ma)?;
    let a2 = blocks.block(ls, ma)?;
    let rows_top = a1.nrows();
    let seed = stacked_svd(&a1, &a2, k).map_err(|e| name_pair(e, la, ma))?;
    let (u_top, u_bottom) = seed.split_u(rows_top);
    slabs[la] = Some(u_top);
    slabs[ls] = Some(u_bottom);

    // Forward: each step resolves the stitch row group above anchor r.
    for r in t + 1..l - 1 {
        let (la, ma) = anchors[r];
        let (lt, _) = stitches[r];
        let target = blocks.block(lt, ma)?;
        let anchor = blocks.block(la, ma)?;
        let u_ref = slabs[la].as_ref().expect("forward chain order");
        let slab =
            pair_stitch(&target, &anchor, u_ref, k).map_err(|e| name_pair(e, lt, ma))?;
        slabs[lt] = Some(slab);
    }

    // Backward: each step resolves the anchor row group below stitch r.
    for r in (1..=t).rev() {
        let (la, ma) = anchors[r - 1];
        let lk = anchors[r].0;
        let target = blocks.block(la, ma)?;
        let known = blocks.block(lk, ma)?;
        let u_ref = slabs[lk].as_ref().expect("backward chain order");
        let slab = pair_stitch(&target, &known, u_ref, k).map_err(|e| name_pair(e, la, ma))?;
        slabs[la] = Some(slab);
    }

    let slabs: Vec<DMatrix<f64>> = slabs
        .into_iter()
        .enumerate()
        .map(|(g, s)| s.ok_or_else(|| Error::InvalidPlan(format!("group {g} never stitched"))))
        .collect::<Result<_>>()?;
    SubspaceEstimate::from_slabs(slabs, plan)
}

fn name_pair(e: Error, row: usize, col: usize) -> Error {
    match e {
        Error::DegenerateSvd { k, ratio } => Error::DegenerateBlock {
            row,
            col,
            k,
            sigma: ratio,
        },
        other => other,
    }
}
