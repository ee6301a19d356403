//! Block edge-query patterns.
//!
//! A query plan partitions the `N` nodes into `L` disjoint groups and fixes a
//! chain of queried blocks: `L` anchor blocks `A(l_r, m_r)` plus `L - 1`
//! stitch blocks `A(l_{r+1}, m_r)` that share a column group with their
//! predecessor. Group and node indices are 0-based throughout.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Disjoint grouping of node indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Group id of each node, `assignment[node] in 0..l`.
    assignment: Vec<usize>,
    /// Member nodes of each group, in node-index order.
    groups: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds a partition from a per-node group assignment.
    pub fn from_assignment(assignment: Vec<usize>, l: usize) -> Result<Self> {
        if l == 0 {
            return Err(Error::InvalidPlan("group count must be at least 1".into()));
        }
        let mut groups = vec![Vec::new(); l];
        for (node, &g) in assignment.iter().enumerate() {
            if g >= l {
                return Err(Error::InvalidPlan(format!(
                    "node {node} assigned to group {g}, but L = {l}"
                )));
            }
            groups[g].push(node);
        }
        if let Some(empty) = groups.iter().position(Vec::is_empty) {
            return Err(Error::InvalidPlan(format!("group {empty} is empty")));
        }
        Ok(Self { assignment, groups })
    }

    pub fn num_nodes(&self) -> usize {
        self.assignment.len()
    }

    pub fn num_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, l: usize) -> &[usize] {
        &self.groups[l]
    }

    pub fn group_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }
}

/// A validated edge-query plan: partition plus the anchor/stitch block chain.
#[derive(Debug, Clone)]
pub struct QueryPlan {
    partition: Partition,
    /// `(l_r, m_r)` for `r = 0..L`.
    anchors: Vec<(usize, usize)>,
    /// `(l_{r+1}, m_r)` for `r = 0..L-1`, derived from consecutive anchors.
    stitches: Vec<(usize, usize)>,
}

impl QueryPlan {
    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn anchors(&self) -> &[(usize, usize)] {
        &self.anchors
    }

    pub fn stitches(&self) -> &[(usize, usize)] {
        &self.stitches
    }

    pub fn num_groups(&self) -> usize {
        self.partition.num_groups()
    }

    pub fn num_nodes(&self) -> usize {
        self.partition.num_nodes()
    }

    /// All queried blocks as ordered `(row_group, col_group)` pairs, anchors
    /// first, without duplicates.
    pub fn queried_pairs(&self) -> Vec<(usize, usize)> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &p in self.anchors.iter().chain(self.stitches.iter()) {
            let key = (p.0.min(p.1), p.0.max(p.1));
            if seen.insert(key) {
                out.push(p);
            }
        }
        out
    }
}

/// One pass/fail condition inside a [`ValidationReport`].
#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Per-condition outcome of [`validate_plan`].
#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            let status = if c.passed { "pass" } else { "FAIL" };
            writeln!(f, "{status}  {}: {}", c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Builds the diagonal pattern: contiguous equal-size groups, anchor blocks on
/// the diagonal and stitch blocks on the first subdiagonal.
///
/// When `n` is not divisible by `l`, the first `n mod l` groups get one extra
/// node. `node_order`, when given, permutes which nodes land in which
/// contiguous slot.
pub fn diagonal_plan(n: usize, l: usize, node_order: Option<&[usize]>) -> Result<QueryPlan> {
    if l < 2 {
        return Err(Error::InvalidPlan(format!(
            "diagonal plan needs at least 2 groups, got {l}"
        )));
    }
    if n < l {
        return Err(Error::InvalidPlan(format!(
            "cannot split {n} nodes into {l} nonempty groups"
        )));
    }
    if let Some(order) = node_order {
        if order.len() != n {
            return Err(Error::InvalidPlan(format!(
                "node_order has {} entries, expected {n}",
                order.len()
            )));
        }
        let mut seen = vec![false; n];
        for &i in order {
            if i >= n || seen[i] {
                return Err(Error::InvalidPlan("node_order is not a permutation".into()));
            }
            seen[i] = true;
        }
    }

    let base = n / l;
    let rem = n % l;
    let mut assignment = vec![0usize; n];
    let mut pos = 0;
    for g in 0..l {
        let size = base + usize::from(g < rem);
        for _ in 0..size {
            let node = node_order.map_or(pos, |o| o[pos]);
            assignment[node] = g;
            pos += 1;
        }
    }
    let partition = Partition::from_assignment(assignment, l)?;

    let anchors: Vec<(usize, usize)> = (0..l).map(|r| (r, r)).collect();
    chain_plan_from_pairs(partition, anchors)
}

/// Builds a plan from an explicit anchor chain, deriving the stitch blocks
/// from consecutive anchors and checking the query-principle structure.
pub fn chain_plan_from_pairs(
    partition: Partition,
    anchors: Vec<(usize, usize)>,
) -> Result<QueryPlan> {
    let l = partition.num_groups();
    if anchors.len() != l {
        return Err(Error::InvalidPlan(format!(
            "expected {l} anchor pairs, got {}",
            anchors.len()
        )));
    }
    for (r, &(lr, mr)) in anchors.iter().enumerate() {
        if lr >= l || mr >= l {
            return Err(Error::InvalidPlan(format!(
                "anchor {r} = ({lr}, {mr}) out of range for L = {l}"
            )));
        }
    }
    let row_seq: BTreeSet<usize> = anchors.iter().map(|a| a.0).collect();
    if row_seq.len() != l {
        return Err(Error::InvalidPlan(
            "anchor row groups do not cover every group exactly once".into(),
        ));
    }
    for r in 0..l - 1 {
        if anchors[r + 1].0 == anchors[r].0 {
            return Err(Error::InvalidPlan(format!(
                "chain condition violated at r = {r}: l_{} == l_{}",
                r + 1,
                r
            )));
        }
    }
    let stitches = (0..l - 1).map(|r| (anchors[r + 1].0, anchors[r].1)).collect();
    Ok(QueryPlan {
        partition,
        anchors,
        stitches,
    })
}

/// Checks a plan against a cluster count `k`, reporting each condition
/// separately instead of failing fast.
pub fn validate_plan(plan: &QueryPlan, k: usize) -> ValidationReport {
    let l = plan.num_groups();
    let mut checks = Vec::new();

    let rows: BTreeSet<usize> = plan.anchors.iter().map(|a| a.0).collect();
    let coverage = rows.len() == l;
    checks.push(Check {
        name: "coverage",
        passed: coverage,
        detail: if coverage {
            format!("anchor row groups cover all {l} groups")
        } else {
            let missing: Vec<usize> = (0..l).filter(|g| !rows.contains(g)).collect();
            format!("groups {missing:?} never appear as an anchor row")
        },
    });

    let chain_ok = (0..l.saturating_sub(1)).all(|r| plan.anchors[r + 1].0 != plan.anchors[r].0);
    checks.push(Check {
        name: "chain",
        passed: chain_ok,
        detail: if chain_ok {
            "consecutive anchors use distinct row groups".into()
        } else {
            "some consecutive anchors share a row group".into()
        },
    });

    let too_small: Vec<(usize, usize)> = (0..l)
        .map(|g| (g, plan.partition.group(g).len()))
        .filter(|&(_, s)| s < k)
        .collect();
    checks.push(Check {
        name: "group sizes",
        passed: too_small.is_empty(),
        detail: if too_small.is_empty() {
            format!("every group has at least K = {k} nodes")
        } else {
            format!("group too small: {too_small:?} (need >= {k})")
        },
    });

    ValidationReport { checks }
}

/// Fraction of the `N (N - 1) / 2` node pairs covered by the queried blocks.
///
/// A diagonal block `(l, l)` covers `|S_l| (|S_l| - 1) / 2` pairs; an
/// off-diagonal block `(l, m)` covers `|S_l| |S_m|`. Symmetric duplicates
/// count once.
pub fn queried_fraction(plan: &QueryPlan) -> f64 {
    let n = plan.num_nodes();
    let mut covered: u128 = 0;
    for (l, m) in plan.queried_pairs() {
        let sl = plan.partition.group(l).len() as u128;
        if l == m {
            covered += sl * (sl - 1) / 2;
        } else {
            let sm = plan.partition.group(m).len() as u128;
            covered += sl * sm;
        }
    }
    let total = (n as u128) * (n as u128 - 1) / 2;
    covered as f64 / total as f64
}

/// On-disk form of a plan: `{"L": .., "assignment": [..], "anchors": [[l, m], ..]}`.
#[derive(Debug, Serialize, Deserialize)]
struct PlanFile {
    #[serde(rename = "L")]
    l: usize,
    assignment: Vec<usize>,
    anchors: Vec<(usize, usize)>,
}

impl QueryPlan {
    pub fn to_json(&self) -> Result<String> {
        let file = PlanFile {
            l: self.num_groups(),
            assignment: self.partition.assignment().to_vec(),
            anchors: self.anchors.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: PlanFile = serde_json::from_str(text)?;
        let partition = Partition::from_assignment(file.assignment, file.l)?;
        chain_plan_from_pairs(partition, file.anchors)
    }
}
