//! Mixed-membership ground truth and Bernoulli edge sampling.
//!
//! Nodes carry membership vectors on the probability simplex, clusters
//! interact through a symmetric matrix `B`, and an edge between nodes `i` and
//! `j` appears with probability `m_i' B m_j`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Uniform};
use statrs::function::gamma::ln_gamma;

use crate::blocks::BlockSet;
use crate::error::{Error, Result};
use crate::query_plan::QueryPlan;

/// Dirichlet concentration vector; every entry strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletParams {
    nu: Vec<f64>,
}

impl DirichletParams {
    pub fn new(nu: Vec<f64>) -> Result<Self> {
        if nu.is_empty() {
            return Err(Error::Parameter("nu must have at least one entry".into()));
        }
        if let Some(&bad) = nu.iter().find(|&&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Parameter(format!(
                "nu entries must be strictly positive and finite, got {bad}"
            )));
        }
        Ok(Self { nu })
    }

    pub fn k(&self) -> usize {
        self.nu.len()
    }

    pub fn nu(&self) -> &[f64] {
        &self.nu
    }
}

/// `K x N` column-stochastic membership matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MembershipMatrix {
    entries: DMatrix<f64>,
}

impl MembershipMatrix {
    const COLUMN_SUM_TOL: f64 = 1e-10;

    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        for (j, col) in entries.column_iter().enumerate() {
            if col.iter().any(|&v| v < 0.0) {
                return Err(Error::Parameter(format!(
                    "membership column {j} has a negative entry"
                )));
            }
            let sum: f64 = col.iter().sum();
            if (sum - 1.0).abs() > Self::COLUMN_SUM_TOL {
                return Err(Error::Parameter(format!(
                    "membership column {j} sums to {sum}, expected 1"
                )));
            }
        }
        Ok(Self { entries })
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn n(&self) -> usize {
        self.entries.ncols()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn column(&self, j: usize) -> DVector<f64> {
        self.entries.column(j).into_owned()
    }

    /// Sub-matrix `M_l` holding the columns of the listed nodes.
    pub fn columns_for(&self, nodes: &[usize]) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.k(), nodes.len());
        for (c, &node) in nodes.iter().enumerate() {
            out.set_column(c, &self.entries.column(node));
        }
        out
    }
}

/// Symmetric `K x K` cluster-cluster edge probability matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    entries: DMatrix<f64>,
}

impl InteractionMatrix {
    const SYMMETRY_TOL: f64 = 1e-12;

    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(Error::DimensionMismatch(format!(
                "interaction matrix must be square, got {}x{}",
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..entries.nrows() {
            for j in 0..entries.ncols() {
                let v = entries[(i, j)];
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::Parameter(format!(
                        "interaction entry ({i}, {j}) = {v} outside [0, 1]"
                    )));
                }
                if (v - entries[(j, i)]).abs() > Self::SYMMETRY_TOL {
                    return Err(Error::Parameter(format!(
                        "interaction matrix asymmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn k(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Quantities that drive the recovery guarantees: max edge probability,
/// max degree, slab conditioning and interaction-matrix spectrum.
#[derive(Debug, Clone)]
pub struct TheoryDiagnostics {
    pub rho: f64,
    pub max_degree: f64,
    pub gamma: f64,
    pub kappa_b: f64,
    pub sigma_min_b: f64,
    /// Group whose membership slab is rank deficient, if any.
    pub degenerate_group: Option<usize>,
}

/// Stable per-purpose sub-seed derivation (splitmix64 over mixed inputs).
/// Callers carve independent deterministic RNG streams out of one user seed.
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed ^ a.wrapping_mul(0x9E3779B97F4A7C15) ^ b.wrapping_mul(0xBF58476D1CE4E5B9);
    z = z.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Draws `n` i.i.d. Dirichlet(nu) membership columns.
pub fn sample_dirichlet_memberships(
    params: &DirichletParams,
    n: usize,
    seed: u64,
) -> Result<MembershipMatrix> {
    if n == 0 {
        return Err(Error::Parameter("node count must be at least 1".into()));
    }
    let k = params.k();
    let mut entries = DMatrix::zeros(k, n);
    if k == 1 {
        entries.fill(1.0);
        return MembershipMatrix::new(entries);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gammas: Vec<Gamma<f64>> = params
        .nu()
        .iter()
        .map(|&a| Gamma::new(a, 1.0).map_err(|e| Error::Parameter(e.to_string())))
        .collect::<Result<_>>()?;
    for j in 0..n {
        loop {
            let draws: Vec<f64> = gammas.iter().map(|g| g.sample(&mut rng)).collect();
            let sum: f64 = draws.iter().sum();
            if sum > 0.0 && sum.is_finite() {
                for (i, d) in draws.iter().enumerate() {
                    entries[(i, j)] = d / sum;
                }
                break;
            }
            // all-zero underflow for very small concentrations; redraw
        }
    }
    MembershipMatrix::new(entries)
}

/// Samples `B` with diagonal entries Uniform[0.8, 1] and off-diagonal entries
/// Uniform[0, eta], symmetrized from the upper triangle.
pub fn sample_interaction_matrix(k: usize, eta: f64, seed: u64) -> Result<InteractionMatrix> {
    if k == 0 {
        return Err(Error::Parameter("cluster count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::Parameter(format!("eta = {eta} outside [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let diag = Uniform::new_inclusive(0.8, 1.0).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut entries = DMatrix::zeros(k, k);
    for i in 0..k {
        entries[(i, i)] = diag.sample(&mut rng);
        for j in i + 1..k {
            let v = if eta == 0.0 {
                0.0
            } else {
                rng.random_range(0.0..eta)
            };
            entries[(i, j)] = v;
            entries[(j, i)] = v;
        }
    }
    InteractionMatrix::new(entries)
}

/// Edge probability `m_i' B m_j`.
pub fn edge_probability(
    m_i: &DVector<f64>,
    m_j: &DVector<f64>,
    b: &InteractionMatrix,
) -> Result<f64> {
    let k = b.k();
    if m_i.len() != k || m_j.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "membership lengths {} and {} do not match K = {k}",
            m_i.len(),
            m_j.len()
        )));
    }
    Ok((m_i.transpose() * b.matrix() * m_j)[(0, 0)])
}

/// Samples one binary adjacency block.
///
/// Same-group blocks are sampled on the upper triangle only and mirrored,
/// with a zero diagonal; cross-group blocks have fully independent entries.
pub fn sample_adjacency_block(
    m_rows: &DMatrix<f64>,
    m_cols: &DMatrix<f64>,
    b: &InteractionMatrix,
    same_group: bool,
    seed: u64,
) -> Result<DMatrix<f64>> {
    if m_rows.nrows() != b.k() || m_cols.nrows() != b.k() {
        return Err(Error::DimensionMismatch(
            "membership slabs do not match interaction matrix size".into(),
        ));
    }
    if same_group && m_rows.ncols() != m_cols.ncols() {
        return Err(Error::DimensionMismatch(
            "same_group set but row and column slabs differ in size".into(),
        ));
    }
    let probs = m_rows.transpose() * b.matrix() * m_cols;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (nr, nc) = probs.shape();
    let mut out = DMatrix::zeros(nr, nc);
    if same_group {
        for i in 0..nr {
            for j in i + 1..nc {
                let v = f64::from(rng.random::<f64>() < probs[(i, j)]);
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
    } else {
        for i in 0..nr {
            for j in 0..nc {
                out[(i, j)] = f64::from(rng.random::<f64>() < probs[(i, j)]);
            }
        }
    }
    Ok(out)
}

/// Assembles the exact probability blocks `P(l, m) = M_l' B M_m` for every
/// queried pair of the plan.
pub fn build_probability_blocks(
    m: &MembershipMatrix,
    b: &InteractionMatrix,
    plan: &QueryPlan,
) -> Result<BlockSet> {
    check_plan_matches(m, b, plan)?;
    let mut blocks = BlockSet::new();
    for (l, mm) in plan.queried_pairs() {
        let ml = m.columns_for(plan.partition().group(l));
        let mr = m.columns_for(plan.partition().group(mm));
        let block = ml.transpose() * b.matrix() * mr;
        blocks.insert(l, mm, block);
    }
    Ok(blocks)
}

/// Samples binary observations for every queried pair of the plan.
///
/// Each block gets an independent sub-seed derived from `(seed, l, m)`, so
/// the result does not depend on block iteration order.
pub fn sample_binary_blocks(
    m: &MembershipMatrix,
    b: &InteractionMatrix,
    plan: &QueryPlan,
    seed: u64,
) -> Result<BlockSet> {
    check_plan_matches(m, b, plan)?;
    let mut blocks = BlockSet::new();
    for (l, mm) in plan.queried_pairs() {
        let ml = m.columns_for(plan.partition().group(l));
        let mr = m.columns_for(plan.partition().group(mm));
        let sub = derive_seed(seed, l as u64, mm as u64);
        let block = sample_adjacency_block(&ml, &mr, b, l == mm, sub)?;
        blocks.insert(l, mm, block);
    }
    Ok(blocks)
}

fn check_plan_matches(
    m: &MembershipMatrix,
    b: &InteractionMatrix,
    plan: &QueryPlan,
) -> Result<()> {
    if plan.num_nodes() != m.n() {
        return Err(Error::DimensionMismatch(format!(
            "plan covers {} nodes but membership matrix has {}",
            plan.num_nodes(),
            m.n()
        )));
    }
    if m.k() != b.k() {
        return Err(Error::DimensionMismatch(format!(
            "membership K = {} but interaction K = {}",
            m.k(),
            b.k()
        )));
    }
    Ok(())
}

/// Lower bound on the probability mass within distance `eps` of the least
/// covered simplex vertex under Dirichlet(nu):
///
/// `G(eps, nu) = Gamma(sum nu) / prod Gamma(nu_i)
///             * min_k (eps / sqrt(2))^(sum_{i != k} nu_i) / prod_{i != k} nu_i`
pub fn g_function(eps: f64, params: &DirichletParams) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::Parameter(format!("eps = {eps} must be positive")));
    }
    let nu = params.nu();
    let total: f64 = nu.iter().sum();
    let ln_prefactor = ln_gamma(total) - nu.iter().map(|&v| ln_gamma(v)).sum::<f64>();
    let base = (eps / f64::sqrt(2.0)).ln();
    let ln_min = (0..nu.len())
        .map(|k| {
            let exp_sum: f64 = nu
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, &v)| v)
                .sum();
            let ln_prod: f64 = nu
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != k)
                .map(|(_, &v)| v.ln())
                .sum();
            exp_sum * base - ln_prod
        })
        .fold(f64::INFINITY, f64::min);
    Ok((ln_prefactor + ln_min).exp())
}

/// Smallest `N` with `K exp(-2 N G^2) <= mu`, i.e. the node count after which
/// epsilon-separability holds with probability at least `1 - mu`.
pub fn min_nodes_for_separability(eps: f64, params: &DirichletParams, mu: f64) -> Result<u64> {
    if !(0.0 < mu && mu < 1.0) {
        return Err(Error::Parameter(format!("mu = {mu} outside (0, 1)")));
    }
    let g = g_function(eps, params)?;
    let denom = 2.0 * g * g;
    if denom == 0.0 || !denom.is_finite() {
        return Err(Error::UnboundedNodeRequirement);
    }
    let k = params.k() as f64;
    let n = ((k / mu).ln() / denom).ceil();
    if !n.is_finite() {
        return Err(Error::UnboundedNodeRequirement);
    }
    Ok((n as u64).max(1))
}

/// Computes the theory-facing quantities for a generated instance.
///
/// `rho` scans every off-diagonal edge probability; the degree is the max
/// adjacency row sum when a full binary matrix is given, otherwise the max
/// expected degree. A rank-deficient slab makes `gamma` infinite with the
/// offending group flagged.
pub fn theory_diagnostics(
    m: &MembershipMatrix,
    b: &InteractionMatrix,
    plan: &QueryPlan,
    adjacency: Option<&DMatrix<f64>>,
) -> Result<TheoryDiagnostics> {
    check_plan_matches(m, b, plan)?;
    let n = m.n();
    let w = b.matrix() * m.matrix(); // K x N

    // rho = max_{i != j} P(i, j), column-chunked to bound memory
    let mut rho: f64 = 0.0;
    let chunk = 512.min(n);
    let mt = m.matrix().transpose(); // N x K
    let mut j0 = 0;
    while j0 < n {
        let width = chunk.min(n - j0);
        let p_cols = &mt * w.columns(j0, width); // N x width
        for c in 0..width {
            let j = j0 + c;
            for i in 0..n {
                if i != j {
                    rho = rho.max(p_cols[(i, c)]);
                }
            }
        }
        j0 += width;
    }

    let max_degree = match adjacency {
        Some(a) => {
            if a.nrows() != n || a.ncols() != n {
                return Err(Error::DimensionMismatch(
                    "adjacency matrix does not match node count".into(),
                ));
            }
            (0..n)
                .map(|i| a.row(i).iter().sum::<f64>())
                .fold(0.0, f64::max)
        }
        None => {
            // expected degree: sum_j P(i, j) - P(i, i)
            let ones = DVector::from_element(n, 1.0);
            let t = &w * &ones; // K vector: B M 1
            (0..n)
                .map(|i| {
                    let mi = m.matrix().column(i);
                    let row_sum = mi.dot(&t);
                    let diag = mi.dot(&w.column(i));
                    row_sum - diag
                })
                .fold(0.0, f64::max)
        }
    };

    let mut gamma: f64 = 1.0;
    let mut degenerate_group = None;
    for l in 0..plan.num_groups() {
        let slab = m.columns_for(plan.partition().group(l));
        let sv = slab.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        if smin <= 1e-12 * smax {
            gamma = f64::INFINITY;
            degenerate_group = Some(l);
        } else {
            gamma = gamma.max(smax / smin);
        }
    }

    let sv_b = b.matrix().clone().singular_values();
    let sigma_min_b = sv_b.min();
    let kappa_b = if sigma_min_b > 0.0 {
        sv_b.max() / sigma_min_b
    } else {
        f64::INFINITY
    };

    Ok(TheoryDiagnostics {
        rho,
        max_degree,
        gamma,
        kappa_b,
        sigma_min_b,
        degenerate_group,
    })
}
