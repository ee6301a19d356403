//! Experiment harness behind the command-line interface.
//!
//! The binary only parses arguments; everything it runs lives here so tests
//! can call the same entry points.

use log::warn;
use nalgebra::DMatrix;
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::blocks::BlockSet;
use crate::data_io::{
    self, extract_blocks, inject_annotation_errors, load_edge_list, load_ground_truth,
    nu_string, GroundTruth, ResultRecord,
};
use crate::error::{Error, Result};
use crate::graph_model::{
    build_probability_blocks, derive_seed, g_function, sample_binary_blocks,
    sample_dirichlet_memberships, sample_interaction_matrix, DirichletParams, MembershipMatrix,
};
use crate::metrics::{
    clustering_accuracy, mse, nmi, relative_error, round_to_labels, spearman_src,
    subspace_distance,
};
use crate::query_plan::{diagonal_plan, validate_plan, QueryPlan};
use crate::ssmf::{membership_constrained, membership_direct, spa};
use crate::stitch::estimate_range;

/// Observation mode: exact edge probabilities or Bernoulli draws.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Binary,
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ideal" => Ok(Self::Ideal),
            "binary" => Ok(Self::Binary),
            other => Err(Error::Parameter(format!(
                "unknown mode {other:?}, expected ideal or binary"
            ))),
        }
    }
}

/// Membership recovery method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extraction {
    Direct,
    Constrained,
}

impl std::str::FromStr for Extraction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(Self::Direct),
            "constrained" => Ok(Self::Constrained),
            other => Err(Error::Parameter(format!(
                "unknown extraction {other:?}, expected direct or constrained"
            ))),
        }
    }
}

/// Query pattern source: the built-in diagonal pattern or a plan file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanSpec {
    Diagonal,
    File(PathBuf),
}

impl std::str::FromStr for PlanSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "diagonal" {
            Ok(Self::Diagonal)
        } else {
            Ok(Self::File(PathBuf::from(s)))
        }
    }
}

impl<'de> Deserialize<'de> for PlanSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Full synthetic-experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub nu: Vec<f64>,
    pub eta: f64,
    pub trials: usize,
    pub seed: u64,
    pub mode: Mode,
    pub plan: PlanSpec,
    pub extraction: Extraction,
}

impl Default for ExperimentConfig {
    /// The synthetic benchmark configuration: K=5, L=10, eta=0.1, symmetric
    /// Dirichlet, 20 trials, binary observation.
    fn default() -> Self {
        Self {
            n: 2000,
            k: 5,
            l: 10,
            nu: vec![0.2; 5],
            eta: 0.1,
            trials: 20,
            seed: 0,
            mode: Mode::Binary,
            plan: PlanSpec::Diagonal,
            extraction: Extraction::Constrained,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Parameter("trials must be at least 1".into()));
        }
        if self.nu.len() != self.k {
            return Err(Error::Parameter(format!(
                "nu has {} entries, expected K = {}",
                self.nu.len(),
                self.k
            )));
        }
        let plan = self.build_plan()?;
        let report = validate_plan(&plan, self.k);
        if !report.passed() {
            return Err(Error::InvalidPlan(report.to_string()));
        }
        Ok(())
    }

    pub fn build_plan(&self) -> Result<QueryPlan> {
        match &self.plan {
            PlanSpec::Diagonal => diagonal_plan(self.n, self.l, None),
            PlanSpec::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.display().to_string(),
                    source: e,
                })?;
                let plan = QueryPlan::from_json(&text)?;
                if plan.num_nodes() != self.n {
                    return Err(Error::InvalidPlan(format!(
                        "plan covers {} nodes, config says {}",
                        plan.num_nodes(),
                        self.n
                    )));
                }
                Ok(plan)
            }
        }
    }
}

/// Optional fields loaded from a JSON config file; explicit CLI flags
/// override these.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigPatch {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub l: Option<usize>,
    pub nu: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub mode: Option<Mode>,
    pub plan: Option<PlanSpec>,
    pub extraction: Option<Extraction>,
}

impl ConfigPatch {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Applies the patch onto a base configuration.
    pub fn apply(&self, mut base: ExperimentConfig) -> ExperimentConfig {
        if let Some(v) = self.n {
            base.n = v;
        }
        if let Some(v) = self.k {
            base.k = v;
            if self.nu.is_none() {
                base.nu = vec![1.0 / v as f64; v];
            }
        }
        if let Some(v) = self.l {
            base.l = v;
        }
        if let Some(v) = &self.nu {
            base.nu = v.clone();
        }
        if let Some(v) = self.eta {
            base.eta = v;
        }
        if let Some(v) = self.trials {
            base.trials = v;
        }
        if let Some(v) = self.seed {
            base.seed = v;
        }
        if let Some(v) = self.mode {
            base.mode = v;
        }
        if let Some(v) = &self.plan {
            base.plan = v.clone();
        }
        if let Some(v) = self.extraction {
            base.extraction = v;
        }
        base
    }
}

/// Records plus per-trial failures from one experiment run.
#[derive(Debug)]
pub struct RunOutcome {
    pub records: Vec<ResultRecord>,
    /// `(trial index, error message)` for skipped trials.
    pub failures: Vec<(usize, String)>,
}

impl RunOutcome {
    /// Mean and standard deviation per metric name, in first-seen order.
    pub fn aggregate(&self) -> Vec<(String, f64, f64)> {
        aggregate(&self.records)
    }
}

/// Mean and standard deviation per metric name over records.
pub fn aggregate(records: &[ResultRecord]) -> Vec<(String, f64, f64)> {
    let mut order: Vec<String> = Vec::new();
    for rec in records {
        if !order.contains(&rec.metric) {
            order.push(rec.metric.clone());
        }
    }
    order
        .into_iter()
        .map(|name| {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.metric == name)
                .map(|r| r.value)
                .collect();
            let n = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / n;
            let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
            (name, mean, var.sqrt())
        })
        .collect()
}

/// Per-trial deterministic sub-seeds.
struct TrialSeeds {
    membership: u64,
    interaction: u64,
    adjacency: u64,
    injection: u64,
}

fn trial_seeds(seed: u64, trial: usize) -> TrialSeeds {
    let base = derive_seed(seed, 0x7261_6e64, trial as u64);
    TrialSeeds {
        membership: derive_seed(base, 1, 0),
        interaction: derive_seed(base, 2, 0),
        adjacency: derive_seed(base, 3, 0),
        injection: derive_seed(base, 4, 0),
    }
}

/// Samples one trial's ground truth and observed blocks.
///
/// `hard` replaces the Dirichlet memberships with uniformly drawn unit
/// vectors (single-membership nodes).
fn sample_trial(
    cfg: &ExperimentConfig,
    plan: &QueryPlan,
    trial: usize,
    hard: bool,
) -> Result<(MembershipMatrix, BlockSet, TrialSeeds)> {
    let seeds = trial_seeds(cfg.seed, trial);
    let params = DirichletParams::new(cfg.nu.clone())?;
    let m = if hard {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seeds.membership);
        let mut entries = DMatrix::zeros(cfg.k, cfg.n);
        for col in 0..cfg.n {
            entries[(rng.random_range(0..cfg.k), col)] = 1.0;
        }
        MembershipMatrix::new(entries)?
    } else {
        sample_dirichlet_memberships(&params, cfg.n, seeds.membership)?
    };
    let b = sample_interaction_matrix(cfg.k, cfg.eta, seeds.interaction)?;
    let blocks = match cfg.mode {
        Mode::Ideal => build_probability_blocks(&m, &b, plan)?,
        Mode::Binary => sample_binary_blocks(&m, &b, plan, seeds.adjacency)?,
    };
    Ok((m, blocks, seeds))
}

/// Runs estimate -> anchors -> extraction on one block set.
fn run_pipeline(
    blocks: &BlockSet,
    plan: &QueryPlan,
    k: usize,
    extraction: Extraction,
) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let estimate = estimate_range(blocks, plan, k)?;
    let u_hat = estimate.assembled().clone();
    let anchors = spa(&u_hat, k)?;
    let m_hat = match extraction {
        Extraction::Direct => membership_direct(&u_hat, &anchors.g_hat)?,
        Extraction::Constrained => membership_constrained(&u_hat, &anchors.g_hat)?,
    };
    Ok((u_hat, m_hat))
}

fn push_records(
    records: &mut Vec<ResultRecord>,
    cfg: &ExperimentConfig,
    trial: usize,
    runtime_s: f64,
    values: &[(&str, f64)],
) {
    for &(metric, value) in values {
        records.push(ResultRecord {
            seed: derive_seed(cfg.seed, 0x7261_6e64, trial as u64),
            n: cfg.n,
            k: cfg.k,
            l: cfg.l,
            eta: cfg.eta,
            nu: nu_string(&cfg.nu),
            metric: metric.to_string(),
            value,
            runtime_s,
        });
    }
}

/// Synthetic benchmark: sample, observe, recover, score; one record per
/// (trial, metric).
pub fn cmd_synth(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let plan = cfg.build_plan()?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for trial in 0..cfg.trials {
        let started = Instant::now();
        let outcome = (|| -> Result<Vec<(&str, f64)>> {
            let (m, blocks, _) = sample_trial(cfg, &plan, trial, false)?;
            let (u_hat, m_hat) = run_pipeline(&blocks, &plan, cfg.k, cfg.extraction)?;
            Ok(vec![
                ("dist", subspace_distance(&u_hat, &m)?),
                ("mse", mse(&m_hat, m.matrix())?),
                ("re", relative_error(&m_hat, m.matrix())?),
                ("src", spearman_src(&m_hat, m.matrix())?),
            ])
        })();
        let runtime_s = started.elapsed().as_secs_f64();
        match outcome {
            Ok(values) => push_records(&mut records, cfg, trial, runtime_s, &values),
            Err(e) => {
                warn!("trial {trial} failed: {e}");
                failures.push((trial, e.to_string()));
            }
        }
    }
    if records.is_empty() {
        return Err(Error::Parameter(format!(
            "all {} trials failed; first error: {}",
            cfg.trials,
            failures
                .first()
                .map(|(_, e)| e.as_str())
                .unwrap_or("none")
        )));
    }
    Ok(RunOutcome { records, failures })
}

/// Annotation-error robustness sweep: flips observed entries at each rate and
/// scores the recovery, including hard-label metrics.
///
/// `hard` draws single-membership ground truth, matching the crowdclustering
/// setting where ACC/NMI are the headline metrics.
pub fn cmd_error_sweep(
    cfg: &ExperimentConfig,
    rates: &[f64],
    hard: bool,
) -> Result<Vec<(f64, RunOutcome)>> {
    cfg.validate()?;
    if cfg.mode != Mode::Binary {
        return Err(Error::Parameter(
            "error sweep needs binary observation mode".into(),
        ));
    }
    for &r in rates {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Parameter(format!("rate {r} outside [0, 1]")));
        }
    }
    let plan = cfg.build_plan()?;
    let mut out = Vec::new();
    for &rate in rates {
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for trial in 0..cfg.trials {
            let started = Instant::now();
            let outcome = (|| -> Result<Vec<(&str, f64)>> {
                let (m, blocks, seeds) = sample_trial(cfg, &plan, trial, hard)?;
                let blocks = inject_annotation_errors(&blocks, rate, seeds.injection)?;
                let (u_hat, m_hat) = run_pipeline(&blocks, &plan, cfg.k, cfg.extraction)?;
                let labels = round_to_labels(m.matrix());
                let labels_hat = round_to_labels(&m_hat);
                Ok(vec![
                    ("dist", subspace_distance(&u_hat, &m)?),
                    ("mse", mse(&m_hat, m.matrix())?),
                    ("re", relative_error(&m_hat, m.matrix())?),
                    ("src", spearman_src(&m_hat, m.matrix())?),
                    ("acc", clustering_accuracy(&labels_hat, &labels)?),
                    ("nmi", nmi(&labels_hat, &labels)?),
                ])
            })();
            let runtime_s = started.elapsed().as_secs_f64();
            match outcome {
                Ok(values) => push_records(&mut records, cfg, trial, runtime_s, &values),
                Err(e) => {
                    warn!("rate {rate} trial {trial} failed: {e}");
                    failures.push((trial, e.to_string()));
                }
            }
        }
        if records.is_empty() {
            return Err(Error::Parameter(format!(
                "all {} trials failed at rate {rate}",
                cfg.trials
            )));
        }
        out.push((rate, RunOutcome { records, failures }));
    }
    Ok(out)
}

/// Separability table: `G(eps, nu)` per Dirichlet parameter vector.
pub fn cmd_gfun(eps: f64, nus: &[Vec<f64>]) -> Result<Vec<(Vec<f64>, f64)>> {
    nus.iter()
        .map(|nu| {
            let params = DirichletParams::new(nu.clone())?;
            Ok((nu.clone(), g_function(eps, &params)?))
        })
        .collect()
}

/// Builds and validates a diagonal plan, returning it with its validation
/// report and queried fraction.
pub fn cmd_plan(
    n: usize,
    l: usize,
    pattern: &str,
    k: usize,
) -> Result<(QueryPlan, crate::query_plan::ValidationReport, f64)> {
    if pattern != "diagonal" {
        return Err(Error::Parameter(format!(
            "unknown pattern {pattern:?}; only \"diagonal\" is built in (use a plan file otherwise)"
        )));
    }
    let plan = diagonal_plan(n, l, None)?;
    let report = validate_plan(&plan, k);
    if !report.passed() {
        return Err(Error::InvalidPlan(report.to_string()));
    }
    let fraction = crate::query_plan::queried_fraction(&plan);
    Ok((plan, report, fraction))
}

/// Pipeline on a user graph: returns the membership estimate and any metrics
/// computable from the supplied ground truth.
pub fn cmd_cluster(
    graph_path: impl AsRef<Path>,
    plan_spec: &PlanSpec,
    l: usize,
    k: usize,
    extraction: Extraction,
    truth_path: Option<&Path>,
) -> Result<(DMatrix<f64>, Vec<(String, f64)>)> {
    let graph = load_edge_list(graph_path)?;
    let plan = match plan_spec {
        PlanSpec::Diagonal => diagonal_plan(graph.n, l, None)?,
        PlanSpec::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                source: e,
            })?;
            QueryPlan::from_json(&text)?
        }
    };
    if plan.num_nodes() != graph.n {
        return Err(Error::InvalidPlan(format!(
            "plan covers {} nodes, graph has {}",
            plan.num_nodes(),
            graph.n
        )));
    }
    let report = validate_plan(&plan, k);
    if !report.passed() {
        return Err(Error::InvalidPlan(report.to_string()));
    }

    let blocks = extract_blocks(&graph, &plan)?;
    let (u_hat, m_hat) = run_pipeline(&blocks, &plan, k, extraction)?;

    let mut scored = Vec::new();
    if let Some(truth) = truth_path {
        match load_ground_truth(truth)? {
            GroundTruth::Soft(m) => {
                scored.push(("dist".to_string(), subspace_distance(&u_hat, &m)?));
                scored.push(("mse".to_string(), mse(&m_hat, m.matrix())?));
                scored.push(("re".to_string(), relative_error(&m_hat, m.matrix())?));
                scored.push(("src".to_string(), spearman_src(&m_hat, m.matrix())?));
            }
            GroundTruth::Hard(labels) => {
                let labels_hat = round_to_labels(&m_hat);
                scored.push((
                    "acc".to_string(),
                    clustering_accuracy(&labels_hat, &labels)?,
                ));
                scored.push(("nmi".to_string(), nmi(&labels_hat, &labels)?));
            }
        }
    }
    Ok((m_hat, scored))
}

/// Writes records and prints the aggregate table; shared by the binary's
/// subcommands.
pub fn emit_results(
    outcome: &RunOutcome,
    out: Option<&Path>,
    format: data_io::OutputFormat,
) -> Result<()> {
    if let Some(path) = out {
        data_io::write_results(&outcome.records, path, format)?;
    }
    for (metric, mean, std) in outcome.aggregate() {
        println!("{metric}: mean = {mean:.6}, std = {std:.6}");
    }
    for (trial, err) in &outcome.failures {
        eprintln!("trial {trial} failed: {err}");
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_cfg() -> ExperimentConfig {
        ExperimentConfig {
            n: 300,
            k: 3,
            l: 3,
            nu: vec![1.0 / 3.0; 3],
            eta: 0.1,
            trials: 2,
            seed: 42,
            mode: Mode::Binary,
            plan: PlanSpec::Diagonal,
            extraction: Extraction::Constrained,
        }
    }

    #[test]
    fn synth_deterministic_per_seed() {
        let cfg = small_cfg();
        let a = cmd_synth(&cfg).unwrap();
        let b = cmd_synth(&cfg).unwrap();
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.metric, y.metric);
            assert_eq!(x.value, y.value);
            assert_eq!(x.seed, y.seed);
        }
    }

    #[test]
    fn synth_ideal_dist_tiny() {
        let mut cfg = small_cfg();
        cfg.mode = Mode::Ideal;
        cfg.trials = 1;
        let out = cmd_synth(&cfg).unwrap();
        let dist = out
            .records
            .iter()
            .find(|r| r.metric == "dist")
            .unwrap()
            .value;
        assert!(dist <= 1e-8, "dist = {dist}");
    }

    #[test]
    fn sweep_rate_zero_matches_synth_values() {
        let cfg = small_cfg();
        let synth = cmd_synth(&cfg).unwrap();
        let sweep = cmd_error_sweep(&cfg, &[0.0], false).unwrap();
        let (rate, outcome) = &sweep[0];
        assert_eq!(*rate, 0.0);
        for rec in &synth.records {
            let twin = outcome
                .records
                .iter()
                .find(|r| r.metric == rec.metric && r.seed == rec.seed)
                .expect("matching record");
            assert_eq!(twin.value, rec.value, "metric {}", rec.metric);
        }
    }

    #[test]
    fn sweep_rejects_ideal_mode_and_bad_rate() {
        let mut cfg = small_cfg();
        cfg.mode = Mode::Ideal;
        assert!(cmd_error_sweep(&cfg, &[0.0], false).is_err());
        let cfg = small_cfg();
        assert!(cmd_error_sweep(&cfg, &[1.5], false).is_err());
    }

    #[test]
    fn config_patch_precedence() {
        let patch: ConfigPatch =
            serde_json::from_str(r#"{"n": 500, "k": 4, "mode": "ideal"}"#).unwrap();
        let cfg = patch.apply(ExperimentConfig::default());
        assert_eq!(cfg.n, 500);
        assert_eq!(cfg.k, 4);
        assert_eq!(cfg.nu, vec![0.25; 4]);
        assert_eq!(cfg.mode, Mode::Ideal);
        assert_eq!(cfg.l, 10);
    }

    #[test]
    fn config_rejects_unknown_field() {
        let bad: std::result::Result<ConfigPatch, _> =
            serde_json::from_str(r#"{"nodes": 500}"#);
        assert!(bad.is_err());
    }

    #[test]
    fn gfun_three_rows() {
        let rows = cmd_gfun(
            0.1,
            &[
                vec![0.5, 0.5, 0.5],
                vec![2.0, 0.5, 0.5],
                vec![3.0, 3.0, 3.0],
            ],
        )
        .unwrap();
        assert!((rows[0].1 - 0.045).abs() / 0.045 < 0.05, "{}", rows[0].1);
        assert!((rows[1].1 - 8.4e-4).abs() / 8.4e-4 < 0.05, "{}", rows[1].1);
        assert!((rows[2].1 - 7.0e-5).abs() / 7.0e-5 < 0.05, "{}", rows[2].1);
    }

    #[test]
    fn plan_command_reports_fraction() {
        let (plan, report, fraction) = cmd_plan(10_000, 10, "diagonal", 5).unwrap();
        assert!(report.passed());
        assert_eq!(plan.num_groups(), 10);
        assert!((fraction - 0.27993).abs() < 1e-5);
        assert!(cmd_plan(100, 1, "diagonal", 5).is_err());
        assert!(cmd_plan(100, 10, "spiral", 5).is_err());
    }

    #[test]
    fn cluster_round_trip_pure_nodes() {
        use rand::Rng;
        use rand::SeedableRng;
        let dir = tempfile::tempdir().unwrap();
        let k = 3;
        let n = 120;
        // hard memberships, strongly assortative graph
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let p = if labels[i] == labels[j] { 0.95 } else { 0.02 };
                if rng.random::<f64>() < p {
                    edges.push((i, j));
                }
            }
        }
        let graph = data_io::EdgeList { n, edges };
        let graph_path = dir.path().join("g.txt");
        data_io::save_edge_list(&graph, &graph_path).unwrap();
        let truth_path = dir.path().join("t.csv");
        std::fs::write(
            &truth_path,
            labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join("\n"),
        )
        .unwrap();

        let (m_hat, scored) = cmd_cluster(
            &graph_path,
            &PlanSpec::Diagonal,
            3,
            k,
            Extraction::Constrained,
            Some(truth_path.as_path()),
        )
        .unwrap();
        assert_eq!(m_hat.ncols(), n);
        let acc = scored.iter().find(|(m, _)| m == "acc").unwrap().1;
        assert_eq!(acc, 100.0, "scored = {scored:?}");

        // without ground truth, no metrics
        let (_, scored) = cmd_cluster(
            &graph_path,
            &PlanSpec::Diagonal,
            3,
            k,
            Extraction::Constrained,
            None,
        )
        .unwrap();
        assert!(scored.is_empty());
    }

    #[test]
    fn cluster_rejects_oversized_k() {
        let dir = tempfile::tempdir().unwrap();
        let graph = data_io::EdgeList {
            n: 12,
            edges: vec![(0, 1), (2, 3), (4, 5)],
        };
        let path = dir.path().join("g.txt");
        data_io::save_edge_list(&graph, &path).unwrap();
        // groups of 3 nodes cannot support K=5
        let err = cmd_cluster(
            &path,
            &PlanSpec::Diagonal,
            4,
            5,
            Extraction::Direct,
            None,
        );
        assert!(matches!(err, Err(Error::InvalidPlan(_))));
    }
}
