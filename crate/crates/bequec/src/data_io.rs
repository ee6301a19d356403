//! File formats and block assembly for user-supplied graphs.

use log::warn;
use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::blocks::BlockSet;
use crate::error::{Error, Result};
use crate::graph_model::{derive_seed, MembershipMatrix};
use crate::query_plan::QueryPlan;

/// Undirected simple graph as a validated edge list, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeList {
    pub n: usize,
    /// Pairs with `i < j`, no duplicates.
    pub edges: Vec<(usize, usize)>,
}

/// Ground truth attached to a graph: soft memberships or hard labels.
#[derive(Debug, Clone)]
pub enum GroundTruth {
    Soft(MembershipMatrix),
    Hard(Vec<usize>),
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        msg: msg.into(),
    }
}

/// Loads an edge list: optional `N <count>` header, then `i j` pairs,
/// whitespace separated, `#` comments allowed.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<EdgeList> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut n: Option<usize> = None;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut seen: HashSet<(usize, usize)> = HashSet::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields[0] == "N" {
            if n.is_some() || !edges.is_empty() {
                return Err(parse_err(path, lineno, "misplaced N header"));
            }
            if fields.len() != 2 {
                return Err(parse_err(path, lineno, "N header needs one integer"));
            }
            n = Some(
                fields[1]
                    .parse()
                    .map_err(|_| parse_err(path, lineno, "invalid node count"))?,
            );
            continue;
        }
        if fields.len() != 2 {
            return Err(parse_err(path, lineno, format!("expected 2 fields, got {}", fields.len())));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("invalid index {:?}", fields[0])))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("invalid index {:?}", fields[1])))?;
        if i == j {
            return Err(parse_err(path, lineno, format!("self-loop at node {i}")));
        }
        let key = (i.min(j), i.max(j));
        if !seen.insert(key) {
            return Err(parse_err(path, lineno, format!("duplicate edge {key:?}")));
        }
        edges.push(key);
    }
    let inferred = edges.iter().map(|&(_, j)| j + 1).max().unwrap_or(0);
    let n = n.unwrap_or(inferred);
    if inferred > n {
        return Err(parse_err(
            path,
            0,
            format!("edge references node {} but N = {n}", inferred - 1),
        ));
    }
    Ok(EdgeList { n, edges })
}

/// Saves an edge list in the loader's format.
pub fn save_edge_list(graph: &EdgeList, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    out.push_str(&format!("N {}\n", graph.n));
    for &(i, j) in &graph.edges {
        out.push_str(&format!("{i} {j}\n"));
    }
    fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Materializes dense 0/1 blocks for exactly the plan's queried pairs.
pub fn extract_blocks(graph: &EdgeList, plan: &QueryPlan) -> Result<BlockSet> {
    if plan.num_nodes() != graph.n {
        return Err(Error::DimensionMismatch(format!(
            "plan covers {} nodes, graph has {}",
            plan.num_nodes(),
            graph.n
        )));
    }
    let edge_set: HashSet<(usize, usize)> = graph.edges.iter().copied().collect();
    let has_edge = |a: usize, b: usize| edge_set.contains(&(a.min(b), a.max(b)));
    let mut blocks = BlockSet::new();
    for (l, m) in plan.queried_pairs() {
        let rows = plan.partition().group(l);
        let cols = plan.partition().group(m);
        let block = DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            let (a, b) = (rows[r], cols[c]);
            if a == b {
                0.0
            } else if has_edge(a, b) {
                1.0
            } else {
                0.0
            }
        });
        blocks.insert(l, m, block);
    }
    Ok(blocks)
}

/// Flips each queried pair's binary value independently with probability
/// `rate`. Same-group blocks use one coin per unordered node pair so the
/// adjacency stays symmetric; their diagonal is untouched.
pub fn inject_annotation_errors(blocks: &BlockSet, rate: f64, seed: u64) -> Result<BlockSet> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(Error::Parameter(format!("rate = {rate} outside [0, 1]")));
    }
    let mut out = BlockSet::new();
    for (&(l, m), block) in blocks.iter_sorted() {
        for &v in block.iter() {
            if v != 0.0 && v != 1.0 {
                return Err(Error::Parameter(format!(
                    "block ({l}, {m}) is not binary: found {v}"
                )));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, l as u64, m as u64));
        let mut flipped = block.clone();
        if l == m {
            for i in 0..block.nrows() {
                for j in i + 1..block.ncols() {
                    if rng.random::<f64>() < rate {
                        flipped[(i, j)] = 1.0 - flipped[(i, j)];
                        flipped[(j, i)] = flipped[(i, j)];
                    }
                }
            }
        } else {
            for v in flipped.iter_mut() {
                if rng.random::<f64>() < rate {
                    *v = 1.0 - *v;
                }
            }
        }
        out.insert(l, m, flipped);
    }
    Ok(out)
}

/// One metric value from one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub l: usize,
    pub eta: f64,
    /// Dirichlet parameters joined with ';' to stay a single CSV column.
    pub nu: String,
    pub metric: String,
    pub value: f64,
    pub runtime_s: f64,
}

/// Joins Dirichlet parameters for the `nu` record column.
pub fn nu_string(nu: &[f64]) -> String {
    nu.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            other => Err(Error::Parameter(format!(
                "unknown format {other:?}, expected csv or json"
            ))),
        }
    }
}

/// Writes result records; CSV keeps the fixed column order of
/// [`ResultRecord`], JSON emits an array of objects.
pub fn write_results(
    records: &[ResultRecord],
    path: impl AsRef<Path>,
    format: OutputFormat,
) -> Result<()> {
    let path = path.as_ref();
    match format {
        OutputFormat::Csv => {
            let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
            let mut writer = csv::Writer::from_writer(file);
            if records.is_empty() {
                writer.write_record([
                    "seed",
                    "n",
                    "k",
                    "l",
                    "eta",
                    "nu",
                    "metric",
                    "value",
                    "runtime_s",
                ])?;
            }
            for rec in records {
                writer.serialize(rec)?;
            }
            writer.flush().map_err(|e| io_err(path, e))?;
        }
        OutputFormat::Json => {
            let text = serde_json::to_string_pretty(records)?;
            fs::write(path, text).map_err(|e| io_err(path, e))?;
        }
    }
    Ok(())
}

/// Reads records back, inferring the format from the content.
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    if text.trim_start().starts_with('[') {
        return Ok(serde_json::from_str(&text)?);
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for rec in reader.deserialize() {
        out.push(rec?);
    }
    Ok(out)
}

/// Loads ground truth: rows with K >= 2 columns become a soft membership
/// matrix (transposed to K x N, normalized with a warning on drift); a single
/// integer column becomes hard labels.
pub fn load_ground_truth(path: impl AsRef<Path>) -> Result<GroundTruth> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut width: Option<usize> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<f64> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|f| !f.is_empty())
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| parse_err(path, lineno, format!("invalid number {f:?}")))
            })
            .collect::<Result<_>>()?;
        match width {
            None => width = Some(fields.len()),
            Some(w) if w != fields.len() => {
                return Err(parse_err(
                    path,
                    lineno,
                    format!("expected {w} columns, got {}", fields.len()),
                ));
            }
            _ => {}
        }
        rows.push(fields);
    }
    let width = width.ok_or_else(|| parse_err(path, 0, "empty ground-truth file"))?;
    if width == 1 {
        let labels = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let v = r[0];
                if v < 0.0 || v.fract() != 0.0 {
                    Err(parse_err(path, i + 1, format!("invalid label {v}")))
                } else {
                    Ok(v as usize)
                }
            })
            .collect::<Result<Vec<usize>>>()?;
        return Ok(GroundTruth::Hard(labels));
    }
    let n = rows.len();
    let mut m = DMatrix::zeros(width, n);
    let mut drifted = 0usize;
    for (node, row) in rows.iter().enumerate() {
        if row.iter().any(|&v| v < 0.0) {
            return Err(parse_err(path, node + 1, "negative membership weight"));
        }
        let sum: f64 = row.iter().sum();
        if sum <= 0.0 {
            return Err(parse_err(path, node + 1, "membership row sums to zero"));
        }
        if (sum - 1.0).abs() > 1e-6 {
            drifted += 1;
        }
        for (cls, &v) in row.iter().enumerate() {
            m[(cls, node)] = v / sum;
        }
    }
    if drifted > 0 {
        warn!("{drifted} membership rows renormalized (sum deviated from 1 by > 1e-6)");
    }
    Ok(GroundTruth::Soft(MembershipMatrix::new(m)?))
}

/// Writes a K x N membership estimate as CSV, one node per row.
pub fn write_membership_csv(m: &DMatrix<f64>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    for col in m.column_iter() {
        let line = col
            .iter()
            .map(|v| format!("{v:.10}"))
            .collect::<Vec<_>>()
            .join(",");
        writeln!(file, "{line}").map_err(|e| io_err(path, e))?;
    }
    Ok(())
}
