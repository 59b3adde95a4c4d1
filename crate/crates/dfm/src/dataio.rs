//! Bundled case-study datasets, the result-table CSV schema, and small
//! matrix file helpers for the CLI.

use crate::error::DfmError;
use crate::gml::GmlGraph;
use crate::model::CommunityLabels;
use crate::Result;
use nalgebra::DMatrix;
use std::collections::BTreeMap;
use std::path::Path;

/// Embedded fixture files.
pub const KARATE_GML: &str = include_str!("../fixtures/karate.gml");
pub const KARATE_LABELS: &str = include_str!("../fixtures/karate_labels.txt");
/// Surrogate network with the published node/label composition of the
/// political-books co-purchase data (49 "c", 43 "l", 13 "n"); the edge set
/// is a seeded random draw since the original file is not redistributed
/// here. See the Creator comment inside the fixture.
pub const POLBOOKS_GML: &str = include_str!("../fixtures/polbooks.gml");

/// A real (or bundled) network with ground-truth communities: symmetric 0/1
/// adjacency with zero diagonal.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub name: String,
    pub adjacency: DMatrix<f64>,
    pub truth: CommunityLabels,
    pub k: usize,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }
}

fn simple_adjacency(ids: &[i64], edges: &[(i64, i64)]) -> Result<DMatrix<f64>> {
    let index: BTreeMap<i64, usize> = ids.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let n = ids.len();
    let mut a = DMatrix::zeros(n, n);
    for &(s, t) in edges {
        let (Some(&i), Some(&j)) = (index.get(&s), index.get(&t)) else {
            continue; // endpoint filtered out
        };
        if i == j {
            continue; // simple graph: drop self-loops
        }
        // multi-edges collapse to a single 0/1 entry
        a[(i, j)] = 1.0;
        a[(j, i)] = 1.0;
    }
    Ok(a)
}

/// 0/1 adjacency of a GML graph over all of its nodes, ordered by id.
/// Self-loops are dropped and multi-edges collapse to a single entry.
pub fn graph_adjacency(graph: &GmlGraph) -> Result<DMatrix<f64>> {
    let mut ids: Vec<i64> = graph.nodes.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    simple_adjacency(&ids, &graph.edges)
}

/// Builds the karate-club dataset from a 34-node graph and a label fixture
/// with lines `node_id label`.
pub fn load_karate(graph: &GmlGraph, labels_text: &str) -> Result<Dataset> {
    if graph.nodes.len() != 34 {
        return Err(DfmError::Dataset(format!(
            "expected 34 nodes, got {}",
            graph.nodes.len()
        )));
    }
    let mut label_map: BTreeMap<i64, usize> = BTreeMap::new();
    for (lineno, line) in labels_text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let id: i64 = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| DfmError::Dataset(format!("bad label line {}", lineno + 1)))?;
        let lab: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| DfmError::Dataset(format!("bad label line {}", lineno + 1)))?;
        if !(1..=2).contains(&lab) {
            return Err(DfmError::Dataset(format!(
                "label {lab} for node {id} outside {{1,2}}"
            )));
        }
        label_map.insert(id, lab);
    }
    let mut ids: Vec<i64> = graph.nodes.iter().map(|n| n.id).collect();
    ids.sort_unstable();
    let entries: Vec<usize> = ids
        .iter()
        .map(|id| {
            label_map
                .get(id)
                .copied()
                .ok_or_else(|| DfmError::Dataset(format!("missing label for node {id}")))
        })
        .collect::<Result<_>>()?;
    Ok(Dataset {
        name: "karate".into(),
        adjacency: simple_adjacency(&ids, &graph.edges)?,
        truth: CommunityLabels::new(entries, 2)?,
        k: 2,
    })
}

/// Builds the political-books dataset: nodes carry a `value` attribute in
/// {"c","l","n"}; the "n" (Neutral) nodes and their incident edges are
/// removed and the remaining nodes reindexed densely.
pub fn load_polbooks(graph: &GmlGraph) -> Result<Dataset> {
    let mut ids = Vec::new();
    let mut entries = Vec::new();
    let mut nodes: Vec<&crate::gml::GmlNode> = graph.nodes.iter().collect();
    nodes.sort_by_key(|n| n.id);
    for node in nodes {
        let value = node
            .attr("value")
            .and_then(|v| v.as_str())
            .ok_or_else(|| {
                DfmError::Dataset(format!("node {} has no string `value` attribute", node.id))
            })?;
        match value {
            "c" => {
                ids.push(node.id);
                entries.push(1usize);
            }
            "l" => {
                ids.push(node.id);
                entries.push(2usize);
            }
            "n" => {} // Neutral: dropped
            other => {
                return Err(DfmError::Dataset(format!(
                    "unknown label value {other:?} on node {}",
                    node.id
                )))
            }
        }
    }
    Ok(Dataset {
        name: "polbooks".into(),
        adjacency: simple_adjacency(&ids, &graph.edges)?,
        truth: CommunityLabels::new(entries, 2)?,
        k: 2,
    })
}

/// The bundled karate-club dataset.
pub fn karate() -> Result<Dataset> {
    load_karate(&crate::gml::parse_gml(KARATE_GML)?, KARATE_LABELS)
}

/// The bundled political-books dataset (see [`POLBOOKS_GML`]).
pub fn polbooks() -> Result<Dataset> {
    load_polbooks(&crate::gml::parse_gml(POLBOOKS_GML)?)
}

/// One CSV record: a repetition or an aggregate of a sweep grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub experiment: String,
    pub distribution: String,
    pub n: usize,
    pub k: usize,
    pub k0: usize,
    pub rho: f64,
    pub sigma2a: Option<f64>,
    pub m: Option<u64>,
    pub sigma2w: f64,
    pub seed: u64,
    /// Repetition index, or "mean"/"sd" for aggregates.
    pub rep: String,
    pub hamming: f64,
    pub hamming_raw_l0: f64,
    pub fhat: f64,
    pub spectral_deviation: f64,
    pub delta: f64,
    pub elapsed_ms: f64,
}

pub const CSV_HEADER: &str = "experiment,distribution,n,K,K0,rho,sigma2A,m,sigma2W,seed,rep,hamming,hamming_raw_l0,fhat,spectral_deviation,delta,elapsed_ms";

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn results_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            r.experiment,
            r.distribution,
            r.n,
            r.k,
            r.k0,
            r.rho,
            fmt_opt_f64(r.sigma2a),
            r.m.map(|m| m.to_string()).unwrap_or_default(),
            r.sigma2w,
            r.seed,
            r.rep,
            r.hamming,
            r.hamming_raw_l0,
            r.fhat,
            r.spectral_deviation,
            r.delta,
            r.elapsed_ms,
        ));
    }
    out
}

/// Writes the result table; header plus one line per record.
pub fn write_results_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    std::fs::write(path, results_to_csv(rows))?;
    Ok(())
}

/// Parses a result table written by [`write_results_csv`].
pub fn parse_results_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| DfmError::Csv("empty file".into()))?;
    if header != CSV_HEADER {
        return Err(DfmError::Csv(format!("unexpected header: {header}")));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 17 {
            return Err(DfmError::Csv(format!(
                "line {}: expected 17 fields, got {}",
                lineno + 2,
                f.len()
            )));
        }
        let num = |s: &str, what: &str| -> Result<f64> {
            s.parse()
                .map_err(|_| DfmError::Csv(format!("line {}: bad {what} `{s}`", lineno + 2)))
        };
        rows.push(ResultRow {
            experiment: f[0].into(),
            distribution: f[1].into(),
            n: num(f[2], "n")? as usize,
            k: num(f[3], "K")? as usize,
            k0: num(f[4], "K0")? as usize,
            rho: num(f[5], "rho")?,
            sigma2a: if f[6].is_empty() {
                None
            } else {
                Some(num(f[6], "sigma2A")?)
            },
            m: if f[7].is_empty() {
                None
            } else {
                Some(num(f[7], "m")? as u64)
            },
            sigma2w: num(f[8], "sigma2W")?,
            seed: num(f[9], "seed")? as u64,
            rep: f[10].into(),
            hamming: num(f[11], "hamming")?,
            hamming_raw_l0: num(f[12], "hamming_raw_l0")?,
            fhat: num(f[13], "fhat")?,
            spectral_deviation: num(f[14], "spectral_deviation")?,
            delta: num(f[15], "delta")?,
            elapsed_ms: num(f[16], "elapsed_ms")?,
        });
    }
    Ok(rows)
}

/// Writes a dense matrix as comma-separated rows.
pub fn write_matrix_csv(m: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Reads a dense matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(text: &str) -> Result<DMatrix<f64>> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| DfmError::Csv(format!("line {}: bad entry `{s}`", lineno + 1)))
            })
            .collect::<Result<_>>()?;
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(DfmError::Csv("empty matrix".into()));
    }
    let cols = rows[0].len();
    if rows.iter().any(|r| r.len() != cols) {
        return Err(DfmError::Csv("ragged matrix rows".into()));
    }
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gml::parse_gml;

    #[test]
    fn karate_loads() {
        let d = karate().unwrap();
        assert_eq!(d.n(), 34);
        assert_eq!(d.k, 2);
        for i in 0..34 {
            assert_eq!(d.adjacency[(i, i)], 0.0);
            for j in 0..34 {
                let v = d.adjacency[(i, j)];
                assert!(v == 0.0 || v == 1.0);
                assert_eq!(v, d.adjacency[(j, i)]);
            }
        }
        assert!(d.truth.entries().iter().all(|&l| l == 1 || l == 2));
        assert!(d.truth.covers_all_communities());
        // 78 undirected edges
        let m: f64 = d.adjacency.iter().sum::<f64>() / 2.0;
        assert_eq!(m, 78.0);
    }

    #[test]
    fn polbooks_loads_and_filters_neutral() {
        let g = parse_gml(POLBOOKS_GML).unwrap();
        assert_eq!(g.nodes.len(), 105);
        let d = polbooks().unwrap();
        assert_eq!(d.n(), 92);
        assert_eq!(d.k, 2);
        // removed nodes appear in no edge: every adjacency entry belongs to
        // a kept node by construction; verify the induced-subgraph edge count
        let kept: std::collections::HashSet<i64> = g
            .nodes
            .iter()
            .filter(|n| n.attr("value").unwrap().as_str().unwrap() != "n")
            .map(|n| n.id)
            .collect();
        let induced = g
            .edges
            .iter()
            .filter(|(s, t)| kept.contains(s) && kept.contains(t) && s != t)
            .count();
        let m = d.adjacency.iter().sum::<f64>() as usize / 2;
        assert_eq!(m, induced);
    }

    #[test]
    fn polbooks_rejects_unknown_value() {
        let g = parse_gml("graph [ node [ id 0 value \"x\" ] ]").unwrap();
        let err = load_polbooks(&g).unwrap_err();
        assert!(err.to_string().contains("unknown label"));

        let g = parse_gml("graph [ node [ id 0 ] ]").unwrap();
        let err = load_polbooks(&g).unwrap_err();
        assert!(err.to_string().contains("value"));
    }

    #[test]
    fn results_csv_round_trip() {
        let rows = vec![ResultRow {
            experiment: "1a".into(),
            distribution: "normal".into(),
            n: 200,
            k: 3,
            k0: 3,
            rho: 0.4,
            sigma2a: Some(3.0),
            m: None,
            sigma2w: 0.0,
            seed: 42,
            rep: "0".into(),
            hamming: 0.015,
            hamming_raw_l0: 6.0,
            fhat: 0.03,
            spectral_deviation: 12.5,
            delta: 0.11,
            elapsed_ms: 0.0,
        }];
        let text = results_to_csv(&rows);
        assert_eq!(text.lines().count(), 2);
        let back = parse_results_csv(&text).unwrap();
        assert_eq!(back, rows);

        let empty = results_to_csv(&[]);
        assert_eq!(empty.lines().count(), 1);
        assert!(parse_results_csv(&empty).unwrap().is_empty());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0, -0.5, 0.25, 3.0, 0.1, -2.0]);
        let tmp = tempfile::NamedTempFile::new().unwrap();
        write_matrix_csv(&m, tmp.path()).unwrap();
        let text = std::fs::read_to_string(tmp.path()).unwrap();
        assert_eq!(read_matrix_csv(&text).unwrap(), m);
    }
}
