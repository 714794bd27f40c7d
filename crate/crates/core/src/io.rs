//! On-disk formats: `u<TAB>v` edge lists with `#` comments, `node_id,class_id`
//! label CSV, and features as CSV or a little-endian binary block with a
//! 16-byte `(rows, cols)` header.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use log::info;
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{edge_homophily, FeatureMatrix, Graph, LabelAssignment};

fn parse_error(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_index(path: &Path, line: usize, field: &str, what: &str) -> Result<usize> {
    field.trim().parse().map_err(|_| {
        parse_error(
            path,
            line,
            format!("{what} {field:?} is not a non-negative integer"),
        )
    })
}

/// Edge pairs and one past the largest node id seen.
pub fn read_edges(path: &Path) -> Result<(Vec<(usize, usize)>, usize)> {
    let text = fs::read_to_string(path)?;
    let mut edges = Vec::new();
    let mut bound = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(parse_error(
                path,
                idx + 1,
                format!(
                    "expected two tab-separated node ids, found {} fields",
                    fields.len()
                ),
            ));
        }
        let u = parse_index(path, idx + 1, fields[0], "node id")?;
        let v = parse_index(path, idx + 1, fields[1], "node id")?;
        bound = bound.max(u + 1).max(v + 1);
        edges.push((u, v));
    }
    Ok((edges, bound))
}

pub fn write_edges(path: &Path, graph: &Graph) -> Result<()> {
    let mut out = String::with_capacity(graph.num_edges() * 12);
    out.push_str(&format!(
        "# nodes {} edges {}\n",
        graph.num_nodes(),
        graph.num_edges()
    ));
    for (u, v) in graph.edges() {
        out.push_str(&format!("{u}\t{v}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Every node id in `0..n` must appear exactly once.
pub fn read_labels(path: &Path) -> Result<LabelAssignment> {
    let text = fs::read_to_string(path)?;
    let mut entries: Vec<(usize, usize, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if idx == 0 && line.starts_with("node") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            return Err(parse_error(
                path,
                idx + 1,
                format!("expected node_id,class_id, found {} fields", fields.len()),
            ));
        }
        let node = parse_index(path, idx + 1, fields[0], "node id")?;
        let class = parse_index(path, idx + 1, fields[1], "class id")?;
        entries.push((node, class, idx + 1));
    }
    let n = entries.len();
    let mut classes = vec![None; n];
    for &(node, class, line) in &entries {
        if node >= n {
            return Err(parse_error(
                path,
                line,
                format!("node id {node} outside 0..{n}; labels must cover every node exactly once"),
            ));
        }
        if classes[node].replace(class).is_some() {
            return Err(parse_error(
                path,
                line,
                format!("node {node} labeled twice"),
            ));
        }
    }
    let classes: Vec<usize> = classes
        .into_iter()
        .map(|c| c.expect("all nodes covered"))
        .collect();
    let k = classes.iter().max().map_or(0, |m| m + 1);
    LabelAssignment::new(classes, k)
}

pub fn write_labels(path: &Path, labels: &LabelAssignment) -> Result<()> {
    let mut out = String::from("node_id,class_id\n");
    for (i, c) in labels.classes().iter().enumerate() {
        out.push_str(&format!("{i},{c}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

/// Binary when the extension is `bin`, CSV otherwise.
pub fn read_features(path: &Path) -> Result<FeatureMatrix> {
    if path.extension().is_some_and(|e| e == "bin") {
        read_features_bin(path)
    } else {
        read_features_csv(path)
    }
}

pub fn read_features_csv(path: &Path) -> Result<FeatureMatrix> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut count = 0;
        for field in line.split(',') {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| parse_error(path, idx + 1, format!("{field:?} is not a number")))?;
            values.push(v);
            count += 1;
        }
        match cols {
            None => cols = Some(count),
            Some(c) if c != count => {
                return Err(parse_error(
                    path,
                    idx + 1,
                    format!("expected {c} columns, found {count}"),
                ));
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.unwrap_or(0);
    let array =
        Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::invalid(e.to_string()))?;
    FeatureMatrix::new(array)
}

pub fn write_features_csv(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let mut out = String::new();
    for row in features.as_array().rows() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_features_bin(path: &Path) -> Result<FeatureMatrix> {
    let bytes = fs::read(path)?;
    if bytes.len() < 16 {
        return Err(parse_error(
            path,
            0,
            "binary feature file shorter than its 16-byte header",
        ));
    }
    let word = |i: usize| u64::from_le_bytes(bytes[i..i + 8].try_into().expect("8 bytes"));
    let rows = word(0) as usize;
    let cols = word(8) as usize;
    let expected = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(8))
        .and_then(|b| b.checked_add(16))
        .ok_or_else(|| parse_error(path, 0, "header dimensions overflow"))?;
    if bytes.len() != expected {
        return Err(parse_error(
            path,
            0,
            format!(
                "header says {rows}x{cols} ({expected} bytes) but file has {} bytes",
                bytes.len()
            ),
        ));
    }
    let values: Vec<f64> = bytes[16..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let array =
        Array2::from_shape_vec((rows, cols), values).map_err(|e| Error::invalid(e.to_string()))?;
    FeatureMatrix::new(array)
}

pub fn write_features_bin(path: &Path, features: &FeatureMatrix) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&(features.rows() as u64).to_le_bytes())?;
    file.write_all(&(features.cols() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(features.rows() * features.cols() * 8);
    for v in features.as_array().iter() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&buf)?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPaths {
    pub edges: PathBuf,
    pub labels: PathBuf,
    pub features: PathBuf,
}

impl DatasetPaths {
    /// `edges.tsv`, `labels.csv` and `features.csv` (or `features.bin`) in `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        let bin = dir.join("features.bin");
        DatasetPaths {
            edges: dir.join("edges.tsv"),
            labels: dir.join("labels.csv"),
            features: if bin.exists() {
                bin
            } else {
                dir.join("features.csv")
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetSummary {
    pub nodes: usize,
    pub edges: usize,
    pub classes: usize,
    pub features: usize,
    pub edge_homophily: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: LabelAssignment,
}

impl Dataset {
    pub fn summary(&self) -> DatasetSummary {
        DatasetSummary {
            nodes: self.graph.num_nodes(),
            edges: self.graph.num_edges(),
            classes: self.labels.num_classes(),
            features: self.features.cols(),
            edge_homophily: edge_homophily(&self.graph, &self.labels).ok(),
        }
    }

    pub fn save(&self, dir: &Path, binary_features: bool) -> Result<DatasetPaths> {
        fs::create_dir_all(dir)?;
        let paths = DatasetPaths {
            edges: dir.join("edges.tsv"),
            labels: dir.join("labels.csv"),
            features: dir.join(if binary_features {
                "features.bin"
            } else {
                "features.csv"
            }),
        };
        write_edges(&paths.edges, &self.graph)?;
        write_labels(&paths.labels, &self.labels)?;
        if binary_features {
            write_features_bin(&paths.features, &self.features)?;
        } else {
            write_features_csv(&paths.features, &self.features)?;
        }
        Ok(paths)
    }
}

/// Reads and cross-checks the three files; the label file fixes the node count.
pub fn load_dataset(paths: &DatasetPaths) -> Result<Dataset> {
    let labels = read_labels(&paths.labels)?;
    let (edges, bound) = read_edges(&paths.edges)?;
    let n = labels.num_nodes();
    if bound > n {
        return Err(Error::IndexOutOfRange {
            u: bound - 1,
            v: bound - 1,
            num_nodes: n,
        });
    }
    let graph = Graph::from_edges(&edges, n)?;
    let features = read_features(&paths.features)?;
    if features.rows() != n {
        return Err(Error::DimensionMismatch {
            context: "feature rows vs labeled nodes",
            expected: n,
            found: features.rows(),
        });
    }
    let dataset = Dataset {
        graph,
        features,
        labels,
    };
    let s = dataset.summary();
    info!(
        "loaded {} nodes, {} edges, {} classes, edge homophily {}",
        s.nodes,
        s.edges,
        s.classes,
        s.edge_homophily
            .map_or("n/a".to_string(), |h| format!("{h:.4}"))
    );
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn sample() -> Dataset {
        Dataset {
            graph: Graph::from_edges(&[(0, 1), (1, 2), (2, 3)], 4).unwrap(),
            features: FeatureMatrix::new(array![
                [0.1, -2.5],
                [1e-300, 3.0],
                [0.3333333333333333, 4.0],
                [5.0, 6.0]
            ])
            .unwrap(),
            labels: LabelAssignment::new(vec![0, 0, 1, 1], 2).unwrap(),
        }
    }

    #[test]
    fn round_trip_both_feature_formats() {
        let dir = tempfile::tempdir().unwrap();
        for binary in [false, true] {
            let d = sample();
            let paths = d.save(dir.path(), binary).unwrap();
            let back = load_dataset(&paths).unwrap();
            assert_eq!(back.graph, d.graph);
            assert_eq!(back.labels, d.labels);
            assert_eq!(back.features, d.features);
            let s = back.summary();
            assert_eq!((s.nodes, s.edges, s.classes), (4, 3, 2));
            assert!((s.edge_homophily.unwrap() - 2.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn malformed_rows_name_their_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("labels.csv");
        fs::write(&p, "node_id,class_id\n0,1\n1,x\n").unwrap();
        let err = read_labels(&p).unwrap_err().to_string();
        assert!(err.contains(":3"), "{err}");
        let p = dir.path().join("edges.tsv");
        fs::write(&p, "# header\n0\t1\n1 2\n").unwrap();
        let err = read_edges(&p).unwrap_err().to_string();
        assert!(err.contains(":3"), "{err}");
        let p = dir.path().join("f.csv");
        fs::write(&p, "1,2\n3\n").unwrap();
        let err = read_features_csv(&p).unwrap_err().to_string();
        assert!(err.contains(":2"), "{err}");
    }

    #[test]
    fn edge_ids_beyond_labels_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let paths = sample().save(dir.path(), false).unwrap();
        fs::write(&paths.edges, "0\t9\n").unwrap();
        assert!(matches!(
            load_dataset(&paths),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn truncated_binary_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.bin");
        let mut bytes = 2u64.to_le_bytes().to_vec();
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&1.0f64.to_le_bytes());
        fs::write(&p, bytes).unwrap();
        assert!(read_features_bin(&p).is_err());
    }
}
