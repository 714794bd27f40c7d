//! Undirected simple graphs in compressed sparse row form, node labels and
//! dense feature matrices, plus the Laplacian and propagation operators.
//!
//! The propagation operator is `P = D^{-1/2} A D^{-1/2}`. Isolated nodes get a
//! zero entry in `D^{-1/2}`, so `P` has a zero row and column for them and the
//! normalized Laplacian keeps an identity row there.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest node count for which dense `N x N` operators are materialized.
pub const DEFAULT_DENSE_CAP: usize = 5000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<usize>,
    degrees: Vec<usize>,
    num_edges: usize,
}

impl Graph {
    /// Builds a simple undirected graph. Duplicate pairs and both orientations
    /// of the same pair collapse to one edge; self-loops are dropped.
    pub fn from_edges(edges: &[(usize, usize)], num_nodes: usize) -> Result<Self> {
        let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); num_nodes];
        for &(u, v) in edges {
            if u >= num_nodes || v >= num_nodes {
                return Err(Error::IndexOutOfRange { u, v, num_nodes });
            }
            if u == v {
                continue;
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut offsets = Vec::with_capacity(num_nodes + 1);
        let mut neighbors = Vec::new();
        let mut degrees = Vec::with_capacity(num_nodes);
        offsets.push(0);
        for mut list in adjacency {
            list.sort_unstable();
            list.dedup();
            degrees.push(list.len());
            neighbors.extend_from_slice(&list);
            offsets.push(neighbors.len());
        }
        let num_edges = neighbors.len() / 2;
        Ok(Graph {
            offsets,
            neighbors,
            degrees,
            num_edges,
        })
    }

    pub fn empty(num_nodes: usize) -> Self {
        Graph {
            offsets: vec![0; num_nodes + 1],
            neighbors: Vec::new(),
            degrees: vec![0; num_nodes],
            num_edges: 0,
        }
    }

    pub fn num_nodes(&self) -> usize {
        self.degrees.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, node: usize) -> usize {
        self.degrees[node]
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.neighbors[self.offsets[node]..self.offsets[node + 1]]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.num_nodes() && v < self.num_nodes() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Each undirected edge once as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.num_nodes()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn edge_list(&self) -> Vec<(usize, usize)> {
        self.edges().collect()
    }

    /// `D^{-1/2}` with zero for isolated nodes.
    pub fn inv_sqrt_degrees(&self) -> Vec<f64> {
        self.degrees
            .iter()
            .map(|&d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
            .collect()
    }

    pub fn is_regular(&self) -> Option<usize> {
        let first = *self.degrees.first()?;
        self.degrees.iter().all(|&d| d == first).then_some(first)
    }

    /// `P x` in one pass over the adjacency structure.
    pub fn propagate(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let n = self.num_nodes();
        if x.nrows() != n {
            return Err(Error::DimensionMismatch {
                context: "propagate",
                expected: n,
                found: x.nrows(),
            });
        }
        let cols = x.ncols();
        let x = x.as_standard_layout();
        let input = x.as_slice().expect("standard layout");
        let scale = self.inv_sqrt_degrees();
        let mut out = Array2::<f64>::zeros((n, cols));
        let output = out.as_slice_mut().expect("freshly allocated");
        for i in 0..n {
            if self.degrees[i] == 0 {
                continue;
            }
            let row = &mut output[i * cols..(i + 1) * cols];
            for &j in self.neighbors(i) {
                let s = scale[j];
                let src = &input[j * cols..(j + 1) * cols];
                for (o, &v) in row.iter_mut().zip(src) {
                    *o += s * v;
                }
            }
            let si = scale[i];
            for o in row.iter_mut() {
                *o *= si;
            }
        }
        Ok(out)
    }

    /// Dense `P`; only for small graphs and test oracles.
    pub fn propagation_dense(&self, cap: usize) -> Result<Array2<f64>> {
        let n = self.check_cap(cap)?;
        let scale = self.inv_sqrt_degrees();
        let mut p = Array2::zeros((n, n));
        for (u, v) in self.edges() {
            let w = scale[u] * scale[v];
            p[[u, v]] = w;
            p[[v, u]] = w;
        }
        Ok(p)
    }

    /// Dense `I - D^{-1/2} A D^{-1/2}`; isolated nodes keep an identity row.
    pub fn normalized_laplacian_dense(&self, cap: usize) -> Result<Array2<f64>> {
        let n = self.check_cap(cap)?;
        let mut l = self.propagation_dense(cap)?;
        l.mapv_inplace(|v| -v);
        for i in 0..n {
            l[[i, i]] = 1.0;
        }
        Ok(l)
    }

    /// Dense `D - A`.
    pub fn unnormalized_laplacian_dense(&self, cap: usize) -> Result<Array2<f64>> {
        let n = self.check_cap(cap)?;
        let mut l = Array2::zeros((n, n));
        for (u, v) in self.edges() {
            l[[u, v]] = -1.0;
            l[[v, u]] = -1.0;
        }
        for i in 0..n {
            l[[i, i]] = self.degrees[i] as f64;
        }
        Ok(l)
    }

    fn check_cap(&self, cap: usize) -> Result<usize> {
        let n = self.num_nodes();
        if n > cap {
            return Err(Error::DenseCapExceeded { n, cap });
        }
        Ok(n)
    }
}

/// Anything that can play the role of `P` in a filter.
pub trait Propagator {
    fn num_nodes(&self) -> usize;
    fn propagate(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>>;
}

impl Propagator for Graph {
    fn num_nodes(&self) -> usize {
        Graph::num_nodes(self)
    }

    fn propagate(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        Graph::propagate(self, x)
    }
}

/// Explicit square operator, for synthetic checks on small instances.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator(Array2<f64>);

impl DenseOperator {
    pub fn new(matrix: Array2<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch {
                context: "dense operator",
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        Ok(DenseOperator(matrix))
    }

    pub fn from_graph(graph: &Graph) -> Result<Self> {
        Ok(DenseOperator(graph.propagation_dense(DEFAULT_DENSE_CAP)?))
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.0
    }
}

impl Propagator for DenseOperator {
    fn num_nodes(&self) -> usize {
        self.0.nrows()
    }

    fn propagate(&self, x: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if x.nrows() != self.0.ncols() {
            return Err(Error::DimensionMismatch {
                context: "propagate",
                expected: self.0.ncols(),
                found: x.nrows(),
            });
        }
        Ok(self.0.dot(&x))
    }
}

/// Per-node class ids in `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelAssignment {
    classes: Vec<usize>,
    num_classes: usize,
    class_sizes: Vec<usize>,
}

impl LabelAssignment {
    pub fn new(classes: Vec<usize>, num_classes: usize) -> Result<Self> {
        let mut class_sizes = vec![0; num_classes];
        for (node, &c) in classes.iter().enumerate() {
            if c >= num_classes {
                return Err(Error::invalid(format!(
                    "node {node} has class {c}, but only {num_classes} classes exist"
                )));
            }
            class_sizes[c] += 1;
        }
        Ok(LabelAssignment {
            classes,
            num_classes,
            class_sizes,
        })
    }

    /// Infers the class count as `max + 1`.
    pub fn from_classes(classes: Vec<usize>) -> Self {
        let k = classes.iter().max().map_or(0, |m| m + 1);
        Self::new(classes, k).expect("class count covers every id")
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn class_of(&self, node: usize) -> usize {
        self.classes[node]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }

    pub fn num_nodes(&self) -> usize {
        self.classes.len()
    }

    /// `Δy = y_0 - y_1`: +1 for class 0, -1 for class 1.
    pub fn delta_y(&self) -> Result<Vec<f64>> {
        if self.num_classes != 2 {
            return Err(Error::NotBinary(self.num_classes));
        }
        Ok(self
            .classes
            .iter()
            .map(|&c| if c == 0 { 1.0 } else { -1.0 })
            .collect())
    }

    /// One-hot `N x K` indicator matrix `Y`.
    pub fn indicator(&self) -> Array2<f64> {
        let mut y = Array2::zeros((self.classes.len(), self.num_classes));
        for (i, &c) in self.classes.iter().enumerate() {
            y[[i, c]] = 1.0;
        }
        y
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut classes = vec![0; self.classes.len()];
        for (old, &new) in perm.iter().enumerate() {
            classes[new] = self.classes[old];
        }
        Self::new(classes, self.num_classes).expect("same class range")
    }
}

/// Dense row-major node features with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix(Array2<f64>);

impl FeatureMatrix {
    pub fn new(values: Array2<f64>) -> Result<Self> {
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let cols = values.ncols().max(1);
            return Err(Error::NonFinite {
                context: format!("feature matrix at row {}, col {}", pos / cols, pos % cols),
            });
        }
        Ok(FeatureMatrix(values.as_standard_layout().into_owned()))
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn view(&self) -> ArrayView2<'_, f64> {
        self.0.view()
    }

    pub fn as_array(&self) -> &Array2<f64> {
        &self.0
    }

    pub fn into_inner(self) -> Array2<f64> {
        self.0
    }
}

/// Number of edges whose endpoints share a class.
pub fn intra_class_edges(graph: &Graph, labels: &LabelAssignment) -> Result<usize> {
    check_label_cover(graph, labels)?;
    Ok(graph
        .edges()
        .filter(|&(u, v)| labels.class_of(u) == labels.class_of(v))
        .count())
}

/// Fraction of undirected edges joining same-class endpoints.
pub fn edge_homophily(graph: &Graph, labels: &LabelAssignment) -> Result<f64> {
    if graph.num_edges() == 0 {
        return Err(Error::EmptyEdgeSet);
    }
    let intra = intra_class_edges(graph, labels)?;
    Ok(intra as f64 / graph.num_edges() as f64)
}

pub(crate) fn check_label_cover(graph: &Graph, labels: &LabelAssignment) -> Result<()> {
    if labels.num_nodes() != graph.num_nodes() {
        return Err(Error::DimensionMismatch {
            context: "labels vs graph nodes",
            expected: graph.num_nodes(),
            found: labels.num_nodes(),
        });
    }
    Ok(())
}
