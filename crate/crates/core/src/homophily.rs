//! Class-level interaction probabilities and homophily degrees.
//!
//! `Π̃^k = R^{-1/2} Yᵀ P^k Y R^{-1/2}` summarizes how `k` steps of propagation
//! mix classes; the k-homophily degree `H_k` collapses it to a scalar. The
//! module also carries the idealized two-class moment calculations used to
//! compare even and full filters, and the train/test homophily gap report.

use std::fmt;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::filters::PolyFilter;
use crate::graph::{self, Graph, LabelAssignment};

/// `Π̃^k`, a symmetric `K x K` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionMatrix {
    pub order: usize,
    pub values: Array2<f64>,
}

pub fn interaction_probability(
    graph: &Graph,
    labels: &LabelAssignment,
    hops: usize,
) -> Result<InteractionMatrix> {
    graph::check_label_cover(graph, labels)?;
    if let Some(empty) = labels.class_sizes().iter().position(|&s| s == 0) {
        return Err(Error::EmptyClass(empty));
    }
    let indicator = labels.indicator();
    let mut walked = indicator.clone();
    for _ in 0..hops {
        walked = graph.propagate(walked.view())?;
    }
    let mut values = indicator.t().dot(&walked);
    let scale: Vec<f64> = labels
        .class_sizes()
        .iter()
        .map(|&s| 1.0 / (s as f64).sqrt())
        .collect();
    for ((l, m), v) in values.indexed_iter_mut() {
        *v *= scale[l] * scale[m];
    }
    Ok(InteractionMatrix {
        order: hops,
        values,
    })
}

/// The k-homophily functional applied to any `K x K` class matrix:
/// `(1/N) Σ_l (R_l M_ll - Σ_{m≠l} √(R_m R_l) M_lm)`.
pub fn homophily_functional(
    matrix: &Array2<f64>,
    class_sizes: &[usize],
    num_nodes: usize,
) -> Result<f64> {
    let k = class_sizes.len();
    if matrix.nrows() != k || matrix.ncols() != k {
        return Err(Error::DimensionMismatch {
            context: "class matrix vs class count",
            expected: k,
            found: matrix.nrows(),
        });
    }
    let mut total = 0.0;
    for l in 0..k {
        let rl = class_sizes[l] as f64;
        total += rl * matrix[[l, l]];
        for m in (0..k).filter(|&m| m != l) {
            total -= (class_sizes[m] as f64 * rl).sqrt() * matrix[[l, m]];
        }
    }
    Ok(total / num_nodes as f64)
}

/// `H_k(Π̃)`.
pub fn k_homophily_degree(
    pi: &InteractionMatrix,
    class_sizes: &[usize],
    num_nodes: usize,
) -> Result<f64> {
    homophily_functional(&pi.values, class_sizes, num_nodes)
}

/// Rewrites `Σ w_j (1-x)^j` as `Σ θ_i x^i`: `θ_i = (-1)^i Σ_{j≥i} C(j, i) w_j`.
/// Applying it twice returns the input.
pub fn coefficient_reexpansion(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut binomial = vec![1.0f64; n];
    let mut theta = vec![0.0; n];
    // binomial holds row j of Pascal's triangle while w_j is distributed
    for (j, &wj) in w.iter().enumerate() {
        if j > 0 {
            for i in (1..j).rev() {
                binomial[i] += binomial[i - 1];
            }
            binomial[j] = 1.0;
        }
        for i in 0..=j {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            theta[i] += sign * binomial[i] * wj;
        }
    }
    theta
}

/// Transformed 1-homophily `H_1(g(I - Π̃))` computed two independent ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransformedHomophily {
    /// Horner evaluation of `g` at the class matrix `I - Π̃` using the filter
    /// rewritten over powers of `λ`.
    pub matrix_polynomial: f64,
    /// `θ_0 + Σ_{i≥1} θ_i H(Π̃^i)` with `θ` the coefficients over powers of `P`.
    pub theta_expansion: f64,
}

impl TransformedHomophily {
    pub fn value(&self) -> f64 {
        self.matrix_polynomial
    }

    pub fn discrepancy(&self) -> f64 {
        (self.matrix_polynomial - self.theta_expansion).abs()
    }
}

pub fn transformed_homophily(
    graph: &Graph,
    labels: &LabelAssignment,
    filter: &PolyFilter,
) -> Result<TransformedHomophily> {
    transformed_homophily_with(graph, labels, filter, coefficient_reexpansion)
}

/// As [`transformed_homophily`], with the basis change supplied by the caller.
/// Lets the property suite confirm that a faulty re-expansion is detected.
pub fn transformed_homophily_with(
    graph: &Graph,
    labels: &LabelAssignment,
    filter: &PolyFilter,
    reexpand: fn(&[f64]) -> Vec<f64>,
) -> Result<TransformedHomophily> {
    let pi = interaction_probability(graph, labels, 1)?;
    let sizes = labels.class_sizes();
    let n = labels.num_nodes();
    let k = sizes.len();
    let identity = Array2::<f64>::eye(k);
    let p_basis = filter.to_full().coefficients;

    let monomial = reexpand(&p_basis);
    let shifted = &identity - &pi.values;
    let mut acc = Array2::<f64>::zeros((k, k));
    for &a in monomial.iter().rev() {
        acc = acc.dot(&shifted) + &(&identity * a);
    }
    let matrix_polynomial = homophily_functional(&acc, sizes, n)?;

    let mut power = identity.clone();
    let mut theta_expansion = 0.0;
    for (i, &theta) in p_basis.iter().enumerate() {
        if i > 0 {
            power = power.dot(&pi.values);
        }
        theta_expansion += theta * homophily_functional(&power, sizes, n)?;
    }
    Ok(TransformedHomophily {
        matrix_polynomial,
        theta_expansion,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

/// Mean and variance of `Σ θ_j t^j` for `t ~ Uniform(-1, 1)`, the idealized
/// two-class model where `H_j = (2h-1)^j` and `h` is uniform on `[0, 1]`.
pub fn coefficient_moments(theta: &[f64]) -> Moments {
    let moment = |p: usize| {
        if p % 2 == 0 {
            1.0 / (p as f64 + 1.0)
        } else {
            0.0
        }
    };
    let mean: f64 = theta.iter().enumerate().map(|(j, &c)| c * moment(j)).sum();
    let mut second = 0.0;
    for (i, &a) in theta.iter().enumerate() {
        for (j, &b) in theta.iter().enumerate() {
            second += a * b * moment(i + j);
        }
    }
    Moments {
        mean,
        variance: second - mean * mean,
    }
}

/// Zeroes the odd-index coefficients.
pub fn even_truncation(theta: &[f64]) -> Vec<f64> {
    theta
        .iter()
        .enumerate()
        .map(|(i, &c)| if i % 2 == 0 { c } else { 0.0 })
        .collect()
}

/// Expected same-class probability of a length-`k` walk under uniform `h`,
/// through the recurrence `e_1 = 1/2`, `e_2 = 2/3`, `e_k = (e_{k-2} + 1)/3`.
pub fn random_walk_expectation(steps: usize) -> Result<f64> {
    if steps < 1 {
        return Err(Error::invalid("random walk length must be at least 1"));
    }
    let mut e = if steps % 2 == 1 { 0.5 } else { 2.0 / 3.0 };
    let mut k = if steps % 2 == 1 { 1 } else { 2 };
    while k < steps {
        e = (e + 1.0) / 3.0;
        k += 2;
    }
    Ok(e)
}

/// `Q^k` for the between-class walk with `h` on the diagonal and
/// `(1-h)/(K-1)` elsewhere.
pub fn between_class_walk(h: f64, num_classes: usize, steps: usize) -> Result<Array2<f64>> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::invalid(format!(
            "homophily must lie in [0, 1], got {h}"
        )));
    }
    if num_classes < 2 {
        return Err(Error::invalid(
            "between-class walk needs at least two classes",
        ));
    }
    let off = (1.0 - h) / (num_classes - 1) as f64;
    let q = Array2::from_shape_fn(
        (num_classes, num_classes),
        |(i, j)| if i == j { h } else { off },
    );
    let mut out = Array2::eye(num_classes);
    for _ in 0..steps {
        out = out.dot(&q);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub hop: usize,
    pub train: f64,
    pub test: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapReport {
    pub rows: Vec<GapRow>,
}

impl GapReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hop,train,test,gap\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{:.6},{:.6},{:.6}\n",
                r.hop, r.train, r.test, r.gap
            ));
        }
        out
    }
}

impl fmt::Display for GapReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:>5} | {:>8} | {:>8} | {:>8}",
            "hop", "train", "test", "gap"
        )?;
        writeln!(f, "{}", "-".repeat(39))?;
        for r in &self.rows {
            writeln!(
                f,
                "{:>5} | {:>8.4} | {:>8.4} | {:>8.4}",
                r.hop, r.train, r.test, r.gap
            )?;
        }
        Ok(())
    }
}

/// Homophily at hop `k`: edge homophily for one hop, otherwise `H_k`
/// (mapped to `[0, 1]` via `(H_k + 1)/2` for binary labels).
pub fn hop_homophily(graph: &Graph, labels: &LabelAssignment, hop: usize) -> Result<f64> {
    if hop == 0 {
        return Err(Error::invalid("hops start at 1"));
    }
    if hop == 1 {
        return graph::edge_homophily(graph, labels);
    }
    let pi = interaction_probability(graph, labels, hop)?;
    let h = k_homophily_degree(&pi, labels.class_sizes(), labels.num_nodes())?;
    Ok(if labels.num_classes() == 2 {
        (h + 1.0) / 2.0
    } else {
        h
    })
}

pub fn homophily_gap_report(
    train_graph: &Graph,
    test_graph: &Graph,
    train_labels: &LabelAssignment,
    test_labels: &LabelAssignment,
    hops: &[usize],
) -> Result<GapReport> {
    let rows = hops
        .iter()
        .map(|&hop| {
            let train = hop_homophily(train_graph, train_labels, hop)?;
            let test = hop_homophily(test_graph, test_labels, hop)?;
            Ok(GapRow {
                hop,
                train,
                test,
                gap: (train - test).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapReport { rows })
}
