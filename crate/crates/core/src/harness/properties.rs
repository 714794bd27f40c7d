//! Seeded property checks across every module, each reporting its measured
//! residual next to the tolerance it is judged against.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::attacks::{attack, AttackKind, AttackSpec};
use crate::error::Result;
use crate::filters::{Parity, PolyFilter};
use crate::graph::{
    edge_homophily, DenseOperator, FeatureMatrix, Graph, LabelAssignment, DEFAULT_DENSE_CAP,
};
use crate::homophily::{
    between_class_walk, coefficient_moments, coefficient_reexpansion, even_truncation,
    interaction_probability, random_walk_expectation, transformed_homophily_with,
};
use crate::model::{
    forward_cached, gradient_check, train, DataView, DropoutMasks, ModelParams, TrainConfig,
    Variant,
};
use crate::spectral::{
    dirichlet_energy, eigendecompose, fit_filter_least_squares, label_spectrum, ring_basis,
    ring_srl_gap, srl, srl_inner_product, verify_homophily_identity, LaplacianKind, Spectrum,
};
use crate::synth::{
    erdos_renyi, generate_csbm, lambda_mu_to_phi, phi_to_lambda_mu, random_regular_graph,
    two_state_walk_oracle, CsbmParams, DEFAULT_EPSILON, DEFAULT_M_CONST,
};

/// Tolerances every check is judged against.
pub mod tolerance {
    pub const PROPAGATE_DENSE: f64 = 1e-12;
    pub const SPECTRUM_EXTREMES: f64 = 1e-9;
    pub const EIGEN_RECONSTRUCTION: f64 = 1e-8;
    pub const EIGEN_ORTHONORMALITY: f64 = 1e-9;
    pub const EIGEN_TRACE: f64 = 1e-9;
    pub const EIGENVECTOR_SCALING: f64 = 1e-9;
    pub const FILTER_LINEARITY: f64 = 1e-10;
    pub const EVEN_SYMMETRY: f64 = 1e-12;
    pub const RING_GAP_ORACLE: f64 = 1e-9;
    pub const HOMOPHILY_IDENTITY: f64 = 1e-9;
    pub const SPECTRUM_NORMALIZATION: f64 = 1e-8;
    pub const SRL_FORMS: f64 = 1e-10;
    pub const INTERACTION_SYMMETRY: f64 = 1e-10;
    pub const DUAL_PATH: f64 = 1e-9;
    pub const MOMENTS: f64 = 1e-12;
    pub const WALK_RECURRENCE: f64 = 1e-10;
    pub const BETWEEN_CLASS_WALK: f64 = 1e-12;
    pub const MONTE_CARLO_SIGMAS: f64 = 3.0;
    pub const CSBM_DEGREE_RELATIVE: f64 = 0.10;
    pub const CSBM_HOMOPHILY: f64 = 0.03;
    pub const PHI_ROUND_TRIP: f64 = 1e-9;
    pub const GRADIENT: f64 = 1e-4;
    pub const FINITE_DIFFERENCE_STEP: f64 = 1e-5;
    pub const SIGN_FLIP: f64 = 1e-12;
    pub const ODD_ZEROED: f64 = 1e-12;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyCheck {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub residual: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl PropertyCheck {
    /// Passes when `residual <= tolerance` (a NaN residual fails).
    pub fn at_most(
        module: &str,
        name: &str,
        residual: f64,
        tolerance: f64,
        detail: impl Into<String>,
    ) -> Self {
        PropertyCheck {
            module: module.to_string(),
            name: name.to_string(),
            passed: residual <= tolerance,
            residual,
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub seed: u64,
    pub checks: Vec<PropertyCheck>,
}

impl PropertyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &PropertyCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("module,name,passed,residual,tolerance\n");
        for c in &self.checks {
            out.push_str(&format!(
                "{},{},{},{:.6e},{:.6e}\n",
                c.module, c.name, c.passed, c.residual, c.tolerance
            ));
        }
        out
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Binary labels with both classes present.
fn random_binary_labels<R: Rng>(rng: &mut R, n: usize) -> LabelAssignment {
    let classes = (0..n)
        .map(|i| match i {
            0 => 0,
            1 => 1,
            _ => usize::from(rng.gen_bool(0.5)),
        })
        .collect();
    LabelAssignment::new(classes, 2).expect("classes in range")
}

fn random_labels<R: Rng>(rng: &mut R, n: usize, k: usize) -> LabelAssignment {
    let classes = (0..n)
        .map(|i| if i < k { i } else { rng.gen_range(0..k) })
        .collect();
    LabelAssignment::new(classes, k).expect("classes in range")
}

/// `G(n, p)` with at least one edge.
fn random_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> Graph {
    let g = erdos_renyi(n, p, rng).expect("valid probability");
    if g.num_edges() > 0 || n < 2 {
        return g;
    }
    let mut edges = g.edge_list();
    edges.push((0, 1));
    Graph::from_edges(&edges, n).expect("in range")
}

fn random_coefficients<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

// ---------------------------------------------------------------- graph

pub fn propagate_matches_dense(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 1);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(1..=50);
        let p = rng.gen_range(0.0..0.5);
        let g = erdos_renyi(n, p, &mut rng)?;
        let x = Array2::from_shape_simple_fn((n, 3), || rng.gen_range(-1.0..1.0));
        let sparse = g.propagate(x.view())?;
        let dense = g.propagation_dense(DEFAULT_DENSE_CAP)?.dot(&x);
        worst = worst.max(max_abs_diff(&sparse, &dense));
    }
    Ok(PropertyCheck::at_most(
        "graph",
        "propagate_matches_dense_product",
        worst,
        tolerance::PROPAGATE_DENSE,
        format!("{cases} random graphs with N <= 50"),
    ))
}

/// Even rings reach `λ = 2`; odd rings and complete graphs stay below it.
pub fn spectrum_extremes() -> Result<PropertyCheck> {
    let ring =
        |n: usize| Graph::from_edges(&(0..n).map(|i| (i, (i + 1) % n)).collect::<Vec<_>>(), n);
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for n in (4..=20).step_by(2) {
        let d = eigendecompose(&ring(n)?.normalized_laplacian_dense(DEFAULT_DENSE_CAP)?)?;
        let top = *d.eigenvalues.last().expect("non-empty");
        worst = worst.max((top - 2.0).abs()).max(d.eigenvalues[0].abs());
    }
    let mut odd_top = 0.0f64;
    for n in (5..=21).step_by(2) {
        let d = eigendecompose(&ring(n)?.normalized_laplacian_dense(DEFAULT_DENSE_CAP)?)?;
        odd_top = odd_top.max(*d.eigenvalues.last().expect("non-empty"));
        worst = worst.max(d.eigenvalues[0].abs());
    }
    for n in 3..=12 {
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let d = eigendecompose(
            &Graph::from_edges(&edges, n)?.normalized_laplacian_dense(DEFAULT_DENSE_CAP)?,
        )?;
        odd_top = odd_top.max(*d.eigenvalues.last().expect("non-empty"));
        worst = worst.max(d.eigenvalues[0].abs());
    }
    if odd_top >= 2.0 - tolerance::SPECTRUM_EXTREMES {
        worst = f64::INFINITY;
        detail.push_str("non-bipartite graph reached lambda = 2; ");
    }
    detail.push_str(&format!("largest non-bipartite eigenvalue {odd_top:.6}"));
    Ok(PropertyCheck::at_most(
        "graph",
        "laplacian_spectrum_extremes",
        worst,
        tolerance::SPECTRUM_EXTREMES,
        detail,
    ))
}

pub fn homophily_relabel_invariance(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 2);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(2..=40);
        let draw = rng.gen_range(0.05..0.5);
        let g = random_graph(&mut rng, n, draw);
        let draw = rng.gen_range(1..=n.min(4));
        let labels = random_labels(&mut rng, n, draw);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let moved: Vec<(usize, usize)> = g.edges().map(|(u, v)| (perm[u], perm[v])).collect();
        let g2 = Graph::from_edges(&moved, n)?;
        let h1 = edge_homophily(&g, &labels)?;
        let h2 = edge_homophily(&g2, &labels.permuted(&perm))?;
        worst = worst.max((h1 - h2).abs());
    }
    Ok(PropertyCheck::at_most(
        "graph",
        "edge_homophily_relabel_invariance",
        worst,
        0.0,
        format!("{cases} random permutations"),
    ))
}

// ---------------------------------------------------------------- filters

pub fn even_filter_eigenvector_scaling(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 3);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(2..=30);
        let g = random_graph(&mut rng, n, 0.3);
        let d = eigendecompose(&g.normalized_laplacian_dense(DEFAULT_DENSE_CAP)?)?;
        let len = rng.gen_range(1..=4);
        let f = PolyFilter::even(random_coefficients(&mut rng, len));
        let filtered = f.apply(&g, d.basis.view())?;
        for (i, &l) in d.eigenvalues.iter().enumerate() {
            let g_l = f.eval(l);
            for node in 0..n {
                worst = worst.max((filtered[[node, i]] - g_l * d.basis[[node, i]]).abs());
            }
        }
    }
    Ok(PropertyCheck::at_most(
        "filters",
        "even_filter_scales_eigenvectors",
        worst,
        tolerance::EIGENVECTOR_SCALING,
        format!("{cases} graphs with N <= 30"),
    ))
}

pub fn filter_linearity(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 4);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(2..=40);
        let g = random_graph(&mut rng, n, 0.2);
        let parity = if rng.gen_bool(0.5) {
            Parity::Full
        } else {
            Parity::Even
        };
        let len = rng.gen_range(1..=8);
        let f = PolyFilter::new(parity, random_coefficients(&mut rng, len));
        let h1 = Array2::from_shape_simple_fn((n, 2), || rng.gen_range(-1.0..1.0));
        let h2 = Array2::from_shape_simple_fn((n, 2), || rng.gen_range(-1.0..1.0));
        let (a, b) = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let combined = f.apply(&g, (&h1 * a + &h2 * b).view())?;
        let separate = f.apply(&g, h1.view())? * a + f.apply(&g, h2.view())? * b;
        worst = worst.max(max_abs_diff(&combined, &separate));
    }
    Ok(PropertyCheck::at_most(
        "filters",
        "apply_is_linear",
        worst,
        tolerance::FILTER_LINEARITY,
        format!("{cases} random filters"),
    ))
}

/// `|g(λ) - g(2-λ)|` over a 201-point grid, including the `g(0) = g(2)` ends.
pub fn even_filter_symmetry(seed: u64, vectors: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 5);
    let mut worst = 0.0f64;
    for _ in 0..vectors {
        let len = rng.gen_range(1..=8);
        let f = PolyFilter::even(random_coefficients(&mut rng, len));
        for i in 0..=200 {
            let l = 2.0 * i as f64 / 200.0;
            worst = worst.max((f.eval(l) - f.eval(2.0 - l)).abs());
        }
        worst = worst.max((f.eval(0.0) - f.eval(2.0)).abs());
    }
    Ok(PropertyCheck::at_most(
        "filters",
        "even_filter_symmetry",
        worst,
        tolerance::EVEN_SYMMETRY,
        format!("{vectors} even coefficient vectors on a 201-point grid"),
    ))
}

/// Brute-force SRL gap between the alternating ring (`h = 0`) and the uniform
/// ring (`h = 1`) with a constant feature spectrum.
pub fn ring_srl_gap_oracle(filter: &PolyFilter, num_nodes: usize, beta_const: f64) -> Result<f64> {
    let ring = ring_basis(num_nodes)?;
    let alternating: Vec<f64> = (0..num_nodes)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    let uniform = vec![1.0; num_nodes];
    let beta = Spectrum(vec![beta_const; num_nodes]);
    let a0 = label_spectrum(&ring, &alternating)?;
    let a1 = label_spectrum(&ring, &uniform)?;
    Ok(srl(&a0, &beta, filter, &ring.eigenvalues)? - srl(&a1, &beta, filter, &ring.eigenvalues)?)
}

/// Closed-form gap is zero for even filters and matches brute force for full ones.
pub fn ring_gap_checks(seed: u64, filters: usize) -> Result<Vec<PropertyCheck>> {
    let mut rng = rng_for(seed, 6);
    let mut even_worst = 0.0f64;
    let mut oracle_worst = 0.0f64;
    for _ in 0..filters {
        let len = rng.gen_range(1..=6);
        let even = PolyFilter::even(random_coefficients(&mut rng, len));
        for n in [8, 16, 32] {
            if let Ok(gap) = ring_srl_gap(&even, n, 1.0) {
                even_worst = even_worst.max(gap.abs());
            }
        }
        let len = rng.gen_range(2..=11);
        let full = PolyFilter::full(random_coefficients(&mut rng, len));
        let beta = rng.gen_range(0.1..3.0);
        for n in [8, 16, 32] {
            let closed = ring_srl_gap(&full, n, beta)?;
            let brute = ring_srl_gap_oracle(&full, n, beta)?;
            oracle_worst = oracle_worst.max((closed - brute).abs());
        }
    }
    Ok(vec![
        PropertyCheck::at_most(
            "spectral",
            "ring_gap_zero_for_even_filters",
            even_worst,
            0.0,
            format!("{filters} even filters on rings of 8, 16, 32"),
        ),
        PropertyCheck::at_most(
            "spectral",
            "ring_gap_matches_srl_oracle",
            oracle_worst,
            tolerance::RING_GAP_ORACLE,
            format!("{filters} full filters on rings of 8, 16, 32"),
        ),
    ])
}

// ---------------------------------------------------------------- spectral

pub fn eigendecomposition_accuracy(seed: u64, cases: usize) -> Result<Vec<PropertyCheck>> {
    let mut rng = rng_for(seed, 7);
    let (mut recon, mut ortho, mut trace) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..cases {
        let n = rng.gen_range(1..=40);
        let raw = Array2::from_shape_simple_fn((n, n), || rng.gen_range(-1.0..1.0));
        let sym = (&raw + &raw.t()) * 0.5;
        let d = eigendecompose(&sym)?;
        recon = recon.max(max_abs_diff(&d.reconstruct(), &sym));
        let gram = d.basis.t().dot(&d.basis);
        ortho = ortho.max(max_abs_diff(&gram, &Array2::eye(n)));
        let sum: f64 = d.eigenvalues.iter().sum();
        trace = trace.max((sum - sym.diag().sum()).abs());
    }
    let detail = format!("{cases} random symmetric matrices with N <= 40");
    Ok(vec![
        PropertyCheck::at_most(
            "spectral",
            "eigen_reconstruction",
            recon,
            tolerance::EIGEN_RECONSTRUCTION,
            detail.clone(),
        ),
        PropertyCheck::at_most(
            "spectral",
            "eigen_orthonormality",
            ortho,
            tolerance::EIGEN_ORTHONORMALITY,
            detail.clone(),
        ),
        PropertyCheck::at_most(
            "spectral",
            "eigen_trace",
            trace,
            tolerance::EIGEN_TRACE,
            detail,
        ),
    ])
}

/// Normalized Laplacian on random `k`-regular graphs, `k ∈ {3, 4, 6}`, `n ≤ max_nodes`.
pub fn homophily_identity_regular(
    seed: u64,
    cases: usize,
    max_nodes: usize,
) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 8);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let k = *[3usize, 4, 6].choose(&mut rng).expect("non-empty");
        let mut n = rng.gen_range(k + 2..=max_nodes.max(k + 2));
        if (n * k) % 2 == 1 {
            n = if n < max_nodes { n + 1 } else { n - 1 };
        }
        let g = random_regular_graph(n, k, rng.gen())?;
        let labels = random_binary_labels(&mut rng, n);
        worst = worst.max(verify_homophily_identity(
            &g,
            &labels,
            LaplacianKind::Normalized,
        )?);
    }
    Ok(PropertyCheck::at_most(
        "spectral",
        "homophily_identity_regular_normalized",
        worst,
        tolerance::HOMOPHILY_IDENTITY,
        format!("{cases} random regular graphs, n <= {max_nodes}"),
    ))
}

pub fn homophily_identity_unnormalized(
    seed: u64,
    cases: usize,
    max_nodes: usize,
) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 9);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(3..=max_nodes.max(3));
        let p = rng.gen_range(0.02..0.5);
        let g = random_graph(&mut rng, n, p);
        let labels = random_binary_labels(&mut rng, n);
        worst = worst.max(verify_homophily_identity(
            &g,
            &labels,
            LaplacianKind::Unnormalized,
        )?);
    }
    Ok(PropertyCheck::at_most(
        "spectral",
        "homophily_identity_arbitrary_unnormalized",
        worst,
        tolerance::HOMOPHILY_IDENTITY,
        format!("{cases} random graphs, n <= {max_nodes}"),
    ))
}

/// `Δyᵀ L Δy = 4(1-h)m` in integer arithmetic, and the floating-point energy
/// matches it exactly.
pub fn dirichlet_identity(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 10);
    let mut worst = 0.0f64;
    let mut mismatches = 0usize;
    for _ in 0..cases {
        let n = rng.gen_range(2..=60);
        let p = rng.gen_range(0.02..0.6);
        let g = random_graph(&mut rng, n, p);
        let labels = random_binary_labels(&mut rng, n);
        let dy: Vec<i64> = labels
            .classes()
            .iter()
            .map(|&c| if c == 0 { 1 } else { -1 })
            .collect();
        // quadratic form through D - A
        let mut quadratic: i64 = (0..n).map(|i| g.degree(i) as i64 * dy[i] * dy[i]).sum();
        for (u, v) in g.edges() {
            quadratic -= 2 * dy[u] * dy[v];
        }
        let m = g.num_edges() as i64;
        let intra = g.edges().filter(|&(u, v)| dy[u] == dy[v]).count() as i64;
        let expected = 4 * (m - intra);
        if quadratic != expected {
            mismatches += 1;
        }
        let energy = dirichlet_energy(&g, &labels.delta_y()?)?;
        worst = worst.max((energy - expected as f64).abs());
    }
    if mismatches > 0 {
        worst = worst.max(mismatches as f64);
    }
    Ok(PropertyCheck::at_most(
        "spectral",
        "dirichlet_identity_exact",
        worst,
        0.0,
        format!("{cases} random graphs, {mismatches} integer mismatches"),
    ))
}

/// `Σ α_i² = N` for `α = Uᵀ Δy`.
pub fn spectrum_normalization(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 11);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(2..=60);
        let draw = rng.gen_range(0.05..0.5);
        let g = random_graph(&mut rng, n, draw);
        let labels = random_binary_labels(&mut rng, n);
        let d = eigendecompose(&g.normalized_laplacian_dense(DEFAULT_DENSE_CAP)?)?;
        let alpha = label_spectrum(&d, &labels.delta_y()?)?;
        worst = worst.max((alpha.energy() - n as f64).abs());
    }
    Ok(PropertyCheck::at_most(
        "spectral",
        "label_spectrum_energy_equals_n",
        worst,
        tolerance::SPECTRUM_NORMALIZATION,
        format!("{cases} random graphs"),
    ))
}

pub fn srl_forms_agree(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 12);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(3..=30);
        let g = random_graph(&mut rng, n, 0.3);
        let labels = random_binary_labels(&mut rng, n);
        let d = eigendecompose(&g.normalized_laplacian_dense(DEFAULT_DENSE_CAP)?)?;
        let alpha = label_spectrum(&d, &labels.delta_y()?)?;
        let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let beta = d.project(&x)?;
        let len = rng.gen_range(1..=6);
        let f = PolyFilter::full(random_coefficients(&mut rng, len));
        let (Ok(a), Ok(b)) = (
            srl(&alpha, &beta, &f, &d.eigenvalues),
            srl_inner_product(&alpha, &beta, &f, &d.eigenvalues),
        ) else {
            continue;
        };
        worst = worst.max((a - b).abs());
    }
    Ok(PropertyCheck::at_most(
        "spectral",
        "srl_closed_forms_agree",
        worst,
        tolerance::SRL_FORMS,
        format!("{cases} random graphs and filters"),
    ))
}

/// Filters fit to a homophilic ring spectrum and scored on the reversed
/// (heterophilic) spectrum: the even fit's SRL gap never exceeds the full fit's.
pub fn srl_gap_ordering(seed: u64, trials: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 13);
    let mut worst = f64::NEG_INFINITY;
    let mut full_min = f64::INFINITY;
    for _ in 0..trials {
        let n = 2 * rng.gen_range(4..=20);
        let ring = ring_basis(n)?;
        let l = &ring.eigenvalues;
        let mut alpha: Vec<f64> = l
            .iter()
            .map(|&x| rng.gen_range(0.5..1.5) * (-3.0 * x).exp())
            .collect();
        let scale = (n as f64 / alpha.iter().map(|a| a * a).sum::<f64>()).sqrt();
        alpha.iter_mut().for_each(|a| *a *= scale);
        let reversed: Vec<f64> = alpha.iter().rev().copied().collect();
        let mut beta = vec![0.0; n];
        for i in 0..n / 2 {
            let b = rng.gen_range(0.2..1.0);
            beta[i] = b;
            beta[n - 1 - i] = b;
        }
        let (a_train, a_test, b) = (Spectrum(alpha), Spectrum(reversed), Spectrum(beta));
        let full = fit_filter_least_squares(&a_train, &b, l, Parity::Full, 11)?;
        let even = fit_filter_least_squares(&a_train, &b, l, Parity::Even, 6)?;
        let gap = |f: &PolyFilter| -> Result<f64> {
            Ok((srl(&a_test, &b, f, l)? - srl(&a_train, &b, f, l)?).abs())
        };
        let (g_full, g_even) = (gap(&full)?, gap(&even)?);
        worst = worst.max(g_even - g_full);
        full_min = full_min.min(g_full);
    }
    Ok(PropertyCheck::at_most(
        "spectral",
        "even_fit_has_smaller_srl_gap",
        worst.max(0.0),
        0.0,
        format!("{trials} ring trials; smallest full-filter gap {full_min:.4}"),
    ))
}

// ---------------------------------------------------------------- homophily

pub fn interaction_symmetry(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 14);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(6..=40);
        let g = random_graph(&mut rng, n, 0.25);
        let draw = rng.gen_range(2..=4);
        let labels = random_labels(&mut rng, n, draw);
        for hops in 1..=4 {
            let pi = interaction_probability(&g, &labels, hops)?;
            worst = worst.max(max_abs_diff(&pi.values, &pi.values.t().to_owned()));
        }
        let zero = interaction_probability(&g, &labels, 0)?;
        worst = worst.max(max_abs_diff(
            &zero.values,
            &Array2::eye(labels.num_classes()),
        ));
    }
    Ok(PropertyCheck::at_most(
        "homophily",
        "interaction_matrix_symmetric_and_zero_hop_identity",
        worst,
        tolerance::INTERACTION_SYMMETRY,
        format!("{cases} random graphs, hops 0..=4"),
    ))
}

/// Both evaluation paths of transformed homophily, with a caller-supplied
/// basis change so a broken re-expansion can be shown to fail.
pub fn transformed_dual_path(
    seed: u64,
    cases: usize,
    reexpand: fn(&[f64]) -> Vec<f64>,
) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 15);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(8..=30);
        let g = random_graph(&mut rng, n, 0.3);
        let draw = rng.gen_range(2..=4);
        let labels = random_labels(&mut rng, n, draw);
        let parity = if rng.gen_bool(0.5) {
            Parity::Full
        } else {
            Parity::Even
        };
        let len = rng.gen_range(1..=6);
        let f = PolyFilter::new(parity, random_coefficients(&mut rng, len));
        worst = worst.max(transformed_homophily_with(&g, &labels, &f, reexpand)?.discrepancy());
    }
    Ok(PropertyCheck::at_most(
        "homophily",
        "transformed_homophily_dual_path",
        worst,
        tolerance::DUAL_PATH,
        format!("{cases} random graphs and filters"),
    ))
}

/// Mean unchanged by dropping odd terms; variance drops by exactly `E[(odd)²]`.
pub fn moment_checks(seed: u64, vectors: usize) -> Result<Vec<PropertyCheck>> {
    let mut rng = rng_for(seed, 16);
    let (mut mean_worst, mut decomposition_worst, mut sign_worst) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..vectors {
        let len = rng.gen_range(1..=12);
        let theta = random_coefficients(&mut rng, len);
        let full = coefficient_moments(&theta);
        let even = coefficient_moments(&even_truncation(&theta));
        let odd: Vec<f64> = theta
            .iter()
            .enumerate()
            .map(|(i, &c)| if i % 2 == 1 { c } else { 0.0 })
            .collect();
        let odd_sq = coefficient_moments(&odd).variance;
        mean_worst = mean_worst.max((full.mean - even.mean).abs());
        let drop = full.variance - even.variance;
        decomposition_worst = decomposition_worst.max((drop - odd_sq).abs());
        sign_worst = sign_worst.max(-drop);
    }
    let detail = format!("{vectors} random coefficient vectors");
    Ok(vec![
        PropertyCheck::at_most(
            "homophily",
            "moments_mean_even_invariant",
            mean_worst,
            tolerance::MOMENTS,
            detail.clone(),
        ),
        PropertyCheck::at_most(
            "homophily",
            "moments_variance_drop_equals_odd_energy",
            decomposition_worst,
            tolerance::MOMENTS,
            detail.clone(),
        ),
        PropertyCheck::at_most(
            "homophily",
            "moments_variance_not_increased",
            sign_worst + 0.0,
            tolerance::MOMENTS,
            detail,
        ),
    ])
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(points: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; points];
    let mut weights = vec![0.0; points];
    let nf = points as f64;
    for i in 0..points.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut derivative = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=points {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            derivative = nf * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / derivative;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[points - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * derivative * derivative);
        weights[i] = w;
        weights[points - 1 - i] = w;
    }
    (nodes, weights)
}

/// `∫₀¹ ((2h-1)^k + 1)/2 dh` by 32-point Gauss-Legendre, exact for `k ≤ 63`.
pub fn two_state_average(steps: usize) -> Result<f64> {
    let (nodes, weights) = gauss_legendre(32);
    let mut total = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        total += w * two_state_walk_oracle((x + 1.0) / 2.0, steps)?;
    }
    Ok(total / 2.0)
}

pub fn random_walk_checks(max_steps: usize) -> Result<Vec<PropertyCheck>> {
    let mut quad_worst = 0.0f64;
    let mut worst_k = 0;
    let mut odd_worst = 0.0f64;
    let mut even_worst = 0.0f64;
    for k in 1..=max_steps {
        let e = random_walk_expectation(k)?;
        let q = two_state_average(k)?;
        if (e - q).abs() > quad_worst {
            quad_worst = (e - q).abs();
            worst_k = k;
        }
        if k % 2 == 1 {
            odd_worst = odd_worst.max((e - 0.5).abs());
        } else {
            even_worst = even_worst.max(0.5 - e);
        }
    }
    let detail = if worst_k > 0 {
        format!(
            "k <= {max_steps}; worst at k = {worst_k}: recurrence {:.12}, quadrature {:.12}",
            random_walk_expectation(worst_k)?,
            two_state_average(worst_k)?
        )
    } else {
        format!("k <= {max_steps}")
    };
    Ok(vec![
        PropertyCheck::at_most(
            "homophily",
            "walk_recurrence_matches_quadrature",
            quad_worst,
            tolerance::WALK_RECURRENCE,
            detail,
        ),
        PropertyCheck::at_most(
            "homophily",
            "walk_odd_steps_half",
            odd_worst,
            0.0,
            format!("odd k <= {max_steps}"),
        ),
        PropertyCheck::at_most(
            "homophily",
            "walk_even_steps_at_least_half",
            even_worst.max(0.0),
            0.0,
            format!("even k <= {max_steps}"),
        ),
    ])
}

/// `Q²_ii - Q²_ij = (h - (1-h)/(K-1))²` on a grid of `h` and `K`.
pub fn between_class_walk_identity() -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    for step in 0..=10 {
        let h = step as f64 / 10.0;
        for k in 2..=6 {
            let q2 = between_class_walk(h, k, 2)?;
            let expected = (h - (1.0 - h) / (k - 1) as f64).powi(2);
            for i in 0..k {
                for j in 0..k {
                    if i != j {
                        worst = worst.max((q2[[i, i]] - q2[[i, j]] - expected).abs());
                    }
                }
            }
        }
    }
    Ok(PropertyCheck::at_most(
        "homophily",
        "between_class_walk_square_gap",
        worst,
        tolerance::BETWEEN_CLASS_WALK,
        "h in 0, 0.1, ..., 1 and K in 2..=6",
    ))
}

/// Simulated two-state chains against `((2h-1)^k + 1)/2`, in standard errors.
pub fn two_state_monte_carlo(seed: u64, walks: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 17);
    let mut worst = 0.0f64;
    for &h in &[0.2, 0.5, 0.9] {
        for &k in &[1usize, 2, 3, 5] {
            let mut same = 0usize;
            for _ in 0..walks {
                let mut stay = true;
                for _ in 0..k {
                    if !rng.gen_bool(h) {
                        stay = !stay;
                    }
                }
                same += usize::from(stay);
            }
            let p = two_state_walk_oracle(h, k)?;
            let freq = same as f64 / walks as f64;
            let sigma = (p * (1.0 - p) / walks as f64).sqrt().max(1e-12);
            worst = worst.max((freq - p).abs() / sigma);
        }
    }
    Ok(PropertyCheck::at_most(
        "synth",
        "two_state_chain_monte_carlo",
        worst,
        tolerance::MONTE_CARLO_SIGMAS,
        format!("{walks} walks per (h, k); residual in standard errors"),
    ))
}

// ---------------------------------------------------------------- synth

pub fn csbm_statistics(seed: u64) -> Result<Vec<PropertyCheck>> {
    let mut rng = rng_for(seed, 18);
    let (mut degree_worst, mut homophily_worst) = (0.0f64, 0.0f64);
    for &phi in &[0.75, 0.5, 0.0, -0.5, -0.75] {
        let params = CsbmParams::new(600, 50, 5.0, phi)?;
        let draw = generate_csbm(&params, rng.gen())?;
        let mean_degree = 2.0 * draw.graph.num_edges() as f64 / 600.0;
        degree_worst = degree_worst.max((mean_degree - 5.0).abs() / 5.0);
        let h = edge_homophily(&draw.graph, &draw.labels)?;
        homophily_worst = homophily_worst.max((h - params.expected_homophily()).abs());
    }
    Ok(vec![
        PropertyCheck::at_most(
            "synth",
            "csbm_mean_degree",
            degree_worst,
            tolerance::CSBM_DEGREE_RELATIVE,
            "relative error of the realized mean degree, n = 600, d = 5",
        ),
        PropertyCheck::at_most(
            "synth",
            "csbm_edge_homophily",
            homophily_worst,
            tolerance::CSBM_HOMOPHILY,
            "realized vs (d + lambda sqrt(d)) / (2d), n = 600",
        ),
    ])
}

pub fn phi_round_trip(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 19);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let phi = rng.gen_range(-0.99..0.99);
        let n = rng.gen_range(100..5000);
        let f = rng.gen_range(10..3000);
        let (l, m) = phi_to_lambda_mu(phi, n, f, DEFAULT_M_CONST, DEFAULT_EPSILON)?;
        worst = worst.max((lambda_mu_to_phi(l, m, n, f, DEFAULT_M_CONST) - phi).abs());
    }
    Ok(PropertyCheck::at_most(
        "synth",
        "phi_round_trip",
        worst,
        tolerance::PHI_ROUND_TRIP,
        format!("{cases} random (phi, n, f)"),
    ))
}

/// Class-mean difference along `u` against `2√(μ/n)‖u‖`, in standard errors.
pub fn csbm_feature_signal(seed: u64) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 20);
    let mut worst = 0.0f64;
    for &phi in &[0.0, 0.5, -0.75] {
        let params = CsbmParams::new(600, 400, 5.0, phi)?;
        let s: u64 = rng.gen();
        let draw = generate_csbm(&params, s)?;
        let u = crate::synth::feature_direction(params.f, &mut ChaCha8Rng::seed_from_u64(s));
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let x = draw.features.as_array();
        let proj: Vec<f64> = x
            .rows()
            .into_iter()
            .map(|r| r.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() / norm)
            .collect();
        let mut sums = [0.0f64; 2];
        let mut counts = [0usize; 2];
        for (i, p) in proj.iter().enumerate() {
            let c = draw.labels.class_of(i);
            sums[c] += p;
            counts[c] += 1;
        }
        let diff = sums[0] / counts[0] as f64 - sums[1] / counts[1] as f64;
        let expected = 2.0 * (params.mu / params.n as f64).sqrt() * norm;
        let sigma = ((1.0 / counts[0] as f64 + 1.0 / counts[1] as f64) / params.f as f64).sqrt();
        worst = worst.max((diff - expected).abs() / sigma);
    }
    Ok(PropertyCheck::at_most(
        "synth",
        "csbm_feature_signal",
        worst,
        tolerance::MONTE_CARLO_SIGMAS,
        "class-mean gap along u, residual in standard errors",
    ))
}

// ---------------------------------------------------------------- attacks

pub fn attack_checks(seed: u64) -> Result<Vec<PropertyCheck>> {
    let mut rng = rng_for(seed, 21);
    let params = CsbmParams::new(400, 10, 6.0, 0.75)?;
    let mut replay_failures = 0usize;
    let mut protected_failures = 0usize;
    let ratios = [0.0, 0.4, 0.8, 1.2, 1.6];
    let seeds = 5;
    let mut dice_h = vec![Vec::new(); ratios.len()];
    let mut random_h = vec![Vec::new(); ratios.len()];
    for _ in 0..seeds {
        let draw = generate_csbm(&params, rng.gen())?;
        let protected: Vec<usize> = (0..80).collect();
        let protected_edges = |g: &Graph| -> Vec<(usize, usize)> {
            g.edges().filter(|&(u, v)| u < 80 && v < 80).collect()
        };
        for (r, &ratio) in ratios.iter().enumerate() {
            for kind in [AttackKind::DiceEvasion, AttackKind::Random] {
                let spec =
                    AttackSpec::new(kind, ratio, rng.gen()).with_protected(protected.clone());
                let (attacked, ledger) = attack(&draw.graph, &draw.labels, &spec)?;
                if ledger.replay(&draw.graph)? != attacked {
                    replay_failures += 1;
                }
                if protected_edges(&attacked) != protected_edges(&draw.graph) {
                    protected_failures += 1;
                }
                let h = edge_homophily(&attacked, &draw.labels)?;
                match kind {
                    AttackKind::DiceEvasion => dice_h[r].push(h),
                    AttackKind::Random => random_h[r].push(h),
                }
            }
        }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let std_err = |v: &[f64]| {
        let m = mean(v);
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64 / v.len() as f64)
            .sqrt()
    };
    // increase between consecutive budgets, in standard errors of the difference
    let mut monotone_worst = 0.0f64;
    for r in 1..ratios.len() {
        let rise = mean(&dice_h[r]) - mean(&dice_h[r - 1]);
        let se = (std_err(&dice_h[r]).powi(2) + std_err(&dice_h[r - 1]).powi(2))
            .sqrt()
            .max(1e-12);
        monotone_worst = monotone_worst.max(rise / se);
    }
    let clean = mean(&dice_h[0]);
    let last = ratios.len() - 1;
    let dice_gap = clean - mean(&dice_h[last]);
    let random_gap = clean - mean(&random_h[last]);
    Ok(vec![
        PropertyCheck::at_most(
            "attacks",
            "ledger_replay_reproduces_attack",
            replay_failures as f64,
            0.0,
            "count of mismatching replays",
        ),
        PropertyCheck::at_most(
            "attacks",
            "protected_subgraph_unchanged",
            protected_failures as f64,
            0.0,
            "count of attacks touching the protected subgraph",
        ),
        PropertyCheck::at_most(
            "attacks",
            "dice_homophily_non_increasing",
            monotone_worst.max(0.0),
            tolerance::MONTE_CARLO_SIGMAS,
            "largest rise between budgets, in standard errors",
        ),
        PropertyCheck::at_most(
            "attacks",
            "random_attack_gap_below_dice",
            (random_gap - dice_gap).max(0.0),
            0.0,
            format!("ratio 1.6 homophily gap: dice {dice_gap:.4}, random {random_gap:.4}"),
        ),
    ])
}

// ---------------------------------------------------------------- model

/// Finite differences on a 20-node instance for every variant, over `seeds`
/// seeds, with dropout multipliers held fixed.
pub fn gradient_checks(seed: u64, seeds: usize) -> Result<PropertyCheck> {
    let mut worst = 0.0f64;
    let mut where_worst = String::new();
    let mut total = 0usize;
    for s in 0..seeds as u64 {
        let mut rng = rng_for(seed, 100 + s);
        let n = 20;
        let g = random_graph(&mut rng, n, 0.25);
        let x = Array2::from_shape_simple_fn((n, 6), || rng.gen_range(-1.0..1.0));
        let labels = random_labels(&mut rng, n, 3);
        let mask: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.6)).chain([0]).collect();
        for variant in Variant::ALL {
            let mut params = ModelParams::seeded(variant, 6, 5, 3, 4, 0.1, rng.gen())?;
            params.b1.mapv_inplace(|_| rng.gen_range(-0.3..0.3));
            params.b2.mapv_inplace(|_| rng.gen_range(-0.3..0.3));
            if variant.filter_trainable() {
                params
                    .filter
                    .coefficients
                    .iter_mut()
                    .for_each(|c| *c = rng.gen_range(-1.0..1.0));
            }
            if variant == Variant::EvenReg {
                params.filter.coefficients[3] = 0.0;
            }
            let masks = DropoutMasks::sample(0.5, n, 6, 5, &mut rng)?;
            let check = gradient_check(
                &params,
                &g,
                x.view(),
                &labels,
                &mask,
                0.05,
                &masks,
                tolerance::FINITE_DIFFERENCE_STEP,
            )?;
            total += check.parameters;
            if check.max_relative_error >= worst {
                worst = check.max_relative_error;
                where_worst = format!("{variant} seed {s}: {}", check.worst);
            }
        }
    }
    Ok(PropertyCheck::at_most(
        "model",
        "gradient_finite_difference",
        worst,
        tolerance::GRADIENT,
        format!("{total} parameters over {seeds} seeds and all variants; worst {where_worst}"),
    ))
}

/// EvenNet logits under `P` and `-P` on synthetic dense operators.
pub fn sign_flip_invariance(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 22);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(3..=25);
        let g = random_graph(&mut rng, n, 0.3);
        let op = DenseOperator::from_graph(&g)?;
        let flipped = DenseOperator::new(op.matrix().mapv(|v| -v))?;
        let x = Array2::from_shape_simple_fn((n, 4), || rng.gen_range(-1.0..1.0));
        let mut p = ModelParams::seeded(Variant::EvenNet, 4, 6, 2, 10, 0.1, rng.gen())?;
        p.filter
            .coefficients
            .iter_mut()
            .for_each(|c| *c = rng.gen_range(-1.0..1.0));
        let a = forward_cached(&p, &op, x.view(), &DropoutMasks::none())?.logits;
        let b = forward_cached(&p, &flipped, x.view(), &DropoutMasks::none())?.logits;
        worst = worst.max(max_abs_diff(&a, &b));
    }
    Ok(PropertyCheck::at_most(
        "model",
        "evennet_sign_flip_invariance",
        worst,
        tolerance::SIGN_FLIP,
        format!("{cases} operators and their negations"),
    ))
}

pub fn odd_zeroed_full_matches_even(seed: u64, cases: usize) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 23);
    let mut worst = 0.0f64;
    for _ in 0..cases {
        let n = rng.gen_range(3..=30);
        let g = random_graph(&mut rng, n, 0.3);
        let x = Array2::from_shape_simple_fn((n, 4), || rng.gen_range(-1.0..1.0));
        let mut even = ModelParams::seeded(Variant::EvenNet, 4, 6, 3, 10, 0.1, rng.gen())?;
        even.filter
            .coefficients
            .iter_mut()
            .for_each(|c| *c = rng.gen_range(-1.0..1.0));
        let mut full = even.clone();
        full.variant = Variant::FullOrder;
        full.filter = even.filter.to_full();
        let a = forward_cached(&even, &g, x.view(), &DropoutMasks::none())?.logits;
        let b = forward_cached(&full, &g, x.view(), &DropoutMasks::none())?.logits;
        worst = worst.max(max_abs_diff(&a, &b));
    }
    Ok(PropertyCheck::at_most(
        "model",
        "full_with_odd_zeroed_matches_evennet",
        worst,
        tolerance::ODD_ZEROED,
        format!("{cases} random graphs"),
    ))
}

/// Largest loss increase over the first ten epochs on separable data.
pub fn optimizer_smoke(seed: u64) -> Result<PropertyCheck> {
    let mut rng = rng_for(seed, 24);
    let n = 60;
    let classes: Vec<usize> = (0..n).map(|i| i % 2).collect();
    let x = Array2::from_shape_fn((n, 4), |(i, j)| {
        let noise: f64 = rng.gen_range(-0.5..0.5);
        if j == 0 {
            noise + if classes[i] == 0 { 1.0 } else { -1.0 }
        } else {
            noise
        }
    });
    let g = Graph::empty(n);
    let features = FeatureMatrix::new(x)?;
    let labels = LabelAssignment::new(classes, 2)?;
    let all: Vec<usize> = (0..n).collect();
    let view = DataView::new(&g, &features, &labels, &all)?;
    let config = TrainConfig {
        max_epochs: 10,
        patience: 10,
        dropout: 0.0,
        hidden: 16,
        seed,
        ..TrainConfig::default()
    };
    let (_, report) = train(&config, Variant::MlpOnly, &view, &view)?;
    let rise = report
        .losses
        .windows(2)
        .map(|w| w[1] - w[0])
        .fold(0.0f64, f64::max);
    Ok(PropertyCheck::at_most(
        "model",
        "loss_non_increasing_first_epochs",
        rise,
        0.0,
        "largest epoch-to-epoch loss increase, dropout off",
    ))
}

/// Every property at the sizes the release gate calls for.
pub fn run_property_suite(seed: u64) -> Result<PropertyReport> {
    let mut checks = vec![
        propagate_matches_dense(seed, 100)?,
        spectrum_extremes()?,
        homophily_relabel_invariance(seed, 100)?,
        even_filter_eigenvector_scaling(seed, 20)?,
        filter_linearity(seed, 50)?,
        even_filter_symmetry(seed, 1000)?,
    ];
    checks.extend(ring_gap_checks(seed, 100)?);
    checks.extend(eigendecomposition_accuracy(seed, 100)?);
    checks.push(homophily_identity_regular(seed, 100, 200)?);
    checks.push(homophily_identity_unnormalized(seed, 100, 200)?);
    checks.push(dirichlet_identity(seed, 1000)?);
    checks.push(spectrum_normalization(seed, 100)?);
    checks.push(srl_forms_agree(seed, 100)?);
    checks.push(srl_gap_ordering(seed, 20)?);
    checks.push(interaction_symmetry(seed, 50)?);
    checks.push(transformed_dual_path(seed, 50, coefficient_reexpansion)?);
    checks.extend(moment_checks(seed, 1000)?);
    checks.extend(random_walk_checks(20)?);
    checks.push(between_class_walk_identity()?);
    checks.push(two_state_monte_carlo(seed, 100_000)?);
    checks.extend(csbm_statistics(seed)?);
    checks.push(phi_round_trip(seed, 100)?);
    checks.push(csbm_feature_signal(seed)?);
    checks.extend(attack_checks(seed)?);
    checks.push(gradient_checks(seed, 5)?);
    checks.push(sign_flip_invariance(seed, 20)?);
    checks.push(odd_zeroed_full_matches_even(seed, 20)?);
    checks.push(optimizer_smoke(seed)?);
    Ok(PropertyReport { seed, checks })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn off_by_one(w: &[f64]) -> Vec<f64> {
        let mut theta = coefficient_reexpansion(w);
        if theta.len() > 1 {
            theta.rotate_right(1);
        }
        theta
    }

    #[test]
    fn mutated_reexpansion_fails_dual_path() {
        assert!(
            transformed_dual_path(3, 20, coefficient_reexpansion)
                .unwrap()
                .passed
        );
        assert!(!transformed_dual_path(3, 20, off_by_one).unwrap().passed);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(32);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
        let x20: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(20)).sum();
        assert!((x20 - 2.0 / 21.0).abs() < 1e-14);
        assert!((two_state_average(3).unwrap() - 0.5).abs() < 1e-15);
        assert!((two_state_average(4).unwrap() - 0.6).abs() < 1e-14);
    }

    #[test]
    fn ring_gap_oracle_matches_closed_form_for_first_order() {
        let f = PolyFilter::full(vec![0.0, 1.0]);
        let closed = ring_srl_gap(&f, 16, 1.3).unwrap();
        let brute = ring_srl_gap_oracle(&f, 16, 1.3).unwrap();
        assert!((closed - brute).abs() < 1e-12);
    }

    #[test]
    fn report_serializes_tolerances() {
        let report = PropertyReport {
            seed: 0,
            checks: vec![between_class_walk_identity().unwrap()],
        };
        assert!(report.all_passed());
        let json = report.to_json().unwrap();
        assert!(json.contains("\"tolerance\": 1e-12"));
        assert!(report
            .to_csv()
            .starts_with("module,name,passed,residual,tolerance\n"));
    }
}
