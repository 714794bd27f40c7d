//! Synthetic graphs: the contextual stochastic block model (cSBM) under the
//! Φ parameterization, labeled rings, random regular graphs, and the closed
//! form two-state walk used as an oracle by the homophily checks.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::{FRAC_PI_2, PI};

use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph, LabelAssignment};

/// `3√3/2`.
pub const DEFAULT_M_CONST: f64 = 2.598_076_211_353_316;
/// Signal budget `ε = λ² + (m μ)² f/n`; 4.23 reproduces the reference
/// `(Φ, λ, μ)` table at `n = 3000`, `f = 2000`.
pub const DEFAULT_EPSILON: f64 = 4.23;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsbmParams {
    pub n: usize,
    pub f: usize,
    pub d: f64,
    pub phi: f64,
    pub m_const: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub mu: f64,
}

impl CsbmParams {
    pub fn new(n: usize, f: usize, d: f64, phi: f64) -> Result<Self> {
        Self::with_constants(n, f, d, phi, DEFAULT_M_CONST, DEFAULT_EPSILON)
    }

    pub fn with_constants(
        n: usize,
        f: usize,
        d: f64,
        phi: f64,
        m_const: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if n < 2 || f == 0 {
            return Err(Error::invalid(format!(
                "cSBM needs n >= 2 and f >= 1, got n={n}, f={f}"
            )));
        }
        if !(d > 0.0) {
            return Err(Error::invalid(format!(
                "mean degree must be positive, got {d}"
            )));
        }
        let (lambda, mu) = phi_to_lambda_mu(phi, n, f, m_const, epsilon)?;
        Ok(CsbmParams {
            n,
            f,
            d,
            phi,
            m_const,
            epsilon,
            lambda,
            mu,
        })
    }

    /// `Φ` recomputed from the derived `(λ, μ)`.
    pub fn implied_phi(&self) -> f64 {
        lambda_mu_to_phi(self.lambda, self.mu, self.n, self.f, self.m_const)
    }

    /// `λ² + μ² f² / n² > 1`.
    pub fn is_informative(&self) -> bool {
        let (n, f) = (self.n as f64, self.f as f64);
        self.lambda * self.lambda + self.mu * self.mu * f * f / (n * n) > 1.0
    }

    /// Same-class and cross-class edge probabilities.
    pub fn edge_probabilities(&self) -> (f64, f64) {
        let n = self.n as f64;
        let shift = self.lambda * self.d.sqrt();
        ((self.d + shift) / n, (self.d - shift) / n)
    }

    /// Expected edge homophily `(d + λ√d) / (2d)` for balanced classes.
    pub fn expected_homophily(&self) -> f64 {
        (self.d + self.lambda * self.d.sqrt()) / (2.0 * self.d)
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        Self::with_constants(self.n, self.f, self.d, phi, self.m_const, self.epsilon)
    }
}

/// `λ = √ε sin(Φπ/2)`, `μ = (√ε/m) √(n/f) cos(Φπ/2)`.
pub fn phi_to_lambda_mu(
    phi: f64,
    n: usize,
    f: usize,
    m_const: f64,
    epsilon: f64,
) -> Result<(f64, f64)> {
    if !(phi.abs() < 1.0) {
        return Err(Error::invalid(format!("Φ must lie in (-1, 1), got {phi}")));
    }
    if !(m_const > 0.0 && epsilon > 0.0) {
        return Err(Error::invalid("cSBM constants m and ε must be positive"));
    }
    let root = epsilon.sqrt();
    let angle = phi * FRAC_PI_2;
    let lambda = root * angle.sin();
    let mu = root / m_const * (n as f64 / f as f64).sqrt() * angle.cos();
    Ok((lambda, mu))
}

/// `Φ = (2/π) arctan(λ √(n/f) / (m μ))`.
pub fn lambda_mu_to_phi(lambda: f64, mu: f64, n: usize, f: usize, m_const: f64) -> f64 {
    (lambda / (m_const * mu) * (n as f64 / f as f64).sqrt()).atan() * 2.0 / PI
}

#[derive(Debug, Clone)]
pub struct CsbmDraw {
    pub graph: Graph,
    pub features: FeatureMatrix,
    pub labels: LabelAssignment,
}

/// Feature direction `u ~ N(0, I/f)`.
pub fn feature_direction<R: Rng>(f: usize, rng: &mut R) -> Vec<f64> {
    let scale = 1.0 / (f as f64).sqrt();
    (0..f)
        .map(|_| rng.sample::<f64, _>(StandardNormal) * scale)
        .collect()
}

/// Draws a graph, features and labels; the feature direction `u` comes from
/// the same seed.
pub fn generate_csbm(params: &CsbmParams, seed: u64) -> Result<CsbmDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction = feature_direction(params.f, &mut rng);
    generate_with_rng(params, &direction, &mut rng)
}

/// As [`generate_csbm`] with a caller-supplied feature direction, so several
/// draws can share the class signal.
pub fn generate_csbm_with_direction(
    params: &CsbmParams,
    direction: &[f64],
    seed: u64,
) -> Result<CsbmDraw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    generate_with_rng(params, direction, &mut rng)
}

fn generate_with_rng(
    params: &CsbmParams,
    direction: &[f64],
    rng: &mut ChaCha8Rng,
) -> Result<CsbmDraw> {
    let n = params.n;
    if direction.len() != params.f {
        return Err(Error::DimensionMismatch {
            context: "cSBM feature direction",
            expected: params.f,
            found: direction.len(),
        });
    }
    let (p_in, p_out) = params.edge_probabilities();
    for p in [p_in, p_out] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "edge probability {p} outside [0, 1] (need d + |λ|√d <= n)"
            )));
        }
    }

    // first n/2 slots are class 0, then node ids are shuffled
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut classes = vec![0usize; n];
    for (slot, &node) in order.iter().enumerate() {
        classes[node] = usize::from(slot >= n / 2);
    }
    let labels = LabelAssignment::new(classes, 2)?;
    let sign = |node: usize| {
        if labels.class_of(node) == 0 {
            1.0
        } else {
            -1.0
        }
    };

    let signal = (params.mu / n as f64).sqrt();
    let noise = 1.0 / (params.f as f64).sqrt();
    let mut x = Array2::zeros((n, params.f));
    for i in 0..n {
        let y = sign(i);
        for (j, &u) in direction.iter().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            x[[i, j]] = signal * y * u + z * noise;
        }
    }

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if labels.class_of(u) == labels.class_of(v) {
                p_in
            } else {
                p_out
            };
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(CsbmDraw {
        graph: Graph::from_edges(&edges, n)?,
        features: FeatureMatrix::new(x)?,
        labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RingLabeling {
    /// Neighbors always differ: `h = 0`.
    Alternating,
    /// Two contiguous arcs: `h = 1 - 2/N`.
    Blocked,
    /// Every node in class 0: `h = 1`.
    Uniform,
}

pub fn ring_graph(num_nodes: usize, labeling: RingLabeling) -> Result<(Graph, LabelAssignment)> {
    if num_nodes < 4 || num_nodes % 2 != 0 {
        return Err(Error::invalid(format!(
            "ring needs an even node count of at least 4, got {num_nodes}"
        )));
    }
    let edges: Vec<(usize, usize)> = (0..num_nodes).map(|i| (i, (i + 1) % num_nodes)).collect();
    let classes = (0..num_nodes)
        .map(|i| match labeling {
            RingLabeling::Alternating => i % 2,
            RingLabeling::Blocked => usize::from(i >= num_nodes / 2),
            RingLabeling::Uniform => 0,
        })
        .collect();
    Ok((
        Graph::from_edges(&edges, num_nodes)?,
        LabelAssignment::new(classes, 2)?,
    ))
}

const REGULAR_RETRY_CAP: usize = 1000;

/// Uniform-ish random `k`-regular graph by stub pairing. Conflicting stubs
/// (self-loops, repeated pairs) are reshuffled among themselves; a dead end
/// restarts the attempt, up to 1000 attempts.
pub fn random_regular_graph(n: usize, k: usize, seed: u64) -> Result<Graph> {
    if (n * k) % 2 != 0 {
        return Err(Error::Infeasible {
            n,
            k,
            reason: "n*k must be even".into(),
        });
    }
    if k >= n {
        return Err(Error::Infeasible {
            n,
            k,
            reason: "degree must be below node count".into(),
        });
    }
    if k == 0 {
        return Ok(Graph::empty(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REGULAR_RETRY_CAP {
        if let Some(edges) = try_pairing(n, k, &mut rng) {
            let edges: Vec<(usize, usize)> = edges.into_iter().collect();
            return Graph::from_edges(&edges, n);
        }
    }
    Err(Error::Infeasible {
        n,
        k,
        reason: format!("pairing failed {REGULAR_RETRY_CAP} times"),
    })
}

fn try_pairing(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Option<BTreeSet<(usize, usize)>> {
    let mut edges = BTreeSet::new();
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(k)).collect();
    while !stubs.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        stubs.shuffle(rng);
        for pair in stubs.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && !edges.contains(&(a, b)) {
                edges.insert((a, b));
            } else {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        if !pairing_can_continue(&edges, &leftover) {
            return None;
        }
        stubs = leftover
            .iter()
            .flat_map(|(&node, &count)| std::iter::repeat(node).take(count))
            .collect();
    }
    Some(edges)
}

fn pairing_can_continue(
    edges: &BTreeSet<(usize, usize)>,
    leftover: &BTreeMap<usize, usize>,
) -> bool {
    if leftover.is_empty() {
        return true;
    }
    let nodes: Vec<usize> = leftover.keys().copied().collect();
    nodes
        .iter()
        .enumerate()
        .any(|(i, &a)| nodes[i + 1..].iter().any(|&b| !edges.contains(&(a, b))))
}

/// `G(n, p)`: each unordered pair joined independently with probability `p`.
pub fn erdos_renyi<R: Rng>(n: usize, p: f64, rng: &mut R) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(format!(
            "edge probability must lie in [0, 1], got {p}"
        )));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(&edges, n)
}

/// Same-class probability after `k` steps of the two-state chain that stays
/// in class with probability `h`: `((2h-1)^k + 1) / 2`.
pub fn two_state_walk_oracle(h: f64, steps: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&h) {
        return Err(Error::invalid(format!("h must lie in [0, 1], got {h}")));
    }
    if steps < 1 {
        return Err(Error::invalid("walk length must be at least 1"));
    }
    Ok(((2.0 * h - 1.0).powi(steps as i32) + 1.0) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::edge_homophily;

    #[test]
    fn lambda_mu_at_reference_points() {
        let (l, m) = phi_to_lambda_mu(0.75, 3000, 2000, DEFAULT_M_CONST, DEFAULT_EPSILON).unwrap();
        assert!((l - 1.90).abs() < 0.005, "{l}");
        assert!((m - 0.37).abs() < 0.005, "{m}");
        let (l, m) = phi_to_lambda_mu(0.5, 3000, 2000, DEFAULT_M_CONST, DEFAULT_EPSILON).unwrap();
        // the reference table rounds this row to 1.46; the inversion gives 1.454
        assert!((l - 1.46).abs() < 0.01, "{l}");
        assert!((m - 0.69).abs() < 0.005, "{m}");
        let (l, m) = phi_to_lambda_mu(-0.75, 3000, 2000, DEFAULT_M_CONST, DEFAULT_EPSILON).unwrap();
        assert!((l + 1.90).abs() < 0.005);
        assert!((m - 0.37).abs() < 0.005);
    }

    #[test]
    fn epsilon_rederived_from_reference_lambda() {
        // λ = 1.90 at Φ = 0.75 pins ε = (1.90 / sin(0.375π))²
        let eps = (1.90 / (0.75 * FRAC_PI_2).sin()).powi(2);
        assert!((eps - DEFAULT_EPSILON).abs() < 0.01, "{eps}");
    }

    #[test]
    fn phi_round_trip() {
        for &phi in &[-0.9, -0.75, -0.3, 0.0, 0.1, 0.5, 0.75, 0.99] {
            let p = CsbmParams::new(600, 400, 5.0, phi).unwrap();
            assert!((p.implied_phi() - phi).abs() < 1e-9);
        }
        assert!(phi_to_lambda_mu(1.0, 10, 10, 1.0, 1.0).is_err());
        assert!(phi_to_lambda_mu(-1.2, 10, 10, 1.0, 1.0).is_err());
    }

    #[test]
    fn desk_scale_is_informative() {
        for phi in [0.75, -0.75, 0.5, -0.5] {
            let p = CsbmParams::new(600, 400, 5.0, phi).unwrap();
            assert!(p.is_informative());
            assert!(p.d + p.lambda.abs() * p.d.sqrt() < p.n as f64);
        }
    }

    #[test]
    fn csbm_shapes_and_balance() {
        let p = CsbmParams::new(200, 30, 5.0, 0.5).unwrap();
        let draw = generate_csbm(&p, 1).unwrap();
        assert_eq!(draw.graph.num_nodes(), 200);
        assert_eq!((draw.features.rows(), draw.features.cols()), (200, 30));
        assert_eq!(draw.labels.class_sizes(), &[100, 100]);
    }

    #[test]
    fn csbm_deterministic() {
        let p = CsbmParams::new(150, 20, 4.0, -0.5).unwrap();
        let a = generate_csbm(&p, 99).unwrap();
        let b = generate_csbm(&p, 99).unwrap();
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.features, b.features);
        assert_eq!(a.labels, b.labels);
        let c = generate_csbm(&p, 100).unwrap();
        assert_ne!(a.graph, c.graph);
    }

    #[test]
    fn csbm_reference_homophily() {
        let p = CsbmParams::new(3000, 20, 5.0, 0.75).unwrap();
        let h = edge_homophily(
            &generate_csbm(&p, 5).unwrap().graph,
            &generate_csbm(&p, 5).unwrap().labels,
        )
        .unwrap();
        assert!((h - 0.92).abs() <= 0.02, "{h}");
        let p = p.with_phi(-0.75).unwrap();
        let draw = generate_csbm(&p, 6).unwrap();
        let h = edge_homophily(&draw.graph, &draw.labels).unwrap();
        assert!((h - 0.08).abs() <= 0.02, "{h}");
    }

    #[test]
    fn structureless_draw() {
        let p = CsbmParams::new(1000, 10, 5.0, 0.0).unwrap();
        assert_eq!(p.lambda, 0.0);
        let draw = generate_csbm(&p, 3).unwrap();
        let h = edge_homophily(&draw.graph, &draw.labels).unwrap();
        assert!((h - 0.5).abs() <= 0.03, "{h}");
        let mean_degree = 2.0 * draw.graph.num_edges() as f64 / 1000.0;
        assert!((mean_degree - 5.0).abs() <= 0.5, "{mean_degree}");
    }

    #[test]
    fn invalid_edge_probability() {
        let p = CsbmParams::new(4, 3, 3.9, 0.9).unwrap();
        assert!(generate_csbm(&p, 0).is_err());
    }

    #[test]
    fn rings() {
        let (g, l) = ring_graph(6, RingLabeling::Alternating).unwrap();
        assert_eq!(edge_homophily(&g, &l).unwrap(), 0.0);
        assert!(g.degrees().iter().all(|&d| d == 2));
        let (g, l) = ring_graph(6, RingLabeling::Uniform).unwrap();
        assert_eq!(edge_homophily(&g, &l).unwrap(), 1.0);
        let (g, l) = ring_graph(10, RingLabeling::Blocked).unwrap();
        assert!((edge_homophily(&g, &l).unwrap() - 0.8).abs() < 1e-15);
        assert!(ring_graph(7, RingLabeling::Blocked).is_err());
    }

    #[test]
    fn regular_graphs() {
        let g = random_regular_graph(10, 3, 1).unwrap();
        assert!(g.degrees().iter().all(|&d| d == 3));
        let k4 = random_regular_graph(4, 3, 2).unwrap();
        assert_eq!(k4.num_edges(), 6);
        let a = random_regular_graph(100, 4, 7).unwrap();
        let b = random_regular_graph(100, 4, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.is_regular(), Some(4));
        assert!(matches!(
            random_regular_graph(5, 3, 0),
            Err(Error::Infeasible { .. })
        ));
        assert!(random_regular_graph(4, 4, 0).is_err());
        let g = random_regular_graph(200, 6, 11).unwrap();
        assert_eq!(g.is_regular(), Some(6));
    }

    #[test]
    fn walk_oracle() {
        for k in 1..8 {
            assert_eq!(two_state_walk_oracle(1.0, k).unwrap(), 1.0);
            let at_zero = two_state_walk_oracle(0.0, k).unwrap();
            assert_eq!(at_zero, if k % 2 == 1 { 0.0 } else { 1.0 });
        }
        // ∫_0^1 p_3 dh by Simpson's rule (exact for cubics)
        let p = |h: f64| two_state_walk_oracle(h, 3).unwrap();
        let simpson = (p(0.0) + 4.0 * p(0.5) + p(1.0)) / 6.0;
        assert!((simpson - 0.5).abs() < 1e-15);
        assert!(two_state_walk_oracle(1.5, 2).is_err());
        assert!(two_state_walk_oracle(0.5, 0).is_err());
    }
}
