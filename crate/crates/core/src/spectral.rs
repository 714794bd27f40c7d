//! Dense symmetric eigendecomposition and the spectral-domain view of labels
//! and features: label/feature spectra, the spectral regression loss (SRL),
//! the homophily/eigenvalue identity, Dirichlet energy, and the analytic
//! eigenbasis of even-length rings.

use std::f64::consts::PI;
use std::fmt::Write as _;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::filters::{Parity, PolyFilter};
use crate::graph::{self, Graph, LabelAssignment, DEFAULT_DENSE_CAP};

const SYMMETRY_TOLERANCE: f64 = 1e-10;
const OFF_DIAGONAL_TOLERANCE: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Ascending eigenvalues with the matching orthonormal eigenvectors stored as
/// the columns of `basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub basis: Array2<f64>,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `Uᵀ x`.
    pub fn project(&self, signal: &[f64]) -> Result<Spectrum> {
        let n = self.len();
        if signal.len() != n {
            return Err(Error::DimensionMismatch {
                context: "spectral projection",
                expected: n,
                found: signal.len(),
            });
        }
        let values = (0..n)
            .map(|k| {
                self.basis
                    .column(k)
                    .iter()
                    .zip(signal)
                    .map(|(u, x)| u * x)
                    .sum()
            })
            .collect();
        Ok(Spectrum(values))
    }

    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> Array2<f64> {
        let mut scaled = self.basis.clone();
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            scaled.column_mut(k).mapv_inplace(|v| v * l);
        }
        scaled.dot(&self.basis.t())
    }
}

/// Coefficients of a signal in an eigenbasis (`α` for labels, `β` for features).
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum(pub Vec<f64>);

impl Spectrum {
    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn energy(&self) -> f64 {
        self.0.iter().map(|a| a * a).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Cyclic Jacobi eigensolver for dense symmetric matrices.
///
/// Sweeps until every off-diagonal entry is below `1e-12` (relative to the
/// largest entry when that exceeds one) or 100 sweeps have run.
pub fn eigendecompose(matrix: &Array2<f64>) -> Result<SpectralDecomposition> {
    eigendecompose_with_cap(matrix, DEFAULT_DENSE_CAP)
}

pub fn eigendecompose_with_cap(matrix: &Array2<f64>, cap: usize) -> Result<SpectralDecomposition> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            context: "eigendecompose (square matrix)",
            expected: n,
            found: matrix.ncols(),
        });
    }
    if n > cap {
        return Err(Error::DenseCapExceeded { n, cap });
    }
    let mut max_asymmetry = 0.0f64;
    let mut scale = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            let v = matrix[[i, j]];
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: format!("matrix entry ({i}, {j})"),
                });
            }
            scale = scale.max(v.abs());
            max_asymmetry = max_asymmetry.max((v - matrix[[j, i]]).abs());
        }
    }
    if max_asymmetry > SYMMETRY_TOLERANCE {
        return Err(Error::NonSymmetric { max_asymmetry });
    }

    // symmetrize exactly, row-major working copy
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = 0.5 * (matrix[[i, j]] + matrix[[j, i]]);
        }
    }
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let threshold = OFF_DIAGONAL_TOLERANCE * scale.max(1.0);

    let mut converged = n < 2;
    let mut residual = max_off_diagonal(&a, n);
    if residual < threshold {
        converged = true;
    }
    let mut sweep = 0;
    while !converged && sweep < MAX_SWEEPS {
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    if k == p || k == q {
                        continue;
                    }
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    let new_p = c * akp - s * akq;
                    let new_q = s * akp + c * akq;
                    a[k * n + p] = new_p;
                    a[p * n + k] = new_p;
                    a[k * n + q] = new_q;
                    a[q * n + k] = new_q;
                }
                a[p * n + p] = app - t * apq;
                a[q * n + q] = aqq + t * apq;
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
        residual = max_off_diagonal(&a, n);
        converged = residual < threshold;
    }
    if !converged {
        return Err(Error::NoConvergence {
            sweeps: sweep,
            residual,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let eigenvalues = order.iter().map(|&i| a[i * n + i]).collect();
    let mut basis = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            basis[[row, col]] = v[row * n + src];
        }
    }
    Ok(SpectralDecomposition { eigenvalues, basis })
}

fn max_off_diagonal(a: &[f64], n: usize) -> f64 {
    let mut m = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            m = m.max(a[i * n + j].abs());
        }
    }
    m
}

/// `α = Uᵀ Δy`.
pub fn label_spectrum(decomposition: &SpectralDecomposition, delta_y: &[f64]) -> Result<Spectrum> {
    decomposition.project(delta_y)
}

/// `β = Uᵀ x` for a single feature channel.
pub fn feature_spectrum(
    decomposition: &SpectralDecomposition,
    feature: &[f64],
) -> Result<Spectrum> {
    decomposition.project(feature)
}

fn filtered_norm(beta: &[f64], filter: &PolyFilter, eigenvalues: &[f64]) -> Result<f64> {
    let energy: f64 = eigenvalues
        .iter()
        .zip(beta)
        .map(|(&l, &b)| {
            let g = filter.eval(l);
            g * g * b * b
        })
        .sum();
    if !(energy > 0.0) {
        return Err(Error::FilterAnnihilatesFeatures);
    }
    Ok(energy.sqrt())
}

fn check_spectra(alpha: &Spectrum, beta: &Spectrum, eigenvalues: &[f64]) -> Result<usize> {
    let n = eigenvalues.len();
    for (context, len) in [("srl alpha", alpha.len()), ("srl beta", beta.len())] {
        if len != n {
            return Err(Error::DimensionMismatch {
                context,
                expected: n,
                found: len,
            });
        }
    }
    if n == 0 {
        return Err(Error::invalid(
            "spectral regression loss needs a non-empty spectrum",
        ));
    }
    Ok(n)
}

/// Spectral regression loss as a sum of squared differences between `α/√N`
/// and the unit-normalized filtered feature spectrum `g(λ)β / ‖g(λ)β‖`.
pub fn srl(
    alpha: &Spectrum,
    beta: &Spectrum,
    filter: &PolyFilter,
    eigenvalues: &[f64],
) -> Result<f64> {
    let n = check_spectra(alpha, beta, eigenvalues)?;
    let norm = filtered_norm(&beta.0, filter, eigenvalues)?;
    let root_n = (n as f64).sqrt();
    Ok((0..n)
        .map(|i| {
            let d = alpha.0[i] / root_n - filter.eval(eigenvalues[i]) * beta.0[i] / norm;
            d * d
        })
        .sum())
}

/// The same loss through its inner-product form
/// `2 - (2/√N) Σ α_i g(λ_i) β_i / ‖g(λ)β‖`, valid when `Σ α_i² = N`.
pub fn srl_inner_product(
    alpha: &Spectrum,
    beta: &Spectrum,
    filter: &PolyFilter,
    eigenvalues: &[f64],
) -> Result<f64> {
    let n = check_spectra(alpha, beta, eigenvalues)?;
    let norm = filtered_norm(&beta.0, filter, eigenvalues)?;
    let inner: f64 = (0..n)
        .map(|i| alpha.0[i] * filter.eval(eigenvalues[i]) * beta.0[i])
        .sum();
    Ok(2.0 - 2.0 / (n as f64).sqrt() * inner / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplacianKind {
    /// `I - D^{-1/2} A D^{-1/2}`; the identity needs a regular graph.
    Normalized,
    /// `D - A`; holds on any graph.
    Unnormalized,
}

/// Right-hand side `Σ α_i² λ_i / (2 Σ λ_i)` of the homophily identity.
pub fn homophily_identity_rhs(alpha: &Spectrum, eigenvalues: &[f64]) -> f64 {
    let weighted: f64 = alpha
        .0
        .iter()
        .zip(eigenvalues)
        .map(|(a, l)| a * a * l)
        .sum();
    let total: f64 = eigenvalues.iter().sum();
    weighted / (2.0 * total)
}

/// `|(1-h) - Σ α_i² λ_i / (2 Σ λ_i)|` on the requested Laplacian.
pub fn verify_homophily_identity(
    graph: &Graph,
    labels: &LabelAssignment,
    kind: LaplacianKind,
) -> Result<f64> {
    let delta_y = labels.delta_y()?;
    let h = graph::edge_homophily(graph, labels)?;
    let laplacian = match kind {
        LaplacianKind::Normalized => {
            let degrees = graph.degrees();
            if graph.is_regular().is_none() {
                let min = degrees.iter().copied().min().unwrap_or(0);
                let max = degrees.iter().copied().max().unwrap_or(0);
                return Err(Error::IrregularGraph { min, max });
            }
            graph.normalized_laplacian_dense(DEFAULT_DENSE_CAP)?
        }
        LaplacianKind::Unnormalized => graph.unnormalized_laplacian_dense(DEFAULT_DENSE_CAP)?,
    };
    let decomposition = eigendecompose(&laplacian)?;
    let alpha = label_spectrum(&decomposition, &delta_y)?;
    Ok(((1.0 - h) - homophily_identity_rhs(&alpha, &decomposition.eigenvalues)).abs())
}

/// `Δyᵀ L Δy` summed edgewise as `Σ_{(i,j)∈E} (Δy_i - Δy_j)²`.
pub fn dirichlet_energy(graph: &Graph, delta_y: &[f64]) -> Result<f64> {
    if delta_y.len() != graph.num_nodes() {
        return Err(Error::DimensionMismatch {
            context: "dirichlet energy",
            expected: graph.num_nodes(),
            found: delta_y.len(),
        });
    }
    Ok(graph
        .edges()
        .map(|(i, j)| {
            let d = delta_y[i] - delta_y[j];
            d * d
        })
        .sum())
}

/// Analytic orthonormal eigenbasis of the normalized Laplacian of an
/// even-length ring, ordered so index `k` has frequency `⌈k/2⌉`:
/// index 0 is constant, odd `k < N-1` are sines, even `k > 0` cosines, and
/// `k = N-1` is the alternating vector with eigenvalue 2.
pub fn ring_basis(num_nodes: usize) -> Result<SpectralDecomposition> {
    if num_nodes < 4 || num_nodes % 2 != 0 {
        return Err(Error::invalid(format!(
            "ring basis needs an even node count of at least 4, got {num_nodes}"
        )));
    }
    let n = num_nodes;
    let nf = n as f64;
    let half_norm = (nf / 2.0).sqrt();
    let full_norm = nf.sqrt();
    let mut basis = Array2::zeros((n, n));
    let mut eigenvalues = Vec::with_capacity(n);
    for k in 0..n {
        let frequency = k.div_ceil(2);
        eigenvalues.push(1.0 - (2.0 * PI * frequency as f64 / nf).cos());
        for node in 0..n {
            let m = node as f64;
            basis[[node, k]] = if k == 0 {
                1.0 / full_norm
            } else if k == n - 1 {
                (PI * m).cos() / full_norm
            } else if k % 2 == 1 {
                (PI * (k + 1) as f64 * m / nf).sin() / half_norm
            } else {
                (PI * k as f64 * m / nf).cos() / half_norm
            };
        }
    }
    // cos(πm) is computed exactly as ±1 to keep the alternating mode clean
    for node in 0..n {
        basis[[node, n - 1]] = if node % 2 == 0 { 1.0 } else { -1.0 } / full_norm;
    }
    Ok(SpectralDecomposition { eigenvalues, basis })
}

/// SRL gap `L(G_1) - L(G_2)` between a ring with alternating labels (`h = 0`)
/// and one with uniform labels (`h = 1`) when the feature spectrum is
/// constant: `2 (g(0) - g(2)) / √(Σ_j g(λ_j)²)`. Zero for any even filter.
pub fn ring_srl_gap(filter: &PolyFilter, num_nodes: usize, beta_const: f64) -> Result<f64> {
    if !(beta_const > 0.0) {
        return Err(Error::invalid("constant feature spectrum must be positive"));
    }
    let ring = ring_basis(num_nodes)?;
    let norm: f64 = ring
        .eigenvalues
        .iter()
        .map(|&l| filter.eval(l).powi(2))
        .sum::<f64>()
        .sqrt();
    if norm == 0.0 {
        return Err(Error::FilterAnnihilatesFeatures);
    }
    let g0 = filter.eval(0.0);
    let g2 = filter.eval(2.0);
    if g0 == g2 {
        return Ok(0.0);
    }
    Ok(2.0 * (g0 - g2) / norm)
}

/// Coefficients minimizing `Σ_i (α_i - g(λ_i) β_i)²` over filters of the
/// given parity with `num_coefficients` terms (normal equations, tiny ridge).
pub fn fit_filter_least_squares(
    alpha: &Spectrum,
    beta: &Spectrum,
    eigenvalues: &[f64],
    parity: Parity,
    num_coefficients: usize,
) -> Result<PolyFilter> {
    let n = check_spectra(alpha, beta, eigenvalues)?;
    if num_coefficients == 0 {
        return Err(Error::invalid("filter fit needs at least one coefficient"));
    }
    let k = num_coefficients;
    let template = PolyFilter::new(parity, vec![0.0; k]);
    let design = Array2::from_shape_fn((n, k), |(i, j)| {
        beta.0[i] * (1.0 - eigenvalues[i]).powi(template.power_of(j) as i32)
    });
    let mut gram = design.t().dot(&design);
    let scale = (0..k)
        .map(|j| gram[[j, j]])
        .fold(0.0f64, f64::max)
        .max(1e-300);
    for j in 0..k {
        gram[[j, j]] += 1e-12 * scale;
    }
    let rhs = design.t().dot(&ndarray::ArrayView1::from(&alpha.0[..]));
    let w = solve_dense(gram, rhs.to_vec())?;
    Ok(PolyFilter::new(parity, w))
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Array2<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))
            .expect("non-empty range");
        if a[[pivot, col]].abs() < 1e-300 {
            return Err(Error::invalid("singular system in filter fit"));
        }
        if pivot != col {
            for j in 0..n {
                a.swap([col, j], [pivot, j]);
            }
            b.swap(col, pivot);
        }
        for row in (col + 1)..n {
            let f = a[[row, col]] / a[[col, col]];
            for j in col..n {
                a[[row, j]] -= f * a[[col, j]];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = ((row + 1)..n).map(|j| a[[row, j]] * x[j]).sum();
        x[row] = (b[row] - tail) / a[[row, row]];
    }
    Ok(x)
}

/// Plot-ready CSV: `index,eigenvalue,alpha,beta` (empty cells when absent).
pub fn spectrum_csv(
    eigenvalues: &[f64],
    alpha: Option<&Spectrum>,
    beta: Option<&Spectrum>,
) -> String {
    let mut out = String::from("index,eigenvalue,alpha,beta\n");
    let cell =
        |s: Option<&Spectrum>, i: usize| s.map(|s| format!("{:.17e}", s.0[i])).unwrap_or_default();
    for (i, l) in eigenvalues.iter().enumerate() {
        let _ = writeln!(out, "{i},{l:.17e},{},{}", cell(alpha, i), cell(beta, i));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ring(n: usize) -> Graph {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(&edges, n).unwrap()
    }

    #[test]
    fn two_by_two() {
        let d = eigendecompose(&array![[1.0, -1.0], [-1.0, 1.0]]).unwrap();
        assert!((d.eigenvalues[0]).abs() < 1e-14);
        assert!((d.eigenvalues[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn ring_six_spectrum() {
        let l = ring(6)
            .normalized_laplacian_dense(DEFAULT_DENSE_CAP)
            .unwrap();
        let d = eigendecompose(&l).unwrap();
        let expected = [0.0, 0.5, 0.5, 1.5, 1.5, 2.0];
        for (a, b) in d.eigenvalues.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
        }
    }

    #[test]
    fn ring_four_spectrum() {
        let l = ring(4)
            .normalized_laplacian_dense(DEFAULT_DENSE_CAP)
            .unwrap();
        let d = eigendecompose(&l).unwrap();
        for (a, b) in d.eigenvalues.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn random_symmetric_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 20;
        let mut m = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = rng.gen_range(-1.0..1.0);
                m[[i, j]] = v;
                m[[j, i]] = v;
            }
        }
        let d = eigendecompose(&m).unwrap();
        let r = d.reconstruct();
        let err = (&r - &m).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(err <= 1e-8, "{err}");
        assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rejects_asymmetric() {
        let err = eigendecompose(&array![[1.0, 0.5], [0.4, 1.0]]).unwrap_err();
        assert!(matches!(err, Error::NonSymmetric { .. }));
    }

    #[test]
    fn deterministic() {
        let l = ring(10)
            .normalized_laplacian_dense(DEFAULT_DENSE_CAP)
            .unwrap();
        assert_eq!(eigendecompose(&l).unwrap(), eigendecompose(&l).unwrap());
    }

    #[test]
    fn label_spectrum_of_constant_vector() {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (0, 2)], 4).unwrap();
        let d = eigendecompose(&g.normalized_laplacian_dense(DEFAULT_DENSE_CAP).unwrap()).unwrap();
        let alpha = label_spectrum(&d, &[1.0; 4]).unwrap();
        assert!((alpha.energy() - 4.0).abs() < 1e-10);
        assert!(label_spectrum(&d, &[1.0; 3]).is_err());
    }

    #[test]
    fn ring_basis_alternating_and_constant() {
        let n = 8;
        let d = ring_basis(n).unwrap();
        let alt: Vec<f64> = (0..n)
            .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        let a = label_spectrum(&d, &alt).unwrap();
        for (k, v) in a.values().iter().enumerate() {
            let want = if k == n - 1 { (n as f64).sqrt() } else { 0.0 };
            assert!((v - want).abs() < 1e-12, "k={k} v={v}");
        }
        let c = label_spectrum(&d, &vec![1.0; n]).unwrap();
        assert!((c.values()[0] - (n as f64).sqrt()).abs() < 1e-12);
        assert!(c.values()[1..].iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn ring_basis_eigenvalues_and_orthonormality() {
        let d = ring_basis(4).unwrap();
        for (a, b) in d.eigenvalues.iter().zip([0.0, 1.0, 1.0, 2.0]) {
            assert!((a - b).abs() < 1e-15);
        }
        for n in [4usize, 6, 10, 32] {
            let d = ring_basis(n).unwrap();
            let gram = d.basis.t().dot(&d.basis);
            for i in 0..n {
                for j in 0..n {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[[i, j]] - want).abs() < 1e-10);
                }
            }
            // diagonalizes the ring Laplacian
            let l = ring(n)
                .normalized_laplacian_dense(DEFAULT_DENSE_CAP)
                .unwrap();
            let err = (&d.reconstruct() - &l)
                .iter()
                .fold(0.0f64, |m, v| m.max(v.abs()));
            assert!(err < 1e-12);
        }
    }

    #[test]
    fn ring_basis_rejects_odd() {
        assert!(ring_basis(7).is_err());
        assert!(ring_basis(2).is_err());
    }

    #[test]
    fn srl_alignment_bounds() {
        let eig = vec![0.0, 0.5, 1.0, 2.0];
        let alpha = Spectrum(vec![1.0, -1.0, 1.0, 1.0]);
        let f = PolyFilter::full(vec![1.0]);
        let aligned = Spectrum(alpha.0.iter().map(|a| 3.0 * a).collect());
        assert!(srl(&alpha, &aligned, &f, &eig).unwrap().abs() < 1e-14);
        let anti = Spectrum(alpha.0.iter().map(|a| -3.0 * a).collect());
        assert!((srl(&alpha, &anti, &f, &eig).unwrap() - 4.0).abs() < 1e-14);
    }

    #[test]
    fn srl_forms_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..100 {
            let n = rng.gen_range(2..30);
            let eig: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0)).collect();
            let mut alpha: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let scale = (n as f64 / alpha.iter().map(|a| a * a).sum::<f64>()).sqrt();
            alpha.iter_mut().for_each(|a| *a *= scale);
            let alpha = Spectrum(alpha);
            let beta = Spectrum((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let f = PolyFilter::full((0..5).map(|_| rng.gen_range(-1.0..1.0)).collect());
            let a = srl(&alpha, &beta, &f, &eig).unwrap();
            let b = srl_inner_product(&alpha, &beta, &f, &eig).unwrap();
            assert!((a - b).abs() <= 1e-10);
            assert!((-1e-12..=4.0 + 1e-12).contains(&a));
        }
    }

    #[test]
    fn srl_zero_filter_errors() {
        let eig = vec![0.0, 2.0];
        let err = srl(
            &Spectrum(vec![1.0, 1.0]),
            &Spectrum(vec![1.0, 1.0]),
            &PolyFilter::full(vec![0.0]),
            &eig,
        )
        .unwrap_err();
        assert!(err.to_string().contains("annihilates"));
    }

    #[test]
    fn dirichlet_small_cases() {
        let g = Graph::from_edges(&[(0, 1)], 2).unwrap();
        assert_eq!(dirichlet_energy(&g, &[1.0, -1.0]).unwrap(), 4.0);
        assert_eq!(dirichlet_energy(&g, &[1.0, 1.0]).unwrap(), 0.0);
    }

    #[test]
    fn homophily_identity_uniform_labels() {
        let g = ring(8);
        let labels = LabelAssignment::new(vec![0; 8], 2).unwrap();
        assert!(verify_homophily_identity(&g, &labels, LaplacianKind::Normalized).unwrap() <= 1e-9);
    }

    #[test]
    fn homophily_identity_rejects_irregular_normalized() {
        let g = Graph::from_edges(&[(0, 1), (1, 2)], 3).unwrap();
        let labels = LabelAssignment::new(vec![0, 1, 0], 2).unwrap();
        assert!(matches!(
            verify_homophily_identity(&g, &labels, LaplacianKind::Normalized),
            Err(Error::IrregularGraph { min: 1, max: 2 })
        ));
        assert!(
            verify_homophily_identity(&g, &labels, LaplacianKind::Unnormalized).unwrap() <= 1e-9
        );
    }

    #[test]
    fn ring_gap_cases() {
        let even = PolyFilter::even(vec![0.3, -0.2, 1.0]);
        assert_eq!(ring_srl_gap(&even, 8, 1.0).unwrap(), 0.0);
        // g(λ) = 1 - λ on a ring of 8: g(0) - g(2) = 2
        let f = PolyFilter::full(vec![0.0, 1.0]);
        let ring8 = ring_basis(8).unwrap();
        let norm: f64 = ring8
            .eigenvalues
            .iter()
            .map(|l| (1.0 - l).powi(2))
            .sum::<f64>()
            .sqrt();
        let gap = ring_srl_gap(&f, 8, 2.5).unwrap();
        assert!((gap - 4.0 / norm).abs() < 1e-12);
    }

    #[test]
    fn csv_export() {
        let csv = spectrum_csv(&[0.0, 2.0], Some(&Spectrum(vec![1.0, -1.0])), None);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,eigenvalue,alpha,beta");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("1,2.0"));
        assert!(lines[2].ends_with(','));
    }
}
