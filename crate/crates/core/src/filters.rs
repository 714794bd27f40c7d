//! Polynomial graph filters over powers of the propagation operator.
//!
//! A filter with coefficients `w` has response `g(λ) = Σ w_k (1-λ)^k` in full
//! mode and `g(λ) = Σ w_k (1-λ)^{2k}` in even mode, where `1 - λ` is the
//! eigenvalue of `P` paired with the Laplacian eigenvalue `λ`. Even filters are
//! symmetric about `λ = 1`, so they respond identically at `λ = 0` and `λ = 2`.

use ndarray::{Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Propagator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Full,
    Even,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyFilter {
    pub parity: Parity,
    pub coefficients: Vec<f64>,
}

impl PolyFilter {
    pub fn new(parity: Parity, coefficients: Vec<f64>) -> Self {
        PolyFilter {
            parity,
            coefficients,
        }
    }

    pub fn full(coefficients: Vec<f64>) -> Self {
        Self::new(Parity::Full, coefficients)
    }

    pub fn even(coefficients: Vec<f64>) -> Self {
        Self::new(Parity::Even, coefficients)
    }

    /// `w = (1)`: passes signals through unchanged.
    pub fn identity(parity: Parity) -> Self {
        Self::new(parity, vec![1.0])
    }

    /// Highest power of `P` the filter touches.
    pub fn order(&self) -> usize {
        match self.parity {
            Parity::Full => self.coefficients.len().saturating_sub(1),
            Parity::Even => 2 * self.coefficients.len().saturating_sub(1),
        }
    }

    /// Power of `P` multiplied by coefficient `index`.
    pub fn power_of(&self, index: usize) -> usize {
        match self.parity {
            Parity::Full => index,
            Parity::Even => 2 * index,
        }
    }

    /// Geometric personalized-PageRank profile.
    ///
    /// Full mode: `w_k = α(1-α)^k` for `k < K` and `w_K = (1-α)^K`, which sums
    /// to one. Even mode samples the same profile at even powers,
    /// `w_k = α(1-α)^{2k}` for `k < ⌊K/2⌋` with last entry `(1-α)^{2⌊K/2⌋}`,
    /// then rescales so the coefficients sum to one.
    pub fn ppr_init(alpha: f64, order: usize, parity: Parity) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::invalid(format!(
                "ppr alpha must lie in (0, 1], got {alpha}"
            )));
        }
        let decay = 1.0 - alpha;
        let coefficients = match parity {
            Parity::Full => {
                let mut w: Vec<f64> = (0..order).map(|k| alpha * decay.powi(k as i32)).collect();
                w.push(decay.powi(order as i32));
                w
            }
            Parity::Even => {
                let half = order / 2;
                let mut w: Vec<f64> = (0..half)
                    .map(|k| alpha * decay.powi(2 * k as i32))
                    .collect();
                w.push(decay.powi(2 * half as i32));
                let total: f64 = w.iter().sum();
                w.iter_mut().for_each(|c| *c /= total);
                w
            }
        };
        Ok(Self::new(parity, coefficients))
    }

    /// Scalar response `g(λ)`, by Horner's rule in `t = 1-λ` (or `t²`).
    pub fn eval(&self, lambda: f64) -> f64 {
        let t = 1.0 - lambda;
        let x = match self.parity {
            Parity::Full => t,
            Parity::Even => t * t,
        };
        horner(&self.coefficients, x)
    }

    /// `Σ w_k P^{power(k)} h`, keeping a running power of `P` applied to `h`.
    pub fn apply<O: Propagator + ?Sized>(
        &self,
        graph: &O,
        h: ArrayView2<'_, f64>,
    ) -> Result<Array2<f64>> {
        if h.nrows() != graph.num_nodes() {
            return Err(Error::DimensionMismatch {
                context: "filter apply",
                expected: graph.num_nodes(),
                found: h.nrows(),
            });
        }
        let mut current = h.to_owned();
        let mut out = current.mapv(|v| v * self.coefficients.first().copied().unwrap_or(0.0));
        for &w in self.coefficients.iter().skip(1) {
            current = self.step(graph, &current)?;
            out.scaled_add(w, &current);
        }
        Ok(out)
    }

    /// The basis signals `P^{power(k)} h` for every coefficient index `k`.
    pub fn basis_terms<O: Propagator + ?Sized>(
        &self,
        graph: &O,
        h: ArrayView2<'_, f64>,
    ) -> Result<Vec<Array2<f64>>> {
        let mut terms = Vec::with_capacity(self.coefficients.len());
        if self.coefficients.is_empty() {
            return Ok(terms);
        }
        terms.push(h.to_owned());
        for _ in 1..self.coefficients.len() {
            let next = self.step(graph, terms.last().expect("non-empty"))?;
            terms.push(next);
        }
        Ok(terms)
    }

    fn step<O: Propagator + ?Sized>(&self, graph: &O, x: &Array2<f64>) -> Result<Array2<f64>> {
        match self.parity {
            Parity::Full => graph.propagate(x.view()),
            Parity::Even => {
                let once = graph.propagate(x.view())?;
                graph.propagate(once.view())
            }
        }
    }

    /// Splits a filter into the part built from even powers of `1-λ` and the
    /// remaining odd response. Pointwise the even part equals
    /// `(g(λ) + g(2-λ)) / 2`.
    pub fn even_odd_decompose(&self) -> (PolyFilter, OddResponse) {
        match self.parity {
            Parity::Even => (
                self.clone(),
                OddResponse {
                    coefficients: Vec::new(),
                },
            ),
            Parity::Full => {
                let even = self.coefficients.iter().step_by(2).copied().collect();
                let odd = self
                    .coefficients
                    .iter()
                    .skip(1)
                    .step_by(2)
                    .copied()
                    .collect();
                (PolyFilter::even(even), OddResponse { coefficients: odd })
            }
        }
    }

    /// Same response written as a full-mode filter.
    pub fn to_full(&self) -> PolyFilter {
        match self.parity {
            Parity::Full => self.clone(),
            Parity::Even => {
                let mut w = vec![0.0; self.order() + 1];
                for (k, &c) in self.coefficients.iter().enumerate() {
                    w[2 * k] = c;
                }
                PolyFilter::full(w)
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Odd part `Σ v_k (1-λ)^{2k+1}` of a full-mode filter.
#[derive(Debug, Clone, PartialEq)]
pub struct OddResponse {
    pub coefficients: Vec<f64>,
}

impl OddResponse {
    pub fn eval(&self, lambda: f64) -> f64 {
        let t = 1.0 - lambda;
        t * horner(&self.coefficients, t * t)
    }
}

fn horner(coefficients: &[f64], x: f64) -> f64 {
    coefficients.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use ndarray::array;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn even_response_at_midpoint() {
        assert_eq!(PolyFilter::even(vec![1.0, 1.0]).eval(1.0), 1.0);
    }

    #[test]
    fn even_response_symmetric() {
        let f = PolyFilter::even(vec![0.3, -1.2, 0.7, 2.0]);
        assert!((f.eval(0.3) - f.eval(1.7)).abs() < 1e-12);
        assert_eq!(f.eval(0.0), f.eval(2.0));
    }

    #[test]
    fn ppr_full_profile() {
        let f = PolyFilter::ppr_init(0.1, 10, Parity::Full).unwrap();
        assert_eq!(f.coefficients.len(), 11);
        assert!((f.coefficients[0] - 0.1).abs() < 1e-15);
        assert!((f.coefficients[1] - 0.09).abs() < 1e-15);
        // geometric series: Σ_{k<K} α(1-α)^k = 1 - (1-α)^K, plus the tail (1-α)^K
        assert!((f.eval(0.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ppr_sums_to_one() {
        for &alpha in &[0.05, 0.1, 0.37, 0.9, 1.0] {
            for order in 0..14 {
                for parity in [Parity::Full, Parity::Even] {
                    let f = PolyFilter::ppr_init(alpha, order, parity).unwrap();
                    let s: f64 = f.coefficients.iter().sum();
                    assert!((s - 1.0).abs() < 1e-12, "alpha {alpha} K {order}");
                }
            }
        }
    }

    #[test]
    fn ppr_alpha_one_is_identity() {
        let f = PolyFilter::ppr_init(1.0, 6, Parity::Full).unwrap();
        assert_eq!(f.coefficients, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let e = PolyFilter::ppr_init(1.0, 6, Parity::Even).unwrap();
        assert_eq!(e.coefficients, vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn ppr_rejects_bad_alpha() {
        assert!(PolyFilter::ppr_init(0.0, 4, Parity::Full).is_err());
        assert!(PolyFilter::ppr_init(1.5, 4, Parity::Even).is_err());
        assert!(PolyFilter::ppr_init(f64::NAN, 4, Parity::Even).is_err());
    }

    #[test]
    fn even_order_counts() {
        let f = PolyFilter::ppr_init(0.1, 10, Parity::Even).unwrap();
        assert_eq!(f.coefficients.len(), 6);
        assert_eq!(f.order(), 10);
        let f = PolyFilter::ppr_init(0.1, 7, Parity::Even).unwrap();
        assert_eq!(f.coefficients.len(), 4);
    }

    #[test]
    fn identity_filter_apply() {
        let g = Graph::from_edges(&[(0, 1), (1, 2)], 3).unwrap();
        let h = array![[1.0, 2.0], [3.0, -1.0], [0.5, 0.0]];
        let out = PolyFilter::even(vec![1.0, 0.0, 0.0])
            .apply(&g, h.view())
            .unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn p_squared_on_isolated_edge() {
        let g = Graph::from_edges(&[(0, 1)], 2).unwrap();
        let out = PolyFilter::even(vec![0.0, 1.0])
            .apply(&g, array![[1.0], [0.0]].view())
            .unwrap();
        assert_eq!(out, array![[1.0], [0.0]]);
    }

    #[test]
    fn apply_rejects_wrong_rows() {
        let g = Graph::from_edges(&[(0, 1)], 2).unwrap();
        assert!(PolyFilter::full(vec![1.0])
            .apply(&g, Array2::zeros((3, 1)).view())
            .is_err());
    }

    #[test]
    fn decompose_pure_odd_and_pure_even() {
        let (even, odd) = PolyFilter::full(vec![0.0, 1.0]).even_odd_decompose();
        for &l in &[0.0, 0.4, 1.0, 1.3, 2.0] {
            assert_eq!(even.eval(l), 0.0);
        }
        assert_eq!(odd.eval(0.0), 1.0);
        assert_eq!(odd.eval(2.0), -1.0);

        let (_, odd) = PolyFilter::full(vec![0.5, 0.0, 2.0, 0.0, -1.0]).even_odd_decompose();
        for i in 0..=20 {
            assert_eq!(odd.eval(i as f64 / 10.0), 0.0);
        }
    }

    #[test]
    fn decompose_pointwise_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let len = rng.gen_range(1..12);
            let f = PolyFilter::full((0..len).map(|_| rng.gen_range(-2.0..2.0)).collect());
            let (even, odd) = f.even_odd_decompose();
            for i in 0..=200 {
                let l = 2.0 * i as f64 / 200.0;
                let mirrored = 0.5 * (f.eval(l) + f.eval(2.0 - l));
                assert!((even.eval(l) - mirrored).abs() <= 1e-12);
                assert!((odd.eval(l) - (f.eval(l) - even.eval(l))).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn to_full_preserves_response() {
        let f = PolyFilter::even(vec![0.2, -0.4, 1.1]);
        let full = f.to_full();
        assert_eq!(full.coefficients, vec![0.2, 0.0, -0.4, 0.0, 1.1]);
        for i in 0..=20 {
            let l = i as f64 / 10.0;
            assert!((full.eval(l) - f.eval(l)).abs() < 1e-14);
        }
    }

    #[test]
    fn json_shape() {
        let f = PolyFilter::even(vec![0.5, 0.25]);
        let text = f.to_json().unwrap();
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(value["parity"], "even");
        assert_eq!(value["coefficients"][1], 0.25);
        assert_eq!(PolyFilter::from_json(&text).unwrap(), f);
    }
}
