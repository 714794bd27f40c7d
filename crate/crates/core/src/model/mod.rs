//! Decoupled classifier: a two-layer transform `H = W2 relu(W1 x + b1) + b2`
//! followed by a polynomial filter `Z = Σ w_k P^k H`.
//!
//! Gradients are written out by hand. The filter adjoint reuses the forward
//! filter because `P` is symmetric.

mod gradcheck;
mod optim;
mod train;

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{Parity, PolyFilter};
use crate::graph::{FeatureMatrix, LabelAssignment, Propagator};

pub use gradcheck::{gradient_check, GradientCheck};
pub use optim::{Adam, AdamState};
pub use train::{accuracy, evaluate, train, DataView, TrainConfig, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    #[serde(rename = "evennet")]
    EvenNet,
    #[serde(rename = "fullorder")]
    FullOrder,
    #[serde(rename = "mlp")]
    MlpOnly,
    #[serde(rename = "lowpass")]
    FixedLowPass,
    #[serde(rename = "evenreg")]
    EvenReg,
}

impl Variant {
    pub const ALL: [Variant; 5] = [
        Variant::EvenNet,
        Variant::FullOrder,
        Variant::MlpOnly,
        Variant::FixedLowPass,
        Variant::EvenReg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::EvenNet => "evennet",
            Variant::FullOrder => "fullorder",
            Variant::MlpOnly => "mlp",
            Variant::FixedLowPass => "lowpass",
            Variant::EvenReg => "evenreg",
        }
    }

    pub fn parity(self) -> Parity {
        match self {
            Variant::EvenNet => Parity::Even,
            _ => Parity::Full,
        }
    }

    pub fn filter_trainable(self) -> bool {
        matches!(
            self,
            Variant::EvenNet | Variant::FullOrder | Variant::EvenReg
        )
    }

    /// Starting filter: PPR profile for the learnable variants, `P²` for the
    /// fixed low-pass baseline, identity for the MLP.
    pub fn initial_filter(self, order: usize, alpha: f64) -> Result<PolyFilter> {
        match self {
            Variant::EvenNet | Variant::FullOrder | Variant::EvenReg => {
                PolyFilter::ppr_init(alpha, order, self.parity())
            }
            Variant::MlpOnly => Ok(PolyFilter::identity(Parity::Full)),
            Variant::FixedLowPass => Ok(PolyFilter::full(vec![0.0, 0.0, 1.0])),
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown variant {s:?} (expected one of evennet, fullorder, mlp, lowpass, evenreg)"
                ))
            })
    }
}

/// Transform weights plus filter coefficients. Serializes as one JSON
/// document with shapes and row-major values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub variant: Variant,
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub filter: PolyFilter,
}

impl ModelParams {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng>(
        variant: Variant,
        in_dim: usize,
        hidden: usize,
        num_classes: usize,
        filter: PolyFilter,
        rng: &mut R,
    ) -> Result<Self> {
        if in_dim == 0 || hidden == 0 || num_classes == 0 {
            return Err(Error::invalid(format!(
                "model dimensions must be positive (in {in_dim}, hidden {hidden}, classes {num_classes})"
            )));
        }
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Array2::from_shape_simple_fn((rows, cols), || rng.gen_range(-limit..limit))
        };
        let w1 = glorot(in_dim, hidden);
        let w2 = glorot(hidden, num_classes);
        let params = ModelParams {
            variant,
            w1,
            b1: Array1::zeros(hidden),
            w2,
            b2: Array1::zeros(num_classes),
            filter,
        };
        params.validate()?;
        Ok(params)
    }

    /// Seeded construction with the variant's default filter.
    pub fn seeded(
        variant: Variant,
        in_dim: usize,
        hidden: usize,
        num_classes: usize,
        order: usize,
        alpha: f64,
        seed: u64,
    ) -> Result<Self> {
        let filter = variant.initial_filter(order, alpha)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::init(variant, in_dim, hidden, num_classes, filter, &mut rng)
    }

    pub fn in_dim(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    pub fn num_classes(&self) -> usize {
        self.w2.ncols()
    }

    pub fn validate(&self) -> Result<()> {
        let h = self.hidden();
        let c = self.num_classes();
        for (context, expected, found) in [
            ("b1 length", h, self.b1.len()),
            ("w2 rows", h, self.w2.nrows()),
            ("b2 length", c, self.b2.len()),
        ] {
            if expected != found {
                return Err(Error::DimensionMismatch {
                    context,
                    expected,
                    found,
                });
            }
        }
        if self.filter.parity != self.variant.parity() {
            return Err(Error::invalid(format!(
                "{} expects a {:?} filter, found {:?}",
                self.variant,
                self.variant.parity(),
                self.filter.parity
            )));
        }
        let finite = self
            .w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .all(|v| v.is_finite())
            && self.filter.coefficients.iter().all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite {
                context: format!("{} parameters", self.variant),
            });
        }
        Ok(())
    }

    /// `η Σ |w_k|` over odd-index coefficients, charged to EvenReg only.
    pub fn odd_penalty(&self, eta: f64) -> f64 {
        if self.variant != Variant::EvenReg {
            return 0.0;
        }
        eta * self
            .filter
            .coefficients
            .iter()
            .skip(1)
            .step_by(2)
            .map(|w| w.abs())
            .sum::<f64>()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let params: ModelParams = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }
}

/// Inverted-dropout multipliers: zero or `1/(1-rate)`. `None` means no dropout.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DropoutMasks {
    pub input: Option<Array2<f64>>,
    pub hidden: Option<Array2<f64>>,
}

impl DropoutMasks {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn sample<R: Rng>(
        rate: f64,
        rows: usize,
        in_dim: usize,
        hidden: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&rate) {
            return Err(Error::invalid(format!(
                "dropout rate must lie in [0, 1), got {rate}"
            )));
        }
        if rate == 0.0 {
            return Ok(Self::none());
        }
        let keep = 1.0 / (1.0 - rate);
        let mut draw = |cols: usize| {
            Array2::from_shape_simple_fn((rows, cols), || {
                if rng.gen::<f64>() < rate {
                    0.0
                } else {
                    keep
                }
            })
        };
        let input = draw(in_dim);
        let hidden = draw(hidden);
        Ok(DropoutMasks {
            input: Some(input),
            hidden: Some(hidden),
        })
    }
}

/// Intermediate values kept for the backward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub input: Array2<f64>,
    pub pre_activation: Array2<f64>,
    pub hidden: Array2<f64>,
    pub transformed: Array2<f64>,
    pub terms: Vec<Array2<f64>>,
    pub logits: Array2<f64>,
}

/// Gradients laid out like [`ModelParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
    pub filter: Vec<f64>,
}

impl Gradients {
    pub fn max_abs(&self) -> f64 {
        self.w1
            .iter()
            .chain(&self.b1)
            .chain(&self.w2)
            .chain(&self.b2)
            .chain(&self.filter)
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

fn check_rows(context: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            context,
            expected,
            found,
        });
    }
    Ok(())
}

fn masked(values: Array2<f64>, mask: Option<&Array2<f64>>) -> Result<Array2<f64>> {
    match mask {
        None => Ok(values),
        Some(m) => {
            check_rows("dropout mask shape", values.len(), m.len())?;
            Ok(values * m)
        }
    }
}

/// Forward pass with explicit dropout multipliers.
pub fn forward_cached<O: Propagator + ?Sized>(
    params: &ModelParams,
    op: &O,
    x: ArrayView2<'_, f64>,
    masks: &DropoutMasks,
) -> Result<ForwardCache> {
    check_rows("feature columns", params.in_dim(), x.ncols())?;
    check_rows("feature rows", op.num_nodes(), x.nrows())?;
    let input = masked(x.to_owned(), masks.input.as_ref())?;
    let pre_activation = input.dot(&params.w1) + &params.b1;
    let hidden = masked(pre_activation.mapv(|v| v.max(0.0)), masks.hidden.as_ref())?;
    let transformed = hidden.dot(&params.w2) + &params.b2;
    let (terms, logits) = if params.variant == Variant::MlpOnly {
        (Vec::new(), transformed.clone())
    } else {
        let terms = params.filter.basis_terms(op, transformed.view())?;
        let mut logits = Array2::zeros(transformed.raw_dim());
        for (w, term) in params.filter.coefficients.iter().zip(&terms) {
            logits.scaled_add(*w, term);
        }
        (terms, logits)
    };
    if let Some(pos) = logits.iter().position(|v| !v.is_finite()) {
        let cols = logits.ncols().max(1);
        return Err(Error::NonFinite {
            context: format!(
                "{} logits at node {} class {} (max |w1| {:.3e}, filter {:?})",
                params.variant,
                pos / cols,
                pos % cols,
                params.w1.iter().fold(0.0f64, |m, v| m.max(v.abs())),
                params.filter.coefficients
            ),
        });
    }
    Ok(ForwardCache {
        input,
        pre_activation,
        hidden,
        transformed,
        terms,
        logits,
    })
}

/// Logits `N x C`. Dropout is sampled from `rng` only in train mode.
pub fn forward<O: Propagator + ?Sized, R: Rng>(
    params: &ModelParams,
    op: &O,
    x: &FeatureMatrix,
    train_mode: bool,
    dropout: f64,
    rng: &mut R,
) -> Result<Array2<f64>> {
    let masks = if train_mode {
        DropoutMasks::sample(dropout, x.rows(), params.in_dim(), params.hidden(), rng)?
    } else {
        DropoutMasks::none()
    };
    Ok(forward_cached(params, op, x.view(), &masks)?.logits)
}

fn check_targets(logits: &Array2<f64>, labels: &LabelAssignment, mask: &[usize]) -> Result<()> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    check_rows("label count", logits.nrows(), labels.num_nodes())?;
    if labels.num_classes() > logits.ncols() {
        return Err(Error::DimensionMismatch {
            context: "logit columns",
            expected: labels.num_classes(),
            found: logits.ncols(),
        });
    }
    if let Some(&bad) = mask.iter().find(|&&i| i >= logits.nrows()) {
        return Err(Error::IndexOutOfRange {
            u: bad,
            v: bad,
            num_nodes: logits.nrows(),
        });
    }
    Ok(())
}

fn log_softmax_row(row: ndarray::ArrayView1<'_, f64>) -> Array1<f64> {
    let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    row.mapv(|v| v - lse)
}

/// Mean softmax cross-entropy over the masked nodes.
pub fn cross_entropy(
    logits: &Array2<f64>,
    labels: &LabelAssignment,
    mask: &[usize],
) -> Result<f64> {
    check_targets(logits, labels, mask)?;
    let total: f64 = mask
        .iter()
        .map(|&i| -log_softmax_row(logits.row(i))[labels.class_of(i)])
        .sum();
    Ok(total / mask.len() as f64)
}

/// Prediction loss plus the EvenReg odd-coefficient penalty.
pub fn loss(
    logits: &Array2<f64>,
    labels: &LabelAssignment,
    mask: &[usize],
    params: &ModelParams,
    eta: f64,
) -> Result<f64> {
    Ok(cross_entropy(logits, labels, mask)? + params.odd_penalty(eta))
}

/// `∂L_pred/∂Z`: `(softmax(z_i) - e_{y_i}) / |mask|` on masked rows.
pub fn logits_gradient(
    logits: &Array2<f64>,
    labels: &LabelAssignment,
    mask: &[usize],
) -> Result<Array2<f64>> {
    check_targets(logits, labels, mask)?;
    let scale = 1.0 / mask.len() as f64;
    let mut dz = Array2::zeros(logits.raw_dim());
    for &i in mask {
        let probs = log_softmax_row(logits.row(i)).mapv(f64::exp);
        let mut row = dz.row_mut(i);
        row.scaled_add(scale, &probs);
        row[labels.class_of(i)] -= scale;
    }
    Ok(dz)
}

/// Pulls `∂L/∂Z` back through the filter and the transform. The operator
/// must be symmetric.
pub fn backward_from_logits<O: Propagator + ?Sized>(
    params: &ModelParams,
    op: &O,
    cache: &ForwardCache,
    dz: &Array2<f64>,
    masks: &DropoutMasks,
) -> Result<Gradients> {
    check_rows("logit gradient rows", cache.logits.nrows(), dz.nrows())?;
    let (filter, d_transformed) = if params.variant == Variant::MlpOnly {
        (vec![0.0; params.filter.coefficients.len()], dz.clone())
    } else {
        let filter = cache.terms.iter().map(|t| (t * dz).sum()).collect();
        (filter, params.filter.apply(op, dz.view())?)
    };
    let w2 = cache.hidden.t().dot(&d_transformed);
    let b2 = d_transformed.sum_axis(Axis(0));
    let mut d_pre = masked(d_transformed.dot(&params.w2.t()), masks.hidden.as_ref())?;
    Zip::from(&mut d_pre)
        .and(&cache.pre_activation)
        .for_each(|d, &a| {
            if a <= 0.0 {
                *d = 0.0;
            }
        });
    let w1 = cache.input.t().dot(&d_pre);
    let b1 = d_pre.sum_axis(Axis(0));
    Ok(Gradients {
        w1,
        b1,
        w2,
        b2,
        filter,
    })
}

/// Loss and its gradient for one set of dropout multipliers, including the
/// EvenReg subgradient `η sign(w)` on odd coefficients with `sign(0) = 0`.
#[allow(clippy::too_many_arguments)]
pub fn backward<O: Propagator + ?Sized>(
    params: &ModelParams,
    op: &O,
    x: ArrayView2<'_, f64>,
    labels: &LabelAssignment,
    mask: &[usize],
    eta: f64,
    masks: &DropoutMasks,
) -> Result<(f64, Gradients)> {
    let cache = forward_cached(params, op, x, masks)?;
    let value = loss(&cache.logits, labels, mask, params, eta)?;
    let dz = logits_gradient(&cache.logits, labels, mask)?;
    let mut grads = backward_from_logits(params, op, &cache, &dz, masks)?;
    if params.variant == Variant::EvenReg {
        for (g, w) in grads
            .filter
            .iter_mut()
            .zip(&params.filter.coefficients)
            .skip(1)
            .step_by(2)
        {
            if *w != 0.0 {
                *g += eta * w.signum();
            }
        }
    }
    Ok((value, grads))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{DenseOperator, Graph};
    use ndarray::array;

    fn small_instance() -> (Graph, FeatureMatrix, LabelAssignment) {
        let g = Graph::from_edges(&[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)], 5).unwrap();
        let x = FeatureMatrix::new(Array2::from_shape_fn((5, 3), |(i, j)| {
            ((i * 3 + j) as f64 * 0.37).sin()
        }))
        .unwrap();
        let y = LabelAssignment::new(vec![0, 1, 0, 1, 1], 2).unwrap();
        (g, x, y)
    }

    #[test]
    fn identity_filter_matches_mlp() {
        let (g, x, _) = small_instance();
        let mut even = ModelParams::seeded(Variant::EvenNet, 3, 4, 2, 4, 0.1, 7).unwrap();
        even.filter = PolyFilter::even(vec![1.0, 0.0, 0.0]);
        let mut mlp = even.clone();
        mlp.variant = Variant::MlpOnly;
        mlp.filter = PolyFilter::identity(Parity::Full);
        let a = forward_cached(&even, &g, x.view(), &DropoutMasks::none())
            .unwrap()
            .logits;
        let b = forward_cached(&mlp, &g, x.view(), &DropoutMasks::none())
            .unwrap()
            .logits;
        assert_eq!(a, b);
    }

    #[test]
    fn zero_weights_give_log_c_loss() {
        let (g, x, y) = small_instance();
        let mut p = ModelParams::seeded(Variant::FullOrder, 3, 4, 2, 4, 0.1, 1).unwrap();
        p.w1.fill(0.0);
        p.w2.fill(0.0);
        let cache = forward_cached(&p, &g, x.view(), &DropoutMasks::none()).unwrap();
        let l = cross_entropy(&cache.logits, &y, &[0, 1, 2, 3, 4]).unwrap();
        assert!((l - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn lowpass_on_isolated_edge_is_identity() {
        let g = Graph::from_edges(&[(0, 1)], 2).unwrap();
        let x = FeatureMatrix::new(array![[1.0, -2.0], [0.5, 3.0]]).unwrap();
        let p = ModelParams::seeded(Variant::FixedLowPass, 2, 3, 2, 10, 0.1, 4).unwrap();
        let cache = forward_cached(&p, &g, x.view(), &DropoutMasks::none()).unwrap();
        for (a, b) in cache.logits.iter().zip(&cache.transformed) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn penalty_examples() {
        let mut p = ModelParams::seeded(Variant::EvenReg, 3, 4, 2, 4, 0.1, 1).unwrap();
        p.filter = PolyFilter::full(vec![0.5, 0.1, 0.3, -0.2]);
        assert!((p.odd_penalty(0.05) - 0.015).abs() < 1e-15);
        p.filter = PolyFilter::full(vec![0.5, 0.0, 0.3, 0.0]);
        assert_eq!(p.odd_penalty(0.05), 0.0);
        p.variant = Variant::FullOrder;
        p.filter = PolyFilter::full(vec![0.5, 0.1]);
        assert_eq!(p.odd_penalty(0.05), 0.0);
    }

    #[test]
    fn perfect_logits_drive_loss_to_zero() {
        let y = LabelAssignment::new(vec![0, 1, 1], 2).unwrap();
        let logits = array![[60.0, 0.0], [0.0, 60.0], [0.0, 60.0]];
        assert!(cross_entropy(&logits, &y, &[0, 1, 2]).unwrap() < 1e-20);
        assert!(matches!(
            cross_entropy(&logits, &y, &[]),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn zero_logit_gradient_gives_zero_gradients() {
        let (g, x, _) = small_instance();
        let p = ModelParams::seeded(Variant::EvenNet, 3, 4, 2, 4, 0.1, 2).unwrap();
        let cache = forward_cached(&p, &g, x.view(), &DropoutMasks::none()).unwrap();
        let dz = Array2::zeros(cache.logits.raw_dim());
        let grads = backward_from_logits(&p, &g, &cache, &dz, &DropoutMasks::none()).unwrap();
        assert_eq!(grads.max_abs(), 0.0);
    }

    #[test]
    fn identity_filter_adjoint_matches_mlp() {
        let (g, x, y) = small_instance();
        let mask = [0, 2, 3];
        let mut even = ModelParams::seeded(Variant::EvenNet, 3, 4, 2, 4, 0.1, 5).unwrap();
        even.filter = PolyFilter::even(vec![1.0]);
        let mut mlp = even.clone();
        mlp.variant = Variant::MlpOnly;
        mlp.filter = PolyFilter::identity(Parity::Full);
        let (_, a) = backward(&even, &g, x.view(), &y, &mask, 0.0, &DropoutMasks::none()).unwrap();
        let (_, b) = backward(&mlp, &g, x.view(), &y, &mask, 0.0, &DropoutMasks::none()).unwrap();
        assert_eq!(a.w1, b.w1);
        assert_eq!(a.w2, b.w2);
        assert_eq!(a.b1, b.b1);
        assert_eq!(a.b2, b.b2);
    }

    #[test]
    fn sign_flipped_operator_leaves_evennet_unchanged() {
        let (g, x, _) = small_instance();
        let p = ModelParams::seeded(Variant::EvenNet, 3, 4, 2, 6, 0.1, 3).unwrap();
        let dense = DenseOperator::from_graph(&g).unwrap();
        let flipped = DenseOperator::new(dense.matrix().mapv(|v| -v)).unwrap();
        let a = forward_cached(&p, &dense, x.view(), &DropoutMasks::none())
            .unwrap()
            .logits;
        let b = forward_cached(&p, &flipped, x.view(), &DropoutMasks::none())
            .unwrap()
            .logits;
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn dimension_and_nan_errors() {
        let (g, x, _) = small_instance();
        let p = ModelParams::seeded(Variant::EvenNet, 4, 4, 2, 4, 0.1, 3).unwrap();
        assert!(matches!(
            forward_cached(&p, &g, x.view(), &DropoutMasks::none()),
            Err(Error::DimensionMismatch { .. })
        ));
        let mut p = ModelParams::seeded(Variant::EvenNet, 3, 4, 2, 4, 0.1, 3).unwrap();
        p.w2[[0, 0]] = f64::NAN;
        p.w2[[1, 0]] = f64::NAN;
        p.w2[[2, 0]] = f64::NAN;
        p.w2[[3, 0]] = f64::NAN;
        assert!(matches!(
            forward_cached(&p, &g, x.view(), &DropoutMasks::none()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn json_round_trip_and_parity_check() {
        let p = ModelParams::seeded(Variant::EvenReg, 3, 4, 2, 5, 0.1, 9).unwrap();
        let text = p.to_json().unwrap();
        assert_eq!(ModelParams::from_json(&text).unwrap(), p);
        let mut bad = p.clone();
        bad.variant = Variant::EvenNet;
        assert!(ModelParams::from_json(&bad.to_json().unwrap()).is_err());
    }

    #[test]
    fn variant_names_parse() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("gcn".parse::<Variant>().is_err());
    }

    #[test]
    fn dropout_masks_scale_kept_units() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = DropoutMasks::sample(0.5, 40, 10, 6, &mut rng).unwrap();
        let input = m.input.unwrap();
        assert!(input.iter().all(|&v| v == 0.0 || v == 2.0));
        let kept = input.iter().filter(|&&v| v > 0.0).count();
        assert!(kept > 120 && kept < 280);
        assert!(DropoutMasks::sample(1.0, 2, 2, 2, &mut rng).is_err());
    }
}
