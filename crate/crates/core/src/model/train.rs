//! Full-batch training with early stopping on validation accuracy.

use std::time::Instant;

use log::debug;
use ndarray::{Array2, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{backward, forward_cached, Adam, AdamState, DropoutMasks, ModelParams, Variant};
use crate::error::{Error, Result};
use crate::graph::{FeatureMatrix, Graph, LabelAssignment, Propagator};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub max_epochs: usize,
    pub patience: usize,
    /// Transform learning rate.
    pub lr: f64,
    pub filter_lr: f64,
    /// Coupled L2 decay on the transform only.
    pub weight_decay: f64,
    pub dropout: f64,
    pub hidden: usize,
    /// Highest power of `P` (the PPR order `K`).
    pub order: usize,
    pub alpha: f64,
    pub eta: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            max_epochs: 1000,
            patience: 200,
            lr: 0.01,
            filter_lr: 0.01,
            weight_decay: 5e-4,
            dropout: 0.5,
            hidden: 64,
            order: 10,
            alpha: 0.1,
            eta: 0.05,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.max_epochs == 0 {
            return bad("max_epochs must be positive".into());
        }
        if self.patience == 0 || self.patience > self.max_epochs {
            return bad(format!(
                "patience must lie in 1..={} (got {})",
                self.max_epochs, self.patience
            ));
        }
        if !(self.lr > 0.0 && self.lr.is_finite())
            || !(self.filter_lr > 0.0 && self.filter_lr.is_finite())
        {
            return bad(format!(
                "learning rates must be positive (lr {}, filter_lr {})",
                self.lr, self.filter_lr
            ));
        }
        if !(self.weight_decay >= 0.0) || !(self.eta >= 0.0) {
            return bad("weight_decay and eta must be non-negative".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout must lie in [0, 1), got {}", self.dropout));
        }
        if self.hidden == 0 {
            return bad("hidden width must be positive".into());
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        Ok(())
    }
}

/// Per-epoch trace. Wall time is kept out of the serialized form so reports
/// from identical runs compare byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub variant: Variant,
    pub losses: Vec<f64>,
    pub val_accuracies: Vec<f64>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub test_accuracy: Option<f64>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

impl TrainReport {
    pub fn epochs(&self) -> usize {
        self.losses.len()
    }

    /// `epoch,loss,val_accuracy` rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss,val_accuracy\n");
        for (epoch, (loss, acc)) in self.losses.iter().zip(&self.val_accuracies).enumerate() {
            out.push_str(&format!("{epoch},{loss},{acc}\n"));
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// A graph with features, labels and the nodes that count for this role.
#[derive(Debug, Clone, Copy)]
pub struct DataView<'a> {
    pub graph: &'a Graph,
    pub features: &'a FeatureMatrix,
    pub labels: &'a LabelAssignment,
    pub mask: &'a [usize],
}

impl<'a> DataView<'a> {
    pub fn new(
        graph: &'a Graph,
        features: &'a FeatureMatrix,
        labels: &'a LabelAssignment,
        mask: &'a [usize],
    ) -> Result<Self> {
        let n = graph.num_nodes();
        for (context, found) in [
            ("feature rows", features.rows()),
            ("label count", labels.num_nodes()),
        ] {
            if found != n {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: n,
                    found,
                });
            }
        }
        if mask.is_empty() {
            return Err(Error::EmptyMask);
        }
        if let Some(&bad) = mask.iter().find(|&&i| i >= n) {
            return Err(Error::IndexOutOfRange {
                u: bad,
                v: bad,
                num_nodes: n,
            });
        }
        Ok(DataView {
            graph,
            features,
            labels,
            mask,
        })
    }
}

/// Argmax accuracy over `mask`; ties go to the lowest class id.
pub fn accuracy(logits: &Array2<f64>, labels: &LabelAssignment, mask: &[usize]) -> f64 {
    if mask.is_empty() {
        return 0.0;
    }
    let correct = mask
        .iter()
        .filter(|&&i| {
            let row = logits.row(i);
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best == labels.class_of(i)
        })
        .count();
    correct as f64 / mask.len() as f64
}

pub fn evaluate<O: Propagator + ?Sized>(
    params: &ModelParams,
    op: &O,
    x: ArrayView2<'_, f64>,
    labels: &LabelAssignment,
    mask: &[usize],
) -> Result<f64> {
    let logits = forward_cached(params, op, x, &DropoutMasks::none())?.logits;
    if labels.num_nodes() != logits.nrows() {
        return Err(Error::DimensionMismatch {
            context: "label count",
            expected: logits.nrows(),
            found: labels.num_nodes(),
        });
    }
    Ok(accuracy(&logits, labels, mask))
}

struct Optimizer {
    adam: Adam,
    w1: AdamState,
    b1: AdamState,
    w2: AdamState,
    b2: AdamState,
    filter: AdamState,
}

impl Optimizer {
    fn new(params: &ModelParams) -> Self {
        Optimizer {
            adam: Adam::default(),
            w1: AdamState::new(params.w1.len()),
            b1: AdamState::new(params.b1.len()),
            w2: AdamState::new(params.w2.len()),
            b2: AdamState::new(params.b2.len()),
            filter: AdamState::new(params.filter.coefficients.len()),
        }
    }

    fn step(&mut self, params: &mut ModelParams, grads: &super::Gradients, config: &TrainConfig) {
        let (lr, wd) = (config.lr, config.weight_decay);
        let slice = |a: &ndarray::Array2<f64>| a.as_slice().expect("standard layout").to_vec();
        let g_w1 = slice(&grads.w1);
        let g_w2 = slice(&grads.w2);
        self.adam.step(
            &mut self.w1,
            params.w1.as_slice_mut().expect("standard layout"),
            &g_w1,
            lr,
            wd,
        );
        self.adam.step(
            &mut self.b1,
            params.b1.as_slice_mut().expect("contiguous"),
            grads.b1.as_slice().expect("contiguous"),
            lr,
            wd,
        );
        self.adam.step(
            &mut self.w2,
            params.w2.as_slice_mut().expect("standard layout"),
            &g_w2,
            lr,
            wd,
        );
        self.adam.step(
            &mut self.b2,
            params.b2.as_slice_mut().expect("contiguous"),
            grads.b2.as_slice().expect("contiguous"),
            lr,
            wd,
        );
        if params.variant.filter_trainable() {
            self.adam.step(
                &mut self.filter,
                &mut params.filter.coefficients,
                &grads.filter,
                config.filter_lr,
                0.0,
            );
        }
    }
}

/// Trains `variant` on `train_view`, keeping the parameters from the epoch
/// with the best validation accuracy. Deterministic for a fixed seed.
pub fn train(
    config: &TrainConfig,
    variant: Variant,
    train_view: &DataView<'_>,
    val_view: &DataView<'_>,
) -> Result<(ModelParams, TrainReport)> {
    config.validate()?;
    let started = Instant::now();
    let in_dim = train_view.features.cols();
    if val_view.features.cols() != in_dim {
        return Err(Error::DimensionMismatch {
            context: "validation feature columns",
            expected: in_dim,
            found: val_view.features.cols(),
        });
    }
    let num_classes = train_view
        .labels
        .num_classes()
        .max(val_view.labels.num_classes());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let filter = variant.initial_filter(config.order, config.alpha)?;
    let mut params = ModelParams::init(
        variant,
        in_dim,
        config.hidden,
        num_classes,
        filter,
        &mut rng,
    )?;
    let mut optimizer = Optimizer::new(&params);

    let mut losses = Vec::new();
    let mut val_accuracies = Vec::new();
    let mut best = (f64::NEG_INFINITY, 0usize, params.clone());
    let mut stale = 0usize;
    for epoch in 0..config.max_epochs {
        let masks = DropoutMasks::sample(
            config.dropout,
            train_view.graph.num_nodes(),
            in_dim,
            config.hidden,
            &mut rng,
        )?;
        let (value, grads) = backward(
            &params,
            train_view.graph,
            train_view.features.view(),
            train_view.labels,
            train_view.mask,
            config.eta,
            &masks,
        )?;
        if !value.is_finite() {
            return Err(Error::Divergence { epoch, loss: value });
        }
        optimizer.step(&mut params, &grads, config);
        let val_acc = evaluate(
            &params,
            val_view.graph,
            val_view.features.view(),
            val_view.labels,
            val_view.mask,
        )
        .map_err(|e| match e {
            Error::NonFinite { .. } => Error::Divergence {
                epoch,
                loss: f64::NAN,
            },
            other => other,
        })?;
        losses.push(value);
        val_accuracies.push(val_acc);
        if val_acc > best.0 {
            best = (val_acc, epoch, params.clone());
            stale = 0;
        } else {
            stale += 1;
            if stale >= config.patience {
                debug!(
                    "{variant}: early stop at epoch {epoch}, best epoch {}",
                    best.1
                );
                break;
            }
        }
    }
    let (best_val_accuracy, best_epoch, best_params) = best;
    let report = TrainReport {
        variant,
        losses,
        val_accuracies,
        best_epoch,
        best_val_accuracy,
        test_accuracy: None,
        wall_time_secs: started.elapsed().as_secs_f64(),
    };
    Ok((best_params, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    #[test]
    fn argmax_ties_go_low() {
        let labels = LabelAssignment::new(vec![0, 1, 1], 2).unwrap();
        let logits = array![[0.0, 0.0], [0.0, 0.0], [0.0, 1.0]];
        assert!((accuracy(&logits, &labels, &[0, 1, 2]) - 2.0 / 3.0).abs() < 1e-15);
        let perfect = array![[5.0, 0.0], [0.0, 5.0], [-1.0, 2.0]];
        assert_eq!(accuracy(&perfect, &labels, &[0, 1, 2]), 1.0);
    }

    fn separable(n: usize, seed: u64) -> (Graph, FeatureMatrix, LabelAssignment) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let classes: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let x = Array2::from_shape_fn((n, 4), |(i, j)| {
            let base: f64 = rng.gen_range(-1.0..1.0);
            if j == 0 {
                base.abs() + if classes[i] == 0 { 1.0 } else { -1.0 }
            } else {
                base
            }
        });
        (
            Graph::empty(n),
            FeatureMatrix::new(x).unwrap(),
            LabelAssignment::new(classes, 2).unwrap(),
        )
    }

    #[test]
    fn mlp_fits_separable_data() {
        let (g, x, y) = separable(80, 1);
        let all: Vec<usize> = (0..80).collect();
        let view = DataView::new(&g, &x, &y, &all).unwrap();
        let config = TrainConfig {
            max_epochs: 200,
            patience: 200,
            hidden: 16,
            dropout: 0.0,
            ..TrainConfig::default()
        };
        let (params, report) = train(&config, Variant::MlpOnly, &view, &view).unwrap();
        let acc = evaluate(&params, &g, x.view(), &y, &all).unwrap();
        assert!(acc >= 0.99, "train accuracy {acc}");
        assert_eq!(
            report.val_accuracies[report.best_epoch],
            report.best_val_accuracy
        );
        let head = &report.losses[..10];
        assert!(head.windows(2).all(|w| w[1] <= w[0]), "{head:?}");
    }

    #[test]
    fn training_is_deterministic() {
        let (g, x, y) = separable(40, 2);
        let all: Vec<usize> = (0..40).collect();
        let view = DataView::new(&g, &x, &y, &all).unwrap();
        let config = TrainConfig {
            max_epochs: 30,
            patience: 10,
            hidden: 8,
            seed: 11,
            ..TrainConfig::default()
        };
        let (p1, r1) = train(&config, Variant::EvenNet, &view, &view).unwrap();
        let (p2, r2) = train(&config, Variant::EvenNet, &view, &view).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(r1.to_json().unwrap(), r2.to_json().unwrap());
    }

    #[test]
    fn config_validation() {
        assert!(TrainConfig::default().validate().is_ok());
        let bad = TrainConfig {
            patience: 2000,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = TrainConfig {
            lr: 0.0,
            ..TrainConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn frozen_filters_stay_put() {
        let (g, x, y) = separable(30, 3);
        let all: Vec<usize> = (0..30).collect();
        let view = DataView::new(&g, &x, &y, &all).unwrap();
        let config = TrainConfig {
            max_epochs: 20,
            patience: 20,
            hidden: 8,
            ..TrainConfig::default()
        };
        let (params, _) = train(&config, Variant::FixedLowPass, &view, &view).unwrap();
        assert_eq!(params.filter.coefficients, vec![0.0, 0.0, 1.0]);
    }
}
