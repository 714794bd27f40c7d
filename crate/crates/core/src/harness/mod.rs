//! Experiment orchestration: paired generalization trials, attack sweeps and
//! the property suite.
//!
//! Trial `t` draws everything it needs from `ChaCha8Rng(base_seed)` on stream
//! `t`, so trials can run in any order (or in parallel) and still produce the
//! same table.

mod config;
pub mod properties;
mod table;

use log::info;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use config::{
    apply_override, train_config_from, AttackSweep, CsbmConfig, ExperimentConfig, ExperimentKind,
    SplitConfig,
};
pub use properties::{run_property_suite, PropertyCheck, PropertyReport};
pub use table::{mean_std, HomophilyRecord, ResultTable, SummaryRow, TrialRecord};

use crate::attacks::{attack, AttackSpec};
use crate::error::{Error, Result};
use crate::graph::{edge_homophily, Graph, LabelAssignment};
use crate::homophily::hop_homophily;
use crate::io::{load_dataset, Dataset};
use crate::model::{evaluate, train, DataView, TrainConfig};
use crate::synth::{feature_direction, generate_csbm, generate_csbm_with_direction};

pub fn trial_rng(base_seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial as u64);
    rng
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    /// Nodes the attacker may not touch: train and validation.
    pub fn protected(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.train.iter().chain(&self.val).copied().collect();
        p.sort_unstable();
        p
    }
}

/// Shuffled split with at least one node in each part; masks come back sorted.
pub fn random_split<R: Rng>(
    num_nodes: usize,
    train_frac: f64,
    val_frac: f64,
    rng: &mut R,
) -> Result<Split> {
    if num_nodes < 3 {
        return Err(Error::invalid(format!(
            "cannot split {num_nodes} nodes three ways"
        )));
    }
    let mut order: Vec<usize> = (0..num_nodes).collect();
    order.shuffle(rng);
    let n_train = ((num_nodes as f64 * train_frac).round() as usize).clamp(1, num_nodes - 2);
    let n_val = ((num_nodes as f64 * val_frac).round() as usize).clamp(1, num_nodes - 1 - n_train);
    let mut parts = [
        order[..n_train].to_vec(),
        order[n_train..n_train + n_val].to_vec(),
        order[n_train + n_val..].to_vec(),
    ];
    parts.iter_mut().for_each(|p| p.sort_unstable());
    let [train, val, test] = parts;
    Ok(Split { train, val, test })
}

fn collect_trials<T: Send>(
    trials: usize,
    run: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    (0..trials).into_par_iter().map(run).collect()
}

/// Paired matched/mismatched arms per trial. The training graph is drawn once
/// at `+Φ`; validation and test graphs are drawn at `±Φ` from the same seeds,
/// and every graph of a trial shares one feature direction.
pub fn run_generalization(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    if config.kind != ExperimentKind::Generalization {
        return Err(Error::Config(
            "run_generalization needs kind = \"generalization\"".into(),
        ));
    }
    let csbm = config.csbm.as_ref().expect("validated");
    let phi = csbm.phi;
    let per_trial = collect_trials(config.trials, |trial| {
        let mut rng = trial_rng(config.base_seed, trial);
        let direction = feature_direction(csbm.f, &mut rng);
        let (s_train, s_val, s_test, model_seed): (u64, u64, u64, u64) =
            (rng.gen(), rng.gen(), rng.gen(), rng.gen());
        let train_draw = generate_csbm_with_direction(&csbm.params(phi)?, &direction, s_train)?;
        let all: Vec<usize> = (0..csbm.n).collect();
        let train_view = DataView::new(
            &train_draw.graph,
            &train_draw.features,
            &train_draw.labels,
            &all,
        )?;
        let h_train = edge_homophily(&train_draw.graph, &train_draw.labels)?;
        let train_config = TrainConfig {
            seed: model_seed,
            ..config.train.clone()
        };

        let mut records = Vec::new();
        let mut homophily = Vec::new();
        for (setting, phi_test) in [("matched", phi), ("mismatched", -phi)] {
            let params = csbm.params(phi_test)?;
            let val = generate_csbm_with_direction(&params, &direction, s_val)?;
            let test = generate_csbm_with_direction(&params, &direction, s_test)?;
            let val_view = DataView::new(&val.graph, &val.features, &val.labels, &all)?;
            let h_test = edge_homophily(&test.graph, &test.labels)?;
            for &hop in &config.hops {
                let a = hop_homophily(&train_draw.graph, &train_draw.labels, hop)?;
                let b = hop_homophily(&test.graph, &test.labels, hop)?;
                homophily.push(HomophilyRecord {
                    trial,
                    setting: setting.to_string(),
                    ratio: None,
                    hop,
                    train: a,
                    test: b,
                    gap: (a - b).abs(),
                });
            }
            for &variant in &config.variants {
                let (model, report) = train(&train_config, variant, &train_view, &val_view)?;
                let accuracy = evaluate(
                    &model,
                    &test.graph,
                    test.features.view(),
                    &test.labels,
                    &all,
                )?;
                info!("trial {trial} {setting} {variant}: test accuracy {accuracy:.4}");
                records.push(TrialRecord {
                    variant,
                    trial,
                    setting: setting.to_string(),
                    phi_train: Some(phi),
                    phi_test: Some(phi_test),
                    ratio: None,
                    accuracy,
                    homophily_train: h_train,
                    homophily_test: h_test,
                    best_epoch: report.best_epoch,
                });
            }
        }
        Ok((records, homophily))
    })?;
    Ok(assemble(ExperimentKind::Generalization, per_trial))
}

fn assemble(
    kind: ExperimentKind,
    per_trial: Vec<(Vec<TrialRecord>, Vec<HomophilyRecord>)>,
) -> ResultTable {
    let mut records = Vec::new();
    let mut homophily = Vec::new();
    for (r, h) in per_trial {
        records.extend(r);
        homophily.extend(h);
    }
    ResultTable::new(kind, records, homophily)
}

/// Evasion sweeps: each variant trains once on the clean graph, then is scored
/// on the test nodes of every attacked graph. Attacked graphs are shared by all
/// variants of a trial and never touch train or validation nodes.
pub fn run_attack_curves(config: &ExperimentConfig) -> Result<ResultTable> {
    config.validate()?;
    if config.kind != ExperimentKind::Attack {
        return Err(Error::Config(
            "run_attack_curves needs kind = \"attack\"".into(),
        ));
    }
    let fixed: Option<Dataset> = match &config.dataset {
        Some(paths) => Some(load_dataset(paths)?),
        None => None,
    };
    let per_trial = collect_trials(config.trials, |trial| {
        let mut rng = trial_rng(config.base_seed, trial);
        let drawn;
        let (graph, features, labels) = match &fixed {
            Some(d) => (&d.graph, &d.features, &d.labels),
            None => {
                let csbm = config.csbm.as_ref().expect("validated");
                drawn = generate_csbm(&csbm.params(csbm.phi)?, rng.gen())?;
                (&drawn.graph, &drawn.features, &drawn.labels)
            }
        };
        let phi = config.csbm.as_ref().map(|c| c.phi);
        let split = random_split(
            graph.num_nodes(),
            config.split.train,
            config.split.val,
            &mut rng,
        )?;
        let model_seed: u64 = rng.gen();
        let train_view = DataView::new(graph, features, labels, &split.train)?;
        let val_view = DataView::new(graph, features, labels, &split.val)?;
        let train_config = TrainConfig {
            seed: model_seed,
            ..config.train.clone()
        };
        let h_clean = edge_homophily(graph, labels)?;

        let mut attacked: Vec<(String, f64, Graph)> = Vec::new();
        for sweep in &config.attacks {
            for &ratio in &sweep.ratios {
                let spec =
                    AttackSpec::new(sweep.kind, ratio, rng.gen()).with_protected(split.protected());
                let (g, ledger) = attack(graph, labels, &spec)?;
                info!(
                    "trial {trial} {:?} ratio {ratio}: {} edge flips",
                    sweep.kind,
                    ledger.len()
                );
                attacked.push((kind_name(sweep.kind), ratio, g));
            }
        }

        let mut homophily = Vec::new();
        for (setting, ratio, g) in &attacked {
            for &hop in &config.hops {
                let a = hop_homophily(graph, labels, hop)?;
                let b = hop_homophily(g, labels, hop)?;
                homophily.push(HomophilyRecord {
                    trial,
                    setting: setting.clone(),
                    ratio: Some(*ratio),
                    hop,
                    train: a,
                    test: b,
                    gap: (a - b).abs(),
                });
            }
        }

        let mut records = Vec::new();
        for &variant in &config.variants {
            let (model, report) = train(&train_config, variant, &train_view, &val_view)?;
            let score = |g: &Graph, labels: &LabelAssignment| {
                evaluate(&model, g, features.view(), labels, &split.test)
            };
            let clean = score(graph, labels)?;
            records.push(TrialRecord {
                variant,
                trial,
                setting: "clean".into(),
                phi_train: phi,
                phi_test: phi,
                ratio: None,
                accuracy: clean,
                homophily_train: h_clean,
                homophily_test: h_clean,
                best_epoch: report.best_epoch,
            });
            for (setting, ratio, g) in &attacked {
                let accuracy = score(g, labels)?;
                info!("trial {trial} {variant} {setting} {ratio}: {clean:.4} -> {accuracy:.4}");
                records.push(TrialRecord {
                    variant,
                    trial,
                    setting: setting.clone(),
                    phi_train: phi,
                    phi_test: phi,
                    ratio: Some(*ratio),
                    accuracy,
                    homophily_train: h_clean,
                    homophily_test: edge_homophily(g, labels)?,
                    best_epoch: report.best_epoch,
                });
            }
        }
        Ok((records, homophily))
    })?;
    Ok(assemble(ExperimentKind::Attack, per_trial))
}

fn kind_name(kind: crate::attacks::AttackKind) -> String {
    serde_json::to_value(kind)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_else(|| format!("{kind:?}"))
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultTable> {
    match config.kind {
        ExperimentKind::Generalization => run_generalization(config),
        ExperimentKind::Attack => run_attack_curves(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Variant;

    fn tiny(mut c: ExperimentConfig) -> ExperimentConfig {
        let csbm = c.csbm.as_mut().unwrap();
        csbm.n = 80;
        csbm.f = 20;
        c.trials = 2;
        c.variants = vec![Variant::EvenNet, Variant::MlpOnly];
        c.train.max_epochs = 15;
        c.train.patience = 15;
        c.train.hidden = 8;
        c.train.order = 4;
        c
    }

    #[test]
    fn split_is_a_partition() {
        let mut rng = trial_rng(1, 0);
        let s = random_split(50, 0.1, 0.1, &mut rng).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (5, 5, 40));
        let mut all: Vec<usize> = s
            .train
            .iter()
            .chain(&s.val)
            .chain(&s.test)
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..50).collect::<Vec<_>>());
        assert_eq!(s.protected().len(), 10);
        assert!(random_split(2, 0.1, 0.1, &mut rng).is_err());
    }

    #[test]
    fn generalization_is_paired_and_deterministic() {
        let config = tiny(ExperimentConfig::generalization(0.75));
        let a = run_generalization(&config).unwrap();
        let b = run_generalization(&config).unwrap();
        assert_eq!(a.trials_csv(), b.trials_csv());
        assert_eq!(a.records.len(), 2 * 2 * 2);
        assert_eq!(a.paired_gaps(Variant::EvenNet).len(), 2);
        let matched = a.summary_row(Variant::MlpOnly, "matched", None).unwrap();
        assert_eq!(matched.trials, 2);
        assert_eq!(matched.phi_test, Some(0.75));
        assert!(a.homophily.iter().all(|h| h.hop == 1 || h.hop == 2));
    }

    #[test]
    fn attack_ratio_zero_matches_clean() {
        let config = tiny(ExperimentConfig::attack(0.75, vec![0.0, 1.0]));
        let t = run_attack_curves(&config).unwrap();
        for v in [Variant::EvenNet, Variant::MlpOnly] {
            assert_eq!(
                t.accuracies(v, "clean", None),
                t.accuracies(v, "dice_evasion", Some(0.0))
            );
        }
        let h1: Vec<_> = t
            .homophily
            .iter()
            .filter(|h| h.hop == 1 && h.ratio == Some(1.0))
            .collect();
        assert!(h1.iter().all(|h| h.test < h.train));
        // graph-free model is unaffected by structure
        assert_eq!(
            t.accuracies(Variant::MlpOnly, "clean", None),
            t.accuracies(Variant::MlpOnly, "dice_evasion", Some(1.0))
        );
    }

    #[test]
    fn wrong_kind_is_rejected() {
        let config = tiny(ExperimentConfig::generalization(0.75));
        assert!(matches!(run_attack_curves(&config), Err(Error::Config(_))));
    }
}
