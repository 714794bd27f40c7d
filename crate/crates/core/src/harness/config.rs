//! Experiment configuration: a TOML document plus dotted `key=value` overrides.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::attacks::AttackKind;
use crate::error::{Error, Result};
use crate::io::DatasetPaths;
use crate::model::{TrainConfig, Variant};
use crate::synth::{CsbmParams, DEFAULT_EPSILON, DEFAULT_M_CONST};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Generalization,
    Attack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CsbmConfig {
    pub n: usize,
    pub f: usize,
    pub d: f64,
    pub phi: f64,
    pub m_const: f64,
    pub epsilon: f64,
}

impl Default for CsbmConfig {
    fn default() -> Self {
        CsbmConfig {
            n: 600,
            f: 400,
            d: 5.0,
            phi: 0.75,
            m_const: DEFAULT_M_CONST,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

impl CsbmConfig {
    pub fn params(&self, phi: f64) -> Result<CsbmParams> {
        CsbmParams::with_constants(self.n, self.f, self.d, phi, self.m_const, self.epsilon)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSweep {
    pub kind: AttackKind,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub train: f64,
    pub val: f64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            train: 0.1,
            val: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub csbm: Option<CsbmConfig>,
    #[serde(default)]
    pub dataset: Option<DatasetPaths>,
    #[serde(default = "default_variants")]
    pub variants: Vec<Variant>,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub attacks: Vec<AttackSweep>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub split: SplitConfig,
    #[serde(default = "default_hops")]
    pub hops: Vec<usize>,
}

fn default_variants() -> Vec<Variant> {
    vec![Variant::EvenNet, Variant::FullOrder, Variant::MlpOnly]
}

fn default_trials() -> usize {
    10
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("results")
}

fn default_hops() -> Vec<usize> {
    vec![1, 2]
}

impl ExperimentConfig {
    /// A generalization run on the desk-scale cSBM.
    pub fn generalization(phi: f64) -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Generalization,
            csbm: Some(CsbmConfig {
                phi,
                ..CsbmConfig::default()
            }),
            dataset: None,
            variants: default_variants(),
            train: TrainConfig::default(),
            attacks: Vec::new(),
            trials: default_trials(),
            base_seed: 0,
            output_dir: default_output_dir(),
            split: SplitConfig::default(),
            hops: default_hops(),
        }
    }

    /// A DICE sweep on the desk-scale cSBM.
    pub fn attack(phi: f64, ratios: Vec<f64>) -> Self {
        ExperimentConfig {
            kind: ExperimentKind::Attack,
            attacks: vec![AttackSweep {
                kind: AttackKind::DiceEvasion,
                ratios,
            }],
            ..Self::generalization(phi)
        }
    }

    pub fn from_toml_str(text: &str, overrides: &[String]) -> Result<Self> {
        let mut value: toml::Value = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        for entry in overrides {
            apply_override(&mut value, entry)?;
        }
        let config: ExperimentConfig = value
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, overrides)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.trials == 0 {
            return fail("trials must be at least 1".into());
        }
        if self.variants.is_empty() {
            return fail("variants must not be empty".into());
        }
        self.train.validate()?;
        if self.hops.iter().any(|&h| h == 0) {
            return fail("hops start at 1".into());
        }
        let s = &self.split;
        if !(s.train > 0.0 && s.val > 0.0 && s.train + s.val < 1.0) {
            return fail(format!(
                "split fractions {} / {} leave no test nodes",
                s.train, s.val
            ));
        }
        match self.kind {
            ExperimentKind::Generalization => {
                let Some(csbm) = &self.csbm else {
                    return fail("generalization experiments need a [csbm] table".into());
                };
                if self.dataset.is_some() {
                    return fail(
                        "generalization experiments draw cSBM graphs; remove [dataset]".into(),
                    );
                }
                csbm.params(csbm.phi)?;
                csbm.params(-csbm.phi)?;
            }
            ExperimentKind::Attack => {
                match (&self.csbm, &self.dataset) {
                    (Some(csbm), None) => {
                        csbm.params(csbm.phi)?;
                    }
                    (None, Some(_)) => {}
                    _ => {
                        return fail(
                            "attack experiments need exactly one of [csbm] or [dataset]".into(),
                        )
                    }
                }
                if self.attacks.is_empty() {
                    return fail("attack experiments need at least one [[attacks]] entry".into());
                }
                for sweep in &self.attacks {
                    if sweep.ratios.is_empty() {
                        return fail("attack sweep has no ratios".into());
                    }
                    if let Some(r) = sweep.ratios.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
                        return fail(format!("attack ratio {r} must be finite and non-negative"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Reads a `TrainConfig` from optional TOML text, then applies overrides.
pub fn train_config_from(text: Option<&str>, overrides: &[String]) -> Result<TrainConfig> {
    let mut value = match text {
        Some(t) => t
            .parse::<toml::Value>()
            .map_err(|e| Error::Config(e.to_string()))?,
        None => toml::Value::Table(toml::Table::new()),
    };
    for entry in overrides {
        apply_override(&mut value, entry)?;
    }
    let config: TrainConfig = value
        .try_into()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Sets `a.b.c = value`, creating intermediate tables. The value is read as a
/// TOML literal when it parses as one and as a bare string otherwise.
pub fn apply_override(root: &mut toml::Value, entry: &str) -> Result<()> {
    let (key, raw) = entry
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override {entry:?} is not key=value")))?;
    let key = key.trim();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Config(format!("override key {key:?} is malformed")));
    }
    let mut node = root;
    for part in &parts[..parts.len() - 1] {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-table")))?;
        node = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    node.as_table_mut()
        .ok_or_else(|| Error::Config(format!("override {key:?} descends into a non-table")))?
        .insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
kind = "attack"
trials = 3
variants = ["evennet", "fullorder"]

[csbm]
phi = 0.75
n = 200

[train]
max_epochs = 50
patience = 20

[[attacks]]
kind = "dice_evasion"
ratios = [0.0, 1.0]
"#;

    #[test]
    fn parses_with_defaults() {
        let c = ExperimentConfig::from_toml_str(SAMPLE, &[]).unwrap();
        assert_eq!(c.kind, ExperimentKind::Attack);
        assert_eq!(c.trials, 3);
        assert_eq!(c.csbm.as_ref().unwrap().f, 400);
        assert_eq!(c.train.max_epochs, 50);
        assert_eq!(c.train.lr, TrainConfig::default().lr);
        assert_eq!(c.hops, vec![1, 2]);
    }

    #[test]
    fn overrides_nested_keys() {
        let overrides = vec![
            "train.lr=0.05".to_string(),
            "csbm.phi = -0.5".to_string(),
            "output_dir=out/run".to_string(),
            "base_seed=9".to_string(),
        ];
        let c = ExperimentConfig::from_toml_str(SAMPLE, &overrides).unwrap();
        assert_eq!(c.train.lr, 0.05);
        assert_eq!(c.csbm.unwrap().phi, -0.5);
        assert_eq!(c.output_dir, PathBuf::from("out/run"));
        assert_eq!(c.base_seed, 9);
    }

    #[test]
    fn rejects_bad_configs() {
        for o in [
            "trials=0",
            "variants=[]",
            "attacks=[]",
            "train.dropout=1.5",
            "unknown_key=1",
            "nonsense",
        ] {
            let err = ExperimentConfig::from_toml_str(SAMPLE, &[o.to_string()]);
            assert!(matches!(err, Err(Error::Config(_))), "{o}: {err:?}");
        }
        let err = ExperimentConfig::from_toml_str("kind = \"generalization\"", &[]);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn train_overrides() {
        let c = train_config_from(Some("hidden = 16"), &["lr=0.02".into()]).unwrap();
        assert_eq!((c.hidden, c.lr), (16, 0.02));
        assert_eq!(c.order, TrainConfig::default().order);
        assert!(train_config_from(None, &["dropout=2".into()]).is_err());
    }

    #[test]
    fn toml_round_trip() {
        let c = ExperimentConfig::attack(0.75, vec![0.0, 0.4]);
        let back = ExperimentConfig::from_toml_str(&c.to_toml().unwrap(), &[]).unwrap();
        assert_eq!(c, back);
    }
}
