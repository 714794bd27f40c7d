//! Per-trial records and their aggregated summary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentKind;
use crate::error::Result;
use crate::model::Variant;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub variant: Variant,
    pub trial: usize,
    /// `matched` / `mismatched`, or `clean` / an attack kind.
    pub setting: String,
    pub phi_train: Option<f64>,
    pub phi_test: Option<f64>,
    pub ratio: Option<f64>,
    pub accuracy: f64,
    pub homophily_train: f64,
    pub homophily_test: f64,
    pub best_epoch: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomophilyRecord {
    pub trial: usize,
    pub setting: String,
    pub ratio: Option<f64>,
    pub hop: usize,
    pub train: f64,
    pub test: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub variant: Variant,
    pub setting: String,
    pub phi_train: Option<f64>,
    pub phi_test: Option<f64>,
    pub ratio: Option<f64>,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub trials: usize,
    /// Generalization: mean paired `|matched - mismatched|`.
    /// Attacks: mean paired `clean - attacked`.
    pub gap_mean: Option<f64>,
    pub gap_std: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultTable {
    pub kind: ExperimentKind,
    pub records: Vec<TrialRecord>,
    pub homophily: Vec<HomophilyRecord>,
    pub summary: Vec<SummaryRow>,
}

/// Mean and sample standard deviation (zero for a single value).
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.to_bits() == y.to_bits(),
        (None, None) => true,
        _ => false,
    }
}

impl ResultTable {
    /// Builds summary rows in first-appearance order of (variant, setting, ratio).
    pub fn new(
        kind: ExperimentKind,
        records: Vec<TrialRecord>,
        homophily: Vec<HomophilyRecord>,
    ) -> Self {
        let mut table = ResultTable {
            kind,
            records,
            homophily,
            summary: Vec::new(),
        };
        let mut keys: Vec<(Variant, String, Option<f64>)> = Vec::new();
        for r in &table.records {
            if !keys
                .iter()
                .any(|(v, s, x)| *v == r.variant && *s == r.setting && same(*x, r.ratio))
            {
                keys.push((r.variant, r.setting.clone(), r.ratio));
            }
        }
        table.summary = keys
            .into_iter()
            .map(|(variant, setting, ratio)| table.summarize(variant, &setting, ratio))
            .collect();
        table
    }

    fn group(&self, variant: Variant, setting: &str, ratio: Option<f64>) -> Vec<&TrialRecord> {
        let mut rows: Vec<&TrialRecord> = self
            .records
            .iter()
            .filter(|r| r.variant == variant && r.setting == setting && same(r.ratio, ratio))
            .collect();
        rows.sort_by_key(|r| r.trial);
        rows
    }

    /// Accuracies ordered by trial.
    pub fn accuracies(&self, variant: Variant, setting: &str, ratio: Option<f64>) -> Vec<f64> {
        self.group(variant, setting, ratio)
            .iter()
            .map(|r| r.accuracy)
            .collect()
    }

    /// Per-trial `|matched - mismatched|` for a generalization table.
    pub fn paired_gaps(&self, variant: Variant) -> Vec<f64> {
        let matched = self.group(variant, "matched", None);
        let mismatched = self.group(variant, "mismatched", None);
        matched
            .iter()
            .filter_map(|m| {
                mismatched
                    .iter()
                    .find(|x| x.trial == m.trial)
                    .map(|x| (m.accuracy - x.accuracy).abs())
            })
            .collect()
    }

    /// Per-trial `clean - attacked` for an attack table.
    pub fn paired_drops(&self, variant: Variant, setting: &str, ratio: f64) -> Vec<f64> {
        let clean = self.group(variant, "clean", None);
        let attacked = self.group(variant, setting, Some(ratio));
        clean
            .iter()
            .filter_map(|c| {
                attacked
                    .iter()
                    .find(|a| a.trial == c.trial)
                    .map(|a| c.accuracy - a.accuracy)
            })
            .collect()
    }

    fn summarize(&self, variant: Variant, setting: &str, ratio: Option<f64>) -> SummaryRow {
        let rows = self.group(variant, setting, ratio);
        let accs: Vec<f64> = rows.iter().map(|r| r.accuracy).collect();
        let (mean_accuracy, std_accuracy) = mean_std(&accs);
        let gaps = match (self.kind, setting) {
            (ExperimentKind::Generalization, _) => Some(self.paired_gaps(variant)),
            (ExperimentKind::Attack, "clean") => None,
            (ExperimentKind::Attack, _) => ratio.map(|x| self.paired_drops(variant, setting, x)),
        };
        let (gap_mean, gap_std) = match gaps {
            Some(g) if !g.is_empty() => {
                let (m, s) = mean_std(&g);
                (Some(m), Some(s))
            }
            _ => (None, None),
        };
        SummaryRow {
            variant,
            setting: setting.to_string(),
            phi_train: rows.first().and_then(|r| r.phi_train),
            phi_test: rows.first().and_then(|r| r.phi_test),
            ratio,
            mean_accuracy,
            std_accuracy,
            trials: rows.len(),
            gap_mean,
            gap_std,
        }
    }

    pub fn summary_row(
        &self,
        variant: Variant,
        setting: &str,
        ratio: Option<f64>,
    ) -> Option<&SummaryRow> {
        self.summary
            .iter()
            .find(|r| r.variant == variant && r.setting == setting && same(r.ratio, ratio))
    }

    pub fn results_csv(&self) -> String {
        let mut out =
            String::from("variant,setting,phi_train,phi_test,ratio,mean_accuracy,std_accuracy,trials,gap_mean,gap_std\n");
        for r in &self.summary {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.variant,
                r.setting,
                opt(r.phi_train),
                opt(r.phi_test),
                opt(r.ratio),
                r.mean_accuracy,
                r.std_accuracy,
                r.trials,
                opt(r.gap_mean),
                opt(r.gap_std)
            );
        }
        out
    }

    pub fn trials_csv(&self) -> String {
        let mut out = String::from(
            "variant,trial,setting,phi_train,phi_test,ratio,accuracy,homophily_train,homophily_test,best_epoch\n",
        );
        for r in &self.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.variant,
                r.trial,
                r.setting,
                opt(r.phi_train),
                opt(r.phi_test),
                opt(r.ratio),
                r.accuracy,
                r.homophily_train,
                r.homophily_test,
                r.best_epoch
            );
        }
        out
    }

    pub fn homophily_csv(&self) -> String {
        let mut out = String::from("trial,setting,ratio,hop,train,test,gap\n");
        for r in &self.homophily {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                r.trial,
                r.setting,
                opt(r.ratio),
                r.hop,
                r.train,
                r.test,
                r.gap
            );
        }
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `results.csv`, `trials.csv`, `homophily.csv` and `report.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        fs::write(dir.join("results.csv"), self.results_csv())?;
        fs::write(dir.join("trials.csv"), self.trials_csv())?;
        fs::write(dir.join("homophily.csv"), self.homophily_csv())?;
        fs::write(dir.join("report.json"), self.to_json()?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        variant: Variant,
        trial: usize,
        setting: &str,
        ratio: Option<f64>,
        accuracy: f64,
    ) -> TrialRecord {
        TrialRecord {
            variant,
            trial,
            setting: setting.into(),
            phi_train: None,
            phi_test: None,
            ratio,
            accuracy,
            homophily_train: 0.9,
            homophily_test: 0.5,
            best_epoch: 3,
        }
    }

    #[test]
    fn paired_generalization_gaps() {
        let records = vec![
            record(Variant::EvenNet, 0, "matched", None, 0.9),
            record(Variant::EvenNet, 0, "mismatched", None, 0.8),
            record(Variant::EvenNet, 1, "matched", None, 0.7),
            record(Variant::EvenNet, 1, "mismatched", None, 0.75),
        ];
        let t = ResultTable::new(ExperimentKind::Generalization, records, vec![]);
        assert_eq!(t.summary.len(), 2);
        let gaps = t.paired_gaps(Variant::EvenNet);
        assert!((gaps[0] - 0.1).abs() < 1e-12 && (gaps[1] - 0.05).abs() < 1e-12);
        let row = t.summary_row(Variant::EvenNet, "matched", None).unwrap();
        assert!((row.mean_accuracy - 0.8).abs() < 1e-12);
        assert!((row.std_accuracy - (0.02f64).sqrt()).abs() < 1e-12);
        assert!((row.gap_mean.unwrap() - 0.075).abs() < 1e-12);
        assert!(row.std_accuracy >= 0.0);
    }

    #[test]
    fn attack_drops_and_csv_shape() {
        let records = vec![
            record(Variant::FullOrder, 0, "clean", None, 0.9),
            record(Variant::FullOrder, 0, "dice_evasion", Some(1.0), 0.6),
        ];
        let t = ResultTable::new(ExperimentKind::Attack, records, vec![]);
        let row = t
            .summary_row(Variant::FullOrder, "dice_evasion", Some(1.0))
            .unwrap();
        assert!((row.gap_mean.unwrap() - 0.3).abs() < 1e-12);
        assert_eq!(
            t.summary_row(Variant::FullOrder, "clean", None)
                .unwrap()
                .gap_mean,
            None
        );
        let csv = t.results_csv();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv
            .lines()
            .nth(2)
            .unwrap()
            .starts_with("fullorder,dice_evasion,,,1,"));
    }

    #[test]
    fn mean_std_edge_cases() {
        assert_eq!(mean_std(&[2.0]), (2.0, 0.0));
        let (m, s) = mean_std(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 2f64.sqrt()).abs() < 1e-15);
    }
}
