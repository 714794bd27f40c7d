//! `evennet` command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use serde_json::json;

use evennet::attacks::{attack, AttackKind, AttackSpec};
use evennet::harness::{
    random_split, run_experiment, run_property_suite, train_config_from, trial_rng,
    ExperimentConfig, Split,
};
use evennet::homophily::homophily_gap_report;
use evennet::io::{load_dataset, Dataset, DatasetPaths};
use evennet::model::{evaluate, train, DataView};
use evennet::spectral::{
    eigendecompose, feature_spectrum, label_spectrum, spectrum_csv, verify_homophily_identity,
    LaplacianKind,
};
use evennet::synth::{generate_csbm, CsbmParams};
use evennet::{ModelParams, Variant};

#[derive(Parser)]
#[command(
    name = "evennet",
    version,
    about = "Even-order polynomial graph filters: training, attacks and diagnostics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Laplacian {
    Normalized,
    Unnormalized,
}

#[derive(Clone, Copy, ValueEnum)]
enum Attack {
    Dice,
    Random,
}

#[derive(Clone, Copy, ValueEnum)]
enum Part {
    Train,
    Val,
    Test,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a two-class cSBM dataset.
    GenerateCsbm {
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long, default_value_t = 400)]
        f: usize,
        #[arg(long, default_value_t = 5.0)]
        d: f64,
        #[arg(long, default_value_t = 0.75, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write features as little-endian binary instead of CSV.
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one variant on a dataset with a seeded train/val/test split.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "evennet")]
        variant: Variant,
        /// TOML file with training hyperparameters.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Hyperparameter override, e.g. `--set lr=0.05`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.1)]
        train_frac: f64,
        #[arg(long, default_value_t = 0.1)]
        val_frac: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Perturb a dataset's edges, protecting a split's train and val nodes.
    Attack {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "dice")]
        kind: Attack,
        #[arg(long)]
        ratio: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `split.json` written by `train`; its train and val nodes are protected.
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score a trained model on a dataset.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        split: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        part: Part,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Eigenvalues with label and feature spectra as CSV.
    Spectrum {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_enum, default_value = "normalized")]
        laplacian: Laplacian,
        /// Feature column projected onto the eigenbasis.
        #[arg(long, default_value_t = 0)]
        feature: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multi-hop homophily of one dataset, or the gap between two.
    Homophily {
        #[arg(long)]
        data: PathBuf,
        /// Second dataset whose homophily is compared against `--data`.
        #[arg(long)]
        against: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1,2")]
        hops: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a generalization or attack experiment from a TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Overrides `output_dir` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the property suite; exits nonzero if any check fails.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn pretty(value: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn load(dir: &Path) -> Result<Dataset> {
    load_dataset(&DatasetPaths::in_dir(dir))
        .with_context(|| format!("loading dataset from {}", dir.display()))
}

fn read_split(path: &Path) -> Result<Split> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(serde_json::from_str(&text)?)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::GenerateCsbm {
            n,
            f,
            d,
            phi,
            seed,
            binary,
            out,
        } => {
            let params = CsbmParams::new(n, f, d, phi)?;
            let draw = generate_csbm(&params, seed)?;
            let dataset = Dataset {
                graph: draw.graph,
                features: draw.features,
                labels: draw.labels,
            };
            dataset.save(&out, binary)?;
            let manifest = json!({
                "generator": "csbm",
                "seed": seed,
                "params": params,
                "informative": params.is_informative(),
                "summary": dataset.summary(),
            });
            write(&out.join("manifest.json"), pretty(&manifest)?)?;
            println!("{}", serde_json::to_string(&manifest["summary"])?);
        }
        Command::Train {
            data,
            variant,
            config,
            overrides,
            seed,
            train_frac,
            val_frac,
            out,
        } => {
            let text = config
                .map(|p| fs::read_to_string(&p).with_context(|| format!("reading {}", p.display())))
                .transpose()?;
            let mut train_config = train_config_from(text.as_deref(), &overrides)?;
            if !overrides.iter().any(|o| o.trim_start().starts_with("seed")) {
                train_config.seed = seed;
            }
            let dataset = load(&data)?;
            let split = random_split(
                dataset.graph.num_nodes(),
                train_frac,
                val_frac,
                &mut trial_rng(seed, 0),
            )?;
            let train_view = DataView::new(
                &dataset.graph,
                &dataset.features,
                &dataset.labels,
                &split.train,
            )?;
            let val_view = DataView::new(
                &dataset.graph,
                &dataset.features,
                &dataset.labels,
                &split.val,
            )?;
            let (model, mut report) = train(&train_config, variant, &train_view, &val_view)?;
            let test = evaluate(
                &model,
                &dataset.graph,
                dataset.features.view(),
                &dataset.labels,
                &split.test,
            )?;
            report.test_accuracy = Some(test);
            info!(
                "{variant}: best epoch {}, test accuracy {test:.4}",
                report.best_epoch
            );
            write(&out.join("model.json"), model.to_json()? + "\n")?;
            write(&out.join("train_report.json"), report.to_json()? + "\n")?;
            write(&out.join("history.csv"), report.to_csv())?;
            write(
                &out.join("split.json"),
                serde_json::to_string(&split)? + "\n",
            )?;
            write(
                &out.join("train_config.json"),
                serde_json::to_string_pretty(&train_config)? + "\n",
            )?;
            println!(
                "{}",
                json!({"variant": variant, "best_epoch": report.best_epoch,
                       "best_val_accuracy": report.best_val_accuracy, "test_accuracy": test})
            );
        }
        Command::Attack {
            data,
            kind,
            ratio,
            seed,
            split,
            out,
        } => {
            let dataset = load(&data)?;
            let kind = match kind {
                Attack::Dice => AttackKind::DiceEvasion,
                Attack::Random => AttackKind::Random,
            };
            let protected = split
                .map(|p| read_split(&p))
                .transpose()?
                .map(|s| s.protected())
                .unwrap_or_default();
            let spec = AttackSpec::new(kind, ratio, seed).with_protected(protected);
            let (graph, ledger) = attack(&dataset.graph, &dataset.labels, &spec)?;
            let report = homophily_gap_report(
                &dataset.graph,
                &graph,
                &dataset.labels,
                &dataset.labels,
                &[1, 2],
            )?;
            let attacked = Dataset {
                graph,
                features: dataset.features,
                labels: dataset.labels,
            };
            let binary = DatasetPaths::in_dir(&data)
                .features
                .extension()
                .is_some_and(|e| e == "bin");
            attacked.save(&out, binary)?;
            write(&out.join("ledger.csv"), ledger.to_csv())?;
            write(&out.join("homophily.csv"), report.to_csv())?;
            let summary = json!({
                "attack": spec,
                "removals": ledger.removals,
                "additions": ledger.additions,
                "exhausted": ledger.exhausted,
                "clean_edges": dataset.graph.num_edges(),
                "attacked_edges": attacked.graph.num_edges(),
                "homophily": report.rows,
            });
            write(&out.join("attack.json"), pretty(&summary)?)?;
            println!("{}", serde_json::to_string(&summary["homophily"])?);
        }
        Command::Evaluate {
            data,
            model,
            split,
            part,
            out,
        } => {
            let dataset = load(&data)?;
            let text = fs::read_to_string(&model)
                .with_context(|| format!("reading {}", model.display()))?;
            let params = ModelParams::from_json(&text)?;
            let mask = match (part, split) {
                (Part::All, _) => (0..dataset.graph.num_nodes()).collect(),
                (_, None) => bail!("--part train/val/test needs --split"),
                (part, Some(path)) => {
                    let s = read_split(&path)?;
                    match part {
                        Part::Train => s.train,
                        Part::Val => s.val,
                        _ => s.test,
                    }
                }
            };
            let accuracy = evaluate(
                &params,
                &dataset.graph,
                dataset.features.view(),
                &dataset.labels,
                &mask,
            )?;
            let result =
                json!({"variant": params.variant, "nodes": mask.len(), "accuracy": accuracy});
            if let Some(out) = out {
                write(&out, pretty(&result)?)?;
            }
            println!("{result}");
        }
        Command::Spectrum {
            data,
            laplacian,
            feature,
            out,
        } => {
            let dataset = load(&data)?;
            let (matrix, kind) = match laplacian {
                Laplacian::Normalized => (
                    dataset
                        .graph
                        .normalized_laplacian_dense(evennet::graph::DEFAULT_DENSE_CAP)?,
                    LaplacianKind::Normalized,
                ),
                Laplacian::Unnormalized => (
                    dataset
                        .graph
                        .unnormalized_laplacian_dense(evennet::graph::DEFAULT_DENSE_CAP)?,
                    LaplacianKind::Unnormalized,
                ),
            };
            if feature >= dataset.features.cols() {
                bail!(
                    "feature column {feature} out of range ({} columns)",
                    dataset.features.cols()
                );
            }
            let decomposition = eigendecompose(&matrix)?;
            let alpha = match dataset.labels.delta_y() {
                Ok(dy) => Some(label_spectrum(&decomposition, &dy)?),
                Err(_) => None,
            };
            let column = dataset.features.as_array().column(feature).to_vec();
            let beta = feature_spectrum(&decomposition, &column)?;
            write(
                &out,
                spectrum_csv(&decomposition.eigenvalues, alpha.as_ref(), Some(&beta)),
            )?;
            let residual = if alpha.is_some()
                && (kind == LaplacianKind::Unnormalized || dataset.graph.is_regular().is_some())
            {
                Some(verify_homophily_identity(
                    &dataset.graph,
                    &dataset.labels,
                    kind,
                )?)
            } else {
                None
            };
            println!(
                "{}",
                json!({"eigenvalues": decomposition.eigenvalues.len(),
                       "min": decomposition.eigenvalues.first(), "max": decomposition.eigenvalues.last(),
                       "homophily_identity_residual": residual})
            );
        }
        Command::Homophily {
            data,
            against,
            hops,
            out,
        } => {
            let first = load(&data)?;
            let second = against.as_deref().map(load).transpose()?;
            let other = second.as_ref().unwrap_or(&first);
            let report = homophily_gap_report(
                &first.graph,
                &other.graph,
                &first.labels,
                &other.labels,
                &hops,
            )?;
            write(&out, report.to_csv())?;
            println!("{}", serde_json::to_string(&report.rows)?);
        }
        Command::Experiment {
            config,
            overrides,
            out,
        } => {
            let mut config = ExperimentConfig::from_file(&config, &overrides)
                .with_context(|| format!("loading {}", config.display()))?;
            if let Some(out) = out {
                config.output_dir = out;
            }
            let table = run_experiment(&config)?;
            table.write(&config.output_dir)?;
            write(&config.output_dir.join("config.toml"), config.to_toml()?)?;
            print!("{}", table.results_csv());
        }
        Command::Verify { seed, out } => {
            let report = run_property_suite(seed)?;
            if let Some(out) = out {
                write(&out.join("properties.json"), report.to_json()? + "\n")?;
                write(&out.join("properties.csv"), report.to_csv())?;
            }
            for check in &report.checks {
                println!(
                    "{} {}::{} residual {:.3e} tolerance {:.1e}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.module,
                    check.name,
                    check.residual,
                    check.tolerance
                );
            }
            if !report.all_passed() {
                for check in report.failures() {
                    eprintln!(
                        "failed: {}::{} ({})",
                        check.module, check.name, check.detail
                    );
                }
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
