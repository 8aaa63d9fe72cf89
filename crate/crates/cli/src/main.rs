mod config;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgAction, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;
use severance_core::exclusion::class_geometry;
use severance_core::harness::{run_dimension_study, run_experiment, ExperimentPlan};
use severance_core::reduction::{read_embedding, reduce_with_diagnostics, write_embedding, LayoutMode};
use severance_core::severability::{export_class_distributions, export_hull_meshes, severability_report};
use severance_core::{json, select_exclusions, Dataset, Embedding, Error, TOOL_VERSION};

use config::{Invalid, Loaded};

#[derive(Parser)]
#[command(name = "severance", version, about = "Centroid-distance training-set curation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Run the layout optimisation single-threaded so results are
    /// bit-reproducible.
    #[arg(long, global = true, default_value_t = true, action = ArgAction::Set)]
    deterministic: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Embed the training split and write `embedding.txt`.
    Reduce(Args),
    /// Write one exclusion manifest per strategy and percent.
    Exclude(Args),
    /// σ-trim each class, build hulls, and report their overlap.
    Severability(Args),
    /// Train the surrogate under every manifest and compare strategies.
    Experiment(Args),
    /// Pool Central-exclusion trials per embedding dimensionality and
    /// compare each with three dimensions.
    CompareDims(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

/// 2 for bad configuration or inputs, 1 for failures while running.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.downcast_ref::<Invalid>().is_some() {
            return 2;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::Format { .. }
                | Error::Consistency(_)
                | Error::Length { .. }
                | Error::Range(_)
                | Error::Parse { .. }
                | Error::Shape { .. }
                | Error::Parameter(_)
                | Error::EmptiesClass { .. }
                | Error::Provenance { .. } => 2,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: &Cli) -> Result<()> {
    let (Command::Reduce(args)
    | Command::Exclude(args)
    | Command::Severability(args)
    | Command::Experiment(args)
    | Command::CompareDims(args)) = &cli.command;
    let cfg = config::load(&args.config)?;
    fs::create_dir_all(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mode = if cli.deterministic {
        LayoutMode::Deterministic
    } else {
        LayoutMode::Parallel
    };
    match &cli.command {
        Command::Reduce(_) => cmd_reduce(&cfg, &args.out, mode),
        Command::Exclude(_) => cmd_exclude(&cfg, &args.out),
        Command::Severability(_) => cmd_severability(&cfg, &args.out),
        Command::Experiment(_) => cmd_experiment(&cfg, &args.out, mode),
        Command::CompareDims(_) => cmd_compare_dims(&cfg, &args.out),
    }
}

fn provenance(cfg: &Loaded, dataset: &Dataset) -> BTreeMap<String, String> {
    BTreeMap::from([
        ("config_hash".to_string(), cfg.hash_hex()),
        ("dataset_hash".to_string(), format!("{:016x}", dataset.content_hash())),
        ("tool_version".to_string(), TOOL_VERSION.to_string()),
    ])
}

#[derive(Serialize)]
struct Stamped<'a, T> {
    provenance: &'a BTreeMap<String, String>,
    result: &'a T,
}

fn write_stamped<T: Serialize>(path: &Path, provenance: &BTreeMap<String, String>, result: &T) -> Result<()> {
    let text = json::to_canonical_string(&Stamped { provenance, result })?;
    fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn write_text(path: &Path, provenance: &BTreeMap<String, String>, body: &str) -> Result<()> {
    let mut text: String = provenance.iter().map(|(k, v)| format!("# {k}={v}\n")).collect();
    text.push_str(body);
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

fn load_train(cfg: &Loaded) -> Result<Dataset> {
    let train = cfg.train().context("loading training split")?;
    info!(
        "training split: {} samples, {} dims, {} classes ({:016x})",
        train.len(),
        train.dim(),
        train.num_classes(),
        train.content_hash()
    );
    Ok(train)
}

/// Reads an embedding and checks that it was built from `train`.
fn load_embedding(path: &Path, train: &Dataset) -> Result<Embedding> {
    if !path.is_file() {
        return Err(Invalid(format!("{}: no such embedding file (run `reduce` first)", path.display())).into());
    }
    let embedding = read_embedding(path)?;
    if embedding.dataset_hash != train.content_hash() {
        return Err(anyhow::Error::new(Error::Provenance {
            expected: embedding.dataset_hash,
            found: train.content_hash(),
        })
        .context(format!("{} was built for different data", path.display())));
    }
    if embedding.len() != train.len() {
        return Err(Invalid(format!(
            "{}: {} points but the training split has {} samples",
            path.display(),
            embedding.len(),
            train.len()
        ))
        .into());
    }
    Ok(embedding)
}

fn cmd_reduce(cfg: &Loaded, out: &Path, mode: LayoutMode) -> Result<()> {
    let train = load_train(cfg)?;
    let (embedding, diagnostics) = reduce_with_diagnostics(&train, &cfg.config.reduction, mode)?;
    info!(
        "curve a={:.5} b={:.5}, {} edges, init {:?}",
        diagnostics.a, diagnostics.b, diagnostics.edges, diagnostics.init_used
    );
    for w in &diagnostics.warnings {
        warn!("{w}");
    }
    let path = out.join("embedding.txt");
    write_embedding(
        &embedding,
        &path,
        &[("config", cfg.hash_hex()), ("tool", TOOL_VERSION.to_string())],
    )?;
    info!("wrote {}", path.display());
    Ok(())
}

fn cmd_exclude(cfg: &Loaded, out: &Path) -> Result<()> {
    let train = load_train(cfg)?;
    let section = &cfg.config.exclusion;
    let emb_path = section.embedding.clone().unwrap_or_else(|| out.join("embedding.txt"));
    let embedding = load_embedding(&emb_path, &train)?;
    let geometry = class_geometry(&embedding, train.labels(), train.num_classes())?;
    let stamp = provenance(cfg, &train);
    for &strategy in &section.strategies {
        for &percent in &section.percents {
            let mut manifest = select_exclusions(&geometry, strategy, percent, section.seed)?;
            manifest.provenance = stamp.clone();
            let path = out.join(manifest.file_name());
            fs::write(&path, manifest.to_json()? + "\n").with_context(|| format!("writing {}", path.display()))?;
            info!("wrote {} ({} excluded)", path.display(), manifest.excluded.len());
        }
    }
    Ok(())
}

fn cmd_severability(cfg: &Loaded, out: &Path) -> Result<()> {
    let train = load_train(cfg)?;
    let section = &cfg.config.severability;
    let emb_path = section.embedding.clone().unwrap_or_else(|| out.join("embedding.txt"));
    let embedding = load_embedding(&emb_path, &train)?;
    let stamp = provenance(cfg, &train);
    let root = out.join("severability");
    export_class_distributions(
        &embedding,
        train.labels(),
        train.num_classes(),
        root.join("distributions"),
        &stamp,
    )?;
    for &k in &section.trim_k {
        let report = severability_report(&embedding, train.labels(), train.num_classes(), k, section.mode)?;
        info!(
            "trim_k={k}: excluded {:.3}%, {} component(s), score {}",
            100.0 * report.excluded_fraction,
            report.components.len(),
            report.score
        );
        let dir = root.join(format!("trim-{k}"));
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        write_stamped(&dir.join("report.json"), &stamp, &report)?;
        export_hull_meshes(&report, &dir, &stamp)?;
    }
    Ok(())
}

fn plan(cfg: &Loaded) -> ExperimentPlan {
    let c = &cfg.config;
    ExperimentPlan {
        dataset: cfg.name.clone(),
        reduction: c.reduction.clone(),
        strategies: c.exclusion.strategies.clone(),
        percents: c.exclusion.percents.clone(),
        trials: c.experiment.trials,
        base_seed: c.experiment.base_seed,
        surrogate: c.surrogate.clone(),
        alpha: c.experiment.alpha,
    }
}

fn load_test(cfg: &Loaded) -> Result<Dataset> {
    let test = cfg.test()?.context("loading test split")?;
    info!("test split: {} samples ({:016x})", test.len(), test.content_hash());
    Ok(test)
}

fn cmd_experiment(cfg: &Loaded, out: &Path, mode: LayoutMode) -> Result<()> {
    let train = load_train(cfg)?;
    let test = load_test(cfg)?;
    let plan = plan(cfg);
    plan.validate().map_err(|e| Invalid(e.to_string()))?;
    let embedding = match &cfg.config.experiment.embedding {
        Some(path) => load_embedding(path, &train)?,
        None => reduce_with_diagnostics(&train, &plan.reduction, mode)?.0,
    };
    let table = run_experiment(&plan, &train, &test, Some(&embedding))?;
    let mut stamp = provenance(cfg, &train);
    stamp.insert("test_hash".into(), format!("{:016x}", test.content_hash()));
    write_text(&out.join("experiment.txt"), &stamp, &table.to_text())?;
    write_stamped(&out.join("experiment.json"), &stamp, &table)
}

fn cmd_compare_dims(cfg: &Loaded, out: &Path) -> Result<()> {
    let train = load_train(cfg)?;
    let test = load_test(cfg)?;
    let plan = plan(cfg);
    plan.validate().map_err(|e| Invalid(e.to_string()))?;
    let table = run_dimension_study(&plan, &cfg.config.experiment.dims, &train, &test)?;
    let mut stamp = provenance(cfg, &train);
    stamp.insert("test_hash".into(), format!("{:016x}", test.content_hash()));
    write_text(&out.join("compare-dims.txt"), &stamp, &table.to_text())?;
    write_stamped(&out.join("compare-dims.json"), &stamp, &table)
}
