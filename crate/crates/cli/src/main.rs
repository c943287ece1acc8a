//! `discoforge`: corpus validation, featurization, model-input building,
//! augmentation planning, layer selection and scoring.

mod config;
mod error;
mod manifest;
mod stages;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use discoforge::eval::{ablation_report, load_report_dir};
use discoforge::pruning::{block_influence, default_protected, load_manifest, rank_scores, select_prune_layers};

use config::{RunConfig, Style};
use error::{invalid, runtime, CliResult};
use stages::{resolve_workers, AugmentStep, Runner, WORKERS_ENV};

#[derive(Parser)]
#[command(name = "discoforge", version, about = "Discourse relation corpus tooling")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

/// Where corpora come from: a run configuration, or a single `.rels` file.
#[derive(Args, Debug)]
struct Source {
    /// Run configuration (TOML).
    #[arg(long, conflicts_with_all = ["rels", "conllu", "corpus"])]
    config: Option<PathBuf>,
    /// A single `.rels` file.
    #[arg(long)]
    rels: Option<PathBuf>,
    /// CoNLL-U companion of `--rels`.
    #[arg(long, requires = "rels")]
    conllu: Option<PathBuf>,
    /// Corpus id when the file name does not carry one.
    #[arg(long, requires = "rels")]
    corpus: Option<String>,
    /// Label inventory file.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Output root; overrides the configured one.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check configuration and inputs.
    Validate(Source),
    /// Write per-instance feature tables.
    Featurize(Source),
    /// Render prompts or encoder inputs.
    Build {
        #[command(flatten)]
        source: Source,
        /// Styles to render; all configured styles when omitted.
        #[arg(long, value_enum, value_delimiter = ',')]
        style: Vec<Style>,
        /// jsonl or tsv.
        #[arg(long)]
        format: Option<String>,
    },
    /// Plan, export or merge translate-train augmentation.
    Augment {
        #[command(subcommand)]
        step: AugmentCommand,
    },
    /// Rank layers by block influence and pick pruning candidates.
    PruneSelect {
        /// Dump manifest: `layer rows cols in_file out_file` per line.
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: usize,
        /// Protected layer indices; first and last layer when omitted.
        #[arg(long, value_delimiter = ',')]
        protect: Option<Vec<usize>>,
        /// Write scores and selection as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score predictions against gold relations.
    Score {
        #[arg(long, conflicts_with_all = ["gold", "pred"])]
        config: Option<PathBuf>,
        #[arg(long, requires = "pred")]
        gold: Option<PathBuf>,
        #[arg(long, requires = "gold")]
        pred: Option<PathBuf>,
        #[arg(long, requires = "gold")]
        corpus: Option<String>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Seed for replacing invalid predicted labels.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Ablation gain table from two directories of score reports.
    Report {
        #[arg(long)]
        baseline: PathBuf,
        #[arg(long)]
        ablated: PathBuf,
        /// Write the table here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every stage from a configuration.
    All {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct AugmentArgs {
    #[arg(long)]
    config: PathBuf,
    /// Mapping table overriding the configured one.
    #[arg(long)]
    mapping: Option<PathBuf>,
    /// Sampling seed overriding the configured one.
    #[arg(long)]
    seed: Option<u64>,
    /// Restrict to these targets.
    #[arg(long, value_delimiter = ',')]
    target: Vec<String>,
    /// Directory of completed translation batches.
    #[arg(long)]
    translations: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AugmentCommand {
    /// Write the selection plan.
    Plan(AugmentArgs),
    /// Write the plan and the translation batch.
    Emit(AugmentArgs),
    /// Merge a completed batch into an augmented `.rels` file.
    Merge(AugmentArgs),
}

fn load_source(s: &Source) -> CliResult<RunConfig> {
    let mut cfg = match (&s.config, &s.rels) {
        (Some(c), _) => RunConfig::load(c)?,
        (None, Some(r)) => RunConfig::single(
            r,
            s.conllu.as_deref(),
            s.corpus.as_deref(),
            None,
            s.out.as_deref().unwrap_or(Path::new("discoforge-out")),
        )?,
        (None, None) => return Err(invalid("pass --config or --rels")),
    };
    if let Some(p) = &s.labels {
        cfg.inventory = discoforge::corpus::LabelInventory::load(p).map_err(invalid)?;
        cfg.resource_files.push(p.clone());
    }
    if let Some(o) = &s.out {
        cfg.output = o.clone();
    }
    Ok(cfg)
}

fn finish(runner: Runner) -> CliResult<()> {
    runner.write_manifest()
}

fn augment(step: AugmentStep, a: &AugmentArgs) -> CliResult<()> {
    let mut cfg = RunConfig::load(&a.config)?;
    if let Some(m) = &a.mapping {
        cfg.mappings = discoforge::augment::load_mappings(m).map_err(invalid)?;
        cfg.resource_files.push(m.clone());
    }
    if let Some(s) = a.seed {
        cfg.seeds.sampling = s;
    }
    if !a.target.is_empty() {
        cfg.augment_targets = Some(a.target.iter().map(|t| t.parse().map_err(invalid)).collect::<CliResult<_>>()?);
    }
    if let Some(t) = &a.translations {
        cfg.translations = Some(t.clone());
    }
    if let Some(o) = &a.out {
        cfg.output = o.clone();
    }
    let mut runner = Runner::new(cfg)?;
    runner.augment(step)?;
    finish(runner)
}

fn prune_select(manifest: &Path, k: usize, protect: Option<&[usize]>, out: Option<&Path>) -> CliResult<()> {
    let entries = load_manifest(manifest).map_err(invalid)?;
    let workers = resolve_workers(None, std::env::var(WORKERS_ENV).ok().as_deref())?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(runtime)?;
    let scores = pool.install(|| {
        entries
            .par_iter()
            .map(|e| e.load().and_then(|d| block_influence(&d)))
            .collect::<Result<Vec<_>, _>>()
    });
    let scores = scores.map_err(|e| match e {
        discoforge::pruning::PruneError::Io { .. } => runtime(e),
        other => invalid(other),
    })?;
    let protected: BTreeSet<usize> = match protect {
        Some(p) => p.iter().copied().collect(),
        None => default_protected(&scores),
    };
    let selected = select_prune_layers(&scores, k, &protected).map_err(invalid)?;
    println!("layer\tinfluence");
    for s in rank_scores(&scores) {
        let mark = if protected.contains(&s.layer_index) { "\tprotected" } else { "" };
        println!("{}\t{:.6}{mark}", s.layer_index, s.influence);
    }
    let list: Vec<String> = selected.iter().map(usize::to_string).collect();
    println!("selected\t{}", list.join(","));
    if let Some(path) = out {
        let body = serde_json::json!({
            "scores": rank_scores(&scores),
            "protected": protected,
            "k": k,
            "selected": selected,
        });
        let text = serde_json::to_string_pretty(&body).map_err(runtime)? + "\n";
        discoforge::io::write_atomic(path, text.as_bytes()).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn report(baseline: &Path, ablated: &Path, out: Option<&Path>) -> CliResult<()> {
    let b = load_report_dir(baseline).map_err(invalid)?;
    let a = load_report_dir(ablated).map_err(invalid)?;
    let table = ablation_report(&b, &a).map_err(invalid)?.to_tsv();
    match out {
        Some(p) => discoforge::io::write_atomic(p, table.as_bytes()).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{table}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate(s) => {
            let mut r = Runner::new(load_source(&s)?)?;
            r.validate()?;
            finish(r)
        }
        Command::Featurize(s) => {
            let mut r = Runner::new(load_source(&s)?)?;
            r.featurize()?;
            finish(r)
        }
        Command::Build { source, style, format } => {
            let mut cfg = load_source(&source)?;
            if !style.is_empty() {
                cfg.styles = style;
                cfg.styles.sort();
                cfg.styles.dedup();
            }
            if let Some(f) = format {
                cfg.format = f.parse().map_err(invalid)?;
            }
            let mut r = Runner::new(cfg)?;
            r.build()?;
            finish(r)
        }
        Command::Augment { step } => match &step {
            AugmentCommand::Plan(a) => augment(AugmentStep::Plan, a),
            AugmentCommand::Emit(a) => augment(AugmentStep::Emit, a),
            AugmentCommand::Merge(a) => augment(AugmentStep::Merge, a),
        },
        Command::PruneSelect { manifest, k, protect, out } => {
            prune_select(&manifest, k, protect.as_deref(), out.as_deref())
        }
        Command::Score { config, gold, pred, corpus, labels, seed, out } => {
            let mut cfg = match (config, gold) {
                (Some(c), _) => RunConfig::load(&c)?,
                (None, Some(g)) => {
                    let out = out.clone().unwrap_or_else(|| PathBuf::from("discoforge-out"));
                    let mut cfg = RunConfig::single(&g, None, corpus.as_deref(), labels.as_deref(), &out)?;
                    let pred = pred.expect("clap requires --pred with --gold");
                    if !pred.exists() {
                        return Err(invalid(format!("prediction file '{}' does not exist", pred.display())));
                    }
                    cfg.corpora[0].predictions = Some(pred);
                    cfg
                }
                (None, None) => return Err(invalid("pass --config or --gold with --pred")),
            };
            if let Some(s) = seed {
                cfg.seeds.repair = s;
            }
            if let Some(o) = out {
                cfg.output = o;
            }
            let mut r = Runner::new(cfg)?;
            r.score()?;
            finish(r)
        }
        Command::Report { baseline, ablated, out } => report(&baseline, &ablated, out.as_deref()),
        Command::All { config, out } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(o) = out {
                cfg.output = o;
            }
            let mut r = Runner::new(cfg)?;
            let result = r.all();
            // Keep the record of completed stages even when a later one fails.
            finish(r)?;
            result
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
