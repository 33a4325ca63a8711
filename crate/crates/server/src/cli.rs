//! Subcommands of the `clickwise` binary.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use clickwise::corpus::{
    expand_prefixes, ingest_neutral_corpus, read_dataset, split_by_source, wire, write_dataset, write_jsonl, HeadlineRecord,
    Split,
};
use clickwise::decoder::{parse_grid, sweep, DecodeConfig, DecodeMode, GuidanceSpace, Omega};
use clickwise::guides::{clickbait_auroc, evaluate_single_tactic, train_guide, GuideKind, GuideModel, TrainConfig};
use clickwise::lm::{build_vocab, train_ngram, NgramModel};
use clickwise::pipeline::{expand_all, in_split, ModelBundle, CLICKBAIT_FILE, ENGAGEMENT_FILE, LM_FILE};
use clickwise::synthgen::{composition_report, synthesize, GeneratorKind, HttpCompleter, LlmClientConfig, UNIFORM_TARGETS};

use crate::api::{handle_rewrite, RewriteRequest};
use crate::config::{split_list, Overrides, ProviderKind, ServiceConfig};
use crate::state::{AppState, ServiceState};

#[derive(Debug, Parser)]
#[command(name = "clickwise", version, about = "Guided headline rewriting")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic newswire corpus as a CSV with a `title` column.
    SampleCorpus {
        #[arg(long, default_value_t = 5000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Read neutral headlines from a CSV into a JSONL dataset.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Assign train/validation/test splits by source.
    Split {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Comma-separated train,validation,test fractions.
        #[arg(long, value_parser = parse_triple, default_value = "0.65,0.15,0.2")]
        fractions: [f64; 3],
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Add one clickbait variant per neutral record.
    Synth {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Generator::Template)]
        generator: Generator,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Target shares of one-, two- and three-tactic variants.
        #[arg(long, value_parser = parse_triple)]
        size_targets: Option<[f64; 3]>,
        #[arg(long, default_value_t = 8)]
        max_in_flight: usize,
    },
    /// Summarize a labeled dataset: labels, splits, tactic-count histogram.
    Report {
        #[arg(long)]
        input: PathBuf,
        /// Also write the tactic-count histogram as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Expand records into weighted prefix examples (JSONL).
    Expand {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_parser = parse_split)]
        split: Option<Split>,
    },
    /// Build the vocabulary and n-gram base model from the train split.
    TrainLm {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        artifacts: PathBuf,
        #[arg(long, default_value_t = 3)]
        order: usize,
        #[arg(long, default_value_t = 0.75)]
        discount: f64,
        #[arg(long, default_value_t = 2)]
        min_count: usize,
    },
    /// Train both guides on train prefixes, early-stopping on validation.
    TrainGuides {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        artifacts: PathBuf,
        #[arg(long, default_value_t = 3)]
        epochs: usize,
        #[arg(long, default_value_t = 0.1)]
        learning_rate: f64,
        #[arg(long, default_value_t = 1e-6)]
        l2: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Evaluate the guides on test prefixes.
    EvalGuides {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        artifacts: PathBuf,
        /// Directory for confusion.csv and tactic_means.csv.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Rewrite headlines; prints one JSON response per headline.
    Rewrite {
        #[command(flatten)]
        models: ModelArgs,
        #[arg(long, conflicts_with = "headlines")]
        headline: Option<String>,
        /// Text file, one headline per line.
        #[arg(long)]
        headlines: Option<PathBuf>,
        #[command(flatten)]
        decode: DecodeArgs,
        #[arg(long, default_value_t = 1)]
        n_candidates: usize,
        #[arg(long)]
        trace: bool,
    },
    /// Run a (λ_pos, λ_neg) grid over many headlines; writes CSV.
    Sweep {
        #[command(flatten)]
        models: ModelArgs,
        /// Text file, one headline per line.
        #[arg(long, conflicts_with = "dataset")]
        headlines: Option<PathBuf>,
        /// Labeled dataset; its neutral records from `--split` are used.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, value_parser = parse_split, default_value = "test")]
        split: Split,
        #[arg(long)]
        limit: Option<usize>,
        #[arg(long, default_value = "0,0.5,1x0,0.5,1")]
        grid: String,
        #[command(flatten)]
        decode: DecodeArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        bind: Option<String>,
        #[arg(long)]
        artifacts: Option<PathBuf>,
        #[arg(long, value_enum)]
        provider: Option<ProviderKind>,
        #[arg(long)]
        remote_url: Option<String>,
        /// Comma-separated CORS origins.
        #[arg(long)]
        cors_origins: Option<String>,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Generator {
    Template,
    Llm,
}

#[derive(Debug, Clone, Args)]
pub struct ModelArgs {
    #[arg(long, default_value = "artifacts")]
    pub artifacts: PathBuf,
    #[arg(long, value_enum, default_value_t = ProviderKind::Ngram)]
    pub provider: ProviderKind,
    #[arg(long)]
    pub remote_url: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DecodeArgs {
    /// Comma-separated tactic names to encourage.
    #[arg(long, default_value = "")]
    pub targets: String,
    /// Comma-separated tactic names to suppress.
    #[arg(long, default_value = "")]
    pub suppress: String,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_pos: f64,
    #[arg(long, default_value_t = 0.0)]
    pub lambda_neg: f64,
    #[arg(long, default_value = "greedy")]
    pub mode: DecodeMode,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub k: usize,
    #[arg(long, default_value_t = 32)]
    pub max_len: usize,
    #[arg(long, default_value_t = 1.0)]
    pub temperature: f64,
    #[arg(long, default_value_t = 2)]
    pub anchor_len: usize,
    /// Feed guide scores as log-probabilities instead of probabilities.
    #[arg(long)]
    pub log_guidance: bool,
}

impl DecodeArgs {
    fn config(&self) -> anyhow::Result<DecodeConfig> {
        let config = DecodeConfig {
            lambda_pos: self.lambda_pos,
            lambda_neg: self.lambda_neg,
            omega: Omega::from_names(&split_list(&self.targets), &split_list(&self.suppress))?,
            k: self.k,
            max_len: self.max_len,
            mode: self.mode,
            temperature: self.temperature,
            seed: self.seed,
            anchor_len: self.anchor_len,
            guidance_space: self.guidance_space(),
            ..DecodeConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    fn guidance_space(&self) -> GuidanceSpace {
        if self.log_guidance {
            GuidanceSpace::Log
        } else {
            GuidanceSpace::Probability
        }
    }
}

impl ModelArgs {
    fn service_config(&self) -> anyhow::Result<ServiceConfig> {
        let config = ServiceConfig {
            artifacts: self.artifacts.clone(),
            provider: self.provider,
            remote_url: self.remote_url.clone(),
            ..ServiceConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn parse_triple(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("{p:?} is not a number")))
        .collect::<Result<_, _>>()?;
    parts.try_into().map_err(|_| "expected three comma-separated numbers".to_string())
}

pub fn parse_split(s: &str) -> Result<Split, String> {
    Split::ALL
        .into_iter()
        .find(|sp| sp.as_str() == s)
        .ok_or_else(|| format!("unknown split {s:?} (train, validation or test)"))
}

fn read_lines(path: &Path) -> anyhow::Result<Vec<String>> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for line in std::io::BufReader::new(file).lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(line.trim().to_string());
        }
    }
    Ok(out)
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

pub fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::SampleCorpus { n, seed, out } => {
            let headlines = wire::wire_headlines(n, seed)?;
            wire::write_wire_csv(&headlines, &out)?;
            eprintln!("wrote {} headlines to {}", headlines.len(), out.display());
        }
        Command::Ingest { input, limit, out } => {
            let records = ingest_neutral_corpus(&input, limit)?;
            write_dataset(&records, &out)?;
            eprintln!("ingested {} neutral headlines", records.len());
        }
        Command::Split {
            input,
            out,
            fractions,
            seed,
        } => {
            let mut records = read_dataset(&input)?;
            let assignment = split_by_source(records.iter().map(|r| r.source_id.clone()), fractions, seed)?;
            for r in &mut records {
                r.split = assignment.get(&r.source_id);
            }
            write_dataset(&records, &out)?;
            let [tr, va, te] = assignment.counts();
            eprintln!("sources: {tr} train, {va} validation, {te} test");
        }
        Command::Synth {
            input,
            out,
            generator,
            seed,
            size_targets,
            max_in_flight,
        } => {
            let records = read_dataset(&input)?;
            let neutrals: Vec<HeadlineRecord> = records.iter().filter(|r| !r.clickbait).cloned().collect();
            let targets = size_targets.unwrap_or(UNIFORM_TARGETS);
            let variants = match generator {
                Generator::Template => synthesize(&neutrals, GeneratorKind::Template, &targets, seed, None, max_in_flight)?,
                Generator::Llm => {
                    let client = HttpCompleter::new(LlmClientConfig::from_env()?)?;
                    synthesize(&neutrals, GeneratorKind::LlmClient, &targets, seed, Some(&client), max_in_flight)?
                }
            };
            let n = variants.len();
            let mut all = neutrals;
            all.extend(variants);
            write_dataset(&all, &out)?;
            eprintln!("added {n} clickbait variants");
        }
        Command::Report { input, csv } => {
            let records = read_dataset(&input)?;
            let composition = composition_report(&records)?;
            let by_split: Vec<_> = Split::ALL
                .iter()
                .map(|&s| {
                    let part = in_split(&records, s);
                    serde_json::json!({
                        "split": s.as_str(),
                        "neutral": part.iter().filter(|r| !r.clickbait).count(),
                        "clickbait": part.iter().filter(|r| r.clickbait).count(),
                    })
                })
                .collect();
            print_json(&serde_json::json!({
                "records": records.len(),
                "clickbait": records.iter().filter(|r| r.clickbait).count(),
                "unassigned": records.iter().filter(|r| r.split.is_none()).count(),
                "splits": by_split,
                "tactic_count_histogram": composition.counts,
            }))?;
            if let Some(path) = csv {
                write_text(&path, &composition.to_csv())?;
            }
        }
        Command::Expand { input, out, split } => {
            let records = read_dataset(&input)?;
            let mut examples = Vec::new();
            for r in records.iter().filter(|r| split.is_none() || r.split == split) {
                examples.extend(expand_prefixes(r)?);
            }
            write_jsonl(&examples, &out)?;
            eprintln!("wrote {} prefix examples", examples.len());
        }
        Command::TrainLm {
            input,
            artifacts,
            order,
            discount,
            min_count,
        } => {
            let records = read_dataset(&input)?;
            let train = in_split(&records, Split::Train);
            if train.is_empty() {
                bail!("{} has no train split records", input.display());
            }
            let vocab = build_vocab(&train, min_count)?;
            let lm = train_ngram(&train, vocab, order, discount)?;
            std::fs::create_dir_all(&artifacts)?;
            lm.save(&artifacts.join(LM_FILE))?;
            eprintln!("vocab {} tokens, fingerprint {}", lm.vocab().len(), lm.vocab().fingerprint());
        }
        Command::TrainGuides {
            input,
            artifacts,
            epochs,
            learning_rate,
            l2,
            seed,
        } => {
            let lm = NgramModel::load(&artifacts.join(LM_FILE)).context("run train-lm first")?;
            let records = read_dataset(&input)?;
            let train = expand_all(&in_split(&records, Split::Train))?;
            let val = expand_all(&in_split(&records, Split::Validation))?;
            let config = TrainConfig {
                epochs,
                learning_rate,
                l2,
                seed,
            };
            for (kind, file) in [(GuideKind::Clickbait, CLICKBAIT_FILE), (GuideKind::Engagement, ENGAGEMENT_FILE)] {
                let model = train_guide(kind, lm.vocab(), &train, &val, config)?;
                model.save(&artifacts.join(file))?;
                print_json(&serde_json::json!({ "guide": kind, "history": model.history }))?;
            }
        }
        Command::EvalGuides {
            input,
            artifacts,
            out_dir,
        } => {
            let bundle = ModelBundle::load(&artifacts)?;
            let records = read_dataset(&input)?;
            let test = expand_all(&in_split(&records, Split::Test))?;
            let cb: &GuideModel = bundle.clickbait.model();
            let vocab = bundle.vocab();
            let complete = clickbait_auroc(cb, vocab, test.iter().filter(|e| e.is_complete))?;
            let prefixes = clickbait_auroc(cb, vocab, test.iter().filter(|e| e.t >= 3))?;
            let report = evaluate_single_tactic(bundle.engagement.model(), vocab, &test)?;
            print_json(&serde_json::json!({
                "auroc_complete": complete,
                "auroc_prefix_t3": prefixes,
                "attribute_auroc": report.auroc,
                "diagonal_row_max": report.diagonal_row_max(),
                "single_tactic_accuracy": report.single_tactic_accuracy(),
            }))?;
            if let Some(dir) = out_dir {
                std::fs::create_dir_all(&dir)?;
                write_text(&dir.join("confusion.csv"), &report.confusion_csv())?;
                write_text(&dir.join("tactic_means.csv"), &report.tactic_means_csv())?;
            }
        }
        Command::Rewrite {
            models,
            headline,
            headlines,
            decode,
            n_candidates,
            trace,
        } => {
            let svc = models.service_config()?;
            let state = ServiceState::load(&svc)?;
            let inputs = match (headline, headlines) {
                (Some(h), _) => vec![h],
                (None, Some(path)) => read_lines(&path)?,
                (None, None) => bail!("give --headline or --headlines"),
            };
            for h in inputs {
                let req = RewriteRequest {
                    headline: h,
                    targets: split_list(&decode.targets),
                    suppress: split_list(&decode.suppress),
                    lambda_pos: decode.lambda_pos,
                    lambda_neg: decode.lambda_neg,
                    mode: decode.mode,
                    seed: decode.seed,
                    k: Some(decode.k),
                    max_len: Some(decode.max_len),
                    temperature: Some(decode.temperature),
                    anchor_len: Some(decode.anchor_len),
                    guidance_space: Some(decode.guidance_space()),
                    n_candidates: Some(n_candidates),
                    trace,
                    omega: None,
                };
                let resp = handle_rewrite(&state, &svc, req).map_err(|e| anyhow::anyhow!(e.message))?;
                print_json(&resp)?;
            }
        }
        Command::Sweep {
            models,
            headlines,
            dataset,
            split,
            limit,
            grid,
            decode,
            out,
        } => {
            let state = ServiceState::load(&models.service_config()?)?;
            let mut inputs = match (headlines, dataset) {
                (Some(path), _) => read_lines(&path)?,
                (None, Some(path)) => in_split(&read_dataset(&path)?, split)
                    .into_iter()
                    .filter(|r| !r.clickbait)
                    .map(|r| r.text)
                    .collect(),
                (None, None) => bail!("give --headlines or --dataset"),
            };
            if let Some(n) = limit {
                inputs.truncate(n);
            }
            let grid = parse_grid(&grid)?;
            let config = decode.config()?;
            let report = sweep(&inputs, &grid, config.omega, &config, state.providers())?;
            match out {
                Some(path) => write_text(&path, &report.to_csv())?,
                None => print!("{}", report.to_csv()),
            }
        }
        Command::Serve {
            config,
            bind,
            artifacts,
            provider,
            remote_url,
            cors_origins,
            dataset,
        } => {
            let overrides = Overrides {
                bind,
                artifacts,
                provider,
                remote_url,
                cors_origins: cors_origins.as_deref().map(split_list),
                dataset,
            };
            let config = ServiceConfig::resolve(config.as_deref(), overrides)?;
            tokio::runtime::Runtime::new()?.block_on(serve(config))?;
        }
    }
    Ok(())
}

/// Loads models if present (the API answers 503 until they are), binds,
/// and serves until Ctrl-C. On Unix, SIGHUP reloads the artifacts.
pub async fn serve(config: ServiceConfig) -> anyhow::Result<()> {
    let load_config = config.clone();
    let state = tokio::task::spawn_blocking(move || ServiceState::load(&load_config)).await?;
    let state = match state {
        Ok(s) => Some(s),
        Err(e) => {
            tracing::warn!("starting without models: {e:#}");
            None
        }
    };
    let app = Arc::new(AppState::new(config.clone(), state));
    #[cfg(unix)]
    {
        let app = app.clone();
        let mut hup = tokio::signal::unix::signal(tokio::signal::unix::SignalKind::hangup())?;
        tokio::spawn(async move {
            while hup.recv().await.is_some() {
                let app = app.clone();
                match tokio::task::spawn_blocking(move || app.reload()).await {
                    Ok(Ok(())) => tracing::info!("models reloaded"),
                    Ok(Err(e)) => tracing::error!("reload failed, keeping previous models: {e:#}"),
                    Err(e) => tracing::error!("reload task failed: {e}"),
                }
            }
        });
    }
    let listener = tokio::net::TcpListener::bind(&config.bind)
        .await
        .with_context(|| format!("binding {}", config.bind))?;
    tracing::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, crate::router(app))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
