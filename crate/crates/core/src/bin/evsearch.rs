use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use evsearch::eval::{score_anchors, score_arguments, score_coref, Prf};
use evsearch::index::EventIndex;
use evsearch::query::StructuredForm;
use evsearch::schema::parse_results;
use evsearch::scorers::remote;
use evsearch::service::{http, ingest_file, Config, Engine, DEFAULT_K};

#[derive(Parser)]
#[command(name = "evsearch", version, about = "Event extraction and cross-lingual event search")]
struct Cli {
    /// Service configuration (TOML). Built-in data when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract events from a text file and print the result as JSON.
    Extract {
        file: PathBuf,
        #[arg(long, default_value = "en")]
        language: String,
        /// Document id; defaults to the file stem.
        #[arg(long)]
        id: Option<String>,
        #[arg(long)]
        no_translate: bool,
    },
    /// Ingest a JSON Lines corpus into an index file.
    Index {
        corpus: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Search an index.
    Search {
        index: PathBuf,
        /// Natural-language query; overrides the structured flags.
        #[arg(long)]
        nl: Option<String>,
        #[arg(long = "type")]
        types: Vec<String>,
        #[arg(long)]
        agent: Option<String>,
        #[arg(long)]
        patient: Option<String>,
        #[arg(long)]
        location: Option<String>,
        #[arg(long)]
        context: Option<String>,
        #[arg(long, default_value_t = DEFAULT_K)]
        k: usize,
    },
    /// Score predicted extraction results against gold.
    Eval {
        pred: PathBuf,
        gold: PathBuf,
        #[arg(long, value_enum)]
        task: Task,
        /// For arguments: also require the owning anchor to match.
        #[arg(long)]
        require_anchor: bool,
    },
    /// Run the HTTP API.
    Serve {
        #[arg(long)]
        index: PathBuf,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Answer provider requests on stdin/stdout with the configured providers.
    ServeProvider,
}

#[derive(Clone, Copy, ValueEnum)]
enum Task {
    Anchors,
    Arguments,
    Coref,
}

fn config(path: Option<&Path>) -> anyhow::Result<Config> {
    Ok(match path {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    })
}

fn engine(cfg: &Config, index: EventIndex) -> anyhow::Result<Engine> {
    Ok(Engine::new(cfg.build()?, index))
}

fn print_json(v: &impl serde::Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn read_results(path: &Path) -> anyhow::Result<Vec<evsearch::schema::ExtractionResult>> {
    let src = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_results(&src, &path.display().to_string())?)
}

fn main() -> anyhow::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::from_default_env())
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    let cfg = config(cli.config.as_deref())?;

    match cli.command {
        Command::Extract {
            file,
            language,
            id,
            no_translate,
        } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            let id = id.unwrap_or_else(|| {
                file.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "doc".into())
            });
            let parts = cfg.build()?;
            let mut result = parts.pipeline.extract(&id, &language, &text)?;
            if !no_translate {
                parts.pipeline.translate(&mut result);
            }
            print_json(&result)
        }
        Command::Index { corpus, output } => {
            let engine = engine(&cfg, EventIndex::open(&output)?)?;
            let report = ingest_file(&engine, &corpus)?;
            print_json(&report)
        }
        Command::Search {
            index,
            nl,
            types,
            agent,
            patient,
            location,
            context,
            k,
        } => {
            if !index.exists() {
                bail!("index {} does not exist", index.display());
            }
            let engine = engine(&cfg, EventIndex::open(&index)?)?;
            let query = match nl {
                Some(nl) => engine.nl_query(&nl)?,
                None => engine.structured_query(&StructuredForm {
                    types,
                    agent,
                    patient,
                    location,
                    context,
                })?,
            };
            let hits = engine.search(&query, k)?;
            print_json(&json!({ "query": query, "hits": hits }))
        }
        Command::Eval {
            pred,
            gold,
            task,
            require_anchor,
        } => {
            let (p, g) = (read_results(&pred)?, read_results(&gold)?);
            let (name, prf): (&str, Prf) = match task {
                Task::Anchors => ("anchors", score_anchors(&p, &g)?),
                Task::Arguments => ("arguments", score_arguments(&p, &g, require_anchor)?),
                Task::Coref => ("coref", score_coref(&p, &g)?),
            };
            println!("{:<10} {:>9} {:>9} {:>9}", "task", "precision", "recall", "f1");
            println!(
                "{:<10} {:>9.4} {:>9.4} {:>9.4}",
                name, prf.precision, prf.recall, prf.f1
            );
            Ok(())
        }
        Command::Serve { index, port, host } => {
            let engine = Arc::new(engine(&cfg, EventIndex::open(&index)?)?);
            let addr: SocketAddr = format!("{host}:{port}").parse().context("bad host or port")?;
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(http::serve(engine, addr))?;
            Ok(())
        }
        Command::ServeProvider => {
            let parts = cfg.build()?;
            let stdin = std::io::stdin().lock();
            let stdout = std::io::stdout().lock();
            remote::serve(stdin, stdout, &parts.pipeline.providers, "evsearch")?;
            Ok(())
        }
    }
}
