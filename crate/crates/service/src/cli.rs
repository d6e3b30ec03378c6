//! Command-line entry points.

use std::io::BufRead;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use tracing::{info, warn};

use oerec_core::embeddings::EmbeddingTable;
use oerec_core::ingest::{dump_files, ingest, CorpusStore, IngestReport};
use oerec_core::market::{load_descriptions, load_lexicon, load_vacancies, MarketIndex, DEFAULT_TOP_N};
use oerec_core::quality::training_data::{load_metadata_csv, load_property_csv};
use oerec_core::quality::{CompletenessWeights, ForestParams, QualityModels, DEFAULT_QUALITY_THRESHOLD};
use oerec_core::synthetic;

use crate::config::Config;
use crate::service::{DirPersister, Service, SystemClock};
use crate::study::run_study;

#[derive(Debug, Parser)]
#[command(name = "oerec", version, about = "OER recommender: training, ingestion, HTTP service and simulated study")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train the property and metadata quality models.
    TrainQuality(TrainArgs),
    /// Build the labour-market skill index from vacancies.
    BuildMarket(MarketArgs),
    /// Normalize, score and filter repository dumps into a store.
    Ingest(IngestArgs),
    /// Serve the HTTP API over a store.
    Serve(ServeArgs),
    /// Run the simulated-learner study against a store.
    Simulate(SimulateArgs),
    /// Write a synthetic input bundle for trying the pipeline end to end.
    Fixtures(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub properties: PathBuf,
    #[arg(long)]
    pub metadata: PathBuf,
    /// Directory receiving `properties.json` and `metadata.json`.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 100)]
    pub trees: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct MarketArgs {
    /// Directory of vacancy `.json` / `.jsonl` files.
    #[arg(long)]
    pub vacancies: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub descriptions: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOP_N)]
    pub top_n: usize,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub dumps: PathBuf,
    #[arg(long)]
    pub models: PathBuf,
    #[arg(long)]
    pub market: PathBuf,
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Vector dimension; inferred from the file when omitted.
    #[arg(long)]
    pub dim: Option<usize>,
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value_t = DEFAULT_QUALITY_THRESHOLD)]
    pub threshold: f64,
    /// Where to write the ingest report as JSON.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub store: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
}

fn load_config(path: Option<&Path>) -> anyhow::Result<Config> {
    path.map_or_else(|| Ok(Config::default()), Config::load)
}

/// Vector width of a whitespace-separated embedding file, skipping a
/// `<count> <dim>` header line if present.
pub fn infer_embedding_dimension(path: &Path) -> anyhow::Result<usize> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut counts = std::collections::BTreeMap::new();
    for (i, line) in std::io::BufReader::new(file).lines().take(50).enumerate() {
        let line = line.with_context(|| format!("reading {}", path.display()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 2 {
            continue;
        }
        if i == 0 && fields.len() == 2 && fields.iter().all(|f| f.parse::<u64>().is_ok()) {
            return Ok(fields[1].parse()?);
        }
        *counts.entry(fields.len() - 1).or_insert(0usize) += 1;
    }
    match counts.into_iter().max_by_key(|&(d, n)| (n, d)) {
        Some((d, _)) => Ok(d),
        None => bail!("{}: no embedding rows found", path.display()),
    }
}

pub fn train_quality(a: &TrainArgs) -> anyhow::Result<QualityModels<f64>> {
    let props = load_property_csv(&a.properties)?;
    let meta = load_metadata_csv(&a.metadata)?;
    let params = ForestParams { n_trees: a.trees, ..ForestParams::with_seed(a.seed) };
    let models = QualityModels::<f64>::train(&props, &meta, CompletenessWeights::default(), &params)?;
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    models.save(&a.out)?;
    for m in &models.properties.models {
        info!(features = ?m.feature_set, f1 = m.metrics.f1, "property model");
    }
    info!(f1 = models.metadata.metrics.f1, "metadata model");
    Ok(models)
}

pub fn build_market(a: &MarketArgs) -> anyhow::Result<MarketIndex> {
    let vacancies = load_vacancies(&a.vacancies)?;
    let market =
        MarketIndex::build(&vacancies, load_lexicon(&a.lexicon)?, load_descriptions(&a.descriptions)?, a.top_n)?;
    market.save(&a.out)?;
    info!(vacancies = vacancies.len(), entries = market.demand.len(), "market index written");
    Ok(market)
}

/// Ingests into `a.store`. Learner state already in the store is kept as long
/// as every recommendation still points at an OER of the new corpus.
pub fn run_ingest(a: &IngestArgs) -> anyhow::Result<IngestReport> {
    let models = QualityModels::<f64>::load(&a.models)?;
    let market = MarketIndex::load(&a.market)?;
    let dim = match a.dim {
        Some(d) => d,
        None => infer_embedding_dimension(&a.embeddings)?,
    };
    let (emb, load) = EmbeddingTable::<f64>::load(&a.embeddings, dim)?;
    if load.malformed > 0 {
        warn!(malformed = load.malformed, "embedding rows skipped");
    }
    let dumps = dump_files(&a.dumps)?;
    let (fresh, report) = ingest(&dumps, &market, &models, &emb, a.threshold);
    let store = match CorpusStore::load(&a.store) {
        Ok(old) => CorpusStore {
            oers: fresh.oers,
            quarantine: fresh.quarantine,
            market: fresh.market,
            corpus_stats: fresh.corpus_stats,
            ..old
        },
        Err(oerec_core::Error::NotFound { .. }) => fresh,
        Err(e) => return Err(e.into()),
    };
    store.persist(&a.store).context("re-ingest would leave the store inconsistent")?;
    if let Some(path) = &a.report {
        oerec_core::fsutil::write_json_atomic(path, &report)?;
    }
    info!(kept = report.kept, removed = report.removed, "ingest finished");
    Ok(report)
}

pub async fn serve(a: &ServeArgs) -> anyhow::Result<()> {
    let config = load_config(a.config.as_deref())?;
    let store = CorpusStore::load(&a.store).with_context(|| format!("loading store {}", a.store.display()))?;
    let service = Service::new(store, config, Box::new(DirPersister(a.store.clone())), Box::new(SystemClock));
    let app = crate::http::router(Arc::new(service));
    let addr: SocketAddr = format!("{}:{}", a.host, a.port).parse().context("listen address")?;
    let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
    info!(%addr, "listening");
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}

pub fn simulate(a: &SimulateArgs) -> anyhow::Result<crate::study::StudyReport> {
    let config = load_config(a.config.as_deref())?;
    let store = CorpusStore::load(&a.store).with_context(|| format!("loading store {}", a.store.display()))?;
    let report = run_study(store, &config)?;
    if let Some(out) = &a.out {
        oerec_core::fsutil::write_json_atomic(out, &report)?;
    }
    Ok(report)
}

pub fn fixtures(a: &FixtureArgs) -> anyhow::Result<()> {
    synthetic::write_fixture_bundle(&a.out, a.seed)?;
    Ok(())
}

pub async fn run(cli: Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::TrainQuality(a) => {
            train_quality(a)?;
        }
        Command::BuildMarket(a) => {
            build_market(a)?;
        }
        Command::Ingest(a) => {
            let r = run_ingest(a)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
        }
        Command::Serve(a) => serve(a).await?,
        Command::Simulate(a) => {
            let r = simulate(a)?;
            print!("{}", r.render_table());
        }
        Command::Fixtures(a) => fixtures(a)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_inference() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("e.txt");
        std::fs::write(&p, "a 1 2 3\nb 4 5 6\nbad 1\n").unwrap();
        assert_eq!(infer_embedding_dimension(&p).unwrap(), 3);
        std::fs::write(&p, "2 4\na 1 2 3 4\nb 1 2 3 4\n").unwrap();
        assert_eq!(infer_embedding_dimension(&p).unwrap(), 4);
        std::fs::write(&p, "").unwrap();
        assert!(infer_embedding_dimension(&p).is_err());
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from(["oerec", "serve", "--store", "s", "--port", "9000"]).unwrap();
        assert!(matches!(c.command, Command::Serve(ServeArgs { port: 9000, .. })));
    }
}
