//! `themex`: validate theme ontologies, run enrichment analyses, compare
//! scoring methods, run negative controls and serve the JSON API.
//!
//! Data goes to stdout (or `--output`), logs to stderr. Exit status is 0 on
//! success, 1 for domain errors and 2 for I/O or usage errors.

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use themex_core::engine::{DEFAULT_ALPHA, DEFAULT_SEED};
use themex_core::report::{negative_control_text, overlap_text, results_tsv};
use themex_core::{
    compare_methods, enrich, load_corpus, load_storysets, negative_control, parse_ontology, validate_ontology, Corpus,
    CountOptions, EnrichmentQuery, LevelSet, Method, NegativeControl, Storyset, ThemeOntology,
};
use themex_service::{AppState, DEFAULT_ORIGINS};

#[derive(Parser)]
#[command(
    name = "themex",
    version,
    about = "Theme enrichment analysis over a hierarchical theme ontology"
)]
struct Cli {
    /// Log verbosity on stderr: error, warn, info, debug or trace
    #[arg(long, global = true, default_value = "warn", env = "THEMEX_LOG")]
    log_level: log::LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a THEMES file and print per-domain statistics
    Validate {
        /// THEMES TSV [default: $THEMEX_DATA_DIR/themes.tsv]
        #[arg(long)]
        themes: Option<PathBuf>,
    },
    /// Rank themes by enrichment in a test storyset against a background
    Enrich {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Significance level
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Ordering: hypergeometric, tfidf or both (both orders by p-value)
        #[arg(long, default_value = "both")]
        method: Method,
        /// Keep only the first T rows
        #[arg(long)]
        top: Option<usize>,
    },
    /// Repeat the enrichment test on random test storysets
    Negctl {
        #[command(flatten)]
        data: DataArgs,
        /// Storyset to draw test storysets from
        #[arg(long)]
        background: String,
        /// Size of each random test storyset
        #[arg(long)]
        n: usize,
        /// Number of random test storysets
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        /// Significance level
        #[arg(long, default_value_t = DEFAULT_ALPHA)]
        alpha: f64,
        /// Random seed; draw i uses stream i of this seed
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[command(flatten)]
        counting: CountArgs,
    },
    /// Overlap of the top themes by p-value and by TF-IDF, with paired scores
    Compare {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        pair: PairArgs,
        /// Number of top themes compared
        #[arg(long, default_value_t = 20)]
        top_m: usize,
    },
    /// Serve the JSON API until interrupted
    Serve {
        #[command(flatten)]
        data: DataArgs,
        /// TCP port
        #[arg(long, default_value_t = 8080, env = "THEMEX_PORT")]
        port: u16,
        /// Address to bind
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Rewrite the STORYSETS file when storysets are created
        #[arg(long)]
        persist: bool,
        /// Allowed CORS origin, repeatable [default: http://localhost:5173, http://127.0.0.1:5173]
        #[arg(long = "cors-origin", env = "THEMEX_CORS_ORIGINS", value_delimiter = ',')]
        cors_origins: Vec<String>,
    },
}

/// Input files. Each defaults to `$THEMEX_DATA_DIR/<kind>.tsv`.
#[derive(Args)]
struct DataArgs {
    /// THEMES TSV [default: $THEMEX_DATA_DIR/themes.tsv]
    #[arg(long)]
    themes: Option<PathBuf>,
    /// STORIES TSV [default: $THEMEX_DATA_DIR/stories.tsv]
    #[arg(long)]
    stories: Option<PathBuf>,
    /// ANNOTATIONS TSV [default: $THEMEX_DATA_DIR/annotations.tsv]
    #[arg(long)]
    annotations: Option<PathBuf>,
    /// STORYSETS TSV [default: $THEMEX_DATA_DIR/storysets.tsv]
    #[arg(long)]
    storysets: Option<PathBuf>,
    /// Write data here instead of stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PairArgs {
    /// Test storyset name
    #[arg(long)]
    test: String,
    /// Background storyset name
    #[arg(long)]
    background: String,
    /// Skip themes featured in fewer than this many background stories
    #[arg(long = "min-k", default_value_t = 1)]
    min_k: u64,
    #[command(flatten)]
    counting: CountArgs,
}

#[derive(Args)]
struct CountArgs {
    /// Annotation levels counted, comma separated
    #[arg(long, default_value = "central,peripheral")]
    levels: LevelSet,
    /// Count observed themes only, not their ancestors
    #[arg(long)]
    no_latent: bool,
}

impl CountArgs {
    fn options(&self) -> CountOptions {
        CountOptions {
            levels: self.levels,
            include_latent: !self.no_latent,
        }
    }
}

enum CliError {
    /// Missing or unreadable files, bad flags: exit 2.
    Io(String),
    /// Invalid data or a query the engine rejects: exit 1.
    Domain(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Domain(m) => f.write_str(m),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Io(_) => ExitCode::from(2),
            CliError::Domain(_) => ExitCode::from(1),
        }
    }
}

fn domain(err: impl fmt::Display) -> CliError {
    CliError::Domain(err.to_string())
}

fn data_path(explicit: &Option<PathBuf>, file: &str) -> Result<PathBuf, CliError> {
    if let Some(p) = explicit {
        return Ok(p.clone());
    }
    match std::env::var_os("THEMEX_DATA_DIR") {
        Some(dir) => Ok(Path::new(&dir).join(file)),
        None => Err(CliError::Io(format!(
            "no path given for {file} and THEMEX_DATA_DIR is not set"
        ))),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

struct Loaded {
    ontology: ThemeOntology,
    corpus: Corpus,
    storysets: Vec<Storyset>,
    storysets_path: PathBuf,
}

impl Loaded {
    fn storyset(&self, name: &str) -> Result<Storyset, CliError> {
        self.storysets
            .iter()
            .find(|s| s.name() == name)
            .cloned()
            .ok_or_else(|| CliError::Domain(format!("UnknownStoryset: `{name}`")))
    }
}

fn load_ontology(path: &Path) -> Result<ThemeOntology, CliError> {
    let ontology = parse_ontology(&read(path)?).map_err(|e| CliError::Domain(format!("{}: {e}", path.display())))?;
    for w in ontology.warnings() {
        log::warn!("{}: {w}", path.display());
    }
    Ok(ontology)
}

fn load(data: &DataArgs) -> Result<Loaded, CliError> {
    let themes = data_path(&data.themes, "themes.tsv")?;
    let stories = data_path(&data.stories, "stories.tsv")?;
    let annotations = data_path(&data.annotations, "annotations.tsv")?;
    let storysets_path = data_path(&data.storysets, "storysets.tsv")?;
    let (stories_src, annotations_src, storysets_src) = (read(&stories)?, read(&annotations)?, read(&storysets_path)?);

    let ontology = load_ontology(&themes)?;
    let corpus = load_corpus(&stories_src, &annotations_src, &ontology).map_err(domain)?;
    let storysets = load_storysets(&storysets_src, &corpus)
        .map_err(|e| CliError::Domain(format!("{}: {e}", storysets_path.display())))?;
    log::info!(
        "loaded {} themes, {} stories, {} storysets",
        ontology.len(),
        corpus.len(),
        storysets.len()
    );
    Ok(Loaded {
        ontology,
        corpus,
        storysets,
        storysets_path,
    })
}

fn emit(output: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match output {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}

fn query(loaded: &Loaded, pair: &PairArgs) -> Result<EnrichmentQuery, CliError> {
    let mut q = EnrichmentQuery::new(loaded.storyset(&pair.test)?, loaded.storyset(&pair.background)?);
    let opts = pair.counting.options();
    q.levels = opts.levels;
    q.include_latent = opts.include_latent;
    q.min_k = pair.min_k;
    Ok(q)
}

fn validate(themes: &Option<PathBuf>) -> Result<(), CliError> {
    let path = data_path(themes, "themes.tsv")?;
    let source = read(&path)?;
    let defects = validate_ontology(&source);
    if !defects.is_empty() {
        let lines: String = defects.iter().map(|d| format!("{d}\n")).collect();
        emit(&None, &lines)?;
        return Err(CliError::Domain(format!(
            "{}: {} defect{}",
            path.display(),
            defects.len(),
            if defects.len() == 1 { "" } else { "s" }
        )));
    }
    let ontology = load_ontology(&path)?;
    let mut line = format!("valid: {} themes", ontology.len());
    for d in ontology.stats().domains {
        line.push_str(&format!(
            "; {}: {} themes, {} leaves, height {}",
            d.domain, d.theme_count, d.leaf_count, d.height
        ));
    }
    line.push('\n');
    emit(&None, &line)
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Validate { themes } => validate(&themes),
        Command::Enrich {
            data,
            pair,
            alpha,
            method,
            top,
        } => {
            let loaded = load(&data)?;
            let mut q = query(&loaded, &pair)?;
            q.alpha = alpha;
            q.method = method;
            q.top = top;
            let results = enrich(&loaded.corpus, &loaded.ontology, &q).map_err(domain)?;
            emit(&data.output, &results_tsv(&results))
        }
        Command::Negctl {
            data,
            background,
            n,
            trials,
            alpha,
            seed,
            counting,
        } => {
            let loaded = load(&data)?;
            let control = NegativeControl {
                background: loaded.storyset(&background)?,
                n,
                trials,
                alpha,
                seed,
                options: counting.options(),
            };
            let report = negative_control(&loaded.corpus, &loaded.ontology, &control).map_err(domain)?;
            emit(&data.output, &negative_control_text(&report))
        }
        Command::Compare { data, pair, top_m } => {
            let loaded = load(&data)?;
            let q = query(&loaded, &pair)?;
            let results = enrich(&loaded.corpus, &loaded.ontology, &q).map_err(domain)?;
            let overlap = compare_methods(&results, top_m).map_err(domain)?;
            emit(&data.output, &overlap_text(&overlap))
        }
        Command::Serve {
            data,
            port,
            host,
            persist,
            cors_origins,
        } => {
            let loaded = load(&data)?;
            serve(loaded, &host, port, persist, cors_origins)
        }
    }
}

fn serve(loaded: Loaded, host: &str, port: u16, persist: bool, mut origins: Vec<String>) -> Result<(), CliError> {
    if origins.is_empty() {
        origins = DEFAULT_ORIGINS.iter().map(|o| o.to_string()).collect();
    }
    let mut state = AppState::new(loaded.ontology, loaded.corpus, loaded.storysets);
    if persist {
        state = state.persist_to(loaded.storysets_path);
    }
    let app = themex_service::router(Arc::new(state), &origins);
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(format!("runtime: {e}")))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| CliError::Domain(format!("cannot listen on {host}:{port}: {e}")))?;
        themex_service::serve(listener, app, shutdown_signal())
            .await
            .map_err(|e| CliError::Io(format!("server: {e}")))
    })?;
    log::info!("shut down");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
