//! Command-line front end. Each command loads what it needs, works in
//! memory and writes the project once at the end.

use std::fs;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::bootstrap::{
    run_iterations, BootstrapConfig, DEFAULT_MAX_ITERATIONS, DEFAULT_MIN_SUPPORT_BOOTSTRAP,
};
use crate::corpus::write_corpus;
use crate::error::Error;
use crate::extraction::{
    parse_event_config, render_event_config, PrepositionSet, DEFAULT_EVENT_CONFIG, DEFAULT_MAX_CONNECTOR_LEN,
};
use crate::induction::{InductionConfig, TemplateStatus, DEFAULT_MAX_PER_SOURCE, DEFAULT_MIN_SUPPORT};
use crate::pipeline::{
    chunk_all, extract_all_generalized, induce, initial_state, load_lexicon_files, read_corpus_files,
};
use crate::store::{
    load_path, save_path, stats, write_instances_tsv, write_templates_tsv, ApiState, Verdict,
    DEFAULT_SAMPLE_SIZE,
};
use crate::synth::{plant, PlantConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_PRECONDITION: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pptern", version, about = "Ternary relation template induction")]
pub struct Cli {
    /// Worker threads for parallel stages (defaults to all cores).
    #[arg(long, global = true, env = "PPTERN_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract strict tuples and write a project of candidate templates.
    Induce(InduceArgs),
    /// Review operations on a project.
    #[command(subcommand)]
    Curate(Curate),
    /// Discover templates from accepted instances until convergence.
    Bootstrap(BootstrapArgs),
    /// Write instances and/or templates as TSV.
    Export(ExportArgs),
    /// Per-iteration growth and precision.
    Stats(StatsArgs),
    /// Check a project file.
    Validate(ProjectArg),
    /// Serve the curation API.
    Serve(ServeArgs),
    /// Write a planted demo corpus, lexicon and event config.
    Generate(GenerateArgs),
    /// Print the bundled event configuration.
    Events,
}

#[derive(Debug, Args)]
pub struct ProjectArg {
    #[arg(long, env = "PPTERN_PROJECT")]
    pub project: PathBuf,
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Tagged corpus files.
    #[arg(long = "corpus", required = true, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    /// Lexicon files, merged in order.
    #[arg(long = "lexicon", required = true, num_args = 1.., env = "PPTERN_LEXICON", value_delimiter = ',')]
    pub lexicon: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_MAX_PER_SOURCE)]
    pub max_per_source: usize,
}

#[derive(Debug, Args)]
pub struct InduceArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Event configuration (TOML); the bundled one when omitted.
    #[arg(long, env = "PPTERN_EVENTS")]
    pub events: Option<PathBuf>,
    /// Output project file.
    #[arg(long, env = "PPTERN_PROJECT")]
    pub project: PathBuf,
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT)]
    pub min_support: usize,
}

#[derive(Debug, Subcommand)]
pub enum Curate {
    /// Set the three role labels of a template.
    Label {
        #[command(flatten)]
        project: ProjectArg,
        #[arg(long)]
        template: String,
        /// Comma-separated role labels.
        #[arg(long, value_delimiter = ',', required = true)]
        roles: Vec<String>,
    },
    Accept {
        #[command(flatten)]
        project: ProjectArg,
        #[arg(long)]
        template: String,
    },
    Reject {
        #[command(flatten)]
        project: ProjectArg,
        #[arg(long)]
        template: String,
    },
    /// Print a seeded review sample of an iteration's accepted templates.
    Sample {
        #[command(flatten)]
        project: ProjectArg,
        #[arg(long)]
        iteration: u32,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Record a verdict on a sampled template.
    Judge {
        #[command(flatten)]
        project: ProjectArg,
        #[arg(long)]
        template: String,
        #[arg(long)]
        iteration: u32,
        #[arg(long)]
        verdict: String,
        #[arg(long, default_value = "")]
        note: String,
    },
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    #[command(flatten)]
    pub project: ProjectArg,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, default_value_t = DEFAULT_MIN_SUPPORT_BOOTSTRAP)]
    pub min_support: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_ITERATIONS)]
    pub max_iterations: u32,
    #[arg(long, default_value_t = DEFAULT_MAX_CONNECTOR_LEN)]
    pub max_connector_len: usize,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub project: ProjectArg,
    #[arg(long)]
    pub instances: Option<PathBuf>,
    #[arg(long)]
    pub templates: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[command(flatten)]
    pub project: ProjectArg,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub project: ProjectArg,
    #[arg(long, default_value = "127.0.0.1:8080", env = "PPTERN_ADDR")]
    pub addr: SocketAddr,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Output directory; receives corpus.tsv, lexicon.tsv and events.toml.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = PlantConfig::default().base_support)]
    pub base_support: usize,
    #[arg(long, default_value_t = PlantConfig::default().documents)]
    pub documents: usize,
    #[arg(long, default_value_t = PlantConfig::default().seed)]
    pub seed: u64,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = if e.is_precondition() { EXIT_PRECONDITION } else { EXIT_INPUT };
        CliError { code, message: e.to_string() }
    }
}

fn input_error(message: impl Into<String>) -> CliError {
    CliError { code: EXIT_INPUT, message: message.into() }
}

fn at_least_one(name: &str, value: usize) -> Result<(), CliError> {
    if value == 0 {
        return Err(input_error(format!("--{name} must be at least 1")));
    }
    Ok(())
}

fn write_err(e: std::io::Error) -> CliError {
    input_error(format!("cannot write output: {e}"))
}

macro_rules! say {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).map_err(write_err)?
    };
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(n) = cli.workers {
        // only the first call in a process takes effect
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match cli.command {
        Command::Induce(a) => cmd_induce(a, out),
        Command::Curate(c) => cmd_curate(c, out),
        Command::Bootstrap(a) => cmd_bootstrap(a, out),
        Command::Export(a) => cmd_export(a, out),
        Command::Stats(a) => cmd_stats(&a.project.project, a.json, out),
        Command::Validate(a) => {
            let state = load_path(&a.project)?;
            say!(
                out,
                "ok: {} templates, {} instances, revision {}",
                state.templates.len(),
                state.instances.len(),
                state.revision
            );
            Ok(())
        }
        Command::Serve(a) => cmd_serve(a, out),
        Command::Generate(a) => cmd_generate(a, out),
        Command::Events => {
            out.write_all(DEFAULT_EVENT_CONFIG.as_bytes()).map_err(write_err)?;
            Ok(())
        }
    }
}

fn cmd_induce(a: InduceArgs, out: &mut dyn Write) -> Result<(), CliError> {
    at_least_one("min-support", a.min_support)?;
    at_least_one("max-per-source", a.input.max_per_source)?;
    let events = match &a.events {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            parse_event_config(&text)?
        }
        None => parse_event_config(DEFAULT_EVENT_CONFIG)?,
    };
    let (lex, lex_report) = load_lexicon_files(&a.input.lexicon)?;
    let corpus = read_corpus_files(&a.input.corpus)?;
    for (path, e) in &corpus.errors {
        eprintln!("warning: {}: {e}", path.display());
    }
    for e in &lex_report.errors {
        eprintln!("warning: lexicon {e}");
    }
    let chunked = chunk_all(corpus.sentences);
    let cfg = InductionConfig { min_support: a.min_support, max_per_source: a.input.max_per_source };
    let run = induce(&chunked, &events, &PrepositionSet::default(), &lex, cfg)?;
    let dropped = run.output.dropped_untypeable;
    let state = initial_state(events, run.output);
    save_path(&state, &a.project)?;
    say!(
        out,
        "sentences: {}  line errors: {}  lexicon entries: {}",
        corpus.stats.sentences,
        corpus.stats.line_errors,
        lex.len()
    );
    say!(
        out,
        "strict tuples: {}  untypeable: {}  candidates: {}",
        run.strict_tuples,
        dropped,
        state.templates.len()
    );
    Ok(())
}

fn cmd_curate(c: Curate, out: &mut dyn Write) -> Result<(), CliError> {
    match c {
        Curate::Label { project, template, roles } => {
            let mut state = load_path(&project.project)?;
            let roles: [String; 3] =
                roles.try_into().map_err(|_| input_error("exactly three role labels are required"))?;
            state.set_role_labels(&template, roles)?;
            save_path(&state, &project.project)?;
            say!(out, "labelled {template}");
        }
        Curate::Accept { project, template } => {
            set_status(&project.project, &template, TemplateStatus::Accepted, out)?;
        }
        Curate::Reject { project, template } => {
            set_status(&project.project, &template, TemplateStatus::Rejected, out)?;
        }
        Curate::Sample { project, iteration, n, seed } => {
            if n == 0 {
                return Err(input_error("sample size must be at least 1"));
            }
            let state = load_path(&project.project)?;
            for t in state.sample_for_review(iteration, n, seed) {
                say!(out, "{}\t{}\t{}", t.id, t.event_type, t.key);
            }
        }
        Curate::Judge { project, template, iteration, verdict, note } => {
            let verdict: Verdict = verdict.parse()?;
            let mut state = load_path(&project.project)?;
            state.record_judgment(&template, verdict, iteration, &note)?;
            save_path(&state, &project.project)?;
            let p = state.precision(iteration).expect("a judgment was just recorded");
            say!(out, "iteration {iteration}: {}/{} correct", p.correct, p.judged);
        }
    }
    Ok(())
}

fn set_status(
    project: &Path,
    template: &str,
    status: TemplateStatus,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let mut state = load_path(project)?;
    state.set_status(template, status)?;
    save_path(&state, project)?;
    say!(out, "{template}: {}", status.as_str());
    Ok(())
}

fn cmd_bootstrap(a: BootstrapArgs, out: &mut dyn Write) -> Result<(), CliError> {
    at_least_one("min-support", a.min_support)?;
    at_least_one("max-per-source", a.input.max_per_source)?;
    at_least_one("max-connector-len", a.max_connector_len)?;
    at_least_one("max-iterations", a.max_iterations as usize)?;
    let mut state = load_path(&a.project.project)?;
    let (lex, _) = load_lexicon_files(&a.input.lexicon)?;
    let corpus = read_corpus_files(&a.input.corpus)?;
    for (path, e) in &corpus.errors {
        eprintln!("warning: {}: {e}", path.display());
    }
    let chunked = chunk_all(corpus.sentences);
    let gen = extract_all_generalized(&chunked, a.max_connector_len);
    let cfg = BootstrapConfig {
        min_support: a.min_support,
        max_iterations: a.max_iterations,
        max_per_source: a.input.max_per_source,
        ..BootstrapConfig::default()
    };
    let reports = run_iterations(&mut state, &gen, &lex, &cfg)?;
    save_path(&state, &a.project.project)?;
    say!(out, "generalized tuples: {}  iterations run: {}", gen.len(), reports.len());
    for r in &reports {
        for (event, verbs) in &r.new_trigger_verbs {
            say!(out, "iteration {}: {event} gained triggers {}", r.iteration, verbs.join(", "));
        }
    }
    out.write_all(stats(&state).to_text().as_bytes()).map_err(write_err)?;
    Ok(())
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>,
) -> Result<(), Error> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn cmd_export(a: ExportArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if a.instances.is_none() && a.templates.is_none() {
        return Err(input_error("nothing to export: pass --instances and/or --templates"));
    }
    let state = load_path(&a.project.project)?;
    if let Some(p) = &a.instances {
        write_file(p, |w| write_instances_tsv(&state, w))?;
        say!(out, "{} instances -> {}", state.instances.len(), p.display());
    }
    if let Some(p) = &a.templates {
        write_file(p, |w| write_templates_tsv(&state, w))?;
        say!(out, "{} templates -> {}", state.templates.len(), p.display());
    }
    Ok(())
}

pub fn cmd_stats(project: &Path, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let state = load_path(project)?;
    let report = stats(&state);
    if json {
        let text = serde_json::to_string_pretty(&report).map_err(Error::from)?;
        say!(out, "{text}");
    } else {
        out.write_all(report.to_text().as_bytes()).map_err(write_err)?;
    }
    Ok(())
}

fn cmd_serve(a: ServeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let state = load_path(&a.project.project)?;
    let api = ApiState::new(state, Some(a.project.project.clone()));
    say!(out, "listening on http://{}", a.addr);
    out.flush().map_err(write_err)?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| input_error(e.to_string()))?;
    runtime
        .block_on(crate::store::serve(api, a.addr))
        .map_err(|e| input_error(format!("cannot serve on {}: {e}", a.addr)))
}

fn cmd_generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = PlantConfig {
        base_support: a.base_support,
        documents: a.documents,
        seed: a.seed,
        ..PlantConfig::default()
    };
    let planted = plant(&cfg)?;
    fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let corpus = a.out.join("corpus.tsv");
    write_file(&corpus, |w| write_corpus(w, &planted.sentences))?;
    let lexicon = a.out.join("lexicon.tsv");
    fs::write(&lexicon, &planted.lexicon_tsv).map_err(|e| Error::io(&lexicon, e))?;
    let events = a.out.join("events.toml");
    fs::write(&events, render_event_config(&planted.events)).map_err(|e| Error::io(&events, e))?;
    say!(
        out,
        "{} sentences, {} planted templates -> {}",
        planted.sentences.len(),
        planted.truth.templates.len(),
        a.out.display()
    );
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_args<I, T>(args: I, out: &mut dyn Write) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out),
        // --help and --version
        Err(e) if !e.use_stderr() => {
            write!(out, "{e}").map_err(write_err)?;
            Ok(())
        }
        Err(e) => Err(input_error(e.to_string().trim_start_matches("error: ").trim_end())),
    }
}
