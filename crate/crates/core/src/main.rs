use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use careerflow::classes::ProductivityType;
use careerflow::corpus::{
    filter_sample, parse_corpus_files, write_corpus_files, write_rejects, CorpusFiles,
    SampleFilterConfig,
};
use careerflow::pipeline::{self, AnalyzeConfig};
use careerflow::synth::{self, CorpusConfig};
use careerflow::{Error, Result};

const CACHE_FILE: &str = "corpus.cache.jsonl";

#[derive(Parser)]
#[command(name = "careerflow", version, about = "Career-trajectory bibliometrics engine")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and validate the input files, apply the sample filter and write a cache.
    Ingest(IngestArgs),
    /// Compute portfolios, classes, transitions, Sankey files and regressions.
    Analyze(AnalyzeArgs),
    /// Write a seeded synthetic corpus in the input schema.
    Synth(SynthArgs),
    /// Verify an analysis directory and print a summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct FilterArgs {
    /// Minimum lifetime journal articles and conference papers.
    #[arg(long)]
    min_pubs: Option<u32>,
    #[arg(long)]
    min_age: Option<i32>,
    #[arg(long)]
    max_age: Option<i32>,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    pubs: PathBuf,
    #[arg(long)]
    journals: PathBuf,
    #[arg(long)]
    authors: PathBuf,
    #[arg(long, env = "CAREERFLOW_OUT")]
    out: PathBuf,
    #[arg(long)]
    reference_year: Option<i32>,
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Cache written by `ingest` (default: <out>/corpus.cache.jsonl).
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long, env = "CAREERFLOW_OUT")]
    out: PathBuf,
    #[arg(long = "ptype", value_parser = parse_ptype)]
    ptypes: Vec<ProductivityType>,
    /// `ALL` or a discipline code; repeatable.
    #[arg(long = "scope")]
    scopes: Vec<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    no_regression: bool,
    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, env = "CAREERFLOW_OUT")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long = "authors-n", alias = "authors")]
    authors_n: Option<usize>,
    #[arg(long = "disciplines-n", alias = "disciplines")]
    disciplines_n: Option<usize>,
    #[arg(long)]
    reference_year: Option<i32>,
    /// TOML generator configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, env = "CAREERFLOW_OUT")]
    out: PathBuf,
}

fn parse_ptype(s: &str) -> std::result::Result<ProductivityType, String> {
    s.parse()
}

/// Run configuration file shared by `ingest` and `analyze`.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    reference_year: Option<i32>,
    workers: Option<usize>,
    filter: Option<SampleFilterConfig>,
    ptypes: Option<Vec<ProductivityType>>,
    scopes: Option<Vec<String>>,
    regression: Option<bool>,
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Read {
        path: path.to_owned(),
        source,
    })?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn run_config(path: Option<&Path>) -> Result<RunConfig> {
    path.map_or_else(|| Ok(RunConfig::default()), read_toml)
}

fn apply_filter_flags(mut filter: SampleFilterConfig, args: &FilterArgs) -> Result<SampleFilterConfig> {
    if let Some(v) = args.min_pubs {
        filter.min_publications = v;
    }
    if let Some(v) = args.min_age {
        filter.min_academic_age = v;
    }
    if let Some(v) = args.max_age {
        filter.max_academic_age = v;
    }
    filter.validate()?;
    Ok(filter)
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_owned(),
        source,
    })
}

fn create_file(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| Error::Write {
            path: path.to_owned(),
            source,
        })
}

fn cmd_ingest(args: IngestArgs) -> Result<()> {
    let cfg = run_config(args.config.as_deref())?;
    let reference_year = args
        .reference_year
        .or(cfg.reference_year)
        .ok_or_else(|| Error::Config("--reference-year is required".into()))?;
    let filter = apply_filter_flags(cfg.filter.unwrap_or_default(), &args.filter)?;
    let workers = args.workers.or(cfg.workers).unwrap_or(0);
    let files = CorpusFiles {
        publications: args.pubs,
        journals: args.journals,
        authors: args.authors,
    };
    create_dir(&args.out)?;
    pipeline::with_workers(workers, || -> Result<()> {
        let parsed = parse_corpus_files(&files, reference_year)?;
        let index = parsed.corpus.author_publications();
        let selection = filter_sample(&parsed.corpus, &index, &filter);
        write_rejects(create_file(&args.out.join("rejects.jsonl"))?, &parsed.rejects)?;
        fs::write(args.out.join("filter_report.txt"), format!("{}\n", selection.report))?;
        pipeline::write_cache(
            &args.out.join(CACHE_FILE),
            &parsed.corpus,
            &filter,
            &selection.report,
            parsed.rejects.len(),
        )?;
        println!(
            "read {} journals, {} authors, {} publications ({} rejected lines)",
            parsed.corpus.journals.len(),
            parsed.corpus.authors.len(),
            parsed.corpus.publications.len(),
            parsed.rejects.len()
        );
        println!("{}", selection.report);
        println!("cache: {}", args.out.join(CACHE_FILE).display());
        Ok(())
    })?
}

fn cmd_analyze(args: AnalyzeArgs) -> Result<()> {
    let cfg = run_config(args.config.as_deref())?;
    let cache = args.cache.unwrap_or_else(|| args.out.join(CACHE_FILE));
    let workers = args.workers.or(cfg.workers).unwrap_or(0);
    pipeline::with_workers(workers, || -> Result<()> {
        let (header, corpus) = pipeline::read_cache(&cache)?;
        let filter = apply_filter_flags(cfg.filter.unwrap_or(header.filter), &args.filter)?;
        let config = AnalyzeConfig {
            filter,
            ptypes: if args.ptypes.is_empty() {
                cfg.ptypes.unwrap_or_else(|| ProductivityType::ALL.to_vec())
            } else {
                args.ptypes
            },
            scopes: if args.scopes.is_empty() {
                cfg.scopes.unwrap_or_default()
            } else {
                args.scopes
            },
            regression: !args.no_regression && cfg.regression.unwrap_or(true),
        };
        let summary = pipeline::analyze(&corpus, &config, &args.out)?;
        println!("sample: {} authors", summary.sample);
        for m in summary.mobility.iter().filter(|m| m.scope == "ALL" && m.transition != "early-late") {
            println!(
                "{} {:<9} top->top {:>5} bottom->bottom {:>5} jumpers-up {:>5} droppers-down {:>5}",
                m.ptype,
                m.transition,
                fmt_pct(m.top_to_top),
                fmt_pct(m.bottom_to_bottom),
                fmt_pct(m.jumpers_up),
                fmt_pct(m.droppers_down)
            );
        }
        if summary.models > 0 {
            println!("models: {} fitted, {} failed (see regression_*.csv)", summary.models - summary.failed_models, summary.failed_models);
        }
        println!("wrote {} files; manifest verified", summary.manifest.len());
        Ok(())
    })?
}

fn fmt_pct(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.1}")).unwrap_or_else(|| "-".into())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    let mut config: CorpusConfig = match &args.config {
        Some(p) => read_toml(p)?,
        None => CorpusConfig::default(),
    };
    if let Some(v) = args.seed {
        config.cohort.seed = v;
    }
    if let Some(v) = args.rho {
        config.cohort.rho = v;
    }
    if let Some(v) = args.authors_n {
        config.cohort.n_authors = v;
    }
    if let Some(v) = args.disciplines_n {
        config.cohort.n_disciplines = v;
    }
    if let Some(v) = args.reference_year {
        config.reference_year = v;
    }
    config.validate()?;
    println!("seed: {}", config.cohort.seed);
    create_dir(&args.out)?;
    pipeline::with_workers(args.workers.unwrap_or(0), || -> Result<()> {
        let generated = synth::gen_corpus(&config)?;
        write_corpus_files(&generated.corpus, &CorpusFiles::in_dir(&args.out))?;
        synth::write_truth(
            create_file(&args.out.join("truth.jsonl"))?,
            &generated.truth,
            config.cohort.n_disciplines,
        )?;
        println!(
            "wrote {} journals, {} authors ({} core), {} publications to {} (reference year {})",
            generated.corpus.journals.len(),
            generated.corpus.authors.len(),
            config.cohort.n_authors,
            generated.corpus.publications.len(),
            args.out.display(),
            config.reference_year
        );
        Ok(())
    })?
}

fn cmd_report(args: ReportArgs) -> Result<()> {
    print!("{}", pipeline::report_summary(&args.out)?);
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Read { .. } | Error::Config(_) => 2,
        Error::Stage { source, .. } => exit_code(source),
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
