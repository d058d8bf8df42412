use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vidmeta::bmff::{dump_tree, parse_tree};
use vidmeta::error::{Error, Result};
use vidmeta::features::Vocabulary;
use vidmeta::harness::{
    extract, format_table, ingest, read_corpus_file, read_manifest_file, run_scenario,
    write_corpus, write_outputs, ClassifierChoice, CorpusRecord, Scenario, ScenarioConfig,
};
use vidmeta::refine::{default_exclusions, ExclusionList};

#[derive(Parser)]
#[command(name = "vidmeta", version, about = "Container metadata forensics for MP4/MOV files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the box tree of a file.
    DumpTree { file: PathBuf },
    /// Print the metadata strings of a file, one per line.
    Extract {
        file: PathBuf,
        #[arg(long)]
        exclusions: Option<PathBuf>,
    },
    /// Extract every manifest file into a JSON Lines corpus.
    Ingest {
        #[command(flatten)]
        source: ManifestArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write feature vectors as CSV and the vocabulary as JSON.
    Vectorize {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out_csv: PathBuf,
        #[arg(long)]
        out_vocab: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Train and evaluate one scenario.
    Run(RunArgs),
}

#[derive(Args)]
struct ManifestArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Directory manifest paths are relative to; defaults to the manifest's.
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long)]
    exclusions: Option<PathBuf>,
    #[arg(long, default_value = "brand")]
    label_column: String,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    scenario: Option<Scenario>,
    #[arg(long)]
    alpha: Option<usize>,
    #[arg(long)]
    beta: Option<usize>,
    #[arg(long)]
    lambda: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    classifier: Option<ClassifierChoice>,
    #[arg(long)]
    holdout: Option<String>,
    #[arg(long)]
    social_network: Option<String>,
    /// Corpus produced by `ingest`.
    #[arg(long, conflicts_with = "manifest")]
    corpus: Option<PathBuf>,
    /// Ingest this manifest instead of reading a corpus.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long)]
    root: Option<PathBuf>,
    #[arg(long)]
    exclusions: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn exclusions(path: Option<&Path>) -> Result<ExclusionList> {
    match path {
        Some(p) => Ok(ExclusionList::parse(&read_text(p)?)),
        None => Ok(default_exclusions()),
    }
}

fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    let mut config = ScenarioConfig::default();
    if let Some(p) = path {
        config.apply_text(&read_text(p)?)?;
    }
    Ok(config)
}

fn ingest_manifest(
    manifest: &Path,
    root: Option<&Path>,
    exclusions_path: Option<&Path>,
    label_column: &str,
) -> Result<Vec<CorpusRecord>> {
    let rows = read_manifest_file(manifest)?;
    let root = root
        .map(Path::to_path_buf)
        .unwrap_or_else(|| manifest.parent().map(Path::to_path_buf).unwrap_or_default());
    let (records, report) = ingest(&rows, &root, &exclusions(exclusions_path)?, label_column)?;
    eprintln!(
        "ingested {} file(s), skipped {}",
        report.ingested,
        report.skipped.len()
    );
    for (path, reason) in &report.skipped {
        eprintln!("  skipped {path}: {reason}");
    }
    Ok(records)
}

fn run(cli: Cli) -> Result<()> {
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let io_err = |e| Error::io("<stdout>", e);
    match cli.command {
        Command::DumpTree { file } => {
            let bytes = std::fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let report = parse_tree(&bytes)?;
            out.write_all(dump_tree(&report).as_bytes()).map_err(io_err)?;
        }
        Command::Extract { file, exclusions: ex } => {
            let bytes = std::fs::read(&file).map_err(|e| Error::io(&file, e))?;
            let extraction = extract(&bytes, &exclusions(ex.as_deref())?)?;
            for w in &extraction.parse_warnings {
                log::warn!("offset {}: {}", w.offset, w.message);
            }
            for w in &extraction.refine_warnings {
                log::warn!("{}: {}", w.path, w.message);
            }
            for s in extraction.strings {
                writeln!(out, "{}", s.text).map_err(io_err)?;
            }
        }
        Command::Ingest { source, out: path } => {
            let records = ingest_manifest(
                &source.manifest,
                source.root.as_deref(),
                source.exclusions.as_deref(),
                &source.label_column,
            )?;
            let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
            let mut w = std::io::BufWriter::new(file);
            write_corpus(&mut w, &records)?;
            w.flush().map_err(|e| Error::io(&path, e))?;
        }
        Command::Vectorize {
            corpus,
            out_csv,
            out_vocab,
            config,
        } => {
            let config = load_config(config.as_deref())?;
            let records = read_corpus_file(&corpus)?;
            let parsed: Vec<_> = records
                .iter()
                .map(CorpusRecord::parsed_strings)
                .collect::<Result<_>>()?;
            let vocab = Vocabulary::build(parsed.iter().map(Vec::as_slice), &config.continuous)?;
            let rows: Vec<_> = records
                .iter()
                .zip(&parsed)
                .map(|(r, s)| (r.file.clone(), vocab.vectorize(s).0))
                .collect();
            let file = std::fs::File::create(&out_csv).map_err(|e| Error::io(&out_csv, e))?;
            vocab.write_csv(std::io::BufWriter::new(file), &rows)?;
            let mut json = serde_json::to_vec_pretty(&vocab)?;
            json.push(b'\n');
            std::fs::write(&out_vocab, json).map_err(|e| Error::io(&out_vocab, e))?;
        }
        Command::Run(args) => {
            let mut config = load_config(args.config.as_deref())?;
            if let Some(v) = args.scenario {
                config.scenario = v;
            }
            if let Some(v) = args.alpha {
                config.alpha = v;
            }
            if let Some(v) = args.beta {
                config.beta = v;
            }
            if let Some(v) = args.lambda {
                config.set(0, "lambda", &v.to_string())?;
            }
            if let Some(v) = args.seed {
                config.seed = v;
            }
            if let Some(v) = args.classifier {
                config.classifier = v;
            }
            if let Some(v) = args.holdout {
                config.holdout = Some(v);
            }
            if let Some(v) = args.social_network {
                config.social_network = Some(v);
            }
            let records = match (&args.corpus, &args.manifest) {
                (Some(c), _) => read_corpus_file(c)?,
                (None, Some(m)) => {
                    ingest_manifest(m, args.root.as_deref(), args.exclusions.as_deref(), "brand")?
                }
                (None, None) => {
                    return Err(Error::Config {
                        line: 0,
                        reason: "either --corpus or --manifest is required".into(),
                    })
                }
            };
            let output = run_scenario(&config, &records)?;
            write_outputs(&args.out_dir, &output)?;
            out.write_all(format_table(&output.report).as_bytes())
                .map_err(io_err)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 2 } else { 1 })
        }
    }
}
