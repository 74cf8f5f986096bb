//! `affcap` command-line front end.
//!
//! Exit codes: 0 success, 1 property failure, 2 input error, 3 numerical
//! failure. Errors are printed to stderr as one JSON object.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use affcap::config::{schemas, ResultDocument, RunConfig};
use affcap::verify::{check_property, summary_table, VerifyOptions, PROPERTY_NAMES};
use affcap::Error;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "affcap", version, about = "Affine surface areas, projection bodies and capacity bounds")]
struct Cli {
    /// Cap on worker threads (default: available parallelism).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write the document here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the quantities listed in a configuration.
    Compute {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the configuration's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run registered properties ("all" or no names runs every one).
    Verify {
        names: Vec<String>,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        trials: usize,
    },
    /// Evaluate a configuration along its sweep axis.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    ListProperties,
    /// Print JSON Schemas of the configuration and result documents.
    Schema,
}

enum Failure {
    Properties(Vec<String>),
    Error(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let (code, kind, message) = match failure {
                Failure::Properties(names) => (1, "property_failure", format!("failing properties: {}", names.join(", "))),
                Failure::Error(e) if e.is_numerical() => (3, "numerical", e.to_string()),
                Failure::Error(e) => (2, "input", e.to_string()),
                Failure::Io(msg) => (2, "input", msg),
            };
            eprintln!("{}", serde_json::json!({ "error": { "kind": kind, "exit_code": code, "message": message } }));
            ExitCode::from(code)
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(Failure::Io("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Io(format!("cannot size the thread pool: {e}")))?;
    }
    match &cli.command {
        Command::Compute { config, seed } => {
            let config = load_config(config, *seed)?;
            if config.sweep.is_some() {
                return Err(Error::Input("configuration has a sweep; use the sweep subcommand".into()).into());
            }
            let doc = affcap::run::compute(&config)?;
            eprint!("{}", result_table(&doc));
            emit(cli, &doc)
        }
        Command::Sweep { config, seed } => {
            let config = load_config(config, *seed)?;
            if config.sweep.is_none() {
                return Err(Error::Input("sweep needs a `sweep` entry with one axis".into()).into());
            }
            let doc = affcap::run::compute(&config)?;
            eprint!("{}", result_table(&doc));
            emit(cli, &doc)
        }
        Command::Verify { names, seed, trials } => {
            let names: Vec<String> = if names.is_empty() || names.iter().any(|n| n == "all") {
                PROPERTY_NAMES.iter().map(|s| s.to_string()).collect()
            } else {
                names.clone()
            };
            let opts = VerifyOptions::new(*trials, *seed);
            // resolve every name before running anything
            for name in &names {
                if !PROPERTY_NAMES.contains(&name.as_str()) {
                    return Err(Error::UnknownProperty {
                        name: name.clone(),
                        valid: PROPERTY_NAMES.iter().map(|s| s.to_string()).collect(),
                    }
                    .into());
                }
            }
            let mut doc = ResultDocument::new("verify", None);
            for name in &names {
                doc.reports.push(check_property(name, &opts)?);
            }
            eprint!("{}", summary_table(&doc.reports));
            emit(cli, &doc)?;
            let failing: Vec<String> = doc.reports.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect();
            if failing.is_empty() {
                Ok(())
            } else {
                Err(Failure::Properties(failing))
            }
        }
        Command::ListProperties => {
            println!("{}", PROPERTY_NAMES.join("\n"));
            Ok(())
        }
        Command::Schema => write_text(cli.out.as_deref(), &format!("{:#}\n", schemas())),
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
    let mut config = RunConfig::from_json(&text)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    Ok(config)
}

fn emit(cli: &Cli, doc: &ResultDocument) -> Result<(), Failure> {
    let text = match cli.format {
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv(),
    };
    write_text(cli.out.as_deref(), &text)
}

/// Writes through a sibling temp file and renames, so a failed write never
/// leaves a partial document behind.
fn write_text(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    let Some(path) = out else {
        print!("{text}");
        return Ok(());
    };
    let io = |e: std::io::Error| Failure::Io(format!("cannot write {}: {e}", path.display()));
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    let mut file = fs::File::create(&tmp).map_err(io)?;
    if let Err(e) = file.write_all(text.as_bytes()).and_then(|_| file.sync_all()) {
        let _ = fs::remove_file(&tmp);
        return Err(io(e));
    }
    fs::rename(&tmp, path).map_err(io)
}

fn result_table(doc: &ResultDocument) -> String {
    let mut out = String::new();
    let mut push = |prefix: String, r: &affcap::config::QuantityResult| {
        let dir = r.direction.as_ref().map(|d| format!(" u={d:.3?}")).unwrap_or_default();
        out.push_str(&format!(
            "{prefix}{:<14} {:>16.10} ± {:<10.2e} {}{dir}\n",
            r.quantity.name(),
            r.value,
            r.err,
            r.method
        ));
    };
    for r in &doc.results {
        push(String::new(), r);
    }
    for row in &doc.rows {
        for r in &row.results {
            push(format!("{:>10} ", row.value), r);
        }
    }
    out
}
