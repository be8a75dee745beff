//! `groundcal` command-line driver.
//!
//! Exit codes:
//!
//! | code | meaning                                   |
//! |------|-------------------------------------------|
//! | 0    | success                                   |
//! | 2    | usage / configuration error               |
//! | 3    | data error (schema, empty or degenerate)  |
//! | 4    | grounding provider or NLI oracle failure  |
//! | 5    | I/O error (missing input, unwritable out) |

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use groundcal_core::baselines::BaselineKind;
use groundcal_core::calibration::{Grid, GridRange};
use groundcal_core::corpus::{self, SplitSpec};
use groundcal_core::entailment::{
    exact_match_oracle, overlap_oracle, remote_nli_oracle, EquivalenceOracle,
};
use groundcal_core::grounding::{offline_provider, remote_provider, GroundingProvider, RemoteMode};
use groundcal_core::metrics::{self, EvalConfig, METHOD_BASELINE, METHOD_FUSED, METHOD_SCALED};
use groundcal_core::report::{self, DiagramSpec};
use groundcal_core::synth::{self, SynthConfig};
use groundcal_core::{CorpusError, Error};
use serde_json::json;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;
const EXIT_PROVIDER: u8 = 4;
const EXIT_IO: u8 = 5;

#[derive(Parser)]
#[command(
    name = "groundcal",
    version,
    about = "Grounding-calibrated confidence for LLM response ensembles"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit calibration on validation splits and report test ECE.
    Evaluate(EvaluateArgs),
    /// Write a synthetic dataset in the record format.
    Synth(SynthArgs),
    /// Check a dataset against the record schema.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct EvaluateArgs {
    /// Line-delimited JSON dataset.
    #[arg(long)]
    input: PathBuf,
    /// lexsim | predent | sement | numsets | all
    #[arg(long, default_value = "lexsim")]
    baseline: String,
    /// exact | overlap:<threshold> | remote:<url>
    #[arg(long, default_value = "exact")]
    oracle: String,
    /// offline | none | remote:<url>:<verdict|score>
    #[arg(long, default_value = "offline")]
    grounding: String,
    /// Number of random validation/test splits.
    #[arg(long, default_value_t = 5)]
    runs: usize,
    /// Validation fraction of each split.
    #[arg(long, default_value_t = 0.2)]
    split: f64,
    /// Split seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of equal-width confidence bins.
    #[arg(long, default_value_t = metrics::DEFAULT_BINS)]
    bins: usize,
    /// Temperature grid, start:stop:step.
    #[arg(long, default_value = "0.1:9.9:0.2")]
    grid_t: String,
    /// Offset grid, start:stop:step.
    #[arg(long, default_value = "0:0.5:0.1")]
    grid_c: String,
    /// Output prefix for <prefix>.summary.json, .summary.csv, .reliability.svg
    #[arg(long, default_value = "groundcal")]
    out: PathBuf,
    /// Worker threads for per-ensemble scoring.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Timeout for each remote request, in milliseconds.
    #[arg(long, default_value_t = 30_000)]
    timeout_ms: u64,
}

#[derive(Args)]
struct SynthArgs {
    /// Output path.
    #[arg(long, default_value = "synth.jsonl")]
    out: PathBuf,
    /// Number of ensembles.
    #[arg(long, default_value_t = 300)]
    n: usize,
    /// Responses per ensemble.
    #[arg(long, default_value_t = 20)]
    samples: usize,
    /// Fraction of consistently wrong ensembles.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    frac_wrong: f64,
    /// Fraction of inconsistent ensembles.
    #[arg(long, default_value_t = 0.5)]
    frac_inconsistent: f64,
    /// Probability a grounding confidence reflects true correctness.
    #[arg(long, default_value_t = 0.9)]
    fidelity: f64,
    /// Vocabulary size for generated answers.
    #[arg(long, default_value_t = 64)]
    vocab: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Line-delimited JSON dataset.
    #[arg(long)]
    input: PathBuf,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            kind: "usage",
            message: message.into(),
        }
    }

    fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_IO,
            kind: "io",
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let (code, kind) = match e.root() {
            Error::Provider(_) => (EXIT_PROVIDER, "provider"),
            Error::InvalidArgument(_) => (EXIT_USAGE, "usage"),
            Error::Corpus(CorpusError::Io(_)) => (EXIT_IO, "io"),
            _ => (EXIT_DATA, "data"),
        };
        Self {
            code,
            kind,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Evaluate(args) => cmd_evaluate(&args),
        Command::Synth(args) => cmd_synth(&args),
        Command::Validate(args) => cmd_validate(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!(
                "{}",
                json!({ "error": f.kind, "exit_code": f.code, "message": f.message })
            );
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> Result<Vec<corpus::Ensemble>, Failure> {
    let file = File::open(path).map_err(|e| Failure::io(path, e))?;
    let data = corpus::parse_dataset(BufReader::new(file)).map_err(|e| match e {
        CorpusError::Io(err) => Failure::io(path, err),
        other => Failure {
            code: EXIT_DATA,
            kind: "data",
            message: format!("{}: {other}", path.display()),
        },
    })?;
    if data.is_empty() {
        return Err(Failure {
            code: EXIT_DATA,
            kind: "data",
            message: format!("{}: no ensembles", path.display()),
        });
    }
    Ok(data)
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn parse_baselines(s: &str) -> Result<Vec<BaselineKind>, Failure> {
    if s == "all" {
        return Ok(BaselineKind::ALL.to_vec());
    }
    s.parse::<BaselineKind>()
        .map(|k| vec![k])
        .map_err(|e| Failure::usage(e.to_string()))
}

fn parse_oracle(s: &str, timeout: Duration) -> Result<Box<dyn EquivalenceOracle>, Failure> {
    if s == "exact" {
        return Ok(Box::new(exact_match_oracle()));
    }
    if let Some(t) = s.strip_prefix("overlap:") {
        let t: f64 = t
            .parse()
            .map_err(|_| Failure::usage(format!("overlap threshold `{t}` is not a number")))?;
        return Ok(Box::new(overlap_oracle(t)?));
    }
    if let Some(url) = s.strip_prefix("remote:") {
        return Ok(Box::new(remote_nli_oracle(url, timeout)));
    }
    Err(Failure::usage(format!(
        "--oracle `{s}` (expected exact | overlap:<t> | remote:<url>)"
    )))
}

fn parse_grounding(
    s: &str,
    data: &[corpus::Ensemble],
    timeout: Duration,
) -> Result<Option<Box<dyn GroundingProvider>>, Failure> {
    match s {
        "offline" => return Ok(Some(Box::new(offline_provider(data)))),
        "none" => return Ok(None),
        _ => {}
    }
    let rest = s.strip_prefix("remote:").ok_or_else(|| {
        Failure::usage(format!(
            "--grounding `{s}` (expected offline | none | remote:<url>:<verdict|score>)"
        ))
    })?;
    let (url, mode) = rest
        .rsplit_once(':')
        .ok_or_else(|| Failure::usage(format!("--grounding `{s}` lacks :<verdict|score>")))?;
    let mode: RemoteMode = mode.parse()?;
    Ok(Some(Box::new(remote_provider(url, mode, timeout))))
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

fn cmd_evaluate(args: &EvaluateArgs) -> Result<(), Failure> {
    let kinds = parse_baselines(&args.baseline)?;
    let t_range: GridRange = args.grid_t.parse()?;
    let c_range: GridRange = args.grid_c.parse()?;
    let grid = Grid::from_ranges(t_range, c_range)?;
    if args.runs == 0 {
        return Err(Failure::usage("--runs must be >= 1"));
    }
    let split = SplitSpec {
        validation_fraction: args.split,
        seed: args.seed,
        repetitions: args.runs,
    };
    split.validate()?;
    if args.bins == 0 {
        return Err(Failure::usage("--bins must be >= 1"));
    }
    let timeout = Duration::from_millis(args.timeout_ms);
    let oracle = parse_oracle(&args.oracle, timeout)?;

    let data = load(&args.input)?;
    let provider = parse_grounding(&args.grounding, &data, timeout)?;

    for kind in &kinds {
        let prefix = if kinds.len() == 1 {
            args.out.clone()
        } else {
            with_suffix(&args.out, &format!(".{kind}"))
        };
        let cfg = EvalConfig {
            baseline: *kind,
            split,
            grid: grid.clone(),
            bins: args.bins,
            jobs: args.jobs,
        };
        let (runs, agg) = metrics::evaluate(&data, oracle.as_ref(), provider.as_deref(), &cfg)?;
        let table = report::summary_table(&agg, &[METHOD_BASELINE, METHOD_SCALED, METHOD_FUSED])?;

        let doc = json!({
            "baseline": kind.as_str(),
            "config": {
                "oracle": args.oracle,
                "grounding": args.grounding,
                "runs": args.runs,
                "validation_fraction": args.split,
                "seed": args.seed,
                "bins": args.bins,
                "grid_t": grid.t_values,
                "grid_c": grid.c_values,
                "n_ensembles": data.len(),
            },
            "rows": table.rows,
            "notes": table.notes,
            "runs": runs,
        });
        let mut json_text = serde_json::to_string_pretty(&doc).expect("summary serializes");
        json_text.push('\n');
        write(&with_suffix(&prefix, ".summary.json"), &json_text)?;
        write(&with_suffix(&prefix, ".summary.csv"), &table.to_csv())?;

        let mut spec = DiagramSpec::new(format!("Reliability: {kind} (run 0 test split)"));
        for m in &runs[0].methods {
            spec.push(m.method.clone(), m.report.clone());
        }
        write(
            &with_suffix(&prefix, ".reliability.svg"),
            &report::reliability_svg(&spec)?,
        )?;

        for row in &table.rows {
            log::info!("{kind} {}: mean ECE {:.4}", row.method, row.mean_ece);
        }
    }
    Ok(())
}

fn cmd_synth(args: &SynthArgs) -> Result<(), Failure> {
    let cfg = SynthConfig {
        n_ensembles: args.n,
        n_samples: args.samples,
        frac_consistent_wrong: args.frac_wrong,
        frac_inconsistent: args.frac_inconsistent,
        grounding_fidelity: args.fidelity,
        vocab_size: args.vocab,
        seed: args.seed,
    };
    let data = synth::generate(&cfg)?;
    write(&args.out, &corpus::serialize_dataset(&data))
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&args.input).map_err(|e| Failure::io(&args.input, e))?;
    let mut ids = std::collections::HashSet::new();
    let mut errors = 0usize;
    let mut valid = 0usize;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 1;
        match corpus::parse_record(line, line_no) {
            Ok(e) if !ids.insert(e.id.clone()) => {
                errors += 1;
                println!(
                    "{}",
                    CorpusError::DuplicateId {
                        line: line_no,
                        id: e.id
                    }
                );
            }
            Ok(_) => valid += 1,
            Err(e) => {
                errors += 1;
                println!("{e}");
            }
        }
    }
    if errors > 0 {
        return Err(Failure {
            code: EXIT_DATA,
            kind: "data",
            message: format!("{}: {errors} invalid line(s)", args.input.display()),
        });
    }
    if valid == 0 {
        return Err(Failure {
            code: EXIT_DATA,
            kind: "data",
            message: format!("{}: no ensembles", args.input.display()),
        });
    }
    println!("{}: {valid} ensembles OK", args.input.display());
    Ok(())
}
