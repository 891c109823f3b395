//! Command-line front end. [`dispatch`] is the whole program; the binary
//! only wires it to the process streams.

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::encoding::{
    parse_record, read_dataset, read_manifest, write_dataset, KeyEncoding, StoreError, WriteOptions,
    GENERATOR_VERSION, TEST_FILE, TRAIN_FILE,
};
use crate::eval::{audit_distribution, certify_dataset, parse_predictions, score, threshold_rows, ScoreError};
use crate::markov::{parse_program, run, EngineError, RunKind, DEFAULT_STEP_LIMIT};
use crate::taskgen::{build_dataset, build_dataset_sharded, DatasetSpec, GenError, InstructionInstance};

pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const SPEC: i32 = 2;
    pub const INFEASIBLE: i32 = 3;
    pub const DATA: i32 = 4;
    pub const INTERNAL: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "forge", version = GENERATOR_VERSION, about = "Markov-algorithm rewriting and synthetic instruction datasets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Emit {
    Tokens,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ReportFormat {
    Json,
    Table,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a dataset from a spec file.
    Gen {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides the seed in the spec.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; the output does not depend on it.
        #[arg(long)]
        shards: Option<usize>,
        #[arg(long, value_enum)]
        emit: Option<Emit>,
        #[arg(long, default_value_t = KeyEncoding::Sidecar)]
        key_encoding: KeyEncoding,
    },
    /// Run a Markov program on one input word.
    Run {
        program: PathBuf,
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = DEFAULT_STEP_LIMIT)]
        limit: usize,
        /// Print `step rule position word` for every rewrite.
        #[arg(long)]
        trace: bool,
    },
    /// Score a prediction file against a dataset's test split.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long, value_enum, default_value_t = ReportFormat::Table)]
        report: ReportFormat,
    },
    /// Audit how training examples spread over instructions.
    Stats {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0.001, 0.0001])]
        thresholds: Vec<f64>,
        /// Also print the sorted proportion curve, one value per line.
        #[arg(long)]
        curve: bool,
    },
    /// Pretty-print the manifest and the first records of each split.
    Inspect {
        dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        head: usize,
    },
    /// Relabel every record with the oracle and check split hygiene.
    Certify { dir: PathBuf },
}

#[derive(Debug)]
struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn new(code: i32, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }
}

impl From<StoreError> for CliError {
    fn from(e: StoreError) -> Self {
        let code = match e {
            StoreError::Encode(_) => exit::INTERNAL,
            _ => exit::DATA,
        };
        CliError::new(code, e.to_string())
    }
}

fn gen_error(spec: &Path, e: GenError) -> CliError {
    let code = match e {
        GenError::Spec(_) | GenError::InvalidParameter(_) | GenError::Dictionary { .. } => exit::SPEC,
        GenError::Infeasible(_) | GenError::RetriesExhausted { .. } | GenError::CollisionBudget { .. } => exit::INFEASIBLE,
    };
    CliError::new(code, format!("{}: {e}", spec.display()))
}

fn read_text(path: &Path, code: i32) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::new(code, format!("{}: {e}", path.display())))
}

fn io(e: std::io::Error) -> CliError {
    CliError::new(exit::INTERNAL, format!("writing output: {e}"))
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    exit::OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    exit::USAGE
                }
            };
        }
    };
    let result = panic::catch_unwind(AssertUnwindSafe(|| execute(cli.command, out, err)));
    match result {
        Ok(Ok(())) => exit::OK,
        Ok(Err(e)) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
        Err(_) => {
            let _ = writeln!(err, "error: internal invariant violated");
            exit::INTERNAL
        }
    }
}

fn execute(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Gen {
            spec,
            out: dir,
            seed,
            shards,
            emit,
            key_encoding,
        } => cmd_gen(&spec, &dir, seed, shards, emit.is_some(), key_encoding, out),
        Command::Run {
            program,
            input,
            limit,
            trace,
        } => cmd_run(&program, &input, limit, trace, out, err),
        Command::Eval { data, pred, report } => cmd_eval(&data, &pred, report, out),
        Command::Stats { data, thresholds, curve } => cmd_stats(&data, &thresholds, curve, out),
        Command::Inspect { dir, head } => cmd_inspect(&dir, head, out),
        Command::Certify { dir } => cmd_certify(&dir, out),
    }
}

fn cmd_gen(
    spec_path: &Path,
    dir: &Path,
    seed: Option<u64>,
    shards: Option<usize>,
    emit_tokens: bool,
    key_encoding: KeyEncoding,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let text = read_text(spec_path, exit::SPEC)?;
    let mut spec = DatasetSpec::parse(&text).map_err(|e| CliError::new(exit::SPEC, format!("{}: {e}", spec_path.display())))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    let dataset = match shards {
        Some(0) => return Err(CliError::new(exit::USAGE, "--shards must be at least 1")),
        Some(k) => build_dataset_sharded(&spec, k),
        None => build_dataset(&spec),
    }
    .map_err(|e| gen_error(spec_path, e))?;
    let digest = write_dataset(&dataset, dir, WriteOptions { key_encoding, emit_tokens })?;
    writeln!(
        out,
        "wrote {} train and {} test records to {}",
        dataset.train.len(),
        dataset.test.len(),
        dir.display()
    )
    .map_err(io)?;
    writeln!(out, "digest {digest}").map_err(io)
}

fn cmd_run(path: &Path, input: &str, limit: usize, trace: bool, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let text = read_text(path, exit::SPEC)?;
    let program = parse_program(&text).map_err(|e| CliError::new(exit::SPEC, format!("{}: {e}", path.display())))?;
    let word = program
        .alphabet
        .parse_input(input)
        .map_err(|e| CliError::new(exit::USAGE, format!("--input: {e}")))?;
    let outcome = run(&program, &word, limit).map_err(|e| match e {
        EngineError::ZeroStepLimit => CliError::new(exit::USAGE, format!("--limit: {e}")),
        EngineError::NotBaseSymbol(_) => CliError::new(exit::USAGE, format!("--input: {e}")),
        EngineError::EmptyDomain(_) => CliError::new(exit::SPEC, format!("{}: {e}", path.display())),
    })?;
    if trace {
        for (i, s) in outcome.trace.iter().enumerate() {
            let stop = if s.stop { " stop" } else { "" };
            writeln!(out, "{} {} {} {}{stop}", i + 1, s.rule, s.position, program.alphabet.render(&s.word)).map_err(io)?;
        }
    }
    writeln!(out, "{}", program.alphabet.render(&outcome.final_word)).map_err(io)?;
    if outcome.kind != RunKind::Terminated {
        writeln!(err, "{} after {} steps", outcome.kind, outcome.trace.len()).map_err(io)?;
    }
    Ok(())
}

fn cmd_eval(data: &Path, pred: &Path, report: ReportFormat, out: &mut dyn Write) -> Result<(), CliError> {
    let dataset = read_dataset(data)?;
    let predictions = parse_predictions(&read_text(pred, exit::DATA)?);
    let r = score(&dataset, &predictions).map_err(|e| match e {
        ScoreError::SizeMismatch { .. } => CliError::new(exit::DATA, format!("{}: {e}", pred.display())),
    })?;
    match report {
        ReportFormat::Json => writeln!(out, "{}", serde_json::to_string_pretty(&r).unwrap()),
        ReportFormat::Table => write!(out, "{}", r.to_table()),
    }
    .map_err(io)
}

fn cmd_stats(data: &Path, thresholds: &[f64], curve: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let dataset = read_dataset(data)?;
    let audit = audit_distribution(&dataset).map_err(|e| CliError::new(exit::DATA, format!("{}: {e}", data.display())))?;
    writeln!(out, "instructions {}", audit.instructions()).map_err(io)?;
    writeln!(out, "train examples {}", audit.total).map_err(io)?;
    writeln!(out, "{:>10} {:>14} {:>10}", "threshold", "fraction_below", "effective").map_err(io)?;
    for row in threshold_rows(&audit, thresholds) {
        writeln!(
            out,
            "{:>10} {:>14.4} {:>10}",
            row.threshold, row.fraction_below, row.effective_instruction_count
        )
        .map_err(io)?;
    }
    if curve {
        for p in &audit.proportions {
            writeln!(out, "{p:.6e}").map_err(io)?;
        }
    }
    Ok(())
}

fn head_records(dir: &Path, file: &str, n: usize) -> Result<Vec<InstructionInstance>, CliError> {
    let path = dir.join(file);
    let f = fs::File::open(&path).map_err(|e| CliError::new(exit::DATA, format!("{}: {e}", path.display())))?;
    let mut rules = Default::default();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().take(n).enumerate() {
        let line = line.map_err(|e| CliError::new(exit::DATA, format!("{}: {e}", path.display())))?;
        let inst = parse_record(&line, &mut rules).map_err(|r| CliError::new(exit::DATA, format!("{file}:{}: {r}", i + 1)))?;
        out.push(inst);
    }
    Ok(out)
}

fn cmd_inspect(dir: &Path, head: usize, out: &mut dyn Write) -> Result<(), CliError> {
    let m = read_manifest(dir)?;
    writeln!(out, "schema {} generator {}", m.schema_version, m.generator_version).map_err(io)?;
    writeln!(out, "train {} records, test {} records", m.train_records, m.test_records).map_err(io)?;
    writeln!(out, "digest {}", m.digest).map_err(io)?;
    for (k, v) in m.spec.fields() {
        writeln!(out, "  {k} = {v}").map_err(io)?;
    }
    for file in [TRAIN_FILE, TEST_FILE] {
        writeln!(out, "\n{file}").map_err(io)?;
        for inst in head_records(dir, file, head)? {
            let show = |w: &crate::word::Word| if w.is_empty() { "_".to_string() } else { w.to_string() };
            writeln!(
                out,
                "  [{}] {} -> {} : {} => {}",
                inst.category,
                show(&inst.rule.lhs),
                show(&inst.rule.rhs),
                show(&inst.input),
                show(&inst.expected)
            )
            .map_err(io)?;
        }
    }
    Ok(())
}

fn cmd_certify(dir: &Path, out: &mut dyn Write) -> Result<(), CliError> {
    let dataset = read_dataset(dir)?;
    let report = certify_dataset(&dataset);
    writeln!(out, "train {} records, test {} records", report.train_records, report.test_records).map_err(io)?;
    if report.passed() {
        writeln!(out, "certified: digest, labels, categories, annotations and split hygiene all check out").map_err(io)?;
        return Ok(());
    }
    for (kind, n) in &report.counts {
        writeln!(out, "{kind}: {n}").map_err(io)?;
    }
    for f in &report.examples {
        writeln!(out, "  {f}").map_err(io)?;
    }
    Err(CliError::new(exit::DATA, format!("{} failed certification", dir.display())))
}
