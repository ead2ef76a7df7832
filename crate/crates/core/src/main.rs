use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use affectbench::corruption::CorruptionKind;
use affectbench::error::{Error, Result};
use affectbench::harness::{self, RunOptions, StageOutcome, StudyManifest};
use affectbench::predictor::CommandSpec;
use affectbench::predictor::conformance::check_conformance;
use affectbench::predictor::mock;
use affectbench::synthetic;

#[derive(Parser)]
#[command(name = "affectbench", version, about = "Corruption-robustness evaluation for arousal-valence predictors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Crop originals and render every condition.
    Corrupt(StudyArgs),
    /// Run the predictor over originals and conditions.
    Predict(StudyArgs),
    /// Per-participant agreement statistics and deviation series.
    Evaluate(StudyArgs),
    /// Cross-participant summary tables.
    Report(StudyArgs),
    /// All stages in order.
    Run(StudyArgs),
    /// Serve the built-in mock predictor over stdin/stdout.
    MockPredictor {
        /// Batch mode: read requests from IN, write predictions to OUT.
        #[arg(long, num_args = 2, value_names = ["IN", "OUT"])]
        batch: Option<Vec<PathBuf>>,
    },
    /// Check an external predictor against the wire protocol.
    Conformance {
        /// Sample frames to send.
        #[arg(long, required = true, num_args = 1..)]
        frames: Vec<PathBuf>,
        #[arg(long, default_value_t = 30.0)]
        timeout: f64,
        /// Predictor program and arguments.
        #[arg(last = true, required = true)]
        command: Vec<String>,
    },
    /// Generate a synthetic study (frames and manifest).
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 3)]
        participants: usize,
        #[arg(long, default_value_t = 200)]
        frames: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory (overrides the manifest).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Global seed (overrides the manifest).
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated subset of conditions.
    #[arg(long, value_delimiter = ',')]
    conditions: Option<Vec<String>>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    #[arg(long)]
    zero_tolerance: Option<f64>,
    /// Use the predictor's file-based batch mode.
    #[arg(long)]
    batch_mode: bool,
}

impl StudyArgs {
    fn plan(&self) -> Result<harness::StudyPlan> {
        let manifest = StudyManifest::load(&self.manifest)?;
        let conditions = self
            .conditions
            .as_ref()
            .map(|names| names.iter().map(|n| n.parse::<CorruptionKind>()).collect::<Result<Vec<_>>>())
            .transpose()?;
        let options = RunOptions {
            output_dir: self.out.clone(),
            global_seed: self.seed,
            conditions,
            workers: Some(self.workers),
            zero_tolerance: self.zero_tolerance,
            batch_mode: self.batch_mode,
        };
        harness::ingest(&manifest, &options)
    }
}

fn print_outcome(outcome: &StageOutcome) {
    println!(
        "{}: {} run, {} up to date, {} warning(s)",
        outcome.stage,
        outcome.executed.len(),
        outcome.skipped.len(),
        outcome.warnings.len()
    );
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Corrupt(args) => print_outcome(&harness::run_corruption_stage(&args.plan()?)?),
        Command::Predict(args) => print_outcome(&harness::run_prediction_stage(&args.plan()?)?),
        Command::Evaluate(args) => print_outcome(&harness::run_evaluation_stage(&args.plan()?)?),
        Command::Report(args) => {
            let plan = args.plan()?;
            print_outcome(&harness::run_report_stage(&plan)?);
            println!("{}", harness::Layout::new(&plan.output_dir).summary_csv().display());
        }
        Command::Run(args) => {
            let plan = args.plan()?;
            for outcome in harness::run_all(&plan)? {
                print_outcome(&outcome);
            }
            println!("{}", harness::Layout::new(&plan.output_dir).summary_csv().display());
        }
        Command::MockPredictor { batch } => match batch.as_deref() {
            Some([input, output]) => mock::serve_batch(input, output)?,
            _ => mock::serve(io::stdin().lock(), io::stdout().lock())?,
        },
        Command::Conformance {
            frames,
            timeout,
            command,
        } => {
            let mut spec = CommandSpec::new(&command[0]);
            spec.args = command[1..].to_vec();
            spec.timeout_secs = timeout;
            let report = check_conformance(&spec, &frames);
            print!("{report}");
            if !report.passed() {
                return Err(Error::Predictor(affectbench::PredictorError::Protocol(
                    "conformance check failed".into(),
                )));
            }
        }
        Command::Synth {
            out,
            participants,
            frames,
            seed,
        } => {
            let manifest = synthetic::generate_study(&out, participants, frames, seed)?;
            println!("{}", manifest.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
