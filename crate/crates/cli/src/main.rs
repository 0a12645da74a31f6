use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use zerolab::ensemble::{Ensemble, CATALOG};
use zerolab::harness::acceptance::{run_criterion, Golden};
use zerolab::harness::{emit_report, parse_config, run_experiment, summarize};

#[derive(Parser)]
#[command(name = "zerolab", version, about = "Zeros of random holomorphic sections")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config
    Run {
        config: PathBuf,
        /// worker threads (default: all cores)
        #[arg(long)]
        workers: Option<usize>,
        /// output directory (default: the config's `output`, else `./out`)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-run the acceptance suite against the pinned constants in a golden directory
    Verify {
        golden_dir: PathBuf,
        /// run only these criteria (1-9)
        #[arg(long, value_delimiter = ',')]
        only: Vec<usize>,
    },
    /// Print the basis and extremal-function catalog entry of an ensemble
    Describe {
        /// a catalog name or an inline JSON ensemble spec
        ensemble: String,
    },
}

const SCHEMA: u8 = 2;
const NUMERICAL: u8 = 3;

fn fail(e: &zerolab::Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_schema() { SCHEMA } else { NUMERICAL })
}

fn run(config: PathBuf, workers: Option<usize>, out: Option<PathBuf>) -> ExitCode {
    let text = match std::fs::read_to_string(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", config.display());
            return ExitCode::from(SCHEMA);
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(e) => return fail(&e),
    };
    let dir = out
        .or_else(|| cfg.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    let record = match run_experiment(&cfg, workers) {
        Ok(r) => r,
        Err(e) => return fail(&e),
    };
    if let Err(e) = emit_report(&record, &dir) {
        return fail(&e);
    }
    let summary = summarize(&record);
    for ev in &summary.events {
        if ev.excluded > 0 || ev.resampled_trials > 0 {
            println!("n = {}: {} excluded, {} resampled trials", ev.n, ev.excluded, ev.resampled_trials);
        }
    }
    for m in &summary.metrics {
        println!("{:<32} n = {:<4} mean {:<12.6} median {:.6}", m.metric, m.n, m.mean, m.median);
    }
    println!("wrote {} ({:.1} s)", dir.display(), record.wall_time.as_secs_f64());
    ExitCode::SUCCESS
}

fn verify(dir: PathBuf, only: Vec<usize>) -> ExitCode {
    let golden = match Golden::load(&dir) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(SCHEMA);
        }
    };
    let ids: Vec<usize> = if only.is_empty() { (1..=9).collect() } else { only };
    let mut all = true;
    for id in ids {
        if !(1..=9).contains(&id) {
            eprintln!("error: no criterion {id}");
            return ExitCode::from(SCHEMA);
        }
        let o = run_criterion(id, &golden);
        println!("{}", o.line());
        all &= o.pass;
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(NUMERICAL)
    }
}

fn describe(spec: &str) -> ExitCode {
    let ensemble = if spec.trim_start().starts_with('{') {
        match serde_json::from_str::<Ensemble>(spec) {
            Ok(e) => e,
            Err(e) => {
                eprintln!("error: ensemble spec: {e}");
                return ExitCode::from(SCHEMA);
            }
        }
    } else {
        match Ensemble::from_name(spec) {
            Some(e) => e,
            None => {
                eprintln!("error: unknown ensemble `{spec}`; known: {}", CATALOG.join(", "));
                return ExitCode::from(SCHEMA);
            }
        }
    };
    if let Err(e) = ensemble.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(SCHEMA);
    }
    print!("{}", ensemble.describe());
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, workers, out } => run(config, workers, out),
        Command::Verify { golden_dir, only } => verify(golden_dir, only),
        Command::Describe { ensemble } => describe(&ensemble),
    }
}
