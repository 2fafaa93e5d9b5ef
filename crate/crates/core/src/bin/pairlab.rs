use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use pairlab::algebra::PairingParams;
use pairlab::cli::{self, ParamsSpec};

#[derive(Parser)]
#[command(name = "pairlab", version, about = "Run pairing-delegation protocol scenarios")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Json,
    Text,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario or suite file; exits 1 if any expectation fails.
    Run {
        scenario: PathBuf,
        /// Directory for summary and transcript files.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed_override: Option<u64>,
        #[arg(long, value_enum, default_value = "text")]
        format: OutputFormat,
    },
    /// Write params.json and table.json.
    GenFixtures {
        #[arg(long, conflicts_with = "bits")]
        q: Option<u64>,
        #[arg(long)]
        bits: Option<u32>,
        #[arg(long, default_value_t = 0)]
        params_seed: u64,
        #[arg(long, default_value_t = 16)]
        table_size: usize,
        #[arg(long, default_value_t = 0)]
        table_seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recover (A, B) from an unencrypted two-server transcript.
    Eavesdrop {
        transcript: PathBuf,
        #[arg(long)]
        params: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(args: Args) -> Result<ExitCode> {
    match args.command {
        Command::Run { scenario, out, seed_override, format } => {
            let run = cli::run_file(&scenario, out.as_deref(), seed_override)
                .with_context(|| format!("running {}", scenario.display()))?;
            match format {
                OutputFormat::Json => println!("{}", serde_json::to_string_pretty(&run.overview_json())?),
                OutputFormat::Text => print!("{}", run.overview_text()),
            }
            if run.passed() {
                Ok(ExitCode::SUCCESS)
            } else {
                eprint!("{}", run.diff_report());
                Ok(ExitCode::from(1))
            }
        }
        Command::GenFixtures { q, bits, params_seed, table_size, table_seed, out } => {
            let spec = match (q, bits) {
                (Some(q), _) => ParamsSpec::Q(q),
                (None, Some(bits)) => ParamsSpec::Bits { bits, seed: params_seed },
                (None, None) => ParamsSpec::Q(11),
            };
            let (params, table) = cli::gen_fixtures(&spec, table_size, table_seed, &out)?;
            println!("{}\n{}", params.display(), table.display());
            Ok(ExitCode::SUCCESS)
        }
        Command::Eavesdrop { transcript, params } => {
            let params: PairingParams = serde_json::from_str(&std::fs::read_to_string(&params)?)?;
            match cli::eavesdrop_file(&params, &transcript)? {
                Some((a, b)) => println!("{{\"a\":\"{a}\",\"b\":\"{b}\"}}"),
                None => println!("null"),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
