use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use nfcodebook::allocation::optimize_allocation;
use nfcodebook::harness::{self, ExperimentConfig};
use nfcodebook::Error;

/// Near-field polar codebooks: emit codebooks, run feedback simulations,
/// optimize bit allocations and print theory tables.
#[derive(Parser)]
#[command(name = "nfcodebook", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config file (flat `key = value`).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    /// Output path (stdout when omitted, except for binary codebooks).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write the first configured codebook as CSV and/or binary.
    Codebook,
    /// Run the Monte-Carlo sweep and write one row per point and scheme.
    Simulate,
    /// Exhaustive angle/range split of `b1` bits.
    Allocate,
    /// Closed forms next to their numerical oracles.
    Theory,
}

fn sink(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Error> {
    Ok(match out {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn run(cli: Cli) -> Result<(), Error> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_path(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let out = cli.out.clone().or_else(|| cfg.output.clone());
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cli.command {
        Command::Codebook => {
            let path =
                out.ok_or_else(|| Error::Config("codebook output needs --out or `output`".into()))?;
            for f in harness::emit_codebook(&cfg, &path)? {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Simulate => {
            let rows = harness::run_experiment(&cfg)?;
            harness::write_results(&rows, sink(&out)?)
        }
        Command::Allocate => {
            let array = cfg.array()?;
            let dist = cfg.distribution_for(&cfg.region)?;
            let scheme = cfg
                .codebook_schemes()
                .next()
                .ok_or_else(|| Error::Config("no codebook scheme listed in `schemes`".into()))?;
            let res = optimize_allocation(
                cfg.b1, &dist, &array, scheme, cfg.n_mc, cfg.seed, cfg.search,
            )?;
            eprintln!("optimum p = {}, q = {}", res.p_opt, res.q_opt);
            res.write_csv(sink(&out)?)
        }
        Command::Theory => {
            let rows = harness::theory_report(&cfg)?;
            harness::write_theory(&rows, sink(&out)?)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_numerical() {
                ExitCode::from(3)
            } else {
                ExitCode::from(2)
            }
        }
    }
}
