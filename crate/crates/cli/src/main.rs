use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use spectrum_core::{find_equilibrium_with, MarketConfig, NashOptions};
use spectrum_eq::scenario::{Extent, Mode, ScenarioSpec};
use spectrum_eq::suite::{run_suite, SuiteOptions};
use spectrum_eq::sweep::run_sweep;

#[derive(Parser)]
#[command(name = "spectrum-eq", version, about = "Price competition over licensed and shared spectrum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its CSV.
    Sweep {
        spec: PathBuf,
        /// Output path; defaults to the scenario's `output`, else stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run the acceptance checks.
    Verify {
        /// Only run criteria whose id or name contains this text.
        #[arg(long)]
        filter: Option<String>,
        /// Print the reports as JSON instead of one line each.
        #[arg(long)]
        json: bool,
        /// Perturb the reference constants of one criterion (harness self-test).
        #[arg(long, value_name = "ID")]
        mutate: Option<String>,
    },
    /// Solve one market and print the equilibrium as JSON.
    Eq {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Licensed bands, comma separated; a single value is repeated for every incumbent.
        #[arg(long = "B", value_delimiter = ',', required = true)]
        b: Vec<f64>,
        /// Unlicensed band, a number or `inf`.
        #[arg(long = "W", value_parser = parse_extent)]
        w: Extent,
        #[arg(long, default_value_t = 0.0)]
        alpha: f64,
        /// Incumbent count; defaults to the number of bands given.
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "N", default_value_t = 0)]
        n: usize,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Bundled,
    Unbundled,
    Exclusive,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bundled => Mode::Bundled,
            ModeArg::Unbundled => Mode::Unbundled,
            ModeArg::Exclusive => Mode::Exclusive,
        }
    }
}

fn parse_extent(s: &str) -> Result<Extent, String> {
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Extent::Infinite);
    }
    s.parse::<f64>().map(Extent::Finite).map_err(|e| format!("{s:?}: {e}"))
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<bool> {
    let opts = NashOptions::from_env();
    match cli.command {
        Command::Sweep { spec, output } => {
            let scenario = ScenarioSpec::load(&spec)?;
            let csv = run_sweep(&scenario, &opts).to_csv();
            match output.or_else(|| scenario.output.as_ref().map(PathBuf::from)) {
                Some(path) => std::fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?,
                None => print!("{csv}"),
            }
            Ok(true)
        }
        Command::Verify { filter, json, mutate } => {
            let reports = run_suite(&SuiteOptions { filter, mutate });
            if reports.is_empty() {
                bail!("no criterion matches the filter");
            }
            if json {
                println!("{}", serde_json::to_string_pretty(&reports)?);
            } else {
                for r in &reports {
                    println!("{}", r.line());
                }
            }
            Ok(reports.iter().all(|r| r.passed))
        }
        Command::Eq { mode, b, w, alpha, m, n } => {
            let m = m.unwrap_or(b.len());
            let bands = match b.len() {
                1 => vec![b[0]; m],
                len if len == m => b,
                len => bail!("--B lists {len} bands but --M is {m}"),
            };
            let mode: Mode = mode.into();
            let config = MarketConfig::linear(mode.into(), &bands, n, w.band(), alpha)?;
            let eq = find_equilibrium_with(&config, &opts)?;
            println!("{}", serde_json::to_string_pretty(&eq)?);
            Ok(eq.converged)
        }
    }
}
