use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use hermite_vlasov_cli::commands::{self, DEFAULT_THRESHOLD};
use hermite_vlasov_cli::{config, csv_io};

/// Regularized Hermite moment solver for 1D Vlasov-Poisson(-BGK).
#[derive(Parser)]
#[command(name = "vlasov-hme", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one configuration and write its energy trace as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Trace file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep every n-th trace row (the last row is always kept).
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// Grid snapshot written if the run aborts; defaults to
        /// `<out stem>.state.csv` next to the trace.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Fit the damping rate of a trace.
    Fit {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Run a configuration over a list of values of one key and fit each.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// `key=v1,v2,...`
        #[arg(long)]
        vary: String,
        /// Fit `gamma = gamma0 + gamma1 * dx` through the results.
        #[arg(long)]
        extrapolate: bool,
        /// Worker threads; defaults to the available parallelism.
        #[arg(long)]
        threads: Option<usize>,
        /// Also write the table as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        fit: FitArgs,
    },
    /// Locate the recurrence bracket of a trace.
    Recurrence {
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        fit: FitArgs,
    },
}

#[derive(Args)]
struct FitArgs {
    /// Fit window `a:b`; by default the envelope is grown until a peak
    /// departs from it by more than the threshold.
    #[arg(long, value_parser = commands::parse_window)]
    window: Option<(f64, f64)>,
    /// Departure factor for the default window and recurrence detection.
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
}

fn read_trace(path: &PathBuf) -> Result<hermite_vlasov::EnergyTrace> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    csv_io::read_trace(io::BufReader::new(file)).with_context(|| format!("reading {}", path.display()))
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out, every, dump } => {
            let cfg = config::load(&config)?;
            let dump = dump.or_else(|| out.as_deref().map(commands::default_dump));
            let outcome = match &out {
                Some(path) => {
                    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
                    commands::run(&cfg, &mut BufWriter::new(file), every, dump.as_deref())?
                }
                None => commands::run(&cfg, &mut io::stdout().lock(), every, dump.as_deref())?,
            };
            eprintln!("{} steps, t = {}", outcome.steps, outcome.time);
        }
        Command::Fit { trace, fit } => {
            let trace = read_trace(&trace)?;
            let f = commands::fit(&trace, fit.window, fit.threshold)?;
            println!("{}", commands::format_fit(&f));
        }
        Command::Sweep { config, vary, extrapolate, threads, out, fit } => {
            let base = config::load(&config)?;
            let (key, values) = commands::parse_vary(&vary)?;
            let threads = threads.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let rows = commands::sweep(&base, &key, &values, threads, fit.window, fit.threshold)?;
            let mut table = csv::Writer::from_writer(Vec::new());
            table.write_record([key.as_str(), "dx", "gamma", "peaks", "residual"])?;
            let stdout = io::stdout();
            let mut stdout = stdout.lock();
            for r in &rows {
                match &r.fit {
                    Ok(f) => {
                        writeln!(stdout, "{key}={} dx={:e} {}", r.value, r.dx, commands::format_fit(f))?;
                        table.write_record([
                            r.value.clone(),
                            format!("{:.16e}", r.dx),
                            format!("{:.16e}", f.gamma),
                            f.peaks.len().to_string(),
                            format!("{:e}", f.residual),
                        ])?;
                    }
                    Err(e) => writeln!(stdout, "{key}={} dx={:e} error: {e:#}", r.value, r.dx)?,
                }
            }
            if let Some(path) = out {
                std::fs::write(&path, table.into_inner()?).with_context(|| format!("cannot write {}", path.display()))?;
            }
            if rows.iter().any(|r| r.fit.is_err()) {
                anyhow::bail!("some sweep runs failed");
            }
            if extrapolate {
                let e = commands::extrapolate(&rows)?;
                writeln!(stdout, "gamma0={:.16e} gamma1={:.16e} residual={:e}", e.gamma0, e.gamma1, e.residual)?;
            }
        }
        Command::Recurrence { trace, fit } => {
            let trace = read_trace(&trace)?;
            let (lo, hi) = commands::recurrence(&trace, fit.window, fit.threshold)?;
            println!("t_lo={lo:.16e} t_hi={hi:.16e} midpoint={:.16e}", 0.5 * (lo + hi));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
