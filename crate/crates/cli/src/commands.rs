//! Subcommand implementations, kept separate from argument parsing.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, bail, Context, Result};
use hermite_vlasov::analysis::auto_window;
use hermite_vlasov::{
    detect_recurrence, extrapolate_rate, fit_damping_rate, DampingFit, EnergyTrace, ExtrapolationFit,
    SimConfig, Simulation,
};

use crate::config::{apply, KEYS};
use crate::csv_io::{write_snapshot, TraceWriter};

pub const DEFAULT_THRESHOLD: f64 = 10.0;

/// Parses `a:b` with `a < b`.
pub fn parse_window(s: &str) -> Result<(f64, f64)> {
    let (a, b) = s.split_once(':').ok_or_else(|| anyhow!("window must look like `a:b`, got `{s}`"))?;
    let a: f64 = a.trim().parse().with_context(|| format!("bad window start `{a}`"))?;
    let b: f64 = b.trim().parse().with_context(|| format!("bad window end `{b}`"))?;
    if !(a < b) {
        bail!("window start {a} must be below its end {b}");
    }
    Ok((a, b))
}

/// Parses `key=v1,v2,...` for a known configuration key.
pub fn parse_vary(s: &str) -> Result<(String, Vec<String>)> {
    let (key, values) = s.split_once('=').ok_or_else(|| anyhow!("--vary must look like `key=v1,v2,...`"))?;
    let key = key.trim();
    if !KEYS.contains(&key) {
        bail!("unknown key `{key}`");
    }
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).filter(|v| !v.is_empty()).collect();
    if values.is_empty() {
        bail!("--vary needs at least one value");
    }
    Ok((key.to_string(), values))
}

/// Rows of a fit window: the explicit one, or the peak-growing default that
/// stops at the first departure by more than `threshold`.
pub fn choose_window(trace: &EnergyTrace, window: Option<(f64, f64)>, threshold: f64) -> (f64, f64) {
    window.unwrap_or_else(|| auto_window(trace, threshold))
}

pub fn fit(trace: &EnergyTrace, window: Option<(f64, f64)>, threshold: f64) -> Result<DampingFit> {
    let w = choose_window(trace, window, threshold);
    Ok(fit_damping_rate(trace, w)?)
}

pub fn format_fit(fit: &DampingFit) -> String {
    format!("gamma={:.16e} peaks={} residual={:e}", fit.gamma, fit.peaks.len(), fit.residual)
}

pub fn recurrence(trace: &EnergyTrace, window: Option<(f64, f64)>, threshold: f64) -> Result<(f64, f64)> {
    let f = fit(trace, window, threshold)?;
    Ok(detect_recurrence(trace, &f, threshold)?)
}

pub struct RunOutcome {
    pub steps: usize,
    pub time: f64,
}

/// Runs `config`, streaming every `every`-th trace row to `out`. On a solver
/// failure the grid at the failing step is written to `dump` before the
/// error is returned.
pub fn run(config: &SimConfig, out: &mut dyn Write, every: usize, dump: Option<&Path>) -> Result<RunOutcome> {
    let mut sim = Simulation::new(config.clone())?;
    let mut writer = TraceWriter::new(out, every)?;
    let mut io_error = None;
    let result = sim.run_with(|row| {
        if io_error.is_none() {
            io_error = writer.push(row).err();
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    writer.finish()?;
    if let Err(e) = result {
        if let Some(path) = dump {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            write_snapshot(BufWriter::new(file), &sim.grid)?;
            return Err(anyhow!(e).context(format!("state at failure written to {}", path.display())));
        }
        return Err(e.into());
    }
    Ok(RunOutcome { steps: sim.steps, time: sim.grid.time })
}

pub fn default_dump(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".state.csv");
    out.with_file_name(name)
}

pub struct SweepRow {
    pub value: String,
    pub dx: f64,
    pub fit: Result<DampingFit>,
}

/// Runs one simulation per value of `key` on up to `threads` workers and
/// fits each trace. Rows come back in the order of `values`.
pub fn sweep(
    base: &SimConfig,
    key: &str,
    values: &[String],
    threads: usize,
    window: Option<(f64, f64)>,
    threshold: f64,
) -> Result<Vec<SweepRow>> {
    let mut configs = Vec::with_capacity(values.len());
    for v in values {
        let mut c = base.clone();
        apply(&mut c, key, v)?;
        c.validate().with_context(|| format!("{key} = {v}"))?;
        configs.push(c);
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<DampingFit>>>> = configs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|s| {
        for _ in 0..threads.clamp(1, configs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(c) = configs.get(i) else { break };
                let result = hermite_vlasov::run(c)
                    .map_err(anyhow::Error::from)
                    .and_then(|trace| fit(&trace, window, threshold));
                *slots[i].lock().unwrap() = Some(result);
            });
        }
    });
    Ok(values
        .iter()
        .zip(&configs)
        .zip(slots)
        .map(|((v, c), slot)| SweepRow {
            value: v.clone(),
            dx: c.dx(),
            fit: slot.into_inner().unwrap().expect("every sweep slot is filled"),
        })
        .collect())
}

pub fn extrapolate(rows: &[SweepRow]) -> Result<ExtrapolationFit> {
    let mut pts = Vec::with_capacity(rows.len());
    for r in rows {
        match &r.fit {
            Ok(f) => pts.push((r.dx, f.gamma)),
            Err(e) => bail!("cannot extrapolate, {}: {e}", r.value),
        }
    }
    Ok(extrapolate_rate(&pts)?)
}
