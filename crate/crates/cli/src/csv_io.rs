//! Trace and grid snapshot CSV files.

use std::io::{Read, Write};

use anyhow::{bail, Context, Result};
use hermite_vlasov::{EnergyTrace, GridState, TraceRow};

pub const TRACE_HEADER: [&str; 6] = ["t", "E_h", "E_p", "E_total", "mass", "momentum"];
pub const SNAPSHOT_HEADER: [&str; 4] = ["x", "rho", "u1", "theta"];

fn full(x: f64) -> String {
    format!("{x:.16e}")
}

/// Streams trace rows, keeping every `every`-th row plus the last one.
pub struct TraceWriter<W: Write> {
    out: csv::Writer<W>,
    every: usize,
    seen: usize,
    pending: Option<TraceRow>,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W, every: usize) -> Result<Self> {
        let mut out = csv::Writer::from_writer(out);
        out.write_record(TRACE_HEADER)?;
        Ok(Self { out, every: every.max(1), seen: 0, pending: None })
    }

    pub fn push(&mut self, row: &TraceRow) -> Result<()> {
        if self.seen % self.every == 0 {
            self.write(row)?;
            self.pending = None;
        } else {
            self.pending = Some(*row);
        }
        self.seen += 1;
        Ok(())
    }

    fn write(&mut self, r: &TraceRow) -> Result<()> {
        self.out.write_record([r.t, r.e_h, r.e_p, r.e_total, r.mass, r.momentum].map(full))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        if let Some(r) = self.pending.take() {
            self.write(&r)?;
        }
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_trace<W: Write>(out: W, trace: &EnergyTrace) -> Result<()> {
    let mut w = TraceWriter::new(out, 1)?;
    for r in &trace.rows {
        w.push(r)?;
    }
    w.finish()
}

pub fn read_trace<R: Read>(input: R) -> Result<EnergyTrace> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
    let header = rd.headers()?.clone();
    if header.iter().ne(TRACE_HEADER) {
        bail!("trace header must be `{}`", TRACE_HEADER.join(","));
    }
    let mut trace = EnergyTrace::default();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec?;
        let mut v = [0.0; 6];
        for (slot, field) in v.iter_mut().zip(rec.iter()) {
            *slot = field.parse().with_context(|| format!("trace row {}: bad number `{field}`", i + 1))?;
        }
        if rec.len() != 6 {
            bail!("trace row {}: expected 6 fields, found {}", i + 1, rec.len());
        }
        if let Some(last) = trace.rows.last() {
            if !(v[0] > last.t) {
                bail!("trace row {}: times must increase", i + 1);
            }
        }
        trace.rows.push(TraceRow { t: v[0], e_h: v[1], e_p: v[2], e_total: v[3], mass: v[4], momentum: v[5] });
    }
    Ok(trace)
}

/// Cell centres with density, velocity and thermal velocity.
pub fn write_snapshot<W: Write>(out: W, grid: &GridState) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SNAPSHOT_HEADER)?;
    for (j, c) in grid.cells.iter().enumerate() {
        w.write_record([grid.center(j), c.coeffs[0], c.u[0], c.theta].map(full))?;
    }
    w.flush()?;
    Ok(())
}
