//! Operator-split time loop: transport, field and acceleration, collisions.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::PI;

pub use crate::convection::Closure;
use crate::convection::ConvectionWorkspace;
use crate::error::{positive, Error};
use crate::fields::{acceleration_step, bgk_step, ChargeParams, FieldState};
use crate::hermite::greatest_zero;
use crate::moments::{CellState, GridState, IndexSet, MAX_DIM};
use crate::math::{abs, cos, sqrt};

/// Parameters of a linear Landau damping run.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Expansion order `M ≥ 3`.
    pub order: usize,
    /// Velocity dimension `D ∈ {1, 2, 3}`.
    pub dim: usize,
    /// Number of cells `N`.
    pub cells: usize,
    /// Wave number of the perturbation; the domain is `[0, 2π/k)`.
    pub k: f64,
    /// Perturbation amplitude `A`.
    pub amplitude: f64,
    /// BGK collision frequency.
    pub nu: f64,
    pub cfl: f64,
    pub t_end: f64,
    pub charge: ChargeParams,
    pub closure: Closure,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            order: 40,
            dim: 1,
            cells: 128,
            k: 0.5,
            amplitude: 0.01,
            nu: 0.0,
            cfl: 0.45,
            t_end: 30.0,
            charge: ChargeParams::default(),
            closure: Closure::Regularized,
        }
    }
}

impl SimConfig {
    /// Domain length `2π/k`.
    pub fn length(&self) -> f64 {
        2.0 * PI / self.k
    }

    pub fn dx(&self) -> f64 {
        self.length() / self.cells as f64
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.order < 3 {
            return Err(Error::OrderTooLow(self.order));
        }
        if !(1..=MAX_DIM).contains(&self.dim) {
            return Err(Error::BadDimension(self.dim));
        }
        if self.cells == 0 {
            return Err(Error::OutOfRange { name: "N", value: 0.0 });
        }
        positive("k", self.k)?;
        positive("t_end", self.t_end)?;
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::OutOfRange { name: "cfl", value: self.cfl });
        }
        if !(self.nu >= 0.0) || !self.nu.is_finite() {
            return Err(Error::OutOfRange { name: "nu", value: self.nu });
        }
        if !(abs(self.amplitude) < 1.0) {
            return Err(Error::OutOfRange { name: "A", value: self.amplitude });
        }
        self.charge.validate()
    }
}

/// Grid with `f_0 = 1 + A cos(k x_j)` at the cell centres, `u = 0`, `θ = 1`
/// and all higher coefficients zero.
pub fn initialize(config: &SimConfig) -> Result<GridState, Error> {
    config.validate()?;
    let basis = IndexSet::new(config.order, config.dim)?;
    let dx = config.dx();
    let cells = (0..config.cells)
        .map(|j| {
            let x = (j as f64 + 0.5) * dx;
            let mut c = CellState::zeros(&basis, [0.0; MAX_DIM], 1.0);
            c.coeffs[0] = 1.0 + config.amplitude * cos(config.k * x);
            c
        })
        .collect();
    Ok(GridState { basis, cells, dx, length: config.length(), time: 0.0 })
}

fn max_speed(grid: &GridState, c: f64) -> f64 {
    grid.cells
        .iter()
        .map(|cell| abs(cell.u[0]) + c * sqrt(cell.theta))
        .fold(0.0, f64::max)
}

/// `Δt = cfl·Δx / max_j(|u_{1,j}| + C_{M+1}√θ_j)`.
pub fn cfl_timestep(grid: &GridState, config: &SimConfig) -> Result<f64, Error> {
    let speed = max_speed(grid, greatest_zero(grid.basis.order() + 1));
    if !(speed > 0.0) || !speed.is_finite() {
        return Err(Error::DegenerateSpeed);
    }
    Ok(config.cfl * grid.dx / speed)
}

/// One row of the energy trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub t: f64,
    /// Electric energy `Σ Δx E_j²`.
    pub e_h: f64,
    /// Particle energy `Δx Σ (ρ|u|² + Dρθ)`.
    pub e_p: f64,
    pub e_total: f64,
    pub mass: f64,
    pub momentum: f64,
}

/// Time series of [`TraceRow`]s.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EnergyTrace {
    pub rows: Vec<TraceRow>,
}

impl EnergyTrace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    /// `√E_h` for each row, the quantity whose peaks are fitted.
    pub fn field_amplitude(&self) -> Vec<f64> {
        self.rows.iter().map(|r| sqrt(r.e_h)).collect()
    }

    /// Largest `|x(t) − x(0)| / |x(0)|` of the chosen column.
    pub fn max_relative_drift(&self, column: impl Fn(&TraceRow) -> f64) -> f64 {
        let Some(first) = self.rows.first() else { return 0.0 };
        let x0 = column(first);
        let scale = if x0 == 0.0 { 1.0 } else { abs(x0) };
        self.rows.iter().map(|r| abs(column(r) - x0) / scale).fold(0.0, f64::max)
    }
}

/// Energies and conserved totals for `grid` with field `efield`.
pub fn diagnostics(grid: &GridState, efield: &[f64]) -> TraceRow {
    let dx = grid.dx;
    let e_h = dx * efield.iter().map(|e| e * e).sum::<f64>();
    let dim = grid.basis.dim() as f64;
    let e_p = dx
        * grid
            .cells
            .iter()
            .map(|c| {
                let rho = c.coeffs[0];
                let u2: f64 = c.u.iter().map(|u| u * u).sum();
                rho * u2 + dim * rho * c.theta
            })
            .sum::<f64>();
    TraceRow {
        t: grid.time,
        e_h,
        e_p,
        e_total: e_h + e_p,
        mass: grid.mass(),
        momentum: grid.momentum(),
    }
}

/// A running simulation: grid, current field and reusable buffers.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: SimConfig,
    pub grid: GridState,
    pub field: FieldState,
    /// Completed steps.
    pub steps: usize,
    speed_constant: f64,
    workspace: ConvectionWorkspace,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self, Error> {
        let grid = initialize(&config)?;
        let field = FieldState::compute(&grid, config.charge)?;
        let speed_constant = greatest_zero(config.order + 1);
        Ok(Self { config, grid, field, steps: 0, speed_constant, workspace: ConvectionWorkspace::new() })
    }

    fn timestep(&self) -> Result<f64, Error> {
        let speed = max_speed(&self.grid, self.speed_constant);
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(Error::DegenerateSpeed);
        }
        Ok(self.config.cfl * self.grid.dx / speed)
    }

    fn advance(&mut self) -> Result<f64, Error> {
        let dt = self.timestep()?;
        self.workspace.step(&mut self.grid, dt, self.config.closure)?;
        self.field = FieldState::compute(&self.grid, self.config.charge)?;
        acceleration_step(&mut self.grid, &self.field.efield, dt, self.config.charge)?;
        if self.config.nu > 0.0 {
            bgk_step(&mut self.grid, self.config.nu, dt)?;
        }
        self.grid.time += dt;
        Ok(dt)
    }

    /// Advances one split step and returns its `Δt`. Failures carry the
    /// index of the step that failed; the grid is left as it was when the
    /// failure was detected.
    pub fn step(&mut self) -> Result<f64, Error> {
        match self.advance() {
            Ok(dt) => {
                self.steps += 1;
                Ok(dt)
            }
            Err(e) => Err(Error::StepFailed { step: self.steps + 1, source: Box::new(e) }),
        }
    }

    pub fn diagnostics(&self) -> TraceRow {
        diagnostics(&self.grid, &self.field.efield)
    }

    /// Steps until `t ≥ t_end`, handing every row (including `t = 0`) to
    /// `observe`.
    pub fn run_with(&mut self, mut observe: impl FnMut(&TraceRow)) -> Result<(), Error> {
        observe(&self.diagnostics());
        while self.grid.time < self.config.t_end {
            self.step()?;
            observe(&self.diagnostics());
        }
        Ok(())
    }

    /// Steps until `t ≥ t_end`, recording every step.
    pub fn run_trace(&mut self) -> Result<EnergyTrace, Error> {
        let mut trace = EnergyTrace::default();
        self.run_with(|row| trace.rows.push(*row))?;
        Ok(trace)
    }
}

/// Runs `config` from its initial state and returns the full trace.
pub fn run(config: &SimConfig) -> Result<EnergyTrace, Error> {
    Simulation::new(config.clone())?.run_trace()
}
