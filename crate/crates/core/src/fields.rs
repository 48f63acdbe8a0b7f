//! Electrostatic field on the periodic grid, the acceleration sub-step and
//! BGK relaxation.

use alloc::vec::Vec;

use crate::error::{positive, Error};
use crate::moments::GridState;
use crate::math::{abs, exp};

/// Charge, mass and permittivity of the species. All default to 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChargeParams {
    pub q: f64,
    pub m: f64,
    pub eps0: f64,
}

impl Default for ChargeParams {
    fn default() -> Self {
        Self { q: 1.0, m: 1.0, eps0: 1.0 }
    }
}

impl ChargeParams {
    pub fn validate(&self) -> Result<(), Error> {
        positive("m", self.m)?;
        positive("eps0", self.eps0)?;
        if !self.q.is_finite() {
            return Err(Error::OutOfRange { name: "q", value: self.q });
        }
        Ok(())
    }
}

/// Potential and field at the cell centres.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub psi: Vec<f64>,
    pub efield: Vec<f64>,
    pub params: ChargeParams,
}

impl FieldState {
    /// Solves for the potential of the grid's charge density and
    /// differentiates it.
    pub fn compute(grid: &GridState, params: ChargeParams) -> Result<Self, Error> {
        let psi = solve_poisson(&grid.densities(), grid.dx, params)?;
        let efield = electric_field(&psi, grid.dx);
        Ok(Self { psi, efield, params })
    }
}

fn mean(xs: &[f64]) -> f64 {
    // pairwise-free but compensated; N is at most a few thousand
    let mut sum = 0.0;
    let mut c = 0.0;
    for &x in xs {
        let y = x - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum / xs.len() as f64
}

/// Solves `−(ψ_{j+1} − 2ψ_j + ψ_{j−1})/Δx² = r_j` on a periodic grid with
/// `Σψ_j = 0`.
///
/// The right side must have zero mean up to `1e-10·max(1, max|r|)`; the
/// residual mean is removed before solving. The solve is a direct
/// two-pass recurrence on the first differences `ψ_{j+1} − ψ_j`.
pub fn solve_periodic_laplacian(rhs: &[f64], dx: f64) -> Result<Vec<f64>, Error> {
    positive("dx", dx)?;
    let n = rhs.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = rhs.iter().fold(1.0f64, |m, x| m.max(abs(*x)));
    let mu = mean(rhs);
    if !mu.is_finite() || abs(mu) > 1e-10 * scale {
        return Err(Error::Unsolvable { mean: mu });
    }
    let h2 = dx * dx;
    // s_j = Σ_{i≤j} (r_i − μ); differences g_j = ψ_{j+1} − ψ_j = G − Δx² s_j
    let mut g = Vec::with_capacity(n);
    let mut s = 0.0;
    for &r in rhs {
        s += r - mu;
        g.push(-h2 * s);
    }
    let shift = -mean(&g);
    let mut psi = Vec::with_capacity(n);
    let mut acc = 0.0;
    for gj in &g {
        psi.push(acc);
        acc += gj + shift;
    }
    let offset = mean(&psi);
    for p in &mut psi {
        *p -= offset;
    }
    Ok(psi)
}

/// Potential of `ρ`: `−Δ_h ψ = (q/ε₀)(ρ − ρ̄)`.
///
/// The neutralizing background `ρ̄` is the mean density, which equals 1 for
/// the normalized initial data and keeps the periodic problem solvable
/// regardless of roundoff in the total mass.
pub fn solve_poisson(rho: &[f64], dx: f64, params: ChargeParams) -> Result<Vec<f64>, Error> {
    params.validate()?;
    let background = mean(rho);
    let c = params.q / params.eps0;
    let rhs: Vec<f64> = rho.iter().map(|r| c * (r - background)).collect();
    solve_periodic_laplacian(&rhs, dx)
}

/// `E_j = −(ψ_{j+1} − ψ_{j−1}) / 2Δx`, periodic.
pub fn electric_field(psi: &[f64], dx: f64) -> Vec<f64> {
    let n = psi.len();
    (0..n)
        .map(|j| -(psi[(j + 1) % n] - psi[(j + n - 1) % n]) / (2.0 * dx))
        .collect()
}

/// Moves every expansion centre: `u_1 ← u_1 + Δt (q/m) E_j`.
/// The coefficients are untouched.
pub fn acceleration_step(grid: &mut GridState, efield: &[f64], dt: f64, params: ChargeParams) -> Result<(), Error> {
    positive("dt", dt)?;
    if efield.len() != grid.len() {
        return Err(Error::LengthMismatch { expected: grid.len(), found: efield.len() });
    }
    let a = dt * params.q / params.m;
    for (cell, e) in grid.cells.iter_mut().zip(efield) {
        cell.u[0] += a * e;
    }
    Ok(())
}

/// Exact BGK relaxation in equilibrium frames: `f_α ← e^{−νΔt} f_α` for
/// `|α| ≥ 2`.
pub fn bgk_step(grid: &mut GridState, nu: f64, dt: f64) -> Result<(), Error> {
    if !(nu >= 0.0) {
        return Err(Error::OutOfRange { name: "nu", value: nu });
    }
    positive("dt", dt)?;
    if nu == 0.0 {
        return Ok(());
    }
    let decay = exp(-nu * dt);
    let first = 1 + grid.basis.dim();
    for cell in &mut grid.cells {
        for c in &mut cell.coeffs[first..] {
            *c *= decay;
        }
    }
    Ok(())
}
