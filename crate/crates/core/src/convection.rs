//! Finite-volume transport `∂_t f + v_1 ∂_x f = 0` on the periodic grid.
//!
//! Each cell is advanced in its own expansion frame:
//!
//! ```text
//! f_j ← f_j − (Δt/Δx)(F_{j+1/2} − F_{j−1/2}) + K2_j
//! ```
//!
//! where both interface fluxes are HLL fluxes evaluated in the frame of cell
//! `j`, and `K2_j` is the regularization that replaces the order-`M+1`
//! closure terms on the top-order coefficients. Afterwards every cell is
//! re-expanded about its new equilibrium.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::hermite::greatest_zero;
use crate::moments::{CellState, GridState, IndexSet, MAX_DIM, NONE};
use crate::projection::{multiply_v1_coeffs, project_coeffs, reexpand_in_place, ProjectionScratch};
use crate::math::sqrt;

/// How the order-`M+1` terms of the moment hierarchy are closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Closure {
    /// Globally hyperbolic regularization of the top-order equations.
    #[default]
    Regularized,
    /// Plain truncation (Grad-type); kept for comparison runs.
    Grad,
}

#[inline]
fn speeds_with(c: f64, left: &CellState, right: &CellState) -> (f64, f64) {
    let sl = sqrt(left.theta);
    let sr = sqrt(right.theta);
    let lam_l = (left.u[0] - c * sl).min(right.u[0] - c * sr);
    let lam_r = (left.u[0] + c * sl).max(right.u[0] + c * sr);
    (lam_l, lam_r)
}

/// Fastest left/right signal speeds at the interface between two cells,
/// `u_1 ∓ C_{M+1}√θ` extremized over both sides.
pub fn signal_speeds(left: &CellState, right: &CellState, order: usize) -> (f64, f64) {
    speeds_with(greatest_zero(order + 1), left, right)
}

/// Scratch buffers for one interface flux.
#[derive(Debug, Clone, Default)]
struct FluxScratch {
    projected: Vec<f64>,
    mixed: Vec<f64>,
    proj: ProjectionScratch,
}

/// HLL flux of `own` against `other`, written in the frame of `own`.
/// `own_is_left` tells which side of the interface `own` sits on.
fn flux_in_frame(
    basis: &IndexSet,
    own: &CellState,
    other: &CellState,
    own_is_left: bool,
    (lam_l, lam_r): (f64, f64),
    out: &mut [f64],
    s: &mut FluxScratch,
) {
    let n = basis.len();
    s.projected.resize(n, 0.0);
    s.mixed.resize(n, 0.0);
    project_coeffs(basis, &other.coeffs, &other.u, other.theta, &own.u, own.theta, &mut s.projected, &mut s.proj);
    let (fl, fr): (&[f64], &[f64]) =
        if own_is_left { (&own.coeffs, &s.projected) } else { (&s.projected, &own.coeffs) };
    let (u1, th) = (own.u[0], own.theta);
    if lam_l >= 0.0 {
        multiply_v1_coeffs(basis, fl, u1, th, out);
    } else if lam_r <= 0.0 {
        multiply_v1_coeffs(basis, fr, u1, th, out);
    } else {
        let inv = 1.0 / (lam_r - lam_l);
        for ((m, l), r) in s.mixed.iter_mut().zip(fl).zip(fr) {
            *m = (lam_r * l - lam_l * r) * inv;
        }
        multiply_v1_coeffs(basis, &s.mixed, u1, th, out);
        let jump = lam_l * lam_r * inv;
        for ((o, l), r) in out.iter_mut().zip(fl).zip(fr) {
            *o += jump * (r - l);
        }
    }
}

/// HLL flux between `left` and `right`, expressed in `target_frame`.
pub fn hll_flux(
    basis: &IndexSet,
    left: &CellState,
    right: &CellState,
    target_frame: ([f64; MAX_DIM], f64),
) -> CellState {
    let (u, theta) = target_frame;
    let lam = signal_speeds(left, right, basis.order());
    let mut s = FluxScratch::default();
    let mut out = CellState::zeros(basis, u, theta);
    // project the left state into the target frame, then evaluate as "own"
    let mut l = CellState::zeros(basis, u, theta);
    project_coeffs(basis, &left.coeffs, &left.u, left.theta, &u, theta, &mut l.coeffs, &mut s.proj);
    flux_in_frame(basis, &l, right, true, lam, &mut out.coeffs, &mut s);
    out
}

/// Centred differences `(g_{j+1} − g_{j−1}) / 2Δx` of `u_d` and `θ`.
fn centred_gradients(grid: &GridState, j: usize) -> ([f64; MAX_DIM], f64) {
    let n = grid.len();
    let next = &grid.cells[(j + 1) % n];
    let prev = &grid.cells[(j + n - 1) % n];
    let h = 0.5 / grid.dx;
    let mut du = [0.0; MAX_DIM];
    for d in 0..grid.basis.dim() {
        du[d] = (next.u[d] - prev.u[d]) * h;
    }
    (du, (next.theta - prev.theta) * h)
}

fn add_regularization(basis: &IndexSet, cell: &CellState, du: &[f64; MAX_DIM], dtheta: f64, dt: f64, out: &mut [f64]) {
    let order = basis.order();
    let first = basis.len() - top_order_count(basis);
    for i in first..basis.len() {
        let alpha = basis.get(i);
        debug_assert_eq!(alpha.order(), order);
        let mut acc = 0.0;
        for d in 0..basis.dim() {
            // α − e_d + e_1 and α − 2e_d + e_1 (zero when a component is negative)
            let once = basis.down(i, d);
            if once == NONE {
                continue;
            }
            let shifted = if d == 0 { i } else { basis.up(once, 0) };
            acc += cell.coeffs[shifted] * du[d];
            let twice = basis.down(once, d);
            if twice != NONE {
                acc += 0.5 * cell.coeffs[basis.up(twice, 0)] * dtheta;
            }
        }
        out[i] -= dt * (alpha.component(0) + 1) as f64 * acc;
    }
}

fn top_order_count(basis: &IndexSet) -> usize {
    let order = basis.order();
    basis.indices().iter().rev().take_while(|a| a.order() == order).count()
}

/// Regularization increment `K2_j` for cell `j`; non-zero only at `|α| = M`:
///
/// ```text
/// K2_α = −Δt (α_1+1) Σ_d ( f_{α−e_d+e_1} ∇u_d + ½ f_{α−2e_d+e_1} ∇θ )
/// ```
///
/// with centred periodic differences of the neighbours' frames. It stands in
/// for the frame-derivative terms that the truncated order-`M+1`
/// coefficients would carry, which makes the system hyperbolic with
/// characteristic speeds `u_1 + √θ·(zeros of He_{M+1})`.
pub fn regularization_increment(grid: &GridState, j: usize, dt: f64) -> Vec<f64> {
    let (du, dtheta) = centred_gradients(grid, j);
    let mut out = vec![0.0; grid.basis.len()];
    add_regularization(&grid.basis, &grid.cells[j], &du, dtheta, dt, &mut out);
    out
}

/// Buffers reused across convection steps.
#[derive(Debug, Clone, Default)]
pub struct ConvectionWorkspace {
    /// `own[j]`: flux through `j+1/2` in the frame of cell `j`.
    own: Vec<f64>,
    /// `next[j]`: flux through `j+1/2` in the frame of cell `j+1`.
    next: Vec<f64>,
    grads: Vec<([f64; MAX_DIM], f64)>,
    flux: FluxScratch,
    buf: Vec<f64>,
    speed_const: Option<(usize, f64)>,
}

impl ConvectionWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn speed_constant(&mut self, order: usize) -> f64 {
        match self.speed_const {
            Some((m, c)) if m == order => c,
            _ => {
                let c = greatest_zero(order + 1);
                self.speed_const = Some((order, c));
                c
            }
        }
    }

    /// One transport step of length `dt`, then re-expansion of every cell.
    pub fn step(&mut self, grid: &mut GridState, dt: f64, closure: Closure) -> Result<(), Error> {
        if !(dt > 0.0) {
            return Err(Error::NonPositive { name: "dt", value: dt });
        }
        let n = grid.len();
        let len = grid.basis.len();
        let c = self.speed_constant(grid.basis.order());
        self.own.resize(n * len, 0.0);
        self.next.resize(n * len, 0.0);

        if closure == Closure::Regularized {
            self.grads.clear();
            for j in 0..n {
                let g = centred_gradients(grid, j);
                self.grads.push(g);
            }
        }

        for j in 0..n {
            let left = &grid.cells[j];
            let right = &grid.cells[(j + 1) % n];
            let lam = speeds_with(c, left, right);
            let own = &mut self.own[j * len..(j + 1) * len];
            flux_in_frame(&grid.basis, left, right, true, lam, own, &mut self.flux);
            let next = &mut self.next[j * len..(j + 1) * len];
            flux_in_frame(&grid.basis, right, left, false, lam, next, &mut self.flux);
        }

        let ratio = dt / grid.dx;
        let basis = &grid.basis;
        for j in 0..n {
            let prev = (j + n - 1) % n;
            let cell = &mut grid.cells[j];
            let right = &self.own[j * len..(j + 1) * len];
            let left = &self.next[prev * len..(prev + 1) * len];
            if closure == Closure::Regularized {
                // K2 reads the beginning-of-step coefficients
                self.buf.clear();
                self.buf.resize(len, 0.0);
                let (du, dth) = self.grads[j];
                add_regularization(basis, cell, &du, dth, dt, &mut self.buf);
                for i in 0..len {
                    cell.coeffs[i] += self.buf[i];
                }
            }
            for i in 0..len {
                cell.coeffs[i] -= ratio * (right[i] - left[i]);
            }
        }

        for (j, cell) in grid.cells.iter_mut().enumerate() {
            let rho = cell.coeffs[0];
            if !rho.is_finite() || cell.coeffs.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { cell: j });
            }
            if rho <= 0.0 {
                return Err(Error::Vacuum { cell: Some(j), density: rho });
            }
            reexpand_in_place(basis, cell, &mut self.buf, &mut self.flux.proj).map_err(|e| match e {
                Error::Vacuum { density, .. } => Error::Vacuum { cell: Some(j), density },
                Error::NonPositive { value, .. } => Error::NegativeTemperature { cell: j, theta: value },
                other => other,
            })?;
        }
        Ok(())
    }
}

/// Convenience wrapper around [`ConvectionWorkspace::step`].
pub fn convection_step(grid: &mut GridState, dt: f64, closure: Closure) -> Result<(), Error> {
    ConvectionWorkspace::new().step(grid, dt, closure)
}
