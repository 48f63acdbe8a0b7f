//! Basis manipulations: change of expansion frame, re-expansion about the
//! local equilibrium, and multiplication by `v_1`.
//!
//! Moving a truncated expansion from frame `(u₁, θ₁)` to `(u₂, θ₂)` is the
//! solution at `τ = 1` of the triangular linear system
//!
//! ```text
//! dF_α/dτ = Σ_d S(τ)² [ θ₁ R(τ) F_{α−2e_d} + w_d √θ₁ F_{α−e_d} ],   F_α(0) = f_α
//! w = (u₁ − u₂)/√θ₂,  û = √(θ₁/θ₂),  R = (û−1)/((û−1)τ+1),  S = 1 − τR
//! ```
//!
//! The lowering operators `F ↦ F_{·−e_d}` commute, and the substitution
//! `σ = τS` (with `dσ = S² dτ`) makes the right side polynomial in `σ`, so
//! the flow integrates exactly to
//!
//! ```text
//! F(1) = exp( Σ_d (u₁_d − u₂_d) L_d + ½(θ₁ − θ₂) Σ_d L_d² ) f
//! ```
//!
//! where `(L_d f)_α = f_{α−e_d}`. That operator factorizes over dimensions
//! into one-dimensional lower-triangular Toeplitz convolutions, which is
//! what [`project`] applies. No step-size error is involved, and every
//! polynomial moment of degree `≤ M` is preserved to rounding.

use alloc::vec::Vec;

use crate::error::{positive, Error};
use crate::moments::{macroscopic, CellState, IndexSet, MAX_DIM, NONE};

/// Terms of the transfer series below this magnitude are dropped. The
/// coefficients are `O(ρ)` at most, so the truncation error sits far below
/// rounding of the conserved moments.
const SERIES_FLOOR: f64 = 1e-24;

/// Taylor coefficients `c_k` of `exp(a·x + b·x²)`, `k ≤ order`:
/// `c_0 = 1`, `c_1 = a`, `(k+1)c_{k+1} = a c_k + 2b c_{k−1}`.
///
/// For `|a| + 2|b| ≤ 2` the recursion gives `|c_{k+1}| ≤ max(|c_k|, |c_{k−1}|)`
/// once `k ≥ 1`, so the series is cut after two consecutive terms below
/// [`SERIES_FLOOR`]. Nearby frames then cost only a handful of terms.
///
/// `recip` caches `1/k`.
fn transfer_series(a: f64, b: f64, order: usize, out: &mut Vec<f64>, recip: &mut Vec<f64>) {
    while recip.len() <= order {
        let k = recip.len();
        recip.push(if k == 0 { 0.0 } else { 1.0 / k as f64 });
    }
    out.clear();
    out.push(1.0);
    if order == 0 {
        return;
    }
    out.push(a);
    let may_truncate = a.abs() + 2.0 * b.abs() <= 2.0;
    let two_b = 2.0 * b;
    let (mut prev, mut cur) = (1.0, a);
    for &r in &recip[2..=order] {
        let next = (a * cur + two_b * prev) * r;
        if may_truncate && next.abs() < SERIES_FLOOR && cur.abs() < SERIES_FLOOR {
            break;
        }
        out.push(next);
        prev = cur;
        cur = next;
    }
}

/// Reusable buffers for frame changes.
#[derive(Debug, Clone, Default)]
pub struct ProjectionScratch {
    series: Vec<f64>,
    recip: Vec<f64>,
    tmp: Vec<f64>,
}

/// Writes into `out` the coefficients of `src` (given in frame
/// `(u1, theta1)`) re-expanded in frame `(u2, theta2)`.
pub fn project_coeffs(
    basis: &IndexSet,
    src: &[f64],
    u1: &[f64; MAX_DIM],
    theta1: f64,
    u2: &[f64; MAX_DIM],
    theta2: f64,
    out: &mut [f64],
    scratch: &mut ProjectionScratch,
) {
    let dim = basis.dim();
    let order = basis.order();
    let b = 0.5 * (theta1 - theta2);
    if dim == 1 {
        let a = u1[0] - u2[0];
        if a == 0.0 && b == 0.0 {
            out.copy_from_slice(src);
            return;
        }
        transfer_series(a, b, order, &mut scratch.series, &mut scratch.recip);
        // out[n] = Σ_k c_k src[n−k], accumulated as shifted axpy sweeps
        let src = &src[..=order];
        let out = &mut out[..=order];
        out.copy_from_slice(src);
        for (k, &ck) in scratch.series.iter().enumerate().skip(1) {
            for (o, s) in out[k..].iter_mut().zip(src) {
                *o += ck * s;
            }
        }
        return;
    }

    // one lower-triangular convolution per velocity direction
    out.copy_from_slice(src);
    scratch.tmp.resize(src.len(), 0.0);
    for d in 0..dim {
        let a = u1[d] - u2[d];
        // the θ part is applied once per direction, Σ_d L_d² splits evenly
        if a == 0.0 && b == 0.0 {
            continue;
        }
        transfer_series(a, b, order, &mut scratch.series, &mut scratch.recip);
        scratch.tmp.copy_from_slice(out);
        for i in 0..basis.len() {
            let mut acc = scratch.series[0] * scratch.tmp[i];
            let mut j = basis.down(i, d);
            let mut k = 1;
            while j != NONE && k < scratch.series.len() {
                acc += scratch.series[k] * scratch.tmp[j];
                j = basis.down(j, d);
                k += 1;
            }
            out[i] = acc;
        }
    }
}

/// Re-expands `cell` in the frame `(u2, theta2)`, preserving every velocity
/// moment of degree `≤ M`.
pub fn project(basis: &IndexSet, cell: &CellState, u2: [f64; MAX_DIM], theta2: f64) -> Result<CellState, Error> {
    positive("theta2", theta2)?;
    let mut out = CellState::zeros(basis, u2, theta2);
    let mut scratch = ProjectionScratch::default();
    project_coeffs(basis, &cell.coeffs, &cell.u, cell.theta, &u2, theta2, &mut out.coeffs, &mut scratch);
    Ok(out)
}

/// Moves a cell to its own equilibrium frame, where `f_{e_i} = 0` and
/// `Σ_d f_{2e_d} = 0`.
pub fn reexpand_equilibrium(basis: &IndexSet, cell: &CellState) -> Result<CellState, Error> {
    let m = macroscopic(basis, cell)?;
    positive("theta", m.theta)?;
    let mut out = project(basis, cell, m.u, m.theta)?;
    snap_equilibrium(basis, &mut out.coeffs);
    Ok(out)
}

/// Clears the roundoff left in the coefficients that vanish by definition
/// in an equilibrium frame.
fn snap_equilibrium(basis: &IndexSet, coeffs: &mut [f64]) {
    let dim = basis.dim();
    let mut trace = 0.0;
    for d in 0..dim {
        coeffs[basis.unit(d)] = 0.0;
        trace += coeffs[basis.double_unit(d)];
    }
    let excess = trace / dim as f64;
    for d in 0..dim {
        coeffs[basis.double_unit(d)] -= excess;
    }
}

/// In-place variant of [`reexpand_equilibrium`] used by the time loop.
pub(crate) fn reexpand_in_place(
    basis: &IndexSet,
    cell: &mut CellState,
    buf: &mut Vec<f64>,
    scratch: &mut ProjectionScratch,
) -> Result<(), Error> {
    let m = macroscopic(basis, cell)?;
    positive("theta", m.theta)?;
    buf.resize(cell.coeffs.len(), 0.0);
    project_coeffs(basis, &cell.coeffs, &cell.u, cell.theta, &m.u, m.theta, buf, scratch);
    snap_equilibrium(basis, buf);
    core::mem::swap(&mut cell.coeffs, buf);
    cell.u = m.u;
    cell.theta = m.theta;
    Ok(())
}

/// Coefficients of `v_1·f` in the frame of `f`:
/// `out_α = θ f_{α−e_1} + u_1 f_α + (α_1+1) f_{α+e_1}`, where the
/// `f_{α+e_1}` term is dropped when `|α| = M`.
pub fn multiply_v1_coeffs(basis: &IndexSet, src: &[f64], u1: f64, theta: f64, out: &mut [f64]) {
    if basis.dim() == 1 {
        let m = basis.order();
        let (src, out) = (&src[..=m], &mut out[..=m]);
        for (o, s) in out.iter_mut().zip(src) {
            *o = u1 * s;
        }
        for (o, s) in out[1..].iter_mut().zip(src) {
            *o += theta * s;
        }
        let mut factor = 1.0;
        for (o, s) in out.iter_mut().zip(&src[1..]) {
            *o += factor * s;
            factor += 1.0;
        }
        return;
    }
    for i in 0..basis.len() {
        let mut acc = u1 * src[i];
        let dn = basis.down(i, 0);
        if dn != NONE {
            acc += theta * src[dn];
        }
        let up = basis.up(i, 0);
        if up != NONE {
            acc += (basis.get(i).component(0) + 1) as f64 * src[up];
        }
        out[i] = acc;
    }
}

pub fn multiply_v1_truncate(basis: &IndexSet, cell: &CellState) -> CellState {
    let mut out = CellState::zeros(basis, cell.u, cell.theta);
    multiply_v1_coeffs(basis, &cell.coeffs, cell.u[0], cell.theta, &mut out.coeffs);
    out
}
