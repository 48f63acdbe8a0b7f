//! Multi-index bookkeeping and the per-cell Hermite state.
//!
//! A cell stores the coefficients `f_α`, `|α| ≤ M`, of
//!
//! ```text
//! f(v) = Σ f_α Π_d (2π)^{-1/2} θ^{-(α_d+1)/2} He_{α_d}(ξ_d) exp(-ξ_d²/2),   ξ = (v − u)/√θ
//! ```
//!
//! in a dense array ordered by total degree and then lexicographically.
//! With this scaling `f_0` is the density and the low coefficients are
//! plain velocity moments about `u`.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{positive, Error};
use crate::hermite::{hermite_fill, SQRT_2PI};
use crate::math::{exp, sqrt};

/// Largest supported velocity dimension.
pub const MAX_DIM: usize = 3;

/// Sentinel for "no such index" in neighbour tables.
pub const NONE: usize = usize::MAX;

/// A multi-index `α ∈ ℕ^D`; unused trailing components are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct MultiIndex(pub [u32; MAX_DIM]);

impl MultiIndex {
    /// `|α| = Σ α_d`.
    pub fn order(&self) -> usize {
        self.0.iter().map(|&a| a as usize).sum()
    }

    pub fn component(&self, d: usize) -> usize {
        self.0[d] as usize
    }

    /// The unit index `e_d`.
    pub fn unit(d: usize) -> Self {
        let mut a = [0; MAX_DIM];
        a[d] = 1;
        MultiIndex(a)
    }
}

/// The truncation set `{α : |α| ≤ M}` in graded-lexicographic order, with
/// neighbour tables for the `α ± e_d` shifts used by every kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct IndexSet {
    order: usize,
    dim: usize,
    indices: Vec<MultiIndex>,
    /// `down[i][d]` = position of `α_i − e_d`, or `NONE`.
    down: Vec<[usize; MAX_DIM]>,
    /// `up[i][d]` = position of `α_i + e_d` if `|α_i| < M`, else `NONE`.
    up: Vec<[usize; MAX_DIM]>,
    lookup: BTreeMap<MultiIndex, usize>,
}

impl IndexSet {
    /// Builds the index set for moment order `order ≥ 3` and velocity
    /// dimension `dim ∈ {1, 2, 3}`.
    pub fn new(order: usize, dim: usize) -> Result<Self, Error> {
        if order < 3 {
            return Err(Error::OrderTooLow(order));
        }
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::BadDimension(dim));
        }
        let mut indices = Vec::new();
        for n in 0..=order {
            let mut level = Vec::new();
            compositions(n as u32, dim, &mut [0; MAX_DIM], 0, &mut level);
            level.sort();
            indices.extend(level);
        }
        let lookup: BTreeMap<_, _> = indices.iter().enumerate().map(|(i, a)| (*a, i)).collect();
        let mut down = vec![[NONE; MAX_DIM]; indices.len()];
        let mut up = vec![[NONE; MAX_DIM]; indices.len()];
        for (i, a) in indices.iter().enumerate() {
            for d in 0..dim {
                if a.0[d] > 0 {
                    let mut b = *a;
                    b.0[d] -= 1;
                    down[i][d] = lookup[&b];
                }
                if a.order() < order {
                    let mut b = *a;
                    b.0[d] += 1;
                    up[i][d] = lookup[&b];
                }
            }
        }
        Ok(IndexSet { order, dim, indices, down, up, lookup })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coefficients, `binomial(M + D, D)`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn get(&self, i: usize) -> MultiIndex {
        self.indices[i]
    }

    /// Position of `α`, or `None` when `|α| > M` or it has a component in an
    /// unused dimension.
    pub fn position(&self, alpha: &MultiIndex) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    /// Position of `α − e_d` (or `NONE`).
    #[inline]
    pub fn down(&self, i: usize, d: usize) -> usize {
        self.down[i][d]
    }

    /// Position of `α + e_d` (or `NONE` when it would exceed order `M`).
    #[inline]
    pub fn up(&self, i: usize, d: usize) -> usize {
        self.up[i][d]
    }

    /// Position of `e_d`.
    pub fn unit(&self, d: usize) -> usize {
        self.lookup[&MultiIndex::unit(d)]
    }

    /// Position of `2e_d`.
    pub fn double_unit(&self, d: usize) -> usize {
        let mut a = [0; MAX_DIM];
        a[d] = 2;
        self.lookup[&MultiIndex(a)]
    }

    /// Coefficient lookup with the convention that indices with a negative
    /// component (or beyond the truncation) read as zero.
    pub fn coeff(&self, coeffs: &[f64], alpha: [i64; MAX_DIM]) -> f64 {
        if alpha.iter().any(|&a| a < 0) {
            return 0.0;
        }
        let a = MultiIndex([alpha[0] as u32, alpha[1] as u32, alpha[2] as u32]);
        self.position(&a).map_or(0.0, |i| coeffs[i])
    }
}

fn compositions(n: u32, dim: usize, buf: &mut [u32; MAX_DIM], d: usize, out: &mut Vec<MultiIndex>) {
    if d + 1 == dim {
        buf[d] = n;
        out.push(MultiIndex(*buf));
        buf[d] = 0;
        return;
    }
    for k in 0..=n {
        buf[d] = k;
        compositions(n - k, dim, buf, d + 1, out);
    }
    buf[d] = 0;
}

/// All multi-indices with `|α| ≤ M` in graded-lexicographic order.
pub fn index_set(order: usize, dim: usize) -> Result<Vec<MultiIndex>, Error> {
    Ok(IndexSet::new(order, dim)?.indices)
}

/// Hermite coefficients of one cell together with their expansion frame.
#[derive(Debug, Clone, PartialEq)]
pub struct CellState {
    pub coeffs: Vec<f64>,
    /// Expansion centre; components past `D` stay zero.
    pub u: [f64; MAX_DIM],
    /// Thermal velocity `u_th` (a squared-velocity scale).
    pub theta: f64,
}

impl CellState {
    /// Cell with all coefficients zero in the given frame.
    pub fn zeros(basis: &IndexSet, u: [f64; MAX_DIM], theta: f64) -> Self {
        CellState { coeffs: vec![0.0; basis.len()], u, theta }
    }

    pub fn density(&self) -> f64 {
        self.coeffs[0]
    }
}

/// Periodic 1-D grid of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub basis: IndexSet,
    pub cells: Vec<CellState>,
    pub dx: f64,
    pub length: f64,
    pub time: f64,
}

impl GridState {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Centre of cell `j`.
    pub fn center(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dx
    }

    pub fn densities(&self) -> Vec<f64> {
        self.cells.iter().map(|c| c.coeffs[0]).collect()
    }

    /// `Σ_j Δx ∫ f_j dv`.
    pub fn mass(&self) -> f64 {
        self.dx * self.cells.iter().map(|c| c.coeffs[0]).sum::<f64>()
    }

    /// `Σ_j Δx ∫ v_1 f_j dv = Σ_j Δx (ρ_j u_{1,j} + f_{e_1,j})`.
    pub fn momentum(&self) -> f64 {
        let e1 = self.basis.unit(0);
        self.dx * self.cells.iter().map(|c| c.coeffs[0] * c.u[0] + c.coeffs[e1]).sum::<f64>()
    }
}

/// Density, velocity and thermal velocity recovered from a cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Macroscopic {
    pub rho: f64,
    pub u: [f64; MAX_DIM],
    pub theta: f64,
}

/// Reconstructs `(ρ, u, θ)` from coefficients stored in an arbitrary frame
/// `(u', θ')`:
///
/// ```text
/// ρ = f_0,   ρu = ρu' + (f_{e_d})_d,
/// ρ|u|² + Dρθ = 2ρ u·u' − ρ|u'|² + Σ_d (θ' f_0 + 2 f_{2e_d})
/// ```
pub fn macroscopic(basis: &IndexSet, cell: &CellState) -> Result<Macroscopic, Error> {
    let rho = cell.coeffs[0];
    if !(rho > 0.0) {
        return Err(Error::Vacuum { cell: None, density: rho });
    }
    let dim = basis.dim();
    let mut u = [0.0; MAX_DIM];
    let mut shift2 = 0.0;
    let mut second = 0.0;
    for d in 0..dim {
        let fe = cell.coeffs[basis.unit(d)];
        u[d] = cell.u[d] + fe / rho;
        shift2 += fe * fe;
        second += cell.coeffs[basis.double_unit(d)];
    }
    // expanded form of the energy relation, avoids cancellation of |u|²
    let theta = cell.theta + (2.0 * second - shift2 / rho) / (dim as f64 * rho);
    Ok(Macroscopic { rho, u, theta })
}

/// Heat flux `q` and pressure tensor `p` of a cell in its equilibrium frame:
/// `q_i = 2f_{3e_i} + Σ_d f_{2e_d+e_i}`, `p_ij = δ_ij ρθ + (1+δ_ij) f_{e_i+e_j}`.
pub fn derived_moments(basis: &IndexSet, cell: &CellState) -> ([f64; MAX_DIM], [[f64; MAX_DIM]; MAX_DIM]) {
    let dim = basis.dim();
    let rho = cell.coeffs[0];
    let mut q = [0.0; MAX_DIM];
    let mut p = [[0.0; MAX_DIM]; MAX_DIM];
    let c = |a: [i64; MAX_DIM]| basis.coeff(&cell.coeffs, a);
    for i in 0..dim {
        let mut a3 = [0; MAX_DIM];
        a3[i] = 3;
        q[i] = 2.0 * c(a3);
        for d in 0..dim {
            let mut a = [0; MAX_DIM];
            a[d] += 2;
            a[i] += 1;
            q[i] += c(a);
        }
        for j in 0..dim {
            let mut a = [0; MAX_DIM];
            a[i] += 1;
            a[j] += 1;
            let delta = if i == j { 1.0 } else { 0.0 };
            p[i][j] = delta * rho * cell.theta + (1.0 + delta) * c(a);
        }
    }
    (q, p)
}

/// Local Maxwellian `ρ·H_{θ,0}` in frame `(u, θ)`.
pub fn maxwellian_cell(basis: &IndexSet, rho: f64, u: [f64; MAX_DIM], theta: f64) -> Result<CellState, Error> {
    positive("rho", rho)?;
    positive("theta", theta)?;
    let mut cell = CellState::zeros(basis, u, theta);
    cell.coeffs[0] = rho;
    Ok(cell)
}

/// Pointwise value of the truncated expansion at velocity `v`.
pub fn eval_distribution(basis: &IndexSet, cell: &CellState, v: &[f64]) -> f64 {
    let dim = basis.dim();
    let order = basis.order();
    let sq = sqrt(cell.theta);
    // per-dimension tables of θ^{-(n+1)/2} He_n(ξ_d) exp(-ξ_d²/2) / √(2π)
    let mut tables: [Vec<f64>; MAX_DIM] = [Vec::new(), Vec::new(), Vec::new()];
    for d in 0..dim {
        let xi = (v[d] - cell.u[d]) / sq;
        let mut he = vec![0.0; order + 1];
        hermite_fill(xi, &mut he);
        let mut scale = exp(-0.5 * xi * xi) / (SQRT_2PI * sq);
        for h in he.iter_mut() {
            *h *= scale;
            scale /= sq;
        }
        tables[d] = he;
    }
    basis
        .indices()
        .iter()
        .zip(&cell.coeffs)
        .map(|(a, &f)| f * (0..dim).map(|d| tables[d][a.component(d)]).product::<f64>())
        .sum()
}
