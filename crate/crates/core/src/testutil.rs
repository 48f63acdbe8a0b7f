//! Quadrature oracles shared by the unit tests. Nothing here calls into the
//! projection or transport code.

use alloc::vec::Vec;

use rand::Rng;

use crate::hermite::{hermite_eval, quadrature, SQRT_2PI};
use crate::moments::{CellState, IndexSet, MAX_DIM};

/// Random cell with moderately decaying coefficients and `f_0 > 0`.
pub(crate) fn random_cell<R: Rng>(basis: &IndexSet, rng: &mut R) -> CellState {
    let mut u = [0.0; MAX_DIM];
    for d in 0..basis.dim() {
        u[d] = rng.gen_range(-1.0..1.0);
    }
    let theta = rng.gen_range(0.5..2.0);
    let mut cell = CellState::zeros(basis, u, theta);
    for (i, a) in basis.indices().iter().enumerate() {
        let n = a.order() as i32;
        cell.coeffs[i] = if n == 0 {
            rng.gen_range(0.5..2.0)
        } else {
            rng.gen_range(-1.0..1.0) * 0.4f64.powi(n) * theta.powf(n as f64 / 2.0)
        };
    }
    cell
}

/// Exponents of every monomial `v^β` with `|β| ≤ M`.
pub(crate) fn monomials(basis: &IndexSet) -> Vec<[u32; MAX_DIM]> {
    basis.indices().iter().map(|a| a.0).collect()
}

/// `∫ v^β f(v) dv` by tensor Gauss–Hermite quadrature in the cell's frame.
pub(crate) fn moment(basis: &IndexSet, cell: &CellState, beta: [u32; MAX_DIM]) -> f64 {
    let dim = basis.dim();
    let deg = basis.order() + beta.iter().sum::<u32>() as usize;
    let rule = quadrature(deg / 2 + 2);
    let n = rule.order;
    let sq = cell.theta.sqrt();
    let total = n.pow(dim as u32);
    let mut acc = 0.0;
    for flat in 0..total {
        let mut idx = flat;
        let mut x = [0.0; MAX_DIM];
        let mut w = 1.0;
        for d in 0..dim {
            x[d] = rule.nodes[idx % n];
            w *= rule.weights[idx % n];
            idx /= n;
        }
        let mut poly = 1.0;
        for d in 0..dim {
            poly *= (cell.u[d] + sq * x[d]).powi(beta[d] as i32);
        }
        let mut f = 0.0;
        for (i, a) in basis.indices().iter().enumerate() {
            let mut term = cell.coeffs[i];
            for d in 0..dim {
                let k = a.component(d);
                term *= hermite_eval(k, x[d]) * sq.powi(-(k as i32)) / SQRT_2PI;
            }
            f += term;
        }
        acc += w * poly * f;
    }
    acc
}
