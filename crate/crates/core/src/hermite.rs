//! Probabilists' Hermite polynomials `He_n`, their zeros and Gauss–Hermite
//! quadrature for the weight `exp(-x²/2)`.
//!
//! Zeros come from the symmetric tridiagonal Jacobi matrix of the family
//! (zero diagonal, off-diagonal `√k`), located by Sturm-count bisection.
//! That stays well conditioned for the orders of a few hundred that
//! large moment expansions need.

use alloc::vec::Vec;

use crate::math::{sqrt, abs};

/// `√(2π)`, the total mass of `exp(-x²/2)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// `He_n(x)` by the upward three-term recursion
/// `He_{k+1} = x·He_k − k·He_{k−1}`.
pub fn hermite_eval(n: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Total accessor: `He_n ≡ 0` for negative `n`.
pub fn hermite_eval_signed(n: i64, x: f64) -> f64 {
    if n < 0 {
        0.0
    } else {
        hermite_eval(n as usize, x)
    }
}

/// Fills `out[k] = He_k(x)` for `k < out.len()`.
pub fn hermite_fill(x: f64, out: &mut [f64]) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for (k, slot) in out.iter_mut().enumerate() {
        *slot = cur;
        let next = x * cur - k as f64 * prev;
        prev = cur;
        cur = next;
    }
}

/// Normalized values `He_{n-1}(x)/√((n−1)!)` and `He_n(x)/√(n!)`.
///
/// The normalized recursion avoids the factorial growth that makes raw
/// `He_n` overflow for large `n`.
fn normalized_pair(n: usize, x: f64) -> (f64, f64) {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let next = (x * cur - sqrt(k as f64) * prev) / sqrt((k + 1) as f64);
        prev = cur;
        cur = next;
    }
    (prev, cur)
}

/// Number of eigenvalues of the order-`n` Jacobi matrix that are `< x`,
/// i.e. the number of zeros of `He_n` below `x`.
fn sturm_count(n: usize, x: f64) -> usize {
    let mut count = 0;
    let mut q = -x;
    for i in 0..n {
        if i > 0 {
            let denom = if q == 0.0 { f64::EPSILON * (1.0 + abs(x)) } else { q };
            q = -x - i as f64 / denom;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th smallest zero (0-based) of `He_n`, bisected to full precision.
fn zero_by_bisection(n: usize, k: usize) -> f64 {
    let bound = 2.0 * sqrt(n as f64) + 1.0;
    let (mut lo, mut hi) = (-bound, bound);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(n, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest zero of `He_n`. This is the constant `C_n` that bounds the
/// characteristic speeds of an order-`(n−1)` moment system.
///
/// # Panics
/// Panics if `n == 0` (He_0 has no zeros).
pub fn greatest_zero(n: usize) -> f64 {
    assert!(n >= 1, "He_0 has no zeros");
    if n == 1 {
        return 0.0;
    }
    zero_by_bisection(n, n - 1)
}

/// Gauss–Hermite rule for `∫ g(x) exp(-x²/2) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    /// Applies the rule to `g`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * g(x))
            .sum()
    }
}

/// `n`-point Gauss–Hermite rule for the weight `exp(-x²/2)`.
///
/// Nodes are the zeros of `He_n`; weights are `√(2π) / (n·ψ_{n−1}(x)²)` with
/// `ψ_k = He_k/√(k!)`. The rule is exactly symmetric: the negative half is
/// mirrored from the positive one.
///
/// # Panics
/// Panics if `n == 0`.
pub fn quadrature(n: usize) -> QuadratureRule {
    assert!(n >= 1, "a quadrature rule needs at least one node");
    let mut nodes = alloc::vec![0.0; n];
    let mut weights = alloc::vec![0.0; n];
    let half = n / 2;
    for k in 0..half {
        let x = zero_by_bisection(n, n - 1 - k);
        let (psi_prev, _) = normalized_pair(n, x);
        let w = SQRT_2PI / (n as f64 * psi_prev * psi_prev);
        nodes[n - 1 - k] = x;
        nodes[k] = -x;
        weights[n - 1 - k] = w;
        weights[k] = w;
    }
    if n % 2 == 1 {
        let (psi_prev, _) = normalized_pair(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = SQRT_2PI / (n as f64 * psi_prev * psi_prev);
    }
    QuadratureRule { nodes, weights, order: n }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|k| k as f64).product()
    }

    fn double_factorial_odd(p: usize) -> f64 {
        // (p-1)!! for even p
        (1..p).step_by(2).map(|k| k as f64).product()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(hermite_eval(0, 7.3), 1.0);
        assert_eq!(hermite_eval(1, -2.0), -2.0);
        // He_3(x) = x³ − 3x
        assert_eq!(hermite_eval(3, 2.0), 2.0);
        assert_eq!(hermite_eval_signed(-1, 0.3), 0.0);
        assert_eq!(hermite_eval_signed(2, 3.0), 8.0);
    }

    #[test]
    fn eval_matches_explicit_low_orders() {
        for &x in &[-2.5, -0.3, 0.0, 0.7, 4.1] {
            let x2 = x * x;
            assert!((hermite_eval(2, x) - (x2 - 1.0)).abs() < 1e-12);
            assert!((hermite_eval(4, x) - (x2 * x2 - 6.0 * x2 + 3.0)).abs() < 1e-11);
            assert!((hermite_eval(5, x) - (x2 * x2 * x - 10.0 * x2 * x + 15.0 * x)).abs() < 1e-10);
        }
        let mut buf = [0.0; 6];
        hermite_fill(1.3, &mut buf);
        for (k, v) in buf.iter().enumerate() {
            assert_eq!(*v, hermite_eval(k, 1.3));
        }
    }

    #[test]
    fn greatest_zero_examples() {
        assert_eq!(greatest_zero(1), 0.0);
        assert!((greatest_zero(2) - 1.0).abs() < 1e-12);
        let c4 = greatest_zero(4);
        assert!((c4 - (3.0 + 6f64.sqrt()).sqrt()).abs() < 1e-12);
        assert!((c4 - 2.334_414_218_338_977).abs() < 1e-12);
        assert!(hermite_eval(4, c4).abs() < 1e-12);
    }

    #[test]
    fn greatest_zero_strictly_increasing() {
        let mut last = greatest_zero(1);
        for n in 2..=50 {
            let c = greatest_zero(n);
            assert!(c > last, "n = {n}");
            last = c;
        }
    }

    #[test]
    fn greatest_zero_is_a_root_at_high_order() {
        for n in [10usize, 41, 81, 101] {
            let c = greatest_zero(n);
            let (_, psi) = normalized_pair(n, c);
            let (psi_prev, _) = normalized_pair(n, c);
            // Newton correction on the normalized polynomial is below 1e-12
            let step = psi / (sqrt(n as f64) * psi_prev);
            assert!(step.abs() < 1e-12, "n = {n}, step = {step}");
        }
    }

    #[test]
    fn quadrature_small_rules() {
        let q1 = quadrature(1);
        assert_eq!(q1.nodes, alloc::vec![0.0]);
        assert!((q1.weights[0] - SQRT_2PI).abs() < 1e-14);

        let q2 = quadrature(2);
        assert!((q2.nodes[0] + 1.0).abs() < 1e-14 && (q2.nodes[1] - 1.0).abs() < 1e-14);
        for w in &q2.weights {
            assert!((w - SQRT_2PI / 2.0).abs() < 1e-14);
        }
        assert!((q2.integrate(|x| x * x) - SQRT_2PI).abs() < 1e-13);

        let q5 = quadrature(5);
        let m8 = q5.integrate(|x| x.powi(8));
        assert!((m8 - 105.0 * SQRT_2PI).abs() < 1e-11 * 105.0);
    }

    #[test]
    fn quadrature_invariants() {
        for n in [1usize, 2, 3, 7, 16, 33, 60] {
            let q = quadrature(n);
            assert_eq!(q.order, n);
            for w in q.nodes.windows(2) {
                assert!(w[0] < w[1]);
            }
            for i in 0..n {
                assert_eq!(q.nodes[i], -q.nodes[n - 1 - i]);
                assert!(q.weights[i] > 0.0);
            }
            let total: f64 = q.weights.iter().sum();
            assert!(((total - SQRT_2PI) / SQRT_2PI).abs() < 1e-12, "n = {n}");
            for p in 0..(2 * n).min(40) {
                let exact = if p % 2 == 1 { 0.0 } else { double_factorial_odd(p) * SQRT_2PI };
                let got = q.integrate(|x| x.powi(p as i32));
                let scale = q.integrate(|x| x.abs().powi(p as i32));
                assert!((got - exact).abs() <= 1e-10 * scale, "n = {n}, p = {p}: {got} vs {exact}");
            }
        }
    }

    #[test]
    fn orthogonality() {
        let q = quadrature(20);
        for m in 0..=12usize {
            for n in 0..=12usize {
                // normalized functions He_n/√(n!·√(2π)) are orthonormal
                let norm = (factorial(m) * factorial(n)).sqrt() * SQRT_2PI;
                let got = q.integrate(|x| hermite_eval(m, x) * hermite_eval(n, x)) / norm;
                let exact = if m == n { 1.0 } else { 0.0 };
                assert!((got - exact).abs() < 1e-10, "m = {m}, n = {n}: {got}");
            }
        }
    }

    #[test]
    fn differential_relation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for n in 1..=12usize {
            for _ in 0..100 {
                let x: f64 = rng.gen_range(-5.0..5.0);
                let fd = (hermite_eval(n, x + h) - hermite_eval(n, x - h)) / (2.0 * h);
                let exact = n as f64 * hermite_eval(n - 1, x);
                let scale = exact.abs().max(1.0);
                assert!((fd - exact).abs() < 1e-6 * scale, "n = {n}, x = {x}");
            }
        }
    }
}
