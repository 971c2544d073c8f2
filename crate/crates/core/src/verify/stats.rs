//! Exact channel moments and tail bounds evaluated at finite parameters.

use std::f64::consts::E;

use crate::params::{ChannelParams, ParamBounds};

use super::CountKind;

/// Mean and variance of the number of deleted bits among `n`.
///
/// Deletion indicators form a two-state Markov chain with
/// `P(X_1 = 1) = p_d`, `P(X_{i+1} = 1 | X_i) = p_d + (q_d - p_d) X_i`, so
/// `pi_{i+1} = p_d + lambda pi_i` and
/// `Cov(X_i, X_j) = lambda^(j-i) pi_i (1 - pi_i)` with `lambda = q_d - p_d`.
pub fn deletion_count_moments(n: usize, p_d: f64, q_d: f64) -> (f64, f64) {
    let lambda = q_d - p_d;
    let mut pi = p_d;
    let (mut mean, mut var) = (0.0, 0.0);
    for i in 0..n {
        let remaining = (n - 1 - i) as f64;
        // sum_{d=1}^{remaining} lambda^d
        let tail = if lambda == 0.0 {
            0.0
        } else if (1.0 - lambda).abs() < 1e-15 {
            remaining
        } else {
            lambda * (1.0 - lambda.powf(remaining)) / (1.0 - lambda)
        };
        mean += pi;
        var += pi * (1.0 - pi) * (1.0 + 2.0 * tail);
        pi = p_d + lambda * pi;
    }
    (mean, var)
}

/// Mean and variance of the total inserted length over `n` bits. Each bit
/// contributes `B (1 + G)` with `B ~ Bern(p_i)` and `1 + G` geometric on
/// `{1, 2, ...}` with success `s = 1 - q_i`.
pub fn inserted_bits_moments(n: usize, p_i: f64, q_i: f64) -> (f64, f64) {
    let s = 1.0 - q_i;
    let mean = p_i / s;
    let second = p_i * (1.0 + q_i) / (s * s);
    (n as f64 * mean, n as f64 * (second - mean * mean))
}

pub fn count_moments(kind: CountKind, n: usize, p: &ChannelParams) -> (f64, f64) {
    let binomial = |q: f64| (n as f64 * q, n as f64 * q * (1.0 - q));
    match kind {
        CountKind::Substitutions => binomial(p.p_s),
        CountKind::InsertionEvents => binomial(p.p_i),
        CountKind::Deletions => deletion_count_moments(n, p.p_d, p.q_d),
        CountKind::InsertedBits => inserted_bits_moments(n, p.p_i, p.q_i),
    }
}

/// `e^{-(sqrt k - 1)^2 mu / 3} + e^{-k mu (1 - 1/sqrt k)^2 / 2}`, the tail
/// bound on a negative binomial driven by a binomial number of successes.
pub fn chained_nbinom_bound(k: f64, mu: f64) -> f64 {
    let r = k.sqrt();
    (-(r - 1.0).powi(2) * mu / 3.0).exp() + (-k * mu * (1.0 - 1.0 / r).powi(2) / 2.0).exp()
}

/// `n^{-rho_s k/12} + 2 n^{-rho_i k/60} + 3 n^{-rho_d k/60}`.
pub fn block_distance_bound(n: usize, b: &ParamBounds) -> f64 {
    let n = n.max(2) as f64;
    n.powf(-b.rho_s * b.k / 12.0) + local_shift_bound_f(n, b)
}

/// `2 n^{-rho_i k/60} + 3 n^{-rho_d k/60}`.
pub fn local_shift_bound(n: usize, b: &ParamBounds) -> f64 {
    local_shift_bound_f(n.max(2) as f64, b)
}

fn local_shift_bound_f(n: f64, b: &ParamBounds) -> f64 {
    2.0 * n.powf(-b.rho_i * b.k / 60.0) + 3.0 * n.powf(-b.rho_d * b.k / 60.0)
}

/// `(4e len/D + 5e + 4e/D)^D / 2^len`: the probability that two uniform
/// strings of length `len` are within edit distance `D`. `D = 0` gives
/// `2^-len`.
pub fn random_window_bound(len: usize, d: usize) -> f64 {
    if d == 0 {
        return 0.5f64.powi(len.min(i32::MAX as usize) as i32);
    }
    let len = len as f64;
    let d = d as f64;
    let log = d * (4.0 * E * len / d + 5.0 * E + 4.0 * E / d).ln() - len * std::f64::consts::LN_2;
    log.exp()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn independent_deletions_are_binomial() {
        let (m, v) = deletion_count_moments(1000, 0.1, 0.1);
        assert!((m - 100.0).abs() < 1e-9);
        assert!((v - 90.0).abs() < 1e-9);
    }

    #[test]
    fn nbinom_bound_values() {
        // vacuous at mu = 20, informative at mu = 200
        let b20 = chained_nbinom_bound(1.5, 20.0);
        assert!((b20 - 1.3172).abs() < 1e-3, "{b20}");
        let b200 = chained_nbinom_bound(1.5, 200.0);
        assert!(b200 < 0.05 && b200 > 0.03, "{b200}");
    }

    #[test]
    fn random_window_bound_limits() {
        let exact = 2f64.powi(-64);
        assert!((random_window_bound(64, 0) - exact).abs() < 1e-12 * exact);
        assert!(random_window_bound(200, 30) < 0.01);
        assert!(random_window_bound(20, 10) > 1.0);
    }
}
