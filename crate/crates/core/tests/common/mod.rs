//! Gauss–Hermite quadrature, used as an independent reference for Gaussian
//! expectations.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Nodes and weights for `∫ e^{−x²} g(x) dx` with `n` points, by Newton's
/// method on the physicists' Hermite polynomial `H_n`.
pub fn gauss_hermite(n: usize) -> Vec<(f64, f64)> {
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n.div_ceil(2) {
        // standard initial guesses (Numerical Recipes ordering, largest root first)
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * out[0].0,
            3 => 1.91 * z - 0.91 * out[1].0,
            _ => 2.0 * z - out[i - 2].0,
        };
        let mut dp = 0.0;
        for _ in 0..100 {
            // orthonormal recurrence: p_j = sqrt(2/j) z p_{j-1} − sqrt((j−1)/j) p_{j-2}
            let (mut p1, mut p2) = (PI.powf(-0.25), 0.0);
            for j in 1..=n {
                let p3 = p2;
                p2 = p1;
                p1 = z * (2.0 / j as f64).sqrt() * p2 - ((j as f64 - 1.0) / j as f64).sqrt() * p3;
            }
            dp = (2.0 * n as f64).sqrt() * p2;
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        out.push((z, 2.0 / (dp * dp)));
    }
    let mut all: Vec<(f64, f64)> = out.iter().map(|&(x, w)| (-x, w)).collect();
    all.extend(out.iter().rev().filter(|(x, _)| *x != 0.0).copied());
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    all.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-14);
    all
}

/// `E[f(Y)]` for `Y ~ N(mean, variance)`.
pub fn normal_expectation(f: impl Fn(f64) -> f64, mean: f64, variance: f64) -> f64 {
    let s = (2.0 * variance).sqrt();
    gauss_hermite(60).iter().map(|&(x, w)| w * f(mean + s * x)).sum::<f64>() / PI.sqrt()
}
