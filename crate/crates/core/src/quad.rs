//! Adaptive Gauss–Kronrod quadrature and Gaussian expectations.

use std::f64::consts::PI;

use statrs::function::erf::erf;

use crate::error::{Error, Result};

// 15-point Kronrod nodes on [0, 1] (symmetric) with Kronrod and embedded
// 7-point Gauss weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// `∫_a^b f` to absolute tolerance `tol`, by recursive bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> Result<f64> {
        let (v, err) = gk15(f, a, b);
        if !v.is_finite() {
            return Err(Error::Quadrature { a, b, err: f64::INFINITY });
        }
        if err <= tol.max(1e-15 * v.abs()) {
            return Ok(v);
        }
        if depth == 0 {
            return Err(Error::Quadrature { a, b, err });
        }
        let m = 0.5 * (a + b);
        Ok(rec(f, a, m, 0.5 * tol, depth - 1)? + rec(f, m, b, 0.5 * tol, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    rec(&f, a, b, tol, 40)
}

/// Density of `N(0, variance)`.
pub fn normal_pdf(y: f64, variance: f64) -> f64 {
    (-0.5 * y * y / variance).exp() / (2.0 * PI * variance).sqrt()
}

/// `P(|Y| ≤ a)` for `Y ~ N(0, variance)`.
pub fn prob_abs_le(a: f64, variance: f64) -> f64 {
    if a <= 0.0 {
        return 0.0;
    }
    erf(a / (2.0 * variance).sqrt())
}

/// `E[f(Y)]` for `Y ~ N(0, variance)`, integrating over ±14 standard
/// deviations split at `breaks` (where `f` has kinks or jumps).
pub fn gaussian_expectation<F: Fn(f64) -> f64>(f: F, variance: f64, breaks: &[f64], tol: f64) -> Result<f64> {
    if !(variance > 0.0) {
        return Err(Error::invalid(format!("variance must be > 0, got {variance}")));
    }
    let l = 14.0 * variance.sqrt();
    let mut pts = vec![-l];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|b| b.abs() < l).collect();
    inner.sort_by(|a, b| a.total_cmp(b));
    pts.extend(inner);
    pts.push(l);
    let n = (pts.len() - 1) as f64;
    let mut total = 0.0;
    for w in pts.windows(2) {
        total += integrate(|y| f(y) * normal_pdf(y, variance), w[0], w[1], tol / n)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_and_smooth_functions() {
        assert!((integrate(|x| x * x, 0.0, 3.0, 1e-12).unwrap() - 9.0).abs() < 1e-12);
        let v = integrate(f64::sin, 0.0, PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-12);
        let v = integrate(|x| (-x).exp(), 0.0, 50.0, 1e-12).unwrap();
        assert!((v - (1.0 - (-50.0f64).exp())).abs() < 1e-11);
    }

    #[test]
    fn gaussian_moments() {
        for var in [0.5, 1.0, 2.0] {
            let m2 = gaussian_expectation(|y| y * y, var, &[], 1e-12).unwrap();
            let m4 = gaussian_expectation(|y| y.powi(4), var, &[], 1e-12).unwrap();
            assert!((m2 - var).abs() < 1e-10);
            assert!((m4 - 3.0 * var * var).abs() < 1e-10);
        }
    }

    #[test]
    fn indicator_probability_matches_erf() {
        let a = 0.3;
        let p = gaussian_expectation(|y| if y.abs() <= a { 1.0 } else { 0.0 }, 0.5, &[-a, a], 1e-12).unwrap();
        assert!((p - prob_abs_le(a, 0.5)).abs() < 1e-10);
    }

    #[test]
    fn rejects_bad_variance() {
        assert!(gaussian_expectation(|y| y, 0.0, &[], 1e-8).is_err());
    }
}
