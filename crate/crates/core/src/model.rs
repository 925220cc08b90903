//! One-dimensional G-diffusions `dX = b(X)dt + h(X)d⟨B⟩ + σ(X)dB`.

use log::warn;

use crate::error::{Error, Result};
use crate::expr::{parse, parse_with_constants, Expr};
use crate::gfunc::GFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct GDiffusionModel {
    b: Expr,
    h: Expr,
    sigma: Expr,
    g: GFunction,
    p: u32,
}

/// Empirical constants of the Lipschitz and dissipativity assumptions on a
/// probe grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    /// sup of the difference quotients of `b`, `h` and `σ`.
    pub lipschitz_estimate: f64,
    /// inf over probe pairs of `−LHS/|x − x′|²`; `≤ 0` means dissipativity
    /// was not detected.
    pub eta_estimate: f64,
    pub sample_count: usize,
    pub domain: (f64, f64),
}

impl GDiffusionModel {
    pub fn new(b: Expr, h: Expr, sigma: Expr, g: GFunction, p: u32) -> Result<Self> {
        if p < 1 {
            return Err(Error::invalid("growth order p must be >= 1"));
        }
        Ok(GDiffusionModel { b, h, sigma, g, p })
    }

    /// `dY = −αY dt + dB`.
    pub fn g_ou(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(format!("g_ou needs alpha > 0, got {alpha}")));
        }
        let b = parse_with_constants("-a*x", &[("a", alpha)])?;
        Self::new(b, Expr::Const(0.0), Expr::Const(1.0), GFunction::default(), 2)
    }

    /// `dY = (m − Y)dt + d⟨B⟩ + dB`.
    pub fn gou_bracket(m: f64) -> Result<Self> {
        let b = parse_with_constants("m - x", &[("m", m)])?;
        Self::new(b, Expr::Const(1.0), Expr::Const(1.0), GFunction::default(), 2)
    }

    /// Coefficients vanishing at the origin, so `X⁰ ≡ 0`:
    /// `b = −x`, `h = 0`, `σ = ½·x·e^{−x²}`.
    pub fn dirac() -> Result<Self> {
        Self::new(
            parse("-x")?,
            Expr::Const(0.0),
            parse("0.5*x*exp(-x^2)")?,
            GFunction::default(),
            2,
        )
    }

    pub fn with_g(mut self, g: GFunction) -> Self {
        self.g = g;
        self
    }

    pub fn with_p(mut self, p: u32) -> Result<Self> {
        if p < 1 {
            return Err(Error::invalid("growth order p must be >= 1"));
        }
        self.p = p;
        Ok(self)
    }

    pub fn b(&self) -> &Expr {
        &self.b
    }

    pub fn h(&self) -> &Expr {
        &self.h
    }

    pub fn sigma(&self) -> &Expr {
        &self.sigma
    }

    pub fn g(&self) -> GFunction {
        self.g
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    /// Probes (H1)/(H2) on a uniform grid of `n_samples` points over `domain`,
    /// using every pair of distinct points. Points where a coefficient fails
    /// to evaluate are skipped.
    pub fn estimate_assumptions(&self, domain: (f64, f64), n_samples: usize) -> AssumptionReport {
        let (lo, hi) = domain;
        let n = n_samples.max(2);
        let pts: Vec<(f64, f64, f64, f64)> = (0..n)
            .filter_map(|i| {
                let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
                let b = self.b.eval(x).ok()?;
                let h = self.h.eval(x).ok()?;
                let s = self.sigma.eval(x).ok()?;
                Some((x, b, h, s))
            })
            .collect();
        let k = (2 * self.p - 1) as f64;
        let mut eta = f64::INFINITY;
        let mut lip: f64 = 0.0;
        for (i, &(x, bx, hx, sx)) in pts.iter().enumerate() {
            for &(y, by, hy, sy) in &pts[i + 1..] {
                let dx = x - y;
                if dx == 0.0 {
                    continue;
                }
                let (db, dh, ds) = (bx - by, hx - hy, sx - sy);
                let lhs = self.g.eval(k * ds * ds + 2.0 * dx * dh) + dx * db;
                eta = eta.min(-lhs / (dx * dx));
                lip = lip.max(db.abs().max(dh.abs()).max(ds.abs()) / dx.abs());
            }
        }
        if !eta.is_finite() {
            eta = f64::NEG_INFINITY;
        }
        AssumptionReport {
            lipschitz_estimate: lip,
            eta_estimate: eta,
            sample_count: pts.len(),
            domain,
        }
    }

    /// Warns when dissipativity is not detected on `domain`; returns the report.
    pub fn diagnose(&self, domain: (f64, f64)) -> AssumptionReport {
        let report = self.estimate_assumptions(domain, 201);
        if report.eta_estimate <= 0.0 {
            warn!(
                "dissipativity not detected on [{}, {}] (eta estimate {:.3e}); long-time results may not converge",
                domain.0, domain.1, report.eta_estimate
            );
        }
        report
    }
}

/// Builds a named model. `custom` needs explicit expressions and is rejected
/// here; use [`GDiffusionModel::new`].
pub fn make_builtin(name: &str, params: &[f64]) -> Result<GDiffusionModel> {
    let arity = |n: usize| -> Result<()> {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "model `{name}` takes {n} parameter(s), got {}",
                params.len()
            )))
        }
    };
    match name {
        "g_ou" => {
            arity(1)?;
            GDiffusionModel::g_ou(params[0])
        }
        "gou_bracket" => {
            arity(1)?;
            GDiffusionModel::gou_bracket(params[0])
        }
        "dirac" => {
            arity(0)?;
            GDiffusionModel::dirac()
        }
        "custom" => Err(Error::invalid(
            "model `custom` needs b, h and sigma expressions",
        )),
        other => Err(Error::invalid(format!("unknown model `{other}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins() {
        let m = make_builtin("g_ou", &[0.5]).unwrap();
        assert_eq!(m.b().eval(2.0).unwrap(), -1.0);
        assert_eq!(m.h().eval(2.0).unwrap(), 0.0);
        assert_eq!(m.sigma().eval(2.0).unwrap(), 1.0);
        assert_eq!(m.g(), GFunction::new(0.25, 1.0).unwrap());

        let m = make_builtin("gou_bracket", &[2.0]).unwrap();
        assert_eq!(m.b().eval(0.5).unwrap(), 1.5);
        assert_eq!(m.h().eval(0.5).unwrap(), 1.0);
        assert_eq!(m.sigma().eval(0.5).unwrap(), 1.0);

        let m = make_builtin("dirac", &[]).unwrap();
        for e in [m.b(), m.h(), m.sigma()] {
            assert_eq!(e.eval(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn builtin_errors() {
        assert!(make_builtin("nope", &[]).is_err());
        assert!(make_builtin("g_ou", &[]).is_err());
        assert!(make_builtin("dirac", &[1.0]).is_err());
        assert!(make_builtin("custom", &[]).is_err());
        assert!(make_builtin("g_ou", &[-1.0]).is_err());
    }

    #[test]
    fn h2_on_linear_models() {
        let r = GDiffusionModel::g_ou(0.5)
            .unwrap()
            .estimate_assumptions((-4.0, 4.0), 33);
        assert_eq!(r.eta_estimate, 0.5);
        assert_eq!(r.lipschitz_estimate, 0.5);
        assert_eq!(r.sample_count, 33);

        let r = GDiffusionModel::gou_bracket(2.0)
            .unwrap()
            .estimate_assumptions((-4.0, 4.0), 33);
        assert_eq!(r.eta_estimate, 1.0);
    }

    #[test]
    fn h2_affine_exact() {
        for k in [0.25, 1.0, 1.5, 3.0] {
            let b = parse_with_constants("2 - k*x", &[("k", k)]).unwrap();
            let m = GDiffusionModel::new(
                b,
                Expr::Const(0.5),
                Expr::Const(1.5),
                GFunction::default(),
                2,
            )
            .unwrap();
            let r = m.estimate_assumptions((-8.0, 8.0), 65);
            assert_eq!(r.eta_estimate, k);
            assert_eq!(r.lipschitz_estimate, k);
        }
    }

    #[test]
    fn h2_bracket_drift_model() {
        // dY = −½Y d⟨B⟩ + dB: dissipative at rate σ_lo²/2.
        let m = GDiffusionModel::new(
            Expr::Const(0.0),
            parse("-0.5*x").unwrap(),
            Expr::Const(1.0),
            GFunction::default(),
            2,
        )
        .unwrap();
        let r = m.estimate_assumptions((-4.0, 4.0), 33);
        assert_eq!(r.eta_estimate, 0.125);
    }

    #[test]
    fn h2_estimate_shrinks_on_nested_probe_sets() {
        let m = GDiffusionModel::new(
            parse("-x + 0.3*x^2").unwrap(),
            Expr::Const(0.0),
            parse("0.5*exp(-x^2)").unwrap(),
            GFunction::default(),
            2,
        )
        .unwrap();
        let mut prev = f64::INFINITY;
        let (mut a, mut n) = (0.5, 5);
        for _ in 0..4 {
            let r = m.estimate_assumptions((-a, a), n);
            assert!(r.eta_estimate <= prev);
            prev = r.eta_estimate;
            a *= 2.0;
            n = 2 * n - 1;
        }
        let coarse = m.estimate_assumptions((-1.0, 1.0), 5).eta_estimate;
        let fine = m.estimate_assumptions((-1.0, 1.0), 9).eta_estimate;
        assert!(fine <= coarse);
    }

    #[test]
    fn dirac_is_dissipative() {
        let r = GDiffusionModel::dirac()
            .unwrap()
            .estimate_assumptions((-8.0, 8.0), 201);
        assert!(r.eta_estimate > 0.5, "{r:?}");
    }
}
