//! Scenario Monte Carlo.
//!
//! A scenario fixes the quadratic variation rate `c ∈ [σ_lo², σ_hi²]` as a
//! feedback of `(t, x)`. Under it the state follows
//!
//! ```text
//! X_{k+1} = X_k + b(X_k) dt + h(X_k) c dt + σ(X_k) √(c dt) Z_k
//! ```
//!
//! which gives a linear expectation below `Ê`. Each path draws from its own
//! ChaCha stream `(seed, path index)`, and per-path results are reduced in
//! index order, so estimates do not depend on the thread count.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gfunc::GFunction;
use crate::model::GDiffusionModel;
use crate::pde::{DriftScheme, Grid1D, PdeSolution, Scheme};

/// Piecewise-constant feedback table: row `k` applies from the time closest
/// to `times[k]`, column by nearest grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackTable {
    times: Vec<f64>,
    grid: Grid1D,
    rows: Vec<Vec<f64>>,
}

impl FeedbackTable {
    pub fn new(times: Vec<f64>, grid: Grid1D, rows: Vec<Vec<f64>>) -> Result<Self> {
        if times.is_empty() || times.len() != rows.len() {
            return Err(Error::invalid("feedback table needs one row per time"));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::invalid("feedback table times must increase"));
        }
        if rows.iter().any(|r| r.len() != grid.nx) {
            return Err(Error::GridMismatch(format!("table rows must have {} entries", grid.nx)));
        }
        Ok(FeedbackTable { times, grid, rows })
    }

    fn row_at(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            0
        } else if k == self.times.len() || t - self.times[k - 1] <= self.times[k] - t {
            k - 1
        } else {
            k
        }
    }

    fn lookup(&self, t: f64, x: f64) -> f64 {
        self.rows[self.row_at(t)][self.grid.nearest(x)]
    }

    fn range(&self) -> (f64, f64) {
        self.rows.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &c| {
            (lo.min(c), hi.max(c))
        })
    }
}

/// A Markovian volatility scenario `c(t, x)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ControlPolicy {
    Constant(f64),
    Table(FeedbackTable),
    /// Extreme-point feedback read off a PDE solution, see [`bang_bang_policy`].
    BangBang(FeedbackTable),
}

impl ControlPolicy {
    /// Quadratic variation rate at elapsed time `t` and state `x`.
    pub fn variance(&self, t: f64, x: f64) -> f64 {
        match self {
            ControlPolicy::Constant(c) => *c,
            ControlPolicy::Table(tab) | ControlPolicy::BangBang(tab) => tab.lookup(t, x),
        }
    }

    /// Errors unless every value the policy can return lies in `[σ_lo², σ_hi²]`.
    pub fn validate(&self, g: GFunction) -> Result<()> {
        let (lo, hi) = match self {
            ControlPolicy::Constant(c) => (*c, *c),
            ControlPolicy::Table(tab) | ControlPolicy::BangBang(tab) => tab.range(),
        };
        if g.contains(lo) && g.contains(hi) {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "policy range [{lo}, {hi}] is outside [{}, {}]",
                g.sigma_lo_sq(),
                g.sigma_hi_sq()
            )))
        }
    }

    pub fn label(&self) -> String {
        match self {
            ControlPolicy::Constant(c) => format!("constant:{c}"),
            ControlPolicy::Table(_) => "table".into(),
            ControlPolicy::BangBang(_) => "bang-bang".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Functional {
    /// `f(X_T)`.
    #[default]
    Terminal,
    /// `(1/T) ∫₀^T f(X_s) ds`, left Riemann sum.
    Running,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McParams {
    pub dt: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub functional: Functional,
}

impl Default for McParams {
    fn default() -> Self {
        McParams {
            dt: 1e-3,
            n_paths: 10_000,
            seed: 0,
            functional: Functional::Terminal,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub dt: f64,
    pub seed: u64,
    pub functional: Functional,
}

enum Coef<'a> {
    Const(f64),
    Expr(&'a Expr),
}

impl Coef<'_> {
    fn new(e: &Expr) -> Coef<'_> {
        match e.constant_value() {
            Some(c) => Coef::Const(c),
            None => Coef::Expr(e),
        }
    }

    #[inline]
    fn at(&self, x: f64) -> Result<f64> {
        match self {
            Coef::Const(c) => Ok(*c),
            Coef::Expr(e) => Ok(e.eval(x)?),
        }
    }
}

enum Scenario<'a> {
    Const(f64),
    // table row per step index
    Table(&'a FeedbackTable, Vec<usize>),
}

/// Step size, step count and pre-resolved coefficients of one Euler scheme.
struct Stepping<'a> {
    b: Coef<'a>,
    h: Coef<'a>,
    sigma: Coef<'a>,
    scenario: Scenario<'a>,
    steps: usize,
    dt: f64,
}

impl Stepping<'_> {
    fn new<'a>(model: &'a GDiffusionModel, policy: &'a ControlPolicy, t_end: f64, dt: f64) -> Result<Stepping<'a>> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
        }
        if !(t_end >= 0.0) {
            return Err(Error::invalid(format!("t_end must be >= 0, got {t_end}")));
        }
        policy.validate(model.g())?;
        let steps = (t_end / dt).ceil() as usize;
        let dt = if steps > 0 { t_end / steps as f64 } else { dt };
        let scenario = match policy {
            ControlPolicy::Constant(c) => Scenario::Const(*c),
            ControlPolicy::Table(tab) | ControlPolicy::BangBang(tab) => {
                Scenario::Table(tab, (0..steps).map(|k| tab.row_at(k as f64 * dt)).collect())
            }
        };
        Ok(Stepping {
            b: Coef::new(model.b()),
            h: Coef::new(model.h()),
            sigma: Coef::new(model.sigma()),
            scenario,
            steps,
            dt,
        })
    }

    #[inline]
    fn variance(&self, k: usize, x: f64) -> f64 {
        match &self.scenario {
            Scenario::Const(c) => *c,
            Scenario::Table(tab, rows) => tab.rows[rows[k]][tab.grid.nearest(x)],
        }
    }

    #[inline]
    fn increment_with(&self, c: f64, x: f64, z: f64) -> Result<f64> {
        Ok((self.b.at(x)? + self.h.at(x)? * c) * self.dt + self.sigma.at(x)? * (c * self.dt).sqrt() * z)
    }

    #[inline]
    fn increment(&self, k: usize, x: f64, z: f64) -> Result<f64> {
        self.increment_with(self.variance(k, x), x, z)
    }
}

const BATCH: usize = 256;

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn estimate(samples: &[f64], p: &McParams) -> McEstimate {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = if samples.len() > 1 {
        samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    McEstimate {
        mean,
        std_error: (var / n).sqrt(),
        n_paths: samples.len(),
        dt: p.dt,
        seed: p.seed,
        functional: p.functional,
    }
}

/// Estimates `E_P[f(X_T)]` (or the time average) under one scenario.
pub fn simulate(
    model: &GDiffusionModel,
    policy: &ControlPolicy,
    x0: f64,
    f: &Expr,
    t_end: f64,
    params: &McParams,
) -> Result<McEstimate> {
    if params.n_paths == 0 {
        return Err(Error::invalid("n_paths must be >= 1"));
    }
    let path = Stepping::new(model, policy, t_end, params.dt)?;
    let running = params.functional == Functional::Running;
    if running && !(t_end > 0.0) {
        return Err(Error::invalid("the running functional needs t_end > 0"));
    }
    let starts: Vec<usize> = (0..params.n_paths).step_by(BATCH).collect();
    let batches = starts
        .into_par_iter()
        .map(|first| {
            let ids = first..(first + BATCH).min(params.n_paths);
            let mut rngs: Vec<ChaCha8Rng> = ids.clone().map(|i| path_rng(params.seed, i)).collect();
            let mut xs = vec![x0; ids.len()];
            let mut acc = vec![0.0; ids.len()];
            // all paths of a batch advance together so a feedback table row is
            // read once per step rather than once per path
            for k in 0..path.steps {
                for (j, (x, rng)) in xs.iter_mut().zip(&mut rngs).enumerate() {
                    if running {
                        acc[j] += f.eval(*x)? * path.dt;
                    }
                    *x += path.increment(k, *x, StandardNormal.sample(rng))?;
                    if !x.is_finite() {
                        return Err(Error::PathNonFinite { path: first + j, step: k + 1 });
                    }
                }
            }
            if running {
                Ok(acc.into_iter().map(|a| a / t_end).collect())
            } else {
                xs.into_iter().map(|x| Ok(f.eval(x)?)).collect::<Result<Vec<f64>>>()
            }
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;
    let samples: Vec<f64> = batches.into_iter().flatten().collect();
    Ok(estimate(&samples, params))
}

/// Best of several scenarios: a lower bound for `Ê`.
pub fn lower_bound(
    model: &GDiffusionModel,
    f: &Expr,
    x0: f64,
    t_end: f64,
    policies: &[ControlPolicy],
    params: &McParams,
) -> Result<McEstimate> {
    let mut best: Option<McEstimate> = None;
    for p in policies {
        let e = simulate(model, p, x0, f, t_end, params)?;
        if best.as_ref().is_none_or(|b| e.mean > b.mean) {
            best = Some(e);
        }
    }
    best.ok_or_else(|| Error::invalid("lower_bound needs at least one policy"))
}

/// Feedback policy picking `σ_hi²` where `σ² D²u + 2h Du ≥ 0` on the stored
/// slice nearest in time-to-go, `σ_lo²` elsewhere.
pub fn bang_bang_policy(model: &GDiffusionModel, sol: &PdeSolution) -> Result<ControlPolicy> {
    if sol.model != *model {
        return Err(Error::GridMismatch("solution was computed for a different model".into()));
    }
    if sol.values.iter().any(|v| v.len() != sol.grid.nx) {
        return Err(Error::GridMismatch("slice length differs from the grid".into()));
    }
    let scheme = Scheme::new(model, sol.grid, 0.0, None, DriftScheme::default())?;
    let g = model.g();
    let t_end = sol.t_end();
    let mut times = Vec::with_capacity(sol.times.len());
    let mut rows = Vec::with_capacity(sol.times.len());
    for (tau, u) in sol.times.iter().zip(&sol.values).rev() {
        times.push(t_end - tau);
        rows.push((0..u.len()).map(|i| g.maximizer(scheme.g_argument(u, i))).collect());
    }
    Ok(ControlPolicy::BangBang(FeedbackTable::new(times, sol.grid, rows)?))
}

/// Empirical decay rate `−ln(E|X^x_t − X^{x'}_t|² / |x − x'|²) / (2t)` of two
/// paths driven by the same noise and the same scenario (read at `X^x`).
pub fn contraction_check(
    model: &GDiffusionModel,
    x: f64,
    x_prime: f64,
    t_end: f64,
    policy: &ControlPolicy,
    params: &McParams,
) -> Result<f64> {
    if x == x_prime {
        return Err(Error::invalid("contraction check needs x != x'"));
    }
    if !(t_end > 0.0) || params.n_paths == 0 {
        return Err(Error::invalid("contraction check needs t_end > 0 and n_paths >= 1"));
    }
    let path = Stepping::new(model, policy, t_end, params.dt)?;
    let sq = (0..params.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(params.seed, i);
            let (mut a, mut b) = (x, x_prime);
            for k in 0..path.steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let c = path.variance(k, a);
                a += path.increment_with(c, a, z)?;
                b += path.increment_with(c, b, z)?;
                if !(a.is_finite() && b.is_finite()) {
                    return Err(Error::PathNonFinite { path: i, step: k + 1 });
                }
            }
            Ok((a - b) * (a - b))
        })
        .collect::<Result<Vec<f64>>>()?;
    let ms = sq.iter().sum::<f64>() / sq.len() as f64;
    Ok(-(ms / ((x - x_prime) * (x - x_prime))).ln() / (2.0 * t_end))
}

/// Writes the first `k` paths at every step as CSV with columns `t,path_id,x`.
pub fn write_paths_csv(
    model: &GDiffusionModel,
    policy: &ControlPolicy,
    x0: f64,
    t_end: f64,
    params: &McParams,
    k: usize,
    out: &Path,
) -> Result<()> {
    let path = Stepping::new(model, policy, t_end, params.dt)?;
    let mut w = csv::Writer::from_path(out)?;
    w.write_record(["t", "path_id", "x"])?;
    for i in 0..k.min(params.n_paths) {
        let mut rng = path_rng(params.seed, i);
        let mut x = x0;
        w.write_record(&["0".to_string(), i.to_string(), x.to_string()])?;
        for s in 0..path.steps {
            x += path.increment(s, x, StandardNormal.sample(&mut rng))?;
            let t = (s + 1) as f64 * path.dt;
            w.write_record(&[t.to_string(), i.to_string(), x.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::pde::{solve, SliceSchedule, SolveOptions};

    fn params(n: usize, dt: f64) -> McParams {
        McParams {
            dt,
            n_paths: n,
            seed: 7,
            functional: Functional::Terminal,
        }
    }

    #[test]
    fn policy_range_is_checked() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        assert!(ControlPolicy::Constant(0.5).validate(m.g()).is_ok());
        assert!(ControlPolicy::Constant(1.5).validate(m.g()).is_err());
        let f = parse("x").unwrap();
        assert!(simulate(&m, &ControlPolicy::Constant(0.1), 0.0, &f, 1.0, &params(10, 0.1)).is_err());
    }

    #[test]
    fn seeded_runs_are_identical() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let f = parse("x^2").unwrap();
        let p = params(1, 1e-2);
        let a = simulate(&m, &ControlPolicy::Constant(1.0), 0.3, &f, 1.0, &p).unwrap();
        let b = simulate(&m, &ControlPolicy::Constant(1.0), 0.3, &f, 1.0, &p).unwrap();
        assert_eq!(a.mean.to_bits(), b.mean.to_bits());
        assert_eq!(a.std_error, 0.0);
    }

    #[test]
    fn thread_count_does_not_change_the_estimate() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let f = parse("x^4 - 3*x^2").unwrap();
        let p = params(500, 1e-2);
        let run = |threads| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            pool.install(|| simulate(&m, &ControlPolicy::Constant(0.25), 1.0, &f, 1.0, &p).unwrap())
        };
        assert_eq!(run(1).mean.to_bits(), run(3).mean.to_bits());
    }

    #[test]
    fn single_policy_lower_bound_is_the_simulation() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let f = parse("x^2").unwrap();
        let p = params(200, 1e-2);
        let pol = ControlPolicy::Constant(0.25);
        let a = lower_bound(&m, &f, 0.0, 1.0, std::slice::from_ref(&pol), &p).unwrap();
        let b = simulate(&m, &pol, 0.0, &f, 1.0, &p).unwrap();
        assert_eq!(a, b);
        assert!(lower_bound(&m, &f, 0.0, 1.0, &[], &p).is_err());
    }

    #[test]
    fn running_functional_of_a_constant() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let f = parse("2").unwrap();
        let p = McParams {
            functional: Functional::Running,
            ..params(5, 0.1)
        };
        let e = simulate(&m, &ControlPolicy::Constant(1.0), 0.0, &f, 1.0, &p).unwrap();
        assert!((e.mean - 2.0).abs() < 1e-12);
    }

    #[test]
    fn bang_bang_signs() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let grid = Grid1D::new(-4.0, 4.0, 161).unwrap();
        let opts = SolveOptions {
            slices: SliceSchedule::Uniform(10),
            ..SolveOptions::default()
        };
        let interior = |pol: &ControlPolicy, t: f64| -> Vec<f64> {
            (1..160).map(|i| pol.variance(t, grid.x(i))).collect()
        };

        let sol = solve(&m, &parse("x^2").unwrap(), 1.0, grid, None, &opts).unwrap();
        let pol = bang_bang_policy(&m, &sol).unwrap();
        for t in [0.0, 0.5, 1.0] {
            assert!(interior(&pol, t).iter().all(|&c| c == 1.0));
        }

        let sol = solve(&m, &parse("-x^2").unwrap(), 1.0, grid, None, &opts).unwrap();
        let pol = bang_bang_policy(&m, &sol).unwrap();
        for t in [0.0, 0.5, 1.0] {
            assert!(interior(&pol, t).iter().all(|&c| c == 0.25));
        }

        // the last elapsed step reads the initial slice, where f'' = 12x² − 6
        let sol = solve(&m, &parse("x^4 - 3*x^2").unwrap(), 1.0, grid, None, &opts).unwrap();
        let pol = bang_bang_policy(&m, &sol).unwrap();
        for i in 1..160 {
            let x = grid.x(i);
            let expect = if x * x < 0.5 { 0.25 } else { 1.0 };
            assert_eq!(pol.variance(1.0, x), expect, "x = {x}");
        }

        let other = GDiffusionModel::g_ou(1.0).unwrap();
        assert!(matches!(bang_bang_policy(&other, &sol), Err(Error::GridMismatch(_))));
    }

    #[test]
    fn contraction_of_affine_models() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let p = params(4, 1e-6);
        let r = contraction_check(&m, 2.0, -1.0, 1.0, &ControlPolicy::Constant(0.6), &p).unwrap();
        assert!((r - 0.5).abs() < 1e-6, "{r}");
        let m = GDiffusionModel::gou_bracket(2.0).unwrap();
        let r = contraction_check(&m, 2.0, -1.0, 1.0, &ControlPolicy::Constant(1.0), &p).unwrap();
        assert!((r - 1.0).abs() < 1e-6, "{r}");
    }

    #[test]
    fn path_dump() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let dir = std::env::temp_dir().join(format!("ergo-paths-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let out = dir.join("paths.csv");
        write_paths_csv(&m, &ControlPolicy::Constant(1.0), 0.0, 0.1, &params(5, 0.01), 3, &out).unwrap();
        let text = std::fs::read_to_string(&out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("t,path_id,x"));
        assert_eq!(lines.count(), 3 * 11);
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
