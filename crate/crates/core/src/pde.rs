//! Explicit monotone scheme for
//!
//! ```text
//! ∂_t u = G(σ(x)² u_xx + 2 h(x) u_x) + b(x) u_x + f₀(x) − ρ u
//! ```
//!
//! Since `G(a) = sup_{c ∈ [σ_lo², σ_hi²]} ½ c a` and the operator is linear in
//! `c`, the sup is taken over the two endpoints. For each endpoint the combined
//! drift `c·h + b` is upwinded separately, so each candidate update is a
//! monotone linear scheme under the CFL bound and the max of the two is monotone.
//!
//! Boundary nodes use a linearly extrapolated ghost value, which kills the
//! second difference there and leaves a one-sided transport term. That stays
//! monotone while the drift points into the domain.

use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gfunc::GFunction;
use crate::model::GDiffusionModel;

/// Uniform grid on `[x_min, x_max]` with `nx` nodes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
}

impl Grid1D {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::invalid(format!("need x_min < x_max, got [{x_min}, {x_max}]")));
        }
        if nx < 3 {
            return Err(Error::invalid(format!("need nx >= 3, got {nx}")));
        }
        Ok(Grid1D { x_min, x_max, nx })
    }

    /// `[−8, 8]` with 1601 nodes (`dx = 0.01`).
    pub fn default_rig() -> Self {
        Grid1D {
            x_min: -8.0,
            x_max: 8.0,
            nx: 1601,
        }
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.nx).map(|i| self.x(i)).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    pub fn nearest(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.dx()).round();
        i.clamp(0.0, (self.nx - 1) as f64) as usize
    }

    /// Same spacing on `[2·x_min, 2·x_max]`.
    pub fn doubled(&self) -> Self {
        Grid1D {
            x_min: 2.0 * self.x_min,
            x_max: 2.0 * self.x_max,
            nx: 2 * self.nx - 1,
        }
    }

    /// Same interval with half the spacing.
    pub fn refined(&self) -> Self {
        Grid1D {
            nx: 2 * self.nx - 1,
            ..*self
        }
    }

    pub fn sample(&self, f: &Expr) -> Result<Vec<f64>> {
        Ok(f.sample(&self.nodes())?)
    }
}

/// Which time slices a solve keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum SliceSchedule {
    /// `first, first·ratio, first·ratio², …` below `t_end`.
    Geometric { first: f64, ratio: f64 },
    /// `count` equally spaced slices after `t = 0`.
    Uniform(usize),
    /// Only `t = 0` and `t_end`.
    Endpoints,
}

impl Default for SliceSchedule {
    fn default() -> Self {
        SliceSchedule::Geometric {
            first: 1e-2,
            ratio: 2f64.powf(0.125),
        }
    }
}

impl SliceSchedule {
    /// Slice times in `(0, t_end]`, always ending with `t_end`.
    pub fn times(&self, t_end: f64) -> Vec<f64> {
        let mut ts = Vec::new();
        match *self {
            SliceSchedule::Geometric { first, ratio } => {
                let mut t = first;
                while t < t_end * (1.0 - 1e-12) {
                    ts.push(t);
                    t *= ratio;
                }
            }
            SliceSchedule::Uniform(count) => {
                for k in 1..count {
                    ts.push(t_end * k as f64 / count as f64);
                }
            }
            SliceSchedule::Endpoints => {}
        }
        if t_end > 0.0 {
            ts.push(t_end);
        }
        ts
    }
}

/// Discretisation of the first-order term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DriftScheme {
    /// One-sided differences in the direction of the drift everywhere.
    Upwind,
    /// Central differences at nodes where the cell Péclet number
    /// `|drift|·dx / (c σ²)` is at most one (the stencil stays monotone there),
    /// upwind elsewhere.
    #[default]
    Hybrid,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    /// Time step; defaults to 0.9× the CFL bound.
    pub dt: Option<f64>,
    /// Discount rate `ρ ≥ 0`.
    pub discount: f64,
    pub slices: SliceSchedule,
    pub drift: DriftScheme,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            dt: None,
            discount: 0.0,
            slices: SliceSchedule::default(),
            drift: DriftScheme::default(),
        }
    }
}

/// Per-node stencil weights of the two candidate operators, per unit time.
///
/// Candidate `k` at node `i` acts as
/// `down[k][i]·(u[i−1] − u[i]) + up[k][i]·(u[i+1] − u[i])`.
#[derive(Debug, Clone)]
pub struct Scheme {
    grid: Grid1D,
    g: GFunction,
    down: [Vec<f64>; 2],
    up: [Vec<f64>; 2],
    sigma_sq: Vec<f64>,
    h: Vec<f64>,
    discount: f64,
    dt: f64,
    dt_bound: f64,
    monotone: bool,
}

impl Scheme {
    pub fn new(
        model: &GDiffusionModel,
        grid: Grid1D,
        discount: f64,
        dt: Option<f64>,
        drift_scheme: DriftScheme,
    ) -> Result<Self> {
        if !(discount >= 0.0) {
            return Err(Error::invalid(format!("discount must be >= 0, got {discount}")));
        }
        let xs = grid.nodes();
        let b = model.b().sample(&xs)?;
        let h = model.h().sample(&xs)?;
        let sigma = model.sigma().sample(&xs)?;
        let n = grid.nx;
        let dx = grid.dx();
        let g = model.g();
        let mut down = [vec![0.0; n], vec![0.0; n]];
        let mut up = [vec![0.0; n], vec![0.0; n]];
        let mut rate: f64 = 0.0;
        let mut monotone = true;
        for (k, &c) in g.candidates().iter().enumerate() {
            for i in 0..n {
                let drift = c * h[i] + b[i];
                let diff = 0.5 * c * sigma[i] * sigma[i] / (dx * dx);
                let (d, u) = if i == 0 {
                    (0.0, drift / dx)
                } else if i == n - 1 {
                    (-drift / dx, 0.0)
                } else if drift_scheme == DriftScheme::Hybrid && drift.abs() <= 2.0 * dx * diff {
                    (diff - 0.5 * drift / dx, diff + 0.5 * drift / dx)
                } else {
                    (diff + (-drift).max(0.0) / dx, diff + drift.max(0.0) / dx)
                };
                if d < 0.0 || u < 0.0 {
                    monotone = false;
                }
                down[k][i] = d;
                up[k][i] = u;
                rate = rate.max(d.abs() + u.abs() + discount);
            }
        }
        if !monotone {
            warn!("outward drift at a boundary node; the scheme is not monotone there");
        }
        let dt_bound = if rate > 0.0 { 1.0 / rate } else { f64::INFINITY };
        let dt = match dt {
            Some(dt) => {
                if !(dt > 0.0) {
                    return Err(Error::invalid(format!("dt must be > 0, got {dt}")));
                }
                if dt > dt_bound {
                    return Err(Error::Cfl { dt, bound: dt_bound });
                }
                dt
            }
            None if dt_bound.is_finite() => 0.9 * dt_bound,
            None => 1.0,
        };
        Ok(Scheme {
            grid,
            g,
            down,
            up,
            sigma_sq: sigma.iter().map(|s| s * s).collect(),
            h,
            discount,
            dt,
            dt_bound,
            monotone,
        })
    }

    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Largest step for which every update weight is non-negative.
    pub fn cfl_bound(&self) -> f64 {
        self.dt_bound
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub(crate) fn weights(&self, k: usize, i: usize) -> (f64, f64) {
        (self.down[k][i], self.up[k][i])
    }

    /// `max_c` of the candidate operators at node `i` (no source, no discount).
    pub fn operator_at(&self, u: &[f64], i: usize) -> f64 {
        let n = u.len();
        let dl = if i > 0 { u[i - 1] - u[i] } else { 0.0 };
        let du = if i + 1 < n { u[i + 1] - u[i] } else { 0.0 };
        let a = self.down[0][i] * dl + self.up[0][i] * du;
        let b = self.down[1][i] * dl + self.up[1][i] * du;
        a.max(b)
    }

    /// The argument `σ² D²u + 2h Du` of `G` at node `i`, by central differences
    /// (one-sided at the ends).
    pub fn g_argument(&self, u: &[f64], i: usize) -> f64 {
        let n = u.len();
        let dx = self.grid.dx();
        let (d2, d1) = if i == 0 {
            (0.0, (u[1] - u[0]) / dx)
        } else if i == n - 1 {
            (0.0, (u[n - 1] - u[n - 2]) / dx)
        } else {
            (
                (u[i + 1] - 2.0 * u[i] + u[i - 1]) / (dx * dx),
                (u[i + 1] - u[i - 1]) / (2.0 * dx),
            )
        };
        self.sigma_sq[i] * d2 + 2.0 * self.h[i] * d1
    }

    pub fn g_function(&self) -> GFunction {
        self.g
    }

    /// One step of size `scale·dt` from `u` into `out`.
    fn step(&self, u: &[f64], out: &mut [f64], source: &[f64], scale: f64) {
        let n = u.len();
        let h = self.dt * scale;
        let rho = self.discount;
        let [dlo, dhi] = &self.down;
        let [ulo, uhi] = &self.up;

        let du = u[1] - u[0];
        out[0] = u[0] + h * ((ulo[0] * du).max(uhi[0] * du) + source[0] - rho * u[0]);
        let dl = u[n - 2] - u[n - 1];
        out[n - 1] = u[n - 1]
            + h * ((dlo[n - 1] * dl).max(dhi[n - 1] * dl) + source[n - 1] - rho * u[n - 1]);

        let inner = out[1..n - 1]
            .iter_mut()
            .zip(u.windows(3))
            .zip(dlo[1..n - 1].iter().zip(&ulo[1..n - 1]))
            .zip(dhi[1..n - 1].iter().zip(&uhi[1..n - 1]))
            .zip(&source[1..n - 1]);
        for ((((o, w), (dl0, ul0)), (dh1, uh1)), s) in inner {
            let (l, c, r) = (w[0] - w[1], w[1], w[2] - w[1]);
            let a = dl0 * l + ul0 * r;
            let b = dh1 * l + uh1 * r;
            *o = c + h * (a.max(b) + s - rho * c);
        }
    }
}

/// Incremental time marcher over a [`Scheme`].
#[derive(Debug, Clone)]
pub struct Stepper {
    scheme: Scheme,
    u: Vec<f64>,
    scratch: Vec<f64>,
    source: Vec<f64>,
    t: f64,
    steps: usize,
}

const FINITE_CHECK_EVERY: usize = 64;

impl Stepper {
    pub fn new(scheme: Scheme, initial: &[f64], source: Option<&[f64]>) -> Result<Self> {
        let n = scheme.grid.nx;
        if initial.len() != n {
            return Err(Error::GridMismatch(format!(
                "initial data has {} values, grid has {n} nodes",
                initial.len()
            )));
        }
        let source = match source {
            Some(s) if s.len() != n => {
                return Err(Error::GridMismatch(format!(
                    "source has {} values, grid has {n} nodes",
                    s.len()
                )))
            }
            Some(s) => s.to_vec(),
            None => vec![0.0; n],
        };
        let st = Stepper {
            scheme,
            u: initial.to_vec(),
            scratch: vec![0.0; n],
            source,
            t: 0.0,
            steps: 0,
        };
        st.check_finite()?;
        Ok(st)
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.u
    }

    pub fn scheme(&self) -> &Scheme {
        &self.scheme
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn check_finite(&self) -> Result<()> {
        if let Some(node) = self.u.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                step: self.steps,
                node,
                x: self.scheme.grid.x(node),
            });
        }
        Ok(())
    }

    /// Marches to time `t` with full steps and one shortened final step.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        let dt = self.scheme.dt;
        while self.t < t {
            let remaining = t - self.t;
            let (scale, next) = if remaining > dt * (1.0 + 1e-9) {
                (1.0, self.t + dt)
            } else {
                (remaining / dt, t)
            };
            self.scheme
                .step(&self.u, &mut self.scratch, &self.source, scale);
            std::mem::swap(&mut self.u, &mut self.scratch);
            self.steps += 1;
            self.t = next;
            if self.steps % FINITE_CHECK_EVERY == 0 {
                self.check_finite()?;
            }
        }
        self.check_finite()
    }

    /// Linear interpolation of the current state at `x`.
    pub fn value_at(&self, x: f64) -> Result<f64> {
        interp(&self.scheme.grid, &self.u, x).ok_or(Error::OutOfRange { t: self.t, x })
    }
}

fn interp(grid: &Grid1D, u: &[f64], x: f64) -> Option<f64> {
    if !grid.contains(x) {
        return None;
    }
    let s = (x - grid.x_min) / grid.dx();
    let i = (s.floor() as usize).min(grid.nx - 2);
    let w = s - i as f64;
    if w == 0.0 {
        return Some(u[i]);
    }
    if w == 1.0 {
        return Some(u[i + 1]);
    }
    Some((1.0 - w) * u[i] + w * u[i + 1])
}

/// Time slices of a solve. `values[k]` is the solution at `times[k]`;
/// `times[0] = 0` and `values[0]` is the sampled initial data.
#[derive(Debug, Clone)]
pub struct PdeSolution {
    pub grid: Grid1D,
    pub dt: f64,
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub model: GDiffusionModel,
}

impl PdeSolution {
    pub fn t_end(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    pub fn last(&self) -> &[f64] {
        self.values.last().map(Vec::as_slice).unwrap_or(&[])
    }

    /// Bilinear interpolation in `(t, x)`.
    pub fn evaluate(&self, t: f64, x: f64) -> Result<f64> {
        let out = Error::OutOfRange { t, x };
        if !(t >= 0.0 && t <= self.t_end()) || !self.grid.contains(x) {
            return Err(out);
        }
        let k = self.times.partition_point(|&s| s <= t);
        // k >= 1 because times[0] = 0 <= t
        let k0 = k - 1;
        let v0 = interp(&self.grid, &self.values[k0], x).ok_or(Error::OutOfRange { t, x })?;
        if k0 + 1 == self.times.len() || self.times[k0] == t {
            return Ok(v0);
        }
        let v1 = interp(&self.grid, &self.values[k0 + 1], x).ok_or(out)?;
        let w = (t - self.times[k0]) / (self.times[k0 + 1] - self.times[k0]);
        Ok((1.0 - w) * v0 + w * v1)
    }

    /// Index of the stored slice closest in time to `t`.
    pub fn nearest_slice(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&s| s < t);
        if k == 0 {
            return 0;
        }
        if k == self.times.len() {
            return k - 1;
        }
        if (self.times[k] - t) < (t - self.times[k - 1]) {
            k
        } else {
            k - 1
        }
    }

    /// Writes all slices as CSV with columns `t,x,u`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["t", "x", "u"])?;
        let xs = self.grid.nodes();
        for (t, row) in self.times.iter().zip(&self.values) {
            for (x, u) in xs.iter().zip(row) {
                w.write_record(&[t.to_string(), x.to_string(), u.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Solves from grid-sampled initial data (and optional sampled source).
pub fn solve_profile(
    model: &GDiffusionModel,
    initial: &[f64],
    t_end: f64,
    grid: Grid1D,
    source: Option<&[f64]>,
    opts: &SolveOptions,
) -> Result<PdeSolution> {
    if !(t_end >= 0.0) {
        return Err(Error::invalid(format!("t_end must be >= 0, got {t_end}")));
    }
    let scheme = Scheme::new(model, grid, opts.discount, opts.dt, opts.drift)?;
    let dt = scheme.dt();
    let mut st = Stepper::new(scheme, initial, source)?;
    let mut times = vec![0.0];
    let mut values = vec![initial.to_vec()];
    for t in opts.slices.times(t_end) {
        st.advance_to(t)?;
        times.push(t);
        values.push(st.values().to_vec());
    }
    Ok(PdeSolution {
        grid,
        dt,
        times,
        values,
        model: model.clone(),
    })
}

/// Solves with initial data `f` and optional running source.
pub fn solve(
    model: &GDiffusionModel,
    f: &Expr,
    t_end: f64,
    grid: Grid1D,
    source: Option<&Expr>,
    opts: &SolveOptions,
) -> Result<PdeSolution> {
    let init = grid.sample(f)?;
    let src = source.map(|s| grid.sample(s)).transpose()?;
    solve_profile(model, &init, t_end, grid, src.as_deref(), opts)
}

/// The G-heat model `b = h = 0`, `σ = 1`.
pub fn g_heat_model(g: GFunction) -> GDiffusionModel {
    GDiffusionModel::new(Expr::Const(0.0), Expr::Const(0.0), Expr::Const(1.0), g, 2)
        .expect("p = 2 is valid")
}

/// `Ê[f(√v·B₁)]` for G-normal `B₁`, via the G-heat equation up to time `v`.
pub fn g_normal_expectation(g: GFunction, f: &Expr, variance: f64) -> Result<f64> {
    g_normal_expectation_on(g, f, variance, Grid1D::default_rig())
}

pub fn g_normal_expectation_on(g: GFunction, f: &Expr, variance: f64, grid: Grid1D) -> Result<f64> {
    if !(variance >= 0.0) {
        return Err(Error::invalid(format!("variance must be >= 0, got {variance}")));
    }
    if variance == 0.0 {
        return Ok(f.eval(0.0)?);
    }
    let model = g_heat_model(g);
    let opts = SolveOptions {
        slices: SliceSchedule::Endpoints,
        ..SolveOptions::default()
    };
    let sol = solve(&model, f, variance, grid, None, &opts)?;
    sol.evaluate(variance, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn coarse() -> Grid1D {
        Grid1D::new(-8.0, 8.0, 321).unwrap()
    }

    fn ends() -> SolveOptions {
        SolveOptions {
            slices: SliceSchedule::Endpoints,
            ..SolveOptions::default()
        }
    }

    #[test]
    fn grid_basics() {
        let g = Grid1D::default_rig();
        assert_eq!(g.dx(), 0.01);
        assert_eq!(g.nearest(0.0), 800);
        assert_eq!(g.x(800), 0.0);
        assert!(Grid1D::new(1.0, 0.0, 10).is_err());
        assert!(Grid1D::new(0.0, 1.0, 2).is_err());
        assert_eq!(g.doubled().dx(), g.dx());
        assert_eq!(g.refined().dx(), 0.005);
    }

    #[test]
    fn slice_schedules() {
        let ts = SliceSchedule::Uniform(4).times(2.0);
        assert_eq!(ts, vec![0.5, 1.0, 1.5, 2.0]);
        assert_eq!(SliceSchedule::Endpoints.times(3.0), vec![3.0]);
        let ts = SliceSchedule::default().times(1.0);
        assert_eq!(*ts.last().unwrap(), 1.0);
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cfl_is_checked() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let s = Scheme::new(&m, coarse(), 0.0, None, DriftScheme::Hybrid).unwrap();
        assert!(s.dt() <= s.cfl_bound());
        assert!((s.dt() / s.cfl_bound() - 0.9).abs() < 1e-12);
        let too_big = 2.0 * s.cfl_bound();
        assert!(matches!(
            Scheme::new(&m, coarse(), 0.0, Some(too_big), DriftScheme::Hybrid),
            Err(Error::Cfl { .. })
        ));
        assert!(s.is_monotone());
    }

    #[test]
    fn outward_drift_flags_non_monotone() {
        let m = GDiffusionModel::new(
            parse("x").unwrap(),
            Expr::Const(0.0),
            Expr::Const(1.0),
            GFunction::default(),
            2,
        )
        .unwrap();
        assert!(!Scheme::new(&m, coarse(), 0.0, None, DriftScheme::Hybrid).unwrap().is_monotone());
    }

    #[test]
    fn constants_are_preserved_exactly() {
        for m in [
            GDiffusionModel::g_ou(0.5).unwrap(),
            GDiffusionModel::dirac().unwrap(),
            GDiffusionModel::gou_bracket(2.0).unwrap(),
        ] {
            let sol = solve(&m, &Expr::Const(3.25), 2.0, coarse(), None, &SolveOptions::default()).unwrap();
            for row in &sol.values {
                assert!(row.iter().all(|&v| v == 3.25));
            }
        }
    }

    #[test]
    fn initial_slice_is_sampled_data() {
        let f = parse("x^4 - 3*x^2").unwrap();
        let sol = solve(&GDiffusionModel::g_ou(0.5).unwrap(), &f, 0.5, coarse(), None, &ends()).unwrap();
        assert_eq!(sol.times[0], 0.0);
        for (x, v) in coarse().nodes().iter().zip(&sol.values[0]) {
            assert_eq!(*v, f.eval(*x).unwrap());
        }
    }

    #[test]
    fn evaluate_interpolates() {
        let f = parse("x").unwrap();
        let sol = solve(&GDiffusionModel::g_ou(0.5).unwrap(), &f, 1.0, coarse(), None, &ends()).unwrap();
        let g = coarse();
        // node and stored time: exact
        assert_eq!(sol.evaluate(1.0, g.x(100)).unwrap(), sol.values[1][100]);
        // midpoint of a linear slice is the mean of the neighbours
        let mid = 0.5 * (g.x(100) + g.x(101));
        let want = 0.5 * (sol.values[1][100] + sol.values[1][101]);
        assert!((sol.evaluate(1.0, mid).unwrap() - want).abs() < 1e-14);
        // initial slice reproduces f within interpolation error
        let q = parse("x^2").unwrap();
        let sq = solve(&GDiffusionModel::g_ou(0.5).unwrap(), &q, 1.0, g, None, &ends()).unwrap();
        let x = 0.123;
        assert!((sq.evaluate(0.0, x).unwrap() - x * x).abs() <= g.dx() * g.dx() * 2.0);
        assert!(matches!(sol.evaluate(1.5, 0.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(sol.evaluate(0.5, 9.0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn odd_data_stays_zero_at_origin() {
        let g = GFunction::new(0.25, 1.0).unwrap();
        for v in [0.3, 1.0, 2.0] {
            let u = g_normal_expectation_on(g, &parse("x").unwrap(), v, coarse()).unwrap();
            assert!(u.abs() < 1e-4);
        }
    }

    #[test]
    fn positive_homogeneity_is_exact_for_powers_of_two() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let f = parse("x^4 - 3*x^2").unwrap();
        let base = solve(&m, &f, 1.0, coarse(), None, &SolveOptions::default()).unwrap();
        for lam in [0.5, 2.0, 4.0] {
            let scaled = parse(&format!("{lam}*(x^4 - 3*x^2)")).unwrap();
            let s = solve(&m, &scaled, 1.0, coarse(), None, &SolveOptions::default()).unwrap();
            for (a, b) in base.values.iter().zip(&s.values) {
                for (p, q) in a.iter().zip(b) {
                    assert_eq!(lam * p, *q);
                }
            }
        }
    }

    #[test]
    fn non_finite_is_reported() {
        let m = g_heat_model(GFunction::default());
        let bad = vec![f64::NAN; coarse().nx];
        assert!(matches!(
            solve_profile(&m, &bad, 0.1, coarse(), None, &ends()),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn source_accumulates_time_integral() {
        // constant source c with zero data gives u(t) = c·t
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let sol = solve(&m, &Expr::Const(0.0), 2.0, coarse(), Some(&Expr::Const(1.5)), &ends()).unwrap();
        for v in sol.last() {
            assert!((v - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn discount_decays_constants() {
        let m = GDiffusionModel::g_ou(0.5).unwrap();
        let opts = SolveOptions {
            discount: 0.5,
            slices: SliceSchedule::Endpoints,
            ..SolveOptions::default()
        };
        let sol = solve(&m, &Expr::Const(1.0), 2.0, coarse(), None, &opts).unwrap();
        let v = sol.evaluate(2.0, 0.0).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-3);
    }
}
