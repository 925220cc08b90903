//! Long-time limits of the scheme: the invariant value `λ̄^f = lim_t Ê[f(X_t)]`
//! and the ergodic value `λ^f = lim_T (1/T) Ê[∫₀^T f(X_s) ds]`.

use std::path::Path;

use log::warn;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::model::GDiffusionModel;
use crate::pde::{DriftScheme, Grid1D, Scheme, SliceSchedule, Stepper};

#[derive(Debug, Clone, PartialEq)]
pub struct LongTimeOptions {
    pub grid: Grid1D,
    pub drift: DriftScheme,
    pub x_ref: f64,
    /// Points at which x-independence of the limits is measured.
    pub probes: Vec<f64>,
    /// Two-horizon convergence tolerance.
    pub tol: f64,
    /// First horizon; doubled until converged.
    pub t_start: f64,
    pub t_max: f64,
    /// Discount rates for the stationary cross-check, extrapolated to zero.
    pub discounts: [f64; 2],
    /// Proceed (with a warning) when dissipativity is not detected.
    pub allow_non_dissipative: bool,
}

impl Default for LongTimeOptions {
    fn default() -> Self {
        LongTimeOptions {
            grid: Grid1D::default_rig(),
            drift: DriftScheme::default(),
            x_ref: 0.0,
            probes: vec![-2.0, -1.0, 0.0, 1.0, 2.0],
            tol: 1e-3,
            t_start: 4.0,
            t_max: 256.0,
            discounts: [0.05, 0.025],
            allow_non_dissipative: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantResult {
    pub lambda_bar: f64,
    /// Exponential decay rate of `|u(t, x_ref) − λ̄|`, when enough slices
    /// sit above the noise floor to fit one.
    pub rate_estimate: Option<f64>,
    /// `max_x |u(T, x) − λ̄|` over the probes.
    pub x_dependence_defect: f64,
    pub horizon: f64,
    /// `(t, u(t, x_ref))` on the stored slices, starting at `t = 0`.
    pub trace: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErgodicResult {
    /// Equal to `lambda_time_avg`.
    pub lambda: f64,
    pub lambda_time_avg: f64,
    pub lambda_discount: f64,
    pub method_disagreement: f64,
    /// `T` of the final slope `(w(2T) − w(T))/T`.
    pub horizon: f64,
    /// `max_x` deviation of the slope estimate over the probes.
    pub x_dependence_defect: f64,
    /// `(ρ, ρ·v_ρ(x_ref))` for each discount.
    pub discounted: Vec<(f64, f64)>,
}

fn check_dissipative(model: &GDiffusionModel, opts: &LongTimeOptions) -> Result<()> {
    let r = model.estimate_assumptions((opts.grid.x_min, opts.grid.x_max), 201);
    if r.eta_estimate > 0.0 {
        return Ok(());
    }
    if opts.allow_non_dissipative {
        warn!(
            "dissipativity not detected (eta estimate {:.3e}); continuing by request",
            r.eta_estimate
        );
        Ok(())
    } else {
        Err(Error::NotDissipative {
            eta: r.eta_estimate,
        })
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

fn probe_points(opts: &LongTimeOptions) -> Vec<f64> {
    let mut pts = vec![opts.x_ref];
    pts.extend(opts.probes.iter().copied().filter(|&x| x != opts.x_ref));
    pts
}

fn probe_values(st: &Stepper, pts: &[f64]) -> Result<Vec<f64>> {
    pts.iter().map(|&x| st.value_at(x)).collect()
}

/// Least-squares decay rate of `|value − limit|` over `[T/10, T]`, using only
/// points above `floor`.
fn fit_rate(trace: &[(f64, f64)], limit: f64, horizon: f64, floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter(|(t, _)| *t >= 0.1 * horizon && *t <= horizon)
        .filter_map(|&(t, v)| {
            let d = (v - limit).abs();
            (d > floor).then(|| (t, d.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(t, y)| (t - mt) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(t, _)| (t - mt) * (t - mt)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Checkpoint horizons `t_start/2, t_start, 2 t_start, …` up to `t_max`.
fn checkpoints(opts: &LongTimeOptions) -> Vec<f64> {
    let mut cps = vec![0.5 * opts.t_start];
    let mut t = opts.t_start;
    while t <= opts.t_max * (1.0 + 1e-12) {
        cps.push(t);
        t *= 2.0;
    }
    cps
}

/// Merged, sorted slice and checkpoint times.
fn march_times(cps: &[f64]) -> Vec<f64> {
    let t_last = *cps.last().unwrap();
    let mut ts = SliceSchedule::default().times(t_last);
    ts.extend_from_slice(cps);
    ts.sort_by(|a, b| a.total_cmp(b));
    ts.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    ts
}

pub fn invariant_value(model: &GDiffusionModel, f: &Expr, opts: &LongTimeOptions) -> Result<InvariantResult> {
    let init = opts.grid.sample(f)?;
    invariant_value_profile(model, &init, opts)
}

/// `λ̄` from grid-sampled initial data.
pub fn invariant_value_profile(
    model: &GDiffusionModel,
    initial: &[f64],
    opts: &LongTimeOptions,
) -> Result<InvariantResult> {
    check_dissipative(model, opts)?;
    let scheme = Scheme::new(model, opts.grid, 0.0, None, opts.drift)?;
    let mut st = Stepper::new(scheme, initial, None)?;
    let pts = probe_points(opts);
    let cps = checkpoints(opts);
    let mut trace = vec![(0.0, st.value_at(opts.x_ref)?)];
    let mut prev: Option<Vec<f64>> = None;
    let mut last_defect = f64::INFINITY;
    let mut cp_iter = cps.iter().peekable();
    for t in march_times(&cps) {
        st.advance_to(t)?;
        trace.push((t, st.value_at(opts.x_ref)?));
        let Some(&&cp) = cp_iter.peek() else { break };
        if (t - cp).abs() > 1e-12 * cp.max(1.0) {
            continue;
        }
        cp_iter.next();
        let vals = probe_values(&st, &pts)?;
        if let Some(p) = &prev {
            last_defect = max_abs_diff(&vals, p);
            if last_defect <= opts.tol {
                let lambda_bar = vals[0];
                let x_dependence_defect = vals.iter().map(|v| (v - lambda_bar).abs()).fold(0.0, f64::max);
                // λ̄ is accurate to about the achieved two-horizon defect
                let floor = 10.0 * last_defect.max(1e-12);
                let rate_estimate = fit_rate(&trace, lambda_bar, t, floor);
                return Ok(InvariantResult {
                    lambda_bar,
                    rate_estimate,
                    x_dependence_defect,
                    horizon: t,
                    trace,
                });
            }
        }
        prev = Some(vals);
    }
    Err(Error::NoConvergence {
        what: "invariant value",
        defect: last_defect,
        horizon: st.time(),
    })
}

/// `(1/T) ∫₀^T u(t, x_ref) dt` by the trapezoid rule over geometric slices.
pub fn cesaro_mean(model: &GDiffusionModel, f: &Expr, horizon: f64, opts: &LongTimeOptions) -> Result<f64> {
    if !(horizon > 0.0) {
        return Err(Error::invalid("horizon must be > 0"));
    }
    let init = opts.grid.sample(f)?;
    let scheme = Scheme::new(model, opts.grid, 0.0, None, opts.drift)?;
    let mut st = Stepper::new(scheme, &init, None)?;
    let mut prev = (0.0, st.value_at(opts.x_ref)?);
    let mut integral = 0.0;
    for t in SliceSchedule::default().times(horizon) {
        st.advance_to(t)?;
        let cur = (t, st.value_at(opts.x_ref)?);
        integral += 0.5 * (cur.0 - prev.0) * (cur.1 + prev.1);
        prev = cur;
    }
    Ok(integral / horizon)
}

pub fn ergodic_value(model: &GDiffusionModel, f: &Expr, opts: &LongTimeOptions) -> Result<ErgodicResult> {
    let src = opts.grid.sample(f)?;
    ergodic_value_profile(model, &src, opts)
}

/// `λ` for a grid-sampled running cost.
pub fn ergodic_value_profile(
    model: &GDiffusionModel,
    cost: &[f64],
    opts: &LongTimeOptions,
) -> Result<ErgodicResult> {
    model.g().require_nondegenerate()?;
    check_dissipative(model, opts)?;
    let (lambda_time_avg, horizon, x_dependence_defect) = time_average_slope(model, cost, opts)?;

    let mut discounted = Vec::with_capacity(2);
    for &rho in &opts.discounts {
        let scheme = Scheme::new(model, opts.grid, rho, None, opts.drift)?;
        let v = discounted_stationary(&scheme, cost)?;
        let st = Stepper::new(scheme, &v, None)?;
        discounted.push((rho, rho * st.value_at(opts.x_ref)?));
    }
    let [(r1, l1), (r2, l2)] = [discounted[0], discounted[1]];
    if r1 == r2 {
        return Err(Error::invalid("the two discount rates must differ"));
    }
    // linear extrapolation of ρ ↦ ρ v_ρ to ρ = 0
    let lambda_discount = l2 + (l2 - l1) * r2 / (r1 - r2);
    Ok(ErgodicResult {
        lambda: lambda_time_avg,
        lambda_time_avg,
        lambda_discount,
        method_disagreement: (lambda_time_avg - lambda_discount).abs(),
        horizon,
        x_dependence_defect,
        discounted,
    })
}

/// Slope `(w(2T) − w(T))/T` of the running-cost solution, doubling `T` until
/// two successive slopes agree within `tol`. Returns (slope, T, x-defect).
fn time_average_slope(model: &GDiffusionModel, cost: &[f64], opts: &LongTimeOptions) -> Result<(f64, f64, f64)> {
    let scheme = Scheme::new(model, opts.grid, 0.0, None, opts.drift)?;
    let zero = vec![0.0; opts.grid.nx];
    let mut st = Stepper::new(scheme, &zero, Some(cost))?;
    let pts = probe_points(opts);
    let mut t = opts.t_start;
    st.advance_to(t)?;
    let mut w_prev = probe_values(&st, &pts)?;
    let mut slope_prev: Option<f64> = None;
    let mut last_defect = f64::INFINITY;
    while t <= opts.t_max * (1.0 + 1e-12) {
        st.advance_to(2.0 * t)?;
        let w = probe_values(&st, &pts)?;
        let slopes: Vec<f64> = w.iter().zip(&w_prev).map(|(a, b)| (a - b) / t).collect();
        let slope = slopes[0];
        if let Some(sp) = slope_prev {
            last_defect = (slope - sp).abs();
            if last_defect <= opts.tol {
                let xdef = slopes.iter().map(|s| (s - slope).abs()).fold(0.0, f64::max);
                return Ok((slope, t, xdef));
            }
        }
        slope_prev = Some(slope);
        w_prev = w;
        t *= 2.0;
    }
    Err(Error::NoConvergence {
        what: "ergodic time average",
        defect: last_defect,
        horizon: t,
    })
}

/// Solves the discrete discounted stationary equation
/// `ρ v_i − max_c (L_c v)_i = f_i` by policy iteration.
pub fn discounted_stationary(scheme: &Scheme, cost: &[f64]) -> Result<Vec<f64>> {
    let n = scheme.grid().nx;
    let rho = scheme.discount();
    if !(rho > 0.0) {
        return Err(Error::invalid("the stationary solve needs a positive discount"));
    }
    if !scheme.is_monotone() {
        let node = (0..n)
            .find(|&i| (0..2).any(|k| {
                let (d, u) = scheme.weights(k, i);
                d < 0.0 || u < 0.0
            }))
            .unwrap_or(0);
        return Err(Error::NonMonotone { node });
    }
    if cost.len() != n {
        return Err(Error::GridMismatch(format!(
            "cost has {} values, grid has {n} nodes",
            cost.len()
        )));
    }
    let mut policy = vec![1usize; n];
    let mut v = vec![0.0; n];
    let (mut sub, mut diag, mut sup) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    for _ in 0..200 {
        for i in 0..n {
            let (d, u) = scheme.weights(policy[i], i);
            sub[i] = -d;
            sup[i] = -u;
            diag[i] = rho + d + u;
        }
        thomas(&sub, &diag, &sup, cost, &mut v);
        let mut changed = false;
        for i in 0..n {
            let dl = if i > 0 { v[i - 1] - v[i] } else { 0.0 };
            let du = if i + 1 < n { v[i + 1] - v[i] } else { 0.0 };
            let val = |k: usize| {
                let (d, u) = scheme.weights(k, i);
                d * dl + u * du
            };
            let cur = val(policy[i]);
            let other = val(1 - policy[i]);
            // ignore round-off sized improvements so ties cannot cycle
            let (d0, u0) = scheme.weights(0, i);
            let (d1, u1) = scheme.weights(1, i);
            let mag = v[i].abs() + dl.abs() + du.abs();
            if other > cur + 1e-12 * (d0 + u0 + d1 + u1) * mag {
                policy[i] = 1 - policy[i];
                changed = true;
            }
        }
        if !changed {
            if let Some(node) = v.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    step: 0,
                    node,
                    x: scheme.grid().x(node),
                });
            }
            return Ok(v);
        }
    }
    Err(Error::NoConvergence {
        what: "policy iteration",
        defect: f64::NAN,
        horizon: f64::INFINITY,
    })
}

/// Tridiagonal solve; `sub[0]` and `sup[n−1]` are ignored.
fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64], out: &mut [f64]) {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    out[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        out[i] = d[i] - c[i] * out[i + 1];
    }
}

/// Running cost `f = −G(σ² v'' + 2h v') − b v'` sampled on the grid; its
/// ergodic value is zero.
pub fn ergodic_residual_cost(model: &GDiffusionModel, v: &Expr, grid: Grid1D) -> Result<Vec<f64>> {
    let d1 = v.deriv(1)?;
    let d2 = v.deriv(2)?;
    let g = model.g();
    grid.nodes()
        .into_iter()
        .map(|x| {
            let s = model.sigma().eval(x)?;
            let arg = s * s * d2.eval(x)? + 2.0 * model.h().eval(x)? * d1.eval(x)?;
            Ok(-g.eval(arg) - model.b().eval(x)? * d1.eval(x)?)
        })
        .collect()
}

/// Ergodic value of the cost built from `v` by [`ergodic_residual_cost`].
pub fn ergodic_residual(model: &GDiffusionModel, v: &Expr, opts: &LongTimeOptions) -> Result<f64> {
    model.g().require_nondegenerate()?;
    let cost = ergodic_residual_cost(model, v, opts.grid)?;
    if cost.iter().all(|&c| c == 0.0) {
        return Ok(0.0);
    }
    Ok(ergodic_value_profile(model, &cost, opts)?.lambda)
}

/// Writes `t,value,defect` rows with `defect = |u(t, x_ref) − λ̄|`.
pub fn write_trace_csv(result: &InvariantResult, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["t", "value", "defect"])?;
    for &(t, v) in &result.trace {
        w.write_record(&[
            t.to_string(),
            v.to_string(),
            (v - result.lambda_bar).abs().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
