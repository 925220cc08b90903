//! The invariant and ergodic values as functionals `Λ̄[f] = λ̄^f`, `Λ[f] = λ^f`
//! on a dictionary of test functions.

use std::path::Path;

use log::info;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expr::{parse, parse_with_constants, Expr};
use crate::gfunc::GFunction;
use crate::longtime::{ergodic_value_profile, invariant_value_profile, LongTimeOptions};
use crate::model::GDiffusionModel;
use crate::pde::{solve, solve_profile, Grid1D, SliceSchedule, SolveOptions};
use crate::quad::{gaussian_expectation, prob_abs_le};

/// Tolerance of the sublinearity checks.
pub const SUBLINEAR_TOL: f64 = 2e-2;
/// Allowed excess of `Λ` over `Λ̄`.
pub const ORDER_TOL: f64 = 1e-2;

/// A labelled test function with its growth order `p` (`f ∈ C_{2p,Lip}`).
#[derive(Debug, Clone, PartialEq)]
pub struct DictEntry {
    pub label: String,
    pub f: Expr,
    pub p: u32,
}

impl DictEntry {
    pub fn new(src: &str, p: u32) -> Result<Self> {
        Ok(DictEntry {
            label: src.to_string(),
            f: parse(src)?,
            p,
        })
    }
}

pub fn default_dictionary() -> Vec<DictEntry> {
    [
        ("3", 1),
        ("x", 1),
        ("x^2", 1),
        ("-x^2", 1),
        ("abs(x)", 1),
        ("x^4 - 3*x^2", 2),
        ("max(0, 1 - x^2)", 1),
        ("exp(-x)*x^2", 2),
    ]
    .into_iter()
    .map(|(s, p)| DictEntry::new(s, p).expect("built-in dictionary parses"))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub lambda_bar: f64,
    pub lambda: f64,
    /// `lambda_bar − lambda`.
    pub gap: f64,
}

/// `(λ̄^f, λ^f, λ̄^f − λ^f)`.
pub fn compare(model: &GDiffusionModel, f: &Expr, opts: &LongTimeOptions) -> Result<Comparison> {
    compare_profile(model, &opts.grid.sample(f)?, opts)
}

fn compare_profile(model: &GDiffusionModel, f: &[f64], opts: &LongTimeOptions) -> Result<Comparison> {
    let lambda_bar = invariant_value_profile(model, f, opts)?.lambda_bar;
    let lambda = ergodic_value_profile(model, f, opts)?.lambda;
    Ok(Comparison {
        lambda_bar,
        lambda,
        gap: lambda_bar - lambda,
    })
}

/// `|λ̄^{f̄} − λ̄^f|` where `f̄(x) = Ê[f(X^x_t)]` is the solver slice at `t`.
pub fn invariance_defect(model: &GDiffusionModel, f: &Expr, t: f64, opts: &LongTimeOptions) -> Result<f64> {
    Ok(invariance_defects(model, f, &[t], opts)?[0])
}

/// [`invariance_defect`] at several times, sharing the `λ̄^f` solve.
pub fn invariance_defects(model: &GDiffusionModel, f: &Expr, ts: &[f64], opts: &LongTimeOptions) -> Result<Vec<f64>> {
    if ts.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::invalid("invariance defect needs t > 0"));
    }
    let base = invariant_value_profile(model, &opts.grid.sample(f)?, opts)?.lambda_bar;
    let solve_opts = SolveOptions {
        drift: opts.drift,
        slices: SliceSchedule::Endpoints,
        ..SolveOptions::default()
    };
    ts.iter()
        .map(|&t| {
            let sol = solve(model, f, t, opts.grid, None, &solve_opts)?;
            let pushed = invariant_value_profile(model, sol.last(), opts)?.lambda_bar;
            Ok((pushed - base).abs())
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportEntry {
    pub label: String,
    pub lambda_bar: f64,
    pub lambda: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionalReport {
    pub entries: Vec<ReportEntry>,
    pub sublinearity_violations: Vec<String>,
    pub ordering_violations: Vec<String>,
}

impl FunctionalReport {
    pub fn passed(&self) -> bool {
        self.sublinearity_violations.is_empty() && self.ordering_violations.is_empty()
    }

    /// CSV with columns `entry,lambda_bar,lambda,gap`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["entry", "lambda_bar", "lambda", "gap"])?;
        for e in &self.entries {
            w.write_record(&[
                e.label.clone(),
                e.lambda_bar.to_string(),
                e.lambda.to_string(),
                e.gap.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut s = String::new();
        for e in &self.entries {
            s += &format!(
                "{:<20} lambda_bar={:>10.5} lambda={:>10.5} gap={:>10.5}\n",
                e.label, e.lambda_bar, e.lambda, e.gap
            );
        }
        for v in self.sublinearity_violations.iter().chain(&self.ordering_violations) {
            s += &format!("violation: {v}\n");
        }
        s
    }
}

fn for_entry(model: &GDiffusionModel, e: &DictEntry) -> Result<GDiffusionModel> {
    model.clone().with_p(e.p)
}

/// `Λ̄`, `Λ` and their gap for every entry, with ordering violations
/// (`λ > λ̄ + ORDER_TOL`).
pub fn compare_dictionary(model: &GDiffusionModel, dict: &[DictEntry], opts: &LongTimeOptions) -> Result<FunctionalReport> {
    if dict.is_empty() {
        return Err(Error::invalid("dictionary is empty"));
    }
    let entries = dict
        .par_iter()
        .map(|e| {
            let c = compare(&for_entry(model, e)?, &e.f, opts)?;
            info!("{}: lambda_bar={} lambda={}", e.label, c.lambda_bar, c.lambda);
            Ok(ReportEntry {
                label: e.label.clone(),
                lambda_bar: c.lambda_bar,
                lambda: c.lambda,
                gap: c.gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let ordering_violations = entries
        .iter()
        .filter(|e| e.gap < -ORDER_TOL)
        .map(|e| format!("{}: lambda {} exceeds lambda_bar {}", e.label, e.lambda, e.lambda_bar))
        .collect();
    Ok(FunctionalReport {
        entries,
        sublinearity_violations: Vec::new(),
        ordering_violations,
    })
}

/// [`compare_dictionary`] plus, for both functionals: constant preservation,
/// monotonicity on nodewise-ordered pairs, sub-additivity on all pairs and
/// positive homogeneity for factors 0.5 and 2.
pub fn sublinearity_report(model: &GDiffusionModel, dict: &[DictEntry], opts: &LongTimeOptions) -> Result<FunctionalReport> {
    let mut report = compare_dictionary(model, dict, opts)?;
    let grid = opts.grid;
    let profiles = dict.iter().map(|e| grid.sample(&e.f)).collect::<std::result::Result<Vec<_>, _>>()?;
    let mut bad = Vec::new();
    let values = |e: &ReportEntry| [("lambda_bar", e.lambda_bar), ("lambda", e.lambda)];

    for (d, e) in dict.iter().zip(&report.entries) {
        if let Some(c) = d.f.constant_value() {
            for (name, v) in values(e) {
                if (v - c).abs() > SUBLINEAR_TOL {
                    bad.push(format!("{name}[{}] = {v}, expected {c}", e.label));
                }
            }
        }
    }

    for i in 0..dict.len() {
        for j in 0..dict.len() {
            if i != j && profiles[i].iter().zip(&profiles[j]).all(|(a, b)| a <= b) {
                for ((name, vi), (_, vj)) in values(&report.entries[i]).into_iter().zip(values(&report.entries[j])) {
                    if vi > vj + SUBLINEAR_TOL {
                        bad.push(format!(
                            "monotonicity of {name}: {} <= {} but {vi} > {vj}",
                            dict[i].label, dict[j].label
                        ));
                    }
                }
            }
        }
    }

    let pairs: Vec<(usize, usize)> = (0..dict.len()).flat_map(|i| (i + 1..dict.len()).map(move |j| (i, j))).collect();
    let sums = pairs
        .par_iter()
        .map(|&(i, j)| {
            let p = dict[i].p.max(dict[j].p);
            let sum: Vec<f64> = profiles[i].iter().zip(&profiles[j]).map(|(a, b)| a + b).collect();
            compare_profile(&model.clone().with_p(p)?, &sum, opts)
        })
        .collect::<Result<Vec<_>>>()?;
    for (&(i, j), s) in pairs.iter().zip(&sums) {
        let (a, b) = (&report.entries[i], &report.entries[j]);
        if s.lambda_bar > a.lambda_bar + b.lambda_bar + SUBLINEAR_TOL {
            bad.push(format!("sub-additivity of lambda_bar on {} + {}", a.label, b.label));
        }
        if s.lambda > a.lambda + b.lambda + SUBLINEAR_TOL {
            bad.push(format!("sub-additivity of lambda on {} + {}", a.label, b.label));
        }
    }

    let scaled = dict
        .par_iter()
        .zip(&profiles)
        .map(|(d, prof)| {
            [0.5, 2.0]
                .iter()
                .map(|&k| {
                    let p: Vec<f64> = prof.iter().map(|v| k * v).collect();
                    Ok((k, compare_profile(&for_entry(model, d)?, &p, opts)?))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    for (e, ks) in report.entries.iter().zip(&scaled) {
        for (k, c) in ks {
            if (c.lambda_bar - k * e.lambda_bar).abs() > SUBLINEAR_TOL {
                bad.push(format!("homogeneity of lambda_bar on {} with factor {k}", e.label));
            }
            if (c.lambda - k * e.lambda).abs() > SUBLINEAR_TOL {
                bad.push(format!("homogeneity of lambda on {} with factor {k}", e.label));
            }
        }
    }

    report.sublinearity_violations = bad;
    Ok(report)
}

/// Lower bound for `Ê[B₁⁴ − 3B₁²]` from splitting `B₁ = B_{1/2} + (B₁ − B_{1/2})`
/// and taking the better of the two extreme variances on the second half.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapBound {
    pub sigma_lo_sq: f64,
    /// `E[g₁ ∨ g₂(Y)]`, `Y ~ N(0, 1/2)`.
    pub bound_value: f64,
    /// `(9/16)(1 − σ_lo²)² P(|Y| ≤ √(1 − σ_lo²)/4)`.
    pub floor_value: f64,
    /// `|x|` below which `g₂ ≥ g₁`: `√(1 − σ_lo²)/2`.
    pub threshold: f64,
}

/// `g₁(x) = x⁴ − 3/4` and `g₂(x) = x⁴ + 3(s − 1)x² + (3/4)s² − (3/2)s`, the
/// conditional values of `x⁴ − 3x²` over a half time unit at variance 1 and `s`.
pub fn gap_functions(sigma_lo_sq: f64) -> Result<(Expr, Expr)> {
    let g1 = parse("x^4 - 3/4")?;
    let g2 = parse_with_constants("x^4 + 3*(s-1)*x^2 + (3/4)*s^2 - (3/2)*s", &[("s", sigma_lo_sq)])?;
    Ok((g1, g2))
}

pub fn gap_lower_bound(sigma_lo_sq: f64) -> Result<GapBound> {
    if !(sigma_lo_sq > 0.0 && sigma_lo_sq <= 1.0) {
        return Err(Error::invalid(format!("sigma_lo_sq must lie in (0, 1], got {sigma_lo_sq}")));
    }
    let (g1, g2) = gap_functions(sigma_lo_sq)?;
    let q = 1.0 - sigma_lo_sq;
    let threshold = q.sqrt() / 2.0;
    let bound_value = gaussian_expectation(
        |y| g1.eval(y).unwrap_or(f64::NAN).max(g2.eval(y).unwrap_or(f64::NAN)),
        0.5,
        &[-threshold, threshold],
        1e-13,
    )?;
    let floor_value = 9.0 / 16.0 * q * q * prob_abs_le(q.sqrt() / 4.0, 0.5);
    Ok(GapBound {
        sigma_lo_sq,
        bound_value,
        floor_value,
        threshold,
    })
}

/// `Ê[f(m + √(1/2)·B₁ + ⟨B⟩₁)]`, as the time-1 value at `x = 0` of the model
/// `b = 0, h = 1, σ = √(1/2)` started from `f(m + ·)`.
pub fn bracket_reference(g: GFunction, m: f64, f: &Expr, grid: Grid1D) -> Result<f64> {
    let aux = GDiffusionModel::new(Expr::Const(0.0), Expr::Const(1.0), Expr::Const(0.5f64.sqrt()), g, 2)?;
    let shifted = f.compose(&parse_with_constants("m + x", &[("m", m)])?);
    let opts = SolveOptions {
        slices: SliceSchedule::Endpoints,
        ..SolveOptions::default()
    };
    let init = grid.sample(&shifted)?;
    solve_profile(&aux, &init, 1.0, grid, None, &opts)?.evaluate(1.0, 0.0)
}
