use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Deserialize;

use ergo_core::longtime::{self, LongTimeOptions};
use ergo_core::mc::{self, ControlPolicy, Functional, McParams};
use ergo_core::measures::{self, default_dictionary};
use ergo_core::pde::{self, Grid1D, SliceSchedule, SolveOptions};
use ergo_core::{checks, make_builtin, parse, Expr, GDiffusionModel, GFunction};

#[derive(Parser, Debug)]
#[command(name = "ergo", version, about = "Invariant and ergodic values of 1-D G-diffusions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// G-normal expectation E[f(sqrt(v) B_1)]
    Gnormal,
    /// Time-march u(t, x) = E[f(X_t^x)]
    Solve,
    /// Long-time limit lambda_bar of E[f(X_t)]
    Invariant,
    /// Ergodic constant lambda of (1/T) E[int f(X_s) ds]
    Ergodic,
    /// lambda_bar, lambda and their gap for f, or for the default dictionary
    Compare,
    /// Scenario Monte Carlo under a volatility policy
    Mc,
    /// Run the acceptance suite
    PaperChecks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FunctionalArg {
    Terminal,
    Running,
}

#[derive(Args, Debug, Default)]
struct Opts {
    /// TOML run configuration; flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Model: g_ou:ALPHA, gou_bracket:M, dirac, or custom (with --b/--h/--sigma-x)
    #[arg(long, global = true)]
    model: Option<String>,
    /// Drift b(x) of a custom model
    #[arg(long, global = true, allow_hyphen_values = true)]
    b: Option<String>,
    /// Coefficient h(x) of d<B> in a custom model
    #[arg(long, global = true, allow_hyphen_values = true)]
    h: Option<String>,
    /// Diffusion coefficient sigma(x) of a custom model
    #[arg(long = "sigma-x", global = true, allow_hyphen_values = true)]
    sigma_x: Option<String>,
    /// Variance interval LO,HI
    #[arg(long, global = true)]
    sigma: Option<String>,
    /// Growth order p
    #[arg(long, global = true)]
    p: Option<u32>,
    /// Test function f(x)
    #[arg(long, global = true, allow_hyphen_values = true)]
    f: Option<String>,
    /// Running source f0(x) for solve
    #[arg(long, global = true, allow_hyphen_values = true)]
    source: Option<String>,
    #[arg(long, global = true)]
    variance: Option<f64>,
    #[arg(long = "t-end", global = true)]
    t_end: Option<f64>,
    /// Evaluation point (solve), reference point (invariant, ergodic), start (mc)
    #[arg(long, global = true, allow_hyphen_values = true)]
    x: Option<f64>,
    #[arg(long = "x-min", global = true, allow_hyphen_values = true)]
    x_min: Option<f64>,
    #[arg(long = "x-max", global = true, allow_hyphen_values = true)]
    x_max: Option<f64>,
    #[arg(long, global = true)]
    nx: Option<usize>,
    /// Time step (PDE for solve/gnormal, Euler step for mc)
    #[arg(long, global = true)]
    dt: Option<f64>,
    /// Long-time convergence tolerance
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long = "n-paths", global = true)]
    n_paths: Option<usize>,
    /// lo, hi, mid, constant:C, best (max over lo, mid, hi) or bang-bang
    #[arg(long, global = true)]
    policy: Option<String>,
    #[arg(long, global = true, value_enum)]
    functional: Option<FunctionalArg>,
    /// Number of Monte Carlo paths to dump
    #[arg(long = "dump-paths", global = true)]
    dump_paths: Option<usize>,
    /// Directory for CSV artifacts
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run long-time computations even when dissipativity is not detected
    #[arg(long = "allow-non-dissipative", global = true)]
    allow_non_dissipative: bool,
    /// Subset of acceptance checks, e.g. 1,3,5
    #[arg(long, global = true, value_delimiter = ',')]
    only: Option<Vec<u32>>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunConfig {
    #[serde(default)]
    model: ModelBlock,
    #[serde(default)]
    grid: GridBlock,
    #[serde(default)]
    run: RunBlock,
    #[serde(default)]
    output: OutputBlock,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct ModelBlock {
    name: Option<String>,
    b: Option<String>,
    h: Option<String>,
    sigma: Option<String>,
    sigma_lo_sq: Option<f64>,
    sigma_hi_sq: Option<f64>,
    p: Option<u32>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct GridBlock {
    x_min: Option<f64>,
    x_max: Option<f64>,
    nx: Option<usize>,
    dt: Option<f64>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunBlock {
    f: Option<String>,
    source: Option<String>,
    variance: Option<f64>,
    t_end: Option<f64>,
    x: Option<f64>,
    tol: Option<f64>,
    seed: Option<u64>,
    n_paths: Option<usize>,
    mc_dt: Option<f64>,
    policy: Option<String>,
    functional: Option<FunctionalArg>,
    dump_paths: Option<usize>,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct OutputBlock {
    dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Run(ergo_core::Error),
    #[error("{0}")]
    Failed(String),
}

impl From<ergo_core::Error> for CliError {
    fn from(e: ergo_core::Error) -> Self {
        CliError::Run(e)
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// Flags merged over the config file, with defaults resolved.
struct Resolved {
    model: GDiffusionModel,
    grid: Grid1D,
    pde_dt: Option<f64>,
    f: Option<Expr>,
    source: Option<Expr>,
    variance: f64,
    t_end: Option<f64>,
    x: f64,
    tol: Option<f64>,
    allow_non_dissipative: bool,
    seed: u64,
    n_paths: usize,
    mc_dt: f64,
    policy: String,
    functional: Functional,
    dump_paths: Option<usize>,
    out: Option<PathBuf>,
}

fn parse_expr(what: &str, src: &str) -> Result<Expr, CliError> {
    parse(src).map_err(|e| CliError::Config(format!("{what} `{src}`: {e}")))
}

fn parse_sigma(s: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [lo, hi] => {
            let lo = lo.parse::<f64>().map_err(config_err)?;
            let hi = hi.parse::<f64>().map_err(config_err)?;
            Ok((lo, hi))
        }
        _ => Err(CliError::Config(format!("--sigma expects LO,HI, got `{s}`"))),
    }
}

fn build_model(name: &str, cfg: &ModelBlock, o: &Opts) -> Result<GDiffusionModel, CliError> {
    let (base, params) = match name.split_once(':') {
        Some((n, rest)) => {
            let ps = rest
                .split(',')
                .map(|p| p.trim().parse::<f64>().map_err(config_err))
                .collect::<Result<Vec<_>, _>>()?;
            (n, ps)
        }
        None => (name, Vec::new()),
    };
    if base != "custom" {
        return make_builtin(base, &params).map_err(config_err);
    }
    let get = |flag: &Option<String>, file: &Option<String>, what: &str| -> Result<Expr, CliError> {
        let src = flag
            .clone()
            .or_else(|| file.clone())
            .ok_or_else(|| CliError::Config(format!("custom model needs {what}")))?;
        parse_expr(what, &src)
    };
    let b = get(&o.b, &cfg.b, "b")?;
    let h = get(&o.h, &cfg.h, "h")?;
    let sigma = get(&o.sigma_x, &cfg.sigma, "sigma")?;
    GDiffusionModel::new(b, h, sigma, GFunction::default(), 2).map_err(config_err)
}

fn resolve(o: &Opts) -> Result<Resolved, CliError> {
    let cfg: RunConfig = match &o.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };

    let name = o.model.clone().or(cfg.model.name.clone()).unwrap_or_else(|| "g_ou:0.5".into());
    let mut model = build_model(&name, &cfg.model, o)?;
    let (lo, hi) = match &o.sigma {
        Some(s) => parse_sigma(s)?,
        None => {
            let g = model.g();
            (
                cfg.model.sigma_lo_sq.unwrap_or(g.sigma_lo_sq()),
                cfg.model.sigma_hi_sq.unwrap_or(g.sigma_hi_sq()),
            )
        }
    };
    model = model.with_g(GFunction::new(lo, hi).map_err(config_err)?);
    if let Some(p) = o.p.or(cfg.model.p) {
        model = model.with_p(p).map_err(config_err)?;
    }

    let rig = Grid1D::default_rig();
    let grid = Grid1D::new(
        o.x_min.or(cfg.grid.x_min).unwrap_or(rig.x_min),
        o.x_max.or(cfg.grid.x_max).unwrap_or(rig.x_max),
        o.nx.or(cfg.grid.nx).unwrap_or(rig.nx),
    )
    .map_err(config_err)?;

    let f = o.f.clone().or(cfg.run.f).map(|s| parse_expr("f", &s)).transpose()?;
    let source = o.source.clone().or(cfg.run.source).map(|s| parse_expr("source", &s)).transpose()?;
    let functional = match o.functional.or(cfg.run.functional) {
        Some(FunctionalArg::Running) => Functional::Running,
        _ => Functional::Terminal,
    };

    let pde_dt = o.dt.or(cfg.grid.dt);
    if let Some(dt) = pde_dt {
        // CFL is checked against the resolved grid up front so a bad dt is a config error
        pde::Scheme::new(&model, grid, 0.0, Some(dt), Default::default()).map_err(config_err)?;
    }

    Ok(Resolved {
        model,
        grid,
        pde_dt,
        f,
        source,
        variance: o.variance.or(cfg.run.variance).unwrap_or(1.0),
        t_end: o.t_end.or(cfg.run.t_end),
        x: o.x.or(cfg.run.x).unwrap_or(0.0),
        tol: o.tol.or(cfg.run.tol),
        allow_non_dissipative: o.allow_non_dissipative,
        seed: o.seed.or(cfg.run.seed).unwrap_or(0),
        n_paths: o.n_paths.or(cfg.run.n_paths).unwrap_or(10_000),
        mc_dt: o.dt.or(cfg.run.mc_dt).unwrap_or(1e-3),
        policy: o.policy.clone().or(cfg.run.policy).unwrap_or_else(|| "best".into()),
        functional,
        dump_paths: o.dump_paths.or(cfg.run.dump_paths),
        out: o.out.clone().or(cfg.output.dir),
    })
}

impl Resolved {
    fn f(&self) -> Result<&Expr, CliError> {
        self.f.as_ref().ok_or_else(|| CliError::Config("missing --f".into()))
    }

    fn t_end(&self) -> Result<f64, CliError> {
        self.t_end.ok_or_else(|| CliError::Config("missing --t-end".into()))
    }

    fn long_time(&self) -> LongTimeOptions {
        let mut o = LongTimeOptions {
            grid: self.grid,
            x_ref: self.x,
            allow_non_dissipative: self.allow_non_dissipative,
            ..LongTimeOptions::default()
        };
        if let Some(tol) = self.tol {
            o.tol = tol;
        }
        o
    }

    fn artifact(&self, name: &str) -> Result<Option<PathBuf>, CliError> {
        match &self.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
                Ok(Some(dir.join(name)))
            }
            None => Ok(None),
        }
    }
}

fn written(path: &Path) -> String {
    format!(" csv={}", path.display())
}

fn policy_list(r: &Resolved, sol: Option<&pde::PdeSolution>) -> Result<Vec<ControlPolicy>, CliError> {
    let g = r.model.g();
    let (lo, hi) = (g.sigma_lo_sq(), g.sigma_hi_sq());
    let one = |c: f64| Ok(vec![ControlPolicy::Constant(c)]);
    match r.policy.as_str() {
        "lo" => one(lo),
        "hi" => one(hi),
        "mid" => one(0.5 * (lo + hi)),
        "best" => Ok(vec![
            ControlPolicy::Constant(lo),
            ControlPolicy::Constant(0.5 * (lo + hi)),
            ControlPolicy::Constant(hi),
        ]),
        "bang-bang" => Ok(vec![mc::bang_bang_policy(&r.model, sol.expect("solution for bang-bang"))?]),
        other => match other.strip_prefix("constant:") {
            Some(c) => {
                let c: f64 = c.parse().map_err(config_err)?;
                if !g.contains(c) {
                    return Err(CliError::Config(format!("policy value {c} outside [{lo}, {hi}]")));
                }
                one(c)
            }
            None => Err(CliError::Config(format!("unknown policy `{other}`"))),
        },
    }
}

fn execute(cmd: Command, o: &Opts) -> Result<String, CliError> {
    if cmd == Command::PaperChecks {
        return paper_checks(o);
    }
    let r = resolve(o)?;
    match cmd {
        Command::Gnormal => {
            let f = r.f()?;
            if !(r.variance >= 0.0) {
                return Err(CliError::Config(format!("variance must be >= 0, got {}", r.variance)));
            }
            let v = pde::g_normal_expectation_on(r.model.g(), f, r.variance, r.grid)?;
            Ok(format!("value={v} variance={}", r.variance))
        }
        Command::Solve => {
            let f = r.f()?;
            let t_end = r.t_end()?;
            let opts = SolveOptions {
                dt: r.pde_dt,
                ..SolveOptions::default()
            };
            let sol = pde::solve(&r.model, f, t_end, r.grid, r.source.as_ref(), &opts)?;
            let u = sol.evaluate(t_end, r.x)?;
            let mut line = format!("t={t_end} x={} u={u} dt={} slices={}", r.x, sol.dt, sol.times.len());
            if let Some(p) = r.artifact("solution.csv")? {
                sol.write_csv(&p)?;
                line += &written(&p);
            }
            Ok(line)
        }
        Command::Invariant => {
            let res = longtime::invariant_value(&r.model, r.f()?, &r.long_time())?;
            let rate = res.rate_estimate.map_or("none".to_string(), |v| v.to_string());
            let mut line = format!(
                "lambda_bar={} rate={rate} horizon={} x_defect={}",
                res.lambda_bar, res.horizon, res.x_dependence_defect
            );
            if let Some(p) = r.artifact("invariant_trace.csv")? {
                longtime::write_trace_csv(&res, &p)?;
                line += &written(&p);
            }
            Ok(line)
        }
        Command::Ergodic => {
            let res = longtime::ergodic_value(&r.model, r.f()?, &r.long_time())?;
            Ok(format!(
                "lambda={} lambda_discount={} disagreement={} horizon={} x_defect={}",
                res.lambda, res.lambda_discount, res.method_disagreement, res.horizon, res.x_dependence_defect
            ))
        }
        Command::Compare => {
            let opts = r.long_time();
            if let Some(f) = &r.f {
                let c = measures::compare(&r.model, f, &opts)?;
                return Ok(format!("lambda_bar={} lambda={} gap={}", c.lambda_bar, c.lambda, c.gap));
            }
            let rep = measures::sublinearity_report(&r.model, &default_dictionary(), &opts)?;
            eprint!("{}", rep.summary());
            let mut line = format!(
                "entries={} sublinearity_violations={} ordering_violations={}",
                rep.entries.len(),
                rep.sublinearity_violations.len(),
                rep.ordering_violations.len()
            );
            if let Some(p) = r.artifact("report.csv")? {
                rep.write_csv(&p)?;
                line += &written(&p);
            }
            if rep.passed() {
                Ok(line)
            } else {
                println!("{line}");
                Err(CliError::Failed("dictionary report has violations".into()))
            }
        }
        Command::Mc => {
            let f = r.f()?;
            let t_end = r.t_end()?;
            let params = McParams {
                dt: r.mc_dt,
                n_paths: r.n_paths,
                seed: r.seed,
                functional: r.functional,
            };
            let sol = if r.policy == "bang-bang" {
                let steps = (t_end / r.mc_dt).ceil().max(1.0) as usize;
                let opts = SolveOptions {
                    slices: SliceSchedule::Uniform(steps),
                    ..SolveOptions::default()
                };
                Some(pde::solve(&r.model, f, t_end, r.grid, None, &opts)?)
            } else {
                None
            };
            let policies = policy_list(&r, sol.as_ref())?;
            let est = mc::lower_bound(&r.model, f, r.x, t_end, &policies, &params)?;
            let mut line = format!(
                "mean={} std_error={} n_paths={} dt={} seed={}",
                est.mean, est.std_error, est.n_paths, est.dt, est.seed
            );
            if let Some(k) = r.dump_paths {
                if let Some(p) = r.artifact("paths.csv")? {
                    mc::write_paths_csv(&r.model, &policies[0], r.x, t_end, &params, k, &p)?;
                    line += &written(&p);
                } else {
                    warn!("--dump-paths needs --out; no paths written");
                }
            }
            Ok(line)
        }
        Command::PaperChecks => unreachable!(),
    }
}

fn paper_checks(o: &Opts) -> Result<String, CliError> {
    let ids: Vec<u32> = match &o.only {
        Some(ids) => {
            if let Some(bad) = ids.iter().find(|id| !checks::CHECKS.iter().any(|c| c.0 == **id)) {
                return Err(CliError::Config(format!("no check with id {bad}")));
            }
            ids.clone()
        }
        None => checks::CHECKS.iter().map(|c| c.0).collect(),
    };
    let mut failed = 0;
    for id in &ids {
        let outcome = checks::run(*id).expect("id validated");
        println!("{outcome}");
        if !outcome.passed {
            failed += 1;
        }
    }
    let line = format!("checks={} passed={} failed={failed}", ids.len(), ids.len() - failed);
    if failed == 0 {
        Ok(line)
    } else {
        println!("{line}");
        Err(CliError::Failed(format!("{failed} check(s) failed")))
    }
}

fn init_threads() -> Result<(), CliError> {
    if let Ok(v) = std::env::var("ERGO_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|n| *n >= 1)
            .ok_or_else(|| CliError::Config(format!("ERGO_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(config_err)?;
        info!("using {n} worker threads");
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = init_threads().and_then(|_| execute(cli.command, &cli.opts));
    match result {
        Ok(line) => {
            println!("{line}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                CliError::Config(_) => ExitCode::from(2),
                CliError::Run(ergo_core::Error::Parse(_) | ergo_core::Error::Invalid(_) | ergo_core::Error::Cfl { .. }) => {
                    ExitCode::from(2)
                }
                _ => ExitCode::from(1),
            }
        }
    }
}
