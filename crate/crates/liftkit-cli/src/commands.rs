//! One function per subcommand. Each writes its artifacts under the output
//! directory and reports whether every checked predicate held.

use std::path::Path;

use liftkit::constructions::{self, ChainCertificate, ChainSpec};
use liftkit::lifting::{self, AnalyzeOptions, EmpiricalMode, LiftedGenerator, RateReport};
use liftkit::lindblad::{self, GkslSpec};
use liftkit::opalg::DensityState;
use liftkit::random;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{GammaSpec, RunConfig};
use crate::plotdata;

pub enum CliError {
    /// Bad arguments, unreadable or malformed input, numerical breakdown.
    Input(String),
    /// A verified predicate failed; the report was still written.
    Failed(String),
}

impl From<liftkit::Error> for CliError {
    fn from(e: liftkit::Error) -> Self {
        match e {
            liftkit::Error::Condition(msg) => CliError::Failed(format!("conditions fail: {msg}")),
            e => CliError::Input(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Input(e.to_string())
    }
}

pub type CliResult = Result<(), CliError>;

const DEFAULT_EPS: [f64; 5] = [0.2, 0.1, 0.05, 0.025, 0.0125];

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    serde_json::from_value(read_json(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, v: &T) -> CliResult {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| CliError::Input(e.to_string()))?;
    s.push('\n');
    std::fs::write(dir.join(name), s)?;
    Ok(())
}

fn out_dir(cfg: &RunConfig) -> Result<std::path::PathBuf, CliError> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    Ok(dir)
}

fn load_lift(cfg: &RunConfig) -> Result<LiftedGenerator, CliError> {
    let path = cfg.input.as_ref().ok_or_else(|| CliError::Input("--input <lift.json> is required".into()))?;
    LiftedGenerator::from_value(&read_json(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_chain(cfg: &RunConfig) -> Result<ChainSpec, CliError> {
    let spec = match (&cfg.chain, cfg.n) {
        (Some(p), _) => parse::<ChainSpec>(p)?,
        (None, Some(n)) => ChainSpec::reflecting(n)?,
        (None, None) => return Err(CliError::Input("give --n or --chain <spec.json>".into())),
    };
    spec.validate().map_err(|e| CliError::Input(e.to_string()))?;
    Ok(spec)
}

fn analyze_options(cfg: &RunConfig, default_mode: EmpiricalMode) -> Result<AnalyzeOptions, CliError> {
    let mut o = AnalyzeOptions { t_obs: cfg.t_obs, seed: cfg.seed(), tol: cfg.tol(), ..Default::default() };
    o.empirical = cfg.empirical.unwrap_or(default_mode);
    if let Some(n) = cfg.n_gamma {
        o.n_gamma = n;
    }
    if let Some(n) = cfg.n_time {
        o.n_time = n.max(2);
    }
    o.gammas = match (&cfg.gammas, cfg.gamma_min, cfg.gamma_max) {
        (Some(g), _, _) => Some(g.clone()),
        (None, Some(lo), Some(hi)) => Some(lifting::log_grid(lo, hi, o.n_gamma)),
        (None, None, None) => None,
        _ => return Err(CliError::Input("gamma_min and gamma_max go together".into())),
    };
    Ok(o)
}

/// `analyze`, writing the report even when the conditions fail.
fn run_analysis(lift: &LiftedGenerator, opts: &AnalyzeOptions) -> Result<Result<RateReport, Value>, CliError> {
    match lifting::analyze(lift, opts) {
        Ok(r) => Ok(Ok(r)),
        Err(liftkit::Error::Condition(summary)) => {
            Ok(Err(serde_json::from_str(&summary).unwrap_or(Value::String(summary))))
        }
        Err(e) => Err(e.into()),
    }
}

/// Peak of the lower bound for the lift's current constants.
fn gamma_max(lift: &LiftedGenerator, t_obs: Option<f64>) -> Result<f64, CliError> {
    let model = lifting::overdamped_generator(lift)?;
    Ok(lifting::lower_bound_rate(&lifting::bound_constants(lift, &model, t_obs)?, 1.0).gamma_max)
}

fn resolve_gamma(cfg: &RunConfig, auto: impl FnOnce() -> Result<f64, CliError>) -> Result<f64, CliError> {
    match cfg.gamma {
        Some(GammaSpec::Value(g)) => Ok(g),
        _ => auto(),
    }
}

/// Writes report and sweep for an analysed lift; `Failed` when conditions
/// or `extra_pass` fail.
fn finish_analysis(dir: &Path, mut report: serde_json::Map<String, Value>, analysis: Result<RateReport, Value>, extra_pass: bool) -> CliResult {
    let pass = match &analysis {
        Ok(r) => {
            report.insert("analysis".into(), serde_json::to_value(r).map_err(|e| CliError::Input(e.to_string()))?);
            extra_pass
        }
        Err(summary) => {
            report.insert("conditions".into(), summary.clone());
            false
        }
    };
    report.insert("pass".into(), json!(pass));
    write_json(dir, "report.json", &report)?;
    if let Ok(r) = &analysis {
        plotdata::emit_plotdata(r, dir)?;
    }
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("see report.json".into()))
    }
}

pub fn verify(cfg: &RunConfig) -> CliResult {
    let lift = load_lift(cfg)?;
    let dir = out_dir(cfg)?;
    let tol = cfg.tol();
    let a = lifting::verify_condition_a(lift.l_s(), lift.l_a(), lift.sigma(), tol)?;
    let b = lifting::verify_condition_b(&lift);
    let c = lifting::verify_condition_c(&lift, tol)?;
    let mut pass = a.pass && b.pass && c.pass;
    let d = if pass {
        let model = lifting::overdamped_generator(&lift)?;
        let d = lifting::verify_condition_d(&lift, &model, tol)?;
        pass &= d.pass;
        Some(d)
    } else {
        None
    };
    let report = json!({ "command": "verify", "conditions": { "a": a, "b": b, "c": c, "d": d }, "pass": pass });
    write_json(&dir, "report.json", &report)?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Failed("a structural condition fails; see report.json".into()))
    }
}

pub fn overdamped(cfg: &RunConfig) -> CliResult {
    let lift = load_lift(cfg)?;
    let dir = out_dir(cfg)?;
    let model = lifting::overdamped_generator(&lift)?;
    let d = lifting::verify_condition_d(&lift, &model, cfg.tol())?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed());
    let h = random::random_hermitian(&mut rng, lift.dim());
    let x0 = lift.from_coords(&lift.coords(&h));
    let eps = cfg.eps.clone().unwrap_or_else(|| DEFAULT_EPS.to_vec());
    let t = cfg.t.unwrap_or(1.0);
    let study = lifting::overdamped_convergence_test(&lift, &model, &x0, t, &eps)?;
    let report = json!({
        "command": "overdamped",
        "lambda_o": model.lambda_o,
        "kernel_dim": model.kernel_dim()?,
        "condition_d": d,
        "model": model,
        "t": t,
        "study": study,
    });
    write_json(&dir, "report.json", &report)?;
    plotdata::eps_error(&study).write(&dir.join("eps_error.csv"))?;
    Ok(())
}

pub fn analyze(cfg: &RunConfig) -> CliResult {
    let lift = load_lift(cfg)?;
    let dir = out_dir(cfg)?;
    let opts = analyze_options(cfg, EmpiricalMode::Auto)?;
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("analyze"));
    finish_analysis(&dir, report, run_analysis(&lift, &opts)?, true)
}

pub fn sweep_gamma(cfg: &RunConfig) -> CliResult {
    let lift = load_lift(cfg)?;
    let dir = out_dir(cfg)?;
    let opts = analyze_options(cfg, EmpiricalMode::Auto)?;
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("sweep-gamma"));
    finish_analysis(&dir, report, run_analysis(&lift, &opts)?, true)
}

pub fn lift_chain(cfg: &RunConfig) -> CliResult {
    let spec = load_chain(cfg)?;
    let dir = out_dir(cfg)?;
    let base = constructions::chain_lift(&spec, 1.0)?;
    let gamma = resolve_gamma(cfg, || gamma_max(&base, cfg.t_obs))?;
    let lift = base.with_gamma(gamma)?;
    let cert = constructions::chain_certificate(&spec)?;
    write_json(&dir, "lift.json", &lift.to_value())?;
    let opts = analyze_options(cfg, EmpiricalMode::Auto)?;
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("lift-chain"));
    report.insert("chain".into(), serde_json::to_value(&spec).map_err(|e| CliError::Input(e.to_string()))?);
    report.insert("lambda_q".into(), json!(spec.gap()?));
    report.insert("gamma".into(), json!(gamma));
    report.insert("certificate".into(), certificate_value(&cert));
    let pass = cert.pass_3_2;
    finish_analysis(&dir, report, run_analysis(&lift, &opts)?, pass)
}

fn certificate_value(c: &ChainCertificate) -> Value {
    // JSON has no infinity; an unbounded C1 becomes null.
    let mut v = serde_json::to_value(c).unwrap_or(Value::Null);
    if !c.c1_min.is_finite() {
        v["c1_min"] = Value::Null;
    }
    v
}

fn load_qms(cfg: &RunConfig) -> Result<(liftkit::opalg::Superoperator, String), CliError> {
    match (&cfg.input, cfg.preset.as_deref()) {
        (Some(p), None) => Ok((lindblad::build_gksl(&parse::<GkslSpec>(p)?)?, p.display().to_string())),
        (None, Some("depolarizing")) => {
            let d = cfg.dim.unwrap_or(2);
            if d < 2 {
                return Err(CliError::Input("--dim must be at least 2".into()));
            }
            let sigma = DensityState::maximally_mixed(d);
            Ok((constructions::depolarizing_generator(&sigma)?, format!("depolarizing(d={d})")))
        }
        (None, Some(other)) => Err(CliError::Input(format!("unknown preset `{other}` (depolarizing)"))),
        (Some(_), Some(_)) => Err(CliError::Input("--input and --preset are exclusive".into())),
        (None, None) => Err(CliError::Input("give --input <gksl.json> or --preset depolarizing".into())),
    }
}

pub fn lift_qms(cfg: &RunConfig) -> CliResult {
    let (l_o, source) = load_qms(cfg)?;
    let dir = out_dir(cfg)?;
    let sigma_b = match &cfg.sigma {
        Some(p) => parse::<DensityState>(p)?,
        None => lindblad::invariant_state(&l_o)?,
    };
    let family = constructions::jump_family_from_gksl(&l_o, &sigma_b, cfg.tol().max(1e-9))
        .map_err(|e| CliError::Input(e.to_string()))?;
    let (base, artifacts) = constructions::gns_lift(&family, &sigma_b, 1.0)?;
    let gamma = resolve_gamma(cfg, || gamma_max(&base, cfg.t_obs))?;
    let lift = base.with_gamma(gamma)?;
    write_json(&dir, "lift.json", &lift.to_value())?;
    write_json(&dir, "artifacts.json", &json!({ "family": family, "lift": artifacts }))?;
    let opts = analyze_options(cfg, EmpiricalMode::Auto)?;
    let mut report = serde_json::Map::new();
    report.insert("command".into(), json!("lift-qms"));
    report.insert("source".into(), json!(source));
    report.insert("gamma".into(), json!(gamma));
    report.insert("artifact_residual".into(), json!(artifacts.residual(&family)?));
    finish_analysis(&dir, report, run_analysis(&lift, &opts)?, true)
}

pub fn certificate(cfg: &RunConfig) -> CliResult {
    let spec = load_chain(cfg)?;
    let dir = out_dir(cfg)?;
    let cert = constructions::chain_certificate(&spec)?;
    let report = json!({ "command": "certificate", "n": spec.n, "certificate": certificate_value(&cert), "pass": cert.pass_3_2 });
    write_json(&dir, "report.json", &report)?;
    if cert.pass_3_2 {
        Ok(())
    } else {
        Err(CliError::Failed(format!("(3/2) Q² − M has eigenvalue {:e}", cert.min_eig_3_2)))
    }
}

pub fn scaling(cfg: &RunConfig) -> CliResult {
    match cfg.family.as_deref().unwrap_or("chain") {
        "chain" => {}
        other => return Err(CliError::Input(format!("unknown family `{other}` (chain)"))),
    }
    let ns = match (&cfg.ns, cfg.n) {
        (Some(ns), _) => ns.clone(),
        (None, Some(n)) => vec![n],
        (None, None) => vec![4, 8, 16, 32],
    };
    if let Some(&bad) = ns.iter().find(|&&n| n < 2) {
        return Err(CliError::Input(format!("chain size {bad} is below 2")));
    }
    let dir = out_dir(cfg)?;
    let opts = analyze_options(cfg, EmpiricalMode::Probe)?;
    let rows = constructions::chain_scaling(&ns, cfg.n_gamma.unwrap_or(13), &opts)?;
    write_json(&dir, "report.json", &json!({ "command": "scaling", "family": "chain", "rows": rows }))?;
    plotdata::scaling(&rows).write(&dir.join("scaling.csv"))?;
    Ok(())
}
