//! Run configuration: a JSON file merged with command-line flags (flags win).

use std::path::{Path, PathBuf};

use clap::Args;
use liftkit::lifting::EmpiricalMode;
use serde::{Deserialize, Serialize};

/// `"auto"` or a number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GammaSpec {
    Value(f64),
    Auto(AutoTag),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoTag {
    Auto,
}

impl std::str::FromStr for GammaSpec {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            return Ok(GammaSpec::Auto(AutoTag::Auto));
        }
        s.parse::<f64>().map(GammaSpec::Value).map_err(|e| format!("gamma must be `auto` or a number: {e}"))
    }
}

/// Every option a command may read. Absent fields fall back to command
/// defaults.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Lift JSON (`verify`, `overdamped`, `analyze`, `sweep-gamma`) or GKSL
    /// JSON (`lift-qms`).
    pub input: Option<PathBuf>,
    /// Chain specification JSON.
    pub chain: Option<PathBuf>,
    /// Invariant state JSON for `lift-qms`.
    pub sigma: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Reflecting chain size.
    pub n: Option<usize>,
    /// Chain sizes for `scaling`.
    pub ns: Option<Vec<usize>>,
    pub family: Option<String>,
    /// Built-in generator for `lift-qms` (`depolarizing`).
    pub preset: Option<String>,
    pub dim: Option<usize>,
    pub gamma: Option<GammaSpec>,
    pub gammas: Option<Vec<f64>>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub n_gamma: Option<usize>,
    pub t_obs: Option<f64>,
    pub tol: Option<f64>,
    pub seed: Option<u64>,
    pub eps: Option<Vec<f64>>,
    /// Evolution time of the overdamped comparison.
    pub t: Option<f64>,
    pub empirical: Option<EmpiricalMode>,
    pub n_time: Option<usize>,
}

/// Command-line mirror of [`RunConfig`].
#[derive(Args, Clone, Debug, Default)]
pub struct Flags {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true)]
    pub chain: Option<PathBuf>,
    #[arg(long, global = true)]
    pub sigma: Option<PathBuf>,
    /// Output directory (default `out`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub n: Option<String>,
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true)]
    pub preset: Option<String>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    /// Dissipation strength: `auto` (the lower-bound optimum) or a number.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub gamma: Option<GammaSpec>,
    /// Explicit comma-separated γ grid; an empty string gives an empty sweep.
    #[arg(long, global = true)]
    pub gammas: Option<String>,
    #[arg(long, global = true)]
    pub gamma_min: Option<f64>,
    #[arg(long, global = true)]
    pub gamma_max: Option<f64>,
    #[arg(long, global = true)]
    pub n_gamma: Option<usize>,
    #[arg(long, global = true)]
    pub t_obs: Option<f64>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub eps: Option<String>,
    #[arg(long, global = true)]
    pub t: Option<f64>,
    #[arg(long, global = true, value_parser = parse_mode)]
    pub empirical: Option<EmpiricalMode>,
    #[arg(long, global = true)]
    pub n_time: Option<usize>,
}

fn parse_mode(s: &str) -> Result<EmpiricalMode, String> {
    serde_json::from_value(serde_json::Value::String(s.into()))
        .map_err(|_| format!("unknown mode `{s}` (worst-case, probe, auto)"))
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| format!("{what}: `{x}`: {e}")))
        .collect()
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// Loads `--config` when given, then applies every flag that was set.
    pub fn resolve(flags: &Flags) -> Result<Self, String> {
        let mut c = match &flags.config {
            Some(p) => Self::load(p)?,
            None => Self::default(),
        };
        macro_rules! take {
            ($($f:ident),*) => { $( if flags.$f.is_some() { c.$f = flags.$f.clone(); } )* };
        }
        take!(input, chain, sigma, out, family, preset, dim, gamma, gamma_min, gamma_max, n_gamma, t_obs, tol, seed, t, empirical, n_time);
        if let Some(n) = &flags.n {
            let ns: Vec<usize> = parse_list(n, "--n")?;
            match ns.as_slice() {
                [one] => c.n = Some(*one),
                _ => c.ns = Some(ns),
            }
        }
        if let Some(g) = &flags.gammas {
            c.gammas = Some(parse_list(g, "--gammas")?);
        }
        if let Some(e) = &flags.eps {
            c.eps = Some(parse_list(e, "--eps")?);
        }
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in [("tol", self.tol), ("t_obs", self.t_obs), ("t", self.t), ("gamma_min", self.gamma_min), ("gamma_max", self.gamma_max)] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(format!("{name} must be positive, got {v}"));
                }
            }
        }
        if let Some(GammaSpec::Value(g)) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(format!("gamma must be positive, got {g}"));
            }
        }
        if self.gammas.iter().flatten().chain(self.eps.iter().flatten()).any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err("gammas and eps must be positive".into());
        }
        if let (Some(a), Some(b)) = (self.gamma_min, self.gamma_max) {
            if a > b {
                return Err(format!("gamma_min {a} exceeds gamma_max {b}"));
            }
        }
        for p in [&self.input, &self.chain, &self.sigma].into_iter().flatten() {
            if !p.exists() {
                return Err(format!("{}: no such file", p.display()));
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn tol(&self) -> f64 {
        self.tol.unwrap_or(1e-9)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
