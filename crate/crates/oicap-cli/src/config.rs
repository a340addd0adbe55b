//! Sweep configuration: defaults, flat key=value config files, and flag
//! overrides.

use std::fmt;
use std::path::PathBuf;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Channel {
    Gaussian,
    Poisson,
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Channel::Gaussian => write!(f, "gaussian"),
            Channel::Poisson => write!(f, "poisson"),
        }
    }
}

/// Budget axis of a sweep: concrete intensities, or `L = log(1/E)` values
/// for regimes where the intensity itself underflows.
#[derive(Debug, Clone, PartialEq)]
pub enum BudgetAxis {
    Eps(Vec<f64>),
    LogEps(Vec<f64>),
}

impl BudgetAxis {
    pub fn log_inv_eps_values(&self) -> Vec<f64> {
        match self {
            BudgetAxis::Eps(v) => v.iter().map(|&e| -e.ln()).collect(),
            BudgetAxis::LogEps(v) => v.clone(),
        }
    }

    pub fn is_l_mode(&self) -> bool {
        matches!(self, BudgetAxis::LogEps(_))
    }
}

/// Fully resolved sweep configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub channel: Channel,
    pub budget: BudgetAxis,
    pub a_list: Vec<f64>,
    pub lambda: f64,
    pub geom_p: f64,
    pub oracle: bool,
    pub mc_trials: u64,
    pub seed: u64,
    pub z: f64,
    pub grid_points: usize,
    pub ba_tol: f64,
    pub mu_max: f64,
    pub out: Option<PathBuf>,
}

/// A config error carries the message for exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// Raw option bag before validation; config file fills blanks, flags win.
#[derive(Debug, Default, Clone)]
pub struct RawConfig {
    pub channel: Option<String>,
    pub eps: Option<String>,
    pub logeps: Option<String>,
    pub a: Option<String>,
    pub lambda: Option<f64>,
    pub geom_p: Option<f64>,
    pub oracle: Option<bool>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub z: Option<f64>,
    pub grid_points: Option<usize>,
    pub ba_tol: Option<f64>,
    pub mu_max: Option<f64>,
    pub out: Option<PathBuf>,
}

impl RawConfig {
    /// Fills unset fields from `other` (lower precedence).
    pub fn or(mut self, other: RawConfig) -> RawConfig {
        macro_rules! take {
            ($f:ident) => {
                if self.$f.is_none() {
                    self.$f = other.$f;
                }
            };
        }
        take!(channel);
        take!(eps);
        take!(logeps);
        take!(a);
        take!(lambda);
        take!(geom_p);
        take!(oracle);
        take!(trials);
        take!(seed);
        take!(z);
        take!(grid_points);
        take!(ba_tol);
        take!(mu_max);
        take!(out);
        self
    }

    /// Parses a flat `key=value` config file.
    pub fn from_file(text: &str) -> Result<RawConfig, ConfigError> {
        let mut raw = RawConfig::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return fail(format!("line {}: expected key=value", lineno + 1));
            };
            let key = key.trim();
            let value = value.trim();
            let parse_f64 = |v: &str| {
                v.parse::<f64>()
                    .map_err(|_| ConfigError(format!("line {}: bad number '{v}'", lineno + 1)))
            };
            let parse_u64 = |v: &str| {
                v.parse::<u64>()
                    .map_err(|_| ConfigError(format!("line {}: bad integer '{v}'", lineno + 1)))
            };
            match key {
                "channel" => raw.channel = Some(value.to_string()),
                "eps" => raw.eps = Some(value.to_string()),
                "logeps" => raw.logeps = Some(value.to_string()),
                "a" => raw.a = Some(value.to_string()),
                "lambda" => raw.lambda = Some(parse_f64(value)?),
                "geom_p" => raw.geom_p = Some(parse_f64(value)?),
                "oracle" => {
                    raw.oracle = Some(match value {
                        "true" | "1" => true,
                        "false" | "0" => false,
                        _ => return fail(format!("line {}: bad boolean '{value}'", lineno + 1)),
                    })
                }
                "trials" => raw.trials = Some(parse_u64(value)?),
                "seed" => raw.seed = Some(parse_u64(value)?),
                "z" => raw.z = Some(parse_f64(value)?),
                "grid_points" => {
                    raw.grid_points = Some(parse_u64(value)? as usize);
                }
                "ba_tol" => raw.ba_tol = Some(parse_f64(value)?),
                "mu_max" => raw.mu_max = Some(parse_f64(value)?),
                "out" => raw.out = Some(PathBuf::from(value)),
                other => return fail(format!("line {}: unknown key '{other}'", lineno + 1)),
            }
        }
        Ok(raw)
    }

    pub fn resolve(self) -> Result<SweepConfig, ConfigError> {
        let channel = match self.channel.as_deref() {
            Some("gaussian") => Channel::Gaussian,
            Some("poisson") => Channel::Poisson,
            Some(other) => return fail(format!("unknown channel '{other}'")),
            None => return fail("missing --channel (gaussian|poisson)"),
        };
        let parse_list = |text: &str, what: &str| -> Result<Vec<f64>, ConfigError> {
            let mut out = Vec::new();
            for part in text.split(',') {
                let part = part.trim();
                if part.is_empty() {
                    continue;
                }
                match part.parse::<f64>() {
                    Ok(v) => out.push(v),
                    Err(_) => return fail(format!("bad {what} value '{part}'")),
                }
            }
            if out.is_empty() {
                return fail(format!("empty {what} list"));
            }
            Ok(out)
        };
        let budget = match (&self.eps, &self.logeps) {
            (Some(_), Some(_)) => return fail("give exactly one of --eps / --logeps"),
            (Some(e), None) => {
                let v = parse_list(e, "eps")?;
                for &x in &v {
                    if !(x > 0.0 && x < 1.0) {
                        return fail(format!("eps value {x} outside (0,1)"));
                    }
                }
                BudgetAxis::Eps(v)
            }
            (None, Some(l)) => {
                let v = parse_list(l, "logeps")?;
                for &x in &v {
                    if !(x > 0.0 && x.is_finite()) {
                        return fail(format!("logeps value {x} must be positive"));
                    }
                }
                BudgetAxis::LogEps(v)
            }
            (None, None) => return fail("give exactly one of --eps / --logeps"),
        };
        let a_list = match &self.a {
            Some(a) => {
                let v = parse_list(a, "a")?;
                for &x in &v {
                    if !(x > 0.0 && x.is_finite()) {
                        return fail(format!("a value {x} must be positive"));
                    }
                }
                v
            }
            None => return fail("missing --a list"),
        };
        let lambda = self.lambda.unwrap_or(1.0);
        if channel == Channel::Poisson && !(lambda > 0.0 && lambda.is_finite()) {
            return fail("lambda must be positive for the Poisson channel");
        }
        let geom_p = self.geom_p.unwrap_or(0.5);
        if !(geom_p > 0.0 && geom_p < 1.0) {
            return fail("geom_p must lie in (0,1)");
        }
        let z = self.z.unwrap_or(3.0);
        if !(z > 0.0 && z.is_finite()) {
            return fail("z must be positive");
        }
        let grid_points = self.grid_points.unwrap_or(32);
        if grid_points < 2 {
            return fail("grid_points must be at least 2");
        }
        let ba_tol = self.ba_tol.unwrap_or(1e-9);
        if !(ba_tol > 0.0) {
            return fail("ba_tol must be positive");
        }
        let mu_max = self.mu_max.unwrap_or(10.0);
        if !(mu_max > 0.0) {
            return fail("mu_max must be positive");
        }
        Ok(SweepConfig {
            channel,
            budget,
            a_list,
            lambda,
            geom_p,
            oracle: self.oracle.unwrap_or(false),
            mc_trials: self.trials.unwrap_or(0),
            seed: self.seed.unwrap_or(0),
            z,
            grid_points,
            ba_tol,
            mu_max,
            out: self.out,
        })
    }
}

impl SweepConfig {
    /// Canonical `key=value` echo embedded as CSV comments; fully determines
    /// the run.
    pub fn echo_lines(&self, command: &str) -> Vec<String> {
        let fmt_list = |v: &[f64]| {
            v.iter()
                .map(|x| crate::csvout::fmt_float(*x))
                .collect::<Vec<_>>()
                .join(",")
        };
        let mut lines = vec![format!("# oicap {command}")];
        lines.push(format!("# channel={}", self.channel));
        match &self.budget {
            BudgetAxis::Eps(v) => lines.push(format!("# eps={}", fmt_list(v))),
            BudgetAxis::LogEps(v) => lines.push(format!("# logeps={}", fmt_list(v))),
        }
        lines.push(format!("# a={}", fmt_list(&self.a_list)));
        if self.channel == Channel::Poisson {
            lines.push(format!("# lambda={}", crate::csvout::fmt_float(self.lambda)));
            lines.push(format!("# geom_p={}", crate::csvout::fmt_float(self.geom_p)));
        }
        lines.push(format!("# oracle={}", self.oracle));
        lines.push(format!("# trials={}", self.mc_trials));
        lines.push(format!("# seed={}", self.seed));
        lines.push(format!("# z={}", crate::csvout::fmt_float(self.z)));
        lines.push(format!("# grid_points={}", self.grid_points));
        lines.push(format!("# ba_tol={}", crate::csvout::fmt_float(self.ba_tol)));
        lines.push(format!("# mu_max={}", crate::csvout::fmt_float(self.mu_max)));
        lines
    }
}
