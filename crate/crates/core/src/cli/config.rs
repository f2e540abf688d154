//! Flat `key = value` run configuration with dotted section prefixes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use crate::copula::{Alpha1Formula, GumbelParams};
use crate::market::{Constraints, Interval, MarketInputs, MarketParams};
use crate::recursion::{Model, DEFAULT_STEPS};
use crate::verify::SimConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaInputs {
    pub a1: f64,
    pub a2: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub copula: CopulaInputs,
    pub market: MarketInputs,
    pub steps: usize,
    pub formula: Alpha1Formula,
    pub sim: SimConfig,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            copula: CopulaInputs {
                a1: 0.01,
                a2: 0.1,
                beta: 2.0,
            },
            market: MarketInputs {
                gamma: [-0.5, -0.5],
                ..MarketInputs::default()
            },
            steps: DEFAULT_STEPS,
            formula: Alpha1Formula::Derived,
            sim: SimConfig::default(),
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>()
        .map_err(|_| ConfigError(format!("`{key}`: expected a number, got `{v}`")))
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse::<usize>()
        .map_err(|_| ConfigError(format!("`{key}`: expected a non-negative integer, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(ConfigError(format!("`{key}`: expected true or false, got `{v}`"))),
    }
}

fn parse_interval(key: &str, v: &str) -> Result<Option<Interval>, ConfigError> {
    if v == "none" {
        return Ok(None);
    }
    let (lo, hi) = v
        .split_once(',')
        .ok_or_else(|| ConfigError(format!("`{key}`: expected `lo,hi` or `none`, got `{v}`")))?;
    let lo = parse_f64(key, lo.trim())?;
    let hi = parse_f64(key, hi.trim())?;
    Interval::new(lo, hi)
        .map(Some)
        .map_err(|e| ConfigError(format!("`{key}`: {e}")))
}

fn fmt_interval(c: Option<Interval>) -> String {
    match c {
        Some(c) => format!("{},{}", c.lo, c.hi),
        None => "none".into(),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", n + 1)))?;
            let key = key.trim().to_string();
            if entries.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(ConfigError(format!("line {}: duplicate key `{key}`", n + 1)));
            }
        }
        let mut cfg = RunConfig::default();
        for (key, v) in &entries {
            cfg.set(key, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one `key = value` pair.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let m = &mut self.market;
        let c = &mut m.constraints;
        match key {
            "copula.a1" => self.copula.a1 = parse_f64(key, v)?,
            "copula.a2" => self.copula.a2 = parse_f64(key, v)?,
            "copula.beta" => self.copula.beta = parse_f64(key, v)?,
            "market.b0_1" => m.b0[0] = parse_f64(key, v)?,
            "market.b0_2" => m.b0[1] = parse_f64(key, v)?,
            "market.sigma0_1" => m.sigma0[0] = parse_f64(key, v)?,
            "market.sigma0_2" => m.sigma0[1] = parse_f64(key, v)?,
            "market.rho" => m.rho = parse_f64(key, v)?,
            "market.b1_1" => m.b1[0] = parse_f64(key, v)?,
            "market.b1_2" => m.b1[1] = parse_f64(key, v)?,
            "market.sigma1_1" => m.sigma1[0] = parse_f64(key, v)?,
            "market.sigma1_2" => m.sigma1[1] = parse_f64(key, v)?,
            "market.gamma1" => m.gamma[0] = parse_f64(key, v)?,
            "market.gamma2" => m.gamma[1] = parse_f64(key, v)?,
            "market.p" => m.p = parse_f64(key, v)?,
            "market.horizon" => m.horizon = parse_f64(key, v)?,
            "constraints.pre1" | "constraints.pre2" => {
                let iv = parse_interval(key, v)?;
                let mut pair = c.pre_default.map(|b| [Some(b[0]), Some(b[1])]).unwrap_or([None, None]);
                pair[usize::from(key == "constraints.pre2")] = iv;
                c.pre_default = match pair {
                    [None, None] => None,
                    [a, b] => Some([
                        a.unwrap_or(Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }),
                        b.unwrap_or(Interval { lo: f64::NEG_INFINITY, hi: f64::INFINITY }),
                    ]),
                };
            }
            "constraints.post" => c.post_default = parse_interval(key, v)?,
            "solver.steps" => self.steps = parse_usize(key, v)?,
            "solver.alpha1_formula" => {
                self.formula = v.parse().map_err(|e: String| ConfigError(format!("`{key}`: {e}")))?
            }
            "sim.paths" => self.sim.paths = parse_usize(key, v)?,
            "sim.seed" => {
                self.sim.seed = v
                    .parse()
                    .map_err(|_| ConfigError(format!("`{key}`: expected an unsigned integer, got `{v}`")))?
            }
            "sim.substeps" => self.sim.substeps = parse_usize(key, v)?,
            "sim.antithetic" => self.sim.antithetic = parse_bool(key, v)?,
            "output.dir" => self.out_dir = PathBuf::from(v),
            _ => return Err(ConfigError(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.model().map(|_| ())?;
        if self.steps < 2 {
            return Err(ConfigError(format!("`solver.steps` must be >= 2, got {}", self.steps)));
        }
        SimConfig {
            steps: self.steps,
            ..self.sim
        }
        .validate()
        .map_err(|e| ConfigError(e.to_string()))
    }

    pub fn model(&self) -> Result<Model, ConfigError> {
        let copula = GumbelParams::new(self.copula.a1, self.copula.a2, self.copula.beta)
            .map_err(|e| ConfigError(e.to_string()))?;
        let market = MarketParams::new(self.market).map_err(|e| ConfigError(e.to_string()))?;
        Ok(Model::new(market, copula, self.formula))
    }

    /// Simulation settings on the solver mesh.
    pub fn sim_config(&self) -> SimConfig {
        SimConfig {
            steps: self.steps,
            ..self.sim
        }
    }

    pub fn to_text(&self) -> String {
        let m = &self.market;
        let Constraints {
            pre_default,
            post_default,
        } = m.constraints;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("copula.a1", self.copula.a1.to_string());
        put("copula.a2", self.copula.a2.to_string());
        put("copula.beta", self.copula.beta.to_string());
        put("market.b0_1", m.b0[0].to_string());
        put("market.b0_2", m.b0[1].to_string());
        put("market.sigma0_1", m.sigma0[0].to_string());
        put("market.sigma0_2", m.sigma0[1].to_string());
        put("market.rho", m.rho.to_string());
        put("market.b1_1", m.b1[0].to_string());
        put("market.b1_2", m.b1[1].to_string());
        put("market.sigma1_1", m.sigma1[0].to_string());
        put("market.sigma1_2", m.sigma1[1].to_string());
        put("market.gamma1", m.gamma[0].to_string());
        put("market.gamma2", m.gamma[1].to_string());
        put("market.p", m.p.to_string());
        put("market.horizon", m.horizon.to_string());
        put("constraints.pre1", fmt_interval(pre_default.map(|b| b[0])));
        put("constraints.pre2", fmt_interval(pre_default.map(|b| b[1])));
        put("constraints.post", fmt_interval(post_default));
        put("solver.steps", self.steps.to_string());
        put("solver.alpha1_formula", self.formula.token().to_string());
        put("sim.paths", self.sim.paths.to_string());
        put("sim.seed", self.sim.seed.to_string());
        put("sim.substeps", self.sim.substeps.to_string());
        put("sim.antithetic", self.sim.antithetic.to_string());
        put("output.dir", self.out_dir.display().to_string());
        s
    }
}
