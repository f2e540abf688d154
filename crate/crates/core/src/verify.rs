//! Monte-Carlo estimate of `E[-exp(-p X_T)]` from zero initial wealth.
//!
//! Each path draws its default times first, then Brownian increments on a
//! uniform mesh; intervals containing a default are split with a Brownian
//! bridge so that the continuous part stays exact in law at the split.
//! Path `i` uses its own ChaCha stream, so results do not depend on thread
//! count, and constant-strategy sweeps share random numbers across points.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::copula::Name;
use crate::error::{Error, Result};
use crate::linalg::{self, Vec2};
use crate::recursion::{Cascade, Model, ScenarioSolution, DEFAULT_STEPS};

/// Largest `-p X_T` accepted before a path counts as an overflow failure.
const UTILITY_EXPONENT_LIMIT: f64 = 700.0;
/// Failure share above which a run is rejected.
const MAX_FAILURE_SHARE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub seed: u64,
    /// Euler steps per interval of the base mesh.
    pub substeps: usize,
    /// Base mesh size on `[0, T]`.
    pub steps: usize,
    pub antithetic: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            paths: 100_000,
            seed: 20_240_601,
            substeps: 4,
            steps: DEFAULT_STEPS,
            antithetic: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |field, v: usize| {
            if v >= 1 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    value: v as f64,
                    reason: "must be >= 1",
                })
            }
        };
        check("paths", self.paths)?;
        check("substeps", self.substeps)?;
        check("steps", self.steps)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    pub paths: usize,
    pub mean_utility: f64,
    pub std_error: f64,
    /// Paths with 0, 1 and 2 defaults by the horizon.
    pub default_counts: [usize; 3],
    /// Among paths with a default by the horizon, which name went first.
    pub first_default_counts: [usize; 2],
    pub failures: usize,
    pub certainty_equivalent: f64,
}

impl SimReport {
    /// `mean ± z·SE`.
    pub fn confidence_interval(&self, z: f64) -> (f64, f64) {
        (
            self.mean_utility - z * self.std_error,
            self.mean_utility + z * self.std_error,
        )
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Strategy<'a> {
    /// Optimal strategy of a solved cascade; post-default paths are re-solved
    /// at the realised default time.
    Cascade(&'a Cascade),
    /// Fixed amounts; after a default the survivor's amount is kept.
    Constant(Vec2),
}

enum PostStrategy {
    Solved(ScenarioSolution),
    Constant(Vec2),
}

impl PostStrategy {
    fn at(&self, t: f64) -> Result<Vec2> {
        match self {
            PostStrategy::Solved(sol) => sol.pi_at(t),
            PostStrategy::Constant(pi) => Ok(*pi),
        }
    }
}

impl Strategy<'_> {
    fn pre(&self, t: f64) -> Result<Vec2> {
        match self {
            Strategy::Cascade(c) => c.y0.pi_at(t),
            Strategy::Constant(pi) => Ok(*pi),
        }
    }

    fn post(&self, defaulted: Name, tau: f64) -> Result<PostStrategy> {
        match self {
            Strategy::Cascade(c) => Ok(PostStrategy::Solved(c.post_default(defaulted, tau)?)),
            Strategy::Constant(pi) => {
                let mut v = *pi;
                v[defaulted.index()] = 0.0;
                Ok(PostStrategy::Constant(v))
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct PathOutcome {
    utility: Option<f64>,
    defaults: usize,
    first: Option<Name>,
}

enum Regime {
    Pre,
    Post { defaulted: Name, strategy: PostStrategy },
    Frozen,
}

struct Simulator<'a> {
    model: &'a Model,
    strategy: Strategy<'a>,
    mesh: usize,
    dt: f64,
}

fn normal_pair(rng: &mut ChaCha20Rng, sign: f64) -> Vec2 {
    let a: f64 = StandardNormal.sample(rng);
    let b: f64 = StandardNormal.sample(rng);
    [sign * a, sign * b]
}

impl Simulator<'_> {
    fn new<'a>(model: &'a Model, strategy: Strategy<'a>, cfg: &SimConfig) -> Simulator<'a> {
        let mesh = cfg.steps * cfg.substeps;
        Simulator {
            model,
            strategy,
            mesh,
            dt: model.market.horizon() / mesh as f64,
        }
    }

    /// Wealth change over a piece of length `dt` with factor increment `dw`.
    fn diffuse(&self, regime: &Regime, t: f64, dt: f64, dw: Vec2) -> Result<f64> {
        let market = &self.model.market;
        match regime {
            Regime::Pre => {
                let pi = self.strategy.pre(t)?;
                let shock = linalg::mat_vec(&market.sigma0_matrix(), dw);
                Ok(linalg::dot(pi, market.inputs().b0) * dt + linalg::dot(pi, shock))
            }
            Regime::Post {
                defaulted,
                strategy,
            } => {
                let survivor = defaulted.other();
                let amount = strategy.at(t)?[survivor.index()];
                let c = market.post_default_single_params(survivor);
                let rho = market.inputs().rho;
                let db = match survivor {
                    Name::First => (1.0 - rho * rho).sqrt() * dw[0] + rho * dw[1],
                    Name::Second => dw[1],
                };
                Ok(amount * (c.drift * dt + c.vol * db))
            }
            Regime::Frozen => Ok(0.0),
        }
    }

    fn path(&self, rng: &mut ChaCha20Rng, sign: f64) -> Result<PathOutcome> {
        let horizon = self.model.market.horizon();
        let gamma = self.model.market.gamma();
        let (t1, t2) = self.model.copula.sample_default_times(rng);
        let (first, tau1, tau2) = if t1 <= t2 {
            (Name::First, t1, t2)
        } else {
            (Name::Second, t2, t1)
        };
        let events: Vec<f64> = [tau1, tau2].into_iter().filter(|&t| t < horizon).collect();

        let mut x = 0.0;
        let mut regime = Regime::Pre;
        let mut next_event = 0;
        for k in 0..self.mesh {
            let s = k as f64 * self.dt;
            let e = if k + 1 == self.mesh { horizon } else { s + self.dt };
            let z = normal_pair(rng, sign);
            let mut remaining = linalg::scale((e - s).sqrt(), z);
            let mut cur = s;
            while next_event < events.len() && events[next_event] < e {
                let tau = events[next_event].max(cur);
                // Bridge split of the remaining increment at τ.
                let span = e - cur;
                let w = (tau - cur) / span;
                let sd = ((tau - cur) * (e - tau) / span).max(0.0).sqrt();
                let extra = normal_pair(rng, sign);
                let piece = [
                    w * remaining[0] + sd * extra[0],
                    w * remaining[1] + sd * extra[1],
                ];
                remaining = linalg::sub(remaining, piece);
                x += self.diffuse(&regime, cur, tau - cur, piece)?;
                regime = match regime {
                    Regime::Pre => {
                        let pi = self.strategy.pre(tau)?;
                        let defaulted = first;
                        let survivor = defaulted.other();
                        x += -pi[defaulted.index()] + gamma[survivor.index()] * pi[survivor.index()];
                        Regime::Post {
                            defaulted,
                            strategy: self.strategy.post(defaulted, tau)?,
                        }
                    }
                    Regime::Post {
                        defaulted,
                        strategy,
                    } => {
                        x -= strategy.at(tau)?[defaulted.other().index()];
                        Regime::Frozen
                    }
                    Regime::Frozen => Regime::Frozen,
                };
                cur = tau;
                next_event += 1;
            }
            x += self.diffuse(&regime, cur, e - cur, remaining)?;
        }

        let exponent = -self.model.market.p() * x;
        Ok(PathOutcome {
            utility: (exponent.is_finite() && exponent <= UTILITY_EXPONENT_LIMIT)
                .then(|| -exponent.exp()),
            defaults: events.len(),
            first: (!events.is_empty()).then_some(first),
        })
    }
}

fn path_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Pairwise summation over a fixed split tree.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    if values.len() <= 8 {
        return values.iter().sum();
    }
    let (a, b) = values.split_at(values.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn run(model: &Model, strategy: Strategy<'_>, cfg: &SimConfig) -> Result<Vec<PathOutcome>> {
    cfg.validate()?;
    let sim = Simulator::new(model, strategy, cfg);
    (0..cfg.paths)
        .into_par_iter()
        .map(|i| {
            let (stream, sign) = if cfg.antithetic {
                ((i / 2) as u64, if i % 2 == 0 { 1.0 } else { -1.0 })
            } else {
                (i as u64, 1.0)
            };
            sim.path(&mut path_rng(cfg.seed, stream), sign)
        })
        .collect()
}

fn summarize(model: &Model, outcomes: &[PathOutcome], cfg: &SimConfig) -> Result<SimReport> {
    let failures = outcomes.iter().filter(|o| o.utility.is_none()).count();
    let limit = (MAX_FAILURE_SHARE * cfg.paths as f64).floor() as usize;
    if failures > limit {
        return Err(Error::SimulationFailures {
            failed: failures,
            paths: cfg.paths,
            limit,
        });
    }
    // Antithetic pairs are the independent samples.
    let group = if cfg.antithetic { 2 } else { 1 };
    let samples: Vec<f64> = outcomes
        .chunks(group)
        .filter_map(|c| {
            let u: Vec<f64> = c.iter().filter_map(|o| o.utility).collect();
            (!u.is_empty()).then(|| u.iter().sum::<f64>() / u.len() as f64)
        })
        .collect();
    let n = samples.len();
    if n == 0 {
        return Err(Error::Degenerate("no successful paths".into()));
    }
    let mean = pairwise_sum(&samples) / n as f64;
    let sq: Vec<f64> = samples.iter().map(|u| (u - mean) * (u - mean)).collect();
    let var = if n > 1 { pairwise_sum(&sq) / (n - 1) as f64 } else { 0.0 };

    let mut default_counts = [0; 3];
    let mut first_default_counts = [0; 2];
    for o in outcomes {
        default_counts[o.defaults] += 1;
        if let Some(name) = o.first {
            first_default_counts[name.index()] += 1;
        }
    }
    Ok(SimReport {
        paths: cfg.paths,
        mean_utility: mean,
        std_error: (var / n as f64).sqrt(),
        default_counts,
        first_default_counts,
        failures,
        certainty_equivalent: -(-mean).ln() / model.market.p(),
    })
}

pub fn simulate_expected_utility(model: &Model, strategy: Strategy<'_>, cfg: &SimConfig) -> Result<SimReport> {
    let outcomes = run(model, strategy, cfg)?;
    summarize(model, &outcomes, cfg)
}

/// Same seed for every point, so the comparisons use common random numbers.
pub fn constant_strategy_sweep(model: &Model, points: &[Vec2], cfg: &SimConfig) -> Result<Vec<(Vec2, SimReport)>> {
    points
        .iter()
        .map(|&pi| {
            if !(pi[0].is_finite() && pi[1].is_finite()) {
                return Err(Error::Domain(format!("non-finite sweep point {pi:?}")));
            }
            Ok((pi, simulate_expected_utility(model, Strategy::Constant(pi), cfg)?))
        })
        .collect()
}

/// `sqrt(se_a² + se_b²)`.
pub fn pooled_std_error(a: &SimReport, b: &SimReport) -> f64 {
    a.std_error.hypot(b.std_error)
}

/// Nine points `center + {-d, 0, d}²`.
pub fn sweep_grid(center: Vec2, delta: f64) -> Vec<Vec2> {
    let offsets = [-delta, 0.0, delta];
    offsets
        .iter()
        .flat_map(|&a| offsets.iter().map(move |&b| [center[0] + a, center[1] + b]))
        .collect()
}
