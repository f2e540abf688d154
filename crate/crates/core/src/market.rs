//! Two-name market: pre-default Black–Scholes pair with correlated
//! Brownian drivers, one-name Black–Scholes survivor after the first default,
//! and nothing tradable after the second.

use crate::copula::Name;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Vec2};
use crate::optimizer::PreDefaultProblem;

/// Closed interval of admissible amounts; always contains 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > 0.0 || hi < 0.0 {
            return Err(Error::InvalidParameter {
                field: "constraint",
                value: if lo > 0.0 { lo } else { hi },
                reason: "interval must satisfy lo <= 0 <= hi",
            });
        }
        Ok(Self { lo, hi })
    }

    pub fn clamp(&self, x: f64) -> f64 {
        x.max(self.lo).min(self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Constraints {
    /// One interval per name before any default.
    pub pre_default: Option<[Interval; 2]>,
    /// Interval for the survivor after the first default.
    pub post_default: Option<Interval>,
}

/// Raw coefficients. Index 0 is name 1, index 1 is name 2; `b1[i]`,
/// `sigma1[i]` are name `i`'s coefficients once the other name has
/// defaulted, and `gamma[i]` is the relative jump name `i` takes at that
/// moment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketInputs {
    pub b0: Vec2,
    pub sigma0: Vec2,
    pub rho: f64,
    pub b1: Vec2,
    pub sigma1: Vec2,
    pub gamma: Vec2,
    pub p: f64,
    pub horizon: f64,
    pub constraints: Constraints,
}

impl Default for MarketInputs {
    /// The reference desk parameters used throughout the tables.
    fn default() -> Self {
        Self {
            b0: [0.02, 0.02],
            sigma0: [0.1, 0.1],
            rho: 0.0,
            b1: [0.01, 0.01],
            sigma1: [0.2, 0.2],
            gamma: [0.0, 0.0],
            p: 1.0,
            horizon: 1.0,
            constraints: Constraints::default(),
        }
    }
}

/// Validated market coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    inputs: MarketInputs,
}

/// Coefficients of the survivor after the first default.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivorCoefficients {
    pub drift: f64,
    pub vol: f64,
    pub sharpe: f64,
}

/// Tradable coefficients in each default regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    PreDefault { drift: Vec2, vol: Mat2 },
    OneDefault { survivor: Name, coefficients: SurvivorCoefficients },
    /// Both names defaulted: nothing can be traded.
    Terminated,
}

fn require(field: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<()> {
    if ok && !value.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { field, value, reason })
    }
}

impl MarketParams {
    pub fn new(inputs: MarketInputs) -> Result<Self> {
        let finite = |field, v: f64| require(field, v, v.is_finite(), "must be finite");
        finite("b0_1", inputs.b0[0])?;
        finite("b0_2", inputs.b0[1])?;
        finite("b1_1", inputs.b1[0])?;
        finite("b1_2", inputs.b1[1])?;
        for (field, v) in [
            ("sigma0_1", inputs.sigma0[0]),
            ("sigma0_2", inputs.sigma0[1]),
            ("sigma1_1", inputs.sigma1[0]),
            ("sigma1_2", inputs.sigma1[1]),
        ] {
            require(field, v, v.is_finite() && v > 0.0, "volatility must be > 0")?;
        }
        require("rho", inputs.rho, inputs.rho.abs() < 1.0, "must lie in (-1, 1)")?;
        for (field, v) in [("gamma1", inputs.gamma[0]), ("gamma2", inputs.gamma[1])] {
            require(field, v, v.is_finite() && v >= -1.0, "must be >= -1")?;
        }
        require("p", inputs.p, inputs.p.is_finite() && inputs.p > 0.0, "must be > 0")?;
        require(
            "horizon",
            inputs.horizon,
            inputs.horizon.is_finite() && inputs.horizon > 0.0,
            "must be > 0",
        )?;
        let intervals = inputs
            .constraints
            .pre_default
            .iter()
            .flatten()
            .chain(inputs.constraints.post_default.iter());
        for c in intervals {
            Interval::new(c.lo, c.hi)?;
        }
        Ok(Self { inputs })
    }

    pub fn inputs(&self) -> &MarketInputs {
        &self.inputs
    }

    pub fn p(&self) -> f64 {
        self.inputs.p
    }

    pub fn horizon(&self) -> f64 {
        self.inputs.horizon
    }

    pub fn gamma(&self) -> Vec2 {
        self.inputs.gamma
    }

    pub fn constraints(&self) -> &Constraints {
        &self.inputs.constraints
    }

    /// Copy with different contagion jumps.
    pub fn with_gamma(&self, gamma: Vec2) -> Result<Self> {
        Self::new(MarketInputs {
            gamma,
            ..self.inputs
        })
    }

    /// Upper-triangular pre-default volatility matrix: name 1 loads on both
    /// factors, name 2 on the second only.
    pub fn sigma0_matrix(&self) -> Mat2 {
        let [s1, s2] = self.inputs.sigma0;
        let rho = self.inputs.rho;
        [[s1 * (1.0 - rho * rho).sqrt(), s1 * rho], [0.0, s2]]
    }

    /// `λ⁰` with `σ⁰ λ⁰ = b⁰`.
    pub fn risk_premium0(&self) -> Vec2 {
        let [b1, b2] = self.inputs.b0;
        let [s1, s2] = self.inputs.sigma0;
        let rho = self.inputs.rho;
        [
            (b1 / s1 - rho * b2 / s2) / (1.0 - rho * rho).sqrt(),
            b2 / s2,
        ]
    }

    /// Jump-free optimal amounts `(1/p)(σ⁰σ⁰')⁻¹ b⁰`, restricted to the
    /// pre-default box when one is configured.
    pub fn merton_strategy(&self) -> Result<Vec2> {
        let sigma = self.sigma0_matrix();
        match self.inputs.constraints.pre_default {
            None => {
                let x = linalg::solve(&linalg::gram(&sigma), self.inputs.b0)
                    .ok_or_else(|| Error::Degenerate("singular pre-default covariance".into()))?;
                Ok(linalg::scale(1.0 / self.inputs.p, x))
            }
            Some(bounds) => {
                let prob = PreDefaultProblem::new(
                    self.risk_premium0(),
                    sigma,
                    self.inputs.p,
                    self.inputs.gamma,
                    [0.0, 0.0],
                    Some(bounds),
                )?;
                Ok(prob.solve()?.pi)
            }
        }
    }

    pub fn post_default_single_params(&self, survivor: Name) -> SurvivorCoefficients {
        let i = survivor.index();
        let drift = self.inputs.b1[i];
        let vol = self.inputs.sigma1[i];
        SurvivorCoefficients {
            drift,
            vol,
            sharpe: drift / vol,
        }
    }

    /// Regime after the given set of defaults (in default order).
    pub fn regime(&self, defaulted: &[Name]) -> Result<Regime> {
        match defaulted {
            [] => Ok(Regime::PreDefault {
                drift: self.inputs.b0,
                vol: self.sigma0_matrix(),
            }),
            [first] => {
                let survivor = first.other();
                Ok(Regime::OneDefault {
                    survivor,
                    coefficients: self.post_default_single_params(survivor),
                })
            }
            [first, second] if first != second => Ok(Regime::Terminated),
            _ => Err(Error::Domain(format!("invalid default sequence {defaulted:?}"))),
        }
    }
}
