//! Invariant battery behind `contagion check`.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::commands::solver;
use super::config::RunConfig;
use super::csv::num;
use super::CliError;
use crate::copula::{Alpha1Formula, Name};
use crate::error::Result;
use crate::linalg::{self, Vec2};
use crate::market::{Constraints, MarketInputs, MarketParams};
use crate::optimizer::{PostDefaultProblem, PreDefaultProblem};
use crate::quadrature::{integrate, integrate_tail, Tolerance};
use crate::recursion::{Cascade, Model};
use crate::verify::{simulate_expected_utility, SimConfig, Strategy};

pub const DEFAULT_CHECK_PATHS: usize = 20_000;
const ORACLE_SEED: u64 = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Known to miss its bound in the selected mode.
    ExpectedDeviation,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::ExpectedDeviation => "EXPECTED-DEVIATION",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckLine {
    pub name: &'static str,
    pub measured: f64,
    pub bound: f64,
    pub status: Status,
    pub note: String,
}

impl CheckLine {
    fn at_most(name: &'static str, measured: f64, bound: f64) -> Self {
        let status = if measured <= bound { Status::Pass } else { Status::Fail };
        Self {
            name,
            measured,
            bound,
            status,
            note: String::new(),
        }
    }

    fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    fn from_result(name: &'static str, bound: f64, r: Result<f64>) -> Self {
        match r {
            Ok(m) => Self::at_most(name, m, bound),
            Err(e) => Self {
                name,
                measured: f64::NAN,
                bound,
                status: Status::Fail,
                note: e.to_string(),
            },
        }
    }
}

impl fmt::Display for CheckLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<18} {:<28} measured={:<16} bound={}",
            self.status.to_string(),
            self.name,
            num(self.measured),
            num(self.bound)
        )?;
        if !self.note.is_empty() {
            write!(f, "  ({})", self.note)?;
        }
        Ok(())
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Finite-difference mixed partial of the joint survival against the density.
fn density_fd(model: &Model) -> Result<f64> {
    let g = &model.copula;
    let t = model.market.horizon();
    let h = 1e-3 * t;
    let mut worst: f64 = 0.0;
    for (x, y) in [(0.5, 0.7), (0.2, 0.9), (0.8, 0.3)] {
        let (x, y) = (x * t, y * t);
        let s = |a, b| g.joint_survival(a, b);
        let fd = (s(x + h, y + h)? - s(x + h, y - h)? - s(x - h, y + h)? + s(x - h, y - h)?) / (4.0 * h * h);
        worst = worst.max(rel(fd, g.density_unordered(x, y)?));
    }
    Ok(worst)
}

/// `α¹_t(θ1) = ∫_t^∞ f(θ1, s) ds` on a 5×5 grid of `θ1 < t <= T`.
fn alpha1_tail(model: &Model) -> Result<f64> {
    let g = &model.copula;
    let horizon = model.market.horizon();
    let mut worst: f64 = 0.0;
    for name in Name::BOTH {
        let survivor = name.other();
        // G < 1e-16 once the survivor alone contributes u > 37.
        let cutoff = 37.0 / g.intensity(survivor);
        for i in 1..=5 {
            let theta1 = horizon * i as f64 / 6.0;
            for k in 1..=5 {
                let t = theta1 + (horizon - theta1) * k as f64 / 5.0;
                let tail = integrate_tail(
                    |s| g.density_ordered(theta1, s, name, survivor).unwrap_or(f64::NAN),
                    t,
                    1.0,
                    cutoff.max(2.0 * t),
                    1e-18,
                    Tolerance::default(),
                )?;
                worst = worst.max(rel(g.alpha1(t, theta1, name, model.formula)?, tail));
            }
        }
    }
    Ok(worst)
}

/// Argmin of the post-default objective by bisection on its derivative.
pub fn bisection_argmin(prob: &PostDefaultProblem) -> f64 {
    let mut hi = prob.merton();
    let mut step = 1.0;
    let mut lo = hi - step;
    while prob.derivative(lo) > 0.0 {
        step *= 2.0;
        lo = hi - step;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if prob.derivative(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Largest disagreement between the Lambert-W argmin and bisection.
pub fn lambert_vs_bisection(problems: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..problems {
        let prob = PostDefaultProblem::with_log_weight(
            rng.random_range(-1.0..1.0),
            rng.random_range(0.05..0.5),
            rng.random_range(0.5..3.0),
            rng.random_range(-9.0..2.5),
            None,
        )?;
        worst = worst.max((prob.lambert_argmin()? - bisection_argmin(&prob)).abs());
    }
    Ok(worst)
}

/// Minimiser of a convex function by successive grid refinement.
pub fn grid_search_argmin<F: Fn(Vec2) -> f64>(f: F, center: Vec2, half_width: f64) -> Vec2 {
    const N: usize = 40;
    let mut c = center;
    let mut w = half_width;
    for _ in 0..30 {
        let mut best = (f64::INFINITY, c);
        for i in 0..=N {
            for j in 0..=N {
                let x = [
                    c[0] - w + 2.0 * w * i as f64 / N as f64,
                    c[1] - w + 2.0 * w * j as f64 / N as f64,
                ];
                let v = f(x);
                if v < best.0 {
                    best = (v, x);
                }
            }
        }
        c = best.1;
        w *= 0.25;
    }
    c
}

fn random_pre_default_problem(rng: &mut ChaCha20Rng) -> Result<PreDefaultProblem> {
    let market = MarketParams::new(MarketInputs {
        b0: [rng.random_range(0.0..0.05), rng.random_range(0.0..0.05)],
        sigma0: [rng.random_range(0.1..0.3), rng.random_range(0.1..0.3)],
        rho: rng.random_range(-0.5..0.5),
        gamma: [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)],
        p: rng.random_range(0.5..2.0),
        ..MarketInputs::default()
    })?;
    PreDefaultProblem::new(
        market.risk_premium0(),
        market.sigma0_matrix(),
        market.p(),
        market.gamma(),
        [rng.random_range(0.0..2.0), rng.random_range(0.0..2.0)],
        None,
    )
}

/// Largest distance between the Newton argmin and a refined grid search.
pub fn newton_vs_grid(problems: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..problems {
        let prob = random_pre_default_problem(&mut rng)?;
        let newton = prob.solve()?.pi;
        let merton = prob.merton();
        let w = 10.0_f64.max(2.0 * linalg::norm(merton));
        let grid = grid_search_argmin(|x| prob.objective(x), merton, w);
        worst = worst.max(linalg::norm(linalg::sub(newton, grid)));
    }
    Ok(worst)
}

/// Closed-form terminal values against the densities, plus the solved
/// cascade's terminal node.
fn terminal_identities(model: &Model, cascade: &Cascade) -> Result<f64> {
    let p = model.market.p();
    let horizon = model.market.horizon();
    let mut worst = rel((p * model.y0_terminal()?).exp(), model.copula.alpha0(horizon)?);
    let last = *cascade.y0.y.last().expect("non-empty grid");
    worst = worst.max((last - model.y0_terminal()?).abs());
    for k in 1..=10 {
        let theta1 = horizon * (k as f64 - 0.5) / 10.0;
        for name in Name::BOTH {
            let a = model.copula.alpha1(horizon, theta1, name, model.formula)?;
            worst = worst.max(rel((p * model.y1_terminal(theta1, name)?).exp(), a));
        }
    }
    Ok(worst)
}

fn foc_residuals(model: &Model, cascade: &Cascade) -> Result<f64> {
    let tau = 0.5 * model.market.horizon();
    let mut worst = cascade.y0.foc_residual_max;
    for name in Name::BOTH {
        worst = worst.max(cascade.post_default(name, tau)?.foc_residual_max);
    }
    Ok(worst)
}

fn self_convergence(model: &Model, cascade: &Cascade, steps: usize) -> Result<f64> {
    let fine = Cascade::solve(model, 2 * steps)?;
    Ok((cascade.y0_at_origin() - fine.y0_at_origin()).abs())
}

/// Solves the model with the two names exchanged and compares `π̂⁰(0)`.
fn swap_symmetry(model: &Model, cascade: &Cascade, steps: usize) -> Result<f64> {
    let m = model.market.inputs();
    let sw = |v: Vec2| [v[1], v[0]];
    let swapped = MarketParams::new(MarketInputs {
        b0: sw(m.b0),
        sigma0: sw(m.sigma0),
        b1: sw(m.b1),
        sigma1: sw(m.sigma1),
        gamma: sw(m.gamma),
        constraints: Constraints {
            pre_default: m.constraints.pre_default.map(|b| [b[1], b[0]]),
            ..m.constraints
        },
        ..*m
    })?;
    let copula = crate::copula::GumbelParams::new(model.copula.a2(), model.copula.a1(), model.copula.beta())?;
    let other = Cascade::solve(&Model::new(swapped, copula, model.formula), steps)?;
    let (a, b) = (cascade.pi0(), other.pi0());
    Ok((a[0] - b[1]).abs().max((a[1] - b[0]).abs()))
}

/// `P(name 1 defaults first, by T) = ∫_0^T α¹_θ(θ) dθ` in the derived form.
pub fn first_default_probability(model: &Model, name: Name) -> Result<f64> {
    let g = &model.copula;
    let tol = Tolerance {
        abs: 1e-13,
        ..Tolerance::default()
    };
    integrate(
        |s| g.alpha1(s, s, name, Alpha1Formula::Derived).unwrap_or(f64::NAN),
        0.0,
        model.market.horizon(),
        tol,
    )
}

fn binomial_z(count: usize, n: usize, prob: f64) -> f64 {
    let freq = count as f64 / n as f64;
    (freq - prob).abs() / (prob * (1.0 - prob) / n as f64).sqrt().max(f64::MIN_POSITIVE)
}

/// In paper mode the cascade is built on a density that is not the one of
/// the copula, so identities tying the two together are expected to miss.
fn paper_mode_deviation(model: &Model, line: CheckLine, reason: &str) -> CheckLine {
    if model.formula == Alpha1Formula::Paper && line.status == Status::Fail {
        CheckLine {
            status: Status::ExpectedDeviation,
            ..line
        }
        .note(reason)
    } else {
        line
    }
}

pub fn run_checks(cfg: &RunConfig, paths: usize) -> std::result::Result<Vec<CheckLine>, CliError> {
    let model = cfg.model()?;
    let cascade = Cascade::solve(&model, cfg.steps).map_err(solver("cascade solve"))?;
    let mut lines = vec![
        CheckLine::from_result("density_fd_rel", 1e-5, density_fd(&model)),
        paper_mode_deviation(
            &model,
            CheckLine::from_result("alpha1_tail_integral_rel", 1e-6, alpha1_tail(&model)),
            "paper-form alpha1 carries an extra factor u^beta",
        ),
        CheckLine::from_result("lambert_vs_bisection", 1e-8, lambert_vs_bisection(1000, ORACLE_SEED))
            .note("1000 random problems"),
        CheckLine::from_result("newton_vs_grid_search", 2e-3, newton_vs_grid(20, ORACLE_SEED))
            .note("20 random problems"),
        CheckLine::from_result("terminal_identities", 1e-12, terminal_identities(&model, &cascade)),
        CheckLine::from_result("foc_residual_max", 1e-8, foc_residuals(&model, &cascade)),
        CheckLine::from_result("rk4_step_halving", 1e-6, self_convergence(&model, &cascade, cfg.steps))
            .note(format!("|Y0(0)| at {} vs {} steps", cfg.steps, 2 * cfg.steps)),
        CheckLine::from_result("name_swap_symmetry", 1e-8, swap_symmetry(&model, &cascade, cfg.steps)),
    ];

    let sim = SimConfig {
        paths,
        ..cfg.sim_config()
    };
    match simulate_expected_utility(&model, Strategy::Cascade(&cascade), &sim) {
        Ok(report) => {
            let target = -(model.market.p() * cascade.y0_at_origin()).exp();
            let line = CheckLine::at_most(
                "mc_value_function_z",
                (report.mean_utility - target).abs() / report.std_error,
                3.0,
            );
            let stats = format!(
                "mean {} vs {}, SE {}",
                num(report.mean_utility),
                num(target),
                num(report.std_error)
            );
            let line = paper_mode_deviation(&model, line, "paper-form alpha1 is not the simulated default law");
            let note = if line.note.is_empty() { stats } else { format!("{}; {stats}", line.note) };
            lines.push(line.note(note));
            // Antithetic partners share their default times.
            let n = if sim.antithetic { paths / 2 } else { paths };
            let scale = if sim.antithetic { 2 } else { 1 };
            let horizon = model.market.horizon();
            lines.push(CheckLine::from_result(
                "no_default_frequency_z",
                4.0,
                model
                    .copula
                    .alpha0(horizon)
                    .map(|a| binomial_z(report.default_counts[0] / scale, n, a)),
            ));
            lines.push(CheckLine::from_result(
                "first_default_frequency_z",
                4.0,
                first_default_probability(&model, Name::First)
                    .map(|q| binomial_z(report.first_default_counts[0] / scale, n, q)),
            ));
        }
        Err(e) => lines.push(CheckLine::from_result("mc_value_function_z", 3.0, Err(e))),
    }
    Ok(lines)
}

pub fn cmd_check(cfg: &RunConfig, paths: Option<usize>) -> std::result::Result<String, CliError> {
    let lines = run_checks(cfg, paths.unwrap_or(DEFAULT_CHECK_PATHS))?;
    let mut report: String = lines.iter().map(|l| format!("{l}\n")).collect();
    let failed = lines.iter().filter(|l| l.status == Status::Fail).count();
    if failed > 0 {
        report += &format!("{failed} of {} checks failed\n", lines.len());
        Err(CliError::Check(report))
    } else {
        let expected = lines.iter().filter(|l| l.status == Status::ExpectedDeviation).count();
        report += &format!("no failures in {} checks ({expected} expected deviations)\n", lines.len());
        Ok(report)
    }
}
