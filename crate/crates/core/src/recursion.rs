//! Backward cascade: closed-form level 2, the θ1-indexed post-default ODEs,
//! their diagonal `D^i(t) = Y^{1,i}_t(t)`, and the pre-default ODE.
//!
//! All ODEs run backward from `T` with classical RK4 on uniform grids.

use rayon::prelude::*;

use crate::copula::{Alpha1Formula, GumbelParams, Name};
use crate::error::{Error, Result};
use crate::linalg::{self, Vec2};
use crate::market::MarketParams;
use crate::optimizer::{PostDefaultProblem, PreDefaultProblem};

pub const DEFAULT_STEPS: usize = 200;

// RK4 sub-steps per unit of ln(t) when the density is singular at the origin.
const SUBMESH_DENSITY: f64 = 32.0;

// Pre-default counterpart near a singular diagonal, and the relative floor
// below which the first interval is taken in one step.
const PRE_SUBMESH_DENSITY: f64 = 8.0;
const ORIGIN_FLOOR: f64 = 1e-3;

/// Everything the cascade depends on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    pub market: MarketParams,
    pub copula: GumbelParams,
    pub formula: Alpha1Formula,
}

impl Model {
    pub fn new(market: MarketParams, copula: GumbelParams, formula: Alpha1Formula) -> Self {
        Self {
            market,
            copula,
            formula,
        }
    }

    fn p(&self) -> f64 {
        self.market.p()
    }

    fn horizon(&self) -> f64 {
        self.market.horizon()
    }

    /// `(1/p) ln α^{1,i}_T(θ1)`, the post-default terminal value.
    pub fn y1_terminal(&self, theta1: f64, defaulted: Name) -> Result<f64> {
        let t = self.horizon();
        Ok(self.copula.log_alpha1(t, theta1, defaulted, self.formula)? / self.p())
    }

    /// `-(T/p)(a1^β + a2^β)^{1/β} = (1/p) ln α⁰_T`.
    pub fn y0_terminal(&self) -> Result<f64> {
        Ok(self.copula.log_alpha0(self.horizon())? / self.p())
    }

    /// Post-default generator and its inner solution at `(t, y)`.
    fn post_generator(&self, theta1: f64, defaulted: Name, t: f64, y: f64) -> Result<(f64, f64, f64)> {
        let p = self.p();
        let survivor = defaulted.other();
        let c = self.market.post_default_single_params(survivor);
        let log_density = self.copula.log_density_ordered(theta1, t, defaulted, survivor)?;
        let prob = PostDefaultProblem::with_log_weight(
            c.sharpe,
            c.vol,
            p,
            log_density - p * y,
            self.market.constraints().post_default,
        )?;
        let sol = prob.solve()?;
        Ok((-0.5 * c.sharpe * c.sharpe / p + sol.value, sol.pi, sol.residual))
    }

    /// Pre-default generator and its inner solution at `y` given `D(t)`.
    fn pre_generator(&self, y: f64, d: Vec2) -> Result<(f64, Vec2, f64)> {
        let p = self.p();
        let lambda0 = self.market.risk_premium0();
        let log_w = |di: f64| {
            if di == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                p * (di - y)
            }
        };
        let prob = PreDefaultProblem::with_log_weights(
            lambda0,
            self.market.sigma0_matrix(),
            p,
            self.market.gamma(),
            [log_w(d[0]), log_w(d[1])],
            self.market.constraints().pre_default,
        )?;
        let sol = prob.solve()?;
        Ok((-0.5 * linalg::dot(lambda0, lambda0) / p + sol.value, sol.pi, sol.residual))
    }
}

/// Uniform grid `t_k = t_start + k h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_start: f64,
    t_end: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if steps < 2 {
            return Err(Error::InvalidParameter {
                field: "steps",
                value: steps as f64,
                reason: "grid needs at least 2 steps",
            });
        }
        Self::with_min_steps(t_start, t_end, steps)
    }

    // Tails of a grid may be a single step.
    fn with_min_steps(t_start: f64, t_end: f64, steps: usize) -> Result<Self> {
        if !(t_start.is_finite() && t_end.is_finite() && t_start < t_end) || steps == 0 {
            return Err(Error::Domain(format!(
                "invalid grid [{t_start}, {t_end}] with {steps} steps"
            )));
        }
        Ok(Self {
            t_start,
            t_end,
            steps,
        })
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn h(&self) -> f64 {
        (self.t_end - self.t_start) / self.steps as f64
    }

    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn node(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t_end
        } else {
            self.t_start + k as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.node(k)).collect()
    }

    /// The sub-grid `[t_k, t_end]`; `None` for the last node.
    pub fn tail(&self, k: usize) -> Option<TimeGrid> {
        (k < self.steps).then(|| TimeGrid {
            t_start: self.node(k),
            t_end: self.t_end,
            steps: self.steps - k,
        })
    }

    /// Index `k` with `t_k <= t < t_{k+1}` (last interval for `t = t_end`).
    fn interval(&self, t: f64) -> usize {
        let k = ((t - self.t_start) / self.h()).floor();
        (k.max(0.0) as usize).min(self.steps - 1)
    }

    fn check_contains(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * (self.t_end - self.t_start);
        if t.is_nan() || t < self.t_start - slack || t > self.t_end + slack {
            return Err(Error::Domain(format!(
                "t = {t} outside [{}, {}]",
                self.t_start, self.t_end
            )));
        }
        Ok(())
    }

    /// Piecewise-linear interpolation of nodal values.
    fn lerp<T: Copy>(&self, values: &[T], t: f64, mix: impl Fn(T, T, f64) -> T) -> Result<T> {
        self.check_contains(t)?;
        let k = self.interval(t);
        let w = ((t - self.node(k)) / self.h()).clamp(0.0, 1.0);
        Ok(mix(values[k], values[k + 1], w))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Scenario {
    PreDefault,
    OneDefault { theta1: f64, defaulted: Name },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSolution {
    pub scenario: Scenario,
    pub grid: TimeGrid,
    pub y: Vec<f64>,
    /// Amounts per name; after a default the defaulted name's slot is 0.
    pub pi: Vec<Vec2>,
    pub foc_residual_max: f64,
}

impl ScenarioSolution {
    pub fn y_at(&self, t: f64) -> Result<f64> {
        self.grid.lerp(&self.y, t, |a, b, w| a + w * (b - a))
    }

    pub fn pi_at(&self, t: f64) -> Result<Vec2> {
        self.grid.lerp(&self.pi, t, |a, b, w| {
            [a[0] + w * (b[0] - a[0]), a[1] + w * (b[1] - a[1])]
        })
    }
}

/// Level-2 value `(1/p) ln α(θ, i, j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Y2 {
    Finite(f64),
    /// The ordered density vanishes.
    NegInfinity,
}

pub fn y2(copula: &GumbelParams, theta1: f64, theta2: f64, first: Name, second: Name, p: f64) -> Result<Y2> {
    if !(p.is_finite() && p > 0.0) {
        return Err(Error::InvalidParameter {
            field: "p",
            value: p,
            reason: "must be > 0",
        });
    }
    let ln = copula.log_density_ordered(theta1, theta2, first, second)?;
    Ok(if ln == f64::NEG_INFINITY {
        Y2::NegInfinity
    } else {
        Y2::Finite(ln / p)
    })
}

fn rk4_step<F>(f: &F, t: f64, y: f64, h: f64) -> Result<(f64, f64)>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    // Backward in time: y(t - h) = y(t) + ∫ f.
    let k1 = f(t, y)?;
    let k2 = f(t - 0.5 * h, y + 0.5 * h * k1)?;
    let k3 = f(t - 0.5 * h, y + 0.5 * h * k2)?;
    let k4 = f(t - h, y + h * k3)?;
    Ok((y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), k1))
}

fn check_finite(y: f64, stage: &str, t: f64) -> Result<()> {
    if y.is_finite() {
        Ok(())
    } else {
        Err(Error::Degenerate(format!("{stage}: non-finite value {y} at t = {t}")))
    }
}

/// Post-default ODE for name `defaulted` having defaulted at `theta1`, on a
/// grid running from `theta1` to `T`.
pub fn solve_y1(model: &Model, theta1: f64, defaulted: Name, grid: &TimeGrid) -> Result<ScenarioSolution> {
    let horizon = model.horizon();
    let singular = model.copula.beta() > 1.0;
    if !(theta1 >= 0.0 && theta1 < horizon) || (singular && theta1 <= 0.0) {
        return Err(Error::Domain(format!(
            "first default time {theta1} must lie in (0, {horizon})"
        )));
    }
    let scale = horizon.max(1.0);
    if (grid.t_start() - theta1).abs() > 1e-12 * scale || (grid.t_end() - horizon).abs() > 1e-12 * scale {
        return Err(Error::Domain(format!(
            "post-default grid must span [{theta1}, {horizon}], got [{}, {}]",
            grid.t_start(),
            grid.t_end()
        )));
    }
    let survivor = defaulted.other();
    let rhs = |t: f64, y: f64| model.post_generator(theta1, defaulted, t, y).map(|g| g.0);
    let slot = |pi: f64| {
        let mut v = [0.0; 2];
        v[survivor.index()] = pi;
        v
    };

    let n = grid.steps();
    let mut y = vec![0.0; n + 1];
    let mut pi = vec![[0.0; 2]; n + 1];
    let mut residual_max: f64 = 0.0;
    y[n] = model.y1_terminal(theta1, defaulted)?;
    check_finite(y[n], "post-default terminal value", horizon)?;

    for k in (0..n).rev() {
        let (t_hi, t_lo) = (grid.node(k + 1), grid.node(k));
        let (_, p_hi, r_hi) = model.post_generator(theta1, defaulted, t_hi, y[k + 1])?;
        pi[k + 1] = slot(p_hi);
        residual_max = residual_max.max(r_hi);

        // Geometric sub-steps where the density varies on the scale of t.
        let sub = if singular {
            (SUBMESH_DENSITY * (t_hi / t_lo).ln()).ceil().max(1.0) as usize
        } else {
            1
        };
        let ratio = (t_lo / t_hi).powf(1.0 / sub as f64);
        let mut t = t_hi;
        let mut yy = y[k + 1];
        for s in 0..sub {
            let next = if s + 1 == sub { t_lo } else { t * ratio };
            yy = rk4_step(&rhs, t, yy, t - next)?.0;
            t = next;
        }
        check_finite(yy, "post-default ODE", t_lo)?;
        y[k] = yy;
    }
    let (_, p0, r0) = model.post_generator(theta1, defaulted, grid.node(0), y[0])?;
    pi[0] = slot(p0);
    residual_max = residual_max.max(r0);

    Ok(ScenarioSolution {
        scenario: Scenario::OneDefault { theta1, defaulted },
        grid: *grid,
        y,
        pi,
        foc_residual_max: residual_max,
    })
}

/// `D^i(t_k) = Y^{1,i}_{t_k}(t_k)` on the pre-default grid.
///
/// With `β > 1` the diagonal behaves like `((β-1)/p) ln t` near the origin:
/// a survivor whose partner defaulted at `θ1 → 0` defaults almost surely soon
/// after, and shorting it pays off without bound. `D(0)` is then `-inf` (a
/// zero jump weight) and interpolation runs on `D - ((β-1)/p) ln t`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalTable {
    pub grid: TimeGrid,
    pub d: [Vec<f64>; 2],
    // D at the midpoint of the first interval, used when `log_slope > 0`.
    first_mid: Vec2,
    log_slope: f64,
    // Per interval, D at the (midpoint, lower end) stage times of a
    // geometric sub-mesh, backward; empty where one RK4 step suffices.
    submesh: Vec<Vec<(f64, Vec2)>>,
}

impl DiagonalTable {
    pub fn d1(&self) -> &[f64] {
        &self.d[0]
    }

    pub fn d2(&self) -> &[f64] {
        &self.d[1]
    }

    pub fn at_node(&self, k: usize) -> Vec2 {
        [self.d[0][k], self.d[1][k]]
    }

    /// Cubic (4-point Lagrange) interpolation between nodes.
    pub fn value(&self, t: f64) -> Result<Vec2> {
        self.grid.check_contains(t)?;
        let h = self.grid.h();
        let x = (t - self.grid.t_start()) / h;
        let n = self.grid.steps();
        if (x - x.round()).abs() < 1e-9 {
            return Ok(self.at_node(x.round() as usize));
        }
        if self.log_slope == 0.0 {
            let k = self.grid.interval(t);
            let lo = k.saturating_sub(1).min(n.saturating_sub(3));
            let xs: Vec<f64> = (lo..lo + 4).map(|j| j as f64).collect();
            let interp = |d: &[f64]| lagrange(&xs, &d[lo..lo + 4], x);
            return Ok([interp(&self.d[0]), interp(&self.d[1])]);
        }
        if (x - 0.5).abs() < 1e-9 {
            return Ok(self.first_mid);
        }
        // Regular part on the abscissae {1/2, 1, 2, ..., n}.
        let s = self.log_slope;
        let abscissa = |j: usize| if j == 0 { 0.5 } else { j as f64 };
        let regular = |i: usize, j: usize| {
            let d = if j == 0 { self.first_mid[i] } else { self.d[i][j] };
            d - s * (self.grid.t_start() + abscissa(j) * h).ln()
        };
        let k = self.grid.interval(t);
        let lo = k.saturating_sub(1).min(n.saturating_sub(3));
        let xs: Vec<f64> = (lo..lo + 4).map(abscissa).collect();
        let mut out = [0.0; 2];
        for (i, o) in out.iter_mut().enumerate() {
            let ys: Vec<f64> = (lo..lo + 4).map(|j| regular(i, j)).collect();
            *o = lagrange(&xs, &ys, x) + s * t.ln();
        }
        Ok(out)
    }
}

fn lagrange(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
        let mut w = 1.0;
        for (j, &xj) in xs.iter().enumerate() {
            if i != j {
                w *= (x - xj) / (xi - xj);
            }
        }
        total += w * yi;
    }
    total
}

fn diagonal_point(model: &Model, theta1: f64, steps: usize) -> Result<Vec2> {
    let grid = TimeGrid::with_min_steps(theta1, model.horizon(), steps)?;
    let mut out = [0.0; 2];
    for name in Name::BOTH {
        out[name.index()] = solve_y1(model, theta1, name, &grid)?.y[0];
    }
    Ok(out)
}

pub fn build_diagonal(model: &Model, grid: &TimeGrid) -> Result<DiagonalTable> {
    let horizon = model.horizon();
    if grid.t_start() != 0.0 || (grid.t_end() - horizon).abs() > 1e-12 * horizon.max(1.0) {
        return Err(Error::Domain(format!(
            "diagonal grid must span [0, {horizon}]"
        )));
    }
    let n = grid.steps();
    let singular = model.copula.beta() > 1.0;
    let p = model.p();

    let interior: Vec<Vec2> = (0..n)
        .into_par_iter()
        .map(|k| {
            if k == 0 && singular {
                Ok([f64::NEG_INFINITY; 2])
            } else {
                diagonal_point(model, grid.node(k), n - k)
            }
        })
        .collect::<Result<_>>()?;

    let mut d = [vec![0.0; n + 1], vec![0.0; n + 1]];
    for (k, v) in interior.iter().enumerate() {
        d[0][k] = v[0];
        d[1][k] = v[1];
    }
    for name in Name::BOTH {
        d[name.index()][n] = model.y1_terminal(horizon, name)?;
    }

    let (first_mid, log_slope, submesh) = if singular {
        let times: Vec<Vec<f64>> = (0..n).map(|k| submesh_stage_times(grid, k)).collect();
        let flat: Vec<f64> = times.iter().flatten().copied().collect();
        // Steps on [t, T] matching the surrounding resolution.
        let values = flat
            .par_iter()
            .map(|&t| {
                let k = grid.interval(t);
                diagonal_point(model, t, n - k)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut it = flat.into_iter().zip(values);
        let submesh: Vec<Vec<(f64, Vec2)>> = times
            .iter()
            .enumerate()
            .map(|(k, ts)| {
                let mut v: Vec<(f64, Vec2)> = it.by_ref().take(ts.len()).collect();
                if !v.is_empty() {
                    v.push((grid.node(k), [d[0][k], d[1][k]]));
                }
                v
            })
            .collect();
        let mid = diagonal_point(model, 0.5 * grid.h(), n)?;
        (mid, (model.copula.beta() - 1.0) / p, submesh)
    } else {
        ([f64::NAN; 2], 0.0, vec![Vec::new(); n])
    };

    Ok(DiagonalTable {
        grid: *grid,
        d,
        first_mid,
        log_slope,
        submesh,
    })
}

/// Interior stage times (midpoint, lower end, ..., last midpoint) of a
/// geometric sub-mesh on interval `k`, backward; empty for a single step.
/// The first interval is graded down to `ORIGIN_FLOOR·h`, then closed by one
/// step to the origin.
fn submesh_stage_times(grid: &TimeGrid, k: usize) -> Vec<f64> {
    let (t_lo, t_hi) = (grid.node(k), grid.node(k + 1));
    let floor = if k == 0 { ORIGIN_FLOOR * grid.h() } else { t_lo };
    let m = (PRE_SUBMESH_DENSITY * (t_hi / floor).ln()).ceil().max(1.0) as usize;
    if m == 1 && k > 0 {
        return Vec::new();
    }
    let ratio = (floor / t_hi).powf(1.0 / m as f64);
    let mut out = Vec::with_capacity(2 * m + 1);
    let mut hi = t_hi;
    for j in 0..m {
        let lo = if j + 1 == m { floor } else { hi * ratio };
        out.push(0.5 * (hi + lo));
        if j + 1 < m || k == 0 {
            out.push(lo);
        }
        hi = lo;
    }
    if k == 0 {
        out.push(0.5 * floor);
    }
    out
}


/// Pre-default ODE on `[0, T]` driven by the diagonal.
pub fn solve_y0(model: &Model, grid: &TimeGrid, diag: &DiagonalTable) -> Result<ScenarioSolution> {
    if diag.grid != *grid {
        return Err(Error::Domain("diagonal was built on a different grid".into()));
    }
    let n = grid.steps();
    let h = grid.h();
    let mut y = vec![0.0; n + 1];
    let mut pi = vec![[0.0; 2]; n + 1];
    let mut residual_max: f64 = 0.0;
    y[n] = model.y0_terminal()?;

    let step = |y: f64, hh: f64, d_hi: Vec2, d_mid: Vec2, d_lo: Vec2| -> Result<(f64, Vec2, f64)> {
        let (k1, p_hi, r_hi) = model.pre_generator(y, d_hi)?;
        let k2 = model.pre_generator(y + 0.5 * hh * k1, d_mid)?.0;
        let k3 = model.pre_generator(y + 0.5 * hh * k2, d_mid)?.0;
        let k4 = model.pre_generator(y + hh * k3, d_lo)?.0;
        Ok((y + hh / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), p_hi, r_hi))
    };

    for k in (0..n).rev() {
        let t = grid.node(k + 1);
        let d_hi = diag.at_node(k + 1);
        let (next, p_hi, r_hi) = if !diag.submesh[k].is_empty() {
            // Near the origin the jump weight varies on the scale of t.
            let (mut yy, mut hi, mut d) = (y[k + 1], t, d_hi);
            let mut first = None;
            for pair in diag.submesh[k].chunks(2) {
                let [(_, d_mid), (lo, d_lo)] = *pair else {
                    unreachable!("stage times come in pairs")
                };
                let (v, p, r) = step(yy, hi - lo, d, d_mid, d_lo)?;
                first.get_or_insert((p, r));
                yy = v;
                hi = lo;
                d = d_lo;
            }
            let (p, r) = first.expect("non-empty sub-mesh");
            (yy, p, r)
        } else {
            step(y[k + 1], h, d_hi, diag.value(t - 0.5 * h)?, diag.at_node(k))?
        };
        pi[k + 1] = p_hi;
        residual_max = residual_max.max(r_hi);
        y[k] = next;
        check_finite(y[k], "pre-default ODE", grid.node(k))?;
    }
    let (_, p0, r0) = model.pre_generator(y[0], diag.at_node(0))?;
    pi[0] = p0;
    residual_max = residual_max.max(r0);

    Ok(ScenarioSolution {
        scenario: Scenario::PreDefault,
        grid: *grid,
        y,
        pi,
        foc_residual_max: residual_max,
    })
}

/// `V⁰_t(x) = -exp(-p (x - Y⁰_t))`, linear in `Y⁰` between nodes.
pub fn value_function(sol: &ScenarioSolution, p: f64, t: f64, x: f64) -> Result<f64> {
    if sol.scenario != Scenario::PreDefault {
        return Err(Error::Domain("value function needs the pre-default solution".into()));
    }
    let y = sol.y_at(t)?;
    Ok(-(-p * (x - y)).exp())
}

/// Strategy along one scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyPath {
    /// Pre-default `(t, π)` for grid nodes before the default, ending with
    /// the left limit at the default time when there is one.
    pub pre: Vec<(f64, Vec2)>,
    pub post: Option<PostDefaultSegment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostDefaultSegment {
    pub defaulted: Name,
    pub tau: f64,
    pub points: Vec<(f64, Vec2)>,
}

impl StrategyPath {
    /// Left and right strategy values at the default time.
    pub fn jump(&self) -> Option<(Vec2, Vec2)> {
        let post = self.post.as_ref()?;
        Some((self.pre.last()?.1, post.points.first()?.1))
    }
}

/// Solved cascade on one grid.
#[derive(Debug, Clone)]
pub struct Cascade {
    pub model: Model,
    pub grid: TimeGrid,
    pub diagonal: DiagonalTable,
    pub y0: ScenarioSolution,
}

impl Cascade {
    pub fn solve(model: &Model, steps: usize) -> Result<Self> {
        let grid = TimeGrid::new(0.0, model.horizon(), steps)?;
        let diagonal = build_diagonal(model, &grid)?;
        let y0 = solve_y0(model, &grid, &diagonal)?;
        Ok(Self {
            model: *model,
            grid,
            diagonal,
            y0,
        })
    }

    pub fn pi0(&self) -> Vec2 {
        self.y0.pi[0]
    }

    pub fn y0_at_origin(&self) -> f64 {
        self.y0.y[0]
    }

    pub fn value_function(&self, t: f64, x: f64) -> Result<f64> {
        value_function(&self.y0, self.model.p(), t, x)
    }

    /// Post-default solution on `[tau, T]` at roughly the cascade's spacing.
    pub fn post_default(&self, defaulted: Name, tau: f64) -> Result<ScenarioSolution> {
        let horizon = self.model.horizon();
        let steps = (((horizon - tau) / self.grid.h()).ceil() as usize).max(2);
        let grid = TimeGrid::new(tau, horizon, steps)?;
        solve_y1(&self.model, tau, defaulted, &grid)
    }

    pub fn strategy_path(&self, event: Option<(Name, f64)>) -> Result<StrategyPath> {
        let nodes = self.grid.nodes();
        let Some((defaulted, tau)) = event else {
            return Ok(StrategyPath {
                pre: nodes.into_iter().zip(self.y0.pi.iter().copied()).collect(),
                post: None,
            });
        };
        if !(tau > 0.0 && tau < self.model.horizon()) {
            return Err(Error::Domain(format!("default time {tau} must lie in (0, T)")));
        }
        let mut pre: Vec<(f64, Vec2)> = nodes
            .iter()
            .copied()
            .zip(self.y0.pi.iter().copied())
            .filter(|&(t, _)| t < tau)
            .collect();
        pre.push((tau, self.y0.pi_at(tau)?));
        let post = self.post_default(defaulted, tau)?;
        let points = post.grid.nodes().into_iter().zip(post.pi).collect();
        Ok(StrategyPath {
            pre,
            post: Some(PostDefaultSegment {
                defaulted,
                tau,
                points,
            }),
        })
    }
}

pub fn strategy_path(model: &Model, steps: usize, event: Option<(Name, f64)>) -> Result<StrategyPath> {
    Cascade::solve(model, steps)?.strategy_path(event)
}
