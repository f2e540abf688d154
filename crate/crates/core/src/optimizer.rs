//! Pointwise minimizations inside the generators.
//!
//! After a first default the investor trades the survivor alone and faces a
//! one-dimensional strictly convex problem; before any default the problem is
//! two-dimensional with one exponential jump term per possible defaulter.
//! Jump weights are carried as logarithms so that `exp(ln α - p y)` never
//! has to be formed before it is multiplied by `exp(p π)`.

use crate::error::{Error, Result};
use crate::linalg::{self, Mat2, Vec2};
use crate::market::Interval;

/// Largest exponent allowed at an accepted iterate.
pub const EXPONENT_GUARD: f64 = 700.0;

const GRAD_TOL: f64 = 1e-10;
const MAX_NEWTON_ITERATIONS: usize = 100;
const ARMIJO_C: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostDefaultProblem {
    sharpe: f64,
    vol: f64,
    p: f64,
    log_weight: f64,
    constraint: Option<Interval>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PostDefaultSolution {
    pub value: f64,
    pub pi: f64,
    /// Projected first-order residual at `pi`.
    pub residual: f64,
}

impl PostDefaultProblem {
    pub fn new(
        sharpe: f64,
        vol: f64,
        p: f64,
        jump_weight: f64,
        constraint: Option<Interval>,
    ) -> Result<Self> {
        if jump_weight.is_nan() || jump_weight < 0.0 {
            return Err(Error::InvalidParameter {
                field: "jump_weight",
                value: jump_weight,
                reason: "must be >= 0",
            });
        }
        Self::with_log_weight(sharpe, vol, p, jump_weight.ln(), constraint)
    }

    /// Same problem with the jump weight given as `ln C` (`-inf` for zero).
    pub fn with_log_weight(
        sharpe: f64,
        vol: f64,
        p: f64,
        log_weight: f64,
        constraint: Option<Interval>,
    ) -> Result<Self> {
        if !(vol.is_finite() && vol > 0.0) {
            return Err(Error::InvalidParameter {
                field: "vol",
                value: vol,
                reason: "must be > 0",
            });
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParameter {
                field: "p",
                value: p,
                reason: "must be > 0",
            });
        }
        if !sharpe.is_finite() {
            return Err(Error::InvalidParameter {
                field: "sharpe",
                value: sharpe,
                reason: "must be finite",
            });
        }
        if log_weight.is_nan() || log_weight == f64::INFINITY {
            return Err(Error::InvalidParameter {
                field: "log_weight",
                value: log_weight,
                reason: "must be finite or -inf",
            });
        }
        Ok(Self {
            sharpe,
            vol,
            p,
            log_weight,
            constraint,
        })
    }

    pub fn jump_weight(&self) -> f64 {
        self.log_weight.exp()
    }

    fn jump_term(&self, pi: f64) -> f64 {
        if self.log_weight == f64::NEG_INFINITY {
            0.0
        } else {
            (self.log_weight + self.p * pi).exp()
        }
    }

    /// `g(π) = (p/2)(λ/p - σπ)² + (C/p) e^{pπ}`
    pub fn objective(&self, pi: f64) -> f64 {
        let r = self.sharpe / self.p - self.vol * pi;
        0.5 * self.p * r * r + self.jump_term(pi) / self.p
    }

    /// `g'(π) = pσ²π - σλ + C e^{pπ}`
    pub fn derivative(&self, pi: f64) -> f64 {
        self.p * self.vol * self.vol * pi - self.vol * self.sharpe + self.jump_term(pi)
    }

    /// Argmin of the jump-free objective, `λ/(pσ)`.
    pub fn merton(&self) -> f64 {
        self.sharpe / (self.p * self.vol)
    }

    fn unconstrained_root(&self) -> Result<f64> {
        let hi = self.merton();
        if self.log_weight == f64::NEG_INFINITY {
            return Ok(hi);
        }
        let phi = |x: f64| self.derivative(x);
        let dphi = |x: f64| self.p * self.vol * self.vol + self.p * self.jump_term(x);

        // The derivative is >= 0 at the Merton point; expand downward.
        let mut hi_b = hi;
        if phi(hi_b) == 0.0 {
            return Ok(hi_b);
        }
        let mut step = hi.abs().max(1.0);
        let mut lo_b = hi - step;
        let mut expansions = 0;
        while phi(lo_b) >= 0.0 {
            hi_b = lo_b;
            step *= 2.0;
            lo_b = hi - step;
            expansions += 1;
            if expansions > 2000 || !lo_b.is_finite() {
                return Err(Error::NonConvergence {
                    solver: "post-default bracket expansion",
                    iterations: expansions,
                    residual: phi(lo_b),
                });
            }
        }

        let mut x = hi_b;
        let mut last_width = f64::INFINITY;
        for iteration in 0..200 {
            let fx = phi(x);
            if fx == 0.0 {
                return Ok(x);
            }
            if fx > 0.0 {
                hi_b = x;
            } else {
                lo_b = x;
            }
            let width = hi_b - lo_b;
            let newton = x - fx / dphi(x);
            // Newton creeps one unit per step down a steep exponential wall;
            // bisect whenever the bracket failed to halve.
            let next = if newton > lo_b && newton < hi_b && width <= 0.5 * last_width {
                newton
            } else {
                0.5 * (lo_b + hi_b)
            };
            last_width = width;
            if (next - x).abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs())
                || width <= 4.0 * f64::EPSILON * (1.0 + x.abs())
            {
                return Ok(next);
            }
            x = next;
            if iteration == 199 {
                break;
            }
        }
        Err(Error::NonConvergence {
            solver: "post-default Newton-bisection",
            iterations: 200,
            residual: phi(x),
        })
    }

    pub fn solve(&self) -> Result<PostDefaultSolution> {
        let root = self.unconstrained_root()?;
        let pi = match self.constraint {
            Some(c) => c.clamp(root),
            None => root,
        };
        if self.log_weight != f64::NEG_INFINITY && self.log_weight + self.p * pi > EXPONENT_GUARD {
            return Err(Error::ExponentOverflow {
                exponent: self.log_weight + self.p * pi,
                context: "post-default minimizer",
            });
        }
        let grad = self.derivative(pi);
        let residual = match self.constraint {
            Some(c) => (pi - c.clamp(pi - grad)).abs(),
            None => grad.abs(),
        };
        Ok(PostDefaultSolution {
            value: self.objective(pi),
            pi,
            residual,
        })
    }

    /// Unconstrained argmin in closed form,
    /// `π = λ/(pσ) - W((C/σ²) e^{λ/σ}) / p`.
    pub fn lambert_argmin(&self) -> Result<f64> {
        if self.log_weight == f64::NEG_INFINITY {
            return Ok(self.merton());
        }
        let log_x = self.log_weight - 2.0 * self.vol.ln() + self.sharpe / self.vol;
        Ok(self.merton() - lambert_w0_log(log_x)? / self.p)
    }
}

pub fn solve_post_default(prob: &PostDefaultProblem) -> Result<PostDefaultSolution> {
    prob.solve()
}

/// Principal branch of the Lambert W function on `[0, ∞)` by Halley's
/// iteration on `w e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain(format!("lambert_w0 expects finite x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let mut w = if x < 1.0 {
        x.ln_1p()
    } else {
        let l = x.ln();
        (l - l.max(1.0).ln()).max(0.5)
    };
    for _ in 0..100 {
        let ew = w.exp();
        let f = w * ew - x;
        let denom = ew * (w + 1.0) - (w + 2.0) * f / (2.0 * w + 2.0);
        let step = f / denom;
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * (1.0 + w.abs()) {
            return Ok(w);
        }
    }
    Err(Error::NonConvergence {
        solver: "Lambert W Halley iteration",
        iterations: 100,
        residual: w * w.exp() - x,
    })
}

/// `W(exp(log_x))` without forming `exp(log_x)` when it would overflow.
pub fn lambert_w0_log(log_x: f64) -> Result<f64> {
    if log_x == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    if log_x < 500.0 {
        return lambert_w0(log_x.exp());
    }
    // Newton on w + ln w = log_x.
    let mut w = log_x - log_x.ln();
    for _ in 0..100 {
        let f = w + w.ln() - log_x;
        let step = f / (1.0 + 1.0 / w);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            return Ok(w);
        }
    }
    Err(Error::NonConvergence {
        solver: "Lambert W log-space Newton",
        iterations: 100,
        residual: w + w.ln() - log_x,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreDefaultProblem {
    lambda0: Vec2,
    sigma0: Mat2,
    p: f64,
    gamma: Vec2,
    log_weights: Vec2,
    constraint: Option<[Interval; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreDefaultSolution {
    pub value: f64,
    pub pi: Vec2,
    /// Gradient norm (unconstrained) or KKT residual (box-constrained).
    pub residual: f64,
    pub iterations: usize,
}

impl PreDefaultProblem {
    pub fn new(
        lambda0: Vec2,
        sigma0: Mat2,
        p: f64,
        gamma: Vec2,
        exp_weights: Vec2,
        constraint: Option<[Interval; 2]>,
    ) -> Result<Self> {
        for &w in &exp_weights {
            if w.is_nan() || w < 0.0 {
                return Err(Error::InvalidParameter {
                    field: "exp_weights",
                    value: w,
                    reason: "must be >= 0",
                });
            }
        }
        Self::with_log_weights(
            lambda0,
            sigma0,
            p,
            gamma,
            [exp_weights[0].ln(), exp_weights[1].ln()],
            constraint,
        )
    }

    /// `log_weights[i] = p (D^i(t) - y)`, `-inf` for a zero weight.
    pub fn with_log_weights(
        lambda0: Vec2,
        sigma0: Mat2,
        p: f64,
        gamma: Vec2,
        log_weights: Vec2,
        constraint: Option<[Interval; 2]>,
    ) -> Result<Self> {
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidParameter {
                field: "p",
                value: p,
                reason: "must be > 0",
            });
        }
        if linalg::solve(&linalg::gram(&sigma0), [1.0, 0.0]).is_none() {
            return Err(Error::Degenerate("pre-default volatility matrix is singular".into()));
        }
        for &lw in &log_weights {
            if lw.is_nan() || lw == f64::INFINITY {
                return Err(Error::InvalidParameter {
                    field: "log_weights",
                    value: lw,
                    reason: "must be finite or -inf",
                });
            }
        }
        Ok(Self {
            lambda0,
            sigma0,
            p,
            gamma,
            log_weights,
            constraint,
        })
    }

    /// Direction vectors of the wealth jump: name 1 defaulting moves wealth
    /// by `v1·π = -π¹ + γ²π²`, name 2 by `v2·π = γ¹π¹ - π²`.
    pub fn jump_directions(&self) -> [Vec2; 2] {
        [[-1.0, self.gamma[1]], [self.gamma[0], -1.0]]
    }

    fn exponents(&self, pi: Vec2) -> Vec2 {
        let v = self.jump_directions();
        [
            self.log_weights[0] - self.p * linalg::dot(v[0], pi),
            self.log_weights[1] - self.p * linalg::dot(v[1], pi),
        ]
    }

    fn jump_terms(&self, pi: Vec2, guard: bool) -> Vec2 {
        let e = self.exponents(pi);
        let term = |x: f64| {
            if x == f64::NEG_INFINITY {
                0.0
            } else if guard {
                x.min(EXPONENT_GUARD).exp()
            } else {
                x.exp()
            }
        };
        [term(e[0]), term(e[1])]
    }

    fn objective_impl(&self, pi: Vec2, guard: bool) -> f64 {
        let r = linalg::sub(
            linalg::scale(1.0 / self.p, self.lambda0),
            linalg::mat_t_vec(&self.sigma0, pi),
        );
        let e = self.jump_terms(pi, guard);
        0.5 * self.p * linalg::dot(r, r) + (e[0] + e[1]) / self.p
    }

    /// `h(π) = (p/2)|λ⁰/p - (σ⁰)'π|² + (1/p) Σ W_k e^{-p v_k·π}`
    pub fn objective(&self, pi: Vec2) -> f64 {
        self.objective_impl(pi, false)
    }

    pub fn gradient(&self, pi: Vec2) -> Vec2 {
        self.gradient_with(pi, self.jump_terms(pi, false))
    }

    fn gradient_with(&self, pi: Vec2, e: Vec2) -> Vec2 {
        let gram = linalg::gram(&self.sigma0);
        let v = self.jump_directions();
        let mut g = linalg::sub(
            linalg::scale(self.p, linalg::mat_vec(&gram, pi)),
            linalg::mat_vec(&self.sigma0, self.lambda0),
        );
        g = linalg::sub(g, linalg::scale(e[0], v[0]));
        linalg::sub(g, linalg::scale(e[1], v[1]))
    }

    pub fn hessian(&self, pi: Vec2) -> Mat2 {
        let e = self.jump_terms(pi, false);
        let v = self.jump_directions();
        let mut h = linalg::mat_scale(self.p, &linalg::gram(&self.sigma0));
        h = linalg::mat_add(&h, &linalg::mat_scale(self.p * e[0], &linalg::outer(v[0], v[0])));
        linalg::mat_add(&h, &linalg::mat_scale(self.p * e[1], &linalg::outer(v[1], v[1])))
    }

    /// Jump-free argmin `(1/p)(σσ')⁻¹ σλ`, ignoring constraints.
    pub fn merton(&self) -> Vec2 {
        let gram = linalg::gram(&self.sigma0);
        let rhs = linalg::mat_vec(&self.sigma0, self.lambda0);
        let x = linalg::solve(&gram, rhs).expect("validated at construction");
        linalg::scale(1.0 / self.p, x)
    }

    fn project(&self, pi: Vec2) -> Vec2 {
        match &self.constraint {
            Some(b) => [b[0].clamp(pi[0]), b[1].clamp(pi[1])],
            None => pi,
        }
    }

    fn residual(&self, pi: Vec2, g: Vec2) -> f64 {
        match self.constraint {
            Some(_) => linalg::norm(linalg::sub(pi, self.project(linalg::sub(pi, g)))),
            None => linalg::norm(g),
        }
    }

    fn check_exponents(&self, pi: Vec2) -> Result<()> {
        for e in self.exponents(pi) {
            if e > EXPONENT_GUARD {
                return Err(Error::ExponentOverflow {
                    exponent: e,
                    context: "pre-default Newton iterate",
                });
            }
        }
        Ok(())
    }

    /// Damped (projected) Newton from the Merton point.
    pub fn solve(&self) -> Result<PreDefaultSolution> {
        let mut pi = self.project(self.merton());
        self.check_exponents(pi)?;
        let mut iterations = 0;
        loop {
            let g = self.gradient(pi);
            let residual = self.residual(pi, g);
            if residual < GRAD_TOL {
                return Ok(PreDefaultSolution {
                    value: self.objective(pi),
                    pi,
                    residual,
                    iterations,
                });
            }
            if iterations >= MAX_NEWTON_ITERATIONS {
                return Err(Error::NonConvergence {
                    solver: "pre-default damped Newton",
                    iterations,
                    residual,
                });
            }
            iterations += 1;
            let direction = self.newton_direction(pi, g, residual);
            let f0 = self.objective_impl(pi, true);
            let mut accepted = self.line_search(pi, g, direction, f0);
            if accepted.is_none() {
                // Newton direction stalled against the box: fall back to a
                // projected gradient step.
                accepted = self.line_search(pi, g, linalg::scale(-1.0, g), f0);
            }
            match accepted {
                Some(next) => {
                    self.check_exponents(next)?;
                    if next == pi {
                        let g = self.gradient(pi);
                        return Err(Error::NonConvergence {
                            solver: "pre-default damped Newton",
                            iterations,
                            residual: self.residual(pi, g),
                        });
                    }
                    pi = next;
                }
                None => {
                    // No decrease is representable: accept only if the
                    // stationarity residual is already at rounding level.
                    let g = self.gradient(pi);
                    let residual = self.residual(pi, g);
                    if residual < 1e3 * GRAD_TOL {
                        return Ok(PreDefaultSolution {
                            value: self.objective(pi),
                            pi,
                            residual,
                            iterations,
                        });
                    }
                    return Err(Error::NonConvergence {
                        solver: "pre-default line search",
                        iterations,
                        residual,
                    });
                }
            }
        }
    }

    fn newton_direction(&self, pi: Vec2, g: Vec2, residual: f64) -> Vec2 {
        let h = self.hessian(pi);
        let Some(bounds) = self.constraint else {
            let d = linalg::solve(&h, g).unwrap_or(g);
            return linalg::scale(-1.0, d);
        };
        // ε-active set: coordinates pinned at a bound with the gradient
        // pushing outward are frozen; Newton runs on the rest.
        let eps = residual.min(1e-8);
        let active: [bool; 2] = std::array::from_fn(|i| {
            (pi[i] <= bounds[i].lo + eps && g[i] > 0.0) || (pi[i] >= bounds[i].hi - eps && g[i] < 0.0)
        });
        match active {
            [true, true] => [0.0, 0.0],
            [true, false] => [0.0, -g[1] / h[1][1]],
            [false, true] => [-g[0] / h[0][0], 0.0],
            [false, false] => linalg::scale(-1.0, linalg::solve(&h, g).unwrap_or(g)),
        }
    }

    fn line_search(&self, pi: Vec2, g: Vec2, d: Vec2, f0: f64) -> Option<Vec2> {
        if d == [0.0, 0.0] {
            return None;
        }
        let mut step = 1.0;
        for _ in 0..60 {
            let trial = self.project(linalg::add(pi, linalg::scale(step, d)));
            let decrease = linalg::dot(g, linalg::sub(trial, pi));
            let f = self.objective_impl(trial, true);
            if f <= f0 + ARMIJO_C * decrease && decrease < 0.0 {
                return Some(trial);
            }
            // Rounding floor: trial equals current point within ulp scale.
            if f <= f0 && decrease == 0.0 {
                return None;
            }
            step *= 0.5;
        }
        None
    }
}

pub fn solve_pre_default(prob: &PreDefaultProblem) -> Result<PreDefaultSolution> {
    prob.solve()
}
