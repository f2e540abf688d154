//! Gumbel-copula law of the two default times.
//!
//! The joint survival function is `G(x, y) = exp(-u(x, y))` with
//! `u(x, y) = ((a1 x)^β + (a2 y)^β)^(1/β)`. Each marginal is exponential with
//! intensity `a_i`; `β = 1` is independence. Every density is evaluated in
//! log space first so that large exponents underflow gracefully.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::Exp1;

use crate::error::{Error, Result};

/// Times at or below this are treated as the singular corner of the density
/// when `β > 1`.
pub const MIN_TIME: f64 = 1e-12;

/// One of the two defaultable names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Name {
    First,
    Second,
}

impl Name {
    pub const BOTH: [Name; 2] = [Name::First, Name::Second];

    pub fn other(self) -> Name {
        match self {
            Name::First => Name::Second,
            Name::Second => Name::First,
        }
    }

    /// Zero-based slot in two-element arrays.
    pub fn index(self) -> usize {
        match self {
            Name::First => 0,
            Name::Second => 1,
        }
    }

    /// Parses the one-based index used on the command line.
    pub fn from_number(n: usize) -> Result<Name> {
        match n {
            1 => Ok(Name::First),
            2 => Ok(Name::Second),
            _ => Err(Error::Domain(format!("name index must be 1 or 2, got {n}"))),
        }
    }

    pub fn number(self) -> usize {
        self.index() + 1
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// Which closed form to use for the survivor-side auxiliary density `α¹`.
///
/// `Derived` is `-∂G/∂θ_i` with the survivor's coordinate at `t`; `Paper`
/// carries the extra factor `u^β` of the displayed formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Alpha1Formula {
    #[default]
    Derived,
    Paper,
}

impl Alpha1Formula {
    pub fn token(self) -> &'static str {
        match self {
            Alpha1Formula::Derived => "derived",
            Alpha1Formula::Paper => "paper",
        }
    }
}

impl fmt::Display for Alpha1Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for Alpha1Formula {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "derived" => Ok(Alpha1Formula::Derived),
            "paper" => Ok(Alpha1Formula::Paper),
            other => Err(format!("expected `derived` or `paper`, got `{other}`")),
        }
    }
}

/// Gumbel default-time law: marginal intensities and dependence parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GumbelParams {
    a1: f64,
    a2: f64,
    beta: f64,
}

// `c * ln(x)` with the convention `0 * ln(0) = 0`.
fn xlogy(c: f64, x: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else {
        c * x.ln()
    }
}

impl GumbelParams {
    pub fn new(a1: f64, a2: f64, beta: f64) -> Result<Self> {
        let positive = |field, value: f64| {
            if value.is_finite() && value > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter {
                    field,
                    value,
                    reason: "must be finite and > 0",
                })
            }
        };
        positive("a1", a1)?;
        positive("a2", a2)?;
        if !(beta.is_finite() && beta >= 1.0) {
            return Err(Error::InvalidParameter {
                field: "beta",
                value: beta,
                reason: "must be finite and >= 1",
            });
        }
        Ok(Self { a1, a2, beta })
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    pub fn a2(&self) -> f64 {
        self.a2
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn intensity(&self, name: Name) -> f64 {
        match name {
            Name::First => self.a1,
            Name::Second => self.a2,
        }
    }

    pub fn is_independent(&self) -> bool {
        self.beta == 1.0
    }

    /// `(a1^β + a2^β)^(1/β)`, the intensity of the first default.
    pub fn first_default_intensity(&self) -> f64 {
        self.u(1.0, 1.0)
    }

    // `u` for survivor coordinates given per name, scaled to avoid overflow.
    fn u(&self, theta1: f64, theta2: f64) -> f64 {
        let x = self.a1 * theta1;
        let y = self.a2 * theta2;
        let (hi, lo) = if x >= y { (x, y) } else { (y, x) };
        if hi == 0.0 {
            return 0.0;
        }
        if self.beta == 1.0 {
            return hi + lo;
        }
        hi * (1.0 + (lo / hi).powf(self.beta)).powf(1.0 / self.beta)
    }

    fn check_nonnegative(what: &str, t: f64) -> Result<()> {
        if t.is_finite() && t >= 0.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!("{what} must be finite and >= 0, got {t}")))
        }
    }

    // Densities are singular at a zero coordinate only when β > 1.
    fn check_density_time(&self, what: &str, t: f64) -> Result<()> {
        Self::check_nonnegative(what, t)?;
        if self.beta > 1.0 && t <= MIN_TIME {
            return Err(Error::Domain(format!(
                "{what} = {t} is at the singular corner of the Gumbel density (beta > 1)"
            )));
        }
        Ok(())
    }

    /// `ln P[τ1 > θ1, τ2 > θ2] = -u(θ1, θ2)`.
    pub fn log_joint_survival(&self, theta1: f64, theta2: f64) -> Result<f64> {
        Self::check_nonnegative("theta1", theta1)?;
        Self::check_nonnegative("theta2", theta2)?;
        Ok(-self.u(theta1, theta2))
    }

    pub fn joint_survival(&self, theta1: f64, theta2: f64) -> Result<f64> {
        self.log_joint_survival(theta1, theta2).map(f64::exp)
    }

    /// Log of the joint density of the unordered default times.
    pub fn log_density_unordered(&self, theta1: f64, theta2: f64) -> Result<f64> {
        self.check_density_time("theta1", theta1)?;
        self.check_density_time("theta2", theta2)?;
        let b = self.beta;
        let u = self.u(theta1, theta2);
        // At β = 1 the u-dependent factor u^(1-2β)(u+β-1) is identically 1.
        let shape = if b == 1.0 {
            0.0
        } else {
            (1.0 - 2.0 * b) * u.ln() + (u + b - 1.0).ln()
        };
        Ok(-u
            + b * (self.a1.ln() + self.a2.ln())
            + xlogy(b - 1.0, theta1)
            + xlogy(b - 1.0, theta2)
            + shape)
    }

    pub fn density_unordered(&self, theta1: f64, theta2: f64) -> Result<f64> {
        self.log_density_unordered(theta1, theta2).map(f64::exp)
    }

    /// Log density of the ranked times `θ1 <= θ2` with the defaulting order
    /// given by the marks.
    pub fn log_density_ordered(
        &self,
        theta1: f64,
        theta2: f64,
        first: Name,
        second: Name,
    ) -> Result<f64> {
        if first == second {
            return Err(Error::Domain(format!(
                "ordered density needs two distinct names, got {first} twice"
            )));
        }
        if theta1 > theta2 {
            return Err(Error::Ordering { theta1, theta2 });
        }
        match first {
            Name::First => self.log_density_unordered(theta1, theta2),
            Name::Second => self.log_density_unordered(theta2, theta1),
        }
    }

    pub fn density_ordered(
        &self,
        theta1: f64,
        theta2: f64,
        first: Name,
        second: Name,
    ) -> Result<f64> {
        self.log_density_ordered(theta1, theta2, first, second)
            .map(f64::exp)
    }

    /// Log of the auxiliary density `α¹_t(θ1)`: name `defaulted` defaults
    /// first at `θ1` and the survivor is still alive at `t >= θ1`.
    pub fn log_alpha1(
        &self,
        t: f64,
        theta1: f64,
        defaulted: Name,
        formula: Alpha1Formula,
    ) -> Result<f64> {
        self.check_density_time("theta1", theta1)?;
        if theta1 > t {
            return Err(Error::Ordering { theta1, theta2: t });
        }
        let b = self.beta;
        let u = match defaulted {
            Name::First => self.u(theta1, t),
            Name::Second => self.u(t, theta1),
        };
        let base = b * self.intensity(defaulted).ln() + xlogy(b - 1.0, theta1) - u;
        Ok(match formula {
            Alpha1Formula::Derived => base + xlogy(1.0 - b, u),
            Alpha1Formula::Paper => base + u.ln(),
        })
    }

    pub fn alpha1(
        &self,
        t: f64,
        theta1: f64,
        defaulted: Name,
        formula: Alpha1Formula,
    ) -> Result<f64> {
        self.log_alpha1(t, theta1, defaulted, formula).map(f64::exp)
    }

    /// `lim_{s→0} ln α¹_s(s)` for the derived form when `β > 1`: the first
    /// default at the origin is followed immediately by the second, so only
    /// the hazard `a_i^β c^(1-β)` with `c = (a1^β + a2^β)^(1/β)` survives.
    pub fn log_alpha1_diagonal_origin(&self, defaulted: Name) -> f64 {
        let b = self.beta;
        b * self.intensity(defaulted).ln() + (1.0 - b) * self.first_default_intensity().ln()
    }

    /// Survival probability before any default, `α⁰_t = G(t, t)`.
    pub fn log_alpha0(&self, t: f64) -> Result<f64> {
        self.log_joint_survival(t, t)
    }

    pub fn alpha0(&self, t: f64) -> Result<f64> {
        self.joint_survival(t, t)
    }

    /// Linear correlation of the survival indicators `1{τ1 > T}`, `1{τ2 > T}`.
    pub fn survival_correlation(&self, horizon: f64) -> Result<f64> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Domain(format!("horizon must be > 0, got {horizon}")));
        }
        let p1 = (-self.a1 * horizon).exp();
        let p2 = (-self.a2 * horizon).exp();
        let q1 = -(-self.a1 * horizon).exp_m1();
        let q2 = -(-self.a2 * horizon).exp_m1();
        let variance = p1 * q1 * p2 * q2;
        if !(variance.is_normal() && variance > 0.0) {
            return Err(Error::Degenerate(format!(
                "survival indicators at T = {horizon} have vanishing variance"
            )));
        }
        let joint = self.joint_survival(horizon, horizon)?;
        Ok((joint - p1 * p2) / variance.sqrt())
    }

    /// Draws `(τ1, τ2)` by the Marshall–Olkin frailty construction: a
    /// positive stable variable of index `1/β` shared by two exponentials.
    pub fn sample_default_times<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let v = positive_stable(1.0 / self.beta, rng);
        let e1: f64 = rng.sample(Exp1);
        let e2: f64 = rng.sample(Exp1);
        let inv_beta = 1.0 / self.beta;
        (
            (e1 / v).powf(inv_beta) / self.a1,
            (e2 / v).powf(inv_beta) / self.a2,
        )
    }
}

/// Positive stable variable with Laplace transform `exp(-s^alpha)`,
/// `0 < alpha <= 1`, by the Chambers–Mallows–Stuck (Kanter) formula.
pub fn positive_stable<R: Rng + ?Sized>(alpha: f64, rng: &mut R) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let uniform: f64 = rng.random();
    // (0, π]: sin(U) never vanishes.
    let angle = PI * (1.0 - uniform);
    let e: f64 = rng.sample(Exp1);
    let a = (alpha * angle).sin() / angle.sin().powf(1.0 / alpha);
    let b = (((1.0 - alpha) * angle).sin() / e).powf((1.0 - alpha) / alpha);
    a * b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, Tolerance};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn rejects_invalid_parameters() {
        assert!(GumbelParams::new(0.0, 0.1, 2.0).is_err());
        assert!(GumbelParams::new(0.1, -1.0, 2.0).is_err());
        assert!(matches!(
            GumbelParams::new(0.1, 0.1, 0.5),
            Err(Error::InvalidParameter { field: "beta", .. })
        ));
        assert!(GumbelParams::new(0.1, 0.1, f64::NAN).is_err());
    }

    #[test]
    fn joint_survival_examples() {
        let ind = GumbelParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(rel(ind.joint_survival(1.0, 1.0).unwrap(), (-2f64).exp()) < 1e-15);
        let g = GumbelParams::new(0.1, 0.1, 2.0).unwrap();
        let v = g.joint_survival(1.0, 1.0).unwrap();
        assert!((v - (-(0.02f64).sqrt()).exp()).abs() < 1e-15);
        assert!((v - 0.868123).abs() < 1e-6);
        assert_eq!(g.joint_survival(0.0, 0.0).unwrap(), 1.0);
        assert!(matches!(g.joint_survival(-1.0, 0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn joint_survival_is_nonincreasing() {
        let g = GumbelParams::new(0.3, 0.1, 3.0).unwrap();
        let mut prev = 1.0;
        for k in 0..50 {
            let v = g.joint_survival(0.2 * k as f64, 1.0).unwrap();
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn independent_density() {
        let g = GumbelParams::new(1.0, 1.0, 1.0).unwrap();
        assert!(rel(g.density_unordered(1.0, 1.0).unwrap(), (-2f64).exp()) < 1e-15);
        let g = GumbelParams::new(0.2, 0.7, 1.0).unwrap();
        for &(x, y) in &[(0.1_f64, 0.3_f64), (2.0, 0.5), (5.0, 9.0)] {
            let expect = 0.2 * 0.7 * (-0.2 * x - 0.7 * y).exp();
            assert!(rel(g.density_unordered(x, y).unwrap(), expect) < 1e-14);
        }
    }

    #[test]
    fn density_rejects_singular_corner() {
        let g = GumbelParams::new(0.1, 0.1, 2.0).unwrap();
        assert!(g.density_unordered(0.0, 1.0).is_err());
        assert!(g.density_unordered(1e-13, 1.0).is_err());
        assert!(g.density_unordered(-1.0, 1.0).is_err());
        // No singularity under independence.
        let ind = GumbelParams::new(0.1, 0.1, 1.0).unwrap();
        assert!(rel(ind.density_unordered(0.0, 0.0).unwrap(), 0.01) < 1e-15);
    }

    #[test]
    fn density_matches_mixed_partial_of_survival() {
        let g = GumbelParams::new(0.01, 0.1, 2.0).unwrap();
        let h = 1e-3;
        let (x, y) = (0.5, 0.7);
        let s = |a, b| g.joint_survival(a, b).unwrap();
        let fd = (s(x + h, y + h) - s(x + h, y - h) - s(x - h, y + h) + s(x - h, y - h))
            / (4.0 * h * h);
        let d = g.density_unordered(x, y).unwrap();
        assert!(rel(fd, d) < 1e-5, "fd {fd} vs {d}");
    }

    #[test]
    fn ordered_density_slot_mapping() {
        let g = GumbelParams::new(0.1, 0.3, 2.0).unwrap();
        assert_eq!(
            g.density_ordered(0.3, 0.8, Name::First, Name::Second).unwrap(),
            g.density_unordered(0.3, 0.8).unwrap()
        );
        assert_eq!(
            g.density_ordered(0.3, 0.8, Name::Second, Name::First).unwrap(),
            g.density_unordered(0.8, 0.3).unwrap()
        );
        assert!(matches!(
            g.density_ordered(0.8, 0.3, Name::First, Name::Second),
            Err(Error::Ordering { .. })
        ));
        assert!(matches!(
            g.density_ordered(0.3, 0.8, Name::First, Name::First),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn alpha1_independence_and_modes() {
        let g = GumbelParams::new(0.2, 0.5, 1.0).unwrap();
        let v = g.alpha1(0.9, 0.4, Name::First, Alpha1Formula::Derived).unwrap();
        assert!(rel(v, 0.2 * (-0.2 * 0.4 - 0.5 * 0.9f64).exp()) < 1e-14);

        let g = GumbelParams::new(0.1, 0.3, 2.0).unwrap();
        for name in Name::BOTH {
            let d = g.alpha1(0.9, 0.4, name, Alpha1Formula::Derived).unwrap();
            let p = g.alpha1(0.9, 0.4, name, Alpha1Formula::Paper).unwrap();
            let u = match name {
                Name::First => g.u(0.4, 0.9),
                Name::Second => g.u(0.9, 0.4),
            };
            assert!(rel(p, d * u.powf(2.0)) < 1e-13);
        }
        assert!(g.alpha1(0.3, 0.4, Name::First, Alpha1Formula::Derived).is_err());
    }

    #[test]
    fn alpha1_is_tail_integral_of_ordered_density() {
        let g = GumbelParams::new(0.1, 0.3, 2.0).unwrap();
        let (theta1, t) = (0.4, 0.9);
        // G < 1e-14 beyond u = 33.
        let cutoff = 33.0 / 0.3;
        let tail = integrate(
            |s| g.density_ordered(theta1, s, Name::First, Name::Second).unwrap(),
            t,
            cutoff,
            Tolerance::default(),
        )
        .unwrap();
        let a = g.alpha1(t, theta1, Name::First, Alpha1Formula::Derived).unwrap();
        assert!(rel(tail, a) < 1e-6, "{tail} vs {a}");
    }

    #[test]
    fn alpha0_examples() {
        let g = GumbelParams::new(0.1, 0.1, 2.0).unwrap();
        assert_eq!(g.alpha0(1.0).unwrap(), g.joint_survival(1.0, 1.0).unwrap());
        assert!((g.alpha0(1.0).unwrap() - 0.868123).abs() < 1e-6);
        assert_eq!(g.alpha0(0.0).unwrap(), 1.0);
        let ind = GumbelParams::new(0.2, 0.3, 1.0).unwrap();
        assert!(rel(ind.alpha0(2.0).unwrap(), (-1f64).exp()) < 1e-15);
        assert!(g.alpha0(-0.1).is_err());
    }

    #[test]
    fn diagonal_origin_limit() {
        let g = GumbelParams::new(0.1, 0.3, 2.0).unwrap();
        for name in Name::BOTH {
            let lim = g.log_alpha1_diagonal_origin(name);
            let near = g.log_alpha1(1e-9, 1e-9, name, Alpha1Formula::Derived).unwrap();
            assert!((lim - near).abs() < 1e-8);
        }
    }

    #[test]
    fn survival_correlation_values() {
        let cases = [
            (0.01, 0.1, 2.0, 0.2936),
            (0.1, 0.1, 2.0, 0.5736),
            (0.3, 0.1, 2.0, 0.4555),
            (0.01, 0.01, 2.0, 0.5846),
        ];
        for (a1, a2, b, expect) in cases {
            let g = GumbelParams::new(a1, a2, b).unwrap();
            let rho = g.survival_correlation(1.0).unwrap();
            assert!((rho - expect).abs() < 5e-4, "{a1} {a2}: {rho}");
        }
        let ind = GumbelParams::new(0.3, 0.05, 1.0).unwrap();
        assert!(ind.survival_correlation(1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn survival_correlation_degenerate() {
        let g = GumbelParams::new(1e-320, 0.1, 2.0).unwrap();
        assert!(matches!(g.survival_correlation(1.0), Err(Error::Degenerate(_))));
        assert!(g.survival_correlation(0.0).is_err());
    }

    #[test]
    fn name_helpers() {
        assert_eq!(Name::First.other(), Name::Second);
        assert_eq!(Name::from_number(2).unwrap(), Name::Second);
        assert!(Name::from_number(3).is_err());
        assert_eq!("paper".parse::<Alpha1Formula>().unwrap(), Alpha1Formula::Paper);
        assert!("literal".parse::<Alpha1Formula>().is_err());
    }
}
