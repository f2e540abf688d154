use contagion::copula::GumbelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

fn draws(g: &GumbelParams, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n).map(|_| g.sample_default_times(&mut rng)).collect()
}

/// Sample correlation of the indicators `1{τ1 > T}`, `1{τ2 > T}`.
fn indicator_correlation(samples: &[(f64, f64)], horizon: f64) -> f64 {
    let n = samples.len() as f64;
    let (mut s1, mut s2, mut s12) = (0.0, 0.0, 0.0);
    for &(t1, t2) in samples {
        let (x, y) = ((t1 > horizon) as u8 as f64, (t2 > horizon) as u8 as f64);
        s1 += x;
        s2 += y;
        s12 += x * y;
    }
    let (m1, m2) = (s1 / n, s2 / n);
    (s12 / n - m1 * m2) / (m1 * (1.0 - m1) * m2 * (1.0 - m2)).sqrt()
}

fn ks_one_sample(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

fn ks_two_sample(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0_f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// `P(τ2 > s | τ1 = t)` from the derivative of the joint survival, in logs.
fn log_conditional_survival(a1: f64, a2: f64, beta: f64, t: f64, s: f64) -> f64 {
    let u = ((a1 * t).powf(beta) + (a2 * s).powf(beta)).powf(1.0 / beta);
    -u + (beta - 1.0) * (a1.ln() + t.ln()) + (1.0 - beta) * u.ln() + a1 * t
}

/// Independent sampler: `τ1` by inversion of its exponential marginal, then
/// `τ2` by bisection on the conditional survival.
fn conditional_inversion(a1: f64, a2: f64, beta: f64, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let u1: f64 = rng.random();
            let t = -(1.0 - u1).ln() / a1;
            let target = (1.0 - rng.random::<f64>()).ln();
            let (mut lo, mut hi) = (0.0, 1.0);
            while log_conditional_survival(a1, a2, beta, t, hi) > target {
                hi *= 2.0;
            }
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if log_conditional_survival(a1, a2, beta, t, mid) > target {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (t, 0.5 * (lo + hi))
        })
        .collect()
}

#[test]
fn independent_case_has_uncorrelated_survival() {
    let g = GumbelParams::new(0.5, 0.8, 1.0).unwrap();
    let n = 100_000;
    let rho = indicator_correlation(&draws(&g, n, 1), 1.0);
    assert!(rho.abs() < 3.0 / (n as f64).sqrt(), "{rho}");
}

#[test]
fn survival_correlation_matches_closed_form() {
    let g = GumbelParams::new(0.1, 0.1, 2.0).unwrap();
    let n = 1_000_000;
    let rho = indicator_correlation(&draws(&g, n, 2), 1.0);
    let exact = g.survival_correlation(1.0).unwrap();
    assert!((exact - 0.5736).abs() < 5e-4);
    // Large-sample standard error of a correlation estimate.
    let se = (1.0 - exact * exact) / (n as f64).sqrt();
    assert!((rho - 0.5736).abs() < 3.0 * se, "{rho} vs 0.5736, se {se}");
}

#[test]
fn marginal_is_exponential() {
    let g = GumbelParams::new(0.1, 0.3, 2.0).unwrap();
    let n = 100_000;
    let first: Vec<f64> = draws(&g, n, 3).into_iter().map(|s| s.0).collect();
    let d = ks_one_sample(first, |x| 1.0 - (-0.1 * x).exp());
    // 1% critical value of the Kolmogorov distribution.
    assert!(d < 1.628 / (n as f64).sqrt(), "KS {d}");
}

#[test]
fn frailty_sampler_agrees_with_conditional_inversion() {
    let (a1, a2, beta) = (0.1, 0.3, 2.0);
    let g = GumbelParams::new(a1, a2, beta).unwrap();
    let n = 20_000;
    let frailty = draws(&g, n, 4);
    let inversion = conditional_inversion(a1, a2, beta, n, 5);
    let critical = 1.628 * (2.0 / n as f64).sqrt();

    let second = |s: &[(f64, f64)]| s.iter().map(|p| p.1).collect::<Vec<_>>();
    let first_default = |s: &[(f64, f64)]| s.iter().map(|p| p.0.min(p.1)).collect::<Vec<_>>();
    let d2 = ks_two_sample(second(&frailty), second(&inversion));
    let dmin = ks_two_sample(first_default(&frailty), first_default(&inversion));
    assert!(d2 < critical, "τ2 KS {d2}");
    assert!(dmin < critical, "min KS {dmin}");

    // Joint survival at (2, 2) from both samplers against the closed form.
    let exact = g.joint_survival(2.0, 2.0).unwrap();
    let se = (exact * (1.0 - exact) / n as f64).sqrt();
    for s in [&frailty, &inversion] {
        let freq = s.iter().filter(|p| p.0 > 2.0 && p.1 > 2.0).count() as f64 / n as f64;
        assert!((freq - exact).abs() < 4.0 * se, "{freq} vs {exact}");
    }
}

#[test]
fn same_seed_same_draws() {
    let g = GumbelParams::new(0.1, 0.3, 1.5).unwrap();
    assert_eq!(draws(&g, 100, 9), draws(&g, 100, 9));
    assert_ne!(draws(&g, 100, 9), draws(&g, 100, 10));
}
