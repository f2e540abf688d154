use contagion::copula::{Alpha1Formula, GumbelParams, Name};
use contagion::market::{MarketInputs, MarketParams};
use contagion::quadrature::{integrate, integrate_tail, Tolerance};
use contagion::recursion::{Cascade, Model};
use contagion::verify::{
    constant_strategy_sweep, pooled_std_error, simulate_expected_utility, sweep_grid, SimConfig, Strategy,
};

fn model(a: [f64; 2], beta: f64, gamma: f64) -> Model {
    let market = MarketParams::new(MarketInputs {
        gamma: [gamma, gamma],
        ..MarketInputs::default()
    })
    .unwrap();
    Model::new(market, GumbelParams::new(a[0], a[1], beta).unwrap(), Alpha1Formula::Derived)
}

fn cfg(paths: usize, seed: u64) -> SimConfig {
    SimConfig {
        paths,
        seed,
        steps: 50,
        ..SimConfig::default()
    }
}

/// `P(τ1 < τ2, τ1 <= T)` as a double integral of the ordered density.
fn first_name_first(g: &GumbelParams, horizon: f64) -> f64 {
    let tol = Tolerance {
        abs: 1e-11,
        rel: 1e-9,
        ..Tolerance::default()
    };
    let inner = |theta1: f64| {
        integrate_tail(
            |s| g.density_ordered(theta1, s, Name::First, Name::Second).unwrap(),
            theta1,
            1.0,
            400.0,
            1e-14,
            tol,
        )
        .unwrap()
    };
    integrate(inner, 1e-12, horizon, tol).unwrap()
}

#[test]
fn scenario_frequencies_match_closed_forms() {
    let m = model([0.1, 0.3], 2.0, -0.5);
    let c = Cascade::solve(&m, 50).unwrap();
    let n = 20_000;
    let r = simulate_expected_utility(&m, Strategy::Cascade(&c), &cfg(n, 11)).unwrap();
    assert_eq!(r.default_counts.iter().sum::<usize>(), n);
    assert_eq!(r.first_default_counts.iter().sum::<usize>(), n - r.default_counts[0]);

    let check = |count: usize, prob: f64| {
        let freq = count as f64 / n as f64;
        let se = (prob * (1.0 - prob) / n as f64).sqrt();
        assert!((freq - prob).abs() < 3.0 * se, "{freq} vs {prob}");
    };
    check(r.default_counts[0], m.copula.alpha0(1.0).unwrap());
    check(r.first_default_counts[0], first_name_first(&m.copula, 1.0));
}

#[test]
fn bit_identical_regardless_of_thread_count() {
    let m = model([0.1, 0.1], 2.0, -0.5);
    let c = Cascade::solve(&m, 50).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| simulate_expected_utility(&m, Strategy::Cascade(&c), &cfg(4_000, 3)).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, simulate_expected_utility(&m, Strategy::Cascade(&c), &cfg(4_000, 3)).unwrap());
}

#[test]
fn reversed_strategy_is_clearly_worse() {
    let m = model([0.01, 0.1], 2.0, -0.5);
    let c = Cascade::solve(&m, 50).unwrap();
    let sim = cfg(10_000, 5);
    let good = simulate_expected_utility(&m, Strategy::Cascade(&c), &sim).unwrap();
    let pi = c.pi0();
    let bad = simulate_expected_utility(&m, Strategy::Constant([-pi[0], -pi[1]]), &sim).unwrap();
    assert!(good.mean_utility - bad.mean_utility > 3.0 * pooled_std_error(&good, &bad));
}

#[test]
fn without_defaults_the_cascade_is_merton() {
    let m = model([1e-12, 1e-12], 1.0, -0.5);
    let c = Cascade::solve(&m, 50).unwrap();
    let merton = m.market.merton_strategy().unwrap();
    assert!((c.pi0()[0] - merton[0]).abs() < 1e-9);
    let sim = cfg(10_000, 8);
    let opt = simulate_expected_utility(&m, Strategy::Cascade(&c), &sim).unwrap();
    let flat = simulate_expected_utility(&m, Strategy::Constant(merton), &sim).unwrap();
    assert_eq!(opt.default_counts[0], 10_000);
    assert!((opt.mean_utility - flat.mean_utility).abs() < 3.0 * pooled_std_error(&opt, &flat));
    let target = -(m.market.p() * c.y0_at_origin()).exp();
    assert!((opt.mean_utility - target).abs() < 3.0 * opt.std_error);
}

#[test]
fn antithetic_pairs_reduce_error_without_defaults() {
    let m = model([1e-12, 1e-12], 1.0, 0.0);
    let pi = m.market.merton_strategy().unwrap();
    let plain = simulate_expected_utility(&m, Strategy::Constant(pi), &cfg(20_000, 2)).unwrap();
    let anti = simulate_expected_utility(
        &m,
        Strategy::Constant(pi),
        &SimConfig {
            antithetic: true,
            ..cfg(20_000, 2)
        },
    )
    .unwrap();
    assert!(anti.std_error < plain.std_error, "{} vs {}", anti.std_error, plain.std_error);
}

#[test]
fn strong_dominance_survives_a_new_seed() {
    let m = model([0.1, 0.1], 2.0, -0.5);
    let c = Cascade::solve(&m, 50).unwrap();
    let points = sweep_grid(c.pi0(), 0.5);
    let margins = |seed: u64| -> Vec<(f64, f64)> {
        let sim = cfg(5_000, seed);
        let opt = simulate_expected_utility(&m, Strategy::Cascade(&c), &sim).unwrap();
        constant_strategy_sweep(&m, &points, &sim)
            .unwrap()
            .iter()
            .map(|(_, r)| (opt.mean_utility - r.mean_utility, pooled_std_error(&opt, r)))
            .collect()
    };
    let (first, second) = (margins(21), margins(22));
    let mut strong = 0;
    for ((d1, se1), (d2, _)) in first.iter().zip(&second) {
        if d1.abs() > 5.0 * se1 {
            strong += 1;
            assert_eq!(d1.signum(), d2.signum());
        }
    }
    assert!(strong > 0);
}
