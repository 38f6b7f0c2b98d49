use rand::Rng;
use sizebias::stats::{
    indicator_independence, ks_statistic, ks_threshold, ks_two_sample, moment_shift_check, moment_shift_check_mc,
    weighted_star_sample, weighted_star_sample_par,
};
use sizebias::{Distribution, Streams};

const N: usize = 100_000;

fn named(name: &str, p: &[(&str, f64)]) -> Distribution {
    Distribution::named(name, p).unwrap()
}

#[test]
fn exponential_against_gamma_fails_at_the_analytic_gap() {
    let s = Streams::new(2026);
    let e = named("exponential", &[("alpha", 1.0)]).sample_par(&s, "t.exp", N).unwrap();
    let g = named("gamma", &[("alpha", 1.0), ("t", 2.0)]).sample_par(&s, "t.gam", N).unwrap();
    let r = ks_two_sample(&e, &g).unwrap();
    assert!(!r.pass);
    // F_exp - F_gamma = x e^{-x}, largest at x = 1
    let gap = (-1.0f64).exp();
    assert!((r.statistic - gap).abs() < 0.01, "{}", r.statistic);
}

#[test]
fn independent_poisson_samples_pass() {
    let s = Streams::new(2026);
    let d = named("poisson", &[("lambda", 3.0)]);
    let a = d.sample_par(&s, "t.po.a", N).unwrap();
    let b = d.sample_par(&s, "t.po.b", N).unwrap();
    assert!(ks_two_sample(&a, &b).unwrap().pass);
}

#[test]
fn null_rejection_rate_is_calibrated() {
    let s = Streams::new(2026);
    let d = named("exponential", &[("alpha", 1.0)]);
    let n = 2000;
    let threshold = ks_threshold(n, n);
    let rejections = (0..500u64)
        .filter(|&i| {
            let mut rng = s.stream("t.null", i);
            let a = d.sample(&mut rng, n).unwrap();
            let b = d.sample(&mut rng, n).unwrap();
            ks_statistic(&a, &b).unwrap() >= threshold
        })
        .count();
    let rate = rejections as f64 / 500.0;
    assert!(rate <= 0.03, "{rate}");
}

#[test]
fn oracle_on_exponential_is_gamma_two() {
    let s = Streams::new(2026);
    let d = named("exponential", &[("alpha", 1.0)]);
    let star = weighted_star_sample_par(&d, N, &s, "t.oracle").unwrap();
    let g = named("gamma", &[("alpha", 1.0), ("t", 2.0)]).sample_par(&s, "t.oracle.ref", N).unwrap();
    assert!(ks_two_sample(&star, &g).unwrap().pass);
}

#[test]
fn oracle_reproduces_the_table() {
    let d = Distribution::atoms(vec![(1.0, 0.4), (2.0, 0.3), (3.0, 0.2), (4.0, 0.1)]).unwrap();
    let mut rng = Streams::new(2026).stream("t.table", 0);
    let xs = weighted_star_sample(&d, N, &mut rng).unwrap();
    for (k, p) in [(1.0, 0.2), (2.0, 0.3), (3.0, 0.3), (4.0, 0.2)] {
        let f = xs.iter().filter(|&&x| x == k).count() as f64 / N as f64;
        // drawing the pool first inflates the variance by 1 + 1/16
        let se = (p * (1.0 - p) / N as f64 * (1.0 + 1.0 / 16.0)).sqrt();
        assert!((f - p).abs() < 4.0 * se, "{k}: {f}");
    }
}

#[test]
fn lognormal_moment_shift_within_mc_error() {
    let d = named("lognormal", &[("mu", 0.0), ("sigma", 1.0)]);
    let mut rng = Streams::new(2026).stream("t.ln", 0);
    for m in moment_shift_check_mc(&d, 3, 1_000_000, &mut rng).unwrap() {
        let want = (m.n as f64).exp() * d.moment(m.n).unwrap();
        assert!((m.shifted - want).abs() < 1e-9 * want);
        let se = m.se.unwrap();
        assert!(m.residual < 4.0 * se, "n={}: {} vs se {se}", m.n, m.residual);
    }
}

#[test]
fn moment_shift_exact_cases() {
    let po = named("poisson", &[("lambda", 1.0)]);
    let r = moment_shift_check(&po, 1).unwrap();
    assert!((r[0].biased - 2.0).abs() < 1e-12);
    let c = Distribution::constant(3.0).unwrap();
    assert!(moment_shift_check(&c, 5).unwrap().iter().all(|m| m.residual == 0.0));
}

#[test]
fn dependence_is_detected() {
    let mut rng = Streams::new(2026).stream("t.dep", 0);
    let xs: Vec<f64> = (0..N).map(|_| rng.random::<f64>()).collect();
    let ys: Vec<f64> = xs.iter().map(|x| x + 0.1 * rng.random::<f64>()).collect();
    let grid = [0.2, 0.4, 0.6, 0.8];
    assert!(indicator_independence(&xs, &ys, &grid, &grid) > 0.5);
}
