use num_complex::Complex64;
use sizebias::levy::{
    build_infdiv, deconvolution_check, density_convolution_residual, verify_steutel, LevyDensity, LevyMeasure, Verdict,
};
use sizebias::stats::{ks_two_sample, mean_se, weighted_resample};
use sizebias::{Distribution, Streams};

const N: usize = 100_000;

fn named(name: &str, p: &[(&str, f64)]) -> Distribution {
    Distribution::named(name, p).unwrap()
}

#[test]
fn single_atom_gives_scaled_poisson() {
    let nu = LevyMeasure::single_atom(0.5, 2.0).unwrap();
    let x = build_infdiv(&nu, 0.0).unwrap();
    let s = Streams::new(11);
    let xs = s.par_collect("t.atom", N, 1 << 13, |rng, len| x.sample(rng, len));
    let want = named("scaled_poisson", &[("y", 0.5), ("lambda", 4.0)]).sample_par(&s, "t.atom.ref", N).unwrap();
    assert!(ks_two_sample(&xs, &want).unwrap().pass);
    assert!(xs.iter().all(|v| (v / 0.5).fract() == 0.0));
}

#[test]
fn geometric_measure_charfn() {
    let nu = LevyMeasure::geometric(0.5, 60).unwrap();
    let g = named("geometric", &[("q", 0.5)]);
    for k in -40..=40 {
        let u = k as f64 * 0.25;
        assert!((nu.charfn(u) - g.charfn(u).unwrap()).norm() < 1e-12, "u={u}");
    }
}

#[test]
fn exponential_measure_charfn_closed_form() {
    let (t, alpha) = (2.5, 1.5);
    let nu = LevyMeasure::exponential(t, alpha).unwrap();
    for k in -40..=40 {
        let u = k as f64 * 0.25;
        let want = (Complex64::new(1.0, -u / alpha)).powf(-t);
        assert!((nu.charfn(u) - want).norm() < 1e-6, "u={u}");
    }
    assert_eq!(nu.charfn(0.0), Complex64::new(1.0, 0.0));
}

#[test]
fn increments_of_examples() {
    let y = LevyMeasure::geometric(0.5, 60).unwrap().steutel_increment().unwrap();
    let want = named("geometric", &[("q", 0.5)]).shifted(1.0).unwrap();
    assert!(y.atom_table().unwrap().sup_distance(&want.atom_table().unwrap()) < 1e-12);

    let y = LevyMeasure::exponential(1.0, 2.0).unwrap().steutel_increment().unwrap();
    for x in [0.1, 0.5, 2.0] {
        assert!((y.cdf(x).unwrap() - (1.0 - (-2.0 * x).exp())).abs() < 1e-12);
    }

    let nu = LevyMeasure::new(1.5, vec![], None).unwrap();
    assert_eq!(nu.steutel_increment().unwrap().atom_table().unwrap().prob_at(0.0), 1.0);
    let x = build_infdiv(&nu, 0.0).unwrap();
    let mut rng = Streams::new(1).stream("t", 0);
    assert!(x.sample(&mut rng, 100).iter().all(|&v| v == 1.5));
}

#[test]
fn charfn_sizebias_examples() {
    let po = named("poisson", &[("lambda", 2.0)]);
    for u in [0.0, 0.3, 1.7, -4.0] {
        let want = Complex64::new(0.0, u).exp() * po.charfn(u).unwrap();
        assert!((po.charfn_sizebias(u).unwrap() - want).norm() < 1e-12);
    }
    let table = Distribution::atoms(vec![(1.0, 0.4), (2.0, 0.3), (3.0, 0.2), (4.0, 0.1)]).unwrap();
    let u = 0.9;
    let want: Complex64 = [(1.0, 0.4), (2.0, 0.3), (3.0, 0.2), (4.0, 0.1)]
        .iter()
        .map(|&(k, p): &(f64, f64)| Complex64::new(0.0, u * k).exp() * (k * p / 2.0))
        .sum();
    assert!((table.charfn_sizebias(u).unwrap() - want).norm() < 1e-14);
    assert!((table.charfn_sizebias(0.0).unwrap() - 1.0).norm() < 1e-15);
}

#[test]
fn phi_star_is_phi_times_eta() {
    let cases = [
        (LevyMeasure::geometric(0.5, 60).unwrap(), named("geometric", &[("q", 0.5)])),
        (LevyMeasure::exponential(1.0, 1.0).unwrap(), named("exponential", &[("alpha", 1.0)])),
        (LevyMeasure::single_atom(2.0, 3.0).unwrap(), named("scaled_poisson", &[("y", 2.0), ("lambda", 1.5)])),
    ];
    for (nu, x) in cases {
        let y = nu.steutel_increment().unwrap();
        for k in -80..=80 {
            let u = k as f64 * 0.25;
            let lhs = x.charfn_sizebias(u).unwrap();
            let rhs = nu.charfn(u) * y.charfn(u).unwrap();
            assert!((lhs - rhs).norm() < 1e-6, "{x} u={u}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn total_mass_is_the_mean() {
    let nu = LevyMeasure::new(
        0.5,
        vec![(1.0, 0.7), (2.5, 0.4)],
        Some(LevyDensity::Exponential { t: 1.2, alpha: 2.0 }),
    )
    .unwrap();
    let a = nu.total_mass();
    assert!((a - 2.2).abs() < 1e-12);
    let x = build_infdiv(&nu, 0.0).unwrap();
    let xs = Streams::new(3).par_collect("t.mean", N, 1 << 13, |rng, len| x.sample(rng, len));
    let (m, se) = mean_se(&xs);
    assert!((m - a).abs() < 4.0 * se, "{m} +- {se} vs {a}");
}

#[test]
fn compound_poisson_zero_mass() {
    let nu = LevyMeasure::new(0.0, vec![(1.0, 1.0), (2.0, 0.6)], None).unwrap();
    let lambda = 1.0 + 0.3;
    let x = build_infdiv(&nu, 0.0).unwrap();
    let xs = Streams::new(5).par_collect("t.zero", N, 1 << 13, |rng, len| x.sample(rng, len));
    let p = xs.iter().filter(|&&v| v == 0.0).count() as f64 / N as f64;
    let want = (-lambda as f64).exp();
    let se = (want * (1.0 - want) / N as f64).sqrt();
    assert!((p - want).abs() < 4.0 * se, "{p} vs {want}");
}

#[test]
fn catalogue_verdicts() {
    let inconclusive = [
        named("poisson", &[("lambda", 0.7)]),
        named("poisson", &[("lambda", 5.0)]),
        named("geometric", &[("q", 0.3)]),
        named("negative_binomial", &[("t", 2.5), ("q", 0.6)]),
        named("exponential", &[("alpha", 2.0)]),
        named("gamma", &[("alpha", 0.5), ("t", 3.0)]),
        named("scaled_poisson", &[("y", 2.0), ("lambda", 1.5)]),
    ];
    for d in inconclusive {
        let r = deconvolution_check(&d).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive, "{d}: {}", r.max_eta);
    }
    let negative = [
        named("binomial", &[("n", 4.0), ("p", 0.5)]),
        named("binomial", &[("n", 3.0), ("p", 0.8)]),
        named("bernoulli", &[("p", 0.3)]),
        named("beta", &[("a", 1.0), ("b", 1.0)]),
        named("beta", &[("a", 3.0), ("b", 0.5)]),
    ];
    for d in negative {
        let r = deconvolution_check(&d).unwrap();
        assert_eq!(r.verdict, Verdict::Negative, "{d}: {}", r.max_eta);
    }
}

#[test]
fn poisson_eta_has_unit_modulus() {
    let r = deconvolution_check(&named("poisson", &[("lambda", 3.0)])).unwrap();
    assert!((r.max_eta - 1.0).abs() < 1e-9);
}

#[test]
fn finite_type_constructions_agree() {
    let nu = LevyMeasure::new(0.0, vec![(1.0, 0.8), (3.0, 1.5), (4.5, 0.9)], None).unwrap();
    let s = Streams::new(7);
    let x = build_infdiv(&nu, 0.0).unwrap();
    let direct = s.par_collect("t.ft.direct", N, 1 << 13, |rng, len| x.sample(rng, len));
    let cp = nu.compound_poisson().unwrap().sampler().unwrap();
    let sums = s.par_collect("t.ft.cp", N, 1 << 13, |rng, len| {
        (0..len).map(|_| rand::Rng::sample(rng, &cp)).collect()
    });
    assert!(ks_two_sample(&direct, &sums).unwrap().pass);
}

#[test]
fn biased_summand_is_the_increment() {
    let nu = LevyMeasure::new(0.0, vec![(1.0, 0.8), (3.0, 1.5), (4.5, 0.9)], None).unwrap();
    let s = Streams::new(9);
    let cp = nu.compound_poisson().unwrap().sampler().unwrap();
    let pool = s.par_collect("t.a", 16 * N, 1 << 14, |rng, len| {
        (0..len).map(|_| rand::Rng::sample(rng, cp.summand())).collect()
    });
    let a_star = weighted_resample(&pool, N, &mut s.stream("t.a", u64::MAX)).unwrap();
    let y = nu.steutel_increment().unwrap().sample_par(&s, "t.y", N).unwrap();
    assert!(ks_two_sample(&a_star, &y).unwrap().pass);
}

#[test]
fn steutel_negative_binomial_and_mixed() {
    let nu = LevyMeasure::negative_binomial(2.5, 0.4, 80).unwrap();
    let r = verify_steutel(&nu, N, 0.0, &Streams::new(13)).unwrap();
    assert!(r.main.pass && r.one_more_term.unwrap().pass && r.increment.unwrap().pass);

    let dickman = LevyMeasure::uniform(1.0, 0.0, 1.0).unwrap();
    let r = verify_steutel(&dickman, N, 1e-6, &Streams::new(17)).unwrap();
    assert!(r.main.pass, "{}", r.main.statistic);
    assert!(r.truncation_bias <= 1e-6 + 1e-15);
}

#[test]
fn convolution_residual_examples() {
    let g = named("geometric", &[("q", 0.5)]);
    let y = g.clone().shifted(1.0).unwrap();
    assert!(density_convolution_residual(&g, &y).unwrap().max_residual < 1e-12);

    let e = named("exponential", &[("alpha", 1.0)]);
    let grid = sizebias::GridFunction::tabulate(0.0, 1e-3, 40_001, |x| (-x).exp()).unwrap();
    let x = Distribution::grid_normalized(grid).unwrap();
    assert!(density_convolution_residual(&x, &e).unwrap().max_residual < 5e-3);

    let b = named("binomial", &[("n", 4.0), ("p", 0.5)]);
    assert!(density_convolution_residual(&b, &y).unwrap().max_residual > 0.05);

    assert!(density_convolution_residual(&g, &e).is_err());
}

#[test]
fn measure_literal() {
    let nu = LevyMeasure::from_json(r#"{"c": 0.5, "atoms": [[1, 0.25], [2, 0.125]]}"#).unwrap();
    assert!((nu.total_mass() - 0.875).abs() < 1e-15);
    let back = LevyMeasure::from_json(&nu.to_json()).unwrap();
    assert_eq!(back, nu);
    let err = LevyMeasure::from_json(r#"{"c": -1}"#).unwrap_err();
    assert!(!err.to_string().is_empty());
}
