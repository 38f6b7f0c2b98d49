use sizebias::levy::{build_infdiv, LevyMeasure};
use sizebias::specialfn::{
    buchstab_omega, buchstab_residual, dickman_conv_power, dickman_rho, prime_factor_empirics, rough_part_experiment,
    volterra_residual,
};
use sizebias::stats::ks_one_sample;
use sizebias::{GridFunction, Streams};

#[test]
fn residuals_below_five_h_squared() {
    for h in [1e-2, 2e-3, 1e-3] {
        let bound = 5.0 * h * h;
        let rho = dickman_rho(12.0, h).unwrap();
        let r = volterra_residual(&rho, 1.0, 1.0).unwrap();
        assert!(r < bound, "rho h={h}: {r:e}");
        for a in [1.0, 2.0, 3.5] {
            let g = dickman_conv_power(a, 12.0, h).unwrap().g;
            let r = volterra_residual(&g, a, 1.0).unwrap();
            assert!(r < bound, "g_{a} h={h}: {r:e}");
        }
        let w = buchstab_omega(8.0, h).unwrap();
        let r = buchstab_residual(&w).unwrap();
        assert!(r < bound, "omega h={h}: {r:e}");
    }
}

/// Changes under halving must shrink by about four.
fn second_order(values: [f64; 3], what: &str) {
    let d1 = (values[0] - values[1]).abs();
    let d2 = (values[1] - values[2]).abs();
    assert!(d2 < 4.0 * (d1 / 4.0), "{what}: {d1:e} then {d2:e}");
    let order = (d1 / d2).log2();
    assert!((1.5..2.5).contains(&order), "{what}: order {order}");
}

#[test]
fn grid_refinement_is_second_order() {
    let hs = [1e-2, 5e-3, 2.5e-3];
    let rho = hs.map(|h| dickman_rho(3.0, h).unwrap().eval(2.0));
    second_order(rho, "rho(2)");
    let omega = hs.map(|h| buchstab_omega(3.0, h).unwrap().eval(2.5));
    second_order(omega, "omega(2.5)");
    let g1 = hs.map(|h| dickman_conv_power(1.0, 15.0, h).unwrap().g.eval(2.0));
    second_order(g1, "g_1(2)");
}

#[test]
fn conv_power_normalized_with_unit_mean() {
    for a in [0.5, 1.0, 2.0] {
        let c = dickman_conv_power(a, 20.0, 1e-3).unwrap();
        let mass = c.g.trapezoid() + c.tail_mass;
        assert!((mass - 1.0).abs() < 1e-6, "a={a}: {mass}");
        assert!(c.tail_mass < 1e-9);
        if a >= 1.0 {
            let mean = c.g.map(|x, v| x * v).trapezoid();
            assert!((mean - a).abs() < 1e-3, "a={a}: mean {mean}");
        }
    }
}

#[test]
fn dickman_sampler_matches_g1() {
    let nu = LevyMeasure::uniform(1.0, 0.0, 1.0).unwrap();
    let x = build_infdiv(&nu, 1e-6).unwrap();
    let streams = Streams::new(2026);
    let xs = streams.par_collect("specialfn.dickman", 1_000_000, 1 << 14, |rng, len| x.sample(rng, len));
    let g = dickman_conv_power(1.0, 15.0, 1e-3).unwrap().g;
    let cdf = GridFunction::new(0.0, g.h, g.cumulative()).unwrap();
    let d = ks_one_sample(&xs, |t| if t >= cdf.x_max() { 1.0 } else { cdf.eval(t) }).unwrap();
    assert!(d < 0.01, "{d}");
}

#[test]
fn smooth_fraction_trivial_at_u_one() {
    let e = prime_factor_empirics(100_000, 1.0).unwrap();
    assert_eq!(e.smooth_fraction(), 1.0);
}

#[test]
fn sieve_summary_json() {
    let e = prime_factor_empirics(10_000, 2.0).unwrap();
    let v: serde_json::Value = serde_json::to_value(&e.smooth).unwrap();
    for key in ["n_max", "u", "threshold", "count", "fraction"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["threshold"], 100.0);
}

#[test]
fn rough_part_density_is_omega() {
    let r = rough_part_experiment(0.2, 8, 200_000, &Streams::new(2026)).unwrap();
    assert!((r.p_zero - 0.2).abs() < 4.0 * r.p_zero_se, "{}", r.p_zero);
    for b in &r.bins {
        assert!((b.empirical - b.predicted).abs() < 4.0 * b.se, "({}, {}): {} vs {}", b.a, b.b, b.empirical, b.predicted);
    }
}
