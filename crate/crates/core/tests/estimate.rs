use std::collections::HashMap;

use sizebias::estimate::{
    exact_expectation, midzuno_sample, set_probability, EstimateReport, Population, Scheme,
};
use sizebias::Streams;

fn frequencies(pop: &Population, m: usize, draws: usize, seed: u64) -> HashMap<Vec<usize>, usize> {
    let mut rng = Streams::new(seed).stream("t.midzuno", 0);
    let mut counts = HashMap::new();
    for _ in 0..draws {
        *counts.entry(midzuno_sample(pop, m, &mut rng).unwrap()).or_insert(0) += 1;
    }
    counts
}

#[test]
fn set_law_is_proportional_to_x_sum() {
    let pop = Population::new(vec![(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (0.0, 0.0), (5.0, 0.0), (2.5, 0.0)]).unwrap();
    let draws = 1_000_000;
    let counts = frequencies(&pop, 3, draws, 2026);
    let total: f64 = 13.5;
    for (set, c) in &counts {
        let sx: f64 = set.iter().map(|&j| pop.records()[j].0).sum();
        // C(5, 2) = 10 sets contain any given first unit
        let p = sx / (total * 10.0);
        assert!((set_probability(&pop, set, Scheme::Midzuno) - p).abs() < 1e-15);
        let f = *c as f64 / draws as f64;
        let se = (p * (1.0 - p) / draws as f64).sqrt();
        assert!((f - p).abs() < 4.0 * se, "{set:?}: {f} vs {p}");
    }
    // every 3-set has a positive x-sum, so all C(6, 3) sets appear
    assert_eq!(counts.len(), 20);
}

#[test]
fn single_draw_is_pps() {
    let pop = Population::new(vec![(1.0, 0.0), (2.0, 0.0), (3.0, 0.0)]).unwrap();
    let draws = 600_000;
    let counts = frequencies(&pop, 1, draws, 7);
    for (i, p) in [(0usize, 1.0 / 6.0), (1, 2.0 / 6.0), (2, 3.0 / 6.0)] {
        let f = counts[&vec![i]] as f64 / draws as f64;
        assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / draws as f64).sqrt());
    }
}

#[test]
fn exact_unbiasedness_for_six_three() {
    let pop = Population::new(vec![(1.0, 3.0), (4.0, -1.0), (2.5, 7.0), (0.5, 0.2), (9.0, 4.0), (3.0, 3.0)]).unwrap();
    let e = exact_expectation(&pop, 3, Scheme::Midzuno).unwrap();
    assert!((e - pop.ratio()).abs() < 1e-12);
    let srs = exact_expectation(&pop, 3, Scheme::Srs).unwrap();
    assert!((srs - pop.ratio()).abs() > 1e-3);
}

#[test]
fn monte_carlo_agrees_with_enumeration() {
    let pop = Population::new(vec![(1.0, 1.0), (2.0, 4.0), (5.0, 0.0), (10.0, 1.0)]).unwrap();
    let s = Streams::new(2026);
    for scheme in [Scheme::Midzuno, Scheme::Srs] {
        let exact = EstimateReport::exact(&pop, 2, scheme).unwrap();
        let mc = EstimateReport::monte_carlo(&pop, 2, scheme, 200_000, &s).unwrap();
        let se = mc.se.unwrap();
        assert!((mc.estimate_mean - exact.estimate_mean).abs() < 4.0 * se, "{scheme}");
    }
}

#[test]
fn both_schemes_exact_at_full_sample() {
    let pop = Population::new(vec![(1.0, 1.0), (2.0, 4.0), (5.0, 0.0)]).unwrap();
    for s in [Scheme::Midzuno, Scheme::Srs] {
        assert!((exact_expectation(&pop, 3, s).unwrap() - pop.ratio()).abs() < 1e-15);
    }
}
