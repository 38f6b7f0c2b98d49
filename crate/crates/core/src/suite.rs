//! The acceptance suite: one check per criterion, each against an oracle
//! that does not share code with the routine under test.

use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use crate::dist::Distribution;
use crate::error::Result;
use crate::estimate::{exact_expectation, Population, Scheme};
use crate::levy::{
    deconvolution_check, density_convolution_residual, shifted_poisson_increment, verify_steutel,
    LevyMeasure, ShiftedPoissonReport, Verdict,
};
use crate::renewal::{dart_intervals, exponential_split_test, simulate_waiting, StationaryRenewal};
use crate::specialfn::{buchstab_omega, dickman_conv_power, dickman_integral, dickman_rho, prime_factor_empirics, EULER_GAMMA};
use crate::stats::{ks_two_sample, mean_se, moment_shift_check, weighted_star_sample_par};
use crate::streams::Streams;

pub const PUBLISHED_SEED: u64 = 2026;

/// Draws per Monte Carlo sample.
pub const N: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Outcome {
    pub id: &'static str,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "{} {:<3} {:<34} {:>7.2}s  {}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

struct Check {
    pass: bool,
    detail: String,
}

impl Check {
    fn new(pass: bool, detail: String) -> Self {
        Check { pass, detail }
    }

    /// All parts must pass; details are joined.
    fn all(parts: Vec<Check>) -> Self {
        Check {
            pass: parts.iter().all(|c| c.pass),
            detail: parts.into_iter().map(|c| c.detail).collect::<Vec<_>>().join("; "),
        }
    }
}

fn mark(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "BAD"
    }
}

type CheckFn = fn(&Streams) -> Result<Check>;

const CRITERIA: &[(&str, &str, CheckFn)] = &[
    ("1", "atom table size bias", c1_table),
    ("2", "Dickman rho", c2_dickman),
    ("3", "Buchstab omega", c3_buchstab),
    ("4a", "sieve smooth fraction vs rho(2)", c4a_smooth),
    ("4b", "sieve rough count vs omega(2)", c4b_rough),
    ("5", "independent increments", c5_steutel),
    ("6", "non-divisibility certificates", c6_deconv),
    ("7", "catalogue identities", c7_catalogue),
    ("8", "renewal and waiting times", c8_renewal),
    ("9", "Midzuno unbiasedness", c9_midzuno),
    ("10", "property suite", c10_properties),
];

pub fn criterion_ids() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.0).collect()
}

fn evaluate(id: &'static str, name: &'static str, f: CheckFn, streams: &Streams) -> Outcome {
    let start = Instant::now();
    let check = f(streams).unwrap_or_else(|e| Check::new(false, format!("error: {e}")));
    Outcome {
        id,
        name,
        pass: check.pass,
        detail: check.detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs one criterion by id, or `None` for an unknown id.
pub fn run_one(id: &str, seed: u64) -> Option<Outcome> {
    let streams = Streams::new(seed);
    CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .map(|&(id, name, f)| evaluate(id, name, f, &streams))
}

pub fn run_all(seed: u64) -> Vec<Outcome> {
    let streams = Streams::new(seed);
    CRITERIA
        .iter()
        .map(|&(id, name, f)| evaluate(id, name, f, &streams))
        .collect()
}

/// `X = 1 + Poisson(lambda)` does have an independent increment; recorded
/// alongside the suite rather than checked as a criterion.
pub fn shifted_poisson_note(lambda: f64) -> Result<ShiftedPoissonReport> {
    shifted_poisson_increment(lambda)
}

fn c1_table(_: &Streams) -> Result<Check> {
    let d = Distribution::atoms(vec![(1.0, 0.4), (2.0, 0.3), (3.0, 0.2), (4.0, 0.1)])?;
    let got = d.size_bias()?.atom_table()?;
    let want = [(1.0, 0.2), (2.0, 0.3), (3.0, 0.3), (4.0, 0.2)];
    let err = want
        .iter()
        .map(|&(v, p)| (got.prob_at(v) - p).abs())
        .fold((got.mass() - 1.0).abs(), f64::max);
    Ok(Check::new(err <= 1e-12, format!("X* = {got}, max error {err:.1e}")))
}

fn c2_dickman(_: &Streams) -> Result<Check> {
    let h = 1e-3;
    let rho = dickman_rho(20.0, h)?;
    let r2 = rho.eval(2.0);
    let e2 = (r2 - (1.0 - 2f64.ln())).abs();
    let integral = dickman_integral(&rho)?;
    let ei = (integral - EULER_GAMMA.exp()).abs();
    let g1 = dickman_conv_power(1.0, 20.0, h)?;
    let target = (-EULER_GAMMA).exp();
    let er = (0..rho.len())
        .filter(|&k| rho.x(k) <= 10.0)
        .map(|k| (g1.g.values[k] / rho.values[k] - target).abs())
        .fold(0.0, f64::max);
    Ok(Check::all(vec![
        Check::new(e2 < 1e-5, format!("rho(2)={r2:.8} err {e2:.1e} {}", mark(e2 < 1e-5))),
        Check::new(ei < 1e-4, format!("int rho={integral:.8} err {ei:.1e} {}", mark(ei < 1e-4))),
        Check::new(er < 1e-4, format!("max|g1/rho - e^-gamma| {er:.1e} {}", mark(er < 1e-4))),
    ]))
}

fn c3_buchstab(_: &Streams) -> Result<Check> {
    let w = buchstab_omega(4.0, 1e-3)?;
    let exact = (0..w.len()).filter(|&k| w.x(k) <= 2.0).all(|k| w.values[k] == 1.0 / w.x(k));
    let v = w.eval(2.5);
    let e = (v - (1.0 + 1.5f64.ln()) / 2.5).abs();
    Ok(Check::all(vec![
        Check::new(exact, format!("omega=1/u on [1,2] {}", mark(exact))),
        Check::new(e < 1e-5, format!("omega(2.5)={v:.8} err {e:.1e} {}", mark(e < 1e-5))),
    ]))
}

fn c4a_smooth(_: &Streams) -> Result<Check> {
    let e = prime_factor_empirics(1_000_000, 2.0)?;
    let rho2 = 1.0 - 2f64.ln();
    let gap = (e.smooth_fraction() - rho2).abs();
    Ok(Check::new(
        gap < 0.01,
        format!(
            "fraction {:.6} vs rho(2) {rho2:.6}, gap {gap:.4} (tolerance 0.01)",
            e.smooth_fraction()
        ),
    ))
}

fn c4b_rough(_: &Streams) -> Result<Check> {
    let e = prime_factor_empirics(1_000_000, 2.0)?;
    let s = e.rough_scaled();
    let gap = (s - 0.5).abs();
    Ok(Check::new(
        gap < 0.05,
        format!("fraction*ln(n)/u {s:.4} vs omega(2) 0.5, gap {gap:.4} (tolerance 0.05)"),
    ))
}

fn c5_steutel(streams: &Streams) -> Result<Check> {
    let cases = [
        ("geometric(q=.5)", LevyMeasure::geometric(0.5, 60)?),
        ("Exp(1)", LevyMeasure::exponential(1.0, 1.0)?),
        ("atom 1", LevyMeasure::single_atom(1.0, 1.0)?),
    ];
    let mut parts = Vec::new();
    for (i, (name, nu)) in cases.iter().enumerate() {
        let sub = Streams::new(streams.seed().wrapping_add(i as u64));
        let r = verify_steutel(nu, N, 1e-6, &sub)?;
        let extra = r.one_more_term.map(|k| (k.pass, k.statistic));
        let ok = r.main.pass && extra.is_none_or(|e| e.0);
        let tail = extra.map_or(String::new(), |e| format!(", one more term D={:.4}", e.1));
        parts.push(Check::new(
            ok,
            format!("{name}: D={:.4}/{:.4}{tail} {}", r.main.statistic, r.main.threshold, mark(ok)),
        ));
    }
    Ok(Check::all(parts))
}

fn c6_deconv(_: &Streams) -> Result<Check> {
    let cases = [
        ("Binomial(4,.3)", Distribution::named("binomial", &[("n", 4.0), ("p", 0.3)])?, Verdict::Negative),
        ("Beta(2,2)", Distribution::named("beta", &[("a", 2.0), ("b", 2.0)])?, Verdict::Negative),
        ("Poisson(3)", Distribution::named("poisson", &[("lambda", 3.0)])?, Verdict::Inconclusive),
        ("Geometric(.5)", Distribution::named("geometric", &[("q", 0.5)])?, Verdict::Inconclusive),
        ("Gamma(1,2)", Distribution::named("gamma", &[("alpha", 1.0), ("t", 2.0)])?, Verdict::Inconclusive),
    ];
    let mut parts = Vec::new();
    for (name, d, want) in cases {
        let r = deconvolution_check(&d)?;
        let ok = r.verdict == want;
        parts.push(Check::new(ok, format!("{name}: {:?} max|eta|={:.4} {}", r.verdict, r.max_eta, mark(ok))));
    }
    Ok(Check::all(parts))
}

/// `max_k |k p_k / a - P(X* = k)|`, with `p_k` read from the family pmf.
fn pmf_identity(d: &Distribution, k_max: u64) -> Result<f64> {
    let f = d.as_family().expect("family");
    let star = d.size_bias()?.atom_table()?;
    let a = d.mean();
    Ok((0..=k_max)
        .map(|k| (k as f64 * f.pmf_index(k) / a - star.prob_at(k as f64)).abs())
        .fold(0.0, f64::max))
}

/// Relative error of the biased density against `x f(x) / a`, plus a KS
/// comparison of the closed form against the weighted oracle.
fn density_identity(d: &Distribution, streams: &Streams, label: &str) -> Result<(f64, bool, f64)> {
    let f = d.as_family().expect("family");
    let star = d.size_bias()?;
    let fs = star.as_family().expect("catalogue gives a family");
    let a = d.mean();
    let (lo, hi) = (star.quantile(1e-4)?, star.quantile(1.0 - 1e-4)?);
    let rel = (1..100)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / 100.0;
            let want = x * f.density(x) / a;
            (fs.density(x) - want).abs() / want
        })
        .fold(0.0, f64::max);
    let oracle = weighted_star_sample_par(d, N, streams, &format!("{label}.oracle"))?;
    let direct = star.sample_par(streams, &format!("{label}.direct"), N)?;
    let ks = ks_two_sample(&oracle, &direct)?;
    Ok((rel, ks.pass, ks.statistic))
}

fn c7_catalogue(streams: &Streams) -> Result<Check> {
    let mut parts = Vec::new();
    let po = Distribution::named("poisson", &[("lambda", 3.0)])?;
    let want = po.clone().shifted(1.0)?.atom_table()?;
    let e_po = pmf_identity(&po, 40)?.max(po.size_bias()?.atom_table()?.sup_distance(&want));
    parts.push(Check::new(e_po <= 1e-12, format!("Po(3)*=Po(3)+1 err {e_po:.1e} {}", mark(e_po <= 1e-12))));

    let bi = Distribution::named("binomial", &[("n", 6.0), ("p", 0.4)])?;
    let want = Distribution::named("binomial", &[("n", 5.0), ("p", 0.4)])?.shifted(1.0)?.atom_table()?;
    let e_bi = pmf_identity(&bi, 6)?.max(bi.size_bias()?.atom_table()?.sup_distance(&want));
    parts.push(Check::new(e_bi <= 1e-12, format!("Bin(6,.4)*=Bin(5,.4)+1 err {e_bi:.1e} {}", mark(e_bi <= 1e-12))));

    for (label, d, want) in [
        (
            "Beta(2,3)*=Beta(2,4)",
            Distribution::named("beta", &[("a", 2.0), ("b", 3.0)])?,
            Distribution::named("beta", &[("a", 2.0), ("b", 4.0)])?,
        ),
        (
            "Gamma(1.5,2.5)*=Gamma(1.5,3.5)",
            Distribution::named("gamma", &[("alpha", 1.5), ("t", 2.5)])?,
            Distribution::named("gamma", &[("alpha", 1.5), ("t", 3.5)])?,
        ),
    ] {
        let same = d.size_bias()?.as_family() == want.as_family();
        let (rel, ks_ok, stat) = density_identity(&d, streams, &format!("suite.c7.{label}"))?;
        let ok = same && rel < 1e-10 && ks_ok;
        parts.push(Check::new(ok, format!("{label} density rel err {rel:.1e}, KS D={stat:.4} {}", mark(ok))));
    }

    let ln = Distribution::named("lognormal", &[("mu", 0.0), ("sigma", 1.0)])?;
    let star = ln.size_bias()?;
    let mut worst: f64 = 0.0;
    for n in 1..=3 {
        let want = (n as f64).exp() * ln.moment(n)?;
        worst = worst.max((star.moment(n)? - want).abs() / want);
    }
    let shift = moment_shift_check(&ln, 3)?;
    let rs = shift.iter().map(|m| m.residual / m.shifted).fold(0.0, f64::max);
    let ok = worst < 1e-12 && rs < 1e-12;
    parts.push(Check::new(ok, format!("lognormal E(L*)^n=e^n E L^n rel err {:.1e} {}", worst.max(rs), mark(ok))));
    Ok(Check::all(parts))
}

fn c8_renewal(streams: &Streams) -> Result<Check> {
    let exp1 = Distribution::named("exponential", &[("alpha", 1.0)])?;
    let proc = StationaryRenewal::new(exp1.clone())?;
    let mut parts = Vec::new();
    for t in [0.0, 0.37, 3.1, 25.0] {
        let w = simulate_waiting(&proc, t, N, streams);
        let (m, se) = mean_se(&w);
        let ok = (m - 1.0).abs() < 4.0 * se;
        parts.push(Check::new(ok, format!("E W_{t}={m:.4}+-{se:.4} {}", mark(ok))));
    }
    let darts = dart_intervals(&exp1, 1e4, N, streams)?;
    let gamma = Distribution::named("gamma", &[("alpha", 1.0), ("t", 2.0)])?;
    let reference = gamma.sample_par(streams, "suite.c8.gamma", N)?;
    let ks = ks_two_sample(&darts.lengths, &reference)?;
    parts.push(Check::new(
        ks.pass,
        format!(
            "dart vs Gamma(1,2) D={:.4}/{:.4} (rejected {:.2e}) {}",
            ks.statistic,
            ks.threshold,
            darts.rejection_rate(),
            mark(ks.pass)
        ),
    ));
    let split = exponential_split_test(N, streams)?;
    parts.push(Check::new(
        split.pass(),
        format!(
            "split margins D={:.4},{:.4} independence {:.4} {}",
            split.forward.statistic,
            split.backward.statistic,
            split.independence,
            mark(split.pass())
        ),
    ));
    Ok(Check::all(parts))
}

/// Random small population: `x` uniform on (0, 10) with some zeros and
/// `y = x (2 + noise)`, so units with `x = 0` have `y = 0`.
pub fn random_population<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Population> {
    let mut recs: Vec<(f64, f64)> = (0..n)
        .map(|_| {
            let x = if rng.random::<f64>() < 0.15 { 0.0 } else { 10.0 * rng.random::<f64>() };
            (x, x * (2.0 + 3.0 * (rng.random::<f64>() - 0.5)))
        })
        .collect();
    if recs.iter().all(|r| r.0 == 0.0) {
        recs[0].0 = 1.0;
    }
    Population::new(recs)
}

fn c9_midzuno(streams: &Streams) -> Result<Check> {
    let mut rng = streams.stream("suite.midzuno", 0);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n = rng.random_range(1..=8);
        let m = rng.random_range(1..=n);
        let pop = random_population(&mut rng, n)?;
        worst = worst.max((exact_expectation(&pop, m, Scheme::Midzuno)? - pop.ratio()).abs());
    }
    let skewed = Population::new(vec![(1.0, 1.0), (2.0, 4.0), (5.0, 0.0), (10.0, 1.0)])?;
    let bias = exact_expectation(&skewed, 2, Scheme::Srs)? - skewed.ratio();
    let mid = exact_expectation(&skewed, 2, Scheme::Midzuno)? - skewed.ratio();
    Ok(Check::all(vec![
        Check::new(worst < 1e-12, format!("max |E - R| over 50 populations {worst:.1e} {}", mark(worst < 1e-12))),
        Check::new(
            bias.abs() > 1e-3,
            format!("SRS bias {bias:.4} (Midzuno {mid:.1e}) {}", mark(bias.abs() > 1e-3)),
        ),
    ]))
}

fn property_laws() -> Result<Vec<(&'static str, Distribution)>> {
    let tri = crate::grid::GridFunction::tabulate(0.0, 1e-3, 2001, |x| if x <= 1.0 { x } else { 2.0 - x })?;
    Ok(vec![
        ("atoms", Distribution::atoms(vec![(0.0, 0.1), (1.0, 0.3), (2.5, 0.4), (7.0, 0.2)])?),
        ("poisson", Distribution::named("poisson", &[("lambda", 3.0)])?),
        ("binomial", Distribution::named("binomial", &[("n", 6.0), ("p", 0.4)])?),
        ("geometric", Distribution::named("geometric", &[("q", 0.5)])?),
        ("negbin", Distribution::named("negative_binomial", &[("t", 2.5), ("q", 0.4)])?),
        ("beta", Distribution::named("beta", &[("a", 2.0), ("b", 3.0)])?),
        ("gamma", Distribution::named("gamma", &[("alpha", 1.5), ("t", 2.5)])?),
        ("lognormal", Distribution::named("lognormal", &[("mu", 0.0), ("sigma", 0.5)])?),
        ("grid", Distribution::grid(tri)?),
        ("empirical", Distribution::empirical((0..50).map(|k| (k % 7) as f64 * 0.5).collect())?),
    ])
}

fn c10_properties(_: &Streams) -> Result<Check> {
    let laws = property_laws()?;
    let mut zero_ok = true;
    let mut dom_worst: f64 = 0.0;
    let mut scale_worst: f64 = 0.0;
    let mut shift_worst: f64 = 0.0;
    for (_, d) in &laws {
        let star = d.size_bias()?;
        zero_ok &= star.cdf(0.0)? == 0.0;
        let ts: Vec<f64> = (1..40).map(|i| d.quantile(i as f64 / 40.0)).collect::<Result<_>>()?;
        let (f, fs) = (d.cdf_many(&ts)?, star.cdf_many(&ts)?);
        dom_worst = f.iter().zip(&fs).map(|(a, b)| b - a).fold(dom_worst, f64::max);
        let y = 2.5;
        let lhs = d.clone().scaled(y)?.size_bias()?;
        let rhs = star.clone().scaled(y)?;
        let ys: Vec<f64> = ts.iter().map(|t| t * y).collect();
        scale_worst = lhs
            .cdf_many(&ys)?
            .iter()
            .zip(rhs.cdf_many(&ys)?)
            .map(|(a, b)| (a - b).abs())
            .fold(scale_worst, f64::max);
        for m in moment_shift_check(d, 3)? {
            shift_worst = shift_worst.max(m.residual / m.shifted);
        }
    }
    let nb = Distribution::named("negative_binomial", &[("t", 2.5), ("q", 0.4)])?;
    let nb_y = LevyMeasure::negative_binomial(2.5, 0.4, 80)?.steutel_increment()?;
    let po = Distribution::named("poisson", &[("lambda", 3.0)])?;
    let po_y = LevyMeasure::single_atom(1.0, 3.0)?.steutel_increment()?;
    let disc = density_convolution_residual(&nb, &nb_y)?
        .max_residual
        .max(density_convolution_residual(&po, &po_y)?.max_residual);
    let gamma = Distribution::named("gamma", &[("alpha", 1.5), ("t", 2.5)])?.discretized(4097)?;
    let exp = Distribution::named("exponential", &[("alpha", 1.5)])?;
    let grid = density_convolution_residual(&gamma, &exp)?.max_residual;
    Ok(Check::all(vec![
        Check::new(zero_ok, format!("P(X*=0)=0 {}", mark(zero_ok))),
        Check::new(dom_worst <= 1e-9, format!("dominance slack {dom_worst:.1e} {}", mark(dom_worst <= 1e-9))),
        Check::new(scale_worst <= 1e-9, format!("scaling {scale_worst:.1e} {}", mark(scale_worst <= 1e-9))),
        Check::new(shift_worst <= 1e-9, format!("moment shift rel {shift_worst:.1e} {}", mark(shift_worst <= 1e-9))),
        Check::new(disc < 1e-12, format!("convolution residual discrete {disc:.1e} {}", mark(disc < 1e-12))),
        Check::new(grid < 5e-3, format!("grid {grid:.1e} {}", mark(grid < 5e-3))),
    ]))
}
