//! Verification harness: two-sample KS, the weighted-resampling oracle for
//! `X*`, moment-shift residuals and an indicator-grid independence statistic.

use rand::distr::Distribution as _;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use serde::Serialize;

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::streams::Streams;

/// Asymptotic two-sample KS critical value at level 0.01.
pub const KS_C_001: f64 = 1.628;

/// The weighted oracle resamples from a pool this many times larger than the
/// requested sample, so repeated picks of the same pool point stay rare.
pub const ORACLE_POOL_FACTOR: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KsReport {
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
    pub threshold: f64,
    pub pass: bool,
}

impl KsReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

pub fn ks_threshold(n1: usize, n2: usize) -> f64 {
    let (a, b) = (n1 as f64, n2 as f64);
    KS_C_001 * ((a + b) / (a * b)).sqrt()
}

/// Sup distance between the two empirical CDFs (ties handled exactly).
pub fn ks_statistic(s1: &[f64], s2: &[f64]) -> Result<f64> {
    if s1.is_empty() || s2.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut a = s1.to_vec();
    let mut b = s2.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n1 - j as f64 / n2).abs());
    }
    Ok(d)
}

pub fn ks_two_sample(s1: &[f64], s2: &[f64]) -> Result<KsReport> {
    let statistic = ks_statistic(s1, s2)?;
    let threshold = ks_threshold(s1.len(), s2.len());
    Ok(KsReport {
        statistic,
        n1: s1.len(),
        n2: s2.len(),
        threshold,
        pass: statistic < threshold,
    })
}

/// `sup_t |F_n(t) - F(t)|` against a known CDF.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let x = s[i];
        let lo = i as f64 / n;
        while i < s.len() && s[i] == x {
            i += 1;
        }
        let f = cdf(x);
        d = d.max((f - lo).abs()).max((i as f64 / n - f).abs());
    }
    Ok(d)
}

/// Multinomial resampling of `pool` with weights proportional to value.
pub fn weighted_resample<R: Rng + ?Sized>(pool: &[f64], n: usize, rng: &mut R) -> Result<Vec<f64>> {
    if pool.is_empty() {
        return Err(Error::EmptySample);
    }
    if pool.iter().all(|&x| x == 0.0) {
        return Err(Error::ZeroWeights("every draw is 0, the law has no size-biased version".into()));
    }
    let index = WeightedAliasIndex::new(pool.to_vec())
        .map_err(|e| Error::ZeroWeights(format!("resampling weights: {e}")))?;
    Ok((0..n).map(|_| pool[index.sample(rng)]).collect())
}

/// Draws `n` values of `X*` by weighting plain draws of `X` by their value.
/// Independent of every closed-form rule.
pub fn weighted_star_sample<R: Rng + ?Sized>(d: &Distribution, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    let pool = d.sample(rng, n * ORACLE_POOL_FACTOR)?;
    weighted_resample(&pool, n, rng)
}

/// Parallel variant: the pool is drawn across streams of `label`, the
/// resampling uses one further stream.
pub fn weighted_star_sample_par(d: &Distribution, n: usize, streams: &Streams, label: &str) -> Result<Vec<f64>> {
    let pool = d.sample_par(streams, label, n * ORACLE_POOL_FACTOR)?;
    let mut rng = streams.stream(label, u64::MAX);
    weighted_resample(&pool, n, &mut rng)
}

/// Rejection form of the oracle for laws supported on `[0, bound]`:
/// accept a draw `x` with probability `x / bound`.
pub fn rejection_star_sample<R: Rng + ?Sized>(
    d: &Distribution,
    n: usize,
    bound: f64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if !(bound.is_finite() && bound > 0.0) {
        return Err(Error::InvalidParameter {
            name: "bound",
            value: bound,
            reason: "support bound must be finite and > 0",
        });
    }
    d.require_biasable()?;
    let s = d.sampler()?;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let x = rng.sample(&s);
        if x > bound {
            return Err(Error::InvalidParameter {
                name: "bound",
                value: bound,
                reason: "a draw exceeded the declared support bound",
            });
        }
        if rng.random::<f64>() * bound < x {
            out.push(x);
        }
    }
    Ok(out)
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (m, (v / n).sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentShift {
    pub n: u32,
    /// `E (X*)^n`, exact or estimated.
    pub biased: f64,
    /// `E X^{n+1} / E X`.
    pub shifted: f64,
    pub residual: f64,
    /// Standard error of `biased` when it was estimated.
    pub se: Option<f64>,
    /// Set when a moment of this order diverges.
    pub error: Option<String>,
}

fn divergent(n: u32, e: Error) -> MomentShift {
    MomentShift {
        n,
        biased: f64::NAN,
        shifted: f64::NAN,
        residual: f64::NAN,
        se: None,
        error: Some(e.to_string()),
    }
}

/// `|E(X*)^n - E X^{n+1} / E X|` for `n = 1..=n_max` from closed forms.
pub fn moment_shift_check(d: &Distribution, n_max: u32) -> Result<Vec<MomentShift>> {
    let star = d.size_bias()?;
    Ok((1..=n_max)
        .map(|n| match (star.moment(n), d.moment(n + 1)) {
            (Ok(b), Ok(m)) => {
                let shifted = m / d.mean();
                MomentShift {
                    n,
                    biased: b,
                    shifted,
                    residual: (b - shifted).abs(),
                    se: None,
                    error: None,
                }
            }
            (Err(e), _) | (_, Err(e)) => divergent(n, e),
        })
        .collect())
}

/// As [`moment_shift_check`], with `E(X*)^n` estimated from `samples`
/// draws of the size-biased law.
pub fn moment_shift_check_mc<R: Rng + ?Sized>(
    d: &Distribution,
    n_max: u32,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<MomentShift>> {
    let xs = d.size_bias()?.sample(rng, samples)?;
    Ok((1..=n_max)
        .map(|n| match d.moment(n + 1) {
            Ok(m) => {
                let pows: Vec<f64> = xs.iter().map(|x| x.powi(n as i32)).collect();
                let (b, se) = mean_se(&pows);
                let shifted = m / d.mean();
                MomentShift {
                    n,
                    biased: b,
                    shifted,
                    residual: (b - shifted).abs(),
                    se: Some(se),
                    error: None,
                }
            }
            Err(e) => divergent(n, e),
        })
        .collect())
}

/// Largest `|corr(1{x > s}, 1{y > t})|` over all threshold pairs.
pub fn indicator_independence(xs: &[f64], ys: &[f64], sx: &[f64], sy: &[f64]) -> f64 {
    let n = xs.len().min(ys.len()) as f64;
    let mut worst: f64 = 0.0;
    for &s in sx {
        for &t in sy {
            let (mut a, mut b, mut ab) = (0.0, 0.0, 0.0);
            for (x, y) in xs.iter().zip(ys) {
                let (ix, iy) = ((*x > s) as u8 as f64, (*y > t) as u8 as f64);
                a += ix;
                b += iy;
                ab += ix * iy;
            }
            let (pa, pb) = (a / n, b / n);
            let cov = ab / n - pa * pb;
            let den = (pa * (1.0 - pa) * pb * (1.0 - pb)).sqrt();
            if den > 0.0 {
                worst = worst.max((cov / den).abs());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_samples_pass() {
        let s = [1.0, 2.0, 2.0, 5.0];
        let r = ks_two_sample(&s, &s).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn empty_sample_errors() {
        assert!(matches!(ks_two_sample(&[], &[1.0]), Err(Error::EmptySample)));
    }

    #[test]
    fn ties_are_grouped() {
        let r = ks_statistic(&[0.0, 0.0, 1.0, 1.0], &[0.0, 1.0, 1.0, 1.0]).unwrap();
        assert!((r - 0.25).abs() < 1e-15);
    }

    #[test]
    fn threshold_formula() {
        assert!((ks_threshold(100, 100) - 1.628 * 0.02f64.sqrt()).abs() < 1e-15);
        assert!((ks_threshold(50, 200) - 1.628 * (250.0f64 / 10_000.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn one_sample_uniform() {
        let s: Vec<f64> = (0..10).map(|k| (k as f64 + 0.5) / 10.0).collect();
        let d = ks_one_sample(&s, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.05).abs() < 1e-12);
    }

    #[test]
    fn oracle_on_table() {
        let d = Distribution::atoms(vec![(1.0, 0.4), (2.0, 0.3), (3.0, 0.2), (4.0, 0.1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = weighted_star_sample(&d, 100_000, &mut rng).unwrap();
        for (k, p) in [(1.0, 0.2), (2.0, 0.3), (3.0, 0.3), (4.0, 0.2)] {
            let f = s.iter().filter(|&&x| x == k).count() as f64 / s.len() as f64;
            assert!((f - p).abs() < 4.0 * (p * (1.0 - p) / 1e5f64).sqrt() * 1.1, "{k}: {f}");
        }
    }

    #[test]
    fn oracle_degenerate_and_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = Distribution::constant(2.0).unwrap();
        assert!(weighted_star_sample(&c, 10, &mut rng).unwrap().iter().all(|&x| x == 2.0));
        let z = Distribution::constant(0.0).unwrap();
        assert!(matches!(weighted_star_sample(&z, 10, &mut rng), Err(Error::ZeroWeights(_))));
    }

    #[test]
    fn rejection_oracle_on_bounded_law() {
        let d = Distribution::named("beta", &[("a", 1.0), ("b", 1.0)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let s = rejection_star_sample(&d, 20_000, 1.0, &mut rng).unwrap();
        let (m, se) = mean_se(&s);
        assert!((m - 2.0 / 3.0).abs() < 4.0 * se);
        assert!(rejection_star_sample(&d, 10, 0.5, &mut rng).is_err());
    }

    #[test]
    fn poisson_moment_shift() {
        let d = Distribution::named("poisson", &[("lambda", 1.0)]).unwrap();
        let r = moment_shift_check(&d, 3).unwrap();
        assert!((r[0].biased - 2.0).abs() < 1e-14);
        assert!(r.iter().all(|m| m.residual < 1e-9));
        let c = Distribution::constant(1.5).unwrap();
        assert!(moment_shift_check(&c, 3).unwrap().iter().all(|m| m.residual == 0.0));
    }

    #[test]
    fn independence_of_independent_uniforms_is_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let xs: Vec<f64> = (0..50_000).map(|_| rng.random()).collect();
        let ys: Vec<f64> = (0..50_000).map(|_| rng.random()).collect();
        let th = [0.2, 0.4, 0.6, 0.8];
        assert!(indicator_independence(&xs, &ys, &th, &th) < 0.02);
        assert!(indicator_independence(&xs, &xs, &th, &th) > 0.99);
    }
}
