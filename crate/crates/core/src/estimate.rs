//! Midzuno's unbiased ratio estimation.
//!
//! The first unit is drawn with probability proportional to `x`, the other
//! `m - 1` uniformly without replacement from the rest. A set `r` then has
//! probability `sum_{j in r} x_j / (X * C(n-1, m-1))`, which makes
//! `sum y / sum x` over the sample unbiased for the population ratio.
//!
//! Units with `x = 0` enter only through the uniform phase, so an `m`-set made
//! entirely of them is never drawn. The estimator stays unbiased only when
//! every such set has zero `y`-sum.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use itertools::Itertools;
use rand::seq::index;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::stats::mean_se;
use crate::streams::Streams;

/// Largest number of subsets `exact_expectation` will enumerate.
pub const ENUMERATION_BUDGET: f64 = 1e6;

#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    records: Vec<(f64, f64)>,
    x_total: f64,
    y_total: f64,
}

impl Population {
    pub fn new(records: Vec<(f64, f64)>) -> Result<Self> {
        if records.is_empty() {
            return Err(Error::EmptySample);
        }
        for (i, &(x, y)) in records.iter().enumerate() {
            if !(x.is_finite() && x >= 0.0 && y.is_finite()) {
                return Err(Error::InvalidDistribution(format!(
                    "record {}: need finite x >= 0 and finite y, got ({x}, {y})",
                    i + 1
                )));
            }
        }
        let x_total = neumaier(records.iter().map(|r| r.0));
        let y_total = neumaier(records.iter().map(|r| r.1));
        if x_total <= 0.0 {
            return Err(Error::ZeroWeights("population x values".into()));
        }
        Ok(Population { records, x_total, y_total })
    }

    /// Two numeric columns `x,y`; a non-numeric first row is taken as a header.
    pub fn from_csv<R: Read>(input: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            if row.len() != 2 {
                return Err(Error::InvalidDistribution(format!(
                    "line {}: expected 2 columns, found {}",
                    i + 1,
                    row.len()
                )));
            }
            let parsed = (row[0].parse::<f64>(), row[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(y)) => records.push((x, y)),
                _ if i == 0 => continue,
                _ => {
                    return Err(Error::InvalidDistribution(format!(
                        "line {}: cannot parse '{}', '{}' as numbers",
                        i + 1,
                        &row[0],
                        &row[1]
                    )))
                }
            }
        }
        Self::new(records)
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[(f64, f64)] {
        &self.records
    }

    /// `sum y / sum x`.
    pub fn ratio(&self) -> f64 {
        self.y_total / self.x_total
    }

    fn check_m(&self, m: usize) -> Result<()> {
        if m == 0 || m > self.len() {
            return Err(Error::InvalidParameter {
                name: "m",
                value: m as f64,
                reason: "sample size must lie in 1..=n",
            });
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Midzuno,
    Srs,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Midzuno => "midzuno",
            Scheme::Srs => "srs",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "midzuno" => Ok(Scheme::Midzuno),
            "srs" => Ok(Scheme::Srs),
            other => Err(Error::Unsupported(format!("sampling scheme '{other}'"))),
        }
    }
}

/// Compensated summation.
fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        comp += if f64::abs(sum) >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Sorted index set of size `m` drawn by Midzuno's procedure.
pub fn midzuno_sample<R: Rng + ?Sized>(pop: &Population, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    pop.check_m(m)?;
    let n = pop.len();
    let target = rng.random::<f64>() * pop.x_total;
    let mut acc = 0.0;
    let mut first = None;
    for (i, &(x, _)) in pop.records.iter().enumerate() {
        acc += x;
        if x > 0.0 && target < acc {
            first = Some(i);
            break;
        }
    }
    // rounding can leave target just above the running sum
    let first = first.unwrap_or_else(|| pop.records.iter().rposition(|r| r.0 > 0.0).expect("positive total"));
    let mut set: Vec<usize> = index::sample(rng, n - 1, m - 1)
        .into_iter()
        .map(|j| if j >= first { j + 1 } else { j })
        .collect();
    set.push(first);
    set.sort_unstable();
    Ok(set)
}

/// Sorted simple random sample of size `m`.
pub fn srs_sample<R: Rng + ?Sized>(pop: &Population, m: usize, rng: &mut R) -> Result<Vec<usize>> {
    pop.check_m(m)?;
    let mut set = index::sample(rng, pop.len(), m).into_vec();
    set.sort_unstable();
    Ok(set)
}

pub fn draw<R: Rng + ?Sized>(pop: &Population, m: usize, scheme: Scheme, rng: &mut R) -> Result<Vec<usize>> {
    match scheme {
        Scheme::Midzuno => midzuno_sample(pop, m, rng),
        Scheme::Srs => srs_sample(pop, m, rng),
    }
}

/// `sum_{j in set} y_j / sum_{j in set} x_j`.
pub fn ratio_estimate(pop: &Population, set: &[usize]) -> Result<f64> {
    let mut sx = Vec::with_capacity(set.len());
    let mut sy = Vec::with_capacity(set.len());
    for &j in set {
        let &(x, y) = pop.records.get(j).ok_or(Error::InvalidParameter {
            name: "index",
            value: j as f64,
            reason: "outside the population",
        })?;
        sx.push(x);
        sy.push(y);
    }
    let sx = neumaier(sx);
    if sx <= 0.0 {
        return Err(Error::ZeroWeights("x values of the sampled set".into()));
    }
    Ok(neumaier(sy) / sx)
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Probability of the set `r` under the scheme's set law.
pub fn set_probability(pop: &Population, set: &[usize], scheme: Scheme) -> f64 {
    let (n, m) = (pop.len(), set.len());
    match scheme {
        Scheme::Srs => 1.0 / binomial(n, m),
        Scheme::Midzuno => {
            let sx = neumaier(set.iter().map(|&j| pop.records[j].0));
            sx / (pop.x_total * binomial(n - 1, m - 1))
        }
    }
}

/// `E[ratio_estimate]` by enumerating all `C(n, m)` subsets.
pub fn exact_expectation(pop: &Population, m: usize, scheme: Scheme) -> Result<f64> {
    pop.check_m(m)?;
    let count = binomial(pop.len(), m);
    if count > ENUMERATION_BUDGET {
        return Err(Error::BudgetExceeded { count, budget: ENUMERATION_BUDGET });
    }
    let mut terms = Vec::with_capacity(count as usize);
    for set in (0..pop.len()).combinations(m) {
        let p = set_probability(pop, &set, scheme);
        if p == 0.0 {
            continue;
        }
        terms.push(ratio_estimate(pop, &set)? * p);
    }
    Ok(neumaier(terms))
}

/// Mean and standard error of the estimate over `reps` draws.
pub fn monte_carlo_expectation(
    pop: &Population,
    m: usize,
    scheme: Scheme,
    reps: usize,
    streams: &Streams,
) -> Result<(f64, f64)> {
    pop.check_m(m)?;
    let label = format!("estimate.{scheme}");
    let est: Vec<Result<f64>> = streams.par_collect(&label, reps, 1 << 12, |rng, len| {
        (0..len)
            .map(|_| draw(pop, m, scheme, rng).and_then(|s| ratio_estimate(pop, &s)))
            .collect()
    });
    let est = est.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(mean_se(&est))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub scheme: Scheme,
    pub m: usize,
    pub estimate_mean: f64,
    pub true_ratio: f64,
    pub bias: f64,
    /// `exact` or `monte_carlo`.
    pub method: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub se: Option<f64>,
}

impl EstimateReport {
    pub fn exact(pop: &Population, m: usize, scheme: Scheme) -> Result<Self> {
        let e = exact_expectation(pop, m, scheme)?;
        Ok(Self::build(pop, m, scheme, e, "exact", None))
    }

    pub fn monte_carlo(pop: &Population, m: usize, scheme: Scheme, reps: usize, streams: &Streams) -> Result<Self> {
        let (e, se) = monte_carlo_expectation(pop, m, scheme, reps, streams)?;
        Ok(Self::build(pop, m, scheme, e, "monte_carlo", Some(se)))
    }

    fn build(pop: &Population, m: usize, scheme: Scheme, e: f64, method: &'static str, se: Option<f64>) -> Self {
        EstimateReport {
            scheme,
            m,
            estimate_mean: e,
            true_ratio: pop.ratio(),
            bias: e - pop.ratio(),
            method,
            se,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct")
    }
}
