use serde::Serialize;

use crate::error::{Error, Result};

pub const SIEVE_MIN: u64 = 10_000;
pub const SIEVE_MAX: u64 = 100_000_000;

/// Smallest and largest prime factor of every integer up to `n_max`.
/// Entry 1 holds 1 in both tables; entry 0 is unused.
#[derive(Clone, Debug)]
pub struct SieveTable {
    n_max: u32,
    smallest: Vec<u32>,
    largest: Vec<u32>,
}

impl SieveTable {
    pub fn new(n_max: u64) -> Result<Self> {
        if n_max < 2 || n_max > SIEVE_MAX {
            return Err(Error::InvalidParameter {
                name: "n_max",
                value: n_max as f64,
                reason: "sieve size must lie in [2, 1e8]",
            });
        }
        let n = n_max as usize;
        let mut smallest = vec![0u32; n + 1];
        smallest[1] = 1;
        for p in 2..=n {
            if smallest[p] != 0 {
                continue;
            }
            smallest[p] = p as u32;
            if p * p > n {
                continue;
            }
            for k in (p * p..=n).step_by(p) {
                if smallest[k] == 0 {
                    smallest[k] = p as u32;
                }
            }
        }
        let mut largest = vec![0u32; n + 1];
        largest[1] = 1;
        for k in 2..=n {
            let p = smallest[k];
            largest[k] = p.max(largest[k / p as usize]);
        }
        Ok(SieveTable {
            n_max: n_max as u32,
            smallest,
            largest,
        })
    }

    pub fn n_max(&self) -> u64 {
        self.n_max as u64
    }

    pub fn smallest_pf(&self, k: u64) -> Option<u32> {
        (k >= 1 && k <= self.n_max as u64).then(|| self.smallest[k as usize])
    }

    pub fn largest_pf(&self, k: u64) -> Option<u32> {
        (k >= 1 && k <= self.n_max as u64).then(|| self.largest[k as usize])
    }

    /// Integers in `1..=n_max` with every prime factor `<= bound` (1 included).
    pub fn smooth_count(&self, bound: f64) -> u64 {
        self.largest[1..].iter().filter(|&&p| p as f64 <= bound).count() as u64
    }

    /// Integers in `2..=n_max` with every prime factor `>= bound`.
    pub fn rough_count(&self, bound: f64) -> u64 {
        self.smallest[2..].iter().filter(|&&p| p as f64 >= bound).count() as u64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SieveSummary {
    pub n_max: u64,
    pub u: f64,
    pub threshold: f64,
    pub count: u64,
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PrimeEmpirics {
    pub smooth: SieveSummary,
    pub rough: SieveSummary,
    /// `u < 1`: the threshold exceeds `n_max` and every integer is smooth.
    pub degenerate: bool,
}

impl PrimeEmpirics {
    pub fn smooth_fraction(&self) -> f64 {
        self.smooth.fraction
    }

    pub fn rough_fraction(&self) -> f64 {
        self.rough.fraction
    }

    /// `rough_fraction * ln(n_max) / u`, which tends to `omega(u)`.
    pub fn rough_scaled(&self) -> f64 {
        self.rough.fraction * (self.rough.n_max as f64).ln() / self.rough.u
    }
}

/// `n_max^{1/u}`, snapped to an integer when within rounding of one.
fn threshold(n_max: u64, u: f64) -> f64 {
    let t = (n_max as f64).powf(1.0 / u);
    let r = t.round();
    if (t - r).abs() <= 1e-9 * r.max(1.0) {
        r
    } else {
        t
    }
}

pub fn prime_factor_empirics(n_max: u64, u: f64) -> Result<PrimeEmpirics> {
    if !(SIEVE_MIN..=SIEVE_MAX).contains(&n_max) {
        return Err(Error::InvalidParameter {
            name: "n_max",
            value: n_max as f64,
            reason: "must lie in [1e4, 1e8]",
        });
    }
    if !(u.is_finite() && u > 0.0) {
        return Err(Error::InvalidParameter {
            name: "u",
            value: u,
            reason: "must be finite and > 0",
        });
    }
    let table = SieveTable::new(n_max)?;
    let t = threshold(n_max, u);
    let summary = |count: u64| SieveSummary {
        n_max,
        u,
        threshold: t,
        count,
        fraction: count as f64 / n_max as f64,
    };
    Ok(PrimeEmpirics {
        smooth: summary(table.smooth_count(t)),
        rough: summary(table.rough_count(t)),
        degenerate: u < 1.0,
    })
}
