//! Stationary renewal processes and the waiting-time paradox.
//!
//! The stationary process puts the origin inside an interval of length
//! `X0*` drawn from the size-biased interarrival law, at relative position
//! `U`: forward arrivals at `U X0*, U X0* + X1, ...`, backward arrivals at
//! `-(1-U) X0*, -(1-U) X0* - X_{-1}, ...`.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::dist::{Distribution, Sampler};
use crate::error::{Error, Result};
use crate::stats::{indicator_independence, ks_statistic, ks_two_sample, mean_se, KsReport};
use crate::streams::Streams;

const CHUNK: usize = 1 << 12;

/// Horizon must be at least this many mean interarrivals.
pub const DART_HORIZON_FACTOR: f64 = 100.0;

/// Threshold for the split independence statistic.
pub const INDEPENDENCE_LIMIT: f64 = 0.01;

fn check_interarrival(d: &Distribution) -> Result<()> {
    d.require_biasable()?;
    if d.cdf(0.0)? > 0.0 {
        return Err(Error::InvalidDistribution(format!(
            "interarrival {d} puts mass at 0"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct StationaryRenewal {
    interarrival: Distribution,
    star: Distribution,
    draw: Sampler,
    draw_star: Sampler,
}

/// One realization of the stationary path near the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PathStart {
    pub x0_star: f64,
    pub u: f64,
}

impl PathStart {
    pub fn first_forward(&self) -> f64 {
        self.u * self.x0_star
    }

    pub fn first_backward(&self) -> f64 {
        -(1.0 - self.u) * self.x0_star
    }
}

impl StationaryRenewal {
    pub fn new(interarrival: Distribution) -> Result<Self> {
        check_interarrival(&interarrival)?;
        let star = interarrival.size_bias()?;
        Ok(StationaryRenewal {
            draw: interarrival.sampler()?,
            draw_star: star.sampler()?,
            interarrival,
            star,
        })
    }

    pub fn interarrival(&self) -> &Distribution {
        &self.interarrival
    }

    pub fn covering_law(&self) -> &Distribution {
        &self.star
    }

    /// `E W = E X^2 / (2 E X)`.
    pub fn mean_wait(&self) -> Result<f64> {
        Ok(self.interarrival.moment(2)? / (2.0 * self.interarrival.mean()))
    }

    pub fn start<R: Rng + ?Sized>(&self, rng: &mut R) -> PathStart {
        PathStart {
            x0_star: rng.sample(&self.draw_star),
            u: rng.random(),
        }
    }

    /// Time from `t` to the first arrival after `t` on a fresh path.
    pub fn waiting<R: Rng + ?Sized>(&self, t: f64, rng: &mut R) -> f64 {
        let p = self.start(rng);
        let fwd = p.first_forward();
        if t >= fwd {
            let mut s = fwd;
            while s <= t {
                s += rng.sample(&self.draw);
            }
            s - t
        } else if t >= p.first_backward() {
            fwd - t
        } else {
            let mut later = p.first_backward();
            loop {
                let earlier = later - rng.sample(&self.draw);
                if earlier <= t {
                    return later - t;
                }
                later = earlier;
            }
        }
    }
}

/// `n_reps` independent forward waiting times from clock time `t`.
pub fn simulate_waiting(proc: &StationaryRenewal, t: f64, n_reps: usize, streams: &Streams) -> Vec<f64> {
    let label = format!("renewal.wait.{t}");
    streams.par_collect(&label, n_reps, CHUNK, |rng, len| {
        (0..len).map(|_| proc.waiting(t, rng)).collect()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WaitingRow {
    pub t: f64,
    pub mean_w: f64,
    pub se: f64,
    /// KS distance to an independent sample of `W_0`.
    pub ks_stat: f64,
}

pub fn waiting_table(proc: &StationaryRenewal, ts: &[f64], n_reps: usize, streams: &Streams) -> Result<Vec<WaitingRow>> {
    let reference = streams.par_collect("renewal.wait.reference", n_reps, CHUNK, |rng, len| {
        (0..len).map(|_| proc.waiting(0.0, rng)).collect()
    });
    ts.iter()
        .map(|&t| {
            let w = simulate_waiting(proc, t, n_reps, streams);
            let (mean_w, se) = mean_se(&w);
            Ok(WaitingRow {
                t,
                mean_w,
                se,
                ks_stat: ks_statistic(&w, &reference)?,
            })
        })
        .collect()
}

pub fn write_waiting_csv<W: Write>(rows: &[WaitingRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DartReport {
    pub lengths: Vec<f64>,
    pub rejected: u64,
}

impl DartReport {
    pub fn rejection_rate(&self) -> f64 {
        let total = self.lengths.len() as f64 + self.rejected as f64;
        if total == 0.0 {
            0.0
        } else {
            self.rejected as f64 / total
        }
    }
}

fn check_horizon(d: &Distribution, horizon: f64) -> Result<()> {
    check_interarrival(d)?;
    if !(horizon.is_finite() && horizon >= DART_HORIZON_FACTOR * d.mean()) {
        return Err(Error::InvalidParameter {
            name: "horizon_l",
            value: horizon,
            reason: "must be at least 100 mean interarrivals",
        });
    }
    Ok(())
}

/// Throws one dart uniformly on `(0, l)` at a renewal process started at 0
/// and returns the length of the interval that covers it, plus the number of
/// darts rejected because they fell in the interval straddling `l`.
///
/// Each attempt generates a fresh path only as far as the dart.
pub fn dart_interval<R: Rng + ?Sized>(draw: &Sampler, horizon: f64, rng: &mut R) -> (f64, u64) {
    let mut rejected = 0;
    loop {
        let dart = horizon * rng.random::<f64>();
        let mut left = 0.0;
        let mut right = rng.sample(draw);
        while right <= dart {
            left = right;
            right += rng.sample(draw);
        }
        if right <= horizon {
            return (right - left, rejected);
        }
        rejected += 1;
    }
}

pub fn dart_intervals(d: &Distribution, horizon: f64, n: usize, streams: &Streams) -> Result<DartReport> {
    check_horizon(d, horizon)?;
    let draw = d.sampler()?;
    let pairs = streams.par_collect("renewal.dart", n, CHUNK / 4, |rng, len| {
        (0..len).map(|_| dart_interval(&draw, horizon, rng)).collect()
    });
    Ok(DartReport {
        rejected: pairs.iter().map(|p| p.1).sum(),
        lengths: pairs.into_iter().map(|p| p.0).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitReport {
    pub n: usize,
    /// `U X0*` against Exp(1).
    pub forward: KsReport,
    /// `(1-U) X0*` against Exp(1).
    pub backward: KsReport,
    pub independence: f64,
    pub independent: bool,
}

impl SplitReport {
    pub fn pass(&self) -> bool {
        self.forward.pass && self.backward.pass && self.independent
    }
}

/// Splits `X0*` ~ Gamma(1, 2) at a uniform point; both pieces should be
/// independent Exp(1).
pub fn exponential_split_test(n: usize, streams: &Streams) -> Result<SplitReport> {
    split_test(&Distribution::named("gamma", &[("alpha", 1.0), ("t", 2.0)])?, n, streams)
}

/// The same split with an arbitrary law for the covering interval; with
/// Exp(1) in place of Gamma(1, 2) the margins are no longer exponential.
pub fn split_test(x0_law: &Distribution, n: usize, streams: &Streams) -> Result<SplitReport> {
    let draw = x0_law.sampler()?;
    let pairs: Vec<(f64, f64)> = streams.par_collect("renewal.split", n, CHUNK, |rng, len| {
        (0..len)
            .map(|_| {
                let x: f64 = rng.sample(&draw);
                let u: f64 = rng.random();
                (u * x, (1.0 - u) * x)
            })
            .collect()
    });
    let (fwd, bwd): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    let exp1 = Distribution::named("exponential", &[("alpha", 1.0)])?;
    let ref_f = exp1.sample_par(streams, "renewal.split.ref_forward", n)?;
    let ref_b = exp1.sample_par(streams, "renewal.split.ref_backward", n)?;
    // Exp(1) deciles 0.1, 0.3, 0.5, 0.7, 0.9
    let grid: Vec<f64> = [0.1, 0.3, 0.5, 0.7, 0.9].iter().map(|p: &f64| -(1.0 - p).ln()).collect();
    let independence = indicator_independence(&fwd, &bwd, &grid, &grid);
    Ok(SplitReport {
        n,
        forward: ks_two_sample(&fwd, &ref_f)?,
        backward: ks_two_sample(&bwd, &ref_b)?,
        independence,
        independent: independence < INDEPENDENCE_LIMIT,
    })
}
