//! Dickman and Buchstab functions and prime-factor statistics.
//!
//! The delay equations are solved in integrated form with the trapezoid rule:
//!
//! - Dickman: `x rho(x) = int_{x-1}^x rho` with `rho = 1` on `[0, 1]`;
//! - convolution powers: `x g(x) = a int_{x-1}^x g` with `g = x^{a-1}` on `(0, 1]`;
//! - Buchstab: `u omega(u) = 1 + int_1^{u-1} omega` with `omega = 1/u` on `[1, 2]`.
//!
//! The step `h` must divide 1 so that the delay lands on a grid node.

mod sieve;

use serde::Serialize;

pub use sieve::{prime_factor_empirics, PrimeEmpirics, SieveSummary, SieveTable};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::levy::{build_infdiv, LevyMeasure};
use crate::streams::Streams;

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Largest accepted step.
pub const MAX_STEP: f64 = 1e-2;

/// Number of grid steps per unit delay, checking that `h` divides 1.
fn steps_per_unit(h: f64) -> Result<usize> {
    if !(h > 0.0 && h <= MAX_STEP) {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "step must lie in (0, 1e-2]",
        });
    }
    let m = (1.0 / h).round();
    if ((m * h) - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter {
            name: "h",
            value: h,
            reason: "1/h must be an integer so the unit delay falls on a node",
        });
    }
    Ok(m as usize)
}

fn node_count(span: f64, h: f64) -> usize {
    (span / h + 1e-9).floor() as usize + 1
}

/// `rho` on `[0, u_max]`.
pub fn dickman_rho(u_max: f64, h: f64) -> Result<GridFunction> {
    let m = steps_per_unit(h)?;
    if !(u_max >= 1.0 && u_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "u_max",
            value: u_max,
            reason: "must be >= 1",
        });
    }
    let n = node_count(u_max, h);
    let mut rho = vec![1.0; n];
    // prefix[k] = rho_0 + ... + rho_{k-1}
    let mut prefix = vec![0.0; n + 1];
    for k in 0..n {
        if k > m {
            let inner = prefix[k] - prefix[k - m + 1];
            rho[k] = h * (0.5 * rho[k - m] + inner) / (k as f64 * h - 0.5 * h);
        }
        prefix[k + 1] = prefix[k] + rho[k];
    }
    GridFunction::new(0.0, h, rho)
}

/// `int_0^inf rho` by the trapezoid rule; needs `rho` tabulated to at least 10.
pub fn dickman_integral(rho: &GridFunction) -> Result<f64> {
    if rho.x_max() < 10.0 - 1e-9 {
        return Err(Error::InvalidParameter {
            name: "u_max",
            value: rho.x_max(),
            reason: "tabulate rho to at least 10 before integrating",
        });
    }
    Ok(rho.trapezoid())
}

/// Normalized density `g_a` and the bookkeeping of its normalization.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvPower {
    pub a: f64,
    pub g: GridFunction,
    /// Integral of the unnormalized solution (grid part plus tail estimate).
    pub normalizer: f64,
    /// Estimated mass of the normalized density beyond `u_max`.
    pub tail_mass: f64,
}

/// Density with Levy measure `a` times uniform on `(0, 1)`; `g_1 = e^{-gamma} rho`.
pub fn dickman_conv_power(a: f64, u_max: f64, h: f64) -> Result<ConvPower> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::InvalidParameter {
            name: "a",
            value: a,
            reason: "must be finite and > 0",
        });
    }
    let m = steps_per_unit(h)?;
    if !(u_max >= 2.0 && u_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "u_max",
            value: u_max,
            reason: "must be >= 2",
        });
    }
    let n = node_count(u_max, h);
    let mut g = vec![0.0; n];
    let mut cum = vec![0.0; n];
    for k in 1..=m.min(n - 1) {
        let x = k as f64 * h;
        g[k] = x.powf(a - 1.0);
        cum[k] = x.powf(a) / a;
    }
    // node 0 chosen so the first trapezoid panel integrates exactly
    g[0] = if a <= 2.0 { h.powf(a - 1.0) * (2.0 / a - 1.0) } else { 0.0 };
    for k in m + 1..n {
        let x = k as f64 * h;
        g[k] = a * (cum[k - 1] + 0.5 * h * g[k - 1] - cum[k - m]) / (x - 0.5 * a * h);
        cum[k] = cum[k - 1] + 0.5 * h * (g[k - 1] + g[k]);
    }
    let grid = GridFunction::new(0.0, h, g)?;
    let body = grid.trapezoid();
    let (last, prev) = (grid.values[n - 1], grid.values[n - 2]);
    let tail = if last > 0.0 && prev > last {
        last / ((prev / last).ln() / h)
    } else {
        0.0
    };
    let normalizer = body + tail;
    Ok(ConvPower {
        a,
        g: grid.map(|_, v| v / normalizer),
        normalizer,
        tail_mass: tail / normalizer,
    })
}

/// `omega` on `[1, u_max]`.
pub fn buchstab_omega(u_max: f64, h: f64) -> Result<GridFunction> {
    let m = steps_per_unit(h)?;
    if !(u_max >= 2.0 && u_max.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "u_max",
            value: u_max,
            reason: "must be >= 2",
        });
    }
    let n = node_count(u_max - 1.0, h);
    let mut w = vec![0.0; n];
    // cum[k] = trapezoid integral of omega over [1, 1 + k h]
    let mut cum = vec![0.0; n];
    for k in 0..n {
        let u = 1.0 + k as f64 * h;
        w[k] = if k <= m { 1.0 / u } else { (1.0 + cum[k - m]) / u };
        if k > 0 {
            cum[k] = cum[k - 1] + 0.5 * h * (w[k - 1] + w[k]);
        }
    }
    GridFunction::new(1.0, h, w)
}

/// One bin of the rough-part experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoughBin {
    pub a: f64,
    pub b: f64,
    pub empirical: f64,
    /// `int_a^b omega(x / beta) dx`.
    pub predicted: f64,
    pub se: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoughPartReport {
    pub beta: f64,
    pub n: usize,
    /// Empirical `P(X = 0)`; the compound Poisson form gives `beta`.
    pub p_zero: f64,
    pub p_zero_se: f64,
    pub bins: Vec<RoughBin>,
}

/// Samples `X` with Levy measure uniform on `(beta, 1)` (jumps `>= beta` of the
/// Dickman law) and compares `P(a < X < b)` on `bins` equal bins of `(beta, 1)`
/// with `int_a^b omega(x / beta) dx`.
pub fn rough_part_experiment(beta: f64, bins: usize, n: usize, streams: &Streams) -> Result<RoughPartReport> {
    if !(beta > 0.0 && beta < 0.5) {
        return Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
            reason: "must lie in (0, 1/2)",
        });
    }
    if bins == 0 || n == 0 {
        return Err(Error::EmptySample);
    }
    let x = build_infdiv(&LevyMeasure::uniform(1.0, beta, 1.0)?, 0.0)?;
    let xs = streams.par_collect("specialfn.rough", n, 1 << 13, |rng, len| x.sample(rng, len));
    let h = 1e-3;
    // omega(x / beta) tabulated on x, out to 1
    let u_max = ((1.0 / beta) / h).ceil() * h + h;
    let omega = buchstab_omega(u_max.max(2.0), h)?;
    let w = (1.0 - beta) / bins as f64;
    let frac = |p: f64| (p, (p * (1.0 - p) / n as f64).sqrt());
    let mut out = Vec::with_capacity(bins);
    for i in 0..bins {
        let (a, b) = (beta + i as f64 * w, beta + (i + 1) as f64 * w);
        let k = 400;
        let g = GridFunction::tabulate(a, (b - a) / k as f64, k + 1, |x| omega.eval(x / beta))?;
        let hits = xs.iter().filter(|&&v| v > a && v < b).count();
        let (empirical, se) = frac(hits as f64 / n as f64);
        out.push(RoughBin {
            a,
            b,
            empirical,
            predicted: g.trapezoid(),
            se,
        });
    }
    let (p_zero, p_zero_se) = frac(xs.iter().filter(|&&v| v == 0.0).count() as f64 / n as f64);
    Ok(RoughPartReport {
        beta,
        n,
        p_zero,
        p_zero_se,
        bins: out,
    })
}

/// Composite Simpson over nodes `lo..=hi` (3/8 rule on the last three
/// panels when the count is odd).
fn simpson(v: &[f64], h: f64, lo: usize, hi: usize) -> f64 {
    let panels = hi - lo;
    if panels == 0 {
        return 0.0;
    }
    if panels == 1 {
        return 0.5 * h * (v[lo] + v[hi]);
    }
    let (even_end, tail) = if panels % 2 == 0 { (hi, 0.0) } else {
        let s = hi - 3;
        (s, 3.0 * h / 8.0 * (v[s] + 3.0 * v[s + 1] + 3.0 * v[s + 2] + v[hi]))
    };
    if even_end == lo {
        return tail;
    }
    let mut acc = v[lo] + v[even_end];
    for k in lo + 1..even_end {
        acc += if (k - lo) % 2 == 1 { 4.0 * v[k] } else { 2.0 * v[k] };
    }
    acc * h / 3.0 + tail
}

/// `max_k |x_k f_k - coef int_{x_k - 1}^{x_k} f|` over nodes with `x_k >= from`,
/// the integral taken by Simpson's rule rather than the marching rule.
/// Assumes the grid starts at 0.
pub fn volterra_residual(f: &GridFunction, coef: f64, from: f64) -> Result<f64> {
    let m = steps_per_unit(f.h)?;
    let mut worst: f64 = 0.0;
    for k in m..f.len() {
        let x = f.x(k);
        if x < from - 1e-12 {
            continue;
        }
        let r = (x * f.values[k] - coef * simpson(&f.values, f.h, k - m, k)).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// `max |u omega(u) - 1 - int_1^{u-1} omega|` over nodes with `u > 2`.
pub fn buchstab_residual(omega: &GridFunction) -> Result<f64> {
    let m = steps_per_unit(omega.h)?;
    let mut worst: f64 = 0.0;
    for k in m + 1..omega.len() {
        let u = omega.x(k);
        let r = (u * omega.values[k] - 1.0 - simpson(&omega.values, omega.h, 0, k - m)).abs();
        worst = worst.max(r);
    }
    Ok(worst)
}
