//! Characteristic functions, deconvolution certificates and the
//! increment checks (`X* = X + Y`, density and pmf identities).

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{build_infdiv, LevyDensity, LevyMeasure};
use crate::dist::{Distribution, Kind};
use crate::error::{Error, Result};
use crate::grid::{ComplexGrid, GridFunction};
use crate::quad;
use crate::stats::{ks_two_sample, weighted_resample, KsReport, ORACLE_POOL_FACTOR};
use crate::streams::Streams;

/// `|eta| > 1 + DECONV_THRESHOLD` certifies that no independent increment exists.
pub const DECONV_THRESHOLD: f64 = 1e-9;
/// Points with `|phi|` at or below this are excluded from the certificate grid.
pub const PHI_FLOOR: f64 = 1e-9;

/// `(e^{iuy} - 1) / y` without cancellation; `iu` at `y = 0`.
fn levy_kernel(u: f64, y: f64) -> Complex64 {
    if y == 0.0 {
        return Complex64::new(0.0, u);
    }
    let s = (0.5 * u * y).sin();
    Complex64::new(-2.0 * s * s, (u * y).sin()) / y
}

impl LevyMeasure {
    /// `log phi(u) = int (e^{iuy} - 1)/y nu(dy)`.
    pub fn log_charfn(&self, u: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, u * self.c());
        for &(y, m) in self.atoms() {
            acc += m * levy_kernel(u, y);
        }
        match self.density() {
            None => {}
            Some(LevyDensity::Exponential { t, alpha }) => {
                acc += -t * (Complex64::new(1.0, -u / alpha)).ln();
            }
            Some(LevyDensity::Uniform { t, lo, hi }) => {
                let panels = 8 + (2.0 * u.abs() * (hi - lo)) as usize;
                acc += *t * quad::integrate(*lo, *hi, panels, |y| levy_kernel(u, y));
            }
            Some(LevyDensity::Grid(g)) => {
                acc += g.map(|y, f| f * levy_kernel(u, y)).trapezoid();
            }
        }
        acc
    }

    pub fn charfn(&self, u: f64) -> Complex64 {
        self.log_charfn(u).exp()
    }

    /// `phi` on the grid `u0 + k h`, `k < n`.
    pub fn charfn_grid(&self, u0: f64, h: f64, n: usize) -> Result<ComplexGrid> {
        ComplexGrid::tabulate(u0, h, n, |u| self.charfn(u))
    }
}

/// `phi*(u) = E[X e^{iuX}] / a` on the grid `u0 + k h`, `k < n`.
pub fn charfn_sizebias_grid(d: &Distribution, u0: f64, h: f64, n: usize) -> Result<ComplexGrid> {
    d.require_biasable()?;
    let values = (0..n).map(|k| d.charfn_sizebias(u0 + k as f64 * h)).collect::<Result<_>>()?;
    ComplexGrid::new(u0, h, values)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    /// `|eta| > 1` somewhere: `X` has no independent size-bias increment.
    Negative,
    /// `|eta| <= 1` on the grid; necessary for divisibility, not sufficient.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeconvReport {
    pub max_eta: f64,
    pub at_u: f64,
    pub verdict: Verdict,
    /// Range actually used after dropping points where `phi` vanishes.
    pub u_min: f64,
    pub u_max: f64,
    pub points: usize,
}

/// Certificate on the default grid: 2048 points on `[-20, 20]`.
pub fn deconvolution_check(d: &Distribution) -> Result<DeconvReport> {
    deconvolution_check_on(d, -20.0, 20.0, 2048)
}

/// `eta = phi* / phi` on `n` points spanning `[u_lo, u_hi]`. The grid is cut
/// to the run of points around `u = 0` on which `|phi| > 1e-9`.
pub fn deconvolution_check_on(d: &Distribution, u_lo: f64, u_hi: f64, n: usize) -> Result<DeconvReport> {
    d.require_biasable()?;
    if !(u_hi > u_lo) || n < 2 {
        return Err(Error::InvalidParameter {
            name: "u grid",
            value: n as f64,
            reason: "need u_lo < u_hi and at least 2 points",
        });
    }
    let h = (u_hi - u_lo) / (n - 1) as f64;
    let us: Vec<f64> = (0..n).map(|k| u_lo + k as f64 * h).collect();
    let phi: Vec<Complex64> = us.iter().map(|&u| d.charfn(u)).collect::<Result<_>>()?;
    let centre = us
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(k, _)| k)
        .unwrap();
    if phi[centre].norm() <= PHI_FLOOR {
        return Err(Error::VanishingCharFn);
    }
    let mut lo = centre;
    while lo > 0 && phi[lo - 1].norm() > PHI_FLOOR {
        lo -= 1;
    }
    let mut hi = centre;
    while hi + 1 < n && phi[hi + 1].norm() > PHI_FLOOR {
        hi += 1;
    }
    let mut max_eta: f64 = 0.0;
    let mut at_u = 0.0;
    for k in lo..=hi {
        let eta = (d.charfn_sizebias(us[k])? / phi[k]).norm();
        if eta > max_eta {
            max_eta = eta;
            at_u = us[k];
        }
    }
    let verdict = if max_eta > 1.0 + DECONV_THRESHOLD {
        Verdict::Negative
    } else {
        Verdict::Inconclusive
    };
    Ok(DeconvReport {
        max_eta,
        at_u,
        verdict,
        u_min: us[lo],
        u_max: us[hi],
        points: hi - lo + 1,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SteutelReport {
    /// `X + Y` (independent) against the weighted oracle for `X*`.
    pub main: KsReport,
    /// Compound Poisson only: `S_N + A*` against the same oracle.
    pub one_more_term: Option<KsReport>,
    /// Compound Poisson only: weighted resample of `A` against `Y`.
    pub increment: Option<KsReport>,
    pub truncation_bias: f64,
}

const CHUNK: usize = 1 << 13;

/// Checks `X* = X + Y` by two-sample KS at level 0.01 with `n` draws per sample.
pub fn verify_steutel(nu: &LevyMeasure, n: usize, trunc_eps: f64, streams: &Streams) -> Result<SteutelReport> {
    let x = build_infdiv(nu, trunc_eps)?;
    let y_law = nu.steutel_increment()?;
    let y = y_law.sampler()?;
    let draw_x = |label: &str, m: usize| {
        streams.par_collect(label, m, CHUNK, |rng, len| x.sample(rng, len))
    };
    let xs = draw_x("levy.x", n);
    let ys = streams.par_collect("levy.y", n, CHUNK, |rng, len| {
        (0..len).map(|_| rand::Rng::sample(rng, &y)).collect()
    });
    let sum: Vec<f64> = xs.iter().zip(&ys).map(|(a, b)| a + b).collect();
    let pool = draw_x("levy.oracle", n * ORACLE_POOL_FACTOR);
    let oracle = weighted_resample(&pool, n, &mut streams.stream("levy.oracle", u64::MAX))?;
    let main = ks_two_sample(&sum, &oracle)?;

    let (mut one_more_term, mut increment) = (None, None);
    if nu.is_compound_poisson() {
        let cp = nu.compound_poisson()?.sampler()?;
        let a_pool = streams.par_collect("levy.summand", n * ORACLE_POOL_FACTOR, CHUNK, |rng, len| {
            (0..len).map(|_| rand::Rng::sample(rng, cp.summand())).collect()
        });
        let a_star = weighted_resample(&a_pool, n, &mut streams.stream("levy.summand", u64::MAX))?;
        let s_n = streams.par_collect("levy.cp", n, CHUNK, |rng, len| {
            (0..len).map(|_| rand::Rng::sample(rng, &cp)).collect()
        });
        let c: Vec<f64> = s_n.iter().zip(&a_star).map(|(s, a)| s + a).collect();
        one_more_term = Some(ks_two_sample(&c, &oracle)?);
        increment = Some(ks_two_sample(&a_star, &ys)?);
    }
    Ok(SteutelReport {
        main,
        one_more_term,
        increment,
        truncation_bias: x.truncation_bias(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResidualReport {
    pub max_residual: f64,
    /// Point of the largest residual.
    pub at: f64,
    pub points: usize,
}

/// Sup over `x > 0` of `|f_X(x) - (a/x) (f_X * f_Y)(x)|`, for pmfs or densities.
///
/// Discrete laws are compared on every support point where both truncated
/// tables are complete. Densities use the grid of `d`; `y_law` may be a grid
/// or a continuous family, tabulated on the same nodes.
pub fn density_convolution_residual(d: &Distribution, y_law: &Distribution) -> Result<ResidualReport> {
    d.require_biasable()?;
    match (d.is_discrete(), y_law.is_discrete()) {
        (true, true) => discrete_residual(d, y_law),
        (false, false) => grid_residual(d, y_law),
        _ => Err(Error::MixedKinds(format!(
            "{d} and {y_law}: pass two discrete laws or two densities"
        ))),
    }
}

fn discrete_residual(d: &Distribution, y_law: &Distribution) -> Result<ResidualReport> {
    let (tx, ty) = (d.atom_table()?, y_law.atom_table()?);
    let limit = |t: &crate::dist::AtomTable| if t.tail_mass > 0.0 { t.max_value() } else { f64::INFINITY };
    let x_lim = limit(&tx).min(limit(&ty));
    let conv = tx.convolve(&ty);
    let a = d.mean();
    let mut report = ResidualReport {
        max_residual: 0.0,
        at: 0.0,
        points: 0,
    };
    let points = tx.atoms.iter().chain(&conv.atoms).map(|p| p.0).filter(|&v| v > 0.0 && v <= x_lim);
    for v in points {
        let r = (tx.prob_at(v) - a / v * conv.prob_at(v)).abs();
        report.points += 1;
        if r > report.max_residual {
            report.max_residual = r;
            report.at = v;
        }
    }
    Ok(report)
}

fn tabulate_density(law: &Distribution, h: f64, n: usize) -> Result<Vec<f64>> {
    let vals: Vec<f64> = match law.kind() {
        Kind::Grid(g) => (0..n).map(|k| g.eval(k as f64 * h)).collect(),
        Kind::Family(f) if !f.is_discrete() => (0..n).map(|k| f.density(k as f64 * h)).collect(),
        _ => {
            return Err(Error::Unsupported(format!(
                "density residual for {law}: needs a grid or a continuous family"
            )))
        }
    };
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::Unsupported(format!("density of {law} is unbounded on the grid")));
    }
    Ok(vals)
}

fn grid_residual(d: &Distribution, y_law: &Distribution) -> Result<ResidualReport> {
    let g: &GridFunction = d
        .as_grid()
        .ok_or_else(|| Error::Unsupported(format!("density residual needs a grid for X, got {d}")))?;
    let h = g.h;
    let n = (g.x_max() / h).round() as usize + 1;
    let fx = tabulate_density(d, h, n)?;
    let fy = tabulate_density(y_law, h, n)?;
    let conv = fft_convolve(&fx, &fy);
    let a = d.mean();
    let mut report = ResidualReport {
        max_residual: 0.0,
        at: 0.0,
        points: 0,
    };
    for k in 1..n {
        // trapezoid rule on [0, x_k]
        let c = h * (conv[k] - 0.5 * (fx[k] * fy[0] + fx[0] * fy[k]));
        let x = k as f64 * h;
        let r = (fx[k] - a / x * c).abs();
        report.points += 1;
        if r > report.max_residual {
            report.max_residual = r;
            report.at = x;
        }
    }
    Ok(report)
}

/// Linear convolution `sum_j a[k-j] b[j]` for `k < a.len()`.
fn fft_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let m = (a.len() + b.len()).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(m);
    let inv = planner.plan_fft_inverse(m);
    let pad = |v: &[f64]| {
        let mut out: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        out.resize(m, Complex64::new(0.0, 0.0));
        out
    };
    let (mut fa, mut fb) = (pad(a), pad(b));
    fwd.process(&mut fa);
    fwd.process(&mut fb);
    let mut prod: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y).collect();
    inv.process(&mut prod);
    prod.iter().take(a.len()).map(|z| z.re / m as f64).collect()
}

/// Brute-force pmf comparison for `X = 1 + Poisson(lambda)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ShiftedPoissonReport {
    pub lambda: f64,
    /// `sup_k |P(X* = k) - P(X + B = k)|` with `B ~ Bernoulli(lambda/(1+lambda))` independent.
    pub pmf_residual: f64,
    /// Same comparison against the increment read off the Levy measure
    /// `nu = delta_0 + lambda delta_1`.
    pub measure_residual: f64,
    pub bernoulli_p: f64,
    pub deconvolution: DeconvReport,
}

pub fn shifted_poisson_increment(lambda: f64) -> Result<ShiftedPoissonReport> {
    let x = Distribution::named("poisson", &[("lambda", lambda)])?.shifted(1.0)?;
    let star = x.size_bias()?.atom_table()?;
    let p = lambda / (1.0 + lambda);
    let b = Distribution::named("bernoulli", &[("p", p)])?;
    let with_b = Distribution::sum(vec![x.clone(), b])?.atom_table()?;
    let nu = LevyMeasure::new(1.0, vec![(1.0, lambda)], None)?;
    let with_y = Distribution::sum(vec![x.clone(), nu.steutel_increment()?])?.atom_table()?;
    Ok(ShiftedPoissonReport {
        lambda,
        pmf_residual: star.sup_distance(&with_b),
        measure_residual: star.sup_distance(&with_y),
        bernoulli_p: p,
        deconvolution: deconvolution_check(&x)?,
    })
}
