//! Samplers for infinitely divisible laws given by a Levy measure.

use rand::distr::Distribution as RandDistribution;
use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::{Gamma, Poisson};

use super::{grid_integral_to, LevyDensity, LevyMeasure};
use crate::dist::{AtomTable, Distribution, Sampler};
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// One grid panel of the jump measure `mu(dy) = f(y)/y dy` with `f = A + B y` on `[l, r]`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Panel {
    l: f64,
    r: f64,
    a: f64,
    b: f64,
    fmax: f64,
    pub(crate) mass: f64,
}

impl Panel {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.l == 0.0 {
            // A = 0 here, so the jump density is the constant B
            return self.r * rng.random::<f64>();
        }
        let (ll, lr) = (self.l.ln(), self.r.ln());
        loop {
            let y = (ll + (lr - ll) * rng.random::<f64>()).exp();
            if rng.random::<f64>() * self.fmax <= self.a + self.b * y {
                return y;
            }
        }
    }
}

/// Panels of the linear interpolant of `g` restricted to `(eps, x_max]`.
pub(crate) fn grid_panels(g: &GridFunction, eps: f64) -> Vec<Panel> {
    let mut out = Vec::new();
    for k in 0..g.len() - 1 {
        let (y0, y1) = (g.x(k), g.x(k + 1));
        if y1 <= eps {
            continue;
        }
        let (f0, f1) = (g.values[k], g.values[k + 1]);
        let b = (f1 - f0) / g.h;
        let a = f0 - b * y0;
        let l = y0.max(eps);
        let fl = a + b * l;
        let fmax = fl.max(f1);
        if fmax <= 0.0 {
            continue;
        }
        let mass = if l == 0.0 {
            if f0 > 0.0 {
                f64::INFINITY
            } else {
                b * y1
            }
        } else {
            a * (y1 / l).ln() + b * (y1 - l)
        };
        out.push(Panel {
            l,
            r: y1,
            a,
            b,
            fmax,
            mass,
        });
    }
    out
}

#[derive(Clone, Debug)]
enum JumpLaw {
    LogUniform(f64, f64),
    Panels { index: WeightedAliasIndex<f64>, panels: Vec<Panel> },
}

impl JumpLaw {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            JumpLaw::LogUniform(lo, hi) => (lo.ln() + (hi / lo).ln() * rng.random::<f64>()).exp(),
            JumpLaw::Panels { index, panels } => panels[index.sample(rng)].draw(rng),
        }
    }
}

/// Sampler for `X = c + sum_j y_j Po(nu_j / y_j) + (density part)`.
#[derive(Clone, Debug)]
pub struct InfDivSampler {
    c: f64,
    atoms: Vec<(f64, Poisson<f64>)>,
    gamma: Option<Gamma<f64>>,
    jumps: Option<(Poisson<f64>, JumpLaw)>,
    jump_rate: f64,
    truncation_bias: f64,
    mean: f64,
}

impl InfDivSampler {
    /// Upper bound on `E X - E X_sampled`: `nu((0, eps])` of the density part.
    pub fn truncation_bias(&self) -> f64 {
        self.truncation_bias
    }

    /// Rate of the compound Poisson part after truncation.
    pub fn jump_rate(&self) -> f64 {
        self.jump_rate
    }

    /// `a` of the untruncated measure.
    pub fn target_mean(&self) -> f64 {
        self.mean
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| RandDistribution::sample(self, rng)).collect()
    }
}

fn poisson(rate: f64) -> Result<Poisson<f64>> {
    Poisson::new(rate).map_err(|e| Error::InvalidMeasure(format!("Poisson rate {rate}: {e}")))
}

/// Builds a sampler for the law with Levy measure `nu`. Jumps of the density
/// part below `trunc_eps` are discarded; the exponential density uses its
/// native Gamma sampler and is never truncated.
pub fn build_infdiv(nu: &LevyMeasure, trunc_eps: f64) -> Result<InfDivSampler> {
    if !(trunc_eps.is_finite() && trunc_eps >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "trunc_eps",
            value: trunc_eps,
            reason: "must be finite and >= 0",
        });
    }
    let atoms = nu
        .atoms()
        .iter()
        .map(|&(y, m)| Ok((y, poisson(m / y)?)))
        .collect::<Result<Vec<_>>>()?;
    let mut gamma = None;
    let mut jumps = None;
    let mut jump_rate = 0.0;
    let mut truncation_bias = 0.0;
    match nu.density() {
        None => {}
        Some(LevyDensity::Exponential { t, alpha }) => {
            gamma = Some(
                Gamma::new(*t, 1.0 / alpha).map_err(|e| Error::InvalidMeasure(format!("gamma sampler: {e}")))?,
            );
        }
        Some(LevyDensity::Uniform { t, lo, hi }) => {
            let l = lo.max(trunc_eps);
            if l == 0.0 {
                return Err(Error::InfiniteActivity);
            }
            truncation_bias = t * (l.min(*hi) - lo);
            if l < *hi {
                jump_rate = t * (hi / l).ln();
                jumps = Some((poisson(jump_rate)?, JumpLaw::LogUniform(l, *hi)));
            }
        }
        Some(LevyDensity::Grid(g)) => {
            let panels = grid_panels(g, trunc_eps);
            let rate: f64 = panels.iter().map(|p| p.mass).sum();
            if rate.is_infinite() {
                return Err(Error::InfiniteActivity);
            }
            truncation_bias = grid_integral_to(g, trunc_eps);
            if rate > 0.0 {
                let index = WeightedAliasIndex::new(panels.iter().map(|p| p.mass.max(0.0)).collect())
                    .map_err(|e| Error::InvalidMeasure(format!("jump table: {e}")))?;
                jump_rate = rate;
                jumps = Some((poisson(rate)?, JumpLaw::Panels { index, panels }));
            }
        }
    }
    Ok(InfDivSampler {
        c: nu.c(),
        atoms,
        gamma,
        jumps,
        jump_rate,
        truncation_bias,
        mean: nu.total_mass(),
    })
}

impl RandDistribution<f64> for InfDivSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let mut x = self.c;
        for (y, p) in &self.atoms {
            x += y * p.sample(rng);
        }
        if let Some(g) = &self.gamma {
            x += g.sample(rng);
        }
        if let Some((p, law)) = &self.jumps {
            let n = p.sample(rng) as u64;
            for _ in 0..n {
                x += law.draw(rng);
            }
        }
        x
    }
}

/// `S_N = A_1 + ... + A_N` with `N ~ Poisson(lambda)` and i.i.d. `A_i > 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompoundPoissonSpec {
    pub lambda: f64,
    pub summand_law: Distribution,
}

impl CompoundPoissonSpec {
    pub fn new(lambda: f64, summand_law: Distribution) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter {
                name: "lambda",
                value: lambda,
                reason: "must be finite and > 0",
            });
        }
        if summand_law.cdf(0.0)? > 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "compound Poisson summand {summand_law} has mass at 0"
            )));
        }
        summand_law.require_biasable()?;
        Ok(Self { lambda, summand_law })
    }

    /// `A ~ mu / lambda`. Needs no atom at zero and finite jump rate.
    pub fn from_measure(nu: &LevyMeasure) -> Result<Self> {
        if nu.c() > 0.0 {
            return Err(Error::InvalidMeasure(format!(
                "atom {} at zero: the law is shifted, not compound Poisson",
                nu.c()
            )));
        }
        let lambda = nu.jump_rate();
        if !lambda.is_finite() {
            return Err(Error::InfiniteActivity);
        }
        let mut parts = Vec::new();
        let atom_rate: f64 = nu.atoms().iter().map(|&(y, m)| m / y).sum();
        if atom_rate > 0.0 {
            let table = AtomTable::from_pairs(nu.atoms().iter().map(|&(y, m)| (y, m / y / atom_rate)), 0.0);
            parts.push((atom_rate, Distribution::from_table(table)?));
        }
        match nu.density() {
            None => {}
            Some(LevyDensity::Exponential { .. }) => return Err(Error::InfiniteActivity),
            Some(LevyDensity::Uniform { t, lo, hi }) => {
                let n = 4097;
                let h = (hi - lo) / (n - 1) as f64;
                let g = GridFunction::tabulate(*lo, h, n, |y| 1.0 / y)?;
                parts.push((t * (hi / lo).ln(), Distribution::grid_normalized(g)?));
            }
            Some(LevyDensity::Grid(g)) => {
                let rate: f64 = grid_panels(g, 0.0).iter().map(|p| p.mass).sum();
                let slope0 = g.values[1] / g.h;
                let jump = g.map(|y, f| if y > 0.0 { f / y } else { slope0 });
                parts.push((rate, Distribution::grid_normalized(jump)?));
            }
        }
        Self::new(lambda, Distribution::mixture(parts)?)
    }

    /// The Levy measure `nu(dy) = lambda y P(A in dy)` for atomic summands.
    pub fn measure(&self) -> Result<LevyMeasure> {
        let t = self.summand_law.atom_table()?;
        LevyMeasure::new(0.0, t.atoms.iter().map(|&(y, p)| (y, self.lambda * y * p)).collect(), None)
    }

    pub fn sampler(&self) -> Result<CompoundPoissonSampler> {
        Ok(CompoundPoissonSampler {
            count: poisson(self.lambda)?,
            summand: self.summand_law.sampler()?,
        })
    }
}

#[derive(Clone, Debug)]
pub struct CompoundPoissonSampler {
    count: Poisson<f64>,
    summand: Sampler,
}

impl CompoundPoissonSampler {
    /// Draws `N` and then `A_1, ..., A_N`; returns the summands.
    pub fn draw_terms<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let n = self.count.sample(rng) as u64;
        (0..n).map(|_| self.summand.sample(rng)).collect()
    }

    pub fn summand(&self) -> &Sampler {
        &self.summand
    }
}

impl RandDistribution<f64> for CompoundPoissonSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let n = self.count.sample(rng) as u64;
        (0..n).map(|_| self.summand.sample(rng)).sum()
    }
}
