//! Levy representation of nonnegative infinitely divisible laws.
//!
//! A finite measure `nu` on `[0, inf)` determines `X` through
//! `log E e^{iuX} = int (e^{iuy} - 1) / y nu(dy)` (the integrand is `iu` at
//! `y = 0`). Its total mass is `a = E X`, and `nu / a` is the law of the
//! independent increment `Y` with `X* = X + Y`. On `(0, inf)` the jump
//! measure is `mu(dy) = nu(dy) / y`; when `lambda = mu((0, inf))` is finite,
//! `X` is a constant plus a compound Poisson sum.

mod check;
mod sampler;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use check::{
    charfn_sizebias_grid, deconvolution_check, deconvolution_check_on, density_convolution_residual,
    shifted_poisson_increment, verify_steutel, DeconvReport, ResidualReport, ShiftedPoissonReport,
    SteutelReport, Verdict, DECONV_THRESHOLD,
};
pub use sampler::{build_infdiv, CompoundPoissonSampler, CompoundPoissonSpec, InfDivSampler};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Absolutely continuous part of `nu` on `(0, inf)`.
#[derive(Clone, Debug, PartialEq)]
pub enum LevyDensity {
    /// Tabulated density, linear between nodes.
    Grid(GridFunction),
    /// `t e^{-alpha y} dy`; gives the Gamma law with rate `alpha`, shape `t`.
    Exponential { t: f64, alpha: f64 },
    /// `t dy` on `[lo, hi]`; with `lo = 0` this is the Dickman family.
    Uniform { t: f64, lo: f64, hi: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevyMeasure {
    c: f64,
    atoms: Vec<(f64, f64)>,
    density: Option<LevyDensity>,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::InvalidMeasure(msg.into())
}

impl LevyDensity {
    fn validate(&self) -> Result<()> {
        match self {
            LevyDensity::Grid(g) => {
                if !(g.x0 >= 0.0) {
                    return Err(bad(format!("density grid starts at {} < 0", g.x0)));
                }
                if g.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(bad("density values must be finite and >= 0"));
                }
                Ok(())
            }
            LevyDensity::Exponential { t, alpha } => {
                if !(t.is_finite() && *t > 0.0 && alpha.is_finite() && *alpha > 0.0) {
                    return Err(bad("exponential density needs t > 0 and alpha > 0"));
                }
                Ok(())
            }
            LevyDensity::Uniform { t, lo, hi } => {
                if !(t.is_finite() && *t > 0.0 && *lo >= 0.0 && hi > lo && hi.is_finite()) {
                    return Err(bad("uniform density needs t > 0 and 0 <= lo < hi < inf"));
                }
                Ok(())
            }
        }
    }

    /// `int density`.
    pub fn mass(&self) -> f64 {
        match self {
            LevyDensity::Grid(g) => g.trapezoid(),
            LevyDensity::Exponential { t, alpha } => t / alpha,
            LevyDensity::Uniform { t, lo, hi } => t * (hi - lo),
        }
    }

    /// `int_0^eps density`.
    pub fn mass_below(&self, eps: f64) -> f64 {
        match self {
            LevyDensity::Grid(g) => grid_integral_to(g, eps),
            LevyDensity::Exponential { t, alpha } => t / alpha * -(-alpha * eps).exp_m1(),
            LevyDensity::Uniform { t, lo, hi } => t * (eps.min(*hi) - lo).max(0.0),
        }
    }

    /// `int density(y) / y dy` over `(eps, inf)`.
    pub fn jump_rate_above(&self, eps: f64) -> f64 {
        match self {
            LevyDensity::Grid(g) => sampler::grid_panels(g, eps).iter().map(|p| p.mass).sum(),
            LevyDensity::Exponential { t, alpha } => {
                if eps <= 0.0 {
                    f64::INFINITY
                } else {
                    t * exp_integral_e1(alpha * eps)
                }
            }
            LevyDensity::Uniform { t, lo, hi } => {
                let l = lo.max(eps);
                if l >= *hi {
                    0.0
                } else if l <= 0.0 {
                    f64::INFINITY
                } else {
                    t * (hi / l).ln()
                }
            }
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        match self {
            LevyDensity::Grid(g) => g.eval(y),
            LevyDensity::Exponential { t, alpha } => {
                if y >= 0.0 {
                    t * (-alpha * y).exp()
                } else {
                    0.0
                }
            }
            LevyDensity::Uniform { t, lo, hi } => {
                if y >= *lo && y <= *hi {
                    *t
                } else {
                    0.0
                }
            }
        }
    }
}

/// Integral of the linear interpolant of `g` over `[x0, min(x, x_max)]`.
pub(crate) fn grid_integral_to(g: &GridFunction, x: f64) -> f64 {
    if x <= g.x0 {
        return 0.0;
    }
    let c = g.cumulative();
    if x >= g.x_max() {
        return *c.last().unwrap();
    }
    let s = (x - g.x0) / g.h;
    let k = (s.floor() as usize).min(g.len() - 2);
    let w = s - k as f64;
    let (f0, f1) = (g.values[k], g.values[k + 1]);
    c[k] + g.h * w * (f0 + 0.5 * w * (f1 - f0))
}

/// Exponential integral `E_1(x) = int_x^inf e^{-s}/s ds`, `x > 0`.
fn exp_integral_e1(x: f64) -> f64 {
    if x < 1.0 {
        // series: -gamma - ln x - sum (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..60 {
            term *= -x / k as f64;
            sum += term / k as f64;
        }
        -crate::specialfn::EULER_GAMMA - x.ln() - sum
    } else {
        // continued fraction (modified Lentz)
        let mut b = x + 1.0;
        let mut c = 1e300;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..200 {
            let an = -((i * i) as f64);
            b += 2.0;
            d = 1.0 / (an * d + b);
            c = b + an / c;
            let del = c * d;
            h *= del;
            if (del - 1.0).abs() < 1e-16 {
                break;
            }
        }
        h * (-x).exp()
    }
}

impl LevyMeasure {
    pub fn new(c: f64, atoms: Vec<(f64, f64)>, density: Option<LevyDensity>) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(bad(format!("atom at zero must be finite and >= 0, got {c}")));
        }
        for &(y, m) in &atoms {
            if !(y.is_finite() && y > 0.0) {
                return Err(bad(format!("atom location {y} must be finite and > 0")));
            }
            if !(m.is_finite() && m >= 0.0) {
                return Err(bad(format!("atom mass {m} must be finite and >= 0")));
            }
        }
        if let Some(d) = &density {
            d.validate()?;
        }
        let atoms: Vec<(f64, f64)> = atoms.into_iter().filter(|a| a.1 > 0.0).collect();
        let nu = Self { c, atoms, density };
        let a = nu.total_mass();
        if !(a.is_finite() && a > 0.0) {
            return Err(bad(format!("total mass must be finite and > 0, got {a}")));
        }
        Ok(nu)
    }

    /// `nu = mass * delta_{y0}`: `X = y0 Poisson(mass / y0)`.
    pub fn single_atom(y0: f64, mass: f64) -> Result<Self> {
        Self::new(0.0, vec![(y0, mass)], None)
    }

    /// Atoms `t q^j` at `j = 1..=j_max`: negative binomial `(t, q)`; `t = 1` is geometric.
    pub fn negative_binomial(t: f64, q: f64, j_max: u32) -> Result<Self> {
        Self::new(0.0, (1..=j_max).map(|j| (j as f64, t * q.powi(j as i32))).collect(), None)
    }

    pub fn geometric(q: f64, j_max: u32) -> Result<Self> {
        Self::negative_binomial(1.0, q, j_max)
    }

    /// `t e^{-alpha y} dy`: Gamma law with rate `alpha`, shape `t`.
    pub fn exponential(t: f64, alpha: f64) -> Result<Self> {
        Self::new(0.0, vec![], Some(LevyDensity::Exponential { t, alpha }))
    }

    /// `t dy` on `[lo, hi]`.
    pub fn uniform(t: f64, lo: f64, hi: f64) -> Result<Self> {
        Self::new(0.0, vec![], Some(LevyDensity::Uniform { t, lo, hi }))
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn density(&self) -> Option<&LevyDensity> {
        self.density.as_ref()
    }

    /// `a = nu([0, inf)) = E X`.
    pub fn total_mass(&self) -> f64 {
        self.c + self.atoms.iter().map(|a| a.1).sum::<f64>() + self.density.as_ref().map_or(0.0, |d| d.mass())
    }

    /// `int y mu(dy) = a - c`.
    pub fn mu_first_moment(&self) -> f64 {
        self.total_mass() - self.c
    }

    /// `lambda = mu((0, inf))`, possibly infinite.
    pub fn jump_rate(&self) -> f64 {
        self.jump_rate_above(0.0)
    }

    /// `mu((eps, inf))` (atoms are never truncated).
    pub fn jump_rate_above(&self, eps: f64) -> f64 {
        self.atoms.iter().map(|&(y, m)| m / y).sum::<f64>()
            + self.density.as_ref().map_or(0.0, |d| d.jump_rate_above(eps))
    }

    pub fn is_compound_poisson(&self) -> bool {
        self.c == 0.0 && self.jump_rate().is_finite()
    }

    /// The increment law `Y = nu / a` (an atom at 0 of mass `c / a` is allowed).
    pub fn steutel_increment(&self) -> Result<Distribution> {
        let a = self.total_mass();
        let mut parts = Vec::new();
        let discrete: f64 = self.c + self.atoms.iter().map(|x| x.1).sum::<f64>();
        if discrete > 0.0 {
            let mut pairs = Vec::with_capacity(self.atoms.len() + 1);
            if self.c > 0.0 {
                pairs.push((0.0, self.c / discrete));
            }
            pairs.extend(self.atoms.iter().map(|&(y, m)| (y, m / discrete)));
            parts.push((discrete / a, Distribution::from_table(crate::dist::AtomTable::from_pairs(pairs, 0.0))?));
        }
        if let Some(d) = &self.density {
            let law = match d {
                LevyDensity::Exponential { alpha, .. } => Distribution::named("exponential", &[("alpha", *alpha)])?,
                LevyDensity::Uniform { lo, hi, .. } => {
                    Distribution::named("uniform", &[("lo", *lo), ("hi", *hi)])?
                }
                LevyDensity::Grid(g) => Distribution::grid_normalized(g.clone())?,
            };
            parts.push((d.mass() / a, law));
        }
        Distribution::mixture(parts)
    }

    /// Compound Poisson form `S_N` (requires `c = 0` and finite jump rate).
    pub fn compound_poisson(&self) -> Result<CompoundPoissonSpec> {
        CompoundPoissonSpec::from_measure(self)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let lit: MeasureLiteral = serde_json::from_str(s)?;
        lit.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&MeasureLiteral::from(self)).expect("literal serialization cannot fail")
    }
}

impl fmt::Display for LevyMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        if self.c > 0.0 {
            parts.push(format!("{} delta_0", self.c));
        }
        if !self.atoms.is_empty() {
            parts.push(format!("{} atoms", self.atoms.len()));
        }
        match &self.density {
            Some(LevyDensity::Grid(g)) => parts.push(format!("grid density (h={}, n={})", g.h, g.len())),
            Some(LevyDensity::Exponential { t, alpha }) => parts.push(format!("{t} e^(-{alpha} y) dy")),
            Some(LevyDensity::Uniform { t, lo, hi }) => parts.push(format!("{t} dy on [{lo}, {hi}]")),
            None => {}
        }
        write!(f, "nu[{}; a={}]", parts.join(" + "), self.total_mass())
    }
}

/// JSON form: `{"c":0,"atoms":[[1,0.5]],"density":{"x0":0,"h":0.01,"f":[...]}}`;
/// the density may also be `{"family":"exponential","t":1,"alpha":1}` or
/// `{"family":"uniform","t":1,"lo":0,"hi":1}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureLiteral {
    #[serde(default)]
    pub c: f64,
    #[serde(default)]
    pub atoms: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityLiteral>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DensityLiteral {
    Named {
        family: String,
        #[serde(flatten)]
        params: BTreeMap<String, f64>,
    },
    Grid {
        x0: f64,
        h: f64,
        f: Vec<f64>,
    },
}

fn param(params: &BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    params
        .get(key)
        .copied()
        .or(default)
        .ok_or_else(|| bad(format!("density parameter `{key}` missing")))
}

impl TryFrom<MeasureLiteral> for LevyMeasure {
    type Error = Error;

    fn try_from(lit: MeasureLiteral) -> Result<Self> {
        let density = match lit.density {
            None => None,
            Some(DensityLiteral::Grid { x0, h, f }) => Some(LevyDensity::Grid(GridFunction::new(x0, h, f)?)),
            Some(DensityLiteral::Named { family, params }) => Some(match family.as_str() {
                "exponential" => LevyDensity::Exponential {
                    t: param(&params, "t", Some(1.0))?,
                    alpha: param(&params, "alpha", None)?,
                },
                "uniform" => LevyDensity::Uniform {
                    t: param(&params, "t", Some(1.0))?,
                    lo: param(&params, "lo", Some(0.0))?,
                    hi: param(&params, "hi", None)?,
                },
                other => return Err(bad(format!("unknown density family `{other}` (use exponential, uniform or a grid)"))),
            }),
        };
        LevyMeasure::new(lit.c, lit.atoms, density)
    }
}

impl From<&LevyMeasure> for MeasureLiteral {
    fn from(nu: &LevyMeasure) -> Self {
        let density = nu.density.as_ref().map(|d| match d {
            LevyDensity::Grid(g) => DensityLiteral::Grid {
                x0: g.x0,
                h: g.h,
                f: g.values.clone(),
            },
            LevyDensity::Exponential { t, alpha } => DensityLiteral::Named {
                family: "exponential".into(),
                params: [("t".to_string(), *t), ("alpha".to_string(), *alpha)].into(),
            },
            LevyDensity::Uniform { t, lo, hi } => DensityLiteral::Named {
                family: "uniform".into(),
                params: [("t".to_string(), *t), ("lo".to_string(), *lo), ("hi".to_string(), *hi)].into(),
            },
        });
        MeasureLiteral {
            c: nu.c,
            atoms: nu.atoms.clone(),
            density,
        }
    }
}
