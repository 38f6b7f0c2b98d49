//! Structural size-bias rules and the closed-form catalogue.
//!
//! - sum: with probability `a_i / a` replace summand `i` by `X_i*`, others unchanged;
//! - i.i.d. sum: bias the first summand only;
//! - product: bias every factor;
//! - scaling: `(yX)* = y X*`.

use std::collections::BTreeMap;

use crate::dist::{Distribution, Family, Sampler};
use crate::error::{Error, Result};

/// One branch of the sum rule: with probability `weight`, summand `index` is biased.
#[derive(Clone, Debug, PartialEq)]
pub struct MixtureComponent {
    pub weight: f64,
    pub index: usize,
    /// Law of `S_i + X_i*`, the sum with only summand `index` biased.
    pub biased: Distribution,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureRep {
    pub components: Vec<MixtureComponent>,
}

impl MixtureRep {
    pub fn weights(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.weight).collect()
    }

    pub fn to_distribution(&self) -> Distribution {
        self.clone().into_distribution()
    }

    pub fn into_distribution(self) -> Distribution {
        Distribution::mixture(self.components.into_iter().map(|c| (c.weight, c.biased)).collect())
            .expect("sum-rule weights are positive and finite")
    }

    /// Draws `I`, then all summands with summand `I` biased.
    pub fn sampler(&self) -> Result<Sampler> {
        self.to_distribution().sampler()
    }
}

/// Size bias of a sum of independent summands.
pub fn sum_bias(ds: &[Distribution]) -> Result<MixtureRep> {
    if ds.is_empty() {
        return Err(Error::InvalidDistribution("sum_bias needs at least one summand".into()));
    }
    let a: f64 = ds.iter().map(Distribution::mean).sum();
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::NotSizeBiasable {
            what: ds.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(" + "),
            mean: a,
        });
    }
    let mut components = Vec::new();
    for (i, d) in ds.iter().enumerate() {
        if d.mean() == 0.0 {
            continue;
        }
        let mut terms = ds.to_vec();
        terms[i] = d.size_bias()?;
        components.push(MixtureComponent {
            weight: d.mean() / a,
            index: i,
            biased: Distribution::sum(terms)?,
        });
    }
    Ok(MixtureRep { components })
}

/// Law of `X_1* + X_2 + ... + X_n` for i.i.d. summands.
pub fn iid_sum_bias(d: &Distribution, n: usize) -> Result<Distribution> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            reason: "need at least one summand",
        });
    }
    let mut terms = vec![d.size_bias()?];
    terms.extend(std::iter::repeat_n(d.clone(), n - 1));
    Distribution::sum(terms)
}

/// Law of `X_1* X_2* ... X_n*` for independent factors.
pub fn product_bias(ds: &[Distribution]) -> Result<Distribution> {
    if ds.is_empty() {
        return Err(Error::InvalidDistribution("product_bias needs at least one factor".into()));
    }
    Distribution::product(ds.iter().map(Distribution::size_bias).collect::<Result<_>>()?)
}

/// Law of `y X`.
pub fn scale(d: &Distribution, y: f64) -> Result<Distribution> {
    d.clone().scaled(y)
}

/// Closed-form size bias of a named family.
pub fn catalogue_bias(name: &str, params: &BTreeMap<String, f64>) -> Result<Distribution> {
    let f = Family::from_params(name, params)?;
    catalogue_bias_family(&f)
}

fn not_biasable(f: &Family) -> Error {
    Error::NotSizeBiasable {
        what: f.to_string(),
        mean: f.mean(),
    }
}

pub fn catalogue_bias_family(f: &Family) -> Result<Distribution> {
    let fam = |g: Family| Distribution::family(g);
    match *f {
        Family::Poisson { .. } => fam(f.clone())?.shifted(1.0),
        Family::Binomial { n, p } => {
            if n == 0 || p == 0.0 {
                return Err(not_biasable(f));
            }
            if n == 1 {
                return Distribution::constant(1.0);
            }
            fam(Family::Binomial { n: n - 1, p })?.shifted(1.0)
        }
        Family::Bernoulli { p } => {
            if p == 0.0 {
                return Err(not_biasable(f));
            }
            Distribution::constant(1.0)
        }
        Family::Beta { a, b } => fam(Family::Beta { a, b: b + 1.0 }),
        Family::Gamma { alpha, t } => fam(Family::Gamma { alpha, t: t + 1.0 }),
        Family::Exponential { alpha } => fam(Family::Gamma { alpha, t: 2.0 }),
        Family::Geometric { q } | Family::NegativeBinomial { q, .. } => {
            Distribution::sum(vec![fam(f.clone())?, fam(Family::Geometric { q })?.shifted(1.0)?])
        }
        Family::Lognormal { mu, sigma } => fam(Family::Lognormal {
            mu: mu + sigma * sigma,
            sigma,
        }),
        Family::ScaledPoisson { y, .. } => fam(f.clone())?.shifted(y),
        Family::Uniform { .. } => Err(Error::UnknownFamily(f.name().to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::AtomTable;

    fn po(l: f64) -> Distribution {
        Distribution::named("poisson", &[("lambda", l)]).unwrap()
    }

    fn close(a: &AtomTable, b: &AtomTable, tol: f64) {
        let d = a.sup_distance(b);
        assert!(d < tol, "sup distance {d}");
    }

    #[test]
    fn poisson_pair_sum_rule() {
        let rep = sum_bias(&[po(1.5), po(2.5)]).unwrap();
        assert!((rep.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let got = rep.to_distribution().atom_table().unwrap();
        // brute force: pmf of Po(4) shifted by one, to k <= 30
        let want = AtomTable::from_pairs(
            (0..=30u64).map(|k| {
                let p = (-4.0f64).exp() * 4f64.powi(k as i32) / (1..=k).map(|j| j as f64).product::<f64>();
                (k as f64 + 1.0, p)
            }),
            0.0,
        );
        for &(v, p) in &want.atoms {
            assert!((got.prob_at(v) - p).abs() < 1e-12, "k={v}");
        }
    }

    #[test]
    fn bernoulli_sum_is_shifted_binomial() {
        let b = Distribution::named("bernoulli", &[("p", 0.3)]).unwrap();
        let n = 6;
        let rep = sum_bias(&vec![b; n]).unwrap();
        let want = Distribution::named("binomial", &[("n", (n - 1) as f64), ("p", 0.3)])
            .unwrap()
            .shifted(1.0)
            .unwrap();
        close(&rep.to_distribution().atom_table().unwrap(), &want.atom_table().unwrap(), 1e-12);
    }

    #[test]
    fn single_component_is_plain_bias() {
        let d = po(2.0);
        let rep = sum_bias(std::slice::from_ref(&d)).unwrap();
        assert_eq!(rep.into_distribution(), d.size_bias().unwrap());
    }

    #[test]
    fn all_zero_means_rejected() {
        let z = Distribution::constant(0.0).unwrap();
        assert!(sum_bias(&[z.clone(), z]).is_err());
    }

    #[test]
    fn zero_mean_component_gets_no_weight() {
        let z = Distribution::constant(0.0).unwrap();
        let rep = sum_bias(&[z, po(1.0)]).unwrap();
        assert_eq!(rep.components.len(), 1);
        assert_eq!(rep.components[0].index, 1);
    }

    #[test]
    fn iid_geometric_matches_negative_binomial_form() {
        let g = Distribution::named("geometric", &[("q", 0.4)]).unwrap();
        let got = iid_sum_bias(&g, 3).unwrap().atom_table().unwrap();
        let nb = Distribution::named("negative_binomial", &[("t", 3.0), ("q", 0.4)]).unwrap();
        let want = Distribution::sum(vec![nb, g.shifted(1.0).unwrap()]).unwrap().atom_table().unwrap();
        close(&got, &want, 1e-12);
    }

    #[test]
    fn two_point_product_brute_force() {
        let x = Distribution::atoms(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let got = product_bias(&[x.clone(), x.clone()]).unwrap().atom_table().unwrap();
        let w = Distribution::product(vec![x.clone(), x]).unwrap();
        let want = Distribution::from_table(w.atom_table().unwrap()).unwrap().size_bias().unwrap();
        close(&got, &want.atom_table().unwrap(), 1e-12);
    }

    #[test]
    fn catalogue_descriptors() {
        let mut p = BTreeMap::new();
        p.insert("lambda".to_string(), 3.0);
        assert_eq!(catalogue_bias("poisson", &p).unwrap(), po(3.0).shifted(1.0).unwrap());
        let mut b = BTreeMap::new();
        b.insert("a".to_string(), 1.0);
        b.insert("b".to_string(), 1.0);
        assert_eq!(
            catalogue_bias("beta", &b).unwrap(),
            Distribution::named("beta", &[("a", 1.0), ("b", 2.0)]).unwrap()
        );
        let mut l = BTreeMap::new();
        l.insert("mu".to_string(), 0.0);
        l.insert("sigma".to_string(), 1.0);
        assert_eq!(
            catalogue_bias("lognormal", &l).unwrap(),
            Distribution::named("lognormal", &[("mu", 1.0), ("sigma", 1.0)]).unwrap()
        );
        assert!(matches!(
            catalogue_bias("zipf", &BTreeMap::new()),
            Err(Error::UnknownFamily(_))
        ));
    }

    #[test]
    fn binomial_edge_cases() {
        let one = Distribution::named("binomial", &[("n", 1.0), ("p", 0.3)]).unwrap();
        assert_eq!(one.size_bias().unwrap(), Distribution::constant(1.0).unwrap());
        let zero = Distribution::named("binomial", &[("n", 0.0), ("p", 0.3)]).unwrap();
        assert!(zero.size_bias().is_err());
    }

    #[test]
    fn scaling_rules() {
        let d = Distribution::atoms(vec![(1.0, 0.5), (3.0, 0.5)]).unwrap();
        assert_eq!(scale(&d, 2.0).unwrap(), Distribution::atoms(vec![(2.0, 0.5), (6.0, 0.5)]).unwrap());
        assert_eq!(scale(&d, 1.0).unwrap(), d);
        assert!(scale(&d, 0.0).is_err());
        assert!(scale(&d, -1.0).is_err());
        let lhs = scale(&po(1.3), 2.0).unwrap().size_bias().unwrap();
        let rhs = scale(&po(1.3).size_bias().unwrap(), 2.0).unwrap();
        close(&lhs.atom_table().unwrap(), &rhs.atom_table().unwrap(), 1e-12);
        let ev = lhs.atom_table().unwrap();
        assert!(ev.atoms.iter().all(|(v, _)| v % 2.0 == 0.0));
    }
}
