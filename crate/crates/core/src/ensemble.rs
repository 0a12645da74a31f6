//! Named ensembles and the sampling of one trial's zero set.

use crate::basis::{closed_form_basis, gram_basis, CircleWeight, EnsembleBasis, Metric, Polytope, SetKind, WeightedSet};
use crate::coeffs::{sample_vector, DistributionSpec};
use crate::error::{Error, Result};
use crate::pluripotential::ExtremalKind;
use crate::rng::RandomStream;
use crate::scaled::ScaledComplex;
use crate::zeros::{common_zeros_bivariate_with, roots_univariate_with, RootOptions, RootSet};
use serde::{Deserialize, Serialize};

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Ensemble {
    /// unit circle, flat weight
    Kac {},
    /// unit circle inside P^1 with the Fubini–Study weight
    KacFs {},
    /// P^m with the Fubini–Study volume
    Elliptic {
        #[serde(default = "one")]
        m: usize,
    },
    /// unit sphere in C^m
    Ball { m: usize },
    /// total-degree monomials on the unit torus of C^m
    Polydisc { m: usize },
    /// bidegree `(n, n)` monomials on the unit torus of C^2
    Torus {},
    /// unit circle with weight `q`
    WeightedCircle { weight: CircleWeight },
    /// monomials over `n [0, l_1] x ... x [0, l_m]` on the unit torus
    BoxPolytope { lengths: Vec<usize> },
}

/// How the orthonormal basis is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisPath {
    /// closed form when catalogued, Gram–Cholesky otherwise
    #[default]
    Auto,
    ClosedForm,
    Gram,
}

pub const CATALOG: [&str; 8] = [
    "kac",
    "kac-fs",
    "elliptic",
    "ball",
    "polydisc",
    "torus",
    "weighted-circle",
    "box-polytope",
];

impl Ensemble {
    /// Ensemble from a catalog name with default parameters.
    pub fn from_name(name: &str) -> Option<Ensemble> {
        Some(match name {
            "kac" => Ensemble::Kac {},
            "kac-fs" => Ensemble::KacFs {},
            "elliptic" => Ensemble::Elliptic { m: 1 },
            "elliptic-2" => Ensemble::Elliptic { m: 2 },
            "ball" | "ball-2" => Ensemble::Ball { m: 2 },
            "polydisc" | "polydisc-2" => Ensemble::Polydisc { m: 2 },
            "torus" => Ensemble::Torus {},
            "weighted-circle" => Ensemble::WeightedCircle {
                weight: CircleWeight::Cosine { amplitude: 0.5 },
            },
            "box-polytope" => Ensemble::BoxPolytope { lengths: vec![1, 2] },
            _ => return None,
        })
    }

    pub fn set(&self) -> WeightedSet {
        match self {
            Ensemble::Kac {} => WeightedSet::circle(),
            Ensemble::KacFs {} => WeightedSet::circle_fs(),
            Ensemble::Elliptic { m } => WeightedSet::projective(*m),
            Ensemble::Ball { m } => WeightedSet::sphere_ball(*m),
            Ensemble::Polydisc { m } => WeightedSet::polydisc(*m),
            Ensemble::Torus {} => WeightedSet::torus(),
            Ensemble::WeightedCircle { weight } => WeightedSet::weighted_circle(weight.clone()),
            Ensemble::BoxPolytope { lengths } => WeightedSet::new(
                SetKind::Polytope {
                    polytope: Polytope::Box(lengths.clone()),
                    m: lengths.len(),
                },
                Metric::Flat,
            ),
        }
    }

    pub fn m(&self) -> usize {
        self.set().dim()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.into()));
        match self {
            Ensemble::Elliptic { m } | Ensemble::Ball { m } | Ensemble::Polydisc { m } => {
                if !(1..=2).contains(m) {
                    return bad("m must be 1 or 2");
                }
            }
            Ensemble::BoxPolytope { lengths } => {
                if lengths.is_empty() || lengths.len() > 2 || lengths.contains(&0) {
                    return bad("box lengths must be one or two positive integers");
                }
            }
            Ensemble::WeightedCircle { weight } => {
                if let CircleWeight::Table(v) = weight {
                    if v.is_empty() || v.iter().any(|x| !x.is_finite()) {
                        return bad("weight table must be nonempty and finite");
                    }
                }
                if let CircleWeight::Cosine { amplitude } = weight {
                    if !amplitude.is_finite() {
                        return bad("weight amplitude must be finite");
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    pub fn basis(&self, n: usize, path: BasisPath) -> Result<EnsembleBasis> {
        let set = self.set();
        match path {
            BasisPath::ClosedForm => closed_form_basis(&set, n),
            BasisPath::Gram => gram_basis(&set, n),
            BasisPath::Auto => match closed_form_basis(&set, n) {
                Err(Error::Unsupported(_)) => gram_basis(&set, n),
                other => other,
            },
        }
    }

    pub fn extremal_kind(&self) -> Option<ExtremalKind> {
        ExtremalKind::for_set(&self.set()).ok()
    }

    /// Human-readable catalog entry.
    pub fn describe(&self) -> String {
        let set = self.set();
        let metric = match set.metric {
            Metric::Flat => "flat (psi = 0)",
            Metric::FubiniStudy => "Fubini–Study (psi = (1/2) log(1 + |z|^2))",
        };
        let dims: Vec<String> = [1, 2, 8, 32].iter().map(|&n| format!("d_{n} = {}", set.dimension(n))).collect();
        let mut out = format!(
            "ensemble: {}\nset: {}\nm: {}\nmetric: {}\nweight q: {:?}\n{}\n",
            serde_json::to_string(self).unwrap_or_default(),
            set.name(),
            set.dim(),
            metric,
            set.weight,
            dims.join(", ")
        );
        let basis = match closed_form_basis(&set, 1) {
            Ok(_) => "closed form (scaled monomials)",
            Err(_) => "Gram–Cholesky on the quadrature of tau",
        };
        out.push_str(&format!("basis: {basis}\n"));
        match self.extremal_kind() {
            Some(k) => out.push_str(&format!(
                "extremal function: {}\nequilibrium measure: {}\n",
                k.formula(),
                k.measure()
            )),
            None => out.push_str("extremal function: Bergman estimate only\n"),
        }
        out
    }
}

/// Zeros of one trial together with the coefficients that produced them.
#[derive(Clone, Debug)]
pub struct TrialZeros {
    pub roots: RootSet,
    pub coeffs: Vec<Vec<ScaledComplex>>,
    /// degenerate draws discarded before this one
    pub resamples: usize,
}

/// Draws `k` independent sections and solves for their common zeros.
/// Degenerate bivariate systems are redrawn from the same stream up to
/// `budget` times.
pub fn sample_zeros(
    basis: &EnsembleBasis,
    dist: &DistributionSpec,
    k: usize,
    stream: &mut RandomStream,
    opts: &RootOptions,
    budget: usize,
) -> Result<TrialZeros> {
    let m = basis.frame.dim;
    let d = basis.dimension();
    match (m, k) {
        (1, 1) => {
            let a = sample_vector(dist, d, stream);
            let p = basis.univariate_poly(&a)?;
            let roots = roots_univariate_with(&p, opts)?;
            Ok(TrialZeros {
                roots,
                coeffs: vec![a],
                resamples: 0,
            })
        }
        (2, 2) => {
            let mut resamples = 0;
            loop {
                let a1 = sample_vector(dist, d, stream);
                let a2 = sample_vector(dist, d, stream);
                let p = basis.bivariate_poly(&a1)?;
                let q = basis.bivariate_poly(&a2)?;
                match common_zeros_bivariate_with(&p, &q, basis.n, opts) {
                    Ok(roots) => {
                        return Ok(TrialZeros {
                            roots,
                            coeffs: vec![a1, a2],
                            resamples,
                        })
                    }
                    Err(Error::Degenerate(msg)) => {
                        if resamples >= budget {
                            return Err(Error::Degenerate(format!("resample budget {budget} exhausted: {msg}")));
                        }
                        resamples += 1;
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        _ => Err(Error::Unsupported(format!("zero sets with k = {k} in dimension m = {m}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog_names_resolve() {
        for name in CATALOG {
            let e = Ensemble::from_name(name).unwrap();
            e.validate().unwrap();
            assert!(e.describe().contains("ensemble:"));
        }
        assert!(Ensemble::from_name("nope").is_none());
    }

    #[test]
    fn serde_shape() {
        let e: Ensemble = serde_json::from_str(r#"{"name":"elliptic"}"#).unwrap();
        assert_eq!(e, Ensemble::Elliptic { m: 1 });
        let e: Ensemble = serde_json::from_str(r#"{"name":"weighted-circle","weight":{"cosine":{"amplitude":0.3}}}"#).unwrap();
        assert_eq!(e.m(), 1);
        assert!(serde_json::from_str::<Ensemble>(r#"{"name":"kac","extra":1}"#).is_err());
    }

    #[test]
    fn hypersurface_zero_sets_unsupported() {
        let basis = Ensemble::Polydisc { m: 2 }.basis(2, BasisPath::Auto).unwrap();
        let mut s = RandomStream::new(1, 0);
        let r = sample_zeros(&basis, &DistributionSpec::complex_gaussian(), 1, &mut s, &RootOptions::default(), 5);
        assert!(matches!(r, Err(Error::Unsupported(_))));
    }
}
