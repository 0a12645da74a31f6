//! Experiment configuration.

use crate::coeffs::{DistributionSpec, ScalarField};
use crate::ensemble::{BasisPath, Ensemble};
use crate::error::{Error, Result};
use crate::stats::{ProbeMeasure, RadialLaw, TestFunction};
use crate::zeros::RootOptions;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionConfig {
    ComplexGaussian {},
    RealGaussian {},
    UniformDisc {
        radius: f64,
        #[serde(default)]
        field: Option<ScalarField>,
    },
    LogPareto {
        rho: f64,
        mix: f64,
        #[serde(default)]
        field: Option<ScalarField>,
    },
}

impl DistributionConfig {
    pub fn spec(&self) -> Result<DistributionSpec> {
        Ok(match self {
            DistributionConfig::ComplexGaussian {} => DistributionSpec::complex_gaussian(),
            DistributionConfig::RealGaussian {} => DistributionSpec::real_gaussian(),
            DistributionConfig::UniformDisc { radius, field } => {
                let d = DistributionSpec::uniform_disc(*radius)?;
                field.map_or(d, |f| d.with_field(f))
            }
            DistributionConfig::LogPareto { rho, mix, field } => {
                let d = DistributionSpec::log_pareto(*rho, *mix)?;
                field.map_or(d, |f| d.with_field(f))
            }
        })
    }
}

fn default_delta() -> f64 {
    0.1
}

/// Per-trial quantities recorded by a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricSpec {
    RootCount {},
    MaxResidual {},
    AngularKs {
        #[serde(default)]
        axis: usize,
    },
    AnnulusMass {
        #[serde(default = "default_delta")]
        delta: f64,
    },
    RadialCdfDistance {
        #[serde(default = "default_law")]
        law: RadialLaw,
    },
    LinearStatistic {
        phi: TestFunction,
    },
    LogNormRate {},
    /// `int u_n d(nu) - int u_n dV_FS`; its variance is reported in the summary
    Probe {
        measure: ProbeMeasure,
    },
}

fn default_law() -> RadialLaw {
    RadialLaw::FubiniStudy
}

impl MetricSpec {
    /// Name used in the summary and as the CSV file stem.
    pub fn label(&self) -> String {
        match self {
            MetricSpec::RootCount {} => "root-count".into(),
            MetricSpec::MaxResidual {} => "max-residual".into(),
            MetricSpec::AngularKs { axis } => {
                if *axis == 0 {
                    "angular-ks".into()
                } else {
                    format!("angular-ks-axis{axis}")
                }
            }
            MetricSpec::AnnulusMass { delta } => format!("annulus-mass-{delta}"),
            MetricSpec::RadialCdfDistance { .. } => "radial-cdf-distance".into(),
            MetricSpec::LinearStatistic { phi } => format!("linear-statistic-{}", file_safe(&phi.name())),
            MetricSpec::LogNormRate {} => "log-norm-rate".into(),
            MetricSpec::Probe { measure } => match measure {
                ProbeMeasure::FubiniStudy { scale } => format!("probe-fs-{scale}"),
                ProbeMeasure::TorusBand { inner, outer } => format!("probe-band-{inner}-{outer}"),
            },
        }
    }
}

fn file_safe(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        if c.is_ascii_alphanumeric() || c == '.' {
            out.push(c);
        } else if c == '-' || c == '+' {
            out.push(if c == '+' { 'p' } else { '-' });
        } else if !out.ends_with('_') {
            out.push('_');
        }
    }
    out.trim_matches('_').to_string()
}

fn default_trials() -> usize {
    100
}

fn default_k() -> usize {
    1
}

fn default_budget() -> usize {
    5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "default_tol_root")]
    pub tol_root: f64,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
}

fn default_tol_root() -> f64 {
    1e-8
}

fn default_max_iters() -> usize {
    200
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_root: default_tol_root(),
            max_iters: default_max_iters(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub ensemble: Ensemble,
    #[serde(default)]
    pub basis: BasisPath,
    pub distribution: DistributionConfig,
    pub degrees: Vec<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub metrics: Vec<MetricSpec>,
    /// default output directory; the command line overrides it
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_budget")]
    pub resample_budget: usize,
    /// also write one CSV of roots per trial
    #[serde(default)]
    pub save_roots: bool,
}

fn schema(path: &str, message: impl Into<String>) -> Error {
    Error::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    pub fn root_options(&self) -> RootOptions {
        RootOptions {
            tol_root: self.tolerances.tol_root,
            max_iters: self.tolerances.max_iters,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let wrap = |path: &str, r: Result<()>| r.map_err(|e| schema(path, e.to_string()));
        wrap("ensemble", self.ensemble.validate())?;
        wrap("distribution", self.distribution.spec().map(|_| ()))?;
        if self.degrees.is_empty() {
            return Err(schema("degrees", "must not be empty"));
        }
        for (i, w) in self.degrees.windows(2).enumerate() {
            if w[0] == w[1] {
                return Err(schema(&format!("degrees[{}]", i + 1), format!("duplicate degree {}", w[1])));
            }
            if w[0] > w[1] {
                return Err(schema(&format!("degrees[{}]", i + 1), "degrees must be ascending"));
            }
        }
        if self.degrees[0] == 0 {
            return Err(schema("degrees[0]", "degree must be at least 1"));
        }
        let m = self.ensemble.m();
        if self.k != 1 && self.k != m {
            return Err(schema("k", format!("k = {} must be 1 or m = {m}", self.k)));
        }
        if m == 2 && self.k == 1 {
            return Err(schema("k", "hypersurface zero sets (k = 1, m = 2) are not point sets"));
        }
        if m == 2 && self.degrees[self.degrees.len() - 1] > 24 {
            return Err(schema("degrees", "two-variable systems are limited to n <= 24"));
        }
        if self.trials == 0 {
            return Err(schema("trials", "must be at least 1"));
        }
        if !(self.tolerances.tol_root > 0.0 && self.tolerances.tol_root < 1.0) {
            return Err(schema("tolerances.tol_root", "must lie in (0, 1)"));
        }
        if self.tolerances.max_iters == 0 {
            return Err(schema("tolerances.max_iters", "must be at least 1"));
        }
        let mut labels = Vec::new();
        for (i, metric) in self.metrics.iter().enumerate() {
            let path = format!("metrics[{i}]");
            match metric {
                MetricSpec::AngularKs { axis } if *axis >= m => {
                    return Err(schema(&format!("{path}.axis"), format!("axis {axis} out of range for m = {m}")))
                }
                MetricSpec::AnnulusMass { delta } if !(*delta > 0.0 && delta.is_finite()) => {
                    return Err(schema(&format!("{path}.delta"), "must be positive"))
                }
                MetricSpec::RadialCdfDistance { .. } | MetricSpec::Probe { .. } if m != 1 => {
                    return Err(schema(&path, "only defined for one-variable ensembles"))
                }
                MetricSpec::LinearStatistic { phi } => {
                    wrap(&format!("{path}.phi"), phi.validate())?;
                    if phi.dim() != m {
                        return Err(schema(&format!("{path}.phi"), format!("test function has {} variables, ensemble has {m}", phi.dim())));
                    }
                }
                MetricSpec::Probe { measure } => wrap(&format!("{path}.measure"), measure.validate())?,
                _ => {}
            }
            let label = metric.label();
            if labels.contains(&label) {
                return Err(schema(&path, format!("duplicate metric {label}")));
            }
            labels.push(label);
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON (sorted keys, defaults filled in).
    pub fn hash(&self) -> String {
        let value = serde_json::to_value(self).expect("config serializes");
        let text = serde_json::to_string(&value).expect("value serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses and validates a JSON config; errors carry the offending field path.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(if path.is_empty() { "." } else { &path }, e.into_inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{"ensemble": {"name": "kac"}, "distribution": {"kind": "complex-gaussian"}, "degrees": [8], "seed": 1}"#;

    fn path_of(e: Error) -> String {
        match e {
            Error::Schema { path, .. } => path,
            other => panic!("not a schema error: {other}"),
        }
    }

    #[test]
    fn defaults_are_filled() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.tolerances.tol_root, 1e-8);
        assert_eq!(cfg.tolerances.max_iters, 200);
        assert_eq!(cfg.resample_budget, 5);
        assert_eq!(cfg.k, 1);
    }

    #[test]
    fn rejections_name_the_field() {
        let zero = MINIMAL.replace(r#""seed": 1"#, r#""seed": 1, "trials": 0"#);
        assert_eq!(path_of(parse_config(&zero).unwrap_err()), "trials");
        let dup = MINIMAL.replace("[8]", "[8, 8]");
        assert_eq!(path_of(parse_config(&dup).unwrap_err()), "degrees[1]");
        let unknown = MINIMAL.replace(r#""seed": 1"#, r#""seed": 1, "colour": 3"#);
        assert!(parse_config(&unknown).unwrap_err().is_schema());
        let k2 = MINIMAL.replace(r#""seed": 1"#, r#""seed": 1, "k": 2"#);
        assert_eq!(path_of(parse_config(&k2).unwrap_err()), "k");
        let bad_type = MINIMAL.replace(r#""seed": 1"#, r#""seed": "one""#);
        assert_eq!(path_of(parse_config(&bad_type).unwrap_err()), "seed");
        let nested = MINIMAL.replace(r#""seed": 1"#, r#""seed": 1, "metrics": [{"metric": "annulus-mass", "delta": -1}]"#);
        assert_eq!(path_of(parse_config(&nested).unwrap_err()), "metrics[0].delta");
    }

    #[test]
    fn hash_ignores_field_order() {
        let a = parse_config(MINIMAL).unwrap();
        let b = parse_config(r#"{"seed": 1, "degrees": [8], "distribution": {"kind": "complex-gaussian"}, "ensemble": {"name": "kac"}, "trials": 100}"#).unwrap();
        assert_eq!(a.hash(), b.hash());
        let c = parse_config(&MINIMAL.replace(r#""seed": 1"#, r#""seed": 2"#)).unwrap();
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn metric_labels_are_file_safe() {
        let m = MetricSpec::LinearStatistic {
            phi: TestFunction::Bump {
                center: [0.5, -0.25],
                radius: 1.0,
            },
        };
        assert_eq!(m.label(), "linear-statistic-bump_0.5-0.25i_1");
    }
}
