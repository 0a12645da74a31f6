//! Seeded execution of an experiment.

use super::config::{ExperimentConfig, MetricSpec};
use crate::coeffs::log_norm_rate_of;
use crate::ensemble::{sample_zeros, TrialZeros};
use crate::error::{Error, Result};
use crate::rng::rng_split;
use crate::stats::{angular_ks_axis, annulus_mass, linear_statistic, probe_value, radial_cdf_distance};
use crate::basis::EnsembleBasis;
use crate::zeros::{empirical_measure, RootSet};
use rayon::prelude::*;
use std::time::{Duration, Instant};

/// Outcome of one `(n, trial)` cell.
#[derive(Clone, Debug)]
pub struct TrialRecord {
    pub n: usize,
    pub trial: usize,
    /// one value per configured metric; empty when the trial was excluded
    pub values: Vec<f64>,
    pub resamples: usize,
    pub excluded: bool,
    pub at_infinity: usize,
    /// bivariate points dropped by the lift (ill-conditioned, duplicate, failed)
    pub dropped_points: usize,
    pub roots: Option<RootSet>,
}

#[derive(Clone, Debug)]
pub struct RunRecord {
    pub config: ExperimentConfig,
    pub config_hash: String,
    /// ordered by `(n, trial)`
    pub trials: Vec<TrialRecord>,
    pub wall_time: Duration,
}

fn metric_value(metric: &MetricSpec, basis: &EnsembleBasis, tz: &TrialZeros, k: usize) -> Result<f64> {
    let rs = &tz.roots;
    let n = basis.n;
    match metric {
        MetricSpec::RootCount {} => Ok(rs.len() as f64),
        MetricSpec::MaxResidual {} => Ok(rs.max_residual()),
        MetricSpec::AngularKs { axis } => angular_ks_axis(rs, *axis),
        MetricSpec::AnnulusMass { delta } => annulus_mass(rs, *delta),
        MetricSpec::RadialCdfDistance { law } => radial_cdf_distance(rs, *law),
        MetricSpec::LinearStatistic { phi } => linear_statistic(&empirical_measure(rs, n, k), phi),
        MetricSpec::LogNormRate {} => Ok(log_norm_rate_of(&tz.coeffs[0], n)),
        MetricSpec::Probe { measure } => probe_value(basis, &tz.coeffs[0], measure),
    }
}

fn run_trial(cfg: &ExperimentConfig, basis: &EnsembleBasis, trial: usize) -> Result<TrialRecord> {
    let n = basis.n;
    let mut stream = rng_split(cfg.seed, n as u64, trial as u64);
    let dist = cfg.distribution.spec()?;
    let tz = match sample_zeros(basis, &dist, cfg.k, &mut stream, &cfg.root_options(), cfg.resample_budget) {
        Ok(tz) => tz,
        Err(Error::Degenerate(_)) => {
            return Ok(TrialRecord {
                n,
                trial,
                values: Vec::new(),
                resamples: cfg.resample_budget,
                excluded: true,
                at_infinity: 0,
                dropped_points: 0,
                roots: None,
            })
        }
        Err(e) => return Err(e),
    };
    let values = cfg
        .metrics
        .iter()
        .map(|m| metric_value(m, basis, &tz, cfg.k))
        .collect::<Result<Vec<f64>>>()?;
    Ok(TrialRecord {
        n,
        trial,
        values,
        resamples: tz.resamples,
        excluded: false,
        at_infinity: tz.roots.at_infinity,
        dropped_points: tz.roots.excluded,
        roots: cfg.save_roots.then_some(tz.roots),
    })
}

/// Runs every `(n, trial)` cell. Trial `t` at degree `n` draws from
/// `rng_split(seed, n, t)`, so the record does not depend on `workers`.
pub fn run_experiment(cfg: &ExperimentConfig, workers: Option<usize>) -> Result<RunRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let body = || -> Result<Vec<TrialRecord>> {
        let mut all = Vec::with_capacity(cfg.degrees.len() * cfg.trials);
        for &n in &cfg.degrees {
            let basis = cfg.ensemble.basis(n, cfg.basis).map_err(|e| Error::Trial {
                context: format!("basis at n = {n}"),
                source: Box::new(e),
            })?;
            let cells: Vec<Result<TrialRecord>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    run_trial(cfg, &basis, t).map_err(|e| Error::Trial {
                        context: format!("n = {n}, trial = {t}"),
                        source: Box::new(e),
                    })
                })
                .collect();
            for c in cells {
                all.push(c?);
            }
        }
        Ok(all)
    };
    let trials = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(body)?,
        None => body()?,
    };
    Ok(RunRecord {
        config_hash: cfg.hash(),
        config: cfg.clone(),
        trials,
        wall_time: start.elapsed(),
    })
}
