//! Weak-* convergence metrics and Monte Carlo estimators.

mod testfn;

pub use testfn::{Support, TestFunction};

use crate::basis::{EnsembleBasis, Metric};
use crate::coeffs::{sample_vector, DistributionSpec};
use crate::ensemble::sample_zeros;
use crate::error::{Error, Result};
use crate::mc::{sample_variance, Estimate};
use crate::pluripotential::fs_integral;
use crate::quad::{composite_gauss_legendre, integrate, trapezoid_angles};
use crate::rng::rng_split;
use crate::scaled::ScaledComplex;
use crate::zeros::{empirical_measure, quasi_potential, EmpiricalMeasure, RootOptions, RootSet};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// One reported number; `stderr` is present exactly for Monte Carlo values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub statistic: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub n: usize,
    pub trials: usize,
    pub seed: Option<u64>,
}

/// `sum_i w phi(z_i)` plus the boundary mass times `phi(infinity)`.
pub fn linear_statistic(em: &EmpiricalMeasure, phi: &TestFunction) -> Result<f64> {
    phi.validate()?;
    if phi.dim() != em.dim {
        return Err(Error::DimensionMismatch {
            expected: em.dim,
            got: phi.dim(),
        });
    }
    let mut s = 0.0;
    for i in 0..em.len() {
        s += phi.eval_scaled(em.point(i))?;
    }
    let boundary = if em.boundary_mass > 0.0 {
        em.boundary_mass * phi.at_infinity()
    } else {
        0.0
    };
    Ok(s * em.weight + boundary)
}

/// Two-sided Kolmogorov–Smirnov distance of a sample against a continuous CDF.
pub fn ks_distance(values: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut f: Vec<f64> = values.iter().map(|&x| cdf(x)).collect();
    f.sort_by(f64::total_cmp);
    let count = f.len() as f64;
    f.iter()
        .enumerate()
        .map(|(i, &fi)| ((i as f64 + 1.0) / count - fi).max(fi - i as f64 / count))
        .fold(0.0, f64::max)
}

fn angle_01(theta: f64) -> f64 {
    let t = theta / (2.0 * PI);
    if t < 0.0 {
        t + 1.0
    } else {
        t
    }
}

/// KS distance of arguments (scaled to `[0, 1)`) against the uniform law.
pub fn ks_uniform_angles(angles: &[f64]) -> f64 {
    let u: Vec<f64> = angles.iter().map(|&a| angle_01(a)).collect();
    ks_distance(&u, |x| x.clamp(0.0, 1.0))
}

fn axis_angles(rs: &RootSet, axis: usize) -> Result<Vec<f64>> {
    if axis >= rs.dim {
        return Err(Error::DimensionMismatch {
            expected: rs.dim,
            got: axis + 1,
        });
    }
    Ok((0..rs.len()).map(|i| rs.point(i)[axis].arg()).collect())
}

/// KS distance between root arguments and the uniform law on the circle.
pub fn angular_ks(rs: &RootSet) -> Result<f64> {
    angular_ks_axis(rs, 0)
}

/// Same as [`angular_ks`] for the arguments of one coordinate.
pub fn angular_ks_axis(rs: &RootSet, axis: usize) -> Result<f64> {
    let a = axis_angles(rs, axis)?;
    if a.is_empty() {
        return Err(Error::InvalidArgument("angular KS of an empty root set".into()));
    }
    Ok(ks_uniform_angles(&a))
}

/// Angular KS of the arguments of one coordinate pooled over several root sets.
pub fn pooled_angular_ks<'a>(sets: impl IntoIterator<Item = &'a RootSet>, axis: usize) -> Result<f64> {
    let mut a = Vec::new();
    for rs in sets {
        a.extend(axis_angles(rs, axis)?);
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("angular KS of an empty root set".into()));
    }
    Ok(ks_uniform_angles(&a))
}

/// Fraction of affine roots with `||z| - 1| < delta` (0 for an empty set).
pub fn annulus_mass(rs: &RootSet, delta: f64) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("annulus width must be positive, got {delta}")));
    }
    if rs.is_empty() {
        return Ok(0.0);
    }
    let hits = (0..rs.len())
        .filter(|&i| {
            let l = rs.point(i)[0].ln_abs();
            l.abs() < 50.0 && (l.exp() - 1.0).abs() < delta
        })
        .count();
    Ok(hits as f64 / rs.len() as f64)
}

/// Radial laws with a closed CDF.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RadialLaw {
    /// `F(r) = r^2 / (1 + r^2)`
    FubiniStudy,
}

impl RadialLaw {
    /// CDF as a function of `log r`.
    pub fn cdf_log(&self, l: f64) -> f64 {
        match self {
            RadialLaw::FubiniStudy => 1.0 / (1.0 + (-2.0 * l).exp()),
        }
    }
}

/// KS distance of the moduli of the affine roots against `law`.
pub fn radial_cdf_distance(rs: &RootSet, law: RadialLaw) -> Result<f64> {
    if rs.is_empty() {
        return Err(Error::InvalidArgument("radial CDF distance of an empty root set".into()));
    }
    let logs: Vec<f64> = (0..rs.len()).map(|i| rs.point(i)[0].ln_abs()).collect();
    Ok(ks_distance(&logs, |l| law.cdf_log(l)))
}

/// Monte Carlo controls shared by the estimators.
#[derive(Clone, Debug, PartialEq)]
pub struct McSettings {
    pub trials: usize,
    pub seed: u64,
    pub root: RootOptions,
    pub resample_budget: usize,
}

impl McSettings {
    pub fn new(trials: usize, seed: u64) -> Self {
        McSettings {
            trials,
            seed,
            root: RootOptions::default(),
            resample_budget: 5,
        }
    }
}

/// Mean and standard error of the linear statistic of `n^{-k} [Z]` over
/// independent trials. Trial `t` uses the stream `rng_split(seed, n, t)`.
pub fn expected_measure_mc(
    basis: &EnsembleBasis,
    dist: &DistributionSpec,
    k: usize,
    phi: &TestFunction,
    mc: &McSettings,
) -> Result<MetricReport> {
    Ok(expected_measures_mc(basis, dist, k, std::slice::from_ref(phi), mc)?.remove(0))
}

/// [`expected_measure_mc`] for several test functions on the same zero sets.
pub fn expected_measures_mc(
    basis: &EnsembleBasis,
    dist: &DistributionSpec,
    k: usize,
    phis: &[TestFunction],
    mc: &McSettings,
) -> Result<Vec<MetricReport>> {
    if mc.trials < 2 {
        return Err(Error::InvalidArgument("Monte Carlo needs at least 2 trials".into()));
    }
    let m = basis.frame.dim;
    if k != 1 && k != m {
        return Err(Error::InvalidArgument(format!("k = {k} must be 1 or m = {m}")));
    }
    for phi in phis {
        phi.validate()?;
    }
    let n = basis.n;
    let outcomes: Vec<Result<(Option<Vec<f64>>, bool)>> = (0..mc.trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng_split(mc.seed, n as u64, t as u64);
            match sample_zeros(basis, dist, k, &mut stream, &mc.root, mc.resample_budget) {
                Ok(tz) => {
                    let em = empirical_measure(&tz.roots, n, k);
                    let v = phis.iter().map(|phi| linear_statistic(&em, phi)).collect::<Result<Vec<f64>>>()?;
                    Ok((Some(v), tz.resamples > 0))
                }
                Err(Error::Degenerate(_)) => Ok((None, true)),
                Err(e) => Err(Error::Trial {
                    context: format!("n = {n}, trial = {t}"),
                    source: Box::new(e),
                }),
            }
        })
        .collect();
    let mut values = vec![Vec::with_capacity(mc.trials); phis.len()];
    let mut resampled = 0;
    for o in outcomes {
        let (v, r) = o?;
        resampled += r as usize;
        if let Some(v) = v {
            for (col, x) in values.iter_mut().zip(v) {
                col.push(x);
            }
        }
    }
    let kept = values.first().map_or(0, |v| v.len());
    if 2 * resampled > mc.trials || kept < 2 {
        return Err(Error::ExcessiveResampling {
            resampled,
            trials: mc.trials,
        });
    }
    Ok(phis
        .iter()
        .zip(&values)
        .map(|(phi, v)| {
            let est = Estimate::from_samples(v);
            MetricReport {
                statistic: format!("expected-measure[{}]", phi.name()),
                value: est.mean,
                stderr: Some(est.stderr),
                n,
                trials: kept,
                seed: Some(mc.seed),
            }
        })
        .collect())
}

/// `<alpha_n, phi>` for a one-variable basis, with the `dd^c` pairing moved
/// onto `phi`. `refine` multiplies the angular node count and tightens the
/// radial tolerance.
pub fn alpha_n_statistic_with(basis: &EnsembleBasis, phi: &TestFunction, refine: usize) -> Result<f64> {
    if basis.frame.dim != 1 || phi.dim() != 1 {
        return Err(Error::Unsupported("alpha_n is implemented for one variable only".into()));
    }
    if basis.n == 0 {
        return Err(Error::InvalidArgument("alpha_n needs degree n >= 1".into()));
    }
    phi.validate()?;
    let refine = refine.max(1);
    let base = match basis.set.metric {
        Metric::Flat => phi.at_infinity(),
        Metric::FubiniStudy => fs_integral(|z| phi.eval(&[z])),
    };
    let nf = basis.n as f64;
    let angles = trapezoid_angles((8 * basis.n + 64) * refine);
    let tol = 1e-11 / (refine * refine) as f64;
    let u = |z: Complex64| basis.log_bergman_diagonal(&[z]) / (2.0 * nf);
    // circle average of u * lap(phi) on the circle `center + rho e^{i theta}`
    let ring = |center: Complex64, rho: f64| -> f64 {
        angles
            .iter()
            .map(|&(t, w)| {
                let z = center + Complex64::from_polar(rho, t);
                w * u(z) * phi.laplacian(z).unwrap_or(0.0)
            })
            .sum()
    };
    // (1/2 pi) int u lap(phi) dA = int ring(r) r dr = int ring(e^s) e^{2 s} ds
    let pairing = match phi.laplacian_support() {
        Support::Plane => {
            let f = |s: f64| ring(Complex64::new(0.0, 0.0), s.exp()) * (2.0 * s).exp();
            let cuts = [-40.0, -6.0, -2.0, 0.0, 2.0, 6.0, 40.0];
            cuts.windows(2).map(|w| integrate(f, w[0], w[1], tol / 6.0)).sum()
        }
        Support::LogAnnulus { lo, hi } => {
            integrate(|s| ring(Complex64::new(0.0, 0.0), s.exp()) * (2.0 * s).exp(), lo, hi, tol)
        }
        Support::Disc { center, radius } => {
            // rho^2 = radius^2 v, so rho d rho = radius^2 dv / 2
            integrate(|v| 0.5 * radius * radius * ring(center, radius * v.sqrt()), 0.0, 1.0, tol)
        }
    };
    Ok(base + pairing)
}

pub fn alpha_n_statistic(basis: &EnsembleBasis, phi: &TestFunction) -> Result<f64> {
    alpha_n_statistic_with(basis, phi, 1)
}

/// Smooth probability measures used by [`variance_probe`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbeMeasure {
    /// Fubini–Study probability measure pushed forward by `z -> scale z`
    FubiniStudy { scale: f64 },
    /// normalized area on `inner < |z| < outer`
    TorusBand { inner: f64, outer: f64 },
}

impl ProbeMeasure {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            ProbeMeasure::FubiniStudy { scale } => scale.is_finite() && scale > 0.0,
            ProbeMeasure::TorusBand { inner, outer } => inner.is_finite() && outer.is_finite() && 0.0 <= inner && inner < outer,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!("bad probe measure {self:?}")))
        }
    }

    /// Tensor quadrature nodes and weights (weights sum to 1).
    pub fn nodes(&self, angular: usize) -> Vec<(Complex64, f64)> {
        let angles = trapezoid_angles(angular);
        let radial: Vec<(f64, f64)> = match *self {
            ProbeMeasure::FubiniStudy { scale } => composite_gauss_legendre(16, 4, 0.0, 1.0)
                .into_iter()
                .map(|(t, w)| (scale * (t / (1.0 - t)).sqrt(), w))
                .collect(),
            ProbeMeasure::TorusBand { inner, outer } => composite_gauss_legendre(16, 2, inner * inner, outer * outer)
                .into_iter()
                .map(|(v, w)| (v.sqrt(), w / (outer * outer - inner * inner)))
                .collect(),
        };
        let mut out = Vec::with_capacity(radial.len() * angles.len());
        for &(r, wr) in &radial {
            for &(t, wt) in &angles {
                out.push((Complex64::from_polar(r, t), wr * wt));
            }
        }
        out
    }
}

/// `int u_n d(nu) - int u_n dV_FS` for one coefficient vector.
pub fn probe_value(basis: &EnsembleBasis, coeffs: &[ScaledComplex], nu: &ProbeMeasure) -> Result<f64> {
    if basis.frame.dim != 1 {
        return Err(Error::Unsupported("variance probe is implemented for one variable only".into()));
    }
    let angular = 2 * basis.n + 32;
    let integral = |nodes: Vec<(Complex64, f64)>| -> Result<f64> {
        let grid: Vec<Vec<Complex64>> = nodes.iter().map(|(z, _)| vec![*z]).collect();
        let u = quasi_potential(coeffs, basis, &grid)?;
        Ok(u.iter().zip(&nodes).map(|(v, (_, w))| v * w).sum())
    };
    let fs = ProbeMeasure::FubiniStudy { scale: 1.0 };
    Ok(integral(nu.nodes(angular))? - integral(fs.nodes(angular))?)
}

/// Sample variance of [`probe_value`] over independent trials; the stderr is
/// the delta-method standard error of the variance.
pub fn variance_probe(basis: &EnsembleBasis, dist: &DistributionSpec, nu: &ProbeMeasure, mc: &McSettings) -> Result<MetricReport> {
    if mc.trials < 2 {
        return Err(Error::InvalidArgument("variance needs at least 2 trials".into()));
    }
    nu.validate()?;
    let n = basis.n;
    let d = basis.dimension();
    let xs: Vec<f64> = (0..mc.trials)
        .into_par_iter()
        .map(|t| {
            let mut stream = rng_split(mc.seed, n as u64, t as u64);
            let a = sample_vector(dist, d, &mut stream);
            probe_value(basis, &a, nu).map_err(|e| Error::Trial {
                context: format!("n = {n}, trial = {t}"),
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let var = sample_variance(&xs);
    let count = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / count;
    let m4 = xs.iter().map(|x| (x - mean).powi(4)).sum::<f64>() / count;
    Ok(MetricReport {
        statistic: "variance-probe".into(),
        value: var,
        stderr: Some(((m4 - var * var).max(0.0) / count).sqrt()),
        n,
        trials: mc.trials,
        seed: Some(mc.seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::WeightedSet;
    use crate::basis::closed_form_basis;
    use crate::zeros::roots_univariate;
    use crate::poly::PolyUnivariate;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unity_roots(n: usize) -> RootSet {
        let mut coeffs = vec![c(0.0, 0.0); n + 1];
        coeffs[0] = c(-1.0, 0.0);
        coeffs[n] = c(1.0, 0.0);
        roots_univariate(&PolyUnivariate::from_complex(&coeffs)).unwrap()
    }

    #[test]
    fn linear_statistic_arithmetic() {
        let rs = roots_univariate(&PolyUnivariate::from_complex(&[c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])).unwrap();
        let em = empirical_measure(&rs, 2, 1);
        let v = linear_statistic(&em, &TestFunction::RadialRational).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        let one = linear_statistic(&em, &TestFunction::AngularFourier { k: 0 }).unwrap();
        assert!((one - em.total_mass()).abs() < 1e-15);
    }

    #[test]
    fn boundary_mass_uses_limit_at_infinity() {
        // z^2 + z declared with degree 3: one root at infinity
        let p = PolyUnivariate::from_complex(&[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let rs = roots_univariate(&p).unwrap();
        let em = empirical_measure(&rs, 3, 1);
        let v = linear_statistic(&em, &TestFunction::AngularFourier { k: 0 }).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn equispaced_angles() {
        for n in [4, 16, 64] {
            let ks = angular_ks(&unity_roots(n)).unwrap();
            assert!((ks - 1.0 / n as f64).abs() < 1e-9, "n {n}: {ks}");
            assert_eq!(annulus_mass(&unity_roots(n), 1e-3).unwrap(), 1.0);
        }
    }

    #[test]
    fn ks_degenerate_and_uniform() {
        assert!((ks_uniform_angles(&[0.0; 10]) - 1.0).abs() < 1e-15);
        let mut s = crate::rng::RandomStream::new(3, 0);
        let a: Vec<f64> = (0..10_000).map(|_| 2.0 * PI * s.next_uniform()).collect();
        assert!(ks_uniform_angles(&a) < 0.02);
    }

    #[test]
    fn annulus_and_radial_edges() {
        let rs = roots_univariate(&PolyUnivariate::from_complex(&[c(0.0, 0.0), c(-2.0, 0.0), c(1.0, 0.0)])).unwrap();
        assert_eq!(annulus_mass(&rs, 0.5).unwrap(), 0.0);
        assert!(annulus_mass(&rs, 0.0).is_err());
        let d = radial_cdf_distance(&unity_roots(12), RadialLaw::FubiniStudy).unwrap();
        assert!((d - 0.5).abs() < 1e-9);
    }

    #[test]
    fn alpha_n_kills_constants() {
        // the elliptic Bergman function is identically n + 1
        let basis = closed_form_basis(&WeightedSet::projective(1), 16).unwrap();
        let phi = TestFunction::Bump {
            center: [0.2, 0.1],
            radius: 0.5,
        };
        let a = alpha_n_statistic(&basis, &phi).unwrap();
        let fs = fs_integral(|z| phi.eval(&[z]));
        assert!((a - fs).abs() < 1e-8, "{a} vs {fs}");
    }

    #[test]
    fn alpha_n_is_stable_under_refinement() {
        let basis = closed_form_basis(&WeightedSet::circle(), 32).unwrap();
        for phi in [TestFunction::RadialRational, TestFunction::RadialBand { center: 0.0, width: 0.6 }] {
            let a = alpha_n_statistic_with(&basis, &phi, 1).unwrap();
            let b = alpha_n_statistic_with(&basis, &phi, 2).unwrap();
            assert!((a - b).abs() < 1e-6, "{}: {a} vs {b}", phi.name());
        }
    }

    #[test]
    fn probe_is_scale_invariant() {
        let basis = closed_form_basis(&WeightedSet::projective(1), 16).unwrap();
        let mut s = crate::rng::RandomStream::new(9, 0);
        let a = sample_vector(&DistributionSpec::complex_gaussian(), basis.dimension(), &mut s);
        let a2: Vec<ScaledComplex> = a.iter().map(|x| x.scale(2.0)).collect();
        let nu = ProbeMeasure::TorusBand { inner: 0.5, outer: 1.5 };
        let x = probe_value(&basis, &a, &nu).unwrap();
        let y = probe_value(&basis, &a2, &nu).unwrap();
        assert!((x - y).abs() < 1e-10);
        let fs = probe_value(&basis, &a, &ProbeMeasure::FubiniStudy { scale: 1.0 }).unwrap();
        assert_eq!(fs, 0.0);
    }

    #[test]
    fn probe_nodes_are_probability_rules() {
        for nu in [ProbeMeasure::FubiniStudy { scale: 2.0 }, ProbeMeasure::TorusBand { inner: 0.5, outer: 2.0 }] {
            let w: f64 = nu.nodes(40).iter().map(|p| p.1).sum();
            assert!((w - 1.0).abs() < 1e-13);
        }
    }
}
