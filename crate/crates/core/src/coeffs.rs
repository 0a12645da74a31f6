//! Coefficient laws for the random ensembles.
//!
//! Every law has a bounded density and a closed-form tail
//! `P{log|z| > R}`. The log-Pareto mixture puts mass `1 - mix` uniformly on
//! the unit disc and gives the rest a modulus `exp(T)` with `T` Pareto on
//! `[1, inf)`, so its tail is exactly `mix * R^-rho` for `R >= 1`.

use crate::error::{Error, Result};
use crate::mc::Estimate;
use crate::quad::integrate;
use crate::rng::{RandomStream, Unit};
use crate::scaled::{log_sum_exp, scaled_sum, ScaledComplex};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;
use std::f64::consts::{E, PI, SQRT_2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScalarField {
    Real,
    Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CoeffKind {
    ComplexGaussian,
    RealGaussian,
    UniformDisc { radius: f64 },
    LogPareto { rho: f64, mix: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistributionSpec {
    pub kind: CoeffKind,
    pub field: ScalarField,
}

/// A real number or `+inf`, kept apart from large floats.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Extended {
    Finite(f64),
    PosInfinity,
}

impl Extended {
    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(*v),
            Extended::PosInfinity => None,
        }
    }
}

impl DistributionSpec {
    pub fn complex_gaussian() -> Self {
        DistributionSpec {
            kind: CoeffKind::ComplexGaussian,
            field: ScalarField::Complex,
        }
    }

    pub fn real_gaussian() -> Self {
        DistributionSpec {
            kind: CoeffKind::RealGaussian,
            field: ScalarField::Real,
        }
    }

    pub fn uniform_disc(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidArgument(format!("uniform-disc radius {radius}")));
        }
        Ok(DistributionSpec {
            kind: CoeffKind::UniformDisc { radius },
            field: ScalarField::Complex,
        })
    }

    pub fn log_pareto(rho: f64, mix: f64) -> Result<Self> {
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(Error::InvalidArgument(format!("log-pareto rho {rho}")));
        }
        if !(mix > 0.0 && mix <= 1.0) {
            return Err(Error::InvalidArgument(format!("log-pareto mix {mix} not in (0, 1]")));
        }
        Ok(DistributionSpec {
            kind: CoeffKind::LogPareto { rho, mix },
            field: ScalarField::Complex,
        })
    }

    pub fn with_field(mut self, field: ScalarField) -> Self {
        self.field = field;
        self
    }

    pub fn is_real(&self) -> bool {
        self.field == ScalarField::Real
    }

    /// Supremum of the density (w.r.t. area on C, or length on R).
    pub fn density_bound(&self) -> f64 {
        let real = self.is_real();
        match self.kind {
            CoeffKind::ComplexGaussian if !real => 1.0 / PI,
            CoeffKind::ComplexGaussian | CoeffKind::RealGaussian => {
                if real {
                    1.0 / (2.0 * PI).sqrt()
                } else {
                    1.0 / PI
                }
            }
            CoeffKind::UniformDisc { radius } => {
                if real {
                    1.0 / (2.0 * radius)
                } else {
                    1.0 / (PI * radius * radius)
                }
            }
            CoeffKind::LogPareto { rho, mix } => {
                if real {
                    ((1.0 - mix) / 2.0).max(mix * rho / (2.0 * E))
                } else {
                    ((1.0 - mix) / PI).max(mix * rho / (2.0 * PI * E * E))
                }
            }
        }
    }

    /// Exact `P{log|z| > r}`.
    pub fn tail_probability(&self, r: f64) -> f64 {
        let real = self.is_real();
        let t = r.exp();
        match self.kind {
            CoeffKind::ComplexGaussian | CoeffKind::RealGaussian => {
                if real {
                    erfc(t / SQRT_2)
                } else {
                    (-(2.0 * r).exp()).exp()
                }
            }
            CoeffKind::UniformDisc { radius } => disc_tail(t, radius, real),
            CoeffKind::LogPareto { rho, mix } => {
                let pareto = if r >= 1.0 { r.powf(-rho) } else { 1.0 };
                mix * pareto + (1.0 - mix) * disc_tail(t, 1.0, real)
            }
        }
    }

    /// `int log(1 + |a|) dP(a)`.
    ///
    /// Finiteness for log-Pareto is read off `rho` (divergent iff `rho <= 1`);
    /// quadrature only ever runs on convergent integrals.
    pub fn ic_integral(&self) -> Extended {
        let real = self.is_real();
        const TOL: f64 = 1e-13;
        let disc_part = |radius: f64| {
            if real {
                integrate(|x| (1.0 + x).ln(), 0.0, radius, TOL) / radius
            } else {
                integrate(|r| (1.0 + r).ln() * 2.0 * r, 0.0, radius, TOL) / (radius * radius)
            }
        };
        match self.kind {
            CoeffKind::ComplexGaussian | CoeffKind::RealGaussian => {
                let v = if real {
                    2.0 * integrate(
                        |x| (1.0 + x).ln() * (-0.5 * x * x).exp() / (2.0 * PI).sqrt(),
                        0.0,
                        40.0,
                        TOL,
                    )
                } else {
                    integrate(|r| (1.0 + r).ln() * 2.0 * r * (-r * r).exp(), 0.0, 12.0, TOL)
                };
                Extended::Finite(v)
            }
            CoeffKind::UniformDisc { radius } => Extended::Finite(disc_part(radius)),
            CoeffKind::LogPareto { rho, mix } => {
                if rho <= 1.0 {
                    return Extended::PosInfinity;
                }
                // log(1 + e^T) = T + log(1 + e^-T); E[T] = rho / (rho - 1).
                // The remainder is integrated over v = T^-rho in (0, 1].
                let remainder = integrate(
                    |v: f64| {
                        if v <= 0.0 {
                            return 0.0;
                        }
                        let t = v.powf(-1.0 / rho);
                        (-t).exp().ln_1p()
                    },
                    0.0,
                    1.0,
                    TOL,
                );
                let pareto_part = rho / (rho - 1.0) + remainder;
                Extended::Finite(mix * pareto_part + (1.0 - mix) * disc_part(1.0))
            }
        }
    }
}

fn disc_tail(t: f64, radius: f64, real: bool) -> f64 {
    if t >= radius {
        0.0
    } else if real {
        1.0 - t / radius
    } else {
        1.0 - (t / radius).powi(2)
    }
}

fn sample_from_unit(dist: &DistributionSpec, u: &Unit) -> ScaledComplex {
    let real = dist.is_real();
    let disc = |radius: f64, a: f64, b: f64| -> ScaledComplex {
        if real {
            ScaledComplex::from_complex(Complex64::new(radius * (2.0 * a - 1.0), 0.0))
        } else {
            ScaledComplex::from_complex(Complex64::from_polar(radius * a.sqrt(), 2.0 * PI * b))
        }
    };
    match dist.kind {
        CoeffKind::ComplexGaussian | CoeffKind::RealGaussian => {
            let (a, b) = (u.uniform(0), u.uniform(1));
            if real {
                let x = (-2.0 * a.ln()).sqrt() * (2.0 * PI * b).cos();
                ScaledComplex::from_complex(Complex64::new(x, 0.0))
            } else {
                ScaledComplex::from_complex(Complex64::from_polar((-a.ln()).sqrt(), 2.0 * PI * b))
            }
        }
        CoeffKind::UniformDisc { radius } => disc(radius, u.uniform(0), u.uniform(1)),
        CoeffKind::LogPareto { rho, mix } => {
            let branch = u.uniform(0);
            if branch < mix {
                let t = u.uniform(1).powf(-1.0 / rho);
                let arg = if real {
                    if u.uniform(2) < 0.5 {
                        0.0
                    } else {
                        PI
                    }
                } else {
                    2.0 * PI * u.uniform(2)
                };
                let z = ScaledComplex::from_polar_log(t, arg);
                if real {
                    // keep the imaginary part exactly zero
                    ScaledComplex {
                        mant: Complex64::new(z.mant.re.signum(), 0.0),
                        log_scale: t,
                    }
                } else {
                    z
                }
            } else {
                disc(1.0, u.uniform(1), u.uniform(2))
            }
        }
    }
}

/// One variate; consumes exactly one unit of `stream`.
pub fn sample_coeff(dist: &DistributionSpec, stream: &mut RandomStream) -> ScaledComplex {
    let u = stream.next_unit();
    sample_from_unit(dist, &u)
}

/// `d` i.i.d. variates; advances the counter by exactly `d`.
pub fn sample_vector(dist: &DistributionSpec, d: usize, stream: &mut RandomStream) -> Vec<ScaledComplex> {
    (0..d).map(|_| sample_coeff(dist, stream)).collect()
}

/// `(1/n) log ||a||` for a coefficient vector.
pub fn log_norm_rate_of(coeffs: &[ScaledComplex], n: usize) -> f64 {
    let log_norm = 0.5 * log_sum_exp(coeffs.iter().map(|c| 2.0 * c.ln_abs()));
    log_norm / n as f64
}

/// For each `(n, d_n)`, samples `a^(n)` and returns `(1/n) log ||a^(n)||`.
pub fn log_norm_rate(dist: &DistributionSpec, dims: &[(usize, usize)], stream: &mut RandomStream) -> Vec<f64> {
    dims.iter()
        .map(|&(n, d)| {
            let a = sample_vector(dist, d, stream);
            log_norm_rate_of(&a, n)
        })
        .collect()
}

/// Monte Carlo estimate of `E |log |<a, u>||` for a unit vector `u`.
pub fn log_inner_moment(
    dist: &DistributionSpec,
    u: &[Complex64],
    trials: usize,
    stream: &mut RandomStream,
) -> Result<Estimate> {
    let norm = u.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("u is not a unit vector (norm {norm})")));
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let samples: Vec<f64> = (0..trials)
        .map(|_| {
            let a = sample_vector(dist, u.len(), stream);
            let inner = scaled_sum(
                a.iter()
                    .zip(u)
                    .map(|(ai, ui)| *ai * ScaledComplex::from_complex(ui.conj())),
            );
            inner.ln_abs().abs()
        })
        .collect();
    Ok(Estimate::from_samples(&samples))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(rho: f64, mix: f64) -> DistributionSpec {
        DistributionSpec::log_pareto(rho, mix).unwrap()
    }

    #[test]
    fn tail_closed_forms() {
        assert!((lp(3.0, 0.5).tail_probability(2.0) - 0.0625).abs() < 1e-15);
        let g = DistributionSpec::complex_gaussian();
        for r in [-1.0, 0.0, 0.5, 1.0] {
            assert!((g.tail_probability(r) - (-(2.0f64 * r).exp()).exp()).abs() < 1e-15);
        }
        for d in [g, DistributionSpec::real_gaussian(), lp(0.7, 0.3), DistributionSpec::uniform_disc(2.0).unwrap()] {
            assert!(d.tail_probability(1e6) < 1e-3);
            let mut prev = 1.0;
            for k in 0..60 {
                let p = d.tail_probability(-3.0 + 0.25 * k as f64);
                assert!(p <= prev + 1e-15);
                prev = p;
            }
        }
        assert_eq!(DistributionSpec::uniform_disc(1.0).unwrap().tail_probability(0.1), 0.0);
    }

    #[test]
    fn ic_threshold_is_symbolic() {
        assert_eq!(lp(0.7, 0.5).ic_integral(), Extended::PosInfinity);
        assert_eq!(lp(1.0, 0.5).ic_integral(), Extended::PosInfinity);
        assert!(lp(1.0001, 0.5).ic_integral().is_finite());
        let v = DistributionSpec::uniform_disc(1.0).unwrap().ic_integral().finite().unwrap();
        assert!(v > 0.0 && v <= 2f64.ln());
    }

    #[test]
    fn uniform_disc_support() {
        let d = DistributionSpec::uniform_disc(1.0).unwrap();
        let mut s = RandomStream::new(5, 0);
        for _ in 0..10_000 {
            assert!(sample_coeff(&d, &mut s).to_complex().norm() <= 1.0);
        }
    }

    #[test]
    fn real_field_has_zero_imaginary_part() {
        let mut s = RandomStream::new(9, 0);
        for d in [DistributionSpec::real_gaussian(), lp(2.0, 0.5).with_field(ScalarField::Real)] {
            for _ in 0..1000 {
                let z = sample_coeff(&d, &mut s);
                assert_eq!(z.mant.im, 0.0);
            }
        }
    }

    #[test]
    fn vector_reproducible_and_counter_exact() {
        let d = DistributionSpec::complex_gaussian();
        let mut s1 = RandomStream::new(7, 0);
        let mut s2 = RandomStream::new(7, 0);
        let a = sample_vector(&d, 16, &mut s1);
        let b = sample_vector(&d, 16, &mut s2);
        assert_eq!(a, b);
        assert_eq!(s1.counter, 16);
        let mut s3 = RandomStream::new(7, 0);
        assert_eq!(sample_vector(&d, 1, &mut s3)[0], a[0]);
        // a later counter reproduces the tail of the same stream
        let mut s4 = RandomStream::new(7, 10);
        assert_eq!(sample_vector(&d, 6, &mut s4), a[10..].to_vec());
    }

    #[test]
    fn log_norm_rate_arithmetic() {
        // ||a|| = e at n = 1
        let a = vec![ScaledComplex::from_complex(Complex64::new(E, 0.0))];
        assert!((log_norm_rate_of(&a, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn non_unit_inner_vector_rejected() {
        let mut s = RandomStream::new(0, 0);
        let u = vec![Complex64::new(1.0, 1e-5)];
        assert!(log_inner_moment(&DistributionSpec::complex_gaussian(), &u, 10, &mut s).is_err());
    }
}
