//! Smooth test functions with closed-form Laplacians.
//!
//! Every one-variable function here extends smoothly to the point at
//! infinity of P^1, so pairing against zeros sent to infinity is well defined.

use crate::error::{Error, Result};
use crate::scaled::ScaledComplex;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TestFunction {
    /// `2^k Re(z^k) / (1 + |z|^2)^k`, equal to `cos(k theta)` on `|z| = 1`
    AngularFourier { k: u32 },
    /// `1 / (1 + |z|^2)`
    RadialRational,
    /// `(1 - |z - c|^2 / r^2)^3` inside the disc, zero outside
    Bump { center: [f64; 2], radius: f64 },
    /// `h(log|z|)` with `h(t) = (1 - (t - center)^2 / width^2)^3` on the band
    RadialBand { center: f64, width: f64 },
    /// product of two angular modes on C^2
    ProductTorus { k1: u32, k2: u32 },
}

/// Region outside of which the Laplacian vanishes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Support {
    Plane,
    Disc { center: Complex64, radius: f64 },
    /// `lo < log|z| < hi`
    LogAnnulus { lo: f64, hi: f64 },
}

fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Angular mode at a scaled point.
fn angular_mode(k: u32, z: &ScaledComplex) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if z.is_zero() {
        return 0.0;
    }
    let kf = k as f64;
    let l = z.ln_abs();
    let log_mod = kf * (LN_2 + l - softplus(2.0 * l));
    (kf * z.arg()).cos() * log_mod.exp()
}

impl TestFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            TestFunction::Bump { center, radius } => {
                if !(radius.is_finite() && *radius > 0.0) || !center.iter().all(|c| c.is_finite()) {
                    return Err(Error::InvalidArgument("bump needs a finite center and radius > 0".into()));
                }
            }
            TestFunction::RadialBand { center, width }
                if (!(width.is_finite() && *width > 0.0) || !center.is_finite()) => {
                    return Err(Error::InvalidArgument("radial band needs a finite center and width > 0".into()));
                }
            _ => {}
        }
        Ok(())
    }

    /// Number of complex variables.
    pub fn dim(&self) -> usize {
        match self {
            TestFunction::ProductTorus { .. } => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> String {
        match self {
            TestFunction::AngularFourier { k } => format!("angular-fourier({k})"),
            TestFunction::RadialRational => "radial-rational".into(),
            TestFunction::Bump { center, radius } => {
                format!("bump({}{:+}i, {radius})", center[0], center[1])
            }
            TestFunction::RadialBand { center, width } => format!("radial-band({center}, {width})"),
            TestFunction::ProductTorus { k1, k2 } => format!("product-torus({k1},{k2})"),
        }
    }

    /// Value at a scaled point; `Err` if the dimension does not match or the
    /// value is not finite.
    pub fn eval_scaled(&self, x: &[ScaledComplex]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let v = match self {
            TestFunction::AngularFourier { k } => angular_mode(*k, &x[0]),
            TestFunction::ProductTorus { k1, k2 } => angular_mode(*k1, &x[0]) * angular_mode(*k2, &x[1]),
            TestFunction::RadialRational => {
                if x[0].is_zero() {
                    1.0
                } else {
                    (-softplus(2.0 * x[0].ln_abs())).exp()
                }
            }
            TestFunction::Bump { .. } | TestFunction::RadialBand { .. } => {
                let l = x[0].ln_abs();
                if l > 700.0 {
                    // far outside every bounded support
                    0.0
                } else {
                    self.eval(&[x[0].to_complex()])
                }
            }
        };
        if !v.is_finite() {
            let at: Vec<String> = x.iter().map(|z| format!("{:?}", z.to_complex())).collect();
            return Err(Error::UndefinedTestFunction(at.join(", ")));
        }
        Ok(v)
    }

    /// Value at an ordinary point.
    pub fn eval(&self, x: &[Complex64]) -> f64 {
        match self {
            TestFunction::Bump { center, radius } => {
                let c = Complex64::new(center[0], center[1]);
                let s = (x[0] - c).norm_sqr() / (radius * radius);
                if s < 1.0 {
                    (1.0 - s).powi(3)
                } else {
                    0.0
                }
            }
            TestFunction::RadialBand { center, width } => {
                let r = x[0].norm();
                if r == 0.0 {
                    return 0.0;
                }
                let v = (r.ln() - center) / width;
                if v.abs() < 1.0 {
                    (1.0 - v * v).powi(3)
                } else {
                    0.0
                }
            }
            _ => {
                let sx: Vec<ScaledComplex> = x.iter().map(|&z| ScaledComplex::from_complex(z)).collect();
                self.eval_scaled(&sx).unwrap_or(f64::NAN)
            }
        }
    }

    /// Limit at the point at infinity of each coordinate chart.
    pub fn at_infinity(&self) -> f64 {
        match self {
            TestFunction::AngularFourier { k } => {
                if *k == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::ProductTorus { k1, k2 }
                if *k1 == 0 && *k2 == 0 => {
                    1.0
                }
            _ => 0.0,
        }
    }

    /// Euclidean Laplacian in one complex variable.
    pub fn laplacian(&self, z: Complex64) -> Result<f64> {
        let r2 = z.norm_sqr();
        Ok(match self {
            TestFunction::AngularFourier { k } => {
                if *k == 0 {
                    return Ok(0.0);
                }
                let kf = *k as f64;
                let re_zk = z.powu(*k).re;
                -4.0 * kf * (kf + 1.0) * 2f64.powi(*k as i32) * re_zk * (1.0 + r2).powf(-kf - 2.0)
            }
            TestFunction::RadialRational => 4.0 * (r2 - 1.0) / (1.0 + r2).powi(3),
            TestFunction::Bump { center, radius } => {
                let c = Complex64::new(center[0], center[1]);
                let s = (z - c).norm_sqr() / (radius * radius);
                if s < 1.0 {
                    12.0 / (radius * radius) * (1.0 - s) * (3.0 * s - 1.0)
                } else {
                    0.0
                }
            }
            TestFunction::RadialBand { center, width } => {
                if r2 == 0.0 {
                    return Ok(0.0);
                }
                let v = (0.5 * r2.ln() - center) / width;
                if v.abs() < 1.0 {
                    -6.0 * (1.0 - v * v) * (1.0 - 5.0 * v * v) / (width * width) / r2
                } else {
                    0.0
                }
            }
            TestFunction::ProductTorus { .. } => {
                return Err(Error::Unsupported("laplacian of a two-variable test function".into()))
            }
        })
    }

    /// Where the Laplacian can be nonzero.
    pub fn laplacian_support(&self) -> Support {
        match self {
            TestFunction::Bump { center, radius } => Support::Disc {
                center: Complex64::new(center[0], center[1]),
                radius: *radius,
            },
            TestFunction::RadialBand { center, width } => Support::LogAnnulus {
                lo: center - width,
                hi: center + width,
            },
            _ => Support::Plane,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_laplacian(f: &TestFunction, z: Complex64) -> f64 {
        let h = 1e-4;
        let v = |w: Complex64| f.eval(&[w]);
        (v(z + h) + v(z - h) + v(z + Complex64::new(0.0, h)) + v(z - Complex64::new(0.0, h)) - 4.0 * v(z)) / (h * h)
    }

    #[test]
    fn laplacians_match_finite_differences() {
        let fs = [
            TestFunction::AngularFourier { k: 1 },
            TestFunction::AngularFourier { k: 3 },
            TestFunction::RadialRational,
            TestFunction::Bump {
                center: [0.3, -0.2],
                radius: 0.7,
            },
            TestFunction::RadialBand {
                center: 0.1,
                width: 0.5,
            },
        ];
        let pts = [
            Complex64::new(0.4, 0.1),
            Complex64::new(-0.9, 0.6),
            Complex64::new(1.3, -0.2),
            Complex64::new(0.1, -0.5),
        ];
        for f in &fs {
            for &z in &pts {
                let exact = f.laplacian(z).unwrap();
                let fd = fd_laplacian(f, z);
                assert!((exact - fd).abs() < 1e-5 * (1.0 + exact.abs()), "{} at {z}: {exact} vs {fd}", f.name());
            }
        }
    }

    #[test]
    fn angular_mode_on_circle_and_at_infinity() {
        let f = TestFunction::AngularFourier { k: 2 };
        let z = Complex64::from_polar(1.0, 0.7);
        assert!((f.eval(&[z]) - (1.4f64).cos()).abs() < 1e-14);
        let far = ScaledComplex::from_polar_log(800.0, 0.3);
        assert!(f.eval_scaled(&[far]).unwrap().abs() < 1e-300);
        assert_eq!(TestFunction::AngularFourier { k: 0 }.at_infinity(), 1.0);
    }

    #[test]
    fn radial_rational_extremes() {
        let f = TestFunction::RadialRational;
        assert_eq!(f.eval_scaled(&[ScaledComplex::ZERO]).unwrap(), 1.0);
        assert!((f.eval(&[Complex64::new(0.0, 1.0)]) - 0.5).abs() < 1e-15);
        assert_eq!(f.eval_scaled(&[ScaledComplex::from_polar_log(1e5, 0.0)]).unwrap(), 0.0);
    }

    #[test]
    fn product_torus_is_product() {
        let f = TestFunction::ProductTorus { k1: 1, k2: 2 };
        let z = [
            ScaledComplex::from_complex(Complex64::from_polar(1.0, 0.3)),
            ScaledComplex::from_complex(Complex64::from_polar(1.0, -0.4)),
        ];
        assert!((f.eval_scaled(&z).unwrap() - 0.3f64.cos() * 0.8f64.cos()).abs() < 1e-14);
        assert!(f.eval_scaled(&z[..1]).is_err());
    }
}
