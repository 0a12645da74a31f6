//! Complex numbers carried as `mantissa * exp(log_scale)`.
//!
//! Heavy-tailed coefficient laws produce moduli like `exp(1e4)`, and the
//! roots of the resulting polynomials sit at comparably extreme radii.
//! Everything that can leave the f64 exponent range travels in this form.

use num_complex::Complex64;
use std::ops::Mul;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    pub mant: Complex64,
    pub log_scale: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        mant: Complex64::new(0.0, 0.0),
        log_scale: f64::NEG_INFINITY,
    };

    pub fn new(mant: Complex64, log_scale: f64) -> Self {
        ScaledComplex { mant, log_scale }.normalized()
    }

    pub fn from_complex(z: Complex64) -> Self {
        ScaledComplex::new(z, 0.0)
    }

    /// `exp(log_modulus + i arg)`.
    pub fn from_polar_log(log_modulus: f64, arg: f64) -> Self {
        ScaledComplex {
            mant: Complex64::from_polar(1.0, arg),
            log_scale: log_modulus,
        }
    }

    /// Rewrites so that `|mant| == 1` (or the value is the canonical zero).
    pub fn normalized(self) -> Self {
        let r = self.mant.norm();
        if r == 0.0 || self.log_scale == f64::NEG_INFINITY {
            return ScaledComplex::ZERO;
        }
        if !r.is_finite() {
            return self;
        }
        ScaledComplex {
            mant: self.mant / r,
            log_scale: self.log_scale + r.ln(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.log_scale == f64::NEG_INFINITY || self.mant == Complex64::new(0.0, 0.0)
    }

    /// `ln |z|`; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.log_scale + self.mant.norm().ln()
        }
    }

    pub fn arg(&self) -> f64 {
        self.mant.arg()
    }

    /// Plain complex value; may overflow to infinity or underflow to zero.
    pub fn to_complex(&self) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.mant * self.log_scale.exp()
    }

    pub fn conj(&self) -> Self {
        ScaledComplex {
            mant: self.mant.conj(),
            log_scale: self.log_scale,
        }
    }

    pub fn scale(&self, factor: f64) -> Self {
        ScaledComplex::new(self.mant * factor, self.log_scale)
    }

    /// Multiplies by `exp(delta)`.
    pub fn shift_log(&self, delta: f64) -> Self {
        ScaledComplex {
            mant: self.mant,
            log_scale: self.log_scale + delta,
        }
    }

    /// `mant * exp(log_scale - reference)` as a plain complex number.
    pub fn relative_to(&self, reference: f64) -> Complex64 {
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        self.mant * (self.log_scale - reference).exp()
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;

    fn mul(self, rhs: ScaledComplex) -> ScaledComplex {
        if self.is_zero() || rhs.is_zero() {
            return ScaledComplex::ZERO;
        }
        ScaledComplex::new(self.mant * rhs.mant, self.log_scale + rhs.log_scale)
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        ScaledComplex::from_complex(z)
    }
}

/// Sums a list of scaled values, returning the result in scaled form.
pub fn scaled_sum(terms: impl IntoIterator<Item = ScaledComplex>) -> ScaledComplex {
    let terms: Vec<ScaledComplex> = terms.into_iter().collect();
    let reference = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| t.log_scale)
        .fold(f64::NEG_INFINITY, f64::max);
    if reference == f64::NEG_INFINITY {
        return ScaledComplex::ZERO;
    }
    let s: Complex64 = terms.iter().map(|t| t.relative_to(reference)).sum();
    ScaledComplex::new(s, reference)
}

/// `ln sum exp(x_i)` without overflow.
pub fn log_sum_exp(values: impl IntoIterator<Item = f64>) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_extremes() {
        let z = Complex64::new(3.0, -4.0);
        let s = ScaledComplex::from_complex(z);
        assert!((s.ln_abs() - 5f64.ln()).abs() < 1e-15);
        assert!((s.to_complex() - z).norm() < 1e-14);

        let huge = ScaledComplex::from_polar_log(1e4, 0.3);
        assert_eq!(huge.ln_abs(), 1e4);
        assert!(huge.to_complex().re.is_infinite());
        let prod = huge * ScaledComplex::from_polar_log(-1e4, -0.3);
        assert!((prod.to_complex() - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn sums_across_scales() {
        let a = ScaledComplex::from_polar_log(800.0, 0.0);
        let b = ScaledComplex::from_polar_log(800.0 + 2f64.ln(), 0.0);
        let s = scaled_sum([a, b, ScaledComplex::ZERO]);
        assert!((s.ln_abs() - (800.0 + 3f64.ln())).abs() < 1e-12);
        assert!((log_sum_exp([1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(Vec::<f64>::new()), f64::NEG_INFINITY);
    }
}
