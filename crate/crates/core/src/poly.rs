//! Monomial-frame polynomials and their evaluation.
//!
//! Evaluation at `x` first rescales: with `l = ln|x|` and
//! `M = max_j (ln|c_j| + j l)`, the terms `c_j x^j e^-M` have modulus at most
//! one and `x / |x|` lies on the unit circle. A compensated Horner sweep runs
//! on that normalized polynomial, so neither huge coefficients nor huge
//! arguments overflow.

use crate::scaled::ScaledComplex;
use num_complex::Complex64;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let z = s - a;
    (s, (a - (s - z)) + (b - z))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `a * b` as `p + e` with `p` the rounded product.
#[inline]
fn two_prod_complex(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (p1, e1) = two_prod(a.re, b.re);
    let (p2, e2) = two_prod(a.im, b.im);
    let (p3, e3) = two_prod(a.re, b.im);
    let (p4, e4) = two_prod(a.im, b.re);
    let (re, e5) = two_sum(p1, -p2);
    let (im, e6) = two_sum(p3, p4);
    (
        Complex64::new(re, im),
        Complex64::new(e1 - e2 + e5, e3 + e4 + e6),
    )
}

#[inline]
fn two_sum_complex(a: Complex64, b: Complex64) -> (Complex64, Complex64) {
    let (re, e1) = two_sum(a.re, b.re);
    let (im, e2) = two_sum(a.im, b.im);
    (Complex64::new(re, im), Complex64::new(e1, e2))
}

/// Compensated Horner evaluation of `sum c[j] w^j`.
pub fn horner_compensated(c: &[Complex64], w: Complex64) -> Complex64 {
    let Some((last, rest)) = c.split_last() else {
        return Complex64::new(0.0, 0.0);
    };
    let mut s = *last;
    let mut err = Complex64::new(0.0, 0.0);
    for &cj in rest.iter().rev() {
        let (p, pe) = two_prod_complex(s, w);
        let (ns, se) = two_sum_complex(p, cj);
        s = ns;
        err = err * w + (pe + se);
    }
    s + err
}

/// Plain Horner evaluation of `sum c[j] w^j`.
pub fn horner(c: &[Complex64], w: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &cj| acc * w + cj)
}

#[inline]
fn jlog(j: usize, l: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        j as f64 * l
    }
}

/// Univariate polynomial `sum c_j z^j` with scaled coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyUnivariate {
    pub coeffs: Vec<ScaledComplex>,
}

/// Normalized form of a polynomial around one evaluation point.
pub struct Normalized {
    /// `c_j x^j e^-M`, all of modulus at most one.
    pub terms: Vec<Complex64>,
    /// unit-modulus direction of `x`
    pub w: Complex64,
    /// the reference `M` (already including the powers of `|x|`)
    pub log_ref: f64,
}

impl PolyUnivariate {
    pub fn new(coeffs: Vec<ScaledComplex>) -> Self {
        PolyUnivariate { coeffs }
    }

    pub fn from_complex(coeffs: &[Complex64]) -> Self {
        PolyUnivariate {
            coeffs: coeffs.iter().map(|&c| ScaledComplex::from_complex(c)).collect(),
        }
    }

    /// Nominal degree (`len - 1`).
    pub fn nominal_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Index of the highest nonzero coefficient.
    pub fn top(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn normalized_at(&self, x: ScaledComplex) -> Normalized {
        if x.is_zero() {
            let c0 = self.coeffs.first().copied().unwrap_or(ScaledComplex::ZERO);
            let mut terms = vec![Complex64::new(0.0, 0.0); self.coeffs.len()];
            if !terms.is_empty() {
                terms[0] = if c0.is_zero() { Complex64::new(0.0, 0.0) } else { c0.mant };
            }
            return Normalized {
                terms,
                w: Complex64::new(1.0, 0.0),
                log_ref: if c0.is_zero() { f64::NEG_INFINITY } else { c0.log_scale },
            };
        }
        let l = x.ln_abs();
        let w = x.mant / x.mant.norm();
        let logs: Vec<f64> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| c.ln_abs() + jlog(j, l))
            .collect();
        let log_ref = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let terms = self
            .coeffs
            .iter()
            .zip(&logs)
            .map(|(c, &lg)| {
                if c.is_zero() {
                    Complex64::new(0.0, 0.0)
                } else {
                    (c.mant / c.mant.norm()) * (lg - log_ref).exp()
                }
            })
            .collect();
        Normalized { terms, w, log_ref }
    }

    /// `p(x)` via compensated Horner on the normalized polynomial.
    pub fn eval(&self, x: ScaledComplex) -> ScaledComplex {
        let nz = self.normalized_at(x);
        if nz.log_ref == f64::NEG_INFINITY {
            return ScaledComplex::ZERO;
        }
        ScaledComplex::new(horner_compensated(&nz.terms, nz.w), nz.log_ref)
    }

    pub fn eval_complex(&self, x: Complex64) -> ScaledComplex {
        self.eval(ScaledComplex::from_complex(x))
    }

    /// `|p(x)| / sum |c_j| |x|^j`.
    pub fn relative_residual(&self, x: ScaledComplex) -> f64 {
        let nz = self.normalized_at(x);
        if nz.log_ref == f64::NEG_INFINITY {
            return 0.0;
        }
        let denom: f64 = nz.terms.iter().map(|t| t.norm()).sum();
        horner_compensated(&nz.terms, nz.w).norm() / denom
    }

    /// Smallest relative residual that f64 exponent arithmetic can resolve at
    /// `x`. Negligible unless coefficient or root log-moduli reach ~1e6.
    pub fn residual_floor(&self, x: ScaledComplex) -> f64 {
        let l = if x.is_zero() { 0.0 } else { x.ln_abs().abs() };
        let nz = self.normalized_at(x);
        let lr = if nz.log_ref.is_finite() { nz.log_ref.abs() } else { 0.0 };
        let (mut num, mut den) = (0.0, 0.0);
        for (j, (c, t)) in self.coeffs.iter().zip(&nz.terms).enumerate() {
            if c.is_zero() {
                continue;
            }
            let a = t.norm();
            num += a * (c.ln_abs().abs() + j as f64 * l + lr);
            den += a;
        }
        if den > 0.0 {
            4.0 * f64::EPSILON * num / den
        } else {
            0.0
        }
    }

    /// Newton correction `p(x) / p'(x)` in scaled form.
    pub fn newton_correction(&self, x: ScaledComplex) -> Option<ScaledComplex> {
        let nz = self.normalized_at(x);
        if x.is_zero() {
            let c0 = self.coeffs.first()?;
            let c1 = self.coeffs.get(1)?;
            if c1.is_zero() {
                return None;
            }
            let r = ScaledComplex::new(c0.mant / c1.mant, c0.log_scale - c1.log_scale);
            return Some(r);
        }
        let p = horner_compensated(&nz.terms, nz.w);
        let dterms: Vec<Complex64> = nz
            .terms
            .iter()
            .enumerate()
            .map(|(j, t)| t * j as f64)
            .collect();
        let dp = horner_compensated(&dterms, nz.w);
        if dp.norm() == 0.0 {
            return None;
        }
        // p'(x) = (e^M / x) sum j c~_j w^j
        Some(ScaledComplex::new(p / dp * x.mant, x.log_scale))
    }
}

/// Bivariate polynomial with coefficient `c[j1][j2]` of `z1^j1 z2^j2`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyBivariate {
    pub coeffs: Vec<Vec<Complex64>>,
}

impl PolyBivariate {
    pub fn zeros(deg1: usize, deg2: usize) -> Self {
        PolyBivariate {
            coeffs: vec![vec![Complex64::new(0.0, 0.0); deg2 + 1]; deg1 + 1],
        }
    }

    pub fn from_terms(terms: &[((usize, usize), Complex64)]) -> Self {
        let d1 = terms.iter().map(|t| t.0 .0).max().unwrap_or(0);
        let d2 = terms.iter().map(|t| t.0 .1).max().unwrap_or(0);
        let mut p = PolyBivariate::zeros(d1, d2);
        for &((a, b), c) in terms {
            p.coeffs[a][b] += c;
        }
        p
    }

    pub fn deg1(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn deg2(&self) -> usize {
        self.coeffs[0].len() - 1
    }

    /// Highest power of `z2` with a nonzero coefficient.
    pub fn formal_deg2(&self) -> usize {
        (0..=self.deg2())
            .rev()
            .find(|&k| self.coeffs.iter().any(|row| row[k] != Complex64::new(0.0, 0.0)))
            .unwrap_or(0)
    }

    /// Highest total degree with a nonzero coefficient.
    pub fn total_degree(&self) -> usize {
        let mut t = 0;
        for (a, row) in self.coeffs.iter().enumerate() {
            for (b, c) in row.iter().enumerate() {
                if *c != Complex64::new(0.0, 0.0) {
                    t = t.max(a + b);
                }
            }
        }
        t
    }

    /// Coefficient polynomial (in `z1`) of `z2^k`.
    pub fn coefficient_in_z2(&self, k: usize) -> Vec<Complex64> {
        self.coeffs.iter().map(|row| row[k]).collect()
    }

    /// The univariate polynomial `z2 -> p(z1, z2)`.
    pub fn fiber(&self, z1: Complex64) -> Vec<Complex64> {
        (0..=self.deg2())
            .map(|k| horner_compensated(&self.coefficient_in_z2(k), z1))
            .collect()
    }

    /// Value, gradient and the absolute-value majorant `sum |c| |z^J|`.
    pub fn eval_with_gradient(&self, z1: Complex64, z2: Complex64) -> (Complex64, Complex64, Complex64, f64) {
        let mut majorant = 0.0;
        let (a1, a2) = (z1.norm(), z2.norm());
        // rows in z1, inner Horner in z2
        let mut rows_v = Vec::with_capacity(self.coeffs.len());
        let mut rows_d2 = Vec::with_capacity(self.coeffs.len());
        for row in &self.coeffs {
            rows_v.push(horner_compensated(row, z2));
            let drow: Vec<Complex64> = row.iter().enumerate().skip(1).map(|(k, c)| c * k as f64).collect();
            rows_d2.push(horner_compensated(&drow, z2));
        }
        for (j, row) in self.coeffs.iter().enumerate() {
            let m: f64 = row
                .iter()
                .enumerate()
                .map(|(k, c)| c.norm() * a2.powi(k as i32))
                .sum();
            majorant += m * a1.powi(j as i32);
        }
        let v = horner_compensated(&rows_v, z1);
        let d2 = horner_compensated(&rows_d2, z1);
        let drows: Vec<Complex64> = rows_v.iter().enumerate().skip(1).map(|(j, r)| r * j as f64).collect();
        let d1 = horner_compensated(&drows, z1);
        (v, d1, d2, majorant)
    }

    pub fn eval(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let rows: Vec<Complex64> = self.coeffs.iter().map(|row| horner_compensated(row, z2)).collect();
        horner_compensated(&rows, z1)
    }

    /// `|p(z)| / sum |c_J| |z^J|`.
    pub fn relative_residual(&self, z1: Complex64, z2: Complex64) -> f64 {
        let (v, _, _, majorant) = self.eval_with_gradient(z1, z2);
        if majorant == 0.0 {
            0.0
        } else {
            v.norm() / majorant
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_horner_beats_cancellation() {
        // (z - 1)^8 expanded, evaluated near the root
        let binom = [1.0, -8.0, 28.0, -56.0, 70.0, -56.0, 28.0, -8.0, 1.0];
        let c: Vec<Complex64> = binom.iter().rev().map(|&b| Complex64::new(b, 0.0)).collect();
        let x = Complex64::new(1.01, 0.0);
        let exact = (x.re - 1.0).powi(8);
        let v = horner_compensated(&c, x);
        assert!(((v.re - exact) / exact).abs() < 1e-10, "{v}");
        let plain = horner(&c, x);
        assert!(((plain.re - exact) / exact).abs() > 1e-6);
    }

    #[test]
    fn scaled_eval_handles_extreme_arguments() {
        // p(z) = 1 + z^200 at |z| = e^10 is about e^2000
        let mut coeffs = vec![ScaledComplex::ZERO; 201];
        coeffs[0] = ScaledComplex::from_complex(Complex64::new(1.0, 0.0));
        coeffs[200] = ScaledComplex::from_complex(Complex64::new(1.0, 0.0));
        let p = PolyUnivariate::new(coeffs);
        let v = p.eval(ScaledComplex::from_polar_log(10.0, 0.0));
        assert!((v.ln_abs() - 2000.0).abs() < 1e-12);
        let corr = p.newton_correction(ScaledComplex::from_polar_log(10.0, 0.0)).unwrap();
        // p/p' = x/200 essentially
        assert!((corr.ln_abs() - (10.0 - 200f64.ln())).abs() < 1e-9);
    }

    #[test]
    fn bivariate_gradient() {
        // p = z1^2 z2 + 3 z2^2 - z1
        let p = PolyBivariate::from_terms(&[
            ((2, 1), Complex64::new(1.0, 0.0)),
            ((0, 2), Complex64::new(3.0, 0.0)),
            ((1, 0), Complex64::new(-1.0, 0.0)),
        ]);
        let (z1, z2) = (Complex64::new(0.3, -0.2), Complex64::new(-1.1, 0.4));
        let (v, d1, d2, _) = p.eval_with_gradient(z1, z2);
        assert!((v - (z1 * z1 * z2 + 3.0 * z2 * z2 - z1)).norm() < 1e-14);
        assert!((d1 - (2.0 * z1 * z2 - 1.0)).norm() < 1e-14);
        assert!((d2 - (z1 * z1 + 6.0 * z2)).norm() < 1e-14);
        assert_eq!(p.total_degree(), 3);
        assert_eq!(p.formal_deg2(), 2);
    }
}
