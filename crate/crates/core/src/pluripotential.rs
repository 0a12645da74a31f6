//! Extremal functions and equilibrium measures of the catalogued weighted
//! sets.
//!
//! Affine kinds use the `log+` normalization. Kinds carrying the
//! Fubini–Study weight are normalized relative to it, so that the extremal
//! function vanishes on `K`: for the unit circle inside P^1 this is
//! `log+|z| - (1/2) log(1 + |z|^2) + (1/2) log 2`.

use crate::basis::{closed_form_basis, gram_basis, EnsembleBasis, Metric, Polytope, SetKind, WeightedSet};
use crate::error::{Error, Result};
use crate::quad::{gauss_legendre_on, integrate, trapezoid_angles};
use crate::rng::RandomStream;
use crate::scaled::ScaledComplex;
use crate::stats::TestFunction;
use num_complex::Complex64;
use std::f64::consts::{LN_2, PI};
use std::fmt::Write as _;

/// Weighted sets with a catalogued extremal function.
#[derive(Clone, Debug, PartialEq)]
pub enum ExtremalKind {
    /// unit circle, flat weight
    Circle,
    /// unit circle in P^1 with the Fubini–Study weight
    CircleFs,
    /// unit polydisc in C^m
    Polydisc { m: usize },
    /// unit torus with box Newton polytope `[0, l_1] x ... x [0, l_m]`
    BoxPolytope { lengths: Vec<usize> },
    /// unit ball (sphere) in C^m
    Ball { m: usize },
    /// all of P^m
    ProjectiveFs { m: usize },
}

impl ExtremalKind {
    pub fn for_set(set: &WeightedSet) -> Result<ExtremalKind> {
        if !set.weight.is_zero() {
            return Err(Error::Unsupported(format!("no closed-form extremal function for {}", set.name())));
        }
        let unsupported = || Error::Unsupported(format!("no closed-form extremal function for {}", set.name()));
        Ok(match (&set.kind, set.metric) {
            (SetKind::Circle | SetKind::WeightedCircle, Metric::Flat) => ExtremalKind::Circle,
            (SetKind::Circle | SetKind::WeightedCircle, Metric::FubiniStudy) => ExtremalKind::CircleFs,
            (SetKind::SphereBall { m: 1 }, Metric::Flat) => ExtremalKind::Circle,
            (SetKind::Torus, Metric::Flat) => ExtremalKind::BoxPolytope { lengths: vec![1, 1] },
            (SetKind::Polytope { polytope, m }, Metric::Flat) => match polytope {
                Polytope::Simplex => ExtremalKind::Polydisc { m: *m },
                Polytope::Box(l) => ExtremalKind::BoxPolytope { lengths: l.clone() },
            },
            (SetKind::SphereBall { m }, Metric::Flat) => ExtremalKind::Ball { m: *m },
            (SetKind::ProjectiveFs { m }, Metric::FubiniStudy) => ExtremalKind::ProjectiveFs { m: *m },
            _ => return Err(unsupported()),
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ExtremalKind::Circle | ExtremalKind::CircleFs => 1,
            ExtremalKind::Polydisc { m } | ExtremalKind::Ball { m } | ExtremalKind::ProjectiveFs { m } => *m,
            ExtremalKind::BoxPolytope { lengths } => lengths.len(),
        }
    }

    pub fn name(&self) -> String {
        match self {
            ExtremalKind::Circle => "circle".into(),
            ExtremalKind::CircleFs => "circle-fs".into(),
            ExtremalKind::Polydisc { m } => format!("polydisc(m={m})"),
            ExtremalKind::BoxPolytope { lengths } => format!("box-polytope({lengths:?})"),
            ExtremalKind::Ball { m } => format!("ball(m={m})"),
            ExtremalKind::ProjectiveFs { m } => format!("projective-fs(m={m})"),
        }
    }

    /// Formula for the extremal function, as text.
    pub fn formula(&self) -> &'static str {
        match self {
            ExtremalKind::Circle => "log+|z|",
            ExtremalKind::CircleFs => "log+|z| - (1/2) log(1 + |z|^2) + (1/2) log 2",
            ExtremalKind::Polydisc { .. } => "max_j log+|z_j|",
            ExtremalKind::BoxPolytope { .. } => "sum_j l_j log+|z_j|",
            ExtremalKind::Ball { .. } => "log+ ||z||",
            ExtremalKind::ProjectiveFs { .. } => "0",
        }
    }

    /// Equilibrium measure, as text.
    pub fn measure(&self) -> &'static str {
        match self {
            ExtremalKind::Circle | ExtremalKind::CircleFs => "d theta / 2 pi on |z| = 1",
            ExtremalKind::Polydisc { .. } | ExtremalKind::BoxPolytope { .. } => "normalized Haar measure on the unit torus",
            ExtremalKind::Ball { .. } => "normalized surface measure on the unit sphere",
            ExtremalKind::ProjectiveFs { .. } => "Fubini–Study volume",
        }
    }
}

fn log_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// Closed-form extremal function at `x`.
pub fn extremal_closed_form(kind: &ExtremalKind, x: &[Complex64]) -> Result<f64> {
    if x.len() != kind.dim() {
        return Err(Error::DimensionMismatch {
            expected: kind.dim(),
            got: x.len(),
        });
    }
    Ok(match kind {
        ExtremalKind::Circle => log_plus(x[0].norm()),
        ExtremalKind::CircleFs => {
            let r = x[0].norm();
            log_plus(r) - 0.5 * r.mul_add(r, 1.0).ln() + 0.5 * LN_2
        }
        ExtremalKind::Polydisc { .. } => x.iter().map(|z| log_plus(z.norm())).fold(0.0, f64::max),
        ExtremalKind::BoxPolytope { lengths } => x
            .iter()
            .zip(lengths)
            .map(|(z, &l)| l as f64 * log_plus(z.norm()))
            .sum(),
        ExtremalKind::Ball { .. } => log_plus(x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()),
        ExtremalKind::ProjectiveFs { .. } => 0.0,
    })
}

/// Extremal function as a closed form or as the Bergman estimate at a fixed
/// degree.
#[derive(Clone, Debug)]
pub enum ExtremalFunction {
    ClosedForm(ExtremalKind),
    BergmanEstimate(EnsembleBasis),
}

impl ExtremalFunction {
    pub fn eval(&self, x: &[Complex64]) -> Result<f64> {
        match self {
            ExtremalFunction::ClosedForm(kind) => extremal_closed_form(kind, x),
            ExtremalFunction::BergmanEstimate(basis) => {
                if x.len() != basis.frame.dim {
                    return Err(Error::DimensionMismatch {
                        expected: basis.frame.dim,
                        got: x.len(),
                    });
                }
                Ok(bergman_value(basis, x))
            }
        }
    }
}

fn bergman_value(basis: &EnsembleBasis, x: &[Complex64]) -> f64 {
    basis.log_bergman_diagonal(x) / (2.0 * basis.n.max(1) as f64)
}

/// Grid values of the Bergman estimate with the sup-deviation from the
/// closed form (when one exists).
#[derive(Clone, Debug)]
pub struct BergmanEstimate {
    pub n: usize,
    pub values: Vec<f64>,
    pub sup_error: Option<f64>,
}

/// `(1/2n) log B_n` on a grid, using the basis given.
pub fn extremal_bergman_estimate(basis: &EnsembleBasis, grid: &[Vec<Complex64>]) -> Result<BergmanEstimate> {
    let kind = ExtremalKind::for_set(&basis.set).ok();
    let mut values = Vec::with_capacity(grid.len());
    let mut sup: f64 = 0.0;
    for x in grid {
        if x.len() != basis.frame.dim {
            return Err(Error::DimensionMismatch {
                expected: basis.frame.dim,
                got: x.len(),
            });
        }
        let v = bergman_value(basis, x);
        if let Some(k) = &kind {
            sup = sup.max((v - extremal_closed_form(k, x)?).abs());
        }
        values.push(v);
    }
    Ok(BergmanEstimate {
        n: basis.n,
        values,
        sup_error: kind.map(|_| sup),
    })
}

/// Bergman estimate for a weighted set, building the closed-form basis when
/// available and the Gram basis otherwise.
pub fn extremal_bergman_estimate_for(set: &WeightedSet, n: usize, grid: &[Vec<Complex64>]) -> Result<BergmanEstimate> {
    let basis = match closed_form_basis(set, n) {
        Ok(b) => b,
        Err(Error::Unsupported(_)) => gram_basis(set, n)?,
        Err(e) => return Err(e),
    };
    extremal_bergman_estimate(&basis, grid)
}

/// Grid values as CSV rows `x, y, V` (one-variable grids).
pub fn grid_csv(grid: &[Vec<Complex64>], values: &[f64]) -> String {
    let mut out = String::from("x,y,V\n");
    for (x, v) in grid.iter().zip(values) {
        let _ = writeln!(out, "{:e},{:e},{:e}", x[0].re, x[0].im, v);
    }
    out
}

/// `max_s (1/n) log ||s(x)||_{h_n}` over sections that are normalized on
/// the nodes of `K`; `-inf` for an empty list.
pub fn siciak_lower_bound(basis: &EnsembleBasis, sections: &[Vec<ScaledComplex>], x: &[Complex64]) -> Result<f64> {
    let n = basis.n;
    if n == 0 {
        return Err(Error::InvalidArgument("degree must be positive".into()));
    }
    let rule = basis.set.quadrature(n)?;
    let nf = n as f64;
    let mut best = f64::NEG_INFINITY;
    for s in sections {
        let mut sup = f64::NEG_INFINITY;
        for i in 0..rule.len() {
            let node = rule.point(i);
            let v = basis.evaluate_section(s, node)?;
            sup = sup.max(v.log_weighted_norm - nf * basis.set.q(node));
        }
        if sup > 1e-9 {
            return Err(Error::NotNormalized(sup.exp()));
        }
        let v = basis.evaluate_section(s, x)?;
        best = best.max(v.log_weighted_norm / nf);
    }
    Ok(best)
}

/// Section coefficients rescaled so that the sup of the weighted norm over
/// the nodes of `K` is one.
pub fn normalize_on_k(basis: &EnsembleBasis, coeffs: &[ScaledComplex]) -> Result<Vec<ScaledComplex>> {
    let rule = basis.set.quadrature(basis.n)?;
    let nf = basis.n as f64;
    let mut sup = f64::NEG_INFINITY;
    for i in 0..rule.len() {
        let node = rule.point(i);
        let v = basis.evaluate_section(coeffs, node)?;
        sup = sup.max(v.log_weighted_norm - nf * basis.set.q(node));
    }
    if !sup.is_finite() {
        return Err(Error::Degenerate("section vanishes on every node of K".into()));
    }
    Ok(coeffs.iter().map(|c| c.shift_log(-sup)).collect())
}

const TOL: f64 = 1e-12;

/// `(1/2 pi) int_0^{2 pi} f(theta) d theta`, adaptively.
pub fn circle_average(f: impl Fn(f64) -> f64) -> f64 {
    integrate(f, 0.0, 2.0 * PI, TOL) / (2.0 * PI)
}

/// `int f dV_FS` over P^1 in the affine chart, adaptively.
pub fn fs_integral(f: impl Fn(Complex64) -> f64) -> f64 {
    // t = r^2 / (1 + r^2) is uniform under the Fubini–Study probability measure
    integrate(
        |t| {
            if t >= 1.0 {
                return 0.0;
            }
            let r = (t / (1.0 - t)).sqrt();
            circle_average(|theta| f(Complex64::from_polar(r, theta)))
        },
        0.0,
        1.0,
        TOL,
    )
}

/// Fixed tensor rule for two-variable integrands: Gauss–Legendre in the
/// radial variables times a 48-point trapezoid per angle.
fn two_variable_rule(kind: &ExtremalKind) -> Vec<([Complex64; 2], f64)> {
    let angles = trapezoid_angles(48);
    let mut out = Vec::new();
    let push_radii = |r1: f64, r2: f64, w: f64, out: &mut Vec<([Complex64; 2], f64)>| {
        for &(a1, w1) in &angles {
            for &(a2, w2) in &angles {
                out.push(([Complex64::from_polar(r1, a1), Complex64::from_polar(r2, a2)], w * w1 * w2));
            }
        }
    };
    match kind {
        ExtremalKind::Polydisc { .. } | ExtremalKind::BoxPolytope { .. } => push_radii(1.0, 1.0, 1.0, &mut out),
        ExtremalKind::Ball { .. } => {
            for (t, w) in gauss_legendre_on(40, 0.0, 1.0) {
                push_radii(t.sqrt(), (1.0 - t).sqrt(), w, &mut out);
            }
        }
        ExtremalKind::ProjectiveFs { .. } => {
            // the moment map sends the Fubini–Study volume to the uniform law on the simplex
            for (p1, w1) in gauss_legendre_on(40, 0.0, 1.0) {
                for (s, w2) in gauss_legendre_on(40, 0.0, 1.0) {
                    let p2 = (1.0 - p1) * s;
                    let p0 = 1.0 - p1 - p2;
                    let w = 2.0 * w1 * w2 * (1.0 - p1);
                    push_radii((p1 / p0).sqrt(), (p2 / p0).sqrt(), w, &mut out);
                }
            }
        }
        _ => {}
    }
    out
}

/// `int phi d(mu_eq)` for a catalogued kind.
pub fn equilibrium_integral(kind: &ExtremalKind, phi: &TestFunction) -> Result<f64> {
    phi.validate()?;
    if phi.dim() != kind.dim() {
        return Err(Error::DimensionMismatch {
            expected: kind.dim(),
            got: phi.dim(),
        });
    }
    if kind.dim() == 1 {
        return Ok(match kind {
            ExtremalKind::ProjectiveFs { .. } => fs_integral(|z| phi.eval(&[z])),
            _ => circle_average(|theta| phi.eval(&[Complex64::from_polar(1.0, theta)])),
        });
    }
    if kind.dim() != 2 {
        return Err(Error::Unsupported(format!("equilibrium integral on {}", kind.name())));
    }
    Ok(two_variable_rule(kind)
        .iter()
        .map(|(x, w)| w * phi.eval(x))
        .sum())
}

/// `count` i.i.d. points from the equilibrium measure, `dim` coordinates
/// per point.
pub fn equilibrium_sample(kind: &ExtremalKind, count: usize, stream: &mut RandomStream) -> Result<Vec<Complex64>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    let m = kind.dim();
    let mut out = Vec::with_capacity(count * m);
    for _ in 0..count {
        let u = stream.next_unit();
        let angle = |i: usize| 2.0 * PI * u.uniform(i);
        match kind {
            ExtremalKind::Circle | ExtremalKind::CircleFs => out.push(Complex64::from_polar(1.0, angle(0))),
            ExtremalKind::Polydisc { .. } | ExtremalKind::BoxPolytope { .. } => {
                for k in 0..m {
                    out.push(Complex64::from_polar(1.0, angle(k)));
                }
            }
            ExtremalKind::Ball { m: 1 } => out.push(Complex64::from_polar(1.0, angle(0))),
            ExtremalKind::Ball { m: 2 } => {
                let t = u.uniform(2);
                out.push(Complex64::from_polar(t.sqrt(), angle(0)));
                out.push(Complex64::from_polar((1.0 - t).sqrt(), angle(1)));
            }
            ExtremalKind::ProjectiveFs { m: 1 } => {
                let v = u.uniform(1);
                out.push(Complex64::from_polar((v / (1.0 - v)).sqrt(), angle(0)));
            }
            ExtremalKind::ProjectiveFs { m: 2 } => {
                // uniform point of the simplex from two exponential spacings
                let e0 = -u.uniform(2).ln();
                let e1 = -u.uniform(3).ln();
                let u2 = stream.next_unit();
                let e2 = -u2.uniform(0).ln();
                out.push(Complex64::from_polar((e1 / e0).sqrt(), angle(0)));
                out.push(Complex64::from_polar((e2 / e0).sqrt(), angle(1)));
            }
            _ => return Err(Error::Unsupported(format!("sampler for {}", kind.name()))),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mc::{median, Estimate};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn closed_form_values() {
        let v = extremal_closed_form(&ExtremalKind::Polydisc { m: 2 }, &[c(2.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert_eq!(v, LN_2);
        let v = extremal_closed_form(&ExtremalKind::Ball { m: 2 }, &[c(0.3, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!(v, 0.0);
        let v = extremal_closed_form(&ExtremalKind::CircleFs, &[Complex64::from_polar(1.0, 0.4)]).unwrap();
        assert!(v.abs() < 1e-15);
        assert!(extremal_closed_form(&ExtremalKind::Circle, &[c(1.0, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn weighted_circle_has_no_closed_form() {
        let set = WeightedSet::weighted_circle(crate::basis::CircleWeight::Cosine { amplitude: 0.5 });
        assert!(ExtremalKind::for_set(&set).is_err());
    }

    #[test]
    fn circle_fs_bergman_on_circle() {
        let n = 128;
        let grid: Vec<Vec<Complex64>> = (0..16).map(|k| vec![Complex64::from_polar(1.0, k as f64 * 0.4)]).collect();
        let est = extremal_bergman_estimate_for(&WeightedSet::circle_fs(), n, &grid).unwrap();
        let expected = ((n + 1) as f64).ln() / (2.0 * n as f64);
        for v in &est.values {
            assert!((v - expected).abs() < 1e-12);
        }
        assert!((est.sup_error.unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.0190).abs() < 1e-3);
    }

    #[test]
    fn torus_bergman_product() {
        let n = 64;
        let grid = vec![vec![Complex64::from_polar(1.0, 0.2), Complex64::from_polar(1.0, -1.1)]];
        let est = extremal_bergman_estimate_for(&WeightedSet::torus(), n, &grid).unwrap();
        let expected = ((n + 1) as f64).ln() / n as f64;
        assert!((est.values[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn siciak_monomial() {
        let n = 12;
        let basis = closed_form_basis(&WeightedSet::circle_fs(), n).unwrap();
        let mut a = vec![ScaledComplex::ZERO; n + 1];
        a[n] = ScaledComplex::from_complex(c(1.0, 0.0));
        let x = [c(2.0, 0.0)];
        let bound = siciak_lower_bound(&basis, &[a.clone()], &x).unwrap();
        let closed = extremal_closed_form(&ExtremalKind::CircleFs, &x).unwrap();
        assert!((bound - closed).abs() < 1e-9);
        assert!((bound - (LN_2 - 0.5 * 2.5f64.ln())).abs() < 1e-12);
        let on_k = siciak_lower_bound(&basis, &[a.clone()], &[Complex64::from_polar(1.0, 0.3)]).unwrap();
        assert!(on_k <= 1e-9);
        assert_eq!(siciak_lower_bound(&basis, &[], &x).unwrap(), f64::NEG_INFINITY);
        let doubled: Vec<ScaledComplex> = a.iter().map(|z| z.shift_log(LN_2)).collect();
        assert!(matches!(siciak_lower_bound(&basis, &[doubled], &x), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn equilibrium_integrals() {
        let cosine = TestFunction::AngularFourier { k: 1 };
        assert!(equilibrium_integral(&ExtremalKind::Circle, &cosine).unwrap().abs() < 1e-12);
        let rr = equilibrium_integral(&ExtremalKind::ProjectiveFs { m: 1 }, &TestFunction::RadialRational).unwrap();
        assert!((rr - 0.5).abs() < 1e-10);
        let one = TestFunction::ProductTorus { k1: 0, k2: 0 };
        for kind in [
            ExtremalKind::BoxPolytope { lengths: vec![1, 1] },
            ExtremalKind::Ball { m: 2 },
            ExtremalKind::ProjectiveFs { m: 2 },
        ] {
            assert!((equilibrium_integral(&kind, &one).unwrap() - 1.0).abs() < 1e-10, "{}", kind.name());
        }
    }

    #[test]
    fn fs_sampler_median_radius() {
        let mut s = RandomStream::new(11, 0);
        let pts = equilibrium_sample(&ExtremalKind::ProjectiveFs { m: 1 }, 100_000, &mut s).unwrap();
        let r: Vec<f64> = pts.iter().map(|z| z.norm()).collect();
        assert!((median(&r) - 1.0).abs() < 0.02);
        let circle = equilibrium_sample(&ExtremalKind::Circle, 100, &mut s).unwrap();
        assert!(circle.iter().all(|z| (z.norm() - 1.0).abs() < 1e-15));
    }

    #[test]
    fn sampler_matches_integrator() {
        let cases = [
            (ExtremalKind::ProjectiveFs { m: 1 }, TestFunction::RadialRational),
            (ExtremalKind::ProjectiveFs { m: 1 }, TestFunction::Bump { center: [0.5, 0.5], radius: 1.0 }),
            (ExtremalKind::ProjectiveFs { m: 1 }, TestFunction::RadialBand { center: 0.0, width: 1.0 }),
            (ExtremalKind::Circle, TestFunction::Bump { center: [1.0, 0.0], radius: 0.8 }),
            (ExtremalKind::Ball { m: 2 }, TestFunction::ProductTorus { k1: 0, k2: 0 }),
        ];
        for (i, (kind, phi)) in cases.iter().enumerate() {
            let mut s = RandomStream::new(5, i as u64);
            let count = 200_000;
            let pts = equilibrium_sample(kind, count, &mut s).unwrap();
            let m = kind.dim();
            let vals: Vec<f64> = pts.chunks(m).map(|x| phi.eval(x)).collect();
            let est = Estimate::from_samples(&vals);
            let exact = equilibrium_integral(kind, phi).unwrap();
            assert!(est.agrees_with(exact, 4.0) || est.stderr == 0.0 && (est.mean - exact).abs() < 1e-12, "{} {}: {} vs {exact}", kind.name(), phi.name(), est.mean);
        }
    }
}
