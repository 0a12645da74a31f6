//! Zeros of random sections: univariate roots, simultaneous zeros of two
//! bivariate polynomials, empirical zero measures and quasi-potentials.
//!
//! Univariate roots come from Aberth–Ehrlich iteration started on circles
//! read off the Newton polygon. Iterates are stored as [`ScaledComplex`] and
//! updated multiplicatively, `z <- z (1 - delta)`, where `delta` is a
//! dimensionless correction; this keeps roots at radii like `exp(1e4)` exact
//! in exponent.

use crate::basis::EnsembleBasis;
use crate::error::{Error, Result};
use crate::poly::{horner_compensated, PolyBivariate, PolyUnivariate};
use crate::scaled::ScaledComplex;
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::PI;
use std::fmt::Write as _;

const EPS: f64 = f64::EPSILON;

/// Iteration controls for the root finders.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RootOptions {
    /// certified relative residual
    pub tol_root: f64,
    pub max_iters: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions {
            tol_root: 1e-8,
            max_iters: 200,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RootFlag {
    Ok,
    IllConditioned,
    Duplicate,
    LiftFailed,
}

impl RootFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            RootFlag::Ok => "ok",
            RootFlag::IllConditioned => "ill-conditioned",
            RootFlag::Duplicate => "duplicate",
            RootFlag::LiftFailed => "lift-failed",
        }
    }
}

/// Certified zeros of a univariate polynomial (`dim = 1`) or of a pair of
/// bivariate polynomials (`dim = 2`).
#[derive(Clone, Debug)]
pub struct RootSet {
    pub dim: usize,
    /// `dim` coordinates per point
    pub points: Vec<ScaledComplex>,
    pub residuals: Vec<f64>,
    pub flags: Vec<RootFlag>,
    /// declared degree before deflation (univariate) or Bézout bound
    pub nominal_degree: usize,
    /// number of affine zeros
    pub deflated_degree: usize,
    /// zeros lost to the chart boundary
    pub at_infinity: usize,
    /// intersections found but dropped (failed lift or duplicates)
    pub excluded: usize,
    pub iterations: usize,
}

impl RootSet {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[ScaledComplex] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    /// Univariate roots as plain complex numbers (may be infinite for
    /// extreme radii).
    pub fn complex_points(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.to_complex()).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }

    /// One row per zero: `re, im[, re2, im2], residual, flag`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        if self.dim == 1 {
            out.push_str("re,im,residual,flag\n");
        } else {
            for k in 1..=self.dim {
                let _ = write!(out, "re{k},im{k},");
            }
            out.push_str("residual,flag\n");
        }
        for i in 0..self.len() {
            for c in self.point(i) {
                let z = c.to_complex();
                let _ = write!(out, "{:e},{:e},", z.re, z.im);
            }
            let _ = writeln!(out, "{:e},{}", self.residuals[i], self.flags[i].as_str());
        }
        out
    }
}

/// Upper convex hull of `(j, y_j)` over the finite entries.
fn upper_hull(y: &[f64]) -> Vec<usize> {
    let mut hull: Vec<usize> = Vec::new();
    for j in 0..y.len() {
        if !y[j].is_finite() {
            continue;
        }
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // drop b if it lies on or below the segment a -> j
            let cross = (b - a) as f64 * (y[j] - y[a]) - (j - a) as f64 * (y[b] - y[a]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    hull
}

/// Starting points on Newton-polygon circles.
fn initial_guesses(q: &PolyUnivariate) -> Vec<ScaledComplex> {
    let d = q.nominal_degree();
    let logs: Vec<f64> = q.coeffs.iter().map(|c| c.ln_abs()).collect();
    let hull = upper_hull(&logs);
    let mut z = Vec::with_capacity(d);
    for w in hull.windows(2) {
        let (i, k) = (w[0], w[1]);
        let count = k - i;
        let log_r = (logs[i] - logs[k]) / count as f64;
        for t in 0..count {
            let angle = 2.0 * PI * t as f64 / count as f64 + 2.0 * PI * i as f64 / d as f64 + 0.4;
            z.push(ScaledComplex::from_polar_log(log_r, angle));
        }
    }
    z
}

/// `1 / (1 - r)` for `r = b / a` with the exponent gap clamped.
fn aberth_term(a: &ScaledComplex, b: &ScaledComplex) -> Complex64 {
    let gap = (b.log_scale - a.log_scale).clamp(-700.0, 700.0);
    let r = b.mant / a.mant * gap.exp();
    Complex64::new(1.0, 0.0) / (Complex64::new(1.0, 0.0) - r)
}

struct Probe {
    residual: f64,
    /// `p(x) / (x p'(x))`, `None` when `p'` vanishes
    nu: Option<Complex64>,
}

fn probe(q: &PolyUnivariate, x: &ScaledComplex) -> Probe {
    let nz = q.normalized_at(*x);
    let p = horner_compensated(&nz.terms, nz.w);
    let denom: f64 = nz.terms.iter().map(|t| t.norm()).sum();
    let dterms: Vec<Complex64> = nz.terms.iter().enumerate().map(|(j, t)| t * j as f64).collect();
    let dp = horner_compensated(&dterms, nz.w);
    let nu = if dp.norm() > 0.0 { Some(p / dp) } else { None };
    Probe {
        residual: if denom > 0.0 { p.norm() / denom } else { 0.0 },
        nu,
    }
}

/// Aberth–Ehrlich on a polynomial with nonzero constant and leading terms.
fn aberth(q: &PolyUnivariate, opts: &RootOptions) -> (Vec<ScaledComplex>, Vec<bool>, usize) {
    let mut z = initial_guesses(q);
    let d = z.len();
    let mut done = vec![false; d];
    let mut sweeps = 0;
    // backward-error stop; the Newton polish afterwards sharpens further
    let stop = 4.0 * (d + 1) as f64 * EPS;
    for _ in 0..opts.max_iters {
        sweeps += 1;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let pr = probe(q, &z[i]);
            if pr.residual <= stop || pr.residual <= q.residual_floor(z[i]) {
                done[i] = true;
                continue;
            }
            let Some(nu) = pr.nu else {
                z[i] = z[i] * ScaledComplex::from_complex(Complex64::from_polar(1.0 + 1e-3, 0.1));
                continue;
            };
            let t: Complex64 = (0..d).filter(|&j| j != i).map(|j| aberth_term(&z[i], &z[j])).sum();
            let mut step = nu / (Complex64::new(1.0, 0.0) - nu * t);
            if !step.is_finite() {
                step = if t.norm() > 0.0 { -Complex64::new(1.0, 0.0) / t } else { Complex64::new(0.5, 0.0) };
            }
            let factor = Complex64::new(1.0, 0.0) - step;
            if factor.norm() > 0.0 && factor.is_finite() {
                z[i] = z[i] * ScaledComplex::from_complex(factor);
            }
            if step.norm() <= 2.0 * EPS {
                done[i] = true;
            }
        }
        if done.iter().all(|&x| x) {
            break;
        }
    }
    (z, done, sweeps)
}

/// Newton refinement against `p`; keeps the best iterate.
fn polish(p: &PolyUnivariate, z: ScaledComplex, steps: usize) -> (ScaledComplex, f64) {
    let mut best = z;
    let mut best_res = probe(p, &z).residual;
    let mut cur = z;
    for _ in 0..steps {
        let Some(nu) = probe(p, &cur).nu else { break };
        let factor = Complex64::new(1.0, 0.0) - nu;
        if !(factor.norm() > 0.0 && factor.is_finite()) {
            break;
        }
        cur = cur * ScaledComplex::from_complex(factor);
        let r = probe(p, &cur).residual;
        if r < best_res {
            best = cur;
            best_res = r;
        }
        if nu.norm() <= EPS {
            break;
        }
    }
    (best, best_res)
}

/// All roots of `p` with certified relative residuals.
pub fn roots_univariate(p: &PolyUnivariate) -> Result<RootSet> {
    roots_univariate_with(p, &RootOptions::default())
}

pub fn roots_univariate_with(p: &PolyUnivariate, opts: &RootOptions) -> Result<RootSet> {
    let nominal = p.nominal_degree();
    if nominal == 0 {
        return Err(Error::DegreeZero);
    }
    let top = p
        .top()
        .ok_or_else(|| Error::Degenerate("polynomial is identically zero".into()))?;
    if top == 0 {
        return Err(Error::DegreeZero);
    }
    let low = p.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0);
    let q = PolyUnivariate::new(p.coeffs[low..=top].to_vec());
    let mut points = vec![ScaledComplex::ZERO; low];
    let mut residuals = vec![0.0; low];
    let mut iterations = 0;
    if top > low {
        let (z, _, sweeps) = aberth(&q, opts);
        iterations = sweeps;
        let mut bad = Vec::new();
        for (i, zi) in z.into_iter().enumerate() {
            let (zp, _) = polish(&q, zi, 3);
            let res = p.relative_residual(zp);
            if !(res < opts.tol_root.max(p.residual_floor(zp))) {
                bad.push(low + i);
            }
            points.push(zp);
            residuals.push(res);
        }
        if !bad.is_empty() {
            return Err(Error::NoConvergence {
                iterations,
                unconverged: bad,
            });
        }
    }
    Ok(RootSet {
        dim: 1,
        flags: vec![RootFlag::Ok; points.len()],
        points,
        residuals,
        nominal_degree: nominal,
        deflated_degree: top,
        at_infinity: nominal - top,
        excluded: 0,
        iterations,
    })
}

fn max_abs(p: &PolyBivariate) -> f64 {
    p.coeffs.iter().flatten().map(|c| c.norm()).fold(0.0, f64::max)
}

/// Sylvester matrix of two univariate polynomials given low-to-high.
fn sylvester(f: &[Complex64], g: &[Complex64]) -> DMatrix<Complex64> {
    let (a, b) = (f.len() - 1, g.len() - 1);
    let size = a + b;
    let mut s = DMatrix::zeros(size, size);
    for r in 0..b {
        for (k, c) in f.iter().rev().enumerate() {
            s[(r, r + k)] = *c;
        }
    }
    for r in 0..a {
        for (k, c) in g.iter().rev().enumerate() {
            s[(b + r, r + k)] = *c;
        }
    }
    s
}

/// Resultant in `z2`, as a polynomial in `z1` (coefficients low-to-high).
fn resultant_z2(p: &PolyBivariate, q: &PolyBivariate) -> Result<Vec<Complex64>> {
    let (a, b) = (p.formal_deg2(), q.formal_deg2());
    if a == 0 && b == 0 {
        return Err(Error::Degenerate("neither polynomial involves z2".into()));
    }
    let bound_fiber = b * p.deg1() + a * q.deg1();
    let bound_bezout = p.total_degree() * q.total_degree();
    let degree = bound_fiber.min(bound_bezout);
    let count = degree + 1;
    let mut values = Vec::with_capacity(count);
    for k in 0..count {
        let z1 = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / count as f64);
        let f: Vec<Complex64> = p.fiber(z1)[..=a].to_vec();
        let g: Vec<Complex64> = q.fiber(z1)[..=b].to_vec();
        let det = if a == 0 {
            f[0].powu(b as u32)
        } else if b == 0 {
            g[0].powu(a as u32)
        } else {
            sylvester(&f, &g).lu().determinant()
        };
        values.push(det);
    }
    let scale = max_abs(p).powi(b as i32) * max_abs(q).powi(a as i32);
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if !(peak > 1e-10 * scale) {
        return Err(Error::Degenerate(format!(
            "resultant vanishes identically (peak {peak:e}, scale {scale:e})"
        )));
    }
    // inverse DFT at the roots of unity
    let coeffs = (0..count)
        .map(|j| {
            let s: Complex64 = values
                .iter()
                .enumerate()
                .map(|(k, v)| v * Complex64::from_polar(1.0, -2.0 * PI * (j * k) as f64 / count as f64))
                .sum();
            s / count as f64
        })
        .collect();
    Ok(coeffs)
}

struct Candidate {
    z: [Complex64; 2],
    residual: f64,
    jacobian_ratio: f64,
}

fn pair_residual(p: &PolyBivariate, q: &PolyBivariate, z: [Complex64; 2]) -> f64 {
    p.relative_residual(z[0], z[1]).max(q.relative_residual(z[0], z[1]))
}

/// 2x2 Newton on `(p, q)`.
fn newton_pair(p: &PolyBivariate, q: &PolyBivariate, start: [Complex64; 2]) -> Candidate {
    let mut z = start;
    let mut best = start;
    let mut best_res = pair_residual(p, q, z);
    let mut jr = 0.0;
    for _ in 0..12 {
        let (pv, p1, p2, pm) = p.eval_with_gradient(z[0], z[1]);
        let (qv, q1, q2, qm) = q.eval_with_gradient(z[0], z[1]);
        let det = p1 * q2 - p2 * q1;
        let scale = (p1.norm() + p2.norm()) * (q1.norm() + q2.norm());
        jr = if scale > 0.0 { det.norm() / scale } else { 0.0 };
        if det.norm() == 0.0 || !(pm > 0.0 && qm > 0.0) {
            break;
        }
        let dz1 = (pv * q2 - qv * p2) / det;
        let dz2 = (qv * p1 - pv * q1) / det;
        z = [z[0] - dz1, z[1] - dz2];
        if !(z[0].is_finite() && z[1].is_finite()) {
            break;
        }
        let r = pair_residual(p, q, z);
        if r < best_res {
            best = z;
            best_res = r;
        }
        if best_res <= 16.0 * EPS {
            break;
        }
        if dz1.norm() + dz2.norm() <= 4.0 * EPS * (1.0 + z[0].norm() + z[1].norm()) {
            break;
        }
    }
    Candidate {
        z: best,
        residual: best_res,
        jacobian_ratio: jr,
    }
}

fn fiber_roots(p: &PolyBivariate, z1: Complex64, opts: &RootOptions) -> Vec<Complex64> {
    let f = PolyUnivariate::from_complex(&p.fiber(z1));
    match roots_univariate_with(&f, opts) {
        Ok(rs) => rs.complex_points(),
        Err(_) => Vec::new(),
    }
}

/// Simultaneous zeros of two bivariate polynomials of degree at most `n`.
pub fn common_zeros_bivariate(p: &PolyBivariate, q: &PolyBivariate, n: usize) -> Result<RootSet> {
    common_zeros_bivariate_with(p, q, n, &RootOptions::default())
}

pub fn common_zeros_bivariate_with(
    p: &PolyBivariate,
    q: &PolyBivariate,
    n: usize,
    opts: &RootOptions,
) -> Result<RootSet> {
    if n > 24 {
        return Err(Error::InvalidArgument(format!("bivariate degree {n} exceeds the cap of 24")));
    }
    let bezout = p.total_degree() * q.total_degree();
    let mut res = resultant_z2(p, q)?;
    let peak = res.iter().map(|c| c.norm()).fold(0.0, f64::max);
    while res.len() > 1 && res.last().unwrap().norm() <= 1e-11 * peak {
        res.pop();
    }
    let true_degree = res.len() - 1;
    let at_infinity_res = bezout.saturating_sub(true_degree);
    let mut points = Vec::new();
    let mut residuals = Vec::new();
    let mut flags = Vec::new();
    let mut excluded = 0;
    let mut iterations = 0;
    if true_degree > 0 {
        let rpoly = PolyUnivariate::from_complex(&res);
        // the resultant only seeds z1; the pair is certified after polishing
        let loose = RootOptions {
            tol_root: 1e-6,
            ..*opts
        };
        let rs = roots_univariate_with(&rpoly, &loose)?;
        iterations = rs.iterations;
        let z1s = rs.complex_points();
        // cluster nearby resultant roots; each cluster of size mu lifts to mu points
        let mut used = vec![false; z1s.len()];
        let mut accepted: Vec<Candidate> = Vec::new();
        for i in 0..z1s.len() {
            if used[i] {
                continue;
            }
            let tol = 1e-5 * (1.0 + z1s[i].norm());
            let members: Vec<usize> = (i..z1s.len())
                .filter(|&j| !used[j] && (z1s[j] - z1s[i]).norm() <= tol)
                .collect();
            for &j in &members {
                used[j] = true;
            }
            let mu = members.len();
            let mut seeds: Vec<[Complex64; 2]> = Vec::new();
            for &j in &members {
                for z2 in fiber_roots(p, z1s[j], opts).into_iter().chain(fiber_roots(q, z1s[j], opts)) {
                    seeds.push([z1s[j], z2]);
                }
            }
            // cheapest first: polish seeds in order of their unpolished residual
            let mut ranked: Vec<(f64, [Complex64; 2])> = seeds.into_iter().map(|s| (pair_residual(p, q, s), s)).collect();
            ranked.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut taken = 0;
            for (_, s) in ranked {
                if taken == mu {
                    break;
                }
                let c = newton_pair(p, q, s);
                if !(c.residual < opts.tol_root) {
                    continue;
                }
                // polishing must not walk to the intersection of another resultant root
                let attached = members
                    .iter()
                    .any(|&j| (c.z[0] - z1s[j]).norm() <= 1e-6 * (1.0 + z1s[j].norm()));
                let dup = accepted.iter().any(|a| {
                    (a.z[0] - c.z[0]).norm() + (a.z[1] - c.z[1]).norm()
                        <= 1e-8 * (1.0 + c.z[0].norm() + c.z[1].norm())
                });
                if attached && !dup {
                    accepted.push(c);
                    taken += 1;
                }
            }
            excluded += mu - taken;
        }
        for c in accepted {
            points.push(ScaledComplex::from_complex(c.z[0]));
            points.push(ScaledComplex::from_complex(c.z[1]));
            residuals.push(c.residual);
            flags.push(if c.jacobian_ratio < 1e-8 {
                RootFlag::IllConditioned
            } else {
                RootFlag::Ok
            });
        }
    }
    let count = flags.len();
    Ok(RootSet {
        dim: 2,
        points,
        residuals,
        flags,
        nominal_degree: bezout,
        deflated_degree: count,
        at_infinity: at_infinity_res,
        excluded,
        iterations,
    })
}

/// Normalized zero measure `n^{-k} sum delta_z`, with the boundary mass of
/// zeros at infinity.
#[derive(Clone, Debug)]
pub struct EmpiricalMeasure {
    pub dim: usize,
    pub points: Vec<ScaledComplex>,
    pub weight: f64,
    pub n: usize,
    pub k: usize,
    pub boundary_mass: f64,
}

impl EmpiricalMeasure {
    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, i: usize) -> &[ScaledComplex] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn affine_mass(&self) -> f64 {
        self.len() as f64 * self.weight
    }

    pub fn total_mass(&self) -> f64 {
        self.affine_mass() + self.boundary_mass
    }

    /// `int f d(mu)` with `f_inf` the value assigned to the boundary marker.
    pub fn integrate(&self, f: impl Fn(&[ScaledComplex]) -> f64, f_inf: f64) -> f64 {
        let s: f64 = (0..self.len()).map(|i| f(self.point(i))).sum();
        s * self.weight + if self.boundary_mass > 0.0 { self.boundary_mass * f_inf } else { 0.0 }
    }
}

pub fn empirical_measure(rs: &RootSet, n: usize, k: usize) -> EmpiricalMeasure {
    let weight = (n as f64).powi(k as i32).recip();
    EmpiricalMeasure {
        dim: rs.dim,
        points: rs.points.clone(),
        weight,
        n,
        k,
        boundary_mass: rs.at_infinity as f64 * weight,
    }
}

/// Ordinary coefficients scaled by the largest one, in both orders, when the
/// dynamic range fits in an f64.
fn plain_univariate(basis: &EnsembleBasis, b: &[ScaledComplex]) -> Option<(Vec<Complex64>, Vec<Complex64>, f64)> {
    if basis.frame.dim != 1 {
        return None;
    }
    let l = b.iter().filter(|c| !c.is_zero()).map(|c| c.ln_abs()).fold(f64::NEG_INFINITY, f64::max);
    if !l.is_finite() {
        return None;
    }
    let mut c = vec![Complex64::new(0.0, 0.0); basis.frame.max_degree(0) + 1];
    for (j, bj) in basis.frame.iter().zip(b) {
        if bj.is_zero() {
            continue;
        }
        let rel = bj.ln_abs() - l;
        if rel < -600.0 {
            return None;
        }
        c[j[0] as usize] = bj.mant / bj.mant.norm() * rel.exp();
    }
    let rev = c.iter().rev().copied().collect();
    Some((c, rev, l))
}

/// `u_n(x) = (1/n) log ||s(x)||_{h_n}` on the grid (one point per row).
pub fn quasi_potential(coeffs: &[ScaledComplex], basis: &EnsembleBasis, grid: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    if basis.n == 0 {
        return Err(Error::InvalidArgument("quasi-potential needs degree n >= 1".into()));
    }
    let b = basis.section_coefficients(coeffs)?;
    let nf = basis.n as f64;
    let plain = plain_univariate(basis, &b);
    grid.iter()
        .map(|x| {
            if x.len() != basis.frame.dim {
                return Err(Error::DimensionMismatch {
                    expected: basis.frame.dim,
                    got: x.len(),
                });
            }
            if let Some((c, rev, l)) = &plain {
                let z = x[0];
                let r = z.norm();
                let (h, shift) = if r <= 1.0 {
                    (crate::poly::horner(c, z), 0.0)
                } else {
                    (crate::poly::horner(rev, z.inv()), (c.len() - 1) as f64 * r.ln())
                };
                let a = h.norm();
                if a > 0.0 && a.is_finite() {
                    return Ok((l + shift + a.ln() - nf * basis.set.psi(x)) / nf);
                }
            }
            let mut pt = x.clone();
            let mut v = crate::basis::eval_in_frame(&basis.frame, &b, &pt);
            let mut tries = 0;
            while v.is_zero() && tries < 8 {
                for c in pt.iter_mut() {
                    *c += Complex64::new(1e-12, 0.7e-12) * (1.0 + c.norm());
                }
                v = crate::basis::eval_in_frame(&basis.frame, &b, &pt);
                tries += 1;
            }
            Ok((v.ln_abs() - nf * basis.set.psi(&pt)) / nf)
        })
        .collect()
}
