//! Weighted compact sets, orthonormal section bases and the Bergman kernel
//! on the diagonal.
//!
//! All projective computation happens in the affine chart `z -> [1 : z]`,
//! where a degree-`n` section is a polynomial and its pointwise norm is
//! `|s(z)| e^{-n psi(z)}` with `psi = 0` (flat) or `psi = (1/2) log(1 + |z|^2)`
//! (Fubini–Study).
//!
//! A basis stores its members as a transform from the monomial frame. Closed
//! forms are diagonal (one log-scale per monomial); the Gram–Cholesky path
//! produces a dense lower-triangular transform, or a Kronecker product of
//! per-axis transforms on tensor-product sets.

use crate::error::{Error, Result};
use crate::poly::{horner_compensated, PolyBivariate, PolyUnivariate};
use crate::quad::{gauss_legendre_on, trapezoid_angles};
use crate::scaled::{log_sum_exp, ScaledComplex};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;
use std::f64::consts::{LN_2, PI};

pub type CMatrix = DMatrix<Complex64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Flat,
    FubiniStudy,
}

/// Weight `q` on the unit circle as a function of the angle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CircleWeight {
    Zero,
    /// `amplitude * cos(theta)`
    Cosine { amplitude: f64 },
    /// values on equispaced angles `2 pi k / len`, periodic linear interpolation
    Table(Vec<f64>),
}

impl CircleWeight {
    pub fn at_angle(&self, theta: f64) -> f64 {
        match self {
            CircleWeight::Zero => 0.0,
            CircleWeight::Cosine { amplitude } => amplitude * theta.cos(),
            CircleWeight::Table(values) => {
                let len = values.len();
                let s = theta.rem_euclid(2.0 * PI) / (2.0 * PI) * len as f64;
                let k = (s.floor() as usize).min(len - 1);
                let frac = s - k as f64;
                values[k] * (1.0 - frac) + values[(k + 1) % len] * frac
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            CircleWeight::Zero => true,
            CircleWeight::Cosine { amplitude } => *amplitude == 0.0,
            CircleWeight::Table(v) => v.iter().all(|&x| x == 0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polytope {
    /// `[0, l_1] x ... x [0, l_m]`
    Box(Vec<usize>),
    /// standard simplex `{ j >= 0, |j| <= 1 }`
    Simplex,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    /// unit circle with arc length
    Circle,
    /// unit torus in C^2, sections of bidegree at most (n, n)
    Torus,
    /// unit sphere in C^m with surface measure
    SphereBall { m: usize },
    /// all of P^m with the Fubini–Study volume
    ProjectiveFs { m: usize },
    /// unit circle with a weight `q`
    WeightedCircle,
    /// monomials over `nP` on the unit torus of C^m
    Polytope { polytope: Polytope, m: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeightedSet {
    pub kind: SetKind,
    pub metric: Metric,
    pub weight: CircleWeight,
    /// angular node count override for the quadrature
    pub angular_nodes: Option<usize>,
}

/// Exponent list of a monomial family, flattened `dim` entries per monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialFrame {
    pub dim: usize,
    exps: Vec<u32>,
}

impl MonomialFrame {
    pub fn univariate(n: usize) -> Self {
        MonomialFrame {
            dim: 1,
            exps: (0..=n as u32).collect(),
        }
    }

    /// Lattice points of `[0, b_1] x ... x [0, b_m]`, lexicographic.
    pub fn boxed(bounds: &[usize]) -> Self {
        let dim = bounds.len();
        let mut exps = Vec::new();
        let mut cur = vec![0u32; dim];
        loop {
            exps.extend_from_slice(&cur);
            let mut k = dim;
            loop {
                if k == 0 {
                    return MonomialFrame { dim, exps };
                }
                k -= 1;
                if (cur[k] as usize) < bounds[k] {
                    cur[k] += 1;
                    for c in cur.iter_mut().skip(k + 1) {
                        *c = 0;
                    }
                    break;
                }
            }
        }
    }

    /// `{ J : |J| <= n }` in C^m, lexicographic.
    pub fn simplex(m: usize, n: usize) -> Self {
        let full = MonomialFrame::boxed(&vec![n; m]);
        let exps = full
            .exps
            .chunks(m)
            .filter(|j| j.iter().sum::<u32>() as usize <= n)
            .flatten()
            .copied()
            .collect();
        MonomialFrame { dim: m, exps }
    }

    pub fn len(&self) -> usize {
        self.exps.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn get(&self, i: usize) -> &[u32] {
        &self.exps[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u32]> {
        self.exps.chunks(self.dim)
    }

    pub fn max_degree(&self, axis: usize) -> usize {
        self.iter().map(|j| j[axis] as usize).max().unwrap_or(0)
    }

    pub fn max_total_degree(&self) -> usize {
        self.iter().map(|j| j.iter().sum::<u32>() as usize).max().unwrap_or(0)
    }

    pub fn position(&self, j: &[u32]) -> Option<usize> {
        self.iter().position(|x| x == j)
    }
}

/// Quadrature nodes in C^m with positive weights summing to one.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub dim: usize,
    pub points: Vec<Complex64>,
    pub weights: Vec<f64>,
    /// all sections of degree `<= exactness / 2` have exact Gram entries
    pub exactness: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[Complex64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }
}

fn jlog(j: u32, l: f64) -> f64 {
    if j == 0 {
        0.0
    } else {
        j as f64 * l
    }
}

fn binom_ln(n: usize, k: usize) -> f64 {
    ln_factorial(n as u64) - ln_factorial(k as u64) - ln_factorial((n - k) as u64)
}

impl WeightedSet {
    pub fn new(kind: SetKind, metric: Metric) -> Self {
        WeightedSet {
            kind,
            metric,
            weight: CircleWeight::Zero,
            angular_nodes: None,
        }
    }

    /// Kac circle: unit circle, flat metric.
    pub fn circle() -> Self {
        WeightedSet::new(SetKind::Circle, Metric::Flat)
    }

    /// Unit circle inside P^1 with the Fubini–Study metric.
    pub fn circle_fs() -> Self {
        WeightedSet::new(SetKind::Circle, Metric::FubiniStudy)
    }

    pub fn torus() -> Self {
        WeightedSet::new(SetKind::Torus, Metric::Flat)
    }

    pub fn sphere_ball(m: usize) -> Self {
        WeightedSet::new(SetKind::SphereBall { m }, Metric::Flat)
    }

    /// Elliptic ensemble on P^m.
    pub fn projective(m: usize) -> Self {
        WeightedSet::new(SetKind::ProjectiveFs { m }, Metric::FubiniStudy)
    }

    pub fn weighted_circle(weight: CircleWeight) -> Self {
        WeightedSet {
            kind: SetKind::WeightedCircle,
            metric: Metric::Flat,
            weight,
            angular_nodes: None,
        }
    }

    /// Kac polydisc ensemble: monomials of total degree `<= n` on the torus.
    pub fn polydisc(m: usize) -> Self {
        WeightedSet::new(
            SetKind::Polytope {
                polytope: Polytope::Simplex,
                m,
            },
            Metric::Flat,
        )
    }

    pub fn with_angular_nodes(mut self, nodes: usize) -> Self {
        self.angular_nodes = Some(nodes);
        self
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            SetKind::Circle | SetKind::WeightedCircle => 1,
            SetKind::Torus => 2,
            SetKind::SphereBall { m } | SetKind::ProjectiveFs { m } | SetKind::Polytope { m, .. } => *m,
        }
    }

    /// Short catalog name.
    pub fn name(&self) -> String {
        let metric = match self.metric {
            Metric::Flat => "",
            Metric::FubiniStudy => "-fs",
        };
        match &self.kind {
            SetKind::Circle => format!("circle{metric}"),
            SetKind::Torus => format!("torus{metric}"),
            SetKind::SphereBall { m } => format!("sphere-ball(m={m}){metric}"),
            SetKind::ProjectiveFs { m } => format!("projective-fs(m={m})"),
            SetKind::WeightedCircle => format!("weighted-circle{metric}"),
            SetKind::Polytope { polytope, m } => match polytope {
                Polytope::Simplex => format!("polydisc(m={m}){metric}"),
                Polytope::Box(l) => format!("box-polytope({l:?}){metric}"),
            },
        }
    }

    /// Metric weight `psi` at `x`.
    pub fn psi(&self, x: &[Complex64]) -> f64 {
        match self.metric {
            Metric::Flat => 0.0,
            Metric::FubiniStudy => 0.5 * x.iter().map(|z| z.norm_sqr()).sum::<f64>().ln_1p(),
        }
    }

    /// `psi` as a function of `ln|x|` for a point of C (no overflow).
    pub fn psi_from_log_modulus(&self, log_r: f64) -> f64 {
        match self.metric {
            Metric::Flat => 0.0,
            Metric::FubiniStudy => {
                if log_r > 0.0 {
                    log_r + 0.5 * (-2.0 * log_r).exp().ln_1p()
                } else {
                    0.5 * (2.0 * log_r).exp().ln_1p()
                }
            }
        }
    }

    /// Weight `q` at a point of `K`.
    pub fn q(&self, x: &[Complex64]) -> f64 {
        match self.kind {
            SetKind::WeightedCircle => self.weight.at_angle(x[0].arg()),
            _ => 0.0,
        }
    }

    fn check_weight(&self) -> Result<()> {
        if !matches!(self.kind, SetKind::WeightedCircle) && !self.weight.is_zero() {
            return Err(Error::Unsupported(format!("weight q on {}", self.name())));
        }
        Ok(())
    }

    /// Monomial frame of degree-`n` sections.
    pub fn frame(&self, n: usize) -> MonomialFrame {
        match &self.kind {
            SetKind::Circle | SetKind::WeightedCircle => MonomialFrame::univariate(n),
            SetKind::Torus => MonomialFrame::boxed(&[n, n]),
            SetKind::SphereBall { m } | SetKind::ProjectiveFs { m } => MonomialFrame::simplex(*m, n),
            SetKind::Polytope { polytope, m } => match polytope {
                Polytope::Simplex => MonomialFrame::simplex(*m, n),
                Polytope::Box(l) => MonomialFrame::boxed(&l.iter().map(|li| li * n).collect::<Vec<_>>()),
            },
        }
    }

    /// `dim H^0` at degree `n` from the lattice-count formula.
    pub fn dimension(&self, n: usize) -> usize {
        let binom = |a: usize, b: usize| -> usize {
            let mut r: u128 = 1;
            for i in 0..b {
                r = r * (a - i) as u128 / (i + 1) as u128;
            }
            r as usize
        };
        match &self.kind {
            SetKind::Circle | SetKind::WeightedCircle => n + 1,
            SetKind::Torus => (n + 1) * (n + 1),
            SetKind::SphereBall { m } | SetKind::ProjectiveFs { m } => binom(n + m, *m),
            SetKind::Polytope { polytope, m } => match polytope {
                Polytope::Simplex => binom(n + m, *m),
                Polytope::Box(l) => l.iter().map(|li| li * n + 1).product(),
            },
        }
    }

    /// Whether `K` is the unit torus of C^m (circle when m = 1).
    fn on_unit_torus(&self) -> bool {
        matches!(
            self.kind,
            SetKind::Circle | SetKind::WeightedCircle | SetKind::Torus | SetKind::Polytope { .. }
        ) || matches!(self.kind, SetKind::SphereBall { m: 1 })
    }

    /// `psi` on the unit torus of C^m, where it is constant.
    fn psi_on_torus(&self) -> f64 {
        match self.metric {
            Metric::Flat => 0.0,
            Metric::FubiniStudy => 0.5 * (1.0 + self.dim() as f64).ln(),
        }
    }

    fn angular_count(&self, n: usize) -> usize {
        if let Some(k) = self.angular_nodes {
            return k;
        }
        if self.weight.is_zero() {
            4 * n + 4
        } else {
            8 * n + 64
        }
    }

    /// The measure `tau` as a quadrature rule adequate for degree `n`.
    pub fn quadrature(&self, n: usize) -> Result<QuadratureRule> {
        self.check_weight()?;
        let nang = self.angular_count(n);
        let angles = trapezoid_angles(nang);
        let mut points = Vec::new();
        let mut weights = Vec::new();
        let exactness;
        match &self.kind {
            _ if self.on_unit_torus() => {
                let m = self.dim();
                let total = nang.pow(m as u32);
                for idx in 0..total {
                    let mut rest = idx;
                    let mut w = 1.0;
                    for _ in 0..m {
                        let (theta, wt) = angles[rest % nang];
                        rest /= nang;
                        points.push(Complex64::from_polar(1.0, theta));
                        w *= wt;
                    }
                    weights.push(w);
                }
                exactness = nang - 1;
            }
            SetKind::SphereBall { m: 2 } => {
                // |z1|^2 = t is uniform on [0, 1] under the normalized surface measure of S^3
                let tnodes = gauss_legendre_on(n + 1, 0.0, 1.0);
                for &(t, wt) in &tnodes {
                    for &(a1, w1) in &angles {
                        for &(a2, w2) in &angles {
                            points.push(Complex64::from_polar(t.sqrt(), a1));
                            points.push(Complex64::from_polar((1.0 - t).sqrt(), a2));
                            weights.push(wt * w1 * w2);
                        }
                    }
                }
                exactness = (nang - 1).min(2 * tnodes.len() - 1);
            }
            SetKind::ProjectiveFs { m: 1 } => {
                // t = r^2 / (1 + r^2) is uniform under the Fubini–Study probability measure
                let tnodes = gauss_legendre_on(n + 1, 0.0, 1.0);
                for &(t, wt) in &tnodes {
                    let r = (t / (1.0 - t)).sqrt();
                    for &(a, w) in &angles {
                        points.push(Complex64::from_polar(r, a));
                        weights.push(wt * w);
                    }
                }
                exactness = (nang - 1).min(2 * tnodes.len() - 1);
            }
            _ => return Err(Error::Unsupported(format!("quadrature for {}", self.name()))),
        }
        Ok(QuadratureRule {
            dim: self.dim(),
            points,
            weights,
            exactness,
        })
    }
}

/// Gram matrix of a monomial frame.
#[derive(Clone, Debug)]
pub enum Gram {
    Dense(CMatrix),
    /// `G_1 (x) ... (x) G_m` for box frames on tensor rules
    Kronecker(Vec<CMatrix>),
}

impl Gram {
    /// Dense form (only sensible for moderate sizes).
    pub fn to_dense(&self) -> CMatrix {
        match self {
            Gram::Dense(g) => g.clone(),
            Gram::Kronecker(f) => f.iter().skip(1).fold(f[0].clone(), |acc, g| acc.kronecker(g)),
        }
    }
}

fn hermitian_part(g: &CMatrix) -> CMatrix {
    (g + g.adjoint()).scale(0.5)
}

/// 1-D Gram of `1, z, ..., z^deg` on the unit circle with weight factor
/// `exp(-2 n (psi + q(theta)))`.
fn circle_gram(deg: usize, nodes: usize, log_weight: impl Fn(f64) -> f64) -> CMatrix {
    let angles = trapezoid_angles(nodes);
    let d = deg + 1;
    let mut a = CMatrix::zeros(nodes, d);
    for (i, &(theta, w)) in angles.iter().enumerate() {
        let s = (w.ln() + log_weight(theta)).mul_add(0.5, 0.0).exp();
        for j in 0..d {
            a[(i, j)] = Complex64::from_polar(s, -(j as f64) * theta);
        }
    }
    hermitian_part(&(a.adjoint() * &a))
}

/// `G_{jk} = sum_i w_i f_j(x_i) conj(f_k(x_i)) e^{-2n(psi(x_i) + q(x_i))}`
/// for the raw monomials of `frame`.
pub fn gram_matrix(set: &WeightedSet, frame: &MonomialFrame, n: usize) -> Result<Gram> {
    set.check_weight()?;
    let rule = set.quadrature(n)?;
    if rule.exactness < 2 * frame.max_total_degree().max(n) && set.weight.is_zero() {
        return Err(Error::InvalidArgument(format!(
            "quadrature exactness {} below 2n = {}",
            rule.exactness,
            2 * n
        )));
    }
    let nf = n as f64;
    if set.on_unit_torus() {
        let nodes = set.angular_count(n);
        let m = frame.dim;
        let psi0 = set.psi_on_torus();
        let factors: Vec<CMatrix> = (0..m)
            .map(|axis| {
                let deg = frame.max_degree(axis);
                if axis == 0 {
                    circle_gram(deg, nodes, |theta| -2.0 * nf * (psi0 + set.weight.at_angle(theta)))
                } else {
                    circle_gram(deg, nodes, |_| 0.0)
                }
            })
            .collect();
        let is_box = {
            let bounds: Vec<usize> = (0..m).map(|k| frame.max_degree(k)).collect();
            *frame == MonomialFrame::boxed(&bounds)
        };
        if m == 1 {
            return Ok(Gram::Dense(factors.into_iter().next().unwrap()));
        }
        if is_box {
            return Ok(Gram::Kronecker(factors));
        }
        let d = frame.len();
        let g = CMatrix::from_fn(d, d, |r, c| {
            let (jr, jc) = (frame.get(r), frame.get(c));
            (0..m)
                .map(|k| factors[k][(jr[k] as usize, jc[k] as usize)])
                .product()
        });
        return Ok(Gram::Dense(g));
    }
    let d = frame.len();
    let mut a = CMatrix::zeros(rule.len(), d);
    for i in 0..rule.len() {
        let x = rule.point(i);
        let logs: Vec<f64> = x.iter().map(|z| z.norm().ln()).collect();
        let args: Vec<f64> = x.iter().map(|z| z.arg()).collect();
        let base = 0.5 * rule.weights[i].ln() - nf * (set.psi(x) + set.q(x));
        for (col, j) in frame.iter().enumerate() {
            let lm: f64 = j.iter().zip(&logs).map(|(&jk, &l)| jlog(jk, l)).sum();
            let ph: f64 = j.iter().zip(&args).map(|(&jk, &t)| jk as f64 * t).sum();
            a[(i, col)] = Complex64::from_polar((base + lm).exp(), -ph);
        }
    }
    Ok(Gram::Dense(hermitian_part(&(a.adjoint() * &a))))
}

/// Lower Cholesky factor `G = L L^H`.
pub fn cholesky(g: &CMatrix) -> Result<CMatrix> {
    let d = g.nrows();
    let mut l = CMatrix::zeros(d, d);
    for j in 0..d {
        let mut diag = g[(j, j)].re;
        for k in 0..j {
            diag -= l[(j, k)].norm_sqr();
        }
        if !(diag > f64::EPSILON * g[(j, j)].re.abs()) || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite { index: j, pivot: diag });
        }
        let ljj = diag.sqrt();
        l[(j, j)] = Complex64::new(ljj, 0.0);
        for i in (j + 1)..d {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix by forward substitution.
fn lower_inverse(l: &CMatrix) -> CMatrix {
    let d = l.nrows();
    let mut inv = CMatrix::zeros(d, d);
    for col in 0..d {
        inv[(col, col)] = Complex64::new(1.0, 0.0) / l[(col, col)];
        for row in (col + 1)..d {
            let mut s = Complex64::new(0.0, 0.0);
            for k in col..row {
                s += l[(row, k)] * inv[(k, col)];
            }
            inv[(row, col)] = -s / l[(row, row)];
        }
    }
    inv
}

/// How basis members are built from the monomial frame.
#[derive(Clone, Debug)]
pub enum Transform {
    /// member `i` is `exp(log_scale[i]) z^{J_i}`
    Diagonal(Vec<f64>),
    /// member `i` is `sum_J T[i, J] z^J`
    Dense(CMatrix),
    /// tensor product of per-axis transforms (box frames)
    Kronecker(Vec<CMatrix>),
}

#[derive(Clone, Debug)]
pub struct EnsembleBasis {
    pub n: usize,
    pub frame: MonomialFrame,
    pub transform: Transform,
    pub set: WeightedSet,
}

/// Value of a section at a point.
#[derive(Clone, Copy, Debug)]
pub struct SectionValue {
    pub value: ScaledComplex,
    /// `ln ||s(x)||_{h_n}`
    pub log_weighted_norm: f64,
}

impl SectionValue {
    pub fn weighted_norm(&self) -> f64 {
        self.log_weighted_norm.exp()
    }
}

/// Closed-form orthonormal basis for the catalogued sets.
pub fn closed_form_basis(set: &WeightedSet, n: usize) -> Result<EnsembleBasis> {
    set.check_weight()?;
    let frame = set.frame(n);
    let nf = n as f64;
    let log_scale: Vec<f64> = match &set.kind {
        _ if set.on_unit_torus() && set.weight.is_zero() => {
            // monomials are orthonormal for d theta / 2 pi; psi is constant on the torus
            vec![nf * set.psi_on_torus(); frame.len()]
        }
        SetKind::SphereBall { m } => {
            let m = *m;
            let shift = match set.metric {
                Metric::Flat => 0.0,
                Metric::FubiniStudy => 0.5 * nf * LN_2,
            };
            frame
                .iter()
                .map(|j| {
                    let total: usize = j.iter().map(|&x| x as usize).sum();
                    let num = ln_factorial((total + m - 1) as u64) - ln_factorial((m - 1) as u64);
                    let den: f64 = j.iter().map(|&x| ln_factorial(x as u64)).sum();
                    0.5 * (num - den) + shift
                })
                .collect()
        }
        SetKind::ProjectiveFs { m } => {
            if set.metric != Metric::FubiniStudy {
                return Err(Error::Unsupported("projective-fs requires the Fubini–Study metric".into()));
            }
            let m = *m;
            frame
                .iter()
                .map(|j| {
                    let total: usize = j.iter().map(|&x| x as usize).sum();
                    let num = ln_factorial((n + m) as u64);
                    let den = ln_factorial(m as u64)
                        + ln_factorial((n - total) as u64)
                        + j.iter().map(|&x| ln_factorial(x as u64)).sum::<f64>();
                    0.5 * (num - den)
                })
                .collect()
        }
        _ => return Err(Error::Unsupported(format!("closed-form basis for {}", set.name()))),
    };
    Ok(EnsembleBasis {
        n,
        frame,
        transform: Transform::Diagonal(log_scale),
        set: set.clone(),
    })
}

/// Orthonormalizes the raw monomials of `frame` against `gram`.
pub fn orthonormalize(gram: &Gram, frame: MonomialFrame, set: &WeightedSet, n: usize) -> Result<EnsembleBasis> {
    let transform = match gram {
        Gram::Dense(g) => {
            if g.nrows() != frame.len() {
                return Err(Error::DimensionMismatch {
                    expected: frame.len(),
                    got: g.nrows(),
                });
            }
            Transform::Dense(lower_inverse(&cholesky(g)?))
        }
        Gram::Kronecker(factors) => {
            let mut inv = Vec::with_capacity(factors.len());
            for f in factors {
                inv.push(lower_inverse(&cholesky(f)?));
            }
            Transform::Kronecker(inv)
        }
    };
    Ok(EnsembleBasis {
        n,
        frame,
        transform,
        set: set.clone(),
    })
}

/// Gram matrix followed by Cholesky orthonormalization.
pub fn gram_basis(set: &WeightedSet, n: usize) -> Result<EnsembleBasis> {
    let frame = set.frame(n);
    let g = gram_matrix(set, &frame, n)?;
    orthonormalize(&g, frame, set, n)
}

/// Monomials of `frame` at `x`, divided by `exp(lambda)` so that none
/// exceeds one in modulus; returns `(values, lambda)`.
fn scaled_monomials(frame: &MonomialFrame, x: &[Complex64]) -> (Vec<Complex64>, f64) {
    let m = frame.dim;
    let maxdeg: Vec<usize> = (0..m).map(|k| frame.max_degree(k)).collect();
    let big: Vec<f64> = x.iter().map(|z| z.norm().max(1.0)).collect();
    let lambda: f64 = (0..m).map(|k| maxdeg[k] as f64 * big[k].ln()).sum();
    // per-axis power tables of x_k / big_k and 1 / big_k
    let tables: Vec<Vec<Complex64>> = (0..m)
        .map(|k| {
            let w = x[k] / big[k];
            let inv = 1.0 / big[k];
            let mut pw = vec![Complex64::new(1.0, 0.0); maxdeg[k] + 1];
            let mut pinv = vec![1.0; maxdeg[k] + 1];
            for j in 1..=maxdeg[k] {
                pw[j] = pw[j - 1] * w;
                pinv[j] = pinv[j - 1] * inv;
            }
            (0..=maxdeg[k]).map(|j| pw[j] * pinv[maxdeg[k] - j]).collect()
        })
        .collect();
    let vals = frame
        .iter()
        .map(|j| (0..m).map(|k| tables[k][j[k] as usize]).product())
        .collect();
    (vals, lambda)
}

impl EnsembleBasis {
    /// `d_n`
    pub fn dimension(&self) -> usize {
        self.frame.len()
    }

    /// `ln sum_j |S_j(x)|^2 e^{-2 n psi(x)}`.
    pub fn log_bergman_diagonal(&self, x: &[Complex64]) -> f64 {
        let nf = self.n as f64;
        let psi = self.set.psi(x);
        match &self.transform {
            Transform::Diagonal(ls) => {
                let logs: Vec<f64> = x.iter().map(|z| z.norm().ln()).collect();
                let terms = self.frame.iter().zip(ls).map(|(j, &s)| {
                    let lm: f64 = j.iter().zip(&logs).map(|(&jk, &l)| jlog(jk, l)).sum();
                    2.0 * (s + lm)
                });
                log_sum_exp(terms) - 2.0 * nf * psi
            }
            Transform::Dense(t) => {
                let (u, lambda) = scaled_monomials(&self.frame, x);
                let u = nalgebra::DVector::from_vec(u);
                let s = t * u;
                s.iter().map(|v| v.norm_sqr()).sum::<f64>().ln() + 2.0 * lambda - 2.0 * nf * psi
            }
            Transform::Kronecker(factors) => {
                let mut total = 0.0;
                for (k, t) in factors.iter().enumerate() {
                    let f = MonomialFrame::univariate(t.ncols() - 1);
                    let (u, lambda) = scaled_monomials(&f, &x[k..k + 1]);
                    let s = t * nalgebra::DVector::from_vec(u);
                    total += s.iter().map(|v| v.norm_sqr()).sum::<f64>().ln() + 2.0 * lambda;
                }
                total - 2.0 * nf * psi
            }
        }
    }

    /// `sum_j ||S_j(x)||^2_{h_n}`.
    pub fn bergman_diagonal(&self, x: &[Complex64]) -> f64 {
        self.log_bergman_diagonal(x).exp()
    }

    /// Values `S_j(x)` of all members (unweighted), for moderate `n` and `x`.
    pub fn member_values(&self, x: &[Complex64]) -> Vec<Complex64> {
        let (u, lambda) = scaled_monomials(&self.frame, x);
        let scale = lambda.exp();
        match &self.transform {
            Transform::Diagonal(ls) => u
                .iter()
                .zip(ls)
                .map(|(v, s)| v * (s + lambda).exp())
                .collect(),
            Transform::Dense(t) => (t * nalgebra::DVector::from_vec(u))
                .iter()
                .map(|v| v * scale)
                .collect(),
            Transform::Kronecker(_) => {
                let coeffs = self.member_matrix();
                (coeffs * nalgebra::DVector::from_vec(u))
                    .iter()
                    .map(|v| v * scale)
                    .collect()
            }
        }
    }

    /// Dense member-by-monomial coefficient matrix.
    pub fn member_matrix(&self) -> CMatrix {
        match &self.transform {
            Transform::Diagonal(ls) => {
                CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
                    ls.len(),
                    ls.iter().map(|s| Complex64::new(s.exp(), 0.0)),
                ))
            }
            Transform::Dense(t) => t.clone(),
            Transform::Kronecker(f) => f.iter().skip(1).fold(f[0].clone(), |acc, g| acc.kronecker(g)),
        }
    }

    /// Monomial-frame coefficients of `sum_i a_i S_i`.
    pub fn section_coefficients(&self, a: &[ScaledComplex]) -> Result<Vec<ScaledComplex>> {
        if a.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                expected: self.dimension(),
                got: a.len(),
            });
        }
        match &self.transform {
            Transform::Diagonal(ls) => Ok(a.iter().zip(ls).map(|(ai, &s)| ai.shift_log(s)).collect()),
            Transform::Dense(t) => {
                let reference = max_log_scale(a);
                let rel = nalgebra::DVector::from_iterator(a.len(), a.iter().map(|x| x.relative_to(reference)));
                let b = t.transpose() * rel;
                Ok(b.iter().map(|&v| ScaledComplex::new(v, reference)).collect())
            }
            Transform::Kronecker(factors) => {
                let reference = max_log_scale(a);
                if factors.len() == 1 {
                    let rel = nalgebra::DVector::from_iterator(a.len(), a.iter().map(|x| x.relative_to(reference)));
                    let b = factors[0].transpose() * rel;
                    return Ok(b.iter().map(|&v| ScaledComplex::new(v, reference)).collect());
                }
                if factors.len() != 2 {
                    return Err(Error::Unsupported("kronecker sections beyond two factors".into()));
                }
                let (t1, t2) = (&factors[0], &factors[1]);
                let (d1, d2) = (t1.nrows(), t2.nrows());
                // A[i1, i2] with member index i1 * d2 + i2
                let amat = CMatrix::from_fn(d1, d2, |i1, i2| a[i1 * d2 + i2].relative_to(reference));
                let b = t1.transpose() * amat * t2;
                let mut out = Vec::with_capacity(d1 * d2);
                for j1 in 0..d1 {
                    for j2 in 0..d2 {
                        out.push(ScaledComplex::new(b[(j1, j2)], reference));
                    }
                }
                Ok(out)
            }
        }
    }

    /// The section as a univariate polynomial (m = 1).
    pub fn univariate_poly(&self, a: &[ScaledComplex]) -> Result<PolyUnivariate> {
        if self.frame.dim != 1 {
            return Err(Error::Unsupported("univariate polynomial of a multivariate basis".into()));
        }
        let b = self.section_coefficients(a)?;
        let mut coeffs = vec![ScaledComplex::ZERO; self.frame.max_degree(0) + 1];
        for (j, c) in self.frame.iter().zip(b) {
            coeffs[j[0] as usize] = c;
        }
        Ok(PolyUnivariate::new(coeffs))
    }

    /// The section as a bivariate polynomial (m = 2), normalized so the
    /// largest coefficient has modulus one.
    pub fn bivariate_poly(&self, a: &[ScaledComplex]) -> Result<PolyBivariate> {
        if self.frame.dim != 2 {
            return Err(Error::Unsupported("bivariate polynomial of a non-bivariate basis".into()));
        }
        let b = self.section_coefficients(a)?;
        let reference = max_log_scale(&b);
        let mut p = PolyBivariate::zeros(self.frame.max_degree(0), self.frame.max_degree(1));
        for (j, c) in self.frame.iter().zip(&b) {
            p.coeffs[j[0] as usize][j[1] as usize] = c.relative_to(reference);
        }
        Ok(p)
    }

    /// Value and pointwise norm of `sum_i a_i S_i` at `x`.
    pub fn evaluate_section(&self, a: &[ScaledComplex], x: &[Complex64]) -> Result<SectionValue> {
        if x.len() != self.frame.dim {
            return Err(Error::DimensionMismatch {
                expected: self.frame.dim,
                got: x.len(),
            });
        }
        let b = self.section_coefficients(a)?;
        let value = eval_in_frame(&self.frame, &b, x);
        let log_weighted_norm = value.ln_abs() - self.n as f64 * self.set.psi(x);
        Ok(SectionValue {
            value,
            log_weighted_norm,
        })
    }
}

fn max_log_scale(a: &[ScaledComplex]) -> f64 {
    let r = a
        .iter()
        .filter(|x| !x.is_zero())
        .map(|x| x.log_scale)
        .fold(f64::NEG_INFINITY, f64::max);
    if r == f64::NEG_INFINITY {
        0.0
    } else {
        r
    }
}

/// Evaluates `sum_J b_J x^J` with per-point normalization and compensated
/// Horner in each variable.
pub fn eval_in_frame(frame: &MonomialFrame, b: &[ScaledComplex], x: &[Complex64]) -> ScaledComplex {
    let m = frame.dim;
    if m == 1 {
        let mut coeffs = vec![ScaledComplex::ZERO; frame.max_degree(0) + 1];
        for (j, c) in frame.iter().zip(b) {
            coeffs[j[0] as usize] = *c;
        }
        return PolyUnivariate::new(coeffs).eval_complex(x[0]);
    }
    let logs: Vec<f64> = x.iter().map(|z| z.norm().ln()).collect();
    let dirs: Vec<Complex64> = x
        .iter()
        .map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) })
        .collect();
    let term_logs: Vec<f64> = frame
        .iter()
        .zip(b)
        .map(|(j, c)| c.ln_abs() + j.iter().zip(&logs).map(|(&jk, &l)| jlog(jk, l)).sum::<f64>())
        .collect();
    let reference = term_logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if reference == f64::NEG_INFINITY {
        return ScaledComplex::ZERO;
    }
    let term = |i: usize| -> Complex64 {
        let c = b[i];
        if c.is_zero() || term_logs[i] == f64::NEG_INFINITY {
            Complex64::new(0.0, 0.0)
        } else {
            c.mant / c.mant.norm() * (term_logs[i] - reference).exp()
        }
    };
    let v = if m == 2 {
        let (d1, d2) = (frame.max_degree(0), frame.max_degree(1));
        let mut grid = vec![vec![Complex64::new(0.0, 0.0); d2 + 1]; d1 + 1];
        for (i, j) in frame.iter().enumerate() {
            grid[j[0] as usize][j[1] as usize] += term(i);
        }
        let rows: Vec<Complex64> = grid.iter().map(|row| horner_compensated(row, dirs[1])).collect();
        horner_compensated(&rows, dirs[0])
    } else {
        frame
            .iter()
            .enumerate()
            .map(|(i, j)| {
                term(i)
                    * j.iter()
                        .zip(&dirs)
                        .map(|(&jk, w)| w.powu(jk))
                        .product::<Complex64>()
            })
            .sum()
    };
    ScaledComplex::new(v, reference)
}

/// Cross-Gram `<A_i, B_j>` of two bases over the same frame, given the raw
/// monomial Gram.
pub fn cross_gram(a: &EnsembleBasis, b: &EnsembleBasis, raw: &Gram) -> CMatrix {
    match (&a.transform, &b.transform, raw) {
        (Transform::Kronecker(fa), Transform::Kronecker(fb), Gram::Kronecker(g)) => {
            let parts: Vec<CMatrix> = fa
                .iter()
                .zip(fb)
                .zip(g)
                .map(|((ta, tb), gk)| ta * gk * tb.adjoint())
                .collect();
            parts.iter().skip(1).fold(parts[0].clone(), |acc, p| acc.kronecker(p))
        }
        _ => {
            let ta = a.member_matrix();
            let tb = b.member_matrix();
            ta * raw.to_dense() * tb.adjoint()
        }
    }
}

/// Per-axis cross-Grams when both bases and the raw Gram factor; the full
/// cross-Gram is their Kronecker product.
pub fn cross_gram_factors(a: &EnsembleBasis, b: &EnsembleBasis, raw: &Gram) -> Option<Vec<CMatrix>> {
    let nfactors = match raw {
        Gram::Kronecker(g) => g.len(),
        Gram::Dense(_) => return None,
    };
    let factor_of = |basis: &EnsembleBasis, k: usize| -> Option<CMatrix> {
        match &basis.transform {
            Transform::Kronecker(f) => Some(f[k].clone()),
            Transform::Diagonal(ls) => {
                // diagonal on a box frame factors only when the scales are constant
                let s0 = ls[0];
                if ls.iter().any(|&s| (s - s0).abs() > 0.0) {
                    return None;
                }
                let d = basis.frame.max_degree(k) + 1;
                let per_axis = if k == 0 { s0 } else { 0.0 };
                Some(CMatrix::identity(d, d).scale(per_axis.exp()))
            }
            Transform::Dense(_) => None,
        }
    };
    let Gram::Kronecker(g) = raw else { return None };
    (0..nfactors)
        .map(|k| Some(factor_of(a, k)? * &g[k] * factor_of(b, k)?.adjoint()))
        .collect()
}

/// `max |M - I|` entrywise.
pub fn max_deviation_from_identity(m: &CMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((m[(i, j)] - target).norm());
        }
    }
    worst
}

/// `max |A (x) B - I|` without forming the product.
pub fn kronecker_deviation_from_identity(factors: &[CMatrix]) -> f64 {
    match factors {
        [] => 0.0,
        [a] => max_deviation_from_identity(a),
        [a, rest @ ..] => {
            // entries of the tail product are needed; fold pairwise for two factors
            if rest.len() != 1 {
                let tail = rest.iter().skip(1).fold(rest[0].clone(), |acc, g| acc.kronecker(g));
                return kronecker_deviation_from_identity(&[a.clone(), tail]);
            }
            let b = &rest[0];
            let mut worst: f64 = 0.0;
            for i1 in 0..a.nrows() {
                for j1 in 0..a.ncols() {
                    let aij = a[(i1, j1)];
                    for i2 in 0..b.nrows() {
                        for j2 in 0..b.ncols() {
                            let target = if i1 == j1 && i2 == j2 { 1.0 } else { 0.0 };
                            worst = worst.max((aij * b[(i2, j2)] - target).norm());
                        }
                    }
                }
            }
            worst
        }
    }
}

/// `ln C(n, k)`.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    binom_ln(n, k)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_counts_match_frames() {
        let sets = [
            WeightedSet::circle(),
            WeightedSet::torus(),
            WeightedSet::sphere_ball(2),
            WeightedSet::sphere_ball(3),
            WeightedSet::projective(2),
            WeightedSet::polydisc(2),
            WeightedSet::new(
                SetKind::Polytope {
                    polytope: Polytope::Box(vec![1, 2]),
                    m: 2,
                },
                Metric::Flat,
            ),
        ];
        for set in &sets {
            for n in 0..=64 {
                assert_eq!(set.frame(n).len(), set.dimension(n), "{} n={n}", set.name());
            }
        }
        assert_eq!(WeightedSet::projective(2).dimension(10), 66);
        assert_eq!(WeightedSet::torus().dimension(3), 16);
    }

    #[test]
    fn elliptic_norm_factors() {
        let n = 10;
        let b = closed_form_basis(&WeightedSet::projective(1), n).unwrap();
        let Transform::Diagonal(ls) = &b.transform else { panic!() };
        for j in 0..=n {
            let expected = ((n + 1) as f64 * (ln_binomial(n, j)).exp()).sqrt();
            assert!((ls[j].exp() / expected - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn ball_coefficient() {
        let b = closed_form_basis(&WeightedSet::sphere_ball(2), 3).unwrap();
        let Transform::Diagonal(ls) = &b.transform else { panic!() };
        let i = b.frame.position(&[1, 0]).unwrap();
        assert!((ls[i].exp() - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn degree_zero_circle() {
        let b = closed_form_basis(&WeightedSet::circle(), 0).unwrap();
        assert_eq!(b.dimension(), 1);
        assert!((b.bergman_diagonal(&[Complex64::new(0.3, 0.2)]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cholesky_scalar_and_identity() {
        let g = CMatrix::from_element(1, 1, Complex64::new(4.0, 0.0));
        let b = orthonormalize(&Gram::Dense(g), MonomialFrame::univariate(0), &WeightedSet::circle(), 0).unwrap();
        let Transform::Dense(t) = &b.transform else { panic!() };
        assert!((t[(0, 0)].re - 0.5).abs() < 1e-15);

        let id = CMatrix::identity(4, 4);
        let b = orthonormalize(&Gram::Dense(id.clone()), MonomialFrame::univariate(3), &WeightedSet::circle(), 3).unwrap();
        let Transform::Dense(t) = &b.transform else { panic!() };
        assert_eq!(max_deviation_from_identity(t), 0.0);
    }

    #[test]
    fn non_pd_gram_names_pivot() {
        let mut g = CMatrix::identity(3, 3);
        g[(2, 2)] = Complex64::new(-1.0, 0.0);
        let err = orthonormalize(&Gram::Dense(g), MonomialFrame::univariate(2), &WeightedSet::circle(), 2).unwrap_err();
        match err {
            Error::NotPositiveDefinite { index, pivot } => {
                assert_eq!(index, 2);
                assert_eq!(pivot, -1.0);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn weight_on_unsupported_kind_rejected() {
        let mut set = WeightedSet::torus();
        set.weight = CircleWeight::Cosine { amplitude: 1.0 };
        assert!(closed_form_basis(&set, 2).is_err());
        assert!(closed_form_basis(&WeightedSet::weighted_circle(CircleWeight::Cosine { amplitude: 1.0 }), 2).is_err());
    }

    #[test]
    fn table_weight_interpolates() {
        let w = CircleWeight::Table(vec![0.0, 1.0, 0.0, -1.0]);
        assert!((w.at_angle(PI / 4.0) - 0.5).abs() < 1e-15);
        assert!((w.at_angle(-PI / 2.0) + 1.0).abs() < 1e-12);
    }
}
