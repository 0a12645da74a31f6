use nalgebra::DMatrix;
use zerolab::basis::{closed_form_basis, WeightedSet};
use zerolab::coeffs::{sample_vector, DistributionSpec};
use zerolab::rng::rng_split;
use zerolab::zeros::{common_zeros_bivariate, roots_univariate};
use zerolab::Complex64;

/// Companion-matrix eigenvalues of a monic-normalized polynomial.
fn companion_roots(c: &[Complex64]) -> Vec<Complex64> {
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    m.schur().eigenvalues().expect("complex schur").iter().copied().collect()
}

#[test]
fn kac_roots_match_companion_oracle() {
    let n = 64;
    let basis = closed_form_basis(&WeightedSet::circle(), n).unwrap();
    let mut stream = rng_split(42, n as u64, 0);
    let a = sample_vector(&DistributionSpec::complex_gaussian(), n + 1, &mut stream);
    let p = basis.univariate_poly(&a).unwrap();
    let rs = roots_univariate(&p).unwrap();
    let coeffs: Vec<Complex64> = p.coeffs.iter().map(|c| c.to_complex()).collect();
    let oracle = companion_roots(&coeffs);
    assert_eq!(rs.len(), oracle.len());
    let mut used = vec![false; oracle.len()];
    for z in rs.complex_points() {
        let (j, d) = oracle
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, w)| (j, (w - z).norm()))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        used[j] = true;
        assert!(d < 1e-6, "root {z} off by {d}");
    }
}

#[test]
fn vieta_and_conjugate_pairs_for_real_coefficients() {
    let n = 40;
    let basis = closed_form_basis(&WeightedSet::circle(), n).unwrap();
    for trial in 0..10 {
        let mut stream = rng_split(3, n as u64, trial);
        let a = sample_vector(&DistributionSpec::real_gaussian(), n + 1, &mut stream);
        let p = basis.univariate_poly(&a).unwrap();
        let rs = roots_univariate(&p).unwrap();
        let z = rs.complex_points();
        let sum: Complex64 = z.iter().sum();
        let expected = -p.coeffs[n - 1].to_complex() / p.coeffs[n].to_complex();
        assert!((sum - expected).norm() <= 1e-6 * expected.norm().max(1.0));
        for w in &z {
            let partner = z.iter().map(|v| (v - w.conj()).norm()).fold(f64::INFINITY, f64::min);
            assert!(partner <= 1e-9 * w.norm().max(1.0), "no conjugate for {w}");
        }
    }
}

#[test]
fn kac_pair_bezout_count() {
    let n = 8;
    let set = WeightedSet::polydisc(2);
    let basis = closed_form_basis(&set, n).unwrap();
    let d = basis.dimension();
    let mut full = 0;
    for trial in 0..100 {
        let mut stream = rng_split(7, n as u64, trial);
        let a1 = sample_vector(&DistributionSpec::complex_gaussian(), d, &mut stream);
        let a2 = sample_vector(&DistributionSpec::complex_gaussian(), d, &mut stream);
        let p = basis.bivariate_poly(&a1).unwrap();
        let q = basis.bivariate_poly(&a2).unwrap();
        let rs = common_zeros_bivariate(&p, &q, n).unwrap();
        assert!(rs.len() <= 64);
        if rs.len() == 64 && rs.max_residual() < 1e-8 {
            full += 1;
        }
    }
    assert!(full >= 95, "full count in {full} of 100 trials");
}

