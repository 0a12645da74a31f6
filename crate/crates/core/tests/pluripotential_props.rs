use num_complex::Complex64;
use zerolab::basis::{closed_form_basis, gram_basis, WeightedSet};
use zerolab::coeffs::{sample_vector, DistributionSpec};
use zerolab::pluripotential::{extremal_bergman_estimate, extremal_bergman_estimate_for, normalize_on_k, siciak_lower_bound};
use zerolab::rng::RandomStream;

fn plane_grid() -> Vec<Vec<Complex64>> {
    let mut g = Vec::new();
    for r in [0.3, 0.9, 1.0, 1.7, 4.0] {
        for j in 0..12 {
            g.push(vec![Complex64::from_polar(r, 0.5 + j as f64 * std::f64::consts::TAU / 12.0)]);
        }
    }
    g
}

#[test]
fn bergman_estimate_dominates_random_sections() {
    let n = 12;
    for set in [WeightedSet::circle(), WeightedSet::circle_fs(), WeightedSet::projective(1)] {
        let basis = closed_form_basis(&set, n).unwrap();
        let grid = plane_grid();
        let est = extremal_bergman_estimate(&basis, &grid).unwrap();
        let mut s = RandomStream::new(8, 0);
        let sections: Vec<_> = (0..6)
            .map(|_| normalize_on_k(&basis, &sample_vector(&DistributionSpec::complex_gaussian(), basis.dimension(), &mut s)).unwrap())
            .collect();
        for (x, v) in grid.iter().zip(&est.values) {
            let lower = siciak_lower_bound(&basis, &sections, x).unwrap();
            assert!(*v >= lower - 1e-6, "{}: {v} < {lower}", set.name());
        }
    }
}

#[test]
fn sup_error_shrinks_with_degree() {
    let one: Vec<Vec<Complex64>> = plane_grid();
    let two: Vec<Vec<Complex64>> = (0..8)
        .flat_map(|i| (0..8).map(move |j| (i, j)))
        .map(|(i, j)| vec![Complex64::from_polar(1.0, i as f64 * 0.8), Complex64::from_polar(1.0, j as f64 * 0.8 + 0.1)])
        .collect();
    for (set, grid) in [
        (WeightedSet::circle(), &one),
        (WeightedSet::circle_fs(), &one),
        (WeightedSet::projective(1), &one),
        (WeightedSet::torus(), &two),
        (WeightedSet::polydisc(2), &two),
    ] {
        let e32 = extremal_bergman_estimate_for(&set, 32, grid).unwrap().sup_error.unwrap();
        let e128 = extremal_bergman_estimate_for(&set, 128, grid).unwrap().sup_error.unwrap();
        assert!(e128 < e32, "{}: {e128} vs {e32}", set.name());
    }
}

#[test]
fn closed_forms_agree_with_gram_where_both_exist() {
    let n = 6;
    for set in [WeightedSet::circle(), WeightedSet::circle_fs(), WeightedSet::torus(), WeightedSet::sphere_ball(2), WeightedSet::projective(1)] {
        let a = closed_form_basis(&set, n).unwrap();
        let b = gram_basis(&set, n).unwrap();
        let x = vec![Complex64::new(0.4, -0.7); set.dim()];
        let (ba, bb) = (a.log_bergman_diagonal(&x), b.log_bergman_diagonal(&x));
        assert!((ba - bb).abs() < 1e-9, "{}: {ba} vs {bb}", set.name());
    }
}

#[test]
fn weighted_circle_bergman_respects_the_weight() {
    use zerolab::basis::CircleWeight;
    let n = 24;
    let set = WeightedSet::weighted_circle(CircleWeight::Cosine { amplitude: 0.3 });
    let grid: Vec<Vec<Complex64>> = (0..32).map(|j| vec![Complex64::from_polar(1.0, j as f64 * 0.19)]).collect();
    let est = extremal_bergman_estimate_for(&set, n, &grid).unwrap();
    let slack = (n as f64 + 1.0).ln() / (2.0 * n as f64);
    for (x, v) in grid.iter().zip(&est.values) {
        let q = set.q(&[x[0]]);
        assert!(*v <= q + 1.5 * slack, "{v} > {q} + slack");
    }
}
