//! Fixed-seed runs used to pin the regression thresholds of the acceptance suite.
//!
//! `cargo run --release --example pilot`

use std::time::Instant;
use zerolab::coeffs::DistributionSpec;
use zerolab::ensemble::{sample_zeros, BasisPath, Ensemble};
use zerolab::mc::{median, Estimate};
use zerolab::rng::rng_split;
use zerolab::stats::{
    alpha_n_statistic, angular_ks, annulus_mass, expected_measure_mc, radial_cdf_distance, variance_probe, McSettings,
    ProbeMeasure, RadialLaw, TestFunction,
};
use zerolab::zeros::{RootOptions, RootSet};

const SEED: u64 = 20240611;

fn trials(ens: &Ensemble, dist: &DistributionSpec, n: usize, count: usize) -> Vec<RootSet> {
    use rayon::prelude::*;
    let basis = ens.basis(n, BasisPath::Auto).unwrap();
    (0..count)
        .into_par_iter()
        .map(|t| {
            let mut s = rng_split(SEED, n as u64, t as u64);
            sample_zeros(&basis, dist, 1, &mut s, &RootOptions::default(), 5).unwrap().roots
        })
        .collect()
}

fn main() {
    let gauss = DistributionSpec::complex_gaussian();
    let t0 = Instant::now();
    for n in [32, 64, 128] {
        let sets = trials(&Ensemble::Kac {}, &gauss, n, 100);
        let ks: Vec<f64> = sets.iter().map(|r| angular_ks(r).unwrap()).collect();
        let am: Vec<f64> = sets.iter().map(|r| annulus_mass(r, 0.1).unwrap()).collect();
        println!("kac n={n}: median ks {:.4}, mean annulus {:.4}", median(&ks), Estimate::from_samples(&am).mean);
    }
    for rho in [3.0, 0.7] {
        let dist = DistributionSpec::log_pareto(rho, 0.5).unwrap();
        let sets = trials(&Ensemble::Kac {}, &dist, 128, 100);
        let am: Vec<f64> = sets.iter().map(|r| annulus_mass(r, 0.1).unwrap()).collect();
        println!("kac log-pareto rho={rho}: mean annulus {:.4}", Estimate::from_samples(&am).mean);
    }
    println!("[{:.1?}]", t0.elapsed());
    for n in [32, 64, 128] {
        let sets = trials(&Ensemble::Elliptic { m: 1 }, &gauss, n, 100);
        let d: Vec<f64> = sets.iter().map(|r| radial_cdf_distance(r, RadialLaw::FubiniStudy).unwrap()).collect();
        println!("elliptic n={n}: median radial distance {:.4}", median(&d));
    }
    println!("[{:.1?}]", t0.elapsed());
    let fns = [
        TestFunction::RadialRational,
        TestFunction::AngularFourier { k: 1 },
        TestFunction::AngularFourier { k: 2 },
        TestFunction::Bump { center: [0.6, 0.3], radius: 0.8 },
        TestFunction::RadialBand { center: 0.0, width: 0.7 },
    ];
    for ens in [Ensemble::Kac {}, Ensemble::KacFs {}, Ensemble::Elliptic { m: 1 }] {
        for n in [32, 128] {
            let basis = ens.basis(n, BasisPath::Auto).unwrap();
            for phi in &fns {
                let a = alpha_n_statistic(&basis, phi).unwrap();
                let r = expected_measure_mc(&basis, &gauss, 1, phi, &McSettings::new(500, SEED)).unwrap();
                let z = (r.value - a) / r.stderr.unwrap();
                println!("{:?} n={n} {}: alpha {a:.6} mc {:.6} se {:.2e} z {z:+.2}", ens, phi.name(), r.value, r.stderr.unwrap());
            }
        }
    }
    println!("[{:.1?}]", t0.elapsed());
    for nu in [ProbeMeasure::FubiniStudy { scale: 2.0 }, ProbeMeasure::TorusBand { inner: 0.5, outer: 2.0 }] {
        for n in [16, 64, 256] {
            let basis = Ensemble::Elliptic { m: 1 }.basis(n, BasisPath::Auto).unwrap();
            let r = variance_probe(&basis, &gauss, &nu, &McSettings::new(100, SEED)).unwrap();
            println!("variance {nu:?} n={n}: {:.3e} +- {:.1e}", r.value, r.stderr.unwrap());
        }
    }
    println!("[{:.1?}]", t0.elapsed());
}
