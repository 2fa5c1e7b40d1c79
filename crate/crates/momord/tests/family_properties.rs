//! Whole-catalog distribution checks against test-side oracles: densities
//! integrate to one, CDFs match integrated densities, quantiles invert CDFs,
//! samplers track their CDFs, and exponential-family moment formulas match
//! direct integrals.

mod common;

use common::{ecdf_sup_distance, integrate_split};
use momord::families::{make_builtin, Builtin};
use momord::rng::CounterRng;
use std::collections::BTreeMap;

const CATALOG: &[(&str, &[(&str, f64)])] = &[
    ("uniform_sym", &[]),
    ("levy_type", &[]),
    ("gamma_scale", &[("alpha", 2.0)]),
    ("gamma_scale", &[("alpha", 0.5)]),
    ("gamma_shape", &[("lambda", 1.0)]),
    ("exp_logistic", &[]),
    ("uniform_scale", &[]),
    ("logistic_loc", &[]),
    ("weibull_theta", &[]),
    ("gumbel_std", &[]),
];

fn builtin(name: &str, params: &[(&str, f64)]) -> Builtin<f64> {
    let map: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    make_builtin(name, &map).unwrap()
}

fn thetas_for(name: &str) -> [f64; 2] {
    if name == "logistic_loc" {
        [-0.5, 1.3]
    } else {
        [0.7, 2.3]
    }
}

/// Integration breakpoints at quantile levels covering all but ~2e−9 of the
/// mass. The quantile values only steer where Simpson refines; the integral
/// itself never depends on them being exact.
fn quantile_cuts(b: &Builtin<f64>, theta: f64) -> Vec<f64> {
    const U: [f64; 17] = [
        1e-9,
        1e-6,
        1e-4,
        1e-3,
        0.01,
        0.05,
        0.1,
        0.25,
        0.5,
        0.75,
        0.9,
        0.95,
        0.99,
        0.999,
        1.0 - 1e-4,
        1.0 - 1e-6,
        1.0 - 1e-9,
    ];
    let mut cuts: Vec<f64> = U.iter().map(|&u| b.family.quantile(u, theta)).collect();
    cuts.dedup_by(|a, b| a == b);
    cuts
}

#[test]
fn densities_integrate_to_one() {
    for &(name, params) in CATALOG {
        let b = builtin(name, params);
        for theta in thetas_for(name) {
            let cuts = quantile_cuts(&b, theta);
            let mass = integrate_split(&|x: f64| b.family.density(x, theta), &cuts, 1e-10);
            assert!(
                (mass - 1.0).abs() < 1e-6,
                "{name}(theta={theta}): mass {mass}"
            );
        }
    }
}

#[test]
fn cdf_matches_integrated_density() {
    for &(name, params) in CATALOG {
        let b = builtin(name, params);
        let theta = thetas_for(name)[1];
        for u in [0.2, 0.5, 0.9] {
            let x = b.family.quantile(u, theta);
            let direct = b.family.cdf(x, theta);
            let mut cuts: Vec<f64> = quantile_cuts(&b, theta)
                .into_iter()
                .filter(|&c| c < x)
                .collect();
            cuts.push(x);
            let integrated =
                integrate_split(&|t: f64| b.family.density(t, theta), &cuts, 1e-11);
            assert!(
                (direct - integrated).abs() < 5e-7,
                "{name}(theta={theta}) at x={x}: cdf {direct} vs integral {integrated}"
            );
        }
    }
}

#[test]
fn quantile_inverts_cdf() {
    for &(name, params) in CATALOG {
        let b = builtin(name, params);
        for theta in thetas_for(name) {
            for i in 1..40 {
                let u = i as f64 / 40.0;
                let x = b.family.quantile(u, theta);
                let back = b.family.cdf(x, theta);
                assert!(
                    (back - u).abs() < 1e-9,
                    "{name}(theta={theta}): cdf(quantile({u})) = {back}"
                );
            }
        }
    }
}

#[test]
fn samplers_track_their_cdfs() {
    // Kolmogorov distance below the DKW bound at failure probability 1e−6;
    // the run is deterministic, so this either always passes or always fails.
    let n = 100_000;
    let eps = ((2.0_f64 / 1e-6).ln() / (2.0 * n as f64)).sqrt();
    for &(name, params) in CATALOG {
        let b = builtin(name, params);
        let theta = thetas_for(name)[0];
        let mut rng = CounterRng::substream(2024, &[name.len() as u64, params.len() as u64]);
        let mut sample: Vec<f64> = (0..n).map(|_| b.family.sample(theta, &mut rng)).collect();
        let d = ecdf_sup_distance(&mut sample, |x| b.family.cdf(x, theta));
        assert!(d < eps, "{name}(theta={theta}): sup distance {d} vs {eps}");
    }
}

#[test]
fn support_bounds_are_honored() {
    let n = 2_000;
    for &(name, params) in CATALOG {
        let b = builtin(name, params);
        for theta in thetas_for(name) {
            let support = b.family.support(theta);
            let mut rng = CounterRng::substream(7, &[name.len() as u64]);
            for _ in 0..n {
                let x = b.family.sample(theta, &mut rng);
                assert!(
                    support.contains(x),
                    "{name}(theta={theta}): sample {x} outside [{}, {}]",
                    support.lower,
                    support.upper
                );
            }
            // density vanishes just outside a finite endpoint
            if support.lower.is_finite() {
                let outside = support.lower - 1e-6 * (1.0 + support.lower.abs());
                assert_eq!(b.family.density(outside, theta), 0.0, "{name} below support");
            }
            if support.upper.is_finite() {
                let outside = support.upper + 1e-6 * (1.0 + support.upper.abs());
                assert_eq!(b.family.density(outside, theta), 0.0, "{name} above support");
            }
        }
    }
}

#[test]
fn exponential_family_moments_match_integrals() {
    for name in ["levy_type", "gamma_scale", "gamma_shape", "exp_logistic"] {
        let params: &[(&str, f64)] = if name == "gamma_scale" {
            &[("alpha", 2.0)]
        } else if name == "gamma_shape" {
            &[("lambda", 1.0)]
        } else {
            &[]
        };
        let b = builtin(name, params);
        let ef = b.exp.as_ref().expect("decomposition exists");
        for theta in [0.8, 1.7] {
            let cuts = quantile_cuts(&b, theta);
            let m1 = integrate_split(
                &|x: f64| ef.big_t(x) * b.family.density(x, theta),
                &cuts,
                1e-11,
            );
            let m2 = integrate_split(
                &|x: f64| ef.big_t(x).powi(2) * b.family.density(x, theta),
                &cuts,
                1e-11,
            );
            let mean = ef.mean_t(theta).unwrap();
            let var = ef.var_t(theta).unwrap();
            assert!(
                (mean - m1).abs() < 1e-6 * (1.0 + m1.abs()),
                "{name}(theta={theta}): mean_t {mean} vs integral {m1}"
            );
            assert!(
                (var - (m2 - m1 * m1)).abs() < 1e-5 * (1.0 + var.abs()),
                "{name}(theta={theta}): var_t {var} vs integral {}",
                m2 - m1 * m1
            );
        }
    }
}

#[test]
fn reconstructed_densities_match_direct_ones() {
    for name in ["levy_type", "gamma_scale", "gamma_shape", "exp_logistic"] {
        let params: &[(&str, f64)] = if name == "gamma_scale" {
            &[("alpha", 1.5)]
        } else if name == "gamma_shape" {
            &[("lambda", 2.0)]
        } else {
            &[]
        };
        let b = builtin(name, params);
        let ef = b.exp.as_ref().unwrap();
        for theta in [0.6, 1.9] {
            for u in [0.05, 0.3, 0.5, 0.8, 0.99] {
                let x = b.family.quantile(u, theta);
                let direct = b.family.density(x, theta);
                let rebuilt = ef.reconstructed_density(x, theta);
                assert!(
                    (direct - rebuilt).abs() < 1e-9 * (1.0 + direct),
                    "{name}(theta={theta}, x={x}): {direct} vs {rebuilt}"
                );
            }
        }
    }
}
