//! Structural facts about the order checkers, verified on catalog families
//! where the truth is known analytically: ratio ordering implies the usual
//! stochastic order, adjacent-cell and determinant-minor positivity agree,
//! moment curves cross levels at most once, logconcavity survives smoothing,
//! and dispersion behaves as the transform structure dictates.

mod common;

use common::simpson_tol;
use momord::families::{make_builtin, Builtin};
use momord::moments::{GKind, MomentSpec};
use momord::orders::{
    check_disp, check_logconcave, check_lr, check_st, check_tp2_mixed, check_tpr_minors,
    sign_changes, Grid, Verdict, QUANTILE_CLIP,
};
use std::collections::BTreeMap;

fn builtin(name: &str, params: &[(&str, f64)]) -> Builtin<f64> {
    let map: BTreeMap<String, f64> = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
    make_builtin(name, &map).unwrap()
}

fn merged_quantile_grid(b: &Builtin<f64>, t1: f64, t2: f64, n: usize) -> Grid<f64> {
    let g1 = Grid::from_quantiles(|u| b.family.quantile(u, t1), n).unwrap();
    let g2 = Grid::from_quantiles(|u| b.family.quantile(u, t2), n).unwrap();
    g1.merge(&g2)
}

#[test]
fn density_ratio_order_implies_stochastic_order() {
    // Families whose densities are log-supermodular in (x, θ); for them the
    // ratio f(·;θ₂)/f(·;θ₁) is monotone and the CDFs must be nested.
    let cases = [
        builtin("gamma_scale", &[("alpha", 2.0)]),
        builtin("gamma_shape", &[("lambda", 1.0)]),
        builtin("exp_logistic", &[]),
        builtin("levy_type", &[]),
    ];
    let (t1, t2) = (1.0, 2.0);
    for b in &cases {
        let grid = merged_quantile_grid(b, t1, t2, 256);
        let lr = check_lr(
            |x| b.family.density(x, t1),
            |x| b.family.density(x, t2),
            &grid,
        )
        .unwrap();
        let st = check_st(|x| b.family.cdf(x, t1), |x| b.family.cdf(x, t2), &grid).unwrap();
        assert_eq!(
            lr.verdict,
            Verdict::Holds,
            "{}: lr max violation {:e}",
            b.family.name(),
            lr.max_violation
        );
        assert_eq!(
            st.verdict,
            Verdict::Holds,
            "{}: st max violation {:e}",
            b.family.name(),
            st.max_violation
        );
    }
}

#[test]
fn crossing_cdfs_fail_the_stochastic_order_check() {
    // The θ-scaled extreme-value family has CDF exp(-e^{-x/θ}); raising θ
    // pushes mass outward on both sides, so the two CDFs cross at x = 0 and
    // neither parameter dominates. The checker must say so, with a witness on
    // the negative axis where the wider distribution has more mass below.
    let b = builtin("gumbel_std", &[]);
    let (t1, t2) = (1.0, 2.0);
    assert!(b.family.cdf(-1.0, t2) > b.family.cdf(-1.0, t1));
    assert!(b.family.cdf(1.0, t2) < b.family.cdf(1.0, t1));
    let grid = merged_quantile_grid(&b, t1, t2, 256);
    let st = check_st(|x| b.family.cdf(x, t1), |x| b.family.cdf(x, t2), &grid).unwrap();
    assert_eq!(st.verdict, Verdict::Fails);
    assert!(!st.witnesses.is_empty());
    assert!(st.witnesses.iter().all(|w| w.coords[0] < 0.0));
    assert!(st.max_violation > 0.05);
}

#[test]
fn adjacent_cell_and_minor_positivity_checks_agree() {
    // On small grids the exhaustive 2×2-minor check and the adjacent-cell
    // mixed-difference check must reach the same verdict: positive for the
    // gamma scale family, negative for the moving-support uniform family.
    let gamma = builtin("gamma_scale", &[("alpha", 2.0)]);
    let xs = Grid::log_spaced(0.3, 6.0, 9).unwrap();
    let ts = Grid::linspace(0.5, 2.5, 9).unwrap();
    let mixed = check_tp2_mixed(&gamma.family, &xs, &ts).unwrap();
    let minors =
        check_tpr_minors(|x, t| gamma.family.density(x, t), &xs, &ts, 2).unwrap();
    assert_eq!(mixed.verdict, Verdict::Holds);
    assert_eq!(minors.verdict, Verdict::Holds);

    let unif = builtin("uniform_sym", &[]);
    let xs = Grid::from_points(vec![-1.5, -0.5, 0.5, 1.5]).unwrap();
    let ts = Grid::from_points(vec![1.0, 2.0]).unwrap();
    let mixed = check_tp2_mixed(&unif.family, &xs, &ts).unwrap();
    let minors = check_tpr_minors(|x, t| unif.family.density(x, t), &xs, &ts, 2).unwrap();
    assert_eq!(mixed.verdict, Verdict::Fails);
    assert_eq!(minors.verdict, Verdict::Fails);
    // the failing cell straddles the moving support edge on the left
    assert!(mixed.witnesses.iter().any(|w| w.coords[0] == -1.5));
}

#[test]
fn higher_order_minors_hold_for_an_exponential_family() {
    // e^{η(θ)T(x)} kernels are totally positive of every order; check r = 3
    // on a grid small enough for exhaustive subset enumeration.
    let b = builtin("exp_logistic", &[]);
    let xs = Grid::linspace(-3.0, 3.0, 8).unwrap();
    let ts = Grid::linspace(0.5, 3.0, 8).unwrap();
    let report = check_tpr_minors(|x, t| b.family.density(x, t), &xs, &ts, 3).unwrap();
    assert_ne!(report.verdict, Verdict::Fails, "max {:e}", report.max_violation);
}

#[test]
fn moment_curve_crosses_each_level_at_most_once() {
    // Monotone moment functions cut any horizontal level at most once; the
    // sign-change counter applied to m(θ) − c must never see two alternations.
    let b = builtin("gamma_scale", &[("alpha", 2.0)]);
    let thetas = Grid::linspace(0.05, 5.0, 200).unwrap();
    for g in [GKind::Identity, GKind::Log, GKind::SufficientT] {
        let spec = MomentSpec::new(&b, g).unwrap();
        for c in [0.5, 1.0, 2.0, 5.0] {
            let values: Vec<f64> = thetas
                .points()
                .iter()
                .map(|&t| spec.moment(t).unwrap() - c)
                .collect();
            assert!(
                sign_changes(&values) <= 1,
                "{g} at level {c}: {} sign changes",
                sign_changes(&values)
            );
        }
    }
}

#[test]
fn convolving_logconcave_densities_stays_logconcave() {
    // Smoothing a logistic density with Gaussian noise keeps it logconcave;
    // the convolution is computed by quadrature, independent of any library
    // density code.
    let normal = |u: f64| (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let logistic = |y: f64| {
        let e = (-y.abs()).exp();
        e / ((1.0 + e) * (1.0 + e))
    };
    let smoothed = |z: f64| simpson_tol(&|y: f64| normal(z - y) * logistic(y), -30.0, 30.0, 1e-12);
    let grid = Grid::linspace(-6.0, 6.0, 161).unwrap();
    let report = check_logconcave(smoothed, &grid).unwrap();
    assert_eq!(report.verdict, Verdict::Holds, "max {:e}", report.max_violation);

    // Control: a two-bump mixture is not logconcave and the same machinery
    // must catch it.
    let bimodal = |z: f64| 0.5 * (normal(z - 3.0) + normal(z + 3.0));
    let report = check_logconcave(bimodal, &grid).unwrap();
    assert_eq!(report.verdict, Verdict::Fails);
    assert!(report.witnesses.iter().any(|w| w.coords[0].abs() < 1.5));
}

#[test]
fn scale_pairs_are_dispersively_ordered() {
    // When θ multiplies the variable, quantile differences are (θ₂−θ₁)·Q(α),
    // an increasing function, so dispersion ordering is automatic.
    let cases = [
        builtin("uniform_scale", &[]),
        builtin("gamma_scale", &[("alpha", 2.0)]),
        builtin("levy_type", &[]),
    ];
    let alphas = Grid::linspace(QUANTILE_CLIP, 1.0 - QUANTILE_CLIP, 512).unwrap();
    for b in &cases {
        let report = check_disp(
            |a| b.family.quantile(a, 1.0),
            |a| b.family.quantile(a, 2.0),
            &alphas,
        )
        .unwrap();
        assert_eq!(
            report.verdict,
            Verdict::Holds,
            "{}: max violation {:e}",
            b.family.name(),
            report.max_violation
        );
    }
}

#[test]
fn power_transform_pair_is_not_dispersively_ordered() {
    // The Weibull-type family raises a fixed positive variable to the power θ.
    // For θ₁ = 1, θ₂ = 2 the quantile difference is q² − q with q = −ln(1−α),
    // which decreases until q = ½; dispersion ordering genuinely fails.
    let b = builtin("weibull_theta", &[]);
    let alphas = Grid::linspace(QUANTILE_CLIP, 1.0 - QUANTILE_CLIP, 512).unwrap();
    let report = check_disp(
        |a| b.family.quantile(a, 1.0),
        |a| b.family.quantile(a, 2.0),
        &alphas,
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::Fails);
    // every witness sits below the turning point α = 1 − e^{-1/2}
    let turn = 1.0 - (-0.5f64).exp();
    assert!(report
        .witnesses
        .iter()
        .all(|w| w.coords[0] < turn + 1e-12));
}

#[test]
fn location_shift_keeps_dispersion_flat() {
    // Shifting changes no spacing: the quantile difference is constant, so
    // the check must not report a failure (rounding may leave it borderline).
    let b = builtin("logistic_loc", &[]);
    let alphas = Grid::linspace(QUANTILE_CLIP, 1.0 - QUANTILE_CLIP, 512).unwrap();
    let report = check_disp(
        |a| b.family.quantile(a, 0.0),
        |a| b.family.quantile(a, 1.0),
        &alphas,
    )
    .unwrap();
    assert_ne!(report.verdict, Verdict::Fails, "max {:e}", report.max_violation);
    assert!(report.max_violation < 1e-12);
}
