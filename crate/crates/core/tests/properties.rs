//! Property tests for the algebraic invariants of the core operations.

use proptest::prelude::*;
use seeplab_core::analysis::{collapse_metric, fit_powerlaw, WindowPolicy};
use seeplab_core::params::PhysicalParams;
use seeplab_core::profile::{dipole_moment, mass, Profile};

fn profile_strategy() -> impl Strategy<Value = Profile> {
    (
        prop::collection::vec(0.0..5.0f64, 8..40),
        0.0..3.0f64,
        0.1..4.0f64,
    )
        .prop_map(|(mut heights, x_left, width)| {
            let n = heights.len();
            heights[0] = 0.0;
            heights[n - 1] = 0.0;
            Profile {
                x_left,
                x_right: x_left + width,
                heights,
                time: 0.0,
            }
        })
}

proptest! {
    #[test]
    fn integrals_are_linear_in_height(p in profile_strategy(), a in 0.0..10.0f64) {
        let scaled = Profile {
            heights: p.heights.iter().map(|&h| a * h).collect(),
            ..p.clone()
        };
        let m = mass(&p);
        let q = dipole_moment(&p);
        prop_assert!((mass(&scaled) - a * m).abs() <= 1e-12 * (1.0 + a * m.abs()));
        prop_assert!((dipole_moment(&scaled) - a * q).abs() <= 1e-10 * (1.0 + a * q.abs()));
        prop_assert!(m >= 0.0);
    }

    #[test]
    fn kappa_branch_swaps_with_sign(d2 in 1e-12..1e6f64, delta in 0.01..0.95f64) {
        let p = PhysicalParams::new(1.0, delta, 1.0).unwrap();
        prop_assert_eq!(p.kappa_select(d2), p.kappa1);
        prop_assert_eq!(p.kappa_select(-d2), p.kappa2);
    }

    #[test]
    fn power_law_fit_is_exact_and_scale_covariant(
        exponent in -1.5..1.5f64,
        prefactor in 0.1..10.0f64,
        scale in 0.1..50.0f64,
    ) {
        let pts: Vec<(f64, f64)> = (0..24)
            .map(|i| {
                let t = 0.2 * 1.3f64.powi(i);
                (t, prefactor * t.powf(exponent))
            })
            .collect();
        let fit = fit_powerlaw(&pts, WindowPolicy::Full).unwrap();
        prop_assert!((fit.exponent - exponent).abs() < 1e-9);
        prop_assert!((fit.r_squared - 1.0).abs() < 1e-9);

        let rescaled: Vec<(f64, f64)> = pts.iter().map(|&(t, y)| (scale * t, y)).collect();
        let fit2 = fit_powerlaw(&rescaled, WindowPolicy::Full).unwrap();
        prop_assert!((fit2.exponent - exponent).abs() < 1e-9);
        let expected_prefactor = prefactor * scale.powf(-exponent);
        prop_assert!(
            (fit2.prefactor - expected_prefactor).abs() <= 1e-6 * expected_prefactor
        );
    }

    #[test]
    fn collapse_metric_ignores_height_and_x_scaling(
        p in profile_strategy(),
        height_scale in 0.1..20.0f64,
        x_scale in 0.1..10.0f64,
        x_shift in 0.0..5.0f64,
    ) {
        prop_assume!(p.heights.iter().any(|&h| h > 0.0));
        let transformed = Profile {
            x_left: x_shift + x_scale * p.x_left,
            x_right: x_shift + x_scale * p.x_right,
            heights: p.heights.iter().map(|&h| height_scale * h).collect(),
            time: 1.0,
        };
        let m = collapse_metric(&[p, transformed]).unwrap();
        prop_assert!(m < 1e-9, "metric {} for a pure rescaling", m);
    }
}
