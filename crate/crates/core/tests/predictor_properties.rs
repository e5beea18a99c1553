use eqbif::continuation::{detect_bifurcation, GalerkinProblem};
use eqbif::potentials::builtin;
use eqbif::predictor::{lambda_set, slice_spectrum};
use eqbif::spectral::Domain;
use num_rational::Rational64;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rescaling_lambda_rescales_the_level_set(num in 1i64..12, den in 1i64..6, n in 2usize..5) {
        let c = Rational64::new(num, den);
        let cf = num as f64 / den as f64;
        let domain = Domain::sphere(n).unwrap();
        for name in ["pitchfork-scalar", "so2-ring"] {
            let spec = builtin(name).unwrap();
            let base = lambda_set(&spec, &domain, 30.0).unwrap();
            let scaled = lambda_set(&spec.rescaled(c), &domain, 30.0).unwrap();
            prop_assert_eq!(base.len(), scaled.len());
            for (a, b) in base.iter().zip(&scaled) {
                prop_assert!((a / cf - b).abs() <= 1e-12 * a.abs().max(1.0), "{} vs {}", a / cf, b);
            }
        }
    }

    #[test]
    fn slice_spectrum_vanishes_exactly_at_levels(n in 2usize..5, lambda in 0.05..25.0f64) {
        let spec = builtin("pitchfork-scalar").unwrap();
        let domain = Domain::sphere(n).unwrap();
        let levels = lambda_set(&spec, &domain, 40.0).unwrap();
        let s = slice_spectrum(&spec, &domain, lambda, 40.0).unwrap();
        let on_level = levels.iter().any(|l| (l - lambda).abs() < 1e-9);
        prop_assert_eq!(s.zero_blocks().next().is_some(), on_level);
    }
}

#[test]
fn detected_sphere_levels_are_predicted() {
    let cases = [
        ("pitchfork-scalar", Domain::circle()),
        ("pitchfork-subcritical", Domain::circle()),
        ("so2-ring", Domain::circle()),
        ("pitchfork-scalar", Domain::sphere2()),
    ];
    for (name, domain) in cases {
        let spec = builtin(name).unwrap();
        let problem = GalerkinProblem::with_default_truncation(domain, spec.clone()).unwrap();
        let predicted = lambda_set(&spec, &domain, 25.0).unwrap();
        let detected = detect_bifurcation(&problem, (0.3, 12.5), 60).unwrap();
        assert!(!detected.is_empty(), "{name} on {domain}: nothing detected");
        for d in detected {
            assert!(
                predicted.iter().any(|l| (l - d).abs() < 1e-7),
                "{name} on {domain}: detected {d} not in {predicted:?}"
            );
        }
    }
}
