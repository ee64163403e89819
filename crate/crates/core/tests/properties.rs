use std::f64::consts::PI;

use num_complex::Complex64;
use phasewitness::noise::{self, DetectionNoise, ThermalNoise};
use phasewitness::qp::{self, PhotonDistribution};
use phasewitness::states::{self, SingleModeState, TmsvSpec};
use phasewitness::validate;
use phasewitness::witness::{self, BellCoefficients, BellSettings, ClampRule};
use phasewitness::{OrderParam, PhaseSpacePoint};
use proptest::prelude::*;

fn settings() -> impl Strategy<Value = BellSettings> {
    prop::array::uniform8(-2.0f64..2.0).prop_map(|c| BellSettings::from_coords(&c))
}

fn point() -> impl Strategy<Value = PhaseSpacePoint> {
    (-2.0f64..2.0, -2.0f64..2.0).prop_map(|(re, im)| PhaseSpacePoint::new(Complex64::new(re, im)).unwrap())
}

fn state() -> impl Strategy<Value = SingleModeState> {
    prop_oneof![
        Just(SingleModeState::Vacuum),
        (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(a, b)| SingleModeState::Coherent(Complex64::new(a, b))),
        (0.0f64..2.0).prop_map(SingleModeState::Thermal),
        (0u32..4).prop_map(SingleModeState::Fock),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn eigenvalues_bounded(n in 0u32..600, s in -1.0f64..=0.0) {
        prop_assert!(witness::observable_eigenvalue(n, s).abs() <= 1.0 + 1e-15);
    }

    #[test]
    fn clamped_eigenvalues_bounded(n in 0u32..600, sp in -20.0f64..-1.0) {
        for rule in [ClampRule::LossChannel, ClampRule::FrozenCoefficients] {
            prop_assert!(witness::effective_eigenvalue(n, sp, rule).abs() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn witness_matches_operator_expansion(x in settings(), xi in 0.0f64..1.0, s in -1.0f64..=0.0) {
        let spec = TmsvSpec::new(xi).unwrap();
        let b = witness::bell_value(
            |a, b| spec.w2_at(a, b, s),
            |a| spec.w1_at(a, s),
            |b| spec.w1_at(b, s),
            &x,
            &OrderParam::real(s).unwrap(),
        ).unwrap();
        prop_assert!((b - validate::expansion(&spec, &x, s)).abs() < 1e-12);
    }

    #[test]
    fn product_states_never_violate(x in settings(), a in state(), b in state(), s in -1.0f64..=0.0) {
        let coeffs = BellCoefficients::at(s);
        let v = witness::bell_value_with(
            &coeffs,
            |p, q| a.analytic_w(p, s) * b.analytic_w(q, s),
            |p| a.analytic_w(p, s),
            |q| b.analytic_w(q, s),
            &x,
        );
        prop_assert!(v.abs() <= 2.0 + 1e-9, "{v}");
    }

    #[test]
    fn noisy_forms_agree(x in settings(), xi in 0.0f64..0.8, s in -1.0f64..=0.0, eta in 0.05f64..=1.0) {
        let spec = TmsvSpec::new(xi).unwrap();
        let o = OrderParam::real(s).unwrap();
        let det = witness::bell_value_detection(&spec, &x, &o, &DetectionNoise::new(eta).unwrap()).unwrap();
        let th = ThermalNoise::new((1.0 - eta).sqrt(), 0.0).unwrap();
        let thermal = witness::bell_value_thermal(&spec, &x.scaled(th.t()), &o, &th).unwrap();
        prop_assert!((det.bell_value - thermal.bell_value).abs() < 1e-10);
        prop_assert_eq!(det.violated, det.bell_abs > 2.0);
    }

    #[test]
    fn detection_rescalings_compose(s in -1.0f64..=0.0, e1 in 0.05f64..=1.0, e2 in 0.05f64..=1.0) {
        let o = OrderParam::real(s).unwrap();
        let twice = noise::rescale_detection(
            &noise::rescale_detection(&o, &DetectionNoise::new(e1).unwrap()),
            &DetectionNoise::new(e2).unwrap(),
        );
        let once = noise::rescale_detection(&o, &DetectionNoise::new(e1 * e2).unwrap());
        let (a, b) = (twice.as_real().unwrap(), once.as_real().unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
    }

    #[test]
    fn thinning_preserves_mass(probs in prop::collection::vec(0.0f64..1.0, 1..40), eta in 0.01f64..=1.0) {
        let total: f64 = probs.iter().sum();
        prop_assume!(total > 1e-3);
        let p = PhotonDistribution::new(probs.iter().map(|x| x / total).collect(), 0.0).unwrap();
        let q = noise::bernoulli_detect(&p, &DetectionNoise::new(eta).unwrap());
        let mean_p: f64 = p.probs().iter().enumerate().map(|(n, x)| n as f64 * x).sum();
        let mean_q: f64 = q.probs().iter().enumerate().map(|(n, x)| n as f64 * x).sum();
        prop_assert!((q.probs().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(q.probs().iter().all(|&x| x >= 0.0));
        prop_assert!((mean_q - eta * mean_p).abs() < 1e-10);
    }

    #[test]
    fn series_matches_closed_form(st in state(), alpha in point(), s in -1.0f64..=0.0, eta in 0.2f64..=1.0) {
        let p = states::photon_distribution(&st, alpha, 200).unwrap();
        let o = OrderParam::real(s).unwrap();
        let det = DetectionNoise::new(eta).unwrap();
        let lossy = noise::lossy_w(&p, &o, &det, 1e-8).unwrap();
        let sp = noise::rescale_detection(&o, &det).as_real().unwrap();
        prop_assert!((lossy - st.analytic_w(alpha.alpha(), sp) / eta).abs() < 1e-8);
    }

    #[test]
    fn quasiprobabilities_respect_sup(st in state(), alpha in point(), s in -1.0f64..=0.0) {
        prop_assert!(st.analytic_w(alpha.alpha(), s).abs() <= qp::physical_sup(s) * (1.0 + 1e-12));
    }

    #[test]
    fn parity_coefficients_match_definition(n in 0u32..60, s in -3.0f64..0.9) {
        let c = qp::parity_coefficient(n, &OrderParam::rescaled(s).unwrap()).unwrap();
        let expect = ((s + 1.0) / (s - 1.0)).powi(n as i32) / (1.0 - s);
        prop_assert!((c.re - expect).abs() <= 1e-12 * expect.abs());
        prop_assert_eq!(c.im, 0.0);
    }

    #[test]
    fn tmsv_marginal_is_thermal(xi in 0.0f64..1.5, alpha in point(), s in -2.0f64..=0.0) {
        let spec = TmsvSpec::new(xi).unwrap();
        let thermal = SingleModeState::Thermal(spec.marginal_nbar());
        let a = spec.w1_at(alpha.alpha(), s);
        prop_assert!((a - thermal.analytic_w(alpha.alpha(), s)).abs() < 1e-12);
        prop_assert!(a <= 2.0 / (PI * (1.0 - s)) + 1e-12);
    }
}
