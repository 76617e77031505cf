use proptest::prelude::*;
use wks_core::lp_approx::{certify_lp, ProcessSpec};
use wks_core::ms_bounds::{b_n, belyaev_bound, c_n, exact_increment_error, exact_ms_error};
use wks_core::orlicz::legendre_transform;
use wks_core::sampling::{abel_sum_bound_check, sine_sum_bound_check, truncated_sum};
use wks_core::uniform_approx::uniform_tail_wks;
use wks_core::{LatticeSamples, OrliczFunction, SamplingConfig, SpectralMeasure};

fn family() -> impl Strategy<Value = OrliczFunction> {
    prop_oneof![
        Just(OrliczFunction::gaussian()),
        (1.05f64..=2.0).prop_map(|a| OrliczFunction::power(a).unwrap()),
        (2.0f64..6.0).prop_map(|a| OrliczFunction::weibull_piecewise(a).unwrap()),
    ]
}

fn symmetric_measure(band_edge: f64) -> impl Strategy<Value = SpectralMeasure> {
    prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 1..=10).prop_map(move |pairs| {
        let atoms = pairs
            .into_iter()
            .flat_map(|(u, m)| {
                let l = u * band_edge * (1.0 - 1e-9);
                [(l, 0.5 * m), (-l, 0.5 * m)]
            })
            .collect();
        SpectralMeasure::new(atoms, band_edge).unwrap()
    })
}

proptest! {
    #[test]
    fn fenchel_young(phi in family(), x in 0.0f64..20.0, y in 0.0f64..20.0) {
        let lhs = x * y;
        let rhs = phi.evaluate(x) + phi.conjugate(y).unwrap();
        prop_assert!(lhs <= rhs * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn conjugate_matches_numeric_sup(phi in family(), x in 0.1f64..10.0) {
        let closed = phi.conjugate(x).unwrap();
        let numeric = legendre_transform(|y| phi.evaluate(y), x).unwrap();
        prop_assert!((closed - numeric).abs() <= 1e-8 * closed.max(1.0));
    }

    #[test]
    fn inverse_round_trip(phi in family(), y in 1e-6f64..1e3) {
        let x = phi.inverse(y).unwrap();
        prop_assert!((phi.evaluate(x) - y).abs() <= 1e-9 * y);
    }

    #[test]
    fn truncated_sum_interpolates(omega in 0.5f64..4.0, n in 1u64..40, k in 0i64..40, seed in 0u64..1000) {
        let k = k % (n as i64 + 1);
        let config = SamplingConfig::new(omega, 0.5 * omega, 1.0, n).unwrap();
        let samples = LatticeSamples::from_fn(n, |j| ((j as f64) * 0.37 + seed as f64).sin());
        let t = config.lattice_time(k);
        prop_assert!((truncated_sum(&samples, &config, t).unwrap() - samples.get(k).unwrap()).abs() < 1e-12);
        let t = config.lattice_time(-k);
        prop_assert!((truncated_sum(&samples, &config, t).unwrap() - samples.get(-k).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn sine_sum_lemma(n in 0u64..500, len in 1u64..500, nu in 1e-3f64..=1.0) {
        prop_assert!(sine_sum_bound_check(n, n + len, nu).unwrap().holds);
    }

    #[test]
    fn abel_lemma(n in 0u64..300, a in prop::collection::vec(-10.0f64..10.0, 3..80), nu in 1e-3f64..=1.0) {
        prop_assert!(abel_sum_bound_check(n, &a, nu).unwrap().holds);
    }

    #[test]
    fn ms_bound_dominates_exact_error(
        ratio in 0.3f64..0.9,
        measure in symmetric_measure(1.0),
        omega_scale in 0.5f64..3.0,
        n in 1u64..60,
        t_frac in 0.01f64..=1.0,
    ) {
        let omega = omega_scale;
        let band_edge = ratio * omega;
        let atoms: Vec<_> = measure.atoms().iter().map(|&(l, m)| (l * band_edge, m)).collect();
        let measure = SpectralMeasure::new(atoms, band_edge).unwrap();
        let horizon = n as f64 * std::f64::consts::PI / omega * 0.99;
        let config = SamplingConfig::new(omega, band_edge, horizon, n).unwrap();
        let t = t_frac * horizon;
        let b0 = measure.total_mass();
        let bound = c_n(&config, b0, t).unwrap().bound_value;
        let exact = exact_ms_error(&measure, &config, t, n).unwrap();
        prop_assert!(exact <= bound, "exact {exact} > bound {bound}");
        prop_assert!(exact <= belyaev_bound(&config, b0, t) * (1.0 + 1e-12));
    }

    #[test]
    fn increment_bound_dominates(
        ratio in 0.3f64..0.9,
        measure in symmetric_measure(1.0),
        n in 1u64..40,
        t_frac in 0.01f64..=1.0,
        s_frac in 0.01f64..=1.0,
    ) {
        let omega = 1.0;
        let band_edge = ratio;
        let atoms: Vec<_> = measure.atoms().iter().map(|&(l, m)| (l * band_edge, m)).collect();
        let measure = SpectralMeasure::new(atoms, band_edge).unwrap();
        let horizon = n as f64 * std::f64::consts::PI * 0.99;
        let config = SamplingConfig::new(omega, band_edge, horizon, n).unwrap();
        let (t, s) = (t_frac * horizon, s_frac * horizon);
        let bound = b_n(&config, measure.total_mass(), t, s).unwrap().bound_value;
        let exact = exact_increment_error(&measure, &config, t, s).unwrap();
        prop_assert!(exact <= bound * (1.0 + 1e-9) + 1e-300, "exact {exact} > bound {bound}");
    }

    #[test]
    fn lp_certification_is_monotone_in_n(
        phi in family(),
        c_x in 0.5f64..2.0,
        p in 1.0f64..3.0,
        eps in 0.01f64..2.0,
        delta in 0.01f64..0.9,
    ) {
        let spec = ProcessSpec::new(1.0, 0.75, c_x, phi).unwrap();
        let mut seen = false;
        for n in (1..400).step_by(7) {
            let config = spec.sampling(1.0, 1.0, n).unwrap();
            let ok = certify_lp(&spec, &config, p, eps, delta).unwrap().certified;
            prop_assert!(!(seen && !ok), "certificate lost at n = {n}");
            seen |= ok;
        }
    }

    #[test]
    fn uniform_bound_decreases_in_eps(n in 2u64..500, theta in 0.05f64..0.95) {
        let spec = ProcessSpec::gaussian(1.0, 0.75).unwrap();
        let config = spec.sampling(1.0, 1.0, n).unwrap();
        let mut prev = f64::INFINITY;
        for i in 1..30 {
            let b = uniform_tail_wks(&spec, &config, theta, 0.05 * i as f64).unwrap().bound.unwrap();
            prop_assert!(b <= prev);
            prev = b;
        }
    }
}
