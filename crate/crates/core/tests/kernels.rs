use std::f64::consts::PI;

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use udleak_core::integrals::{
    gaussian_integral_set, oracle_quadrature, IntegralName, OracleKernel, OracleSettings,
    QuadratureSettings,
};
use udleak_core::model::*;
use udleak_core::quad::AdaptiveOptions;
use udleak_core::wightman::{wightman_mode_sum, wightman_position, ModeKernel, PositionKernel};

#[test]
fn mode_sum_matches_position_form() {
    let mut rng = StdRng::seed_from_u64(7);
    let opts = AdaptiveOptions::new(1e-13, 1e-11);
    for mass in [0.0, 0.5, 1.0] {
        for _ in 0..20 {
            let eps = rng.gen_range(0.04..0.06);
            let dt = rng.gen_range(-3.0..3.0);
            let r = rng.gen_range(0.0..3.0);
            let c = rng.gen_range(0.7..1.5);
            let pos = wightman_position(&PositionKernel::new(mass, c, eps).unwrap(), dt, r);
            let modes = wightman_mode_sum(&ModeKernel::new(mass, c), dt, r, eps, opts).unwrap();
            let err = (pos - modes.value).norm();
            assert!(
                err <= 1e-9 * pos.norm().max(1.0),
                "m={mass} dt={dt} r={r} eps={eps}: {pos} vs {}",
                modes.value
            );
        }
    }
}

#[test]
fn mode_sum_matches_position_form_small_regulator() {
    let opts = AdaptiveOptions::new(1e-12, 1e-10).with_max_intervals(200_000);
    for (mass, dt, r) in [(0.0, 0.7, 0.3), (0.5, 1.2, 2.0), (1.0, -0.4, 1.0)] {
        let eps = 1e-3;
        let pos = wightman_position(&PositionKernel::new(mass, 1.0, eps).unwrap(), dt, r);
        let modes = wightman_mode_sum(&ModeKernel::new(mass, 1.0), dt, r, eps, opts).unwrap();
        assert!(
            (pos - modes.value).norm() <= 1e-8 * pos.norm().max(1.0),
            "{pos} vs {}",
            modes.value
        );
    }
}

#[test]
fn massless_coincidence_limit() {
    // G(Δt, 0) = -1/(4π² (Δt - iε)²) for c = 1
    let k = PositionKernel::new(0.0, 1.0, 0.01).unwrap();
    let t = Complex64::new(0.8, -0.01);
    let want = -1.0 / (4.0 * PI * PI * t * t);
    assert!((wightman_position(&k, 0.8, 0.0) - want).norm() < 1e-13);
}

#[test]
fn factorized_integrals_match_double_quadrature() {
    let mut rng = StdRng::seed_from_u64(11);
    let quad = QuadratureSettings::default();
    for _ in 0..3 {
        let de = rng.gen_range(0.5..2.0);
        let m = rng.gen_range(0.0..0.8);
        let d = rng.gen_range(0.2..2.0);
        let sigma = rng.gen_range(1.0..3.0);
        let s = validate_config(
            DetectorPairConfig::new(de, 0.1, 0.1, d),
            FieldSpec { mass: m },
            InitialState::bell(),
            SwitchingSpec::Gaussian { sigma },
            UnitSystem::default(),
        )
        .unwrap();
        let ints = gaussian_integral_set(&s, &quad).unwrap();
        for kernel in [OracleKernel::Position, OracleKernel::ModeSum] {
            let settings = OracleSettings {
                quad: quad.clone(),
                kernel,
            };
            for name in IntegralName::ALL {
                let o = oracle_quadrature(name, &s, &settings)
                    .unwrap_or_else(|e| panic!("{de} {m} {d} {sigma} {kernel:?} {e:?}"));
                let v = ints.get(name);
                let budget = 1e-9 + 10.0 * (o.abs_error + v.abs_error);
                let diff = (o.value.re - v.coeff.re).abs();
                assert!(
                    diff <= budget,
                    "{name} {kernel:?}: {} vs {} ({diff:e})",
                    o.value.re,
                    v.coeff.re
                );
            }
        }
    }
}
