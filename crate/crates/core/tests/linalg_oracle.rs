use num_complex::Complex64;
use proptest::prelude::*;

use udleak_core::linalg::{
    hermitian_eigen, hermitian_eigenvalues, partial_transpose_b, wootters_lambdas,
    wootters_product, ComplexMatrix4,
};

/// Coefficients `c[0..=4]` of `det(λI - m) = Σ c_k λ^(4-k)` by Faddeev–LeVerrier.
fn characteristic_polynomial(m: &ComplexMatrix4) -> [Complex64; 5] {
    let mut c = [Complex64::new(0.0, 0.0); 5];
    c[0] = Complex64::new(1.0, 0.0);
    let mut mk = ComplexMatrix4::zeros();
    for k in 1..=4 {
        let mut shifted = mk;
        for i in 0..4 {
            shifted.0[i][i] += c[k - 1];
        }
        mk = *m * shifted;
        c[k] = -mk.trace() / k as f64;
    }
    c
}

/// All roots of a monic quartic by Durand–Kerner iteration.
fn quartic_roots(c: &[Complex64; 5]) -> [Complex64; 4] {
    let eval = |z: Complex64| {
        c.iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
    };
    let seed = Complex64::new(0.4, 0.9);
    let scale = 1.0 + c[1..].iter().map(|x| x.norm()).fold(0.0, f64::max);
    let mut z: [Complex64; 4] = std::array::from_fn(|k| seed.powu(k as u32) * scale);
    for _ in 0..2000 {
        let mut moved = 0.0f64;
        for i in 0..4 {
            let mut den = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if i != j {
                    den *= z[i] - z[j];
                }
            }
            let step = eval(z[i]) / den;
            z[i] -= step;
            moved = moved.max(step.norm());
        }
        if moved < 1e-16 * scale {
            break;
        }
    }
    z
}

fn sorted_real(z: [Complex64; 4]) -> [f64; 4] {
    let mut r = z.map(|x| x.re);
    r.sort_by(f64::total_cmp);
    r
}

fn arb_complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(a, b)| Complex64::new(a, b))
}

fn arb_matrix() -> impl Strategy<Value = ComplexMatrix4> {
    proptest::collection::vec(arb_complex(), 16)
        .prop_map(|v| ComplexMatrix4::from_fn(|i, j| v[4 * i + j]))
}

fn arb_hermitian() -> impl Strategy<Value = ComplexMatrix4> {
    arb_matrix().prop_map(|a| (a + a.adjoint()) * 0.5)
}

/// Full-rank density matrix `A A† / tr(A A†)`.
fn arb_density() -> impl Strategy<Value = ComplexMatrix4> {
    arb_matrix().prop_map(|a| {
        let p = a * a.adjoint();
        p * (1.0 / p.trace().re)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn jacobi_matches_characteristic_roots(h in arb_hermitian()) {
        let ev = hermitian_eigenvalues(&h, 1e-12).unwrap();
        let roots = sorted_real(quartic_roots(&characteristic_polynomial(&h)));
        for (a, b) in ev.iter().zip(&roots) {
            prop_assert!((a - b).abs() < 1e-9, "{ev:?} vs {roots:?}");
        }
    }

    #[test]
    fn eigenvectors_reconstruct(h in arb_hermitian()) {
        let e = hermitian_eigen(&h, 1e-12).unwrap();
        let back = e.reconstruct_with(|x| x);
        prop_assert!(back.max_abs_diff(&h) < 1e-13);
        let gram = e.vectors.adjoint() * e.vectors;
        prop_assert!(gram.max_abs_diff(&ComplexMatrix4::identity()) < 1e-13);
    }

    #[test]
    fn wootters_matches_product_spectrum(rho in arb_density()) {
        let l = wootters_lambdas(&rho, 1e-12).unwrap();
        let mut squared = sorted_real(quartic_roots(&characteristic_polynomial(&wootters_product(&rho))));
        squared.reverse();
        for (x, y) in l.iter().zip(&squared) {
            prop_assert!((x * x - y).abs() < 1e-9, "{l:?} vs {squared:?}");
        }
    }

    #[test]
    fn partial_transpose_keeps_trace(rho in arb_density()) {
        let pt = partial_transpose_b(&rho);
        prop_assert!((pt.trace() - rho.trace()).norm() < 1e-15);
        prop_assert!(pt.hermiticity_residual() < 1e-15);
        prop_assert_eq!(partial_transpose_b(&pt), rho);
    }
}

#[test]
fn werner_state_concurrence() {
    // p|Φ⁺⟩⟨Φ⁺| + (1-p)I/4 has concurrence max(0, (3p - 1)/2)
    for p in [0.2, 1.0 / 3.0, 0.5, 0.9] {
        let bell = ComplexMatrix4::from_real([
            [0.5, 0.0, 0.0, 0.5],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.5, 0.0, 0.0, 0.5],
        ]);
        let rho = bell * p + ComplexMatrix4::identity() * ((1.0 - p) / 4.0);
        let l = wootters_lambdas(&rho, 1e-12).unwrap();
        let c = (l[0] - l[1] - l[2] - l[3]).max(0.0);
        assert!(
            (c - ((3.0 * p - 1.0) / 2.0).max(0.0)).abs() < 1e-12,
            "p = {p}: {c}"
        );
    }
}
