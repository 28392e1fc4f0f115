use std::f64::consts::PI;

use proptest::prelude::*;

use ncgeo::geometry::unitary_distance;
use ncgeo::linalg::{fold_symbol, principal_log, s_numbers, unitary_exp, ComplexMatrix, TracialAlgebra, C64, I};
use ncgeo::projection::{best_approximant, SkewSubspace, SubalgebraKind, DEFAULT_TOL};
use ncgeo::random::{self, trial_rng, TrialRng};

fn algebra(shape: u8) -> TracialAlgebra {
    match shape % 4 {
        0 => TracialAlgebra::full(3),
        1 => TracialAlgebra::direct_sum(&[1, 2]).unwrap(),
        2 => TracialAlgebra::new(vec![2, 2], vec![0.3, 0.7], false).unwrap(),
        _ => TracialAlgebra::tensor_m2(&[1, 1]).unwrap(),
    }
}

fn rng(seed: u64) -> TrialRng {
    trial_rng(seed, 0)
}

fn exponent() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1.0), Just(2.0), Just(3.0), Just(4.0), Just(1.5), Just(f64::INFINITY)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn norm_is_homogeneous_and_subadditive(seed in any::<u64>(), shape in any::<u8>(), p in exponent(), c in -3.0..3.0f64) {
        let alg = algebra(shape);
        let mut r = rng(seed);
        let x = random::gaussian(&alg, &mut r);
        let y = random::gaussian(&alg, &mut r);
        let nx = alg.p_norm(&x, p).unwrap();
        let ny = alg.p_norm(&y, p).unwrap();
        let scaled = alg.p_norm(&x.scale(c), p).unwrap();
        prop_assert!((scaled - c.abs() * nx).abs() <= 1e-12 * (1.0 + nx));
        prop_assert!(alg.p_norm(&(&x + &y), p).unwrap() <= nx + ny + 1e-12);
    }

    #[test]
    fn norm_is_unitarily_invariant_and_monotone(seed in any::<u64>(), shape in any::<u8>()) {
        let alg = algebra(shape);
        let mut r = rng(seed);
        let x = random::gaussian(&alg, &mut r);
        let u = random::unitary(&alg, &mut r);
        let w = random::unitary(&alg, &mut r);
        let moved = &(&u * &x) * &w;
        let mut previous = 0.0;
        for p in [1.0, 1.5, 2.0, 3.0, 4.0, 8.0, f64::INFINITY] {
            let n = alg.p_norm(&x, p).unwrap();
            prop_assert!((alg.p_norm(&moved, p).unwrap() - n).abs() <= 1e-11 * (1.0 + n));
            prop_assert!(n >= previous - 1e-12);
            previous = n;
        }
    }

    #[test]
    fn log_inverts_exp_below_pi(seed in any::<u64>(), shape in any::<u8>(), radius in 0.0..3.1f64) {
        let alg = algebra(shape);
        let mut r = rng(seed);
        let z = random::skew_with_norm(&alg, &mut r, radius);
        let u = unitary_exp(&z).unwrap();
        prop_assert!(u.is_unitary(1e-12));
        let back = principal_log(&u).unwrap();
        prop_assert!((&back - &z).max_abs() <= 1e-10);
    }

    #[test]
    fn exp_inverts_log(seed in any::<u64>(), shape in any::<u8>()) {
        let alg = algebra(shape);
        let u = random::unitary(&alg, &mut rng(seed));
        let log = principal_log(&u).unwrap();
        prop_assert!(log.op_norm() <= PI + 1e-12);
        prop_assert!((&unitary_exp(&log).unwrap() - &u).max_abs() <= 1e-11);
    }

    #[test]
    fn distance_is_a_bi_invariant_metric(seed in any::<u64>(), shape in any::<u8>(), p in exponent()) {
        let alg = algebra(shape);
        let mut r = rng(seed);
        let [u, v, w, g] = [(); 4].map(|_| random::unitary(&alg, &mut r));
        let d = |a: &ComplexMatrix, b: &ComplexMatrix| unitary_distance(a, b, p, &alg).unwrap();
        let uv = d(&u, &v);
        prop_assert!(d(&u, &u) <= 1e-7);
        prop_assert!((uv - d(&v, &u)).abs() <= 1e-10);
        prop_assert!(uv <= d(&u, &w) + d(&w, &v) + 1e-10);
        prop_assert!((d(&(&g * &u), &(&g * &v)) - uv).abs() <= 1e-9);
        prop_assert!((d(&(&u * &g), &(&v * &g)) - uv).abs() <= 1e-9);
        prop_assert!(uv <= PI + 1e-12);
    }

    #[test]
    fn approximant_fixes_its_subspace_and_is_homogeneous(seed in any::<u64>(), k in 1u32..4, c in 0.1..4.0f64) {
        let alg = TracialAlgebra::direct_sum(&[1, 2]).unwrap();
        let g = SkewSubspace::from_kind(alg.clone(), SubalgebraKind::CenterBlocks).unwrap();
        let p = 2 * k;
        let mut r = rng(seed);
        let inside = random::combination(g.basis(), alg.dim(), &mut r);
        let fixed = best_approximant(&inside, &g, p, DEFAULT_TOL).unwrap();
        prop_assert!((&fixed.projection - &inside).max_abs() <= 1e-9);

        let z = random::skew(&alg, &mut r);
        let q = best_approximant(&z, &g, p, DEFAULT_TOL).unwrap().projection;
        let qc = best_approximant(&z.scale(c), &g, p, DEFAULT_TOL).unwrap().projection;
        prop_assert!((&qc - &q.scale(c)).max_abs() <= 1e-8 * (1.0 + c));
        let shifted = best_approximant(&(&z + &inside), &g, p, DEFAULT_TOL).unwrap().projection;
        prop_assert!((&shifted - &(&q + &inside)).max_abs() <= 1e-8);
        let residual = &z - &q;
        let again = best_approximant(&residual, &g, p, DEFAULT_TOL).unwrap().projection;
        prop_assert!(again.max_abs() <= 1e-8);
    }

    #[test]
    fn fold_lands_in_the_principal_band(seed in any::<u64>(), shape in any::<u8>(), lo in -12.0..0.0f64, width in 0.0..12.0f64) {
        let alg = algebra(shape);
        let z = random::hermitian_between(&alg, &mut rng(seed), lo, lo + width);
        let folded = fold_symbol(&z).unwrap();
        prop_assert!(folded.op_norm() <= PI + 1e-10);
        let exp_i = |h: &ComplexMatrix| unitary_exp(&h.scale_c(I)).unwrap();
        prop_assert!((&exp_i(&folded) - &exp_i(&z)).max_abs() <= 1e-10);
        prop_assert!(ComplexMatrix::commutator(&folded, &z).max_abs() <= 1e-9 * (1.0 + z.op_norm()));
    }

    #[test]
    fn s_numbers_are_non_increasing_and_integrate_to_norms(seed in any::<u64>(), shape in any::<u8>(), p in 1.0..6.0f64) {
        let alg = algebra(shape);
        let x = random::gaussian(&alg, &mut rng(seed));
        let s = s_numbers(&x, &alg).unwrap();
        prop_assert!(s.is_non_increasing());
        let integrated = s.integrate(|v| v.powf(p)).powf(1.0 / p);
        let direct = alg.p_norm(&x, p).unwrap();
        prop_assert!((integrated - direct).abs() <= 1e-10 * (1.0 + direct));
        prop_assert!((s.eval(0.0) - x.op_norm()).abs() <= 1e-10 * (1.0 + direct));
    }

    #[test]
    fn matrix_json_roundtrips_exactly(seed in any::<u64>(), shape in any::<u8>()) {
        let alg = algebra(shape);
        let x = random::gaussian(&alg, &mut rng(seed)).scale_c(C64::new(1.0 / 3.0, 1e-7));
        let text = serde_json::to_string(&x).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, x);
    }
}
