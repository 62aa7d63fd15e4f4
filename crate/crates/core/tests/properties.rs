use proptest::prelude::*;
use srbench::algebra::{is_lg, random_tuple, Algebra, Tuple};
use srbench::kk::{kk_distance, perturb_algebra, KkBudget, Subalgebra};
use srbench::linalg::ComplexMatrix;
use srbench::logic::{build_phi_n, parse_formula};
use srbench::rng;
use srbench::stablerank::{dist_to_lg, dist_upper_candidate, shift_into_lg, DistBudget};

fn tuple(k: usize, n: usize, seed: u64, scale: f64) -> Tuple {
    let alg = Algebra::full_matrix(k).unwrap().into_arc();
    random_tuple(&alg, n, &mut rng::stream(seed, 11), scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shift_lands_in_lg(k in 1usize..=5, n in 1usize..=3, seed in any::<u64>(), gap in 1e-3f64..1.0) {
        let a = tuple(k, n, seed, 1.0);
        let b = tuple(k, n, seed ^ 1, 1.0);
        let out = shift_into_lg(&a, &b, a.sub(&b).norm() + gap).unwrap();
        // σ_min(a + βw) ≥ β − ‖a − b‖.
        prop_assert!(out.min_gram_eigenvalue() >= gap * gap * (1.0 - 1e-9));
        prop_assert!(is_lg(&out, 1e-8).member || gap * gap <= 1e-8);
    }

    #[test]
    fn candidate_is_within_level(k in 1usize..=4, n in 1usize..=3, seed in any::<u64>(), lambda in 0.0f64..2.0) {
        let a = tuple(k, n, seed, 0.7);
        let (c, bound) = dist_upper_candidate(&a, lambda).unwrap();
        prop_assert!(bound <= lambda + 1e-8);
        prop_assert!((a.sub(&c).norm() - bound).abs() <= 1e-12);
        prop_assert!(c.norm() <= (a.norm() - lambda).max(0.0) + 1e-9);
    }

    #[test]
    fn distance_scales(k in 1usize..=3, seed in any::<u64>(), t in 0.1f64..10.0) {
        let alg = Algebra::full_matrix(k).unwrap().into_arc();
        let mut r = rng::stream(seed, 12);
        let mut diag = vec![1.0; k];
        diag[0] = 0.0;
        let cut = Tuple::from_fibers(alg.clone(), 1, 1, vec![ComplexMatrix::from_real_diag(&diag)], 0.0).unwrap();
        let a = random_tuple(&alg, 1, &mut r, 1.0).mul(&cut);
        let c1 = dist_to_lg(&a, &DistBudget::default()).unwrap();
        let c2 = dist_to_lg(&a.scale_real(t), &DistBudget::default()).unwrap();
        prop_assert!(c1.lower <= c1.upper && c2.lower <= c2.upper);
        prop_assert!((c2.upper - t * c1.upper).abs() <= 1e-8 * t.max(1.0));
        prop_assert!(c1.upper <= a.norm() + 1e-9);
    }

    #[test]
    fn kk_is_symmetric_and_bounded(seed in 0u64..1000, eps in 0.0f64..0.3) {
        let a = Subalgebra::block_diagonal(&[1, 2]).unwrap();
        let b = perturb_algebra(&a, eps, seed).unwrap();
        let budget = KkBudget { starts: 4, climb_steps: 2, ..KkBudget::default() };
        let ab = kk_distance(&a, &b, &budget).unwrap();
        let ba = kk_distance(&b, &a, &budget).unwrap();
        prop_assert_eq!((ab.lower, ab.upper), (ba.lower, ba.upper));
        prop_assert!(0.0 <= ab.lower && ab.lower <= ab.upper && ab.upper <= 2.0);
        prop_assert!(ab.upper <= 2.0 * eps * (1.0 + 1e-3) + 1e-12);
    }

    #[test]
    fn phi_prints_and_parses(n in 1usize..=6) {
        let f = build_phi_n(n);
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
    }
}
