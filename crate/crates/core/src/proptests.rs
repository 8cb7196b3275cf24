use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bounds::{all_bounds, gamma_check, optimal_pf_gammas};
use crate::fourier_ops::tail_norm;
use crate::geometry::ChannelGeometry;
use crate::rectangle::{check_thm31, random_mean_zero_field};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // widening the block can only raise σ_min
    #[test]
    fn tail_norm_nonincreasing_in_columns(k1 in 1usize..12, extra in 0usize..10) {
        let t0 = tail_norm(k1, k1 + extra).unwrap();
        let t1 = tail_norm(k1, k1 + extra + 1).unwrap();
        prop_assert!(t1 <= t0 + 1e-12);
        prop_assert!((0.0..1.0).contains(&t0));
    }

    #[test]
    fn rectangle_residual_is_quadratic(seed in any::<u64>(), s in 0.01f64..100.0, shape in 0usize..4) {
        let (l, h) = [(1.0, 1.0), (8.0, 1.0), (1.0, 8.0), (3.0, 0.5)][shape];
        let q = random_mean_zero_field(&mut ChaCha8Rng::seed_from_u64(seed), l, h, 3, 10).unwrap();
        let r = check_thm31(&q).unwrap();
        let rs = check_thm31(&q.scaled(s)).unwrap();
        prop_assert!(r >= -1e-10);
        prop_assert!((rs - s * s * r).abs() <= 1e-9 * s * s * r.abs().max(q.l2_sq()));
    }

    #[test]
    fn bounds_are_scale_invariant(s in 0.05f64..20.0, c1 in 0.0f64..0.9, l in 0.5f64..10.0) {
        let g = ChannelGeometry::cosine(l, 1.0, c1).unwrap();
        let gs = ChannelGeometry::cosine(s * l, s, s * c1).unwrap();
        for (a, b) in all_bounds(&g).iter().zip(all_bounds(&gs).iter()) {
            prop_assert_eq!(a.theorem, b.theorem);
            prop_assert!((a.value - b.value).abs() <= 1e-10 * a.value);
            prop_assert!(a.assembled <= a.value * (1.0 + 1e-12));
        }
    }

    #[test]
    fn optimal_pf_weights_are_admissible(m in 0.0f64..50.0, w1 in -5.0f64..5.0, w2 in -5.0f64..5.0) {
        let (g1, g2) = optimal_pf_gammas(m);
        if let Some(g2) = g2 {
            prop_assert!((1.0 / g1 + 1.0 / g2 - 1.0).abs() <= 1e-12);
            let r = gamma_check(&[g1, g2], &[Complex64::new(w1, 0.0), Complex64::new(0.0, w2)]).unwrap();
            prop_assert!(r >= -1e-10);
        } else {
            prop_assert_eq!(g1, 1.0);
        }
    }
}
