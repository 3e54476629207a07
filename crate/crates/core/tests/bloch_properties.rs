mod common;

use coherence_control::{breakdown_time, coherence, from_density_matrix, purity, to_density_matrix};
use common::*;
use proptest::prelude::*;
use rand::Rng;

#[test]
fn coherence_bounded_by_purity() {
    let mut rng = rng(1);
    for _ in 0..1000 {
        let s = ball_state(&mut rng);
        let (c, p) = (coherence(&s), purity(&s));
        assert!(0.0 <= c && c <= p && p <= 1.0 + 1e-9);
    }
}

#[test]
fn density_matrix_round_trip() {
    let mut rng = rng(2);
    for _ in 0..1000 {
        let s = ball_state(&mut rng);
        let back = from_density_matrix(&to_density_matrix(&s)).unwrap();
        assert!(back.max_abs_diff(&s) <= 1e-14, "{s:?} -> {back:?}");
    }
}

#[test]
fn density_matrix_eigenvalues() {
    let mut rng = rng(3);
    for _ in 0..1000 {
        let s = ball_state(&mut rng);
        let rho = to_density_matrix(&s);
        let tr = rho.trace().re;
        let det = rho.determinant().re;
        let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
        let norm = purity(&s).sqrt();
        assert!((tr / 2.0 + disc - (1.0 + norm) / 2.0).abs() <= 1e-12);
        assert!((tr / 2.0 - disc - (1.0 - norm) / 2.0).abs() <= 1e-12);
        assert!((tr - 1.0).abs() <= 1e-12);
        assert!(det >= -1e-12);
    }
}

#[test]
fn breakdown_time_monotonicity() {
    let mut rng = rng(4);
    for _ in 0..500 {
        let gamma = rng.gen_range(0.01..2.0);
        let p = rng.gen_range(0.1..=1.0);
        let c1 = rng.gen_range(0.01..p);
        let c2 = rng.gen_range(c1..=p);
        if c2 > c1 {
            assert!(breakdown_time(p, c2, gamma).unwrap() < breakdown_time(p, c1, gamma).unwrap());
        }
        let p2 = rng.gen_range(p..=1.0);
        if p2 > p {
            assert!(breakdown_time(p2, c1, gamma).unwrap() > breakdown_time(p, c1, gamma).unwrap());
        }
    }
}

proptest! {
    #[test]
    fn bloch_state_accepts_exactly_the_ball(x in -1.2f64..1.2, y in -1.2f64..1.2, z in -1.2f64..1.2) {
        let inside = x * x + y * y + z * z <= 1.0 + 1e-9;
        prop_assert_eq!(coherence_control::BlochState::new(x, y, z).is_ok(), inside);
    }
}
