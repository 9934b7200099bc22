mod common;

use faultfuse::fusion::{fuse_bi, fuse_gbi, fuse_linear, fuse_marzullo, gbi_weights_oneopt, LinearCoefficients};
use faultfuse::Interval;
use proptest::prelude::*;

/// Intervals with integer endpoints in [-8, 8] and positive width, plus a
/// fault count that keeps `n >= tau + 2`.
fn readings() -> impl Strategy<Value = (Vec<Interval>, usize)> {
    (2usize..7)
        .prop_flat_map(|n| {
            (
                prop::collection::vec((-8i32..8, 1i32..6), n),
                0..n - 1,
            )
        })
        .prop_map(|(raw, tau)| {
            let r = raw
                .into_iter()
                .map(|(lo, w)| Interval::new(lo as f64, (lo + w) as f64).unwrap())
                .collect();
            (r, tau)
        })
}

fn gbi(r: &[Interval], tau: usize) -> Option<f64> {
    fuse_gbi(&gbi_weights_oneopt(r, tau).ok()?).ok()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn shifting_readings_shifts_estimates((r, tau) in readings(), shift in -40i32..40) {
        let c = shift as f64 * 0.25;
        let moved: Vec<Interval> = r.iter().map(|v| v.shifted(c)).collect();
        prop_assert!(close(fuse_marzullo(&moved, tau).unwrap(), fuse_marzullo(&r, tau).unwrap() + c));
        prop_assert!(close(fuse_bi(&moved, tau).unwrap().value, fuse_bi(&r, tau).unwrap().value + c));
        match (gbi(&moved, tau), gbi(&r, tau)) {
            (Some(a), Some(b)) => prop_assert!(close(a, b + c)),
            (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn order_of_readings_is_irrelevant(
        (r, tau, shuffled) in readings().prop_flat_map(|(r, tau)| {
            (Just(r.clone()), Just(tau), Just(r).prop_shuffle())
        })
    ) {
        prop_assert_eq!(fuse_marzullo(&shuffled, tau).unwrap(), fuse_marzullo(&r, tau).unwrap());
        prop_assert_eq!(fuse_bi(&shuffled, tau).unwrap(), fuse_bi(&r, tau).unwrap());
        match (gbi(&shuffled, tau), gbi(&r, tau)) {
            (Some(a), Some(b)) => prop_assert!(close(a, b)),
            (a, b) => prop_assert_eq!(a.is_some(), b.is_some()),
        }
    }

    #[test]
    fn estimates_stay_within_the_readings((r, tau) in readings()) {
        let lo = r.iter().map(|v| v.lo).fold(f64::INFINITY, f64::min);
        let hi = r.iter().map(|v| v.hi).fold(f64::NEG_INFINITY, f64::max);
        let inside = |v: f64| lo - 1e-12 <= v && v <= hi + 1e-12;
        prop_assert!(inside(fuse_marzullo(&r, tau).unwrap()));
        prop_assert!(inside(fuse_bi(&r, tau).unwrap().value));
        if let Some(v) = gbi(&r, tau) {
            prop_assert!(inside(v));
        }
    }

    #[test]
    fn identical_readings_give_their_midpoint(n in 2usize..8, lo in -8i32..8, w in 1i32..6, tau_seed in 0usize..100) {
        let tau = tau_seed % (n - 1);
        let iv = Interval::new(lo as f64, (lo + w) as f64).unwrap();
        let r = vec![iv; n];
        let mid = iv.midpoint();
        prop_assert_eq!(fuse_marzullo(&r, tau).unwrap(), mid);
        prop_assert_eq!(fuse_bi(&r, tau).unwrap().value, mid);
        prop_assert!(close(gbi(&r, tau).unwrap(), mid));
        let half = 1.0 / (2 * n) as f64;
        prop_assert!(close(fuse_linear(&r, &LinearCoefficients::uniform(n, half, half, 0.0)).unwrap(), mid));
    }

    #[test]
    fn bi_matches_dense_grid_evaluation((r, tau) in readings()) {
        let got = fuse_bi(&r, tau).unwrap().value;
        let want = common::grid_bi(&r, tau);
        prop_assert!(close(got, want), "bi {} grid {}", got, want);
    }
}
