mod support;

use std::sync::OnceLock;

use nyman_core::arithmetic::{von_mangoldt_table, VonMangoldtTable};
use nyman_core::contour::*;
use nyman_core::zeros::{load_zero_table, ZeroTable};
use proptest::prelude::*;

fn table() -> &'static ZeroTable {
    static T: OnceLock<ZeroTable> = OnceLock::new();
    T.get_or_init(|| load_zero_table(&support::zero_table_path()).unwrap())
}

fn lam() -> &'static VonMangoldtTable {
    static L: OnceLock<VonMangoldtTable> = OnceLock::new();
    L.get_or_init(|| von_mangoldt_table(1 << 16).unwrap())
}

fn assert_geometry(path: &ContourPath) {
    let log_n = (path.n_param as f64).ln();
    assert_eq!(path.max_gap(), 0.0, "path not connected");
    let first = path.segments[0];
    assert_eq!(first.start.re, 0.5 + 1.0 / log_n);
    assert_eq!(first.start.im, 0.0);
    let (lo, hi) = path.abscissa_range();
    assert!(lo >= 0.5 + 1.0 / log_n - 1e-15 && hi <= 1.0 + 1.0 / log_n + 1e-15);
    let last = path.last_point();
    assert_eq!(last.re, 1.0 + 1.0 / log_n);
    assert_eq!(last.im, path.n1);
    for s in &path.segments {
        match s.kind {
            SegmentKind::Vertical => assert_eq!(s.start.re, s.end.re),
            SegmentKind::Horizontal => assert_eq!(s.start.im, s.end.im),
        }
    }
}

#[test]
fn paper_kappa_exceeds_k_at_desk_scale() {
    let err = build_contour(1_000_000, None, table(), lam(), 0.1).unwrap_err();
    assert!(matches!(err, ContourError::KappaExceedsK { kappa: 41, big_k: 19, .. }), "{err:?}");
}

#[test]
fn contour_geometry() {
    for (n, kappa) in [(1u64 << 10, 5u64), (1000, 3), (5000, 6), (1 << 14, 9)] {
        let path = build_contour(n, Some(kappa), table(), lam(), 0.1).unwrap();
        assert_eq!(path.n0, (1u64 << kappa) as f64);
        assert_eq!(path.v_table.len() as f64, path.n1 - path.n0);
        assert_geometry(&path);
    }
}

#[test]
fn short_table_is_rejected() {
    let small = ZeroTable::from_ordinates(table().ordinates()[..100].to_vec(), "first 100").unwrap();
    let err = build_contour(1 << 10, Some(5), &small, lam(), 0.1).unwrap_err();
    assert!(matches!(err, ContourError::ZeroTableTooShort { .. }));
}

#[test]
fn export_lists_every_segment() {
    let path = build_contour(256, Some(3), table(), lam(), 0.1).unwrap();
    let e = path.export();
    assert_eq!((e.n, e.kappa, e.big_k), (256, 3, 8));
    assert_eq!(e.segments.len(), path.segments.len());
}

#[test]
fn cauchy_invariance_and_conjugate_symmetry() {
    let path = build_contour(256, Some(3), table(), lam(), 0.1).unwrap();
    let b = b_n_integral(2.0, &path, table()).unwrap();
    let line = b_n_straight(256, 2.0).unwrap();
    assert!((b.value - line.value).norm() <= b.error_bound + line.error_bound, "{} vs {}", b.value, line.value);
    let mirror = b_n_integral(-2.0, &path, table()).unwrap();
    assert!((mirror.value - b.value.conj()).norm() <= 2.0 * b.error_bound);
}

#[test]
fn perron_residuals_stay_in_corridor() {
    let mut worst: f64 = 0.0;
    for (n, kappa) in [(64u64, 3u64), (200, 3), (256, 4), (1000, 4)] {
        let path = build_contour(n, Some(kappa), table(), lam(), 0.1).unwrap();
        for tau in [0.0, 0.5, 3.0, 7.5, 12.0] {
            if tau > n as f64 / 5.0 {
                continue;
            }
            let r = perron_check(tau, &path, table()).unwrap();
            worst = worst.max(r.max_ratio);
        }
    }
    assert!(worst <= 10.0, "worst ratio {worst}");
}

#[test]
fn perron_rejects_large_tau() {
    let path = build_contour(256, Some(3), table(), lam(), 0.1).unwrap();
    assert!(perron_check(60.0, &path, table()).is_err());
}

#[test]
fn large_tau_window_recorded_empty() {
    let m = mn_bound_monitors(10_000, 0.3, &[0.0, 10.0, 100.0], 0.05).unwrap();
    assert!(m.large_tau.empty_window);
    assert!(m.uniform.grid[1].ratio <= 1.0);
    // τ = 0: the right side is at least √N and |M(N)| ≤ N
    assert!(m.uniform.grid[0].rhs >= 100.0 && m.uniform.grid[0].lhs <= 10_000.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn tail_identity_holds(n in 1u64..300, eps in 0.2f64..0.5, tau in -10.0f64..10.0) {
        let r = tail_identity_check(n, eps, tau, 100 * n).unwrap();
        prop_assert!(r.residual <= r.tail_estimate + 1e-6, "{:?}", r);
    }
}
