use proptest::prelude::*;

use mfdb::gci::*;

/// φ(h) = φ_exact + C·h^p on sizes h fine to coarse.
fn manufactured(p: f64, c: f64, exact: f64, h: [f64; 3]) -> [f64; 3] {
    h.map(|hi| exact + c * hi.powf(p))
}

#[test]
fn recovers_power_law_orders() {
    for p in [1.0, 2.0, 3.0] {
        for h in [[0.1, 0.2, 0.4], [0.05, 0.08, 0.15]] {
            let r = report_from_sizes(h, manufactured(p, 0.7, 2.5, h)).unwrap();
            assert!((r.p - p).abs() < 1e-9, "p {} vs {p}", r.p);
            assert!((r.phi_ext - 2.5).abs() < 1e-9);
        }
    }
}

#[test]
fn hand_computed_case() {
    let levels = [
        GridLevel { nodes: 16, phi: 1.0625 },
        GridLevel { nodes: 4, phi: 1.25 },
        GridLevel { nodes: 1, phi: 2.0 },
    ];
    let r = gci_report(&levels, Dimension::Two).unwrap();
    assert!((r.p - 2.0).abs() < 1e-9);
    assert!((r.phi_ext - 1.0).abs() < 1e-9);
    assert!((r.e_a - 0.17647).abs() < 1e-5);
    assert!((r.gci_fine - 0.073529).abs() < 1e-6);
    let (lo, hi) = r.interval();
    assert!(lo < 1.0625 && hi > 1.0625);
}

#[test]
fn oscillatory_and_flat_sequences_rejected() {
    assert!(report_from_sizes([0.1, 0.2, 0.4], [1.0, 1.1, 1.0]).is_err());
    assert!(matches!(
        report_from_sizes([0.1, 0.2, 0.4], [1.0, 1.0, 1.3]),
        Err(GciError::IdenticalFineSolutions)
    ));
}

proptest! {
    #[test]
    fn exact_recovery(p in 0.5..4.0f64, c in 0.1..2.0f64, exact in -3.0..3.0f64, h1 in 0.01..0.1f64, r1 in 1.3..2.5f64, r2 in 1.3..2.5f64) {
        prop_assume!(exact.abs() > 0.1);
        let h = [h1, h1 * r1, h1 * r1 * r2];
        let r = report_from_sizes(h, manufactured(p, c, exact, h)).unwrap();
        prop_assert!((r.p - p).abs() < 1e-6 * p.max(1.0));
        prop_assert!((r.phi_ext - exact).abs() < 1e-7);
    }

    #[test]
    fn scale_equivariance(p in 1.0..3.0f64, k in 0.1..10.0f64, s in 0.2..5.0f64) {
        let h = [0.1, 0.2, 0.4];
        let phi = manufactured(p, 0.5, 2.0, h);
        let a = report_from_sizes(h, phi).unwrap();
        // scaling φ scales the extrapolation and leaves relative errors alone
        let b = report_from_sizes(h, phi.map(|v| v * k)).unwrap();
        prop_assert!((b.p - a.p).abs() < 1e-9);
        prop_assert!((b.phi_ext - k * a.phi_ext).abs() < 1e-9 * k);
        prop_assert!((b.gci_fine - a.gci_fine).abs() < 1e-12);
        // scaling h leaves the order unchanged
        let c = report_from_sizes(h.map(|v| v * s), phi).unwrap();
        prop_assert!((c.p - a.p).abs() < 1e-9);
    }

    #[test]
    fn finer_grids_shrink_the_band(p in 1.0..3.0f64, h1 in 0.02..0.2f64) {
        let coarse = [h1, 2.0 * h1, 4.0 * h1];
        let fine = coarse.map(|v| v / 2.0);
        let a = report_from_sizes(coarse, manufactured(p, 1.0, 3.0, coarse)).unwrap();
        let b = report_from_sizes(fine, manufactured(p, 1.0, 3.0, fine)).unwrap();
        prop_assert!(b.gci_fine < a.gci_fine);
    }
}
