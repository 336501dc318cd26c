use std::f64::consts::PI;

use magbill::geometry::{build_annulus, build_disk, build_rectangle, Grid2D, NodeClass};
use proptest::prelude::*;

fn chart_invariants(g: &Grid2D) {
    let chart = g.chart();
    for (i, p) in chart.points().iter().enumerate() {
        let (n, t) = (p.normal, p.tangent);
        assert!(((n[0] * n[0] + n[1] * n[1]).sqrt() - 1.0).abs() <= 1e-12);
        assert!(((t[0] * t[0] + t[1] * t[1]).sqrt() - 1.0).abs() <= 1e-12);
        assert!((n[0] * t[0] + n[1] * t[1]).abs() <= 1e-12);
        // t is n rotated by +90 degrees
        assert!((t[0] + n[1]).abs() <= 1e-12 && (t[1] - n[0]).abs() <= 1e-12, "orientation at {i}");
        assert!(p.ds > 0.0);
    }
    for r in chart.components() {
        assert_eq!(chart.next(r.end - 1), r.start, "components wrap");
        assert_eq!(chart.prev(r.start), r.end - 1);
    }
}

// rectangle corners only touch the two edges they join
fn boundary_nodes_touch_interior(g: &Grid2D) {
    let is_corner = |i: usize| g.neighbors(i).iter().all(|&(j, _)| g.node(j).class == NodeClass::Boundary) && g.neighbors(i).len() == 2;
    for (i, n) in g.nodes().iter().enumerate() {
        if n.class == NodeClass::Boundary && !is_corner(i) {
            assert!(
                g.neighbors(i).iter().any(|&(j, _)| g.node(j).class == NodeClass::Interior),
                "boundary node {i} has no interior neighbour"
            );
        }
    }
}

#[test]
fn quadrature_of_areas() {
    let sq = build_rectangle(1.0, 1.0, 64, 64).unwrap();
    assert!((sq.total_weight() - 1.0).abs() <= 5e-3);
    let disk = build_disk(1.0, 64, 128).unwrap();
    assert!((disk.total_weight() - PI).abs() <= 5e-3 * PI);
    let ann = build_annulus(0.5, 1.0, 64, 128).unwrap();
    assert!((ann.total_weight() - 0.75 * PI).abs() <= 5e-3 * 0.75 * PI);
}

#[test]
fn annulus_radii_must_be_ordered() {
    assert!(build_annulus(1.0, 0.5, 8, 16).is_err());
    assert!(build_annulus(0.5, 0.5, 8, 16).is_err());
    assert!(build_disk(1.0, 3, 16).is_err());
    assert!(build_disk(1.0, 8, 7).is_err());
}

#[test]
fn annulus_components_have_ntheta_points() {
    let g = build_annulus(0.5, 1.0, 32, 64).unwrap();
    let comps = g.chart().components();
    assert_eq!(comps.len(), 2);
    assert!(comps.iter().all(|r| r.len() == 64));
}

#[test]
fn normals_on_flat_and_round_boundaries() {
    let sq = build_rectangle(1.0, 1.0, 8, 8).unwrap();
    let p = sq
        .chart()
        .points()
        .iter()
        .find(|p| (p.position[0] - 1.0).abs() < 1e-12 && (p.position[1] - 0.5).abs() < 1e-12)
        .unwrap();
    assert_eq!(p.normal, [1.0, 0.0]);
    assert_eq!(p.tangent, [0.0, 1.0]);

    let disk = build_disk(1.0, 8, 32).unwrap();
    for p in disk.chart().points() {
        let th = p.position[1].atan2(p.position[0]);
        assert!((p.normal[0] - th.cos()).abs() < 1e-12 && (p.normal[1] - th.sin()).abs() < 1e-12);
    }
    let ann = build_annulus(0.5, 1.0, 8, 32).unwrap();
    let inner = ann.chart().points().iter().filter(|p| (p.position[0].hypot(p.position[1]) - 0.5).abs() < 1e-12);
    let mut count = 0;
    for p in inner {
        let th = p.position[1].atan2(p.position[0]);
        assert!((p.normal[0] + th.cos()).abs() < 1e-12 && (p.normal[1] + th.sin()).abs() < 1e-12);
        count += 1;
    }
    assert_eq!(count, 32);
}

#[test]
fn perimeter_converges_at_second_order_or_better() {
    // the polar chart sits on the exact circle, so the error is at most O(h^2)
    let mut prev: Option<f64> = None;
    for n in [16, 32, 64] {
        let g = build_disk(1.0, n / 2, n).unwrap();
        let err = (g.chart().perimeter() - 2.0 * PI).abs();
        let h = 2.0 * PI / n as f64;
        assert!(err <= h * h, "perimeter error {err}");
        if let Some(p) = prev {
            assert!(err <= p / 3.5 || err <= 1e-12);
        }
        prev = Some(err);
    }
    let r = build_rectangle(2.0, 1.0, 16, 8).unwrap();
    assert!((r.chart().perimeter() - 6.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rectangle_invariants(a in 0.2f64..5.0, b in 0.2f64..5.0, nx in 4usize..40, ny in 4usize..40) {
        let g = build_rectangle(a, b, nx, ny).unwrap();
        prop_assert_eq!(g.len(), (nx + 1) * (ny + 1));
        prop_assert!(g.nodes().iter().all(|n| n.weight > 0.0));
        prop_assert!((g.total_weight() - a * b).abs() <= 1e-10 * a * b);
        prop_assert_eq!(g.chart().len(), 2 * (nx + ny));
        prop_assert!((g.chart().turning_number(0) - 2.0 * PI).abs() <= 1e-10);
        chart_invariants(&g);
        boundary_nodes_touch_interior(&g);
        let corners = (0..g.len()).filter(|&i| g.node(i).class == NodeClass::Boundary && g.neighbors(i).len() == 2).count();
        prop_assert_eq!(corners, 4);
    }

    #[test]
    fn polar_invariants(r0 in 0.1f64..0.8, nr in 4usize..24, nth in 8usize..64, annulus in any::<bool>()) {
        let g = if annulus { build_annulus(r0, 1.0, nr, nth) } else { build_disk(1.0, nr, nth) }.unwrap();
        let rmin = if annulus { r0 } else { 0.0 };
        let dr = (1.0 - rmin) / nr as f64;
        for (j, r) in g.ring_radii().iter().enumerate() {
            prop_assert!((r - (rmin + (j as f64 + 0.5) * dr)).abs() <= 1e-12);
        }
        let area = PI * (1.0 - rmin * rmin);
        prop_assert!((g.total_weight() - area).abs() <= 1e-10 * area);
        prop_assert_eq!(g.chart().components().len(), if annulus { 2 } else { 1 });
        prop_assert!((g.chart().turning_number(0) - 2.0 * PI).abs() <= 1e-10);
        if annulus {
            prop_assert!((g.chart().turning_number(1) + 2.0 * PI).abs() <= 1e-10);
        }
        chart_invariants(&g);
        for i in 0..g.len() {
            let n = g.node(i);
            if n.class != NodeClass::Interior {
                continue;
            }
            // the innermost disk cells have a zero-area face at the origin
            if !annulus && n.x.hypot(n.y) < dr {
                prop_assert_eq!(g.neighbors(i).len(), 3);
                prop_assert!(!g.is_stencil_complete(i));
            } else {
                prop_assert!(g.is_stencil_complete(i));
            }
            // flux to boundary nodes goes through the boundary closure instead
            for &(j, e) in g.neighbors(i) {
                let c = g.edges()[e].coupling;
                if g.node(j).class == NodeClass::Boundary {
                    prop_assert_eq!(c, 0.0);
                } else {
                    prop_assert!(c > 0.0);
                }
            }
        }
    }
}
