// 0.7071068 is the seven-digit value users type.
#![allow(clippy::approx_constant)]

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4, PI};

use proptest::prelude::*;
use tableturn::geometry::{
    incline, place_vertices, segment_slope, top_corners, GeometryError, PlacedTable, Pose,
    TableSpec, Vec3,
};
use tableturn::ground::Ground;
use tableturn::solver::place_diagonal;

fn near(a: Vec3, b: [f64; 3]) -> bool {
    (a - Vec3::from(b)).norm() < 1e-12
}

#[test]
fn placement_examples() {
    let pose = |tilt| Pose {
        azimuth: 0.0,
        diag_param: 1.0,
        tilt,
    };
    let t = place_vertices(&TableSpec::square(0.0), &pose(0.0), &Ground::Flat).unwrap();
    assert!(near(t.a, [1.0, 0.0, 0.0]) && near(t.b, [0.0, 1.0, 0.0]));
    assert!(near(t.c, [-1.0, 0.0, 0.0]) && near(t.d, [0.0, -1.0, 0.0]));

    let rect = TableSpec::new(0.5, 0.0).unwrap();
    let t = place_vertices(&rect, &pose(0.0), &Ground::Flat).unwrap();
    assert!(near(t.b, [0.6, 0.8, 0.0]), "{:?}", t.b);

    let t = place_vertices(&TableSpec::square(0.0), &pose(-FRAC_PI_2), &Ground::Flat).unwrap();
    assert!(near(t.b, [0.0, 0.0, 1.0]) && near(t.d, [0.0, 0.0, -1.0]));

    let unseated = Pose {
        azimuth: 0.0,
        diag_param: 0.5,
        tilt: 0.0,
    };
    assert!(matches!(
        place_vertices(&rect, &unseated, &Ground::Flat),
        Err(GeometryError::Unseated(_))
    ));
}

#[test]
fn side_lengths() {
    for r in [0.1, 0.5, 0.75, 1.0] {
        let s = TableSpec::new(r, 0.0).unwrap();
        assert!((s.short_side() / s.long_side() - r).abs() < 1e-15);
        let t = place_vertices(
            &s,
            &Pose {
                azimuth: 0.3,
                diag_param: 1.0,
                tilt: 0.2,
            },
            &Ground::Flat,
        )
        .unwrap();
        assert!(((t.a - t.b).norm() - s.short_side()).abs() < 1e-14);
        assert!(((t.b - t.c).norm() - s.long_side()).abs() < 1e-14);
    }
    assert_eq!(TableSpec::square(0.0).half_angle(), FRAC_PI_2);
    assert!(TableSpec::new(0.0, 1.0).is_err());
    assert!(TableSpec::new(1.2, 1.0).is_err());
    assert!(TableSpec::new(0.5, -1.0).is_err());
}

#[test]
fn incline_examples() {
    assert_eq!(
        incline(&Vec3::new(1.0, 0.0, 0.0), &Vec3::new(-1.0, 0.0, 0.0)).unwrap(),
        0.0
    );
    let g = Ground::plane(0.5, 0.0);
    let t = place_diagonal(&g, 0.0).unwrap();
    let a = Vec3::new(t, 0.0, g.height(t, 0.0));
    let c = Vec3::new(-t, 0.0, g.height(-t, 0.0));
    assert!((incline(&a, &c).unwrap() - 0.46365).abs() < 1e-5);
    let h = FRAC_1_SQRT_2;
    let phi = incline(&Vec3::new(h, 0.0, h), &Vec3::new(-h, 0.0, -h)).unwrap();
    assert!((phi - FRAC_PI_4).abs() < 1e-15);
    assert!(incline(&Vec3::zeros(), &Vec3::x()).is_err());
}

#[test]
fn slope_examples() {
    let o = Vec3::zeros();
    assert_eq!(segment_slope(&o, &Vec3::new(1.0, 0.0, 1.0)).unwrap(), 1.0);
    let s = segment_slope(&o, &Vec3::new(1.0, 1.0, 1.0)).unwrap();
    assert!((s - 0.7071068).abs() < 1e-7);
    assert_eq!(
        segment_slope(&o, &Vec3::new(0.0, 0.0, 2.0)).unwrap(),
        f64::INFINITY
    );
    assert!(matches!(
        segment_slope(&o, &o),
        Err(GeometryError::CoincidentPoints)
    ));
}

#[test]
fn top_corner_examples() {
    let spec = TableSpec::square(0.5);
    let pose = Pose {
        azimuth: 0.0,
        diag_param: 1.0,
        tilt: 0.0,
    };
    let t = place_vertices(&spec, &pose, &Ground::Flat).unwrap();
    let top = top_corners(&t, &spec).unwrap();
    assert!(near(top[0], [1.0, 0.0, 0.5]));
    let vertical = Pose {
        tilt: FRAC_PI_2,
        ..pose
    };
    let t = place_vertices(&spec, &vertical, &Ground::Flat).unwrap();
    assert!(matches!(
        top_corners(&t, &spec),
        Err(GeometryError::VerticalPlane)
    ));
}

#[test]
fn relabeling_distance() {
    let spec = TableSpec::square(0.0);
    let t = place_vertices(
        &spec,
        &Pose {
            azimuth: 0.4,
            diag_param: 1.0,
            tilt: 0.1,
        },
        &Ground::Flat,
    )
    .unwrap();
    let shifted = PlacedTable {
        a: t.b,
        b: t.c,
        c: t.d,
        d: t.a,
        ..t
    };
    assert!(t.distance_up_to_relabeling(&shifted) < 1e-15);
    let mirrored = PlacedTable {
        a: t.a,
        b: t.d,
        c: t.c,
        d: t.b,
        ..t
    };
    assert!(t.distance_up_to_relabeling(&mirrored) < 1e-15);
    let moved = PlacedTable {
        a: t.a + Vec3::z(),
        ..t
    };
    assert!((t.distance_up_to_relabeling(&moved) - 1.0).abs() < 1e-15);
}

proptest! {
    #[test]
    fn placed_tables_are_rectangles(
        seed in 0u64..10_000,
        gamma in 0.0..2.0 * PI,
        tilt in -FRAC_PI_2..FRAC_PI_2,
        ratio in 0.05..=1.0f64,
    ) {
        let g = Ground::bumps(seed, 8, 0.5, 0.7);
        let spec = TableSpec::new(ratio, 0.0).unwrap();
        let t = place_diagonal(&g, gamma).unwrap();
        let table = place_vertices(&spec, &Pose { azimuth: gamma, diag_param: t, tilt }, &g).unwrap();
        let m = table.center();
        prop_assert!(m.x.abs() < 1e-15 && m.y.abs() < 1e-15);
        for v in table.vertices() {
            prop_assert!(((v - m).norm() - 1.0).abs() < 1e-12);
        }
        prop_assert!((0.5 * (table.b + table.d) - m).norm() < 1e-12);
        prop_assert!((table.b - table.a).dot(&(table.c - table.b)).abs() < 1e-12);
        prop_assert!((table.d - table.a).dot(&table.frame.n).abs() < 1e-12);
        prop_assert_eq!(table.a.z, g.height(table.a.x, table.a.y));
        prop_assert_eq!(table.c.z, g.height(table.c.x, table.c.y));
        if tilt.abs() < FRAC_PI_2 - 1e-6 {
            prop_assert!(table.frame.n.z > 0.0);
        }
    }
}
