// 0.7071068 is the seven-digit value users type.
#![allow(clippy::approx_constant)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::io::Write;

use proptest::prelude::*;
use tableturn::ground::{
    estimate_lipschitz, load_grid, parse_ground, GridError, Ground, ParseErrorKind, Region,
    DEFAULT_LIPSCHITZ_SEED,
};

fn exact_builtins() -> Vec<(Ground, f64)> {
    vec![
        (Ground::plane(0.5, 0.0), 0.5),
        (Ground::plane(0.3, -0.4), 0.5),
        (Ground::cone(FRAC_1_SQRT_2, 1.0), FRAC_1_SQRT_2),
        (Ground::cone(0.5, 2.0), 0.25),
        (Ground::ridge(0.9), 0.9),
        (Ground::radial(0.2, 3.0), 2.0 * PI * 0.2 / 3.0),
        (
            Ground::envelope(0.6, vec![[0.0, 0.0, 0.0], [1.0, 0.5, 0.3]]),
            0.6,
        ),
    ]
}

#[test]
fn estimate_reaches_exact_bounds_from_below() {
    let region = Region::square(2.0);
    for (g, k) in exact_builtins() {
        assert_eq!(g.lipschitz_bound(), Some(k), "{g}");
        let est = estimate_lipschitz(&g, region, 100_000, DEFAULT_LIPSCHITZ_SEED);
        assert!(est <= k * (1.0 + 1e-9), "{g}: {est} > {k}");
        assert!(est >= 0.98 * k, "{g}: {est} < 0.98 * {k}");
    }
}

#[test]
fn estimate_examples() {
    let plane = Ground::plane(0.5, 0.0);
    let est = estimate_lipschitz(&plane, Region::square(3.0), 10_000, 1);
    assert!((est - 0.5).abs() < 1e-9);
    assert_eq!(
        estimate_lipschitz(&Ground::Flat, Region::square(1.0), 10_000, 1),
        0.0
    );
    // Radial pairs on the cone have slope exactly k, so the quotients sit on
    // the bound up to rounding in |dg| / |dP|.
    let cone = Ground::cone(0.7071068, 1.0);
    let est = estimate_lipschitz(&cone, Region::square(2.0), 100_000, 1);
    assert!((0.70..=0.7071068 + 1e-12).contains(&est), "{est}");
}

#[test]
fn bumps_target_bound_holds() {
    for seed in 0..20 {
        let g = Ground::bumps(seed, 8, 0.5, 0.70);
        let k = g.lipschitz_bound().unwrap();
        assert!(k <= 0.7071068);
        let est = estimate_lipschitz(&g, Region::square(3.0), 20_000, seed);
        assert!(est <= k, "seed {seed}: {est} > {k}");
    }
}

#[test]
fn sum_bound_is_sum_of_parts() {
    let g = Ground::sum(vec![Ground::plane(0.2, 0.0), Ground::plane(0.3, 0.0)]);
    assert_eq!(g.lipschitz_bound(), Some(0.5));
    assert!((g.height(2.0, 7.0) - 1.0).abs() < 1e-15);
    let p = parse_ground("sum(plane:sx=0.2;plane:sx=0.3)").unwrap();
    assert_eq!(p, g);
}

#[test]
fn height_examples() {
    assert_eq!(Ground::plane(0.5, 0.0).height(2.0, 0.0), 1.0);
    let cone = parse_ground("cone:height=0.7071068,radius=1").unwrap();
    assert_eq!(cone.height(0.0, 0.0), 0.7071068);
    assert_eq!(cone.lipschitz_bound(), Some(0.7071068));
    assert_eq!(cone.height(3.0, -1.0), 0.0);
}

#[test]
fn continuity_flags() {
    for (g, _) in exact_builtins() {
        assert!(g.is_continuous());
    }
    assert!(!Ground::cliff().is_continuous());
    assert_eq!(Ground::cliff().lipschitz_bound(), None);
}

#[test]
fn parse_examples() {
    let flat = parse_ground("flat").unwrap();
    assert_eq!(flat, Ground::Flat);
    assert_eq!(flat.lipschitz_bound(), Some(0.0));
    let e = parse_ground("plume:xyz").unwrap_err();
    assert_eq!(e.kind, ParseErrorKind::UnknownKind("plume".into()));
    assert_eq!(e.position, 0);
    let e = parse_ground("cone:height=1,radius=0").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::OutOfRange { .. }), "{e:?}");
    let e = parse_ground("plane:sx=0.5,,").unwrap_err();
    assert!(matches!(e.kind, ParseErrorKind::Syntax(_)));
}

#[test]
fn builtin_descriptors_round_trip() {
    let specs = [
        "flat",
        "plane:sx=0.5,sy=-0.25",
        "cone:height=0.7071068,radius=1",
        "ridge:s=0.9",
        "cliff",
        "radial:a=0.2,w=3",
        "bumps:seed=3,n=8,sigma=0.5,target=0.7",
        "bumps:seed=3,n=4,sigma=0.5,amp=0.1",
        "envelope:s=0.5,x1=0,y1=0,z1=0,x2=1,y2=1,z2=0.5",
        "sum(plane:sx=0.1;sum(radial;flat))",
    ];
    for s in specs {
        let g = parse_ground(s).unwrap();
        let canon = g.to_string();
        let again = parse_ground(&canon).unwrap();
        assert_eq!(again, g, "{s} -> {canon}");
        assert_eq!(again.to_string(), canon);
        for (x, y) in [(0.1, 0.2), (-1.3, 0.7), (2.0, -2.0)] {
            assert_eq!(g.height(x, y).to_bits(), again.height(x, y).to_bits());
        }
    }
}

fn grid_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn load_grid_examples() {
    let f = grid_file("0 0 1 1 2 2\n0 0\n0 0\n");
    let g = load_grid(f.path()).unwrap();
    assert_eq!(g.lipschitz_bound(), Some(0.0));
    assert!(g.is_continuous());
    assert_eq!(g.height(0.3, 0.9), 0.0);

    let f = grid_file("0 0 1 1 3 3\r\n0 1 2\r\n0 1 2\r\n0 1 2\r\n");
    let g = load_grid(f.path()).unwrap();
    assert_eq!(g.lipschitz_bound(), Some(1.0));
    assert!((g.height(1.25, 0.5) - 1.25).abs() < 1e-15);

    let f = grid_file("0 0 1 1 1 2\n0\n0\n");
    assert!(matches!(load_grid(f.path()), Err(GridError::Dims { .. })));
    let f = grid_file("0 0 1 1 2 2\n0 nan\n0 0\n");
    assert!(matches!(load_grid(f.path()), Err(GridError::Row { .. })));
    let f = grid_file("0 0 1 1 2 2\n0 0\n");
    assert!(load_grid(f.path()).is_err());
    assert!(matches!(
        load_grid("/nonexistent/grid.txt"),
        Err(GridError::Io(_))
    ));
}

#[test]
fn grid_is_continuous_across_cell_edges() {
    let mut text = String::from("-2 -1.5 0.5 0.75 9 5\n");
    for j in 0..5 {
        let row: Vec<String> = (0..9)
            .map(|i| format!("{}", ((i * 7 + j * 13) % 11) as f64 * 0.1))
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    let f = grid_file(&text);
    let g = load_grid(f.path()).unwrap();
    for k in 0..1000 {
        let s = k as f64 / 999.0;
        // Vertical edge x = -2 + 0.5 * i, horizontal edge y = -1.5 + 0.75 * j.
        let i = 1 + k % 7;
        let x = -2.0 + 0.5 * i as f64;
        let y = -1.5 + 3.0 * s;
        let (l, r) = (g.height(x.next_down(), y), g.height(x, y));
        assert!((l - r).abs() < 1e-12, "x edge {x}, {y}: {l} {r}");
        let j = 1 + k % 3;
        let y = -1.5 + 0.75 * j as f64;
        let x = -2.0 + 4.0 * s;
        let (b, t) = (g.height(x, y.next_down()), g.height(x, y));
        assert!((b - t).abs() < 1e-12, "y edge {x}, {y}: {b} {t}");
    }
    let k = g.lipschitz_bound().unwrap();
    let est = estimate_lipschitz(&g, Region::square(3.0), 20_000, 5);
    assert!(est <= k * (1.0 + 1e-12), "{est} > {k}");
}

proptest! {
    #[test]
    fn declared_bound_holds_on_random_pairs(
        seed in 0u64..1000,
        k in 0.05..1.0f64,
        p in prop::array::uniform4(-3.0..3.0f64),
    ) {
        let g = Ground::bumps(seed, 8, 0.5, k);
        let bound = g.lipschitz_bound().unwrap();
        let dist = (p[0] - p[2]).hypot(p[1] - p[3]);
        let dg = (g.height(p[0], p[1]) - g.height(p[2], p[3])).abs();
        prop_assert!(dg <= bound * dist + 1e-12);
    }

    #[test]
    fn height_is_deterministic(x in -5.0..5.0f64, y in -5.0..5.0f64) {
        for g in [Ground::bumps(1, 8, 0.5, 0.7), Ground::radial(0.2, 3.0), Ground::cone(0.7, 1.0)] {
            prop_assert_eq!(g.height(x, y).to_bits(), g.clone().height(x, y).to_bits());
        }
    }
}
