use std::f64::consts::FRAC_1_SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tableturn::collision::{
    certify_top, check_real_table, cone_certificate, leg_clearance, min_leg_length, top_clearance,
    CLEARANCE_TOLERANCE,
};
use tableturn::geometry::{segment_slope, top_corners, TableSpec, Vec3};
use tableturn::ground::Ground;
use tableturn::solver::{balance_by_turning, vertical_distance};

fn balanced(ground: &Ground, spec: &TableSpec) -> tableturn::geometry::PlacedTable {
    let r = balance_by_turning(ground, spec);
    assert!(r.status.is_balanced(), "{r:?}");
    r.table.unwrap()
}

#[test]
fn check_real_table_examples() {
    let spec = TableSpec::square(0.75);
    let r = balance_by_turning(&Ground::Flat, &spec);
    let c = check_real_table(&Ground::Flat, &spec, &r).unwrap();
    assert!(c.pass && c.certificate_pass);
    assert_eq!(c.min_leg_clearance, 0.0);

    let cone = Ground::cone(FRAC_1_SQRT_2, 1.0);
    let spec = TableSpec::square(FRAC_1_SQRT_2 - 0.01);
    let r = balance_by_turning(&cone, &spec);
    let c = check_real_table(&cone, &spec, &r).unwrap();
    assert!(!c.pass);
    assert!((c.min_top_clearance + 0.01).abs() < 1e-9);
    assert!(c.worst_point.x.abs() < 1e-12 && c.worst_point.y.abs() < 1e-12);

    let spec = TableSpec::square(FRAC_1_SQRT_2);
    let r = balance_by_turning(&cone, &spec);
    let c = check_real_table(&cone, &spec, &r).unwrap();
    assert!(c.pass);
    assert!(c.min_top_clearance.abs() < 1e-6);

    let r = balance_by_turning(&Ground::cliff(), &spec);
    assert!(check_real_table(&Ground::cliff(), &spec, &r).is_err());
}

#[test]
fn leg_clearance_on_cone() {
    let cone = Ground::cone(FRAC_1_SQRT_2, 1.0);
    let spec = TableSpec::square(0.8);
    let t = balanced(&cone, &spec);
    assert!(leg_clearance(&t, &spec, &cone, 500).unwrap() >= -1e-9);
    assert_eq!(leg_clearance(&t, &spec, &Ground::Flat, 10).unwrap(), 0.0);
}

#[test]
fn ridge_top_digs_in() {
    let ridge = Ground::ridge(0.9);
    let spec = TableSpec::square(0.1);
    let t = balanced(&ridge, &spec);
    let c = top_clearance(&t, &spec, &ridge, 129).unwrap();
    assert!(c < 0.0, "{c}");
}

#[test]
fn certificate_is_sound() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let mut certified = 0;
    for i in 0..1000u64 {
        let ground = Ground::bumps(i / 10, 8, 0.5, 0.70);
        let ratio = 0.2 + 0.8 * rng.random::<f64>();
        let leg = 1.2 * rng.random::<f64>();
        let spec = TableSpec::new(ratio, leg).unwrap();
        let t = balanced(&ground, &spec);
        let top = top_corners(&t, &spec).unwrap();
        let (s, u) = (rng.random::<f64>(), rng.random::<f64>());
        let p = top[0] + s * (top[1] - top[0]) + u * (top[3] - top[0]);
        if cone_certificate(&p, &t) {
            certified += 1;
            assert!(vertical_distance(&p, &ground) >= CLEARANCE_TOLERANCE);
        }
    }
    assert!(certified > 300, "{certified}");
}

#[test]
fn legs_are_steep_on_admissible_grounds() {
    for seed in 0..40 {
        let ground = Ground::bumps(seed, 8, 0.5, 0.70);
        let ratio = [1.0, 0.3, 0.6, 0.9][seed as usize % 4];
        let spec = TableSpec::new(ratio, 1.0).unwrap();
        let t = balanced(&ground, &spec);
        let top = top_corners(&t, &spec).unwrap();
        for (v, w) in t.vertices().iter().zip(top) {
            assert!(segment_slope(v, &w).unwrap() >= FRAC_1_SQRT_2 - 1e-9);
        }
    }
}

#[test]
fn certify_top_is_monotone_in_leg_length() {
    for seed in 0..10 {
        let ground = Ground::bumps(seed, 8, 0.5, 0.70);
        let spec = TableSpec::new(0.5 + 0.05 * seed as f64, 0.0).unwrap();
        let t = balanced(&ground, &spec);
        let verdicts: Vec<bool> = (0..=40)
            .map(|i| {
                certify_top(&t, &spec.with_leg_length(0.025 * i as f64).unwrap(), 1024).unwrap()
            })
            .collect();
        let first = verdicts.iter().position(|&v| v).expect("long legs certify");
        assert!(
            verdicts[first..].iter().all(|&v| v),
            "seed {seed}: {verdicts:?}"
        );
        assert!(0.025 * first as f64 <= min_leg_length(spec.ratio()).unwrap() + 0.025);
    }
}

#[test]
fn minimal_legs_always_certify() {
    for seed in 0..20 {
        let ground = Ground::bumps(seed, 8, 0.5, 0.70);
        let r = 0.1 + 0.9 * (seed as f64 / 19.0);
        let spec = TableSpec::new(r, min_leg_length(r).unwrap()).unwrap();
        let report = balance_by_turning(&ground, &spec);
        let c = check_real_table(&ground, &spec, &report).unwrap();
        assert!(c.pass && c.certificate_pass, "seed {seed}: {c:?}");
    }
}

#[test]
fn cone_certificate_examples() {
    let spec = TableSpec::square(0.0);
    let t = balanced(&Ground::Flat, &spec);
    let a = t.a;
    assert!(cone_certificate(&(a + Vec3::new(0.0, 0.0, 1.0)), &t));
    assert!(cone_certificate(
        &(a + Vec3::new(1.0, 0.0, FRAC_1_SQRT_2)),
        &t
    ));
    assert!(!cone_certificate(&(a + Vec3::new(1.0, 0.0, 0.5)), &t));
}
