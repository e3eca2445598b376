use std::sync::OnceLock;

use proptest::prelude::*;
use sdstab::liecalc::parse_scalar_field;
use sdstab::patchwork::{
    boundary_samples, choose_offsets, verify_patchwork, Active, Envelope, LyapunovPiece, PatchworkFamily, PatchworkW,
    Region,
};
use sdstab::sampling::ball_points;

const VARS: [&str; 2] = ["x1", "x2"];

fn piece(v: &str, region: &str, w1: f64, w2: f64) -> LyapunovPiece {
    LyapunovPiece::new(
        parse_scalar_field(v, &VARS).unwrap(),
        Region::parse(region, &VARS, vec![-3.0, -3.0], vec![3.0, 3.0]).unwrap(),
        Envelope::power(w1, 2.0),
        Envelope::power(w2, 2.0),
    )
    .unwrap()
}

/// Three sectors with different quadratics whose values on each shared
/// boundary are ordered like the piece indices.
fn sectors() -> Vec<LyapunovPiece> {
    vec![
        piece("x1^2 + x2^2", "x1 > 0", 1.0, 1.0),
        piece("2*x1^2 + x2^2", "x1 < 0 && x2 > 0", 1.0, 2.0),
        piece("2*x1^2 + 3*x2^2", "x1 < 0 && x2 < 0", 1.0, 3.0),
    ]
}

fn sectors_w() -> PatchworkW {
    static W: OnceLock<PatchworkW> = OnceLock::new();
    W.get_or_init(|| PatchworkW::new(choose_offsets(sectors(), 4000, 5).unwrap()))
        .clone()
}

/// `max{V_j(x) + c_j : x ∈ cl A_j}` over every piece.
fn oracle(fam: &PatchworkFamily, x: &[f64]) -> Option<f64> {
    fam.pieces()
        .iter()
        .zip(fam.offsets())
        .filter(|(p, _)| p.region.in_closure(x))
        .map(|(p, c)| p.v.eval::<f64>(x).unwrap() + c)
        .reduce(f64::max)
}

#[test]
fn boundary_values_match_brute_force_max() {
    let w = sectors_w();
    let pts = ball_points::<f64>(2, 2.5, 3000, 9);
    let samples = boundary_samples(w.family().pieces(), &pts);
    assert!(samples.len() >= 200, "{} boundary samples", samples.len());
    for s in &samples {
        let (val, act) = w.eval(&s.point).unwrap();
        assert!(matches!(act, Active::Boundary { .. }), "{:?} {act:?}", s.point);
        assert_eq!(Some(val), oracle(w.family(), &s.point));
        let i = w.active_index(&s.point).unwrap();
        assert_eq!(w.family().piece_value::<f64>(i, &s.point).unwrap(), val);
    }
}

#[test]
fn sectors_verify() {
    let w = sectors_w();
    let rep = verify_patchwork(&w, 2.0, 4000, 2).unwrap();
    assert!(rep.passed(), "{:?}", rep.checks);
}

#[test]
fn ordering_conflict_is_caught_by_stability_check() {
    // On {x2 = 0, x1 < 0} piece 2 exceeds piece 3 by x1², so with c3 > c2
    // the two offset values cross where x1² = c3 − c2.
    let pieces = vec![
        piece("x1^2 + x2^2", "x1 > 0", 1.0, 1.0),
        piece("2*x1^2 + x2^2", "x1 < 0 && x2 > 0", 1.0, 2.0),
        piece("x1^2 + 3*x2^2", "x1 < 0 && x2 < 0", 1.0, 3.0),
    ];
    let w = PatchworkW::new(choose_offsets(pieces, 4000, 5).unwrap());
    let c = w.family().offsets();
    let crossing = (c[2] - c[1]).sqrt();
    let rep = verify_patchwork(&w, 2.0, 4000, 2).unwrap();
    let check = rep.check("active-index").unwrap();
    assert!(!check.passed);
    let x = check.witness.clone().unwrap();
    assert!(x[1].abs() < 1e-9 && (x[0].abs() - crossing).abs() <= 1e-3, "{x:?}, crossing {crossing}");
}

#[test]
fn envelopes_monotone_and_ordered() {
    let w = sectors_w();
    let fam = w.family();
    let mut prev = (0.0, 0.0);
    for k in 0..1000 {
        let r = 3.0 * k as f64 / 999.0;
        let (a1, a2) = (fam.a1().eval(r), fam.a2().eval(r));
        assert!(a1 >= prev.0 && a2 >= prev.1, "r = {r}");
        assert!(a1 <= a2, "r = {r}");
        prev = (a1, a2);
    }
}

#[test]
fn origin_is_zero() {
    let w = sectors_w();
    assert_eq!(w.eval(&[0.0, 0.0]).unwrap(), (0.0, Active::Origin));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn interior_value_is_exact(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0) {
        let w = sectors_w();
        let fam = w.family();
        if let Some(i) = fam.pieces().iter().position(|p| p.region.in_interior(&[x1, x2])) {
            let (val, act) = w.eval(&[x1, x2]).unwrap();
            prop_assert_eq!(act, Active::Interior(i));
            prop_assert_eq!(val, fam.pieces()[i].v.eval::<f64>(&[x1, x2]).unwrap() + fam.offsets()[i]);
        }
    }

    #[test]
    fn positive_away_from_origin(x1 in -2.0f64..2.0, x2 in -2.0f64..2.0) {
        prop_assume!(x1 != 0.0 || x2 != 0.0);
        prop_assert!(sectors_w().value(&[x1, x2]).unwrap() > 0.0);
    }

    #[test]
    fn active_index_invariant_under_common_shift(shift in 0.0f64..5.0, seed in 0u64..50) {
        let w = sectors_w();
        let shifted: Vec<f64> = w.family().offsets().iter().map(|c| c + shift).collect();
        let ws = PatchworkW::new(PatchworkFamily::with_offsets(sectors(), shifted).unwrap());
        let pts = ball_points::<f64>(2, 2.0, 200, seed);
        for s in boundary_samples(w.family().pieces(), &pts) {
            prop_assert_eq!(w.active_index(&s.point).unwrap(), ws.active_index(&s.point).unwrap());
        }
    }
}
