use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sdstab::liecalc::{
    check_prop1_point, default_vars, lie_bracket, lie_derivative, parse_scalar_field, parse_vector_field, BracketTree,
    VectorFieldExpr,
};
use sdstab::sysmodel::AffineSystem;

/// Random polynomial of total degree ≤ 3 in `x1..xn`, written in the
/// expression grammar. `homogeneous` drops the constant term.
fn poly(rng: &mut ChaCha8Rng, n: usize, homogeneous: bool) -> String {
    let terms = rng.random_range(1..=4);
    let mut s = String::new();
    for t in 0..terms {
        let c: f64 = rng.random_range(-1.0..1.0);
        let mut term = format!("({c:.6})");
        let deg = rng.random_range(if homogeneous { 1 } else { 0 }..=3);
        for _ in 0..deg {
            term.push_str(&format!("*x{}", rng.random_range(1..=n)));
        }
        if t > 0 {
            s.push_str(" + ");
        }
        s.push_str(&term);
    }
    s
}

fn field(rng: &mut ChaCha8Rng, n: usize, homogeneous: bool) -> VectorFieldExpr {
    let comps: Vec<String> = (0..n).map(|_| poly(rng, n, homogeneous)).collect();
    parse_vector_field(&comps, &default_vars(n)).unwrap()
}

fn point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.5..1.5)).collect()
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bracket_antisymmetry(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (field(&mut rng, n, false), field(&mut rng, n, false));
        let p = point(&mut rng, n);
        let xy: Vec<f64> = lie_bracket(&x, &y).unwrap().eval(&p).unwrap();
        let yx: Vec<f64> = lie_bracket(&y, &x).unwrap().eval(&p).unwrap();
        prop_assert!(max_abs(&add(&xy, &yx)) <= 1e-10);
    }

    #[test]
    fn jacobi_identity(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y, z) = (field(&mut rng, n, false), field(&mut rng, n, false), field(&mut rng, n, false));
        let p = point(&mut rng, n);
        let br = |a: &VectorFieldExpr, b: &VectorFieldExpr, c: &VectorFieldExpr| -> Vec<f64> {
            lie_bracket(a, &lie_bracket(b, c).unwrap()).unwrap().eval(&p).unwrap()
        };
        let s = add(&add(&br(&x, &y, &z), &br(&y, &z, &x)), &br(&z, &x, &y));
        prop_assert!(max_abs(&s) <= 1e-8, "{s:?}");
    }

    #[test]
    fn leibniz_rule(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = default_vars(n);
        let x = field(&mut rng, n, false);
        let v = parse_scalar_field(&format!("{} + sin(x1)", poly(&mut rng, n, false)), &vars).unwrap();
        let w = parse_scalar_field(&format!("{} + exp(x{}/3)", poly(&mut rng, n, false), n), &vars).unwrap();
        let p = point(&mut rng, n);
        let lhs: f64 = lie_derivative(&x, &v.product(&w).unwrap()).unwrap().eval(&p).unwrap();
        let xv: f64 = lie_derivative(&x, &v).unwrap().eval(&p).unwrap();
        let xw: f64 = lie_derivative(&x, &w).unwrap().eval(&p).unwrap();
        let rhs = xv * w.eval(&p).unwrap() + v.eval::<f64>(&p).unwrap() * xw;
        prop_assert!((lhs - rhs).abs() <= 1e-10, "{lhs} vs {rhs}");
    }

    #[test]
    fn jets_match_central_differences(seed in any::<u64>(), n in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = default_vars(n);
        let v = parse_scalar_field(&format!("{} + sin(x1)*exp(x{}/4)", poly(&mut rng, n, false), n), &vars).unwrap();
        let p = point(&mut rng, n);
        let d = point(&mut rng, n);
        let along = |t: f64| -> f64 {
            let q: Vec<f64> = p.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            v.eval(&q).unwrap()
        };
        let jet = v.eval_jet(&p, 2).unwrap();
        prop_assert!((jet.value() - along(0.0)).abs() <= 1e-14 * (1.0 + along(0.0).abs()));
        let first: f64 = jet.gradient().iter().zip(&d).map(|(g, b)| g * b).sum();
        let mut second = 0.0;
        for i in 0..n {
            for j in i..n {
                let mut e = vec![0u8; n];
                e[i] += 1;
                e[j] += 1;
                second += jet.coeff(&e) * d[i] * d[j];
            }
        }
        second *= 2.0;
        let scale = 1.0 + max_abs(&p) + max_abs(&d);
        let h1 = f64::EPSILON.cbrt() * scale;
        let fd1 = (along(h1) - along(-h1)) / (2.0 * h1);
        // ∛ε is too small for a second difference; ε^¼ balances roundoff and truncation
        let h2 = f64::EPSILON.powf(0.25) * scale;
        let fd2 = (along(h2) - 2.0 * along(0.0) + along(-h2)) / (h2 * h2);
        prop_assert!((first - fd1).abs() <= 1e-6 * (1.0 + first.abs()), "{first} vs {fd1}");
        prop_assert!((second - fd2).abs() <= 1e-6 * (1.0 + second.abs()), "{second} vs {fd2}");
    }

    #[test]
    fn prop1_invariant_under_rescaling(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vars = default_vars(n);
        let sys = AffineSystem::new(field(&mut rng, n, true), field(&mut rng, n, false)).unwrap();
        let quad: Vec<String> = (1..=n).map(|i| format!("{:.4}*x{i}^2", rng.random_range(0.2..2.0))).collect();
        let src = format!("{} + ({:.4})*x1*x{n}^2", quad.join(" + "), rng.random_range(-0.1..0.1));
        let v = parse_scalar_field(&src, &vars).unwrap();
        let v2 = parse_scalar_field(&format!("2*({src})"), &vars).unwrap();
        let mut p = point(&mut rng, n);
        if p.iter().all(|c| *c == 0.0) {
            p[0] = 1.0;
        }
        let a = check_prop1_point(&sys, &v, &p, 4).unwrap();
        let b = check_prop1_point(&sys, &v2, &p, 4).unwrap();
        prop_assert_eq!(a.clause, b.clause);
        prop_assert_eq!(a.n_used, b.n_used);
    }
}

fn vf(comps: &[&str], vars: &[&str]) -> VectorFieldExpr {
    parse_vector_field(comps, vars).unwrap()
}

fn assert_bracket(x: &VectorFieldExpr, y: &VectorFieldExpr, expect: impl Fn(&[f64]) -> Vec<f64>, points: &[Vec<f64>]) {
    let b = lie_bracket(x, y).unwrap();
    for p in points {
        let got: Vec<f64> = b.eval(p).unwrap();
        let want = expect(p);
        for (g, w) in got.iter().zip(&want) {
            assert!((g - w).abs() <= 1e-9, "at {p:?}: {got:?} vs {want:?}");
        }
    }
}

fn sample_points(n: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    (0..20).map(|_| point(&mut rng, n)).collect()
}

#[test]
fn double_integrator_bracket() {
    let f = vf(&["y", "0"], &["x", "y"]);
    let g = vf(&["0", "1"], &["x", "y"]);
    assert_bracket(&f, &g, |_| vec![-1.0, 0.0], &sample_points(2));
}

#[test]
fn linear_fields_commutator() {
    // [Ax, Bx] = (BA − AB)x with A = e12, B = e21
    let x = vf(&["x2", "0"], &["x1", "x2"]);
    let y = vf(&["0", "x1"], &["x1", "x2"]);
    assert_bracket(&x, &y, |p| vec![-p[0], p[1]], &sample_points(2));
}

#[test]
fn cubic_drift_with_state_input() {
    let f = vf(&["x2", "x1^3"], &["x1", "x2"]);
    let g = vf(&["0", "x1"], &["x1", "x2"]);
    assert_bracket(&f, &g, |p| vec![-p[0], p[1]], &sample_points(2));
}

#[test]
fn three_dimensional_polynomial() {
    let v = ["x1", "x2", "x3"];
    let x = vf(&["x2*x3", "0", "0"], &v);
    let y = vf(&["0", "0", "x1"], &v);
    assert_bracket(&x, &y, |p| vec![-p[0] * p[1], 0.0, p[1] * p[2]], &sample_points(3));
}

#[test]
fn scalar_transcendental() {
    let x = vf(&["x^2"], &["x"]);
    let y = vf(&["sin(x)"], &["x"]);
    assert_bracket(&x, &y, |p| vec![p[0].cos() * p[0] * p[0] - 2.0 * p[0] * p[0].sin()], &sample_points(1));
}

#[test]
fn bracket_orders_add() {
    let fg = BracketTree::bracket(BracketTree::F, BracketTree::G);
    assert_eq!(BracketTree::F.order(), 1);
    assert_eq!(BracketTree::G.order(), 1);
    assert_eq!(fg.order(), 2);
    assert_eq!(BracketTree::ad(BracketTree::F, BracketTree::G, 3).order(), 4);
    assert_eq!(BracketTree::bracket(fg.clone(), fg).order(), 4);
}

#[test]
fn order_zero_jet_is_plain_evaluation() {
    let vars = default_vars(3);
    let v = parse_scalar_field("x1*exp(x2) - cos(x3)^2/(1 + x1^2)", &vars).unwrap();
    for p in sample_points(3) {
        let plain: f64 = v.eval(&p).unwrap();
        assert_eq!(v.eval_jet(&p, 0).unwrap().value(), plain);
    }
}
