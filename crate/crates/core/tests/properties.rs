use phaseplane::algebra2::{eigenvalues, eigenvectors, RootPair};
use phaseplane::expr::{parse, BinOp, Binding, Expr, Func};
use phaseplane::linsys::{classify_linear, solve_ivp};
use phaseplane::phase1d::{find_equilibria_1d, Model1D, Stability};
use phaseplane::phase2d::{integrate_trajectory, Domain, Model2D, TrajectoryOptions};
use phaseplane::{Classification, Mat2};
use proptest::prelude::*;

fn leaf_upto(max: u32) -> impl Strategy<Value = Expr> {
    prop_oneof![
        (0..max).prop_map(|n| Expr::Num(n as f64 / 8.0)),
        prop::sample::select(vec!["x", "y", "k"]).prop_map(|s| Expr::Ident(s.into())),
    ]
}

fn tree() -> impl Strategy<Value = Expr> {
    leaf_upto(10_000).prop_recursive(5, 32, 2, |inner| {
        let op = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]);
        let func =
            prop::sample::select(vec![Func::Sin, Func::Cos, Func::Exp, Func::Ln, Func::Sqrt, Func::Abs, Func::Tan]);
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::Binary(o, Box::new(l), Box::new(r))),
            (func, inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

/// Smooth expressions without division, roots or logarithms, and with
/// small constants so that the difference quotient stays accurate.
fn smooth() -> impl Strategy<Value = Expr> {
    leaf_upto(24).prop_recursive(4, 16, 2, |inner| {
        let op = prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]);
        let func = prop::sample::select(vec![Func::Sin, Func::Cos]);
        prop_oneof![
            (op, inner.clone(), inner.clone()).prop_map(|(o, l, r)| Expr::Binary(o, Box::new(l), Box::new(r))),
            (func, inner).prop_map(|(f, a)| Expr::Call(f, Box::new(a))),
        ]
    })
}

fn matrix() -> impl Strategy<Value = Mat2> {
    let entry = || (-40i32..=40).prop_map(|n| n as f64 / 4.0);
    (entry(), entry(), entry(), entry()).prop_map(|(a, b, c, d)| Mat2::new(a, b, c, d))
}

proptest! {
    #[test]
    fn render_parse_round_trip(e in tree()) {
        prop_assert_eq!(parse(&e.to_string()).unwrap(), e);
    }

    #[test]
    fn derivative_matches_central_difference(e in smooth(), x in -2.0f64..2.0, y in -2.0f64..2.0) {
        let env = |x: f64| Binding::new().with("x", x).with("y", y).with("k", 0.7);
        let sym = e.differentiate("x").evaluate(&env(x)).unwrap();
        let h = 1e-5;
        let fd = (e.evaluate(&env(x + h)).unwrap() - e.evaluate(&env(x - h)).unwrap()) / (2.0 * h);
        // the difference quotient itself is only good to about eps * |f| / h
        let noise = 1e-10 * e.evaluate(&env(x)).unwrap().abs();
        prop_assert!((sym - fd).abs() <= 1e-6 * sym.abs().max(1.0) + noise, "{} at {}: {} vs {}", e, x, sym, fd);
    }

    #[test]
    fn eigenvalues_sum_to_trace_and_multiply_to_det(m in matrix()) {
        let ev = eigenvalues(&m);
        let scale = m.norm_inf().max(1.0);
        prop_assert!((ev.sum() - m.trace()).abs() <= 1e-9 * scale);
        prop_assert!((ev.product() - m.det()).abs() <= 1e-9 * scale * scale);
    }

    #[test]
    fn real_eigenvectors_satisfy_the_eigen_equation(m in matrix()) {
        let ev = eigenvalues(&m);
        if let RootPair::RealDistinct(l1, l2) = ev {
            let sys = eigenvectors(&m, ev).unwrap();
            if let phaseplane::EigenVectors::Real { v1, v2 } = sys.vectors {
                for (l, v) in [(l1, v1), (l2, v2)] {
                    let av = m.mul_vec(v);
                    let n = v[0].hypot(v[1]);
                    prop_assert!(n > 0.0);
                    let r = (av[0] - l * v[0]).hypot(av[1] - l * v[1]);
                    prop_assert!(r <= 1e-9 * n * m.norm_inf().max(1.0));
                }
            }
        }
    }

    #[test]
    fn classification_agrees_with_eigenvalues(m in matrix()) {
        let class = classify_linear(&m);
        let ev = eigenvalues(&m);
        match class {
            Classification::Saddle => {
                let RootPair::RealDistinct(lo, hi) = ev else { panic!("saddle with {ev:?}") };
                prop_assert!(lo < 0.0 && hi > 0.0);
            }
            Classification::StableNode | Classification::UnstableNode => {
                let complex = matches!(ev, RootPair::ComplexConjugate { .. });
                prop_assert!(!complex);
                prop_assert_eq!(class.is_stable(), ev.max_real_part() < 0.0);
            }
            Classification::StableSpiral | Classification::UnstableSpiral => {
                let RootPair::ComplexConjugate { alpha, .. } = ev else { panic!("spiral with {ev:?}") };
                prop_assert_eq!(class.is_stable(), alpha < 0.0);
            }
            Classification::Center => {
                let complex = matches!(ev, RootPair::ComplexConjugate { .. });
                prop_assert!(complex);
            }
            Classification::Degenerate => prop_assert!(m.det().abs() <= 1e-9 * m.norm_inf().powi(2).max(1.0)),
        }
    }

    #[test]
    fn closed_form_solves_the_ode(m in matrix(), x0 in -3.0f64..3.0, y0 in -3.0f64..3.0, t in 0.0f64..1.5) {
        prop_assume!(classify_linear(&m) != Classification::Degenerate);
        let Ok(ivp) = solve_ivp(&m, [x0, y0]) else { return Ok(()) };
        let h = 1e-6;
        let (a, b, c) = (ivp.eval(t - h).unwrap(), ivp.eval(t).unwrap(), ivp.eval(t + h).unwrap());
        let rhs = m.mul_vec(b);
        let scale = rhs[0].abs().max(rhs[1].abs()).max(b[0].abs().max(b[1].abs()) * m.norm_inf()).max(1.0);
        for k in 0..2 {
            let d = (c[k] - a[k]) / (2.0 * h);
            prop_assert!((d - rhs[k]).abs() <= 1e-5 * scale, "{:?}", (d, rhs[k]));
        }
    }

    #[test]
    fn cubic_roots_alternate_in_stability(a in -3.0f64..-0.5, b in -0.4f64..0.4, c in 0.5f64..3.0) {
        let text = format!("-(x - ({a}))*(x - ({b}))*(x - ({c}))");
        let m = Model1D::new(parse(&text).unwrap(), "x", Binding::new(), (-4.0, 4.0)).unwrap();
        let eq = find_equilibria_1d(&m).unwrap();
        prop_assert_eq!(eq.len(), 3);
        for (e, want) in eq.iter().zip([a, b, c]) {
            prop_assert!((e.x - want).abs() <= 1e-8);
        }
        let st: Vec<Stability> = eq.iter().map(|e| e.stability).collect();
        prop_assert_eq!(st, vec![Stability::Stable, Stability::Unstable, Stability::Stable]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Orbits of `(2y, -2x)` are circles; two of them never meet, so the
    /// inner one stays inside.
    #[test]
    fn orbits_do_not_cross(r in 0.2f64..1.5, gap in 0.01f64..0.4, t in 0.5f64..8.0) {
        let m = Model2D::new(
            parse("2*y").unwrap(),
            parse("-2*x").unwrap(),
            ("x", "y"),
            Binding::new(),
            Domain::new((-2.0, 2.0), (-2.0, 2.0)).unwrap(),
        )
        .unwrap();
        let run = |r: f64| integrate_trajectory(&m, [r, 0.0], t, TrajectoryOptions::default()).unwrap().last();
        let (a, b) = (run(r), run(r + gap));
        prop_assert!(a[0].hypot(a[1]) < b[0].hypot(b[1]));
    }
}
