use ergo_core::expr::{BinaryOp, UnaryOp, SMOOTH_DICTIONARY};
use ergo_core::pde::solve_profile;
use ergo_core::{parse, Expr, GDiffusionModel, GFunction, Grid1D, SliceSchedule, SolveOptions};
use proptest::prelude::*;

fn arb_expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        Just(Expr::Var),
        (-4.0f64..4.0).prop_map(Expr::Const),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        let unary = prop_oneof![
            Just(UnaryOp::Neg),
            Just(UnaryOp::Abs),
            Just(UnaryOp::Exp),
            Just(UnaryOp::Log),
            Just(UnaryOp::Sqrt),
            Just(UnaryOp::PosPart),
            Just(UnaryOp::NegPart),
        ];
        let binary = prop_oneof![
            Just(BinaryOp::Add),
            Just(BinaryOp::Sub),
            Just(BinaryOp::Mul),
            Just(BinaryOp::Div),
            Just(BinaryOp::Min),
            Just(BinaryOp::Max),
        ];
        prop_oneof![
            (unary, inner.clone()).prop_map(|(op, a)| Expr::Unary(op, Box::new(a))),
            (binary, inner.clone(), inner.clone()).prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            (inner, -3i32..5).prop_map(|(a, n)| Expr::Pow(Box::new(a), n)),
        ]
    })
}

fn same(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => x.to_bits() == y.to_bits() || (x - y).abs() <= 1e-12 * x.abs().max(1.0),
        (None, None) => true,
        _ => false,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn display_round_trips(e in arb_expr(), x in -5.0f64..5.0) {
        let back = parse(&e.to_string()).unwrap();
        prop_assert!(same(e.eval(x).ok(), back.eval(x).ok()), "{e} at {x}");
    }

    #[test]
    fn generator_is_sublinear(a in -1e3f64..1e3, b in -1e3f64..1e3, lam in 0.0f64..10.0) {
        let g = GFunction::default();
        let tol = 1e-12 * (a.abs() + b.abs() + 1.0) * (1.0 + lam);
        prop_assert!(g.eval(a + b) <= g.eval(a) + g.eval(b) + tol);
        prop_assert!((g.eval(lam * a) - lam * g.eval(a)).abs() <= tol);
        if a <= b {
            prop_assert!(g.eval(a) <= g.eval(b));
        }
        let [lo, hi] = g.candidates();
        prop_assert!((g.eval(a) - 0.5 * (lo * a).max(hi * a)).abs() <= tol);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scheme_preserves_order(
        base in prop::collection::vec(-2.0f64..2.0, 41),
        bump in prop::collection::vec(0.0f64..1.0, 41),
        alpha in 0.2f64..1.5,
    ) {
        let m = GDiffusionModel::g_ou(alpha).unwrap();
        let grid = Grid1D::new(-4.0, 4.0, 41).unwrap();
        let opts = SolveOptions { slices: SliceSchedule::Uniform(4), ..SolveOptions::default() };
        let upper: Vec<f64> = base.iter().zip(&bump).map(|(u, d)| u + d).collect();
        let a = solve_profile(&m, &base, 0.5, grid, None, &opts).unwrap();
        let b = solve_profile(&m, &upper, 0.5, grid, None, &opts).unwrap();
        for (ra, rb) in a.values.iter().zip(&b.values) {
            for (p, q) in ra.iter().zip(rb) {
                prop_assert!(p <= &(q + 1e-12));
            }
        }
    }
}

#[test]
fn symbolic_derivatives_match_differences() {
    let h = 1e-4;
    for src in SMOOTH_DICTIONARY {
        let f = parse(src).unwrap();
        let (d1, d2) = (f.deriv(1).unwrap(), f.deriv(2).unwrap());
        for i in 0..=40 {
            let x = -2.0 + 0.1 * i as f64;
            let v = |y: f64| f.eval(y).unwrap();
            let fd1 = (v(x + h) - v(x - h)) / (2.0 * h);
            let fd2 = (v(x + h) - 2.0 * v(x) + v(x - h)) / (h * h);
            let (s1, s2) = (d1.eval(x).unwrap(), d2.eval(x).unwrap());
            assert!((s1 - fd1).abs() <= 1e-6 * s1.abs().max(1.0), "{src}' at {x}: {s1} vs {fd1}");
            assert!((s2 - fd2).abs() <= 1e-4 * s2.abs().max(1.0), "{src}'' at {x}: {s2} vs {fd2}");
        }
    }
}
