use super::{BinOp, Expr, Func};

pub(super) fn differentiate(e: &Expr, var: &str) -> Expr {
    if !e.depends_on(var) {
        return Expr::num(0.0);
    }
    match e {
        Expr::Num(_) => Expr::num(0.0),
        Expr::Ident(name) => Expr::num(if name == var { 1.0 } else { 0.0 }),
        Expr::Neg(u) => Expr::neg(differentiate(u, var)),
        Expr::Binary(op, u, v) => {
            let (u, v) = (u.as_ref(), v.as_ref());
            let du = differentiate(u, var);
            let dv = differentiate(v, var);
            match op {
                BinOp::Add => Expr::add(du, dv),
                BinOp::Sub => Expr::sub(du, dv),
                BinOp::Mul => Expr::add(Expr::mul(du, v.clone()), Expr::mul(u.clone(), dv)),
                BinOp::Div => Expr::div(
                    Expr::sub(Expr::mul(du, v.clone()), Expr::mul(u.clone(), dv)),
                    Expr::pow(v.clone(), Expr::num(2.0)),
                ),
                BinOp::Pow if !v.depends_on(var) => {
                    // d(u^c) = c * u^(c-1) * du
                    let reduced = Expr::sub(v.clone(), Expr::num(1.0));
                    Expr::mul(Expr::mul(v.clone(), Expr::pow(u.clone(), reduced)), du)
                }
                BinOp::Pow => {
                    // u^v = exp(v ln u): d = u^v * (dv ln u + v du / u)
                    let ln_u = Expr::call(Func::Ln, u.clone());
                    let inner = Expr::add(Expr::mul(dv, ln_u), Expr::div(Expr::mul(v.clone(), du), u.clone()));
                    Expr::mul(Expr::call(Func::Exp, Expr::mul(v.clone(), Expr::call(Func::Ln, u.clone()))), inner)
                }
            }
        }
        Expr::Call(f, u) => {
            let u = u.as_ref();
            let du = differentiate(u, var);
            let outer = match f {
                Func::Sin => Expr::call(Func::Cos, u.clone()),
                Func::Cos => Expr::neg(Expr::call(Func::Sin, u.clone())),
                Func::Tan => Expr::div(Expr::num(1.0), Expr::pow(Expr::call(Func::Cos, u.clone()), Expr::num(2.0))),
                Func::Exp => Expr::call(Func::Exp, u.clone()),
                Func::Ln => Expr::div(Expr::num(1.0), u.clone()),
                Func::Sqrt => Expr::div(Expr::num(0.5), Expr::call(Func::Sqrt, u.clone())),
                Func::Abs => Expr::div(u.clone(), Expr::call(Func::Abs, u.clone())),
            };
            Expr::mul(outer, du)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Binding};

    fn d_at(text: &str, var: &str, env: &[(&str, f64)]) -> f64 {
        let env: Binding = env.iter().copied().collect();
        parse(text).unwrap().differentiate(var).evaluate(&env).unwrap()
    }

    #[test]
    fn inverse_cube() {
        assert_eq!(d_at("1/x^3", "x", &[("x", 1.0)]), -3.0);
    }

    #[test]
    fn partial_of_cubic_rate() {
        assert_eq!(d_at("x*(25-x^2-y^2)", "x", &[("x", 3.0), ("y", 4.0)]), -18.0);
    }

    #[test]
    fn constant() {
        assert_eq!(d_at("7", "x", &[("x", 2.5)]), 0.0);
        assert_eq!(parse("7").unwrap().differentiate("x"), super::Expr::Num(0.0));
    }

    #[test]
    fn other_identifiers_are_constants() {
        assert_eq!(d_at("a*x^2 + b*y", "x", &[("a", 2.0), ("b", 5.0), ("x", 3.0), ("y", 1.0)]), 12.0);
        assert_eq!(d_at("a*x^2 + b*y", "y", &[("a", 2.0), ("b", 5.0), ("x", 3.0), ("y", 1.0)]), 5.0);
    }

    #[test]
    fn variable_exponent() {
        // d/dx x^x = x^x (ln x + 1)
        let got = d_at("x^x", "x", &[("x", 2.0)]);
        assert!((got - 4.0 * (2f64.ln() + 1.0)).abs() < 1e-12);
        // d/dx 2^x = 2^x ln 2
        let got = d_at("2^x", "x", &[("x", 3.0)]);
        assert!((got - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn functions() {
        let x = 0.7f64;
        let cases: [(&str, f64); 7] = [
            ("sin(x)", x.cos()),
            ("cos(x)", -x.sin()),
            ("tan(x)", 1.0 / x.cos().powi(2)),
            ("exp(2*x)", 2.0 * (2.0 * x).exp()),
            ("ln(x)", 1.0 / x),
            ("sqrt(x)", 0.5 / x.sqrt()),
            ("abs(x-1)", -1.0),
        ];
        for (t, want) in cases {
            let got = d_at(t, "x", &[("x", x)]);
            assert!((got - want).abs() < 1e-12, "{t}: {got} vs {want}");
        }
    }
}
