use serde::{Deserialize, Serialize};

use super::{BinOp, Binding, Expr, ExprError};

/// Polynomial with a possibly negative lowest power:
/// `sum_i coeffs[i] * x^(low + i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPoly {
    pub low: i32,
    pub coeffs: Vec<f64>,
}

impl LaurentPoly {
    pub fn new(low: i32, coeffs: Vec<f64>) -> Self {
        LaurentPoly { low, coeffs }
    }

    pub fn constant(c: f64) -> Self {
        LaurentPoly { low: 0, coeffs: vec![c] }
    }

    fn monomial(power: i32) -> Self {
        LaurentPoly { low: power, coeffs: vec![1.0] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Highest power with a nonzero coefficient and that coefficient.
    pub fn leading(&self) -> Option<(i32, f64)> {
        self.coeffs.iter().rposition(|&c| c != 0.0).map(|i| (self.low + i as i32, self.coeffs[i]))
    }

    fn lowest_power(&self) -> Option<i32> {
        self.coeffs.iter().position(|&c| c != 0.0).map(|i| self.low + i as i32)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let poly = self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c);
        poly * x.powi(self.low)
    }

    fn shifted(&self, by: i32) -> Self {
        LaurentPoly { low: self.low + by, coeffs: self.coeffs.clone() }
    }

    fn add(&self, other: &Self, sign: f64) -> Self {
        let low = self.low.min(other.low);
        let high = (self.low + self.coeffs.len() as i32).max(other.low + other.coeffs.len() as i32);
        let mut coeffs = vec![0.0; (high - low) as usize];
        for (i, c) in self.coeffs.iter().enumerate() {
            coeffs[(self.low - low) as usize + i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            coeffs[(other.low - low) as usize + i] += sign * c;
        }
        LaurentPoly { low, coeffs }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                coeffs[i + j] += a * b;
            }
        }
        LaurentPoly { low: self.low + other.low, coeffs }
    }

    fn scale(&self, k: f64) -> Self {
        LaurentPoly { low: self.low, coeffs: self.coeffs.iter().map(|c| c * k).collect() }
    }
}

/// `numerator(x) / denominator(x)` with Laurent polynomial parts.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalFunctionCoeffs {
    pub numerator: LaurentPoly,
    pub denominator: LaurentPoly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LimitResult {
    Finite(f64),
    PlusInfinity,
    MinusInfinity,
    NoFiniteLimit,
}

impl LimitResult {
    /// Collapses the signed infinities into [`LimitResult::NoFiniteLimit`].
    pub fn finite_only(self) -> LimitResult {
        match self {
            LimitResult::PlusInfinity | LimitResult::MinusInfinity => LimitResult::NoFiniteLimit,
            other => other,
        }
    }
}

impl RationalFunctionCoeffs {
    pub fn new(numerator: LaurentPoly, denominator: LaurentPoly) -> Self {
        RationalFunctionCoeffs { numerator, denominator }
    }

    /// Converts an expression that is a ratio of polynomials in `var` (after
    /// substituting `env` for every other identifier). Function calls and
    /// non-integer powers of `var` are rejected.
    pub fn from_expr(e: &Expr, var: &str, env: &Binding) -> Result<Self, ExprError> {
        let (num, den) = to_ratio(e, var, env)?;
        if den.is_zero() {
            return Err(ExprError::ZeroDenominator);
        }
        Ok(RationalFunctionCoeffs { numerator: num, denominator: den })
    }

    /// Both parts multiplied by `x^k` so that no negative powers remain.
    pub fn cleared(&self) -> Self {
        let lowest =
            [self.numerator.lowest_power(), self.denominator.lowest_power()].into_iter().flatten().min().unwrap_or(0);
        let shift = (-lowest).max(0);
        RationalFunctionCoeffs {
            numerator: self.numerator.shifted(shift),
            denominator: self.denominator.shifted(shift),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.numerator.eval(x) / self.denominator.eval(x)
    }
}

/// Limit as `x -> +inf`, comparing the highest powers of numerator and
/// denominator.
pub fn rational_limit_at_infinity(r: &RationalFunctionCoeffs) -> Result<LimitResult, ExprError> {
    let r = r.cleared();
    let (den_deg, den_lead) = r.denominator.leading().ok_or(ExprError::ZeroDenominator)?;
    let Some((num_deg, num_lead)) = r.numerator.leading() else {
        return Ok(LimitResult::Finite(0.0));
    };
    Ok(match num_deg.cmp(&den_deg) {
        std::cmp::Ordering::Less => LimitResult::Finite(0.0),
        std::cmp::Ordering::Equal => LimitResult::Finite(num_lead / den_lead),
        std::cmp::Ordering::Greater => {
            if num_lead * den_lead > 0.0 {
                LimitResult::PlusInfinity
            } else {
                LimitResult::MinusInfinity
            }
        }
    })
}

fn not_rational(var: &str, reason: &str) -> ExprError {
    ExprError::NotRational { var: var.to_string(), reason: reason.to_string() }
}

fn to_ratio(e: &Expr, var: &str, env: &Binding) -> Result<(LaurentPoly, LaurentPoly), ExprError> {
    let one = || LaurentPoly::constant(1.0);
    Ok(match e {
        Expr::Num(v) => (LaurentPoly::constant(*v), one()),
        Expr::Ident(name) if name == var => (LaurentPoly::monomial(1), one()),
        Expr::Ident(name) => {
            let v = env.get(name).ok_or_else(|| ExprError::Unbound(name.clone()))?;
            (LaurentPoly::constant(v), one())
        }
        Expr::Neg(u) => {
            let (n, d) = to_ratio(u, var, env)?;
            (n.scale(-1.0), d)
        }
        Expr::Binary(op, l, r) => {
            let (ln, ld) = to_ratio(l, var, env)?;
            match op {
                BinOp::Pow => {
                    if r.depends_on(var) {
                        return Err(not_rational(var, "variable in exponent"));
                    }
                    let k = r.evaluate(env)?;
                    if k.fract() != 0.0 || k.abs() > 64.0 {
                        return Err(not_rational(var, "non-integer power"));
                    }
                    let k = k as i32;
                    let (base_n, base_d) = if k >= 0 { (ln, ld) } else { (ld, ln) };
                    let mut n = one();
                    let mut d = one();
                    for _ in 0..k.abs() {
                        n = n.mul(&base_n);
                        d = d.mul(&base_d);
                    }
                    (n, d)
                }
                _ => {
                    let (rn, rd) = to_ratio(r, var, env)?;
                    match op {
                        BinOp::Add => (ln.mul(&rd).add(&rn.mul(&ld), 1.0), ld.mul(&rd)),
                        BinOp::Sub => (ln.mul(&rd).add(&rn.mul(&ld), -1.0), ld.mul(&rd)),
                        BinOp::Mul => (ln.mul(&rn), ld.mul(&rd)),
                        BinOp::Div => (ln.mul(&rd), ld.mul(&rn)),
                        BinOp::Pow => unreachable!(),
                    }
                }
            }
        }
        Expr::Call(f, _) => return Err(not_rational(var, &format!("function {}", f.name()))),
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    fn limit_of(text: &str, var: &str, env: &[(&str, f64)]) -> LimitResult {
        let env: Binding = env.iter().copied().collect();
        let r = RationalFunctionCoeffs::from_expr(&parse(text).unwrap(), var, &env).unwrap();
        rational_limit_at_infinity(&r).unwrap()
    }

    #[test]
    fn lower_degree_numerator() {
        let got = limit_of("(a*x + q)/(c^2 + x^2)", "x", &[("a", 1.0), ("q", 2.0), ("c", 3.0)]);
        assert_eq!(got, LimitResult::Finite(0.0));
    }

    #[test]
    fn equal_degree_after_clearing() {
        let got = limit_of(
            "(a*N^2 + q)/(b/N + c^2 + d*N^2)",
            "N",
            &[("a", 3.0), ("d", 2.0), ("b", 1.0), ("c", 1.0), ("q", 1.0)],
        );
        assert_eq!(got, LimitResult::Finite(1.5));
    }

    #[test]
    fn no_finite_limit() {
        let env = [("a", 1.0), ("b", 1.0), ("c", 1.0), ("d", 1.0)];
        let got = limit_of("(a*P - 3*b*P^3)/(c*P - d*P^2)", "P", &env);
        assert_eq!(got, LimitResult::PlusInfinity);
        assert_eq!(got.finite_only(), LimitResult::NoFiniteLimit);
        assert_eq!(limit_of("-x^3/(1+x)", "x", &[]), LimitResult::MinusInfinity);
    }

    #[test]
    fn explicit_laurent_coefficients() {
        // (3 N^2 + 1) / (N^-1 + 1 + 2 N^2)
        let r = RationalFunctionCoeffs::new(
            LaurentPoly::new(0, vec![1.0, 0.0, 3.0]),
            LaurentPoly::new(-1, vec![1.0, 1.0, 0.0, 2.0]),
        );
        assert_eq!(rational_limit_at_infinity(&r).unwrap(), LimitResult::Finite(1.5));
        assert_eq!(r.cleared().denominator.low, 0);
    }

    #[test]
    fn zero_denominator_rejected() {
        let r = RationalFunctionCoeffs::new(LaurentPoly::constant(1.0), LaurentPoly::new(0, vec![0.0, 0.0]));
        assert_eq!(rational_limit_at_infinity(&r), Err(ExprError::ZeroDenominator));
        let e = parse("x/(x-x)").unwrap();
        assert_eq!(RationalFunctionCoeffs::from_expr(&e, "x", &Binding::new()), Err(ExprError::ZeroDenominator));
    }

    #[test]
    fn rejects_non_rational() {
        let e = parse("sin(x)/x").unwrap();
        assert!(matches!(
            RationalFunctionCoeffs::from_expr(&e, "x", &Binding::new()),
            Err(ExprError::NotRational { .. })
        ));
        let e = parse("x^0.5").unwrap();
        assert!(RationalFunctionCoeffs::from_expr(&e, "x", &Binding::new()).is_err());
    }
}
