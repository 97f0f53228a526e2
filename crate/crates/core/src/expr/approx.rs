use super::{Binding, Expr, ExprError};

/// First-order Taylor model of `f(x, y)` around an anchor point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineApprox2D {
    pub base: f64,
    pub slope_x: f64,
    pub slope_y: f64,
    pub anchor: (f64, f64),
}

impl AffineApprox2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (x0, y0) = self.anchor;
        let dx = x - x0;
        let dy = y - y0;
        if dx == 0.0 && dy == 0.0 {
            return self.base;
        }
        self.base + self.slope_x * dx + self.slope_y * dy
    }

    /// Coefficients `(c0, cx, cy)` of the expanded form `c0 + cx*x + cy*y`.
    pub fn expanded(&self) -> (f64, f64, f64) {
        let (x0, y0) = self.anchor;
        (self.base - self.slope_x * x0 - self.slope_y * y0, self.slope_x, self.slope_y)
    }
}

/// Linear approximation of `f` at `anchor`, where `vars` names the two
/// coordinates and `env` binds everything else.
pub fn linear_approx_2d(
    f: &Expr,
    vars: (&str, &str),
    anchor: (f64, f64),
    env: &Binding,
) -> Result<AffineApprox2D, ExprError> {
    let at = env.clone().with(vars.0, anchor.0).with(vars.1, anchor.1);
    Ok(AffineApprox2D {
        base: f.evaluate(&at)?,
        slope_x: f.differentiate(vars.0).evaluate(&at)?,
        slope_y: f.differentiate(vars.1).evaluate(&at)?,
        anchor,
    })
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn exponential_example() {
        let f = parse("exp(x+2*y)").unwrap();
        let a = linear_approx_2d(&f, ("x", "y"), (0.0, 0.0), &Binding::new()).unwrap();
        assert_eq!((a.base, a.slope_x, a.slope_y), (1.0, 1.0, 2.0));
        assert!((a.eval(0.1, 0.1) - 1.3).abs() < 1e-15);
    }

    #[test]
    fn paraboloid_expanded_form() {
        let f = parse("x^2+y^2").unwrap();
        let a = linear_approx_2d(&f, ("x", "y"), (1.0, 1.0), &Binding::new()).unwrap();
        assert_eq!(a.expanded(), (-2.0, 2.0, 2.0));
    }

    #[test]
    fn constant_function() {
        let f = parse("c").unwrap();
        let env = Binding::new().with("c", 4.5);
        let a = linear_approx_2d(&f, ("x", "y"), (3.0, -2.0), &env).unwrap();
        assert_eq!((a.base, a.slope_x, a.slope_y), (4.5, 0.0, 0.0));
    }

    #[test]
    fn propagates_domain_error() {
        let f = parse("ln(x)*y").unwrap();
        assert!(linear_approx_2d(&f, ("x", "y"), (0.0, 1.0), &Binding::new()).is_err());
    }
}
