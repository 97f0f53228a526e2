//! Real-valued expressions in named variables and parameters.
//!
//! Expressions are parsed from a small infix grammar, evaluated against a
//! [`Binding`], differentiated symbolically and, when they are ratios of
//! polynomials, analysed for their limit at infinity.

mod approx;
mod compile;
mod diff;
mod limit;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use approx::{linear_approx_2d, AffineApprox2D};
pub use compile::Compiled;
pub use limit::{rational_limit_at_infinity, LaurentPoly, LimitResult, RationalFunctionCoeffs};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function '{name}' at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unbound identifier '{0}'")]
    Unbound(String),
    #[error("domain error in {op} at {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("expression is not a ratio of polynomials in '{var}': {reason}")]
    NotRational { var: String, reason: String },
    #[error("denominator is identically zero")]
    ZeroDenominator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// The single-argument functions the grammar accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    pub(crate) fn apply(self, v: f64) -> Result<f64, ExprError> {
        match self {
            Func::Sin => Ok(v.sin()),
            Func::Cos => Ok(v.cos()),
            Func::Tan => Ok(v.tan()),
            Func::Exp => Ok(v.exp()),
            Func::Ln if v <= 0.0 => Err(ExprError::Domain { op: "ln", value: v }),
            Func::Ln => Ok(v.ln()),
            Func::Sqrt if v < 0.0 => Err(ExprError::Domain { op: "sqrt", value: v }),
            Func::Sqrt => Ok(v.sqrt()),
            Func::Abs => Ok(v.abs()),
        }
    }
}

pub(crate) fn apply_binop(op: BinOp, l: f64, r: f64) -> Result<f64, ExprError> {
    match op {
        BinOp::Add => Ok(l + r),
        BinOp::Sub => Ok(l - r),
        BinOp::Mul => Ok(l * r),
        BinOp::Div if r == 0.0 => Err(ExprError::Domain { op: "division", value: l }),
        BinOp::Div => Ok(l / r),
        BinOp::Pow => {
            if l == 0.0 && r < 0.0 {
                return Err(ExprError::Domain { op: "power", value: l });
            }
            if l < 0.0 && r.fract() != 0.0 {
                return Err(ExprError::Domain { op: "power", value: l });
            }
            if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
                Ok(l.powi(r as i32))
            } else {
                Ok(l.powf(r))
            }
        }
    }
}

/// Expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Ident(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Identifier-to-value assignment used for evaluation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Binding(BTreeMap<String, f64>);

impl Binding {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, value: f64) -> Self {
        self.set(name, value);
        self
    }

    pub fn set(&mut self, name: &str, value: f64) {
        self.0.insert(name.to_string(), value);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<'a> FromIterator<(&'a str, f64)> for Binding {
    fn from_iter<I: IntoIterator<Item = (&'a str, f64)>>(iter: I) -> Self {
        Binding(iter.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }
}

pub fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(v) => Some(*v),
            _ => None,
        }
    }

    // Constructors below fold constants and drop neutral elements. They never
    // fold an operation that would raise a domain error.

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => *inner,
            e => Expr::Neg(Box::new(e)),
        }
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) => Expr::Num(a + b),
            (Some(a), _) if a == 0.0 => r,
            (_, Some(b)) if b == 0.0 => l,
            _ => Expr::Binary(BinOp::Add, Box::new(l), Box::new(r)),
        }
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) => Expr::Num(a - b),
            (Some(a), _) if a == 0.0 => Expr::neg(r),
            (_, Some(b)) if b == 0.0 => l,
            _ => Expr::Binary(BinOp::Sub, Box::new(l), Box::new(r)),
        }
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) => Expr::Num(a * b),
            (Some(a), _) | (_, Some(a)) if a == 0.0 => Expr::Num(0.0),
            (Some(a), _) if a == 1.0 => r,
            (_, Some(b)) if b == 1.0 => l,
            (Some(a), _) if a == -1.0 => Expr::neg(r),
            (_, Some(b)) if b == -1.0 => Expr::neg(l),
            _ => Expr::Binary(BinOp::Mul, Box::new(l), Box::new(r)),
        }
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        match (l.as_num(), r.as_num()) {
            (Some(a), Some(b)) if b != 0.0 => Expr::Num(a / b),
            (_, Some(b)) if b == 1.0 => l,
            _ => Expr::Binary(BinOp::Div, Box::new(l), Box::new(r)),
        }
    }

    pub fn pow(l: Expr, r: Expr) -> Expr {
        match (l.as_num(), r.as_num()) {
            (_, Some(b)) if b == 1.0 => l,
            (_, Some(b)) if b == 0.0 => Expr::Num(1.0),
            (Some(a), Some(b)) => match apply_binop(BinOp::Pow, a, b) {
                Ok(v) if v.is_finite() => Expr::Num(v),
                _ => Expr::Binary(BinOp::Pow, Box::new(l), Box::new(r)),
            },
            _ => Expr::Binary(BinOp::Pow, Box::new(l), Box::new(r)),
        }
    }

    /// All identifiers referenced by the expression, sorted.
    pub fn identifiers(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_identifiers(&mut out);
        out
    }

    fn collect_identifiers(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Ident(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_identifiers(out),
            Expr::Binary(_, l, r) => {
                l.collect_identifiers(out);
                r.collect_identifiers(out);
            }
        }
    }

    pub fn depends_on(&self, var: &str) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Ident(name) => name == var,
            Expr::Neg(e) | Expr::Call(_, e) => e.depends_on(var),
            Expr::Binary(_, l, r) => l.depends_on(var) || r.depends_on(var),
        }
    }

    /// Tree-walking evaluation.
    pub fn evaluate(&self, env: &Binding) -> Result<f64, ExprError> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Ident(name) => env.get(name).ok_or_else(|| ExprError::Unbound(name.clone())),
            Expr::Neg(e) => Ok(-e.evaluate(env)?),
            Expr::Binary(op, l, r) => apply_binop(*op, l.evaluate(env)?, r.evaluate(env)?),
            Expr::Call(f, arg) => f.apply(arg.evaluate(env)?),
        }
    }

    /// Symbolic partial derivative with respect to `var`; every other
    /// identifier is held constant.
    pub fn differentiate(&self, var: &str) -> Expr {
        diff::differentiate(self, var)
    }

    /// Replaces identifiers present in `env` by their numeric values.
    pub fn substitute(&self, env: &Binding) -> Expr {
        match self {
            Expr::Num(v) => Expr::Num(*v),
            Expr::Ident(name) => match env.get(name) {
                Some(v) => Expr::Num(v),
                None => self.clone(),
            },
            Expr::Neg(e) => Expr::Neg(Box::new(e.substitute(env))),
            Expr::Binary(op, l, r) => Expr::Binary(*op, Box::new(l.substitute(env)), Box::new(r.substitute(env))),
            Expr::Call(f, e) => Expr::Call(*f, Box::new(e.substitute(env))),
        }
    }

    /// Compiles against an ordered list of slot names; see [`Compiled`].
    pub fn compile(&self, slots: &[&str], params: &Binding) -> Result<Compiled, ExprError> {
        Compiled::new(self, slots, params)
    }
}

fn write_num(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // `{:?}` is the shortest representation that parses back to the same bits.
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

/// Renders with explicit parentheses around every compound operand, so that
/// `parse(render(e))` rebuilds the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write_num(f, *v),
            Expr::Ident(name) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{})", Operand(e)),
            Expr::Binary(op, l, r) => write!(f, "{} {} {}", Operand(l), op.symbol(), Operand(r)),
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), arg),
        }
    }
}

struct Operand<'a>(&'a Expr);

impl fmt::Display for Operand<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            Expr::Binary(..) => write!(f, "({})", self.0),
            e => write!(f, "{e}"),
        }
    }
}
