//! Complex scalars, quadratic roots and the 2x2 eigenproblem.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Complex {
    pub re: f64,
    pub im: f64,
}

impl Complex {
    pub const I: Complex = Complex { re: 0.0, im: 1.0 };

    pub fn new(re: f64, im: f64) -> Self {
        Complex { re, im }
    }

    pub fn real(re: f64) -> Self {
        Complex { re, im: 0.0 }
    }

    pub fn conj(self) -> Self {
        Complex { re: self.re, im: -self.im }
    }

    /// `|z|^2 = re^2 + im^2`.
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// Division by multiplying numerator and denominator by the conjugate of
    /// the denominator.
    pub fn checked_div(self, rhs: Complex) -> Result<Complex> {
        let denom = rhs.norm_sqr();
        if denom == 0.0 {
            return Err(Error::ComplexDivisionByZero);
        }
        let num = self * rhs.conj();
        Ok(Complex { re: num.re / denom, im: num.im / denom })
    }

    pub fn recip(self) -> Result<Complex> {
        Complex::real(1.0).checked_div(self)
    }
}

impl Add for Complex {
    type Output = Complex;
    fn add(self, rhs: Complex) -> Complex {
        Complex { re: self.re + rhs.re, im: self.im + rhs.im }
    }
}

impl Sub for Complex {
    type Output = Complex;
    fn sub(self, rhs: Complex) -> Complex {
        Complex { re: self.re - rhs.re, im: self.im - rhs.im }
    }
}

impl Mul for Complex {
    type Output = Complex;
    fn mul(self, rhs: Complex) -> Complex {
        Complex { re: self.re * rhs.re - self.im * rhs.im, im: self.re * rhs.im + self.im * rhs.re }
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(self) -> Complex {
        Complex { re: -self.re, im: -self.im }
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im < 0.0 {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

pub type Vec2 = [f64; 2];

/// Row-major 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { a, b, c, d }
    }

    pub fn from_rows(rows: [[f64; 2]; 2]) -> Self {
        Mat2 { a: rows[0][0], b: rows[0][1], c: rows[1][0], d: rows[1][1] }
    }

    pub fn from_columns(c1: Vec2, c2: Vec2) -> Self {
        Mat2 { a: c1[0], b: c2[0], c: c1[1], d: c2[1] }
    }

    pub fn rows(&self) -> [[f64; 2]; 2] {
        [[self.a, self.b], [self.c, self.d]]
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.c * self.b
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    /// `tr^2 - 4 det`.
    pub fn discriminant(&self) -> f64 {
        let tr = self.trace();
        tr * tr - 4.0 * self.det()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (self.a.abs() + self.b.abs()).max(self.c.abs() + self.d.abs())
    }

    pub fn mul_vec(&self, v: Vec2) -> Vec2 {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    pub fn scaled(&self, k: f64) -> Mat2 {
        Mat2 { a: self.a * k, b: self.b * k, c: self.c * k, d: self.d * k }
    }
}

/// Roots of a real quadratic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RootPair {
    /// `lo <= hi`.
    RealDistinct(f64, f64),
    RealDouble(f64),
    /// `alpha +- i beta`, `beta > 0`.
    ComplexConjugate {
        alpha: f64,
        beta: f64,
    },
}

impl RootPair {
    pub fn as_complex(&self) -> [Complex; 2] {
        match *self {
            RootPair::RealDistinct(l1, l2) => [Complex::real(l1), Complex::real(l2)],
            RootPair::RealDouble(l) => [Complex::real(l), Complex::real(l)],
            RootPair::ComplexConjugate { alpha, beta } => [Complex::new(alpha, beta), Complex::new(alpha, -beta)],
        }
    }

    pub fn sum(&self) -> f64 {
        let [z1, z2] = self.as_complex();
        (z1 + z2).re
    }

    pub fn product(&self) -> f64 {
        let [z1, z2] = self.as_complex();
        (z1 * z2).re
    }

    pub fn max_real_part(&self) -> f64 {
        match *self {
            RootPair::RealDistinct(_, hi) => hi,
            RootPair::RealDouble(l) => l,
            RootPair::ComplexConjugate { alpha, .. } => alpha,
        }
    }
}

/// Roots of `lambda^2 + p lambda + q = 0`.
pub fn quadratic_roots(p: f64, q: f64) -> RootPair {
    let disc = p * p - 4.0 * q;
    let scale = (p * p).max(4.0 * q.abs());
    if scale == 0.0 || disc.abs() <= 1e-12 * scale {
        return RootPair::RealDouble(-p / 2.0);
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        // Avoid cancellation: compute the larger-magnitude root first.
        let (r1, r2) = if p == 0.0 {
            (-sq / 2.0, sq / 2.0)
        } else {
            let big = -(p + p.signum() * sq) / 2.0;
            (big, q / big)
        };
        RootPair::RealDistinct(r1.min(r2), r1.max(r2))
    } else {
        RootPair::ComplexConjugate { alpha: -p / 2.0, beta: (-disc).sqrt() / 2.0 }
    }
}

/// Roots of the characteristic equation `lambda^2 - tr lambda + det = 0`.
pub fn eigenvalues(m: &Mat2) -> RootPair {
    quadratic_roots(-m.trace(), m.det())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EigenVectors {
    /// One vector per real eigenvalue, in the order of the [`RootPair`].
    Real { v1: Vec2, v2: Vec2 },
    /// Real and imaginary parts of the eigenvector for `alpha + i beta`.
    Complex { vr: Vec2, vi: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenSystem {
    pub values: RootPair,
    pub vectors: EigenVectors,
}

fn norm_inf(v: Vec2) -> f64 {
    v[0].abs().max(v[1].abs())
}

/// Eigenvector for a real eigenvalue: `(-b, a - lambda)`, or `(d - lambda, -c)`
/// when the first is numerically zero.
fn real_eigenvector(m: &Mat2, lambda: f64) -> Result<Vec2> {
    let tol = 1e-12 * m.norm_inf();
    let primary = [-m.b, m.a - lambda];
    if norm_inf(primary) > tol {
        return Ok(primary);
    }
    let fallback = [m.d - lambda, -m.c];
    if norm_inf(fallback) > tol {
        return Ok(fallback);
    }
    Err(Error::Inconsistent(format!("no eigenvector for lambda = {lambda}")))
}

fn is_scalar_matrix(m: &Mat2, lambda: f64) -> bool {
    let tol = 1e-12 * m.norm_inf().max(f64::MIN_POSITIVE);
    m.b.abs() <= tol && m.c.abs() <= tol && (m.a - lambda).abs() <= tol && (m.d - lambda).abs() <= tol
}

/// Eigenvectors by the closed-form express formulas. Vectors are not
/// normalized.
pub fn eigenvectors(m: &Mat2, values: RootPair) -> Result<EigenSystem> {
    let vectors = match values {
        RootPair::RealDistinct(l1, l2) => {
            EigenVectors::Real { v1: real_eigenvector(m, l1)?, v2: real_eigenvector(m, l2)? }
        }
        RootPair::RealDouble(l) if is_scalar_matrix(m, l) => EigenVectors::Real { v1: [1.0, 0.0], v2: [0.0, 1.0] },
        RootPair::RealDouble(l) => {
            let v = real_eigenvector(m, l)?;
            EigenVectors::Real { v1: v, v2: v }
        }
        RootPair::ComplexConjugate { alpha, beta } => {
            // (-b, a - alpha - i beta), or (d - alpha - i beta, -c)
            let tol = 1e-12 * m.norm_inf();
            if m.b.abs() > tol {
                EigenVectors::Complex { vr: [-m.b, m.a - alpha], vi: [0.0, -beta] }
            } else if m.c.abs() > tol {
                EigenVectors::Complex { vr: [m.d - alpha, -m.c], vi: [-beta, 0.0] }
            } else {
                return Err(Error::Inconsistent("complex eigenvalues of a diagonal matrix".into()));
            }
        }
    };
    Ok(EigenSystem { values, vectors })
}

pub fn eigensystem(m: &Mat2) -> Result<EigenSystem> {
    eigenvectors(m, eigenvalues(m))
}

/// Solves `A x = rhs` by Cramer's rule.
pub fn cramer_solve(m: &Mat2, rhs: Vec2) -> Result<Vec2> {
    let det = m.det();
    let norm = m.norm_inf();
    if det.abs() <= 1e-12 * norm * norm || det == 0.0 {
        return Err(Error::SingularMatrix { det });
    }
    let det_x = rhs[0] * m.d - m.b * rhs[1];
    let det_y = m.a * rhs[1] - rhs[0] * m.c;
    Ok([det_x / det, det_y / det])
}
