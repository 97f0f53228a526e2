//! Planar systems `dx/dt = f(x, y)`, `dy/dt = g(x, y)`.

mod field;
mod nullclines;
mod signs;

pub use field::{
    field_at, integrate_trajectory, sample_vector_field, FieldSample, Termination, Trajectory, TrajectoryOptions,
};
pub use nullclines::{extract_nullclines, ClineKind, NullClineSet, Polyline};
pub use signs::{classify_from_signs, derive_sign_matrix, PartialClass, Sign, SignMat2};

use serde::{Deserialize, Serialize};

use crate::algebra2::{eigensystem, EigenSystem, Mat2, Vec2};
use crate::error::{Error, Result};
use crate::expr::{Binding, Compiled, Expr};
use crate::linsys::{classify_linear, Classification};

pub const DEFAULT_GRID: usize = 64;

/// Analysis rectangle `[x_lo, x_hi] x [y_lo, y_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x_lo: f64,
    pub x_hi: f64,
    pub y_lo: f64,
    pub y_hi: f64,
}

impl Domain {
    pub fn new(x: (f64, f64), y: (f64, f64)) -> Result<Self> {
        let ok = |(lo, hi): (f64, f64)| lo.is_finite() && hi.is_finite() && lo < hi;
        if !ok(x) || !ok(y) {
            return Err(Error::InvalidArgument(format!("degenerate domain {x:?} x {y:?}")));
        }
        Ok(Domain { x_lo: x.0, x_hi: x.1, y_lo: y.0, y_hi: y.1 })
    }

    pub fn width(&self) -> f64 {
        self.x_hi - self.x_lo
    }

    pub fn height(&self) -> f64 {
        self.y_hi - self.y_lo
    }

    pub fn diagonal(&self) -> f64 {
        self.width().hypot(self.height())
    }

    /// Inclusive, with a slack of `1e-9` of the diagonal.
    pub fn contains(&self, p: Vec2) -> bool {
        let s = 1e-9 * self.diagonal();
        p[0] >= self.x_lo - s && p[0] <= self.x_hi + s && p[1] >= self.y_lo - s && p[1] <= self.y_hi + s
    }

    /// Lattice of `(n + 1) x (n + 1)` points; the last index hits the upper
    /// bound exactly.
    pub(crate) fn lattice(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let axis = |lo: f64, hi: f64| -> Vec<f64> {
            (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
        };
        (axis(self.x_lo, self.x_hi), axis(self.y_lo, self.y_hi))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Model2D {
    pub f: Expr,
    pub g: Expr,
    pub xname: String,
    pub yname: String,
    pub params: Binding,
    pub domain: Domain,
}

impl Model2D {
    pub fn new(f: Expr, g: Expr, vars: (&str, &str), params: Binding, domain: Domain) -> Result<Self> {
        if vars.0 == vars.1 {
            return Err(Error::InvalidArgument(format!("variables must differ, got {} twice", vars.0)));
        }
        for id in f.identifiers().into_iter().chain(g.identifiers()) {
            if id != vars.0 && id != vars.1 && !params.contains(&id) {
                return Err(Error::UndeclaredIdentifier(id));
            }
        }
        Ok(Model2D { f, g, xname: vars.0.to_string(), yname: vars.1.to_string(), params, domain })
    }

    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        if !self.params.contains(name) {
            return Err(Error::UnknownParameter(name.to_string()));
        }
        let mut m = self.clone();
        m.params.set(name, value);
        Ok(m)
    }

    pub fn compile(&self) -> Result<System> {
        let slots = [self.xname.as_str(), self.yname.as_str()];
        let c = |e: &Expr| e.compile(&slots, &self.params);
        Ok(System {
            f: c(&self.f)?,
            g: c(&self.g)?,
            fx: c(&self.f.differentiate(&self.xname))?,
            fy: c(&self.f.differentiate(&self.yname))?,
            gx: c(&self.g.differentiate(&self.xname))?,
            gy: c(&self.g.differentiate(&self.yname))?,
            domain: self.domain,
        })
    }
}

/// Compiled right-hand side with its symbolic Jacobian.
#[derive(Debug, Clone)]
pub struct System {
    f: Compiled,
    g: Compiled,
    fx: Compiled,
    fy: Compiled,
    gx: Compiled,
    gy: Compiled,
    pub domain: Domain,
}

impl System {
    fn at(c: &Compiled, p: Vec2) -> Result<f64> {
        c.eval(&p).map_err(|e| Error::eval_at(p[0], Some(p[1]), e))
    }

    pub fn rhs(&self, p: Vec2) -> Result<Vec2> {
        Ok([Self::at(&self.f, p)?, Self::at(&self.g, p)?])
    }

    pub fn jacobian(&self, p: Vec2) -> Result<Mat2> {
        Ok(Mat2::new(Self::at(&self.fx, p)?, Self::at(&self.fy, p)?, Self::at(&self.gx, p)?, Self::at(&self.gy, p)?))
    }

    /// `max(1, max |f|, |g|)` over the default lattice, skipping points
    /// where the right-hand side is undefined.
    pub fn scale(&self) -> f64 {
        let (xs, ys) = self.domain.lattice(DEFAULT_GRID);
        let mut s = 1.0f64;
        for &y in &ys {
            for &x in &xs {
                if let Ok([f, g]) = self.rhs([x, y]) {
                    if f.is_finite() && g.is_finite() {
                        s = s.max(f.abs()).max(g.abs());
                    }
                }
            }
        }
        s
    }
}

/// Newton iteration on `(f, g) = 0` with backtracking; falls back to
/// damped gradient steps on `|F|^2` when the Jacobian is singular.
pub(crate) fn newton_2d(sys: &System, start: Vec2, tol: f64, max_iter: usize) -> Option<Vec2> {
    let norm = |v: Vec2| v[0].abs().max(v[1].abs());
    let mut p = start;
    let mut fp = sys.rhs(p).ok()?;
    let mut converged_at = None;
    for it in 0..max_iter {
        if norm(fp) <= tol {
            converged_at.get_or_insert(it);
            // two extra steps to settle to rounding level
            if it >= converged_at.unwrap() + 2 {
                break;
            }
        }
        let j = sys.jacobian(p).ok()?;
        let det = j.det();
        let n = j.norm_inf();
        let dir = if det.abs() > 1e-14 * (n * n).max(f64::MIN_POSITIVE) {
            [-(j.d * fp[0] - j.b * fp[1]) / det, -(-j.c * fp[0] + j.a * fp[1]) / det]
        } else {
            let grad = [j.a * fp[0] + j.c * fp[1], j.b * fp[0] + j.d * fp[1]];
            let gg = grad[0] * grad[0] + grad[1] * grad[1];
            if gg == 0.0 {
                break;
            }
            let k = (fp[0] * fp[0] + fp[1] * fp[1]) / gg;
            [-k * grad[0], -k * grad[1]]
        };
        let mut lambda = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let q = [p[0] + lambda * dir[0], p[1] + lambda * dir[1]];
            if let Ok(fq) = sys.rhs(q) {
                if fq[0].is_finite() && fq[1].is_finite() && norm(fq) < norm(fp) {
                    p = q;
                    fp = fq;
                    improved = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
        if !sys.domain.contains(p) && (p[0] - start[0]).abs().max((p[1] - start[1]).abs()) > sys.domain.diagonal() {
            return None;
        }
    }
    (norm(fp) <= tol && sys.domain.contains(p)).then_some(p)
}

fn sort_points(points: &mut [Vec2]) {
    points.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
}

fn brackets(v: &[f64]) -> bool {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

/// Equilibria in the domain, sorted by `(x, y)`.
pub fn find_equilibria_2d(m: &Model2D) -> Result<Vec<Vec2>> {
    find_equilibria_2d_with_grid(m, DEFAULT_GRID)
}

pub fn find_equilibria_2d_with_grid(m: &Model2D, grid: usize) -> Result<Vec<Vec2>> {
    let sys = m.compile()?;
    let scale = sys.scale();
    let tol = 1e-10 * scale;
    let (xs, ys) = m.domain.lattice(grid);
    let mut fv = vec![[0.0; 2]; xs.len() * ys.len()];
    for (j, &y) in ys.iter().enumerate() {
        for (i, &x) in xs.iter().enumerate() {
            fv[j * xs.len() + i] = sys.rhs([x, y])?;
        }
    }
    let idx = |i: usize, j: usize| j * xs.len() + i;
    let mut found: Vec<Vec2> = Vec::new();
    let radius = 1e-6 * m.domain.diagonal();
    for j in 0..grid {
        for i in 0..grid {
            let corners = [fv[idx(i, j)], fv[idx(i + 1, j)], fv[idx(i, j + 1)], fv[idx(i + 1, j + 1)]];
            if !brackets(&corners.map(|c| c[0])) || !brackets(&corners.map(|c| c[1])) {
                continue;
            }
            let seed = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            // corners first: equilibria on the lattice itself are common
            let starts = [seed, [xs[i], ys[j]]];
            for s in starts {
                if let Some(p) = newton_2d(&sys, s, tol, 50) {
                    if !found.iter().any(|q| (q[0] - p[0]).hypot(q[1] - p[1]) <= radius) {
                        found.push(p);
                    }
                }
            }
        }
    }
    sort_points(&mut found);
    Ok(found)
}

pub fn jacobian_at(m: &Model2D, p: Vec2) -> Result<Mat2> {
    m.compile()?.jacobian(p)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumReport {
    pub location: Vec2,
    pub jacobian: Mat2,
    pub det: f64,
    pub tr: f64,
    pub discriminant: f64,
    pub eigen: EigenSystem,
    pub classification: Classification,
}

pub(crate) fn report_at(sys: &System, p: Vec2) -> Result<EquilibriumReport> {
    let jacobian = sys.jacobian(p)?;
    Ok(EquilibriumReport {
        location: p,
        jacobian,
        det: jacobian.det(),
        tr: jacobian.trace(),
        discriminant: jacobian.discriminant(),
        eigen: eigensystem(&jacobian)?,
        classification: classify_linear(&jacobian),
    })
}

/// Full linearization report at an equilibrium.
pub fn classify_equilibrium_2d(m: &Model2D, p: Vec2) -> Result<EquilibriumReport> {
    let sys = m.compile()?;
    let [f, g] = sys.rhs(p)?;
    let residual = f.abs().max(g.abs());
    if residual > 1e-10 * sys.scale() {
        return Err(Error::NotEquilibrium { x: p[0], y: p[1], residual });
    }
    report_at(&sys, p)
}

/// Every equilibrium with its report.
pub fn analyze_equilibria(m: &Model2D) -> Result<Vec<EquilibriumReport>> {
    let sys = m.compile()?;
    find_equilibria_2d(m)?.into_iter().map(|p| report_at(&sys, p)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    pub(crate) fn ppour() -> Model2D {
        Model2D::new(
            parse("3*x*(1-x) - 1.5*x*y").unwrap(),
            parse("0.5*x*y - 0.25*y").unwrap(),
            ("x", "y"),
            Binding::new(),
            Domain::new((0.0, 2.0), (0.0, 3.0)).unwrap(),
        )
        .unwrap()
    }

    fn close(p: Vec2, q: Vec2, tol: f64) -> bool {
        (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol
    }

    #[test]
    fn ppour_equilibria() {
        let eq = find_equilibria_2d(&ppour()).unwrap();
        assert_eq!(eq.len(), 3, "{eq:?}");
        for (p, want) in eq.iter().zip([[0.0, 0.0], [0.5, 1.0], [1.0, 0.0]]) {
            assert!(close(*p, want, 1e-10), "{p:?}");
        }
    }

    #[test]
    fn ppour_jacobian_and_classes() {
        let m = ppour();
        assert_eq!(jacobian_at(&m, [0.5, 1.0]).unwrap(), Mat2::new(-1.5, -0.75, 0.5, 0.0));
        let r = classify_equilibrium_2d(&m, [0.5, 1.0]).unwrap();
        assert_eq!(r.classification, Classification::StableNode);
        assert!((r.det - 0.375).abs() < 1e-15 && (r.discriminant - 0.75).abs() < 1e-15);
        assert_eq!(classify_equilibrium_2d(&m, [0.0, 0.0]).unwrap().classification, Classification::Saddle);
        assert_eq!(classify_equilibrium_2d(&m, [1.0, 0.0]).unwrap().classification, Classification::Saddle);
        assert!(matches!(classify_equilibrium_2d(&m, [1.0, 1.0]), Err(Error::NotEquilibrium { .. })));
    }

    #[test]
    fn undeclared_identifier() {
        let e = Model2D::new(
            parse("q*x").unwrap(),
            parse("y").unwrap(),
            ("x", "y"),
            Binding::new(),
            Domain::new((0.0, 1.0), (0.0, 1.0)).unwrap(),
        )
        .unwrap_err();
        assert_eq!(e.to_string(), "undeclared identifier q");
    }

    #[test]
    fn no_equilibria() {
        let m = Model2D::new(
            parse("1").unwrap(),
            parse("x").unwrap(),
            ("x", "y"),
            Binding::new(),
            Domain::new((-1.0, 1.0), (-1.0, 1.0)).unwrap(),
        )
        .unwrap();
        assert!(find_equilibria_2d(&m).unwrap().is_empty());
    }
}
