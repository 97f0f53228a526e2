//! Closed-form solutions of `dv/dt = A v` for a constant 2x2 matrix `A`, and
//! the determinant-trace classification of its equilibrium at the origin.

use serde::{Deserialize, Serialize};

use crate::algebra2::{cramer_solve, eigensystem, EigenVectors, Mat2, RootPair, Vec2};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Saddle,
    StableNode,
    UnstableNode,
    StableSpiral,
    UnstableSpiral,
    Center,
    Degenerate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Saddle => "saddle",
            Classification::StableNode => "stable_node",
            Classification::UnstableNode => "unstable_node",
            Classification::StableSpiral => "stable_spiral",
            Classification::UnstableSpiral => "unstable_spiral",
            Classification::Center => "center",
            Classification::Degenerate => "degenerate",
        }
    }

    pub fn is_stable(self) -> bool {
        matches!(self, Classification::StableNode | Classification::StableSpiral)
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Tolerance shared by the linear and the nonlinear classifiers.
pub fn classification_tolerance(m: &Mat2) -> f64 {
    let n = m.norm_inf();
    1e-9 * (n * n).max(1.0)
}

/// Determinant-trace classification.
pub fn classify_linear(m: &Mat2) -> Classification {
    let eps = classification_tolerance(m);
    let det = m.det();
    let tr = m.trace();
    if det.abs() <= eps {
        return Classification::Degenerate;
    }
    if det < 0.0 {
        return Classification::Saddle;
    }
    if tr.abs() <= eps {
        return Classification::Center;
    }
    let disc = tr * tr - 4.0 * det;
    match (disc >= 0.0, tr > 0.0) {
        (true, true) => Classification::UnstableNode,
        (true, false) => Classification::StableNode,
        (false, true) => Classification::UnstableSpiral,
        (false, false) => Classification::StableSpiral,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SolutionKind {
    /// `C1 v1 e^(l1 t) + C2 v2 e^(l2 t)`.
    Real { l1: f64, l2: f64, v1: Vec2, v2: Vec2 },
    /// `C1 y1(t) + C2 y2(t)` with
    /// `y1 = e^(alpha t) (vr cos(beta t) - vi sin(beta t))` and
    /// `y2 = e^(alpha t) (vr sin(beta t) + vi cos(beta t))`.
    Complex { alpha: f64, beta: f64, vr: Vec2, vi: Vec2 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSolution {
    pub matrix: Mat2,
    pub kind: SolutionKind,
}

impl LinearSolution {
    /// The two fundamental solutions at time `t`.
    pub fn basis_at(&self, t: f64) -> Result<(Vec2, Vec2)> {
        match self.kind {
            SolutionKind::Real { l1, l2, v1, v2 } => {
                let worst = (l1 * t).abs().max((l2 * t).abs());
                if worst > 700.0 {
                    return Err(Error::Overflow(worst));
                }
                let (e1, e2) = ((l1 * t).exp(), (l2 * t).exp());
                Ok(([v1[0] * e1, v1[1] * e1], [v2[0] * e2, v2[1] * e2]))
            }
            SolutionKind::Complex { alpha, beta, vr, vi } => {
                if (alpha * t).abs() > 700.0 {
                    return Err(Error::Overflow((alpha * t).abs()));
                }
                let growth = (alpha * t).exp();
                let (s, c) = (beta * t).sin_cos();
                let y1 = [growth * (vr[0] * c - vi[0] * s), growth * (vr[1] * c - vi[1] * s)];
                let y2 = [growth * (vr[0] * s + vi[0] * c), growth * (vr[1] * s + vi[1] * c)];
                Ok((y1, y2))
            }
        }
    }
}

/// General solution from the eigen data of `m`.
pub fn general_solution(m: &Mat2) -> Result<LinearSolution> {
    let es = eigensystem(m)?;
    let kind = match (es.values, es.vectors) {
        (RootPair::RealDistinct(l1, l2), EigenVectors::Real { v1, v2 }) => SolutionKind::Real { l1, l2, v1, v2 },
        (RootPair::RealDouble(l), EigenVectors::Real { v1, v2 }) => SolutionKind::Real { l1: l, l2: l, v1, v2 },
        (RootPair::ComplexConjugate { alpha, beta }, EigenVectors::Complex { vr, vi }) => {
            SolutionKind::Complex { alpha, beta, vr, vi }
        }
        _ => return Err(Error::Inconsistent("eigenvalue and eigenvector kinds disagree".into())),
    };
    Ok(LinearSolution { matrix: *m, kind })
}

/// Arbitrary constants fixed by an initial condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IvpCoefficients {
    pub c1: f64,
    pub c2: f64,
    pub solution: LinearSolution,
    pub initial: Vec2,
}

/// Solves `C1 y1(0) + C2 y2(0) = init`.
pub fn solve_ivp(m: &Mat2, init: Vec2) -> Result<IvpCoefficients> {
    let solution = general_solution(m)?;
    let (b1, b2) = solution.basis_at(0.0)?;
    let basis = Mat2::from_columns(b1, b2);
    let [c1, c2] = cramer_solve(&basis, init).map_err(|e| match (e, solution.kind) {
        (Error::SingularMatrix { .. }, SolutionKind::Real { l1, .. }) => Error::DefectiveMatrix { eigenvalue: l1 },
        (e, _) => e,
    })?;
    Ok(IvpCoefficients { c1, c2, solution, initial: init })
}

impl IvpCoefficients {
    pub fn eval(&self, t: f64) -> Result<Vec2> {
        let (y1, y2) = self.solution.basis_at(t)?;
        Ok([self.c1 * y1[0] + self.c2 * y2[0], self.c1 * y1[1] + self.c2 * y2[1]])
    }
}

pub fn eval_solution(sol: &IvpCoefficients, t: f64) -> Result<Vec2> {
    sol.eval(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cross(u: Vec2, v: Vec2) -> f64 {
        u[0] * v[1] - u[1] * v[0]
    }

    #[test]
    fn general_solution_examples() {
        let s = general_solution(&Mat2::new(1.0, 4.0, 1.0, 1.0)).unwrap();
        assert_eq!(s.kind, SolutionKind::Real { l1: -1.0, l2: 3.0, v1: [-4.0, 2.0], v2: [-4.0, -2.0] });

        let s = general_solution(&Mat2::new(0.0, 2.0, -2.0, 0.0)).unwrap();
        assert_eq!(s.kind, SolutionKind::Complex { alpha: 0.0, beta: 2.0, vr: [-2.0, 0.0], vi: [0.0, -2.0] });

        let s = general_solution(&Mat2::new(-2.0, 1.0, 1.0, -2.0)).unwrap();
        let SolutionKind::Real { l1, l2, v1, v2 } = s.kind else { panic!() };
        assert_eq!((l1, l2), (-3.0, -1.0));
        assert_eq!(cross(v1, [-1.0, 1.0]), 0.0);
        assert_eq!(cross(v2, [-1.0, -1.0]), 0.0);
    }

    #[test]
    fn ivp_constants() {
        let ivp = solve_ivp(&Mat2::new(1.0, 4.0, 1.0, 1.0), [4.0, 6.0]).unwrap();
        assert!((ivp.c1 - 1.0).abs() < 1e-12 && (ivp.c2 + 2.0).abs() < 1e-12);
        let at1 = ivp.eval(1.0).unwrap();
        let e = std::f64::consts::E;
        let want = [-4.0 / e + 8.0 * e.powi(3), 2.0 / e + 4.0 * e.powi(3)];
        assert!((at1[0] - want[0]).abs() < 1e-12 * want[0].abs());
        assert!((at1[1] - want[1]).abs() < 1e-12 * want[1].abs());
    }

    #[test]
    fn single_mode_ivp() {
        let ivp = solve_ivp(&Mat2::new(1.0, -2.0, 5.0, 8.0), [3.0, -3.0]).unwrap();
        for t in [0.0, 0.3, 1.0] {
            let v = ivp.eval(t).unwrap();
            let e = (3.0 * t).exp();
            assert!((v[0] - 3.0 * e).abs() < 1e-12 * e && (v[1] + 3.0 * e).abs() < 1e-12 * e);
        }
    }

    #[test]
    fn diffusion_with_zero_eigenvalue() {
        let m = Mat2::new(-0.01, 0.01, 0.04, -0.04);
        let ivp = solve_ivp(&m, [3.0, 0.0]).unwrap();
        for t in [0.0, 10.0, 100.0] {
            let v = ivp.eval(t).unwrap();
            let decay = (-0.05 * t).exp();
            assert!((v[0] - (2.4 + 0.6 * decay)).abs() < 1e-9);
            assert!((v[1] - (2.4 - 2.4 * decay)).abs() < 1e-9);
        }
        assert_eq!(classify_linear(&m), Classification::Degenerate);
    }

    #[test]
    fn defective_rejected() {
        assert!(matches!(solve_ivp(&Mat2::new(1.0, 1.0, 0.0, 1.0), [1.0, 1.0]), Err(Error::DefectiveMatrix { .. })));
        // scalar matrices are not defective
        let ivp = solve_ivp(&Mat2::new(2.0, 0.0, 0.0, 2.0), [1.0, -1.0]).unwrap();
        assert_eq!(ivp.eval(0.0).unwrap(), [1.0, -1.0]);
    }

    #[test]
    fn overflow_reported() {
        let ivp = solve_ivp(&Mat2::new(1.0, 0.0, 0.0, 2.0), [1.0, 1.0]).unwrap();
        assert!(matches!(ivp.eval(400.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn classification_examples() {
        assert_eq!(classify_linear(&Mat2::new(1.0, 2.0, 3.0, 4.0)), Classification::Saddle);
        assert_eq!(classify_linear(&Mat2::new(4.0, 1.0, 1.0, 2.0)), Classification::UnstableNode);
        assert_eq!(classify_linear(&Mat2::new(-2.0, 3.0, -2.0, 1.0)), Classification::StableSpiral);
        assert_eq!(classify_linear(&Mat2::new(1.0, -1.0, 2.0, -1.0)), Classification::Center);
        assert_eq!(classify_linear(&Mat2::new(0.0, 0.0, 0.0, 0.0)), Classification::Degenerate);
    }
}
