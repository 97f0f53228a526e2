//! Named models with default parameters, their answer-key expectations,
//! and the plain-text model file format.

mod format;
mod registry;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use format::{parse_model_file, serialize};
pub use registry::{builtin_model, builtin_names, UNAVAILABLE};

use crate::algebra2::{Mat2, Vec2};
use crate::cycles::{detect_limit_cycle, hopf_scan, CycleOptions, CycleStability};
use crate::error::Result;
use crate::linsys::{solve_ivp, Classification};
use crate::phase1d::{find_equilibria_1d, fold_scan_1d, Model1D, Stability};
use crate::phase2d::{classify_equilibrium_2d, derive_sign_matrix, find_equilibria_2d, jacobian_at, Model2D, SignMat2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Ode1,
    Ode2,
}

impl Kind {
    pub fn as_str(self) -> &'static str {
        match self {
            Kind::Ode1 => "ode1",
            Kind::Ode2 => "ode2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    OneD(Model1D),
    TwoD(Model2D),
}

impl Model {
    pub fn kind(&self) -> Kind {
        match self {
            Model::OneD(_) => Kind::Ode1,
            Model::TwoD(_) => Kind::Ode2,
        }
    }

    fn with_params(&self, params: &[(String, f64)]) -> Result<Model> {
        let mut m = self.clone();
        for (name, value) in params {
            m = match m {
                Model::OneD(m) => Model::OneD(m.with_param(name, *value)?),
                Model::TwoD(m) => Model::TwoD(m.with_param(name, *value)?),
            };
        }
        Ok(m)
    }
}

/// Where an expected value comes from: read off a published answer, or
/// computed independently (closed form, other solver).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Published,
    Derived,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Origin::Published => "published",
            Origin::Derived => "derived",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// All equilibria of a 1D model, ascending.
    Roots {
        expected: Vec<f64>,
    },
    /// The stable equilibria of a 1D model, ascending.
    Attractors {
        expected: Vec<f64>,
    },
    Fold {
        param: String,
        range: (f64, f64),
        steps: usize,
        expected: f64,
    },
    /// All equilibria of a 2D model in `(x, y)` order.
    Equilibria {
        expected: Vec<Vec2>,
    },
    ClassAt {
        point: Vec2,
        expected: Classification,
    },
    JacobianAt {
        point: Vec2,
        expected: Mat2,
    },
    SignsAt {
        point: Vec2,
        h: f64,
        expected: SignMat2,
    },
    Hopf {
        param: String,
        range: (f64, f64),
        steps: usize,
        expected: f64,
    },
    Cycle {
        around: Vec2,
        found: bool,
        stability: Option<CycleStability>,
    },
    /// Closed-form solution of a linear model through the origin.
    Ivp {
        init: Vec2,
        samples: Vec<(f64, Vec2)>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expectation {
    pub label: String,
    /// Parameter overrides applied before the check.
    pub params: Vec<(String, f64)>,
    pub check: Check,
    pub tolerance: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub label: String,
    pub origin: Origin,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "ok" } else { "FAILED" };
        write!(f, "{} [{}] {verdict}: {}", self.label, self.origin, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ModelRecord {
    pub name: String,
    pub model: Model,
    pub expectations: Vec<Expectation>,
}

impl ModelRecord {
    pub fn kind(&self) -> Kind {
        self.model.kind()
    }

    pub fn model_1d(&self) -> Option<&Model1D> {
        match &self.model {
            Model::OneD(m) => Some(m),
            Model::TwoD(_) => None,
        }
    }

    pub fn model_2d(&self) -> Option<&Model2D> {
        match &self.model {
            Model::TwoD(m) => Some(m),
            Model::OneD(_) => None,
        }
    }

    pub fn run_expectations(&self) -> Vec<Outcome> {
        self.expectations.iter().map(|e| self.run(e)).collect()
    }

    /// Runs one expectation; library errors count as failures.
    pub fn run(&self, e: &Expectation) -> Outcome {
        let (passed, detail) = match self.model.with_params(&e.params).and_then(|m| evaluate(&m, &e.check, e.tolerance))
        {
            Ok(r) => r,
            Err(err) => (false, format!("error: {err}")),
        };
        Outcome { label: format!("{}/{}", self.name, e.label), origin: e.origin, passed, detail }
    }
}

fn close_lists(got: &[f64], want: &[f64], tol: f64) -> bool {
    got.len() == want.len() && got.iter().zip(want).all(|(g, w)| (g - w).abs() <= tol)
}

fn mismatch(what: &str) -> crate::Error {
    crate::Error::InvalidArgument(format!("check needs a {what} model"))
}

fn evaluate(m: &Model, check: &Check, tol: f64) -> Result<(bool, String)> {
    let one = || match m {
        Model::OneD(m) => Ok(m),
        Model::TwoD(_) => Err(mismatch("1D")),
    };
    let two = || match m {
        Model::TwoD(m) => Ok(m),
        Model::OneD(_) => Err(mismatch("2D")),
    };
    Ok(match check {
        Check::Roots { expected } => {
            let got: Vec<f64> = find_equilibria_1d(one()?)?.iter().map(|e| e.x).collect();
            (close_lists(&got, expected, tol), format!("roots {got:?}, expected {expected:?}"))
        }
        Check::Attractors { expected } => {
            let got: Vec<f64> =
                find_equilibria_1d(one()?)?.iter().filter(|e| e.stability == Stability::Stable).map(|e| e.x).collect();
            (close_lists(&got, expected, tol), format!("attractors {got:?}, expected {expected:?}"))
        }
        Check::Fold { param, range, steps, expected } => match fold_scan_1d(one()?, param, *range, *steps)? {
            Some(r) => {
                ((r.critical - expected).abs() <= tol, format!("{param}* = {}, expected {expected}", r.critical))
            }
            None => (false, format!("no fold in {param} on [{}, {}]", range.0, range.1)),
        },
        Check::Equilibria { expected } => {
            let got = find_equilibria_2d(two()?)?;
            let ok = got.len() == expected.len()
                && got.iter().zip(expected).all(|(g, w)| (g[0] - w[0]).abs() <= tol && (g[1] - w[1]).abs() <= tol);
            (ok, format!("equilibria {got:?}, expected {expected:?}"))
        }
        Check::ClassAt { point, expected } => {
            let got = classify_equilibrium_2d(two()?, *point)?.classification;
            (got == *expected, format!("({}, {}) is {got}, expected {expected}", point[0], point[1]))
        }
        Check::JacobianAt { point, expected } => {
            let got = jacobian_at(two()?, *point)?;
            let (g, w) = (got.rows(), expected.rows());
            let err = (0..4).map(|k| (g[k / 2][k % 2] - w[k / 2][k % 2]).abs()).fold(0.0, f64::max);
            (err <= tol, format!("J = {g:?}, expected {w:?}"))
        }
        Check::SignsAt { point, h, expected } => {
            let got = derive_sign_matrix(two()?, *point, *h)?;
            (got == *expected, format!("signs {got}, expected {expected}"))
        }
        Check::Hopf { param, range, steps, expected } => match hopf_scan(two()?, param, *range, *steps)? {
            Some(r) => {
                ((r.critical - expected).abs() <= tol, format!("{param}* = {}, expected {expected}", r.critical))
            }
            None => (false, format!("no Hopf point in {param} on [{}, {}]", range.0, range.1)),
        },
        Check::Cycle { around, found, stability } => {
            let r = detect_limit_cycle(two()?, *around, &CycleOptions::default())?;
            let ok = r.found == *found && (stability.is_none() || r.stability == *stability);
            (ok, format!("found = {}, stability {:?}; expected found = {found}, {stability:?}", r.found, r.stability))
        }
        Check::Ivp { init, samples } => {
            let m = two()?;
            let ivp = solve_ivp(&jacobian_at(m, [0.0, 0.0])?, *init)?;
            let mut worst = 0.0f64;
            for (t, want) in samples {
                let got = ivp.eval(*t)?;
                worst = worst.max((got[0] - want[0]).abs()).max((got[1] - want[1]).abs());
            }
            (worst <= tol, format!("largest deviation {worst:e}"))
        }
    })
}
