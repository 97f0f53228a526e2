//! Qualitative analysis of autonomous ODE systems in one and two dimensions.
//!
//! The crate follows the classical workflow for `dx/dt = f(x)` and
//! `dx/dt = f(x, y), dy/dt = g(x, y)`:
//!
//! * locate equilibria and linearize through the Jacobian,
//! * classify them with the determinant-trace table or from the signs of
//!   the Jacobian entries alone,
//! * extract null-clines and sample the vector field,
//! * solve constant-coefficient linear systems in closed form,
//! * integrate trajectories, detect limit cycles and locate fold and Hopf
//!   bifurcations under parameter continuation.
//!
//! Right-hand sides are plain text expressions (see [`expr`]), so models can
//! be loaded from files (see [`corpus`]).

pub mod algebra2;
pub mod corpus;
pub mod cycles;
pub mod error;
pub mod expr;
pub mod integrator;
pub mod linsys;
pub mod phase1d;
pub mod phase2d;

pub use algebra2::{Complex, EigenSystem, EigenVectors, Mat2, RootPair};
pub use error::{Error, Result};
pub use expr::{Binding, Expr, ExprError};
pub use linsys::Classification;
