//! Sign-only ("graphical") Jacobian and what it implies about an
//! equilibrium.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::Model2D;
use crate::algebra2::Vec2;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Neg,
    Zero,
    Pos,
    Unknown,
}

impl Sign {
    pub fn of(v: f64, zero_tol: f64) -> Sign {
        if v.is_nan() {
            Sign::Unknown
        } else if v.abs() <= zero_tol {
            Sign::Zero
        } else if v > 0.0 {
            Sign::Pos
        } else {
            Sign::Neg
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Neg => '-',
            Sign::Zero => '0',
            Sign::Pos => '+',
            Sign::Unknown => '?',
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

impl Neg for Sign {
    type Output = Sign;
    fn neg(self) -> Sign {
        match self {
            Sign::Neg => Sign::Pos,
            Sign::Pos => Sign::Neg,
            s => s,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        use Sign::*;
        match (self, rhs) {
            (Zero, _) | (_, Zero) => Zero,
            (Unknown, _) | (_, Unknown) => Unknown,
            (a, b) if a == b => Pos,
            _ => Neg,
        }
    }
}

impl Add for Sign {
    type Output = Sign;
    fn add(self, rhs: Sign) -> Sign {
        use Sign::*;
        match (self, rhs) {
            (Zero, s) | (s, Zero) => s,
            (a, b) if a == b => a,
            _ => Unknown,
        }
    }
}

impl Sub for Sign {
    type Output = Sign;
    fn sub(self, rhs: Sign) -> Sign {
        self + -rhs
    }
}

/// Signs of `[df/dx, df/dy; dg/dx, dg/dy]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignMat2(pub [[Sign; 2]; 2]);

impl SignMat2 {
    pub fn det(&self) -> Sign {
        let [[a, b], [c, d]] = self.0;
        a * d - b * c
    }

    pub fn trace(&self) -> Sign {
        self.0[0][0] + self.0[1][1]
    }
}

impl fmt::Display for SignMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.0;
        write!(f, "[[{a} {b}] [{c} {d}]]")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartialClass {
    Saddle,
    StableNode,
    UnstableNode,
    StableNodeOrSpiral,
    UnstableNodeOrSpiral,
    Center,
    /// Unstable for sure, but saddle, unstable node and unstable spiral are
    /// all possible.
    UnstableUnknown,
    Indeterminate,
}

/// What the sign pattern alone determines.
///
/// With `det > 0` the discriminant is `(s11 - s22)^2 + 4 s12 s21`, so a
/// non-negative off-diagonal product forces a node.
pub fn classify_from_signs(s: &SignMat2) -> PartialClass {
    let det = s.det();
    let tr = s.trace();
    let off = s.0[0][1] * s.0[1][0];
    let node = matches!(off, Sign::Pos | Sign::Zero);
    match (det, tr) {
        (Sign::Neg, _) => PartialClass::Saddle,
        (Sign::Pos, Sign::Neg) if node => PartialClass::StableNode,
        (Sign::Pos, Sign::Neg) => PartialClass::StableNodeOrSpiral,
        (Sign::Pos, Sign::Pos) if node => PartialClass::UnstableNode,
        (Sign::Pos, Sign::Pos) => PartialClass::UnstableNodeOrSpiral,
        (Sign::Pos, Sign::Zero) => PartialClass::Center,
        (Sign::Unknown, Sign::Pos) => PartialClass::UnstableUnknown,
        _ => PartialClass::Indeterminate,
    }
}

/// Reads the Jacobian signs from the field at `(x* + h, y*)` and
/// `(x*, y* + h)`: since `f(x*, y*) = 0`, `df/dx` has the sign of
/// `f(x* + h, y*)`, and so on.
pub fn derive_sign_matrix(m: &Model2D, eq: Vec2, h: f64) -> Result<SignMat2> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("probe offset must be positive, got {h}")));
    }
    let sys = m.compile()?;
    let probes: [(&'static str, Vec2); 2] = [("x+h", [eq[0] + h, eq[1]]), ("y+h", [eq[0], eq[1] + h])];
    let mut values = [[[0.0; 2]; 8]; 2];
    for (k, (name, probe)) in probes.iter().enumerate() {
        if !m.domain.contains(*probe) {
            return Err(Error::ProbeOutsideDomain { probe: name });
        }
        for (s, slot) in values[k].iter_mut().enumerate() {
            let t = (s + 1) as f64 / 8.0;
            *slot = sys.rhs([eq[0] + t * (probe[0] - eq[0]), eq[1] + t * (probe[1] - eq[1])])?;
        }
    }
    let scale = values.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let zero = 1e-9 * scale;
    for (k, (name, _)) in probes.iter().enumerate() {
        for comp in 0..2 {
            let signs: Vec<Sign> = values[k].iter().map(|v| Sign::of(v[comp], zero)).collect();
            let has_pos = signs.contains(&Sign::Pos);
            let has_neg = signs.contains(&Sign::Neg);
            if has_pos && has_neg {
                return Err(Error::ProbeCrossesNullcline { probe: name, h });
            }
        }
    }
    let [px, py] = [values[0][7], values[1][7]];
    Ok(SignMat2([[Sign::of(px[0], zero), Sign::of(py[0], zero)], [Sign::of(px[1], zero), Sign::of(py[1], zero)]]))
}

#[cfg(test)]
mod tests {
    use super::super::tests::ppour;
    use super::*;
    use Sign::*;

    #[test]
    fn sign_algebra() {
        assert_eq!(Pos * Neg, Neg);
        assert_eq!(Neg * Neg, Pos);
        assert_eq!(Zero * Unknown, Zero);
        assert_eq!(Pos + Neg, Unknown);
        assert_eq!(Pos - Neg, Pos);
        assert_eq!(Zero + Neg, Neg);
    }

    #[test]
    fn worked_patterns() {
        let c = |m| classify_from_signs(&SignMat2(m));
        assert_eq!(c([[Neg, Neg], [Pos, Neg]]), PartialClass::StableNodeOrSpiral);
        assert_eq!(c([[Neg, Zero], [Zero, Neg]]), PartialClass::StableNode);
        assert_eq!(c([[Pos, Pos], [Neg, Neg]]), PartialClass::Indeterminate);
        assert_eq!(c([[Pos, Zero], [Zero, Neg]]), PartialClass::Saddle);
        assert_eq!(c([[Pos, Pos], [Pos, Neg]]), PartialClass::Saddle);
        assert_eq!(c([[Pos, Pos], [Neg, Pos]]), PartialClass::UnstableNodeOrSpiral);
        assert_eq!(c([[Pos, Pos], [Pos, Pos]]), PartialClass::UnstableUnknown);
        assert_eq!(c([[Zero, Pos], [Neg, Zero]]), PartialClass::Center);
    }

    #[test]
    fn ppour_patterns() {
        let m = ppour();
        let s = |p| derive_sign_matrix(&m, p, 0.05).unwrap();
        assert_eq!(s([0.5, 1.0]), SignMat2([[Neg, Neg], [Pos, Zero]]));
        assert_eq!(s([0.0, 0.0]), SignMat2([[Pos, Zero], [Zero, Neg]]));
        assert_eq!(s([1.0, 0.0]), SignMat2([[Neg, Neg], [Zero, Pos]]));
    }

    #[test]
    fn probe_errors() {
        let m = ppour();
        assert!(matches!(derive_sign_matrix(&m, [1.0, 0.0], 1.5), Err(Error::ProbeOutsideDomain { .. })));
        // along y = 0 the rate f = 3x(1 - x) changes sign at x = 1
        assert!(matches!(derive_sign_matrix(&m, [0.0, 0.0], 1.5), Err(Error::ProbeCrossesNullcline { .. })));
    }
}
