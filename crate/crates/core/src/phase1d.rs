//! One-dimensional autonomous equations `dx/dt = f(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::{Binding, Compiled, Expr};
use crate::integrator::{integrate, IntegratorOptions};

const GRID: usize = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Model1D {
    pub f: Expr,
    pub var: String,
    pub params: Binding,
    pub lo: f64,
    pub hi: f64,
}

impl Model1D {
    pub fn new(f: Expr, var: &str, params: Binding, interval: (f64, f64)) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidArgument(format!("interval [{lo}, {hi}] is empty")));
        }
        for id in f.identifiers() {
            if id != var && !params.contains(&id) {
                return Err(Error::UndeclaredIdentifier(id));
            }
        }
        Ok(Model1D { f, var: var.to_string(), params, lo, hi })
    }

    /// Copy with one parameter rebound.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self> {
        if !self.params.contains(name) {
            return Err(Error::UnknownParameter(name.to_string()));
        }
        let mut m = self.clone();
        m.params.set(name, value);
        Ok(m)
    }

    pub fn compile(&self) -> Result<Flow1D> {
        let slots = [self.var.as_str()];
        Ok(Flow1D {
            f: self.f.compile(&slots, &self.params)?,
            df: self.f.differentiate(&self.var).compile(&slots, &self.params)?,
            lo: self.lo,
            hi: self.hi,
        })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Compiled right-hand side and its derivative.
#[derive(Debug, Clone)]
pub struct Flow1D {
    f: Compiled,
    df: Compiled,
    lo: f64,
    hi: f64,
}

impl Flow1D {
    pub fn f(&self, x: f64) -> Result<f64> {
        self.f.eval(&[x]).map_err(|e| Error::eval_at(x, None, e))
    }

    pub fn df(&self, x: f64) -> Result<f64> {
        self.df.eval(&[x]).map_err(|e| Error::eval_at(x, None, e))
    }

    fn grid(&self, n: usize) -> Vec<f64> {
        let w = self.hi - self.lo;
        (0..=n).map(|i| if i == n { self.hi } else { self.lo + w * i as f64 / n as f64 }).collect()
    }

    /// `max(1, max |f|)` over the default grid.
    pub fn scale(&self) -> Result<f64> {
        let mut s = 1.0f64;
        for x in self.grid(GRID) {
            s = s.max(self.f(x)?.abs());
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Stable,
    Unstable,
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium1D {
    pub x: f64,
    pub stability: Stability,
    pub slope: f64,
}

fn opposite(a: f64, b: f64) -> bool {
    (a < 0.0 && b > 0.0) || (a > 0.0 && b < 0.0)
}

/// Bisection on a strict sign change, then one Newton check.
fn bisect(mut g: impl FnMut(f64) -> Result<f64>, mut a: f64, mut b: f64, mut ga: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m)?;
        if gm == 0.0 {
            return Ok(m);
        }
        if opposite(ga, gm) {
            b = m;
        } else {
            a = m;
            ga = gm;
        }
    }
    Ok(if g(a)?.abs() <= g(b)?.abs() { a } else { b })
}

fn newton_polish(flow: &Flow1D, mut x: f64, lo: f64, hi: f64) -> Result<f64> {
    for _ in 0..8 {
        let fx = flow.f(x)?;
        let d = flow.df(x)?;
        if fx == 0.0 || d == 0.0 || !d.is_finite() {
            break;
        }
        let next = x - fx / d;
        if !(next >= lo && next <= hi) || flow.f(next)?.abs() >= fx.abs() {
            break;
        }
        x = next;
    }
    Ok(x)
}

struct Scan {
    roots: Vec<f64>,
    adjacent_changes: bool,
}

fn scan(flow: &Flow1D, n: usize, ztol: f64) -> Result<Scan> {
    let xs = flow.grid(n);
    let fs = xs.iter().map(|&x| flow.f(x)).collect::<Result<Vec<_>>>()?;
    let mut roots = Vec::new();
    let mut prev_change = false;
    let mut adjacent_changes = false;
    for (i, &x) in xs.iter().enumerate() {
        if fs[i].abs() <= ztol {
            roots.push(newton_polish(flow, x, flow.lo, flow.hi)?);
        }
        if i == n {
            break;
        }
        let (a, b, fa, fb) = (x, xs[i + 1], fs[i], fs[i + 1]);
        let change = opposite(fa, fb);
        adjacent_changes |= change && prev_change;
        prev_change = change;
        if change {
            roots.push(bisect(|t| flow.f(t), a, b, fa)?);
            continue;
        }
        if fa.abs() <= ztol || fb.abs() <= ztol {
            continue;
        }
        // no sign change: look for an extremum of f that touches or dips
        // across the axis inside the cell
        let (da, db) = (flow.df(a)?, flow.df(b)?);
        if !opposite(da, db) {
            continue;
        }
        let xe = bisect(|t| flow.df(t), a, b, da)?;
        let fe = flow.f(xe)?;
        if opposite(fe, fa) {
            roots.push(bisect(|t| flow.f(t), a, xe, fa)?);
            roots.push(bisect(|t| flow.f(t), xe, b, fe)?);
        } else if fe.abs() <= ztol {
            roots.push(xe);
        }
    }
    Ok(Scan { roots, adjacent_changes })
}

/// All equilibria in `[lo, hi]`, sorted, classified.
pub fn find_equilibria_1d(m: &Model1D) -> Result<Vec<Equilibrium1D>> {
    let flow = m.compile()?;
    let scale = flow.scale()?;
    let ztol = 1e-10 * scale;
    let mut s = scan(&flow, GRID, ztol)?;
    if s.adjacent_changes {
        s = scan(&flow, 4 * GRID, ztol)?;
    }
    let mut roots: Vec<f64> = Vec::new();
    for r in s.roots {
        if flow.f(r)?.abs() > ztol {
            // a sign change across a pole, not a root
            continue;
        }
        roots.push(r);
    }
    roots.sort_by(f64::total_cmp);
    let merge = 1e-8 * m.width();
    let mut merged: Vec<f64> = Vec::new();
    for r in roots {
        match merged.last() {
            Some(&last) if r - last <= merge => {}
            _ => merged.push(r),
        }
    }
    merged
        .into_iter()
        .map(|x| Ok(Equilibrium1D { x, stability: classify_with(&flow, m, x, scale)?, slope: flow.df(x)? }))
        .collect()
}

fn classify_with(flow: &Flow1D, m: &Model1D, x: f64, scale: f64) -> Result<Stability> {
    let slope = flow.df(x)?;
    let tol = 1e-9 * scale;
    if slope < -tol {
        return Ok(Stability::Stable);
    }
    if slope > tol {
        return Ok(Stability::Unstable);
    }
    let h = 1e-4 * m.width();
    let (left, right) = (flow.f(x - h)?, flow.f(x + h)?);
    Ok(if left > 0.0 && right < 0.0 {
        Stability::Stable
    } else if left < 0.0 && right > 0.0 {
        Stability::Unstable
    } else {
        Stability::Degenerate
    })
}

/// Stability of the equilibrium at `x`: sign of `f'`, or the flow on both
/// sides when `f'` vanishes.
pub fn classify_equilibrium_1d(m: &Model1D, x: f64) -> Result<Stability> {
    let flow = m.compile()?;
    let scale = flow.scale()?;
    classify_with(&flow, m, x, scale)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Right,
    Left,
    Rest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Arrow {
    pub from: f64,
    pub to: f64,
    pub direction: Direction,
}

/// Open interval of initial states that converge to `attractor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Basin {
    pub attractor: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseLine {
    pub interval: (f64, f64),
    pub equilibria: Vec<Equilibrium1D>,
    pub arrows: Vec<Arrow>,
    pub basins: Vec<Basin>,
    /// Segments whose flow leaves through a bound of the interval.
    pub escapes: Vec<Arrow>,
}

pub fn build_phase_line(m: &Model1D) -> Result<PhaseLine> {
    let equilibria = find_equilibria_1d(m)?;
    let flow = m.compile()?;
    let mut cuts = vec![m.lo];
    cuts.extend(equilibria.iter().map(|e| e.x));
    cuts.push(m.hi);
    cuts.dedup();
    let mut arrows = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let v = flow.f(0.5 * (a + b))?;
        let direction = if v > 0.0 {
            Direction::Right
        } else if v < 0.0 {
            Direction::Left
        } else {
            Direction::Rest
        };
        arrows.push(Arrow { from: a, to: b, direction });
    }
    let escapes = arrows
        .iter()
        .filter(|a| {
            (a.from == m.lo && a.direction == Direction::Left) || (a.to == m.hi && a.direction == Direction::Right)
        })
        .copied()
        .collect();

    let mut basins = Vec::new();
    for (i, e) in equilibria.iter().enumerate() {
        if e.stability != Stability::Stable {
            continue;
        }
        let lo = equilibria[..i].iter().rev().find(|o| o.stability == Stability::Unstable).map_or(m.lo, |o| o.x);
        let hi = equilibria[i + 1..].iter().find(|o| o.stability == Stability::Unstable).map_or(m.hi, |o| o.x);
        basins.push(Basin { attractor: e.x, lo, hi });
    }
    Ok(PhaseLine { interval: (m.lo, m.hi), equilibria, arrows, basins, escapes })
}

/// Closed-form solution of `dx/dt = a + b x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AffineSolution1D {
    /// `x(t) = x_inf + amplitude * e^(rate t)`.
    Exponential { x_inf: f64, amplitude: f64, rate: f64 },
    /// `x(t) = x0 + slope * t`, the `b = 0` case.
    Linear { x0: f64, slope: f64 },
}

pub fn affine_solution_1d(a: f64, b: f64, x0: f64) -> AffineSolution1D {
    if b == 0.0 {
        return AffineSolution1D::Linear { x0, slope: a };
    }
    let x_inf = -a / b;
    AffineSolution1D::Exponential { x_inf, amplitude: x0 - x_inf, rate: b }
}

impl AffineSolution1D {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            AffineSolution1D::Exponential { x_inf, amplitude, rate } => x_inf + amplitude * (rate * t).exp(),
            AffineSolution1D::Linear { x0, slope } => x0 + slope * t,
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            AffineSolution1D::Exponential { amplitude, rate, .. } => amplitude * rate * (rate * t).exp(),
            AffineSolution1D::Linear { slope, .. } => slope,
        }
    }

    /// Characteristic time `1/|b|`.
    pub fn tau(&self) -> Option<f64> {
        match *self {
            AffineSolution1D::Exponential { rate, .. } => Some(1.0 / rate.abs()),
            AffineSolution1D::Linear { .. } => None,
        }
    }

    /// First `t >= 0` with `x(t) = target`, if any.
    pub fn time_to_reach(&self, target: f64) -> Option<f64> {
        let t = match *self {
            AffineSolution1D::Exponential { x_inf, amplitude, rate } => {
                let ratio = (target - x_inf) / amplitude;
                if !(ratio > 0.0) {
                    return None;
                }
                ratio.ln() / rate
            }
            AffineSolution1D::Linear { x0, slope } => {
                if slope == 0.0 {
                    return if target == x0 { Some(0.0) } else { None };
                }
                (target - x0) / slope
            }
        };
        (t >= 0.0 && t.is_finite()).then_some(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow1D {
    pub param: f64,
    pub equilibria: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub critical: f64,
    pub bracket: (f64, f64),
    pub count_before: usize,
    pub count_after: usize,
    pub rows: Vec<ScanRow1D>,
}

fn count_at(m: &Model1D, param: &str, p: f64) -> Result<Vec<f64>> {
    Ok(find_equilibria_1d(&m.with_param(param, p)?)?.into_iter().map(|e| e.x).collect())
}

/// Sweeps `param` and bisects on the first change in the number of
/// equilibria. `Ok(None)` when the count never changes.
pub fn fold_scan_1d(m: &Model1D, param: &str, range: (f64, f64), steps: usize) -> Result<Option<FoldResult>> {
    if steps < 2 {
        return Err(Error::InvalidArgument("a scan needs at least 2 steps".into()));
    }
    if !m.params.contains(param) {
        return Err(Error::UnknownParameter(param.to_string()));
    }
    let (p_lo, p_hi) = range;
    let width = p_hi - p_lo;
    let mut rows = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let p = if i == steps { p_hi } else { p_lo + width * i as f64 / steps as f64 };
        let eq = count_at(m, param, p)?;
        rows.push(ScanRow1D { param: p, equilibria: eq });
        let n = rows.len();
        if n < 2 || rows[n - 1].equilibria.len() == rows[n - 2].equilibria.len() {
            continue;
        }
        let before = rows[n - 2].equilibria.len();
        let after = rows[n - 1].equilibria.len();
        let (mut a, mut b) = (rows[n - 2].param, p);
        while (b - a).abs() > 1e-8 * width.abs() {
            let mid = 0.5 * (a + b);
            if count_at(m, param, mid)?.len() == before {
                a = mid;
            } else {
                b = mid;
            }
        }
        return Ok(Some(FoldResult {
            critical: 0.5 * (a + b),
            bracket: (rows[n - 2].param, p),
            count_before: before,
            count_after: after,
            rows,
        }));
    }
    Ok(None)
}

/// Numeric solution from `x0`, sampled at every accepted step.
pub fn integrate_1d(m: &Model1D, x0: f64, t_end: f64, opts: IntegratorOptions) -> Result<Vec<(f64, f64)>> {
    let flow = m.compile()?;
    let path = integrate(|_, v: &[f64; 1]| Ok([flow.f(v[0])?]), [x0], t_end, opts)?;
    Ok(path.into_iter().map(|(t, v)| (t, v[0])).collect())
}
