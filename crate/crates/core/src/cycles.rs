//! Limit cycles through a Poincare return map, and Hopf points through
//! equilibrium continuation.

use serde::{Deserialize, Serialize};

use crate::algebra2::Vec2;
use crate::error::{Error, Result};
use crate::integrator::{Dopri5, IntegratorOptions};
use crate::phase2d::{find_equilibria_2d, newton_2d, Model2D, System, Termination, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleOptions {
    /// Start of the first probe; defaults to the equilibrium shifted by 10%
    /// of the domain width along `+x`.
    pub probe: Option<Vec2>,
    pub transient_time: f64,
    pub transient_returns: usize,
    pub max_time: f64,
    pub max_returns: usize,
    /// Agreement required between the two probes.
    pub two_sided_rtol: f64,
    pub search_unstable: bool,
    pub integrator: IntegratorOptions,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions {
            probe: None,
            transient_time: 200.0,
            transient_returns: 20,
            max_time: 5000.0,
            max_returns: 2000,
            two_sided_rtol: 1e-3,
            search_unstable: true,
            integrator: IntegratorOptions { rtol: 1e-10, atol: 1e-12, ..Default::default() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStability {
    Stable,
    Unstable,
    Neutral,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleReport {
    pub found: bool,
    pub stability: Option<CycleStability>,
    /// Distance from the equilibrium to the cycle along the section.
    pub radius: Option<f64>,
    pub period: Option<f64>,
    /// Largest distance from the equilibrium along the orbit.
    pub amplitude: Option<f64>,
    /// One period, starting and ending on the section.
    pub orbit: Option<Trajectory>,
    pub reason: Option<String>,
}

impl CycleReport {
    fn negative(stability: Option<CycleStability>, reason: String) -> Self {
        CycleReport {
            found: false,
            stability,
            radius: None,
            period: None,
            amplitude: None,
            orbit: None,
            reason: Some(reason),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stop {
    Settled(f64),
    ToEquilibrium,
    Escaped,
    Budget,
}

fn flow(sys: &System, sign: f64) -> impl Fn(f64, &[f64; 2]) -> Result<[f64; 2]> + Copy + '_ {
    move |_, p| {
        let [f, g] = sys.rhs(*p)?;
        Ok([sign * f, sign * g])
    }
}

/// Integrates along the (possibly reversed) flow and reports crossings of
/// the half-line `{y = y*, x > x*}` in one fixed direction.
struct SectionWalker<'a> {
    sys: &'a System,
    eq: Vec2,
    sign: f64,
    opts: &'a CycleOptions,
    direction: f64,
}

impl<'a> SectionWalker<'a> {
    fn new(sys: &'a System, eq: Vec2, backward: bool, opts: &'a CycleOptions) -> Self {
        SectionWalker { sys, eq, sign: if backward { -1.0 } else { 1.0 }, opts, direction: 0.0 }
    }

    /// Walks from `start`, calling `on_cross(t, point)` at each section
    /// crossing until it returns `Some`. Accepted states are appended to
    /// `record` when given.
    fn walk(
        &mut self,
        start: Vec2,
        opts: IntegratorOptions,
        mut record: Option<&mut Vec<[f64; 3]>>,
        mut on_cross: impl FnMut(f64, Vec2) -> Option<Stop>,
    ) -> Result<(Stop, usize, usize)> {
        let rhs = flow(self.sys, self.sign);
        let ys = self.eq[1];
        let diag = self.sys.domain.diagonal();
        let mut stepper = Dopri5::new(rhs, 0.0, start, opts)?;
        if let Some(r) = record.as_deref_mut() {
            r.push([0.0, start[0], start[1]]);
        }
        loop {
            if stepper.t() >= self.opts.max_time {
                return Ok((Stop::Budget, stepper.accepted, stepper.rejected));
            }
            let (t0, y0) = (stepper.t(), stepper.y());
            stepper.step(self.opts.max_time)?;
            let y1 = stepper.y();
            if !y1[0].is_finite() || !y1[1].is_finite() || !self.sys.domain.contains(y1) {
                return Ok((Stop::Escaped, stepper.accepted, stepper.rejected));
            }
            if (y1[0] - self.eq[0]).hypot(y1[1] - self.eq[1]) <= 1e-9 * diag {
                return Ok((Stop::ToEquilibrium, stepper.accepted, stepper.rejected));
            }
            let (s0, s1) = (y0[1] - ys, y1[1] - ys);
            let crossing = (s0 < 0.0 && s1 >= 0.0) || (s0 > 0.0 && s1 <= 0.0);
            let mut hit = None;
            if crossing {
                let dir = if s1 > s0 { 1.0 } else { -1.0 };
                // refine the crossing time inside the step
                let mut probe = Dopri5::new(rhs, t0, y0, opts)?;
                let (mut lo, mut hi) = (0.0, stepper.t() - t0);
                let mut p = y1;
                for _ in 0..60 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    let q = probe.peek(mid)?;
                    if (q[1] - ys) * s0 > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                        p = q;
                    }
                }
                if p[0] > self.eq[0] {
                    if self.direction == 0.0 {
                        self.direction = dir;
                    }
                    if dir == self.direction {
                        hit = Some((t0 + hi, [p[0], ys]));
                    }
                }
            }
            if let (Some(r), Some((tc, pc))) = (record.as_deref_mut(), hit) {
                if tc > r[r.len() - 1][0] {
                    r.push([tc, pc[0], pc[1]]);
                }
            }
            if let Some((tc, pc)) = hit {
                if let Some(stop) = on_cross(tc, pc) {
                    return Ok((stop, stepper.accepted, stepper.rejected));
                }
            }
            if let Some(r) = record.as_deref_mut() {
                if stepper.t() > r[r.len() - 1][0] {
                    r.push([stepper.t(), y1[0], y1[1]]);
                }
            }
        }
    }

    /// Follows return radii until they settle, collapse or run out of budget.
    fn settle(&mut self, start: Vec2) -> Result<(Stop, Vec<f64>)> {
        let floor = 1e-3 * self.sys.domain.diagonal();
        let mut radii: Vec<f64> = Vec::new();
        let opts = *self.opts;
        let eqx = self.eq[0];
        let (stop, _, _) = self.walk(start, opts.integrator, None, |t, p| {
            let r = p[0] - eqx;
            radii.push(r);
            let n = radii.len();
            if t < opts.transient_time && n < opts.transient_returns {
                return None;
            }
            if n >= 4 && (n - 3..n).all(|k| (radii[k] - radii[k - 1]).abs() <= 1e-6 * radii[k]) {
                return Some(if r >= floor { Stop::Settled(r) } else { Stop::ToEquilibrium });
            }
            if r < 1e-2 * floor {
                return Some(Stop::ToEquilibrium);
            }
            (n >= opts.max_returns).then_some(Stop::Budget)
        })?;
        Ok((stop, radii))
    }

    /// One revolution from the section point at radius `r`.
    fn orbit(&mut self, r: f64, period_hint: Option<f64>) -> Result<(Trajectory, f64)> {
        let start = [self.eq[0] + r, self.eq[1]];
        let mut opts = self.opts.integrator;
        if let Some(t) = period_hint {
            opts.max_step = opts.max_step.min(t / 256.0);
        }
        let mut samples = Vec::new();
        let mut end = None;
        let (stop, accepted, rejected) = self.walk(start, opts, Some(&mut samples), |t, _| {
            // skip a crossing at the start point itself
            if t <= 1e-9 {
                return None;
            }
            end = Some(t);
            Some(Stop::Settled(t))
        })?;
        let period = match (stop, end) {
            (Stop::Settled(_), Some(t)) => t,
            _ => return Err(Error::Inconsistent("cycle orbit did not return to the section".into())),
        };
        samples.retain(|s| s[0] <= period);
        let traj = Trajectory {
            samples,
            method: "dopri5".into(),
            accepted,
            rejected,
            backward: self.sign < 0.0,
            termination: Termination::Completed,
        };
        Ok((traj, period))
    }
}

fn describe(stop: Stop) -> &'static str {
    match stop {
        Stop::Settled(_) => "returns settled",
        Stop::ToEquilibrium => "orbit converged to the equilibrium",
        Stop::Escaped => "orbit left the domain",
        Stop::Budget => "return budget exhausted without settling",
    }
}

/// Searches one flow direction; `Ok(Err(reason))` is a negative result.
fn search(
    sys: &System,
    eq: Vec2,
    probe: Vec2,
    backward: bool,
    opts: &CycleOptions,
) -> Result<std::result::Result<CycleReport, (Option<CycleStability>, String)>> {
    let mut walker = SectionWalker::new(sys, eq, backward, opts);
    let (stop, _) = walker.settle(probe)?;
    let Stop::Settled(r1) = stop else {
        return Ok(Err((None, describe(stop).to_string())));
    };
    // second probe on the other side of the candidate
    let d = &sys.domain;
    let outer = [eq[0] + 1.5 * r1, eq[1]];
    let second = if d.contains(outer) { outer } else { [eq[0] + 0.5 * r1, eq[1]] };
    let mut walker2 = SectionWalker::new(sys, eq, backward, opts);
    let (stop2, _) = walker2.settle(second)?;
    match stop2 {
        Stop::Settled(r2) if (r2 - r1).abs() <= opts.two_sided_rtol * r1 => {}
        Stop::Settled(r2) => {
            return Ok(Err((
                Some(CycleStability::Neutral),
                format!("closed orbits at radii {r1} and {r2} do not attract each other (centre-like)"),
            )))
        }
        other => return Ok(Err((None, format!("second probe: {}", describe(other))))),
    }
    let (_, hint) = walker.orbit(r1, None)?;
    let (orbit, period) = walker.orbit(r1, Some(hint))?;
    let amplitude = orbit.samples.iter().fold(0.0f64, |m, s| m.max((s[1] - eq[0]).hypot(s[2] - eq[1])));
    Ok(Ok(CycleReport {
        found: true,
        stability: Some(if backward { CycleStability::Unstable } else { CycleStability::Stable }),
        radius: Some(r1),
        period: Some(period),
        amplitude: Some(amplitude),
        orbit: Some(orbit),
        reason: None,
    }))
}

/// Looks for a limit cycle around the equilibrium `interior_eq`.
pub fn detect_limit_cycle(m: &Model2D, interior_eq: Vec2, opts: &CycleOptions) -> Result<CycleReport> {
    let sys = m.compile()?;
    let [f, g] = sys.rhs(interior_eq)?;
    let residual = f.abs().max(g.abs());
    if residual > 1e-8 * sys.scale() {
        return Err(Error::NotEquilibrium { x: interior_eq[0], y: interior_eq[1], residual });
    }
    let probe = opts.probe.unwrap_or([interior_eq[0] + 0.1 * m.domain.width(), interior_eq[1]]);
    if !m.domain.contains(probe) {
        return Err(Error::InvalidArgument(format!("probe ({}, {}) is outside the domain", probe[0], probe[1])));
    }
    let forward = match search(&sys, interior_eq, probe, false, opts)? {
        Ok(report) => return Ok(report),
        Err(e) => e,
    };
    if forward.0 == Some(CycleStability::Neutral) || !opts.search_unstable {
        return Ok(CycleReport::negative(forward.0, forward.1));
    }
    match search(&sys, interior_eq, probe, true, opts)? {
        Ok(report) => Ok(report),
        Err(backward) => Ok(CycleReport::negative(
            forward.0.or(backward.0),
            format!("forward: {}; reversed time: {}", forward.1, backward.1),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPoint {
    pub param: f64,
    pub location: Vec2,
    pub tr: f64,
    pub det: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Continuation {
    pub param: String,
    pub path: Vec<ContinuationPoint>,
    /// Parameter value at which Newton failed, if it did.
    pub lost_at: Option<f64>,
}

fn point_at(m: &Model2D, param: &str, p: f64, seed: Vec2) -> Result<Option<ContinuationPoint>> {
    let sys = m.with_param(param, p)?.compile()?;
    let Some(loc) = newton_2d(&sys, seed, 1e-10 * sys.scale(), 50) else {
        return Ok(None);
    };
    let j = sys.jacobian(loc)?;
    Ok(Some(ContinuationPoint { param: p, location: loc, tr: j.trace(), det: j.det() }))
}

/// Equilibrium of the starting model to follow: the first non-saddle, or
/// the first of all.
fn starting_equilibrium(m: &Model2D) -> Result<Vec2> {
    let eqs = find_equilibria_2d(m)?;
    let sys = m.compile()?;
    for p in &eqs {
        if sys.jacobian(*p)?.det() > 0.0 {
            return Ok(*p);
        }
    }
    eqs.first().copied().ok_or(Error::NoStartingEquilibrium)
}

/// Follows an equilibrium across `steps` equal parameter increments,
/// seeding each Newton solve with the previous location.
pub fn continue_equilibrium(
    m: &Model2D,
    param: &str,
    range: (f64, f64),
    steps: usize,
    start: Option<Vec2>,
) -> Result<Continuation> {
    if steps < 2 {
        return Err(Error::InvalidArgument("a scan needs at least 2 steps".into()));
    }
    let m0 = m.with_param(param, range.0)?;
    let mut seed = match start {
        Some(p) => p,
        None => starting_equilibrium(&m0)?,
    };
    let mut path = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let p = if i == steps { range.1 } else { range.0 + (range.1 - range.0) * i as f64 / steps as f64 };
        match point_at(m, param, p, seed)? {
            Some(pt) => {
                seed = pt.location;
                path.push(pt);
            }
            None => return Ok(Continuation { param: param.to_string(), path, lost_at: Some(p) }),
        }
    }
    Ok(Continuation { param: param.to_string(), path, lost_at: None })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HopfResult {
    pub critical: f64,
    pub det: f64,
    pub location: Vec2,
    pub bracket: (f64, f64),
    pub path: Vec<ContinuationPoint>,
}

/// Finds the first parameter where `tr J` changes sign with `det J > 0`.
pub fn hopf_scan(m: &Model2D, param: &str, range: (f64, f64), steps: usize) -> Result<Option<HopfResult>> {
    let cont = continue_equilibrium(m, param, range, steps, None)?;
    if let Some(value) = cont.lost_at {
        let last_good = cont.path.last().map_or(range.0, |p| p.param);
        return Err(Error::ContinuationLost { param: param.to_string(), value, last_good });
    }
    hopf_from_path(m, param, range, cont.path)
}

/// Bisection stage of [`hopf_scan`] on an existing continuation path.
pub fn hopf_from_path(
    m: &Model2D,
    param: &str,
    range: (f64, f64),
    path: Vec<ContinuationPoint>,
) -> Result<Option<HopfResult>> {
    let width = (range.1 - range.0).abs();
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        if !(a.det > 0.0 && b.det > 0.0) || (a.tr < 0.0) == (b.tr < 0.0) {
            continue;
        }
        let (mut lo, mut hi) = (a, b);
        while (hi.param - lo.param).abs() > 1e-8 * width {
            let mid = 0.5 * (lo.param + hi.param);
            let Some(pt) = point_at(m, param, mid, lo.location)? else {
                return Err(Error::ContinuationLost { param: param.to_string(), value: mid, last_good: lo.param });
            };
            if (pt.tr < 0.0) == (lo.tr < 0.0) {
                lo = pt;
            } else {
                hi = pt;
            }
        }
        let critical = 0.5 * (lo.param + hi.param);
        let at = point_at(m, param, critical, lo.location)?.unwrap_or(lo);
        return Ok(Some(HopfResult {
            critical,
            det: at.det,
            location: at.location,
            bracket: (a.param, b.param),
            path,
        }));
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, Binding};
    use crate::phase2d::Domain;

    fn brusselator(b: f64) -> Model2D {
        Model2D::new(
            parse("a-(b+1)*x+x^2*y").unwrap(),
            parse("b*x-x^2*y").unwrap(),
            ("x", "y"),
            Binding::new().with("a", 1.0).with("b", b),
            Domain::new((0.0, 4.0), (0.0, 6.0)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn brusselator_hopf() {
        let r = hopf_scan(&brusselator(1.5), "b", (1.5, 2.5), 100).unwrap().unwrap();
        assert!((r.critical - 2.0).abs() < 1e-6, "{}", r.critical);
        assert!((r.det - 1.0).abs() < 1e-6);
    }

    #[test]
    fn brusselator_cycle_on_one_side_only() {
        let opts = CycleOptions::default();
        let r = detect_limit_cycle(&brusselator(2.5), [1.0, 2.5], &opts).unwrap();
        assert!(r.found, "{:?}", r.reason);
        assert_eq!(r.stability, Some(CycleStability::Stable));
        let orbit = r.orbit.unwrap();
        let (first, last) = (orbit.samples[0], orbit.samples[orbit.samples.len() - 1]);
        let amp = r.amplitude.unwrap();
        assert!((first[1] - last[1]).hypot(first[2] - last[2]) <= 1e-5 * amp);

        let r = detect_limit_cycle(&brusselator(1.5), [1.0, 1.5], &opts).unwrap();
        assert!(!r.found);
    }

    #[test]
    fn centre_is_neutral() {
        let m = Model2D::new(
            parse("2*y").unwrap(),
            parse("-2*x").unwrap(),
            ("x", "y"),
            Binding::new(),
            Domain::new((-2.0, 2.0), (-2.0, 2.0)).unwrap(),
        )
        .unwrap();
        let r = detect_limit_cycle(&m, [0.0, 0.0], &CycleOptions::default()).unwrap();
        assert!(!r.found);
        assert_eq!(r.stability, Some(CycleStability::Neutral));
    }

    #[test]
    fn unstable_cycle_by_time_reversal() {
        // reversed Brusselator: the stable cycle becomes unstable
        let m = Model2D::new(
            parse("-(a-(b+1)*x+x^2*y)").unwrap(),
            parse("-(b*x-x^2*y)").unwrap(),
            ("x", "y"),
            Binding::new().with("a", 1.0).with("b", 2.5),
            Domain::new((0.0, 4.0), (0.0, 6.0)).unwrap(),
        )
        .unwrap();
        let r = detect_limit_cycle(&m, [1.0, 2.5], &CycleOptions::default()).unwrap();
        assert!(r.found, "{:?}", r.reason);
        assert_eq!(r.stability, Some(CycleStability::Unstable));
    }

    #[test]
    fn constant_trace_has_no_hopf() {
        let m = Model2D::new(
            parse("-x").unwrap(),
            parse("-2*y+c").unwrap(),
            ("x", "y"),
            Binding::new().with("c", 0.0),
            Domain::new((-1.0, 1.0), (-1.0, 1.0)).unwrap(),
        )
        .unwrap();
        assert!(hopf_scan(&m, "c", (0.0, 1.0), 10).unwrap().is_none());
    }

    #[test]
    fn lost_continuation() {
        // the equilibrium y = c leaves the domain at c = 1
        let m = Model2D::new(
            parse("-x").unwrap(),
            parse("c-y").unwrap(),
            ("x", "y"),
            Binding::new().with("c", 0.0),
            Domain::new((-1.0, 1.0), (-1.0, 1.0)).unwrap(),
        )
        .unwrap();
        let e = hopf_scan(&m, "c", (0.0, 2.0), 10).unwrap_err();
        assert!(matches!(e, Error::ContinuationLost { last_good, .. } if (last_good - 1.0).abs() < 1e-12));
    }
}
