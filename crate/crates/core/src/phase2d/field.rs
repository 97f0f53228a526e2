use serde::{Deserialize, Serialize};

use super::{Model2D, Sign, System};
use crate::algebra2::Vec2;
use crate::error::{Error, Result};
use crate::integrator::{Dopri5, IntegratorOptions};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub point: Vec2,
    pub f: f64,
    pub g: f64,
    /// Horizontal and vertical flow directions.
    pub case: (Sign, Sign),
}

impl FieldSample {
    /// `"left-up"`, `"right"`, ... or `"none"` at a rest point.
    pub fn case_label(&self) -> String {
        let h = match self.case.0 {
            Sign::Pos => "right",
            Sign::Neg => "left",
            _ => "",
        };
        let v = match self.case.1 {
            Sign::Pos => "up",
            Sign::Neg => "down",
            _ => "",
        };
        match (h.is_empty(), v.is_empty()) {
            (true, true) => "none".into(),
            (false, false) => format!("{h}-{v}"),
            _ => format!("{h}{v}"),
        }
    }
}

fn sample(sys: &System, p: Vec2, zero: f64) -> Result<FieldSample> {
    let [f, g] = sys.rhs(p)?;
    Ok(FieldSample { point: p, f, g, case: (Sign::of(f, zero), Sign::of(g, zero)) })
}

pub fn field_at(m: &Model2D, p: Vec2) -> Result<FieldSample> {
    let sys = m.compile()?;
    sample(&sys, p, 1e-12 * sys.scale())
}

/// Field on a `grid x grid` lattice of points covering the domain.
/// Points where the field is undefined are skipped.
pub fn sample_vector_field(m: &Model2D, grid: usize) -> Result<Vec<FieldSample>> {
    if grid < 2 {
        return Err(Error::InvalidArgument(format!("field grid must be at least 2, got {grid}")));
    }
    let sys = m.compile()?;
    let zero = 1e-12 * sys.scale();
    let (xs, ys) = m.domain.lattice(grid - 1);
    let mut out = Vec::with_capacity(grid * grid);
    for &y in &ys {
        for &x in &xs {
            if let Ok(s) = sample(&sys, [x, y], zero) {
                out.push(s);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryOptions {
    pub integrator: IntegratorOptions,
    /// Integrate the time-reversed flow.
    pub backward: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    DomainExit { t: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    /// `(t, x, y)` with `t` strictly increasing; for backward runs `t` is
    /// the elapsed reversed time.
    pub samples: Vec<[f64; 3]>,
    pub method: String,
    pub accepted: usize,
    pub rejected: usize,
    pub backward: bool,
    pub termination: Termination,
}

impl Trajectory {
    pub fn last(&self) -> Vec2 {
        let s = self.samples[self.samples.len() - 1];
        [s[1], s[2]]
    }
}

/// Adaptive integration from `start` until `t_end` or the first exit from
/// the domain. The exit point is located on the boundary by bisection on
/// the step length.
pub fn integrate_trajectory(m: &Model2D, start: Vec2, t_end: f64, opts: TrajectoryOptions) -> Result<Trajectory> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("t_end must be positive, got {t_end}")));
    }
    if !m.domain.contains(start) {
        return Err(Error::InvalidArgument(format!("start ({}, {}) is outside the domain", start[0], start[1])));
    }
    let sys = m.compile()?;
    let sign = if opts.backward { -1.0 } else { 1.0 };
    let rhs = |_: f64, p: &[f64; 2]| -> Result<[f64; 2]> {
        let [f, g] = sys.rhs(*p)?;
        Ok([sign * f, sign * g])
    };
    let mut stepper = Dopri5::new(rhs, 0.0, start, opts.integrator)?;
    let mut samples = vec![[0.0, start[0], start[1]]];
    let mut termination = Termination::Completed;
    while stepper.t() < t_end {
        if stepper.accepted >= opts.integrator.max_steps {
            return Err(Error::InvalidArgument(format!("step budget {} exhausted", opts.integrator.max_steps)));
        }
        let (t0, y0) = (stepper.t(), stepper.y());
        stepper.step(t_end)?;
        let y1 = stepper.y();
        if m.domain.contains(y1) {
            samples.push([stepper.t(), y1[0], y1[1]]);
            continue;
        }
        // locate the boundary crossing inside the last step
        let mut probe = Dopri5::new(rhs, t0, y0, opts.integrator)?;
        let (mut lo, mut hi) = (0.0, stepper.t() - t0);
        let mut exit = y1;
        for _ in 0..50 {
            let mid = 0.5 * (lo + hi);
            let p = probe.peek(mid)?;
            if m.domain.contains(p) {
                lo = mid;
            } else {
                hi = mid;
                exit = p;
            }
        }
        let t_exit = t0 + hi;
        if t_exit > samples[samples.len() - 1][0] {
            samples.push([t_exit, exit[0], exit[1]]);
        }
        termination = Termination::DomainExit { t: t_exit };
        break;
    }
    Ok(Trajectory {
        samples,
        method: "dopri5".into(),
        accepted: stepper.accepted,
        rejected: stepper.rejected,
        backward: opts.backward,
        termination,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::ppour;
    use super::super::Domain;
    use super::*;
    use crate::expr::{parse, Binding};
    use crate::linsys::solve_ivp;
    use crate::Mat2;

    fn linear(a: f64, b: f64, c: f64, d: f64, half: f64) -> Model2D {
        Model2D::new(
            parse(&format!("{a}*x+{b}*y")).unwrap(),
            parse(&format!("{c}*x+{d}*y")).unwrap(),
            ("x", "y"),
            Binding::new(),
            Domain::new((-half, half), (-half, half)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn ppour_samples() {
        let m = ppour();
        let s = field_at(&m, [2.0, 2.0]).unwrap();
        assert_eq!((s.f, s.g), (-12.0, 1.5));
        assert_eq!(s.case_label(), "left-up");
        let s = field_at(&m, [1.0, 1.0]).unwrap();
        assert_eq!((s.f, s.g), (-1.5, 0.25));
        assert_eq!(field_at(&m, [0.5, 1.0]).unwrap().case_label(), "none");
        assert_eq!(sample_vector_field(&m, 5).unwrap().len(), 25);
    }

    #[test]
    fn matches_closed_form() {
        let m = linear(1.0, 4.0, 1.0, 1.0, 1e6);
        let ivp = solve_ivp(&Mat2::new(1.0, 4.0, 1.0, 1.0), [4.0, 6.0]).unwrap();
        for t in [0.25, 0.5, 1.0] {
            let got = integrate_trajectory(&m, [4.0, 6.0], t, TrajectoryOptions::default()).unwrap().last();
            let want = ivp.eval(t).unwrap();
            assert!((got[0] - want[0]).abs() <= 1e-6 * want[0].abs());
            assert!((got[1] - want[1]).abs() <= 1e-6 * want[1].abs());
        }
    }

    #[test]
    fn circle_conserved() {
        let m = Model2D::new(
            parse("2*y").unwrap(),
            parse("-2*x").unwrap(),
            ("x", "y"),
            Binding::new(),
            Domain::new((-2.0, 2.0), (-2.0, 2.0)).unwrap(),
        )
        .unwrap();
        let tr = integrate_trajectory(&m, [1.5, 0.0], 10.0, TrajectoryOptions::default()).unwrap();
        assert_eq!(tr.termination, Termination::Completed);
        for s in &tr.samples {
            assert!(((s[1] * s[1] + s[2] * s[2]) / 2.25 - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn domain_exit_on_boundary() {
        let m = linear(1.0, 0.0, 0.0, 1.0, 1.0);
        let tr = integrate_trajectory(&m, [0.5, 0.0], 10.0, TrajectoryOptions::default()).unwrap();
        let Termination::DomainExit { t } = tr.termination else { panic!() };
        assert!((t - 2f64.ln()).abs() < 1e-6);
        assert!(tr.samples.windows(2).all(|w| w[1][0] > w[0][0]));
    }

    #[test]
    fn rest_point_stays() {
        let tr = integrate_trajectory(&ppour(), [0.5, 1.0], 50.0, TrajectoryOptions::default()).unwrap();
        assert!(tr.samples.iter().all(|s| (s[1] - 0.5).abs() < 1e-8 && (s[2] - 1.0).abs() < 1e-8));
    }

    #[test]
    fn backward_runs_reverse_the_flow() {
        let m = linear(-1.0, 0.0, 0.0, -1.0, 10.0);
        let opts = TrajectoryOptions { backward: true, ..Default::default() };
        let tr = integrate_trajectory(&m, [1.0, 1.0], 1.0, opts).unwrap();
        assert!((tr.last()[0] - 1f64.exp()).abs() < 1e-7);
    }
}
