//! Explicit adaptive Runge-Kutta integration (Dormand-Prince 5(4), FSAL).

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step, which also bounds the spacing of recorded
    /// samples.
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions { rtol: 1e-8, atol: 1e-10, max_step: f64::INFINITY, max_steps: 1_000_000 }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (coef, k) in terms {
        for i in 0..N {
            out[i] += h * coef * k[i];
        }
    }
    out
}

struct Trial<const N: usize> {
    y: [f64; N],
    k7: [f64; N],
    err: [f64; N],
}

fn trial_step<const N: usize, F>(rhs: &mut F, t: f64, y: &[f64; N], k1: &[f64; N], h: f64) -> Result<Trial<N>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let k2 = rhs(t + C2 * h, &axpy(y, h, &[(A21, k1)]))?;
    let k3 = rhs(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = rhs(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = rhs(t + C5 * h, &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = rhs(t + h, &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = rhs(t + h, &y_new)?;
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    Ok(Trial { y: y_new, k7, err })
}

/// Adaptive stepper holding the current state.
pub struct Dopri5<F, const N: usize> {
    rhs: F,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    opts: IntegratorOptions,
    pub accepted: usize,
    pub rejected: usize,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    pub fn new(mut rhs: F, t0: f64, y0: [f64; N], opts: IntegratorOptions) -> Result<Self> {
        let k1 = rhs(t0, &y0)?;
        let norm = |v: &[f64; N]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let (d0, d1) = (norm(&y0), norm(&k1));
        let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-4 } else { 0.01 * d0 / d1 };
        h = h.min(opts.max_step);
        Ok(Dopri5 { rhs, t: t0, y: y0, k1, h, opts, accepted: 0, rejected: 0 })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    pub fn derivative(&self) -> [f64; N] {
        self.k1
    }

    /// Takes one accepted step, never past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<()> {
        let mut attempts = 0usize;
        loop {
            let remaining = t_limit - self.t;
            if remaining <= 0.0 {
                return Ok(());
            }
            let mut h = self.h.min(self.opts.max_step);
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let trial = trial_step(&mut self.rhs, self.t, &self.y, &self.k1, h)?;
            let mut sum = 0.0;
            for i in 0..N {
                let sc = self.opts.atol + self.opts.rtol * self.y[i].abs().max(trial.y[i].abs());
                sum += (trial.err[i] / sc).powi(2);
            }
            let err = (sum / N as f64).sqrt();
            if !err.is_finite() {
                self.h = h * 0.1;
                self.rejected += 1;
                continue;
            }
            let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            if err <= 1.0 {
                self.t = if last { t_limit } else { self.t + h };
                self.y = trial.y;
                self.k1 = trial.k7;
                self.accepted += 1;
                // keep the controller's proposal when the step was clipped
                self.h = if last { self.h.max(h * factor) } else { h * factor };
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
            attempts += 1;
            if attempts > 10_000 {
                return Err(Error::StepUnderflow { t: self.t });
            }
        }
    }

    /// State after a single fixed step of length `h` from the current point,
    /// without adaptivity or changing the stepper.
    pub fn peek(&mut self, h: f64) -> Result<[f64; N]> {
        let (t, y, k1) = (self.t, self.y, self.k1);
        Ok(trial_step(&mut self.rhs, t, &y, &k1, h)?.y)
    }

    pub fn options(&self) -> &IntegratorOptions {
        &self.opts
    }
}

/// Integrates to `t_end`, returning the states at every accepted step
/// (including the start).
pub fn integrate<const N: usize, F>(
    rhs: F,
    y0: [f64; N],
    t_end: f64,
    opts: IntegratorOptions,
) -> Result<Vec<(f64, [f64; N])>>
where
    F: FnMut(f64, &[f64; N]) -> Result<[f64; N]>,
{
    let mut stepper = Dopri5::new(rhs, 0.0, y0, opts)?;
    let mut out = vec![(0.0, y0)];
    while stepper.t() < t_end {
        if stepper.accepted >= opts.max_steps {
            return Err(Error::InvalidArgument(format!("step budget {} exhausted", opts.max_steps)));
        }
        stepper.step(t_end)?;
        out.push((stepper.t(), stepper.y()));
    }
    Ok(out)
}
