//! Adaptive embedded Runge-Kutta integration with dense output and event
//! location, shared by the planar analysis and the full simulations.
//!
//! The pair is the classic 5(4) scheme with first-same-as-last stage reuse,
//! a proportional-integral controller on the step size, and cubic Hermite
//! interpolation inside accepted steps. Events are located by bisection on
//! the interpolant.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Tolerances and limits for the adaptive integrator.
#[derive(Clone, Copy, Debug)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_time: f64,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
    /// Stop (without error) once the state norm exceeds this radius.
    pub escape_radius: Option<f64>,
    /// Record every accepted step in the solution.
    pub dense: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_time: 1000.0,
            max_steps: 10_000_000,
            initial_step: None,
            escape_radius: None,
            dense: true,
        }
    }
}

impl IntegratorConfig {
    fn validate(&self) -> Result<()> {
        if self.rel_tol <= 0.0 || self.abs_tol <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "integrator tolerances must be positive, got rel {} abs {}",
                self.rel_tol, self.abs_tol
            )));
        }
        if !self.max_time.is_finite() || self.max_time <= 0.0 {
            return Err(Error::ParameterDomain(format!(
                "max integration time must be finite and positive, got {}",
                self.max_time
            )));
        }
        Ok(())
    }
}

/// Counters of integrator work.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

/// Why a completed solve stopped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopReason {
    MaxTime,
    EscapeRadius { norm: f64 },
}

/// One accepted step with the data for dense evaluation inside it.
#[derive(Clone, Copy, Debug)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: SVector<f64, N>,
    pub y1: SVector<f64, N>,
    pub f0: SVector<f64, N>,
    pub f1: SVector<f64, N>,
}

impl<const N: usize> DenseStep<N> {
    /// Cubic Hermite interpolation at `t`, clamped to `[t0, t1]`.
    pub fn eval(&self, t: f64) -> SVector<f64, N> {
        let h = self.t1 - self.t0;
        let s = ((t - self.t0) / h).clamp(0.0, 1.0);
        let s2 = s * s;
        let s3 = s2 * s;
        self.y0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + self.f0 * (h * (s3 - 2.0 * s2 + s))
            + self.y1 * (3.0 * s2 - 2.0 * s3)
            + self.f1 * (h * (s3 - s2))
    }
}

// Butcher tableau of the 5(4) pair.
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A2: [f64; 1] = [0.2];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
// Difference between the 5th- and 4th-order weights, for the error estimate.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const MAX_SCALE: f64 = 5.0;
const MIN_SCALE: f64 = 0.2;
const PI_BETA: f64 = 0.04;

/// Step-by-step driver. Callers own the loop, inspect each accepted step
/// (dense output, events) and decide when to stop.
pub struct Integrator<F, const N: usize> {
    f: F,
    t: f64,
    y: SVector<f64, N>,
    k1: SVector<f64, N>,
    h: f64,
    facold: f64,
    last_rejected: bool,
    cfg: IntegratorConfig,
    stats: StepStats,
}

impl<F, const N: usize> Integrator<F, N>
where
    F: Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    pub fn new(f: F, t0: f64, y0: SVector<f64, N>, cfg: IntegratorConfig) -> Result<Self> {
        cfg.validate()?;
        if !y0.iter().all(|v| v.is_finite()) {
            return Err(Error::Unbounded {
                t: t0,
                norm: y0.norm(),
            });
        }
        let k1 = f(t0, &y0);
        let mut it = Integrator {
            f,
            t: t0,
            y: y0,
            k1,
            h: 0.0,
            facold: 1e-4,
            last_rejected: false,
            cfg,
            stats: StepStats {
                rhs_evals: 1,
                ..StepStats::default()
            },
        };
        it.h = match cfg.initial_step {
            Some(h) => h,
            None => it.guess_initial_step(),
        };
        Ok(it)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &SVector<f64, N> {
        &self.y
    }

    pub fn stats(&self) -> StepStats {
        self.stats
    }

    /// Standard two-evaluation estimate of a safe starting step.
    fn guess_initial_step(&mut self) -> f64 {
        let sc =
            |y: &SVector<f64, N>, i: usize| self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs();
        let d0 = (0..N)
            .map(|i| (self.y[i] / sc(&self.y, i)).powi(2))
            .sum::<f64>()
            .sqrt()
            / (N as f64).sqrt();
        let d1 = (0..N)
            .map(|i| (self.k1[i] / sc(&self.y, i)).powi(2))
            .sum::<f64>()
            .sqrt()
            / (N as f64).sqrt();
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let y1 = self.y + self.k1 * h0;
        let f1 = (self.f)(self.t + h0, &y1);
        self.stats.rhs_evals += 1;
        let d2 = (0..N)
            .map(|i| ((f1[i] - self.k1[i]) / sc(&self.y, i)).powi(2))
            .sum::<f64>()
            .sqrt()
            / (N as f64).sqrt()
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.cfg.max_step)
    }

    /// Advance by one accepted step, not overshooting `t_limit`.
    pub fn advance(&mut self, t_limit: f64) -> Result<DenseStep<N>> {
        loop {
            if self.stats.accepted + self.stats.rejected >= self.cfg.max_steps {
                return Err(Error::TooManySteps {
                    t: self.t,
                    max_steps: self.cfg.max_steps,
                });
            }
            let h = self.h.min(self.cfg.max_step).min(t_limit - self.t);
            if h <= 1e-14 * self.t.abs().max(1.0) {
                return Err(Error::StepUnderflow { t: self.t });
            }
            let (t, y, k1) = (self.t, self.y, self.k1);
            let f = &self.f;
            let k2 = f(t + C[0] * h, &(y + k1 * (A2[0] * h)));
            let k3 = f(t + C[1] * h, &(y + (k1 * A3[0] + k2 * A3[1]) * h));
            let k4 = f(
                t + C[2] * h,
                &(y + (k1 * A4[0] + k2 * A4[1] + k3 * A4[2]) * h),
            );
            let k5 = f(
                t + C[3] * h,
                &(y + (k1 * A5[0] + k2 * A5[1] + k3 * A5[2] + k4 * A5[3]) * h),
            );
            let k6 = f(
                t + C[4] * h,
                &(y + (k1 * A6[0] + k2 * A6[1] + k3 * A6[2] + k4 * A6[3] + k5 * A6[4]) * h),
            );
            let y1 = y
                + (k1 * A7[0] + k3 * A7[2] + k4 * A7[3] + k5 * A7[4] + k6 * A7[5]) * h;
            let k7 = f(t + h, &y1);
            self.stats.rhs_evals += 6;
            let err_vec = (k1 * E[0] + k3 * E[2] + k4 * E[3] + k5 * E[4] + k6 * E[5]
                + k7 * E[6])
                * h;
            let mut err = 0.0;
            for i in 0..N {
                let sc = self.cfg.abs_tol + self.cfg.rel_tol * y[i].abs().max(y1[i].abs());
                err += (err_vec[i] / sc).powi(2);
            }
            err = (err / N as f64).sqrt();
            if !err.is_finite() {
                // A stage blew up; retreat hard and try again.
                self.stats.rejected += 1;
                self.h = h * 0.1;
                self.last_rejected = true;
                continue;
            }
            let fac11 = err.powf(0.2 - PI_BETA * 0.75);
            if err <= 1.0 {
                self.stats.accepted += 1;
                let fac = (fac11 / self.facold.powf(PI_BETA) / SAFETY)
                    .clamp(1.0 / MAX_SCALE, 1.0 / MIN_SCALE);
                let mut h_new = h / fac;
                if self.last_rejected {
                    h_new = h_new.min(h);
                }
                self.facold = err.max(1e-4);
                self.last_rejected = false;
                if !y1.iter().all(|v| v.is_finite()) {
                    return Err(Error::Unbounded {
                        t: t + h,
                        norm: y1.norm(),
                    });
                }
                let step = DenseStep {
                    t0: t,
                    t1: t + h,
                    y0: y,
                    y1,
                    f0: k1,
                    f1: k7,
                };
                self.t = t + h;
                self.y = y1;
                self.k1 = k7;
                self.h = h_new;
                return Ok(step);
            }
            self.stats.rejected += 1;
            self.h = h / (fac11 / SAFETY).min(1.0 / MIN_SCALE);
            self.last_rejected = true;
        }
    }
}

/// A completed solve with its sampled states.
#[derive(Clone, Debug)]
pub struct Solution<const N: usize> {
    pub times: Vec<f64>,
    pub states: Vec<SVector<f64, N>>,
    pub stop: StopReason,
    pub stats: StepStats,
}

impl<const N: usize> Solution<N> {
    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("solution has at least the start")
    }

    pub fn final_state(&self) -> &SVector<f64, N> {
        self.states.last().expect("solution has at least the start")
    }
}

/// Integrate from `t0` for `cfg.max_time`, recording accepted steps when
/// `cfg.dense` is set (always recording the endpoints).
pub fn solve<F, const N: usize>(
    f: F,
    t0: f64,
    y0: SVector<f64, N>,
    cfg: &IntegratorConfig,
) -> Result<Solution<N>>
where
    F: Fn(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    let mut it = Integrator::new(f, t0, y0, *cfg)?;
    let t_end = t0 + cfg.max_time;
    let mut times = vec![t0];
    let mut states = vec![y0];
    let mut stop = StopReason::MaxTime;
    while it.t() < t_end {
        let step = it.advance(t_end)?;
        if cfg.dense {
            times.push(step.t1);
            states.push(step.y1);
        }
        if let Some(radius) = cfg.escape_radius {
            let norm = step.y1.norm();
            if norm > radius {
                stop = StopReason::EscapeRadius { norm };
                break;
            }
        }
    }
    if !cfg.dense || *times.last().unwrap() < it.t() {
        times.push(it.t());
        states.push(*it.y());
    }
    Ok(Solution {
        times,
        states,
        stop,
        stats: it.stats(),
    })
}

/// Locate a sign change of `g` inside an accepted step by bisection on the
/// dense output, to `time_tol` in time. `direction` > 0 accepts only
/// negative-to-positive crossings, < 0 the reverse, 0 either. Returns the
/// crossing time and state, or None when the step holds no such crossing.
pub fn locate_event<G, const N: usize>(
    step: &DenseStep<N>,
    g: G,
    direction: i8,
    time_tol: f64,
) -> Option<(f64, SVector<f64, N>)>
where
    G: Fn(f64, &SVector<f64, N>) -> f64,
{
    let g0 = g(step.t0, &step.y0);
    let g1 = g(step.t1, &step.y1);
    if g0 == 0.0 || g0 * g1 > 0.0 {
        return None;
    }
    if (direction > 0 && g0 > 0.0) || (direction < 0 && g0 < 0.0) {
        return None;
    }
    let (mut lo, mut hi) = (step.t0, step.t1);
    let mut g_lo = g0;
    // The window is relative to the crossing time, and the count is capped,
    // so the loop ends even when the tolerance is below the float spacing.
    for _ in 0..128 {
        if hi - lo <= time_tol * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let y_mid = step.eval(mid);
        let g_mid = g(mid, &y_mid);
        if g_mid == 0.0 {
            return Some((mid, y_mid));
        }
        if g_lo * g_mid < 0.0 {
            hi = mid;
        } else {
            lo = mid;
            g_lo = g_mid;
        }
    }
    let t = 0.5 * (lo + hi);
    Some((t, step.eval(t)))
}
