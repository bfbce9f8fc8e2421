//! Adaptive Dormand–Prince 5(4) integration of complex ODE systems.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// fifth-order minus embedded fourth-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// First trial step; chosen from the problem scale when absent.
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rtol: 1e-10,
            atol: 1e-12,
            initial_step: None,
            max_step: None,
            max_steps: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

/// What an observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

fn axpy_into(out: &mut [C64], y: &[C64], h: f64, terms: &[(f64, &[C64])]) {
    for i in 0..out.len() {
        let mut acc = C64::new(0.0, 0.0);
        for (c, k) in terms {
            acc += k[i] * *c;
        }
        out[i] = y[i] + acc * h;
    }
}

fn error_norm(err: &[C64], y0: &[C64], y1: &[C64], opts: &OdeOptions) -> f64 {
    let n = err.len().max(1) as f64;
    let sum: f64 = err
        .iter()
        .zip(y0.iter().zip(y1))
        .map(|(e, (a, b))| {
            let scale = opts.atol + opts.rtol * a.norm().max(b.norm());
            (e.norm() / scale).powi(2)
        })
        .sum();
    (sum / n).sqrt()
}

/// Integrates `dy/dt = f(t, y)` from `t0`, recording the state at each time
/// in `outputs` (ascending, ≥ `t0`). `observer(t, y, dy)` runs after every
/// accepted step and may stop the integration early; the recorded samples
/// then end at the last reached output time.
pub fn integrate<F, O>(
    mut f: F,
    t0: f64,
    y0: &[C64],
    outputs: &[f64],
    opts: &OdeOptions,
    mut observer: O,
) -> Result<(Vec<Vec<C64>>, OdeStats)>
where
    F: FnMut(f64, &[C64], &mut [C64]),
    O: FnMut(f64, &[C64], &[C64]) -> Control,
{
    if outputs.windows(2).any(|w| w[1] < w[0]) || outputs.first().is_some_and(|&t| t < t0) {
        return Err(Error::domain("ode", "output times must be ascending and not before t0"));
    }
    if !(opts.rtol > 0.0 && opts.atol > 0.0) {
        return Err(Error::domain("ode", "tolerances must be positive"));
    }
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut samples = Vec::with_capacity(outputs.len());
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    f(t, &y, &mut k1);
    stats.evaluations += 1;
    let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (k1.clone(), k1.clone(), k1.clone(), k1.clone(), k1.clone(), k1.clone());
    let mut stage = vec![C64::new(0.0, 0.0); n];
    let mut y_new = vec![C64::new(0.0, 0.0); n];
    let mut err = vec![C64::new(0.0, 0.0); n];

    let t_end = outputs.last().copied().unwrap_or(t0);
    let span = (t_end - t0).abs().max(f64::MIN_POSITIVE);
    let mut h = opts.initial_step.unwrap_or_else(|| {
        let ynorm = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let dnorm = k1.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if dnorm > 0.0 && ynorm > 0.0 {
            (0.01 * ynorm / dnorm).min(span)
        } else {
            span * 1e-3
        }
    });
    if let Some(max) = opts.max_step {
        h = h.min(max);
    }

    let mut next_output = 0;
    while next_output < outputs.len() && outputs[next_output] <= t {
        samples.push(y.clone());
        next_output += 1;
    }

    while next_output < outputs.len() {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::Integration {
                t,
                step: h,
                detail: format!("step budget of {} exhausted", opts.max_steps),
            });
        }
        let target = outputs[next_output];
        let mut step = h.min(target - t);
        if let Some(max) = opts.max_step {
            step = step.min(max);
        }
        let min_step = 16.0 * f64::EPSILON * t.abs().max(span);
        if step < min_step && target - t > min_step {
            return Err(Error::Integration {
                t,
                step,
                detail: format!("step size underflow (minimum {min_step:e})"),
            });
        }

        axpy_into(&mut stage, &y, step, &[(A21, &k1)]);
        f(t + C2 * step, &stage, &mut k2);
        axpy_into(&mut stage, &y, step, &[(A31, &k1), (A32, &k2)]);
        f(t + C3 * step, &stage, &mut k3);
        axpy_into(&mut stage, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        f(t + C4 * step, &stage, &mut k4);
        axpy_into(&mut stage, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        f(t + C5 * step, &stage, &mut k5);
        axpy_into(&mut stage, &y, step, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        f(t + step, &stage, &mut k6);
        axpy_into(&mut y_new, &y, step, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        f(t + step, &y_new, &mut k7);
        stats.evaluations += 6;
        for i in 0..n {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
        }
        let e = error_norm(&err, &y, &y_new, opts);
        if !e.is_finite() {
            return Err(Error::Integration {
                t,
                step,
                detail: "non-finite state".into(),
            });
        }
        let factor = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        if e <= 1.0 {
            stats.accepted += 1;
            let reached_target = step == target - t;
            t = if reached_target { target } else { t + step };
            std::mem::swap(&mut y, &mut y_new);
            std::mem::swap(&mut k1, &mut k7);
            while next_output < outputs.len() && outputs[next_output] <= t {
                samples.push(y.clone());
                next_output += 1;
            }
            if observer(t, &y, &k1) == Control::Stop {
                break;
            }
            // keep the controller's proposal rather than the clipped step
            h = if reached_target { h.max(step * factor) } else { step * factor };
        } else {
            stats.rejected += 1;
            h = step * factor.min(1.0);
        }
    }
    Ok((samples, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotation(omega: f64) -> impl FnMut(f64, &[C64], &mut [C64]) {
        move |_t, y, dy| {
            for (d, v) in dy.iter_mut().zip(y) {
                *d = C64::new(0.0, -omega) * v;
            }
        }
    }

    #[test]
    fn harmonic_phase() {
        let opts = OdeOptions::default();
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.7).collect();
        let (ys, stats) = integrate(rotation(3.0), 0.0, &[C64::new(1.0, 0.0)], &times, &opts, |_, _, _| Control::Continue).unwrap();
        assert_eq!(ys.len(), times.len());
        for (t, y) in times.iter().zip(&ys) {
            let exact = C64::new(0.0, -3.0 * t).exp();
            assert!((y[0] - exact).norm() < 1e-8);
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn tolerance_controls_error() {
        // error should fall roughly in proportion to the tolerance
        let error_at = |tol: f64| {
            let opts = OdeOptions {
                rtol: tol,
                atol: tol * 1e-3,
                ..OdeOptions::default()
            };
            let (ys, _) = integrate(rotation(1.0), 0.0, &[C64::new(1.0, 0.0)], &[20.0], &opts, |_, _, _| Control::Continue).unwrap();
            (ys[0][0] - C64::new(0.0, -20.0).exp()).norm()
        };
        let coarse = error_at(1e-6);
        let fine = error_at(1e-8);
        let ratio = coarse / fine;
        assert!(ratio > 10.0 && ratio < 1e4, "ratio {ratio}");
    }

    #[test]
    fn fixed_step_order_is_five() {
        // with adaptivity disabled via huge tolerances and a capped step,
        // halving the step cuts the global error by ~2⁵
        let error_at = |h: f64| {
            let opts = OdeOptions {
                rtol: 1e3,
                atol: 1e3,
                initial_step: Some(h),
                max_step: Some(h),
                max_steps: 1_000_000,
            };
            let (ys, _) = integrate(rotation(1.0), 0.0, &[C64::new(1.0, 0.0)], &[4.0], &opts, |_, _, _| Control::Continue).unwrap();
            (ys[0][0] - C64::new(0.0, -4.0).exp()).norm()
        };
        let ratio = error_at(0.1) / error_at(0.05);
        assert!((ratio.log2() - 5.0).abs() < 0.5, "observed order {}", ratio.log2());
    }

    #[test]
    fn observer_can_stop() {
        let opts = OdeOptions::default();
        let mut calls = 0;
        let (ys, _) = integrate(rotation(1.0), 0.0, &[C64::new(1.0, 0.0)], &[1.0, 100.0], &opts, |t, _, _| {
            calls += 1;
            if t >= 1.0 {
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .unwrap();
        assert_eq!(ys.len(), 1);
        assert!(calls > 0);
    }

    #[test]
    fn stiff_blowup_reports_failure() {
        let opts = OdeOptions {
            max_steps: 50,
            ..OdeOptions::default()
        };
        let r = integrate(rotation(1e6), 0.0, &[C64::new(1.0, 0.0)], &[1.0], &opts, |_, _, _| Control::Continue);
        assert!(matches!(r, Err(Error::Integration { .. })));
        let bad = integrate(rotation(1.0), 0.0, &[C64::new(1.0, 0.0)], &[2.0, 1.0], &opts, |_, _, _| Control::Continue);
        assert!(bad.is_err());
    }
}
