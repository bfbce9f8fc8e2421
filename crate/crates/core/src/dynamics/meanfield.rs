use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::fit::parabolic_peak;
use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::jhamiltonian::KerrTensor;
use crate::ode::{integrate, Control, OdeOptions};

/// Energy relaxation time used for the default damping (s).
pub const DEFAULT_T1: f64 = 30e-6;
/// Consecutive accepted steps below the derivative threshold that count as steady.
pub const STEADY_STEPS: usize = 100;
/// Relative derivative threshold of the steady-state test.
pub const STEADY_TOL: f64 = 1e-10;

/// Two-mode mean-field state in the frame of the drives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub b0: C64,
    pub b1: C64,
    /// `Δ₀`, `Δ₁` (rad/s).
    pub delta0: f64,
    pub delta1: f64,
    /// Damping `γ_d` (rad/s).
    pub gamma: f64,
}

impl MeanFieldState {
    pub fn vacuum(delta0: f64, delta1: f64, gamma: f64) -> Self {
        MeanFieldState {
            b0: C64::new(0.0, 0.0),
            b1: C64::new(0.0, 0.0),
            delta0,
            delta1,
            gamma,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.b0.re, self.b0.im, self.b1.re, self.b1.im, self.delta0, self.delta1, self.gamma]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::domain("dynamics", "mean-field state must be finite"));
        }
        if self.gamma < 0.0 {
            return Err(Error::domain("dynamics", format!("damping must be non-negative (got {})", self.gamma)));
        }
        Ok(())
    }
}

/// Nonlinear coefficients of the mean-field equations:
/// `ḃ₀ = −i(Δ₀ − K₀₀|b₀|²)b₀ − iα₀ − γb₀`, `ḃ₁ = −i(Δ₁ − K₀₁|b₀|²)b₁ − iα₁ − γb₁`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldCoefficients {
    pub self_kerr: f64,
    pub cross_kerr: f64,
}

impl MeanFieldCoefficients {
    pub fn from_kerr(kerr: &KerrTensor) -> Result<Self> {
        if kerr.n_modes < 2 {
            return Err(Error::domain("dynamics", "mean-field model needs two modes"));
        }
        Ok(MeanFieldCoefficients {
            self_kerr: kerr.u(0, 0),
            cross_kerr: kerr.u(0, 1),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldTrajectory {
    pub times: Vec<f64>,
    pub b0: Vec<C64>,
    pub b1: Vec<C64>,
    /// Amplitudes once the steady-state test passed.
    pub steady: Option<[C64; 2]>,
    pub final_time: f64,
    pub final_derivative: f64,
}

fn rhs(state: &MeanFieldState, c: &MeanFieldCoefficients, alpha: [C64; 2]) -> impl Fn(f64, &[C64], &mut [C64]) {
    let i = C64::new(0.0, 1.0);
    let c = *c;
    let state = *state;
    move |_, y, dy| {
        let n0 = y[0].norm_sqr();
        dy[0] = -i * (state.delta0 - c.self_kerr * n0) * y[0] - i * alpha[0] - state.gamma * y[0];
        dy[1] = -i * (state.delta1 - c.cross_kerr * n0) * y[1] - i * alpha[1] - state.gamma * y[1];
    }
}

fn steady_threshold(state: &MeanFieldState, alpha: [C64; 2]) -> f64 {
    let drive = alpha[0].norm().max(alpha[1].norm());
    let scale = if drive > 0.0 {
        drive
    } else {
        state.gamma * state.b0.norm().max(state.b1.norm())
    };
    STEADY_TOL * scale
}

/// Integrates the mean-field equations over `times` (ascending, first entry is
/// the start). Stops early once `|db/dt|` stays below `1e-10·|α|` for
/// [`STEADY_STEPS`] consecutive steps.
pub fn meanfield_evolve(
    state: &MeanFieldState,
    coefficients: &MeanFieldCoefficients,
    alpha: [C64; 2],
    times: &[f64],
    ode: &OdeOptions,
) -> Result<MeanFieldTrajectory> {
    state.validate()?;
    if !alpha.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        return Err(Error::domain("dynamics", "drive amplitudes must be finite"));
    }
    if times.len() < 2 {
        return Err(Error::domain("dynamics", "need at least a start and an end time"));
    }
    let threshold = steady_threshold(state, alpha);
    let span = times[times.len() - 1] - times[0];
    // resolve the approach to the fixed point finely enough for the steady-state test
    let amplitude_scale = alpha[0].norm().max(alpha[1].norm()) / state.gamma.max(state.delta0.abs()).max(f64::MIN_POSITIVE);
    let ode = &OdeOptions {
        atol: ode.atol.min(ode.rtol * amplitude_scale).max(f64::MIN_POSITIVE),
        max_step: Some(ode.max_step.unwrap_or(f64::INFINITY).min(span / (10 * STEADY_STEPS) as f64)),
        ..*ode
    };
    let mut quiet = 0usize;
    let mut steady = None;
    let mut final_time = times[0];
    let mut final_derivative = f64::INFINITY;
    let observer = |t: f64, y: &[C64], dy: &[C64]| {
        let d = dy[0].norm().max(dy[1].norm());
        final_time = t;
        final_derivative = d;
        if d <= threshold {
            quiet += 1;
        } else {
            quiet = 0;
        }
        if quiet >= STEADY_STEPS {
            steady = Some([y[0], y[1]]);
            Control::Stop
        } else {
            Control::Continue
        }
    };
    let (samples, _) = integrate(rhs(state, coefficients, alpha), times[0], &[state.b0, state.b1], times, ode, observer)?;
    let n = samples.len();
    Ok(MeanFieldTrajectory {
        times: times[..n].to_vec(),
        b0: samples.iter().map(|s| s[0]).collect(),
        b1: samples.iter().map(|s| s[1]).collect(),
        steady,
        final_time,
        final_derivative,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateReport {
    /// Steady state reached from the vacuum.
    pub from_vacuum: Option<[C64; 2]>,
    /// Distinct steady states found from all starts.
    pub branches: Vec<[C64; 2]>,
    pub warnings: Vec<Warning>,
}

impl SteadyStateReport {
    pub fn is_bistable(&self) -> bool {
        self.branches.len() > 1
    }
}

/// Steady states from four starts: the vacuum and a large `b₀` at phases
/// `0, π/2, π`. `t_max` bounds each run.
pub fn steady_state(
    state: &MeanFieldState,
    coefficients: &MeanFieldCoefficients,
    alpha: [C64; 2],
    t_max: f64,
    ode: &OdeOptions,
) -> Result<SteadyStateReport> {
    if !(t_max > 0.0) {
        return Err(Error::domain("dynamics", "t_max must be positive"));
    }
    let gamma = state.gamma.max(f64::MIN_POSITIVE);
    let linear = alpha[0].norm() / gamma;
    let kerr_scale = if coefficients.self_kerr != 0.0 {
        (state.delta0.abs() / coefficients.self_kerr.abs()).sqrt()
    } else {
        0.0
    };
    let radius = 2.0 * linear.max(kerr_scale).max(1.0);
    let starts = [
        C64::new(0.0, 0.0),
        C64::new(radius, 0.0),
        C64::new(0.0, radius),
        C64::new(-radius, 0.0),
    ];
    let mut report = SteadyStateReport {
        from_vacuum: None,
        branches: Vec::new(),
        warnings: Vec::new(),
    };
    for (k, b0) in starts.iter().enumerate() {
        let start = MeanFieldState {
            b0: *b0,
            b1: C64::new(0.0, 0.0),
            ..*state
        };
        let traj = meanfield_evolve(&start, coefficients, alpha, &[0.0, t_max], ode)?;
        match traj.steady {
            Some(s) => {
                if k == 0 {
                    report.from_vacuum = Some(s);
                }
                let scale = s[0].norm().max(s[1].norm()).max(1e-300);
                let known = report
                    .branches
                    .iter()
                    .any(|b| (b[0] - s[0]).norm().max((b[1] - s[1]).norm()) <= 1e-6 * scale);
                if !known {
                    report.branches.push(s);
                }
            }
            None => report.warnings.push(Warning::SteadyStateNotReached {
                t_final: traj.final_time,
                derivative: traj.final_derivative,
            }),
        }
    }
    Ok(report)
}

/// Which detuning a scan sweeps; the reported amplitude is that of the same mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    /// Sweep `Δ₁`, record `|b₁|`.
    Probe,
    /// Sweep `Δ₀`, record `|b₀|`.
    Pump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanSetup {
    pub coefficients: MeanFieldCoefficients,
    pub gamma: f64,
    pub pump_detuning: f64,
    pub pump_amplitude: f64,
    pub probe_detuning: f64,
    pub probe_amplitude: f64,
    /// Integration window per point; `60/γ` when absent.
    pub t_max: Option<f64>,
    pub ode: OdeOptions,
}

impl ScanSetup {
    pub fn new(coefficients: MeanFieldCoefficients, pump_amplitude: f64, probe_amplitude: f64) -> Self {
        ScanSetup {
            coefficients,
            gamma: 1.0 / DEFAULT_T1,
            pump_detuning: 0.0,
            pump_amplitude,
            probe_detuning: 0.0,
            probe_amplitude,
            t_max: None,
            ode: OdeOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub detuning: f64,
    pub b0: C64,
    pub b1: C64,
    pub amplitude: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransmissionScan {
    pub axis: ScanAxis,
    pub points: Vec<ScanPoint>,
    /// Vertex of the parabola through the largest amplitude and its neighbours.
    pub peak_detuning: f64,
    /// `|b̄₀|²` at the scan point closest to the peak.
    pub pump_population: f64,
    pub warnings: Vec<Warning>,
}

/// Steady-state amplitude per grid detuning, each started from the vacuum.
pub fn transmission_scan(setup: &ScanSetup, axis: ScanAxis, grid: &[f64]) -> Result<TransmissionScan> {
    if grid.is_empty() {
        return Err(Error::domain("dynamics", "scan grid is empty"));
    }
    if !(setup.gamma > 0.0) {
        return Err(Error::domain("dynamics", "scans need positive damping"));
    }
    let t_max = setup.t_max.unwrap_or(60.0 / setup.gamma);
    let alpha = [C64::new(setup.pump_amplitude, 0.0), C64::new(setup.probe_amplitude, 0.0)];
    let runs = grid
        .par_iter()
        .map(|&d| {
            let (d0, d1) = match axis {
                ScanAxis::Probe => (setup.pump_detuning, d),
                ScanAxis::Pump => (d, setup.probe_detuning),
            };
            let state = MeanFieldState::vacuum(d0, d1, setup.gamma);
            let traj = meanfield_evolve(&state, &setup.coefficients, alpha, &[0.0, t_max], &setup.ode)?;
            let last = [*traj.b0.last().expect("start sample"), *traj.b1.last().expect("start sample")];
            let end = traj.steady.unwrap_or(last);
            let point = ScanPoint {
                detuning: d,
                b0: end[0],
                b1: end[1],
                amplitude: match axis {
                    ScanAxis::Probe => end[1].norm(),
                    ScanAxis::Pump => end[0].norm(),
                },
                converged: traj.steady.is_some(),
            };
            let warning = (!point.converged).then_some(Warning::SteadyStateNotReached {
                t_final: traj.final_time,
                derivative: traj.final_derivative,
            });
            Ok((point, warning))
        })
        .collect::<Result<Vec<_>>>()?;
    let (points, warnings): (Vec<ScanPoint>, Vec<Option<Warning>>) = runs.into_iter().unzip();
    let amplitudes: Vec<f64> = points.iter().map(|p| p.amplitude).collect();
    let peak_detuning = parabolic_peak(grid, &amplitudes)?;
    let nearest = points
        .iter()
        .min_by(|a, b| (a.detuning - peak_detuning).abs().total_cmp(&(b.detuning - peak_detuning).abs()))
        .expect("nonempty");
    Ok(TransmissionScan {
        axis,
        pump_population: nearest.b0.norm_sqr(),
        points,
        peak_detuning,
        warnings: warnings.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAMMA: f64 = 1.0;

    fn coeffs() -> MeanFieldCoefficients {
        MeanFieldCoefficients {
            self_kerr: 1.0,
            cross_kerr: 2.0,
        }
    }

    #[test]
    fn undriven_vacuum_stays_put() {
        let s = MeanFieldState::vacuum(0.3, -0.2, GAMMA);
        let z = C64::new(0.0, 0.0);
        let r = steady_state(&s, &coeffs(), [z, z], 100.0, &OdeOptions::default()).unwrap();
        let v = r.from_vacuum.unwrap();
        assert_eq!(v[0], z);
        assert!(r.branches.iter().all(|b| b[0].norm() < 1e-8));
    }

    #[test]
    fn linear_response_amplitude() {
        let c = MeanFieldCoefficients {
            self_kerr: 0.0,
            cross_kerr: 0.0,
        };
        let (d0, a0) = (0.7, 1e-3);
        let s = MeanFieldState::vacuum(d0, 0.0, GAMMA);
        let r = steady_state(&s, &c, [C64::new(a0, 0.0), C64::new(0.0, 0.0)], 200.0, &OdeOptions::default()).unwrap();
        let b0 = r.from_vacuum.unwrap()[0];
        assert!((b0.norm() - a0 / (d0 * d0 + GAMMA * GAMMA).sqrt()).abs() < 1e-8 * a0);
        assert_eq!(r.branches.len(), 1);
    }

    #[test]
    fn conservative_flow_keeps_amplitudes() {
        let s = MeanFieldState {
            b0: C64::new(0.6, 0.3),
            b1: C64::new(-0.2, 0.5),
            delta0: 0.4,
            delta1: -1.0,
            gamma: 0.0,
        };
        let z = C64::new(0.0, 0.0);
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 3.0).collect();
        let t = meanfield_evolve(&s, &coeffs(), [z, z], &times, &OdeOptions::default()).unwrap();
        for (a, b) in t.b0.iter().zip(&t.b1) {
            assert!((a.norm() - s.b0.norm()).abs() < 1e-9);
            assert!((b.norm() - s.b1.norm()).abs() < 1e-9);
        }
        assert!(t.steady.is_none());
    }

    #[test]
    fn bistable_pump_finds_two_branches() {
        // detuned far above the foldover threshold
        let s = MeanFieldState::vacuum(6.0, 0.0, GAMMA);
        let r = steady_state(&s, &coeffs(), [C64::new(3.0, 0.0), C64::new(0.0, 0.0)], 400.0, &OdeOptions::default()).unwrap();
        assert!(r.is_bistable(), "{:?}", r.branches);
    }

    #[test]
    fn unpumped_probe_peaks_at_zero() {
        let setup = ScanSetup {
            gamma: GAMMA,
            t_max: Some(60.0),
            ..ScanSetup::new(coeffs(), 0.0, 1e-3)
        };
        let grid: Vec<f64> = (-20..=20).map(|k| k as f64 * 0.05 + 0.013).collect();
        let scan = transmission_scan(&setup, ScanAxis::Probe, &grid).unwrap();
        assert!(scan.peak_detuning.abs() < 1e-3, "{}", scan.peak_detuning);
        assert!(scan.warnings.is_empty());
    }

    #[test]
    fn cross_kerr_shift_tracks_pump_population() {
        let mut shifts = Vec::new();
        let mut pops = Vec::new();
        for a0 in [0.3, 0.3 * 2f64.sqrt()] {
            let setup = ScanSetup {
                gamma: GAMMA,
                t_max: Some(80.0),
                ..ScanSetup::new(coeffs(), a0, 1e-4)
            };
            let n0 = {
                let s = MeanFieldState::vacuum(0.0, 0.0, GAMMA);
                steady_state(&s, &coeffs(), [C64::new(a0, 0.0), C64::new(0.0, 0.0)], 80.0, &OdeOptions::default())
                    .unwrap()
                    .from_vacuum
                    .unwrap()[0]
                    .norm_sqr()
            };
            let centre = 2.0 * n0;
            let grid: Vec<f64> = (-30..=30).map(|k| centre + k as f64 * 0.01).collect();
            let scan = transmission_scan(&setup, ScanAxis::Probe, &grid).unwrap();
            shifts.push(scan.peak_detuning);
            pops.push(scan.pump_population);
        }
        for (s, p) in shifts.iter().zip(&pops) {
            assert!((s / p - 2.0).abs() < 2e-3, "{s} {p}");
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let setup = ScanSetup::new(coeffs(), 0.1, 0.1);
        assert!(transmission_scan(&setup, ScanAxis::Probe, &[]).is_err());
        let s = MeanFieldState::vacuum(f64::NAN, 0.0, 1.0);
        let z = C64::new(0.0, 0.0);
        assert!(meanfield_evolve(&s, &coeffs(), [z, z], &[0.0, 1.0], &OdeOptions::default()).is_err());
    }
}
