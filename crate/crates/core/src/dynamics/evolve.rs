use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{annihilation, FockState, OperatorMatrix};
use crate::ode::{integrate, Control, OdeOptions, OdeStats};

/// Time profile multiplying a drive amplitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    Rectangular,
    /// Rises as `(1 − cos(πt/T_r))/2` over `ramp_time`, then stays at 1.
    CosineRamp { ramp_time: f64 },
}

impl Envelope {
    pub fn value(&self, t: f64) -> f64 {
        match *self {
            Envelope::Rectangular => 1.0,
            Envelope::CosineRamp { ramp_time } => {
                if t >= ramp_time || ramp_time == 0.0 {
                    1.0
                } else if t <= 0.0 {
                    0.0
                } else {
                    0.5 * (1.0 - (std::f64::consts::PI * t / ramp_time).cos())
                }
            }
        }
    }
}

/// Classical drive `α·env(t)·(b_m e^{i(ωt+φ)} + H.c.)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub target_mode: usize,
    /// Amplitude `α` (rad/s).
    pub amplitude: f64,
    /// Frequency `ω^dr` (rad/s).
    pub frequency: f64,
    /// Phase `φ` (rad).
    pub phase: f64,
    pub envelope: Envelope,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return Err(Error::domain("dynamics", format!("drive amplitude must be non-negative (got {})", self.amplitude)));
        }
        if !(self.frequency.is_finite() && self.phase.is_finite()) {
            return Err(Error::domain("dynamics", "drive frequency and phase must be finite"));
        }
        if let Envelope::CosineRamp { ramp_time } = self.envelope {
            if !(ramp_time.is_finite() && ramp_time >= 0.0) {
                return Err(Error::domain("dynamics", format!("ramp_time must be non-negative (got {ramp_time})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    /// Per-mode rotating-frame frequencies `ν_m`; lab frame when absent.
    pub frame: Option<Vec<f64>>,
    /// Replaces each drive's ladder operator (e.g. to keep only selected transitions).
    #[serde(skip)]
    pub drive_operators: Option<Vec<OperatorMatrix>>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            ode: OdeOptions {
                rtol: 1e-12,
                atol: 1e-14,
                ..OdeOptions::default()
            },
            frame: None,
            drive_operators: None,
        }
    }
}

/// States at the requested times, in the frame the evolution ran in.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<FockState>,
    /// `max_t |‖ψ(t)‖ − 1|` over the recorded states.
    pub max_norm_error: f64,
    pub stats: OdeStats,
}

/// Solves `i∂_t|ψ⟩ = H(t)|ψ⟩` with `H(t) = h0 + Σ drives`, optionally in the
/// frame rotating at `ν_m` per mode, where `H → U H U† − Σ ν_m n̂_m` with
/// `U = exp(i Σ ν_m n̂_m t)`.
pub fn evolve(
    h0: &OperatorMatrix,
    drives: &[DriveSpec],
    state0: &FockState,
    times: &[f64],
    options: &EvolveOptions,
) -> Result<Trajectory> {
    h0.ensure_hermitian(1e-10)?;
    let space = h0.space().clone();
    if state0.space() != &space {
        return Err(Error::DimensionMismatch("initial state lives on a different space".into()));
    }
    if !state0.is_normalized(1e-9) {
        return Err(Error::domain("dynamics", format!("initial state has norm {}", state0.norm())));
    }
    for d in drives {
        d.validate()?;
    }
    let drive_ops = match &options.drive_operators {
        Some(ops) => {
            if ops.len() != drives.len() || ops.iter().any(|o| o.space() != &space) {
                return Err(Error::DimensionMismatch("drive operators do not match the drives".into()));
            }
            ops.clone()
        }
        None => drives
            .iter()
            .map(|d| annihilation(&space, d.target_mode))
            .collect::<Result<Vec<_>>>()?,
    };
    let drive_adj: Vec<OperatorMatrix> = drive_ops.iter().map(OperatorMatrix::adjoint).collect();
    let frame_energy: Option<Vec<f64>> = match &options.frame {
        Some(nu) => {
            if nu.len() != space.n_modes() {
                return Err(Error::DimensionMismatch(format!(
                    "{} frame frequencies for {} modes",
                    nu.len(),
                    space.n_modes()
                )));
            }
            Some(
                (0..space.dimension())
                    .map(|i| (0..nu.len()).map(|m| nu[m] * space.occupation(i, m) as f64).sum())
                    .collect(),
            )
        }
        None => None,
    };
    let t0 = times.first().copied().unwrap_or(0.0);
    let dim = space.dimension();
    let mut rotated = vec![C64::new(0.0, 0.0); dim];
    let mut work = vec![C64::new(0.0, 0.0); dim];
    let minus_i = C64::new(0.0, -1.0);

    let rhs = |t: f64, y: &[C64], dy: &mut [C64]| {
        // lab-frame action on P(t)† y, then rotate back
        let phases: Option<Vec<C64>> = frame_energy
            .as_ref()
            .map(|e| e.iter().map(|&en| C64::new(0.0, en * t).exp()).collect());
        match &phases {
            Some(p) => {
                for i in 0..dim {
                    rotated[i] = p[i].conj() * y[i];
                }
            }
            None => rotated.copy_from_slice(y),
        }
        h0.apply_into(&rotated, &mut work);
        for ((d, op), adj) in drives.iter().zip(&drive_ops).zip(&drive_adj) {
            let a = d.amplitude * d.envelope.value(t);
            if a == 0.0 {
                continue;
            }
            let c = C64::new(0.0, d.frequency * t + d.phase).exp() * a;
            op.apply_add(c, &rotated, &mut work);
            adj.apply_add(c.conj(), &rotated, &mut work);
        }
        match (&phases, &frame_energy) {
            (Some(p), Some(e)) => {
                for i in 0..dim {
                    dy[i] = minus_i * (p[i] * work[i] - y[i] * e[i]);
                }
            }
            _ => {
                for i in 0..dim {
                    dy[i] = minus_i * work[i];
                }
            }
        }
    };
    let (samples, stats) = integrate(rhs, t0, state0.amplitudes().as_slice(), times, &options.ode, |_, _, _| {
        Control::Continue
    })?;
    let states = samples
        .into_iter()
        .map(|s| FockState::from_amplitudes(&space, s.into()))
        .collect::<Result<Vec<_>>>()?;
    let max_norm_error = states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        max_norm_error,
        stats,
    })
}

/// Exact evolution under a time-independent Hamiltonian through its dense
/// eigendecomposition, for spaces up to [`crate::eigen::DENSE_LIMIT`] states.
pub fn propagate_static(h: &OperatorMatrix, state0: &FockState, times: &[f64]) -> Result<Trajectory> {
    h.ensure_hermitian(1e-10)?;
    if state0.space() != h.space() {
        return Err(Error::DimensionMismatch("initial state lives on a different space".into()));
    }
    if h.dimension() > crate::eigen::DENSE_LIMIT {
        return Err(Error::DimensionOverflow {
            dimension: h.dimension(),
            limit: crate::eigen::DENSE_LIMIT,
        });
    }
    let eig = crate::eigen::dense_eigenpairs(h);
    let coefficients = eig.vectors.adjoint() * state0.amplitudes();
    let t0 = times.first().copied().unwrap_or(0.0);
    let states = times
        .iter()
        .map(|&t| {
            let phased = nalgebra::DVector::from_iterator(
                coefficients.len(),
                coefficients
                    .iter()
                    .zip(&eig.values)
                    .map(|(c, &e)| c * C64::new(0.0, -e * (t - t0)).exp()),
            );
            FockState::from_amplitudes(h.space(), &eig.vectors * phased)
        })
        .collect::<Result<Vec<_>>>()?;
    let max_norm_error = states.iter().map(|s| (s.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(Trajectory {
        times: times.to_vec(),
        states,
        max_norm_error,
        stats: OdeStats::default(),
    })
}
