use serde::{Deserialize, Serialize};

/// Conditions that do not stop a computation but put its result outside the
/// regime where the underlying approximations hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    /// Zero-point phase fluctuation of a mode above the quantization threshold.
    LargeZeroPointPhase { mode: usize, theta_zpf: f64, threshold: f64 },
    /// Gate drive comparable to or stronger than the anharmonicity.
    GateRegime { rabi: f64, anharmonicity: f64 },
    /// Mean-field integration ended without meeting the steady-state criterion.
    SteadyStateNotReached { t_final: f64, derivative: f64 },
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Warning::LargeZeroPointPhase {
                mode,
                theta_zpf,
                threshold,
            } => write!(
                f,
                "mode {mode}: theta_zpf = {theta_zpf:.4} exceeds {threshold}; harmonic quantization is questionable"
            ),
            Warning::GateRegime {
                rabi,
                anharmonicity,
            } => write!(
                f,
                "drive {rabi:e} rad/s is not small against the anharmonicity {anharmonicity:e} rad/s"
            ),
            Warning::SteadyStateNotReached { t_final, derivative } => write!(
                f,
                "no steady state by t = {t_final:e} s (|db/dt| = {derivative:e})"
            ),
        }
    }
}
