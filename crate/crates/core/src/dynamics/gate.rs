use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::evolve::{evolve, DriveSpec, Envelope, EvolveOptions};
use crate::diagnostics::Warning;
use crate::eigen::dense_eigenpairs;
use crate::error::{Error, Result};
use crate::fock::{annihilation, FockSpace, FockState};
use crate::jhamiltonian::{junction_hamiltonian, KerrTensor, QuarticOptions};
use crate::ode::OdeOptions;
use crate::params::{mode_frequency, JunctionParams};

/// Qubit basis `|n₀, n₁⟩` in the order used for the gate matrix.
pub const QUBIT_STATES: [[usize; 2]; 4] = [[0, 0], [0, 1], [1, 0], [1, 1]];
/// Target gate on [`QUBIT_STATES`].
pub const TARGET_DIAGONAL: [f64; 4] = [1.0, 1.0, -1.0, 1.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateOptions {
    /// Fock cutoffs of the two junction modes.
    pub cutoffs: [usize; 2],
    /// Couple only `|1,0⟩ ↔ |2,0⟩`.
    pub idealized: bool,
    pub drive_phase: f64,
    /// Time samples used for the time-averaged leakage.
    pub leakage_samples: usize,
    pub ode: OdeOptions,
}

impl Default for GateOptions {
    fn default() -> Self {
        GateOptions {
            cutoffs: [7, 7],
            idealized: false,
            drive_phase: 0.0,
            leakage_samples: 64,
            ode: EvolveOptions::default().ode,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    /// `arg(M_{10,10} / M_{00,00})` in `[0, 2π)`.
    pub achieved_phase: f64,
    /// `arg(M₀₀M₁₁ / M₀₁M₁₀)` in `[0, 2π)`, insensitive to single-mode phases.
    pub conditional_phase: f64,
    pub fidelity: f64,
    /// Population outside the qubit manifold at the end, averaged over the four inputs.
    pub leakage: f64,
    /// Time average of the population outside the qubit manifold and `|2,0⟩`.
    pub mean_offresonant_leakage: f64,
    pub duration: f64,
    pub rabi: f64,
    pub drive_frequency: f64,
    /// Gate matrix in the interaction picture of the undriven junction, rows and
    /// columns ordered as [`QUBIT_STATES`].
    pub matrix: Vec<Vec<C64>>,
    pub max_norm_error: f64,
    pub warnings: Vec<Warning>,
}

/// Average gate fidelity `(|Tr V†M|² + Tr M†M) / d(d+1)` of a (possibly
/// non-unitary) block `M` against the unitary `V`.
pub fn average_gate_fidelity(m: &DMatrix<C64>, v: &DMatrix<C64>) -> f64 {
    let d = m.nrows() as f64;
    let overlap = (v.adjoint() * m).trace().norm_sqr();
    let norm = (m.adjoint() * m).trace().re;
    ((overlap + norm) / (d * (d + 1.0))).clamp(0.0, 1.0)
}

/// Controlled-phase gate by a `2π` Rabi cycle on `|1,0⟩ ↔ |2,0⟩`: mode 0 is
/// driven on that transition (`ω₀ − U₀₀` up to the pair-exchange dressing of
/// `|2,0⟩`) with amplitude `Ω` for `T = π/(√2Ω)`. The idealized variant keeps
/// only the number-diagonal part of the junction Hamiltonian and couples only
/// `|1,0⟩ ↔ |2,0⟩`.
pub fn phase_gate(params: &JunctionParams, kerr: &KerrTensor, rabi: f64, options: &GateOptions) -> Result<GateReport> {
    if !(rabi.is_finite() && rabi > 0.0) {
        return Err(Error::domain("dynamics", format!("gate Rabi frequency must be positive (got {rabi})")));
    }
    if kerr.n_modes < 2 || params.n_modes() < 2 {
        return Err(Error::domain("dynamics", "the gate needs two junction modes"));
    }
    if options.cutoffs[0] < 3 || options.cutoffs[1] < 1 {
        return Err(Error::domain("dynamics", "the gate needs n_max >= 3 on mode 0 and >= 1 on mode 1"));
    }
    let u00 = kerr.u(0, 0);
    let mut warnings = Vec::new();
    if rabi >= u00 {
        warnings.push(Warning::GateRegime {
            rabi,
            anharmonicity: u00,
        });
    }
    let space = FockSpace::new(options.cutoffs.to_vec())?;
    let two_mode = params.with_n_modes(2)?;
    let mut h0 = junction_hamiltonian(&two_mode, &space, QuarticOptions::RWA)?;
    if options.idealized {
        h0 = h0.filtered(|r, c| r == c);
    }
    let omega1 = mode_frequency(params, 1);
    let index = |occ: [usize; 2]| space.index_of(&occ).expect("qubit states lie inside the cutoffs");
    let i20 = index([2, 0]);
    let i10 = index([1, 0]);
    // e^{iH₀T} e^{−iΣν n T} maps the rotating-frame state to the interaction picture
    let eig = dense_eigenpairs(&h0);
    let dressed = |i: usize| {
        let k = (0..eig.len())
            .max_by(|&a, &b| eig.vectors[(i, a)].norm_sqr().total_cmp(&eig.vectors[(i, b)].norm_sqr()))
            .expect("nonempty spectrum");
        eig.values[k]
    };
    // |1,0⟩ → |2,0⟩ including the pair-exchange dressing of |2,0⟩; equals ω₀ − U₀₀ at leading order
    let drive_frequency = dressed(i20) - dressed(i10);
    let duration = PI / (2f64.sqrt() * rabi);
    let drive = DriveSpec {
        target_mode: 0,
        amplitude: rabi,
        frequency: drive_frequency,
        phase: options.drive_phase,
        envelope: Envelope::Rectangular,
    };
    let qubit: Vec<usize> = QUBIT_STATES.iter().map(|&o| index(o)).collect();
    let drive_operators = if options.idealized {
        Some(vec![annihilation(&space, 0)?.filtered(|r, c| r == i10 && c == i20)])
    } else {
        None
    };
    let nu = [drive_frequency, omega1];
    let evolve_options = EvolveOptions {
        ode: options.ode,
        frame: Some(nu.to_vec()),
        drive_operators,
    };
    let samples = options.leakage_samples.max(2);
    let times: Vec<f64> = (0..=samples).map(|k| duration * k as f64 / samples as f64).collect();

    let phases = DVector::from_iterator(eig.len(), eig.values.iter().map(|&e| C64::new(0.0, e * duration).exp()));
    let to_interaction = &eig.vectors * DMatrix::from_diagonal(&phases) * eig.vectors.adjoint();
    let frame_phase: Vec<C64> = (0..space.dimension())
        .map(|i| {
            let e: f64 = (0..2).map(|m| nu[m] * space.occupation(i, m) as f64).sum();
            C64::new(0.0, -e * duration).exp()
        })
        .collect();

    let mut matrix = DMatrix::<C64>::zeros(4, 4);
    let mut leakage: f64 = 0.0;
    let mut offresonant = 0.0;
    let mut max_norm_error: f64 = 0.0;
    for (col, occ) in QUBIT_STATES.iter().enumerate() {
        let psi0 = FockState::basis(&space, occ)?;
        let traj = evolve(&h0, &[drive], &psi0, &times, &evolve_options)?;
        max_norm_error = max_norm_error.max(traj.max_norm_error);
        let outside = |i: usize| !qubit.contains(&i) && i != i20;
        // trapezoid average over the samples
        let values: Vec<f64> = traj.states.iter().map(|s| s.population_where(outside)).collect();
        let inner: f64 = values[1..samples].iter().sum();
        offresonant += (inner + 0.5 * (values[0] + values[samples])) / samples as f64;
        let last = traj.states.last().expect("at least two samples");
        let lab = DVector::from_iterator(
            space.dimension(),
            last.amplitudes().iter().zip(&frame_phase).map(|(a, p)| a * p),
        );
        let interaction = &to_interaction * lab;
        for (row, &i) in qubit.iter().enumerate() {
            matrix[(row, col)] = interaction[i];
        }
        leakage += 1.0 - qubit.iter().map(|&i| interaction[i].norm_sqr()).sum::<f64>();
    }
    let target = DMatrix::from_diagonal(&DVector::from_iterator(4, TARGET_DIAGONAL.iter().map(|&d| C64::new(d, 0.0))));
    let fidelity = average_gate_fidelity(&matrix, &target);
    let achieved_phase = (matrix[(2, 2)] * matrix[(0, 0)].conj()).arg().rem_euclid(2.0 * PI);
    let conditional_phase =
        (matrix[(0, 0)] * matrix[(3, 3)] * (matrix[(1, 1)] * matrix[(2, 2)]).conj()).arg().rem_euclid(2.0 * PI);
    Ok(GateReport {
        achieved_phase,
        conditional_phase,
        fidelity,
        leakage: (leakage / 4.0).max(0.0),
        mean_offresonant_leakage: offresonant / 4.0,
        duration,
        rabi,
        drive_frequency,
        matrix: (0..4).map(|r| (0..4).map(|c| matrix[(r, c)]).collect()).collect(),
        max_norm_error,
        warnings,
    })
}
