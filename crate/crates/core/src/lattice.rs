//! Multi-junction Bose-Hubbard model: photon-mediated tunneling between
//! junctions, drive-induced tunneling between modes of one junction, plaquette
//! flux and exact diagonalization of small instances.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::coupling::CouplingMatrix;
use crate::dynamics::evolve::propagate_static;
use crate::dynamics::fit::fit_sinusoid;
use crate::error::{Error, Result};
use crate::fock::{annihilation, monomial, normal_ordered_monomial, FockSpace, FockState, OperatorMatrix};
use crate::jhamiltonian::{kerr_tensor, quartic_terms, KerrTensor, QuarticOptions, MAX_DIMENSION};
use crate::params::{mode_frequency, JunctionParams};

/// Resonator modes summed by default in the adiabatic elimination.
pub const DEFAULT_RESONATOR_MODES: usize = 50;
/// Minimum `|δ| / |g|` accepted by the adiabatic elimination.
pub const DISPERSIVE_RATIO: f64 = 10.0;
/// Number of trailing resonator modes whose contribution is reported.
pub const TAIL_MODES: usize = 10;

/// Drive applied to mode 1 of every junction to induce `0 ↔ 2` tunneling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrivePattern {
    /// `φ_i` per site (rad).
    pub phases: Vec<f64>,
    /// `α₁` (rad/s).
    pub amplitude: f64,
    /// `ω₁^dr` (rad/s).
    pub frequency: f64,
}

impl DrivePattern {
    /// Drive at `(ω₂ − ω₀)/2`, the two-photon bridge between modes 0 and 2.
    pub fn bridging(params: &JunctionParams, phases: Vec<f64>, amplitude: f64) -> Self {
        DrivePattern {
            phases,
            amplitude,
            frequency: 0.5 * (mode_frequency(params, 2) - mode_frequency(params, 0)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.frequency.is_finite() && self.phases.iter().all(|p| p.is_finite())) {
            return Err(Error::domain("lattice", "drive pattern must be finite"));
        }
        Ok(())
    }
}

/// Reduces an angle to `(−π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let r = phi.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// `2(φ_i − φ_{i+1})` reduced to `(−π, π]`.
pub fn plaquette_flux(pattern: &DrivePattern, i: usize) -> Result<f64> {
    if i + 1 >= pattern.phases.len() {
        return Err(Error::domain(
            "lattice",
            format!("plaquette {i} needs sites {i} and {} of {}", i + 1, pattern.phases.len()),
        ));
    }
    Ok(wrap_phase(2.0 * (pattern.phases[i] - pattern.phases[i + 1])))
}

/// Mean-field coherence `b̄₁ = −α₁e^{iφ}/(ω₁^dr − ω₁)` of the driven mode.
pub fn driven_coherence(amplitude: f64, phase: f64, drive_frequency: f64, omega1: f64) -> Result<C64> {
    let detuning = drive_frequency - omega1;
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::domain("lattice", "drive is resonant with mode 1; the coherence diverges"));
    }
    Ok(-C64::from_polar(amplitude, phase) / detuning)
}

/// `t_i^{(0,2)} = |U_{0,1,2}|·|b̄₁|²·e^{−2iφ_i}` per site.
pub fn drive_induced_tunneling(kerr: &KerrTensor, pattern: &DrivePattern, omega1: f64) -> Result<Vec<C64>> {
    pattern.validate()?;
    let u012 = kerr
        .u_triple(0, 1, 2)
        .ok_or_else(|| Error::domain("lattice", "Kerr tensor lacks U_{0,1,2}; retain at least three modes"))?
        .abs();
    pattern
        .phases
        .iter()
        .map(|&phi| {
            let b = driven_coherence(pattern.amplitude, phi, pattern.frequency, omega1)?;
            Ok(C64::from_polar(u012 * b.norm_sqr(), -2.0 * phi))
        })
        .collect()
}

/// Photon-mediated tunneling `t_{i,j}^{(m)} = Σ_n g_{m,n}^{(i)} g_{m,n}^{(j)*} / δ_{m,n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TunnelingReport {
    /// `t[m][i][j]` (rad/s); the diagonal is zero.
    pub t: Vec<Vec<Vec<C64>>>,
    /// `Σ_n |g_{m,n}^{(i)}|²/δ_{m,n}` per `[m][i]`, the resonator-induced frequency shift.
    pub lamb_shift: Vec<Vec<f64>>,
    pub resonator_modes: usize,
    /// Largest `|contribution of the last TAIL_MODES modes| / |t|` over nonzero entries.
    pub tail_fraction: f64,
}

/// Adiabatic elimination of the resonator. `couplings[i]` holds site `i`'s
/// `g_{m,n}`; `junction_frequencies[m]` and `resonator_frequencies[n]` give
/// `δ_{m,n} = ω_m − ω_n^res`. At most `n_res` resonator modes are summed.
pub fn adiabatic_tunneling(
    couplings: &[CouplingMatrix],
    resonator_frequencies: &[f64],
    junction_frequencies: &[f64],
    n_res: usize,
) -> Result<TunnelingReport> {
    let sites = couplings.len();
    if sites == 0 {
        return Err(Error::domain("lattice", "need at least one site"));
    }
    let modes = junction_frequencies.len();
    let n_res = n_res.min(resonator_frequencies.len());
    for (i, c) in couplings.iter().enumerate() {
        if c.junction_modes() < modes || c.resonator_modes() < n_res {
            return Err(Error::DimensionMismatch(format!(
                "site {i} couplings are {}x{}, need {modes}x{n_res}",
                c.junction_modes(),
                c.resonator_modes()
            )));
        }
    }
    for m in 0..modes {
        for n in 0..n_res {
            let delta = junction_frequencies[m] - resonator_frequencies[n];
            let g = couplings.iter().map(|c| c.g[m][n].norm()).fold(0.0, f64::max);
            if g > 0.0 && !(delta.abs() > DISPERSIVE_RATIO * g) {
                return Err(Error::domain(
                    "lattice",
                    format!(
                        "junction mode {m} and resonator mode {n} are not dispersive: |delta| = {:e} rad/s, |g| = {g:e} rad/s",
                        delta.abs()
                    ),
                ));
            }
        }
    }
    let zero = C64::new(0.0, 0.0);
    let mut t = vec![vec![vec![zero; sites]; sites]; modes];
    let mut lamb_shift = vec![vec![0.0; sites]; modes];
    let mut tail_fraction: f64 = 0.0;
    let tail_start = n_res.saturating_sub(TAIL_MODES);
    for m in 0..modes {
        for i in 0..sites {
            for j in 0..sites {
                let mut total = zero;
                let mut tail = zero;
                for n in 0..n_res {
                    let delta = junction_frequencies[m] - resonator_frequencies[n];
                    let term = couplings[i].g[m][n] * couplings[j].g[m][n].conj() / delta;
                    total += term;
                    if n >= tail_start {
                        tail += term;
                    }
                }
                if i == j {
                    lamb_shift[m][i] = total.re;
                } else {
                    t[m][i][j] = total;
                    if total.norm() > 0.0 && n_res > TAIL_MODES {
                        tail_fraction = tail_fraction.max(tail.norm() / total.norm());
                    }
                }
            }
        }
    }
    Ok(TunnelingReport {
        t,
        lamb_shift,
        resonator_modes: n_res,
        tail_fraction,
    })
}

/// Tunneling `−(t b_{from}† b_{to} + H.c.)` between two modes of one site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntraTunneling {
    pub site: usize,
    /// Local mode slots (indices into [`LatticeModel::modes`]).
    pub from: usize,
    pub to: usize,
    pub value: C64,
}

/// `Σ ω_m n̂ − ½Σ U_{m,n} b_m†b_n†b_n b_m − Σ_{i<j}(t_{ij} b_i†b_j + H.c.) − Σ(t′ b_m†b_{m′} + H.c.)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeModel {
    pub n_sites: usize,
    /// Junction mode index carried by each local slot, e.g. `[0, 2]`.
    pub modes: Vec<usize>,
    /// `ω` per slot (rad/s).
    pub onsite: Vec<f64>,
    pub kerr: KerrTensor,
    /// `t_inter[slot][i][j]` (rad/s).
    pub t_inter: Vec<Vec<Vec<C64>>>,
    pub t_intra: Vec<IntraTunneling>,
    /// Fock cutoff per slot, identical on every site.
    pub cutoffs: Vec<usize>,
}

impl LatticeModel {
    /// Model without tunneling; frequencies and Kerr terms from `params`.
    pub fn uncoupled(params: &JunctionParams, n_sites: usize, modes: Vec<usize>, cutoffs: Vec<usize>) -> Result<Self> {
        let needed = modes.iter().max().map_or(0, |m| m + 1);
        let kerr = kerr_tensor(params, needed.max(1))?;
        let onsite = modes.iter().map(|&m| mode_frequency(params, m)).collect();
        let k = modes.len();
        let model = LatticeModel {
            n_sites,
            onsite,
            kerr,
            t_inter: vec![vec![vec![C64::new(0.0, 0.0); n_sites]; n_sites]; k],
            t_intra: Vec::new(),
            cutoffs,
            modes,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn slots(&self) -> usize {
        self.modes.len()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.modes.len();
        if self.n_sites == 0 || k == 0 {
            return Err(Error::domain("lattice", "need at least one site and one mode"));
        }
        if self.onsite.len() != k || self.cutoffs.len() != k || self.t_inter.len() != k {
            return Err(Error::DimensionMismatch("onsite, cutoffs and t_inter need one entry per mode slot".into()));
        }
        if self.modes.iter().any(|&m| m >= self.kerr.n_modes) {
            return Err(Error::DimensionMismatch("Kerr tensor does not cover every mode slot".into()));
        }
        for (a, t) in self.t_inter.iter().enumerate() {
            if t.len() != self.n_sites || t.iter().any(|row| row.len() != self.n_sites) {
                return Err(Error::DimensionMismatch(format!("t_inter[{a}] is not {0}x{0}", self.n_sites)));
            }
            let scale = t.iter().flatten().map(|v| v.norm()).fold(0.0, f64::max);
            for i in 0..self.n_sites {
                for j in 0..self.n_sites {
                    if (t[i][j] - t[j][i].conj()).norm() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                        return Err(Error::domain(
                            "lattice",
                            format!("t_inter[{a}] is not hermitian at ({i}, {j})"),
                        ));
                    }
                }
            }
        }
        for term in &self.t_intra {
            if term.site >= self.n_sites || term.from >= k || term.to >= k || term.from == term.to {
                return Err(Error::domain(
                    "lattice",
                    format!("intra-site tunneling {term:?} does not name two distinct slots of an existing site"),
                ));
            }
        }
        Ok(())
    }

    pub fn space(&self) -> Result<FockSpace> {
        let site = FockSpace::new(self.cutoffs.clone())?;
        let space = site.repeat(self.n_sites)?;
        if space.dimension() > MAX_DIMENSION {
            return Err(Error::DimensionOverflow {
                dimension: space.dimension(),
                limit: MAX_DIMENSION,
            });
        }
        Ok(space)
    }

    /// Global mode index of `slot` on `site`.
    pub fn mode_index(&self, site: usize, slot: usize) -> usize {
        site * self.slots() + slot
    }

    /// Applies `b_slot^{(i)} → e^{iΛ_{i,slot}} b_slot^{(i)}` to the tunneling
    /// amplitudes, leaving the spectrum unchanged.
    pub fn gauge_transformed(&self, lambda: &[Vec<f64>]) -> Result<Self> {
        if lambda.len() != self.n_sites || lambda.iter().any(|l| l.len() != self.slots()) {
            return Err(Error::DimensionMismatch("gauge phases need one entry per site and slot".into()));
        }
        let mut out = self.clone();
        for (a, t) in out.t_inter.iter_mut().enumerate() {
            for i in 0..self.n_sites {
                for j in 0..self.n_sites {
                    t[i][j] *= C64::from_polar(1.0, lambda[i][a] - lambda[j][a]);
                }
            }
        }
        for term in &mut out.t_intra {
            term.value *= C64::from_polar(1.0, lambda[term.site][term.from] - lambda[term.site][term.to]);
        }
        Ok(out)
    }
}

/// Generalized Bose-Hubbard Hamiltonian of the model on `space`.
pub fn build_bh_hamiltonian(model: &LatticeModel, space: &FockSpace) -> Result<OperatorMatrix> {
    model.validate()?;
    let expected = model.space()?;
    if space != &expected {
        return Err(Error::DimensionMismatch("space does not match the model cutoffs".into()));
    }
    let k = model.slots();
    let mut parts = Vec::new();
    let onsite = OperatorMatrix::from_diagonal(space, |idx| {
        (0..model.n_sites)
            .flat_map(|i| (0..k).map(move |a| (i, a)))
            .map(|(i, a)| model.onsite[a] * space.occupation(idx, model.mode_index(i, a)) as f64)
            .sum()
    });
    parts.push(onsite);
    let kerr = OperatorMatrix::from_diagonal(space, |idx| {
        let mut e = 0.0;
        for i in 0..model.n_sites {
            for a in 0..k {
                let na = space.occupation(idx, model.mode_index(i, a)) as f64;
                for b in 0..k {
                    let nb = space.occupation(idx, model.mode_index(i, b)) as f64;
                    let pairs = if a == b { na * (na - 1.0) } else { na * nb };
                    e -= 0.5 * model.kerr.u(model.modes[a], model.modes[b]) * pairs;
                }
            }
        }
        e
    });
    parts.push(kerr);
    for a in 0..k {
        for i in 0..model.n_sites {
            for j in (i + 1)..model.n_sites {
                let t = model.t_inter[a][i][j];
                if t == C64::new(0.0, 0.0) {
                    continue;
                }
                let hop = monomial(space, &[(model.mode_index(i, a), 1, 0), (model.mode_index(j, a), 0, 1)])?;
                parts.push(hop.scaled(-t));
                parts.push(hop.adjoint().scaled(-t.conj()));
            }
        }
    }
    for term in &model.t_intra {
        let hop = monomial(
            space,
            &[(model.mode_index(term.site, term.from), 1, 0), (model.mode_index(term.site, term.to), 0, 1)],
        )?;
        parts.push(hop.scaled(-term.value));
        parts.push(hop.adjoint().scaled(-term.value.conj()));
    }
    let h = OperatorMatrix::sum(space, &parts)?;
    h.ensure_hermitian(1e-12)?;
    Ok(h)
}

/// Two sites with modes `{0, 2}`, one boson: real inter-site tunneling `t` on
/// both slots and intra-site `|t′|e^{−2iφ_i}`. Energies are taken in the frame
/// of the bridging drive, where mode 2 sits at `ω₂ − 2ω₁^dr = ω₀`.
pub fn plaquette_model(params: &JunctionParams, t: f64, t_prime: f64, phases: [f64; 2]) -> Result<LatticeModel> {
    let mut model = LatticeModel::uncoupled(params, 2, vec![0, 2], vec![1, 1])?;
    model.onsite[1] = model.onsite[0];
    for slot in &mut model.t_inter {
        slot[0][1] = C64::new(t, 0.0);
        slot[1][0] = C64::new(t, 0.0);
    }
    model.t_intra = phases
        .iter()
        .enumerate()
        .map(|(site, &phi)| IntraTunneling {
            site,
            from: 0,
            to: 1,
            value: C64::from_polar(t_prime, -2.0 * phi),
        })
        .collect();
    model.validate()?;
    Ok(model)
}

/// Eigenvalues of the model restricted to exactly `bosons` excitations, ascending.
pub fn sector_spectrum(model: &LatticeModel, bosons: usize) -> Result<Vec<f64>> {
    let space = model.space()?;
    let h = build_bh_hamiltonian(model, &space)?;
    let sector: Vec<usize> = (0..space.dimension())
        .filter(|&i| space.total_occupation(i) == bosons)
        .collect();
    if sector.is_empty() {
        return Err(Error::domain("lattice", format!("no states with {bosons} bosons under the cutoffs")));
    }
    let mut pos = vec![usize::MAX; space.dimension()];
    for (k, &i) in sector.iter().enumerate() {
        pos[i] = k;
    }
    let mut dense = nalgebra::DMatrix::<C64>::zeros(sector.len(), sector.len());
    for (r, c, v) in h.iter() {
        if pos[r] != usize::MAX && pos[c] != usize::MAX {
            dense[(pos[r], pos[c])] = v;
        }
    }
    let mut values: Vec<f64> = nalgebra::linalg::SymmetricEigen::new(dense).eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Two identical junction modes coupled to one resonator mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoJunctionSetup {
    pub omega_junction: f64,
    pub omega_resonator: f64,
    pub g: [f64; 2],
}

impl TwoJunctionSetup {
    /// Equal couplings `g = ratio·δ` with `δ = ω_j − ω_res`.
    pub fn dispersive(omega_junction: f64, delta: f64, g_over_delta: f64) -> Self {
        let g = g_over_delta * delta.abs();
        TwoJunctionSetup {
            omega_junction,
            omega_resonator: omega_junction - delta,
            g: [g, g],
        }
    }

    pub fn delta(&self) -> f64 {
        self.omega_junction - self.omega_resonator
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveModelReport {
    pub g_over_delta: f64,
    /// Angular frequency of the junction-2 population in the joint model.
    pub full_swap: f64,
    /// Same in the effective lattice model.
    pub effective_swap: f64,
    /// `2|t|` from the adiabatic elimination.
    pub predicted_swap: f64,
    pub relative_discrepancy: f64,
    pub max_norm_error: f64,
}

fn population_fit(h: &OperatorMatrix, start: &FockState, watch: usize, predicted: f64) -> Result<(f64, f64)> {
    let periods = 2.5;
    let samples = 500;
    let t_end = periods * 2.0 * PI / predicted;
    let times: Vec<f64> = (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    let traj = propagate_static(h, start, &times)?;
    let pops: Vec<f64> = traj
        .states
        .iter()
        .map(|s| s.population_where(|i| s.space().occupation(i, watch) == 1))
        .collect();
    let fit = fit_sinusoid(&times, &pops, 0.5 * predicted, 1.5 * predicted, 201)?;
    Ok((fit.angular_frequency, traj.max_norm_error))
}

/// Single excitation started on junction 1, evolved in the joint
/// junction–resonator model and in the effective two-site model built by
/// [`adiabatic_tunneling`]; compares the fitted swap frequencies.
pub fn validate_effective_model(setup: &TwoJunctionSetup) -> Result<EffectiveModelReport> {
    let delta = setup.delta();
    let g_over_delta = setup.g[0].abs().max(setup.g[1].abs()) / delta.abs();
    let couplings: Vec<CouplingMatrix> = setup
        .g
        .iter()
        .map(|&g| CouplingMatrix {
            g: vec![vec![C64::new(g, 0.0)]],
            form_factors: vec![vec![0.0]],
        })
        .collect();
    let report = adiabatic_tunneling(&couplings, &[setup.omega_resonator], &[setup.omega_junction], 1)?;
    let t = report.t[0][0][1];
    let predicted = 2.0 * t.norm();
    if predicted == 0.0 {
        return Ok(EffectiveModelReport {
            g_over_delta,
            full_swap: 0.0,
            effective_swap: 0.0,
            predicted_swap: 0.0,
            relative_discrepancy: 0.0,
            max_norm_error: 0.0,
        });
    }

    // joint model: junction 1, junction 2, resonator
    let space = FockSpace::new(vec![1, 1, 1])?;
    let mut parts = vec![OperatorMatrix::from_diagonal(&space, |i| {
        setup.omega_junction * (space.occupation(i, 0) + space.occupation(i, 1)) as f64
            + setup.omega_resonator * space.occupation(i, 2) as f64
    })];
    for (site, &g) in setup.g.iter().enumerate() {
        let hop = monomial(&space, &[(site, 1, 0), (2, 0, 1)])?;
        parts.push(hop.scaled_real(g));
        parts.push(hop.adjoint().scaled_real(g));
    }
    let h_full = OperatorMatrix::sum(&space, &parts)?;
    let start = FockState::basis(&space, &[1, 0, 0])?;
    let (full_swap, err_full) = population_fit(&h_full, &start, 1, predicted)?;

    let model = LatticeModel {
        n_sites: 2,
        modes: vec![0],
        onsite: vec![setup.omega_junction],
        kerr: KerrTensor {
            n_modes: 1,
            e_c: 0.0,
            pairwise: vec![vec![0.0]],
            triple: Vec::new(),
            quad: Vec::new(),
            overlaps: vec![0.0],
        },
        t_inter: vec![report.t[0].clone()],
        t_intra: Vec::new(),
        cutoffs: vec![1],
    };
    model.validate()?;
    let lattice_space = model.space()?;
    let h_eff = build_bh_hamiltonian(&model, &lattice_space)?;
    let start = FockState::basis(&lattice_space, &[1, 0])?;
    let (effective_swap, err_eff) = population_fit(&h_eff, &start, 1, predicted)?;
    Ok(EffectiveModelReport {
        g_over_delta,
        full_swap,
        effective_swap,
        predicted_swap: predicted,
        relative_discrepancy: (full_swap - effective_swap).abs() / full_swap,
        max_norm_error: err_full.max(err_eff),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveValidationOptions {
    /// Fock cutoffs of modes 0, 1, 2.
    pub cutoffs: [usize; 3],
    /// Observation window in units of the predicted swap period.
    pub swap_periods: f64,
    pub samples: usize,
}

impl Default for DriveValidationOptions {
    fn default() -> Self {
        DriveValidationOptions {
            cutoffs: [2, 8, 2],
            swap_periods: 4.0,
            samples: 800,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveValidationReport {
    /// `|b̄₁|` from the mean-field formula.
    pub coherence: f64,
    /// `2|t′|` (rad/s).
    pub predicted_swap: f64,
    /// Fitted angular frequency of the `|0,·,1⟩` population.
    pub oscillation_frequency: f64,
    /// Peak `|0,·,1⟩` population, `2 × ` the fitted oscillation amplitude.
    pub max_transfer: f64,
    /// Coupling recovered from the detuned Rabi law, `Ω·√P_max`.
    pub simulated_swap: f64,
    /// `Ω·√(1 − P_max)`: Stark detuning of the bridge.
    pub residual_detuning: f64,
    pub relative_error: f64,
    pub max_norm_error: f64,
}

fn coherent_amplitudes(space: &FockSpace, occupations: &[usize], mode: usize, beta: C64) -> Result<FockState> {
    let cutoff = space.cutoffs()[mode];
    let mut amps = nalgebra::DVector::from_element(space.dimension(), C64::new(0.0, 0.0));
    let mut occ = occupations.to_vec();
    let mut coeff = C64::new((-0.5 * beta.norm_sqr()).exp(), 0.0);
    for n in 0..=cutoff {
        if n > 0 {
            coeff *= beta / (n as f64).sqrt();
        }
        occ[mode] = n;
        let i = space.index_of(&occ).ok_or_else(|| Error::domain("lattice", "occupation outside the Fock space"))?;
        amps[i] = coeff;
    }
    FockState::from_amplitudes(space, amps)?.normalized()
}

/// Three-mode junction in the frame rotating at `(ω₀, ω₁^dr, ω₀ + 2ω₁^dr)`
/// with `ω₁^dr = (ω₂ − ω₀)/2`: every full-quartic term that is stationary in
/// that frame is kept, mode 1 carries the drive, and mode 1 starts in the
/// coherent state `b̄₁` with one excitation in mode 0. The `0 → 2` transfer
/// `P(t) = P_max sin²(Ωt/2)` gives the coupling `Ω√P_max`, compared with
/// `2|t′|` from [`drive_induced_tunneling`].
pub fn validate_drive_induced(
    params: &JunctionParams,
    amplitude: f64,
    phase: f64,
    options: &DriveValidationOptions,
) -> Result<DriveValidationReport> {
    if params.n_modes() < 3 {
        return Err(Error::domain("lattice", "drive-induced tunneling needs three junction modes"));
    }
    let three = params.with_n_modes(3)?;
    let kerr = kerr_tensor(&three, 3)?;
    let pattern = DrivePattern::bridging(&three, vec![phase], amplitude);
    pattern.validate()?;
    let omega: Vec<f64> = (0..3).map(|m| mode_frequency(&three, m)).collect();
    let t_prime = drive_induced_tunneling(&kerr, &pattern, omega[1])?[0];
    let b_bar = driven_coherence(amplitude, phase, pattern.frequency, omega[1])?;
    let predicted = 2.0 * t_prime.norm();
    if predicted == 0.0 {
        return Err(Error::domain("lattice", "drive amplitude is zero; nothing to validate"));
    }

    let space = FockSpace::new(options.cutoffs.to_vec())?;
    let nu = [omega[0], pattern.frequency, omega[0] + 2.0 * pattern.frequency];
    let mut parts = vec![OperatorMatrix::from_diagonal(&space, |i| {
        (0..3).map(|m| (omega[m] - nu[m]) * space.occupation(i, m) as f64).sum()
    })];
    let scale = omega.iter().cloned().fold(0.0, f64::max);
    for (powers, c) in quartic_terms(&three, 3, QuarticOptions::FULL_QUARTIC_ONLY) {
        let rotation: f64 = powers.iter().zip(&nu).map(|(&(cr, an), w)| w * (cr as f64 - an as f64)).sum();
        if rotation.abs() <= 1e-9 * scale {
            parts.push(normal_ordered_monomial(&space, &powers)?.scaled_real(c));
        }
    }
    let b1 = annihilation(&space, 1)?;
    let phase_factor = C64::from_polar(amplitude, phase);
    parts.push(b1.scaled(phase_factor));
    parts.push(b1.adjoint().scaled(phase_factor.conj()));
    let h = OperatorMatrix::sum(&space, &parts)?;
    h.ensure_hermitian(1e-12)?;

    let start = coherent_amplitudes(&space, &[1, 0, 0], 1, b_bar)?;
    let t_end = options.swap_periods * 2.0 * PI / predicted;
    let samples = options.samples.max(8);
    let times: Vec<f64> = (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    let traj = propagate_static(&h, &start, &times)?;
    let pops: Vec<f64> = traj
        .states
        .iter()
        .map(|s| s.population_where(|i| space.occupation(i, 0) == 0 && space.occupation(i, 2) == 1))
        .collect();
    let fit = fit_sinusoid(&times, &pops, 0.2 * predicted, 5.0 * predicted, 400)?;
    let max_transfer = (2.0 * fit.amplitude()).min(1.0);
    let simulated = fit.angular_frequency * max_transfer.sqrt();
    Ok(DriveValidationReport {
        coherence: b_bar.norm(),
        predicted_swap: predicted,
        oscillation_frequency: fit.angular_frequency,
        max_transfer,
        simulated_swap: simulated,
        residual_detuning: fit.angular_frequency * (1.0 - max_transfer).sqrt(),
        relative_error: (simulated - predicted).abs() / predicted,
        max_norm_error: traj.max_norm_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> JunctionParams {
        JunctionParams::from_ratios(1.0, 10.0, 1.0, 1.0, 3).unwrap()
    }

    #[test]
    fn flux_examples() {
        let uniform = DrivePattern {
            phases: vec![0.3; 4],
            amplitude: 1.0,
            frequency: 1.0,
        };
        assert_eq!(plaquette_flux(&uniform, 0).unwrap(), 0.0);
        let eighth = DrivePattern {
            phases: (0..4).map(|i| i as f64 * PI / 8.0).collect(),
            ..uniform.clone()
        };
        assert!((plaquette_flux(&eighth, 1).unwrap() + PI / 4.0).abs() < 1e-15);
        let half = DrivePattern {
            phases: (0..4).map(|i| i as f64 * PI / 2.0).collect(),
            ..uniform.clone()
        };
        assert!((plaquette_flux(&half, 2).unwrap() - PI).abs() < 1e-15);
        assert!(plaquette_flux(&half, 3).is_err());
    }

    #[test]
    fn drive_induced_examples() {
        let p = params();
        let kerr = kerr_tensor(&p, 3).unwrap();
        let w1 = mode_frequency(&p, 1);
        let off = DrivePattern {
            phases: vec![0.0],
            amplitude: 0.0,
            frequency: w1 - 2.0,
        };
        assert_eq!(drive_induced_tunneling(&kerr, &off, w1).unwrap()[0], C64::new(0.0, 0.0));
        // |b̄| = 1 at φ = 0
        let unit = DrivePattern {
            phases: vec![0.0],
            amplitude: 2.0,
            frequency: w1 - 2.0,
        };
        let t = drive_induced_tunneling(&kerr, &unit, w1).unwrap()[0];
        assert!((t - C64::new(kerr.u_triple(0, 1, 2).unwrap().abs(), 0.0)).norm() < 1e-14);
        let resonant = DrivePattern {
            frequency: w1,
            ..unit.clone()
        };
        assert!(drive_induced_tunneling(&kerr, &resonant, w1).is_err());
    }

    fn single(g: f64) -> CouplingMatrix {
        CouplingMatrix {
            g: vec![vec![C64::new(g, 0.0)]],
            form_factors: vec![vec![0.0]],
        }
    }

    #[test]
    fn one_term_tunneling() {
        let (g, delta) = (0.3, 7.0);
        let r = adiabatic_tunneling(&[single(g), single(g)], &[10.0 - delta], &[10.0], 50).unwrap();
        assert!((r.t[0][0][1].re - g * g / delta).abs() < 1e-15);
        assert_eq!(r.t[0][0][1], r.t[0][1][0]);
        assert_eq!(r.resonator_modes, 1);
        // fem-scale arithmetic: g = 2π·24 MHz, δ = 2π·500 MHz
        let two_pi = 2.0 * PI;
        let (g, delta) = (two_pi * 24e6, two_pi * 500e6);
        let r = adiabatic_tunneling(&[single(g), single(g)], &[two_pi * 5e9 - delta], &[two_pi * 5e9], 1).unwrap();
        assert!((r.t[0][0][1].re / (two_pi * 1.152e6) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn near_resonance_rejected_with_indices() {
        let err = adiabatic_tunneling(&[single(1.0)], &[9.5], &[10.0], 1).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mode 0") && msg.contains("resonator mode 0"), "{msg}");
    }

    #[test]
    fn parity_selection_zeroes_tunneling() {
        // odd junction mode couples only to odd-profile resonator modes
        let g = CouplingMatrix {
            g: vec![vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)], vec![C64::new(0.0, 0.0), C64::new(0.0, 0.0)]],
            form_factors: vec![vec![0.0; 2]; 2],
        };
        let r = adiabatic_tunneling(&[g.clone(), g], &[0.0, 30.0], &[20.0, 50.0], 2).unwrap();
        assert_eq!(r.t[1][0][1], C64::new(0.0, 0.0));
        assert!(r.t[0][0][1].norm() > 0.0);
    }

    #[test]
    fn two_site_single_particle() {
        let p = params();
        let mut model = LatticeModel::uncoupled(&p, 2, vec![0], vec![1]).unwrap();
        let t = C64::new(0.2, 0.1);
        model.t_inter[0][0][1] = t;
        model.t_inter[0][1][0] = t.conj();
        let e = sector_spectrum(&model, 1).unwrap();
        let w = mode_frequency(&p, 0);
        assert!((e[0] - (w - t.norm())).abs() < 1e-12);
        assert!((e[1] - (w + t.norm())).abs() < 1e-12);
    }

    #[test]
    fn uncoupled_is_direct_sum() {
        let p = params();
        let model = LatticeModel::uncoupled(&p, 2, vec![0, 1], vec![2, 2]).unwrap();
        let space = model.space().unwrap();
        let h = build_bh_hamiltonian(&model, &space).unwrap();
        let kerr = &model.kerr;
        let idx = space.index_of(&[2, 0, 1, 1]).unwrap();
        let w: Vec<f64> = (0..2).map(|m| mode_frequency(&p, m)).collect();
        let expected = 2.0 * w[0] - kerr.u(0, 0) + w[0] + w[1] - kerr.u(0, 1);
        assert!((h.get(idx, idx).re - expected).abs() < 1e-12);
        assert!(h.iter().all(|(r, c, _)| r == c));
    }

    #[test]
    fn hamiltonian_conserves_boson_number() {
        let p = params();
        let mut model = plaquette_model(&p, 0.1, 0.05, [0.2, 0.9]).unwrap();
        model.cutoffs = vec![2, 2];
        let space = model.space().unwrap();
        let h = build_bh_hamiltonian(&model, &space).unwrap();
        let n = crate::fock::total_number(&space);
        assert!(h.commutator(&n).unwrap().max_abs() <= 1e-12);
        assert!(h.hermiticity_deviation() <= 1e-12 * h.max_abs());
    }

    #[test]
    fn non_hermitian_input_rejected() {
        let p = params();
        let mut model = LatticeModel::uncoupled(&p, 2, vec![0], vec![1]).unwrap();
        model.t_inter[0][0][1] = C64::new(0.0, 0.3);
        model.t_inter[0][1][0] = C64::new(0.0, 0.3);
        assert!(model.validate().is_err());
    }

    #[test]
    fn flux_changes_spectrum() {
        let p = params();
        let a = sector_spectrum(&plaquette_model(&p, 0.1, 0.1, [0.0, 0.0]).unwrap(), 1).unwrap();
        let b = sector_spectrum(&plaquette_model(&p, 0.1, 0.1, [0.0, PI / 4.0]).unwrap(), 1).unwrap();
        let diff = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff > 1e-3 * 0.1, "{diff}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn gauge_invariance(l in proptest::collection::vec(-PI..PI, 4), p0 in -PI..PI, p1 in -PI..PI) {
            let p = params();
            let model = plaquette_model(&p, 0.1, 0.07, [p0, p1]).unwrap();
            let lambda = vec![vec![l[0], l[1]], vec![l[2], l[3]]];
            let moved = model.gauge_transformed(&lambda).unwrap();
            let a = sector_spectrum(&model, 1).unwrap();
            let b = sector_spectrum(&moved, 1).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn same_flux_same_spectrum(p0 in -PI..PI, p1 in -PI..PI, shift in -PI..PI) {
            let p = params();
            let a = sector_spectrum(&plaquette_model(&p, 0.1, 0.07, [p0, p1]).unwrap(), 1).unwrap();
            let b = sector_spectrum(&plaquette_model(&p, 0.1, 0.07, [p0 + shift, p1 + shift]).unwrap(), 1).unwrap();
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }

        #[test]
        fn adiabatic_tunneling_symmetric_for_real_g(g in proptest::collection::vec(-1.0f64..1.0, 6)) {
            let sites: Vec<CouplingMatrix> = g.chunks(2).map(|c| CouplingMatrix {
                g: vec![c.iter().map(|&v| C64::new(v, 0.0)).collect()],
                form_factors: vec![vec![0.0]; 2],
            }).collect();
            let r = adiabatic_tunneling(&sites, &[0.0, 40.0], &[20.0], 2).unwrap();
            for i in 0..3 {
                for j in 0..3 {
                    prop_assert_eq!(r.t[0][i][j], r.t[0][j][i]);
                    prop_assert_eq!(r.t[0][i][j].im, 0.0);
                }
            }
        }
    }

    #[test]
    fn effective_model_agrees_in_dispersive_limit() {
        let coarse = validate_effective_model(&TwoJunctionSetup::dispersive(10.0, 2.0, 0.05)).unwrap();
        assert!(coarse.relative_discrepancy < 0.1, "{coarse:?}");
        assert!(coarse.max_norm_error < 1e-8);
        let none = validate_effective_model(&TwoJunctionSetup::dispersive(10.0, 2.0, 0.0)).unwrap();
        assert_eq!(none.relative_discrepancy, 0.0);
    }

    #[test]
    fn driven_bridge_recovers_tunneling() {
        let r = validate_drive_induced(&params(), 2.0, 0.3, &DriveValidationOptions::default()).unwrap();
        assert!(r.relative_error < 0.1, "{r:?}");
        assert!(r.max_norm_error < 1e-8);
        assert!(r.max_transfer < 1.0 && r.residual_detuning > 0.0);
    }
}
