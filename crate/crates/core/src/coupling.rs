//! Resonator modes, junction–photon form factors, coupling constants and the
//! joint junction + resonator Hamiltonian.

use std::f64::consts::{PI, SQRT_2};

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{normal_ordered_monomial, FockSpace, OperatorMatrix};
use crate::jhamiltonian::{h2_on_leading_modes, h4_on_leading_modes, QuarticOptions, MAX_DIMENSION};
use crate::params::{mode_frequency, profile_at_phase, JunctionParams, ModeBasis};
use crate::quadrature::integrate;
use crate::units::{ELEMENTARY_CHARGE, HBAR, SPEED_OF_LIGHT};

const QUAD_ABS_TOL: f64 = 1e-14;
const QUAD_REL_TOL: f64 = 1e-13;

/// Coplanar resonator with grounded ends, modes indexed from 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResonatorSpec {
    /// Length (m).
    pub l_res: f64,
    pub mode_count: usize,
    /// Zero-point field `E_n⁰` per mode (V/m).
    pub zero_point_fields: Vec<f64>,
    /// Phase velocity (m/s).
    #[serde(default = "default_phase_velocity")]
    pub phase_velocity: f64,
}

fn default_phase_velocity() -> f64 {
    SPEED_OF_LIGHT
}

impl ResonatorSpec {
    /// Resonator with the same zero-point field in every mode.
    pub fn uniform(l_res: f64, mode_count: usize, zero_point_field: f64) -> Result<Self> {
        let spec = ResonatorSpec {
            l_res,
            mode_count,
            zero_point_fields: vec![zero_point_field; mode_count],
            phase_velocity: SPEED_OF_LIGHT,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.l_res.is_finite() && self.l_res > 0.0) {
            return Err(Error::domain("coupling", format!("l_res must be positive (got {})", self.l_res)));
        }
        if !(self.phase_velocity.is_finite() && self.phase_velocity > 0.0) {
            return Err(Error::domain(
                "coupling",
                format!("phase_velocity must be positive (got {})", self.phase_velocity),
            ));
        }
        if self.mode_count == 0 {
            return Err(Error::domain("coupling", "resonator needs at least one mode"));
        }
        if self.zero_point_fields.len() != self.mode_count {
            return Err(Error::domain(
                "coupling",
                format!(
                    "{} zero-point fields given for {} resonator modes",
                    self.zero_point_fields.len(),
                    self.mode_count
                ),
            ));
        }
        if let Some(e) = self.zero_point_fields.iter().find(|e| !(e.is_finite() && **e >= 0.0)) {
            return Err(Error::domain("coupling", format!("zero-point fields must be non-negative (got {e})")));
        }
        Ok(())
    }

    /// `ω_n^res = π(n+1)v/L_res`.
    pub fn frequency(&self, n: usize) -> f64 {
        PI * (n + 1) as f64 * self.phase_velocity / self.l_res
    }

    pub fn frequencies(&self) -> Vec<f64> {
        (0..self.mode_count).map(|n| self.frequency(n)).collect()
    }

    fn check_mode(&self, n: usize) -> Result<()> {
        if n >= self.mode_count {
            return Err(Error::ModeIndex {
                index: n,
                n_modes: self.mode_count,
            });
        }
        Ok(())
    }

    /// `ℰ_n(x)` with `x` measured from the resonator center: cosine for even
    /// `n`, sine for odd `n`, wavenumber `π(n+1)/L_res`.
    pub fn profile(&self, n: usize, x: f64) -> f64 {
        let k = PI * (n + 1) as f64 / self.l_res;
        if n.is_multiple_of(2) {
            (k * x).cos()
        } else {
            (k * x).sin()
        }
    }
}

/// Placement of a junction inside the resonator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JunctionGeometry {
    /// Junction center measured from the resonator center (m).
    pub center: f64,
    /// Effective distance between the superconducting layers (m).
    pub delta_z: f64,
}

impl JunctionGeometry {
    pub fn centered(delta_z: f64) -> Self {
        JunctionGeometry { center: 0.0, delta_z }
    }
}

fn check_inside(res: &ResonatorSpec, l_x: f64, center: f64) -> Result<()> {
    let half = 0.5 * res.l_res;
    if center - 0.5 * l_x < -half * (1.0 + 1e-12) || center + 0.5 * l_x > half * (1.0 + 1e-12) {
        return Err(Error::domain(
            "coupling",
            format!(
                "junction [{:e}, {:e}] m extends outside the resonator [{:e}, {:e}] m",
                center - 0.5 * l_x,
                center + 0.5 * l_x,
                -half,
                half
            ),
        ));
    }
    Ok(())
}

/// `ℰ_{n,m} = ∫ ℰ_n(x) Ξ_m(x) dx/L_x` over the junction, by adaptive quadrature.
pub fn form_factor(res: &ResonatorSpec, basis: &ModeBasis, junction_center: f64, n: usize, m: usize) -> Result<f64> {
    res.check_mode(n)?;
    basis.frequency(m)?;
    let l_x = basis.params().l_x();
    check_inside(res, l_x, junction_center)?;
    // integrate in the junction phase u = πξ/L_x
    let f = |u: f64| res.profile(n, junction_center + u * l_x / PI) * profile_at_phase(m, u) / PI;
    integrate(f, -PI / 2.0, PI / 2.0, QUAD_ABS_TOL, QUAD_REL_TOL)
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        1.0 - z * z / 6.0 + z.powi(4) / 120.0
    } else {
        z.sin() / z
    }
}

/// Closed-form `ℰ_{n,n}` for a centered junction, `L̃ = πL_x/(2L_res)`;
/// available for `n ≤ 2`.
pub fn centered_form_factor(n: usize, l_tilde: f64) -> Option<f64> {
    let l = l_tilde;
    match n {
        0 => Some(sinc(l)),
        1 => {
            // 8√2 L̃ cos 2L̃/(π² − 16L̃²) with the removable pole at L̃ = π/4 cancelled
            let u = PI / 4.0 - l;
            Some(8.0 * SQRT_2 * l / (PI + 4.0 * l) * 0.5 * sinc(2.0 * u))
        }
        2 => {
            // 3√2 L̃ sin 3L̃/(π² − 9L̃²) with the pole at L̃ = π/3 cancelled
            Some(3.0 * SQRT_2 * l / (PI + 3.0 * l) * sinc(PI - 3.0 * l))
        }
        _ => None,
    }
}

/// `L̃ = πL_x/(2L_res)`.
pub fn reduced_length(res: &ResonatorSpec, l_x: f64) -> f64 {
    PI * l_x / (2.0 * res.l_res)
}

/// `g_{m,n} = 2e δ_z E_n⁰ sqrt(ω_m/16E_C) ℰ_{n,m} / ħ` in rad/s.
pub fn coupling_g(
    res: &ResonatorSpec,
    params: &JunctionParams,
    geometry: &JunctionGeometry,
    m: usize,
    n: usize,
) -> Result<f64> {
    let basis = ModeBasis::new(&params.with_n_modes(params.n_modes().max(m + 1))?);
    let e = form_factor(res, &basis, geometry.center, n, m)?;
    Ok(coupling_from_form_factor(res, params, geometry, m, n, e))
}

fn coupling_from_form_factor(
    res: &ResonatorSpec,
    params: &JunctionParams,
    geometry: &JunctionGeometry,
    m: usize,
    n: usize,
    form: f64,
) -> f64 {
    let dipole = 2.0 * ELEMENTARY_CHARGE * geometry.delta_z * res.zero_point_fields[n];
    dipole * (mode_frequency(params, m) / (16.0 * params.e_c())).sqrt() * form / HBAR
}

/// Couplings of every junction mode to every resonator mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CouplingMatrix {
    /// `g[m][n]` in rad/s, junction mode `m`, resonator mode `n`.
    pub g: Vec<Vec<C64>>,
    /// `form_factors[n][m] = ℰ_{n,m}`.
    pub form_factors: Vec<Vec<f64>>,
}

impl CouplingMatrix {
    pub fn junction_modes(&self) -> usize {
        self.g.len()
    }

    pub fn resonator_modes(&self) -> usize {
        self.g.first().map_or(0, Vec::len)
    }

    pub fn max_abs(&self) -> f64 {
        self.g.iter().flatten().map(|g| g.norm()).fold(0.0, f64::max)
    }

    /// All couplings set to zero.
    pub fn zeros(junction_modes: usize, resonator_modes: usize) -> Self {
        CouplingMatrix {
            g: vec![vec![C64::new(0.0, 0.0); resonator_modes]; junction_modes],
            form_factors: vec![vec![0.0; junction_modes]; resonator_modes],
        }
    }
}

/// Couplings of the junction's retained modes to all resonator modes,
/// evaluated in parallel over `(m, n)`.
pub fn coupling_matrix(res: &ResonatorSpec, params: &JunctionParams, geometry: &JunctionGeometry) -> Result<CouplingMatrix> {
    res.validate()?;
    let basis = ModeBasis::new(params);
    let pairs: Vec<(usize, usize)> = (0..params.n_modes())
        .flat_map(|m| (0..res.mode_count).map(move |n| (m, n)))
        .collect();
    let values = pairs
        .par_iter()
        .map(|&(m, n)| {
            let form = form_factor(res, &basis, geometry.center, n, m)?;
            Ok((form, coupling_from_form_factor(res, params, geometry, m, n, form)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = CouplingMatrix::zeros(params.n_modes(), res.mode_count);
    for (&(m, n), &(form, g)) in pairs.iter().zip(&values) {
        out.form_factors[n][m] = form;
        out.g[m][n] = C64::new(g, 0.0);
    }
    Ok(out)
}

/// `H = H² + H⁴(rwa) + Σ ω_n^res a_n†a_n + Σ (g_{m,n} a_n b_m† + H.c.)` on a
/// space whose first `junction_modes` modes are plasmons and whose remaining
/// modes are resonator modes 0, 1, ….
pub fn build_joint_hamiltonian(
    params: &JunctionParams,
    res: &ResonatorSpec,
    couplings: &CouplingMatrix,
    space: &FockSpace,
    junction_modes: usize,
) -> Result<OperatorMatrix> {
    if space.dimension() > MAX_DIMENSION {
        return Err(Error::DimensionOverflow {
            dimension: space.dimension(),
            limit: MAX_DIMENSION,
        });
    }
    let resonator_modes = space.n_modes().checked_sub(junction_modes).ok_or_else(|| {
        Error::DimensionMismatch(format!(
            "space has {} modes, fewer than the {junction_modes} junction modes",
            space.n_modes()
        ))
    })?;
    if junction_modes > params.n_modes() || junction_modes > couplings.junction_modes() {
        return Err(Error::DimensionMismatch(format!(
            "{junction_modes} junction modes requested but only {} parameters / {} coupling rows available",
            params.n_modes(),
            couplings.junction_modes()
        )));
    }
    if resonator_modes > res.mode_count || resonator_modes > couplings.resonator_modes() {
        return Err(Error::DimensionMismatch(format!(
            "{resonator_modes} resonator modes requested but the resonator has {}",
            res.mode_count
        )));
    }
    let mut parts = vec![h2_on_leading_modes(params, space, junction_modes)];
    if junction_modes > 0 {
        parts.push(h4_on_leading_modes(params, space, junction_modes, QuarticOptions::RWA)?);
    }
    let total = space.n_modes();
    let powers = |entries: &[(usize, (usize, usize))]| {
        let mut p = vec![(0, 0); total];
        for &(mode, pw) in entries {
            p[mode] = pw;
        }
        p
    };
    for n in 0..resonator_modes {
        let mode = junction_modes + n;
        parts.push(normal_ordered_monomial(space, &powers(&[(mode, (1, 1))]))?.scaled_real(res.frequency(n)));
        for m in 0..junction_modes {
            let g = couplings.g[m][n];
            if g == C64::new(0.0, 0.0) {
                continue;
            }
            let term = normal_ordered_monomial(space, &powers(&[(m, (1, 0)), (mode, (0, 1))]))?.scaled(g);
            parts.push(term.adjoint());
            parts.push(term);
        }
    }
    OperatorMatrix::sum(space, &parts)
}
