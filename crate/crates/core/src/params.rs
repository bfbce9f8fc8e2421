//! Junction parameters, their derivation from SI material inputs, and the
//! plasmon mode basis of a rectangular junction with open (zero-current) ends.
//!
//! Mode `m` has frequency `ω_m = ω_pl·sqrt(1 + (π m λ_J / L_x)²)` and profile
//! `Ξ_0 = 1`, `Ξ_m = √2 sin(π m x / L_x)` for odd `m`, `Ξ_m = √2 cos(π m x / L_x)`
//! for even `m`, with `x ∈ [−L_x/2, L_x/2]` and `∫ Ξ_m Ξ_n dx/L_x = δ_mn`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::diagnostics::Warning;
use crate::error::{Error, Result};
use crate::units::{ELEMENTARY_CHARGE, FLUX_QUANTUM, VACUUM_PERMEABILITY};

/// Minimum E_J / E_C accepted without an explicit override.
pub const TRANSMON_RATIO_MIN: f64 = 10.0;

/// θ_ZPF above which a quantization warning is attached.
pub const THETA_ZPF_WARNING: f64 = 0.5;

/// Physical parameters of one extended junction. Energies in rad/s, lengths in m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJunctionParams")]
pub struct JunctionParams {
    e_j: f64,
    e_c: f64,
    lambda_j: f64,
    l_x: f64,
    omega_pl: f64,
    n_modes: usize,
    #[serde(skip_serializing_if = "std::ops::Not::not", default)]
    allow_non_transmon: bool,
}

#[derive(Deserialize)]
struct RawJunctionParams {
    e_j: f64,
    e_c: f64,
    lambda_j: f64,
    l_x: f64,
    n_modes: usize,
    #[serde(default)]
    allow_non_transmon: bool,
    // Derived; accepted on input for round-tripping but recomputed.
    #[allow(dead_code)]
    #[serde(default)]
    omega_pl: Option<f64>,
}

impl TryFrom<RawJunctionParams> for JunctionParams {
    type Error = Error;

    fn try_from(raw: RawJunctionParams) -> Result<Self> {
        Self::build(
            raw.e_j,
            raw.e_c,
            raw.lambda_j,
            raw.l_x,
            raw.n_modes,
            raw.allow_non_transmon,
        )
    }
}

impl JunctionParams {
    /// Validated constructor. Requires `E_J / E_C ≥ 10`.
    pub fn new(e_j: f64, e_c: f64, lambda_j: f64, l_x: f64, n_modes: usize) -> Result<Self> {
        Self::build(e_j, e_c, lambda_j, l_x, n_modes, false)
    }

    /// Same as [`JunctionParams::new`] but skips the transmon-regime guard.
    pub fn new_any_regime(
        e_j: f64,
        e_c: f64,
        lambda_j: f64,
        l_x: f64,
        n_modes: usize,
    ) -> Result<Self> {
        Self::build(e_j, e_c, lambda_j, l_x, n_modes, true)
    }

    /// Builds parameters from the plasma frequency and charging energy,
    /// `E_J = ω_pl² / 8E_C`.
    pub fn from_plasma(
        omega_pl: f64,
        e_c: f64,
        lambda_j: f64,
        l_x: f64,
        n_modes: usize,
    ) -> Result<Self> {
        if !(omega_pl > 0.0 && e_c > 0.0) {
            return Err(Error::domain(
                "params",
                format!("omega_pl and e_c must be positive (got {omega_pl}, {e_c})"),
            ));
        }
        Self::new(omega_pl * omega_pl / (8.0 * e_c), e_c, lambda_j, l_x, n_modes)
    }

    /// Dimensionless set-up used throughout the figures: `ω_pl / E_C` and
    /// `λ_J / L_x` fixed, with `E_C` as the energy unit and `λ_J` as the length unit.
    pub fn from_ratios(
        e_c: f64,
        plasma_over_ec: f64,
        lambda_j: f64,
        inv_length_ratio: f64,
        n_modes: usize,
    ) -> Result<Self> {
        if !(inv_length_ratio > 0.0) {
            return Err(Error::domain(
                "params",
                format!("lambda_J / L_x must be positive (got {inv_length_ratio})"),
            ));
        }
        Self::from_plasma(
            plasma_over_ec * e_c,
            e_c,
            lambda_j,
            lambda_j / inv_length_ratio,
            n_modes,
        )
    }

    fn build(
        e_j: f64,
        e_c: f64,
        lambda_j: f64,
        l_x: f64,
        n_modes: usize,
        allow_non_transmon: bool,
    ) -> Result<Self> {
        let positive = [("e_j", e_j), ("e_c", e_c), ("lambda_j", lambda_j), ("l_x", l_x)];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(
                    "params",
                    format!("{name} must be positive and finite (got {value})"),
                ));
            }
        }
        if n_modes == 0 {
            return Err(Error::domain("params", "n_modes must be at least 1"));
        }
        let ratio = e_j / e_c;
        if !allow_non_transmon && ratio < TRANSMON_RATIO_MIN {
            return Err(Error::domain(
                "params",
                format!(
                    "E_J/E_C = {ratio:.3} is below {TRANSMON_RATIO_MIN}; set allow_non_transmon to override"
                ),
            ));
        }
        Ok(JunctionParams {
            e_j,
            e_c,
            lambda_j,
            l_x,
            omega_pl: (8.0 * e_j * e_c).sqrt(),
            n_modes,
            allow_non_transmon,
        })
    }

    pub fn e_j(&self) -> f64 {
        self.e_j
    }

    pub fn e_c(&self) -> f64 {
        self.e_c
    }

    pub fn lambda_j(&self) -> f64 {
        self.lambda_j
    }

    pub fn l_x(&self) -> f64 {
        self.l_x
    }

    /// Plasma frequency `sqrt(8 E_J E_C)`.
    pub fn omega_pl(&self) -> f64 {
        self.omega_pl
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// `λ_J / L_x`.
    pub fn inv_length_ratio(&self) -> f64 {
        self.lambda_j / self.l_x
    }

    /// Copy with a different junction length.
    pub fn with_length(&self, l_x: f64) -> Result<Self> {
        Self::build(
            self.e_j,
            self.e_c,
            self.lambda_j,
            l_x,
            self.n_modes,
            self.allow_non_transmon,
        )
    }

    /// Copy with a different number of retained modes.
    pub fn with_n_modes(&self, n_modes: usize) -> Result<Self> {
        Self::build(
            self.e_j,
            self.e_c,
            self.lambda_j,
            self.l_x,
            n_modes,
            self.allow_non_transmon,
        )
    }
}

/// Material and geometry inputs in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiInputs {
    /// Critical current density, A/m².
    pub j_c: f64,
    /// Oxide thickness, m.
    pub delta_z: f64,
    /// London penetration length, m.
    pub lambda_l: f64,
    /// Junction width across the long axis, m.
    pub junction_width: f64,
    /// Temperature, K.
    pub temperature: f64,
}

impl SiInputs {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("j_c", self.j_c),
            ("delta_z", self.delta_z),
            ("lambda_l", self.lambda_l),
            ("junction_width", self.junction_width),
            ("temperature", self.temperature),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::domain(
                    "params",
                    format!("SI input {name} must be positive (got {value})"),
                ));
            }
        }
        Ok(())
    }

    /// `λ_J = sqrt(Φ₀ / (2π μ₀ (δ_z + 2λ_L) j_c))`.
    pub fn josephson_length(&self) -> Result<f64> {
        self.validate()?;
        let denom = 2.0 * PI * VACUUM_PERMEABILITY * (self.delta_z + 2.0 * self.lambda_l) * self.j_c;
        Ok((FLUX_QUANTUM / denom).sqrt())
    }

    /// Josephson energy of a junction of length `l_x` in rad/s: `I_c / 2e`
    /// with `I_c = j_c · width · l_x`.
    pub fn josephson_energy(&self, l_x: f64) -> Result<f64> {
        self.validate()?;
        if !(l_x > 0.0) {
            return Err(Error::domain("params", format!("l_x must be positive (got {l_x})")));
        }
        let critical_current = self.j_c * self.junction_width * l_x;
        Ok(critical_current / (2.0 * ELEMENTARY_CHARGE))
    }
}

/// Derives junction parameters from SI inputs. `E_C` follows from the supplied
/// plasma frequency as `ω_pl² / 8E_J`.
pub fn derive_junction_params(
    si: &SiInputs,
    l_x: f64,
    omega_pl: f64,
    n_modes: usize,
) -> Result<JunctionParams> {
    let lambda_j = si.josephson_length()?;
    let e_j = si.josephson_energy(l_x)?;
    if !(omega_pl > 0.0) {
        return Err(Error::domain(
            "params",
            format!("omega_pl must be positive (got {omega_pl})"),
        ));
    }
    let e_c = omega_pl * omega_pl / (8.0 * e_j);
    JunctionParams::new(e_j, e_c, lambda_j, l_x, n_modes)
}

/// Frequency of plasmon mode `m`.
pub fn mode_frequency(params: &JunctionParams, m: usize) -> f64 {
    let k = PI * m as f64 * params.lambda_j / params.l_x;
    params.omega_pl * (1.0 + k * k).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(m: usize) -> Self {
        if m.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Spatial profile `Ξ_m` as a function of the dimensionless phase
/// `u = π x / L_x ∈ [−π/2, π/2]`.
pub(crate) fn profile_at_phase(m: usize, u: f64) -> f64 {
    if m == 0 {
        1.0
    } else if m % 2 == 1 {
        std::f64::consts::SQRT_2 * (m as f64 * u).sin()
    } else {
        std::f64::consts::SQRT_2 * (m as f64 * u).cos()
    }
}

/// Profile `Ξ_m(x)` for a position measured from the junction center.
pub fn mode_profile(params: &JunctionParams, m: usize, x: f64) -> Result<f64> {
    let half = 0.5 * params.l_x;
    // one ulp of slack so that the exact endpoints are accepted
    if !(x.abs() <= half * (1.0 + 4.0 * f64::EPSILON)) {
        return Err(Error::domain(
            "params",
            format!("position {x:e} m lies outside the junction [−{half:e}, {half:e}] m"),
        ));
    }
    Ok(profile_at_phase(m, PI * x / params.l_x))
}

/// Zero-point phase fluctuation of one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroPointPhase {
    pub mode: usize,
    pub theta_zpf: f64,
    pub warning: Option<Warning>,
}

/// `θ_ZPF = sqrt(4 E_C / ω_m)`; values above [`THETA_ZPF_WARNING`] carry a warning.
pub fn zero_point_phase(params: &JunctionParams, m: usize) -> ZeroPointPhase {
    let theta = (4.0 * params.e_c / mode_frequency(params, m)).sqrt();
    let warning = (theta > THETA_ZPF_WARNING).then(|| {
        let w = Warning::LargeZeroPointPhase {
            mode: m,
            theta_zpf: theta,
            threshold: THETA_ZPF_WARNING,
        };
        log::warn!("{w}");
        w
    });
    ZeroPointPhase {
        mode: m,
        theta_zpf: theta,
        warning,
    }
}

/// Retained plasmon modes of a junction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeBasis {
    params: JunctionParams,
    frequencies: Vec<f64>,
    parities: Vec<Parity>,
}

impl ModeBasis {
    pub fn new(params: &JunctionParams) -> Self {
        let n = params.n_modes;
        ModeBasis {
            params: params.clone(),
            frequencies: (0..n).map(|m| mode_frequency(params, m)).collect(),
            parities: (0..n).map(Parity::of).collect(),
        }
    }

    pub fn params(&self) -> &JunctionParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frequency(&self, m: usize) -> Result<f64> {
        self.frequencies.get(m).copied().ok_or(Error::ModeIndex {
            index: m,
            n_modes: self.len(),
        })
    }

    pub fn parities(&self) -> &[Parity] {
        &self.parities
    }

    pub fn profile(&self, m: usize, x: f64) -> Result<f64> {
        if m >= self.len() {
            return Err(Error::ModeIndex {
                index: m,
                n_modes: self.len(),
            });
        }
        mode_profile(&self.params, m, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate;
    use crate::units::ghz;

    fn unit_params(inv_ratio: f64) -> JunctionParams {
        JunctionParams::from_ratios(1.0, 10.0, 1.0, inv_ratio, 4).unwrap()
    }

    #[test]
    fn plasma_frequency_is_recomputed() {
        let p = JunctionParams::new(ghz(40.0), ghz(0.06), 880e-6, 880e-6, 2).unwrap();
        let expected = (8.0 * p.e_j() * p.e_c()).sqrt();
        assert!(((p.omega_pl() - expected) / expected).abs() < 1e-12);
    }

    #[test]
    fn transmon_guard() {
        assert!(JunctionParams::new(5.0, 1.0, 1.0, 1.0, 1).is_err());
        assert!(JunctionParams::new_any_regime(5.0, 1.0, 1.0, 1.0, 1).is_ok());
        assert!(JunctionParams::new(10.0, 1.0, 1.0, 1.0, 1).is_ok());
    }

    #[test]
    fn rejects_bad_geometry() {
        assert!(JunctionParams::new(100.0, 1.0, 1.0, 0.0, 1).is_err());
        assert!(JunctionParams::new(100.0, 1.0, -1.0, 1.0, 1).is_err());
        assert!(JunctionParams::new(100.0, 1.0, 1.0, 1.0, 0).is_err());
    }

    #[test]
    fn serde_round_trip_recomputes_plasma() {
        let p = unit_params(1.0);
        let json = serde_json::to_string(&p).unwrap();
        let tampered = json.replace(&format!("{:?}", p.omega_pl()), "1.0");
        let back: JunctionParams = serde_json::from_str(&tampered).unwrap();
        assert_eq!(back, p);
        let bad = json.replace("\"n_modes\":4", "\"n_modes\":0");
        assert!(serde_json::from_str::<JunctionParams>(&bad).is_err());
    }

    #[test]
    fn mode_frequency_examples() {
        let p = unit_params(1.0);
        assert_eq!(mode_frequency(&p, 0), p.omega_pl());
        let r1 = mode_frequency(&p, 1) / p.omega_pl();
        assert!((r1 - (1.0 + PI * PI).sqrt()).abs() < 1e-12);
        assert!((r1 - 3.2969).abs() < 1e-4);
        let p2 = unit_params(2.0);
        let r2 = mode_frequency(&p2, 1) / p2.omega_pl();
        assert!((r2 - 6.3623).abs() < 1e-4);
    }

    #[test]
    fn mode_frequency_linear_asymptote() {
        let p = unit_params(1.0);
        let m = 1000;
        let linear = p.omega_pl() * PI * m as f64 * p.inv_length_ratio();
        assert!((mode_frequency(&p, m) / linear - 1.0).abs() < 1e-4);
        for m in 0..50 {
            assert!(mode_frequency(&p, m + 1) > mode_frequency(&p, m));
        }
    }

    #[test]
    fn profile_examples() {
        let p = unit_params(1.0);
        assert_eq!(mode_profile(&p, 0, 0.3 * p.l_x()).unwrap(), 1.0);
        assert!((mode_profile(&p, 2, 0.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(mode_profile(&p, 1, 0.0).unwrap(), 0.0);
        assert!(mode_profile(&p, 1, 0.5 * p.l_x()).is_ok());
        assert!(mode_profile(&p, 1, 0.51 * p.l_x()).is_err());
    }

    #[test]
    fn profiles_satisfy_open_boundary_conditions() {
        // dΞ/dx vanishes at both ends for every mode
        let p = unit_params(1.0);
        let h = 1e-8 * p.l_x();
        for m in 0..6 {
            for end in [-0.5, 0.5] {
                let x = end * p.l_x();
                let inside = x - end.signum() * h;
                let slope = (mode_profile(&p, m, x).unwrap()
                    - mode_profile(&p, m, inside).unwrap())
                    / h;
                assert!(slope.abs() * p.l_x() < 1e-4, "m={m} slope={slope}");
            }
        }
    }

    #[test]
    fn profiles_are_orthonormal() {
        let p = unit_params(1.0);
        let l = p.l_x();
        for m in 0..=8 {
            for n in 0..=8 {
                let f = |x: f64| profile_at_phase(m, PI * x / l) * profile_at_phase(n, PI * x / l) / l;
                let v = integrate(f, -0.5 * l, 0.5 * l, 1e-14, 1e-13).unwrap();
                let expected = if m == n { 1.0 } else { 0.0 };
                assert!((v - expected).abs() < 1e-10, "m={m} n={n} v={v}");
            }
        }
    }

    #[test]
    fn zero_point_phase_examples() {
        let p = JunctionParams::from_ratios(1.0, 10.0, 1.0, 1.0, 2).unwrap();
        let z0 = zero_point_phase(&p, 0);
        assert!((z0.theta_zpf - 0.4f64.sqrt()).abs() < 1e-12);
        assert!(z0.warning.is_some());
        let z1 = zero_point_phase(&p, 1);
        assert!((z1.theta_zpf - 0.3483).abs() < 1e-4);
        assert!(z1.warning.is_none());
        let deep = JunctionParams::from_ratios(1.0, 1e6, 1.0, 1.0, 1).unwrap();
        assert!(zero_point_phase(&deep, 0).theta_zpf < 3e-3);
    }

    fn reference_si() -> SiInputs {
        SiInputs {
            j_c: 1e4,
            delta_z: 2e-9,
            lambda_l: 16e-9,
            junction_width: 10e-9,
            temperature: 0.02,
        }
    }

    #[test]
    fn si_pipeline() {
        let si = reference_si();
        let lambda_j = si.josephson_length().unwrap();
        assert!((lambda_j / 880e-6 - 1.0).abs() < 0.02, "lambda_J = {lambda_j}");
        let p = derive_junction_params(&si, lambda_j, ghz(5.0), 2).unwrap();
        assert!((p.e_j() / ghz(40.0) - 1.0).abs() < 0.10, "E_J = {}", p.e_j());
        assert!((p.e_c() / ghz(0.06) - 1.0).abs() < 0.35, "E_C = {}", p.e_c());
        assert!((p.omega_pl() / ghz(5.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn si_rejects_non_positive() {
        let mut si = reference_si();
        si.delta_z = 0.0;
        assert!(si.josephson_length().is_err());
        assert!(derive_junction_params(&si, 1e-3, ghz(5.0), 1).is_err());
    }

    #[test]
    fn basis_invariants() {
        let p = unit_params(0.7);
        let b = ModeBasis::new(&p);
        assert_eq!(b.frequencies()[0], p.omega_pl());
        assert!(b.frequencies().windows(2).all(|w| w[1] > w[0]));
        for (m, parity) in b.parities().iter().enumerate() {
            assert_eq!(*parity == Parity::Even, m % 2 == 0);
        }
        assert!(b.frequency(4).is_err());
    }
}
