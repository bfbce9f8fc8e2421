//! Run configuration: parsing, presets and resolution into explicit parameters.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use ejj_core::coupling::{coupling_g, JunctionGeometry, ResonatorSpec};
use ejj_core::dynamics::meanfield::DEFAULT_T1;
use ejj_core::jhamiltonian::QuarticKind;
use ejj_core::params::{derive_junction_params, JunctionParams, SiInputs};
use ejj_core::units::{ghz, mhz, SPEED_OF_LIGHT};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Toy,
    Fem,
}

/// Junction given directly. Energies in rad/s, lengths in m. Two of
/// `e_j`, `e_c`, `omega_pl` are needed, at least one of them `e_c` or `omega_pl`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JunctionBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_j: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_pl: Option<f64>,
    pub lambda_j: f64,
    pub l_x: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub allow_non_transmon: bool,
}

/// Junction derived from material inputs (SI units).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiBlock {
    pub j_c: f64,
    pub delta_z: f64,
    pub lambda_l: f64,
    pub junction_width: f64,
    pub temperature: f64,
    /// Junction length; the Josephson length when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_pl: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub e_c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResonatorBlock {
    pub l_res: f64,
    pub mode_count: usize,
    /// Zero-point field `E_n⁰` (V/m), same for every mode.
    pub zero_point_field: f64,
    #[serde(default = "default_phase_velocity")]
    pub phase_velocity: f64,
    /// Junction center measured from the resonator center (m).
    #[serde(default)]
    pub center: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_z: Option<f64>,
    /// Solve for the `delta_z` that gives this `g_{0,0}` (rad/s).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_g00: Option<f64>,
}

fn default_phase_velocity() -> f64 {
    SPEED_OF_LIGHT
}

/// Either an explicit list or `points` evenly spaced values in `[start, stop]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Range { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                n => (0..*n).map(|k| start + (stop - start) * k as f64 / (n - 1) as f64).collect(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectrumBlock {
    pub inv_length: Grid,
    pub levels: usize,
    pub quartic: QuarticKind,
    pub cutoffs: Vec<usize>,
}

impl Default for SpectrumBlock {
    fn default() -> Self {
        SpectrumBlock {
            inv_length: Grid::Range {
                start: 0.5,
                stop: 3.0,
                points: 50,
            },
            levels: 6,
            quartic: QuarticKind::Rwa,
            cutoffs: vec![5, 5, 5],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KerrBlock {
    pub inv_length: Grid,
}

impl Default for KerrBlock {
    fn default() -> Self {
        KerrBlock {
            inv_length: Grid::Range {
                start: 0.01,
                stop: 3.0,
                points: 60,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateBlock {
    /// Rabi frequency in rad/s; overrides `rabi_over_u00`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rabi: Option<f64>,
    pub rabi_over_u00: f64,
    pub idealized: bool,
    pub drive_phase: f64,
    pub cutoffs: [usize; 2],
    pub leakage_samples: usize,
}

impl Default for GateBlock {
    fn default() -> Self {
        GateBlock {
            rabi: None,
            rabi_over_u00: 0.05,
            idealized: false,
            drive_phase: 0.0,
            cutoffs: [7, 7],
            leakage_samples: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CharacterizeBlock {
    /// Damping (1/s); `1/T₁` with `T₁ = 30 μs` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Pump amplitudes `α₀` (rad/s); chosen from the self-Kerr when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pump_amplitudes: Option<Vec<f64>>,
    /// Probe amplitude `α₁` in units of `γ`.
    pub probe_over_gamma: f64,
    /// Half-width of the probe window in units of `γ`.
    pub span_over_gamma: f64,
    pub points: usize,
}

impl Default for CharacterizeBlock {
    fn default() -> Self {
        CharacterizeBlock {
            gamma: None,
            pump_amplitudes: None,
            probe_over_gamma: 1e-3,
            span_over_gamma: 3.0,
            points: 61,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LatticeBlock {
    /// Inter-junction tunneling of mode 0 (rad/s); from the resonator when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tunneling: Option<f64>,
    /// Junction centers (m) used for the resonator-mediated tunneling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub centers: Option<[f64; 2]>,
    /// Drive amplitude `α₁` (rad/s); overrides `coherence`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub drive_amplitude: Option<f64>,
    /// Target `|b̄₁|` of the bridging drive.
    pub coherence: f64,
    pub fluxes: Grid,
}

impl Default for LatticeBlock {
    fn default() -> Self {
        LatticeBlock {
            tunneling: None,
            centers: None,
            drive_amplitude: None,
            coherence: 0.3,
            fluxes: Grid::Range {
                start: 0.0,
                stop: PI,
                points: 9,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
#[derive(Default)]
pub struct SolitonBlock {
    /// Kelvin; the SI block's temperature, else 20 mK.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub junction: Option<JunctionBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub si: Option<SiBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_modes: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonator: Option<ResonatorBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kerr: Option<KerrBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate: Option<GateBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub characterize: Option<CharacterizeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soliton: Option<SolitonBlock>,
}

pub const DEFAULT_N_MODES: usize = 4;
pub const DEFAULT_TEMPERATURE: f64 = 0.02;

/// Everything a command needs, with every default made explicit.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: JunctionParams,
    pub resonator: ResonatorSpec,
    pub geometry: JunctionGeometry,
    pub temperature: f64,
    /// Configuration that reproduces this run without presets or defaults.
    pub explicit: RunConfig,
}

pub fn load(path: &Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse(text: &str) -> Result<RunConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
}

fn toy_resonator() -> ResonatorBlock {
    ResonatorBlock {
        l_res: 0.025,
        mode_count: 5,
        zero_point_field: 0.2,
        phase_velocity: SPEED_OF_LIGHT,
        center: 0.0,
        delta_z: Some(2e-9),
        target_g00: None,
    }
}

fn preset_junction(preset: Preset) -> JunctionBlock {
    match preset {
        Preset::Toy => JunctionBlock {
            e_j: None,
            e_c: Some(ghz(0.06)),
            omega_pl: Some(ghz(5.0)),
            lambda_j: 880e-6,
            l_x: 880e-6,
            allow_non_transmon: false,
        },
        Preset::Fem => JunctionBlock {
            e_j: Some(ghz(22.0)),
            e_c: Some(mhz(84.0)),
            omega_pl: None,
            lambda_j: 880e-6,
            l_x: 880e-6,
            allow_non_transmon: false,
        },
    }
}

fn preset_resonator(preset: Preset) -> ResonatorBlock {
    match preset {
        Preset::Toy => toy_resonator(),
        Preset::Fem => ResonatorBlock {
            delta_z: None,
            target_g00: Some(mhz(24.0)),
            ..toy_resonator()
        },
    }
}

fn positive(name: &str, value: f64) -> Result<(), CliError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("config: `{name}` must be positive and finite (got {value})")))
    }
}

fn junction_params(block: &JunctionBlock, n_modes: usize) -> Result<JunctionParams, CliError> {
    let (e_j, e_c) = match (block.e_j, block.e_c, block.omega_pl) {
        (_, None, None) => {
            return Err(CliError::Config(
                "config: junction needs `e_c` or `omega_pl` (both are missing)".into(),
            ))
        }
        (Some(e_j), Some(e_c), None) => (e_j, e_c),
        (None, Some(e_c), Some(w)) => {
            positive("junction.e_c", e_c)?;
            (w * w / (8.0 * e_c), e_c)
        }
        (Some(e_j), None, Some(w)) => {
            positive("junction.e_j", e_j)?;
            (e_j, w * w / (8.0 * e_j))
        }
        (None, Some(_), None) => {
            return Err(CliError::Config("config: junction with `e_c` also needs `e_j` or `omega_pl`".into()))
        }
        (None, None, Some(_)) => {
            return Err(CliError::Config("config: junction with `omega_pl` also needs `e_j` or `e_c`".into()))
        }
        (Some(_), Some(_), Some(_)) => {
            return Err(CliError::Config(
                "config: junction over-determined; give two of `e_j`, `e_c`, `omega_pl`".into(),
            ))
        }
    };
    positive("junction.e_j", e_j)?;
    positive("junction.e_c", e_c)?;
    positive("junction.lambda_j", block.lambda_j)?;
    positive("junction.l_x", block.l_x)?;
    let params = if block.allow_non_transmon {
        JunctionParams::new_any_regime(e_j, e_c, block.lambda_j, block.l_x, n_modes)
    } else {
        JunctionParams::new(e_j, e_c, block.lambda_j, block.l_x, n_modes)
    };
    Ok(params?)
}

fn si_params(block: &SiBlock, n_modes: usize) -> Result<JunctionParams, CliError> {
    let si = SiInputs {
        j_c: block.j_c,
        delta_z: block.delta_z,
        lambda_l: block.lambda_l,
        junction_width: block.junction_width,
        temperature: block.temperature,
    };
    si.validate()?;
    let l_x = match block.l_x {
        Some(l) => l,
        None => si.josephson_length()?,
    };
    match (block.omega_pl, block.e_c) {
        (Some(w), None) => Ok(derive_junction_params(&si, l_x, w, n_modes)?),
        (None, Some(e_c)) => {
            let e_j = si.josephson_energy(l_x)?;
            Ok(JunctionParams::new(e_j, e_c, si.josephson_length()?, l_x, n_modes)?)
        }
        (None, None) => Err(CliError::Config(
            "config: si needs `omega_pl` or `e_c` (both are missing)".into(),
        )),
        (Some(_), Some(_)) => Err(CliError::Config(
            "config: si takes only one of `omega_pl` and `e_c`".into(),
        )),
    }
}

fn resonator_spec(block: &ResonatorBlock, params: &JunctionParams) -> Result<(ResonatorSpec, JunctionGeometry, ResonatorBlock), CliError> {
    positive("resonator.l_res", block.l_res)?;
    let spec = ResonatorSpec {
        l_res: block.l_res,
        mode_count: block.mode_count,
        zero_point_fields: vec![block.zero_point_field; block.mode_count],
        phase_velocity: block.phase_velocity,
    };
    spec.validate()?;
    let delta_z = match (block.delta_z, block.target_g00) {
        (Some(d), None) => d,
        (None, Some(target)) => {
            positive("resonator.target_g00", target)?;
            let unit = JunctionGeometry {
                center: block.center,
                delta_z: 1.0,
            };
            let g = coupling_g(&spec, params, &unit, 0, 0)?;
            if g == 0.0 {
                return Err(CliError::Config(
                    "config: `resonator.target_g00` cannot be met, g_00 vanishes at this position".into(),
                ));
            }
            (target / g).abs()
        }
        (None, None) => {
            return Err(CliError::Config("config: resonator needs `delta_z` or `target_g00`".into()))
        }
        (Some(_), Some(_)) => {
            return Err(CliError::Config(
                "config: resonator takes only one of `delta_z` and `target_g00`".into(),
            ))
        }
    };
    positive("resonator.delta_z", delta_z)?;
    let geometry = JunctionGeometry {
        center: block.center,
        delta_z,
    };
    let explicit = ResonatorBlock {
        delta_z: Some(delta_z),
        target_g00: None,
        ..block.clone()
    };
    Ok((spec, geometry, explicit))
}

impl RunConfig {
    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let sources = [self.preset.is_some(), self.junction.is_some(), self.si.is_some()];
        match sources.iter().filter(|s| **s).count() {
            0 => {
                return Err(CliError::Config(
                    "config: give one of `preset`, `junction` or `si`; the junction needs `e_c` or `omega_pl`".into(),
                ))
            }
            1 => {}
            _ => {
                return Err(CliError::Config(
                    "config: `preset`, `junction` and `si` are mutually exclusive".into(),
                ))
            }
        }
        let n_modes = self.n_modes.unwrap_or(DEFAULT_N_MODES);
        if n_modes == 0 {
            return Err(CliError::Config("config: `n_modes` must be at least 1".into()));
        }
        let params = if let Some(preset) = self.preset {
            junction_params(&preset_junction(preset), n_modes)?
        } else if let Some(j) = &self.junction {
            junction_params(j, n_modes)?
        } else {
            si_params(self.si.as_ref().expect("one source present"), n_modes)?
        };
        let res_block = match (&self.resonator, self.preset) {
            (Some(r), _) => r.clone(),
            (None, Some(p)) => preset_resonator(p),
            (None, None) => toy_resonator(),
        };
        let (resonator, geometry, res_explicit) = resonator_spec(&res_block, &params)?;

        let mut soliton = self.soliton.clone().unwrap_or_default();
        let temperature = soliton
            .temperature
            .or(self.si.as_ref().map(|s| s.temperature))
            .unwrap_or(DEFAULT_TEMPERATURE);
        positive("soliton.temperature", temperature)?;
        soliton.temperature = Some(temperature);

        let explicit = RunConfig {
            preset: None,
            junction: Some(JunctionBlock {
                e_j: Some(params.e_j()),
                e_c: Some(params.e_c()),
                omega_pl: None,
                lambda_j: params.lambda_j(),
                l_x: params.l_x(),
                allow_non_transmon: params.e_j() / params.e_c() < ejj_core::params::TRANSMON_RATIO_MIN,
            }),
            si: None,
            n_modes: Some(n_modes),
            resonator: Some(res_explicit),
            out: self.out.clone(),
            seed: self.seed,
            spectrum: Some(self.spectrum.clone().unwrap_or_default()),
            kerr: Some(self.kerr.clone().unwrap_or_default()),
            gate: Some(self.gate.clone().unwrap_or_default()),
            characterize: Some(self.characterize.clone().unwrap_or_default()),
            lattice: Some(self.lattice.clone().unwrap_or_default()),
            soliton: Some(soliton),
        };
        Ok(Resolved {
            params,
            resonator,
            geometry,
            temperature,
            explicit,
        })
    }
}

/// Default damping of the characterization scans.
pub fn default_gamma() -> f64 {
    1.0 / DEFAULT_T1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_energy_scale_names_both_keys() {
        let cfg = parse(r#"{"junction": {"lambda_j": 1e-3, "l_x": 1e-3}}"#).unwrap();
        let msg = cfg.resolve().unwrap_err().to_string();
        assert!(msg.contains("`e_c`") && msg.contains("`omega_pl`"), "{msg}");
    }

    #[test]
    fn unknown_key_is_named() {
        let msg = parse(r#"{"preset": "toy", "bogus_key": 1}"#).unwrap_err().to_string();
        assert!(msg.contains("bogus_key"), "{msg}");
    }

    #[test]
    fn sources_are_exclusive() {
        let cfg = parse(r#"{"preset": "toy", "junction": {"e_c": 1.0, "omega_pl": 10.0, "lambda_j": 1.0, "l_x": 1.0}}"#).unwrap();
        assert!(cfg.resolve().is_err());
        assert!(RunConfig::default().resolve().is_err());
    }

    #[test]
    fn toy_preset_values() {
        let r = parse(r#"{"preset": "toy"}"#).unwrap().resolve().unwrap();
        assert!((r.params.omega_pl() / ghz(5.0) - 1.0).abs() < 1e-12);
        assert!((r.params.e_c() / ghz(0.06) - 1.0).abs() < 1e-12);
        assert_eq!(r.geometry.delta_z, 2e-9);
        assert_eq!(r.resonator.mode_count, 5);
    }

    #[test]
    fn fem_preset_meets_g00() {
        let r = parse(r#"{"preset": "fem"}"#).unwrap().resolve().unwrap();
        let g = coupling_g(&r.resonator, &r.params, &r.geometry, 0, 0).unwrap();
        assert!((g / mhz(24.0) - 1.0).abs() < 1e-10);
        assert!((r.params.omega_pl() / ghz(3.8) - 1.0).abs() < 0.03);
    }

    #[test]
    fn explicit_config_round_trips() {
        let r = parse(r#"{"preset": "fem", "n_modes": 3}"#).unwrap().resolve().unwrap();
        let text = serde_json::to_string(&r.explicit).unwrap();
        let again = parse(&text).unwrap().resolve().unwrap();
        assert_eq!(again.params, r.params);
        assert_eq!(again.geometry, r.geometry);
        assert_eq!(again.explicit, r.explicit);
    }

    #[test]
    fn si_pipeline_length() {
        let cfg = parse(
            r#"{"si": {"j_c": 1e4, "delta_z": 2e-9, "lambda_l": 16e-9, "junction_width": 1e-8,
                "temperature": 0.02, "omega_pl": 31415926535.897932}}"#,
        )
        .unwrap();
        let r = cfg.resolve().unwrap();
        assert!((r.params.lambda_j() / 880e-6 - 1.0).abs() < 0.02);
        assert_eq!(r.temperature, 0.02);
    }

    #[test]
    fn grid_forms() {
        assert_eq!(Grid::Range { start: 0.0, stop: 1.0, points: 3 }.values(), vec![0.0, 0.5, 1.0]);
        let g: Grid = serde_json::from_str("[1.0, 2.0]").unwrap();
        assert_eq!(g.values(), vec![1.0, 2.0]);
    }
}
