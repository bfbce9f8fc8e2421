use ejj_core::coupling::{coupling_matrix, JunctionGeometry};
use ejj_core::dynamics::fit::linear_fit;
use ejj_core::dynamics::gate::{phase_gate, GateOptions};
use ejj_core::dynamics::meanfield::{
    steady_state, transmission_scan, MeanFieldCoefficients, MeanFieldState, ScanAxis, ScanSetup,
};
use ejj_core::jhamiltonian::{kerr_tensor, sweep_spectrum_vs_length, QuarticKind, QuarticOptions};
use ejj_core::lattice::{
    adiabatic_tunneling, drive_induced_tunneling, plaquette_model, sector_spectrum, DrivePattern, LatticeModel,
};
use ejj_core::ode::OdeOptions;
use ejj_core::params::mode_frequency;
use ejj_core::soliton::soliton_density;
use log::info;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{default_gamma, Resolved};
use crate::output::ArtifactWriter;
use crate::{CliError, Command};

fn finite(values: impl IntoIterator<Item = f64>, what: &str) -> Result<(), CliError> {
    if values.into_iter().all(f64::is_finite) {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("{what}: non-finite value in the results")))
    }
}

pub fn run(command: Command, r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    match command {
        Command::Spectrum => spectrum(r, out),
        Command::Kerr => kerr(r, out),
        Command::Coupling => coupling(r, out),
        Command::Gate => gate(r, out),
        Command::Characterize => characterize(r, out),
        Command::Lattice => lattice(r, out),
        Command::Soliton => soliton(r, out),
    }
}

fn label(occupations: &[usize]) -> String {
    let inner: Vec<String> = occupations.iter().map(|n| n.to_string()).collect();
    format!("|{}>", inner.join(","))
}

fn spectrum(r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    let block = r.explicit.spectrum.clone().unwrap_or_default();
    let grid = block.inv_length.values();
    if grid.is_empty() {
        return Err(CliError::Config("config: `spectrum.inv_length` is empty".into()));
    }
    if block.cutoffs.is_empty() {
        return Err(CliError::Config("config: `spectrum.cutoffs` is empty".into()));
    }
    let options = match block.quartic {
        QuarticKind::Rwa => QuarticOptions::RWA,
        QuarticKind::Full => QuarticOptions::FULL_QUARTIC_ONLY,
    };
    let template = r.params.with_n_modes(r.params.n_modes().max(block.cutoffs.len()))?;
    info!("spectrum: {} grid points, cutoffs {:?}", grid.len(), block.cutoffs);
    let points = sweep_spectrum_vs_length(&template, &grid, &block.cutoffs, options, block.levels)?;
    let e_c = template.e_c();
    let mut rows = Vec::new();
    for p in &points {
        for (e, l) in p.spectrum.eigenvalues.iter().zip(&p.spectrum.labels) {
            rows.push((p.inv_length_ratio, label(l), e / e_c, p.u00 / e_c, p.u01 / e_c, p.u11 / e_c));
        }
    }
    finite(rows.iter().flat_map(|r| [r.2, r.3, r.4, r.5]), "spectrum")?;
    out.csv(
        "spectrum",
        &["inv_length_ratio", "level_label", "energy_over_Ec", "U00_over_Ec", "U01_over_Ec", "U11_over_Ec"],
        &rows,
    )?;
    Ok(())
}

fn kerr(r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    let block = r.explicit.kerr.clone().unwrap_or_default();
    let grid = block.inv_length.values();
    if let Some(bad) = grid.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(CliError::Config(format!("config: `kerr.inv_length` values must be positive (got {bad})")));
    }
    let rows = grid
        .par_iter()
        .map(|&ratio| {
            let p = r.params.with_length(r.params.lambda_j() / ratio)?.with_n_modes(r.params.n_modes().max(4))?;
            let k = kerr_tensor(&p, 4)?;
            Ok((
                ratio,
                mode_frequency(&p, 0),
                mode_frequency(&p, 1),
                mode_frequency(&p, 2),
                k.u(0, 0),
                k.u(0, 1),
                k.u(1, 1),
                k.u_triple(0, 1, 2).unwrap_or(0.0),
                k.u_quad([0, 1, 2, 3]).unwrap_or(0.0),
            ))
        })
        .collect::<ejj_core::Result<Vec<_>>>()?;
    finite(rows.iter().flat_map(|r| [r.4, r.5, r.6, r.7, r.8]), "kerr")?;
    out.csv(
        "kerr",
        &[
            "inv_length_ratio",
            "omega0_rad_s",
            "omega1_rad_s",
            "omega2_rad_s",
            "U00_rad_s",
            "U01_rad_s",
            "U11_rad_s",
            "U012_rad_s",
            "U0123_rad_s",
        ],
        &rows,
    )?;
    Ok(())
}

fn coupling(r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    let cm = coupling_matrix(&r.resonator, &r.params, &r.geometry)?;
    let mut rows = Vec::new();
    for m in 0..cm.junction_modes() {
        for n in 0..cm.resonator_modes() {
            rows.push((m, n, cm.form_factors[n][m], cm.g[m][n].re));
        }
    }
    finite(rows.iter().flat_map(|r| [r.2, r.3]), "coupling")?;
    out.csv("coupling", &["m", "n", "form_factor", "g_rad_per_s"], &rows)?;
    Ok(())
}

fn gate(r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    let block = r.explicit.gate.clone().unwrap_or_default();
    let params = r.params.with_n_modes(r.params.n_modes().max(2))?;
    let kerr = kerr_tensor(&params, 2)?;
    let rabi = block.rabi.unwrap_or(block.rabi_over_u00 * kerr.u(0, 0));
    let options = GateOptions {
        cutoffs: block.cutoffs,
        idealized: block.idealized,
        drive_phase: block.drive_phase,
        leakage_samples: block.leakage_samples,
        ..GateOptions::default()
    };
    let report = phase_gate(&params, &kerr, rabi, &options)?;
    for w in &report.warnings {
        log::warn!("{w}");
    }
    finite([report.fidelity, report.achieved_phase, report.leakage], "gate")?;
    out.json("gate", &report)?;
    Ok(())
}

#[derive(Serialize)]
struct CharacterizeSummary {
    gamma: f64,
    self_kerr: f64,
    cross_kerr: f64,
    pump_amplitudes: Vec<f64>,
    pump_populations: Vec<f64>,
    peak_shifts: Vec<f64>,
    fitted_slope: Option<f64>,
    slope_relative_error: Option<f64>,
    unconverged_points: usize,
}

fn window(centre: f64, half: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|k| centre - half + 2.0 * half * k as f64 / (points - 1) as f64)
        .collect()
}

fn characterize(r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    let block = r.explicit.characterize.clone().unwrap_or_default();
    let params = r.params.with_n_modes(r.params.n_modes().max(2))?;
    let coeffs = MeanFieldCoefficients::from_kerr(&kerr_tensor(&params, 2)?)?;
    let gamma = block.gamma.unwrap_or_else(default_gamma);
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(CliError::Config(format!("config: `characterize.gamma` must be positive (got {gamma})")));
    }
    if block.points < 3 {
        return Err(CliError::Config("config: `characterize.points` must be at least 3".into()));
    }
    let pumps = block.pump_amplitudes.clone().unwrap_or_else(|| {
        [0.1, 0.2, 0.3, 0.4]
            .iter()
            .map(|f| gamma * (f * gamma / coeffs.self_kerr).sqrt())
            .collect()
    });
    let probe = block.probe_over_gamma * gamma;
    let t_max = 60.0 / gamma;
    let mut rows = Vec::new();
    let mut populations = Vec::new();
    let mut shifts = Vec::new();
    let mut unconverged = 0;
    for &a0 in &pumps {
        let start = MeanFieldState::vacuum(0.0, 0.0, gamma);
        let steady = steady_state(&start, &coeffs, [C64::new(a0, 0.0), C64::new(0.0, 0.0)], t_max, &OdeOptions::default())?;
        let b0 = steady.from_vacuum.ok_or_else(|| {
            CliError::Numerical(format!("characterize: pump {a0:e} rad/s reached no steady state"))
        })?[0];
        let setup = ScanSetup {
            gamma,
            t_max: Some(t_max),
            ..ScanSetup::new(coeffs, a0, probe)
        };
        let coarse = transmission_scan(&setup, ScanAxis::Probe, &window(0.0, block.span_over_gamma * gamma, block.points))?;
        if (coarse.peak_detuning.abs() - block.span_over_gamma * gamma).abs() < 1e-12 * gamma {
            log::warn!("characterize: pump {a0:e} rad/s shifts the probe peak to the edge of the window; widen span_over_gamma");
        }
        let scan = transmission_scan(&setup, ScanAxis::Probe, &window(coarse.peak_detuning, 0.25 * gamma, block.points))?;
        unconverged += coarse.points.iter().chain(&scan.points).filter(|p| !p.converged).count();
        log::debug!("pump {a0:e}: |b0|^2 = {:e}", b0.norm_sqr());
        for p in &coarse.points {
            rows.push((a0 * a0, p.detuning, p.b1.norm(), scan.peak_detuning));
        }
        populations.push(scan.pump_population);
        shifts.push(scan.peak_detuning);
    }
    if unconverged > 0 {
        log::warn!("characterize: {unconverged} scan points did not meet the steady-state criterion");
    }
    finite(rows.iter().flat_map(|r| [r.1, r.2, r.3]), "characterize")?;
    let (fitted_slope, slope_relative_error) = match linear_fit(&populations, &shifts) {
        Ok((s, _)) => (Some(s), Some((s - coeffs.cross_kerr).abs() / coeffs.cross_kerr.abs())),
        Err(_) => (None, None),
    };
    out.csv(
        "characterize",
        &["pump_power", "probe_detuning_rad_s", "b1_abs", "peak_shift_rad_s"],
        &rows,
    )?;
    out.json(
        "characterize_summary",
        &CharacterizeSummary {
            gamma,
            self_kerr: coeffs.self_kerr,
            cross_kerr: coeffs.cross_kerr,
            pump_amplitudes: pumps,
            pump_populations: populations,
            peak_shifts: shifts,
            fitted_slope,
            slope_relative_error,
            unconverged_points: unconverged,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct FluxModel {
    flux: f64,
    phases: [f64; 2],
    model: LatticeModel,
}

#[derive(Serialize)]
struct LatticeDump {
    tunneling_rad_s: f64,
    drive_induced_tunneling_rad_s: f64,
    drive_amplitude_rad_s: f64,
    drive_frequency_rad_s: f64,
    models: Vec<FluxModel>,
}

fn lattice(r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    let block = r.explicit.lattice.clone().unwrap_or_default();
    let p3 = r.params.with_n_modes(r.params.n_modes().max(3))?;
    let kerr = kerr_tensor(&p3, 3)?;
    let w: Vec<f64> = (0..3).map(|m| mode_frequency(&p3, m)).collect();
    let drive_frequency = 0.5 * (w[2] - w[0]);
    let amplitude = block
        .drive_amplitude
        .unwrap_or(block.coherence * (w[1] - drive_frequency).abs());
    let t = match block.tunneling {
        Some(t) => t,
        None => {
            let quarter = 0.25 * r.resonator.l_res;
            let centers = block.centers.unwrap_or([-quarter, quarter]);
            let couplings = centers
                .iter()
                .map(|&center| {
                    coupling_matrix(
                        &r.resonator,
                        &p3,
                        &JunctionGeometry {
                            center,
                            delta_z: r.geometry.delta_z,
                        },
                    )
                })
                .collect::<ejj_core::Result<Vec<_>>>()?;
            let report = adiabatic_tunneling(&couplings, &r.resonator.frequencies(), &w[..1], r.resonator.mode_count)?;
            report.t[0][0][1].re
        }
    };
    let pattern = DrivePattern {
        phases: vec![0.0],
        amplitude,
        frequency: drive_frequency,
    };
    let t_prime = drive_induced_tunneling(&kerr, &pattern, w[1])?[0].norm();
    let fluxes = block.fluxes.values();
    let results = fluxes
        .par_iter()
        .map(|&flux| {
            let phases = [0.5 * flux, 0.0];
            let model = plaquette_model(&p3, t, t_prime, phases)?;
            let levels = sector_spectrum(&model, 1)?;
            Ok((FluxModel { flux, phases, model }, levels))
        })
        .collect::<ejj_core::Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    let mut models = Vec::new();
    for (fm, levels) in results {
        for (i, e) in levels.iter().enumerate() {
            rows.push((fm.flux, i, *e));
        }
        models.push(fm);
    }
    finite(rows.iter().map(|r| r.2), "lattice")?;
    out.csv("lattice", &["flux", "level_index", "energy_rad_s"], &rows)?;
    out.json(
        "lattice_model",
        &LatticeDump {
            tunneling_rad_s: t,
            drive_induced_tunneling_rad_s: t_prime,
            drive_amplitude_rad_s: amplitude,
            drive_frequency_rad_s: drive_frequency,
            models,
        },
    )?;
    Ok(())
}

fn soliton(r: &Resolved, out: &mut ArtifactWriter) -> Result<(), CliError> {
    let report = soliton_density(&r.params, r.temperature)?;
    out.json("soliton", &report)?;
    Ok(())
}
