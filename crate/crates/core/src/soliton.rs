//! Thermal soliton (2π kink) nucleation density,
//! `⟨n⟩ = (2/π)^{1/2} λ_J^{−1} √(2E_J/k_BT) e^{−2E_J/k_BT}`, evaluated in log space.

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::JunctionParams;
use crate::units::{BOLTZMANN, HBAR};

/// `⟨n⟩L_x` below which nucleation is flagged negligible.
pub const NEGLIGIBLE_COUNT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleationReport {
    /// Kinks per metre; underflows to 0 when `log10_density` is very negative.
    pub density: f64,
    pub log10_density: f64,
    /// `⟨n⟩·L_x`.
    pub expected_count: f64,
    pub log10_expected_count: f64,
    pub negligible: bool,
    pub ej_over_kt: f64,
}

/// `ln(⟨n⟩λ_J)` as a function of `x = E_J/k_BT`.
pub fn ln_density_lambda(x: f64) -> f64 {
    0.5 * (2.0 / PI).ln() + 0.5 * (2.0 * x).ln() - 2.0 * x
}

/// `log₁₀(⟨n⟩λ_J)`.
pub fn log10_density_lambda(x: f64) -> f64 {
    ln_density_lambda(x) / LN_10
}

/// Nucleation density at `temperature` (K).
pub fn soliton_density(params: &JunctionParams, temperature: f64) -> Result<NucleationReport> {
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(Error::domain("soliton", format!("temperature must be positive and finite, got {temperature}")));
    }
    let ej_over_kt = HBAR * params.e_j() / (BOLTZMANN * temperature);
    let ln_n = ln_density_lambda(ej_over_kt) - params.lambda_j().ln();
    let ln_count = ln_n + params.l_x().ln();
    Ok(NucleationReport {
        density: ln_n.exp(),
        log10_density: ln_n / LN_10,
        expected_count: ln_count.exp(),
        log10_expected_count: ln_count / LN_10,
        negligible: ln_count < NEGLIGIBLE_COUNT.ln(),
        ej_over_kt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn junction() -> JunctionParams {
        JunctionParams::new(2.0 * PI * 40e9, 2.0 * PI * 0.06e9, 880e-6, 880e-6, 3).unwrap()
    }

    fn temperature_for(p: &JunctionParams, x: f64) -> f64 {
        HBAR * p.e_j() / (BOLTZMANN * x)
    }

    #[test]
    fn ratio_eighty_is_negligible() {
        let direct = (2.0f64 / PI).sqrt().log10() + 160f64.sqrt().log10() - 160.0 / LN_10;
        assert!((log10_density_lambda(80.0) / direct - 1.0).abs() < 1e-12);
        assert!((log10_density_lambda(80.0) + 68.48).abs() < 0.01);
        let p = junction();
        let r = soliton_density(&p, temperature_for(&p, 80.0)).unwrap();
        assert!((r.ej_over_kt - 80.0).abs() < 1e-9);
        assert!(r.negligible);
        assert!(r.density >= 0.0);
    }

    #[test]
    fn hot_junction_not_negligible() {
        let p = junction();
        let r = soliton_density(&p, temperature_for(&p, 0.5)).unwrap();
        assert!(r.expected_count >= NEGLIGIBLE_COUNT && !r.negligible);
    }

    #[test]
    fn nonpositive_temperature_rejected() {
        assert!(soliton_density(&junction(), 0.0).is_err());
        assert!(soliton_density(&junction(), -1.0).is_err());
    }

    proptest! {
        #[test]
        fn log_space_matches_direct(x in 0.3f64..30.0) {
            let direct = (2.0 / PI).sqrt() * (2.0 * x).sqrt() * (-2.0 * x).exp();
            prop_assert!((log10_density_lambda(x) / direct.log10() - 1.0).abs() < 1e-10);
        }

        #[test]
        fn warmer_means_more_kinks(x in 0.5f64..500.0) {
            let p = junction();
            let t = temperature_for(&p, x);
            let cold = soliton_density(&p, t).unwrap();
            let warm = soliton_density(&p, 2.0 * t).unwrap();
            prop_assert!(warm.log10_density > cold.log10_density);
        }

        #[test]
        fn flag_consistent_with_threshold(x in 0.1f64..200.0) {
            let p = junction();
            let r = soliton_density(&p, temperature_for(&p, x)).unwrap();
            prop_assert_eq!(r.negligible, r.log10_expected_count < NEGLIGIBLE_COUNT.log10());
        }
    }
}
