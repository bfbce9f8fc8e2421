//! Junction Hamiltonians: quadratic part, quartic nonlinearity, Kerr tensor
//! and exact diagonalization.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigen::{lowest_eigenpairs, Eigenpairs};
use crate::error::{Error, Result};
use crate::fock::{normal_ordered_monomial, number, FockSpace, OperatorMatrix};
use crate::params::{mode_frequency, JunctionParams, ModeBasis};

/// Largest Fock-space dimension the builders accept.
pub const MAX_DIMENSION: usize = 1_000_000;

/// Extra occupation added to every cutoff when measuring truncation drift.
pub const DRIFT_EXTRA: usize = 2;

// Ξ_m(u) as a sum of exponentials c·e^{iku}, u = πx/L_x.
fn exponential_terms(m: usize) -> Vec<(i64, C64)> {
    let k = m as i64;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    if m == 0 {
        vec![(0, C64::new(1.0, 0.0))]
    } else if m % 2 == 1 {
        // √2 sin(ku) = (e^{iku} − e^{−iku}) / (√2 i)
        vec![(k, C64::new(0.0, -r)), (-k, C64::new(0.0, r))]
    } else {
        vec![(k, C64::new(r, 0.0)), (-k, C64::new(r, 0.0))]
    }
}

// Average of e^{iKu} over u ∈ [−π/2, π/2].
fn mean_exponential(k: i64) -> f64 {
    if k == 0 {
        1.0
    } else {
        let half = k as f64 * PI / 2.0;
        half.sin() / half
    }
}

/// Closed-form overlap `∫Ξ_m Ξ_n Ξ_p Ξ_q dx/L_x` of the open-boundary profiles.
pub fn overlap(indices: &[usize]) -> f64 {
    let mut sorted = indices.to_vec();
    sorted.sort_unstable();
    let mut terms = vec![(0i64, C64::new(1.0, 0.0))];
    for &m in &sorted {
        let factor = exponential_terms(m);
        terms = terms
            .iter()
            .flat_map(|&(k, c)| factor.iter().map(move |&(k2, c2)| (k + k2, c * c2)))
            .collect();
    }
    terms.iter().map(|&(k, c)| c.re * mean_exponential(k)).sum()
}

/// Overlap of four modes of a basis, checking the indices.
pub fn overlap_integral(basis: &ModeBasis, m: usize, n: usize, p: usize, q: usize) -> Result<f64> {
    for i in [m, n, p, q] {
        basis.frequency(i)?;
    }
    Ok(overlap(&[m, n, p, q]))
}

/// Coefficient `P` of one ordered product `X_m X_n X_p X_q` in
/// `H⁴ = −Σ P_{mnpq} X_m X_n X_p X_q`, with `X = b + b†`.
pub fn quartic_prefactor(params: &JunctionParams, mut idx: [usize; 4]) -> f64 {
    idx.sort_unstable();
    let w = params.omega_pl();
    let denom: f64 = idx.iter().map(|&m| mode_frequency(params, m)).product();
    params.e_c() / 12.0 * w * w / denom.sqrt() * overlap(&idx)
}

/// `X_m X_n² X_p`-type coefficient; `squared` is the repeated index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleTerm {
    pub m: usize,
    pub squared: usize,
    pub p: usize,
    pub value: f64,
}

/// Coefficient of `X_m X_n X_p X_q` with four distinct indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadTerm {
    pub indices: [usize; 4],
    pub value: f64,
}

/// Nonlinear coefficients of the quartic Hamiltonian, all in rad/s.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KerrTensor {
    pub n_modes: usize,
    pub e_c: f64,
    /// Symmetric `U_{m,n}`; `H ⊃ −(U_mm/2) b†²b² − U_mn n̂_m n̂_n`.
    pub pairwise: Vec<Vec<f64>>,
    /// `H ⊃ −U_{m,n,p} X_m X_n² X_p` for distinct `m < p`, both different from `n`.
    pub triple: Vec<TripleTerm>,
    /// `H ⊃ −U_{m,n,p,q} X_m X_n X_p X_q` for `m < n < p < q`.
    pub quad: Vec<QuadTerm>,
    /// `I_{mnpq}` flattened in row-major order.
    pub overlaps: Vec<f64>,
}

impl KerrTensor {
    pub fn overlap(&self, m: usize, n: usize, p: usize, q: usize) -> f64 {
        let k = self.n_modes;
        self.overlaps[((m * k + n) * k + p) * k + q]
    }

    pub fn u(&self, m: usize, n: usize) -> f64 {
        self.pairwise[m][n]
    }

    /// `U_{m,n,p}` with `n` the squared index, if all three are distinct and in range.
    pub fn u_triple(&self, m: usize, n: usize, p: usize) -> Option<f64> {
        let (a, b) = if m < p { (m, p) } else { (p, m) };
        self.triple
            .iter()
            .find(|t| t.m == a && t.squared == n && t.p == b)
            .map(|t| t.value)
    }

    pub fn u_quad(&self, mut idx: [usize; 4]) -> Option<f64> {
        idx.sort_unstable();
        self.quad.iter().find(|t| t.indices == idx).map(|t| t.value)
    }
}

/// Kerr tensor of the first `n_modes` plasmon modes.
pub fn kerr_tensor(params: &JunctionParams, n_modes: usize) -> Result<KerrTensor> {
    if n_modes == 0 {
        return Err(Error::domain("jhamiltonian", "kerr_tensor needs at least one mode"));
    }
    let k = n_modes;
    let mut overlaps = vec![0.0; k * k * k * k];
    for m in 0..k {
        for n in 0..k {
            for p in 0..k {
                for q in 0..k {
                    overlaps[((m * k + n) * k + p) * k + q] = overlap(&[m, n, p, q]);
                }
            }
        }
    }
    let pf = |idx: [usize; 4]| quartic_prefactor(params, idx);
    let pairwise = (0..k)
        .map(|m| {
            (0..k)
                .map(|n| if m == n { 12.0 * pf([m; 4]) } else { 24.0 * pf([m, m, n, n]) })
                .collect()
        })
        .collect();
    let mut triple = Vec::new();
    for n in 0..k {
        for m in 0..k {
            for p in (m + 1)..k {
                if m != n && p != n {
                    triple.push(TripleTerm {
                        m,
                        squared: n,
                        p,
                        value: 12.0 * pf([m, n, n, p]),
                    });
                }
            }
        }
    }
    let mut quad = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            for c in (b + 1)..k {
                for d in (c + 1)..k {
                    quad.push(QuadTerm {
                        indices: [a, b, c, d],
                        value: 24.0 * pf([a, b, c, d]),
                    });
                }
            }
        }
    }
    Ok(KerrTensor {
        n_modes: k,
        e_c: params.e_c(),
        pairwise,
        triple,
        quad,
        overlaps,
    })
}

/// Which part of the quartic expansion to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuarticKind {
    /// Excitation-number-conserving quartic terms only.
    Rwa,
    /// Complete normal-ordered expansion.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuarticOptions {
    pub kind: QuarticKind,
    /// Keep the quadratic terms produced by normal ordering (full expansion only).
    pub keep_quadratic: bool,
}

impl QuarticOptions {
    pub const RWA: QuarticOptions = QuarticOptions {
        kind: QuarticKind::Rwa,
        keep_quadratic: false,
    };
    pub const FULL: QuarticOptions = QuarticOptions {
        kind: QuarticKind::Full,
        keep_quadratic: true,
    };
    pub const FULL_QUARTIC_ONLY: QuarticOptions = QuarticOptions {
        kind: QuarticKind::Full,
        keep_quadratic: false,
    };
}

fn check_space(params: &JunctionParams, space: &FockSpace) -> Result<()> {
    if space.n_modes() > params.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "space has {} modes but the junction retains {}",
            space.n_modes(),
            params.n_modes()
        )));
    }
    if space.dimension() > MAX_DIMENSION {
        return Err(Error::DimensionOverflow {
            dimension: space.dimension(),
            limit: MAX_DIMENSION,
        });
    }
    Ok(())
}

/// `Σ_m ω_m b_m†b_m`.
pub fn build_h2(params: &JunctionParams, space: &FockSpace) -> Result<OperatorMatrix> {
    check_space(params, space)?;
    Ok(h2_on_leading_modes(params, space, space.n_modes()))
}

// H² acting on modes 0..n_modes of a possibly larger space.
pub(crate) fn h2_on_leading_modes(params: &JunctionParams, space: &FockSpace, n_modes: usize) -> OperatorMatrix {
    let freqs: Vec<f64> = (0..n_modes).map(|m| mode_frequency(params, m)).collect();
    OperatorMatrix::from_diagonal(space, |i| {
        freqs
            .iter()
            .enumerate()
            .map(|(m, w)| w * space.occupation(i, m) as f64)
            .sum()
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

// Normal-ordered expansion of X^k as (coefficient, creation power, annihilation power).
fn normal_ordered_power(k: usize) -> Vec<(f64, usize, usize)> {
    let mut out = Vec::new();
    for pairs in 0..=k / 2 {
        let r = k - 2 * pairs;
        let contraction = factorial(k) / (factorial(pairs) * 2f64.powi(pairs as i32) * factorial(r));
        for a in 0..=r {
            out.push((contraction * binomial(r, a), a, r - a));
        }
    }
    out
}

// Multisets of mode powers summing to 4 over `n` modes.
fn power_patterns(n: usize) -> Vec<Vec<usize>> {
    fn rec(mode: usize, left: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if mode == current.len() {
            if left == 0 {
                out.push(current.clone());
            }
            return;
        }
        for k in 0..=left {
            current[mode] = k;
            rec(mode + 1, left - k, current, out);
        }
        current[mode] = 0;
    }
    let mut out = Vec::new();
    rec(0, 4, &mut vec![0; n], &mut out);
    out
}

/// Normal-ordered quartic coefficients keyed by per-mode `(c, a)` powers.
pub fn quartic_terms(params: &JunctionParams, n_modes: usize, options: QuarticOptions) -> BTreeMap<Vec<(usize, usize)>, f64> {
    let mut terms: BTreeMap<Vec<(usize, usize)>, f64> = BTreeMap::new();
    for pattern in power_patterns(n_modes) {
        let mut idx = [0usize; 4];
        let mut pos = 0;
        for (m, &k) in pattern.iter().enumerate() {
            for _ in 0..k {
                idx[pos] = m;
                pos += 1;
            }
        }
        let p = quartic_prefactor(params, idx);
        if p == 0.0 {
            continue;
        }
        let multiplicity = factorial(4) / pattern.iter().map(|&k| factorial(k)).product::<f64>();
        let mut expanded: Vec<(f64, Vec<(usize, usize)>)> = vec![(-multiplicity * p, Vec::new())];
        for &k in &pattern {
            let factor = normal_ordered_power(k);
            expanded = expanded
                .iter()
                .flat_map(|(c, powers)| {
                    factor.iter().map(move |&(c2, cr, an)| {
                        let mut next = powers.clone();
                        next.push((cr, an));
                        (c * c2, next)
                    })
                })
                .collect();
        }
        for (coef, powers) in expanded {
            let created: usize = powers.iter().map(|t| t.0).sum();
            let annihilated: usize = powers.iter().map(|t| t.1).sum();
            let degree = created + annihilated;
            let keep = match (degree, options.kind) {
                (0, _) => false,
                (2, QuarticKind::Rwa) => false,
                (2, QuarticKind::Full) => options.keep_quadratic,
                (_, QuarticKind::Rwa) => created == annihilated,
                (_, QuarticKind::Full) => true,
            };
            if keep {
                *terms.entry(powers).or_insert(0.0) += coef;
            }
        }
    }
    terms.retain(|_, v| *v != 0.0);
    terms
}

/// Quartic Hamiltonian `−(E_J/24)∫(Σ Ξ_m θ̂_m)⁴ dx/L_x` in the chosen approximation.
pub fn build_h4(params: &JunctionParams, space: &FockSpace, options: QuarticOptions) -> Result<OperatorMatrix> {
    check_space(params, space)?;
    h4_on_leading_modes(params, space, space.n_modes(), options)
}

// H⁴ acting on modes 0..n_modes of a possibly larger space.
pub(crate) fn h4_on_leading_modes(
    params: &JunctionParams,
    space: &FockSpace,
    n_modes: usize,
    options: QuarticOptions,
) -> Result<OperatorMatrix> {
    let terms = quartic_terms(params, n_modes, options);
    let parts = terms
        .iter()
        .map(|(powers, &coef)| Ok(normal_ordered_monomial(space, powers)?.scaled_real(coef)))
        .collect::<Result<Vec<_>>>()?;
    OperatorMatrix::sum(space, &parts)
}

/// `H² + H⁴`.
pub fn junction_hamiltonian(params: &JunctionParams, space: &FockSpace, options: QuarticOptions) -> Result<OperatorMatrix> {
    build_h2(params, space)?.add(&build_h4(params, space, options)?)
}

/// Lowest levels of a Hamiltonian relative to its ground state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub eigenvalues: Vec<f64>,
    pub labels: Vec<Vec<usize>>,
    /// `|E_i(cutoffs + 2) − E_i(cutoffs)|` per level, when measured.
    pub cutoff_drift: Option<Vec<f64>>,
    pub ground_energy: f64,
}

impl SpectrumResult {
    pub fn max_drift(&self) -> Option<f64> {
        self.cutoff_drift.as_ref().map(|d| d.iter().cloned().fold(0.0, f64::max))
    }

    /// Index of the level labeled with the given occupations.
    pub fn level_of(&self, occupations: &[usize]) -> Option<usize> {
        self.labels.iter().position(|l| l == occupations)
    }
}

/// Assigns each eigenvector the bare Fock state of largest overlap, never
/// reusing a state; ties go to the lexicographically smaller tuple.
pub fn assign_labels(space: &FockSpace, pairs: &Eigenpairs) -> Vec<Vec<usize>> {
    let mut used = vec![false; space.dimension()];
    let mut labels = Vec::with_capacity(pairs.len());
    for level in 0..pairs.len() {
        let column = pairs.vectors.column(level);
        let mut best: Option<(usize, f64)> = None;
        for (i, amp) in column.iter().enumerate() {
            if used[i] {
                continue;
            }
            let weight = amp.norm_sqr();
            match best {
                Some((_, w)) if weight <= w + 1e-12 => {}
                _ => best = Some((i, weight)),
            }
        }
        let (index, _) = best.expect("fewer levels than basis states");
        used[index] = true;
        labels.push(space.occupations(index));
    }
    labels
}

/// `k` lowest levels of a hermitian Hamiltonian, ground state subtracted.
pub fn eigenspectrum(h: &OperatorMatrix, k: usize) -> Result<SpectrumResult> {
    let pairs = lowest_eigenpairs(h, k)?;
    let ground = pairs.values[0];
    Ok(SpectrumResult {
        eigenvalues: pairs.values.iter().map(|e| e - ground).collect(),
        labels: assign_labels(h.space(), &pairs),
        cutoff_drift: None,
        ground_energy: ground,
    })
}

/// Spectrum of `H² + H⁴` with the truncation drift measured by rebuilding at
/// `cutoffs + 2`.
pub fn junction_spectrum(
    params: &JunctionParams,
    cutoffs: &[usize],
    options: QuarticOptions,
    k: usize,
) -> Result<SpectrumResult> {
    let space = FockSpace::new(cutoffs.to_vec())?;
    let mut result = eigenspectrum(&junction_hamiltonian(params, &space, options)?, k)?;
    let larger = space.enlarged(DRIFT_EXTRA);
    let reference = eigenspectrum(&junction_hamiltonian(params, &larger, options)?, k)?;
    result.cutoff_drift = Some(
        result
            .eigenvalues
            .iter()
            .zip(&reference.eigenvalues)
            .map(|(a, b)| (a - b).abs())
            .collect(),
    );
    Ok(result)
}

/// One grid point of the length sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub inv_length_ratio: f64,
    pub spectrum: SpectrumResult,
    pub u00: f64,
    pub u01: f64,
    pub u11: f64,
}

/// Spectrum and Kerr coefficients across a grid of `λ_J / L_x`, evaluated in parallel.
pub fn sweep_spectrum_vs_length(
    template: &JunctionParams,
    inv_length_grid: &[f64],
    cutoffs: &[usize],
    options: QuarticOptions,
    k: usize,
) -> Result<Vec<SweepPoint>> {
    if inv_length_grid.is_empty() {
        return Err(Error::domain("jhamiltonian", "inverse-length grid is empty"));
    }
    let n_modes = cutoffs.len().max(2);
    inv_length_grid
        .par_iter()
        .map(|&ratio| {
            if !(ratio > 0.0 && ratio.is_finite()) {
                return Err(Error::domain(
                    "jhamiltonian",
                    format!("lambda_J / L_x must be positive (got {ratio})"),
                ));
            }
            let params = template
                .with_length(template.lambda_j() / ratio)?
                .with_n_modes(template.n_modes().max(n_modes))?;
            let spectrum = junction_spectrum(&params, cutoffs, options, k)?;
            let kerr = kerr_tensor(&params, 2)?;
            Ok(SweepPoint {
                inv_length_ratio: ratio,
                spectrum,
                u00: kerr.u(0, 0),
                u01: kerr.u(0, 1),
                u11: kerr.u(1, 1),
            })
        })
        .collect()
}

/// Total number operator over all modes of a space.
pub fn total_number(space: &FockSpace) -> Result<OperatorMatrix> {
    let parts = (0..space.n_modes()).map(|m| number(space, m)).collect::<Result<Vec<_>>>()?;
    OperatorMatrix::sum(space, &parts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::profile_at_phase;
    use crate::quadrature::integrate;
    use proptest::prelude::*;

    fn params(plasma_over_ec: f64, inv_length: f64, n_modes: usize) -> JunctionParams {
        JunctionParams::from_ratios(1.0, plasma_over_ec, 1.0, inv_length, n_modes).unwrap()
    }

    fn quadrature_overlap(idx: [usize; 4]) -> f64 {
        let f = |u: f64| idx.iter().map(|&m| profile_at_phase(m, u)).product::<f64>() / PI;
        integrate(f, -PI / 2.0, PI / 2.0, 1e-14, 1e-13).unwrap()
    }

    #[test]
    fn overlap_examples() {
        assert!((overlap(&[0, 0, 0, 0]) - 1.0).abs() < 1e-15);
        assert!((overlap(&[0, 0, 1, 1]) - 1.0).abs() < 1e-15);
        assert!((overlap(&[1, 1, 1, 1]) - 1.5).abs() < 1e-15);
        assert!(overlap(&[0, 0, 0, 1]).abs() < 1e-15);
        assert!((overlap(&[0, 1, 1, 2]) + std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((overlap(&[0, 1, 2, 3]) - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn overlaps_match_quadrature() {
        for m in 0..5 {
            for n in m..5 {
                for p in n..5 {
                    for q in p..5 {
                        let closed = overlap(&[m, n, p, q]);
                        let numeric = quadrature_overlap([m, n, p, q]);
                        assert!((closed - numeric).abs() < 1e-10, "{m}{n}{p}{q}: {closed} vs {numeric}");
                    }
                }
            }
        }
    }

    #[test]
    fn overlap_integral_checks_indices() {
        let basis = ModeBasis::new(&params(10.0, 1.0, 3));
        assert!(overlap_integral(&basis, 0, 1, 1, 2).is_ok());
        assert!(overlap_integral(&basis, 0, 1, 1, 3).is_err());
    }

    #[test]
    fn kerr_long_junction_limits() {
        let p = params(10.0, 0.01, 4);
        let k = kerr_tensor(&p, 4).unwrap();
        assert!((k.u(0, 0) - 1.0).abs() < 2e-3);
        assert!((k.u(0, 1) / 2.0 - 1.0).abs() < 2e-3);
        assert!((k.u(1, 1) / 1.5 - 1.0).abs() < 2e-3);
        let u012 = k.u_triple(0, 1, 2).unwrap();
        assert!((u012.abs() * 2f64.sqrt() - 1.0).abs() < 2e-2);
        let u0123 = k.u_quad([0, 1, 2, 3]).unwrap();
        assert!((u0123 / 2f64.sqrt() - 1.0).abs() < 2e-2);
    }

    #[test]
    fn kerr_frequency_prefactor() {
        let p = params(10.0, 1.0, 2);
        let k = kerr_tensor(&p, 2).unwrap();
        let expected = 1.5 / (1.0 + PI * PI);
        assert!((k.u(1, 1) - expected).abs() < 1e-12);
        assert!((k.u(1, 1) - 0.1380).abs() < 1e-4);
    }

    #[test]
    fn kerr_pairwise_matches_h4_matrix_elements() {
        // oracle: matrix elements of the assembled H⁴ with overlaps from quadrature
        let p = params(10.0, 1.0, 2);
        let k = kerr_tensor(&p, 2).unwrap();
        let space = FockSpace::new(vec![3, 3]).unwrap();
        let h4 = build_h4(&p, &space, QuarticOptions::RWA).unwrap();
        let w: Vec<f64> = (0..2).map(|m| mode_frequency(&p, m)).collect();
        let u11 = p.e_c() * (p.omega_pl() / w[1]).powi(2) * quadrature_overlap([1, 1, 1, 1]);
        let two = space.index_of(&[0, 2]).unwrap();
        assert!((h4.get(two, two).re + u11).abs() < 1e-10);
        assert!((k.u(1, 1) - u11).abs() < 1e-10);
        let u01 = 2.0 * p.e_c() * p.omega_pl().powi(2) / (w[0] * w[1]) * quadrature_overlap([0, 0, 1, 1]);
        let one_one = space.index_of(&[1, 1]).unwrap();
        assert!((h4.get(one_one, one_one).re + u01).abs() < 1e-10);
    }

    #[test]
    fn kerr_tensor_symmetry_and_parity() {
        let k = kerr_tensor(&params(10.0, 0.7, 4), 4).unwrap();
        for m in 0..4 {
            for n in 0..4 {
                assert_eq!(k.u(m, n), k.u(n, m));
                assert!(k.u(m, n) >= 0.0);
                for p in 0..4 {
                    for q in 0..4 {
                        let v = k.overlap(m, n, p, q);
                        assert_eq!(v, k.overlap(n, m, q, p));
                        assert_eq!(v, k.overlap(q, p, n, m));
                        if (m + n + p + q) % 2 == 1 {
                            assert_eq!(v, 0.0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn h2_examples() {
        let p = params(10.0, 1.0, 2);
        let s1 = FockSpace::new(vec![3]).unwrap();
        let h = build_h2(&p, &s1).unwrap();
        for n in 0..=3 {
            assert!((h.get(n, n).re - n as f64 * p.omega_pl()).abs() < 1e-12);
        }
        let s2 = FockSpace::new(vec![2, 2]).unwrap();
        let h = build_h2(&p, &s2).unwrap();
        let i = s2.index_of(&[1, 1]).unwrap();
        assert!((h.get(i, i).re - p.omega_pl() - mode_frequency(&p, 1)).abs() < 1e-12);
        assert_eq!(h.nnz(), s2.dimension() - 1);
        assert!(build_h2(&p, &FockSpace::new(vec![1, 1, 1]).unwrap()).is_err());
    }

    #[test]
    fn rwa_single_mode_kerr_ladder() {
        let p = params(10.0, 1.0, 1);
        let s = FockSpace::new(vec![6]).unwrap();
        let h4 = build_h4(&p, &s, QuarticOptions::RWA).unwrap();
        let u = kerr_tensor(&p, 1).unwrap().u(0, 0);
        assert_eq!(h4.nnz(), 5);
        for n in 0..=6usize {
            let expected = -0.5 * u * (n * n.saturating_sub(1)) as f64;
            assert!((h4.get(n, n).re - expected).abs() < 1e-12);
        }
        let spectrum = eigenspectrum(&junction_hamiltonian(&p, &s, QuarticOptions::RWA).unwrap(), 4).unwrap();
        for (n, e) in spectrum.eigenvalues.iter().enumerate() {
            let expected = n as f64 * p.omega_pl() - 0.5 * u * (n * n.saturating_sub(1)) as f64;
            assert!((e - expected).abs() < 1e-10);
            assert_eq!(spectrum.labels[n], vec![n]);
        }
    }

    #[test]
    fn rwa_contains_pair_exchange() {
        let p = params(10.0, 1.0, 2);
        let s = FockSpace::new(vec![2, 2]).unwrap();
        let h4 = build_h4(&p, &s, QuarticOptions::RWA).unwrap();
        let u01 = kerr_tensor(&p, 2).unwrap().u(0, 1);
        let a = s.index_of(&[2, 0]).unwrap();
        let b = s.index_of(&[0, 2]).unwrap();
        // −(U01/4) b0†² b1² connects |0,2⟩ to |2,0⟩ with amplitude 2
        assert!((h4.get(a, b).re + 0.5 * u01).abs() < 1e-12);
    }

    #[test]
    fn rwa_conserves_number_and_full_keeps_parity() {
        let p = params(10.0, 1.0, 3);
        let s = FockSpace::new(vec![3, 3, 3]).unwrap();
        let n_op = total_number(&s).unwrap();
        let rwa = junction_hamiltonian(&p, &s, QuarticOptions::RWA).unwrap();
        assert!(rwa.commutator(&n_op).unwrap().max_abs() <= 1e-12 * rwa.max_abs());
        let full = junction_hamiltonian(&p, &s, QuarticOptions::FULL).unwrap();
        assert!(full.commutator(&n_op).unwrap().max_abs() > 1e-3);
        for (r, c, _) in full.iter() {
            assert_eq!((s.total_occupation(r) + s.total_occupation(c)) % 2, 0);
        }
        for h in [&rwa, &full] {
            assert!(h.hermiticity_deviation() <= 1e-12 * h.max_abs());
        }
    }

    #[test]
    fn harmonic_spectrum_without_nonlinearity() {
        let p = params(10.0, 1.0, 2);
        let s = FockSpace::new(vec![4, 4]).unwrap();
        let spectrum = eigenspectrum(&build_h2(&p, &s).unwrap(), 6).unwrap();
        let w0 = p.omega_pl();
        let w1 = mode_frequency(&p, 1);
        let mut expected: Vec<f64> = (0..=4)
            .flat_map(|a| (0..=4).map(move |b| a as f64 * w0 + b as f64 * w1))
            .collect();
        expected.sort_by(f64::total_cmp);
        for (e, x) in spectrum.eigenvalues.iter().zip(&expected) {
            assert!((e - x).abs() < 1e-10);
        }
        assert_eq!(spectrum.labels[1], vec![1, 0]);
    }

    #[test]
    fn full_single_mode_second_order_ground_energy() {
        // −P(X⁴ − 3) on |0⟩ couples to |2⟩ with −6√2 P and to |4⟩ with −√24 P,
        // so E₀ ≈ −(72/2 + 24/4) P²/ω; the remainder must fall off as E_C³/ω_pl²
        let residual = |ratio: f64| {
            let p = params(ratio, 1.0, 1);
            let s = FockSpace::new(vec![12]).unwrap();
            let h = junction_hamiltonian(&p, &s, QuarticOptions::FULL).unwrap();
            let e0 = lowest_eigenpairs(&h, 1).unwrap().values[0];
            let pf = quartic_prefactor(&p, [0; 4]);
            let second_order = -42.0 * pf * pf / p.omega_pl();
            assert!((e0 / second_order - 1.0).abs() < 0.1);
            e0 - second_order
        };
        let scaling = residual(50.0) / residual(100.0);
        assert!((scaling / 4.0 - 1.0).abs() < 0.1, "residual ratio {scaling}");
    }

    #[test]
    fn labels_are_unique() {
        let p = params(10.0, 1.0, 3);
        let spectrum = junction_spectrum(&p, &[3, 3, 3], QuarticOptions::FULL_QUARTIC_ONLY, 10).unwrap();
        let mut labels = spectrum.labels.clone();
        labels.sort();
        labels.dedup();
        assert_eq!(labels.len(), 10);
        assert_eq!(spectrum.labels[0], vec![0, 0, 0]);
        assert!(spectrum.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn rwa_spectrum_has_no_cutoff_drift() {
        let p = params(10.0, 1.0, 3);
        let spectrum = junction_spectrum(&p, &[5, 5, 5], QuarticOptions::RWA, 6).unwrap();
        assert!(spectrum.max_drift().unwrap() < 1e-6 * p.e_c());
    }

    #[test]
    fn sweep_rows_in_grid_order() {
        let template = params(10.0, 1.0, 3);
        let grid = [0.5, 1.0, 2.0];
        let rows = sweep_spectrum_vs_length(&template, &grid, &[2, 2, 2], QuarticOptions::RWA, 4).unwrap();
        assert_eq!(rows.len(), 3);
        for (row, g) in rows.iter().zip(grid) {
            assert_eq!(row.inv_length_ratio, g);
        }
        assert!(rows[2].u11 < rows[0].u11);
        assert!(sweep_spectrum_vs_length(&template, &[], &[2], QuarticOptions::RWA, 1).is_err());
    }

    proptest! {
        #[test]
        fn overlap_permutation_symmetry(m in 0usize..6, n in 0usize..6, p in 0usize..6, q in 0usize..6) {
            let v = overlap(&[m, n, p, q]);
            for perm in [[n, m, p, q], [p, n, m, q], [q, p, n, m], [m, q, p, n]] {
                prop_assert!((overlap(&perm) - v).abs() < 1e-14);
            }
            if (m + n + p + q) % 2 == 1 {
                prop_assert!(v.abs() < 1e-15);
            }
        }

        #[test]
        fn built_hamiltonians_are_hermitian(inv in 0.2f64..3.0, ratio in 10.0f64..60.0, full in any::<bool>()) {
            let p = params(ratio, inv, 2);
            let s = FockSpace::new(vec![3, 3]).unwrap();
            let opts = if full { QuarticOptions::FULL } else { QuarticOptions::RWA };
            let h = junction_hamiltonian(&p, &s, opts).unwrap();
            prop_assert!(h.hermiticity_deviation() <= 1e-12 * h.max_abs());
        }
    }
}
