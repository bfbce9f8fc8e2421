//! Truncated multimode bosonic Fock spaces and operators on them.
//!
//! Basis states are ordered lexicographically in the occupation tuple with
//! mode 0 varying slowest, so `index = Σ_m n_m · stride_m` with the last mode
//! having stride 1. Every module goes through [`FockSpace::index_of`] and
//! [`FockSpace::occupation`] instead of recomputing the layout.

mod operator;

use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use operator::OperatorMatrix;

/// Product basis `⊗_m {|0⟩, …, |n_max(m)⟩}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FockSpace {
    cutoffs: Vec<usize>,
    strides: Vec<usize>,
    dimension: usize,
}

impl TryFrom<Vec<usize>> for FockSpace {
    type Error = Error;

    fn try_from(cutoffs: Vec<usize>) -> Result<Self> {
        FockSpace::new(cutoffs)
    }
}

impl From<FockSpace> for Vec<usize> {
    fn from(space: FockSpace) -> Self {
        space.cutoffs
    }
}

impl FockSpace {
    /// Space with the given per-mode maximum occupations (each ≥ 1).
    pub fn new(cutoffs: Vec<usize>) -> Result<Self> {
        if cutoffs.is_empty() {
            return Err(Error::domain("fock", "a Fock space needs at least one mode"));
        }
        if let Some(m) = cutoffs.iter().position(|&c| c == 0) {
            return Err(Error::domain(
                "fock",
                format!("cutoff of mode {m} must be at least 1"),
            ));
        }
        let mut strides = vec![1usize; cutoffs.len()];
        let mut dimension = 1usize;
        for m in (0..cutoffs.len()).rev() {
            strides[m] = dimension;
            dimension = dimension.checked_mul(cutoffs[m] + 1).ok_or(Error::DimensionOverflow {
                dimension: usize::MAX,
                limit: usize::MAX,
            })?;
        }
        Ok(FockSpace {
            cutoffs,
            strides,
            dimension,
        })
    }

    /// `n_modes` modes sharing one cutoff.
    pub fn uniform(n_modes: usize, n_max: usize) -> Result<Self> {
        Self::new(vec![n_max; n_modes])
    }

    pub fn n_modes(&self) -> usize {
        self.cutoffs.len()
    }

    pub fn cutoffs(&self) -> &[usize] {
        &self.cutoffs
    }

    pub fn cutoff(&self, mode: usize) -> usize {
        self.cutoffs[mode]
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn stride(&self, mode: usize) -> usize {
        self.strides[mode]
    }

    /// Index of an occupation tuple, or `None` if it is outside the truncation.
    pub fn index_of(&self, occupations: &[usize]) -> Option<usize> {
        if occupations.len() != self.n_modes() {
            return None;
        }
        let mut index = 0;
        for (m, &n) in occupations.iter().enumerate() {
            if n > self.cutoffs[m] {
                return None;
            }
            index += n * self.strides[m];
        }
        Some(index)
    }

    pub fn occupation(&self, index: usize, mode: usize) -> usize {
        (index / self.strides[mode]) % (self.cutoffs[mode] + 1)
    }

    pub fn occupations(&self, index: usize) -> Vec<usize> {
        (0..self.n_modes()).map(|m| self.occupation(index, m)).collect()
    }

    /// Total excitation number of a basis state.
    pub fn total_occupation(&self, index: usize) -> usize {
        (0..self.n_modes()).map(|m| self.occupation(index, m)).sum()
    }

    /// Space with the modes of `self` followed by those of `other`.
    pub fn product(&self, other: &FockSpace) -> Result<FockSpace> {
        let mut cutoffs = self.cutoffs.clone();
        cutoffs.extend_from_slice(&other.cutoffs);
        FockSpace::new(cutoffs)
    }

    /// `sites` copies of this space, site 0 slowest.
    pub fn repeat(&self, sites: usize) -> Result<FockSpace> {
        if sites == 0 {
            return Err(Error::domain("fock", "need at least one site"));
        }
        FockSpace::new(self.cutoffs.repeat(sites))
    }

    /// Copy with every cutoff raised by `extra`.
    pub fn enlarged(&self, extra: usize) -> FockSpace {
        FockSpace::new(self.cutoffs.iter().map(|c| c + extra).collect()).expect("cutoffs stay positive")
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.n_modes() {
            return Err(Error::ModeIndex {
                index: mode,
                n_modes: self.n_modes(),
            });
        }
        Ok(())
    }
}

/// Normal-ordered product `Π (b_m†)^c (b_m)^a` over the listed `(mode, c, a)` factors.
pub(crate) fn monomial(space: &FockSpace, factors: &[(usize, usize, usize)]) -> Result<OperatorMatrix> {
    for &(mode, _, _) in factors {
        space.check_mode(mode)?;
    }
    let mut triplets = Vec::with_capacity(space.dimension());
    'basis: for col in 0..space.dimension() {
        let mut row = col;
        let mut squared = 1.0f64;
        for &(mode, c, a) in factors {
            let n = space.occupation(col, mode);
            if a > n {
                continue 'basis;
            }
            let after = n - a + c;
            if after > space.cutoff(mode) {
                continue 'basis;
            }
            // b^a |n⟩ = sqrt(n!/(n-a)!) |n-a⟩, then (b†)^c adds sqrt((n-a+c)!/(n-a)!)
            for k in (n - a + 1)..=n {
                squared *= k as f64;
            }
            for k in (n - a + 1)..=after {
                squared *= k as f64;
            }
            row = row + after * space.stride(mode) - n * space.stride(mode);
        }
        triplets.push((row, col, C64::new(squared.sqrt(), 0.0)));
    }
    OperatorMatrix::from_triplets(space, triplets)
}

/// Ladder operator `b_m`: `b_m |…, n, …⟩ = √n |…, n−1, …⟩`.
pub fn annihilation(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    monomial(space, &[(mode, 0, 1)])
}

/// `b_m†`, truncated at the cutoff.
pub fn creation(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    monomial(space, &[(mode, 1, 0)])
}

/// `n̂_m = b_m† b_m`.
pub fn number(space: &FockSpace, mode: usize) -> Result<OperatorMatrix> {
    monomial(space, &[(mode, 1, 1)])
}

/// `Σ_m n̂_m`.
pub fn total_number(space: &FockSpace) -> OperatorMatrix {
    OperatorMatrix::from_diagonal(space, |i| space.total_occupation(i) as f64)
}

/// `Π_m (b_m†)^{c_m} (b_m)^{a_m}` with `powers[m] = (c_m, a_m)`; modes beyond
/// the end of `powers` act as the identity.
pub fn normal_ordered_monomial(space: &FockSpace, powers: &[(usize, usize)]) -> Result<OperatorMatrix> {
    if powers.len() > space.n_modes() {
        return Err(Error::ModeIndex {
            index: powers.len() - 1,
            n_modes: space.n_modes(),
        });
    }
    let factors: Vec<_> = powers
        .iter()
        .enumerate()
        .filter(|(_, &(c, a))| c + a > 0)
        .map(|(m, &(c, a))| (m, c, a))
        .collect();
    monomial(space, &factors)
}

/// Places a single-site operator on `site` of a lattice made of identical copies
/// of the operator's space, acting as the identity elsewhere.
pub fn tensor_embed(op: &OperatorMatrix, site: usize, lattice_space: &FockSpace) -> Result<OperatorMatrix> {
    let local = op.space();
    let k = local.n_modes();
    let n_sites = lattice_space.n_modes() / k;
    let is_repeat = lattice_space.n_modes().is_multiple_of(k)
        && lattice_space.cutoffs().chunks(k).all(|chunk| chunk == local.cutoffs());
    if !is_repeat {
        return Err(Error::DimensionMismatch(format!(
            "lattice cutoffs {:?} are not copies of the site cutoffs {:?}",
            lattice_space.cutoffs(),
            local.cutoffs()
        )));
    }
    if site >= n_sites {
        return Err(Error::DimensionMismatch(format!(
            "site {site} out of range for {n_sites} sites"
        )));
    }
    let local_dim = local.dimension();
    let stride = lattice_space.stride(site * k + k - 1);
    // column-wise view of the local operator
    let mut by_col: Vec<Vec<(usize, C64)>> = vec![Vec::new(); local_dim];
    for (r, c, v) in op.iter() {
        by_col[c].push((r, v));
    }
    let mut triplets = Vec::with_capacity(op.nnz() * (lattice_space.dimension() / local_dim));
    for col in 0..lattice_space.dimension() {
        let local_col = (col / stride) % local_dim;
        let base = col - local_col * stride;
        for &(local_row, v) in &by_col[local_col] {
            triplets.push((base + local_row * stride, col, v));
        }
    }
    OperatorMatrix::from_triplets(lattice_space, triplets)
}

/// State vector on a Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockState {
    space: FockSpace,
    amplitudes: DVector<C64>,
}

impl FockState {
    pub fn from_amplitudes(space: &FockSpace, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != space.dimension() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for a space of dimension {}",
                amplitudes.len(),
                space.dimension()
            )));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::domain("fock", "state amplitudes must be finite"));
        }
        Ok(FockState {
            space: space.clone(),
            amplitudes,
        })
    }

    /// Basis state `|n_0, n_1, …⟩`.
    pub fn basis(space: &FockSpace, occupations: &[usize]) -> Result<Self> {
        let index = space.index_of(occupations).ok_or_else(|| {
            Error::domain(
                "fock",
                format!("occupations {occupations:?} outside cutoffs {:?}", space.cutoffs()),
            )
        })?;
        let mut amplitudes = DVector::zeros(space.dimension());
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(FockState {
            space: space.clone(),
            amplitudes,
        })
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::domain("fock", "cannot normalize the zero vector"));
        }
        Ok(FockState {
            space: self.space.clone(),
            amplitudes: &self.amplitudes / C64::new(n, 0.0),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn population(&self, index: usize) -> f64 {
        self.amplitudes[index].norm_sqr()
    }

    /// Summed population of basis states selected by `select(index)`.
    pub fn population_where(&self, select: impl Fn(usize) -> bool) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| select(*i))
            .map(|(_, a)| a.norm_sqr())
            .sum()
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> C64 {
        op.expectation(self.amplitudes.as_slice())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn dimension_and_ordering() {
        let s = FockSpace::new(vec![2, 1, 3]).unwrap();
        assert_eq!(s.dimension(), 3 * 2 * 4);
        assert_eq!(s.index_of(&[0, 0, 0]), Some(0));
        assert_eq!(s.index_of(&[0, 0, 1]), Some(1));
        assert_eq!(s.index_of(&[0, 1, 0]), Some(4));
        assert_eq!(s.index_of(&[1, 0, 0]), Some(8));
        assert_eq!(s.index_of(&[3, 0, 0]), None);
        for i in 0..s.dimension() {
            assert_eq!(s.index_of(&s.occupations(i)), Some(i));
        }
        // lexicographic: consecutive indices are increasing tuples
        for i in 1..s.dimension() {
            assert!(s.occupations(i - 1) < s.occupations(i));
        }
    }

    #[test]
    fn invalid_spaces() {
        assert!(FockSpace::new(vec![]).is_err());
        assert!(FockSpace::new(vec![2, 0]).is_err());
        assert!(FockSpace::new(vec![usize::MAX / 2, usize::MAX / 2]).is_err());
    }

    #[test]
    fn annihilation_examples() {
        let s = FockSpace::uniform(1, 2).unwrap();
        let b = annihilation(&s, 0).unwrap();
        let two = FockState::basis(&s, &[2]).unwrap();
        let out = b.apply(two.amplitudes().as_slice());
        assert!((out[1] - c(2f64.sqrt())).norm() < 1e-15);
        assert!(out[0].norm() == 0.0 && out[2].norm() == 0.0);
        let vac = FockState::basis(&s, &[0]).unwrap();
        assert!(b.apply(vac.amplitudes().as_slice()).iter().all(|v| v.norm() == 0.0));
        assert!(annihilation(&s, 1).is_err());
    }

    #[test]
    fn creation_is_adjoint_of_annihilation() {
        let s = FockSpace::new(vec![3, 2]).unwrap();
        for m in 0..2 {
            assert_eq!(annihilation(&s, m).unwrap().adjoint(), creation(&s, m).unwrap());
        }
    }

    #[test]
    fn commutator_below_cutoff() {
        let s = FockSpace::new(vec![4, 3]).unwrap();
        for m in 0..2 {
            let b = annihilation(&s, m).unwrap();
            let bd = creation(&s, m).unwrap();
            let comm = b.commutator(&bd).unwrap();
            for i in 0..s.dimension() {
                if s.occupation(i, m) < s.cutoff(m) {
                    for j in 0..s.dimension() {
                        let expected = if i == j { c(1.0) } else { c(0.0) };
                        assert!((comm.get(i, j) - expected).norm() < 1e-14);
                        assert!((comm.get(j, i) - expected).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn monomial_examples() {
        let s = FockSpace::uniform(1, 4).unwrap();
        let n = normal_ordered_monomial(&s, &[(1, 1)]).unwrap();
        let nn = normal_ordered_monomial(&s, &[(2, 2)]).unwrap();
        let id = normal_ordered_monomial(&s, &[(0, 0)]).unwrap();
        for k in 0..=4 {
            assert!((n.get(k, k) - c(k as f64)).norm() < 1e-14);
            assert!((nn.get(k, k) - c((k * k.saturating_sub(1)) as f64)).norm() < 1e-12);
            assert_eq!(id.get(k, k), c(1.0));
        }
        assert_eq!(n.nnz(), 4);
        assert_eq!(id, OperatorMatrix::identity(&s));
        assert!(normal_ordered_monomial(&s, &[(1, 0), (0, 1)]).is_err());
    }

    #[test]
    fn monomial_matches_ladder_products_below_cutoff() {
        let s = FockSpace::new(vec![5, 4]).unwrap();
        let bd0 = creation(&s, 0).unwrap();
        let b1 = annihilation(&s, 1).unwrap();
        let product = bd0.matmul(&bd0).unwrap().matmul(&b1).unwrap();
        let mono = normal_ordered_monomial(&s, &[(2, 0), (0, 1)]).unwrap();
        assert!(product.sub(&mono).unwrap().max_abs() < 1e-13);
        assert_eq!(product.nnz(), mono.nnz());
    }

    #[test]
    fn embedding() {
        let site = FockSpace::new(vec![2, 1]).unwrap();
        let lattice = site.repeat(3).unwrap();
        let id = tensor_embed(&OperatorMatrix::identity(&site), 1, &lattice).unwrap();
        assert_eq!(id, OperatorMatrix::identity(&lattice));
        let n0 = number(&site, 0).unwrap();
        let embedded = tensor_embed(&n0, 0, &lattice).unwrap();
        for i in 0..lattice.dimension() {
            assert!((embedded.get(i, i) - c(lattice.occupation(i, 0) as f64)).norm() < 1e-14);
        }
        let direct = number(&lattice, 4).unwrap();
        assert_eq!(tensor_embed(&n0, 2, &lattice).unwrap(), direct);
        let b_site = annihilation(&site, 1).unwrap();
        let a = tensor_embed(&b_site, 0, &lattice).unwrap();
        let b = tensor_embed(&b_site.adjoint(), 2, &lattice).unwrap();
        assert_eq!(a.commutator(&b).unwrap().nnz(), 0);
        assert!(tensor_embed(&n0, 3, &lattice).is_err());
        let other = FockSpace::new(vec![2, 2, 2]).unwrap();
        assert!(tensor_embed(&n0, 0, &other).is_err());
    }

    #[test]
    fn state_basics() {
        let s = FockSpace::new(vec![1, 1]).unwrap();
        let st = FockState::basis(&s, &[1, 0]).unwrap();
        assert!(st.is_normalized(1e-12));
        assert_eq!(st.population(2), 1.0);
        assert_eq!(st.expectation(&number(&s, 0).unwrap()), c(1.0));
        assert!(FockState::basis(&s, &[2, 0]).is_err());
        let z = FockState::from_amplitudes(&s, DVector::zeros(4)).unwrap();
        assert!(z.normalized().is_err());
        assert!(FockState::from_amplitudes(&s, DVector::zeros(3)).is_err());
    }

    fn arb_space() -> impl Strategy<Value = FockSpace> {
        prop::collection::vec(1usize..4, 1..4).prop_map(|c| FockSpace::new(c).unwrap())
    }

    proptest! {
        #[test]
        fn distinct_modes_commute(space in arb_space(), m in 0usize..3, n in 0usize..3) {
            prop_assume!(m < space.n_modes() && n < space.n_modes() && m != n);
            let b = annihilation(&space, m).unwrap();
            let bd = creation(&space, n).unwrap();
            prop_assert_eq!(b.commutator(&bd).unwrap().nnz(), 0);
        }

        #[test]
        fn sparse_matches_dense(space in arb_space(), seed in 0u64..1000) {
            prop_assume!(space.dimension() <= 64);
            let m = space.n_modes() - 1;
            let op = annihilation(&space, m).unwrap()
                .add(&creation(&space, 0).unwrap().scaled(C64::new(0.3, -0.7))).unwrap();
            let x: Vec<C64> = (0..space.dimension())
                .map(|i| C64::new(((i as u64 * 31 + seed) % 17) as f64 - 8.0, ((i as u64 * 7 + seed) % 5) as f64))
                .collect();
            let sparse = op.apply(&x);
            let dense = op.to_dense() * DVector::from_vec(x.clone());
            for (a, b) in sparse.iter().zip(dense.iter()) {
                prop_assert!((a - b).norm() <= 1e-14 * (1.0 + b.norm()));
            }
        }
    }
}
