use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::FockSpace;
use crate::error::{Error, Result};

/// Row count above which matrix-vector products are split across threads.
const PARALLEL_ROWS: usize = 4096;

/// Sparse complex operator on a [`FockSpace`], stored in compressed-row form.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    space: FockSpace,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl OperatorMatrix {
    /// Builds from `(row, col, value)` triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(space: &FockSpace, mut triplets: Vec<(usize, usize, C64)>) -> Result<Self> {
        let dim = space.dimension();
        if let Some(&(r, c, _)) = triplets.iter().find(|(r, c, _)| *r >= dim || *c >= dim) {
            return Err(Error::DimensionMismatch(format!(
                "entry ({r}, {c}) outside a {dim}x{dim} operator"
            )));
        }
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|t| t.2 != C64::new(0.0, 0.0));
        let mut row_ptr = vec![0usize; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let cols = merged.iter().map(|t| t.1).collect();
        let vals = merged.iter().map(|t| t.2).collect();
        Ok(OperatorMatrix {
            space: space.clone(),
            row_ptr,
            cols,
            vals,
        })
    }

    pub fn zeros(space: &FockSpace) -> Self {
        OperatorMatrix {
            space: space.clone(),
            row_ptr: vec![0; space.dimension() + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(space: &FockSpace) -> Self {
        Self::from_diagonal(space, |_| 1.0)
    }

    /// Diagonal operator with entries `f(index)`.
    pub fn from_diagonal(space: &FockSpace, f: impl Fn(usize) -> f64) -> Self {
        let triplets = (0..space.dimension())
            .map(|i| (i, i, C64::new(f(i), 0.0)))
            .collect();
        Self::from_triplets(space, triplets).expect("diagonal entries are in range")
    }

    pub fn space(&self) -> &FockSpace {
        &self.space
    }

    pub fn dimension(&self) -> usize {
        self.space.dimension()
    }

    /// Number of stored nonzeros.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates over `(row, col, value)` of the stored nonzeros, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dimension()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.cols[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.cols[range.clone()].binary_search(&c) {
            Ok(k) => self.vals[range.start + k],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    fn triplets(&self) -> Vec<(usize, usize, C64)> {
        self.iter().collect()
    }

    fn check_space(&self, other: &OperatorMatrix) -> Result<()> {
        if self.space != other.space {
            return Err(Error::DimensionMismatch(format!(
                "operators act on different spaces (cutoffs {:?} vs {:?})",
                self.space.cutoffs(),
                other.space.cutoffs()
            )));
        }
        Ok(())
    }

    pub fn adjoint(&self) -> Self {
        let triplets = self.iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(&self.space, triplets).expect("same dimension")
    }

    pub fn scaled(&self, factor: C64) -> Self {
        let mut out = self.clone();
        out.vals.iter_mut().for_each(|v| *v *= factor);
        out.prune();
        out
    }

    pub fn scaled_real(&self, factor: f64) -> Self {
        self.scaled(C64::new(factor, 0.0))
    }

    fn prune(&mut self) {
        if self.vals.iter().any(|v| *v == C64::new(0.0, 0.0)) {
            *self = Self::from_triplets(&self.space, self.triplets()).expect("same dimension");
        }
    }

    /// `self + factor·other`.
    pub fn add_scaled(&self, other: &OperatorMatrix, factor: C64) -> Result<Self> {
        self.check_space(other)?;
        let mut triplets = self.triplets();
        triplets.extend(other.iter().map(|(r, c, v)| (r, c, v * factor)));
        Self::from_triplets(&self.space, triplets)
    }

    pub fn add(&self, other: &OperatorMatrix) -> Result<Self> {
        self.add_scaled(other, C64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &OperatorMatrix) -> Result<Self> {
        self.add_scaled(other, C64::new(-1.0, 0.0))
    }

    /// Sums a list of operators on the same space.
    pub fn sum<'a>(space: &FockSpace, terms: impl IntoIterator<Item = &'a OperatorMatrix>) -> Result<Self> {
        let mut triplets = Vec::new();
        for t in terms {
            if t.space() != space {
                return Err(Error::DimensionMismatch("summand on a different space".into()));
            }
            triplets.extend(t.iter());
        }
        Self::from_triplets(space, triplets)
    }

    /// Matrix product `self · other`.
    pub fn matmul(&self, other: &OperatorMatrix) -> Result<Self> {
        self.check_space(other)?;
        let mut triplets = Vec::new();
        for r in 0..self.dimension() {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    triplets.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(&self.space, triplets)
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &OperatorMatrix) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max |H − H†|` over all entries.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.iter()
            .map(|(r, c, v)| (v - self.get(c, r).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// True when `max |H − H†| ≤ rel_tol · max |H|`.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.hermiticity_deviation() <= rel_tol * self.max_abs()
    }

    pub fn ensure_hermitian(&self, rel_tol: f64) -> Result<()> {
        let deviation = self.hermiticity_deviation();
        let scale = self.max_abs();
        if deviation > rel_tol * scale {
            return Err(Error::NotHermitian { deviation, scale });
        }
        Ok(())
    }

    /// True when every stored entry has zero imaginary part.
    pub fn is_real(&self) -> bool {
        self.vals.iter().all(|v| v.im == 0.0)
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut y = vec![C64::new(0.0, 0.0); self.dimension()];
        self.apply_into(x, &mut y);
        y
    }

    /// Overwrites `y` with `A x`.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        assert_eq!(x.len(), self.dimension());
        assert_eq!(y.len(), self.dimension());
        let row = |r: usize| -> C64 {
            (self.row_ptr[r]..self.row_ptr[r + 1])
                .map(|k| self.vals[k] * x[self.cols[k]])
                .sum()
        };
        if self.dimension() >= PARALLEL_ROWS {
            y.par_iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        } else {
            y.iter_mut().enumerate().for_each(|(r, out)| *out = row(r));
        }
    }

    /// Accumulates `y += factor · A x`.
    pub fn apply_add(&self, factor: C64, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.cols[k]];
            }
            *out += factor * acc;
        }
    }

    pub fn apply_vector(&self, x: &DVector<C64>) -> DVector<C64> {
        DVector::from_vec(self.apply(x.as_slice()))
    }

    /// `⟨x|A|x⟩`.
    pub fn expectation(&self, x: &[C64]) -> C64 {
        let ax = self.apply(x);
        x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }

    /// Real part as a dense matrix; meaningful when [`OperatorMatrix::is_real`].
    pub fn to_dense_real(&self) -> DMatrix<f64> {
        let n = self.dimension();
        let mut m = DMatrix::zeros(n, n);
        for (r, c, v) in self.iter() {
            m[(r, c)] += v.re;
        }
        m
    }

    /// Diagonal entries.
    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dimension()).map(|i| self.get(i, i)).collect()
    }

    /// Keeps only the entries for which `keep(row, col)` holds.
    pub fn filtered(&self, keep: impl Fn(usize, usize) -> bool) -> Self {
        let triplets = self.iter().filter(|(r, c, _)| keep(*r, *c)).collect();
        Self::from_triplets(&self.space, triplets).expect("same dimension")
    }
}
