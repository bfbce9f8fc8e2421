//! Hermitian eigensolvers: dense for small spaces, restarted Lanczos above.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fock::OperatorMatrix;

/// Largest dimension handled by the dense solver.
pub const DENSE_LIMIT: usize = 2000;

/// Relative hermiticity tolerance accepted on input.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Residual tolerance of the iterative solver, relative to a bound on ‖H‖.
pub const LANCZOS_TOL: f64 = 1e-10;

const LANCZOS_SEED: u64 = 0x5eed_1a4c;
const MAX_RESTARTS: usize = 2000;

/// Eigenvalues in ascending order with eigenvectors as matching columns.
#[derive(Debug, Clone)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Eigenpairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, i: usize) -> DVector<C64> {
        self.vectors.column(i).into_owned()
    }
}

/// The `k` lowest eigenpairs of a hermitian operator.
pub fn lowest_eigenpairs(h: &OperatorMatrix, k: usize) -> Result<Eigenpairs> {
    h.ensure_hermitian(HERMITIAN_TOL)?;
    let dim = h.dimension();
    if k == 0 || k > dim {
        return Err(Error::TooManyLevels {
            requested: k,
            dimension: dim,
        });
    }
    if dim <= DENSE_LIMIT {
        let mut all = dense_eigenpairs(h);
        all.values.truncate(k);
        all.vectors = all.vectors.columns(0, k).into_owned();
        Ok(all)
    } else {
        lanczos_lowest(h, k)
    }
}

/// Full spectrum by dense diagonalization.
pub fn dense_eigenpairs(h: &OperatorMatrix) -> Eigenpairs {
    if h.is_real() {
        let eig = SymmetricEigen::new(symmetrized_real(h.to_dense_real()));
        let vectors = eig.eigenvectors.map(|x| C64::new(x, 0.0));
        sorted(eig.eigenvalues.as_slice(), &vectors)
    } else {
        let dense = h.to_dense();
        let hermitized = (&dense + dense.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(hermitized);
        sorted(eig.eigenvalues.as_slice(), &eig.eigenvectors)
    }
}

fn symmetrized_real(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()).scale(0.5)
}

fn sorted(values: &[f64], vectors: &DMatrix<C64>) -> Eigenpairs {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let values = order.iter().map(|&i| values[i]).collect();
    let columns: Vec<_> = order.iter().map(|&i| vectors.column(i)).collect();
    Eigenpairs {
        values,
        vectors: DMatrix::from_columns(&columns),
    }
}

/// Cheap upper bound on the spectral norm (maximum absolute row sum).
fn norm_bound(h: &OperatorMatrix) -> f64 {
    (0..h.dimension())
        .map(|r| h.row(r).map(|(_, v)| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn orthogonalize(v: &mut DVector<C64>, basis: &[DVector<C64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in basis {
            let proj = b.dotc(v);
            v.axpy(-proj, b, C64::new(1.0, 0.0));
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
}

/// Block Krylov solver with thick restarts and full reorthogonalization.
///
/// Each step extends the search space by the residuals `H x − θ x` of every
/// unconverged wanted Ritz pair, so all copies of a degenerate level are
/// pursued at once. Once everything has converged a random probe orthogonal
/// to the subspace is added; the result is accepted only when the probe leaves
/// the `k` lowest Ritz values unchanged.
pub fn lanczos_lowest(h: &OperatorMatrix, k: usize) -> Result<Eigenpairs> {
    let n = h.dimension();
    if k == 0 || k > n {
        return Err(Error::TooManyLevels {
            requested: k,
            dimension: n,
        });
    }
    let scale = norm_bound(h).max(f64::MIN_POSITIVE);
    let tol = LANCZOS_TOL * scale;
    let m_max = n.min((3 * k + 24).max(48));
    let keep = (k + 4).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(LANCZOS_SEED);

    let mut basis: Vec<DVector<C64>> = Vec::with_capacity(m_max);
    let mut images: Vec<DVector<C64>> = Vec::with_capacity(m_max);
    let mut pending: Vec<DVector<C64>> = (0..k).map(|_| random_vector(&mut rng, n)).collect();
    let mut accepted: Option<Vec<f64>> = None;

    let combine = |vs: &[DVector<C64>], y: &DVector<C64>| -> DVector<C64> {
        let mut out = DVector::zeros(n);
        for (v, c) in vs.iter().zip(y.iter()) {
            out.axpy(*c, v, C64::new(1.0, 0.0));
        }
        out
    };

    for _ in 0..MAX_RESTARTS {
        for mut candidate in pending.drain(..) {
            if basis.len() >= n {
                break;
            }
            let reference = candidate.norm().max(f64::MIN_POSITIVE);
            orthogonalize(&mut candidate, &basis);
            let norm = candidate.norm();
            if norm <= 1e-12 * reference {
                continue;
            }
            let v = candidate.unscale(norm);
            images.push(h.apply_vector(&v));
            basis.push(v);
        }

        let m = basis.len();
        let t = DMatrix::from_fn(m, m, |i, j| basis[i].dotc(&images[j]));
        let t = (&t + t.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(t);
        let ritz = sorted(eig.eigenvalues.as_slice(), &eig.eigenvectors);
        let wanted = k.min(m);

        let mut residuals = Vec::new();
        for i in 0..wanted {
            let y = ritz.vector(i);
            let r = combine(&images, &y) - combine(&basis, &y).scale(ritz.values[i]);
            if r.norm() > tol {
                residuals.push(r);
            }
        }

        if m >= n || (wanted == k && residuals.is_empty()) {
            let values: Vec<f64> = ritz.values[..k].to_vec();
            let stable = accepted
                .as_ref()
                .is_some_and(|prev| prev.iter().zip(&values).all(|(a, b)| (a - b).abs() <= tol));
            if stable || m >= n {
                let columns: Vec<DVector<C64>> = (0..k).map(|i| combine(&basis, &ritz.vector(i))).collect();
                return Ok(Eigenpairs {
                    values,
                    vectors: DMatrix::from_columns(&columns),
                });
            }
            accepted = Some(values);
            residuals.push(random_vector(&mut rng, n));
        } else if wanted < k {
            residuals.push(random_vector(&mut rng, n));
        }

        if m + residuals.len() > m_max {
            let keep_now = keep.min(m);
            let new_basis: Vec<_> = (0..keep_now).map(|i| combine(&basis, &ritz.vector(i))).collect();
            let new_images: Vec<_> = (0..keep_now).map(|i| combine(&images, &ritz.vector(i))).collect();
            basis = new_basis;
            images = new_images;
        }
        pending = residuals;
    }
    Err(Error::Convergence(format!(
        "Lanczos did not converge {k} eigenpairs to {tol:e} within {MAX_RESTARTS} restarts"
    )))
}
