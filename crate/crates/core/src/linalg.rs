//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::SymmetricEigen;

use crate::fock::{CMatrix, CVector, Parity, C64};

/// One eigenpair of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct EigenPair {
    pub value: f64,
    pub vector: CVector,
}

/// Eigenpair whose eigenvector lies in a single parity sector.
#[derive(Clone, Debug)]
pub struct SectorEigenPair {
    pub value: f64,
    pub vector: CVector,
    pub parity: Parity,
}

fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenpairs of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen(m: &CMatrix) -> Vec<EigenPair> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let eig = SymmetricEigen::new(hermitize(m));
    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|i| EigenPair { value: eig.eigenvalues[i], vector: eig.eigenvectors.column(i).into_owned() })
        .collect();
    pairs.sort_by(|a, b| b.value.total_cmp(&a.value));
    pairs
}

/// Eigenvalues of a Hermitian matrix, descending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    max_eigenvalue(&(m.adjoint() * m)).max(0.0).sqrt()
}

/// Rows and columns `idx` of `m`.
pub fn submatrix(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Eigendecomposition restricted to each parity sector of a block-diagonal Hermitian matrix.
///
/// `odd(i)` gives the parity of basis index `i`. Off-sector entries are ignored,
/// so the caller is responsible for checking block structure first. Results are
/// sorted by descending eigenvalue; ties keep even before odd.
pub fn sector_eigen(m: &CMatrix, odd: impl Fn(usize) -> bool) -> Vec<SectorEigenPair> {
    let n = m.nrows();
    let mut out = Vec::with_capacity(n);
    for parity in [Parity::Even, Parity::Odd] {
        let idx: Vec<usize> = (0..n).filter(|&i| odd(i) == (parity == Parity::Odd)).collect();
        if idx.is_empty() {
            continue;
        }
        for pair in hermitian_eigen(&submatrix(m, &idx, &idx)) {
            let mut v = CVector::zeros(n);
            for (k, &i) in idx.iter().enumerate() {
                v[i] = pair.vector[k];
            }
            out.push(SectorEigenPair { value: pair.value, vector: v, parity });
        }
    }
    out.sort_by(|a, b| b.value.total_cmp(&a.value));
    out
}

/// Rotates `v` so that its largest-magnitude entry is real and positive.
pub fn fix_phase(v: &mut CVector) {
    let max = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    // ties go to the lowest index so the result does not depend on the eigensolver
    let pivot = v.iter().copied().find(|z| z.norm() >= max - 1e-12).unwrap_or(v[0]);
    let phase = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= phase;
    }
}

/// `f(m)` for Hermitian `m` via its spectral decomposition.
pub fn hermitian_function(m: &CMatrix, f: impl Fn(f64) -> f64) -> CMatrix {
    let n = m.nrows();
    let mut out = CMatrix::zeros(n, n);
    for pair in hermitian_eigen(m) {
        let fv = f(pair.value);
        if fv != 0.0 {
            out += &pair.vector * pair.vector.adjoint() * C64::from(fv);
        }
    }
    out
}

/// `m^{-1/2}` for positive definite `m`.
pub fn inverse_sqrt(m: &CMatrix) -> CMatrix {
    hermitian_function(m, |x| 1.0 / x.sqrt())
}

/// Largest absolute entry of `UU† − I` and `U†U − I`.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    let id = CMatrix::identity(n, n);
    let a = crate::fock::max_abs(&(u * u.adjoint() - &id));
    let b = crate::fock::max_abs(&(u.adjoint() * u - &id));
    a.max(b)
}

/// `-Σ λ log₂ λ` over the given spectrum, treating non-positive values as zero.
pub fn entropy_bits(spectrum: &[f64]) -> f64 {
    spectrum.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum::<f64>().max(0.0)
}
