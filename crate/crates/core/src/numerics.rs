//! Dense complex matrix substrate.
//!
//! Every rank, positivity and equality decision made elsewhere in the crate
//! goes through the helpers in this module so that a single [`Tolerance`]
//! governs them.
//!
//! Operators are vectorized by stacking columns: `vec(x)[j * rows + i] = x[(i, j)]`.
//! Under this convention `vec(a x b) = (bᵀ ⊗ a) vec(x)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense complex matrix used for every operator in the crate.
pub type CMatrix = DMatrix<Complex64>;
/// Dense complex column vector.
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Numerical thresholds shared by all decisions.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    /// Relative singular-value cutoff used for numerical rank.
    pub rank_rel: f64,
    /// Allowance for the most negative eigenvalue of a PSD matrix, scaled by
    /// `max(1, largest |eigenvalue|)`.
    pub psd_abs: f64,
    /// Entrywise equality allowance.
    pub eq_abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            rank_rel: 1e-9,
            psd_abs: 1e-9,
            eq_abs: 1e-9,
        }
    }
}

impl Tolerance {
    pub fn new(rank_rel: f64, psd_abs: f64, eq_abs: f64) -> Result<Self> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(rank_rel) && ok(psd_abs) && ok(eq_abs)) {
            return Err(Error::InvalidTolerance(
                "all tolerances must be finite and strictly positive".into(),
            ));
        }
        if rank_rel >= 1.0 {
            return Err(Error::InvalidTolerance("rank_rel must be < 1".into()));
        }
        Ok(Tolerance {
            rank_rel,
            psd_abs,
            eq_abs,
        })
    }

    /// Same value for all three thresholds.
    pub fn uniform(eps: f64) -> Result<Self> {
        Self::new(eps, eps, eps)
    }
}

/// Eigen-decomposition of a hermitian matrix, eigenvalues in descending order.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    pub values: Vec<f64>,
    /// Unitary whose columns are the eigenvectors, in the order of `values`.
    pub vectors: CMatrix,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.values.len();
        let d = CMatrix::from_fn(n, n, |i, j| {
            if i == j {
                c64(self.values[i], 0.0)
            } else {
                ZERO
            }
        });
        &self.vectors * d * self.vectors.adjoint()
    }
}

pub fn check_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidInput("matrix has non-finite entries".into()))
    }
}

pub fn ensure_square(m: &CMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m.nrows())
}

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Largest entrywise modulus of `a - b`. Panics on shape mismatch.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch in max_abs_diff");
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

pub fn frobenius_norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Entrywise conjugate.
pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// Hilbert–Schmidt inner product `tr(a* b)`.
pub fn hs_inner(a: &CMatrix, b: &CMatrix) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Matrix unit `|i><j|` of size `n`.
pub fn matrix_unit(n: usize, i: usize, j: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn diag(entries: &[Complex64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_column_slice(entries))
}

pub fn real_diag(entries: &[f64]) -> CMatrix {
    let v: Vec<Complex64> = entries.iter().map(|&x| c64(x, 0.0)).collect();
    diag(&v)
}

/// Column-stacking vectorization.
pub fn vec(m: &CMatrix) -> CVector {
    // nalgebra storage is column-major, which is exactly column stacking.
    CVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vec`].
pub fn unvec(v: &CVector, rows: usize, cols: usize) -> Result<CMatrix> {
    if v.len() != rows * cols {
        return Err(Error::Dimension(format!(
            "cannot reshape vector of length {} into {rows}x{cols}",
            v.len()
        )));
    }
    Ok(CMatrix::from_column_slice(rows, cols, v.as_slice()))
}

pub fn is_hermitian(m: &CMatrix, tol: &Tolerance) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    max_abs_diff(m, &m.adjoint()) <= tol.eq_abs * scale
}

/// `(m + m*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).map(|z| z * 0.5)
}

/// `(m - m*) / 2i`, the hermitian "imaginary part".
pub fn skew_part(m: &CMatrix) -> CMatrix {
    (m - m.adjoint()).map(|z| z / c64(0.0, 2.0))
}

fn require_hermitian(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    ensure_square(m, "hermitian input")?;
    check_finite(m)?;
    let scale = max_abs(m).max(1.0);
    let asym = max_abs_diff(m, &m.adjoint());
    if asym > tol.eq_abs * scale {
        return Err(Error::NotHermitian(asym));
    }
    Ok(hermitian_part(m))
}

/// Eigen-decomposition of a hermitian matrix.
///
/// The input is hermitized before the solve. Eigenvalues are returned in
/// descending order with the eigenvector columns permuted to match.
pub fn hermitian_eig(m: &CMatrix, tol: &Tolerance) -> Result<HermitianEig> {
    let h = require_hermitian(m, tol)?;
    let n = h.nrows();
    let eig = nalgebra::SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEig { values, vectors })
}

/// Singular values in descending order. Empty matrices have none.
pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    s
}

/// Number of singular values above `rank_rel` times the largest one.
pub fn numerical_rank(m: &CMatrix, tol: &Tolerance) -> usize {
    let s = singular_values(m);
    match s.first() {
        Some(&top) if top > 0.0 => s.iter().filter(|&&x| x > tol.rank_rel * top).count(),
        _ => 0,
    }
}

/// Full right-singular basis of `m`, ordered by descending singular value.
///
/// Returns `(singular values padded with zeros to ncols, V)` where the columns
/// of `V` form an orthonormal basis of the input space. Wide matrices are padded
/// with zero rows so that the complete null space is available.
pub fn right_singular_basis(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let cols = m.ncols();
    let padded = if m.nrows() < cols {
        let mut p = CMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not produce right singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .partial_cmp(&svd.singular_values[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&k| svd.singular_values[k]).collect();
    let v = CMatrix::from_fn(cols, order.len(), |i, j| v_t[(order[j], i)].conj());
    Ok((values, v))
}

/// Orthonormal basis of the numerical null space of `m`.
pub fn null_space(m: &CMatrix, tol: &Tolerance) -> Result<Vec<CVector>> {
    let rank = numerical_rank(m, tol);
    let (_, v) = right_singular_basis(m)?;
    Ok((rank..v.ncols()).map(|j| v.column(j).into_owned()).collect())
}

/// One unit vector in the numerical null space of `m`, or `None` if `m` has
/// full column rank.
///
/// For tall or square `m` this is the right singular vector of the smallest
/// singular value. For wide `m` only a thin SVD is computed; the result is the
/// standard basis vector with the largest component outside the row space,
/// projected onto the complement and normalized.
pub fn null_vector(m: &CMatrix, tol: &Tolerance) -> Result<Option<CVector>> {
    let (rows, cols) = m.shape();
    if rows >= cols {
        if numerical_rank(m, tol) == cols {
            return Ok(None);
        }
        let (_, v) = right_singular_basis(m)?;
        return Ok(Some(v.column(cols - 1).into_owned()));
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD did not produce right singular vectors".into()))?;
    let top = svd.singular_values.iter().fold(0.0_f64, |a, &b| a.max(b));
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&k| top > 0.0 && svd.singular_values[k] > tol.rank_rel * top)
        .collect();
    // Rows of `q` span the numerical row space; `|e_j - q* q e_j|² = 1 - |q e_j|²`.
    let q = CMatrix::from_fn(keep.len(), cols, |r, j| v_t[(keep[r], j)]);
    let mut best = 0;
    let mut best_weight = f64::INFINITY;
    for j in 0..cols {
        let w = q.column(j).norm_squared();
        if w < best_weight - 1e-12 {
            best = j;
            best_weight = w;
        }
    }
    let mut r = -(q.adjoint() * q.column(best));
    r[best] += ONE;
    let norm = r.norm();
    Ok(Some(r / c64(norm, 0.0)))
}

/// Smallest eigenvalue of a hermitian matrix.
pub fn min_eigenvalue(m: &CMatrix, tol: &Tolerance) -> Result<f64> {
    let eig = hermitian_eig(m, tol)?;
    Ok(*eig.values.last().expect("non-empty"))
}

/// PSD test: minimum eigenvalue `>= -psd_abs * max(1, max |eigenvalue|)`.
pub fn is_psd(m: &CMatrix, tol: &Tolerance) -> Result<bool> {
    let eig = hermitian_eig(m, tol)?;
    let top = eig.values.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let min = *eig.values.last().expect("non-empty");
    Ok(min >= -tol.psd_abs * top)
}

/// Which tensor factor to trace out.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Partial trace of an operator on `C^a ⊗ C^b` (row index `i * b + k`).
pub fn partial_trace(m: &CMatrix, dims: (usize, usize), side: Subsystem) -> Result<CMatrix> {
    let (a, b) = dims;
    if a == 0 || b == 0 || m.nrows() != a * b || m.ncols() != a * b {
        return Err(Error::Dimension(format!(
            "partial trace expects a {}x{} matrix, got {}x{}",
            a * b,
            a * b,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match side {
        Subsystem::First => CMatrix::from_fn(b, b, |k, l| (0..a).map(|i| m[(i * b + k, i * b + l)]).sum()),
        Subsystem::Second => CMatrix::from_fn(a, a, |i, j| (0..b).map(|k| m[(i * b + k, j * b + k)]).sum()),
    })
}

/// Operator norm (largest singular value).
pub fn operator_norm(m: &CMatrix) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Multiplies the vector by a phase so that its first entry of modulus
/// greater than `eps` becomes real positive.
pub fn fix_phase(v: &mut [Complex64], eps: f64) {
    if let Some(z) = v.iter().find(|z| z.norm() > eps).copied() {
        let phase = z.conj() / z.norm();
        for x in v.iter_mut() {
            *x *= phase;
        }
    }
}

/// Spectral projection of a hermitian matrix onto eigenvalues within
/// `cluster_tol` of the largest one.
pub fn top_spectral_projection(h: &CMatrix, cluster_tol: f64, tol: &Tolerance) -> Result<CMatrix> {
    let eig = hermitian_eig(h, tol)?;
    let top = eig.values[0];
    let n = h.nrows();
    let mut p = CMatrix::zeros(n, n);
    for (k, &val) in eig.values.iter().enumerate() {
        if top - val <= cluster_tol {
            let col = eig.vectors.column(k);
            p += &col * col.adjoint();
        }
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn tolerance_validation() {
        assert!(Tolerance::new(1e-9, 1e-9, 1e-9).is_ok());
        assert!(Tolerance::new(0.0, 1e-9, 1e-9).is_err());
        assert!(Tolerance::new(1.5, 1e-9, 1e-9).is_err());
        assert!(Tolerance::new(1e-9, f64::NAN, 1e-9).is_err());
    }

    #[test]
    fn eig_of_identity() {
        let e = hermitian_eig(&CMatrix::identity(2, 2), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0]);
    }

    #[test]
    fn eig_sorts_descending() {
        let m = real_diag(&[1.0, 0.0, 0.5, 0.5]);
        let e = hermitian_eig(&m, &tol()).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 0.5, 0.5, 0.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!(max_abs_diff(&e.reconstruct(), &m) < 1e-14);
    }

    #[test]
    fn eig_rejects_bad_input() {
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect, &tol()), Err(Error::Dimension(_))));
        let mut m = CMatrix::identity(2, 2);
        m[(0, 1)] = ONE;
        assert!(matches!(hermitian_eig(&m, &tol()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn rank_edge_cases() {
        assert_eq!(numerical_rank(&CMatrix::zeros(3, 3), &tol()), 0);
        for n in 1..6 {
            assert_eq!(numerical_rank(&CMatrix::identity(n, n), &tol()), n);
        }
    }

    #[test]
    fn psd_examples() {
        assert!(is_psd(&CMatrix::from_element(3, 3, ONE), &tol()).unwrap());
        assert!(!is_psd(&real_diag(&[1.0, -1.0]), &tol()).unwrap());
        // f-matrix at (1/2, 0, 0): eigenvalues 1/2, 1, 3/2.
        let f = CMatrix::from_row_slice(
            3,
            3,
            &[ONE, c64(0.5, 0.0), ZERO, c64(0.5, 0.0), ONE, ZERO, ZERO, ZERO, ONE],
        );
        assert!(is_psd(&f, &tol()).unwrap());
        assert!((min_eigenvalue(&f, &tol()).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn vec_is_column_stacking() {
        let m = CMatrix::from_row_slice(2, 2, &[c64(1.0, 0.0), c64(2.0, 0.0), c64(3.0, 0.0), c64(4.0, 0.0)]);
        let v = vec(&m);
        let got: Vec<f64> = v.iter().map(|z| z.re).collect();
        assert_eq!(got, vec![1.0, 3.0, 2.0, 4.0]);
        assert_eq!(unvec(&v, 2, 2).unwrap(), m);
        assert!(unvec(&v, 3, 2).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let id4 = CMatrix::identity(4, 4).map(|z| z * 0.5);
        for side in [Subsystem::First, Subsystem::Second] {
            let r = partial_trace(&id4, (2, 2), side).unwrap();
            assert!(max_abs_diff(&r, &CMatrix::identity(2, 2)) < 1e-15);
        }
        let a = CMatrix::from_row_slice(2, 2, &[ONE, c64(0.0, 2.0), c64(0.0, -2.0), c64(3.0, 0.0)]);
        let b = real_diag(&[0.25, 0.5, 1.0]);
        let ab = kron(&a, &b);
        let r = partial_trace(&ab, (2, 3), Subsystem::Second).unwrap();
        assert!(max_abs_diff(&r, &a.map(|z| z * 1.75)) < 1e-14);
        let r = partial_trace(&ab, (2, 3), Subsystem::First).unwrap();
        assert!(max_abs_diff(&r, &b.map(|z| z * 4.0)) < 1e-14);
        assert!(partial_trace(&ab, (3, 3), Subsystem::First).is_err());
    }

    #[test]
    fn phase_fixing() {
        let mut v = vec![ZERO, c64(0.0, 2.0), c64(1.0, 0.0)];
        fix_phase(&mut v, 1e-12);
        assert!((v[1] - c64(2.0, 0.0)).norm() < 1e-15);
        assert!((v[2] - c64(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = CMatrix::from_row_slice(1, 3, &[ONE, ONE, ZERO]);
        let ns = null_space(&m, &tol()).unwrap();
        assert_eq!(ns.len(), 2);
        for v in ns {
            assert!((&m * v).norm() < 1e-14);
        }
    }

    #[test]
    fn null_vector_wide_and_tall() {
        // Wide, rank 2 out of 4 columns.
        let m = CMatrix::from_row_slice(
            2,
            4,
            &[ONE, ZERO, ONE, c64(0.0, 1.0), ZERO, ONE, c64(2.0, 0.0), ZERO],
        );
        let v = null_vector(&m, &tol()).unwrap().unwrap();
        assert!(((&m * &v).norm()) < 1e-14);
        assert!((v.norm() - 1.0).abs() < 1e-14);

        // Tall with a repeated column.
        let t = CMatrix::from_row_slice(3, 2, &[ONE, ONE, I, I, ZERO, ZERO]);
        let v = null_vector(&t, &tol()).unwrap().unwrap();
        assert!(((&t * &v).norm()) < 1e-14);

        assert!(null_vector(&CMatrix::identity(3, 3), &tol()).unwrap().is_none());
    }
}
