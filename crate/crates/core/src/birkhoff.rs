//! Classical doubly stochastic matrices and their permutation decompositions.

use nalgebra::DMatrix;

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::numerics::{c64, matrix_unit, Tolerance};

/// Square real matrix with nonnegative entries and unit row and column sums.
#[derive(Clone, Debug, PartialEq)]
pub struct DsMatrix {
    s: DMatrix<f64>,
}

fn marginal_defect(s: &DMatrix<f64>) -> (f64, f64, f64) {
    let rows = s.row_iter().map(|r| (r.sum() - 1.0).abs()).fold(0.0, f64::max);
    let cols = s.column_iter().map(|c| (c.sum() - 1.0).abs()).fold(0.0, f64::max);
    let neg = s.iter().fold(0.0_f64, |acc, &x| acc.min(x));
    (rows, cols, neg)
}

pub fn is_doubly_stochastic(s: &DMatrix<f64>, tol: &Tolerance) -> bool {
    if s.nrows() != s.ncols() || s.is_empty() || s.iter().any(|x| !x.is_finite()) {
        return false;
    }
    let (rows, cols, neg) = marginal_defect(s);
    rows <= tol.eq_abs && cols <= tol.eq_abs && neg >= -tol.eq_abs
}

impl DsMatrix {
    pub fn new(s: DMatrix<f64>, tol: &Tolerance) -> Result<Self> {
        if s.nrows() != s.ncols() || s.is_empty() {
            return Err(Error::Dimension(format!(
                "doubly stochastic matrix must be square and non-empty, got {}x{}",
                s.nrows(),
                s.ncols()
            )));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("matrix has non-finite entries".into()));
        }
        if !is_doubly_stochastic(&s, tol) {
            let (rows, cols, neg) = marginal_defect(&s);
            return Err(Error::NotDoublyStochastic(format!(
                "row sum defect {rows:.3e}, column sum defect {cols:.3e}, smallest entry {neg:.3e}"
            )));
        }
        Ok(DsMatrix { s })
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.s
    }

    pub fn transpose(&self) -> DsMatrix {
        DsMatrix { s: self.s.transpose() }
    }
}

/// Permutation matrix with ones at `(i, perm[i])`.
pub fn permutation_matrix(perm: &[usize]) -> DMatrix<f64> {
    let n = perm.len();
    let mut p = DMatrix::zeros(n, n);
    for (i, &j) in perm.iter().enumerate() {
        p[(i, j)] = 1.0;
    }
    p
}

/// Convex combination of permutation matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct PermutationDecomposition {
    /// `(weight, perm)` pairs; `perm[i]` is the column of the one in row `i`.
    pub terms: Vec<(f64, Vec<usize>)>,
}

impl PermutationDecomposition {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|(w, _)| w).sum()
    }

    pub fn recombine(&self, n: usize) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(n, n);
        for (w, perm) in &self.terms {
            for (i, &j) in perm.iter().enumerate() {
                s[(i, j)] += w;
            }
        }
        s
    }

    /// Largest entrywise deviation from `s`.
    pub fn reconstruction_error(&self, s: &DsMatrix) -> f64 {
        (self.recombine(s.dim()) - s.matrix()).amax()
    }
}

/// Perfect matching of rows to columns on the support, by augmenting paths.
/// Rows are scanned in order; each row takes its first free column when one
/// exists and otherwise augments, scanning columns in increasing order.
fn perfect_matching(support: &[Vec<bool>]) -> Option<Vec<usize>> {
    let n = support.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];

    fn augment(row: usize, support: &[Vec<bool>], seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
        for col in 0..support.len() {
            if support[row][col] && !seen[col] {
                seen[col] = true;
                let free = match col_owner[col] {
                    None => true,
                    Some(other) => augment(other, support, seen, col_owner),
                };
                if free {
                    col_owner[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    for row in 0..n {
        if let Some(col) = (0..n).find(|&c| support[row][c] && col_owner[c].is_none()) {
            col_owner[col] = Some(row);
            continue;
        }
        let mut seen = vec![false; n];
        if !augment(row, support, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut perm = vec![0; n];
    for (col, owner) in col_owner.iter().enumerate() {
        perm[owner.expect("perfect matching")] = col;
    }
    Some(perm)
}

/// Largest number of terms a minimal decomposition can need.
pub fn term_bound(n: usize) -> usize {
    n * n - 2 * n + 2
}

/// Greedy Birkhoff–von Neumann decomposition.
///
/// Each round matches rows to columns on the entries above `eq_abs`, removes
/// the smallest matched entry's worth of that permutation and clamps entries
/// below `n · ε · scale` to zero. If more than `n² - 2n + 2` terms come out,
/// affine dependencies among the permutation matrices are used to drop terms.
pub fn birkhoff_decompose(s: &DsMatrix, tol: &Tolerance) -> Result<PermutationDecomposition> {
    let n = s.dim();
    let mut residual = s.matrix().clone();
    let scale = residual.amax().max(1.0);
    let clamp = n as f64 * f64::EPSILON * scale;
    let mut terms = Vec::new();
    let max_rounds = n * n + 1;
    for _ in 0..max_rounds {
        let mass = residual.row(0).sum();
        if mass < n as f64 * tol.eq_abs {
            break;
        }
        let support: Vec<Vec<bool>> = (0..n)
            .map(|i| (0..n).map(|j| residual[(i, j)] > tol.eq_abs).collect())
            .collect();
        let perm = perfect_matching(&support).ok_or_else(|| {
            Error::NotDoublyStochastic(format!(
                "no perfect matching on the remaining support (residual mass {mass:.3e})"
            ))
        })?;
        let w = perm
            .iter()
            .enumerate()
            .map(|(i, &j)| residual[(i, j)])
            .fold(f64::INFINITY, f64::min);
        for (i, &j) in perm.iter().enumerate() {
            residual[(i, j)] -= w;
        }
        residual.apply(|x| {
            if x.abs() < clamp {
                *x = 0.0
            }
        });
        terms.push((w, perm));
    }
    let mut decomposition = PermutationDecomposition { terms };
    reduce_terms(&mut decomposition, n);
    Ok(decomposition)
}

/// Removes terms along affine dependencies until at most `n² - 2n + 2` remain.
fn reduce_terms(dec: &mut PermutationDecomposition, n: usize) {
    while dec.terms.len() > term_bound(n) {
        let m = dec.terms.len();
        let rows = n * n + 1;
        let size = rows.max(m);
        let mut a = DMatrix::<f64>::zeros(size, m);
        for (k, (_, perm)) in dec.terms.iter().enumerate() {
            for (i, &j) in perm.iter().enumerate() {
                a[(i * n + j, k)] = 1.0;
            }
            a[(n * n, k)] = 1.0;
        }
        let svd = a.svd(false, true);
        let vt = svd.v_t.expect("requested");
        let (idx, _) = svd
            .singular_values
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, &s)| if s < best.1 { (i, s) } else { best });
        let mut c: Vec<f64> = vt.row(idx).iter().copied().collect();
        if c.iter().all(|&x| x <= 0.0) {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        let t = dec
            .terms
            .iter()
            .zip(&c)
            .filter(|(_, &ck)| ck > 0.0)
            .map(|((w, _), &ck)| w / ck)
            .fold(f64::INFINITY, f64::min);
        if !t.is_finite() {
            break;
        }
        for ((w, _), &ck) in dec.terms.iter_mut().zip(&c) {
            *w -= t * ck;
        }
        let floor = 1e-15;
        let before = dec.terms.len();
        let drop = dec
            .terms
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .0.partial_cmp(&b.1 .0).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(i, _)| i)
            .expect("non-empty");
        dec.terms.remove(drop);
        dec.terms.retain(|(w, _)| *w > floor);
        if dec.terms.len() >= before {
            break;
        }
    }
}

/// Channel with Kraus operators `√s_ij e_ij` for `s_ij > eq_abs`.
pub fn embed_classical(s: &DsMatrix, tol: &Tolerance) -> Result<Channel> {
    let n = s.dim();
    let mut ops = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = s.s[(i, j)];
            if x > tol.eq_abs {
                ops.push(matrix_unit(n, i, j).map(|z| z * c64(x.sqrt(), 0.0)));
            }
        }
    }
    Channel::from_kraus(ops, tol)
}
