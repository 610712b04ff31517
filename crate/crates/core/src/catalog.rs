//! Named example channels with exact matrices.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::channel::{scaled, unitary_channel, Channel, KrausFamily};
use crate::error::{Error, Result};
use crate::faces::{self, SchurSpec};
use crate::numerics::{c64, real_diag, CMatrix, Tolerance, ONE, ZERO};

/// The diagonal pair on `M_4` with `v1 = diag(1, 0, 1/√2, 1/√2)` and
/// `v2 = diag(0, 1, 1/√2, i/√2)`.
pub fn ex2_4_family() -> KrausFamily {
    let h = FRAC_1_SQRT_2;
    let v1 = real_diag(&[1.0, 0.0, h, h]);
    let v2 = crate::numerics::diag(&[ZERO, ONE, c64(h, 0.0), c64(0.0, h)]);
    KrausFamily::new(vec![v1, v2]).expect("static family")
}

pub fn ex2_4(tol: &Tolerance) -> Result<Channel> {
    Channel::from_family(&ex2_4_family(), tol)
}

/// Qubit channel fixing both diagonal units and scaling `e_12` by `z`, `|z| <= 1`.
pub fn ex2_8(z: Complex64, tol: &Tolerance) -> Result<Channel> {
    let m = CMatrix::from_row_slice(2, 2, &[ONE, z, z.conj(), ONE]);
    faces::schur_channel(&SchurSpec::new(m, tol)?, tol)
}

/// Schur multiplier channel on `M_3` with off-diagonal entries `z1 = m12`,
/// `z2 = m23`, `z3 = m13`.
pub fn ex2_9(z1: Complex64, z2: Complex64, z3: Complex64, tol: &Tolerance) -> Result<Channel> {
    faces::schur_channel(&SchurSpec::new(faces::face_matrix(z1, z2, z3), tol)?, tol)
}

/// Real-entried version of [`ex2_9`].
pub fn ex2_10(x1: f64, x2: f64, x3: f64, tol: &Tolerance) -> Result<Channel> {
    ex2_9(c64(x1, 0.0), c64(x2, 0.0), c64(x3, 0.0), tol)
}

/// Spin-1 matrices `l_x, l_y, l_z` (in that order).
pub fn spin_one() -> [CMatrix; 3] {
    let h = c64(FRAC_1_SQRT_2, 0.0);
    let ih = c64(0.0, FRAC_1_SQRT_2);
    let lx = CMatrix::from_row_slice(3, 3, &[ZERO, h, ZERO, h, ZERO, h, ZERO, h, ZERO]);
    let ly = CMatrix::from_row_slice(3, 3, &[ZERO, -ih, ZERO, ih, ZERO, -ih, ZERO, ih, ZERO]);
    let lz = real_diag(&[1.0, 0.0, -1.0]);
    [lx, ly, lz]
}

/// `v_k = l_k / √2` for the spin-1 matrices.
pub fn ex2_11_family() -> KrausFamily {
    let ops = spin_one().iter().map(|l| scaled(l, FRAC_1_SQRT_2)).collect();
    KrausFamily::new(ops).expect("static family")
}

pub fn ex2_11(tol: &Tolerance) -> Result<Channel> {
    Channel::from_family(&ex2_11_family(), tol)
}

/// Clock matrix `u e_k = θ^k e_k` with `θ = exp(2πi/n)`.
pub fn weyl_clock(n: usize) -> CMatrix {
    let entries: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64))
        .collect();
    crate::numerics::diag(&entries)
}

/// Shift matrix `v e_k = e_{k+1 mod n}`.
pub fn weyl_shift(n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    for k in 0..n {
        m[((k + 1) % n, k)] = ONE;
    }
    m
}

/// Weyl unitaries `u^i v^j` on `C^3`, enumerated with `I`, `v`, `u` first and
/// the remaining pairs in lexicographic order of `(i, j)`.
pub fn weyl_basis() -> Vec<CMatrix> {
    let u = weyl_clock(3);
    let v = weyl_shift(3);
    let pow = |m: &CMatrix, k: usize| (0..k).fold(CMatrix::identity(3, 3), |acc, _| acc * m);
    let mut pairs = vec![(0, 0), (0, 1), (1, 0)];
    for i in 0..3 {
        for j in 0..3 {
            if !pairs.contains(&(i, j)) {
                pairs.push((i, j));
            }
        }
    }
    pairs.into_iter().map(|(i, j)| pow(&u, i) * pow(&v, j)).collect()
}

/// Kraus family `{w_k / √m : 1 <= k <= m}` from [`weyl_basis`].
pub fn ex2_12_family(m: usize) -> Result<KrausFamily> {
    if !(1..=8).contains(&m) {
        return Err(Error::InvalidInput(format!("m must lie in 1..=8, got {m}")));
    }
    let s = 1.0 / (m as f64).sqrt();
    let basis = weyl_basis();
    KrausFamily::new(basis[1..=m].iter().map(|w| scaled(w, s)).collect())
}

/// The Weyl mixture `τ = (1/m) Σ w_k · w_k*`, or `λ τ + (1 - λ) id` when
/// `lambda` is given.
pub fn ex2_12(m: usize, lambda: Option<f64>, tol: &Tolerance) -> Result<Channel> {
    let family = ex2_12_family(m)?;
    match lambda {
        None => Channel::from_family(&family, tol),
        Some(l) => {
            if !(0.0..=1.0).contains(&l) {
                return Err(Error::InvalidInput(format!("lambda must lie in [0, 1], got {l}")));
            }
            let mut ops: Vec<CMatrix> = family.ops().iter().map(|v| scaled(v, l.sqrt())).collect();
            ops.push(scaled(&CMatrix::identity(3, 3), (1.0 - l).sqrt()));
            Channel::from_kraus(ops, tol)
        }
    }
}

/// Conjugation by the swap `[[0, 1], [1, 0]]`.
pub fn swap_channel(tol: &Tolerance) -> Result<Channel> {
    unitary_channel(&weyl_shift(2), tol)
}
