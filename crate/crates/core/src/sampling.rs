//! Random unitaries, channels and doubly stochastic matrices for tests and benchmarks.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::birkhoff::{permutation_matrix, DsMatrix};
use crate::channel::{validate, Channel, KrausFamily};
use crate::error::{Error, Result};
use crate::numerics::{c64, hermitian_eig, CMatrix, Tolerance};

/// Matrix with independent standard complex Gaussian entries.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c64(re, im) / std::f64::consts::SQRT_2
    })
}

/// Haar-distributed unitary from the QR factorization of a Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let qr = ginibre(n, n, rng).qr();
    let (q, r) = (qr.q(), qr.r());
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c64(1.0, 0.0) };
        u.column_mut(j).apply(|z| *z *= phase);
    }
    u
}

/// `d` Ginibre operators of size `n`.
pub fn random_kraus<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<KrausFamily> {
    KrausFamily::new((0..d).map(|_| ginibre(n, n, rng)).collect())
}

fn inverse_sqrt(m: &CMatrix, tol: &Tolerance) -> Result<CMatrix> {
    let eig = hermitian_eig(m, tol)?;
    if eig.values.last().copied().unwrap_or(0.0) <= 0.0 {
        return Err(Error::Numerical("operator scaling hit a singular marginal".into()));
    }
    let scaled = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| eig.vectors[(i, j)] / eig.values[j].sqrt());
    Ok(&scaled * eig.vectors.adjoint())
}

/// Alternately rescales `v_k ↦ A^{-1/2} v_k` with `A = Σ v v*` and
/// `v_k ↦ v_k B^{-1/2}` with `B = Σ v* v` until both marginals are the
/// identity within `1e-13`. This is the operator Sinkhorn iteration, i.e.
/// alternating correction of the two partial traces of the Choi matrix.
pub fn doubly_stochastic_projection(family: &KrausFamily, tol: &Tolerance) -> Result<KrausFamily> {
    let strict = Tolerance::new(tol.rank_rel, tol.psd_abs, 1e-13)?;
    let mut ops = family.ops().to_vec();
    for _ in 0..10_000 {
        let f = KrausFamily::new(ops.clone())?;
        if validate(&f, &strict).doubly_stochastic() {
            return Ok(f);
        }
        let left = inverse_sqrt(&f.unit_image(), tol)?;
        ops = ops.iter().map(|v| &left * v).collect();
        let f = KrausFamily::new(ops.clone())?;
        let right = inverse_sqrt(&f.dual_unit_image(), tol)?;
        ops = ops.iter().map(|v| v * &right).collect();
    }
    Err(Error::Numerical("operator scaling did not converge".into()))
}

/// Random doubly stochastic channel from `d` scaled Ginibre operators.
pub fn random_channel<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R, tol: &Tolerance) -> Result<Channel> {
    let family = doubly_stochastic_projection(&random_kraus(n, d, rng)?, tol)?;
    Channel::from_family(&family, tol)
}

pub fn random_permutation<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Mixture of `terms` random permutation matrices with random weights.
pub fn random_ds_matrix<R: Rng + ?Sized>(n: usize, terms: usize, rng: &mut R, tol: &Tolerance) -> Result<DsMatrix> {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 0.05).collect();
    let total: f64 = weights.iter().sum();
    let mut s = DMatrix::zeros(n, n);
    for w in weights {
        s += permutation_matrix(&random_permutation(n, rng)) * (w / total);
    }
    DsMatrix::new(s, tol)
}
