//! Conjugacy invariants and certificate checks.
//!
//! Two families are related by a certificate `(u, g, w)` when
//! `u v_k u* = w β_g(v'_k)` for all `k`, where `β_g(v'_k) = Σ_j g_kj v'_j`.
//! In the antiunitary case `v_k` is replaced by its entrywise conjugate.

use crate::channel::{validate, Channel, KrausFamily};
use crate::error::{Error, Result};
use crate::numerics::{self, hermitian_eig, max_abs_diff, trace, CMatrix, Tolerance};

/// Gram matrix `D_ij = tr(ρ v_i v_j*)` at a density matrix `ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    pub matrix: CMatrix,
    /// Description of the state, e.g. `"trace"`.
    pub state_tag: String,
}

fn check_state(rho: &CMatrix, n: usize, tol: &Tolerance) -> Result<()> {
    if rho.nrows() != n || rho.ncols() != n {
        return Err(Error::Dimension(format!(
            "state is {}x{}, expected {n}x{n}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    numerics::check_finite(rho)?;
    if !numerics::is_hermitian(rho, tol) {
        return Err(Error::NotHermitian(max_abs_diff(rho, &rho.adjoint())));
    }
    if !numerics::is_psd(rho, tol)? {
        return Err(Error::InvalidInput("state is not positive semidefinite".into()));
    }
    let t = trace(rho);
    if (t.re - 1.0).abs() > tol.eq_abs || t.im.abs() > tol.eq_abs {
        return Err(Error::InvalidInput(format!("state has trace {t}, expected 1")));
    }
    Ok(())
}

/// Data matrix of an arbitrary family; `state = None` means `I / n`.
pub fn family_data_matrix(family: &KrausFamily, state: Option<&CMatrix>, tol: &Tolerance) -> Result<DataMatrix> {
    let n = family.dim();
    let (rho, state_tag) = match state {
        Some(rho) => {
            check_state(rho, n, tol)?;
            (numerics::hermitian_part(rho), "density".to_string())
        }
        None => (CMatrix::identity(n, n).map(|z| z / n as f64), "trace".to_string()),
    };
    let ops = family.ops();
    let d = ops.len();
    let matrix = CMatrix::from_fn(d, d, |i, j| trace(&(&rho * &ops[i] * ops[j].adjoint())));
    Ok(DataMatrix {
        matrix: numerics::hermitian_part(&matrix),
        state_tag,
    })
}

pub fn data_matrix(ch: &Channel, state: Option<&CMatrix>, tol: &Tolerance) -> Result<DataMatrix> {
    family_data_matrix(ch.kraus(), state, tol)
}

/// Eigenvalues of `D` in descending order.
pub fn spectrum_invariant(d: &DataMatrix, tol: &Tolerance) -> Result<Vec<f64>> {
    Ok(hermitian_eig(&d.matrix, tol)?.values)
}

/// Spectra are compared entrywise at this tolerance.
pub const SPECTRUM_MATCH: f64 = 1e-8;
/// `g D g* = D'` is accepted at this tolerance.
pub const RELATION_MATCH: f64 = 1e-7;

/// Unitary `g` with `g D g* = D'`, or `None` when the spectra differ.
pub fn conjugate_data_test(d: &DataMatrix, d_prime: &DataMatrix, tol: &Tolerance) -> Result<Option<CMatrix>> {
    if d.matrix.nrows() != d_prime.matrix.nrows() {
        return Err(Error::Dimension(format!(
            "data matrices have sizes {} and {}",
            d.matrix.nrows(),
            d_prime.matrix.nrows()
        )));
    }
    let a = hermitian_eig(&d.matrix, tol)?;
    let b = hermitian_eig(&d_prime.matrix, tol)?;
    if a.values.iter().zip(&b.values).any(|(x, y)| (x - y).abs() > SPECTRUM_MATCH) {
        return Ok(None);
    }
    let g = &b.vectors * a.vectors.adjoint();
    let image = &g * &d.matrix * g.adjoint();
    if max_abs_diff(&image, &d_prime.matrix) > RELATION_MATCH {
        return Ok(None);
    }
    Ok(Some(g))
}

/// `u`, `w` act on `C^n`, `g` on `C^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConjugacyCertificate {
    pub u: CMatrix,
    pub g: CMatrix,
    pub w: CMatrix,
    pub antiunitary: bool,
}

impl ConjugacyCertificate {
    pub fn identity(n: usize, d: usize, antiunitary: bool) -> Self {
        ConjugacyCertificate {
            u: CMatrix::identity(n, n),
            g: CMatrix::identity(d, d),
            w: CMatrix::identity(n, n),
            antiunitary,
        }
    }
}

/// `β_g(v'_k) = Σ_j g_kj v'_j`.
pub fn gauge_transform(family: &KrausFamily, g: &CMatrix) -> Result<KrausFamily> {
    let d = family.len();
    if g.nrows() != d || g.ncols() != d {
        return Err(Error::Dimension(format!("gauge matrix must be {d}x{d}")));
    }
    let n = family.dim();
    let ops = (0..d)
        .map(|k| {
            let mut acc = CMatrix::zeros(n, n);
            for (j, v) in family.ops().iter().enumerate() {
                acc += v.map(|z| z * g[(k, j)]);
            }
            acc
        })
        .collect();
    KrausFamily::new(ops)
}

fn unitarity_defect(m: &CMatrix) -> f64 {
    max_abs_diff(&(m.adjoint() * m), &CMatrix::identity(m.ncols(), m.ncols()))
}

/// Largest entrywise violation of the certificate relation, including the
/// unitarity of `u`, `g` and `w`.
pub fn certificate_residual(k: &KrausFamily, k_prime: &KrausFamily, cert: &ConjugacyCertificate) -> Result<f64> {
    let n = k.dim();
    let d = k.len();
    if k_prime.dim() != n || k_prime.len() != d {
        return Err(Error::Dimension(format!(
            "families have shapes (n={n}, d={d}) and (n={}, d={})",
            k_prime.dim(),
            k_prime.len()
        )));
    }
    for (name, m, size) in [("u", &cert.u, n), ("w", &cert.w, n), ("g", &cert.g, d)] {
        if m.nrows() != size || m.ncols() != size {
            return Err(Error::Dimension(format!("certificate {name} must be {size}x{size}")));
        }
    }
    let source = if cert.antiunitary { k.conjugate() } else { k.clone() };
    let target = gauge_transform(k_prime, &cert.g)?;
    let mut worst = unitarity_defect(&cert.u)
        .max(unitarity_defect(&cert.g))
        .max(unitarity_defect(&cert.w));
    for (v, t) in source.ops().iter().zip(target.ops()) {
        let lhs = &cert.u * v * cert.u.adjoint();
        let rhs = &cert.w * t;
        worst = worst.max(max_abs_diff(&lhs, &rhs));
    }
    Ok(worst)
}

/// Certificate check on explicit families.
pub fn verify_certificate_families(
    k: &KrausFamily,
    k_prime: &KrausFamily,
    cert: &ConjugacyCertificate,
    tol: &Tolerance,
) -> Result<bool> {
    Ok(certificate_residual(k, k_prime, cert)? <= tol.eq_abs)
}

/// Certificate check on the canonical families of two channels.
pub fn verify_certificate(
    ch: &Channel,
    ch_prime: &Channel,
    cert: &ConjugacyCertificate,
    tol: &Tolerance,
) -> Result<bool> {
    verify_certificate_families(ch.kraus(), ch_prime.kraus(), cert, tol)
}

/// The `nd x nd` block matrix `((v_i v_j*))`.
#[derive(Clone, Debug)]
pub struct ChoiBlockProjection {
    pub matrix: CMatrix,
    pub is_projection: bool,
}

pub fn choi_block_projection(family: &KrausFamily, tol: &Tolerance) -> ChoiBlockProjection {
    let n = family.dim();
    let d = family.len();
    let mut matrix = CMatrix::zeros(n * d, n * d);
    for (i, vi) in family.ops().iter().enumerate() {
        for (j, vj) in family.ops().iter().enumerate() {
            matrix.view_mut((i * n, j * n), (n, n)).copy_from(&(vi * vj.adjoint()));
        }
    }
    let scale = numerics::max_abs(&matrix).max(1.0);
    let is_projection = max_abs_diff(&(&matrix * &matrix), &matrix) <= tol.eq_abs * scale
        && max_abs_diff(&matrix, &matrix.adjoint()) <= tol.eq_abs * scale;
    ChoiBlockProjection { matrix, is_projection }
}

/// Unitaries `W` (on `C^{nd}`) and `u` (on `C^n`) with `W* P W = P'` and
/// `u = Σ_jk v_k* W_kj l_j` for the block projections `P`, `P'` of two
/// doubly stochastic families `{v_k}` and `{l_k}`.
#[derive(Clone, Debug)]
pub struct Intertwiner {
    pub w: CMatrix,
    pub u: CMatrix,
}

fn stacked_column(family: &KrausFamily) -> CMatrix {
    let n = family.dim();
    let d = family.len();
    let mut m = CMatrix::zeros(n * d, n);
    for (k, v) in family.ops().iter().enumerate() {
        m.view_mut((k * n, 0), (n, n)).copy_from(v);
    }
    m
}

fn require_doubly_stochastic(family: &KrausFamily, tol: &Tolerance) -> Result<()> {
    let v = validate(family, tol);
    if !v.unital {
        return Err(Error::NotUnital(v.unital_deviation));
    }
    if !v.trace_preserving {
        return Err(Error::NotTracePreserving(v.trace_deviation));
    }
    Ok(())
}

pub fn choi_block_intertwiner(k: &KrausFamily, k_prime: &KrausFamily, tol: &Tolerance) -> Result<Intertwiner> {
    require_doubly_stochastic(k, tol)?;
    require_doubly_stochastic(k_prime, tol)?;
    if k.dim() != k_prime.dim() || k.len() != k_prime.len() {
        return Err(Error::Dimension("families differ in dimension or index".into()));
    }
    let n = k.dim();
    let p = choi_block_projection(k, tol);
    let q = choi_block_projection(k_prime, tol);
    let ep = hermitian_eig(&p.matrix, tol)?;
    let eq = hermitian_eig(&q.matrix, tol)?;
    let rank = |vals: &[f64]| vals.iter().filter(|&&x| x > 0.5).count();
    if rank(&ep.values) != n || rank(&eq.values) != n {
        return Err(Error::Numerical(format!(
            "block projections have ranks {} and {}, expected {n}",
            rank(&ep.values),
            rank(&eq.values)
        )));
    }
    let w = &ep.vectors * eq.vectors.adjoint();
    let u = stacked_column(k).adjoint() * &w * stacked_column(k_prime);
    let relation = max_abs_diff(&(w.adjoint() * &p.matrix * &w), &q.matrix);
    let defect = unitarity_defect(&w).max(unitarity_defect(&u));
    if relation > RELATION_MATCH || defect > RELATION_MATCH {
        return Err(Error::Numerical(format!(
            "intertwiner check failed (relation {relation:.3e}, unitarity {defect:.3e})"
        )));
    }
    Ok(Intertwiner { w, u })
}

/// Channel with entrywise conjugated Kraus operators.
pub fn conjugate_channel(ch: &Channel, tol: &Tolerance) -> Result<Channel> {
    Channel::from_family(&ch.kraus().conjugate(), tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::channel::{adjoint_channel, unitary_channel};
    use crate::numerics::{c64, real_diag};
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn data_matrix_examples() {
        let u = unitary_channel(&catalog::weyl_shift(3), &tol()).unwrap();
        let d = data_matrix(&u, None, &tol()).unwrap();
        assert_eq!(d.matrix.nrows(), 1);
        assert!((d.matrix[(0, 0)].re - 1.0).abs() < 1e-14);

        let ch = catalog::ex2_12(2, None, &tol()).unwrap();
        let d = data_matrix(&ch, None, &tol()).unwrap();
        assert!(max_abs_diff(&d.matrix, &real_diag(&[0.5, 0.5])) < 1e-14);
        assert_eq!(spectrum_invariant(&d, &tol()).unwrap().len(), 2);

        // ex2.4 diagonal pair: tr(v1 v1*)/4 = 1/2, tr(v1 v2*)/4 = (1 - i)/8.
        let d = family_data_matrix(&catalog::ex2_4_family(), None, &tol()).unwrap();
        assert!((d.matrix[(0, 0)] - c64(0.5, 0.0)).norm() < 1e-14);
        assert!((d.matrix[(1, 1)] - c64(0.5, 0.0)).norm() < 1e-14);
        assert!((d.matrix[(0, 1)] - c64(0.125, -0.125)).norm() < 1e-14);
        assert!((trace(&d.matrix).re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn invalid_state_is_rejected() {
        let ch = Channel::identity(2);
        let bad = real_diag(&[0.7, 0.7]);
        assert!(data_matrix(&ch, Some(&bad), &tol()).is_err());
        let neg = real_diag(&[1.5, -0.5]);
        assert!(data_matrix(&ch, Some(&neg), &tol()).is_err());
        let rho = real_diag(&[0.25, 0.75]);
        assert_eq!(data_matrix(&ch, Some(&rho), &tol()).unwrap().state_tag, "density");
    }

    #[test]
    fn conjugate_data_examples() {
        let d = DataMatrix {
            matrix: real_diag(&[0.5, 0.5]),
            state_tag: "trace".into(),
        };
        let g = conjugate_data_test(&d, &d, &tol()).unwrap().unwrap();
        assert!(max_abs_diff(&(&g * &d.matrix * g.adjoint()), &d.matrix) < 1e-12);
        let other = DataMatrix {
            matrix: real_diag(&[0.75, 0.25]),
            state_tag: "trace".into(),
        };
        assert!(conjugate_data_test(&d, &other, &tol()).unwrap().is_none());

        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ch = sampling::random_channel(3, 3, &mut rng, &tol()).unwrap();
        let d = data_matrix(&ch, None, &tol()).unwrap();
        let h = sampling::random_unitary(3, &mut rng);
        let rotated = DataMatrix {
            matrix: &h * &d.matrix * h.adjoint(),
            state_tag: "trace".into(),
        };
        let g = conjugate_data_test(&d, &rotated, &tol()).unwrap().unwrap();
        assert!(max_abs_diff(&(&g * &d.matrix * g.adjoint()), &rotated.matrix) < 1e-7);
    }

    #[test]
    fn certificate_examples() {
        let ch = catalog::ex2_11(&tol()).unwrap();
        let cert = ConjugacyCertificate::identity(3, 3, false);
        assert!(verify_certificate(&ch, &ch, &cert, &tol()).unwrap());

        let ex = catalog::ex2_4(&tol()).unwrap();
        let adj = adjoint_channel(&ex, &tol()).unwrap();
        let anti = ConjugacyCertificate::identity(4, 2, true);
        assert!(verify_certificate(&ex, &adj, &anti, &tol()).unwrap());
        assert!(verify_certificate_families(&catalog::ex2_4_family(), &catalog::ex2_4_family().adjoint(), &anti, &tol())
            .unwrap());

        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let q = sampling::random_unitary(3, &mut rng);
        let family = ch.kraus();
        let rotated = KrausFamily::new(family.ops().iter().map(|v| &q * v * q.adjoint()).collect()).unwrap();
        let cert = ConjugacyCertificate {
            u: q.clone(),
            g: CMatrix::identity(3, 3),
            w: CMatrix::identity(3, 3),
            antiunitary: false,
        };
        assert!(verify_certificate_families(family, &rotated, &cert, &tol()).unwrap());
        let wrong = ConjugacyCertificate::identity(3, 3, false);
        assert!(!verify_certificate_families(family, &rotated, &wrong, &tol()).unwrap());
        let bad = ConjugacyCertificate::identity(2, 3, false);
        assert!(verify_certificate_families(family, &rotated, &bad, &tol()).is_err());
    }

    #[test]
    fn block_projection_examples() {
        let p = choi_block_projection(Channel::identity(2).kraus(), &tol());
        assert!(p.is_projection);
        assert!(max_abs_diff(&p.matrix, &CMatrix::identity(2, 2)) < 1e-15);

        let p = choi_block_projection(&catalog::ex2_4_family(), &tol());
        assert_eq!(p.matrix.nrows(), 8);
        assert!(p.is_projection);
        assert_eq!(numerics::numerical_rank(&p.matrix, &tol()), 4);

        let form = crate::faces::M2CanonicalForm::from_c(0.0, 0.5, &tol()).unwrap();
        let p = choi_block_projection(&crate::faces::m2_index2_family(&form), &tol());
        assert!(!p.is_projection);
    }

    #[test]
    fn intertwiner_examples() {
        let k = catalog::ex2_4_family();
        let same = choi_block_intertwiner(&k, &k, &tol()).unwrap();
        assert!(max_abs_diff(&same.w, &CMatrix::identity(8, 8)) < 1e-10);
        assert!(max_abs_diff(&same.u, &CMatrix::identity(4, 4)) < 1e-10);

        let adj = choi_block_intertwiner(&k, &k.adjoint(), &tol()).unwrap();
        assert!(unitarity_defect(&adj.u) < 1e-7);

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = sampling::random_unitary(2, &mut rng);
        let rotated = gauge_transform(&k, &g).unwrap();
        let r = choi_block_intertwiner(&k, &rotated, &tol()).unwrap();
        let p = choi_block_projection(&k, &tol()).matrix;
        let q = choi_block_projection(&rotated, &tol()).matrix;
        assert!(max_abs_diff(&(r.w.adjoint() * p * &r.w), &q) < 1e-7);

        let form = crate::faces::M2CanonicalForm::from_c(0.0, 0.5, &tol()).unwrap();
        let f = crate::faces::m2_index2_family(&form);
        assert!(matches!(choi_block_intertwiner(&f, &f, &tol()), Err(Error::NotTracePreserving(_))));
    }

    #[test]
    fn conjugate_channel_examples() {
        let real = catalog::ex2_10(0.2, 0.1, -0.3, &tol()).unwrap();
        assert!(conjugate_channel(&real, &tol()).unwrap().distance_on_units(&real).unwrap() < 1e-12);

        let ex = catalog::ex2_4(&tol()).unwrap();
        let conj = conjugate_channel(&ex, &tol()).unwrap();
        let want = Channel::from_family(&catalog::ex2_4_family().adjoint(), &tol()).unwrap();
        assert!(conj.distance_on_units(&want).unwrap() < 1e-12);
        assert!(conj.is_doubly_stochastic());
    }
}
