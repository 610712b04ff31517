//! Extremality tests, dependency certificates and extremal decompositions.
//!
//! For a canonical family `v_1..v_d` a channel is extremal among unital CP maps
//! iff the `d²` products `v_i v_j*` are linearly independent, and extremal among
//! doubly stochastic maps iff the pairs `v_i v_j* ⊕ v_j* v_i` are. A non-zero
//! coefficient matrix `λ` annihilating the relevant sums is a
//! [`DependencyCertificate`]; `I ± tλ` then splits the channel into two
//! channels of strictly smaller index once `t` reaches the edge of the PSD range.

use serde::{Deserialize, Serialize};

use crate::channel::{Channel, ChoiMatrix};
use crate::error::{Error, Result};
use crate::numerics::{
    self, frobenius_norm, hermitian_eig, numerical_rank, CMatrix, CVector, Tolerance,
};

/// Convex set in which extremality is decided.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtremalityKind {
    /// Unital completely positive maps.
    Cp,
    /// Unital, trace-preserving completely positive maps.
    CpPhi,
}

/// Hermitian `λ` with `Σ λ_ij v_i v_j* = 0` (and `Σ λ_ij v_j* v_i = 0` for
/// [`ExtremalityKind::CpPhi`]), normalized to operator norm one.
#[derive(Clone, Debug, PartialEq)]
pub struct DependencyCertificate {
    pub lambda: CMatrix,
    pub kind: ExtremalityKind,
}

impl DependencyCertificate {
    /// Frobenius norms of the defining sums for the given family.
    pub fn residuals(&self, ops: &[CMatrix]) -> (f64, f64) {
        defining_sums(&self.lambda, ops)
    }

    /// Largest residual relevant for the certificate kind.
    pub fn residual(&self, ops: &[CMatrix]) -> f64 {
        let (top, bottom) = self.residuals(ops);
        match self.kind {
            ExtremalityKind::Cp => top,
            ExtremalityKind::CpPhi => top.max(bottom),
        }
    }
}

/// Verdict of an extremality test.
#[derive(Clone, Debug)]
pub struct ExtremalityVerdict {
    pub extremal: bool,
    /// Rank of the product matrix; extremal iff this equals `d²`.
    pub rank: usize,
    pub certificate: Option<DependencyCertificate>,
}

fn defining_sums(lambda: &CMatrix, ops: &[CMatrix]) -> (f64, f64) {
    let n = ops[0].nrows();
    let mut top = CMatrix::zeros(n, n);
    let mut bottom = CMatrix::zeros(n, n);
    for (i, vi) in ops.iter().enumerate() {
        for (j, vj) in ops.iter().enumerate() {
            let l = lambda[(i, j)];
            if l.norm() == 0.0 {
                continue;
            }
            top += (vi * vj.adjoint()).map(|z| z * l);
            bottom += (vj.adjoint() * vi).map(|z| z * l);
        }
    }
    (frobenius_norm(&top), frobenius_norm(&bottom))
}

/// `n² x d²` matrix whose column `i * d + j` is `vec(v_i v_j*)`, optionally
/// stacked over `vec(v_j* v_i)`.
pub fn product_matrix(ops: &[CMatrix], stacked: bool) -> CMatrix {
    let d = ops.len();
    let n = ops[0].nrows();
    let rows = if stacked { 2 * n * n } else { n * n };
    let mut m = CMatrix::zeros(rows, d * d);
    for (i, vi) in ops.iter().enumerate() {
        for (j, vj) in ops.iter().enumerate() {
            let col = i * d + j;
            let top = numerics::vec(&(vi * vj.adjoint()));
            m.view_mut((0, col), (n * n, 1)).copy_from(&top);
            if stacked {
                let bottom = numerics::vec(&(vj.adjoint() * vi));
                m.view_mut((n * n, col), (n * n, 1)).copy_from(&bottom);
            }
        }
    }
    m
}

fn run_test(ch: &Channel, kind: ExtremalityKind, tol: &Tolerance) -> Result<ExtremalityVerdict> {
    let ops = ch.ops();
    let m = product_matrix(ops, kind == ExtremalityKind::CpPhi);
    let rank = numerical_rank(&m, tol);
    let Some(null) = numerics::null_vector(&m, tol)? else {
        return Ok(ExtremalityVerdict {
            extremal: true,
            rank,
            certificate: None,
        });
    };
    let certificate = hermitize_certificate(&null, ch, kind, tol)?;
    Ok(ExtremalityVerdict {
        extremal: false,
        rank,
        certificate: Some(certificate),
    })
}

/// Extremality among unital CP maps: `{v_i v_j*}` linearly independent.
pub fn choi_extremal_test(ch: &Channel, tol: &Tolerance) -> Result<ExtremalityVerdict> {
    run_test(ch, ExtremalityKind::Cp, tol)
}

/// Extremality among doubly stochastic maps: `{v_i v_j* ⊕ v_j* v_i}` linearly
/// independent. Refuses channels that are not trace preserving.
pub fn landau_streater_test(ch: &Channel, tol: &Tolerance) -> Result<ExtremalityVerdict> {
    ch.require_trace_preserving()?;
    run_test(ch, ExtremalityKind::CpPhi, tol)
}

pub fn extremality_test(ch: &Channel, kind: ExtremalityKind, tol: &Tolerance) -> Result<ExtremalityVerdict> {
    match kind {
        ExtremalityKind::Cp => choi_extremal_test(ch, tol),
        ExtremalityKind::CpPhi => landau_streater_test(ch, tol),
    }
}

/// Turns a null vector (indexed `i * d + j`) into a hermitian certificate of
/// operator norm one.
///
/// The certificate space is closed under `λ ↦ λ*`, so the hermitian part is
/// used when it is non-negligible and `(λ - λ*) / 2i` otherwise.
pub fn hermitize_certificate(
    null: &CVector,
    ch: &Channel,
    kind: ExtremalityKind,
    tol: &Tolerance,
) -> Result<DependencyCertificate> {
    let ops = ch.ops();
    let d = ops.len();
    if null.len() != d * d {
        return Err(Error::Dimension(format!(
            "null vector has length {}, expected {}",
            null.len(),
            d * d
        )));
    }
    let raw = CMatrix::from_fn(d, d, |i, j| null[i * d + j]);
    let raw_norm = numerics::operator_norm(&raw);
    if raw_norm == 0.0 {
        return Err(Error::Numerical("zero null vector".into()));
    }
    let raw = raw.map(|z| z / raw_norm);
    let pre = DependencyCertificate {
        lambda: raw.clone(),
        kind,
    };
    let residual = pre.residual(ops);
    if residual > tol.eq_abs {
        return Err(Error::CertificateResidual(residual));
    }
    let herm = numerics::hermitian_part(&raw);
    let chosen = if numerics::operator_norm(&herm) > tol.eq_abs {
        herm
    } else {
        let skew = numerics::skew_part(&raw);
        if numerics::operator_norm(&skew) <= tol.eq_abs {
            return Err(Error::Numerical("both hermitian parts of the certificate vanish".into()));
        }
        skew
    };
    let norm = numerics::operator_norm(&chosen);
    Ok(DependencyCertificate {
        lambda: chosen.map(|z| z / norm),
        kind,
    })
}

fn check_certificate(ch: &Channel, cert: &DependencyCertificate, tol: &Tolerance) -> Result<()> {
    let d = ch.numerical_index();
    if cert.lambda.nrows() != d || cert.lambda.ncols() != d {
        return Err(Error::Dimension(format!(
            "certificate is {}x{}, channel index is {d}",
            cert.lambda.nrows(),
            cert.lambda.ncols()
        )));
    }
    if numerics::operator_norm(&cert.lambda) <= tol.eq_abs {
        return Err(Error::InvalidInput("certificate is zero".into()));
    }
    if !numerics::is_hermitian(&cert.lambda, tol) {
        return Err(Error::NotHermitian(numerics::max_abs_diff(&cert.lambda, &cert.lambda.adjoint())));
    }
    if cert.kind == ExtremalityKind::CpPhi {
        ch.require_trace_preserving()?;
    }
    let scale = numerics::operator_norm(&cert.lambda);
    let residual = cert.residual(ch.ops()) / scale;
    if residual > tol.eq_abs {
        return Err(Error::CertificateResidual(residual));
    }
    Ok(())
}

/// Channel with Choi matrix `Σ_ij c_ij vec(v_i) vec(v_j)*`, i.e.
/// `x ↦ Σ_ij c_ij v_i x v_j*`.
fn channel_with_coefficients(ch: &Channel, coeffs: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    let ops = ch.ops();
    let n = ch.dim();
    let vecs: Vec<CVector> = ops.iter().map(numerics::vec).collect();
    let mut choi = CMatrix::zeros(n * n, n * n);
    for (i, vi) in vecs.iter().enumerate() {
        for (j, vj) in vecs.iter().enumerate() {
            let c = coeffs[(i, j)];
            if c.norm() == 0.0 {
                continue;
            }
            choi += (vi * vj.adjoint()).map(|z| z * c);
        }
    }
    Channel::from_choi(&ChoiMatrix::from_matrix(choi, tol)?, tol)
}

/// Symmetric split `τ = ½ τ₊ + ½ τ₋` with coefficient matrices `I ± λ`.
///
/// The certificate is rescaled to operator norm one, so at least one of the
/// two halves has a smaller numerical index.
pub fn convex_split(ch: &Channel, cert: &DependencyCertificate, tol: &Tolerance) -> Result<(Channel, Channel)> {
    check_certificate(ch, cert, tol)?;
    let d = ch.numerical_index();
    let lambda = cert.lambda.map(|z| z / numerics::operator_norm(&cert.lambda));
    let id = CMatrix::identity(d, d);
    let plus = channel_with_coefficients(ch, &(&id + &lambda), tol)?;
    let minus = channel_with_coefficients(ch, &(&id - &lambda), tol)?;
    Ok((plus, minus))
}

/// Two-sided split along the whole segment `I + tλ`, `t ∈ [-1/μ_max, 1/|μ_min|]`.
///
/// Returns `(w, τ_a, τ_b)` with `τ = w τ_a + (1 - w) τ_b`; both end points have
/// a singular coefficient matrix and hence a smaller numerical index.
pub fn endpoint_split(
    ch: &Channel,
    cert: &DependencyCertificate,
    tol: &Tolerance,
) -> Result<(f64, Channel, Channel)> {
    check_certificate(ch, cert, tol)?;
    let d = ch.numerical_index();
    let eig = hermitian_eig(&cert.lambda, tol)?;
    let mu_max = eig.values[0];
    let mu_min = eig.values[d - 1];
    if mu_max <= 0.0 || mu_min >= 0.0 {
        return Err(Error::Numerical(
            "definite dependency certificate contradicts linear independence of the Kraus family".into(),
        ));
    }
    let a = 1.0 / -mu_min;
    let b = 1.0 / mu_max;
    let id = CMatrix::identity(d, d);
    let plus = channel_with_coefficients(ch, &(&id + cert.lambda.map(|z| z * a)), tol)?;
    let minus = channel_with_coefficients(ch, &(&id - cert.lambda.map(|z| z * b)), tol)?;
    Ok((b / (a + b), plus, minus))
}

/// One term of an extremal decomposition.
#[derive(Clone, Debug)]
pub struct WeightedChannel {
    pub weight: f64,
    pub channel: Channel,
}

/// Convex combination of extremal channels.
#[derive(Clone, Debug)]
pub struct ExtremalDecomposition {
    pub terms: Vec<WeightedChannel>,
    /// Depth of the deepest split performed.
    pub depth: usize,
    /// False when some branch hit the depth bound before becoming extremal.
    pub complete: bool,
    pub kind: ExtremalityKind,
}

impl ExtremalDecomposition {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// The channel `Σ w_k τ_k`.
    pub fn recombine(&self, tol: &Tolerance) -> Result<Channel> {
        let terms: Vec<(f64, &Channel)> = self.terms.iter().map(|t| (t.weight, &t.channel)).collect();
        crate::channel::mix(&terms, tol)
    }

    /// Largest deviation of `Σ w_k τ_k(e_ij)` from `τ(e_ij)` over matrix units.
    pub fn reconstruction_error(&self, ch: &Channel) -> Result<f64> {
        let n = ch.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = numerics::matrix_unit(n, i, j);
                let mut acc = CMatrix::zeros(n, n);
                for t in &self.terms {
                    acc += t.channel.apply(&e)?.map(|z| z * t.weight);
                }
                worst = worst.max(numerics::max_abs_diff(&acc, &ch.apply(&e)?));
            }
        }
        Ok(worst)
    }
}

pub const DEFAULT_MAX_DEPTH: usize = 64;
const LEAF_MERGE_DISTANCE: f64 = 1e-7;

/// Splits recursively until every leaf passes the extremality test of `kind`.
///
/// Identical leaves (Choi matrices within `1e-7` in Frobenius norm) are merged.
/// When the depth bound is reached the offending branch is kept as a leaf and
/// the decomposition is flagged incomplete.
pub fn decompose_extremal(
    ch: &Channel,
    kind: ExtremalityKind,
    max_depth: usize,
    tol: &Tolerance,
) -> Result<ExtremalDecomposition> {
    if kind == ExtremalityKind::CpPhi {
        ch.require_trace_preserving()?;
    }
    let mut leaves: Vec<(f64, Channel, CMatrix)> = Vec::new();
    let mut complete = true;
    let mut deepest = 0;
    let mut stack = vec![(1.0_f64, ch.clone(), 0_usize)];
    while let Some((weight, node, depth)) = stack.pop() {
        deepest = deepest.max(depth);
        let verdict = extremality_test(&node, kind, tol)?;
        let cert = match (verdict.extremal, verdict.certificate) {
            (true, _) => None,
            (false, Some(c)) => Some(c),
            (false, None) => return Err(Error::Numerical("non-extremal verdict without certificate".into())),
        };
        match cert {
            Some(cert) if depth < max_depth => {
                let (w, a, b) = endpoint_split(&node, &cert, tol)?;
                // Pushed in reverse so the `+` branch is expanded first.
                stack.push((weight * (1.0 - w), b, depth + 1));
                stack.push((weight * w, a, depth + 1));
            }
            other => {
                if other.is_some() {
                    complete = false;
                }
                let choi = node.choi().matrix().clone();
                if let Some(slot) = leaves
                    .iter_mut()
                    .find(|(_, _, c)| frobenius_norm(&(c - &choi)) < LEAF_MERGE_DISTANCE)
                {
                    slot.0 += weight;
                } else {
                    leaves.push((weight, node, choi));
                }
            }
        }
    }
    Ok(ExtremalDecomposition {
        terms: leaves
            .into_iter()
            .map(|(weight, channel, _)| WeightedChannel { weight, channel })
            .collect(),
        depth: deepest,
        complete,
        kind,
    })
}
