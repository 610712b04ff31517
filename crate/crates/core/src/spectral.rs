//! Ergodic classification from the spectrum of the superoperator.
//!
//! For a doubly stochastic channel the superoperator is a contraction in the
//! Hilbert–Schmidt norm, so every peripheral eigenvalue is semisimple and the
//! fixed points form a `*`-algebra. Ergodic channels have a peripheral
//! spectrum that is a finite cyclic group; its order is the period.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::channel::{superoperator, Channel};
use crate::error::{Error, Result};
use crate::numerics::{
    self, fix_phase, frobenius_norm, hermitian_eig, hermitian_part, hs_inner, max_abs_diff, null_space,
    skew_part, unvec, CMatrix, Tolerance,
};

/// Eigenvalues with modulus above this count as peripheral.
pub const PERIPHERAL_THRESHOLD: f64 = 1.0 - 1e-8;
const PHASE_MATCH: f64 = 1e-6;
const GRAM_SCHMIDT_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct SpectralClassification {
    /// All `n²` eigenvalues, ordered by descending modulus then ascending phase.
    pub eigenvalues: Vec<Complex64>,
    pub fixed_dim: usize,
    pub ergodic: bool,
    /// Eigenvalues of modulus one (with multiplicity), in the order above.
    pub peripheral: Vec<Complex64>,
    /// Order of the peripheral group; only defined for ergodic channels.
    pub period: Option<usize>,
    pub aperiodic: bool,
    pub strongly_mixing: bool,
}

fn phase_of(z: Complex64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + 2.0 * PI
    } else {
        a
    }
}

/// Shifts tried in turn when the Schur iteration stalls. Unitary superoperators
/// have all eigenvalues on the unit circle, which the unshifted iteration
/// sometimes cannot separate; `m + cI` has distinct moduli in general.
const SCHUR_SHIFTS: [(f64, f64); 4] = [(0.0, 0.0), (0.5, 0.25), (-0.3, 0.7), (0.2, -0.6)];

/// Eigenvalues of a general square matrix via complex Schur decomposition.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<Complex64>> {
    let n = numerics::ensure_square(m, "matrix")?;
    let mut vals: Vec<Complex64> = SCHUR_SHIFTS
        .iter()
        .find_map(|&(re, im)| {
            let c = Complex64::new(re, im);
            let shifted = m + CMatrix::identity(n, n) * c;
            nalgebra::linalg::Schur::try_new(shifted, f64::EPSILON, 10_000)
                .map(|s| s.unpack().1.diagonal().iter().map(|z| z - c).collect())
        })
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    vals.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(phase_of(*a).partial_cmp(&phase_of(*b)).unwrap_or(std::cmp::Ordering::Equal))
    });
    Ok(vals)
}

/// Continued-fraction approximation of `x ∈ [0, 1)` by `k/q` with `q <= max_den`.
///
/// Returns the reduced pair `(k mod q, q)` of the last convergent within reach.
pub fn rational_phase(x: f64, max_den: usize) -> (usize, usize) {
    let mut best = (0usize, 1usize);
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let h2 = a as i64 * h1 + h0;
        let k2 = a as i64 * k1 + k0;
        if k2 as usize > max_den {
            break;
        }
        best = ((h2.rem_euclid(k2)) as usize, k2 as usize);
        if (x - h2 as f64 / k2 as f64).abs() < 1e-12 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    // Phases like 0.9999999 round to 1 = 0 mod 1.
    if best.1 > 0 && best.0 == best.1 {
        best.0 = 0;
    }
    let g = gcd(best.0, best.1);
    (best.0 / g.max(1), best.1 / g.max(1))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn rational_of(z: Complex64, max_den: usize) -> Option<(usize, usize)> {
    let x = phase_of(z) / (2.0 * PI);
    let x = if x >= 1.0 { 0.0 } else { x };
    let (k, q) = rational_phase(x, max_den);
    let dist = (x - k as f64 / q as f64).abs();
    let dist = dist.min((1.0 - dist).abs());
    (dist < PHASE_MATCH).then_some((k, q))
}

/// Hilbert–Schmidt orthonormal hermitian basis of the fixed points `τ(x) = x`.
///
/// The first element is always `I / √n`.
pub fn fixed_point_space(ch: &Channel, tol: &Tolerance) -> Result<Vec<CMatrix>> {
    ch.require_trace_preserving()?;
    let n = ch.dim();
    let t = superoperator(ch).matrix;
    let shifted = &t - CMatrix::identity(n * n, n * n);
    let null = null_space(&shifted, tol)?;
    let target = null.len().max(1);
    let mut candidates = vec![CMatrix::identity(n, n)];
    for v in &null {
        let x = unvec(v, n, n)?;
        candidates.push(hermitian_part(&x));
        candidates.push(skew_part(&x));
    }
    let basis = gram_schmidt(candidates, target);
    if basis.len() != target {
        return Err(Error::Numerical(format!(
            "fixed-point space has dimension {target} but only {} hermitian directions were found",
            basis.len()
        )));
    }
    Ok(basis)
}

fn gram_schmidt(candidates: Vec<CMatrix>, limit: usize) -> Vec<CMatrix> {
    let mut basis: Vec<CMatrix> = Vec::new();
    for mut x in candidates {
        if basis.len() == limit {
            break;
        }
        for b in &basis {
            let c = hs_inner(b, &x);
            x -= b.map(|z| z * c);
        }
        let norm = frobenius_norm(&x);
        if norm > GRAM_SCHMIDT_FLOOR {
            basis.push(x.map(|z| z / norm));
        }
    }
    basis
}

/// Largest failure of the span of an orthonormal basis to be closed under
/// adjoints and products.
pub fn star_algebra_residual(basis: &[CMatrix]) -> f64 {
    let project_out = |y: &CMatrix| {
        let mut r = y.clone();
        for b in basis {
            let c = hs_inner(b, y);
            r -= b.map(|z| z * c);
        }
        frobenius_norm(&r)
    };
    let mut worst: f64 = 0.0;
    for a in basis {
        worst = worst.max(project_out(&a.adjoint()));
        for b in basis {
            worst = worst.max(project_out(&(a * b)));
        }
    }
    worst
}

/// A non-trivial projection fixed by the channel, if one exists.
pub fn invariant_projection(ch: &Channel, tol: &Tolerance) -> Result<Option<CMatrix>> {
    let basis = fixed_point_space(ch, tol)?;
    if basis.len() <= 1 {
        return Ok(None);
    }
    let h = &basis[1];
    let scale = numerics::operator_norm(h).max(1.0);
    let e = numerics::top_spectral_projection(h, 1e-7 * scale, tol)?;
    let image = ch.apply(&e)?;
    let err = max_abs_diff(&image, &e);
    if err > tol.eq_abs.max(1e-9) * 10.0 {
        return Err(Error::Numerical(format!(
            "spectral projection of a fixed element is not fixed (error {err:.3e})"
        )));
    }
    Ok(Some(e))
}

/// Full spectral classification of a doubly stochastic channel.
pub fn classify(ch: &Channel, tol: &Tolerance) -> Result<SpectralClassification> {
    ch.require_trace_preserving()?;
    let n = ch.dim();
    let t = superoperator(ch).matrix;
    let eigenvalues = eigenvalues(&t)?;
    let fixed_dim = fixed_point_space(ch, tol)?.len();
    let peripheral: Vec<Complex64> = eigenvalues
        .iter()
        .copied()
        .filter(|z| z.norm() > PERIPHERAL_THRESHOLD)
        .collect();
    let ergodic = fixed_dim == 1;
    let period = if ergodic {
        let mut classes: Vec<(usize, usize)> = Vec::new();
        for z in &peripheral {
            let class = rational_of(*z, n * n).unwrap_or((usize::MAX, usize::MAX));
            if !classes.contains(&class) {
                classes.push(class);
            }
        }
        Some(classes.len())
    } else {
        None
    };
    let aperiodic = ergodic && period == Some(1);
    let strongly_mixing = ergodic && peripheral.len() == 1;
    Ok(SpectralClassification {
        eigenvalues,
        fixed_dim,
        ergodic,
        peripheral,
        period,
        aperiodic,
        strongly_mixing,
    })
}

/// Mutually orthogonal projections summing to `I` and permuted cyclically by
/// the channel: `τ(E_k) = E_{k+1 mod p}`.
#[derive(Clone, Debug)]
pub struct CyclicFamily {
    pub projections: Vec<CMatrix>,
}

impl CyclicFamily {
    pub fn period(&self) -> usize {
        self.projections.len()
    }

    /// Largest violation of orthogonality, completeness and the cyclic shift.
    pub fn defect(&self, ch: &Channel) -> Result<f64> {
        let n = ch.dim();
        let p = self.period();
        let sum: CMatrix = self.projections.iter().sum();
        let mut worst = max_abs_diff(&sum, &CMatrix::identity(n, n));
        for (k, e) in self.projections.iter().enumerate() {
            worst = worst.max(max_abs_diff(&(e * e), e));
            worst = worst.max(max_abs_diff(e, &e.adjoint()));
            for (j, f) in self.projections.iter().enumerate() {
                if j != k {
                    worst = worst.max(numerics::max_abs(&(e * f)));
                }
            }
            worst = worst.max(max_abs_diff(&ch.apply(e)?, &self.projections[(k + 1) % p]));
        }
        Ok(worst)
    }
}

/// Outcome of the best-effort cyclic projection search.
#[derive(Clone, Debug)]
pub enum CyclicOutcome {
    Found(CyclicFamily),
    /// No verified family was found; the string says why.
    Refused(String),
}

/// Spectral projections of a normal matrix, grouped by eigenvalue.
fn normal_spectral_projections(x: &CMatrix, tol: &Tolerance) -> Result<Vec<(Complex64, CMatrix)>> {
    let n = x.nrows();
    let re = hermitian_part(x);
    let im = skew_part(x);
    // Generic real combination of the commuting parts separates eigenvalues.
    let mixed = &re + im.map(|z| z * 0.723_606_797_749_979);
    let eig = hermitian_eig(&mixed, tol)?;
    let scale = numerics::operator_norm(x).max(1e-300);
    let mut groups: Vec<(Complex64, CMatrix)> = Vec::new();
    for k in 0..n {
        let u = eig.vectors.column(k).into_owned();
        let val = (u.adjoint() * x * &u)[(0, 0)];
        let proj = &u * u.adjoint();
        if let Some(g) = groups.iter_mut().find(|(v, _)| (v - val).norm() < 1e-6 * scale) {
            g.1 += proj;
        } else {
            groups.push((val, proj));
        }
    }
    Ok(groups)
}

fn chain_from(
    ch: &Channel,
    groups: &[(Complex64, CMatrix)],
    verify: f64,
) -> Result<Option<CyclicFamily>> {
    // Start from the projection with the largest weight on the first basis vector.
    let start = (0..groups.len())
        .max_by(|&a, &b| {
            groups[a].1[(0, 0)]
                .re
                .partial_cmp(&groups[b].1[(0, 0)].re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.cmp(&a))
        })
        .expect("non-empty");
    let mut order = vec![start];
    loop {
        let current = &groups[*order.last().expect("non-empty")].1;
        let image = ch.apply(current)?;
        let next = groups.iter().position(|(_, p)| max_abs_diff(&image, p) <= verify);
        match next {
            Some(j) if j == start => break,
            Some(j) if !order.contains(&j) => order.push(j),
            _ => return Ok(None),
        }
    }
    if order.len() != groups.len() || order.len() < 2 {
        return Ok(None);
    }
    Ok(Some(CyclicFamily {
        projections: order.into_iter().map(|k| groups[k].1.clone()).collect(),
    }))
}

/// Best-effort search for a cyclic family from a peripheral eigenoperator.
///
/// Refuses (with an error) channels whose peripheral spectrum is `{1}`.
/// Otherwise every candidate family is verified before it is returned.
pub fn cyclic_projections(ch: &Channel, tol: &Tolerance) -> Result<CyclicOutcome> {
    let class = classify(ch, tol)?;
    let n = ch.dim();
    let mut roots: Vec<(usize, usize)> = class
        .peripheral
        .iter()
        .filter_map(|z| rational_of(*z, n * n))
        .filter(|&(_, q)| q > 1)
        .collect();
    roots.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    roots.dedup();
    if roots.is_empty() {
        return Err(Error::InvalidInput(
            "channel has no peripheral eigenvalue other than 1 (aperiodic)".into(),
        ));
    }
    let t = superoperator(ch).matrix;
    let verify = (tol.eq_abs * n as f64).max(tol.eq_abs);
    let mut tried = 0;
    for (k, q) in roots {
        let mu = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / q as f64);
        let shifted = &t - CMatrix::identity(n * n, n * n).map(|z| z * mu);
        for v in null_space(&shifted, tol)? {
            let x = unvec(&v, n, n)?;
            let mut candidates = vec![x.clone()];
            if mu.im.abs() < 1e-12 {
                candidates.push(hermitian_part(&x));
                candidates.push(skew_part(&x));
            }
            for cand in candidates {
                let norm = frobenius_norm(&cand);
                if norm < GRAM_SCHMIDT_FLOOR {
                    continue;
                }
                let cand = cand.map(|z| z / norm);
                let comm = &cand * cand.adjoint() - cand.adjoint() * &cand;
                if numerics::max_abs(&comm) > 1e-8 {
                    continue;
                }
                tried += 1;
                let groups = normal_spectral_projections(&cand, tol)?;
                if groups.len() < 2 {
                    continue;
                }
                if let Some(family) = chain_from(ch, &groups, verify)? {
                    if family.defect(ch)? <= verify {
                        return Ok(CyclicOutcome::Found(family));
                    }
                }
            }
        }
    }
    Ok(CyclicOutcome::Refused(format!(
        "no normal peripheral eigenoperator produced a verified cyclic family ({tried} candidates tried)"
    )))
}

/// Unitary `α` with `α E_k α* = E_{k+1}` and the channel `x ↦ τ(α* x α)`, which
/// fixes every `E_k`.
pub fn deperiodize(ch: &Channel, family: &CyclicFamily, tol: &Tolerance) -> Result<(CMatrix, Channel)> {
    let n = ch.dim();
    let p = family.period();
    if p == 0 {
        return Err(Error::InvalidInput("empty cyclic family".into()));
    }
    let ranks: Vec<usize> = family
        .projections
        .iter()
        .map(|e| numerics::trace(e).re.round() as usize)
        .collect();
    if ranks.iter().any(|&r| r != ranks[0]) || ranks[0] * p != n {
        return Err(Error::InvalidInput(format!(
            "cyclic projections have unequal ranks {ranks:?}"
        )));
    }
    let r = ranks[0];
    let mut bases = Vec::with_capacity(p);
    for e in &family.projections {
        let eig = hermitian_eig(e, tol)?;
        let cols: Vec<_> = (0..r)
            .map(|j| {
                let mut col: Vec<Complex64> = eig.vectors.column(j).iter().copied().collect();
                fix_phase(&mut col, tol.eq_abs);
                col
            })
            .collect();
        bases.push(cols);
    }
    let mut alpha = CMatrix::zeros(n, n);
    for k in 0..p {
        let next = (k + 1) % p;
        for j in 0..r {
            for a in 0..n {
                for b in 0..n {
                    alpha[(a, b)] += bases[next][j][a] * bases[k][j][b].conj();
                }
            }
        }
    }
    let ops: Vec<CMatrix> = ch.ops().iter().map(|v| v * alpha.adjoint()).collect();
    let residual = Channel::from_kraus(ops, tol)?;
    let verify = (tol.eq_abs * n as f64).max(tol.eq_abs);
    for e in &family.projections {
        let err = max_abs_diff(&residual.apply(e)?, e);
        if err > verify {
            return Err(Error::Numerical(format!(
                "deperiodized channel moves a cyclic projection (error {err:.3e})"
            )));
        }
    }
    Ok((alpha, residual))
}
