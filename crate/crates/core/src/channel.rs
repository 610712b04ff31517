//! Kraus, Choi and superoperator representations of unital CP maps.
//!
//! A [`Channel`] always stores a canonical, linearly independent Kraus family
//! obtained from the eigen-decomposition of its Choi matrix. The canonical
//! gauge is:
//!
//! * eigenvectors ordered by descending eigenvalue; eigenvalues equal within
//!   `eq_abs` are ordered lexicographically by their entries rounded to 12
//!   decimal digits;
//! * each operator is multiplied by a phase making its first entry (row-major)
//!   of modulus greater than `eq_abs` real positive.



use crate::error::{Error, Result};
use crate::numerics::{
    self, c64, check_finite, ensure_square, hermitian_eig, kron, max_abs_diff, partial_trace, unvec, CMatrix,
    Subsystem, Tolerance,
};

/// Ordered family of `n x n` operators `v_k` representing `x ↦ Σ v_k x v_k*`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausFamily {
    dim: usize,
    ops: Vec<CMatrix>,
}

impl KrausFamily {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidInput("Kraus family must not be empty".into()))?;
        let dim = ensure_square(first, "Kraus operator")?;
        for (k, op) in ops.iter().enumerate() {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::Dimension(format!(
                    "Kraus operator {k} is {}x{}, expected {dim}x{dim}",
                    op.nrows(),
                    op.ncols()
                )));
            }
            check_finite(op)?;
        }
        Ok(KrausFamily { dim, ops })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of operators in the family.
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn into_ops(self) -> Vec<CMatrix> {
        self.ops
    }

    /// `Σ v_k v_k*`.
    pub fn unit_image(&self) -> CMatrix {
        self.ops.iter().map(|v| v * v.adjoint()).sum()
    }

    /// `Σ v_k* v_k`.
    pub fn dual_unit_image(&self) -> CMatrix {
        self.ops.iter().map(|v| v.adjoint() * v).sum()
    }

    /// `Σ v_k x v_k*`.
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::Dimension(format!(
                "operand is {}x{}, channel acts on {}x{}",
                x.nrows(),
                x.ncols(),
                self.dim,
                self.dim
            )));
        }
        Ok(self.ops.iter().map(|v| v * x * v.adjoint()).sum())
    }

    /// Family of adjoints `{v_k*}`.
    pub fn adjoint(&self) -> KrausFamily {
        KrausFamily {
            dim: self.dim,
            ops: self.ops.iter().map(|v| v.adjoint()).collect(),
        }
    }

    /// Family of entrywise conjugates `{v̄_k}`.
    pub fn conjugate(&self) -> KrausFamily {
        KrausFamily {
            dim: self.dim,
            ops: self.ops.iter().map(numerics::conj).collect(),
        }
    }
}

/// Result of [`validate`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Validation {
    pub unital: bool,
    pub trace_preserving: bool,
    /// `max |Σ v v* - I|`.
    pub unital_deviation: f64,
    /// `max |Σ v* v - I|`.
    pub trace_deviation: f64,
}

impl Validation {
    pub fn doubly_stochastic(&self) -> bool {
        self.unital && self.trace_preserving
    }
}

/// Checks `Σ v v* = I` and `Σ v* v = I` within `eq_abs`.
pub fn validate(family: &KrausFamily, tol: &Tolerance) -> Validation {
    let id = CMatrix::identity(family.dim, family.dim);
    let unital_deviation = max_abs_diff(&family.unit_image(), &id);
    let trace_deviation = max_abs_diff(&family.dual_unit_image(), &id);
    Validation {
        unital: unital_deviation <= tol.eq_abs,
        trace_preserving: trace_deviation <= tol.eq_abs,
        unital_deviation,
        trace_deviation,
    }
}

/// Choi matrix `Σ_ij e_ij ⊗ τ(e_ij)`; block `(i, j)` is `τ(e_ij)`.
///
/// The first tensor factor carries the input index, so tracing it out gives
/// `τ(I)` and tracing out the second factor gives the transpose of `Σ v* v`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChoiMatrix {
    dim: usize,
    matrix: CMatrix,
}

impl ChoiMatrix {
    pub fn from_matrix(matrix: CMatrix, tol: &Tolerance) -> Result<Self> {
        let size = ensure_square(&matrix, "Choi matrix")?;
        let dim = (size as f64).sqrt().round() as usize;
        if dim * dim != size {
            return Err(Error::Dimension(format!("Choi matrix size {size} is not a perfect square")));
        }
        check_finite(&matrix)?;
        if !numerics::is_hermitian(&matrix, tol) {
            return Err(Error::NotHermitian(max_abs_diff(&matrix, &matrix.adjoint())));
        }
        Ok(ChoiMatrix {
            dim,
            matrix: numerics::hermitian_part(&matrix),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Block `(i, j)`, equal to `τ(e_ij)`.
    pub fn block(&self, i: usize, j: usize) -> CMatrix {
        let n = self.dim;
        self.matrix.view((i * n, j * n), (n, n)).into_owned()
    }

    /// Trace over the input factor; equals `τ(I)`.
    pub fn trace_input(&self) -> CMatrix {
        partial_trace(&self.matrix, (self.dim, self.dim), Subsystem::First).expect("square by construction")
    }

    /// Trace over the output factor; equals `(Σ v* v)ᵀ`.
    pub fn trace_output(&self) -> CMatrix {
        partial_trace(&self.matrix, (self.dim, self.dim), Subsystem::Second).expect("square by construction")
    }

    pub fn rank(&self, tol: &Tolerance) -> usize {
        numerics::numerical_rank(&self.matrix, tol)
    }
}

/// `Σ_k vec(v_k) vec(v_k)*`, which has block `(i, j)` equal to `Σ_k v_k e_ij v_k*`.
pub fn choi_from_kraus(family: &KrausFamily) -> ChoiMatrix {
    let n = family.dim;
    let mut matrix = CMatrix::zeros(n * n, n * n);
    for v in &family.ops {
        let w = numerics::vec(v);
        matrix += &w * w.adjoint();
    }
    ChoiMatrix { dim: n, matrix }
}

fn rounded_key(m: &CMatrix) -> Vec<i64> {
    let mut key = Vec::with_capacity(2 * m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            key.push((z.re * 1e12).round() as i64);
            key.push((z.im * 1e12).round() as i64);
        }
    }
    key
}

fn fix_row_major_phase(m: &mut CMatrix, eps: f64) {
    let mut first = None;
    'outer: for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            if m[(i, j)].norm() > eps {
                first = Some(m[(i, j)]);
                break 'outer;
            }
        }
    }
    if let Some(z) = first {
        let phase = z.conj() / z.norm();
        m.apply(|x| *x *= phase);
    }
}

/// Minimal Kraus family in the canonical gauge.
///
/// Fails with [`Error::NotCompletelyPositive`] when the Choi matrix has an
/// eigenvalue below `-psd_abs * max(1, top eigenvalue)`.
pub fn kraus_from_choi(choi: &ChoiMatrix, tol: &Tolerance) -> Result<KrausFamily> {
    let n = choi.dim;
    let eig = hermitian_eig(&choi.matrix, tol)?;
    let top = eig.values[0];
    let min = *eig.values.last().expect("non-empty");
    if min < -tol.psd_abs * top.abs().max(1.0) {
        return Err(Error::NotCompletelyPositive(min));
    }
    if top <= 0.0 {
        return Err(Error::InvalidInput("Choi matrix is zero".into()));
    }
    let mut kept: Vec<(f64, CMatrix)> = Vec::new();
    for (k, &val) in eig.values.iter().enumerate() {
        if val <= tol.rank_rel * top {
            break;
        }
        let col = eig.vectors.column(k).map(|z| z * val.sqrt());
        let mut op = unvec(&col, n, n)?;
        fix_row_major_phase(&mut op, tol.eq_abs);
        kept.push((val, op));
    }

    // Reorder inside clusters of (numerically) equal eigenvalues.
    let tie = tol.eq_abs * top.max(1.0);
    let mut ordered = Vec::with_capacity(kept.len());
    let mut start = 0;
    while start < kept.len() {
        let mut end = start + 1;
        while end < kept.len() && kept[end - 1].0 - kept[end].0 <= tie {
            end += 1;
        }
        let mut group: Vec<(Vec<i64>, CMatrix)> = kept[start..end]
            .iter()
            .map(|(_, op)| (rounded_key(op), op.clone()))
            .collect();
        group.sort_by(|a, b| a.0.cmp(&b.0));
        ordered.extend(group.into_iter().map(|(_, op)| op));
        start = end;
    }
    KrausFamily::new(ordered)
}

/// Unital CP map held in canonical minimal Kraus form.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel {
    kraus: KrausFamily,
    unital: bool,
    trace_preserving: bool,
}

impl Channel {
    /// Canonicalizes the given operators. The map must be unital.
    pub fn from_kraus(ops: Vec<CMatrix>, tol: &Tolerance) -> Result<Self> {
        let family = KrausFamily::new(ops)?;
        Self::from_family(&family, tol)
    }

    pub fn from_family(family: &KrausFamily, tol: &Tolerance) -> Result<Self> {
        let v = validate(family, tol);
        if !v.unital {
            return Err(Error::NotUnital(v.unital_deviation));
        }
        Self::from_choi(&choi_from_kraus(family), tol)
    }

    pub fn from_choi(choi: &ChoiMatrix, tol: &Tolerance) -> Result<Self> {
        let kraus = kraus_from_choi(choi, tol)?;
        let v = validate(&kraus, tol);
        if !v.unital {
            return Err(Error::NotUnital(v.unital_deviation));
        }
        Ok(Channel {
            kraus,
            unital: true,
            trace_preserving: v.trace_preserving,
        })
    }

    pub fn identity(n: usize) -> Self {
        Channel {
            kraus: KrausFamily {
                dim: n,
                ops: vec![CMatrix::identity(n, n)],
            },
            unital: true,
            trace_preserving: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.kraus.dim
    }

    pub fn kraus(&self) -> &KrausFamily {
        &self.kraus
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.kraus.ops
    }

    pub fn is_unital(&self) -> bool {
        self.unital
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preserving
    }

    pub fn is_doubly_stochastic(&self) -> bool {
        self.unital && self.trace_preserving
    }

    /// Dimension of the span of the Kraus operators (rank of the Choi matrix).
    pub fn numerical_index(&self) -> usize {
        self.kraus.len()
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        self.kraus.apply(x)
    }

    pub fn choi(&self) -> ChoiMatrix {
        choi_from_kraus(&self.kraus)
    }

    pub fn superoperator(&self) -> Superoperator {
        superoperator(self)
    }

    /// Largest deviation between `self` and `other` over all matrix units.
    pub fn distance_on_units(&self, other: &Channel) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension("channels act on different algebras".into()));
        }
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let e = numerics::matrix_unit(n, i, j);
                worst = worst.max(max_abs_diff(&self.apply(&e)?, &other.apply(&e)?));
            }
        }
        Ok(worst)
    }

    /// Errors with [`Error::NotTracePreserving`] unless the channel is also trace preserving.
    pub fn require_trace_preserving(&self) -> Result<()> {
        if !self.trace_preserving {
            let id = CMatrix::identity(self.dim(), self.dim());
            return Err(Error::NotTracePreserving(max_abs_diff(&self.kraus.dual_unit_image(), &id)));
        }
        Ok(())
    }
}

/// Numerical index (Choi rank) of a canonical channel.
pub fn numerical_index(ch: &Channel) -> usize {
    ch.numerical_index()
}

/// Adjoint with respect to the trace pairing, `x ↦ Σ v_k* x v_k`.
pub fn adjoint_channel(ch: &Channel, tol: &Tolerance) -> Result<Channel> {
    ch.require_trace_preserving()?;
    Channel::from_family(&ch.kraus.adjoint(), tol)
}

/// Matrix `T = Σ v̄_k ⊗ v_k` with `T vec(x) = vec(τ(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    pub dim: usize,
    pub matrix: CMatrix,
}

impl Superoperator {
    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::Dimension("operand size does not match superoperator".into()));
        }
        unvec(&(&self.matrix * numerics::vec(x)), self.dim, self.dim)
    }
}

pub fn superoperator(ch: &Channel) -> Superoperator {
    let n = ch.dim();
    let mut matrix = CMatrix::zeros(n * n, n * n);
    for v in ch.ops() {
        matrix += kron(&numerics::conj(v), v);
    }
    Superoperator { dim: n, matrix }
}

pub fn apply(ch: &Channel, x: &CMatrix) -> Result<CMatrix> {
    ch.apply(x)
}

/// Convex combination `Σ w_k τ_k` expressed through its Choi matrix.
pub fn mix(terms: &[(f64, &Channel)], tol: &Tolerance) -> Result<Channel> {
    let first = terms
        .first()
        .ok_or_else(|| Error::InvalidInput("empty mixture".into()))?
        .1;
    let n = first.dim();
    let mut matrix = CMatrix::zeros(n * n, n * n);
    for (w, ch) in terms {
        if ch.dim() != n {
            return Err(Error::Dimension("mixture of channels on different algebras".into()));
        }
        matrix += ch.choi().matrix.map(|z| z * *w);
    }
    Channel::from_choi(&ChoiMatrix::from_matrix(matrix, tol)?, tol)
}

/// Unitary channel `x ↦ u x u*`.
pub fn unitary_channel(u: &CMatrix, tol: &Tolerance) -> Result<Channel> {
    Channel::from_kraus(vec![u.clone()], tol)
}

/// Completely depolarizing channel `x ↦ tr(x) I / n`.
pub fn depolarizing(n: usize, tol: &Tolerance) -> Result<Channel> {
    let s = 1.0 / (n as f64).sqrt();
    let mut ops = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            ops.push(numerics::matrix_unit(n, i, j).map(|z| z * s));
        }
    }
    Channel::from_kraus(ops, tol)
}

pub(crate) fn scaled(m: &CMatrix, s: f64) -> CMatrix {
    m.map(|z| z * c64(s, 0.0))
}
