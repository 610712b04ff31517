//! Schur multiplier faces on `M_2` and `M_3`, and the index-two family on `M_2`.

use std::fmt;

use num_complex::Complex64;

use crate::channel::{Channel, KrausFamily};
use crate::error::{Error, Result};
use crate::numerics::{self, c64, diag, ensure_square, hermitian_eig, CMatrix, Tolerance, ONE};

/// Hermitian matrix with unit diagonal; it defines the Schur multiplier
/// `e_ij ↦ m_ij e_ij`.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurSpec {
    m: CMatrix,
}

impl SchurSpec {
    pub fn new(m: CMatrix, tol: &Tolerance) -> Result<Self> {
        let k = ensure_square(&m, "Schur matrix")?;
        numerics::check_finite(&m)?;
        if !numerics::is_hermitian(&m, tol) {
            return Err(Error::NotHermitian(numerics::max_abs_diff(&m, &m.adjoint())));
        }
        for i in 0..k {
            if (m[(i, i)] - ONE).norm() > tol.eq_abs {
                return Err(Error::InvalidInput(format!(
                    "Schur matrix diagonal entry {i} is {}, expected 1",
                    m[(i, i)]
                )));
            }
        }
        Ok(SchurSpec {
            m: numerics::hermitian_part(&m),
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn is_feasible(&self, tol: &Tolerance) -> Result<bool> {
        numerics::is_psd(&self.m, tol)
    }
}

/// Channel fixing every `e_kk` and scaling `e_ij` by `m_ij`.
///
/// The Kraus operators are `diag(c_r)` for a factorization `m = Σ c_r c_r*`.
pub fn schur_channel(spec: &SchurSpec, tol: &Tolerance) -> Result<Channel> {
    let eig = hermitian_eig(&spec.m, tol)?;
    let top = eig.values[0].abs().max(1.0);
    let min = *eig.values.last().expect("non-empty");
    if min < -tol.psd_abs * top {
        return Err(Error::NotCompletelyPositive(min));
    }
    let mut ops = Vec::new();
    for (r, &val) in eig.values.iter().enumerate() {
        if val <= tol.rank_rel * top {
            continue;
        }
        let c: Vec<Complex64> = eig.vectors.column(r).iter().map(|z| z * val.sqrt()).collect();
        ops.push(diag(&c));
    }
    Channel::from_kraus(ops, tol)
}

/// `[[1, z1, z3], [z̄1, 1, z2], [z̄3, z̄2, 1]]`.
pub fn face_matrix(z1: Complex64, z2: Complex64, z3: Complex64) -> CMatrix {
    CMatrix::from_row_slice(
        3,
        3,
        &[ONE, z1, z3, z1.conj(), ONE, z2, z3.conj(), z2.conj(), ONE],
    )
}

/// Determinant of [`face_matrix`]: `1 - |z1|² - |z2|² - |z3|² + 2 Re(z1 z2 z̄3)`.
pub fn face_determinant(z1: Complex64, z2: Complex64, z3: Complex64) -> f64 {
    1.0 - z1.norm_sqr() - z2.norm_sqr() - z3.norm_sqr() + 2.0 * (z1 * z2 * z3.conj()).re
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FaceClass {
    Interior,
    Boundary,
    Outside,
}

impl fmt::Display for FaceClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FaceClass::Interior => "interior",
            FaceClass::Boundary => "boundary",
            FaceClass::Outside => "outside",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FaceMembership {
    /// Decided by the smallest eigenvalue of [`face_matrix`].
    pub class: FaceClass,
    pub min_eigenvalue: f64,
    /// Value of [`face_determinant`].
    pub closed_form: f64,
    /// Whether the determinant criterion (all `|z_i| <= 1` and positive
    /// determinant) agrees with the eigenvalue sign. Points with
    /// `|det| <= 1e-9` always count as agreeing.
    pub agrees: bool,
}

/// Points with `|det|` at or below this are not used for cross-checking.
pub const CLOSED_FORM_FLOOR: f64 = 1e-9;

fn classify_min_eigenvalue(values: &[f64], tol: &Tolerance) -> FaceClass {
    let top = values.iter().fold(1.0_f64, |acc, x| acc.max(x.abs()));
    let min = *values.last().expect("non-empty");
    if min < -tol.psd_abs * top {
        FaceClass::Outside
    } else if min <= tol.psd_abs * top {
        FaceClass::Boundary
    } else {
        FaceClass::Interior
    }
}

pub fn m3_face_membership(z1: Complex64, z2: Complex64, z3: Complex64, tol: &Tolerance) -> Result<FaceMembership> {
    let eig = hermitian_eig(&face_matrix(z1, z2, z3), tol)?;
    let min_eigenvalue = *eig.values.last().expect("non-empty");
    let class = classify_min_eigenvalue(&eig.values, tol);
    let closed_form = face_determinant(z1, z2, z3);
    let in_disc = z1.norm() <= 1.0 && z2.norm() <= 1.0 && z3.norm() <= 1.0;
    let definite = in_disc && closed_form > 0.0;
    let agrees = closed_form.abs() <= CLOSED_FORM_FLOOR || definite == (min_eigenvalue > 0.0);
    Ok(FaceMembership {
        class,
        min_eigenvalue,
        closed_form,
        agrees,
    })
}

#[derive(Clone, Debug)]
pub struct FaceScan {
    pub points: Vec<([f64; 3], FaceClass)>,
    /// Points of `{±1}³` that lie in the face.
    pub vertices: Vec<[f64; 3]>,
    /// Boundary points that are not midpoints of two other face points on the grid.
    pub extreme_candidates: Vec<[f64; 3]>,
}

impl FaceScan {
    /// `x1,x2,x3,class` lines.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x1,x2,x3,class\n");
        for (p, class) in &self.points {
            out.push_str(&format!("{},{},{},{}\n", p[0], p[1], p[2], class));
        }
        out
    }
}

/// Classifies the real grid `{-1, -1 + h, ..., 1}³` with `h ≈ grid_step`
/// adjusted so that `2/h` is an integer.
pub fn m3_real_face_scan(grid_step: f64, tol: &Tolerance) -> Result<FaceScan> {
    if !(grid_step > 0.0 && grid_step < 1.0) {
        return Err(Error::InvalidInput(format!("grid step must lie in (0, 1), got {grid_step}")));
    }
    let k = (2.0 / grid_step).round() as usize;
    let coord = |i: usize| -1.0 + 2.0 * i as f64 / k as f64;
    let side = k + 1;
    let idx = |a: usize, b: usize, c: usize| (a * side + b) * side + c;
    let mut classes = Vec::with_capacity(side * side * side);
    let mut points = Vec::with_capacity(side * side * side);
    for a in 0..side {
        for b in 0..side {
            for c in 0..side {
                let p = [coord(a), coord(b), coord(c)];
                let m = m3_face_membership(c64(p[0], 0.0), c64(p[1], 0.0), c64(p[2], 0.0), tol)?;
                classes.push(m.class);
                points.push((p, m.class));
            }
        }
    }
    let inside = |a: i64, b: i64, c: i64| {
        let s = side as i64;
        (0..s).contains(&a)
            && (0..s).contains(&b)
            && (0..s).contains(&c)
            && classes[idx(a as usize, b as usize, c as usize)] != FaceClass::Outside
    };

    let mut vertices = Vec::new();
    for &a in &[0, k] {
        for &b in &[0, k] {
            for &c in &[0, k] {
                if classes[idx(a, b, c)] != FaceClass::Outside {
                    vertices.push([coord(a), coord(b), coord(c)]);
                }
            }
        }
    }

    let mut extreme_candidates = Vec::new();
    let s = side as i64;
    for a in 0..s {
        for b in 0..s {
            for c in 0..s {
                if classes[idx(a as usize, b as usize, c as usize)] != FaceClass::Boundary {
                    continue;
                }
                let mut midpoint = false;
                'search: for da in -a.min(s - 1 - a)..=a.min(s - 1 - a) {
                    for db in -b.min(s - 1 - b)..=b.min(s - 1 - b) {
                        for dc in -c.min(s - 1 - c)..=c.min(s - 1 - c) {
                            if (da, db, dc) == (0, 0, 0) {
                                continue;
                            }
                            if inside(a + da, b + db, c + dc) && inside(a - da, b - db, c - dc) {
                                midpoint = true;
                                break 'search;
                            }
                        }
                    }
                }
                if !midpoint {
                    extreme_candidates.push([coord(a as usize), coord(b as usize), coord(c as usize)]);
                }
            }
        }
    }

    Ok(FaceScan {
        points,
        vertices,
        extreme_candidates,
    })
}

/// Parameters of the pair `v1 = diag(c1, c2)`, `v2 = d1 e_12 - d2 e_21`
/// with `c_i² + d_i² = 1`, normalized so that `c1 <= c2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct M2CanonicalForm {
    pub c1: f64,
    pub c2: f64,
    pub d1: f64,
    pub d2: f64,
    /// `c1 == c2` within `eq_abs`; the ordering carries no information.
    pub degenerate: bool,
}

impl M2CanonicalForm {
    pub fn new(c1: f64, c2: f64, d1: f64, d2: f64, tol: &Tolerance) -> Result<Self> {
        for (name, x) in [("c1", c1), ("c2", c2), ("d1", d1), ("d2", d2)] {
            if !x.is_finite() || x < -tol.eq_abs {
                return Err(Error::InvalidInput(format!("{name} must be a nonnegative real, got {x}")));
            }
        }
        for (c, d) in [(c1, d1), (c2, d2)] {
            let dev = (c * c + d * d - 1.0).abs();
            if dev > tol.eq_abs {
                return Err(Error::InvalidInput(format!(
                    "c^2 + d^2 must equal 1 (deviation {dev:.3e})"
                )));
            }
        }
        let (c1, c2, d1, d2) = if c1 > c2 { (c2, c1, d2, d1) } else { (c1, c2, d1, d2) };
        Ok(M2CanonicalForm {
            c1,
            c2,
            d1,
            d2,
            degenerate: (c1 - c2).abs() <= tol.eq_abs,
        })
    }

    /// Solves `d_i = √(1 - c_i²)`.
    pub fn from_c(c1: f64, c2: f64, tol: &Tolerance) -> Result<Self> {
        for x in [c1, c2] {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::InvalidInput(format!("c must lie in [0, 1], got {x}")));
            }
        }
        Self::new(c1, c2, (1.0 - c1 * c1).sqrt(), (1.0 - c2 * c2).sqrt(), tol)
    }

    /// `d1 c2 - d2 c1`.
    pub fn determinant(&self) -> f64 {
        self.d1 * self.c2 - self.d2 * self.c1
    }
}

pub fn m2_index2_family(form: &M2CanonicalForm) -> KrausFamily {
    let v1 = numerics::real_diag(&[form.c1, form.c2]);
    let v2 = CMatrix::from_row_slice(2, 2, &[c64(0.0, 0.0), c64(form.d1, 0.0), c64(-form.d2, 0.0), c64(0.0, 0.0)]);
    KrausFamily::new(vec![v1, v2]).expect("static shapes")
}

pub fn m2_index2_channel(form: &M2CanonicalForm, tol: &Tolerance) -> Result<Channel> {
    Channel::from_family(&m2_index2_family(form), tol)
}

/// Closed-form extremality: `|d1 c2 - d2 c1| > eq_abs`.
pub fn m2_index2_is_extremal(form: &M2CanonicalForm, tol: &Tolerance) -> bool {
    form.determinant().abs() > tol.eq_abs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::depolarizing;
    use crate::extremality::{choi_extremal_test, landau_streater_test};
    use crate::numerics::{matrix_unit, max_abs_diff};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn all_ones_gives_identity() {
        let m = CMatrix::from_element(3, 3, ONE);
        let ch = schur_channel(&SchurSpec::new(m, &tol()).unwrap(), &tol()).unwrap();
        assert_eq!(ch.numerical_index(), 1);
        assert!(ch.distance_on_units(&Channel::identity(3)).unwrap() < 1e-12);
    }

    #[test]
    fn identity_spec_gives_pinching() {
        let ch = schur_channel(&SchurSpec::new(CMatrix::identity(3, 3), &tol()).unwrap(), &tol()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let out = ch.apply(&matrix_unit(3, i, j)).unwrap();
                let want = if i == j { matrix_unit(3, i, i) } else { CMatrix::zeros(3, 3) };
                assert!(max_abs_diff(&out, &want) < 1e-14);
            }
        }
    }

    #[test]
    fn schur_defining_property() {
        let m = face_matrix(c64(0.3, 0.2), c64(-0.1, 0.4), c64(0.2, 0.0));
        let ch = schur_channel(&SchurSpec::new(m.clone(), &tol()).unwrap(), &tol()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let out = ch.apply(&matrix_unit(3, i, j)).unwrap();
                assert!(max_abs_diff(&out, &matrix_unit(3, i, j).map(|z| z * m[(i, j)])) < 1e-13);
            }
        }
    }

    #[test]
    fn infeasible_spec_is_rejected() {
        let m = face_matrix(c64(1.0, 0.0), c64(1.0, 0.0), c64(-1.0, 0.0));
        let spec = SchurSpec::new(m, &tol()).unwrap();
        assert!(!spec.is_feasible(&tol()).unwrap());
        assert!(matches!(schur_channel(&spec, &tol()), Err(Error::NotCompletelyPositive(_))));
        assert!(SchurSpec::new(numerics::real_diag(&[1.0, 2.0]), &tol()).is_err());
    }

    #[test]
    fn ex2_8_dichotomy() {
        let inner = crate::catalog::ex2_8(c64(0.3, 0.4), &tol()).unwrap();
        assert_eq!(inner.numerical_index(), 2);
        assert!(!landau_streater_test(&inner, &tol()).unwrap().extremal);
        let edge = crate::catalog::ex2_8(Complex64::from_polar(1.0, 0.7), &tol()).unwrap();
        assert_eq!(edge.numerical_index(), 1);
    }

    #[test]
    fn face_membership_examples() {
        let one = c64(1.0, 0.0);
        let m = m3_face_membership(one, one, one, &tol()).unwrap();
        assert_eq!(m.class, FaceClass::Boundary);
        assert!(m.agrees);
        let zero = c64(0.0, 0.0);
        let m = m3_face_membership(zero, zero, zero, &tol()).unwrap();
        assert_eq!(m.class, FaceClass::Interior);
        assert!((m.closed_form - 1.0).abs() < 1e-15);
        let h = c64(0.5, 0.0);
        let m = m3_face_membership(h, h, h, &tol()).unwrap();
        // Eigenvalues of the matrix are 2, 1/2, 1/2.
        assert!((m.min_eigenvalue - 0.5).abs() < 1e-12);
        assert!((m.closed_form - 0.5).abs() < 1e-15);
        assert_eq!(m.class, FaceClass::Interior);
        assert!(m.agrees);
    }

    #[test]
    fn determinant_sign_matches_direct_expansion() {
        // z1 = 1, z2 = z3 = i gives the rank-one matrix a a* with a = (1, 1, -i),
        // so the determinant vanishes; the variant 2 Re(z1 z̄2 z̄3) would give -4.
        let (z1, z2, z3) = (c64(1.0, 0.0), c64(0.0, 1.0), c64(0.0, 1.0));
        let m = face_matrix(z1, z2, z3);
        let det = {
            let a = |i: usize, j: usize| m[(i, j)];
            a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
                + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
        };
        assert!((det.re - face_determinant(z1, z2, z3)).abs() < 1e-14);
        assert!(face_determinant(z1, z2, z3).abs() < 1e-14);
        let variant = 1.0 - z1.norm_sqr() - z2.norm_sqr() - z3.norm_sqr() + 2.0 * (z1 * z2.conj() * z3.conj()).re;
        assert!((variant + 4.0).abs() < 1e-14);
        assert_eq!(m3_face_membership(z1, z2, z3, &tol()).unwrap().class, FaceClass::Boundary);
    }

    #[test]
    fn real_face_vertices() {
        let scan = m3_real_face_scan(0.5, &tol()).unwrap();
        assert_eq!(scan.points.len(), 125);
        let mut v = scan.vertices.clone();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            v,
            vec![[-1.0, -1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0], [1.0, 1.0, 1.0]]
        );
        for p in &v {
            assert!(scan.extreme_candidates.contains(p));
        }
        // Edge midpoints between two vertices are not extreme.
        assert!(!scan.extreme_candidates.contains(&[1.0, 0.0, 0.0]));
        let origin = scan.points.iter().find(|(p, _)| *p == [0.0, 0.0, 0.0]).unwrap();
        assert_eq!(origin.1, FaceClass::Interior);
        let corner = scan.points.iter().find(|(p, _)| *p == [-1.0, -1.0, -1.0]).unwrap();
        assert_eq!(corner.1, FaceClass::Outside);
        assert!(scan.to_csv().lines().any(|l| l == "0,0,0,interior"));
        assert!(m3_real_face_scan(1.5, &tol()).is_err());
    }

    #[test]
    fn canonical_form_swaps_and_validates() {
        let f = M2CanonicalForm::from_c(0.5, 0.0, &tol()).unwrap();
        assert_eq!((f.c1, f.c2), (0.0, 0.5));
        assert!((f.d1 - 1.0).abs() < 1e-15 && (f.d2 - 0.75f64.sqrt()).abs() < 1e-15);
        assert!(!f.degenerate);
        assert!(M2CanonicalForm::from_c(0.3, 0.3, &tol()).unwrap().degenerate);
        assert!(M2CanonicalForm::new(0.5, 0.5, 0.5, 0.5, &tol()).is_err());
        assert!(M2CanonicalForm::from_c(1.2, 0.0, &tol()).is_err());
    }

    #[test]
    fn index2_examples() {
        let t = tol();
        let collapsed = m2_index2_channel(&M2CanonicalForm::new(0.0, 0.0, 1.0, 1.0, &t).unwrap(), &t).unwrap();
        assert_eq!(collapsed.numerical_index(), 1);

        let id_form = M2CanonicalForm::new(1.0, 1.0, 0.0, 0.0, &t).unwrap();
        let id = m2_index2_channel(&id_form, &t).unwrap();
        assert!(id.distance_on_units(&Channel::identity(2)).unwrap() < 1e-14);
        assert!(!m2_index2_is_extremal(&id_form, &t));

        let form = M2CanonicalForm::new(0.0, 0.5, 1.0, 0.75f64.sqrt(), &t).unwrap();
        assert!(m2_index2_is_extremal(&form, &t));
        let ch = m2_index2_channel(&form, &t).unwrap();
        assert!(choi_extremal_test(&ch, &t).unwrap().extremal);
        assert!(!ch.is_trace_preserving());

        let dependent = M2CanonicalForm::from_c(0.6, 0.6, &t).unwrap();
        assert!(!m2_index2_is_extremal(&dependent, &t));
        let ch = m2_index2_channel(&dependent, &t).unwrap();
        assert!(ch.is_trace_preserving());
        assert!(!choi_extremal_test(&ch, &t).unwrap().extremal);
        assert!(depolarizing(2, &t).unwrap().is_doubly_stochastic());
    }
}
