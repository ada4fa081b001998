//! Moment maps of the `Sp(1)`, weighted-circle, and 2-torus actions on the
//! quaternionic coordinate spheres, their analytic Jacobians, the group
//! action itself, and the Killing fields.
//!
//! Conventions. Quaternionic coordinates are `u = (u_1, ..., u_n)`, `n` in
//! `{7, 8}`. `Sp(1)` acts by left multiplication `u -> lambda u`. The
//! abelian factor acts by planar rotations
//! `A(t) = [[cos t, -sin t], [sin t, cos t]]` on the coordinate pairs named
//! by the spec, with integer weights scaling the angle per pair. Moment
//! maps sum the pair contributions before accumulating globally, so
//! structurally zero terms come out exactly zero.

use nalgebra::{DMatrix, DVector};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::algebra::{
    oct_mul, ImaginaryOctonion, ImaginaryQuaternion, MultiplicationConvention, Quaternion,
};
use crate::levelset::{Family, LevelSetSpec, SpecError};
use crate::weights::{WeightMatrix, WeightQuad, WeightTriple};

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("quaternion vector length must be 7 or 8, got {0}")]
    BadLength(usize),
    #[error(transparent)]
    Spec(#[from] SpecError),
    #[error("group element lambda is not unit: | |lambda| - 1 | = {0:.3e}")]
    NonUnitLambda(f64),
    #[error("group element supplies {got} angle(s), the family needs {want}")]
    AngleArity { got: usize, want: usize },
}

/// A point of the quaternionic coordinate space (7 or 8 quaternions).
///
/// Serializes as a flat array of 28 or 32 reals in coordinate-major order
/// `(u1.w, u1.x, u1.y, u1.z, u2.w, ...)`.
#[derive(Clone, Debug, PartialEq)]
pub struct QuaternionVector {
    entries: Vec<Quaternion>,
}

impl QuaternionVector {
    pub fn new(entries: Vec<Quaternion>) -> Result<Self, MomentError> {
        if entries.len() == 7 || entries.len() == 8 {
            Ok(QuaternionVector { entries })
        } else {
            Err(MomentError::BadLength(entries.len()))
        }
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self, MomentError> {
        if !flat.len().is_multiple_of(4) {
            return Err(MomentError::BadLength(flat.len() / 4));
        }
        let entries: Vec<Quaternion> = flat
            .chunks_exact(4)
            .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
            .collect();
        QuaternionVector::new(entries)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(4 * self.entries.len());
        for q in &self.entries {
            out.extend_from_slice(&[q.w, q.x, q.y, q.z]);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, idx: usize) -> Quaternion {
        self.entries[idx]
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.entries
    }

    pub fn norm_sqr(&self) -> f64 {
        self.entries.iter().map(|q| q.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Left multiplication by a quaternion on every coordinate.
    pub fn left_mul(&self, lambda: Quaternion) -> QuaternionVector {
        QuaternionVector {
            entries: self.entries.iter().map(|q| lambda * *q).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> QuaternionVector {
        QuaternionVector { entries: self.entries.iter().map(|q| q.scale(s)).collect() }
    }
}

impl Serialize for QuaternionVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_flat().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for QuaternionVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let flat = Vec::<f64>::deserialize(deserializer)?;
        QuaternionVector::from_flat(&flat).map_err(D::Error::custom)
    }
}

/// The 4 x n matrix whose row `a` holds the `a`-th quaternion component of
/// every coordinate; on the level set of the `Sp(1)` moment map its rows
/// are pairwise orthogonal of squared norm 1/4.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameMatrix {
    cols: usize,
    rows: [Vec<f64>; 4],
}

impl FrameMatrix {
    pub fn from_vector(u: &QuaternionVector) -> Self {
        let cols = u.len();
        let mut rows: [Vec<f64>; 4] = [
            Vec::with_capacity(cols),
            Vec::with_capacity(cols),
            Vec::with_capacity(cols),
            Vec::with_capacity(cols),
        ];
        for q in u.entries() {
            for (a, row) in rows.iter_mut().enumerate() {
                row.push(q.component(a));
            }
        }
        FrameMatrix { cols, rows }
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, a: usize) -> &[f64] {
        &self.rows[a]
    }

    /// Row `a` as an imaginary octonion (only defined for 7 columns).
    pub fn row_octonion(&self, a: usize) -> ImaginaryOctonion {
        assert_eq!(self.cols, 7, "octonion rows need 7 columns");
        let mut c = [0.0; 7];
        c.copy_from_slice(&self.rows[a]);
        ImaginaryOctonion::new(c)
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(4, self.cols, |r, c| self.rows[r][c])
    }

    /// Largest deviation of `A A^T` from `(|u|^2 / 4) I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let total: f64 = self.rows.iter().map(|r| r.iter().map(|v| v * v).sum::<f64>()).sum();
        let target = total / 4.0;
        let mut worst = 0.0f64;
        for a in 0..4 {
            for b in a..4 {
                let dot: f64 =
                    self.rows[a].iter().zip(self.rows[b].iter()).map(|(x, y)| x * y).sum();
                let want = if a == b { target } else { 0.0 };
                worst = worst.max((dot - want).abs());
            }
        }
        worst
    }

    /// Determinant of the 4 x 4 block on the given columns.
    pub fn support_determinant(&self, support: &[usize; 4]) -> f64 {
        let m = DMatrix::from_fn(4, 4, |r, c| self.rows[r][support[c]]);
        m.determinant()
    }
}

// ---------------------------------------------------------------------------
// moment maps
// ---------------------------------------------------------------------------

fn imaginary_of(sum: Quaternion) -> ImaginaryQuaternion {
    debug_assert!(sum.w.abs() < 1e-12, "moment map real part {:.3e}", sum.w);
    sum.imaginary()
}

/// The three `Sp(1)` moment maps `sum conj(u_a) q u_a` for `q = i, j, k`.
pub fn moment_sp1(u: &QuaternionVector) -> [ImaginaryQuaternion; 3] {
    let mut out = [ImaginaryQuaternion::ZERO; 3];
    for (slot, axis) in [Quaternion::I, Quaternion::J, Quaternion::K].iter().enumerate() {
        let mut acc = Quaternion::ZERO;
        for q in u.entries() {
            acc += q.conj() * *axis * *q;
        }
        out[slot] = imaginary_of(acc);
    }
    out
}

fn pair_term(v: Quaternion, w: Quaternion) -> Quaternion {
    v.conj() * w - w.conj() * v
}

/// Weighted circle moment map on 7 quaternions:
/// `sum_a p_a (conj(u_{2a}) u_{2a+1} - conj(u_{2a+1}) u_{2a})`.
/// Independent of `u_1`; purely imaginary.
pub fn moment_u1_weighted(u: &QuaternionVector, p: WeightTriple) -> ImaginaryQuaternion {
    assert_eq!(u.len(), 7, "triple-family moment map needs 7 quaternions");
    let w = p.as_array();
    let mut acc = Quaternion::ZERO;
    for (k, (a, b)) in [(1usize, 2usize), (3, 4), (5, 6)].into_iter().enumerate() {
        acc += pair_term(u.entry(a), u.entry(b)).scale(w[k] as f64);
    }
    imaginary_of(acc)
}

/// The 2-torus moment map: the pair of weighted circle maps given by the
/// rows of the weight matrix.
pub fn moment_torus(u: &QuaternionVector, theta: &WeightMatrix) -> [ImaginaryQuaternion; 2] {
    [moment_u1_weighted(u, theta.row(0)), moment_u1_weighted(u, theta.row(1))]
}

/// Weighted circle moment map on 8 quaternions with pairs
/// `(u_{2i-1}, u_{2i})`.
pub fn moment_u1_quad(u: &QuaternionVector, p: WeightQuad) -> ImaginaryQuaternion {
    assert_eq!(u.len(), 8, "quad-family moment map needs 8 quaternions");
    let w = p.as_array();
    let mut acc = Quaternion::ZERO;
    for (k, (a, b)) in [(0usize, 1usize), (2, 3), (4, 5), (6, 7)].into_iter().enumerate() {
        acc += pair_term(u.entry(a), u.entry(b)).scale(w[k] as f64);
    }
    imaginary_of(acc)
}

// ---------------------------------------------------------------------------
// group action and Killing fields
// ---------------------------------------------------------------------------

/// An element of `Sp(1) x U(1)` or `Sp(1) x T^2`: a unit quaternion plus
/// one or two rotation angles.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub lambda: Quaternion,
    pub angles: Vec<f64>,
}

impl GroupElement {
    pub fn circle(lambda: Quaternion, t: f64) -> Self {
        GroupElement { lambda, angles: vec![t] }
    }

    pub fn torus(lambda: Quaternion, t: f64, s: f64) -> Self {
        GroupElement { lambda, angles: vec![t, s] }
    }

    pub fn identity_circle() -> Self {
        GroupElement::circle(Quaternion::ONE, 0.0)
    }
}

/// Apply a group element: block rotations on the weighted coordinate pairs,
/// then left multiplication by `lambda`. Preserves the ambient norm.
pub fn action_apply(
    u: &QuaternionVector,
    g: &GroupElement,
    spec: &LevelSetSpec,
) -> Result<QuaternionVector, MomentError> {
    spec.check_dimension(u)?;
    let unit_defect = (g.lambda.norm() - 1.0).abs();
    if unit_defect > 1e-9 {
        return Err(MomentError::NonUnitLambda(unit_defect));
    }
    let rows = spec.weight_rows();
    if g.angles.len() != rows.len() {
        return Err(MomentError::AngleArity { got: g.angles.len(), want: rows.len() });
    }
    let mut entries: Vec<Quaternion> = u.entries().to_vec();
    for (k, (a, b)) in spec.pairs().into_iter().enumerate() {
        let theta: f64 =
            rows.iter().zip(g.angles.iter()).map(|(row, t)| row[k] as f64 * t).sum();
        let (s, c) = theta.sin_cos();
        let (va, vb) = (entries[a], entries[b]);
        entries[a] = va.scale(c) + vb.scale(-s);
        entries[b] = va.scale(s) + vb.scale(c);
    }
    for q in &mut entries {
        *q = g.lambda * *q;
    }
    Ok(QuaternionVector { entries })
}

/// Analytic Killing fields of the action at `u`, as real coordinate
/// vectors: three `sp(1)` generators (left multiplication by `i, j, k`)
/// plus one rotation generator per weight row. Each is tangent to the
/// ambient sphere.
pub fn killing_fields(u: &QuaternionVector, spec: &LevelSetSpec) -> Vec<DVector<f64>> {
    let n = u.len();
    let mut fields = Vec::with_capacity(3 + spec.weight_rows().len());
    for axis in [Quaternion::I, Quaternion::J, Quaternion::K] {
        fields.push(DVector::from_vec(u.left_mul(axis).to_flat()));
    }
    for row in spec.weight_rows() {
        let mut z = vec![Quaternion::ZERO; n];
        for (k, (a, b)) in spec.pairs().into_iter().enumerate() {
            let w = row[k] as f64;
            z[a] = u.entry(b).scale(-w);
            z[b] = u.entry(a).scale(w);
        }
        let flat: Vec<f64> = z.iter().flat_map(|q| [q.w, q.x, q.y, q.z]).collect();
        fields.push(DVector::from_vec(flat));
    }
    fields
}

// ---------------------------------------------------------------------------
// constraint system
// ---------------------------------------------------------------------------

/// Stacked residual: `(|u|^2 - 1; the 9 components of the Sp(1) moment
/// maps; the 3 or 6 components of the abelian moment map)`.
pub fn constraint_residual(
    u: &QuaternionVector,
    spec: &LevelSetSpec,
) -> Result<DVector<f64>, MomentError> {
    spec.check_dimension(u)?;
    let mut r = Vec::with_capacity(spec.constraint_count());
    r.push(u.norm_sqr() - 1.0);
    for m in moment_sp1(u) {
        r.extend_from_slice(&m.components());
    }
    match spec.family() {
        Family::Triple => {
            let p = match spec.weights {
                crate::levelset::FamilyWeights::Triple(p) => p,
                _ => unreachable!(),
            };
            r.extend_from_slice(&moment_u1_weighted(u, p).components());
        }
        Family::Quad => {
            let p = match spec.weights {
                crate::levelset::FamilyWeights::Quad(p) => p,
                _ => unreachable!(),
            };
            r.extend_from_slice(&moment_u1_quad(u, p).components());
        }
        Family::Theta => {
            let m = match spec.weights {
                crate::levelset::FamilyWeights::Theta(m) => m,
                _ => unreachable!(),
            };
            for nu in moment_torus(u, &m) {
                r.extend_from_slice(&nu.components());
            }
        }
    }
    Ok(DVector::from_vec(r))
}

/// Analytic Jacobian of [`constraint_residual`] with respect to the real
/// coordinates (coordinate-major). The sphere row is exactly `2 u^T`.
pub fn constraint_jacobian(
    u: &QuaternionVector,
    spec: &LevelSetSpec,
) -> Result<DMatrix<f64>, MomentError> {
    spec.check_dimension(u)?;
    let n = u.len();
    let rows = spec.constraint_count();
    let mut jac = DMatrix::zeros(rows, 4 * n);

    // sphere row
    for (col, v) in u.to_flat().iter().enumerate() {
        jac[(0, col)] = 2.0 * v;
    }

    // Sp(1) rows: d/du_b [conj(u_b) q u_b] in direction e is
    // conj(e) q u_b + conj(u_b) q e.
    for (slot, axis) in [Quaternion::I, Quaternion::J, Quaternion::K].iter().enumerate() {
        let r0 = 1 + 3 * slot;
        for b in 0..n {
            let ub = u.entry(b);
            for t in 0..4 {
                let e = Quaternion::basis(t);
                let d = e.conj() * *axis * ub + ub.conj() * *axis * e;
                let col = 4 * b + t;
                jac[(r0, col)] = d.x;
                jac[(r0 + 1, col)] = d.y;
                jac[(r0 + 2, col)] = d.z;
            }
        }
    }

    // abelian rows: the pair term p (conj(v) w - conj(w) v) differentiates to
    // p (conj(e) w - conj(w) e) in v and p (conj(v) e - conj(e) v) in w.
    let mut r0 = 10;
    for row in spec.weight_rows() {
        for (k, (a, b)) in spec.pairs().into_iter().enumerate() {
            let w = row[k] as f64;
            let (va, vb) = (u.entry(a), u.entry(b));
            for t in 0..4 {
                let e = Quaternion::basis(t);
                let da = (e.conj() * vb - vb.conj() * e).scale(w);
                let db = (va.conj() * e - e.conj() * va).scale(w);
                for (off, d) in [(4 * a + t, da), (4 * b + t, db)] {
                    jac[(r0, off)] += d.x;
                    jac[(r0 + 1, off)] += d.y;
                    jac[(r0 + 2, off)] += d.z;
                }
            }
        }
        r0 += 3;
    }
    Ok(jac)
}

// ---------------------------------------------------------------------------
// octonionic cross-check
// ---------------------------------------------------------------------------

/// Evaluate the circle moment map with weights `(1,1,1)` through the
/// octonionic rows of the frame matrix:
/// `nu_a = 2 <f^0 f^a + kappa eps^{abc} f^b f^c, axis>` with the pairing
/// axis and coefficient fixed by the calibrated convention. Agrees with
/// [`moment_u1_weighted`] to 1e-10.
pub fn nu_octonionic(
    u: &QuaternionVector,
    conv: &MultiplicationConvention,
) -> Result<ImaginaryQuaternion, MomentError> {
    if u.len() != 7 {
        return Err(MomentError::BadLength(u.len()));
    }
    let frame = FrameMatrix::from_vector(u);
    let f: Vec<ImaginaryOctonion> = (0..4).map(|a| frame.row_octonion(a)).collect();
    let axis = conv.pairing_axis();
    let kappa = conv.cross_coefficient();
    let pair = |x: ImaginaryOctonion, y: ImaginaryOctonion| oct_mul(x, y, conv).im.c[axis];
    let mut out = [0.0; 3];
    for a in 1..=3usize {
        let (b, c) = match a {
            1 => (2, 3),
            2 => (3, 1),
            _ => (1, 2),
        };
        let cross = pair(f[b], f[c]) - pair(f[c], f[b]);
        out[a - 1] = 2.0 * (pair(f[0], f[a]) + kappa * cross);
    }
    Ok(ImaginaryQuaternion::new(out[0], out[1], out[2]))
}

// ---------------------------------------------------------------------------
// canonical points
// ---------------------------------------------------------------------------

/// The explicit vertex `1/2 (1, i, 0, j, 0, k, 0)`.
pub fn vertex_point() -> QuaternionVector {
    let h = 0.5;
    QuaternionVector::new(vec![
        Quaternion::ONE.scale(h),
        Quaternion::I.scale(h),
        Quaternion::ZERO,
        Quaternion::J.scale(h),
        Quaternion::ZERO,
        Quaternion::K.scale(h),
        Quaternion::ZERO,
    ])
    .expect("vertex point has length 7")
}

/// The vertex supported on an arbitrary feasible pattern
/// `{0} + one of each rotated pair` (0-based indices).
pub fn vertex_point_for_support(support: &[usize; 4]) -> QuaternionVector {
    let h = 0.5;
    let basis = [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K];
    let mut entries = vec![Quaternion::ZERO; 7];
    for (slot, &col) in support.iter().enumerate() {
        entries[col] = basis[slot].scale(h);
    }
    QuaternionVector::new(entries).expect("support vertex has length 7")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::FamilyWeights;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;

    fn rng(seed: u64) -> ChaCha12Rng {
        ChaCha12Rng::seed_from_u64(seed)
    }

    fn random_unit(rng: &mut ChaCha12Rng, n: usize) -> QuaternionVector {
        let flat: Vec<f64> = (0..4 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = QuaternionVector::from_flat(&flat).unwrap();
        let s = 1.0 / u.norm();
        u.scale(s)
    }

    fn random_unit_quaternion(rng: &mut ChaCha12Rng) -> Quaternion {
        let q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        q.scale(1.0 / q.norm())
    }

    fn triple_spec(p: (i64, i64, i64)) -> LevelSetSpec {
        LevelSetSpec::triple(WeightTriple(p.0, p.1, p.2))
    }

    #[test]
    fn sp1_single_term() {
        let mut entries = vec![Quaternion::ZERO; 7];
        entries[0] = Quaternion::ONE;
        let u = QuaternionVector::new(entries).unwrap();
        let [mi, mj, mk] = moment_sp1(&u);
        assert_eq!(mi, ImaginaryQuaternion::new(1.0, 0.0, 0.0));
        assert_eq!(mj, ImaginaryQuaternion::new(0.0, 1.0, 0.0));
        assert_eq!(mk, ImaginaryQuaternion::new(0.0, 0.0, 1.0));
    }

    #[test]
    fn sp1_orthonormal_frame_vanishes() {
        let h = 0.5;
        let u = QuaternionVector::new(vec![
            Quaternion::ONE.scale(h),
            Quaternion::I.scale(h),
            Quaternion::J.scale(h),
            Quaternion::K.scale(h),
            Quaternion::ZERO,
            Quaternion::ZERO,
            Quaternion::ZERO,
        ])
        .unwrap();
        for m in moment_sp1(&u) {
            assert_eq!(m, ImaginaryQuaternion::ZERO);
        }
    }

    #[test]
    fn sp1_stacked_norm_is_rotation_equivariant() {
        let mut r = rng(2);
        for _ in 0..100 {
            let u = random_unit(&mut r, 7);
            let lam = random_unit_quaternion(&mut r);
            let before: f64 = moment_sp1(&u).iter().map(|m| m.norm_sqr()).sum();
            let after: f64 = moment_sp1(&u.left_mul(lam)).iter().map(|m| m.norm_sqr()).sum();
            assert!((before.sqrt() - after.sqrt()).abs() < 1e-10);
        }
    }

    #[test]
    fn u1_vertex_vanishes_exactly() {
        let u = vertex_point();
        for p in [(1, 2, 3), (2, 5, 9), (-3, 7, 11)] {
            let nu = moment_u1_weighted(&u, WeightTriple(p.0, p.1, p.2));
            assert_eq!(nu, ImaginaryQuaternion::ZERO);
        }
    }

    #[test]
    fn u1_quaternion_frame_value() {
        let h = 0.5;
        let u = QuaternionVector::new(vec![
            Quaternion::ONE.scale(h),
            Quaternion::I.scale(h),
            Quaternion::J.scale(h),
            Quaternion::K.scale(h),
            Quaternion::ZERO,
            Quaternion::ZERO,
            Quaternion::ZERO,
        ])
        .unwrap();
        for p1 in [1i64, 2, 5] {
            let nu = moment_u1_weighted(&u, WeightTriple(p1, 7, 9));
            // pair (u2, u3) contributes -(p1/2) k; the others vanish.
            assert!((nu.x).abs() < 1e-15);
            assert!((nu.y).abs() < 1e-15);
            assert!((nu.z + p1 as f64 / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn u1_linear_in_weights() {
        let mut r = rng(3);
        for _ in 0..50 {
            let u = random_unit(&mut r, 7);
            let p = WeightTriple(r.gen_range(-5..5), r.gen_range(-5..5), r.gen_range(-5..5));
            let c = r.gen_range(-4i64..5);
            let scaled = WeightTriple(c * p.0, c * p.1, c * p.2);
            let lhs = moment_u1_weighted(&u, scaled);
            let rhs = moment_u1_weighted(&u, p).scale(c as f64);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn u1_independent_of_u1_bitwise() {
        let mut r = rng(4);
        let u = random_unit(&mut r, 7);
        let p = WeightTriple(1, 2, 3);
        let before = moment_u1_weighted(&u, p);
        let mut entries = u.entries().to_vec();
        entries[0] = Quaternion::new(0.77, -0.3, 12.5, 0.0);
        let perturbed = QuaternionVector::new(entries).unwrap();
        let after = moment_u1_weighted(&perturbed, p);
        assert_eq!(before, after);
    }

    #[test]
    fn torus_rows_match_weighted_map() {
        let mut r = rng(5);
        let theta = WeightMatrix::new([1, 0, 1], [0, 1, 1]);
        for _ in 0..1000 {
            let u = random_unit(&mut r, 7);
            let [a, b] = moment_torus(&u, &theta);
            assert_eq!(a, moment_u1_weighted(&u, theta.row(0)));
            assert_eq!(b, moment_u1_weighted(&u, theta.row(1)));
        }
    }

    #[test]
    fn torus_zero_row_gives_zero() {
        let mut r = rng(6);
        let theta = WeightMatrix::new([2, -1, 4], [0, 0, 0]);
        for _ in 0..20 {
            let u = random_unit(&mut r, 7);
            let [_, b] = moment_torus(&u, &theta);
            assert_eq!(b, ImaginaryQuaternion::ZERO);
        }
    }

    #[test]
    fn torus_vertex_vanishes() {
        let theta = WeightMatrix::new([3, -2, 5], [7, 1, -4]);
        let [a, b] = moment_torus(&vertex_point(), &theta);
        assert_eq!(a, ImaginaryQuaternion::ZERO);
        assert_eq!(b, ImaginaryQuaternion::ZERO);
    }

    #[test]
    fn quad_alternating_zeros() {
        let h = 0.5;
        let u = QuaternionVector::new(vec![
            Quaternion::ONE.scale(h),
            Quaternion::ZERO,
            Quaternion::I.scale(h),
            Quaternion::ZERO,
            Quaternion::J.scale(h),
            Quaternion::ZERO,
            Quaternion::K.scale(h),
            Quaternion::ZERO,
        ])
        .unwrap();
        for p in [(0, 1, 2, 3), (1, 3, 5, 7)] {
            let nu = moment_u1_quad(&u, WeightQuad(p.0, p.1, p.2, p.3));
            assert_eq!(nu, ImaginaryQuaternion::ZERO);
        }
    }

    #[test]
    fn quad_weight_support() {
        let mut r = rng(7);
        let p = WeightQuad(0, 0, 0, 1);
        let u = random_unit(&mut r, 8);
        let before = moment_u1_quad(&u, p);
        let mut entries = u.entries().to_vec();
        for e in entries.iter_mut().take(6) {
            *e = Quaternion::new(9.0, -2.0, 3.3, 0.1);
        }
        let after = moment_u1_quad(&QuaternionVector::new(entries).unwrap(), p);
        assert_eq!(before, after);
    }

    #[test]
    fn quad_rotation_invariance() {
        let mut r = rng(8);
        let p = WeightQuad(0, 1, 2, 3);
        let spec = LevelSetSpec::quad(p);
        for _ in 0..100 {
            let u = random_unit(&mut r, 8);
            let t = r.gen_range(-3.0..3.0);
            let g = GroupElement::circle(Quaternion::ONE, t);
            let moved = action_apply(&u, &g, &spec).unwrap();
            let d = moment_u1_quad(&moved, p) - moment_u1_quad(&u, p);
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn action_identity_and_left_mult() {
        let mut r = rng(9);
        let spec = triple_spec((1, 2, 3));
        let u = random_unit(&mut r, 7);
        let id = GroupElement::identity_circle();
        assert_eq!(action_apply(&u, &id, &spec).unwrap(), u);
        let g = GroupElement::circle(Quaternion::I, 0.0);
        assert_eq!(action_apply(&u, &g, &spec).unwrap(), u.left_mul(Quaternion::I));
    }

    #[test]
    fn action_is_isometry() {
        let mut r = rng(10);
        let spec = triple_spec((1, 2, 3));
        for _ in 0..1000 {
            let u = random_unit(&mut r, 7);
            let g = GroupElement::circle(random_unit_quaternion(&mut r), r.gen_range(-4.0..4.0));
            let moved = action_apply(&u, &g, &spec).unwrap();
            assert!((moved.norm() - u.norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn action_rejects_non_unit_lambda() {
        let spec = triple_spec((1, 2, 3));
        let u = vertex_point();
        let g = GroupElement::circle(Quaternion::new(1.1, 0.0, 0.0, 0.0), 0.0);
        assert!(matches!(action_apply(&u, &g, &spec), Err(MomentError::NonUnitLambda(_))));
    }

    #[test]
    fn abelian_invariance_of_circle_map() {
        let mut r = rng(11);
        for _ in 0..1000 {
            let u = random_unit(&mut r, 7);
            let p = WeightTriple(r.gen_range(-4..5), r.gen_range(-4..5), r.gen_range(-4..5));
            let spec = LevelSetSpec::triple(p);
            let t = r.gen_range(-6.0..6.0);
            let g = GroupElement::circle(Quaternion::ONE, t);
            let moved = action_apply(&u, &g, &spec).unwrap();
            let d = moment_u1_weighted(&moved, p) - moment_u1_weighted(&u, p);
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn killing_fields_at_basepoint() {
        let mut entries = vec![Quaternion::ZERO; 7];
        entries[0] = Quaternion::ONE;
        let u = QuaternionVector::new(entries).unwrap();
        let spec = triple_spec((1, 2, 3));
        let fields = killing_fields(&u, &spec);
        assert_eq!(fields.len(), 4);
        for (idx, axis) in [Quaternion::I, Quaternion::J, Quaternion::K].iter().enumerate() {
            let expect = DVector::from_vec(u.left_mul(*axis).to_flat());
            assert_eq!(fields[idx], expect);
        }
    }

    #[test]
    fn killing_fields_tangent_to_sphere() {
        let mut r = rng(12);
        let theta = WeightMatrix::new([1, 0, 1], [0, 1, 1]);
        let spec = LevelSetSpec::theta(theta);
        for _ in 0..50 {
            let u = random_unit(&mut r, 7);
            let x = DVector::from_vec(u.to_flat());
            let fields = killing_fields(&u, &spec);
            assert_eq!(fields.len(), 5);
            for z in fields {
                assert!(x.dot(&z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn killing_fields_match_finite_differences() {
        let mut r = rng(13);
        let spec = triple_spec((1, 2, 3));
        let h = 1e-6;
        for _ in 0..20 {
            let u = random_unit(&mut r, 7);
            let fields = killing_fields(&u, &spec);
            // sp(1) direction i
            let lam = |t: f64| Quaternion::new(t.cos(), t.sin(), 0.0, 0.0);
            let fd = |plus: &QuaternionVector, minus: &QuaternionVector| -> DVector<f64> {
                (DVector::from_vec(plus.to_flat()) - DVector::from_vec(minus.to_flat()))
                    .scale(1.0 / (2.0 * h))
            };
            let gp = GroupElement::circle(lam(h), 0.0);
            let gm = GroupElement::circle(lam(-h), 0.0);
            let d = fd(
                &action_apply(&u, &gp, &spec).unwrap(),
                &action_apply(&u, &gm, &spec).unwrap(),
            );
            assert!((d - &fields[0]).norm() < 1e-5);
            // circle direction
            let gp = GroupElement::circle(Quaternion::ONE, h);
            let gm = GroupElement::circle(Quaternion::ONE, -h);
            let d = fd(
                &action_apply(&u, &gp, &spec).unwrap(),
                &action_apply(&u, &gm, &spec).unwrap(),
            );
            assert!((d - &fields[3]).norm() < 1e-5);
        }
    }

    #[test]
    fn killing_fields_pair_with_moment_gradients() {
        // Generators are generically non-orthogonal to the Sp(1) moment-map
        // gradient rows (the moment map is equivariant, not invariant).
        let mut r = rng(14);
        let spec = triple_spec((1, 2, 3));
        for _ in 0..100 {
            let u = random_unit(&mut r, 7);
            let jac = constraint_jacobian(&u, &spec).unwrap();
            let fields = killing_fields(&u, &spec);
            let mut max_pairing = 0.0f64;
            for z in &fields[..3] {
                for row in 1..10 {
                    let g = jac.row(row).transpose();
                    max_pairing = max_pairing.max(g.dot(z).abs());
                }
            }
            assert!(max_pairing > 1e-3, "sp(1) generators unexpectedly orthogonal");
        }
    }

    #[test]
    fn residual_vertex_is_zero() {
        let spec = triple_spec((1, 2, 3));
        let r = constraint_residual(&vertex_point(), &spec).unwrap();
        assert_eq!(r.len(), 13);
        assert!(r.norm() < 1e-15);
    }

    #[test]
    fn residual_basepoint_unit_entries() {
        let mut entries = vec![Quaternion::ZERO; 7];
        entries[0] = Quaternion::ONE;
        let u = QuaternionVector::new(entries).unwrap();
        let spec = triple_spec((1, 2, 3));
        let r = constraint_residual(&u, &spec).unwrap();
        // mu = (i, j, k): rows 1, 5, 9 carry the unit entries.
        assert_eq!(r[1], 1.0);
        assert_eq!(r[5], 1.0);
        assert_eq!(r[9], 1.0);
    }

    #[test]
    fn residual_theta_shape() {
        let mut r = rng(15);
        let spec = LevelSetSpec::theta(WeightMatrix::new([2, 3, -1], [1, 1, 1]));
        let u = random_unit(&mut r, 7);
        assert_eq!(constraint_residual(&u, &spec).unwrap().len(), 16);
    }

    #[test]
    fn residual_dimension_mismatch() {
        let mut r = rng(16);
        let spec = LevelSetSpec::quad(WeightQuad(0, 1, 2, 3));
        let u = random_unit(&mut r, 7);
        assert!(matches!(
            constraint_residual(&u, &spec),
            Err(MomentError::Spec(SpecError::DimensionMismatch { .. }))
        ));
    }

    #[test]
    fn jacobian_sphere_row_exact() {
        let mut r = rng(17);
        let spec = triple_spec((1, 2, 3));
        let u = random_unit(&mut r, 7);
        let jac = constraint_jacobian(&u, &spec).unwrap();
        for (col, v) in u.to_flat().iter().enumerate() {
            assert_eq!(jac[(0, col)], 2.0 * v);
        }
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut r = rng(18);
        let h = 1e-6;
        let specs = vec![
            triple_spec((1, 2, 3)),
            LevelSetSpec::quad(WeightQuad(0, 1, 2, 3)),
            LevelSetSpec::theta(WeightMatrix::new([1, 0, 1], [0, 1, 1])),
        ];
        for spec in specs {
            for _ in 0..34 {
                let u = random_unit(&mut r, spec.quaternion_dim());
                let jac = constraint_jacobian(&u, &spec).unwrap();
                let flat = u.to_flat();
                for col in 0..flat.len() {
                    let mut fp = flat.clone();
                    let mut fm = flat.clone();
                    fp[col] += h;
                    fm[col] -= h;
                    let rp = constraint_residual(&QuaternionVector::from_flat(&fp).unwrap(), &spec)
                        .unwrap();
                    let rm = constraint_residual(&QuaternionVector::from_flat(&fm).unwrap(), &spec)
                        .unwrap();
                    let fd = (rp - rm).scale(1.0 / (2.0 * h));
                    for row in 0..jac.nrows() {
                        assert!(
                            (jac[(row, col)] - fd[row]).abs() < 1e-5,
                            "row {row} col {col}: {} vs {}",
                            jac[(row, col)],
                            fd[row]
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn jacobian_rank_at_vertex() {
        let spec = triple_spec((1, 2, 3));
        let jac = constraint_jacobian(&vertex_point(), &spec).unwrap();
        let svd = jac.svd(false, false);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-6 * smax).count();
        assert_eq!(rank, 13);
    }

    #[test]
    fn sp1_invariance_of_zero_set() {
        let mut r = rng(19);
        let spec = triple_spec((1, 2, 3));
        let u = vertex_point();
        for _ in 0..100 {
            let lam = random_unit_quaternion(&mut r);
            let moved = u.left_mul(lam);
            let res = constraint_residual(&moved, &spec).unwrap();
            assert!(res.norm() < 1e-10);
        }
    }

    #[test]
    fn octonionic_agrees_with_quaternionic() {
        let conv = MultiplicationConvention::calibrated();
        let mut r = rng(20);
        let p111 = WeightTriple(1, 1, 1);
        for _ in 0..1000 {
            let u = random_unit(&mut r, 7);
            let oct = nu_octonionic(&u, &conv).unwrap();
            let quat = moment_u1_weighted(&u, p111);
            assert!((oct - quat).norm() < 1e-10);
        }
    }

    #[test]
    fn octonionic_real_proportional_pairs_vanish() {
        let conv = MultiplicationConvention::calibrated();
        let mut r = rng(21);
        for _ in 0..50 {
            let mut entries = vec![Quaternion::ZERO; 7];
            entries[0] = random_unit_quaternion(&mut r);
            for (a, b) in [(1usize, 2usize), (3, 4), (5, 6)] {
                let q = random_unit_quaternion(&mut r);
                entries[a] = q;
                entries[b] = q.scale(r.gen_range(-2.0..2.0));
            }
            let u = QuaternionVector::new(entries).unwrap();
            let u = u.scale(1.0 / u.norm());
            assert!(moment_u1_weighted(&u, WeightTriple(1, 1, 1)).norm() < 1e-14);
            assert!(nu_octonionic(&u, &conv).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn octonionic_vertex_vanishes() {
        let conv = MultiplicationConvention::calibrated();
        let nu = nu_octonionic(&vertex_point(), &conv).unwrap();
        assert!(nu.norm() < 1e-15);
    }

    #[test]
    fn frame_matrix_orthonormality_at_vertex() {
        let fm = FrameMatrix::from_vector(&vertex_point());
        assert!(fm.orthonormality_defect() < 1e-15);
    }

    #[test]
    fn flat_roundtrip() {
        let mut r = rng(22);
        let u = random_unit(&mut r, 8);
        let back = QuaternionVector::from_flat(&u.to_flat()).unwrap();
        assert_eq!(u, back);
        let _ = FamilyWeights::Quad(WeightQuad(0, 1, 2, 3));
    }
}
