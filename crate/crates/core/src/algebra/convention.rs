//! The frozen octonion multiplication table.
//!
//! The basis is `(i, j, k, e, ie, je, ke)`. A multiplication table is a set
//! of seven oriented Fano lines with signs; only the norm-composing tables
//! are admissible, and among those the calibration search keeps the ones
//! that (a) restrict to the Hamilton product on `(i, j, k)`, (b) make the
//! octonionic circle-moment-map identity hold against the quaternionic
//! formula, and (c) make the explicit vertex frame co-associative. The
//! survivors differ only by a basis negation; the lexicographically least
//! sign vector is frozen and serialized.

use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::octonion::{ImaginaryOctonion, BASIS_NAMES, IM_DIM};
use super::quaternion::{ImaginaryQuaternion, Quaternion};

/// The two ways to complete the forced lines `(i,j,k)`, `(i,e,ie)`,
/// `(i,je,ke)` to a Fano plane on the seven basis indices (0-based).
const COMPLETION_A: [[usize; 3]; 7] = [
    [0, 1, 2],
    [0, 3, 4],
    [0, 5, 6],
    [1, 3, 5],
    [1, 4, 6],
    [2, 3, 6],
    [2, 4, 5],
];
const COMPLETION_B: [[usize; 3]; 7] = [
    [0, 1, 2],
    [0, 3, 4],
    [0, 5, 6],
    [1, 3, 6],
    [1, 4, 5],
    [2, 3, 5],
    [2, 4, 6],
];

/// Candidate coefficients for the cross term of the moment-map identity.
const KAPPA_CANDIDATES: [f64; 6] = [1.0, -0.5, 0.5, -1.0, 2.0, -2.0];

/// One entry of the serialized table: `a * b = sign * product`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureSign {
    pub a: String,
    pub b: String,
    pub product: String,
    pub sign: i8,
}

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("calibration requires at least 100 samples, got {0}")]
    TooFewSamples(usize),
    /// No sign convention reproduces the circle moment map. This signals an
    /// implementation bug in `oct_mul` or in the identity transcription and
    /// must abort the run.
    #[error("no octonion sign convention reproduces the circle moment map")]
    NoConventionFound,
    #[error("invalid convention data: {0}")]
    InvalidConvention(String),
}

/// A frozen, validated octonion multiplication convention together with the
/// discovered form of the moment-map identity (pairing axis and cross-term
/// coefficient).
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplicationConvention {
    lines: [[usize; 3]; 7],
    line_signs: [i8; 7],
    sign: [[f64; IM_DIM]; IM_DIM],
    idx: [[usize; IM_DIM]; IM_DIM],
    pairing_axis: usize,
    cross_coefficient: f64,
}

/// On-disk form: the 21 structure-constant signs plus the identity data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConventionFile {
    pub schema_version: u32,
    pub basis: Vec<String>,
    pub signs: Vec<StructureSign>,
    pub pairing_axis: String,
    pub cross_coefficient: f64,
    /// The identity the table was calibrated against, for human readers.
    pub identity: String,
}

impl MultiplicationConvention {
    fn from_lines(lines: [[usize; 3]; 7], line_signs: [i8; 7]) -> Self {
        let mut sign = [[0.0; IM_DIM]; IM_DIM];
        let mut idx = [[0; IM_DIM]; IM_DIM];
        for (line, &s) in lines.iter().zip(line_signs.iter()) {
            let [a, b, c] = *line;
            for (m, n, l) in [(a, b, c), (b, c, a), (c, a, b)] {
                sign[m][n] = s as f64;
                sign[n][m] = -(s as f64);
                idx[m][n] = l;
                idx[n][m] = l;
            }
        }
        MultiplicationConvention {
            lines,
            line_signs,
            sign,
            idx,
            pairing_axis: 0,
            cross_coefficient: 0.0,
        }
    }

    /// Structure constants: `eps_m eps_n = sign * eps_idx` for `m != n`.
    #[inline]
    pub(crate) fn structure(&self, m: usize, n: usize) -> (f64, usize) {
        (self.sign[m][n], self.idx[m][n])
    }

    /// Basis index paired against in the moment-map identity (0 = `i`).
    pub fn pairing_axis(&self) -> usize {
        self.pairing_axis
    }

    /// Coefficient of the `eps^{abc} f^b f^c` cross term discovered by the
    /// calibration search.
    pub fn cross_coefficient(&self) -> f64 {
        self.cross_coefficient
    }

    /// The seven oriented lines with their signs.
    pub fn lines(&self) -> impl Iterator<Item = ([usize; 3], i8)> + '_ {
        self.lines.iter().copied().zip(self.line_signs.iter().copied())
    }

    /// Search the finite family of sign conventions for one reproducing the
    /// quaternionic circle moment map with weights `(1,1,1)` on `samples`
    /// random points, within `1e-10`. Deterministic: the survivor set does
    /// not depend on the seed, and ties are broken lexicographically.
    pub fn calibrate(samples: usize, seed: u64) -> Result<Self, CalibrationError> {
        if samples < 100 {
            return Err(CalibrationError::TooFewSamples(samples));
        }
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        let probes: Vec<[Quaternion; 7]> = (0..samples).map(|_| random_point(&mut rng)).collect();
        let pair_probes: Vec<(ImaginaryOctonion, ImaginaryOctonion)> =
            (0..256).map(|_| (random_im(&mut rng), random_im(&mut rng))).collect();

        let mut survivors: Vec<(usize, [i8; 7], usize, f64)> = Vec::new();
        for (ci, lines) in [COMPLETION_A, COMPLETION_B].iter().enumerate() {
            for mask in 0..(1u32 << 6) {
                // Line 0 is (i, j, k); its sign is pinned to +1 so the
                // quaternion subalgebra comes out with ij = k.
                let mut line_signs = [1i8; 7];
                for b in 0..6 {
                    if mask & (1 << b) != 0 {
                        line_signs[b + 1] = -1;
                    }
                }
                let cand = MultiplicationConvention::from_lines(*lines, line_signs);
                if !cand.norm_composes(&pair_probes) {
                    continue;
                }
                if !cand.vertex_coassociative() {
                    continue;
                }
                for axis in 0..IM_DIM {
                    for &kappa in &KAPPA_CANDIDATES {
                        if cand.identity_holds(&probes, axis, kappa) {
                            survivors.push((ci, line_signs, axis, kappa));
                        }
                    }
                }
            }
        }
        if survivors.is_empty() {
            return Err(CalibrationError::NoConventionFound);
        }
        // +1 sorts before -1; completion, then signs, then axis, then kappa.
        survivors.sort_by(|a, b| {
            let key = |t: &(usize, [i8; 7], usize, f64)| {
                (t.0, t.1.map(|s| (1 - s) / 2), t.2, t.3.to_bits())
            };
            key(a).cmp(&key(b))
        });
        let (ci, line_signs, axis, kappa) = survivors[0];
        let lines = if ci == 0 { COMPLETION_A } else { COMPLETION_B };
        let mut conv = MultiplicationConvention::from_lines(lines, line_signs);
        conv.pairing_axis = axis;
        conv.cross_coefficient = kappa;
        Ok(conv)
    }

    /// The frozen default convention (1000-sample calibration, seed 1),
    /// computed once per process.
    pub fn calibrated() -> Self {
        static CACHE: OnceLock<MultiplicationConvention> = OnceLock::new();
        CACHE
            .get_or_init(|| {
                MultiplicationConvention::calibrate(1000, 1)
                    .expect("built-in octonion calibration failed")
            })
            .clone()
    }

    fn norm_composes(&self, pairs: &[(ImaginaryOctonion, ImaginaryOctonion)]) -> bool {
        for &(a, b) in pairs {
            let p = super::octonion::oct_mul(a, b, self);
            let want = a.norm() * b.norm();
            if (p.norm() - want).abs() > 1e-9 * want.max(1.0) {
                return false;
            }
        }
        true
    }

    /// The explicit vertex frame spans `(i, j, e, je)`; its complement is
    /// `(k, ie, ke)`, which must be closed under the product for the frame
    /// to be co-associative.
    fn vertex_coassociative(&self) -> bool {
        let k = ImaginaryOctonion::basis(2);
        let ie = ImaginaryOctonion::basis(4);
        let ke = ImaginaryOctonion::basis(6);
        super::octonion::calibration_phi(k, ie, ke, self).abs() == 1.0
    }

    fn identity_holds(&self, probes: &[[Quaternion; 7]], axis: usize, kappa: f64) -> bool {
        for u in probes {
            let want = nu_reference(u);
            let got = nu_via_table(u, self, axis, kappa);
            let d = [want.x - got[0], want.y - got[1], want.z - got[2]];
            if d.iter().any(|v| v.abs() > 1e-10) {
                return false;
            }
        }
        true
    }

    /// Serialize as the 21 structure-constant signs plus the identity data.
    #[allow(clippy::needless_range_loop)]
    pub fn to_file_record(&self) -> ConventionFile {
        let mut signs = Vec::with_capacity(21);
        for m in 0..IM_DIM {
            for n in (m + 1)..IM_DIM {
                let (s, l) = self.structure(m, n);
                if s != 0.0 {
                    signs.push(StructureSign {
                        a: BASIS_NAMES[m].to_string(),
                        b: BASIS_NAMES[n].to_string(),
                        product: BASIS_NAMES[l].to_string(),
                        sign: s as i8,
                    });
                }
            }
        }
        ConventionFile {
            schema_version: 1,
            basis: BASIS_NAMES.iter().map(|s| s.to_string()).collect(),
            signs,
            pairing_axis: BASIS_NAMES[self.pairing_axis].to_string(),
            cross_coefficient: self.cross_coefficient,
            identity: "nu_a = 2 <f0 f^a + kappa eps^{abc} f^b f^c, axis>".to_string(),
        }
    }

    /// Rebuild and validate a convention from its file record.
    pub fn from_file_record(rec: &ConventionFile) -> Result<Self, CalibrationError> {
        let name_to_idx = |name: &str| -> Result<usize, CalibrationError> {
            BASIS_NAMES
                .iter()
                .position(|b| *b == name)
                .ok_or_else(|| CalibrationError::InvalidConvention(format!("unknown basis name {name:?}")))
        };
        if rec.signs.len() != 21 {
            return Err(CalibrationError::InvalidConvention(format!(
                "expected 21 structure signs, got {}",
                rec.signs.len()
            )));
        }
        // Reassemble oriented lines from the pair entries.
        let mut line_map: Vec<([usize; 3], i8)> = Vec::new();
        for e in &rec.signs {
            let (m, n, l) = (name_to_idx(&e.a)?, name_to_idx(&e.b)?, name_to_idx(&e.product)?);
            if e.sign.abs() != 1 || m == n || m == l || n == l {
                return Err(CalibrationError::InvalidConvention(format!("bad entry {e:?}")));
            }
            let mut key = [m, n, l];
            key.sort_unstable();
            // orientation: eps_m eps_n = sign eps_l; translate to the sign of
            // the sorted line (p,q,r) meaning eps_p eps_q = s eps_r.
            let [p, q, _r] = key;
            let s = orientation_sign(m, n, p, q) * e.sign;
            if let Some((_, prev)) = line_map.iter().find(|(k, _)| *k == key) {
                if *prev != s {
                    return Err(CalibrationError::InvalidConvention(format!(
                        "inconsistent orientation on line {key:?}"
                    )));
                }
            } else {
                line_map.push((key, s));
            }
        }
        if line_map.len() != 7 {
            return Err(CalibrationError::InvalidConvention(format!(
                "expected 7 lines, got {}",
                line_map.len()
            )));
        }
        line_map.sort_unstable_by_key(|(k, _)| *k);
        let mut lines = [[0usize; 3]; 7];
        let mut line_signs = [0i8; 7];
        for (i, (k, s)) in line_map.into_iter().enumerate() {
            lines[i] = k;
            line_signs[i] = s;
        }
        let mut conv = MultiplicationConvention::from_lines(lines, line_signs);
        conv.pairing_axis = name_to_idx(&rec.pairing_axis)?;
        conv.cross_coefficient = rec.cross_coefficient;
        conv.validate()?;
        Ok(conv)
    }

    /// Check the stored invariants: norm composition, quaternion subalgebra,
    /// and the moment-map identity with the stored axis and coefficient.
    pub fn validate(&self) -> Result<(), CalibrationError> {
        let mut rng = ChaCha12Rng::seed_from_u64(0x5eed);
        let pairs: Vec<_> = (0..128).map(|_| (random_im(&mut rng), random_im(&mut rng))).collect();
        if !self.norm_composes(&pairs) {
            return Err(CalibrationError::InvalidConvention(
                "table does not satisfy norm composition".into(),
            ));
        }
        let ij = super::octonion::oct_mul(
            ImaginaryOctonion::basis(0),
            ImaginaryOctonion::basis(1),
            self,
        );
        if ij.im != ImaginaryOctonion::basis(2) {
            return Err(CalibrationError::InvalidConvention(
                "(i, j, k) does not multiply as the quaternions".into(),
            ));
        }
        let probes: Vec<[Quaternion; 7]> = (0..64).map(|_| random_point(&mut rng)).collect();
        if !self.identity_holds(&probes, self.pairing_axis, self.cross_coefficient) {
            return Err(CalibrationError::InvalidConvention(
                "stored pairing does not reproduce the circle moment map".into(),
            ));
        }
        Ok(())
    }
}

/// Sign relating `eps_m eps_n` to the sorted orientation `eps_p eps_q`
/// on the same line: +1 when `(m, n)` is `(p, q)` up to even permutation of
/// the line, else -1.
fn orientation_sign(m: usize, n: usize, p: usize, q: usize) -> i8 {
    if (m, n) == (p, q) {
        1
    } else if (m, n) == (q, p) {
        -1
    } else {
        // (m, n) involves the third point r: cyclic orientations
        // (p,q,r), (q,r,p), (r,p,q) carry the same sign.
        let r_first = m != p && m != q;
        if r_first {
            // (r, x): (r, p) is even iff line read (r, p, q); eps_r eps_p = s eps_q
            if n == p {
                1
            } else {
                -1
            }
        } else {
            // (x, r): (q, r) even, (p, r) odd
            if m == q {
                1
            } else {
                -1
            }
        }
    }
}

/// Quaternionic circle moment map with weights `(1, 1, 1)`: the reference
/// the octonionic expression is calibrated against.
fn nu_reference(u: &[Quaternion; 7]) -> ImaginaryQuaternion {
    let mut acc = Quaternion::ZERO;
    for a in 0..3 {
        let v = u[1 + 2 * a];
        let w = u[2 + 2 * a];
        acc += v.conj() * w - w.conj() * v;
    }
    acc.imaginary()
}

/// Octonionic evaluation: rows of the coordinate matrix as imaginary
/// octonions, paired against `eps_axis`.
#[allow(clippy::needless_range_loop)]
fn nu_via_table(
    u: &[Quaternion; 7],
    conv: &MultiplicationConvention,
    axis: usize,
    kappa: f64,
) -> [f64; 3] {
    let mut rows = [[0.0; IM_DIM]; 4];
    for (col, q) in u.iter().enumerate() {
        for a in 0..4 {
            rows[a][col] = q.component(a);
        }
    }
    let f: Vec<ImaginaryOctonion> = rows.iter().map(|r| ImaginaryOctonion::new(*r)).collect();
    let pair = |x: ImaginaryOctonion, y: ImaginaryOctonion| -> f64 {
        super::octonion::oct_mul(x, y, conv).im.c[axis]
    };
    let mut out = [0.0; 3];
    // eps^{abc} with eps^{123} = 1; full summation over b, c.
    for a in 1..=3usize {
        let (b, c) = match a {
            1 => (2, 3),
            2 => (3, 1),
            _ => (1, 2),
        };
        let cross = pair(f[b], f[c]) - pair(f[c], f[b]);
        out[a - 1] = 2.0 * (pair(f[0], f[a]) + kappa * cross);
    }
    out
}

fn random_point(rng: &mut ChaCha12Rng) -> [Quaternion; 7] {
    let mut u = [Quaternion::ZERO; 7];
    let mut norm_sqr = 0.0;
    for q in &mut u {
        *q = Quaternion::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        norm_sqr += q.norm_sqr();
    }
    let s = 1.0 / norm_sqr.sqrt();
    for q in &mut u {
        *q = q.scale(s);
    }
    u
}

fn random_im(rng: &mut ChaCha12Rng) -> ImaginaryOctonion {
    let mut c = [0.0; IM_DIM];
    for v in &mut c {
        *v = rng.gen_range(-1.0..1.0);
    }
    ImaginaryOctonion::new(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn calibration_is_seed_independent() {
        let a = MultiplicationConvention::calibrate(1000, 1).unwrap();
        let b = MultiplicationConvention::calibrate(1000, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn calibration_rejects_small_sample_counts() {
        assert!(matches!(
            MultiplicationConvention::calibrate(50, 1),
            Err(CalibrationError::TooFewSamples(50))
        ));
    }

    #[test]
    fn discovered_identity_shape() {
        let conv = MultiplicationConvention::calibrated();
        // The cross term must carry coefficient -1/2 and pair against i:
        // the literal +1 reading admits no table at all.
        assert_eq!(conv.pairing_axis(), 0);
        assert_eq!(conv.cross_coefficient(), -0.5);
    }

    #[test]
    fn roundtrip_through_file_record() {
        let conv = MultiplicationConvention::calibrated();
        let rec = conv.to_file_record();
        assert_eq!(rec.signs.len(), 21);
        let back = MultiplicationConvention::from_file_record(&rec).unwrap();
        assert_eq!(back, conv);
    }

    #[test]
    fn corrupted_record_is_rejected() {
        let conv = MultiplicationConvention::calibrated();
        let mut rec = conv.to_file_record();
        rec.signs[3].sign = -rec.signs[3].sign;
        assert!(MultiplicationConvention::from_file_record(&rec).is_err());
    }

    #[test]
    fn validate_passes_on_frozen_table() {
        MultiplicationConvention::calibrated().validate().unwrap();
    }
}
