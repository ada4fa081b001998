//! Exact integer predicates and enumerations for the weight data.
//!
//! Everything here is integer arithmetic: admissibility and freeness
//! predicates, the minor and box determinants of a 2x3 weight matrix, the
//! identity relating them, isotropy orders via gcd and Smith normal form,
//! and the deterministic enumerations. Determinants are evaluated through
//! `i128` intermediates so 64-bit inputs cannot overflow silently.

use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

/// An integer weight triple `(p1, p2, p3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeightTriple(pub i64, pub i64, pub i64);

/// An integer weight quadruple `(p1, p2, p3, p4)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WeightQuad(pub i64, pub i64, pub i64, pub i64);

/// A 2x3 integer weight matrix with rows `p` and `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WeightMatrix {
    pub p: [i64; 3],
    pub q: [i64; 3],
}

/// The three 2x2 minor determinants of a weight matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinorTriple {
    pub d12: i64,
    pub d13: i64,
    pub d23: i64,
}

/// The four box determinants, in the fixed sign order `(--, +-, -+, ++)`.
///
/// The label gives the signs in `det [[p1 -+ p2, q1 -+ q2], [p1 -+ p3, q1 -+ q3]]`:
/// first symbol for the `(p2, q2)` row, second for the `(p3, q3)` row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxQuad {
    pub mm: i64,
    pub pm: i64,
    pub mp: i64,
    pub pp: i64,
}

pub const BOX_LABELS: [&str; 4] = ["--", "+-", "-+", "++"];

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("weight matrix is not locally free: {0}")]
    NotLocallyFree(ThetaVerdict),
}

impl WeightTriple {
    pub fn as_array(self) -> [i64; 3] {
        [self.0, self.1, self.2]
    }
}

impl WeightQuad {
    pub fn as_array(self) -> [i64; 4] {
        [self.0, self.1, self.2, self.3]
    }
}

impl WeightMatrix {
    pub fn new(p: [i64; 3], q: [i64; 3]) -> Self {
        WeightMatrix { p, q }
    }

    pub fn row(&self, r: usize) -> WeightTriple {
        let row = if r == 0 { self.p } else { self.q };
        WeightTriple(row[0], row[1], row[2])
    }
}

impl fmt::Display for WeightTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.0, self.1, self.2)
    }
}

impl fmt::Display for WeightQuad {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{},{}", self.0, self.1, self.2, self.3)
    }
}

impl fmt::Display for WeightMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{};{},{},{}",
            self.p[0], self.p[1], self.p[2], self.q[0], self.q[1], self.q[2]
        )
    }
}

#[derive(Debug, Error)]
#[error("cannot parse weight datum {input:?}: {reason}")]
pub struct WeightParseError {
    pub input: String,
    pub reason: String,
}

fn parse_ints(s: &str, n: usize) -> Result<Vec<i64>, WeightParseError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != n {
        return Err(WeightParseError {
            input: s.to_string(),
            reason: format!("expected {n} comma-separated integers, got {}", parts.len()),
        });
    }
    parts
        .iter()
        .map(|p| {
            p.parse::<i64>().map_err(|e| WeightParseError {
                input: s.to_string(),
                reason: format!("bad integer {p:?}: {e}"),
            })
        })
        .collect()
}

impl FromStr for WeightTriple {
    type Err = WeightParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_ints(s, 3)?;
        Ok(WeightTriple(v[0], v[1], v[2]))
    }
}

impl FromStr for WeightQuad {
    type Err = WeightParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let v = parse_ints(s, 4)?;
        Ok(WeightQuad(v[0], v[1], v[2], v[3]))
    }
}

impl FromStr for WeightMatrix {
    type Err = WeightParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rows: Vec<&str> = s.split(';').collect();
        if rows.len() != 2 {
            return Err(WeightParseError {
                input: s.to_string(),
                reason: format!("expected two semicolon-separated rows, got {}", rows.len()),
            });
        }
        let p = parse_ints(rows[0], 3)?;
        let q = parse_ints(rows[1], 3)?;
        Ok(WeightMatrix::new([p[0], p[1], p[2]], [q[0], q[1], q[2]]))
    }
}

/// `gcd(0, n) = |n|`; `gcd` over an all-zero list is 0 (interpreted as an
/// infinite isotropy order by the callers).
pub fn gcd_i64(a: i64, b: i64) -> i64 {
    a.gcd(&b)
}

fn det2(a: i64, b: i64, c: i64, d: i64) -> i64 {
    let v = a as i128 * d as i128 - b as i128 * c as i128;
    i64::try_from(v).expect("2x2 determinant overflows i64")
}

// ---------------------------------------------------------------------------
// admissibility / freeness predicates
// ---------------------------------------------------------------------------

/// Why a triple is or is not admissible.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmissibilityVerdict {
    Admissible,
    /// The ordering condition `0 < p1 < p2 < p3` fails.
    NotStrictlyOrdered,
    PairNotCoprime { i: usize, j: usize, gcd: i64 },
    /// `gcd(p1 + s2 p2, p1 + s3 p3) = gcd > 1` for the recorded signs.
    SignedGcdFails { sign2: i64, sign3: i64, gcd: i64 },
}

impl AdmissibilityVerdict {
    pub fn is_admissible(&self) -> bool {
        matches!(self, AdmissibilityVerdict::Admissible)
    }
}

impl fmt::Display for AdmissibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AdmissibilityVerdict::Admissible => write!(f, "admissible"),
            AdmissibilityVerdict::NotStrictlyOrdered => {
                write!(f, "ordering 0 < p1 < p2 < p3 fails")
            }
            AdmissibilityVerdict::PairNotCoprime { i, j, gcd } => {
                write!(f, "gcd(p{i}, p{j}) = {gcd}")
            }
            AdmissibilityVerdict::SignedGcdFails { sign2, sign3, gcd } => {
                let s2 = if *sign2 < 0 { '-' } else { '+' };
                let s3 = if *sign3 < 0 { '-' } else { '+' };
                write!(f, "gcd(p1 {s2} p2, p1 {s3} p3) = {gcd}")
            }
        }
    }
}

/// Full admissibility classification of a weight triple.
pub fn admissibility_verdict(p: WeightTriple) -> AdmissibilityVerdict {
    let [p1, p2, p3] = p.as_array();
    if !(0 < p1 && p1 < p2 && p2 < p3) {
        return AdmissibilityVerdict::NotStrictlyOrdered;
    }
    for (i, j, a, b) in [(1, 2, p1, p2), (1, 3, p1, p3), (2, 3, p2, p3)] {
        let g = gcd_i64(a, b);
        if g != 1 {
            return AdmissibilityVerdict::PairNotCoprime { i, j, gcd: g };
        }
    }
    for s2 in [-1i64, 1] {
        for s3 in [-1i64, 1] {
            let g = gcd_i64(p1 + s2 * p2, p1 + s3 * p3);
            if g != 1 {
                return AdmissibilityVerdict::SignedGcdFails { sign2: s2, sign3: s3, gcd: g };
            }
        }
    }
    AdmissibilityVerdict::Admissible
}

/// True iff `0 < p1 < p2 < p3`, the entries are pairwise coprime, and all
/// four of `gcd(p1 +- p2, p1 +- p3)` equal 1.
pub fn is_admissible_triple(p: WeightTriple) -> bool {
    admissibility_verdict(p).is_admissible()
}

/// Why a quadruple is or is not free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadVerdict {
    Free,
    /// The ordering condition `0 <= p1 < p2 < p3 < p4` fails.
    NotStrictlyOrdered,
    TripleGcdFails { triple: [i64; 3], gcd: i64 },
    TripleSignedGcdFails { triple: [i64; 3], sign2: i64, sign3: i64, gcd: i64 },
}

impl QuadVerdict {
    pub fn is_free(&self) -> bool {
        matches!(self, QuadVerdict::Free)
    }
}

impl fmt::Display for QuadVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuadVerdict::Free => write!(f, "free"),
            QuadVerdict::NotStrictlyOrdered => write!(f, "ordering 0 <= p1 < p2 < p3 < p4 fails"),
            QuadVerdict::TripleGcdFails { triple: [a, b, c], gcd } => {
                write!(f, "triple ({a},{b},{c}) has gcd {gcd}")
            }
            QuadVerdict::TripleSignedGcdFails { triple: [a, b, c], sign2, sign3, gcd } => {
                let s2 = if *sign2 < 0 { '-' } else { '+' };
                let s3 = if *sign3 < 0 { '-' } else { '+' };
                write!(f, "triple ({a},{b},{c}) has gcd({a} {s2} {b}, {a} {s3} {c}) = {gcd}")
            }
        }
    }
}

/// Full freeness classification of a weight quadruple.
pub fn quad_verdict(p: WeightQuad) -> QuadVerdict {
    let [p1, p2, p3, p4] = p.as_array();
    if !(0 <= p1 && p1 < p2 && p2 < p3 && p3 < p4) {
        return QuadVerdict::NotStrictlyOrdered;
    }
    let arr = [p1, p2, p3, p4];
    for skip in (0..4).rev() {
        // triples in lexicographic order: (p1,p2,p3), (p1,p2,p4), (p1,p3,p4), (p2,p3,p4)
        let t: Vec<i64> = (0..4).filter(|&i| i != skip).map(|i| arr[i]).collect();
        let (a, b, c) = (t[0], t[1], t[2]);
        let g3 = gcd_i64(gcd_i64(a, b), c);
        if g3 != 1 {
            return QuadVerdict::TripleGcdFails { triple: [a, b, c], gcd: g3 };
        }
        for s2 in [-1i64, 1] {
            for s3 in [-1i64, 1] {
                let g = gcd_i64(a + s2 * b, a + s3 * c);
                if g != 1 {
                    return QuadVerdict::TripleSignedGcdFails {
                        triple: [a, b, c],
                        sign2: s2,
                        sign3: s3,
                        gcd: g,
                    };
                }
            }
        }
    }
    QuadVerdict::Free
}

/// True iff `0 <= p1 < p2 < p3 < p4` and every triple in `p` has triple gcd 1
/// and all four signed gcds equal to 1.
pub fn is_free_quadruple(p: WeightQuad) -> bool {
    quad_verdict(p).is_free()
}

// ---------------------------------------------------------------------------
// minors, boxes, the identity, local freeness
// ---------------------------------------------------------------------------

/// The minors `d_ij = p_i q_j - p_j q_i`.
pub fn minor_determinants(theta: WeightMatrix) -> MinorTriple {
    let (p, q) = (theta.p, theta.q);
    MinorTriple {
        d12: det2(p[0], p[1], q[0], q[1]),
        d13: det2(p[0], p[2], q[0], q[2]),
        d23: det2(p[1], p[2], q[1], q[2]),
    }
}

impl MinorTriple {
    pub fn as_array(self) -> [i64; 3] {
        [self.d12, self.d13, self.d23]
    }

    pub fn sum(self) -> i64 {
        self.d12 + self.d13 + self.d23
    }

    pub fn all_unit(self) -> bool {
        self.as_array().iter().all(|d| d.abs() == 1)
    }
}

/// The four determinants `det [[p1 -+ p2, q1 -+ q2], [p1 -+ p3, q1 -+ q3]]`
/// with independent row signs, in the fixed order `(--, +-, -+, ++)`.
pub fn box_determinants(theta: WeightMatrix) -> BoxQuad {
    let (p, q) = (theta.p, theta.q);
    let bx = |s2: i64, s3: i64| {
        det2(p[0] + s2 * p[1], q[0] + s2 * q[1], p[0] + s3 * p[2], q[0] + s3 * q[2])
    };
    BoxQuad { mm: bx(-1, -1), pm: bx(-1, 1), mp: bx(1, -1), pp: bx(1, 1) }
}

impl BoxQuad {
    pub fn as_array(self) -> [i64; 4] {
        [self.mm, self.pm, self.mp, self.pp]
    }
}

/// The boxes predicted from the minors alone:
/// `-- = d12 + d23 - d13`, `+- = d12 - d23 + d13`,
/// `-+ = -d12 - d23 - d13`, `++ = -d12 + d23 + d13`.
pub fn boxes_from_minors(m: MinorTriple) -> BoxQuad {
    BoxQuad {
        mm: m.d12 + m.d23 - m.d13,
        pm: m.d12 - m.d23 + m.d13,
        mp: -m.d12 - m.d23 - m.d13,
        pp: -m.d12 + m.d23 + m.d13,
    }
}

/// True iff the directly computed boxes agree with the minor combination
/// above, evaluated exactly.
pub fn verify_box_identity(theta: WeightMatrix) -> bool {
    box_determinants(theta) == boxes_from_minors(minor_determinants(theta))
}

/// Why a torus action is or is not locally free.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ThetaVerdict {
    LocallyFree,
    ZeroMinor { which: String },
    ZeroMinorSum,
    MinorEqualsSumOfOthers { which: String },
}

impl ThetaVerdict {
    pub fn is_locally_free(&self) -> bool {
        matches!(self, ThetaVerdict::LocallyFree)
    }
}

impl fmt::Display for ThetaVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ThetaVerdict::LocallyFree => write!(f, "locally free"),
            ThetaVerdict::ZeroMinor { which } => write!(f, "minor {which} vanishes"),
            ThetaVerdict::ZeroMinorSum => write!(f, "the minor sum d12 + d13 + d23 vanishes"),
            ThetaVerdict::MinorEqualsSumOfOthers { which } => {
                write!(f, "minor {which} equals the sum of the other two")
            }
        }
    }
}

/// Local-freeness test: (1) all minors nonzero, (2) their sum nonzero,
/// (3) no minor equal to the sum of the other two. The verdict names the
/// first failing condition. Equivalently: all minors and all boxes nonzero.
pub fn theta_locally_free(theta: WeightMatrix) -> ThetaVerdict {
    let m = minor_determinants(theta);
    for (name, v) in [("d12", m.d12), ("d13", m.d13), ("d23", m.d23)] {
        if v == 0 {
            return ThetaVerdict::ZeroMinor { which: name.to_string() };
        }
    }
    if m.sum() == 0 {
        return ThetaVerdict::ZeroMinorSum;
    }
    for (name, v, others) in [
        ("d12", m.d12, m.d13 + m.d23),
        ("d13", m.d13, m.d12 + m.d23),
        ("d23", m.d23, m.d12 + m.d13),
    ] {
        if v == others {
            return ThetaVerdict::MinorEqualsSumOfOthers { which: name.to_string() };
        }
    }
    ThetaVerdict::LocallyFree
}

// ---------------------------------------------------------------------------
// the smoothness obstruction
// ---------------------------------------------------------------------------

/// One row of the obstruction enumeration: a sign assignment for the minors
/// `(d12, d23, d13)` and the box determinants it forces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionRow {
    /// Signs of `(d12, d23, d13)`.
    pub assignment: [i64; 3],
    /// Boxes in the fixed order `(--, +-, -+, ++)`.
    pub boxes: [i64; 4],
    /// How many of the four boxes lie in `{-3, +3}`.
    pub boxes_pm3: usize,
    pub all_boxes_unit: bool,
}

/// The full enumeration over the eight sign assignments.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub rows: Vec<ObstructionRow>,
    /// Every assignment produces at least one box in `{-3, +3}`.
    pub every_assignment_has_pm3: bool,
    /// No assignment makes all four boxes lie in `{-1, +1}`.
    pub no_assignment_all_unit: bool,
    /// Exact multiplicity observed per assignment (min and max agree).
    pub min_pm3_count: usize,
    pub max_pm3_count: usize,
    /// The count is commonly quoted as "at least two"; the enumeration is
    /// the arbiter and finds exactly one per assignment.
    pub multiplicity_note: String,
}

/// Enumerate all 8 sign assignments of `(d12, d23, d13)` over `{-1, +1}`,
/// compute the four boxes from the identity, and record how many land in
/// `{-3, +3}`. No assignment can make all boxes unit, which is the
/// obstruction to freeness on the `u1 = 0` stratum.
pub fn theta_smoothness_obstruction() -> ObstructionReport {
    let mut rows = Vec::with_capacity(8);
    for &s12 in &[1i64, -1] {
        for &s23 in &[1i64, -1] {
            for &s13 in &[1i64, -1] {
                let m = MinorTriple { d12: s12, d13: s13, d23: s23 };
                let boxes = boxes_from_minors(m).as_array();
                let pm3 = boxes.iter().filter(|b| b.abs() == 3).count();
                let all_unit = boxes.iter().all(|b| b.abs() == 1);
                rows.push(ObstructionRow {
                    assignment: [s12, s23, s13],
                    boxes,
                    boxes_pm3: pm3,
                    all_boxes_unit: all_unit,
                });
            }
        }
    }
    let every = rows.iter().all(|r| r.boxes_pm3 >= 1);
    let none_unit = rows.iter().all(|r| !r.all_boxes_unit);
    let min_c = rows.iter().map(|r| r.boxes_pm3).min().unwrap_or(0);
    let max_c = rows.iter().map(|r| r.boxes_pm3).max().unwrap_or(0);
    ObstructionReport {
        rows,
        every_assignment_has_pm3: every,
        no_assignment_all_unit: none_unit,
        min_pm3_count: min_c,
        max_pm3_count: max_c,
        multiplicity_note: format!(
            "each unit-minor sign assignment forces exactly {min_c} box determinant(s) of \
             magnitude 3 (sometimes quoted as at least two); the remaining boxes are units"
        ),
    }
}

// ---------------------------------------------------------------------------
// isotropy orders
// ---------------------------------------------------------------------------

/// Number of solutions of a root-of-unity system; `Infinite` when the
/// solution set is positive-dimensional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum IsotropyOrder {
    Finite(u64),
    Infinite,
}

impl fmt::Display for IsotropyOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IsotropyOrder::Finite(n) => write!(f, "{n}"),
            IsotropyOrder::Infinite => write!(f, "infinite"),
        }
    }
}

/// Number of `tau` on the unit circle with `tau^a = 1` for every exponent:
/// the gcd of the list, infinite when all exponents vanish.
pub fn circle_isotropy_order(exponents: &[i64]) -> IsotropyOrder {
    let g = exponents.iter().fold(0i64, |acc, &e| gcd_i64(acc, e));
    if g == 0 {
        IsotropyOrder::Infinite
    } else {
        IsotropyOrder::Finite(g as u64)
    }
}

/// Smith normal form of a 2x2 integer matrix: `(d1, d2)` with `d1 | d2`,
/// `d1 = gcd(entries)`, `d1 * d2 = |det|`.
pub fn snf_2x2(e: [[i64; 2]; 2]) -> (i64, i64) {
    let d1 = gcd_i64(gcd_i64(e[0][0], e[0][1]), gcd_i64(e[1][0], e[1][1]));
    let det = det2(e[0][0], e[0][1], e[1][0], e[1][1]).abs();
    if d1 == 0 {
        (0, 0)
    } else if det == 0 {
        (d1, 0)
    } else {
        (d1, det / d1)
    }
}

/// Number of `(tau, rho)` on the 2-torus solving
/// `tau^{e11} rho^{e12} = 1`, `tau^{e21} rho^{e22} = 1`.
///
/// Equals `|det e|` when the determinant is nonzero (the Smith-normal-form
/// lattice index), infinite otherwise. For `|det| <= 12` the count is also
/// established by brute-force enumeration over roots of unity; the two
/// routes must agree.
pub fn torus_isotropy_order(e: [[i64; 2]; 2]) -> IsotropyOrder {
    let det = det2(e[0][0], e[0][1], e[1][0], e[1][1]).abs();
    if det == 0 {
        return IsotropyOrder::Infinite;
    }
    let (d1, d2) = snf_2x2(e);
    let order = (d1 * d2) as u64;
    debug_assert_eq!(order, det as u64);
    if det <= 12 {
        // All solutions lie in a group of order det, so tau and rho are
        // det-th roots of unity; enumerate exactly.
        let d = det;
        let mut count = 0u64;
        for a in 0..d {
            for b in 0..d {
                let r1 = (e[0][0] * a + e[0][1] * b).rem_euclid(d);
                let r2 = (e[1][0] * a + e[1][1] * b).rem_euclid(d);
                if r1 == 0 && r2 == 0 {
                    count += 1;
                }
            }
        }
        assert_eq!(count, order, "Smith-form count disagrees with enumeration for {e:?}");
    }
    IsotropyOrder::Finite(order)
}

/// Orders of the four fixed-point systems on the `u1 = 0` stratum: the
/// absolute values of the box determinants, cross-checked against
/// [`torus_isotropy_order`] applied to each sign system.
pub fn singular_group_orders(theta: WeightMatrix) -> Result<[u64; 4], WeightError> {
    let verdict = theta_locally_free(theta);
    if !verdict.is_locally_free() {
        return Err(WeightError::NotLocallyFree(verdict));
    }
    let boxes = box_determinants(theta).as_array();
    let (p, q) = (theta.p, theta.q);
    let mut orders = [0u64; 4];
    for (slot, (s2, s3)) in [(-1i64, -1i64), (-1, 1), (1, -1), (1, 1)].iter().enumerate() {
        let e = [
            [p[0] + s2 * p[1], q[0] + s2 * q[1]],
            [p[0] + s3 * p[2], q[0] + s3 * q[2]],
        ];
        match torus_isotropy_order(e) {
            IsotropyOrder::Finite(n) => {
                assert_eq!(
                    n,
                    boxes[slot].unsigned_abs(),
                    "box magnitude disagrees with isotropy count"
                );
                orders[slot] = n;
            }
            IsotropyOrder::Infinite => unreachable!("nonzero box determinant"),
        }
    }
    Ok(orders)
}

// ---------------------------------------------------------------------------
// enumerations
// ---------------------------------------------------------------------------

/// All admissible triples with `p3 <= bound`, lexicographically sorted.
pub fn enumerate_admissible_triples(bound: i64) -> Vec<WeightTriple> {
    let mut out = Vec::new();
    for p1 in 1..=bound {
        for p2 in (p1 + 1)..=bound {
            for p3 in (p2 + 1)..=bound {
                let t = WeightTriple(p1, p2, p3);
                if is_admissible_triple(t) {
                    out.push(t);
                }
            }
        }
    }
    out
}

/// All free quadruples with `p4 <= bound`, lexicographically sorted.
pub fn enumerate_free_quads(bound: i64) -> Vec<WeightQuad> {
    let mut out = Vec::new();
    for p1 in 0..=bound {
        for p2 in (p1 + 1)..=bound {
            for p3 in (p2 + 1)..=bound {
                for p4 in (p3 + 1)..=bound {
                    let t = WeightQuad(p1, p2, p3, p4);
                    if is_free_quadruple(t) {
                        out.push(t);
                    }
                }
            }
        }
    }
    out
}

/// Outcome of the parity scan.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityReport {
    /// No quadruple `0 < p1 < p2 < p3 < p4 <= bound` has all four of its
    /// triples admissible.
    pub holds: bool,
    pub counterexample: Option<[i64; 4]>,
    pub quadruples_checked: u64,
    /// Every admissible triple up to the bound has exactly one even entry.
    pub parity_witness_holds: bool,
}

/// Exhaustively check that no strictly positive quadruple up to `bound` has
/// all four triples admissible, and record the parity witness (each
/// admissible triple contains exactly one even entry).
pub fn verify_parity_obstruction(bound: i64) -> ParityReport {
    let mut checked = 0u64;
    let mut counterexample = None;
    'outer: for p1 in 1..=bound {
        for p2 in (p1 + 1)..=bound {
            for p3 in (p2 + 1)..=bound {
                for p4 in (p3 + 1)..=bound {
                    checked += 1;
                    let all = [
                        WeightTriple(p1, p2, p3),
                        WeightTriple(p1, p2, p4),
                        WeightTriple(p1, p3, p4),
                        WeightTriple(p2, p3, p4),
                    ];
                    if all.iter().all(|t| is_admissible_triple(*t)) {
                        counterexample = Some([p1, p2, p3, p4]);
                        break 'outer;
                    }
                }
            }
        }
    }
    let parity = enumerate_admissible_triples(bound)
        .iter()
        .all(|t| t.as_array().iter().filter(|v| *v % 2 == 0).count() == 1);
    ParityReport {
        holds: counterexample.is_none(),
        counterexample,
        quadruples_checked: checked,
        parity_witness_holds: parity,
    }
}

/// Sign-normalize a triple: absolute values, sorted increasing.
pub fn normalize_triple(p: [i64; 3]) -> [i64; 3] {
    let mut a = [p[0].abs(), p[1].abs(), p[2].abs()];
    a.sort_unstable();
    a
}
