use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::momentmaps::QuaternionVector;
use crate::weights::{WeightMatrix, WeightQuad, WeightTriple};

/// Which of the three quotient families a constraint system belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    /// Circle action with a weight triple on the 7-quaternion sphere;
    /// coordinate pairs `(u2, u3), (u4, u5), (u6, u7)`, `u1` inert.
    Triple,
    /// Circle action with a weight quadruple on the 8-quaternion sphere;
    /// coordinate pairs `(u1, u2), ..., (u7, u8)`, no inert coordinate.
    Quad,
    /// 2-torus action with a 2x3 weight matrix on the 7-quaternion sphere.
    Theta,
}

/// The weight datum attached to a family.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum FamilyWeights {
    Triple(WeightTriple),
    Quad(WeightQuad),
    Theta(WeightMatrix),
}

/// Numerical tolerances used by the solver and the rank certificates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Residual norm at which a projection counts as converged.
    pub convergence_tol: f64,
    pub max_iterations: usize,
    /// Singular values below this times the largest count as zero.
    pub rank_rel_threshold: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        ToleranceProfile { convergence_tol: 1e-12, max_iterations: 200, rank_rel_threshold: 1e-6 }
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("ambient dimension mismatch: point has {point} quaternions, spec wants {spec}")]
    DimensionMismatch { point: usize, spec: usize },
    #[error("operation requires a strictly ordered positive triple, got {0:?}")]
    NotAnOrderedTriple(WeightTriple),
}

/// A constraint system: which moment maps, with which weights, plus the
/// tolerance profile used when certifying points against it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetSpec {
    pub weights: FamilyWeights,
    pub tolerances: ToleranceProfile,
}

impl LevelSetSpec {
    pub fn triple(p: WeightTriple) -> Self {
        LevelSetSpec { weights: FamilyWeights::Triple(p), tolerances: ToleranceProfile::default() }
    }

    pub fn quad(p: WeightQuad) -> Self {
        LevelSetSpec { weights: FamilyWeights::Quad(p), tolerances: ToleranceProfile::default() }
    }

    pub fn theta(m: WeightMatrix) -> Self {
        LevelSetSpec { weights: FamilyWeights::Theta(m), tolerances: ToleranceProfile::default() }
    }

    pub fn with_tolerances(mut self, tol: ToleranceProfile) -> Self {
        self.tolerances = tol;
        self
    }

    pub fn family(&self) -> Family {
        match self.weights {
            FamilyWeights::Triple(_) => Family::Triple,
            FamilyWeights::Quad(_) => Family::Quad,
            FamilyWeights::Theta(_) => Family::Theta,
        }
    }

    /// Number of quaternionic coordinates (7 or 8).
    pub fn quaternion_dim(&self) -> usize {
        match self.family() {
            Family::Triple | Family::Theta => 7,
            Family::Quad => 8,
        }
    }

    /// Number of real coordinates (28 or 32).
    pub fn real_dim(&self) -> usize {
        4 * self.quaternion_dim()
    }

    /// Total constraint count including the sphere row: 13 or 16.
    pub fn constraint_count(&self) -> usize {
        match self.family() {
            Family::Triple | Family::Quad => 13,
            Family::Theta => 16,
        }
    }

    /// Dimension of the acting group: 4 for Sp(1) x U(1), 5 for Sp(1) x T^2.
    pub fn group_dim(&self) -> usize {
        match self.family() {
            Family::Triple | Family::Quad => 4,
            Family::Theta => 5,
        }
    }

    /// Expected level-set dimension:
    /// `(ambient real dim - 1) - (constraint count - 1)`.
    pub fn expected_level_set_dim(&self) -> usize {
        (self.real_dim() - 1) - (self.constraint_count() - 1)
    }

    /// Expected quotient dimension: level-set dimension minus group dimension.
    pub fn expected_quotient_dim(&self) -> usize {
        self.expected_level_set_dim() - self.group_dim()
    }

    /// The rotated coordinate pairs, 0-based.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        match self.family() {
            Family::Triple | Family::Theta => vec![(1, 2), (3, 4), (5, 6)],
            Family::Quad => vec![(0, 1), (2, 3), (4, 5), (6, 7)],
        }
    }

    /// The coordinate untouched by the abelian action, if any (0-based).
    pub fn inert_coordinate(&self) -> Option<usize> {
        match self.family() {
            Family::Triple | Family::Theta => Some(0),
            Family::Quad => None,
        }
    }

    /// Weight rows of the abelian action: one row for circle families, two
    /// for the torus family; entry `k` multiplies pair `k`.
    pub fn weight_rows(&self) -> Vec<Vec<i64>> {
        match self.weights {
            FamilyWeights::Triple(p) => vec![p.as_array().to_vec()],
            FamilyWeights::Quad(p) => vec![p.as_array().to_vec()],
            FamilyWeights::Theta(m) => vec![m.p.to_vec(), m.q.to_vec()],
        }
    }

    pub fn check_dimension(&self, u: &QuaternionVector) -> Result<(), SpecError> {
        if u.len() != self.quaternion_dim() {
            Err(SpecError::DimensionMismatch { point: u.len(), spec: self.quaternion_dim() })
        } else {
            Ok(())
        }
    }
}

/// A numerically certified point of a level set, with its diagnostics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SamplePoint {
    /// Index of the seed stream the starting point was drawn from.
    pub seed: u64,
    pub u: QuaternionVector,
    /// Euclidean norm of the stacked constraint residual.
    pub residual: f64,
    pub iterations: usize,
    pub jacobian_rank: usize,
    pub killing_rank: usize,
    /// Smallest retained singular value of the constraint Jacobian,
    /// relative to its largest.
    pub min_sv_constraints: f64,
    /// Smallest retained singular value of the Killing matrix, relative to
    /// its largest.
    pub min_sv_killing: f64,
}

/// A 4-element subset of the seven quaternionic coordinates (0-based): the
/// support of a candidate vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SupportPattern(pub [usize; 4]);

impl SupportPattern {
    pub fn all_patterns() -> Vec<SupportPattern> {
        let mut out = Vec::with_capacity(35);
        for a in 0..7 {
            for b in (a + 1)..7 {
                for c in (b + 1)..7 {
                    for d in (c + 1)..7 {
                        out.push(SupportPattern([a, b, c, d]));
                    }
                }
            }
        }
        out
    }

    /// The eight patterns predicted feasible: coordinate 1 plus one member
    /// of each rotated pair (0-based: {0} + {1|2} + {3|4} + {5|6}).
    pub fn predicted_vertices() -> Vec<SupportPattern> {
        let mut out = Vec::with_capacity(8);
        for b in [1, 2] {
            for c in [3, 4] {
                for d in [5, 6] {
                    out.push(SupportPattern([0, b, c, d]));
                }
            }
        }
        out
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.0.contains(&idx)
    }

    /// 1-based display, e.g. `{1,2,4,6}`.
    pub fn display_one_based(&self) -> String {
        let v: Vec<String> = self.0.iter().map(|i| (i + 1).to_string()).collect();
        format!("{{{}}}", v.join(","))
    }

    /// Swap membership within one rotated pair, e.g. 2 <-> 3 (1-based).
    pub fn swap_pair_member(&self, pair: (usize, usize)) -> SupportPattern {
        let mut out = self.0;
        for v in &mut out {
            if *v == pair.0 {
                *v = pair.1;
            } else if *v == pair.1 {
                *v = pair.0;
            }
        }
        out.sort_unstable();
        SupportPattern(out)
    }
}

/// Stratum membership of a sample, decided by thresholding.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StratumClass {
    /// `u1 = 0` within threshold (the S0 stratum; otherwise S1).
    pub u1_vanishes: bool,
    /// Some rotated quaternionic pair vanishes within threshold
    /// (the S2 stratum; otherwise S3).
    pub some_pair_vanishes: bool,
}

/// Classify a point against the triple-family strata with the given
/// threshold on coordinate and pair norms.
pub fn classify_stratum(u: &QuaternionVector, spec: &LevelSetSpec, threshold: f64) -> StratumClass {
    let u1_vanishes = spec
        .inert_coordinate()
        .map(|c| u.entry(c).norm() <= threshold)
        .unwrap_or(false);
    let some_pair_vanishes = spec.pairs().iter().any(|&(a, b)| {
        (u.entry(a).norm_sqr() + u.entry(b).norm_sqr()).sqrt() <= threshold
    });
    StratumClass { u1_vanishes, some_pair_vanishes }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dimension_invariants() {
        let t = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        assert_eq!(t.constraint_count(), 13);
        assert_eq!(t.group_dim(), 4);
        assert_eq!(t.expected_level_set_dim(), 15);
        assert_eq!(t.expected_quotient_dim(), 11);

        let q = LevelSetSpec::quad(WeightQuad(0, 1, 2, 3));
        assert_eq!(q.constraint_count(), 13);
        assert_eq!(q.expected_level_set_dim(), 19);
        assert_eq!(q.expected_quotient_dim(), 15);

        let th = LevelSetSpec::theta(WeightMatrix::new([1, 0, 1], [0, 1, 1]));
        assert_eq!(th.constraint_count(), 16);
        assert_eq!(th.group_dim(), 5);
        assert_eq!(th.expected_level_set_dim(), 12);
        assert_eq!(th.expected_quotient_dim(), 7);
    }

    #[test]
    fn pattern_enumeration() {
        assert_eq!(SupportPattern::all_patterns().len(), 35);
        let pred = SupportPattern::predicted_vertices();
        assert_eq!(pred.len(), 8);
        assert!(pred.contains(&SupportPattern([0, 1, 3, 5])));
        for p in &pred {
            assert!(p.contains(0));
        }
    }
}
