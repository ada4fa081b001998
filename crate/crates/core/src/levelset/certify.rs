//! Rank, vertex, dimension, and co-associativity certificates.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{calibration_phi, ImaginaryOctonion, MultiplicationConvention};
use crate::momentmaps::{
    constraint_residual, vertex_point_for_support, FrameMatrix, QuaternionVector,
};
use crate::weights::WeightTriple;

use super::solver::{project_with_support, rank_and_margin, stream_rng};
use super::spec::{
    Family, FamilyWeights, LevelSetSpec, SamplePoint, SpecError, SupportPattern,
};

/// A sample whose rank disagrees with the expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankFinding {
    pub seed: u64,
    pub expected_rank: usize,
    pub observed_rank: usize,
    pub min_sv_rel: f64,
    pub u: QuaternionVector,
}

/// Aggregated rank certificate over a sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankCertificate {
    /// `"constraint-jacobian"` or `"killing"`.
    pub kind: String,
    pub expected_rank: usize,
    /// For the Jacobian certificate: the expected level-set dimension.
    pub expected_nullity: Option<usize>,
    pub samples: usize,
    pub pass: bool,
    /// Smallest retained singular value across samples, relative to the
    /// largest singular value of the same matrix.
    pub min_margin: f64,
    pub median_margin: f64,
    pub observed_nullity: Option<usize>,
    pub findings: Vec<RankFinding>,
}

fn aggregate(
    kind: &str,
    expected_rank: usize,
    expected_nullity: Option<usize>,
    per_point: Vec<(u64, usize, f64, QuaternionVector)>,
    ncols: usize,
) -> RankCertificate {
    let samples = per_point.len();
    let mut margins: Vec<f64> = per_point.iter().map(|p| p.2).collect();
    margins.sort_by(|a, b| a.partial_cmp(b).expect("margins are finite"));
    let min_margin = margins.first().copied().unwrap_or(0.0);
    let median_margin = if margins.is_empty() { 0.0 } else { margins[margins.len() / 2] };
    let findings: Vec<RankFinding> = per_point
        .iter()
        .filter(|(_, rank, _, _)| *rank != expected_rank)
        .map(|(seed, rank, margin, u)| RankFinding {
            seed: *seed,
            expected_rank,
            observed_rank: *rank,
            min_sv_rel: *margin,
            u: u.clone(),
        })
        .collect();
    let uniform_rank = per_point.first().map(|p| p.1).filter(|r| per_point.iter().all(|p| p.1 == *r));
    let observed_nullity = expected_nullity.and(uniform_rank.map(|r| ncols - r));
    RankCertificate {
        kind: kind.to_string(),
        expected_rank,
        expected_nullity,
        samples,
        pass: findings.is_empty() && samples > 0,
        min_margin,
        median_margin,
        observed_nullity,
        findings,
    }
}

/// Regular-value certificate: at every sample the constraint Jacobian must
/// have full row rank (13 or 16) with the nullity equal to the expected
/// level-set dimension. Rank deficiencies are findings, not errors.
pub fn smoothness_certificate(samples: &[SamplePoint], spec: &LevelSetSpec) -> RankCertificate {
    let threshold = spec.tolerances.rank_rel_threshold;
    let per_point: Vec<_> = samples
        .iter()
        .map(|p| {
            let jac = crate::momentmaps::constraint_jacobian(&p.u, spec).expect("sample matches spec");
            let (rank, margin) = rank_and_margin(&jac, threshold);
            (p.seed, rank, margin, p.u.clone())
        })
        .collect();
    aggregate(
        "constraint-jacobian",
        spec.constraint_count(),
        Some(spec.expected_level_set_dim()),
        per_point,
        spec.real_dim(),
    )
}

/// Local-freeness certificate: the Killing fields must span the full group
/// dimension (4 or 5) at every sample.
pub fn freeness_certificate(samples: &[SamplePoint], spec: &LevelSetSpec) -> RankCertificate {
    let threshold = spec.tolerances.rank_rel_threshold;
    let per_point: Vec<_> = samples
        .iter()
        .map(|p| {
            let fields = crate::momentmaps::killing_fields(&p.u, spec);
            let k = DMatrix::from_fn(fields.len(), fields[0].len(), |r, c| fields[r][c]);
            let (rank, margin) = rank_and_margin(&k, threshold);
            (p.seed, rank, margin, p.u.clone())
        })
        .collect();
    aggregate("killing", spec.group_dim(), None, per_point, spec.real_dim())
}

/// One support pattern's multi-start outcome.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternOutcome {
    pub pattern: SupportPattern,
    pub best_residual: f64,
    pub feasible: bool,
    /// Signs of the 4x4 frame determinant seen across converged starts;
    /// both signs witness both components of the vertex.
    pub det_signs: Vec<i8>,
}

/// The 35-pattern support scan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexScanReport {
    pub outcomes: Vec<PatternOutcome>,
    pub feasible_patterns: Vec<SupportPattern>,
    pub expected_patterns: Vec<SupportPattern>,
    /// Largest residual of the eight canonical witnesses.
    pub witness_max_residual: f64,
    /// Residual above which a pattern is declared infeasible (soft finding).
    pub infeasible_threshold: f64,
    pub starts_per_pattern: usize,
    pub findings: Vec<String>,
    pub pass: bool,
}

/// Scan all 35 support patterns with seeded multi-start projection.
///
/// Requires a strictly ordered positive triple. Classifies a pattern
/// feasible when some start converges to the spec tolerance; infeasible
/// when the best residual across starts exceeds `1e-3` (a soft numerical
/// finding); anything between is reported as ambiguous. The feasible set
/// must be exactly the eight predicted patterns.
pub fn vertex_support_scan(spec: &LevelSetSpec, seed: u64) -> Result<VertexScanReport, SpecError> {
    let p = match spec.weights {
        FamilyWeights::Triple(p) => p,
        _ => {
            return Err(SpecError::NotAnOrderedTriple(WeightTriple(0, 0, 0)));
        }
    };
    if !(0 < p.0 && p.0 < p.1 && p.1 < p.2) {
        return Err(SpecError::NotAnOrderedTriple(p));
    }
    let infeasible_threshold = 1e-3;
    let starts = 20usize;
    let tol = spec.tolerances.convergence_tol;
    let mut outcomes = Vec::with_capacity(35);
    let mut findings = Vec::new();
    for (pi, pattern) in SupportPattern::all_patterns().into_iter().enumerate() {
        let mut best = f64::INFINITY;
        let mut det_signs: Vec<i8> = Vec::new();
        for s in 0..starts {
            let mut rng = stream_rng(seed, (pi * 64 + s) as u64);
            let u0 = super::solver::random_start(&mut rng, spec.quaternion_dim());
            match project_with_support(&u0, spec, &pattern.0) {
                Ok(point) => {
                    best = best.min(point.residual);
                    if point.residual <= tol {
                        let det = FrameMatrix::from_vector(&point.u).support_determinant(&pattern.0);
                        let sign = if det >= 0.0 { 1i8 } else { -1i8 };
                        if !det_signs.contains(&sign) {
                            det_signs.push(sign);
                        }
                    }
                }
                Err(super::solver::ProjectionError::Diverged { final_residual, .. }) => {
                    best = best.min(final_residual);
                }
                Err(_) => {}
            }
        }
        let feasible = best <= tol;
        if !feasible && best <= infeasible_threshold {
            findings.push(format!(
                "pattern {} is ambiguous: best residual {:.3e} between tolerances",
                pattern.display_one_based(),
                best
            ));
        }
        det_signs.sort_unstable();
        outcomes.push(PatternOutcome { pattern, best_residual: best, feasible, det_signs });
    }

    let feasible_patterns: Vec<SupportPattern> =
        outcomes.iter().filter(|o| o.feasible).map(|o| o.pattern).collect();
    let expected_patterns = SupportPattern::predicted_vertices();
    for pat in &feasible_patterns {
        if !expected_patterns.contains(pat) {
            findings.push(format!("unexpected feasible pattern {}", pat.display_one_based()));
        }
    }
    for pat in &expected_patterns {
        if !feasible_patterns.contains(pat) {
            findings.push(format!("missing vertex pattern {}", pat.display_one_based()));
        }
    }

    // The eight predicted vertices carry explicit witnesses; reproduce them.
    let mut witness_max_residual = 0.0f64;
    for pat in &expected_patterns {
        let w = vertex_point_for_support(&pat.0);
        let r = constraint_residual(&w, spec).expect("witness matches spec").norm();
        witness_max_residual = witness_max_residual.max(r);
    }

    let pass = findings.is_empty() && witness_max_residual <= 1e-12;
    Ok(VertexScanReport {
        outcomes,
        feasible_patterns,
        expected_patterns,
        witness_max_residual,
        infeasible_threshold,
        starts_per_pattern: starts,
        findings,
        pass,
    })
}

// ---------------------------------------------------------------------------
// co-associativity
// ---------------------------------------------------------------------------

/// Orthonormal basis of the orthogonal complement of the frame's row space
/// (three 7-vectors), via the symmetric eigendecomposition of `A^T A`.
pub fn complement_basis(u: &QuaternionVector) -> [ImaginaryOctonion; 3] {
    let a = FrameMatrix::from_vector(u).to_matrix();
    let gram = a.transpose() * &a; // 7 x 7
    let eig = nalgebra::SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..7).collect();
    order.sort_by(|&i, &j| {
        eig.eigenvalues[i]
            .partial_cmp(&eig.eigenvalues[j])
            .expect("eigenvalues are finite")
    });
    let mut out = [ImaginaryOctonion::ZERO; 3];
    for (slot, &col) in order.iter().take(3).enumerate() {
        let v = eig.eigenvectors.column(col);
        let mut c = [0.0; 7];
        for (k, value) in v.iter().enumerate() {
            c[k] = *value;
        }
        out[slot] = ImaginaryOctonion::new(c);
    }
    out
}

/// Rotate a 7-vector by angle `t` on the coordinate pairs `(2,3), (4,5),
/// (6,7)` (the residual circle action on the complement).
fn rotate_pairs(g: ImaginaryOctonion, t: f64) -> ImaginaryOctonion {
    let (s, c) = t.sin_cos();
    let mut out = g.c;
    for off in [1usize, 3, 5] {
        let (a, b) = (g.c[off], g.c[off + 1]);
        out[off] = c * a - s * b;
        out[off + 1] = s * a + c * b;
    }
    ImaginaryOctonion::new(out)
}

fn phi_of_plane(basis: &[ImaginaryOctonion; 3], conv: &MultiplicationConvention) -> f64 {
    calibration_phi(basis[0], basis[1], basis[2], conv)
}

/// Maximum of `|phi|` over the circle reparametrization of the complement:
/// the calibration value of the best gauge representative on the orbit.
fn aligned_phi(basis: &[ImaginaryOctonion; 3], conv: &MultiplicationConvention) -> f64 {
    let eval = |t: f64| {
        let g = [
            rotate_pairs(basis[0], t),
            rotate_pairs(basis[1], t),
            rotate_pairs(basis[2], t),
        ];
        phi_of_plane(&g, conv).abs()
    };
    // phi along the orbit is a trig polynomial of degree <= 3; a coarse
    // grid plus golden-section refinement pins the max.
    let grid = 1024;
    let mut best_t = 0.0;
    let mut best = -1.0;
    for k in 0..grid {
        let t = 2.0 * std::f64::consts::PI * k as f64 / grid as f64;
        let v = eval(t);
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let h = 2.0 * std::f64::consts::PI / grid as f64;
    let gr = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (best_t - h, best_t + h);
    let mut m1 = hi - gr * (hi - lo);
    let mut m2 = lo + gr * (hi - lo);
    for _ in 0..64 {
        if eval(m1) < eval(m2) {
            lo = m1;
            m1 = m2;
            m2 = lo + gr * (hi - lo);
        } else {
            hi = m2;
            m2 = m1;
            m1 = hi - gr * (hi - lo);
        }
    }
    best.max(eval(0.5 * (lo + hi)))
}

/// Per-sample calibration report on the `(1,1,1)` level set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoassociativityReport {
    pub samples: usize,
    /// `|phi|` on the complement of each frame, as sampled.
    pub raw_values: Vec<f64>,
    /// `max_t |phi|` over the circle orbit of each complement.
    pub aligned_values: Vec<f64>,
    pub raw_min: f64,
    pub raw_max: f64,
    pub aligned_min: f64,
    pub tolerance: f64,
    /// All raw values within `tolerance` of 1.
    pub raw_all_unit: bool,
    /// All circle-aligned values within `tolerance` of 1.
    pub aligned_all_unit: bool,
    pub findings: Vec<String>,
    pub note: String,
}

/// Evaluate `|phi|` on the complement of every sampled frame, raw and
/// circle-aligned.
///
/// The raw value is asserted against 1 (tolerance `1e-6`); departures are
/// reported as calibration-deficit findings carrying the worst sample. The
/// aligned value certifies membership of the sample in the circle orbit of
/// the calibrated frames.
pub fn coassociativity_check(
    samples: &[SamplePoint],
    conv: &MultiplicationConvention,
) -> CoassociativityReport {
    let tolerance = 1e-6;
    let mut raw_values = Vec::with_capacity(samples.len());
    let mut aligned_values = Vec::with_capacity(samples.len());
    for p in samples {
        let basis = complement_basis(&p.u);
        raw_values.push(phi_of_plane(&basis, conv).abs());
        aligned_values.push(aligned_phi(&basis, conv));
    }
    let raw_min = raw_values.iter().copied().fold(f64::INFINITY, f64::min);
    let raw_max = raw_values.iter().copied().fold(0.0, f64::max);
    let aligned_min = aligned_values.iter().copied().fold(f64::INFINITY, f64::min);
    let raw_all_unit = !raw_values.is_empty() && raw_values.iter().all(|v| (v - 1.0).abs() <= tolerance);
    let aligned_all_unit =
        !aligned_values.is_empty() && aligned_values.iter().all(|v| (v - 1.0).abs() <= tolerance);
    let mut findings = Vec::new();
    if !raw_all_unit {
        let (worst_idx, worst) = raw_values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite"))
            .map(|(i, v)| (i, *v))
            .unwrap_or((0, 0.0));
        findings.push(format!(
            "calibration deficit: raw |phi| = {:.6} at sample seed {} (circle-aligned value {:.9})",
            worst,
            samples.get(worst_idx).map(|p| p.seed).unwrap_or(0),
            aligned_values.get(worst_idx).copied().unwrap_or(0.0),
        ));
    }
    CoassociativityReport {
        samples: samples.len(),
        raw_values,
        aligned_values,
        raw_min,
        raw_max,
        aligned_min,
        tolerance,
        raw_all_unit,
        aligned_all_unit,
        findings,
        note: "raw = |phi| on the complement as sampled; aligned = max over the \
               circle reparametrization of the same complement"
            .to_string(),
    }
}

/// Forward-direction certificate: frames constructed with an associative
/// complement must land on the full `(1,1,1)` constraint set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForwardFrameReport {
    pub frames: usize,
    pub max_residual: f64,
    pub pass: bool,
}

/// Build `count` random frames whose complements are associative planes
/// and verify each satisfies every constraint of the `(1,1,1)` system.
///
/// An associative plane `W = span(x, y, xy)` spans a quaternion subalgebra
/// `H' = span(1, x, y, xy)`; for any unit `w` orthogonal to `W` the rows
/// `(w, wx, wy, w(xy))` are an orthonormal frame of the complement of `W`,
/// and the connected family of such frames (mixed by `u -> lam u rho`) is
/// exactly the one annihilating the circle moment map. A det-negative row
/// mix leaves the complement associative but breaks the constraint, so the
/// construction fixes the component deliberately.
pub fn coassociative_forward_check(
    count: usize,
    seed: u64,
    conv: &MultiplicationConvention,
) -> ForwardFrameReport {
    let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
    let mut max_residual = 0.0f64;
    for idx in 0..count {
        let mut rng = stream_rng(seed, 0x40_0000 + idx as u64);
        // Orthonormal x, y; z = xy completes an associative 3-plane.
        let x = random_unit_im(&mut rng);
        let mut y = random_unit_im(&mut rng);
        let proj = y.dot(x);
        y = y - x.scale(proj);
        y = y.scale(1.0 / y.norm());
        let z = crate::algebra::oct_mul(x, y, conv).im;
        // Unit w orthogonal to the plane.
        let mut w = random_unit_im(&mut rng);
        for v in [x, y, z] {
            w = w - v.scale(w.dot(v));
        }
        w = w.scale(1.0 / w.norm());
        let rows = [
            w,
            crate::algebra::oct_mul(w, x, conv).im,
            crate::algebra::oct_mul(w, y, conv).im,
            crate::algebra::oct_mul(w, z, conv).im,
        ];
        // u_alpha = sum_a rows[a][alpha] e_a, scaled so |u| = 1, then mixed
        // within the orientation-preserving component.
        let lam = random_unit_quat(&mut rng);
        let rho = random_unit_quat(&mut rng);
        let mut entries = Vec::with_capacity(7);
        for alpha in 0..7 {
            let q = crate::algebra::Quaternion::new(
                0.5 * rows[0].c[alpha],
                0.5 * rows[1].c[alpha],
                0.5 * rows[2].c[alpha],
                0.5 * rows[3].c[alpha],
            );
            entries.push(lam * q * rho);
        }
        let u = QuaternionVector::new(entries).expect("length 7");
        let r = constraint_residual(&u, &spec).expect("dimensions fixed").norm();
        max_residual = max_residual.max(r);
    }
    ForwardFrameReport { frames: count, max_residual, pass: max_residual <= 1e-10 }
}

fn random_unit_quat(rng: &mut rand_chacha::ChaCha12Rng) -> crate::algebra::Quaternion {
    let q = crate::algebra::Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    );
    q.scale(1.0 / q.norm())
}

fn random_unit_im(rng: &mut rand_chacha::ChaCha12Rng) -> ImaginaryOctonion {
    let mut c = [0.0; 7];
    for v in &mut c {
        *v = rng.gen_range(-1.0..1.0);
    }
    let g = ImaginaryOctonion::new(c);
    g.scale(1.0 / g.norm())
}

// ---------------------------------------------------------------------------
// dimension accounting
// ---------------------------------------------------------------------------

/// The dimension chain of a family: ambient sphere, constraints, level set,
/// group, quotient — plus the observed nullity when samples are supplied.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub family: Family,
    pub ambient_sphere_dim: usize,
    /// Moment-map constraint count (sphere row excluded): 12 or 15.
    pub moment_constraints: usize,
    /// Full constraint count including the sphere row: 13 or 16.
    pub constraint_count: usize,
    pub expected_level_set_dim: usize,
    pub group_dim: usize,
    pub expected_quotient_dim: usize,
    pub observed_nullity: Option<usize>,
    pub chain_holds: bool,
}

/// Emit the dimension chain and check it exactly; the observed nullity must
/// match when present.
pub fn dimension_report(spec: &LevelSetSpec, observed_nullity: Option<usize>) -> DimensionReport {
    let ambient_sphere_dim = spec.real_dim() - 1;
    let moment_constraints = spec.constraint_count() - 1;
    let level = spec.expected_level_set_dim();
    let group = spec.group_dim();
    let quotient = spec.expected_quotient_dim();
    let mut chain = ambient_sphere_dim - moment_constraints == level
        && level - group == quotient;
    if let Some(n) = observed_nullity {
        chain = chain && n == level;
    }
    DimensionReport {
        family: spec.family(),
        ambient_sphere_dim,
        moment_constraints,
        constraint_count: spec.constraint_count(),
        expected_level_set_dim: level,
        group_dim: group,
        expected_quotient_dim: quotient,
        observed_nullity,
        chain_holds: chain,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::solver::sample_level_set;
    use crate::weights::{WeightMatrix, WeightQuad};

    #[test]
    fn smoothness_and_freeness_on_triple() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        let batch = sample_level_set(&spec, 25, 42).unwrap();
        let sm = smoothness_certificate(&batch.points, &spec);
        assert!(sm.pass, "{:?}", sm.findings.len());
        assert_eq!(sm.observed_nullity, Some(15));
        let fr = freeness_certificate(&batch.points, &spec);
        assert!(fr.pass);
        assert_eq!(fr.expected_rank, 4);
    }

    #[test]
    fn smoothness_on_quad_and_theta() {
        let spec = LevelSetSpec::quad(WeightQuad(0, 1, 2, 3));
        let batch = sample_level_set(&spec, 15, 42).unwrap();
        let sm = smoothness_certificate(&batch.points, &spec);
        assert!(sm.pass);
        assert_eq!(sm.observed_nullity, Some(19));

        let spec = LevelSetSpec::theta(WeightMatrix::new([1, 0, 1], [0, 1, 1]));
        let batch = sample_level_set(&spec, 15, 42).unwrap();
        let sm = smoothness_certificate(&batch.points, &spec);
        assert!(sm.pass);
        assert_eq!(sm.observed_nullity, Some(12));
        let fr = freeness_certificate(&batch.points, &spec);
        assert!(fr.pass);
        assert_eq!(fr.expected_rank, 5);
    }

    #[test]
    fn dimension_chains() {
        let t = dimension_report(&LevelSetSpec::triple(WeightTriple(1, 2, 3)), Some(15));
        assert!(t.chain_holds);
        assert_eq!(
            (t.ambient_sphere_dim, t.moment_constraints, t.expected_level_set_dim, t.group_dim, t.expected_quotient_dim),
            (27, 12, 15, 4, 11)
        );
        let q = dimension_report(&LevelSetSpec::quad(WeightQuad(0, 1, 2, 3)), None);
        assert_eq!(
            (q.ambient_sphere_dim, q.expected_level_set_dim, q.expected_quotient_dim),
            (31, 19, 15)
        );
        let th = dimension_report(&LevelSetSpec::theta(WeightMatrix::new([1, 0, 1], [0, 1, 1])), None);
        assert_eq!(
            (th.ambient_sphere_dim, th.expected_level_set_dim, th.group_dim, th.expected_quotient_dim),
            (27, 12, 5, 7)
        );
        assert!(th.chain_holds);
    }

    #[test]
    fn vertex_scan_rejects_unordered_triples() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
        assert!(vertex_support_scan(&spec, 42).is_err());
    }

    #[test]
    fn complement_basis_is_orthonormal() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
        let batch = sample_level_set(&spec, 5, 42).unwrap();
        for p in &batch.points {
            let b = complement_basis(&p.u);
            for s in 0..3 {
                assert!((b[s].norm() - 1.0).abs() < 1e-10);
                for t in (s + 1)..3 {
                    assert!(b[s].dot(b[t]).abs() < 1e-10);
                }
                // orthogonal to every frame row
                let fm = FrameMatrix::from_vector(&p.u);
                for a in 0..4 {
                    assert!(fm.row_octonion(a).dot(b[s]).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn phi_absolute_value_is_basis_independent() {
        let conv = MultiplicationConvention::calibrated();
        let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
        let batch = sample_level_set(&spec, 5, 42).unwrap();
        let mut rng = stream_rng(1, 0);
        for p in &batch.points {
            let b = complement_basis(&p.u);
            let v0 = phi_of_plane(&b, &conv).abs();
            // rotate the basis by a random special orthogonal 3x3 mix
            let gauss = DMatrix::from_fn(3, 3, |_, _| rng.gen_range(-1.0..1.0f64));
            let q = gauss.qr().q();
            let mut rotated = [ImaginaryOctonion::ZERO; 3];
            for r in 0..3 {
                let mut c = [0.0; 7];
                for s in 0..3 {
                    for k in 0..7 {
                        c[k] += q[(r, s)] * b[s].c[k];
                    }
                }
                rotated[r] = ImaginaryOctonion::new(c);
            }
            let v1 = phi_of_plane(&rotated, &conv).abs();
            assert!((v0 - v1).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_frames_land_on_level_set() {
        let conv = MultiplicationConvention::calibrated();
        let rep = coassociative_forward_check(50, 9, &conv);
        assert!(rep.pass, "max residual {:.3e}", rep.max_residual);
    }

    #[test]
    fn aligned_phi_is_unit_on_samples() {
        let conv = MultiplicationConvention::calibrated();
        let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
        let batch = sample_level_set(&spec, 10, 42).unwrap();
        let rep = coassociativity_check(&batch.points, &conv);
        assert!(rep.aligned_all_unit, "aligned min {:.9}", rep.aligned_min);
    }
}
