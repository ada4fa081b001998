//! Per-datum verification pipelines: exact predicates plus numerical
//! certificates, merged into one machine-readable report.
//!
//! Reports are pure functions of `(input, seed, tolerances, version)`:
//! they carry no timestamps and all collections are emitted in a fixed
//! order.

use serde::{Deserialize, Serialize};

use crate::algebra::MultiplicationConvention;
use crate::levelset::{
    aligned_pair_witness, coassociative_forward_check, coassociativity_check, dimension_report,
    freeness_certificate, pair_zero_witness, sample_level_set, singular_stratum_point,
    smoothness_certificate, vertex_support_scan, CoassociativityReport, DimensionReport,
    ForwardFrameReport, IsotropyWitness, LevelSetSpec, RankCertificate, ToleranceProfile,
    VertexScanReport,
};
use crate::momentmaps::{action_apply, constraint_residual, GroupElement, QuaternionVector};
use crate::weights::{
    admissibility_verdict, box_determinants, minor_determinants, quad_verdict,
    singular_group_orders, theta_locally_free, theta_smoothness_obstruction, verify_box_identity,
    AdmissibilityVerdict, BoxQuad, MinorTriple, ObstructionReport, QuadVerdict, WeightMatrix,
    WeightQuad, WeightTriple,
};

/// Options shared by the verification pipelines.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SamplingOptions {
    pub count: usize,
    pub seed: u64,
    /// Run the numerical pipeline even for data whose exact verdict is
    /// negative (rank deficiencies then appear as findings).
    pub force_sampling: bool,
    /// Skip every numerical stage (exact predicates only).
    pub exact_only: bool,
}

impl Default for SamplingOptions {
    fn default() -> Self {
        SamplingOptions { count: 100, seed: 42, force_sampling: false, exact_only: false }
    }
}

/// Provenance block attached to every report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub seed: u64,
    pub count: usize,
    pub tolerances: ToleranceProfile,
}

fn provenance(opts: &SamplingOptions, tol: ToleranceProfile) -> Provenance {
    Provenance {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: opts.seed,
        count: opts.count,
        tolerances: tol,
    }
}

/// Exact-arithmetic section of a report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ExactSection {
    /// `admissible`/`free`/`locally free`, or the first failing condition.
    pub verdict: String,
    pub positive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub minors: Option<MinorTriple>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boxes: Option<BoxQuad>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub box_identity: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub singular_orders: Option<[u64; 4]>,
    pub dimension: DimensionReport,
}

/// The singular-stratum section of the `(1,1,1)` report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StratumSection {
    pub point: QuaternionVector,
    pub residual: f64,
    /// `|g.u - u|` for the circle element at the three test angles.
    pub fix_errors: Vec<f64>,
    pub killing_rank: usize,
    pub label: String,
}

/// Numerical section of a report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NumericalSection {
    pub attempted: usize,
    pub converged: usize,
    pub converged_fraction: f64,
    pub max_residual: f64,
    pub smoothness: RankCertificate,
    pub freeness: RankCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_scan: Option<VertexScanReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stratum: Option<StratumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coassociativity: Option<CoassociativityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub forward_frames: Option<ForwardFrameReport>,
    pub witnesses: Vec<IsotropyWitness>,
}

/// One verification run: input echo, exact verdicts, optional numerical
/// certificates, advisory notes, and the aggregated pass flag.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub family: String,
    pub weights: String,
    pub exact: ExactSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numerical: Option<NumericalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obstruction: Option<ObstructionReport>,
    pub notes: Vec<String>,
    /// True when every certificate that ran produced no findings.
    pub pass: bool,
    pub provenance: Provenance,
}

fn base_numerical(
    spec: &LevelSetSpec,
    opts: &SamplingOptions,
) -> Option<(NumericalSection, Vec<crate::levelset::SamplePoint>)> {
    let batch = sample_level_set(spec, opts.count, opts.seed).ok()?;
    let max_residual = batch.points.iter().map(|p| p.residual).fold(0.0, f64::max);
    let smoothness = smoothness_certificate(&batch.points, spec);
    let freeness = freeness_certificate(&batch.points, spec);
    let section = NumericalSection {
        attempted: batch.attempted,
        converged: batch.points.len(),
        converged_fraction: batch.converged_fraction(),
        max_residual,
        smoothness,
        freeness,
        vertex_scan: None,
        stratum: None,
        coassociativity: None,
        forward_frames: None,
        witnesses: Vec::new(),
    };
    Some((section, batch.points))
}

fn section_pass(n: &NumericalSection) -> bool {
    let base = n.smoothness.pass && n.freeness.pass;
    let scan = n.vertex_scan.as_ref().map(|v| v.pass).unwrap_or(true);
    let co = n
        .coassociativity
        .as_ref()
        .map(|c| c.raw_all_unit && c.aligned_all_unit)
        .unwrap_or(true);
    let fw = n.forward_frames.as_ref().map(|f| f.pass).unwrap_or(true);
    let wit = n.witnesses.iter().all(|w| w.fix_error <= 1e-10 && w.residual <= 1e-10);
    base && scan && co && fw && wit
}

/// Verify a weight triple: admissibility, and for admissible data the full
/// sampling/rank/vertex pipeline. For `(1,1,1)` the singular stratum is
/// constructed, its fixing circle checked, and the calibration report run;
/// the datum is labeled quasi-free / orbifold.
pub fn verify_triple(
    p: WeightTriple,
    opts: &SamplingOptions,
    conv: &MultiplicationConvention,
) -> VerificationReport {
    let spec = LevelSetSpec::triple(p);
    let verdict = admissibility_verdict(p);
    let admissible = verdict.is_admissible();
    let is_111 = p.as_array() == [1, 1, 1];
    let mut notes = Vec::new();

    let exact = ExactSection {
        verdict: verdict.to_string(),
        positive: admissible,
        minors: None,
        boxes: None,
        box_identity: None,
        singular_orders: None,
        dimension: dimension_report(&spec, None),
    };

    let run_sampling = !opts.exact_only && (admissible || is_111 || opts.force_sampling);
    let mut numerical = None;
    if run_sampling {
        if let Some((mut section, points)) = base_numerical(&spec, opts) {
            if admissible {
                section.vertex_scan = vertex_support_scan(&spec, opts.seed).ok();
            }
            if is_111 {
                if let Ok(point) = singular_stratum_point(opts.seed) {
                    let residual = constraint_residual(&point, &spec)
                        .map(|r| r.norm())
                        .unwrap_or(f64::INFINITY);
                    let mut fix_errors = Vec::new();
                    for t in [0.3f64, 1.0, 2.5] {
                        let lambda =
                            crate::algebra::Quaternion::new(t.cos(), t.sin(), 0.0, 0.0);
                        let g = GroupElement::circle(lambda, t);
                        let moved = action_apply(&point, &g, &spec).expect("element is unit");
                        let d: f64 = moved
                            .to_flat()
                            .iter()
                            .zip(point.to_flat().iter())
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt();
                        fix_errors.push(d);
                    }
                    let (_, _, killing_rank, _) =
                        crate::levelset::point_diagnostics(&point, &spec);
                    section.stratum = Some(StratumSection {
                        point,
                        residual,
                        fix_errors,
                        killing_rank,
                        label: "quasi-free / orbifold".to_string(),
                    });
                }
                section.coassociativity = Some(coassociativity_check(&points, conv));
                section.forward_frames =
                    Some(coassociative_forward_check(100, opts.seed, conv));
            }
            if !admissible && !is_111 {
                section.witnesses = triple_witnesses(&spec, &verdict, opts.seed);
            }
            numerical = Some(section);
        }
    }
    if !opts.exact_only && !admissible && !is_111 && numerical.is_none() {
        // Witnesses are cheap; construct them even without a sampling run.
        let witnesses = triple_witnesses(&spec, &verdict, opts.seed);
        if !witnesses.is_empty() {
            notes.push(format!(
                "nontrivial isotropy witnessed with order {}",
                witnesses[0].order
            ));
            numerical = Some(NumericalSection {
                attempted: 0,
                converged: 0,
                converged_fraction: 0.0,
                max_residual: 0.0,
                smoothness: empty_certificate("constraint-jacobian", spec.constraint_count()),
                freeness: empty_certificate("killing", spec.group_dim()),
                vertex_scan: None,
                stratum: None,
                coassociativity: None,
                forward_frames: None,
                witnesses,
            });
        }
    }
    if is_111 {
        notes.push("action is quasi-free: generic samples have full Killing rank, the aligned stratum drops to rank 3".to_string());
    }

    let pass = numerical.as_ref().map(section_pass).unwrap_or(true);
    VerificationReport {
        schema_version: 1,
        family: "triple".to_string(),
        weights: p.to_string(),
        exact,
        numerical,
        obstruction: None,
        notes,
        pass,
        provenance: provenance(opts, spec.tolerances),
    }
}

fn empty_certificate(kind: &str, expected_rank: usize) -> RankCertificate {
    RankCertificate {
        kind: kind.to_string(),
        expected_rank,
        expected_nullity: None,
        samples: 0,
        pass: true,
        min_margin: 0.0,
        median_margin: 0.0,
        observed_nullity: None,
        findings: Vec::new(),
    }
}

fn triple_witnesses(
    spec: &LevelSetSpec,
    verdict: &AdmissibilityVerdict,
    seed: u64,
) -> Vec<IsotropyWitness> {
    match verdict {
        AdmissibilityVerdict::PairNotCoprime { i, j, gcd } => {
            // zero the pair of the remaining weight slot (slots are 1-based)
            let zeroed_slot = 6 - i - j;
            pair_zero_witness(spec, zeroed_slot - 1, *gcd as u64, seed)
                .ok()
                .into_iter()
                .collect()
        }
        AdmissibilityVerdict::SignedGcdFails { sign2, sign3, gcd } => {
            aligned_pair_witness(spec, *sign2, *sign3, *gcd as u64, seed, None)
                .ok()
                .into_iter()
                .collect()
        }
        _ => Vec::new(),
    }
}

/// Verify a weight quadruple.
pub fn verify_quad(p: WeightQuad, opts: &SamplingOptions) -> VerificationReport {
    let spec = LevelSetSpec::quad(p);
    let verdict = quad_verdict(p);
    let free = verdict.is_free();
    let mut notes = Vec::new();
    let arr = p.as_array();
    if free && arr[0] == 0 {
        notes.push(format!(
            "p1 = 0: the space contains two copies of the ({},{},{}) 11-dimensional reduction meeting in a 7-dimensional toric piece",
            arr[1], arr[2], arr[3]
        ));
    }
    if arr == [1, 1, 1, 1] {
        notes.push(
            "reduced space is the biquotient Z2\\Spin(7)/Spin(4); recorded as an identification only, no numerical claim"
                .to_string(),
        );
    }

    let exact = ExactSection {
        verdict: verdict.to_string(),
        positive: free,
        minors: None,
        boxes: None,
        box_identity: None,
        singular_orders: None,
        dimension: dimension_report(&spec, None),
    };

    let run_sampling = !opts.exact_only && (free || opts.force_sampling);
    let mut numerical = if run_sampling {
        base_numerical(&spec, opts).map(|(section, _)| section)
    } else {
        None
    };

    if !free && !opts.exact_only {
        let witnesses = quad_witnesses(&spec, p, &verdict, opts.seed);
        if !witnesses.is_empty() {
            match numerical.as_mut() {
                Some(section) => section.witnesses = witnesses,
                None => {
                    numerical = Some(NumericalSection {
                        attempted: 0,
                        converged: 0,
                        converged_fraction: 0.0,
                        max_residual: 0.0,
                        smoothness: empty_certificate(
                            "constraint-jacobian",
                            spec.constraint_count(),
                        ),
                        freeness: empty_certificate("killing", spec.group_dim()),
                        vertex_scan: None,
                        stratum: None,
                        coassociativity: None,
                        forward_frames: None,
                        witnesses,
                    });
                }
            }
        }
    }

    let pass = numerical.as_ref().map(section_pass).unwrap_or(true);
    VerificationReport {
        schema_version: 1,
        family: "quad".to_string(),
        weights: p.to_string(),
        exact,
        numerical,
        obstruction: None,
        notes,
        pass,
        provenance: provenance(opts, spec.tolerances),
    }
}

fn quad_witnesses(
    spec: &LevelSetSpec,
    p: WeightQuad,
    verdict: &QuadVerdict,
    seed: u64,
) -> Vec<IsotropyWitness> {
    let arr = p.as_array();
    let find_idx = |vals: &[i64; 3]| -> Option<[usize; 3]> {
        let mut idx = [0usize; 3];
        for (slot, v) in vals.iter().enumerate() {
            idx[slot] = arr.iter().position(|a| a == v)?;
        }
        Some(idx)
    };
    match verdict {
        QuadVerdict::TripleGcdFails { triple, gcd } => {
            let Some(idx) = find_idx(triple) else { return Vec::new() };
            let zeroed = (0..4).find(|k| !idx.contains(k)).expect("one pair excluded");
            pair_zero_witness(spec, zeroed, *gcd as u64, seed).ok().into_iter().collect()
        }
        QuadVerdict::TripleSignedGcdFails { triple, sign2, sign3, gcd } => {
            let Some(idx) = find_idx(triple) else { return Vec::new() };
            aligned_pair_witness(spec, *sign2, *sign3, *gcd as u64, seed, Some(idx))
                .ok()
                .into_iter()
                .collect()
        }
        _ => Vec::new(),
    }
}

/// Verify a 2x3 weight matrix: minors, boxes, the identity, local
/// freeness, singular orders, and the rank certificates on samples.
pub fn verify_theta(theta: WeightMatrix, opts: &SamplingOptions) -> VerificationReport {
    let spec = LevelSetSpec::theta(theta);
    let verdict = theta_locally_free(theta);
    let locally_free = verdict.is_locally_free();
    let minors = minor_determinants(theta);
    let boxes = box_determinants(theta);
    let identity = verify_box_identity(theta);
    let orders = singular_group_orders(theta).ok();
    let mut notes = Vec::new();
    if locally_free && minors.all_unit() {
        notes.push(
            "all minors are units: the quotient necessarily carries order-3 singular fibers; no weight matrix yields a smooth quotient"
                .to_string(),
        );
    }

    let exact = ExactSection {
        verdict: verdict.to_string(),
        positive: locally_free,
        minors: Some(minors),
        boxes: Some(boxes),
        box_identity: Some(identity),
        singular_orders: orders,
        dimension: dimension_report(&spec, None),
    };

    let run_sampling = !opts.exact_only && (locally_free || opts.force_sampling);
    let numerical = if run_sampling {
        base_numerical(&spec, opts).map(|(section, _)| section)
    } else {
        None
    };

    let mut pass = numerical.as_ref().map(section_pass).unwrap_or(true);
    pass = pass && identity;

    VerificationReport {
        schema_version: 1,
        family: "theta".to_string(),
        weights: theta.to_string(),
        exact,
        numerical,
        obstruction: Some(theta_smoothness_obstruction()),
        notes,
        pass,
        provenance: provenance(opts, spec.tolerances),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conv() -> MultiplicationConvention {
        MultiplicationConvention::calibrated()
    }

    fn small_opts() -> SamplingOptions {
        SamplingOptions { count: 12, seed: 42, force_sampling: false, exact_only: false }
    }

    #[test]
    fn admissible_triple_pipeline() {
        let rep = verify_triple(WeightTriple(1, 2, 3), &small_opts(), &conv());
        assert!(rep.exact.positive);
        let n = rep.numerical.as_ref().unwrap();
        assert!(n.smoothness.pass);
        assert!(n.freeness.pass);
        assert!(n.vertex_scan.as_ref().unwrap().pass);
        assert!(rep.pass);
    }

    #[test]
    fn non_admissible_reports_witness_without_sampling() {
        let rep = verify_triple(WeightTriple(1, 3, 5), &small_opts(), &conv());
        assert!(!rep.exact.positive);
        assert!(rep.exact.verdict.contains("gcd(p1 - p2, p1 - p3) = 2"));
        let n = rep.numerical.as_ref().unwrap();
        assert_eq!(n.attempted, 0, "sampling must not run unless forced");
        assert_eq!(n.witnesses.len(), 1);
        assert_eq!(n.witnesses[0].order, 2);
        assert!(n.witnesses[0].fix_error < 1e-10);
    }

    #[test]
    fn singular_triple_has_stratum_and_label() {
        let rep = verify_triple(WeightTriple(1, 1, 1), &small_opts(), &conv());
        assert!(!rep.exact.positive);
        let n = rep.numerical.as_ref().unwrap();
        let s = n.stratum.as_ref().unwrap();
        assert_eq!(s.killing_rank, 3);
        assert_eq!(s.label, "quasi-free / orbifold");
        assert!(s.fix_errors.iter().all(|e| *e < 1e-10));
        assert!(n.coassociativity.is_some());
        assert!(n.forward_frames.as_ref().unwrap().pass);
    }

    #[test]
    fn quad_pipeline() {
        let rep = verify_quad(WeightQuad(0, 1, 2, 3), &small_opts());
        assert!(rep.exact.positive);
        assert!(rep.pass);
        assert!(rep.notes.iter().any(|n| n.contains("p1 = 0")));

        let rep = verify_quad(WeightQuad(1, 2, 3, 4), &small_opts());
        assert!(!rep.exact.positive);
        assert!(rep.exact.verdict.contains("(1,2,4)"));
        let n = rep.numerical.as_ref().unwrap();
        assert_eq!(n.witnesses.len(), 1);
        assert_eq!(n.witnesses[0].order, 3);

        let rep = verify_quad(WeightQuad(1, 1, 1, 1), &small_opts());
        assert!(rep.notes.iter().any(|n| n.contains("Spin(7)")));
    }

    #[test]
    fn theta_pipeline() {
        let rep = verify_theta(WeightMatrix::new([1, 0, 1], [0, 1, 1]), &small_opts());
        assert!(rep.exact.positive);
        assert_eq!(rep.exact.singular_orders, Some([1, 3, 1, 1]));
        assert!(rep.pass);
        assert!(rep.obstruction.as_ref().unwrap().no_assignment_all_unit);

        let rep = verify_theta(WeightMatrix::new([1, 0, 1], [0, 1, 2]), &small_opts());
        assert!(!rep.exact.positive);
        assert!(rep.exact.verdict.contains("d12"));
        assert!(rep.numerical.is_none());
    }

    #[test]
    fn reports_are_deterministic() {
        let a = verify_triple(WeightTriple(1, 2, 3), &small_opts(), &conv());
        let b = verify_triple(WeightTriple(1, 2, 3), &small_opts(), &conv());
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
