//! Numerical certification of the level-set geometry: seeded sampling by
//! Gauss-Newton projection, Jacobian- and Killing-rank certificates, the
//! vertex support scan, singular-stratum constructions, and the
//! co-associativity report.

mod certify;
mod solver;
mod spec;
mod witness;

pub use certify::{
    coassociative_forward_check, coassociativity_check, complement_basis, dimension_report,
    freeness_certificate, smoothness_certificate, vertex_support_scan, CoassociativityReport,
    DimensionReport, ForwardFrameReport, PatternOutcome, RankCertificate, RankFinding,
    VertexScanReport,
};
pub use solver::{
    project_to_level_set, project_with_support, rank_and_margin, sample_level_set,
    sample_sp1_level_set, stream_rng, ProjectedPoint, ProjectionError, SampleBatch, SampleError,
};

pub(crate) use solver::point_diagnostics;
pub use spec::{
    classify_stratum, Family, FamilyWeights, LevelSetSpec, SamplePoint, SpecError, StratumClass,
    SupportPattern, ToleranceProfile,
};
pub use witness::{
    aligned_pair_witness, pair_zero_witness, singular_stratum_point, IsotropyWitness,
    WitnessError,
};
