//! Projection onto the constraint varieties and seeded sampling.
//!
//! The projector is Gauss-Newton with Levenberg damping: the constraints
//! are quadratic and the systems small (at most 32 unknowns), so a damped
//! normal-equations step is robust near regular points. All randomness
//! flows from one 64-bit seed through per-index counter streams, so
//! parallel sampling is reproducible at any thread count.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::momentmaps::{
    constraint_jacobian, constraint_residual, killing_fields, MomentError, QuaternionVector,
};

use super::spec::{LevelSetSpec, SamplePoint};

#[derive(Debug, Error)]
pub enum ProjectionError {
    #[error("starting point has norm below 1e-8")]
    DegenerateStart,
    #[error("projection did not reach tolerance in {iterations} iterations (final residual {final_residual:.3e})")]
    Diverged {
        iterations: usize,
        final_residual: f64,
        residual_history: Vec<f64>,
    },
    #[error(transparent)]
    Moment(#[from] MomentError),
}

#[derive(Debug, Error)]
pub enum SampleError {
    #[error("no starting point converged out of {attempted}")]
    AllDiverged { attempted: usize },
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// A converged projection.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectedPoint {
    pub u: QuaternionVector,
    pub residual: f64,
    pub iterations: usize,
}

/// Result of a sampling run: the converged points (in seed order) plus the
/// attempt count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub points: Vec<SamplePoint>,
    pub attempted: usize,
}

impl SampleBatch {
    pub fn converged_fraction(&self) -> f64 {
        if self.attempted == 0 {
            0.0
        } else {
            self.points.len() as f64 / self.attempted as f64
        }
    }
}

/// Per-index RNG: one master seed, one counter stream per draw.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub(crate) struct GnOutcome {
    pub x: DVector<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub history: Vec<f64>,
    pub converged: bool,
}

/// Damped Gauss-Newton on a generic residual/Jacobian pair. Coordinates
/// where `mask` is false are pinned to zero. Damping is raised when a step
/// fails to decrease the residual.
pub(crate) fn gauss_newton<R, J>(
    x0: DVector<f64>,
    residual: R,
    jacobian: J,
    tol: f64,
    max_iter: usize,
    mask: Option<&[bool]>,
) -> GnOutcome
where
    R: Fn(&DVector<f64>) -> DVector<f64>,
    J: Fn(&DVector<f64>) -> DMatrix<f64>,
{
    let apply_mask = |x: &mut DVector<f64>| {
        if let Some(m) = mask {
            for (i, keep) in m.iter().enumerate() {
                if !keep {
                    x[i] = 0.0;
                }
            }
        }
    };
    let mut x = x0;
    apply_mask(&mut x);
    let mut r = residual(&x);
    let mut rn = r.norm();
    let mut history = vec![rn];
    let mut lambda = 1e-3;
    let mut iterations = 0;
    while rn > tol && iterations < max_iter {
        let mut jac = jacobian(&x);
        if let Some(m) = mask {
            for (i, keep) in m.iter().enumerate() {
                if !keep {
                    jac.column_mut(i).fill(0.0);
                }
            }
        }
        let jt = jac.transpose();
        let mut a = &jt * &jac;
        for d in 0..a.nrows() {
            a[(d, d)] += lambda;
        }
        let rhs = -(&jt * &r);
        let step = match a.cholesky() {
            Some(chol) => chol.solve(&rhs),
            None => {
                lambda *= 10.0;
                iterations += 1;
                continue;
            }
        };
        let mut xn = &x + step;
        apply_mask(&mut xn);
        let rnew = residual(&xn);
        let rnn = rnew.norm();
        if rnn < rn {
            x = xn;
            r = rnew;
            rn = rnn;
            history.push(rn);
            lambda = (lambda * 0.3).max(1e-14);
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
        iterations += 1;
    }
    GnOutcome { x, residual: rn, iterations, history, converged: rn <= tol }
}

fn spec_residual(spec: &LevelSetSpec) -> impl Fn(&DVector<f64>) -> DVector<f64> + '_ {
    move |x| {
        let u = QuaternionVector::from_flat(x.as_slice()).expect("flat length fixed");
        constraint_residual(&u, spec).expect("dimensions fixed")
    }
}

fn spec_jacobian(spec: &LevelSetSpec) -> impl Fn(&DVector<f64>) -> DMatrix<f64> + '_ {
    move |x| {
        let u = QuaternionVector::from_flat(x.as_slice()).expect("flat length fixed");
        constraint_jacobian(&u, spec).expect("dimensions fixed")
    }
}

/// Project a starting point onto the zero set of the spec's constraints.
///
/// Deterministic given `(u0, spec)`. A start already on the zero set is
/// returned unchanged with zero iterations.
pub fn project_to_level_set(
    u0: &QuaternionVector,
    spec: &LevelSetSpec,
) -> Result<ProjectedPoint, ProjectionError> {
    spec.check_dimension(u0).map_err(MomentError::from)?;
    if u0.norm() <= 1e-8 {
        return Err(ProjectionError::DegenerateStart);
    }
    let tol = spec.tolerances.convergence_tol;
    let out = gauss_newton(
        DVector::from_vec(u0.to_flat()),
        spec_residual(spec),
        spec_jacobian(spec),
        tol,
        spec.tolerances.max_iterations,
        None,
    );
    if out.converged {
        Ok(ProjectedPoint {
            u: QuaternionVector::from_flat(out.x.as_slice()).expect("length preserved"),
            residual: out.residual,
            iterations: out.iterations,
        })
    } else {
        Err(ProjectionError::Diverged {
            iterations: out.iterations,
            final_residual: out.residual,
            residual_history: out.history,
        })
    }
}

/// Project with all quaternionic coordinates outside the support pinned to
/// zero.
pub fn project_with_support(
    u0: &QuaternionVector,
    spec: &LevelSetSpec,
    support: &[usize],
) -> Result<ProjectedPoint, ProjectionError> {
    spec.check_dimension(u0).map_err(MomentError::from)?;
    let n = spec.real_dim();
    let mut mask = vec![false; n];
    for &c in support {
        for t in 0..4 {
            mask[4 * c + t] = true;
        }
    }
    let mut x0 = DVector::from_vec(u0.to_flat());
    for (i, keep) in mask.iter().enumerate() {
        if !keep {
            x0[i] = 0.0;
        }
    }
    if x0.norm() <= 1e-8 {
        return Err(ProjectionError::DegenerateStart);
    }
    let out = gauss_newton(
        x0,
        spec_residual(spec),
        spec_jacobian(spec),
        spec.tolerances.convergence_tol,
        spec.tolerances.max_iterations,
        Some(&mask),
    );
    if out.converged {
        Ok(ProjectedPoint {
            u: QuaternionVector::from_flat(out.x.as_slice()).expect("length preserved"),
            residual: out.residual,
            iterations: out.iterations,
        })
    } else {
        Err(ProjectionError::Diverged {
            iterations: out.iterations,
            final_residual: out.residual,
            residual_history: out.history,
        })
    }
}

pub(crate) fn random_start(rng: &mut ChaCha12Rng, quaternion_dim: usize) -> QuaternionVector {
    let flat: Vec<f64> = (0..4 * quaternion_dim).map(|_| rng.sample(StandardNormal)).collect();
    let u = QuaternionVector::from_flat(&flat).expect("length 7 or 8");
    let n = u.norm();
    u.scale(1.0 / n)
}

/// Rank and margin diagnostics for a converged point.
pub(crate) fn point_diagnostics(
    u: &QuaternionVector,
    spec: &LevelSetSpec,
) -> (usize, f64, usize, f64) {
    let threshold = spec.tolerances.rank_rel_threshold;
    let jac = constraint_jacobian(u, spec).expect("dimensions fixed");
    let (jr, jm) = rank_and_margin(&jac, threshold);
    let fields = killing_fields(u, spec);
    let k = DMatrix::from_fn(fields.len(), fields[0].len(), |r, c| fields[r][c]);
    let (kr, km) = rank_and_margin(&k, threshold);
    (jr, jm, kr, km)
}

/// Numerical rank by the relative singular-value threshold, plus the
/// smallest retained singular value relative to the largest.
pub fn rank_and_margin(m: &DMatrix<f64>, rel_threshold: f64) -> (usize, f64) {
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    if smax == 0.0 {
        return (0, 0.0);
    }
    let mut rank = 0;
    let mut min_retained = f64::INFINITY;
    for s in svd.singular_values.iter() {
        if *s > rel_threshold * smax {
            rank += 1;
            min_retained = min_retained.min(*s);
        }
    }
    (rank, min_retained / smax)
}

/// Draw `count` seeded normal starts, normalize, project; return the
/// converged points with diagnostics, in seed order. Bit-identical across
/// repeat calls and across thread counts.
pub fn sample_level_set(
    spec: &LevelSetSpec,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, SampleError> {
    let results: Vec<Option<SamplePoint>> = (0..count)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(seed, idx as u64);
            let u0 = random_start(&mut rng, spec.quaternion_dim());
            match project_to_level_set(&u0, spec) {
                Ok(p) => {
                    let (jr, jm, kr, km) = point_diagnostics(&p.u, spec);
                    Some(SamplePoint {
                        seed: idx as u64,
                        u: p.u,
                        residual: p.residual,
                        iterations: p.iterations,
                        jacobian_rank: jr,
                        killing_rank: kr,
                        min_sv_constraints: jm,
                        min_sv_killing: km,
                    })
                }
                Err(_) => None,
            }
        })
        .collect();
    let points: Vec<SamplePoint> = results.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(SampleError::AllDiverged { attempted: count });
    }
    Ok(SampleBatch { points, attempted: count })
}

/// Sample the `Sp(1)` level set alone (sphere plus the nine moment rows,
/// no abelian constraint): the contrast population for the
/// co-associativity report.
pub fn sample_sp1_level_set(count: usize, seed: u64) -> Vec<QuaternionVector> {
    use crate::weights::WeightTriple;
    let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
    let residual = |x: &DVector<f64>| {
        let u = QuaternionVector::from_flat(x.as_slice()).expect("length fixed");
        let full = constraint_residual(&u, &spec).expect("dimensions fixed");
        full.rows(0, 10).into_owned()
    };
    let jacobian = |x: &DVector<f64>| {
        let u = QuaternionVector::from_flat(x.as_slice()).expect("length fixed");
        let full = constraint_jacobian(&u, &spec).expect("dimensions fixed");
        full.rows(0, 10).into_owned()
    };
    (0..count)
        .into_par_iter()
        .map(|idx| {
            let mut rng = stream_rng(seed, idx as u64);
            let u0 = random_start(&mut rng, 7);
            let out = gauss_newton(
                DVector::from_vec(u0.to_flat()),
                residual,
                jacobian,
                spec.tolerances.convergence_tol,
                spec.tolerances.max_iterations,
                None,
            );
            if out.converged {
                Some(QuaternionVector::from_flat(out.x.as_slice()).expect("length fixed"))
            } else {
                None
            }
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::momentmaps::{action_apply, vertex_point, GroupElement};
    use crate::weights::{WeightMatrix, WeightQuad, WeightTriple};
    use rand::Rng;

    #[test]
    fn vertex_start_returns_unchanged() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        let v = vertex_point();
        let p = project_to_level_set(&v, &spec).unwrap();
        assert_eq!(p.iterations, 0);
        assert_eq!(p.u, v);
    }

    #[test]
    fn perturbed_vertex_converges() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        let mut rng = stream_rng(99, 0);
        let mut flat = vertex_point().to_flat();
        for v in &mut flat {
            *v += rng.gen_range(-1e-3..1e-3);
        }
        let u0 = QuaternionVector::from_flat(&flat).unwrap();
        let p = project_to_level_set(&u0, &spec).unwrap();
        assert!(p.residual < 1e-12);
        assert!(p.iterations > 0);
    }

    #[test]
    fn zero_start_is_degenerate() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        let u0 = QuaternionVector::from_flat(&[0.0; 28]).unwrap();
        assert!(matches!(
            project_to_level_set(&u0, &spec),
            Err(ProjectionError::DegenerateStart)
        ));
    }

    #[test]
    fn sampling_triple_contract() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        let batch = sample_level_set(&spec, 100, 42).unwrap();
        assert!(batch.points.len() >= 90);
        for p in &batch.points {
            assert!(p.residual < 1e-10);
        }
        let again = sample_level_set(&spec, 100, 42).unwrap();
        assert_eq!(batch, again);
    }

    #[test]
    fn sampling_is_thread_count_independent() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 2, 3));
        let pool1 = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let pool8 = rayon::ThreadPoolBuilder::new().num_threads(8).build().unwrap();
        let a = pool1.install(|| sample_level_set(&spec, 24, 7).unwrap());
        let b = pool8.install(|| sample_level_set(&spec, 24, 7).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn theta_batch_has_sixteen_entry_residuals() {
        let spec = LevelSetSpec::theta(WeightMatrix::new([1, 0, 1], [0, 1, 1]));
        let batch = sample_level_set(&spec, 20, 42).unwrap();
        assert!(!batch.points.is_empty());
        for p in &batch.points {
            let r = constraint_residual(&p.u, &spec).unwrap();
            assert_eq!(r.len(), 16);
            assert!(r.norm() < 1e-10);
        }
    }

    #[test]
    fn converged_points_are_group_invariant() {
        let spec = LevelSetSpec::quad(WeightQuad(0, 1, 2, 3));
        let batch = sample_level_set(&spec, 10, 5).unwrap();
        let tol = spec.tolerances.convergence_tol;
        let mut rng = stream_rng(123, 0);
        for p in &batch.points {
            let l = crate::algebra::Quaternion::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let l = l.scale(1.0 / l.norm());
            let g = GroupElement::circle(l, rng.gen_range(-3.0..3.0));
            let moved = action_apply(&p.u, &g, &spec).unwrap();
            let r = constraint_residual(&moved, &spec).unwrap();
            assert!(r.norm() <= 10.0 * tol, "residual {} after action", r.norm());
        }
    }

    #[test]
    fn sp1_sampler_produces_frames() {
        let pts = sample_sp1_level_set(10, 3);
        assert!(pts.len() >= 9);
        for u in &pts {
            let fm = crate::momentmaps::FrameMatrix::from_vector(u);
            assert!(fm.orthonormality_defect() < 1e-10);
        }
    }
}
