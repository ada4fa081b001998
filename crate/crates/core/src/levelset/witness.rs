//! Explicit isotropy witnesses: constructed points of the level sets that
//! are fixed by a named nontrivial group element. These turn the "only if"
//! directions of the freeness criteria into executable checks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::Quaternion;
use crate::momentmaps::{
    action_apply, constraint_residual, GroupElement, MomentError, QuaternionVector,
};
use crate::weights::WeightTriple;

use super::solver::{gauss_newton, random_start, stream_rng, ProjectionError};
use super::spec::{Family, FamilyWeights, LevelSetSpec};

#[derive(Debug, Error)]
pub enum WitnessError {
    #[error("witness construction failed after {attempts} seeded attempts")]
    ConstructionFailed { attempts: usize },
    #[error("witness does not apply to this family/failure combination: {0}")]
    Inapplicable(String),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Moment(#[from] MomentError),
}

/// A constructed point together with the nontrivial element that fixes it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropyWitness {
    pub u: QuaternionVector,
    /// Order of the cyclic isotropy subgroup exhibited.
    pub order: u64,
    /// Residual of the point against the full constraint system.
    pub residual: f64,
    /// `|g . u - u|` for the exhibited element.
    pub fix_error: f64,
    pub description: String,
}

/// Solve for three quaternions `v_1, v_2, v_3` with
/// `2 sum |v|^2 = 1`, `sum conj(v) i v = 0`, and
/// `sum w_a s_a conj(v) i v = 0`, by damped Gauss-Newton from a seeded
/// start. The aligned pairs `(v_a, s_a i v_a)` then satisfy every
/// constraint of the corresponding level set.
fn solve_aligned_triple(
    weights: [i64; 3],
    signs: [i64; 3],
    seed: u64,
) -> Option<[Quaternion; 3]> {
    let residual = move |x: &DVector<f64>| -> DVector<f64> {
        let v: Vec<Quaternion> = x
            .as_slice()
            .chunks_exact(4)
            .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
            .collect();
        let mut plain = Quaternion::ZERO;
        let mut weighted = Quaternion::ZERO;
        let mut norm2 = 0.0;
        for (a, q) in v.iter().enumerate() {
            let t = q.conj() * Quaternion::I * *q;
            plain += t;
            weighted += t.scale((weights[a] * signs[a]) as f64);
            norm2 += q.norm_sqr();
        }
        DVector::from_vec(vec![
            2.0 * norm2 - 1.0,
            plain.x,
            plain.y,
            plain.z,
            weighted.x,
            weighted.y,
            weighted.z,
        ])
    };
    let jacobian = move |x: &DVector<f64>| -> DMatrix<f64> {
        let v: Vec<Quaternion> = x
            .as_slice()
            .chunks_exact(4)
            .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
            .collect();
        let mut jac = DMatrix::zeros(7, 12);
        for (a, q) in v.iter().enumerate() {
            for t in 0..4 {
                let e = Quaternion::basis(t);
                let d = e.conj() * Quaternion::I * *q + q.conj() * Quaternion::I * e;
                let col = 4 * a + t;
                jac[(0, col)] = 4.0 * q.component(t);
                jac[(1, col)] = d.x;
                jac[(2, col)] = d.y;
                jac[(3, col)] = d.z;
                let wf = (weights[a] * signs[a]) as f64;
                jac[(4, col)] = wf * d.x;
                jac[(5, col)] = wf * d.y;
                jac[(6, col)] = wf * d.z;
            }
        }
        jac
    };
    for attempt in 0..8u64 {
        let mut rng = stream_rng(seed, 0x57_0000 + attempt);
        let start = random_start(&mut rng, 7).to_flat()[..12].to_vec();
        let out = gauss_newton(
            DVector::from_vec(start),
            residual,
            jacobian,
            1e-13,
            200,
            None,
        );
        if out.converged {
            let v: Vec<Quaternion> = out
                .x
                .as_slice()
                .chunks_exact(4)
                .map(|c| Quaternion::new(c[0], c[1], c[2], c[3]))
                .collect();
            return Some([v[0], v[1], v[2]]);
        }
    }
    None
}

/// Assemble the aligned point for a triple spec: `u_1 = 0`, pairs
/// `(v_a, s_a i v_a)`.
fn assemble_aligned_triple(v: &[Quaternion; 3], signs: [i64; 3]) -> QuaternionVector {
    let mut entries = vec![Quaternion::ZERO; 7];
    for (a, (c1, c2)) in [(1usize, 2usize), (3, 4), (5, 6)].into_iter().enumerate() {
        entries[c1] = v[a];
        entries[c2] = (Quaternion::I * v[a]).scale(signs[a] as f64);
    }
    QuaternionVector::new(entries).expect("length 7")
}

/// The singular stratum of the `(1,1,1)` level set: `u_1 = 0`,
/// `u_{2i+1} = i u_{2i}`, `sum conj(u_{2i}) i u_{2i} = 0`, normalized.
///
/// The whole circle `(cos t + i sin t, A(t))` fixes the result.
pub fn singular_stratum_point(seed: u64) -> Result<QuaternionVector, WitnessError> {
    let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
    let v = solve_aligned_triple([1, 1, 1], [1, 1, 1], seed)
        .ok_or(WitnessError::ConstructionFailed { attempts: 8 })?;
    let u = assemble_aligned_triple(&v, [1, 1, 1]);
    let r = constraint_residual(&u, &spec)?.norm();
    if r > 1e-10 {
        return Err(WitnessError::ConstructionFailed { attempts: 8 });
    }
    Ok(u)
}

/// Witness for a failed pairwise-coprimality condition: a level-set point
/// with the complementary coordinate pair zeroed, fixed by the rotation
/// of angle `2 pi / order`.
pub fn pair_zero_witness(
    spec: &LevelSetSpec,
    zeroed_pair: usize,
    order: u64,
    seed: u64,
) -> Result<IsotropyWitness, WitnessError> {
    let pairs = spec.pairs();
    if zeroed_pair >= pairs.len() {
        return Err(WitnessError::Inapplicable(format!(
            "pair index {zeroed_pair} out of range"
        )));
    }
    let (za, zb) = pairs[zeroed_pair];
    let support: Vec<usize> =
        (0..spec.quaternion_dim()).filter(|c| *c != za && *c != zb).collect();
    let mut last_err = None;
    for attempt in 0..8u64 {
        let mut rng = stream_rng(seed, 0x7a_0000 + attempt);
        let u0 = random_start(&mut rng, spec.quaternion_dim());
        match super::solver::project_with_support(&u0, spec, &support) {
            Ok(point) => {
                let t = 2.0 * std::f64::consts::PI / order as f64;
                let angles = match spec.family() {
                    Family::Theta => vec![t, 0.0],
                    _ => vec![t],
                };
                let g = GroupElement { lambda: Quaternion::ONE, angles };
                let moved = action_apply(&point.u, &g, spec)?;
                let fix_error = diff_norm(&moved, &point.u);
                return Ok(IsotropyWitness {
                    u: point.u,
                    order,
                    residual: point.residual,
                    fix_error,
                    description: format!(
                        "pair {} zeroed; fixed by (1, angle 2*pi/{order})",
                        zeroed_pair + 1
                    ),
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(last_err.map(WitnessError::from).unwrap_or(WitnessError::ConstructionFailed { attempts: 8 }))
}

/// Witness for a failed signed-gcd condition `gcd(p1 + s2 p2, p1 + s3 p3) =
/// order > 1`: a `u_1 = 0` point with pairs aligned as
/// `u_{2a+1} = sigma_a i u_{2a}`, `sigma = (1, -s2, -s3)`, fixed by
/// `(cos(p1 t) + i sin(p1 t), A(t))` at `t = 2 pi / order`.
///
/// For the quad family the failing triple's pairs are aligned and the
/// remaining pair is zeroed.
pub fn aligned_pair_witness(
    spec: &LevelSetSpec,
    sign2: i64,
    sign3: i64,
    order: u64,
    seed: u64,
    quad_triple: Option<[usize; 3]>,
) -> Result<IsotropyWitness, WitnessError> {
    let signs = [1, -sign2, -sign3];
    match (spec.family(), spec.weights) {
        (Family::Triple, FamilyWeights::Triple(p)) => {
            let weights = p.as_array();
            let v = solve_aligned_triple(weights, signs, seed)
                .ok_or(WitnessError::ConstructionFailed { attempts: 8 })?;
            let u = assemble_aligned_triple(&v, signs);
            finish_aligned(spec, u, weights[0], order)
        }
        (Family::Quad, FamilyWeights::Quad(p)) => {
            let idx = quad_triple.ok_or_else(|| {
                WitnessError::Inapplicable("quad witness needs the failing triple".into())
            })?;
            let all = p.as_array();
            let weights = [all[idx[0]], all[idx[1]], all[idx[2]]];
            let v = solve_aligned_triple(weights, signs, seed)
                .ok_or(WitnessError::ConstructionFailed { attempts: 8 })?;
            let mut entries = vec![Quaternion::ZERO; 8];
            let pairs = spec.pairs();
            for (slot, &k) in idx.iter().enumerate() {
                let (c1, c2) = pairs[k];
                entries[c1] = v[slot];
                entries[c2] = (Quaternion::I * v[slot]).scale(signs[slot] as f64);
            }
            let u = QuaternionVector::new(entries).expect("length 8");
            finish_aligned(spec, u, weights[0], order)
        }
        _ => Err(WitnessError::Inapplicable(
            "aligned witness applies to circle families only".into(),
        )),
    }
}

fn finish_aligned(
    spec: &LevelSetSpec,
    u: QuaternionVector,
    leading_weight: i64,
    order: u64,
) -> Result<IsotropyWitness, WitnessError> {
    let residual = constraint_residual(&u, spec)?.norm();
    if residual > 1e-10 {
        return Err(WitnessError::ConstructionFailed { attempts: 8 });
    }
    let t = 2.0 * std::f64::consts::PI / order as f64;
    let phase = leading_weight as f64 * t;
    let lambda = Quaternion::new(phase.cos(), phase.sin(), 0.0, 0.0);
    let g = GroupElement { lambda, angles: vec![t] };
    let moved = action_apply(&u, &g, spec)?;
    let fix_error = diff_norm(&moved, &u);
    Ok(IsotropyWitness {
        u,
        order,
        residual,
        fix_error,
        description: format!(
            "u1 = 0, pairs aligned along i; fixed by (cos({leading_weight} t) + i sin({leading_weight} t), A(t)), t = 2*pi/{order}"
        ),
    })
}

fn diff_norm(a: &QuaternionVector, b: &QuaternionVector) -> f64 {
    a.to_flat()
        .iter()
        .zip(b.to_flat().iter())
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levelset::solver::point_diagnostics;
    use crate::weights::WeightQuad;

    #[test]
    fn stratum_point_satisfies_constraints() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
        let u = singular_stratum_point(42).unwrap();
        let r = constraint_residual(&u, &spec).unwrap().norm();
        assert!(r < 1e-10, "residual {r:.3e}");
    }

    #[test]
    fn stratum_point_fixed_by_circle() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
        let u = singular_stratum_point(42).unwrap();
        for t in [0.3f64, 1.0, 2.5] {
            let lambda = Quaternion::new(t.cos(), t.sin(), 0.0, 0.0);
            let g = GroupElement::circle(lambda, t);
            let moved = action_apply(&u, &g, &spec).unwrap();
            assert!(diff_norm(&moved, &u) < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn stratum_point_has_killing_rank_three() {
        let spec = LevelSetSpec::triple(WeightTriple(1, 1, 1));
        let u = singular_stratum_point(42).unwrap();
        let (_, _, killing_rank, _) = point_diagnostics(&u, &spec);
        assert_eq!(killing_rank, 3);
    }

    #[test]
    fn pair_zero_witness_for_even_pair() {
        // gcd(p1, p2) = 2 for p = (2, 4, 5): zero pair 3, order 2.
        let spec = LevelSetSpec::triple(WeightTriple(2, 4, 5));
        let w = pair_zero_witness(&spec, 2, 2, 42).unwrap();
        assert!(w.residual < 1e-11);
        assert!(w.fix_error < 1e-10, "fix error {:.3e}", w.fix_error);
        // pair 3 really is zero
        assert!(w.u.entry(5).norm() < 1e-14);
        assert!(w.u.entry(6).norm() < 1e-14);
    }

    #[test]
    fn aligned_witness_for_signed_gcd_failure() {
        // (1, 3, 5): gcd(p1 - p2, p1 - p3) = 2.
        let spec = LevelSetSpec::triple(WeightTriple(1, 3, 5));
        let w = aligned_pair_witness(&spec, -1, -1, 2, 42, None).unwrap();
        assert!(w.residual < 1e-11);
        assert!(w.fix_error < 1e-10, "fix error {:.3e}", w.fix_error);
        assert!(w.u.entry(0).norm() < 1e-14);
    }

    #[test]
    fn aligned_witness_for_quad_failure() {
        // (1, 2, 3, 4): triple (1, 2, 4) fails gcd(1 + 2, 1 - 4) = 3.
        let spec = LevelSetSpec::quad(WeightQuad(1, 2, 3, 4));
        let w = aligned_pair_witness(&spec, 1, -1, 3, 42, Some([0, 1, 3])).unwrap();
        assert!(w.residual < 1e-11);
        assert!(w.fix_error < 1e-10, "fix error {:.3e}", w.fix_error);
    }
}
