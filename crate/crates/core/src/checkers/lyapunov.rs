//! Finite-time Lyapunov exponents by QR renormalization, and the
//! hyperbolic-splitting search that the nonhyperbolicity theorem predicts
//! must come back empty on every model flow.

use crate::checkers::catmap::CatMap;
use crate::error::{Error, Result};
use crate::flowzoo::ModelFlow;
use crate::geometry::ChartPoint;
use nalgebra::{SMatrix, SVector, Vector2, Vector3};
use serde::Serialize;

/// Modified Gram-Schmidt QR with positive diagonal; returns Q and diag(R).
fn mgs<const N: usize>(w: &SMatrix<f64, N, N>) -> (SMatrix<f64, N, N>, [f64; N]) {
    let mut q = *w;
    let mut r = [0.0; N];
    for j in 0..N {
        for i in 0..j {
            let qi = q.column(i).clone_owned();
            let d = q.column(j).dot(&qi);
            q.column_mut(j).axpy(-d, &qi, 1.0);
        }
        let n = q.column(j).norm();
        r[j] = n;
        if n > 0.0 {
            q.column_mut(j).scale_mut(1.0 / n);
        }
    }
    (q, r)
}

/// Accumulated exponents of a matrix cocycle over n steps spanning
/// total_time, sorted descending.
pub(crate) fn cocycle_exponents<const N: usize>(
    mut step: impl FnMut(usize) -> SMatrix<f64, N, N>,
    n_steps: usize,
    total_time: f64,
) -> [f64; N] {
    let mut q = SMatrix::<f64, N, N>::identity();
    let mut sums = [0.0; N];
    for k in 0..n_steps {
        let w = step(k) * q;
        let (q2, r) = mgs(&w);
        q = q2;
        for j in 0..N {
            sums[j] += r[j].ln();
        }
    }
    let mut out = sums.map(|s| s / total_time);
    out.sort_by(|a, b| b.partial_cmp(a).unwrap());
    out
}

/// Finite-time Lyapunov exponents of a model flow along the orbit of x,
/// with orthonormal renormalization every renorm_step time units.
pub fn lyapunov_spectrum(
    flow: &ModelFlow,
    x: &ChartPoint,
    horizon: f64,
    renorm_step: f64,
) -> Result<[f64; 3]> {
    if !(horizon > 0.0) || !(renorm_step > 0.0) {
        return Err(Error::InvalidParameter("horizon and renorm step must be positive".into()));
    }
    let n_steps = (horizon / renorm_step).ceil() as usize;
    let mut pts = Vec::with_capacity(n_steps);
    let mut p = *x;
    for _ in 0..n_steps {
        pts.push(p);
        p = flow.flow_at(&p, renorm_step)?;
    }
    let mats: Vec<_> = pts
        .iter()
        .map(|p| flow.metric_tangent(p, renorm_step))
        .collect::<Result<_>>()?;
    Ok(cocycle_exponents(
        |k| mats[k],
        n_steps,
        n_steps as f64 * renorm_step,
    ))
}

/// Exponents of the cat-map control by the same QR scheme.
pub fn cat_map_exponents(map: &CatMap, n_steps: usize) -> [f64; 2] {
    let a = map.tangent();
    cocycle_exponents(|_| a, n_steps, n_steps as f64)
}

/// Candidate contracted/expanded splitting found by the search.
#[derive(Debug, Clone, Serialize)]
pub struct SplittingCandidate {
    /// Unit transverse directions in the local metric frame (flow direction
    /// is the third frame vector).
    pub e_minus: Vec<f64>,
    pub e_plus: Vec<f64>,
    pub a_const: f64,
    pub lambda: f64,
    pub mu: f64,
}

#[derive(Debug, Clone, Serialize)]
pub enum SplittingOutcome {
    NoneFound,
    Candidate(SplittingCandidate),
}

impl SplittingOutcome {
    pub fn is_none_found(&self) -> bool {
        matches!(self, SplittingOutcome::NoneFound)
    }
}

const SCREEN_STEPS: usize = 30;
const SCREEN_SLACK: f64 = 1.5;
const DIRECTION_GRID: usize = 360;

/// Searches transverse unit directions for one contracted like A λ^t with
/// λ ≤ lambda_max along the orbit.
///
/// Pipeline per sample point: (1) screen a 360-direction angular grid
/// against the prefix of the orbit cocycle; (2) certify any suspicious point
/// by the full-horizon QR exponents — a genuine contracted direction forces
/// the smallest exponent below ln λ_max; (3) re-verify at horizon 2T and
/// recover the contracting/expanding directions from the prefix cocycle.
/// Floating point cannot follow a contracted direction for more than
/// ~ln(1/ε_machine) e-folds, so certification is exponent-based rather than
/// a pointwise norm check over all of [0, T].
pub fn hyperbolic_splitting_search(
    flow: &ModelFlow,
    points: &[ChartPoint],
    horizon: f64,
    lambda_max: f64,
) -> Result<SplittingOutcome> {
    if !(lambda_max > 0.0 && lambda_max < 1.0) {
        return Err(Error::InvalidParameter("lambda_max must be in (0,1)".into()));
    }
    if horizon <= 0.0 || points.is_empty() {
        return Ok(SplittingOutcome::NoneFound);
    }
    let step = 1.0f64.min(horizon);
    let n_steps = (horizon / step).ceil() as usize;
    for x in points {
        // Prefix cocycle products for the direction screen.
        let k_screen = SCREEN_STEPS.min(n_steps);
        let mut prefix = Vec::with_capacity(k_screen);
        let mut p = *x;
        let mut acc = SMatrix::<f64, 3, 3>::identity();
        for _ in 0..k_screen {
            acc = flow.metric_tangent(&p, step)? * acc;
            p = flow.flow_at(&p, step)?;
            prefix.push(acc);
        }
        let mut suspicious = false;
        for g in 0..DIRECTION_GRID {
            let theta = std::f64::consts::TAU * g as f64 / DIRECTION_GRID as f64;
            let w = Vector3::new(theta.cos(), theta.sin(), 0.0);
            for (k, pk) in prefix.iter().enumerate() {
                let t_k = (k + 1) as f64 * step;
                if (pk * w).norm() <= SCREEN_SLACK * lambda_max.powf(t_k) {
                    suspicious = true;
                    break;
                }
            }
            if suspicious {
                break;
            }
        }
        if !suspicious {
            continue;
        }
        // Certification at T and re-verification at 2T.
        let chi = lyapunov_spectrum(flow, x, horizon, step)?;
        if chi[2] > lambda_max.ln() {
            continue;
        }
        let chi2 = lyapunov_spectrum(flow, x, 2.0 * horizon, step)?;
        if chi2[2] > lambda_max.ln() {
            continue;
        }
        let (e_minus, e_plus) = prefix_singular_directions(&prefix);
        let lambda = chi2[2].exp();
        let mu = chi2[0].exp();
        // Visible-window prefactor along the certified direction.
        let k_vis = ((f64::EPSILON.ln().abs() / (2.0 * chi2[2].abs().max(1e-12))) as usize)
            .clamp(1, prefix.len());
        let mut a_const: f64 = 1.0;
        for (k, pk) in prefix.iter().take(k_vis).enumerate() {
            let t_k = (k + 1) as f64 * step;
            a_const = a_const.max((pk * e_minus).norm() / lambda.powf(t_k));
        }
        return Ok(SplittingOutcome::Candidate(SplittingCandidate {
            e_minus: e_minus.iter().copied().collect(),
            e_plus: e_plus.iter().copied().collect(),
            a_const,
            lambda,
            mu,
        }));
    }
    Ok(SplittingOutcome::NoneFound)
}

/// Same search for the discrete cat-map control.
pub fn cat_map_splitting_search(
    map: &CatMap,
    n_iterates: usize,
    lambda_max: f64,
) -> Result<SplittingOutcome> {
    if !(lambda_max > 0.0 && lambda_max < 1.0) {
        return Err(Error::InvalidParameter("lambda_max must be in (0,1)".into()));
    }
    if n_iterates == 0 {
        return Ok(SplittingOutcome::NoneFound);
    }
    let a = map.tangent();
    let k_screen = SCREEN_STEPS.min(n_iterates);
    let mut prefix = Vec::with_capacity(k_screen);
    let mut acc = SMatrix::<f64, 2, 2>::identity();
    for _ in 0..k_screen {
        acc = a * acc;
        prefix.push(acc);
    }
    let mut suspicious = false;
    for g in 0..DIRECTION_GRID {
        let theta = std::f64::consts::TAU * g as f64 / DIRECTION_GRID as f64;
        let w = Vector2::new(theta.cos(), theta.sin());
        for (k, pk) in prefix.iter().enumerate() {
            if (pk * w).norm() <= SCREEN_SLACK * lambda_max.powf((k + 1) as f64) {
                suspicious = true;
                break;
            }
        }
        if suspicious {
            break;
        }
    }
    if !suspicious {
        return Ok(SplittingOutcome::NoneFound);
    }
    let chi = cat_map_exponents(map, n_iterates);
    if chi[1] > lambda_max.ln() {
        return Ok(SplittingOutcome::NoneFound);
    }
    let chi2 = cat_map_exponents(map, 2 * n_iterates);
    if chi2[1] > lambda_max.ln() {
        return Ok(SplittingOutcome::NoneFound);
    }
    let (e_minus, e_plus) = prefix_singular_directions(&prefix);
    let lambda = chi2[1].exp();
    let k_vis = ((f64::EPSILON.ln().abs() / (2.0 * chi2[1].abs().max(1e-12))) as usize)
        .clamp(1, prefix.len());
    let mut a_const: f64 = 1.0;
    for (k, pk) in prefix.iter().take(k_vis).enumerate() {
        a_const = a_const.max((pk * e_minus).norm() / lambda.powf((k + 1) as f64));
    }
    Ok(SplittingOutcome::Candidate(SplittingCandidate {
        e_minus: e_minus.iter().copied().collect(),
        e_plus: e_plus.iter().copied().collect(),
        a_const,
        lambda,
        mu: chi2[0].exp(),
    }))
}

/// Most contracted / most expanded initial directions of the prefix
/// cocycle, from the SVD of a product inside the floating-point window.
fn prefix_singular_directions<const N: usize>(
    prefix: &[SMatrix<f64, N, N>],
) -> (SVector<f64, N>, SVector<f64, N>) {
    let k = prefix.len().min(18).max(1);
    let p = prefix[k - 1];
    let svd = p.svd(true, true);
    let vt = svd.v_t.expect("svd requested");
    // Rows of V^T are right singular vectors, singular values descending.
    let mut e_plus = SVector::<f64, N>::zeros();
    let mut e_minus = SVector::<f64, N>::zeros();
    for i in 0..N {
        e_plus[i] = vt[(0, i)];
        e_minus[i] = vt[(N - 1, i)];
    }
    (e_minus, e_plus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flowzoo::FlowFamily;
    use crate::geometry::{canonicalize_point, sample_point, Coords};
    use crate::test_rng;

    #[test]
    fn linear_flow_exponents_exactly_zero() {
        let flow = ModelFlow::default_flow(FlowFamily::LinearTorus3);
        let x = sample_point(flow.manifold(), &mut test_rng(4));
        let chi = lyapunov_spectrum(&flow, &x, 100.0, 1.0).unwrap();
        assert_eq!(chi, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn cat_map_exponents_match_log_eigenvalue() {
        let map = CatMap::standard();
        let chi = cat_map_exponents(&map, 1000);
        let expect = ((3.0 + 5f64.sqrt()) / 2.0).ln();
        assert!((chi[0] - expect).abs() < 1e-12);
        assert!((chi[1] + expect).abs() < 1e-12);
    }

    #[test]
    fn bundle_exponents_decay_like_log_t_over_t() {
        let flow = ModelFlow::default_flow(FlowFamily::TorusBundleEigenflow);
        let m = flow.manifold().clone();
        let x = canonicalize_point(&Coords::Bundle { m: [0.21, 0.55], t: 0.3 }, &m).unwrap();
        let chi_1k = lyapunov_spectrum(&flow, &x, 1e3, 1.0).unwrap();
        let chi_10k = lyapunov_spectrum(&flow, &x, 1e4, 1.0).unwrap();
        assert!(chi_1k[0] > 0.0 && chi_1k[0] < 0.02);
        assert!(chi_10k[0] < chi_1k[0]);
        assert!(chi_10k[0].abs() < 0.01);
        // Symmetric spectrum: shear has chi_min = -chi_max, middle 0.
        assert!((chi_10k[0] + chi_10k[2]).abs() < 1e-9);
    }

    #[test]
    fn search_rejects_model_flows_and_flags_cat_map() {
        let mut rng = test_rng(8);
        for family in [FlowFamily::LinearTorus3, FlowFamily::TorusBundleEigenflow] {
            let flow = ModelFlow::default_flow(family);
            let pts: Vec<_> = (0..5).map(|_| sample_point(flow.manifold(), &mut rng)).collect();
            let out = hyperbolic_splitting_search(&flow, &pts, 1e3, 0.99).unwrap();
            assert!(out.is_none_found(), "{family:?} produced a candidate");
        }
        let out = cat_map_splitting_search(&CatMap::standard(), 1000, 0.99).unwrap();
        let SplittingOutcome::Candidate(c) = out else {
            panic!("cat map must yield a candidate")
        };
        let expect = 2.0 / (3.0 + 5f64.sqrt());
        assert!((c.lambda - expect).abs() < 2e-3, "lambda {}", c.lambda);
        assert!(c.mu > 2.0);
        assert!(c.a_const >= 1.0 && c.a_const < 10.0);
    }

    #[test]
    fn zero_horizon_is_none_found() {
        let flow = ModelFlow::default_flow(FlowFamily::LinearTorus3);
        let pts = [sample_point(flow.manifold(), &mut test_rng(9))];
        let out = hyperbolic_splitting_search(&flow, &pts, 0.0, 0.99).unwrap();
        assert!(out.is_none_found());
        let out = cat_map_splitting_search(&CatMap::standard(), 0, 0.99).unwrap();
        assert!(out.is_none_found());
    }
}
