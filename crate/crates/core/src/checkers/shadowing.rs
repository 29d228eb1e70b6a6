//! Shadowing and expansivity falsifiers for isometric return maps.
//!
//! The drift pseudo-orbit x_{i+1} = f(x_i) + (δ/2) u accumulates a
//! displacement no true orbit can follow; for translation-like maps the
//! untraceability bound is analytic, otherwise a Lipschitz grid certificate
//! is produced (sound because the maps are isometries).

use crate::error::{Error, Result};
use crate::oracle;
use crate::sections::SectionSystem;
use serde::Serialize;

/// δ-pseudo-orbit on a section system's domain.
#[derive(Debug, Clone)]
pub struct PseudoOrbit {
    pub points: Vec<[f64; 2]>,
    pub delta: f64,
}

impl PseudoOrbit {
    /// Drift pseudo-orbit: each step follows the map and then slides by
    /// (δ/2) u along a fixed transverse unit direction u (the first frame
    /// vector).
    pub fn drift(map: &dyn SectionSystem, start: [f64; 2], delta: f64, length: usize) -> Self {
        let mut points = Vec::with_capacity(length + 1);
        let mut p = start;
        points.push(p);
        for _ in 0..length {
            let mut q = map.apply(p);
            q[0] = crate::geometry::wrap(q[0] + delta / 2.0);
            points.push(q);
            p = q;
        }
        Self { points, delta }
    }

    /// A true orbit packaged as a δ-pseudo-orbit.
    pub fn from_orbit(map: &dyn SectionSystem, start: [f64; 2], delta: f64, length: usize) -> Self {
        let mut points = Vec::with_capacity(length + 1);
        let mut p = start;
        points.push(p);
        for _ in 0..length {
            p = map.apply(p);
            points.push(p);
        }
        Self { points, delta }
    }

    /// d(f(x_i), x_{i+1}) < δ for all consecutive points.
    pub fn validate(&self, map: &dyn SectionSystem) -> bool {
        self.points
            .windows(2)
            .all(|w| map.dist(map.apply(w[0]), w[1]) < self.delta)
    }

    /// Max deviation of the orbit of `candidate` from the pseudo-orbit.
    pub fn tracer_deviation(&self, map: &dyn SectionSystem, candidate: [f64; 2]) -> f64 {
        let mut y = candidate;
        let mut dev: f64 = map.dist(y, self.points[0]);
        for x in &self.points[1..] {
            y = map.apply(y);
            dev = dev.max(map.dist(y, *x));
        }
        dev
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum TracingVerdict {
    TracedBy([f64; 2]),
    CertifiedUntraceable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CertificateMethod {
    AnalyticDrift,
    LipschitzGrid,
}

/// Verdict on ε-tracing of a pseudo-orbit, with the certified margin.
#[derive(Debug, Clone, Serialize)]
pub struct TracingCertificate {
    pub epsilon: f64,
    pub verdict: TracingVerdict,
    pub method: CertificateMethod,
    pub margin: f64,
}

/// Measured isometry defect of a section system over sampled pairs.
pub fn section_isometry_defect(map: &dyn SectionSystem, n_pairs: usize, n_iter: usize) -> f64 {
    let mut defect: f64 = 0.0;
    for i in 0..n_pairs {
        let a = 0.618_033_988_749_894_8 * i as f64;
        let mut x = [crate::geometry::wrap(a), crate::geometry::wrap(2.3 * a + 0.11)];
        let mut y = [
            crate::geometry::wrap(a + 0.07),
            crate::geometry::wrap(2.3 * a + 0.19),
        ];
        if map.dim() == 1 {
            x[1] = 0.0;
            y[1] = 0.0;
        }
        let d0 = map.dist(x, y);
        for _ in 0..n_iter {
            x = map.apply(x);
            y = map.apply(y);
            defect = defect.max((map.dist(x, y) - d0).abs());
        }
    }
    defect
}

/// Constructs the drift pseudo-orbit and certifies whether it can be
/// ε-traced. The map must be an isometry (checked); the pseudo-orbit length
/// is raised to at least ceil(4 ε / δ) so the accumulated drift defeats any
/// tracer.
pub fn falsify_shadowing(
    map: &dyn SectionSystem,
    delta: f64,
    epsilon: f64,
    length: usize,
) -> Result<(PseudoOrbit, TracingCertificate)> {
    if !(delta > 0.0) || !(epsilon > 0.0) {
        return Err(Error::InvalidParameter("delta and epsilon must be positive".into()));
    }
    let defect = section_isometry_defect(map, 16, 50);
    if defect > 1e-9 {
        return Err(Error::NotAnIsometry(defect));
    }
    let length = length.max((4.0 * epsilon / delta).ceil() as usize);
    let pseudo = PseudoOrbit::drift(map, [0.0, 0.0], delta, length);
    debug_assert!(pseudo.validate(map));

    // Everything is within ε of anything: any point traces.
    if epsilon >= map.diameter() {
        let candidate = [0.25, 0.25];
        let dev = pseudo.tracer_deviation(map, candidate);
        return Ok((
            pseudo,
            TracingCertificate {
                epsilon,
                verdict: TracingVerdict::TracedBy(candidate),
                method: CertificateMethod::AnalyticDrift,
                margin: epsilon - dev,
            },
        ));
    }

    if map.translation().is_some() {
        // f^i(y) = y + i b while x_i = x_0 + i b + i (δ/2) u; the deviation
        // of any tracer majorizes half the wrap distance between the first
        // and last drift offsets.
        let total = [length as f64 * delta / 2.0, 0.0];
        let bound = map.dist([0.0, 0.0], total) / 2.0;
        if bound >= epsilon {
            return Ok((
                pseudo,
                TracingCertificate {
                    epsilon,
                    verdict: TracingVerdict::CertifiedUntraceable,
                    method: CertificateMethod::AnalyticDrift,
                    margin: bound - epsilon,
                },
            ));
        }
        // Drift too small to certify: the midpoint of the sweep traces.
        let mid = [crate::geometry::wrap(total[0] / 2.0), 0.0];
        let dev = pseudo.tracer_deviation(map, mid);
        if dev <= epsilon {
            return Ok((
                pseudo,
                TracingCertificate {
                    epsilon,
                    verdict: TracingVerdict::TracedBy(mid),
                    method: CertificateMethod::AnalyticDrift,
                    margin: epsilon - dev,
                },
            ));
        }
    }

    // Grid certificate, sound for Lipschitz-1 maps.
    let spacing = epsilon / 10.0;
    match oracle::grid_trace_search(map, &pseudo, epsilon, spacing)? {
        oracle::GridTraceOutcome::Tracer(p) => Ok((
            pseudo,
            TracingCertificate {
                epsilon,
                verdict: TracingVerdict::TracedBy(p),
                method: CertificateMethod::LipschitzGrid,
                margin: 0.0,
            },
        )),
        oracle::GridTraceOutcome::NoneOnGrid { min_max_deviation } => {
            let cover = if map.dim() == 1 {
                spacing / 2.0
            } else {
                spacing * std::f64::consts::FRAC_1_SQRT_2
            };
            if min_max_deviation >= epsilon + cover {
                Ok((
                    pseudo,
                    TracingCertificate {
                        epsilon,
                        verdict: TracingVerdict::CertifiedUntraceable,
                        method: CertificateMethod::LipschitzGrid,
                        margin: min_max_deviation - epsilon,
                    },
                ))
            } else {
                Err(Error::CertificateInconclusive(format!(
                    "grid min-max deviation {min_max_deviation:.4} within the cover slack of epsilon {epsilon}"
                )))
            }
        }
    }
}

/// Pair of points refuting a candidate expansive constant.
#[derive(Debug, Clone, Serialize)]
pub struct ExpansivityCounterexample {
    pub e: f64,
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub initial_separation: f64,
    pub max_separation: f64,
    /// Max |d(fⁿx, fⁿy) − d(x, y)| over the iterate range.
    pub separation_drift: f64,
}

/// For each candidate expansive constant e, produces a pair at distance e/2
/// whose separation never exceeds its initial value (isometry), refuting e.
pub fn falsify_expansivity(
    map: &dyn SectionSystem,
    e_grid: &[f64],
    n_max: usize,
) -> Result<Vec<ExpansivityCounterexample>> {
    let defect = section_isometry_defect(map, 16, 50);
    if defect > 1e-9 {
        return Err(Error::NotAnIsometry(defect));
    }
    let mut out = Vec::with_capacity(e_grid.len());
    for &e in e_grid {
        if !(e > 0.0) {
            return Err(Error::InvalidParameter("expansive constants must be positive".into()));
        }
        if e >= map.diameter() {
            return Err(Error::InvalidParameter(format!(
                "candidate constant {e} is not below the section diameter {}",
                map.diameter()
            )));
        }
        let x = if map.dim() == 1 { [0.2, 0.0] } else { [0.2, 0.3] };
        let y = [crate::geometry::wrap(x[0] + e / 2.0), x[1]];
        let d0 = map.dist(x, y);
        let mut max_sep = d0;
        let mut drift: f64 = 0.0;
        let mut a = x;
        let mut b = y;
        for _ in 0..n_max {
            a = map.apply(a);
            b = map.apply(b);
            let d = map.dist(a, b);
            max_sep = max_sep.max(d);
            drift = drift.max((d - d0).abs());
        }
        a = x;
        b = y;
        for _ in 0..n_max {
            a = map.apply_inv(a);
            b = map.apply_inv(b);
            let d = map.dist(a, b);
            max_sep = max_sep.max(d);
            drift = drift.max((d - d0).abs());
        }
        out.push(ExpansivityCounterexample {
            e,
            x,
            y,
            initial_separation: d0,
            max_separation: max_sep,
            separation_drift: drift,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checkers::catmap::CatMap;
    use crate::sections::ReducedReturnMap;

    fn golden_rotation() -> ReducedReturnMap {
        ReducedReturnMap::CircleRotation {
            angle: (5f64.sqrt() - 1.0) / 2.0,
        }
    }

    #[test]
    fn rotation_drift_certified_untraceable() {
        let map = golden_rotation();
        let (pseudo, cert) = falsify_shadowing(&map, 0.01, 0.1, 100).unwrap();
        assert!(pseudo.validate(&map));
        assert_eq!(cert.verdict, TracingVerdict::CertifiedUntraceable);
        assert_eq!(cert.method, CertificateMethod::AnalyticDrift);
        assert!(cert.margin >= 0.15 - 1e-12, "margin {}", cert.margin);
    }

    #[test]
    fn true_orbit_traces_itself() {
        let map = golden_rotation();
        let pseudo = PseudoOrbit::from_orbit(&map, [0.3, 0.0], 0.01, 200);
        assert!(pseudo.validate(&map));
        let dev = pseudo.tracer_deviation(&map, [0.3, 0.0]);
        assert!(dev < 1e-12);
    }

    #[test]
    fn huge_epsilon_is_traced_by_anything() {
        let map = golden_rotation();
        let (_, cert) = falsify_shadowing(&map, 0.01, 10.0, 100).unwrap();
        assert!(matches!(cert.verdict, TracingVerdict::TracedBy(_)));
    }

    #[test]
    fn cat_map_rejected_as_non_isometry() {
        let map = CatMap::standard();
        assert!(matches!(
            falsify_shadowing(&map, 0.01, 0.1, 100),
            Err(Error::NotAnIsometry(_))
        ));
    }

    #[test]
    fn expansivity_counterexamples_constant_separation() {
        for map in [
            ReducedReturnMap::TorusTranslation { shift: [0.57735, 0.8165] },
            golden_rotation(),
            ReducedReturnMap::Identity,
        ] {
            let out = falsify_expansivity(&map, &[0.01, 0.05, 0.1], 10_000).unwrap();
            for c in out {
                assert!(c.initial_separation < c.e);
                assert!(
                    c.separation_drift < 1e-9,
                    "{}: drift {:.2e}",
                    map.label(),
                    c.separation_drift
                );
            }
        }
    }

    #[test]
    fn expansivity_rejects_zero_constant() {
        let map = golden_rotation();
        assert!(falsify_expansivity(&map, &[0.0], 10).is_err());
    }
}
