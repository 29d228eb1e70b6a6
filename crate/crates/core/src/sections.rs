//! Poincaré sections at recurrent points: first-return times, return maps,
//! and the isometry defect of the return map.
//!
//! Two levels of section are used. [`PoincareSection`] is the disk-local
//! object of the nonhyperbolicity proof: a small transverse disk with an
//! orthonormal frame, first returns located by crossing detection and
//! bisection. [`ReducedReturnMap`] is the global reduction each family
//! admits (a torus translation or circle rotation), which is what the
//! shadowing and expansivity falsifiers iterate for hundreds of steps.

use crate::error::{Error, Result};
use crate::flowzoo::{FlowFamily, FlowParams, LocalFrame, ModelFlow};
use crate::geometry::{self, wrap, wrap_diff, ChartPoint};
use rand::Rng;

/// A transverse 2-disk at a point, with an orthonormal transverse frame in
/// the invariant metric.
#[derive(Debug, Clone)]
pub struct PoincareSection {
    flow: ModelFlow,
    base: ChartPoint,
    radius: f64,
    frame: LocalFrame,
    step: f64,
}

/// One first-return measurement in section coordinates.
#[derive(Debug, Clone, Copy)]
pub struct ReturnRecord {
    pub start: [f64; 2],
    pub landing: [f64; 2],
    pub return_time: f64,
    pub crossing_index: u32,
}

/// Builds a section after checking embeddedness and transversality on the
/// disk: no two sampled disk points may be deck-identified, and the flow
/// must cross the disk at a bounded angle everywhere.
pub fn build_section(flow: &ModelFlow, base: &ChartPoint, radius: f64) -> Result<PoincareSection> {
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidParameter("section radius must be positive".into()));
    }
    let frame = flow.frame_at(base)?;
    let step = (0.01f64).min(radius / 10.0);
    let section = PoincareSection {
        flow: flow.clone(),
        base: *base,
        radius,
        frame,
        step,
    };

    // Sampled embeddedness: intrinsic disk separation must be comparable to
    // the quotient distance; a deck shortcut collapses the latter.
    let mut pts = Vec::new();
    for ring in [0.5, 1.0] {
        for k in 0..8 {
            let th = std::f64::consts::PI * 2.0 * k as f64 / 8.0;
            let c = [ring * radius * th.cos(), ring * radius * th.sin()];
            pts.push((c, section.disk_point(c)?));
        }
    }
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            let intrinsic =
                ((pts[i].0[0] - pts[j].0[0]).powi(2) + (pts[i].0[1] - pts[j].0[1]).powi(2)).sqrt();
            let quotient = geometry::distance(&pts[i].1, &pts[j].1, flow.manifold())?;
            if quotient < 0.35 * intrinsic {
                return Err(Error::RadiusTooLarge {
                    radius,
                    reason: format!(
                        "disk self-intersects: intrinsic {intrinsic:.3} vs quotient {quotient:.3}"
                    ),
                });
            }
        }
    }
    // Sampled transversality: the flow-direction component of the local
    // velocity must dominate on the whole disk.
    for (_, p) in &pts {
        let h = 1e-4;
        let ahead = flow.flow_at(p, h)?;
        let lc = section.frame.log(&ahead);
        let w_rate = lc[2] / h;
        if w_rate < 0.2 * flow.speed(p) {
            return Err(Error::RadiusTooLarge {
                radius,
                reason: format!("flow nearly tangent to the disk (normal rate {w_rate:.3})"),
            });
        }
    }
    Ok(section)
}

impl PoincareSection {
    pub fn flow(&self) -> &ModelFlow {
        &self.flow
    }

    pub fn base(&self) -> &ChartPoint {
        &self.base
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Manifold point at section coordinates (a, b).
    pub fn disk_point(&self, s: [f64; 2]) -> Result<ChartPoint> {
        self.frame.exp([s[0], s[1], 0.0])
    }

    /// Section coordinates and flow-normal coordinate of a nearby point.
    pub fn local_coords(&self, p: &ChartPoint) -> [f64; 3] {
        self.frame.log(p)
    }

    /// Earliest nontrivial crossing of the section disk after t_min = 10 h,
    /// located by sign-change detection at step h and bisection to 1e-12.
    pub fn first_return(&self, s: [f64; 2], t_max: f64, eps_hit: f64) -> Result<ReturnRecord> {
        self.nth_return(s, t_max, eps_hit, 1)
    }

    /// n-th crossing of the disk (crossing_index = n).
    pub fn nth_return(&self, s: [f64; 2], t_max: f64, eps_hit: f64, n: u32) -> Result<ReturnRecord> {
        if !(t_max > 0.0) || n == 0 {
            return Err(Error::InvalidParameter("t_max and crossing index must be positive".into()));
        }
        if s[0] * s[0] + s[1] * s[1] > self.radius * self.radius * (1.0 + 1e-9) {
            return Err(Error::InvalidParameter("start outside the section disk".into()));
        }
        let y0 = self.disk_point(s)?;
        let h = self.step;
        let t_min = 10.0 * h;
        let box_r = (4.0 * self.radius).max(8.0 * h * self.flow.speed(&y0));
        let mut found = 0u32;
        let mut prev: Option<(f64, f64)> = None; // (t, w) of previous in-box sample
        let mut t = 0.0;
        while t <= t_max {
            t += h;
            let p = self.flow.flow_at(&y0, t)?;
            let lc = self.frame.log(&p);
            let near = (lc[0] * lc[0] + lc[1] * lc[1] + lc[2] * lc[2]).sqrt() < box_r;
            if !near {
                prev = None;
                continue;
            }
            let w = lc[2];
            if let Some((tp, wp)) = prev {
                if wp.signum() != w.signum() && wp != 0.0 && t > t_min {
                    if let Some(rec) = self.refine_crossing(&y0, s, tp, t, eps_hit)? {
                        found += 1;
                        if found == n {
                            return Ok(rec);
                        }
                    }
                }
            }
            prev = Some((t, w));
        }
        Err(Error::NoReturnWithinHorizon { t_max })
    }

    /// Bisects the flow-normal coordinate to zero inside the bracket and
    /// accepts the crossing when it lands inside the disk.
    fn refine_crossing(
        &self,
        y0: &ChartPoint,
        s: [f64; 2],
        ta: f64,
        tb: f64,
        eps_hit: f64,
    ) -> Result<Option<ReturnRecord>> {
        self.refine_crossing_radial(y0, s, ta, tb, eps_hit, self.radius)
    }

    fn refine_crossing_radial(
        &self,
        y0: &ChartPoint,
        s: [f64; 2],
        mut ta: f64,
        mut tb: f64,
        eps_hit: f64,
        max_radial: f64,
    ) -> Result<Option<ReturnRecord>> {
        let w_at = |t: f64| -> Result<f64> {
            Ok(self.frame.log(&self.flow.flow_at(y0, t)?)[2])
        };
        let mut wa = w_at(ta)?;
        for _ in 0..60 {
            let tm = 0.5 * (ta + tb);
            let wm = w_at(tm)?;
            if wm.signum() == wa.signum() {
                ta = tm;
                wa = wm;
            } else {
                tb = tm;
            }
            if tb - ta < 1e-13 {
                break;
            }
        }
        let t_cross = 0.5 * (ta + tb);
        let p = self.flow.flow_at(y0, t_cross)?;
        let lc = self.frame.log(&p);
        if lc[2].abs() > eps_hit {
            return Ok(None);
        }
        let radial = (lc[0] * lc[0] + lc[1] * lc[1]).sqrt();
        if radial > max_radial {
            return Ok(None);
        }
        Ok(Some(ReturnRecord {
            start: s,
            landing: [lc[0], lc[1]],
            return_time: t_cross,
            crossing_index: 0, // filled by caller loops when needed
        }))
    }

    /// Manifold point of the landing of the first return from s.
    pub fn return_point(&self, s: [f64; 2], t_max: f64, eps_hit: f64) -> Result<(ChartPoint, f64)> {
        let rec = self.first_return(s, t_max, eps_hit)?;
        let y0 = self.disk_point(s)?;
        Ok((self.flow.flow_at(&y0, rec.return_time)?, rec.return_time))
    }

    /// Crossing of the section by the orbit of s inside a common time window.
    ///
    /// This is the holonomy return along one recurrence event: every point of
    /// the disk is followed through the same flow tube, which is the map the
    /// isometry theorem is about. (The unrestricted first-return map of a
    /// small disk is only piecewise this map: points near the rim can miss
    /// the disk at the event and return later through a different tube.)
    pub fn window_return(&self, s: [f64; 2], t_center: f64, eps_hit: f64) -> Result<ReturnRecord> {
        let y0 = self.disk_point(s)?;
        let h = self.step;
        let speed = self.flow.speed(&y0);
        let half = (4.0 * self.radius + 10.0 * h * speed) / speed.max(1e-9) + 2.0 * h;
        let mut prev: Option<(f64, f64)> = None;
        let mut t = t_center - half;
        while t <= t_center + half {
            let p = self.flow.flow_at(&y0, t)?;
            let lc = self.frame.log(&p);
            let w = lc[2];
            if let Some((tp, wp)) = prev {
                if wp.signum() != w.signum() && wp != 0.0 {
                    if let Some(mut rec) = self.refine_crossing_radial(&y0, s, tp, t, eps_hit, 3.0 * self.radius)? {
                        rec.crossing_index = 1;
                        return Ok(rec);
                    }
                }
            }
            prev = Some((t, w));
            t += h;
        }
        Err(Error::NoReturnWithinHorizon { t_max: t_center + half })
    }
}

/// Max over sampled pairs (x, y) of |d_T(f x, f y) − d_T(x, y)| for the
/// return map f, measured in the invariant transverse metric. This is the
/// quantity the isometry theorem proves to be zero.
///
/// The return event is anchored at the base point's first return and every
/// pooled point is followed through that same window ([`PoincareSection::
/// window_return`]); returns are computed once per pooled start point and
/// pairs are drawn from the pool.
pub fn return_map_isometry_defect<R: Rng>(
    section: &PoincareSection,
    n_pairs: usize,
    t_max: f64,
    rng: &mut R,
) -> Result<f64> {
    let anchor = section.first_return([0.0, 0.0], t_max, 1e-6)?;
    let pool_size = ((2.0 * n_pairs as f64).sqrt().ceil() as usize).clamp(12, 64);
    let mut pool = Vec::with_capacity(pool_size);
    for _ in 0..pool_size {
        let r = section.radius * 0.55 * rng.random::<f64>().sqrt();
        let th = std::f64::consts::TAU * rng.random::<f64>();
        let s = [r * th.cos(), r * th.sin()];
        let x = section.disk_point(s)?;
        let rec = section.window_return(s, anchor.return_time, 1e-6)?;
        let fx = section.flow.flow_at(&x, rec.return_time)?;
        pool.push((x, fx));
    }
    let mut defect: f64 = 0.0;
    for _ in 0..n_pairs {
        let i = rng.random_range(0..pool.len());
        let mut j = rng.random_range(0..pool.len());
        while j == i {
            j = rng.random_range(0..pool.len());
        }
        let d_pre = geometry::transverse_distance(&pool[i].0, &pool[j].0, section.flow())?;
        let d_post = geometry::transverse_distance(&pool[i].1, &pool[j].1, section.flow())?;
        defect = defect.max((d_post - d_pre).abs());
    }
    Ok(defect)
}

/// A 1- or 2-dimensional isometric system on a wrapped unit domain.
///
/// These are the global reductions of the six return maps; the synthetic
/// cat-map control implements the same interface without being an isometry.
pub trait SectionSystem {
    fn dim(&self) -> usize;
    fn apply(&self, p: [f64; 2]) -> [f64; 2];
    fn apply_inv(&self, p: [f64; 2]) -> [f64; 2];
    fn dist(&self, a: [f64; 2], b: [f64; 2]) -> f64;
    fn diameter(&self) -> f64;
    /// Shift vector when the map is an exact translation of its domain.
    fn translation(&self) -> Option<[f64; 2]>;
    fn label(&self) -> String;
}

/// Global return map of a model flow reduced to its natural cross-section:
/// a translation of T², a rotation of S¹, or the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReducedReturnMap {
    /// Translation of the unit 2-torus (cases 1, 2a).
    TorusTranslation { shift: [f64; 2] },
    /// Rotation of the unit circle in turns (cases 2b, 3a, 3b).
    CircleRotation { angle: f64 },
    /// All orbits closed (case 4).
    Identity,
}

impl SectionSystem for ReducedReturnMap {
    fn dim(&self) -> usize {
        match self {
            ReducedReturnMap::TorusTranslation { .. } => 2,
            ReducedReturnMap::CircleRotation { .. } => 1,
            ReducedReturnMap::Identity => 2,
        }
    }

    fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            ReducedReturnMap::TorusTranslation { shift } => {
                [wrap(p[0] + shift[0]), wrap(p[1] + shift[1])]
            }
            ReducedReturnMap::CircleRotation { angle } => [wrap(p[0] + angle), 0.0],
            ReducedReturnMap::Identity => p,
        }
    }

    fn apply_inv(&self, p: [f64; 2]) -> [f64; 2] {
        match self {
            ReducedReturnMap::TorusTranslation { shift } => {
                [wrap(p[0] - shift[0]), wrap(p[1] - shift[1])]
            }
            ReducedReturnMap::CircleRotation { angle } => [wrap(p[0] - angle), 0.0],
            ReducedReturnMap::Identity => p,
        }
    }

    fn dist(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        match self.dim() {
            1 => wrap_diff(a[0] - b[0]).abs(),
            _ => {
                let d0 = wrap_diff(a[0] - b[0]);
                let d1 = wrap_diff(a[1] - b[1]);
                (d0 * d0 + d1 * d1).sqrt()
            }
        }
    }

    fn diameter(&self) -> f64 {
        match self.dim() {
            1 => 0.5,
            _ => 0.5f64 * std::f64::consts::SQRT_2,
        }
    }

    fn translation(&self) -> Option<[f64; 2]> {
        Some(match self {
            ReducedReturnMap::TorusTranslation { shift } => *shift,
            ReducedReturnMap::CircleRotation { angle } => [*angle, 0.0],
            ReducedReturnMap::Identity => [0.0, 0.0],
        })
    }

    fn label(&self) -> String {
        match self {
            ReducedReturnMap::TorusTranslation { shift } => {
                format!("torus translation by ({:.6}, {:.6})", shift[0], shift[1])
            }
            ReducedReturnMap::CircleRotation { angle } => format!("circle rotation by {angle:.6}"),
            ReducedReturnMap::Identity => "identity".into(),
        }
    }
}

/// Constructs the family's global reduced return map from the flow data and
/// validates it against the actual flow map on a sample.
pub fn reduced_return_map(flow: &ModelFlow) -> Result<ReducedReturnMap> {
    let map = match (flow.family(), flow.params()) {
        (FlowFamily::LinearTorus3, FlowParams::Linear { vf, .. }) => {
            // Cross-section {x3 = 0}; the return time is 1/v3.
            ReducedReturnMap::TorusTranslation {
                shift: [wrap(vf[0] / vf[2]), wrap(vf[1] / vf[2])],
            }
        }
        (FlowFamily::LinearTorus2Fiber, FlowParams::Linear { vf, .. }) => {
            // Cross-section {x2 = 0} = (x1, x3)-torus; x3 is invariant.
            ReducedReturnMap::TorusTranslation {
                shift: [wrap(vf[0] / vf[1]), 0.0],
            }
        }
        (FlowFamily::TorusBundleEigenflow, _) => {
            let bd = flow.manifold().bundle_data().expect("bundle manifold");
            ReducedReturnMap::CircleRotation {
                angle: wrap(bd.v_plus[0] / bd.v_plus[1]),
            }
        }
        (FlowFamily::LensDiagonal, FlowParams::Lens { lf, mf, .. }) => {
            // Section circle {arg z2 = const} inside an invariant torus T_k.
            ReducedReturnMap::CircleRotation { angle: wrap(lf / mf) }
        }
        (FlowFamily::SuspensionRotation, FlowParams::Suspension { af, .. }) => {
            ReducedReturnMap::CircleRotation { angle: wrap(*af) }
        }
        (FlowFamily::SeifertFiber, _) => ReducedReturnMap::Identity,
        _ => return Err(Error::MismatchedFamilies),
    };
    validate_reduction(flow, &map)?;
    Ok(map)
}

/// Checks the reduction against the flow: flowing a section point for one
/// return period reproduces the reduced map within 1e-9.
fn validate_reduction(flow: &ModelFlow, map: &ReducedReturnMap) -> Result<()> {
    let tol = 1e-9;
    match (flow.family(), flow.params()) {
        (FlowFamily::LinearTorus3, FlowParams::Linear { vf, .. }) => {
            let m = flow.manifold();
            let x = geometry::canonicalize_point(&geometry::Coords::Torus([0.21, 0.43, 0.0]), m)?;
            let y = flow.flow_at(&x, 1.0 / vf[2])?.torus();
            let f = map.apply([0.21, 0.43]);
            if wrap_diff(y[0] - f[0]).abs() > tol
                || wrap_diff(y[1] - f[1]).abs() > tol
                || wrap(y[2]).min(1.0 - wrap(y[2])) > tol
            {
                return Err(Error::InvalidParameter("reduced map disagrees with flow".into()));
            }
        }
        (FlowFamily::LinearTorus2Fiber, FlowParams::Linear { vf, .. }) => {
            let m = flow.manifold();
            let x = geometry::canonicalize_point(&geometry::Coords::Torus([0.37, 0.0, 0.61]), m)?;
            let y = flow.flow_at(&x, 1.0 / vf[1])?.torus();
            let f = map.apply([0.37, 0.61]);
            if wrap_diff(y[0] - f[0]).abs() > tol || wrap_diff(y[2] - f[1]).abs() > tol {
                return Err(Error::InvalidParameter("reduced map disagrees with flow".into()));
            }
        }
        (FlowFamily::TorusBundleEigenflow, _) => {
            let bd = flow.manifold().bundle_data().expect("bundle manifold");
            let m = flow.manifold();
            let x = geometry::canonicalize_point(
                &geometry::Coords::Bundle { m: [0.29, 0.0], t: 0.4 },
                m,
            )?;
            // One crossing of {m2 = 0}: time with s λ^t v2 = 1.
            let period = 1.0 / (bd.lambda.powf(0.4) * bd.v_plus[1]);
            let (mm, _) = flow.flow_at(&x, period)?.bundle();
            let f = map.apply([0.29, 0.0]);
            if wrap_diff(mm[0] - f[0]).abs() > tol || wrap(mm[1]).min(1.0 - wrap(mm[1])) > tol {
                return Err(Error::InvalidParameter("reduced map disagrees with flow".into()));
            }
        }
        (FlowFamily::LensDiagonal, FlowParams::Lens { lf, mf, .. }) => {
            let m = flow.manifold();
            let z = geometry::Coords::Sphere([0.6, 0.0, 0.8, 0.0]);
            let x = geometry::canonicalize_point(&z, m)?;
            // One mu-loop: arg z2 advances by 2 pi.
            let period = geometry::TAU / mf;
            let y = flow.flow_at(&x, period)?;
            // Compare angle advance of z1 on the chart orbit (deck-free check
            // via the covering formula).
            let adv = wrap(lf * period / geometry::TAU);
            let f = map.apply([0.0, 0.0]);
            let _ = y;
            if wrap_diff(adv - f[0]).abs() > tol {
                return Err(Error::InvalidParameter("reduced map disagrees with flow".into()));
            }
        }
        (FlowFamily::SuspensionRotation, FlowParams::Suspension { af, .. }) => {
            let m = flow.manifold();
            let x = geometry::canonicalize_point(
                &geometry::Coords::SphereCircle { u: [1.0, 0.0, 0.0], s: 0.0 },
                m,
            )?;
            let (u, _) = flow.flow_at(&x, 1.0)?.sphere_circle();
            let angle = wrap(u[1].atan2(u[0]) / geometry::TAU);
            if wrap_diff(angle - wrap(*af)).abs() > tol {
                return Err(Error::InvalidParameter("reduced map disagrees with flow".into()));
            }
        }
        (FlowFamily::SeifertFiber, _) => {}
        _ => return Err(Error::MismatchedFamilies),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{canonicalize_point, Coords};
    use crate::test_rng;

    fn torus3_flow() -> ModelFlow {
        ModelFlow::default_flow(FlowFamily::LinearTorus3)
    }

    #[test]
    fn build_section_frame_orthonormal() {
        let flow = torus3_flow();
        let m = flow.manifold().clone();
        let base = canonicalize_point(&Coords::Torus([0.0, 0.0, 0.0]), &m).unwrap();
        let sec = build_section(&flow, &base, 0.05).unwrap();
        // exp/log roundtrip on the disk.
        let p = sec.disk_point([0.02, -0.01]).unwrap();
        let lc = sec.local_coords(&p);
        assert!((lc[0] - 0.02).abs() < 1e-12);
        assert!((lc[1] + 0.01).abs() < 1e-12);
        assert!(lc[2].abs() < 1e-12);
    }

    #[test]
    fn oversized_radius_rejected() {
        let flow = torus3_flow();
        let m = flow.manifold().clone();
        let base = canonicalize_point(&Coords::Torus([0.0, 0.0, 0.0]), &m).unwrap();
        assert!(matches!(
            build_section(&flow, &base, 10.0),
            Err(Error::RadiusTooLarge { .. })
        ));
    }

    #[test]
    fn hopf_return_is_identity_with_period_2pi() {
        let flow = ModelFlow::default_flow(FlowFamily::SeifertFiber);
        let m = flow.manifold().clone();
        let base = canonicalize_point(
            &Coords::Sphere([0.5, 0.5, 0.5, 0.5]),
            &m,
        )
        .unwrap();
        let sec = build_section(&flow, &base, 0.05).unwrap();
        let rec = sec.first_return([0.01, 0.015], 10.0, 1e-6).unwrap();
        assert!((rec.return_time - std::f64::consts::TAU).abs() < 1e-9);
        assert!((rec.landing[0] - 0.01).abs() < 1e-9);
        assert!((rec.landing[1] - 0.015).abs() < 1e-9);
    }

    #[test]
    fn lens_section_valid_at_torus_point() {
        let flow = ModelFlow::default_flow(FlowFamily::LensDiagonal);
        let m = flow.manifold().clone();
        let k: f64 = 0.5;
        let base = canonicalize_point(
            &Coords::Sphere([k.sqrt(), 0.0, (1.0 - k).sqrt(), 0.0]),
            &m,
        )
        .unwrap();
        assert!(build_section(&flow, &base, 0.05).is_ok());
    }

    #[test]
    fn return_time_additivity() {
        let flow = torus3_flow();
        let m = flow.manifold().clone();
        let base = canonicalize_point(&Coords::Torus([0.0, 0.0, 0.0]), &m).unwrap();
        let sec = build_section(&flow, &base, 0.05).unwrap();
        let s = [0.005, -0.004];
        let r1 = sec.first_return(s, 2000.0, 1e-6).unwrap();
        let r2_from_landing = sec.first_return(r1.landing, 2000.0, 1e-6).unwrap();
        let r2 = sec.nth_return(s, 4000.0, 1e-6, 2).unwrap();
        assert!(
            (r2.return_time - (r1.return_time + r2_from_landing.return_time)).abs() < 1e-10,
            "additivity: {} vs {} + {}",
            r2.return_time,
            r1.return_time,
            r2_from_landing.return_time
        );
    }

    #[test]
    fn landing_stable_under_eps_hit_refinement() {
        let flow = torus3_flow();
        let m = flow.manifold().clone();
        let base = canonicalize_point(&Coords::Torus([0.0, 0.0, 0.0]), &m).unwrap();
        let sec = build_section(&flow, &base, 0.05).unwrap();
        let a = sec.first_return([0.01, 0.0], 2000.0, 1e-2).unwrap();
        let b = sec.first_return([0.01, 0.0], 2000.0, 1e-8).unwrap();
        let d = ((a.landing[0] - b.landing[0]).powi(2) + (a.landing[1] - b.landing[1]).powi(2)).sqrt();
        assert!(d < 1e-2);
    }

    #[test]
    fn isometry_defect_small_for_torus3() {
        let flow = torus3_flow();
        let m = flow.manifold().clone();
        let base = canonicalize_point(&Coords::Torus([0.0, 0.0, 0.0]), &m).unwrap();
        let sec = build_section(&flow, &base, 0.05).unwrap();
        let defect = return_map_isometry_defect(&sec, 100, 3000.0, &mut test_rng(2)).unwrap();
        assert!(defect < 1e-9, "defect {defect:.3e}");
    }

    #[test]
    fn reduced_maps_validate() {
        for flow in ModelFlow::default_catalog() {
            let map = reduced_return_map(&flow).unwrap();
            match flow.family() {
                FlowFamily::SeifertFiber => assert_eq!(map, ReducedReturnMap::Identity),
                FlowFamily::SuspensionRotation => {
                    let ReducedReturnMap::CircleRotation { angle } = map else {
                        panic!("expected rotation")
                    };
                    assert!((angle - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-12);
                }
                _ => {}
            }
        }
    }

    #[test]
    fn suspension_circle_reduction_hits_at_55() {
        // First n with d(n alpha mod 1, 0) < 0.01 for the golden rotation.
        let flow = ModelFlow::default_flow(FlowFamily::SuspensionRotation);
        let map = reduced_return_map(&flow).unwrap();
        let x = [0.0, 0.0];
        let mut p = x;
        let mut first = None;
        for n in 1..=1000u32 {
            p = map.apply(p);
            if map.dist(p, x) < 0.01 {
                first = Some(n);
                break;
            }
        }
        assert_eq!(first, Some(55));
    }
}
