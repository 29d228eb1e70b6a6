//! The five closed 3-manifolds as chart domains with deck groups and
//! explicit flow-invariant metrics.
//!
//! Chart conventions:
//! - Tori store angles in turns, i.e. in [0, 1) per periodic direction, so
//!   fundamental-domain reduction is exact mod-1 arithmetic.
//! - Sphere-based charts store a unit 4-vector (Re z₁, Im z₁, Re z₂, Im z₂).
//! - S²×S¹ stores a unit 3-vector plus a turn coordinate.
//!
//! Metrics: flat on T³ and T²×S¹, the Sol-type metric of [`sol`] on the
//! hyperbolic torus bundle, the round metric descending to lens quotients,
//! and round × flat on S²×S¹. Quotient distance is the minimum of the chart
//! distance over a deck-transformation window (full group for lens spaces).

pub mod sol;
pub mod sphere;

use crate::error::{Error, Result};
use crate::flowzoo::{FlowFamily, FlowParams, ModelFlow};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

pub use sol::BundleData;

pub const TAU: f64 = 2.0 * PI;

/// Manifold family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Family {
    Torus3,
    Torus2xCircle,
    HyperbolicTorusBundle,
    LensQuotient,
    Sphere2xCircle,
}

/// Finite cyclic deck group of a lens quotient, generated by
/// (z₁, z₂) ↦ (e^{2πi/p} z₁, e^{2πi/q} z₂).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LensData {
    pub p: u32,
    pub q: u32,
    /// Order of the generator, lcm(p, q).
    pub order: u32,
}

impl LensData {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || q == 0 {
            return Err(Error::InvalidParameter("lens parameters must be positive".into()));
        }
        let order = lcm_u32(p, q);
        let data = Self { p, q, order };
        data.check_free_on_generic_points()?;
        Ok(data)
    }

    /// Rotation angles of the k-th group element.
    pub fn angles(&self, k: u32) -> (f64, f64) {
        (
            TAU * (k % self.p) as f64 / self.p as f64,
            TAU * (k % self.q) as f64 / self.q as f64,
        )
    }

    /// Enumerates every nontrivial group element and verifies it moves each
    /// of a fixed set of generic sample points (z₁ z₂ ≠ 0). When p ≠ q the
    /// two core circles z₁ = 0 and z₂ = 0 are fixed by proper subgroups;
    /// those are exactly the closed-orbit cores of the diagonal flows, and
    /// the action is free off them.
    fn check_free_on_generic_points(&self) -> Result<()> {
        let samples = [
            sphere::normalize4(&[0.6, 0.3, 0.5, 0.4]),
            sphere::normalize4(&[0.2, -0.7, 0.4, 0.1]),
            sphere::normalize4(&[-0.3, 0.4, -0.2, 0.8]),
        ];
        for k in 1..self.order {
            let (a1, a2) = self.angles(k);
            for z in &samples {
                let img = sphere::rotate_pair(z, a1, a2);
                let moved = (0..4).map(|i| (img[i] - z[i]).powi(2)).sum::<f64>().sqrt();
                if moved < 1e-9 {
                    return Err(Error::NonFreeAction(format!(
                        "element {k} of {} fixes a generic sample",
                        self.order
                    )));
                }
            }
        }
        Ok(())
    }
}

fn lcm_u32(a: u32, b: u32) -> u32 {
    fn gcd(mut a: u32, mut b: u32) -> u32 {
        while b != 0 {
            let t = a % b;
            a = b;
            b = t;
        }
        a
    }
    a / gcd(a, b) * b
}

/// One of the five closed 3-manifolds, as a chart domain with deck group.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelManifold {
    Torus3,
    Torus2xCircle,
    HyperbolicTorusBundle(BundleData),
    LensQuotient(LensData),
    Sphere2xCircle,
}

/// Serializable description of a manifold (the JSON schema of the repo).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifoldSpec {
    pub family: Family,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matrix: Option<[[i64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lens: Option<(u32, u32)>,
}

impl ModelManifold {
    pub fn torus3() -> Self {
        Self::Torus3
    }

    pub fn torus2_circle() -> Self {
        Self::Torus2xCircle
    }

    pub fn torus_bundle(a: [[i64; 2]; 2]) -> Result<Self> {
        Ok(Self::HyperbolicTorusBundle(BundleData::new(a)?))
    }

    pub fn lens(p: u32, q: u32) -> Result<Self> {
        Ok(Self::LensQuotient(LensData::new(p, q)?))
    }

    pub fn sphere2_circle() -> Self {
        Self::Sphere2xCircle
    }

    pub fn family(&self) -> Family {
        match self {
            Self::Torus3 => Family::Torus3,
            Self::Torus2xCircle => Family::Torus2xCircle,
            Self::HyperbolicTorusBundle(_) => Family::HyperbolicTorusBundle,
            Self::LensQuotient(_) => Family::LensQuotient,
            Self::Sphere2xCircle => Family::Sphere2xCircle,
        }
    }

    pub fn bundle_data(&self) -> Option<&BundleData> {
        match self {
            Self::HyperbolicTorusBundle(b) => Some(b),
            _ => None,
        }
    }

    pub fn lens_data(&self) -> Option<&LensData> {
        match self {
            Self::LensQuotient(l) => Some(l),
            _ => None,
        }
    }

    pub fn spec(&self) -> ManifoldSpec {
        ManifoldSpec {
            family: self.family(),
            matrix: self.bundle_data().map(|b| b.a),
            lens: self.lens_data().map(|l| (l.p, l.q)),
        }
    }

    pub fn from_spec(spec: &ManifoldSpec) -> Result<Self> {
        match spec.family {
            Family::Torus3 => Ok(Self::Torus3),
            Family::Torus2xCircle => Ok(Self::Torus2xCircle),
            Family::HyperbolicTorusBundle => {
                let a = spec
                    .matrix
                    .ok_or_else(|| Error::InvalidParameter("missing bundle matrix".into()))?;
                Self::torus_bundle(a)
            }
            Family::LensQuotient => {
                let (p, q) = spec
                    .lens
                    .ok_or_else(|| Error::InvalidParameter("missing lens parameters".into()))?;
                Self::lens(p, q)
            }
            Family::Sphere2xCircle => Ok(Self::Sphere2xCircle),
        }
    }
}

/// Raw chart coordinates, not necessarily in the fundamental domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Coords {
    Torus([f64; 3]),
    Bundle { m: [f64; 2], t: f64 },
    Sphere([f64; 4]),
    SphereCircle { u: [f64; 3], s: f64 },
}

impl Coords {
    pub fn flat(&self) -> Vec<f64> {
        match self {
            Coords::Torus(x) => x.to_vec(),
            Coords::Bundle { m, t } => vec![m[0], m[1], *t],
            Coords::Sphere(z) => z.to_vec(),
            Coords::SphereCircle { u, s } => vec![u[0], u[1], u[2], *s],
        }
    }

    fn is_finite(&self) -> bool {
        self.flat().iter().all(|v| v.is_finite())
    }
}

/// A point in the canonical fundamental domain of its manifold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChartPoint {
    family: Family,
    coords: Coords,
}

impl ChartPoint {
    pub fn family(&self) -> Family {
        self.family
    }

    pub fn coords(&self) -> &Coords {
        &self.coords
    }

    pub fn torus(&self) -> [f64; 3] {
        match self.coords {
            Coords::Torus(x) => x,
            _ => panic!("not a torus chart point"),
        }
    }

    pub fn bundle(&self) -> ([f64; 2], f64) {
        match self.coords {
            Coords::Bundle { m, t } => (m, t),
            _ => panic!("not a bundle chart point"),
        }
    }

    pub fn sphere(&self) -> [f64; 4] {
        match self.coords {
            Coords::Sphere(z) => z,
            _ => panic!("not a sphere chart point"),
        }
    }

    pub fn sphere_circle(&self) -> ([f64; 3], f64) {
        match self.coords {
            Coords::SphereCircle { u, s } => (u, s),
            _ => panic!("not a sphere-circle chart point"),
        }
    }
}

pub fn wrap(x: f64) -> f64 {
    let w = x - x.floor();
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Signed representative of x mod 1 in [-1/2, 1/2].
pub fn wrap_diff(x: f64) -> f64 {
    x - x.round()
}

/// Numerically stable geodesic arc from a chord on a unit sphere.
fn arc_from_chord(chord: f64) -> f64 {
    2.0 * (chord / 2.0).clamp(-1.0, 1.0).asin()
}

fn arc4_stable(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    if sphere::dot4(x, y) >= 0.0 {
        let mut c = 0.0;
        for i in 0..4 {
            c += (x[i] - y[i]).powi(2);
        }
        arc_from_chord(c.sqrt())
    } else {
        sphere::arc4(x, y)
    }
}

fn arc3_stable(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    if sphere::dot3(x, y) >= 0.0 {
        let mut c = 0.0;
        for i in 0..3 {
            c += (x[i] - y[i]).powi(2);
        }
        arc_from_chord(c.sqrt())
    } else {
        sphere::arc3(x, y)
    }
}

/// Reduces raw chart coordinates to the canonical fundamental domain.
/// Idempotent and deck-invariant.
pub fn canonicalize_point(raw: &Coords, manifold: &ModelManifold) -> Result<ChartPoint> {
    if !raw.is_finite() {
        return Err(Error::NonFiniteInput);
    }
    let family = manifold.family();
    let coords = match (manifold, raw) {
        (ModelManifold::Torus3, Coords::Torus(x)) | (ModelManifold::Torus2xCircle, Coords::Torus(x)) => {
            Coords::Torus([wrap(x[0]), wrap(x[1]), wrap(x[2])])
        }
        (ModelManifold::HyperbolicTorusBundle(b), Coords::Bundle { m, t }) => {
            // (m, t) ~ (A m, t + 1): descending one level in t applies A⁻¹.
            let n = t.floor() as i64;
            let mut m = [wrap(m[0]), wrap(m[1])];
            if n > 0 {
                for _ in 0..n {
                    let im = b.apply_inv(&m);
                    m = [wrap(im[0]), wrap(im[1])];
                }
            } else {
                for _ in 0..(-n) {
                    let im = b.apply(&m);
                    m = [wrap(im[0]), wrap(im[1])];
                }
            }
            Coords::Bundle { m, t: wrap(*t) }
        }
        (ModelManifold::LensQuotient(l), Coords::Sphere(z)) => {
            let n = sphere::norm4(z);
            if n < 1e-12 {
                return Err(Error::ZeroNormSphereCoordinate);
            }
            let z = sphere::normalize4(z);
            Coords::Sphere(lens_canonical(&z, l))
        }
        (ModelManifold::Sphere2xCircle, Coords::SphereCircle { u, s }) => {
            let n = sphere::norm3(u);
            if n < 1e-12 {
                return Err(Error::ZeroNormSphereCoordinate);
            }
            Coords::SphereCircle { u: sphere::normalize3(u), s: wrap(*s) }
        }
        _ => return Err(Error::MismatchedFamilies),
    };
    Ok(ChartPoint { family, coords })
}

/// Deck representative with the lexicographically smallest angle pair.
fn lens_canonical(z: &[f64; 4], l: &LensData) -> [f64; 4] {
    if l.order == 1 {
        return *z;
    }
    let r1 = (z[0] * z[0] + z[1] * z[1]).sqrt();
    let r2 = (z[2] * z[2] + z[3] * z[3]).sqrt();
    let th1 = if r1 > 1e-12 { z[1].atan2(z[0]).rem_euclid(TAU) } else { 0.0 };
    let th2 = if r2 > 1e-12 { z[3].atan2(z[2]).rem_euclid(TAU) } else { 0.0 };
    let mut best = (f64::INFINITY, f64::INFINITY);
    let mut best_k = 0;
    for k in 0..l.order {
        let (a1, a2) = l.angles(k);
        let c1 = if r1 > 1e-12 { (th1 + a1).rem_euclid(TAU) } else { 0.0 };
        let c2 = if r2 > 1e-12 { (th2 + a2).rem_euclid(TAU) } else { 0.0 };
        let better = if (c1 - best.0).abs() < 1e-12 {
            c2 < best.1
        } else {
            c1 < best.0
        };
        if better {
            best = (c1, c2);
            best_k = k;
        }
    }
    let (a1, a2) = l.angles(best_k);
    sphere::rotate_pair(z, a1, a2)
}

/// All images of x under deck words of bounded length, as raw chart
/// coordinates in the covering space; includes x itself. Lens quotients
/// return the full (finite) group orbit for any window.
pub fn deck_orbit(x: &ChartPoint, manifold: &ModelManifold, window: u32) -> Result<Vec<Coords>> {
    if window == 0 {
        return Err(Error::InvalidParameter("deck window must be >= 1".into()));
    }
    let w = window as i64;
    let mut out = Vec::new();
    match (manifold, x.coords()) {
        (ModelManifold::Torus3, Coords::Torus(c)) | (ModelManifold::Torus2xCircle, Coords::Torus(c)) => {
            for a in -w..=w {
                for b in -w..=w {
                    for d in -w..=w {
                        out.push(Coords::Torus([c[0] + a as f64, c[1] + b as f64, c[2] + d as f64]));
                    }
                }
            }
        }
        (ModelManifold::HyperbolicTorusBundle(bd), Coords::Bundle { m, t }) => {
            for btw in -w..=w {
                // Γ^b (m, t) = (A^b m, t + b)
                let mut mm = *m;
                if btw >= 0 {
                    for _ in 0..btw {
                        mm = bd.apply(&mm);
                    }
                } else {
                    for _ in 0..(-btw) {
                        mm = bd.apply_inv(&mm);
                    }
                }
                for a in -w..=w {
                    for b in -w..=w {
                        out.push(Coords::Bundle {
                            m: [mm[0] + a as f64, mm[1] + b as f64],
                            t: t + btw as f64,
                        });
                    }
                }
            }
        }
        (ModelManifold::LensQuotient(l), Coords::Sphere(z)) => {
            for k in 0..l.order {
                let (a1, a2) = l.angles(k);
                out.push(Coords::Sphere(sphere::rotate_pair(z, a1, a2)));
            }
        }
        (ModelManifold::Sphere2xCircle, Coords::SphereCircle { u, s }) => {
            for k in -w..=w {
                out.push(Coords::SphereCircle { u: *u, s: s + k as f64 });
            }
        }
        _ => return Err(Error::MismatchedFamilies),
    }
    Ok(out)
}

/// Chart-level distance between raw coordinates (no deck minimization).
pub fn chart_distance(manifold: &ModelManifold, a: &Coords, b: &Coords) -> f64 {
    match (manifold, a, b) {
        (ModelManifold::Torus3, Coords::Torus(x), Coords::Torus(y))
        | (ModelManifold::Torus2xCircle, Coords::Torus(x), Coords::Torus(y)) => {
            let mut s = 0.0;
            for i in 0..3 {
                s += (x[i] - y[i]).powi(2);
            }
            s.sqrt()
        }
        (
            ModelManifold::HyperbolicTorusBundle(bd),
            Coords::Bundle { m: m0, t: t0 },
            Coords::Bundle { m: m1, t: t1 },
        ) => bd.segment_length(m0, *t0, m1, *t1),
        (ModelManifold::LensQuotient(_), Coords::Sphere(x), Coords::Sphere(y)) => arc4_stable(x, y),
        (
            ModelManifold::Sphere2xCircle,
            Coords::SphereCircle { u: u0, s: s0 },
            Coords::SphereCircle { u: u1, s: s1 },
        ) => {
            let a = arc3_stable(u0, u1);
            let ds = s1 - s0;
            (a * a + ds * ds).sqrt()
        }
        _ => f64::NAN,
    }
}

/// Quotient distance: minimum of the chart distance over the deck window.
pub fn distance(x: &ChartPoint, y: &ChartPoint, manifold: &ModelManifold) -> Result<f64> {
    if x.family() != manifold.family() || y.family() != manifold.family() {
        return Err(Error::MismatchedFamilies);
    }
    Ok(nearest_rep(manifold, x, y).0)
}

/// Distance together with the minimizing deck representative of y.
pub fn nearest_rep(manifold: &ModelManifold, x: &ChartPoint, y: &ChartPoint) -> (f64, Coords) {
    match (manifold, x.coords(), y.coords()) {
        (ModelManifold::Torus3, Coords::Torus(a), Coords::Torus(b))
        | (ModelManifold::Torus2xCircle, Coords::Torus(a), Coords::Torus(b)) => {
            let mut rep = [0.0; 3];
            let mut s = 0.0;
            for i in 0..3 {
                let d = wrap_diff(b[i] - a[i]);
                rep[i] = a[i] + d;
                s += d * d;
            }
            (s.sqrt(), Coords::Torus(rep))
        }
        (
            ModelManifold::HyperbolicTorusBundle(bd),
            Coords::Bundle { m: mx, t: tx },
            Coords::Bundle { m: my, t: ty },
        ) => {
            let mut best = f64::INFINITY;
            let mut best_rep = Coords::Bundle { m: *my, t: *ty };
            // Twist levels ordered by |Δt|; a segment is at least |Δt| long,
            // which prunes most quadrature evaluations.
            for btw in [0i64, -1, 1, -2, 2] {
                let tt = ty + btw as f64;
                if (tt - tx).abs() >= best {
                    continue;
                }
                let mut mm = *my;
                if btw >= 0 {
                    for _ in 0..btw {
                        mm = bd.apply(&mm);
                    }
                } else {
                    for _ in 0..(-btw) {
                        mm = bd.apply_inv(&mm);
                    }
                }
                // Recenter the twisted image near x, then search +-1 translates.
                let base = [mm[0] - (mm[0] - mx[0]).round(), mm[1] - (mm[1] - mx[1]).round()];
                for da in -1i64..=1 {
                    for db in -1i64..=1 {
                        let cand = [base[0] + da as f64, base[1] + db as f64];
                        let len = bd.segment_length(mx, *tx, &cand, tt);
                        if len < best {
                            best = len;
                            best_rep = Coords::Bundle { m: cand, t: tt };
                        }
                    }
                }
            }
            (best, best_rep)
        }
        (ModelManifold::LensQuotient(l), Coords::Sphere(zx), Coords::Sphere(zy)) => {
            let mut best = f64::INFINITY;
            let mut best_rep = *zy;
            for k in 0..l.order {
                let (a1, a2) = l.angles(k);
                let img = sphere::rotate_pair(zy, a1, a2);
                let d = arc4_stable(zx, &img);
                if d < best {
                    best = d;
                    best_rep = img;
                }
            }
            (best, Coords::Sphere(best_rep))
        }
        (
            ModelManifold::Sphere2xCircle,
            Coords::SphereCircle { u: ux, s: sx },
            Coords::SphereCircle { u: uy, s: sy },
        ) => {
            let ds = wrap_diff(sy - sx);
            let a = arc3_stable(ux, uy);
            (
                (a * a + ds * ds).sqrt(),
                Coords::SphereCircle { u: *uy, s: sx + ds },
            )
        }
        _ => (f64::NAN, *y.coords()),
    }
}

/// Distance between the local flow lines through x and y in the
/// holonomy-invariant transverse metric. Requires y in a flow-box
/// neighborhood of x.
pub fn transverse_distance(x: &ChartPoint, y: &ChartPoint, flow: &ModelFlow) -> Result<f64> {
    let manifold = flow.manifold();
    if x.family() != manifold.family() || y.family() != manifold.family() {
        return Err(Error::MismatchedFamilies);
    }
    let (d, rep) = nearest_rep(manifold, x, y);
    if d > 0.35 {
        return Err(Error::InvalidParameter(format!(
            "y outside the flow-box of x (distance {d:.3})"
        )));
    }
    match (flow.family(), flow.params()) {
        (FlowFamily::LinearTorus3, FlowParams::Linear { vf, .. })
        | (FlowFamily::LinearTorus2Fiber, FlowParams::Linear { vf, .. }) => {
            let (Coords::Torus(a), Coords::Torus(b)) = (x.coords(), &rep) else {
                return Err(Error::MismatchedFamilies);
            };
            let norm = (vf[0] * vf[0] + vf[1] * vf[1] + vf[2] * vf[2]).sqrt();
            let vhat = [vf[0] / norm, vf[1] / norm, vf[2] / norm];
            let delta = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
            let along = delta[0] * vhat[0] + delta[1] * vhat[1] + delta[2] * vhat[2];
            let mut s = 0.0;
            for i in 0..3 {
                s += (delta[i] - along * vhat[i]).powi(2);
            }
            Ok(s.sqrt())
        }
        (FlowFamily::TorusBundleEigenflow, _) => {
            let bd = manifold.bundle_data().expect("bundle flow on bundle manifold");
            let (Coords::Bundle { m: m0, t: t0 }, Coords::Bundle { m: m1, t: t1 }) = (x.coords(), &rep)
            else {
                return Err(Error::MismatchedFamilies);
            };
            let e0 = bd.to_eigen(m0);
            let e1 = bd.to_eigen(m1);
            Ok(bd.transverse_leaf_distance(e0[1], *t0, e1[1], *t1))
        }
        (FlowFamily::LensDiagonal, FlowParams::Lens { lf, mf, .. })
        | (FlowFamily::SeifertFiber, FlowParams::Seifert { lf, mf }) => {
            let (Coords::Sphere(zx), Coords::Sphere(zy)) = (x.coords(), &rep) else {
                return Err(Error::MismatchedFamilies);
            };
            Ok(lens_orbit_distance(zx, zy, *lf, *mf))
        }
        (FlowFamily::SuspensionRotation, FlowParams::Suspension { af, .. }) => {
            let (
                Coords::SphereCircle { u: ux, s: sx },
                Coords::SphereCircle { u: uy, s: sy },
            ) = (x.coords(), &rep)
            else {
                return Err(Error::MismatchedFamilies);
            };
            // Project y's leaf along the flow onto the fiber of x.
            let ds = sy - sx;
            let proj = sphere::rot_z(uy, -TAU * af * ds);
            Ok(arc3_stable(ux, &proj))
        }
        _ => Err(Error::MismatchedFamilies),
    }
}

/// Distance from x to the local orbit segment of the diagonal rotation flow
/// through y: minimizes arccos <x, φ^t y> over a local window by Newton
/// iteration on the derivative.
fn lens_orbit_distance(x: &[f64; 4], y: &[f64; 4], lambda: f64, mu: f64) -> f64 {
    // <x, φ^t y> = a1 cos(λ t + p1) + a2 cos(μ t + p2)
    let c1 = (x[0] * y[0] + x[1] * y[1], x[0] * y[1] - x[1] * y[0]);
    let c2 = (x[2] * y[2] + x[3] * y[3], x[2] * y[3] - x[3] * y[2]);
    let a1 = (c1.0 * c1.0 + c1.1 * c1.1).sqrt();
    let p1 = (-c1.1).atan2(c1.0);
    let a2 = (c2.0 * c2.0 + c2.1 * c2.1).sqrt();
    let p2 = (-c2.1).atan2(c2.0);
    let h = |t: f64| a1 * (lambda * t + p1).cos() + a2 * (mu * t + p2).cos();
    let dh = |t: f64| -a1 * lambda * (lambda * t + p1).sin() - a2 * mu * (mu * t + p2).sin();
    let d2h = |t: f64| {
        -a1 * lambda * lambda * (lambda * t + p1).cos() - a2 * mu * mu * (mu * t + p2).cos()
    };
    // Newton from t = 0, guarded to the local window.
    let mut t = 0.0;
    for _ in 0..60 {
        let g = dh(t);
        let gg = d2h(t);
        if gg.abs() < 1e-300 {
            break;
        }
        let step = g / gg;
        t = (t - step).clamp(-0.5, 0.5);
        if step.abs() < 1e-15 {
            break;
        }
    }
    // Fall back to a scan if Newton found a minimum instead of a maximum.
    let mut best_t = t;
    let mut best = h(t);
    for k in -10..=10 {
        let tk = 0.05 * k as f64;
        if h(tk) > best {
            best = h(tk);
            best_t = tk;
        }
    }
    if best_t != t {
        let mut tt = best_t;
        for _ in 0..60 {
            let g = dh(tt);
            let gg = d2h(tt);
            if gg.abs() < 1e-300 {
                break;
            }
            let step = g / gg;
            tt = (tt - step).clamp(-0.5, 0.5);
            if step.abs() < 1e-15 {
                break;
            }
        }
        t = tt;
    }
    // Stable arc via the chord to the optimal orbit point.
    let (s1, cc1) = (lambda * t).sin_cos();
    let (s2, cc2) = (mu * t).sin_cos();
    let yt = [
        cc1 * y[0] - s1 * y[1],
        s1 * y[0] + cc1 * y[1],
        cc2 * y[2] - s2 * y[3],
        s2 * y[2] + cc2 * y[3],
    ];
    arc4_stable(x, &yt)
}

/// Canonical coordinates in the unit cube used for occupancy grids and
/// product blocks: torus charts map to themselves; sphere charts map to
/// (|z₁|², arg z₁ / 2π, arg z₂ / 2π) and (polar / π, azimuth / 2π, s).
pub fn cube_coords(manifold: &ModelManifold, x: &ChartPoint) -> [f64; 3] {
    match (manifold, x.coords()) {
        (ModelManifold::Torus3, Coords::Torus(c)) | (ModelManifold::Torus2xCircle, Coords::Torus(c)) => *c,
        (ModelManifold::HyperbolicTorusBundle(_), Coords::Bundle { m, t }) => [m[0], m[1], *t],
        (ModelManifold::LensQuotient(_), Coords::Sphere(z)) => {
            let k = z[0] * z[0] + z[1] * z[1];
            let th1 = if k > 1e-12 { wrap(z[1].atan2(z[0]) / TAU) } else { 0.0 };
            let r2 = 1.0 - k;
            let th2 = if r2 > 1e-12 { wrap(z[3].atan2(z[2]) / TAU) } else { 0.0 };
            [k, th1, th2]
        }
        (ModelManifold::Sphere2xCircle, Coords::SphereCircle { u, s }) => {
            let polar = u[2].clamp(-1.0, 1.0).acos() / PI;
            let az = wrap(u[1].atan2(u[0]) / TAU);
            [polar, az, *s]
        }
        _ => [f64::NAN; 3],
    }
}

/// Uniform random point, drawn in chart coordinates and canonicalized.
pub fn sample_point<R: Rng>(manifold: &ModelManifold, rng: &mut R) -> ChartPoint {
    let raw = match manifold {
        ModelManifold::Torus3 | ModelManifold::Torus2xCircle => {
            Coords::Torus([rng.random(), rng.random(), rng.random()])
        }
        ModelManifold::HyperbolicTorusBundle(_) => Coords::Bundle {
            m: [rng.random(), rng.random()],
            t: rng.random(),
        },
        ModelManifold::LensQuotient(_) => {
            // Hopf coordinates give the uniform measure on S³.
            let k: f64 = rng.random();
            let th1 = TAU * rng.random::<f64>();
            let th2 = TAU * rng.random::<f64>();
            let r1 = k.sqrt();
            let r2 = (1.0 - k).sqrt();
            Coords::Sphere([r1 * th1.cos(), r1 * th1.sin(), r2 * th2.cos(), r2 * th2.sin()])
        }
        ModelManifold::Sphere2xCircle => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let az = TAU * rng.random::<f64>();
            let r = (1.0 - z * z).sqrt();
            Coords::SphereCircle {
                u: [r * az.cos(), r * az.sin(), z],
                s: rng.random(),
            }
        }
    };
    canonicalize_point(&raw, manifold).expect("sampled coordinates are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn torus_canonicalize_mod1() {
        let m = ModelManifold::torus3();
        let p = canonicalize_point(&Coords::Torus([1.25, -0.5, 2.0]), &m).unwrap();
        let c = p.torus();
        assert!((c[0] - 0.25).abs() < 1e-15);
        assert!((c[1] - 0.5).abs() < 1e-15);
        assert!(c[2].abs() < 1e-15);
    }

    #[test]
    fn bundle_canonicalize_applies_inverse_gluing() {
        // (m, t) ~ (A m, t+1), so (m, 1) reduces to (A⁻¹ m, 0).
        let m = ModelManifold::torus_bundle([[2, 1], [1, 1]]).unwrap();
        let p = canonicalize_point(&Coords::Bundle { m: [0.3, 0.4], t: 1.0 }, &m).unwrap();
        let (mm, t) = p.bundle();
        // A⁻¹ = [[1,-1],[-1,2]]: A⁻¹(0.3, 0.4) = (-0.1, 0.5) ≡ (0.9, 0.5)
        assert!(t.abs() < 1e-15);
        assert!((mm[0] - 0.9).abs() < 1e-12);
        assert!((mm[1] - 0.5).abs() < 1e-12);
        // Idempotence and deck invariance.
        let p2 = canonicalize_point(p.coords(), &m).unwrap();
        assert!(chart_distance(&m, p.coords(), p2.coords()) < 1e-12);
    }

    #[test]
    fn lens_canonicalize_idempotent() {
        let m = ModelManifold::lens(3, 5).unwrap();
        let raw = Coords::Sphere(sphere::normalize4(&[0.4, 0.3, 0.6, 0.2]));
        let p = canonicalize_point(&raw, &m).unwrap();
        let p2 = canonicalize_point(p.coords(), &m).unwrap();
        assert!(chart_distance(&m, p.coords(), p2.coords()) < 1e-12);
    }

    #[test]
    fn torus_wraparound_distance() {
        let m = ModelManifold::torus3();
        let x = canonicalize_point(&Coords::Torus([0.0, 0.0, 0.0]), &m).unwrap();
        let y = canonicalize_point(&Coords::Torus([0.9, 0.0, 0.0]), &m).unwrap();
        assert!((distance(&x, &y, &m).unwrap() - 0.1).abs() < 1e-14);
    }

    #[test]
    fn hopf_orthogonal_points_quarter_turn() {
        let m = ModelManifold::lens(1, 1).unwrap();
        let x = canonicalize_point(&Coords::Sphere([1.0, 0.0, 0.0, 0.0]), &m).unwrap();
        let y = canonicalize_point(&Coords::Sphere([0.0, 1.0, 0.0, 0.0]), &m).unwrap();
        assert!((distance(&x, &y, &m).unwrap() - PI / 2.0).abs() < 1e-14);
    }

    #[test]
    fn lens_p2q2_identifies_antipodal_circle_points() {
        let m = ModelManifold::lens(2, 2).unwrap();
        let x = canonicalize_point(&Coords::Sphere([1.0, 0.0, 0.0, 0.0]), &m).unwrap();
        let y = canonicalize_point(&Coords::Sphere([-1.0, 0.0, 0.0, 0.0]), &m).unwrap();
        assert!(distance(&x, &y, &m).unwrap() < 1e-14);
    }

    #[test]
    fn deck_orbit_counts() {
        let m = ModelManifold::torus3();
        let x = canonicalize_point(&Coords::Torus([0.1, 0.2, 0.3]), &m).unwrap();
        assert_eq!(deck_orbit(&x, &m, 1).unwrap().len(), 27);

        let l = ModelManifold::lens(3, 5).unwrap();
        let z = canonicalize_point(&Coords::Sphere([0.5, 0.5, 0.5, 0.5]), &l).unwrap();
        assert_eq!(deck_orbit(&z, &l, 1).unwrap().len(), 15);
    }

    #[test]
    fn deck_orbit_contains_self() {
        for m in [
            ModelManifold::torus3(),
            ModelManifold::torus_bundle([[2, 1], [1, 1]]).unwrap(),
            ModelManifold::lens(3, 5).unwrap(),
            ModelManifold::sphere2_circle(),
        ] {
            let x = sample_point(&m, &mut crate::test_rng(7));
            for w in 1..=3u32 {
                let orbit = deck_orbit(&x, &m, w).unwrap();
                assert!(
                    orbit.iter().any(|c| chart_distance(&m, x.coords(), c) < 1e-12),
                    "x missing from its own deck orbit"
                );
            }
        }
    }

    #[test]
    fn lens_rejects_degenerate_params() {
        assert!(ModelManifold::lens(0, 5).is_err());
    }

    #[test]
    fn zero_sphere_coordinate_rejected() {
        let m = ModelManifold::lens(1, 1).unwrap();
        assert!(canonicalize_point(&Coords::Sphere([0.0; 4]), &m).is_err());
    }

    #[test]
    fn non_finite_rejected() {
        let m = ModelManifold::torus3();
        assert!(canonicalize_point(&Coords::Torus([f64::NAN, 0.0, 0.0]), &m).is_err());
    }
}
