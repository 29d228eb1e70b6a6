//! The six classified flow families with validated parameters, closed-form
//! flow and tangent maps, and the per-case orbit-structure predictions.
//!
//! Covering formulas (canonicalized after evaluation):
//! - linear flows on torus charts: x ↦ x + t v;
//! - torus-bundle eigenflow: (m, t₀) ↦ (m + s λ₊^{t₀} v̂₊, t₀), the unique
//!   fiberwise eigendirection field satisfying the descent identity under
//!   the gluing (m, t) ∼ (A m, t + 1);
//! - diagonal sphere flows: (z₁, z₂) ↦ (e^{iλt} z₁, e^{iμt} z₂);
//! - suspension of a rotation: (u, s) ↦ (R_{2παt} u, s + t).
//!
//! Tangent maps are reported in chart coordinates for torus charts and in
//! the canonical orthonormal tangent frames for sphere charts.

use crate::error::{Error, Result};
use crate::geometry::{
    self, canonicalize_point, sphere, ChartPoint, Coords, ManifoldSpec, ModelManifold, TAU,
};
use crate::quad::{self, QuadIrr};
use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

/// Flow family tag, following the classification cases (1)-(4).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowFamily {
    LinearTorus3,
    LinearTorus2Fiber,
    TorusBundleEigenflow,
    LensDiagonal,
    SuspensionRotation,
    SeifertFiber,
}

impl FlowFamily {
    pub fn all() -> [FlowFamily; 6] {
        [
            FlowFamily::LinearTorus3,
            FlowFamily::LinearTorus2Fiber,
            FlowFamily::TorusBundleEigenflow,
            FlowFamily::LensDiagonal,
            FlowFamily::SuspensionRotation,
            FlowFamily::SeifertFiber,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            FlowFamily::LinearTorus3 => "linear_torus3",
            FlowFamily::LinearTorus2Fiber => "linear_torus2_fiber",
            FlowFamily::TorusBundleEigenflow => "torus_bundle_eigenflow",
            FlowFamily::LensDiagonal => "lens_diagonal",
            FlowFamily::SuspensionRotation => "suspension_rotation",
            FlowFamily::SeifertFiber => "seifert_fiber",
        }
    }
}

/// Validated flow parameters; irrational data is kept in exact form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum FlowParams {
    /// Slope vector in turns per unit time (cases 1 and 2a).
    Linear { v: [QuadIrr; 3], vf: [f64; 3] },
    /// Case 2b; all data lives on the manifold's bundle matrix.
    Eigen,
    /// Angular speeds in radians per unit time (case 3a).
    Lens { lambda: QuadIrr, mu: QuadIrr, lf: f64, mf: f64 },
    /// Rotation rate in turns per fiber loop (case 3b).
    Suspension { alpha: QuadIrr, af: f64 },
    /// Hopf representative of case 4: λ = μ = speed.
    Seifert { lf: f64, mf: f64 },
}

/// Orbit-closure class predicted by the classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrbitStructure {
    DenseInM,
    DenseInTorusFiber,
    ClosedOrbit,
}

/// One of the six model flows, immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFlow {
    manifold: ModelManifold,
    family: FlowFamily,
    params: FlowParams,
}

/// 3×3 derivative of the flow map at a base point and time.
#[derive(Debug, Clone)]
pub struct TangentMatrix {
    pub mat: Matrix3<f64>,
    pub base: ChartPoint,
    pub time: f64,
}

impl ModelFlow {
    /// Case (1): linear flow on T³ with rationally independent slope.
    pub fn linear_torus3(v: [QuadIrr; 3]) -> Result<Self> {
        if !quad::rationally_independent(&v) {
            return Err(Error::IrrationalityViolation(format!(
                "slope ({}, {}, {}) is rationally dependent",
                v[0].value(),
                v[1].value(),
                v[2].value()
            )));
        }
        let vf = [v[0].value(), v[1].value(), v[2].value()];
        Ok(Self {
            manifold: ModelManifold::torus3(),
            family: FlowFamily::LinearTorus3,
            params: FlowParams::Linear { v, vf },
        })
    }

    /// Case (2a): pull-back of an irrational linear flow in the T² fibers
    /// of T²×S¹; the S¹ coordinate is fixed.
    pub fn linear_torus2_fiber(v1: QuadIrr, v2: QuadIrr) -> Result<Self> {
        if !quad::rationally_independent(&[v1, v2]) {
            return Err(Error::IrrationalityViolation(format!(
                "fiber slope ({}, {}) is rationally dependent",
                v1.value(),
                v2.value()
            )));
        }
        let v = [v1, v2, QuadIrr::integer(0)];
        let vf = [v1.value(), v2.value(), 0.0];
        Ok(Self {
            manifold: ModelManifold::torus2_circle(),
            family: FlowFamily::LinearTorus2Fiber,
            params: FlowParams::Linear { v, vf },
        })
    }

    /// Case (2b): quotient flow of the expanding eigendirection on T³_A.
    pub fn torus_bundle_eigenflow(a: [[i64; 2]; 2]) -> Result<Self> {
        Ok(Self {
            manifold: ModelManifold::torus_bundle(a)?,
            family: FlowFamily::TorusBundleEigenflow,
            params: FlowParams::Eigen,
        })
    }

    /// Case (3a): diagonal flow (e^{iλt} z₁, e^{iμt} z₂) on a lens quotient,
    /// λ/μ irrational.
    pub fn lens_diagonal(p: u32, q: u32, lambda: QuadIrr, mu: QuadIrr) -> Result<Self> {
        if lambda.is_zero() || mu.is_zero() {
            return Err(Error::InvalidParameter("lens speeds must be nonzero".into()));
        }
        if !quad::ratio_is_irrational(&lambda, &mu) {
            return Err(Error::IrrationalityViolation(format!(
                "λ/μ = {}/{} is rational",
                lambda.value(),
                mu.value()
            )));
        }
        Ok(Self {
            manifold: ModelManifold::lens(p, q)?,
            family: FlowFamily::LensDiagonal,
            params: FlowParams::Lens {
                lambda,
                mu,
                lf: lambda.value(),
                mf: mu.value(),
            },
        })
    }

    /// Case (3b): suspension flow of the rotation of S² by α turns.
    pub fn suspension_rotation(alpha: QuadIrr) -> Result<Self> {
        if alpha.is_rational() {
            return Err(Error::IrrationalityViolation(format!(
                "rotation number {} is rational",
                alpha.value()
            )));
        }
        Ok(Self {
            manifold: ModelManifold::sphere2_circle(),
            family: FlowFamily::SuspensionRotation,
            params: FlowParams::Suspension { alpha, af: alpha.value() },
        })
    }

    /// Case (4): Seifert representative, the Hopf flow on S³ with angular
    /// speed λ = μ (all orbits closed with period 2π/speed).
    pub fn seifert_fiber(speed: f64) -> Result<Self> {
        if !(speed > 0.0) || !speed.is_finite() {
            return Err(Error::InvalidParameter("fiber speed must be positive".into()));
        }
        Ok(Self {
            manifold: ModelManifold::lens(1, 1)?,
            family: FlowFamily::SeifertFiber,
            params: FlowParams::Seifert { lf: speed, mf: speed },
        })
    }

    /// The six desk-scale default flows.
    pub fn default_catalog() -> Vec<ModelFlow> {
        let r2 = QuadIrr::sqrt(2).unwrap();
        let r3 = QuadIrr::sqrt(3).unwrap();
        vec![
            Self::linear_torus3([QuadIrr::integer(1), r2, r3]).unwrap(),
            Self::linear_torus2_fiber(QuadIrr::integer(1), r2).unwrap(),
            Self::torus_bundle_eigenflow([[2, 1], [1, 1]]).unwrap(),
            Self::lens_diagonal(3, 5, QuadIrr::integer(1), r2).unwrap(),
            Self::suspension_rotation(QuadIrr::golden_conjugate()).unwrap(),
            Self::seifert_fiber(1.0).unwrap(),
        ]
    }

    pub fn default_flow(family: FlowFamily) -> ModelFlow {
        Self::default_catalog()
            .into_iter()
            .find(|f| f.family == family)
            .expect("catalog covers all families")
    }

    pub fn manifold(&self) -> &ModelManifold {
        &self.manifold
    }

    pub fn family(&self) -> FlowFamily {
        self.family
    }

    pub fn params(&self) -> &FlowParams {
        &self.params
    }

    pub fn spec(&self) -> FlowSpec {
        FlowSpec {
            family: self.family,
            manifold: self.manifold.spec(),
            params: self.params.clone(),
            global_orbit_structure: match self.family {
                FlowFamily::LinearTorus3 => "all orbits dense in M".into(),
                FlowFamily::LinearTorus2Fiber | FlowFamily::TorusBundleEigenflow => {
                    "orbit closures are the T^2 fibers".into()
                }
                FlowFamily::LensDiagonal | FlowFamily::SuspensionRotation => {
                    "two closed orbits, all other orbit closures are T^2".into()
                }
                FlowFamily::SeifertFiber => "all orbits closed".into(),
            },
        }
    }

    pub fn from_spec(spec: &FlowSpec) -> Result<Self> {
        match (&spec.family, &spec.params) {
            (FlowFamily::LinearTorus3, FlowParams::Linear { v, .. }) => Self::linear_torus3(*v),
            (FlowFamily::LinearTorus2Fiber, FlowParams::Linear { v, .. }) => {
                Self::linear_torus2_fiber(v[0], v[1])
            }
            (FlowFamily::TorusBundleEigenflow, FlowParams::Eigen) => {
                let a = spec
                    .manifold
                    .matrix
                    .ok_or_else(|| Error::InvalidParameter("missing bundle matrix".into()))?;
                Self::torus_bundle_eigenflow(a)
            }
            (FlowFamily::LensDiagonal, FlowParams::Lens { lambda, mu, .. }) => {
                let (p, q) = spec
                    .manifold
                    .lens
                    .ok_or_else(|| Error::InvalidParameter("missing lens parameters".into()))?;
                Self::lens_diagonal(p, q, *lambda, *mu)
            }
            (FlowFamily::SuspensionRotation, FlowParams::Suspension { alpha, .. }) => {
                Self::suspension_rotation(*alpha)
            }
            (FlowFamily::SeifertFiber, FlowParams::Seifert { lf, .. }) => Self::seifert_fiber(*lf),
            _ => Err(Error::InvalidParameter("flow family/params mismatch".into())),
        }
    }

    /// Closed-form flow map followed by fundamental-domain reduction.
    pub fn flow_at(&self, x: &ChartPoint, t: f64) -> Result<ChartPoint> {
        if !t.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if x.family() != self.manifold.family() {
            return Err(Error::MismatchedFamilies);
        }
        let raw = match (&self.params, x.coords()) {
            (FlowParams::Linear { vf, .. }, Coords::Torus(c)) => {
                Coords::Torus([c[0] + t * vf[0], c[1] + t * vf[1], c[2] + t * vf[2]])
            }
            (FlowParams::Eigen, Coords::Bundle { m, t: t0 }) => {
                let bd = self.manifold.bundle_data().expect("bundle manifold");
                let speed = bd.lambda.powf(*t0);
                Coords::Bundle {
                    m: [m[0] + t * speed * bd.v_plus[0], m[1] + t * speed * bd.v_plus[1]],
                    t: *t0,
                }
            }
            (FlowParams::Lens { lf, mf, .. }, Coords::Sphere(z))
            | (FlowParams::Seifert { lf, mf }, Coords::Sphere(z)) => {
                Coords::Sphere(sphere::rotate_pair(z, lf * t, mf * t))
            }
            (FlowParams::Suspension { af, .. }, Coords::SphereCircle { u, s }) => {
                Coords::SphereCircle {
                    u: sphere::rot_z(u, TAU * af * t),
                    s: s + t,
                }
            }
            _ => return Err(Error::MismatchedFamilies),
        };
        canonicalize_point(&raw, &self.manifold)
    }

    /// Exact derivative of the chart formula: chart coordinates for torus
    /// charts, orthonormal-frame components for sphere charts.
    pub fn tangent_at(&self, x: &ChartPoint, t: f64) -> Result<TangentMatrix> {
        if !t.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if x.family() != self.manifold.family() {
            return Err(Error::MismatchedFamilies);
        }
        let mat = match (&self.params, x.coords()) {
            (FlowParams::Linear { .. }, _) => Matrix3::identity(),
            (FlowParams::Eigen, Coords::Bundle { t: t0, .. }) => {
                let bd = self.manifold.bundle_data().expect("bundle manifold");
                let shear = t * bd.log_lambda * bd.lambda.powf(*t0);
                let mut m = Matrix3::identity();
                m[(0, 2)] = shear * bd.v_plus[0];
                m[(1, 2)] = shear * bd.v_plus[1];
                m
            }
            (FlowParams::Lens { .. }, Coords::Sphere(_)) | (FlowParams::Seifert { .. }, Coords::Sphere(_)) => {
                self.sphere_frame_tangent(x, t)?
            }
            (FlowParams::Suspension { .. }, Coords::SphereCircle { .. }) => {
                self.sphere_frame_tangent(x, t)?
            }
            _ => return Err(Error::MismatchedFamilies),
        };
        Ok(TangentMatrix { mat, base: *x, time: t })
    }

    /// Frame-to-frame derivative for sphere charts: apply the total rotation
    /// (flow plus canonicalizing deck element) to the frame at x and read
    /// components in the frame at the image point.
    fn sphere_frame_tangent(&self, x: &ChartPoint, t: f64) -> Result<Matrix3<f64>> {
        let y = self.flow_at(x, t)?;
        let fx = self.frame_at(x)?;
        let fy = self.frame_at(&y)?;
        let mut m = Matrix3::zeros();
        match (&fx.rep, &fy.rep) {
            (FrameRep::Sphere { vecs: vx }, FrameRep::Sphere { vecs: vy }) => {
                // Total rotation = deck ∘ flow; recover it by mapping the
                // base via the flow and matching the image coordinates.
                let zx = x.sphere();
                let zy = y.sphere();
                // flow rotation applied to frame vectors of x
                let (lf, mf) = self.angular_speeds();
                for a in 0..3 {
                    let img = sphere::rotate_pair(&vx[a], lf * t, mf * t);
                    // deck correction: the canonical image zy equals
                    // deck(flow(zx)); the same deck rotation maps img.
                    let img = lens_deck_align(self.manifold(), &sphere::rotate_pair(&zx, lf * t, mf * t), &zy, &img);
                    for b in 0..3 {
                        m[(b, a)] = sphere::dot4(&img, &vy[b]);
                    }
                }
            }
            (FrameRep::SphereCircle { vecs: vx }, FrameRep::SphereCircle { vecs: vy }) => {
                let af = match &self.params {
                    FlowParams::Suspension { af, .. } => *af,
                    _ => unreachable!(),
                };
                for a in 0..3 {
                    // (S²-part, s-part): the derivative rotates the S² part
                    // by the same angle and fixes the s part.
                    let u_part = [vx[a][0], vx[a][1], vx[a][2]];
                    let rotated = sphere::rot_z(&u_part, TAU * af * t);
                    let img = [rotated[0], rotated[1], rotated[2], vx[a][3]];
                    for b in 0..3 {
                        m[(b, a)] = sphere::dot4(&img, &vy[b]);
                    }
                }
            }
            _ => return Err(Error::MismatchedFamilies),
        }
        Ok(m)
    }

    fn angular_speeds(&self) -> (f64, f64) {
        match &self.params {
            FlowParams::Lens { lf, mf, .. } => (*lf, *mf),
            FlowParams::Seifert { lf, mf } => (*lf, *mf),
            _ => (0.0, 0.0),
        }
    }

    /// Derivative in the invariant-metric orthonormal frame at x, mapping
    /// frame components at x to frame components at the image. Orthogonal
    /// for the five isometric families; a unipotent shear for the bundle.
    pub fn metric_tangent(&self, x: &ChartPoint, t: f64) -> Result<Matrix3<f64>> {
        match &self.params {
            FlowParams::Linear { .. } => Ok(Matrix3::identity()),
            FlowParams::Eigen => {
                let bd = self.manifold.bundle_data().expect("bundle manifold");
                // Frame order (transverse x₋, transverse ∂t, flow):
                // Dφ^t f_∂t = f_∂t + t ln λ · f_flow.
                let mut m = Matrix3::identity();
                m[(2, 1)] = t * bd.log_lambda;
                Ok(m)
            }
            _ => self.sphere_frame_tangent(x, t),
        }
    }

    /// Metric speed of the flow at x (nowhere zero by validation).
    pub fn speed(&self, x: &ChartPoint) -> f64 {
        match (&self.params, x.coords()) {
            (FlowParams::Linear { vf, .. }, _) => {
                (vf[0] * vf[0] + vf[1] * vf[1] + vf[2] * vf[2]).sqrt()
            }
            (FlowParams::Eigen, _) => 1.0,
            (FlowParams::Lens { lf, mf, .. }, Coords::Sphere(z))
            | (FlowParams::Seifert { lf, mf }, Coords::Sphere(z)) => {
                let k = z[0] * z[0] + z[1] * z[1];
                (lf * lf * k + mf * mf * (1.0 - k)).sqrt()
            }
            (FlowParams::Suspension { af, .. }, Coords::SphereCircle { u, .. }) => {
                let rho2 = u[0] * u[0] + u[1] * u[1];
                (1.0 + (TAU * af) * (TAU * af) * rho2).sqrt()
            }
            _ => f64::NAN,
        }
    }

    /// The classification's orbit-closure class for the orbit through x.
    pub fn predict_orbit_structure(&self, x: &ChartPoint) -> OrbitStructure {
        match (&self.family, x.coords()) {
            (FlowFamily::LinearTorus3, _) => OrbitStructure::DenseInM,
            (FlowFamily::LinearTorus2Fiber, _) | (FlowFamily::TorusBundleEigenflow, _) => {
                OrbitStructure::DenseInTorusFiber
            }
            (FlowFamily::LensDiagonal, Coords::Sphere(z)) => {
                let k = z[0] * z[0] + z[1] * z[1];
                if k < 1e-9 || k > 1.0 - 1e-9 {
                    OrbitStructure::ClosedOrbit
                } else {
                    OrbitStructure::DenseInTorusFiber
                }
            }
            (FlowFamily::SuspensionRotation, Coords::SphereCircle { u, .. }) => {
                if u[0] * u[0] + u[1] * u[1] < 1e-18 {
                    OrbitStructure::ClosedOrbit
                } else {
                    OrbitStructure::DenseInTorusFiber
                }
            }
            (FlowFamily::SeifertFiber, _) => OrbitStructure::ClosedOrbit,
            _ => OrbitStructure::DenseInM,
        }
    }

    /// Local orthonormal frame (f₁, f₂ transverse; f₃ along the flow).
    pub fn frame_at(&self, x: &ChartPoint) -> Result<LocalFrame> {
        if x.family() != self.manifold.family() {
            return Err(Error::MismatchedFamilies);
        }
        let rep = match (&self.params, x.coords()) {
            (FlowParams::Linear { vf, .. }, Coords::Torus(_)) => {
                let n = (vf[0] * vf[0] + vf[1] * vf[1] + vf[2] * vf[2]).sqrt();
                let fl = [vf[0] / n, vf[1] / n, vf[2] / n];
                // Seed with the axis least aligned with the flow.
                let mut k = 0;
                for i in 1..3 {
                    if fl[i].abs() < fl[k].abs() {
                        k = i;
                    }
                }
                let mut f1 = [0.0; 3];
                f1[k] = 1.0;
                let d = f1[0] * fl[0] + f1[1] * fl[1] + f1[2] * fl[2];
                for i in 0..3 {
                    f1[i] -= d * fl[i];
                }
                let f1 = sphere::normalize3(&f1);
                let f2 = sphere::cross3(&fl, &f1);
                FrameRep::Torus { f1, f2, fl }
            }
            (FlowParams::Eigen, Coords::Bundle { t: t0, .. }) => FrameRep::Bundle { t0: *t0 },
            (FlowParams::Lens { .. }, Coords::Sphere(z)) | (FlowParams::Seifert { .. }, Coords::Sphere(z)) => {
                let (lf, mf) = self.angular_speeds();
                let f = [-lf * z[1], lf * z[0], -mf * z[3], mf * z[2]];
                let fl = sphere::normalize4(&f);
                let qf = sphere::quat_frame(z);
                // f1: first quaternion frame vector with residual norm >= 1/2
                // off the flow direction. At most one residual can be smaller,
                // so the rule is total, and unlike an argmax it does not
                // flicker when residuals tie (they do for λ = μ).
                let mut chosen = [0.0; 4];
                for q in &qf {
                    let d = sphere::dot4(q, &fl);
                    let mut r = *q;
                    for j in 0..4 {
                        r[j] -= d * fl[j];
                    }
                    if sphere::norm4(&r) >= 0.5 {
                        chosen = r;
                        break;
                    }
                }
                let f1 = sphere::normalize4(&chosen);
                let mut f2 = hodge4(z, &f1, &fl);
                // Orient: det [z f1 f2 fl] = +1.
                if det4(z, &f1, &f2, &fl) < 0.0 {
                    for c in &mut f2 {
                        *c = -*c;
                    }
                }
                FrameRep::Sphere { vecs: [f1, sphere::normalize4(&f2), fl] }
            }
            (FlowParams::Suspension { af, .. }, Coords::SphereCircle { u, .. }) => {
                let [e1, e2] = sphere::s2_frame(u);
                let rho = (u[0] * u[0] + u[1] * u[1]).sqrt();
                let c = TAU * af * rho;
                let n = (1.0 + c * c).sqrt();
                let fl = [c * e1[0] / n, c * e1[1] / n, c * e1[2] / n, 1.0 / n];
                let f1 = [e2[0], e2[1], e2[2], 0.0];
                let f2 = [e1[0] / n, e1[1] / n, e1[2] / n, -c / n];
                FrameRep::SphereCircle { vecs: [f1, f2, fl] }
            }
            _ => return Err(Error::MismatchedFamilies),
        };
        Ok(LocalFrame {
            manifold: self.manifold.clone(),
            base: *x,
            rep,
        })
    }
}

/// Serializable flow description (catalog entry).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowSpec {
    pub family: FlowFamily,
    pub manifold: ManifoldSpec,
    pub params: FlowParams,
    pub global_orbit_structure: String,
}

/// Aligns the flowed covering image with the canonical image by the deck
/// rotation that connects them, and applies the same rotation to a tangent
/// 4-vector.
fn lens_deck_align(
    manifold: &ModelManifold,
    flowed: &[f64; 4],
    canonical: &[f64; 4],
    vec: &[f64; 4],
) -> [f64; 4] {
    let Some(l) = manifold.lens_data() else {
        return *vec;
    };
    if l.order == 1 {
        return *vec;
    }
    let mut best = f64::INFINITY;
    let mut best_vec = *vec;
    for k in 0..l.order {
        let (a1, a2) = l.angles(k);
        let img = sphere::rotate_pair(flowed, a1, a2);
        let mut d = 0.0;
        for i in 0..4 {
            d += (img[i] - canonical[i]).powi(2);
        }
        if d < best {
            best = d;
            best_vec = sphere::rotate_pair(vec, a1, a2);
        }
    }
    best_vec
}

/// Hodge-style complement: the vector orthogonal to a, b, c in R⁴.
fn hodge4(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4]) -> [f64; 4] {
    let minor = |i: usize, j: usize, k: usize| -> f64 {
        a[i] * (b[j] * c[k] - b[k] * c[j]) - a[j] * (b[i] * c[k] - b[k] * c[i])
            + a[k] * (b[i] * c[j] - b[j] * c[i])
    };
    [
        minor(1, 2, 3),
        -minor(0, 2, 3),
        minor(0, 1, 3),
        -minor(0, 1, 2),
    ]
}

fn det4(a: &[f64; 4], b: &[f64; 4], c: &[f64; 4], d: &[f64; 4]) -> f64 {
    let h = hodge4(a, b, c);
    -(h[0] * d[0] + h[1] * d[1] + h[2] * d[2] + h[3] * d[3])
}

/// Ambient representation of the frame vectors per chart type.
#[derive(Debug, Clone)]
enum FrameRep {
    Torus { f1: [f64; 3], f2: [f64; 3], fl: [f64; 3] },
    /// Frame (λ^{-t}∂₋, ∂t, λ^{t}∂₊) in eigencoordinates at height t0.
    Bundle { t0: f64 },
    Sphere { vecs: [[f64; 4]; 3] },
    /// 4-vectors (S²-tangent part, s-component).
    SphereCircle { vecs: [[f64; 4]; 3] },
}

/// Local flow-box frame at a base point: frame order (f₁, f₂, flow).
#[derive(Debug, Clone)]
pub struct LocalFrame {
    manifold: ModelManifold,
    base: ChartPoint,
    rep: FrameRep,
}

impl LocalFrame {
    pub fn base(&self) -> &ChartPoint {
        &self.base
    }

    /// Point at frame coordinates w = (w₁, w₂, w_flow).
    pub fn exp(&self, w: [f64; 3]) -> Result<ChartPoint> {
        let raw = match &self.rep {
            FrameRep::Torus { f1, f2, fl } => {
                let c = self.base.torus();
                Coords::Torus([
                    c[0] + w[0] * f1[0] + w[1] * f2[0] + w[2] * fl[0],
                    c[1] + w[0] * f1[1] + w[1] * f2[1] + w[2] * fl[1],
                    c[2] + w[0] * f1[2] + w[1] * f2[2] + w[2] * fl[2],
                ])
            }
            FrameRep::Bundle { t0 } => {
                let bd = self.manifold.bundle_data().expect("bundle manifold");
                let (m, t) = self.base.bundle();
                let e = bd.to_eigen(&m);
                let scale_minus = (-bd.log_lambda * t0).exp();
                let scale_plus = (bd.log_lambda * t0).exp();
                let x = [e[0] + w[2] * scale_plus, e[1] + w[0] * scale_minus];
                let m2 = bd.from_eigen(&x);
                Coords::Bundle { m: m2, t: t + w[1] }
            }
            FrameRep::Sphere { vecs } => {
                let z = self.base.sphere();
                let mut v = [0.0; 4];
                for i in 0..4 {
                    v[i] = w[0] * vecs[0][i] + w[1] * vecs[1][i] + w[2] * vecs[2][i];
                }
                Coords::Sphere(sphere::s3_exp(&z, &v))
            }
            FrameRep::SphereCircle { vecs } => {
                let (u, s) = self.base.sphere_circle();
                let mut v = [0.0; 4];
                for i in 0..4 {
                    v[i] = w[0] * vecs[0][i] + w[1] * vecs[1][i] + w[2] * vecs[2][i];
                }
                let tangent = [v[0], v[1], v[2]];
                Coords::SphereCircle {
                    u: sphere::s2_exp(&u, &tangent),
                    s: s + v[3],
                }
            }
        };
        canonicalize_point(&raw, &self.manifold)
    }

    /// Frame coordinates of a nearby point (deck-nearest representative).
    pub fn log(&self, y: &ChartPoint) -> [f64; 3] {
        let (_, rep) = geometry::nearest_rep(&self.manifold, &self.base, y);
        match (&self.rep, &rep) {
            (FrameRep::Torus { f1, f2, fl }, Coords::Torus(c)) => {
                let b = self.base.torus();
                let d = [c[0] - b[0], c[1] - b[1], c[2] - b[2]];
                [
                    d[0] * f1[0] + d[1] * f1[1] + d[2] * f1[2],
                    d[0] * f2[0] + d[1] * f2[1] + d[2] * f2[2],
                    d[0] * fl[0] + d[1] * fl[1] + d[2] * fl[2],
                ]
            }
            (FrameRep::Bundle { t0 }, Coords::Bundle { m, t }) => {
                let bd = self.manifold.bundle_data().expect("bundle manifold");
                let (mb, tb) = self.base.bundle();
                let eb = bd.to_eigen(&mb);
                let ey = bd.to_eigen(m);
                let scale_minus = (-bd.log_lambda * t0).exp();
                let scale_plus = (bd.log_lambda * t0).exp();
                [
                    (ey[1] - eb[1]) / scale_minus,
                    t - tb,
                    (ey[0] - eb[0]) / scale_plus,
                ]
            }
            (FrameRep::Sphere { vecs }, Coords::Sphere(zy)) => {
                let z = self.base.sphere();
                let v = sphere::s3_log(&z, zy);
                [
                    sphere::dot4(&v, &vecs[0]),
                    sphere::dot4(&v, &vecs[1]),
                    sphere::dot4(&v, &vecs[2]),
                ]
            }
            (FrameRep::SphereCircle { vecs }, Coords::SphereCircle { u, s }) => {
                let (ub, sb) = self.base.sphere_circle();
                let t = sphere::s2_log(&ub, u);
                let v = [t[0], t[1], t[2], s - sb];
                [
                    sphere::dot4(&v, &vecs[0]),
                    sphere::dot4(&v, &vecs[1]),
                    sphere::dot4(&v, &vecs[2]),
                ]
            }
            _ => [f64::NAN; 3],
        }
    }

    /// Frame vectors expressed for direction seeding in the metric frame:
    /// unit transverse directions are cos θ f₁ + sin θ f₂, which is exactly
    /// the (cos θ, sin θ, 0) coordinate vector.
    pub fn transverse_direction(theta: f64) -> nalgebra::Vector3<f64> {
        nalgebra::Vector3::new(theta.cos(), theta.sin(), 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::test_rng;
    use rand::Rng;

    #[test]
    fn validation_accepts_and_rejects() {
        let r2 = QuadIrr::sqrt(2).unwrap();
        let r3 = QuadIrr::sqrt(3).unwrap();
        assert!(ModelFlow::linear_torus3([QuadIrr::integer(1), r2, r3]).is_ok());
        assert!(matches!(
            ModelFlow::linear_torus3([
                QuadIrr::integer(1),
                QuadIrr::integer(2),
                QuadIrr::integer(3)
            ]),
            Err(Error::IrrationalityViolation(_))
        ));
        assert!(matches!(
            ModelFlow::torus_bundle_eigenflow([[1, 0], [0, 1]]),
            Err(Error::NotHyperbolicMatrix(_))
        ));
        assert!(matches!(
            ModelFlow::lens_diagonal(3, 5, QuadIrr::integer(2), QuadIrr::integer(3)),
            Err(Error::IrrationalityViolation(_))
        ));
        assert!(ModelFlow::lens_diagonal(3, 5, QuadIrr::integer(1), r2).is_ok());
    }

    #[test]
    fn bundle_eigendata_matches_closed_form() {
        let flow = ModelFlow::torus_bundle_eigenflow([[2, 1], [1, 1]]).unwrap();
        let bd = flow.manifold().bundle_data().unwrap();
        assert!((bd.lambda - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-13);
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((bd.v_plus[0] / bd.v_plus[1] - phi).abs() < 1e-12);
    }

    #[test]
    fn time_zero_is_identity() {
        for flow in ModelFlow::default_catalog() {
            let x = geometry::sample_point(flow.manifold(), &mut test_rng(3));
            let y = flow.flow_at(&x, 0.0).unwrap();
            assert!(
                geometry::distance(&x, &y, flow.manifold()).unwrap() < 1e-12,
                "{:?} moved at t=0",
                flow.family()
            );
        }
    }

    #[test]
    fn linear_torus3_direct_formula() {
        let flow = ModelFlow::default_flow(FlowFamily::LinearTorus3);
        let m = flow.manifold().clone();
        let x = canonicalize_point(&Coords::Torus([0.0, 0.0, 0.0]), &m).unwrap();
        let y = flow.flow_at(&x, 1.0).unwrap().torus();
        assert!((y[0] - 0.0).abs() < 1e-12);
        assert!((y[1] - (2f64.sqrt() - 1.0)).abs() < 1e-12);
        assert!((y[2] - (3f64.sqrt() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn lens_closed_orbit_period() {
        let flow = ModelFlow::default_flow(FlowFamily::LensDiagonal);
        let m = flow.manifold().clone();
        let x = canonicalize_point(&Coords::Sphere([1.0, 0.0, 0.0, 0.0]), &m).unwrap();
        let y = flow.flow_at(&x, TAU).unwrap();
        assert!(geometry::distance(&x, &y, &m).unwrap() < 1e-12);
    }

    #[test]
    fn bundle_descent_identity() {
        // Γ ∘ φ^s = φ^s ∘ Γ for the covering formula under (m,t) ~ (Am, t+1).
        let flow = ModelFlow::default_flow(FlowFamily::TorusBundleEigenflow);
        let m = flow.manifold().clone();
        let bd = m.bundle_data().unwrap();
        let mut rng = test_rng(11);
        for _ in 0..1000 {
            let mm = [rng.random::<f64>(), rng.random::<f64>()];
            let t0 = rng.random::<f64>();
            let s = 4.0 * rng.random::<f64>() - 2.0;
            // φ^s then Γ, computed on the cover.
            let speed0 = bd.lambda.powf(t0);
            let flowed = [mm[0] + s * speed0 * bd.v_plus[0], mm[1] + s * speed0 * bd.v_plus[1]];
            let gamma_flowed = (bd.apply(&flowed), t0 + 1.0);
            // Γ then φ^s.
            let gm = bd.apply(&mm);
            let speed1 = bd.lambda.powf(t0 + 1.0);
            let flowed_gamma = (
                [gm[0] + s * speed1 * bd.v_plus[0], gm[1] + s * speed1 * bd.v_plus[1]],
                t0 + 1.0,
            );
            let d0 = (gamma_flowed.0[0] - flowed_gamma.0[0]).abs();
            let d1 = (gamma_flowed.0[1] - flowed_gamma.0[1]).abs();
            assert!(d0 < 1e-10 && d1 < 1e-10, "descent identity violated");
        }
    }

    #[test]
    fn group_law_sampled() {
        let mut rng = test_rng(5);
        for flow in ModelFlow::default_catalog() {
            for _ in 0..200 {
                let x = geometry::sample_point(flow.manifold(), &mut rng);
                let s = 8.0 * rng.random::<f64>() - 4.0;
                let t = 8.0 * rng.random::<f64>() - 4.0;
                let a = flow.flow_at(&x, s + t).unwrap();
                let b = flow.flow_at(&flow.flow_at(&x, t).unwrap(), s).unwrap();
                let d = geometry::distance(&a, &b, flow.manifold()).unwrap();
                assert!(d < 1e-10, "{:?}: group law residual {d:.2e}", flow.family());
            }
        }
    }

    #[test]
    fn tangent_chain_rule_and_det() {
        let mut rng = test_rng(17);
        for flow in ModelFlow::default_catalog() {
            for _ in 0..100 {
                let x = geometry::sample_point(flow.manifold(), &mut rng);
                let s = 4.0 * rng.random::<f64>() - 2.0;
                let t = 4.0 * rng.random::<f64>() - 2.0;
                let full = flow.tangent_at(&x, s + t).unwrap().mat;
                let first = flow.tangent_at(&x, t).unwrap().mat;
                let mid = flow.flow_at(&x, t).unwrap();
                let second = flow.tangent_at(&mid, s).unwrap().mat;
                let residual = (second * first - full).norm();
                assert!(
                    residual < 1e-9,
                    "{:?}: chain rule residual {residual:.2e}",
                    flow.family()
                );
                let det = full.determinant();
                assert!(
                    (det - 1.0).abs() < 1e-9,
                    "{:?}: det {det}",
                    flow.family()
                );
            }
        }
    }

    #[test]
    fn lens_tangent_is_orthogonal() {
        let flow = ModelFlow::default_flow(FlowFamily::LensDiagonal);
        let mut rng = test_rng(23);
        let x = geometry::sample_point(flow.manifold(), &mut rng);
        let m = flow.tangent_at(&x, 1.7).unwrap().mat;
        let gram = m.transpose() * m;
        assert!((gram - Matrix3::identity()).norm() < 1e-12);
    }

    #[test]
    fn predicted_structure_examples() {
        let t3 = ModelFlow::default_flow(FlowFamily::LinearTorus3);
        let x = geometry::sample_point(t3.manifold(), &mut test_rng(1));
        assert_eq!(t3.predict_orbit_structure(&x), OrbitStructure::DenseInM);

        let lens = ModelFlow::default_flow(FlowFamily::LensDiagonal);
        let m = lens.manifold().clone();
        let pole = canonicalize_point(&Coords::Sphere([1.0, 0.0, 0.0, 0.0]), &m).unwrap();
        assert_eq!(lens.predict_orbit_structure(&pole), OrbitStructure::ClosedOrbit);
        let mid = canonicalize_point(
            &Coords::Sphere([0.5f64.sqrt(), 0.0, 0.5f64.sqrt(), 0.0]),
            &m,
        )
        .unwrap();
        assert_eq!(lens.predict_orbit_structure(&mid), OrbitStructure::DenseInTorusFiber);

        let susp = ModelFlow::default_flow(FlowFamily::SuspensionRotation);
        let sm = susp.manifold().clone();
        let pole = canonicalize_point(
            &Coords::SphereCircle { u: [0.0, 0.0, 1.0], s: 0.3 },
            &sm,
        )
        .unwrap();
        assert_eq!(susp.predict_orbit_structure(&pole), OrbitStructure::ClosedOrbit);
    }

    #[test]
    fn frame_exp_log_roundtrip() {
        let mut rng = test_rng(31);
        for flow in ModelFlow::default_catalog() {
            let x = geometry::sample_point(flow.manifold(), &mut rng);
            let frame = flow.frame_at(&x).unwrap();
            let w = [0.02, -0.015, 0.01];
            let y = frame.exp(w).unwrap();
            let w2 = frame.log(&y);
            for i in 0..3 {
                assert!(
                    (w[i] - w2[i]).abs() < 1e-9,
                    "{:?}: frame roundtrip {w:?} vs {w2:?}",
                    flow.family()
                );
            }
        }
    }

    #[test]
    fn catalog_round_trips_through_json() {
        for flow in ModelFlow::default_catalog() {
            let spec = flow.spec();
            let json = serde_json::to_string(&spec).unwrap();
            let spec2: FlowSpec = serde_json::from_str(&json).unwrap();
            let flow2 = ModelFlow::from_spec(&spec2).unwrap();
            assert_eq!(flow.family(), flow2.family());
        }
    }
}
