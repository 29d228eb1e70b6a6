//! Sol-type geometry of the hyperbolic torus bundle T³_A.
//!
//! In eigencoordinates (x₊, x₋) of A the invariant metric is
//! λ₊^{-2t} dx₊² + λ₊^{2t} dx₋² + dt². The deck twist (m, t) ∼ (A m, t+1)
//! acts diagonally on eigencoordinates and is an isometry; the eigenflow
//! moves x₊ only, so the transverse leaf space carries the 2-dimensional
//! metric λ₊^{2t} dx₋² + dt², a hyperbolic plane of curvature -(ln λ₊)².

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Validated hyperbolic gluing matrix with its eigendata.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleData {
    pub a: [[i64; 2]; 2],
    /// Larger eigenvalue λ₊ > 1.
    pub lambda: f64,
    pub log_lambda: f64,
    /// Unit eigenvector for λ₊.
    pub v_plus: [f64; 2],
    /// Unit eigenvector for λ₋ = 1/λ₊.
    pub v_minus: [f64; 2],
    einv: [[f64; 2]; 2],
}

impl BundleData {
    pub fn new(a: [[i64; 2]; 2]) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let trace = a[0][0] + a[1][1];
        if det != 1 || trace <= 2 {
            return Err(Error::NotHyperbolicMatrix(format!(
                "det = {det}, trace = {trace}"
            )));
        }
        let tr = trace as f64;
        let disc = (tr * tr - 4.0).sqrt();
        let lambda = (tr + disc) / 2.0;
        let lambda_minus = (tr - disc) / 2.0;
        let v_plus = eigenvector(&a, lambda);
        let v_minus = eigenvector(&a, lambda_minus);
        let residual = eig_residual(&a, lambda, &v_plus).max(eig_residual(&a, lambda_minus, &v_minus));
        if residual > 1e-12 {
            return Err(Error::NotHyperbolicMatrix(format!(
                "eigen residual {residual:.3e}"
            )));
        }
        // E = [v_plus v_minus] as columns; einv maps chart m to eigencoords.
        let e = [[v_plus[0], v_minus[0]], [v_plus[1], v_minus[1]]];
        let de = e[0][0] * e[1][1] - e[0][1] * e[1][0];
        let einv = [
            [e[1][1] / de, -e[0][1] / de],
            [-e[1][0] / de, e[0][0] / de],
        ];
        Ok(Self {
            a,
            lambda,
            log_lambda: lambda.ln(),
            v_plus,
            v_minus,
            einv,
        })
    }

    pub fn apply(&self, m: &[f64; 2]) -> [f64; 2] {
        [
            self.a[0][0] as f64 * m[0] + self.a[0][1] as f64 * m[1],
            self.a[1][0] as f64 * m[0] + self.a[1][1] as f64 * m[1],
        ]
    }

    pub fn apply_inv(&self, m: &[f64; 2]) -> [f64; 2] {
        // A⁻¹ = [[a11, -a01], [-a10, a00]] since det = 1.
        [
            self.a[1][1] as f64 * m[0] - self.a[0][1] as f64 * m[1],
            -(self.a[1][0] as f64) * m[0] + self.a[0][0] as f64 * m[1],
        ]
    }

    /// Chart coordinates m → eigencoordinates (x₊, x₋).
    pub fn to_eigen(&self, m: &[f64; 2]) -> [f64; 2] {
        [
            self.einv[0][0] * m[0] + self.einv[0][1] * m[1],
            self.einv[1][0] * m[0] + self.einv[1][1] * m[1],
        ]
    }

    pub fn from_eigen(&self, x: &[f64; 2]) -> [f64; 2] {
        [
            self.v_plus[0] * x[0] + self.v_minus[0] * x[1],
            self.v_plus[1] * x[0] + self.v_minus[1] * x[1],
        ]
    }

    /// Length of the straight chart segment from (m0, t0) to (m1, t1)
    /// in the Sol metric; exact when t0 == t1, Gauss-Legendre otherwise.
    pub fn segment_length(&self, m0: &[f64; 2], t0: f64, m1: &[f64; 2], t1: f64) -> f64 {
        let x0 = self.to_eigen(m0);
        let x1 = self.to_eigen(m1);
        let dp = x1[0] - x0[0];
        let dm = x1[1] - x0[1];
        let dt = t1 - t0;
        let ll = self.log_lambda;
        if dt == 0.0 {
            let ep = (-2.0 * ll * t0).exp();
            return (ep * dp * dp + dm * dm / ep + dt * dt).sqrt();
        }
        let (nodes, weights) = gauss_legendre_32();
        let mut total = 0.0;
        for (u, w) in nodes.iter().zip(weights) {
            let t = t0 + u * dt;
            let ep = (-2.0 * ll * t).exp();
            total += w * (ep * dp * dp + dm * dm / ep + dt * dt).sqrt();
        }
        total
    }

    /// Holonomy-invariant transverse distance between the leaves through
    /// points with leaf coordinates (x₋, t): the hyperbolic-plane closed form
    /// after the substitution w = λ^{-t} / ln λ.
    pub fn transverse_leaf_distance(&self, xm0: f64, t0: f64, xm1: f64, t1: f64) -> f64 {
        let ll = self.log_lambda;
        let w0 = (-ll * t0).exp() / ll;
        let w1 = (-ll * t1).exp() / ll;
        let dx = xm1 - xm0;
        let dw = w1 - w0;
        let arg = 1.0 + (dx * dx + dw * dw) / (2.0 * w0 * w1);
        arg.acosh() / ll
    }
}

fn eigenvector(a: &[[i64; 2]; 2], lambda: f64) -> [f64; 2] {
    let a00 = a[0][0] as f64;
    let a01 = a[0][1] as f64;
    let a10 = a[1][0] as f64;
    let a11 = a[1][1] as f64;
    let v = if a01.abs() > 1e-12 {
        [a01, lambda - a00]
    } else {
        [lambda - a11, a10]
    };
    let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
    [v[0] / n, v[1] / n]
}

fn eig_residual(a: &[[i64; 2]; 2], lambda: f64, v: &[f64; 2]) -> f64 {
    let av = [
        a[0][0] as f64 * v[0] + a[0][1] as f64 * v[1],
        a[1][0] as f64 * v[0] + a[1][1] as f64 * v[1],
    ];
    ((av[0] - lambda * v[0]).powi(2) + (av[1] - lambda * v[1]).powi(2)).sqrt()
}

/// 32-point Gauss-Legendre rule on [0, 1], computed once by Newton iteration
/// on the Legendre polynomial.
pub fn gauss_legendre_32() -> (&'static [f64; 32], &'static [f64; 32]) {
    static RULE: OnceLock<([f64; 32], [f64; 32])> = OnceLock::new();
    let (n, w) = RULE.get_or_init(|| {
        let mut nodes = [0.0; 32];
        let mut weights = [0.0; 32];
        let n = 32usize;
        for i in 0..n {
            // Initial guess on [-1, 1], then Newton.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let wt = 2.0 / ((1.0 - x * x) * dp * dp);
            // Map to [0, 1]; reverse so nodes are increasing.
            nodes[n - 1 - i] = 0.5 * (x + 1.0);
            weights[n - 1 - i] = 0.5 * wt;
        }
        (nodes, weights)
    });
    (n, w)
}

/// Legendre P_n(x) and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_matrices() {
        assert!(BundleData::new([[1, 0], [0, 1]]).is_err()); // trace 2
        assert!(BundleData::new([[2, 1], [1, 2]]).is_err()); // det 3
        assert!(BundleData::new([[0, -1], [1, 0]]).is_err()); // trace 0
    }

    #[test]
    fn cat_map_eigendata() {
        let b = BundleData::new([[2, 1], [1, 1]]).unwrap();
        let expected = (3.0 + 5f64.sqrt()) / 2.0;
        assert!((b.lambda - expected).abs() < 1e-14);
        // v_plus ∝ ((1+√5)/2, 1)
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let ratio = b.v_plus[0] / b.v_plus[1];
        assert!((ratio - phi).abs() < 1e-12);
    }

    #[test]
    fn eigen_roundtrip() {
        let b = BundleData::new([[2, 1], [1, 1]]).unwrap();
        let m = [0.3, -0.7];
        let x = b.to_eigen(&m);
        let m2 = b.from_eigen(&x);
        assert!((m[0] - m2[0]).abs() < 1e-14);
        assert!((m[1] - m2[1]).abs() < 1e-14);
    }

    #[test]
    fn quadrature_matches_flat_segment() {
        let b = BundleData::new([[2, 1], [1, 1]]).unwrap();
        // Straight vertical segment: exact length |dt|.
        let l = b.segment_length(&[0.0, 0.0], 0.0, &[0.0, 0.0], 0.8);
        assert!((l - 0.8).abs() < 1e-12);
    }

    #[test]
    fn gl_rule_integrates_polynomials() {
        let (nodes, weights) = gauss_legendre_32();
        // ∫₀¹ x⁵ dx = 1/6
        let s: f64 = nodes
            .iter()
            .zip(weights)
            .map(|(x, w)| w * x.powi(5))
            .sum();
        assert!((s - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn transverse_leaf_distance_symmetry() {
        let b = BundleData::new([[2, 1], [1, 1]]).unwrap();
        let d1 = b.transverse_leaf_distance(0.1, 0.2, -0.2, 0.7);
        let d2 = b.transverse_leaf_distance(-0.2, 0.7, 0.1, 0.2);
        assert!((d1 - d2).abs() < 1e-12);
        // Small flat limit: distance ≈ Euclidean in (λ^t x₋, t) near t = 0.
        let d = b.transverse_leaf_distance(0.0, 0.0, 1e-4, 0.0);
        assert!((d - 1e-4).abs() < 1e-10);
    }
}
