//! Hyperbolic toral automorphism used as the positive control: the one
//! system in the laboratory that *is* hyperbolic, so every falsifier must
//! light up on it.

use crate::error::{Error, Result};
use crate::geometry::{wrap, wrap_diff};
use crate::sections::SectionSystem;
use nalgebra::Matrix2;

/// Area-preserving hyperbolic automorphism of the unit 2-torus.
#[derive(Debug, Clone, Copy)]
pub struct CatMap {
    pub a: [[i64; 2]; 2],
    lambda: f64,
}

impl CatMap {
    pub fn new(a: [[i64; 2]; 2]) -> Result<Self> {
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        let trace = a[0][0] + a[1][1];
        if det != 1 || trace <= 2 {
            return Err(Error::NotHyperbolicMatrix(format!(
                "det = {det}, trace = {trace}"
            )));
        }
        let tr = trace as f64;
        let lambda = (tr + (tr * tr - 4.0).sqrt()) / 2.0;
        Ok(Self { a, lambda })
    }

    /// The classical [[2,1],[1,1]] control.
    pub fn standard() -> Self {
        Self::new([[2, 1], [1, 1]]).expect("valid literal")
    }

    pub fn expanding_eigenvalue(&self) -> f64 {
        self.lambda
    }

    pub fn tangent(&self) -> Matrix2<f64> {
        Matrix2::new(
            self.a[0][0] as f64,
            self.a[0][1] as f64,
            self.a[1][0] as f64,
            self.a[1][1] as f64,
        )
    }

    /// Linear action on the plane (no wrapping); the synthetic "return map"
    /// applied to a flat disk in the isometry-defect control.
    pub fn apply_linear(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.a[0][0] as f64 * p[0] + self.a[0][1] as f64 * p[1],
            self.a[1][0] as f64 * p[0] + self.a[1][1] as f64 * p[1],
        ]
    }

    pub fn apply_linear_inv(&self, p: [f64; 2]) -> [f64; 2] {
        [
            self.a[1][1] as f64 * p[0] - self.a[0][1] as f64 * p[1],
            -(self.a[1][0] as f64) * p[0] + self.a[0][0] as f64 * p[1],
        ]
    }

    /// Iterations until two points at separation d0 along the expanding
    /// direction separate beyond `threshold` (None within n_max).
    pub fn separation_exceeds(&self, d0: f64, threshold: f64, n_max: usize) -> Option<usize> {
        let phi = (self.lambda - self.a[0][0] as f64) / self.a[0][1] as f64;
        let dir = {
            let n = (1.0 + phi * phi).sqrt();
            [1.0 / n, phi / n]
        };
        let x = [0.2, 0.3];
        let y = [x[0] + d0 * dir[0], x[1] + d0 * dir[1]];
        let mut a = x;
        let mut b = y;
        for n in 1..=n_max {
            a = self.apply(a);
            b = self.apply(b);
            if self.dist(a, b) > threshold {
                return Some(n);
            }
        }
        None
    }
}

impl SectionSystem for CatMap {
    fn dim(&self) -> usize {
        2
    }

    fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.apply_linear(p);
        [wrap(q[0]), wrap(q[1])]
    }

    fn apply_inv(&self, p: [f64; 2]) -> [f64; 2] {
        let q = self.apply_linear_inv(p);
        [wrap(q[0]), wrap(q[1])]
    }

    fn dist(&self, a: [f64; 2], b: [f64; 2]) -> f64 {
        let d0 = wrap_diff(a[0] - b[0]);
        let d1 = wrap_diff(a[1] - b[1]);
        (d0 * d0 + d1 * d1).sqrt()
    }

    fn diameter(&self) -> f64 {
        0.5f64 * std::f64::consts::SQRT_2
    }

    fn translation(&self) -> Option<[f64; 2]> {
        None
    }

    fn label(&self) -> String {
        format!("cat map {:?}", self.a)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_eigenvalue() {
        let m = CatMap::standard();
        assert!((m.expanding_eigenvalue() - (3.0 + 5f64.sqrt()) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn separation_blows_up_quickly() {
        // 1e-6 * lambda^n > 0.1 first at n = 12 for lambda = (3+sqrt5)/2.
        let m = CatMap::standard();
        let n = m.separation_exceeds(1e-6, 0.1, 100).unwrap();
        assert_eq!(n, 12);
    }

    #[test]
    fn rejects_non_hyperbolic() {
        assert!(CatMap::new([[1, 1], [0, 1]]).is_err());
    }
}
