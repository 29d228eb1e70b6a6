//! Round-sphere helpers: S³ via quaternion frames, S² via axis frames.

/// Dot product on R⁴.
pub fn dot4(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3]
}

pub fn norm4(x: &[f64; 4]) -> f64 {
    dot4(x, x).sqrt()
}

pub fn normalize4(x: &[f64; 4]) -> [f64; 4] {
    let n = norm4(x);
    [x[0] / n, x[1] / n, x[2] / n, x[3] / n]
}

/// Geodesic distance on the unit S³.
pub fn arc4(x: &[f64; 4], y: &[f64; 4]) -> f64 {
    dot4(x, y).clamp(-1.0, 1.0).acos()
}

/// Global orthonormal tangent frame at x ∈ S³ from quaternion left
/// multiplication: (i·x, j·x, k·x) for x = a + bi + cj + dk.
pub fn quat_frame(x: &[f64; 4]) -> [[f64; 4]; 3] {
    let [a, b, c, d] = *x;
    [[-b, a, -d, c], [-c, d, a, -b], [-d, -c, b, a]]
}

/// exp_x(v) for tangent v at x (v ⊥ x).
pub fn s3_exp(x: &[f64; 4], v: &[f64; 4]) -> [f64; 4] {
    let n = norm4(v);
    if n < 1e-300 {
        return *x;
    }
    let (s, c) = n.sin_cos();
    let mut out = [0.0; 4];
    for i in 0..4 {
        out[i] = c * x[i] + s * v[i] / n;
    }
    normalize4(&out)
}

/// log_x(y): tangent vector at x pointing to y with length arc4(x, y).
pub fn s3_log(x: &[f64; 4], y: &[f64; 4]) -> [f64; 4] {
    let cos_t = dot4(x, y).clamp(-1.0, 1.0);
    let theta = cos_t.acos();
    let mut w = [0.0; 4];
    for i in 0..4 {
        w[i] = y[i] - cos_t * x[i];
    }
    let n = norm4(&w);
    if n < 1e-15 {
        return [0.0; 4];
    }
    for wi in &mut w {
        *wi *= theta / n;
    }
    w
}

/// Rotation by angles (phi1, phi2) in the two complex coordinate planes,
/// i.e. (z1, z2) ↦ (e^{i phi1} z1, e^{i phi2} z2).
pub fn rotate_pair(x: &[f64; 4], phi1: f64, phi2: f64) -> [f64; 4] {
    let (s1, c1) = phi1.sin_cos();
    let (s2, c2) = phi2.sin_cos();
    [
        c1 * x[0] - s1 * x[1],
        s1 * x[0] + c1 * x[1],
        c2 * x[2] - s2 * x[3],
        s2 * x[2] + c2 * x[3],
    ]
}

pub fn dot3(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    x[0] * y[0] + x[1] * y[1] + x[2] * y[2]
}

pub fn cross3(x: &[f64; 3], y: &[f64; 3]) -> [f64; 3] {
    [
        x[1] * y[2] - x[2] * y[1],
        x[2] * y[0] - x[0] * y[2],
        x[0] * y[1] - x[1] * y[0],
    ]
}

pub fn norm3(x: &[f64; 3]) -> f64 {
    dot3(x, x).sqrt()
}

pub fn normalize3(x: &[f64; 3]) -> [f64; 3] {
    let n = norm3(x);
    [x[0] / n, x[1] / n, x[2] / n]
}

/// Geodesic distance on the unit S².
pub fn arc3(x: &[f64; 3], y: &[f64; 3]) -> f64 {
    dot3(x, y).clamp(-1.0, 1.0).acos()
}

/// Rotation about the z-axis by `angle` radians.
pub fn rot_z(u: &[f64; 3], angle: f64) -> [f64; 3] {
    let (s, c) = angle.sin_cos();
    [c * u[0] - s * u[1], s * u[0] + c * u[1], u[2]]
}

/// Right-handed orthonormal tangent frame at u ∈ S² (f1 × f2 = u).
/// Away from the poles f1 points along the latitude circle.
pub fn s2_frame(u: &[f64; 3]) -> [[f64; 3]; 2] {
    let z = [0.0, 0.0, 1.0];
    let east = cross3(&z, u);
    let n = norm3(&east);
    if n < 1e-9 {
        // Pole: fixed frame, oriented so that f1 × f2 = u.
        return if u[2] > 0.0 {
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]
        } else {
            [[1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]
        };
    }
    let f1 = [east[0] / n, east[1] / n, east[2] / n];
    let f2 = normalize3(&cross3(u, &f1));
    [f1, f2]
}

pub fn s2_exp(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    let n = norm3(v);
    if n < 1e-300 {
        return *u;
    }
    let (s, c) = n.sin_cos();
    normalize3(&[
        c * u[0] + s * v[0] / n,
        c * u[1] + s * v[1] / n,
        c * u[2] + s * v[2] / n,
    ])
}

pub fn s2_log(u: &[f64; 3], w: &[f64; 3]) -> [f64; 3] {
    let cos_t = dot3(u, w).clamp(-1.0, 1.0);
    let theta = cos_t.acos();
    let mut v = [
        w[0] - cos_t * u[0],
        w[1] - cos_t * u[1],
        w[2] - cos_t * u[2],
    ];
    let n = norm3(&v);
    if n < 1e-15 {
        return [0.0; 3];
    }
    for vi in &mut v {
        *vi *= theta / n;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quat_frame_is_orthonormal() {
        let x = normalize4(&[0.3, -0.5, 0.7, 0.4]);
        let f = quat_frame(&x);
        for i in 0..3 {
            assert!((norm4(&f[i]) - 1.0).abs() < 1e-14);
            assert!(dot4(&f[i], &x).abs() < 1e-14);
            for j in (i + 1)..3 {
                assert!(dot4(&f[i], &f[j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn exp_log_roundtrip() {
        let x = normalize4(&[1.0, 0.2, -0.3, 0.1]);
        let y = normalize4(&[0.1, 0.9, 0.2, -0.3]);
        let v = s3_log(&x, &y);
        let y2 = s3_exp(&x, &v);
        for i in 0..4 {
            assert!((y[i] - y2[i]).abs() < 1e-12);
        }
        assert!((norm4(&v) - arc4(&x, &y)).abs() < 1e-12);
    }

    #[test]
    fn s2_frame_right_handed() {
        for u in [
            normalize3(&[0.3, -0.2, 0.9]),
            [0.0, 0.0, 1.0],
            [0.0, 0.0, -1.0],
        ] {
            let [f1, f2] = s2_frame(&u);
            let n = cross3(&f1, &f2);
            for i in 0..3 {
                assert!((n[i] - u[i]).abs() < 1e-12);
            }
        }
    }
}
