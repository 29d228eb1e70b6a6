//! Exact quadratic irrationals `(a + b√d)/c`.
//!
//! Flow slopes and rotation numbers are stored in this form so that
//! "irrational" is a decidable predicate instead of a floating-point guess:
//! rational (in)dependence reduces to an exact integer rank computation, and
//! continued fractions can be expanded with integer arithmetic only.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// `(a + b√d)/c` with `c > 0`, `d` squarefree (`d = 0` when the value is
/// rational) and `gcd(a, b, c) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadIrr {
    a: i64,
    b: i64,
    d: i64,
    c: i64,
}

impl QuadIrr {
    pub fn new(a: i64, b: i64, d: i64, c: i64) -> Result<Self> {
        if c == 0 {
            return Err(Error::InvalidParameter("quadratic irrational with c = 0".into()));
        }
        if d < 0 {
            return Err(Error::InvalidParameter("negative radicand".into()));
        }
        let (mut a, mut b, mut d, mut c) = (a, b, d, c);
        if d == 0 || b == 0 {
            b = 0;
            d = 0;
        } else {
            let (sq, rest) = square_part(d);
            b *= sq;
            d = rest;
            if d == 1 {
                a += b;
                b = 0;
                d = 0;
            }
        }
        if c < 0 {
            a = -a;
            b = -b;
            c = -c;
        }
        let g = gcd(gcd(a.unsigned_abs(), b.unsigned_abs()), c.unsigned_abs()).max(1) as i64;
        Ok(Self { a: a / g, b: b / g, d, c: c / g })
    }

    pub fn integer(n: i64) -> Self {
        Self { a: n, b: 0, d: 0, c: 1 }
    }

    pub fn rational(p: i64, q: i64) -> Result<Self> {
        Self::new(p, 0, 0, q)
    }

    /// √d for a nonnegative integer d.
    pub fn sqrt(d: i64) -> Result<Self> {
        Self::new(0, 1, d, 1)
    }

    /// (√5 − 1)/2, the golden-ratio conjugate.
    pub fn golden_conjugate() -> Self {
        Self::new(-1, 1, 5, 2).expect("valid literal")
    }

    pub fn value(&self) -> f64 {
        (self.a as f64 + self.b as f64 * (self.d as f64).sqrt()) / self.c as f64
    }

    pub fn is_rational(&self) -> bool {
        self.b == 0
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0 && self.b == 0
    }

    pub fn components(&self) -> (i64, i64, i64, i64) {
        (self.a, self.b, self.d, self.c)
    }

    /// Exact ⌊self⌋.
    pub fn floor(&self) -> i64 {
        if self.b == 0 {
            return floor_div(self.a as i128, self.c as i128) as i64;
        }
        let surd = Surd::from_quad(self);
        surd.floor() as i64
    }
}

/// True when no nonzero integer combination of the values vanishes.
///
/// Each value is written in the exact basis {1} ∪ {√s : s squarefree}; the
/// values are dependent over the rationals iff the integer coefficient matrix
/// has rank below the number of values.
pub fn rationally_independent(vals: &[QuadIrr]) -> bool {
    let mut keys: Vec<i64> = vec![0];
    for v in vals {
        if v.b != 0 && !keys.contains(&v.d) {
            keys.push(v.d);
        }
    }
    // Rows scaled by c: value * c = a * (key 0) + b * (key d).
    let mut rows: Vec<Vec<i128>> = Vec::with_capacity(vals.len());
    let lcm_c: i128 = vals.iter().fold(1i128, |l, v| lcm(l, v.c as i128));
    for v in vals {
        let scale = lcm_c / v.c as i128;
        let mut row = vec![0i128; keys.len()];
        row[0] = v.a as i128 * scale;
        if v.b != 0 {
            let j = keys.iter().position(|&k| k == v.d).unwrap();
            row[j] = v.b as i128 * scale;
        }
        rows.push(row);
    }
    rank(rows) == vals.len()
}

/// True when x/y is irrational (y must be nonzero).
pub fn ratio_is_irrational(x: &QuadIrr, y: &QuadIrr) -> bool {
    !y.is_zero() && rationally_independent(&[*x, *y])
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

fn lcm(a: i128, b: i128) -> i128 {
    a / gcd(a.unsigned_abs() as u64, b.unsigned_abs() as u64) as i128 * b
}

/// d = sq² · rest with rest squarefree.
fn square_part(d: i64) -> (i64, i64) {
    let mut rest = d;
    let mut sq = 1i64;
    let mut f = 2i64;
    while f * f <= rest {
        while rest % (f * f) == 0 {
            rest /= f * f;
            sq *= f;
        }
        f += 1;
    }
    (sq, rest)
}

fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

pub(crate) fn isqrt(n: i128) -> i128 {
    if n < 2 {
        return n.max(0);
    }
    let mut x = (n as f64).sqrt() as i128;
    // Newton correction to the exact integer square root.
    loop {
        let y = (x + n / x) / 2;
        if y >= x {
            break;
        }
        x = y;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    while x * x > n {
        x -= 1;
    }
    x
}

/// Rank of an integer matrix via fraction-free Gaussian elimination.
fn rank(mut m: Vec<Vec<i128>>) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut r = 0;
    let mut prev = 1i128;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| m[i][c] != 0) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                m[i][j] = (m[r][c] * m[i][j] - m[i][c] * m[r][j]) / prev;
            }
            m[i][c] = 0;
        }
        prev = m[r][c];
        r += 1;
    }
    r
}

/// Quadratic surd `(p + √d)/q` with `q | (d − p²)`, the exact state of the
/// classical continued-fraction recurrence.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Surd {
    pub p: i128,
    pub d: i128,
    pub q: i128,
}

impl Surd {
    /// Only valid for irrational inputs (b ≠ 0).
    pub fn from_quad(v: &QuadIrr) -> Self {
        assert!(v.b != 0, "surd form requires an irrational value");
        let (mut p, mut d, mut q) = if v.b > 0 {
            (v.a as i128, (v.b as i128).pow(2) * v.d as i128, v.c as i128)
        } else {
            (-(v.a as i128), (v.b as i128).pow(2) * v.d as i128, -(v.c as i128))
        };
        if (d - p * p) % q != 0 {
            p *= q.abs();
            d *= q * q;
            q *= q.abs();
        }
        Self { p, d, q }
    }

    /// Ordering of √d against the integer t.
    fn cmp_sqrt(&self, t: i128) -> std::cmp::Ordering {
        if t < 0 {
            return std::cmp::Ordering::Greater;
        }
        self.d.cmp(&(t * t))
    }

    /// Exact ⌊(p + √d)/q⌋.
    pub fn floor(&self) -> i128 {
        let s = isqrt(self.d);
        let mut n = if self.q > 0 {
            floor_div(self.p + s, self.q)
        } else {
            floor_div(self.p + s + 1, self.q)
        };
        // sign(α − n) = sign(√d − (nq − p)) · sign(q); adjust the guess.
        let above = |n: i128| {
            // α ≥ n ?
            let t = n * self.q - self.p;
            let c = self.cmp_sqrt(t);
            if self.q > 0 {
                c != std::cmp::Ordering::Less
            } else {
                c != std::cmp::Ordering::Greater
            }
        };
        while !above(n) {
            n -= 1;
        }
        while above(n + 1) {
            n += 1;
        }
        n
    }

    /// One continued-fraction step: returns the partial quotient and advances.
    pub fn step(&mut self) -> i128 {
        let a = self.floor();
        let p1 = a * self.q - self.p;
        let q1 = (self.d - p1 * p1) / self.q;
        self.p = p1;
        self.q = q1;
        a
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_square_radicands() {
        // √8 = 2√2
        let x = QuadIrr::new(0, 1, 8, 1).unwrap();
        assert_eq!(x.components(), (0, 2, 2, 1));
        // √9 = 3 is rational
        let y = QuadIrr::new(0, 1, 9, 1).unwrap();
        assert!(y.is_rational());
        assert_eq!(y.value(), 3.0);
    }

    #[test]
    fn independence_basic() {
        let one = QuadIrr::integer(1);
        let r2 = QuadIrr::sqrt(2).unwrap();
        let r3 = QuadIrr::sqrt(3).unwrap();
        assert!(rationally_independent(&[one, r2, r3]));
        assert!(!rationally_independent(&[
            QuadIrr::integer(1),
            QuadIrr::integer(2),
            QuadIrr::integer(3)
        ]));
        // √2 and √8 are dependent.
        let r8 = QuadIrr::sqrt(8).unwrap();
        assert!(!rationally_independent(&[r2, r8]));
        assert!(rationally_independent(&[one, r2]));
    }

    #[test]
    fn ratio_irrationality() {
        let one = QuadIrr::integer(1);
        let r2 = QuadIrr::sqrt(2).unwrap();
        assert!(ratio_is_irrational(&one, &r2));
        assert!(!ratio_is_irrational(&r2, &QuadIrr::sqrt(8).unwrap()));
        let a = QuadIrr::new(1, 1, 5, 2).unwrap(); // (1+√5)/2
        let b = QuadIrr::new(2, 2, 5, 4).unwrap(); // same value
        assert!(!ratio_is_irrational(&a, &b));
    }

    #[test]
    fn exact_floor() {
        assert_eq!(QuadIrr::sqrt(2).unwrap().floor(), 1);
        assert_eq!(QuadIrr::golden_conjugate().floor(), 0);
        assert_eq!(QuadIrr::new(-1, -1, 2, 1).unwrap().floor(), -3); // -1-√2 ≈ -2.414
        assert_eq!(QuadIrr::rational(-7, 2).unwrap().floor(), -4);
        assert_eq!(QuadIrr::rational(7, 2).unwrap().floor(), 3);
    }

    #[test]
    fn surd_continued_fraction_terms() {
        // (√5−1)/2 = [0; 1, 1, 1, ...]
        let mut s = Surd::from_quad(&QuadIrr::golden_conjugate());
        let terms: Vec<i128> = (0..8).map(|_| s.step()).collect();
        assert_eq!(terms, vec![0, 1, 1, 1, 1, 1, 1, 1]);
        // √2−1 = [0; 2, 2, 2, ...]
        let mut s = Surd::from_quad(&QuadIrr::new(-1, 1, 2, 1).unwrap());
        let terms: Vec<i128> = (0..6).map(|_| s.step()).collect();
        assert_eq!(terms, vec![0, 2, 2, 2, 2, 2]);
    }
}
