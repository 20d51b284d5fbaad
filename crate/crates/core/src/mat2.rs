//! Small dense 2×2 complex matrices.

use num_complex::Complex64;
use std::ops::{Add, Mul, Neg, Sub};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Row-major 2×2 complex matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Mat2([[a, b], [c, d]])
    }
    pub const fn identity() -> Self {
        Mat2::new(ONE, ZERO, ZERO, ONE)
    }
    pub const fn zero() -> Self {
        Mat2::new(ZERO, ZERO, ZERO, ZERO)
    }
    pub fn diag(a: C64, d: C64) -> Self {
        Mat2::new(a, ZERO, ZERO, d)
    }
    pub fn from_cols(c1: [C64; 2], c2: [C64; 2]) -> Self {
        Mat2::new(c1[0], c2[0], c1[1], c2[1])
    }
    /// σ₃
    pub fn sigma3() -> Self {
        Mat2::diag(ONE, -ONE)
    }
    pub fn col(&self, j: usize) -> [C64; 2] {
        [self.0[0][j], self.0[1][j]]
    }
    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }
    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }
    pub fn inv(&self) -> Self {
        let d = self.det();
        Mat2::new(self.0[1][1] / d, -self.0[0][1] / d, -self.0[1][0] / d, self.0[0][0] / d)
    }
    /// Adjugate; equals the inverse when det = 1.
    pub fn adj(&self) -> Self {
        Mat2::new(self.0[1][1], -self.0[0][1], -self.0[1][0], self.0[0][0])
    }
    pub fn dagger(&self) -> Self {
        Mat2::new(self.0[0][0].conj(), self.0[1][0].conj(), self.0[0][1].conj(), self.0[1][1].conj())
    }
    pub fn scale(&self, s: C64) -> Self {
        Mat2::new(self.0[0][0] * s, self.0[0][1] * s, self.0[1][0] * s, self.0[1][1] * s)
    }
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        [
            self.0[0][0] * v[0] + self.0[0][1] * v[1],
            self.0[1][0] * v[0] + self.0[1][1] * v[1],
        ]
    }
    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
    pub fn commutator(&self, other: &Mat2) -> Mat2 {
        *self * *other - *other * *self
    }

    /// Matrix exponential, exact for 2×2 via the Cayley-Hamilton form.
    pub fn exp(&self) -> Mat2 {
        let half = self.trace() * 0.5;
        let m = *self - Mat2::identity().scale(half);
        // m is trace-free: m² = -det(m)·𝟙 = s²·𝟙
        let s2 = -m.det();
        let s = s2.sqrt();
        let (ch, sh_over_s) = if s.norm() < 1e-4 {
            // series to avoid 0/0
            (ONE + s2 / 2.0 + s2 * s2 / 24.0, ONE + s2 / 6.0 + s2 * s2 / 120.0)
        } else {
            (s.cosh(), s.sinh() / s)
        };
        let e = half.exp();
        (Mat2::identity().scale(ch) + m.scale(sh_over_s)).scale(e)
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        let a = self.0;
        let b = o.0;
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        self + (-o)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-ONE)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        let a = self.0;
        let b = o.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}
