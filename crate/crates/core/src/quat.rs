//! Quaternion arithmetic.
//!
//! A quaternion is stored as four reals `a + ıb + ȷc + kd` with the Hamilton sign
//! table `ıȷ = k`, `ȷk = ı`, `kı = ȷ`. The complex part `Co(ζ) = a + ıb` and the
//! `ȷ/k` remainder are exposed separately because the qubit dictionary reads a
//! density matrix off exactly that split.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// `a + ıb + ȷc + kd` in double precision.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

/// One of the three imaginary units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    I,
    J,
    K,
}

/// Component view of a quaternion: `Re`, `Im₁..Im₃`, `Co` and `|ζ − Co ζ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parts {
    pub re: f64,
    pub im1: f64,
    pub im2: f64,
    pub im3: f64,
    pub co: Complex64,
    pub jk_norm: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 0.0);
    pub const ONE: Quaternion = Quaternion::new(1.0, 0.0, 0.0, 0.0);
    pub const I: Quaternion = Quaternion::new(0.0, 1.0, 0.0, 0.0);
    pub const J: Quaternion = Quaternion::new(0.0, 0.0, 1.0, 0.0);
    pub const K: Quaternion = Quaternion::new(0.0, 0.0, 0.0, 1.0);

    pub const fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im, 0.0, 0.0)
    }

    /// `Co(ζ) = a + ıb`.
    pub fn co(&self) -> Complex64 {
        Complex64::new(self.a, self.b)
    }

    /// `ζ − Co(ζ) = ȷc + kd`.
    pub fn jk_part(&self) -> Quaternion {
        Self::new(0.0, 0.0, self.c, self.d)
    }

    /// `|ζ − Co(ζ)| = √(c² + d²)`.
    pub fn jk_norm(&self) -> f64 {
        self.c.hypot(self.d)
    }

    pub fn co_norm(&self) -> f64 {
        self.a.hypot(self.b)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.a * self.a + self.b * self.b + self.c * self.c + self.d * self.d
    }

    /// Overflow-safe Euclidean norm.
    pub fn norm(&self) -> f64 {
        self.co_norm().hypot(self.jk_norm())
    }

    pub fn conj(&self) -> Self {
        Self::new(self.a, -self.b, -self.c, -self.d)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    /// `ζ⁻¹ = ζ̄ / |ζ|²`.
    pub fn inv(&self) -> Result<Self> {
        let n2 = self.norm_sqr();
        if n2 == 0.0 {
            return Err(Error::ZeroInverse);
        }
        Ok(self.conj().scale(1.0 / n2))
    }

    pub fn parts(&self) -> Parts {
        Parts {
            re: self.a,
            im1: self.b,
            im2: self.c,
            im3: self.d,
            co: self.co(),
            jk_norm: self.jk_norm(),
        }
    }

    /// `cos θ + u sin θ` for the imaginary unit `u` named by `axis`.
    pub fn unit_exp(axis: Axis, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        match axis {
            Axis::I => Self::new(c, s, 0.0, 0.0),
            Axis::J => Self::new(c, 0.0, s, 0.0),
            Axis::K => Self::new(c, 0.0, 0.0, s),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.b.is_finite() && self.c.is_finite() && self.d.is_finite()
    }

    /// Euclidean distance in `(a, b, c, d)`.
    pub fn dist(&self, other: &Self) -> f64 {
        (*self - *other).norm()
    }
}

/// Free-function form of the Hamilton product.
pub fn mul(x: Quaternion, y: Quaternion) -> Quaternion {
    x * y
}

/// Free-function form of the inverse.
pub fn inv(x: Quaternion) -> Result<Quaternion> {
    x.inv()
}

impl Mul for Quaternion {
    type Output = Quaternion;

    fn mul(self, y: Quaternion) -> Quaternion {
        let x = self;
        Quaternion::new(
            x.a * y.a - x.b * y.b - x.c * y.c - x.d * y.d,
            x.a * y.b + x.b * y.a + x.c * y.d - x.d * y.c,
            x.a * y.c - x.b * y.d + x.c * y.a + x.d * y.b,
            x.a * y.d + x.b * y.c - x.c * y.b + x.d * y.a,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;

    fn mul(self, s: f64) -> Quaternion {
        self.scale(s)
    }
}

impl Add for Quaternion {
    type Output = Quaternion;

    fn add(self, y: Quaternion) -> Quaternion {
        Quaternion::new(self.a + y.a, self.b + y.b, self.c + y.c, self.d + y.d)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, y: Quaternion) {
        *self = *self + y;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;

    fn sub(self, y: Quaternion) -> Quaternion {
        Quaternion::new(self.a - y.a, self.b - y.b, self.c - y.c, self.d - y.d)
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;

    fn neg(self) -> Quaternion {
        Quaternion::new(-self.a, -self.b, -self.c, -self.d)
    }
}

impl From<Complex64> for Quaternion {
    fn from(z: Complex64) -> Self {
        Quaternion::from_complex(z)
    }
}

impl From<f64> for Quaternion {
    fn from(x: f64) -> Self {
        Quaternion::new(x, 0.0, 0.0, 0.0)
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:+}i{:+}j{:+}k", self.a, self.b, self.c, self.d)
    }
}
