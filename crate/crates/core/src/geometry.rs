//! Direction algebra, local frames, and specular reflection/refraction.
//!
//! Directions are plain unit [`Vec3`] values on the full sphere. Reflection
//! and refraction use the flow-of-light convention: the input `d` is the
//! direction the light travels in, and the output is the direction it
//! travels in after the bounce.

use core::fmt;
use core::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use crate::math::{safe_sqrt, sqrt};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    /// The geometric normal of the local shading frame.
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    #[inline]
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    /// Unit direction from spherical coordinates around `+z`.
    pub fn from_spherical(theta: f64, phi: f64) -> Self {
        let (st, ct) = crate::math::sin_cos(theta);
        let (sp, cp) = crate::math::sin_cos(phi);
        Vec3::new(st * cp, st * sp, ct)
    }

    #[inline]
    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    #[inline]
    pub fn length_squared(self) -> f64 {
        self.dot(self)
    }

    #[inline]
    pub fn length(self) -> f64 {
        sqrt(self.length_squared())
    }

    /// Normalized copy, or `None` for a (numerically) zero vector.
    #[inline]
    pub fn try_normalize(self) -> Option<Vec3> {
        let l2 = self.length_squared();
        if l2 > 1e-300 && l2.is_finite() {
            Some(self / sqrt(l2))
        } else {
            None
        }
    }

    #[inline]
    pub fn normalize(self) -> Vec3 {
        self / self.length()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Polar angle from `+z`.
    pub fn theta(self) -> f64 {
        crate::math::acos(self.z)
    }

    /// Azimuth in `[0, 2pi)`.
    pub fn phi(self) -> f64 {
        let p = crate::math::atan2(self.y, self.x);
        if p < 0.0 {
            p + 2.0 * crate::math::PI
        } else {
            p
        }
    }

    /// Mirror through the tangent plane (`z -> -z`).
    #[inline]
    pub fn mirror_z(self) -> Vec3 {
        Vec3::new(self.x, self.y, -self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    #[inline]
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    #[inline]
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    #[inline]
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    #[inline]
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec3> for f64 {
    type Output = Vec3;
    #[inline]
    fn mul(self, v: Vec3) -> Vec3 {
        v * self
    }
}

impl Div<f64> for Vec3 {
    type Output = Vec3;
    #[inline]
    fn div(self, s: f64) -> Vec3 {
        let inv = 1.0 / s;
        self * inv
    }
}

/// Returned by [`half_vector`] when the two directions are opposite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DegenerateHalfVector;

impl fmt::Display for DegenerateHalfVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("half vector of opposite directions is undefined")
    }
}

impl core::error::Error for DegenerateHalfVector {}

/// `(a + b) / |a + b|`.
pub fn half_vector(a: Vec3, b: Vec3) -> Result<Vec3, DegenerateHalfVector> {
    (a + b).try_normalize().ok_or(DegenerateHalfVector)
}

/// Specular bounce of the light flow `d` about the normal `m`.
///
/// Either orientation of `m` gives the same result.
#[inline]
pub fn reflect(d: Vec3, m: Vec3) -> Vec3 {
    d - m * (2.0 * d.dot(m))
}

/// Snell refraction of the light flow `d` through a facet with normal `m`.
///
/// `eta` is the index of the transmitted side over the index of the
/// incident side. Either orientation of `m` is accepted. Returns `None`
/// under total internal reflection.
pub fn refract(d: Vec3, m: Vec3, eta: f64) -> Option<Vec3> {
    debug_assert!(eta > 0.0);
    let w = -d;
    let n = if w.dot(m) < 0.0 { -m } else { m };
    let cos_i = w.dot(n);
    let sin2_t = (1.0 - cos_i * cos_i).max(0.0) / (eta * eta);
    if sin2_t >= 1.0 {
        return None;
    }
    let cos_t = safe_sqrt(1.0 - sin2_t);
    let t = d / eta + n * (cos_i / eta - cos_t);
    Some(t.normalize())
}

/// Orthonormal right-handed basis `(s, t, n)`.
///
/// The local shading space of every BSDF routine is the frame's coordinate
/// system, with the geometric normal mapped to `(0, 0, 1)` and the tangent
/// `s` to `(1, 0, 0)` for anisotropy alignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub s: Vec3,
    pub t: Vec3,
    pub n: Vec3,
}

impl Frame {
    pub const IDENTITY: Frame = Frame { s: Vec3::X, t: Vec3::Y, n: Vec3::Z };

    /// Branchless basis around a unit normal (Duff et al.).
    pub fn from_normal(n: Vec3) -> Frame {
        let sign = if n.z >= 0.0 { 1.0 } else { -1.0 };
        let a = -1.0 / (sign + n.z);
        let b = n.x * n.y * a;
        let s = Vec3::new(1.0 + sign * n.x * n.x * a, sign * b, -sign * n.x);
        let t = Vec3::new(b, sign + n.y * n.y * a, -n.y);
        Frame { s, t, n }
    }

    /// Basis with `s` aligned to the projection of `tangent` onto the plane of `n`.
    pub fn from_normal_tangent(n: Vec3, tangent: Vec3) -> Frame {
        match (tangent - n * tangent.dot(n)).try_normalize() {
            Some(s) => Frame { s, t: n.cross(s), n },
            None => Frame::from_normal(n),
        }
    }

    #[inline]
    pub fn to_local(&self, v: Vec3) -> Vec3 {
        Vec3::new(v.dot(self.s), v.dot(self.t), v.dot(self.n))
    }

    #[inline]
    pub fn to_world(&self, v: Vec3) -> Vec3 {
        self.s * v.x + self.t * v.y + self.n * v.z
    }
}
