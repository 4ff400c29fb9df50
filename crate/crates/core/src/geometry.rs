//! Unit vectors on the Poincaré sphere and the setting geometries built from them.
//!
//! Every measurement direction, both Alice's and Bob's, is a [`UnitVec3`]. The
//! constructors here never hand out a vector whose norm differs from one by
//! more than rounding.

use std::f64::consts::{FRAC_PI_3, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Error, Result};

/// Pairs closer than this (difference) or closer than this to antipodal (sum)
/// have no resolvable direction.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// A point on the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVec3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVec3 {
    pub const X: UnitVec3 = UnitVec3 { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: UnitVec3 = UnitVec3 { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: UnitVec3 = UnitVec3 { x: 0.0, y: 0.0, z: 1.0 };

    /// Normalizes `(x, y, z)`. Zero and non-finite inputs are rejected.
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::ZeroVector(x, y, z));
        }
        Ok(UnitVec3 {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    pub fn from_array(v: [f64; 3]) -> Result<Self> {
        Self::new(v[0], v[1], v[2])
    }

    /// `(sin θ cos φ, sin θ sin φ, cos θ)` with `θ ∈ [0, π]`, `φ ∈ (−π, π]`.
    pub fn from_spherical(theta: f64, phi: f64) -> Result<Self> {
        check_range("theta", theta, (0.0..=PI).contains(&theta), "[0, pi]")?;
        check_range("phi", phi, phi > -PI && phi <= PI, "(-pi, pi]")?;
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self::new(st * cp, st * sp, ct)
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &UnitVec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Unnormalized cross product.
    pub fn cross(&self, other: &UnitVec3) -> [f64; 3] {
        cross(self.to_array(), other.to_array())
    }

    /// Dot product against a raw (not necessarily unit) vector.
    pub fn dot_raw(&self, v: [f64; 3]) -> f64 {
        self.x * v[0] + self.y * v[1] + self.z * v[2]
    }

    /// Rotation by `angle` about the unit `axis` (right-hand rule).
    pub fn rotated(&self, axis: &UnitVec3, angle: f64) -> UnitVec3 {
        let (s, c) = angle.sin_cos();
        let v = self.to_array();
        let k = axis.to_array();
        let kxv = cross(k, v);
        let kdv = axis.dot(self);
        let r = [
            v[0] * c + kxv[0] * s + k[0] * kdv * (1.0 - c),
            v[1] * c + kxv[1] * s + k[1] * kdv * (1.0 - c),
            v[2] * c + kxv[2] * s + k[2] * kdv * (1.0 - c),
        ];
        // Rotation preserves the norm; renormalizing only strips rounding.
        UnitVec3::from_array(r).expect("rotation of a unit vector is nonzero")
    }
}

impl TryFrom<[f64; 3]> for UnitVec3 {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        UnitVec3::from_array(v)
    }
}

impl From<UnitVec3> for [f64; 3] {
    fn from(v: UnitVec3) -> Self {
        v.to_array()
    }
}

impl std::ops::Neg for UnitVec3 {
    type Output = UnitVec3;

    fn neg(self) -> UnitVec3 {
        UnitVec3 {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl fmt::Display for UnitVec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

pub(crate) fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Angle in `[0, π]` between two unit vectors.
pub fn angle_between(u: &UnitVec3, v: &UnitVec3) -> f64 {
    // atan2 keeps full precision near 0 and π where acos loses digits; the
    // result is identical to acos of the clamped dot product elsewhere.
    let c = u.dot(v).clamp(-1.0, 1.0);
    let s = norm(u.cross(v));
    s.atan2(c)
}

/// Signed scalar triple product `e1 · (e2 × e3)`.
pub fn triple_product(e1: &UnitVec3, e2: &UnitVec3, e3: &UnitVec3) -> f64 {
    e1.dot_raw(e2.cross(e3))
}

/// Direction `n` and angle `beta` with `b − b2 = 2 sin(beta/2) n`.
pub fn difference_direction(b: &UnitVec3, b2: &UnitVec3) -> Result<(UnitVec3, f64)> {
    let beta = angle_between(b, b2);
    if beta < DEGENERACY_TOL {
        return Err(Error::DegeneratePair { angle: 0.0 });
    }
    let n = UnitVec3::new(b.x - b2.x, b.y - b2.y, b.z - b2.z)?;
    Ok((n, beta))
}

/// Direction `m` and angle `delta` with `b + b2 = 2 cos(delta/2) m`.
pub fn sum_direction(b: &UnitVec3, b2: &UnitVec3) -> Result<(UnitVec3, f64)> {
    let delta = angle_between(b, b2);
    if delta > PI - DEGENERACY_TOL {
        return Err(Error::DegeneratePair { angle: PI });
    }
    let m = UnitVec3::new(b.x + b2.x, b.y + b2.y, b.z + b2.z)?;
    Ok((m, delta))
}

/// Three unit vectors about the +z axis with every pairwise angle equal to
/// `delta`, which must lie in `(0, 2π/3)`.
pub fn symmetric_cone_triple(delta: f64) -> Result<[UnitVec3; 3]> {
    check_range(
        "delta",
        delta,
        delta > 0.0 && delta < 2.0 * PI / 3.0,
        "(0, 2pi/3)",
    )?;
    // Pairwise cosine of the cone is (3 cos²θ − 1) / 2.
    let cos_theta = ((2.0 * delta.cos() + 1.0) / 3.0).max(0.0).sqrt();
    let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
    let mut out = [UnitVec3::Z; 3];
    for (i, v) in out.iter_mut().enumerate() {
        let phi = 2.0 * FRAC_PI_3 * i as f64;
        *v = UnitVec3::new(sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta)?;
    }
    Ok(out)
}
