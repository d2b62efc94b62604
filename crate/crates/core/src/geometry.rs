//! Unit vectors on the sphere and spherical coordinates about the
//! propagation axis.
//!
//! Convention: the particles propagate along +y, which is the north pole for
//! the polar angle `tau`. Measurement settings live in the x–z plane. The
//! azimuth `mu` is measured in the x–z plane starting from +x toward +z:
//!
//! ```text
//! lambda = (sin tau cos mu, cos tau, sin tau sin mu)
//! ```

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Norm tolerance for unit vectors.
pub const UNIT_TOL: f64 = 1e-12;

/// Index of the propagation axis.
pub const PROPAGATION_AXIS: usize = 1;

pub fn dot(u: &[f64; 3], v: &[f64; 3]) -> f64 {
    u[0] * v[0] + u[1] * v[1] + u[2] * v[2]
}

pub fn norm(v: &[f64; 3]) -> f64 {
    dot(v, v).sqrt()
}

pub fn cross(u: &[f64; 3], v: &[f64; 3]) -> [f64; 3] {
    [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ]
}

/// A real unit 3-vector, validated to `UNIT_TOL` on construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct UnitVec3([f64; 3]);

impl UnitVec3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Self::try_from([x, y, z])
    }

    /// Builds a unit vector by normalising `v`. Fails on the zero vector.
    pub fn normalized(v: [f64; 3]) -> Result<Self> {
        let n = norm(&v);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "cannot normalise vector {v:?}"
            )));
        }
        Ok(Self([v[0] / n, v[1] / n, v[2] / n]))
    }

    /// Unit vector in the x–z plane at `angle` from +z toward +x.
    pub fn in_plane(angle: f64) -> Self {
        Self([angle.sin(), 0.0, angle.cos()])
    }

    pub fn x(&self) -> f64 {
        self.0[0]
    }

    pub fn y(&self) -> f64 {
        self.0[1]
    }

    pub fn z(&self) -> f64 {
        self.0[2]
    }

    pub fn as_array(&self) -> &[f64; 3] {
        &self.0
    }

    pub fn dot(&self, other: &UnitVec3) -> f64 {
        dot(&self.0, &other.0)
    }

    pub fn neg(&self) -> Self {
        Self([-self.0[0], -self.0[1], -self.0[2]])
    }

    /// Angle to `other`, in [0, pi].
    pub fn angle_to(&self, other: &UnitVec3) -> f64 {
        // atan2 keeps precision near 0 and pi where acos does not.
        norm(&cross(&self.0, &other.0)).atan2(self.dot(other))
    }

    pub fn to_spherical(&self) -> SphericalCoords {
        let [x, y, z] = self.0;
        let tau = x.hypot(z).atan2(y);
        let mut mu = z.atan2(x);
        if mu < 0.0 {
            mu += TAU;
        }
        if mu >= TAU {
            mu = 0.0;
        }
        SphericalCoords { mu, tau }
    }
}

impl TryFrom<[f64; 3]> for UnitVec3 {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        let n = norm(&v);
        if !n.is_finite() || (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit {
                x: v[0],
                y: v[1],
                z: v[2],
                norm: n,
            });
        }
        Ok(Self(v))
    }
}

impl From<UnitVec3> for [f64; 3] {
    fn from(v: UnitVec3) -> Self {
        v.0
    }
}

/// Azimuth `mu` in [0, 2 pi) and polar angle `tau` in [0, pi], measured from
/// the propagation axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalCoords {
    pub mu: f64,
    pub tau: f64,
}

impl SphericalCoords {
    pub fn new(mu: f64, tau: f64) -> Result<Self> {
        if !(0.0..=PI).contains(&tau) {
            return Err(Error::TauOutOfRange(tau));
        }
        if !(0.0..TAU).contains(&mu) {
            return Err(Error::InvalidArgument(format!(
                "azimuth mu = {mu} is outside [0, 2pi)"
            )));
        }
        Ok(Self { mu, tau })
    }

    pub fn to_unit(&self) -> UnitVec3 {
        point_at(self.mu, self.tau)
    }
}

/// Point on the sphere at azimuth `mu` and polar angle `tau`; `mu` is not
/// range-checked.
pub fn point_at(mu: f64, tau: f64) -> UnitVec3 {
    let (st, ct) = tau.sin_cos();
    let (sm, cm) = mu.sin_cos();
    UnitVec3([st * cm, ct, st * sm])
}

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=PI).contains(&tau) {
        Ok(())
    } else {
        Err(Error::TauOutOfRange(tau))
    }
}
