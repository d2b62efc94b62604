//! Exact two-qubit predictions for the state family
//! `sin(theta/2)|00> + cos(theta/2)|11>`, `theta` in [0, pi/2].
//!
//! Everything is explicit 4x4 complex linear algebra in the computational
//! basis `|00>, |01>, |10>, |11>`, with `|0>` the +1 eigenvector of sigma_z.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::UnitVec3;

type Mat2 = [[Complex64; 2]; 2];
type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateRepr")]
pub struct TwoQubitState {
    theta: f64,
}

#[derive(Deserialize)]
struct StateRepr {
    theta: f64,
}

impl TryFrom<StateRepr> for TwoQubitState {
    type Error = Error;

    fn try_from(r: StateRepr) -> Result<Self> {
        Self::new(r.theta)
    }
}

impl TwoQubitState {
    pub fn new(theta: f64) -> Result<Self> {
        if !(0.0..=FRAC_PI_2).contains(&theta) {
            return Err(Error::ThetaOutOfRange(theta));
        }
        Ok(Self { theta })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Amplitudes on `|00>, |01>, |10>, |11>`.
    pub fn amplitudes(&self) -> [Complex64; 4] {
        let (s, c) = (0.5 * self.theta).sin_cos();
        [Complex64::new(s, 0.0), ZERO, ZERO, Complex64::new(c, 0.0)]
    }

    fn expectation(&self, op: &Mat4) -> f64 {
        let psi = self.amplitudes();
        let mut acc = ZERO;
        for i in 0..4 {
            for j in 0..4 {
                acc += psi[i].conj() * op[i][j] * psi[j];
            }
        }
        acc.re
    }
}

/// A local measurement direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Setting(UnitVec3);

impl Setting {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        UnitVec3::new(x, y, z).map(Self)
    }

    /// Setting in the x–z measurement plane at `angle` from +z toward +x.
    pub fn in_plane(angle: f64) -> Self {
        Self(UnitVec3::in_plane(angle))
    }

    pub fn direction(&self) -> &UnitVec3 {
        &self.0
    }

    pub fn components(&self) -> [f64; 3] {
        *self.0.as_array()
    }
}

impl From<UnitVec3> for Setting {
    fn from(v: UnitVec3) -> Self {
        Self(v)
    }
}

/// A measurement outcome, `+1` or `-1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const ALL: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> f64 {
        match self {
            Outcome::Plus => 1.0,
            Outcome::Minus => -1.0,
        }
    }

    fn index(self) -> usize {
        match self {
            Outcome::Plus => 0,
            Outcome::Minus => 1,
        }
    }
}

/// Joint distribution of the two `±1` outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    /// `probs[x][y]`, index 0 for `+1`, 1 for `-1`.
    probs: [[f64; 2]; 2],
}

impl OutcomeDistribution {
    pub fn prob(&self, x: Outcome, y: Outcome) -> f64 {
        self.probs[x.index()][y.index()]
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn mean_x(&self) -> f64 {
        self.expect(|x, _| x.value())
    }

    pub fn mean_y(&self) -> f64 {
        self.expect(|_, y| y.value())
    }

    pub fn correlation(&self) -> f64 {
        self.expect(|x, y| x.value() * y.value())
    }

    fn expect(&self, g: impl Fn(Outcome, Outcome) -> f64) -> f64 {
        let mut acc = 0.0;
        for x in Outcome::ALL {
            for y in Outcome::ALL {
                acc += g(x, y) * self.prob(x, y);
            }
        }
        acc
    }
}

fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

/// `sigma . n`.
fn pauli_dot(n: &UnitVec3) -> Mat2 {
    let [x, y, z] = *n.as_array();
    [
        [Complex64::new(z, 0.0), Complex64::new(x, -y)],
        [Complex64::new(x, y), Complex64::new(-z, 0.0)],
    ]
}

/// Spectral projector of `sigma . n` onto eigenvalue `outcome`.
fn projector(n: &UnitVec3, outcome: Outcome) -> Mat2 {
    let s = pauli_dot(n);
    let sign = outcome.value();
    let mut p = identity2();
    for (i, row) in p.iter_mut().enumerate() {
        for (j, entry) in row.iter_mut().enumerate() {
            *entry = 0.5 * (*entry + sign * s[i][j]);
        }
    }
    p
}

fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// `<x(a)>`: expectation of `(sigma . a) ⊗ 1`.
pub fn marginal_x(state: &TwoQubitState, a: &Setting) -> f64 {
    state.expectation(&kron(&pauli_dot(a.direction()), &identity2()))
}

/// `<y(b)>`: expectation of `1 ⊗ (sigma . b)`.
pub fn marginal_y(state: &TwoQubitState, b: &Setting) -> f64 {
    state.expectation(&kron(&identity2(), &pauli_dot(b.direction())))
}

/// `<(sigma . a) ⊗ (sigma . b)>`.
pub fn joint_correlation(state: &TwoQubitState, a: &Setting, b: &Setting) -> f64 {
    state.expectation(&kron(&pauli_dot(a.direction()), &pauli_dot(b.direction())))
}

pub fn outcome_distribution(state: &TwoQubitState, a: &Setting, b: &Setting) -> OutcomeDistribution {
    let mut probs = [[0.0; 2]; 2];
    for x in Outcome::ALL {
        let pa = projector(a.direction(), x);
        for y in Outcome::ALL {
            let pb = projector(b.direction(), y);
            // Projector expectations are nonnegative; clamp away -0 and
            // rounding below zero.
            probs[x.index()][y.index()] = state.expectation(&kron(&pa, &pb)).max(0.0);
        }
    }
    OutcomeDistribution { probs }
}
