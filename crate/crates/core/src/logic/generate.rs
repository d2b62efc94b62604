//! Constructive families of joint tables.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::table::{Assignment, FiniteJoint, Var, VariableSpec, MAX_CARD};
use crate::error::{Error, Result};
use crate::mc;

/// Alphabet sizes of the six scenario variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alphabets {
    pub a: usize,
    pub b: usize,
    pub c: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
}

impl Alphabets {
    pub fn binary() -> Self {
        Self::uniform(2)
    }

    pub fn uniform(n: usize) -> Self {
        Self { a: n, b: n, c: n, x: n, y: n, z: n }
    }

    fn specs(&self) -> Vec<VariableSpec> {
        vec![
            VariableSpec::new(Var::A, self.a),
            VariableSpec::new(Var::B, self.b),
            VariableSpec::new(Var::C, self.c),
            VariableSpec::new(Var::X, self.x),
            VariableSpec::new(Var::Y, self.y),
            VariableSpec::new(Var::Z, self.z),
        ]
    }
}

/// The conditional box `P(X, Y | A, B)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxKind {
    /// Convex mixture of `k` local deterministic boxes `X = f(A)`, `Y = g(B)`.
    LocalMixture(usize),
    /// `X xor Y = A B` with uniform marginals; binary A, B, X, Y only.
    PrBox,
}

/// Flat-Dirichlet probability vector of length `n`.
pub fn dirichlet_uniform<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

struct Conditional {
    // probs[((a * card_b + b) * card_x + x) * card_y + y]
    probs: Vec<f64>,
    card_b: usize,
    card_x: usize,
    card_y: usize,
}

impl Conditional {
    fn get(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.probs[((a * self.card_b + b) * self.card_x + x) * self.card_y + y]
    }
}

fn build_box(rng: &mut ChaCha8Rng, al: &Alphabets, kind: BoxKind) -> Result<Conditional> {
    let (na, nb, nx, ny) = (al.a, al.b, al.x, al.y);
    let mut probs = vec![0.0; na * nb * nx * ny];
    let idx = |a: usize, b: usize, x: usize, y: usize| ((a * nb + b) * nx + x) * ny + y;
    match kind {
        BoxKind::LocalMixture(k) => {
            if k == 0 {
                return Err(Error::InvalidArgument("local mixture needs k >= 1".into()));
            }
            let weights = dirichlet_uniform(rng, k);
            for w in weights {
                let f: Vec<usize> = (0..na).map(|_| rng.random_range(0..nx)).collect();
                let g: Vec<usize> = (0..nb).map(|_| rng.random_range(0..ny)).collect();
                for a in 0..na {
                    for b in 0..nb {
                        probs[idx(a, b, f[a], g[b])] += w;
                    }
                }
            }
        }
        BoxKind::PrBox => {
            if [na, nb, nx, ny] != [2, 2, 2, 2] {
                return Err(Error::UnsupportedAlphabet(format!(
                    "PR box needs binary A, B, X, Y, got {na}, {nb}, {nx}, {ny}"
                )));
            }
            for a in 0..2 {
                for b in 0..2 {
                    for x in 0..2 {
                        for y in 0..2 {
                            if (x ^ y) == (a & b) {
                                probs[idx(a, b, x, y)] = 0.5;
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(Conditional { probs, card_b: nb, card_x: nx, card_y: ny })
}

/// Random table satisfying FW (with `λ = Z`), NS and ST by construction:
/// independent flat-Dirichlet marginals for `A, B, C, Z` composed with the
/// non-signalling box `P(X, Y | A, B)`.
pub fn generate_compliant(seed: u64, alphabets: Alphabets, kind: BoxKind) -> Result<FiniteJoint> {
    let specs = alphabets.specs();
    if let Some(s) = specs.iter().find(|s| s.card == 0 || s.card > MAX_CARD) {
        return Err(Error::UnsupportedAlphabet(format!(
            "variable {} has cardinality {}, expected 1..={MAX_CARD}",
            s.name, s.card
        )));
    }
    let mut rng = mc::block_rng(seed, 0);
    let pa = dirichlet_uniform(&mut rng, alphabets.a);
    let pb = dirichlet_uniform(&mut rng, alphabets.b);
    let pc = dirichlet_uniform(&mut rng, alphabets.c);
    let pz = dirichlet_uniform(&mut rng, alphabets.z);
    let bx = build_box(&mut rng, &alphabets, kind)?;
    let j = FiniteJoint::from_fn(specs, |s: &Assignment| {
        let (a, b, c, x, y, z) = (s[0], s[1], s[2], s[3], s[4], s[5]);
        pa[a] * pb[b] * pc[c] * pz[z] * bx.get(a, b, x, y)
    })?;
    Ok(j)
}

/// Uniform independent binary `A`, `B`, `Λ`; `X = A`, `Y = B`, `C` constant,
/// `Z = X`. Satisfies FW and NS exactly while violating ST and FR.
pub fn strictness_counterexample() -> FiniteJoint {
    let specs = vec![
        VariableSpec::new(Var::A, 2),
        VariableSpec::new(Var::B, 2),
        VariableSpec::new(Var::C, 1),
        VariableSpec::new(Var::X, 2),
        VariableSpec::new(Var::Y, 2),
        VariableSpec::new(Var::Z, 2),
        VariableSpec::new(Var::Lambda, 2),
    ];
    FiniteJoint::from_fn(specs, |s| {
        let (a, b, x, y, z) = (s[0], s[1], s[3], s[4], s[5]);
        if x == a && y == b && z == x {
            0.125
        } else {
            0.0
        }
    })
    .expect("counterexample is normalised")
}

/// Product of independent uniform variables.
pub fn uniform_product(specs: Vec<VariableSpec>) -> Result<FiniteJoint> {
    let size: usize = specs.iter().map(|s| s.card).product();
    FiniteJoint::new(specs, vec![1.0 / size as f64; size])
}
