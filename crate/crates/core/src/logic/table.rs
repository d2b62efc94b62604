use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest alphabet accepted for a single variable.
pub const MAX_CARD: usize = 6;

/// Normalisation tolerance for probability tables.
pub const NORM_TOL: f64 = 1e-12;

/// The random variables of the two-party scenario: settings `A`, `B`,
/// outcomes `X`, `Y`, the supplementary measurement `C` with result `Z`, and
/// the ontic state `Λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Var {
    A,
    B,
    C,
    X,
    Y,
    Z,
    Lambda,
}

impl Var {
    pub const ALL: [Var; 7] = [Var::A, Var::B, Var::C, Var::X, Var::Y, Var::Z, Var::Lambda];

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Var::A => "A",
            Var::B => "B",
            Var::C => "C",
            Var::X => "X",
            Var::Y => "Y",
            Var::Z => "Z",
            Var::Lambda => "Λ",
        };
        f.write_str(s)
    }
}

impl FromStr for Var {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "A" => Var::A,
            "B" => Var::B,
            "C" => Var::C,
            "X" => Var::X,
            "Y" => Var::Y,
            "Z" => Var::Z,
            "Λ" | "Lambda" | "lambda" | "L" => Var::Lambda,
            other => {
                return Err(Error::InvalidDistribution(format!("unknown variable name {other:?}")))
            }
        })
    }
}

impl TryFrom<String> for Var {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Var> for String {
    fn from(v: Var) -> Self {
        v.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariableSpec {
    pub name: Var,
    pub card: usize,
}

impl VariableSpec {
    pub fn new(name: Var, card: usize) -> Self {
        Self { name, card }
    }
}

/// Values of every variable, indexed by [`Var::index`]. Entries for variables
/// absent from a table are ignored.
pub type Assignment = [usize; 7];

/// Normalised probability table over a product alphabet, row-major in the
/// order of `variables` (last variable fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawJoint", into = "RawJoint")]
pub struct FiniteJoint {
    variables: Vec<VariableSpec>,
    probs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawJoint {
    variables: Vec<VariableSpec>,
    probs: Vec<f64>,
}

impl TryFrom<RawJoint> for FiniteJoint {
    type Error = Error;

    fn try_from(r: RawJoint) -> Result<Self> {
        FiniteJoint::new(r.variables, r.probs)
    }
}

impl From<FiniteJoint> for RawJoint {
    fn from(j: FiniteJoint) -> Self {
        RawJoint {
            variables: j.variables,
            probs: j.probs,
        }
    }
}

impl FiniteJoint {
    pub fn new(variables: Vec<VariableSpec>, probs: Vec<f64>) -> Result<Self> {
        let mut seen = [false; 7];
        for v in &variables {
            if std::mem::replace(&mut seen[v.name.index()], true) {
                return Err(Error::InvalidDistribution(format!("duplicate variable {}", v.name)));
            }
            if v.card == 0 || v.card > MAX_CARD {
                return Err(Error::UnsupportedAlphabet(format!(
                    "variable {} has cardinality {}, expected 1..={MAX_CARD}",
                    v.name, v.card
                )));
            }
        }
        let size: usize = variables.iter().map(|v| v.card).product();
        if probs.len() != size {
            return Err(Error::InvalidDistribution(format!(
                "table has {} entries, alphabet product is {size}",
                probs.len()
            )));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::InvalidDistribution(format!("invalid probability {p}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidDistribution(format!("probabilities sum to {total}")));
        }
        Ok(Self { variables, probs })
    }

    /// Builds a table by evaluating `p` on every assignment.
    pub fn from_fn(variables: Vec<VariableSpec>, p: impl Fn(&Assignment) -> f64) -> Result<Self> {
        let mut probs = Vec::with_capacity(variables.iter().map(|v| v.card).product());
        for_each_assignment(&variables, |a| probs.push(p(a)));
        Self::new(variables, probs)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidDistribution(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("table serialises")
    }

    pub fn variables(&self) -> &[VariableSpec] {
        &self.variables
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn has(&self, v: Var) -> bool {
        self.variables.iter().any(|s| s.name == v)
    }

    pub fn card(&self, v: Var) -> Result<usize> {
        self.variables
            .iter()
            .find(|s| s.name == v)
            .map(|s| s.card)
            .ok_or_else(|| Error::MissingVariable(v.to_string()))
    }

    pub fn require(&self, vars: &[Var]) -> Result<()> {
        vars.iter().try_for_each(|v| self.card(*v).map(|_| ()))
    }

    fn offset(&self, a: &Assignment) -> usize {
        self.variables
            .iter()
            .fold(0, |acc, s| acc * s.card + a[s.name.index()])
    }

    /// Probability of `a` restricted to this table's variables.
    pub fn prob(&self, a: &Assignment) -> f64 {
        self.probs[self.offset(a)]
    }

    /// Marginal table over `keep`, in that order.
    pub fn marginal(&self, keep: &[Var]) -> Result<FiniteJoint> {
        let specs: Vec<VariableSpec> = keep
            .iter()
            .map(|v| self.card(*v).map(|card| VariableSpec::new(*v, card)))
            .collect::<Result<_>>()?;
        let size: usize = specs.iter().map(|s| s.card).product();
        let mut probs = vec![0.0; size];
        let sub = FiniteJoint {
            variables: specs,
            probs: Vec::new(),
        };
        let mut i = 0;
        for_each_assignment(&self.variables, |a| {
            probs[sub.offset(a)] += self.probs[i];
            i += 1;
        });
        Ok(FiniteJoint {
            variables: sub.variables,
            probs,
        })
    }

    /// Sums out `var`.
    pub fn marginalize_out(&self, var: Var) -> Result<FiniteJoint> {
        self.card(var)?;
        let keep: Vec<Var> = self
            .variables
            .iter()
            .map(|s| s.name)
            .filter(|v| *v != var)
            .collect();
        self.marginal(&keep)
    }
}

/// Calls `f` on every assignment of `vars`, in row-major order.
pub fn for_each_assignment(vars: &[VariableSpec], mut f: impl FnMut(&Assignment)) {
    let mut a: Assignment = [0; 7];
    if vars.iter().any(|s| s.card == 0) {
        return;
    }
    loop {
        f(&a);
        let mut k = vars.len();
        loop {
            if k == 0 {
                return;
            }
            k -= 1;
            let idx = vars[k].name.index();
            a[idx] += 1;
            if a[idx] < vars[k].card {
                break;
            }
            a[idx] = 0;
        }
    }
}
