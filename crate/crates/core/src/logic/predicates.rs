//! FR, FW, NS, ST and factorization as exact table predicates.
//!
//! Every predicate is scored by the largest absolute difference between the
//! two sides over all assignments. Conditioning events of probability zero
//! are skipped: the conditional is undefined there.

use serde::{Deserialize, Serialize};

use super::table::{for_each_assignment, Assignment, FiniteJoint, Var, VariableSpec};
use crate::error::{Error, Result};

/// Threshold below which an antecedent predicate counts as satisfied.
pub const ANTECEDENT_TOL: f64 = 1e-9;

/// Threshold for the conclusions of the converse direction.
pub const CONVERSE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PredicateName {
    Fr,
    Fw,
    Ns,
    St,
    Fact,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateReport {
    pub name: PredicateName,
    pub max_violation: f64,
    /// Assignment attaining `max_violation`, empty when it is zero.
    pub witness: Vec<(Var, usize)>,
    /// Condition attaining `max_violation`, e.g. `P(A|B,C,Y,Z) = P(A)`.
    pub condition: String,
}

/// `P(target | given) = P(target | reduced)` with `reduced ⊂ given`.
struct Condition<'a> {
    target: &'a [Var],
    given: &'a [Var],
    reduced: &'a [Var],
}

impl Condition<'_> {
    fn label(&self) -> String {
        let list = |vs: &[Var]| vs.iter().map(Var::to_string).collect::<Vec<_>>().join(",");
        let side = |given: &[Var]| {
            if given.is_empty() {
                format!("P({})", list(self.target))
            } else {
                format!("P({}|{})", list(self.target), list(given))
            }
        };
        format!("{} = {}", side(self.given), side(self.reduced))
    }
}

#[derive(Debug, Clone, Default)]
struct Worst {
    value: f64,
    witness: Vec<(Var, usize)>,
    condition: String,
}

impl Worst {
    fn offer(&mut self, value: f64, vars: &[VariableSpec], a: &Assignment, condition: impl FnOnce() -> String) {
        if value > self.value {
            self.value = value;
            self.witness = vars.iter().map(|s| (s.name, a[s.name.index()])).collect();
            self.condition = condition();
        }
    }

    fn merge(&mut self, other: Worst) {
        if other.value > self.value {
            *self = other;
        }
    }

    fn report(self, name: PredicateName) -> PredicateReport {
        PredicateReport {
            name,
            max_violation: self.value,
            witness: self.witness,
            condition: self.condition,
        }
    }
}

fn concat(a: &[Var], b: &[Var]) -> Vec<Var> {
    a.iter().chain(b).copied().collect()
}

fn specs(j: &FiniteJoint, vars: &[Var]) -> Result<Vec<VariableSpec>> {
    vars.iter()
        .map(|v| j.card(*v).map(|c| VariableSpec::new(*v, c)))
        .collect()
}

fn conditional_deviation(j: &FiniteJoint, cond: &Condition<'_>) -> Result<Worst> {
    let joint_g = j.marginal(&concat(cond.target, cond.given))?;
    let g = j.marginal(cond.given)?;
    let joint_r = j.marginal(&concat(cond.target, cond.reduced))?;
    let r = j.marginal(cond.reduced)?;
    let vars = specs(j, &concat(cond.target, cond.given))?;
    let mut worst = Worst::default();
    for_each_assignment(&vars, |a| {
        let pg = g.prob(a);
        if pg <= 0.0 {
            return;
        }
        let lhs = joint_g.prob(a) / pg;
        let rhs = joint_r.prob(a) / r.prob(a);
        worst.offer((lhs - rhs).abs(), &vars, a, || cond.label());
    });
    Ok(worst)
}

fn check_all(j: &FiniteJoint, name: PredicateName, conds: &[Condition<'_>]) -> Result<PredicateReport> {
    let mut worst = Worst::default();
    for c in conds {
        worst.merge(conditional_deviation(j, c)?);
    }
    Ok(worst.report(name))
}

/// `P(A|B,C,Y,Z) = P(A)`, `P(B|A,C,X,Z) = P(B)`, `P(C|A,B,X,Y) = P(C)`.
#[allow(non_snake_case)]
pub fn check_FR(j: &FiniteJoint) -> Result<PredicateReport> {
    use Var::*;
    j.require(&[A, B, C, X, Y, Z])?;
    check_all(
        j,
        PredicateName::Fr,
        &[
            Condition { target: &[A], given: &[B, C, Y, Z], reduced: &[] },
            Condition { target: &[B], given: &[A, C, X, Z], reduced: &[] },
            Condition { target: &[C], given: &[A, B, X, Y], reduced: &[] },
        ],
    )
}

/// `P(A|B,λ) = P(A)`, `P(B|A,λ) = P(B)` with `λ` the variable `lambda`.
#[allow(non_snake_case)]
pub fn check_FW(j: &FiniteJoint, lambda: Var) -> Result<PredicateReport> {
    use Var::*;
    j.require(&[A, B, lambda])?;
    check_all(
        j,
        PredicateName::Fw,
        &[
            Condition { target: &[A], given: &[B, lambda], reduced: &[] },
            Condition { target: &[B], given: &[A, lambda], reduced: &[] },
        ],
    )
}

/// `|P(a,b,λ) - P(a) P(b) P(λ)|`.
pub fn check_factorization(j: &FiniteJoint, lambda: Var) -> Result<PredicateReport> {
    use Var::*;
    j.require(&[A, B, lambda])?;
    let vars = [A, B, lambda];
    let joint = j.marginal(&vars)?;
    let (pa, pb, pl) = (j.marginal(&[A])?, j.marginal(&[B])?, j.marginal(&[lambda])?);
    let spec = specs(j, &vars)?;
    let label = || format!("P(A,B,{lambda}) = P(A)P(B)P({lambda})");
    let mut worst = Worst::default();
    for_each_assignment(&spec, |a| {
        let dev = (joint.prob(a) - pa.prob(a) * pb.prob(a) * pl.prob(a)).abs();
        worst.offer(dev, &spec, a, label);
    });
    Ok(worst.report(PredicateName::Fact))
}

/// `P(X|A,B) = P(X|A)`, `P(Y|A,B) = P(Y|B)`.
#[allow(non_snake_case)]
pub fn check_NS(j: &FiniteJoint) -> Result<PredicateReport> {
    use Var::*;
    j.require(&[A, B, X, Y])?;
    check_all(
        j,
        PredicateName::Ns,
        &[
            Condition { target: &[X], given: &[A, B], reduced: &[A] },
            Condition { target: &[Y], given: &[A, B], reduced: &[B] },
        ],
    )
}

/// `P(C,Z|A,B,X,Y) = P(C,Z)`.
#[allow(non_snake_case)]
pub fn check_ST(j: &FiniteJoint) -> Result<PredicateReport> {
    use Var::*;
    j.require(&[A, B, C, X, Y, Z])?;
    check_all(
        j,
        PredicateName::St,
        &[Condition { target: &[C, Z], given: &[A, B, X, Y], reduced: &[] }],
    )
}

/// The variable playing the ontic state: `Λ` when present, else `Z`.
pub fn ontic_variable(j: &FiniteJoint) -> Var {
    if j.has(Var::Lambda) {
        Var::Lambda
    } else {
        Var::Z
    }
}

/// Deviations of the intermediate identities in the derivation of FR from
/// FW, NS and ST.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProofReport {
    /// `P(A,B,Y|C,Z) = P(A,B,Y)`, from ST.
    pub st_consequence: f64,
    /// `P(A,B,Y|C,Z) = P(A|B,Y,C,Z) P(B,Y|C,Z) = P(A|B,Y,C,Z) P(B,Y)`.
    pub conditional_chain: f64,
    /// `P(A,B,Y) = P(A,B) P(Y|A,B) = P(A) P(B) P(Y|B) = P(A) P(B,Y)`.
    pub product_chain: f64,
    /// `P(A|B,Y,C,Z) = P(A)`.
    pub conclusion_a: f64,
    /// `P(B|A,X,C,Z) = P(B)`.
    pub conclusion_b: f64,
    /// `P(C|A,X,B,Y) = P(C)`.
    pub conclusion_c: f64,
}

impl ProofReport {
    pub fn max_deviation(&self) -> f64 {
        [
            self.st_consequence,
            self.conditional_chain,
            self.product_chain,
            self.conclusion_a,
            self.conclusion_b,
            self.conclusion_c,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

/// Replays the derivation of FR on the table. The antecedent (FW with the
/// ontic variable, NS, ST) must hold within [`ANTECEDENT_TOL`].
pub fn check_proof_steps(j: &FiniteJoint) -> Result<ProofReport> {
    use Var::*;
    j.require(&[A, B, C, X, Y, Z])?;
    let lambda = ontic_variable(j);
    for report in [check_FW(j, lambda)?, check_NS(j)?, check_ST(j)?] {
        if report.max_violation > ANTECEDENT_TOL {
            return Err(Error::PreconditionViolated(format!(
                "{:?} deviates by {:e} ({})",
                report.name, report.max_violation, report.condition
            )));
        }
    }

    let st_consequence = conditional_deviation(
        j,
        &Condition { target: &[A, B, Y], given: &[C, Z], reduced: &[] },
    )?
    .value;

    let abycz = j.marginal(&[A, B, Y, C, Z])?;
    let bycz = j.marginal(&[B, Y, C, Z])?;
    let cz = j.marginal(&[C, Z])?;
    let by = j.marginal(&[B, Y])?;
    let aby = j.marginal(&[A, B, Y])?;
    let ab = j.marginal(&[A, B])?;
    let pa = j.marginal(&[A])?;
    let pb = j.marginal(&[B])?;

    let mut conditional_chain: f64 = 0.0;
    for_each_assignment(abycz.variables(), |s| {
        let (p_cz, p_bycz) = (cz.prob(s), bycz.prob(s));
        if p_cz <= 0.0 || p_bycz <= 0.0 {
            return;
        }
        let lhs = abycz.prob(s) / p_cz;
        let a_given = abycz.prob(s) / p_bycz;
        let mid = a_given * (p_bycz / p_cz);
        let rhs = a_given * by.prob(s);
        conditional_chain = conditional_chain.max((lhs - mid).abs()).max((mid - rhs).abs());
    });

    let mut product_chain: f64 = 0.0;
    for_each_assignment(aby.variables(), |s| {
        let (p_ab, p_b) = (ab.prob(s), pb.prob(s));
        if p_ab <= 0.0 || p_b <= 0.0 {
            return;
        }
        let first = p_ab * (aby.prob(s) / p_ab);
        let second = pa.prob(s) * p_b * (by.prob(s) / p_b);
        let third = pa.prob(s) * by.prob(s);
        product_chain = product_chain
            .max((aby.prob(s) - first).abs())
            .max((first - second).abs())
            .max((second - third).abs());
    });

    let cond = |target, given| conditional_deviation(j, &Condition { target, given, reduced: &[] });
    Ok(ProofReport {
        st_consequence,
        conditional_chain,
        product_chain,
        conclusion_a: cond(&[A], &[B, Y, C, Z])?.value,
        conclusion_b: cond(&[B], &[A, X, C, Z])?.value,
        conclusion_c: cond(&[C], &[A, X, B, Y])?.value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseReport {
    pub fr: f64,
    pub fw: f64,
    pub ns: f64,
    pub st: f64,
    /// FW, NS and ST all within [`CONVERSE_TOL`].
    pub holds: bool,
}

/// Checks FR ⇒ FW ∧ NS ∧ ST on a table whose ontic variable is `Z` itself.
///
/// Fails with `PreconditionViolated` if the table carries a separate `Λ` or
/// if FR does not hold within [`ANTECEDENT_TOL`].
pub fn check_converse(j: &FiniteJoint) -> Result<ConverseReport> {
    if j.has(Var::Lambda) {
        return Err(Error::PreconditionViolated(
            "the converse needs the ontic state identified with Z; drop the separate Λ".into(),
        ));
    }
    let fr = check_FR(j)?.max_violation;
    if fr > ANTECEDENT_TOL {
        return Err(Error::PreconditionViolated(format!("FR deviates by {fr:e}")));
    }
    let fw = check_FW(j, Var::Z)?.max_violation;
    let ns = check_NS(j)?.max_violation;
    let st = check_ST(j)?.max_violation;
    Ok(ConverseReport {
        fr,
        fw,
        ns,
        st,
        holds: fw <= CONVERSE_TOL && ns <= CONVERSE_TOL && st <= CONVERSE_TOL,
    })
}
