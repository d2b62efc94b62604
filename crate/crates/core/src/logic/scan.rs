//! Randomised checks of the implication FW ∧ NS ∧ ST ⇒ FR and of its
//! converse when the ontic state is `Z`.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::generate::{generate_compliant, Alphabets, BoxKind};
use super::predicates::{
    check_FR, check_FW, check_NS, check_ST, check_converse, ontic_variable, ConverseReport,
    PredicateName, PredicateReport, ANTECEDENT_TOL,
};
use super::table::FiniteJoint;
use crate::error::{Error, Result};
use crate::mc;

/// Outcome of testing one table against the implication.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum Classification {
    /// An antecedent predicate fails; FR is not examined.
    NonCompliant { failed: PredicateName, deviation: f64 },
    Holds { fr: f64 },
    Violation { report: PredicateReport },
}

/// Checks the antecedent first and FR only for compliant tables.
pub fn classify(j: &FiniteJoint) -> Result<Classification> {
    let lambda = ontic_variable(j);
    for report in [check_FW(j, lambda)?, check_NS(j)?, check_ST(j)?] {
        if report.max_violation > ANTECEDENT_TOL {
            return Ok(Classification::NonCompliant {
                failed: report.name,
                deviation: report.max_violation,
            });
        }
    }
    let fr = check_FR(j)?;
    if fr.max_violation > ANTECEDENT_TOL {
        Ok(Classification::Violation { report: fr })
    } else {
        Ok(Classification::Holds { fr: fr.max_violation })
    }
}

/// Instance `index` of a scan: box type alternates, alphabet sizes are drawn
/// from 2..=4 (binary A, B, X, Y for the PR box).
pub fn scan_instance(seed: u64, index: u64) -> Result<FiniteJoint> {
    let mut rng = mc::block_rng(seed, index);
    let mut card = || rng.random_range(2..=4usize);
    let (kind, alphabets) = if index.is_multiple_of(2) {
        let al = Alphabets { a: card(), b: card(), c: card(), x: card(), y: card(), z: card() };
        (BoxKind::LocalMixture(card()), al)
    } else {
        let al = Alphabets { a: 2, b: 2, c: card(), x: 2, y: 2, z: card() };
        (BoxKind::PrBox, al)
    };
    let instance_seed = rng.random::<u64>();
    generate_compliant(instance_seed, alphabets, kind)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanViolation {
    pub index: u64,
    pub report: PredicateReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanSummary {
    pub instances: u64,
    pub compliant: u64,
    pub non_compliant: u64,
    pub violations: Vec<ScanViolation>,
    pub max_fr: f64,
}

impl ScanSummary {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }
}

/// Generates `n` compliant tables and counts FR violations above
/// `ANTECEDENT_TOL`.
pub fn theorem_scan(n: u64, seed: u64) -> Result<ScanSummary> {
    theorem_scan_with(n, seed, |_, j| j)
}

/// As [`theorem_scan`], passing every generated table through `mutate`
/// before it is classified.
pub fn theorem_scan_with<M>(n: u64, seed: u64, mutate: M) -> Result<ScanSummary>
where
    M: Fn(u64, FiniteJoint) -> FiniteJoint + Sync,
{
    if n == 0 {
        return Err(Error::InvalidArgument("scan needs n >= 1".into()));
    }
    let results: Vec<Classification> = (0..n)
        .into_par_iter()
        .map(|i| classify(&mutate(i, scan_instance(seed, i)?)))
        .collect::<Result<_>>()?;
    let mut summary = ScanSummary {
        instances: n,
        compliant: 0,
        non_compliant: 0,
        violations: Vec::new(),
        max_fr: 0.0,
    };
    for (index, c) in (0u64..).zip(results) {
        match c {
            Classification::NonCompliant { .. } => summary.non_compliant += 1,
            Classification::Holds { fr } => {
                summary.compliant += 1;
                summary.max_fr = summary.max_fr.max(fr);
            }
            Classification::Violation { report } => {
                summary.compliant += 1;
                summary.max_fr = summary.max_fr.max(report.max_violation);
                summary.violations.push(ScanViolation { index, report });
            }
        }
    }
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseFailure {
    pub index: u64,
    pub report: ConverseReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConverseSummary {
    pub instances: u64,
    pub failures: Vec<ConverseFailure>,
    pub max_fw: f64,
    pub max_ns: f64,
    pub max_st: f64,
}

/// Runs [`check_converse`] on `n` generated FR-satisfying tables with the
/// ontic state identified with `Z`.
pub fn converse_scan(n: u64, seed: u64) -> Result<ConverseSummary> {
    if n == 0 {
        return Err(Error::InvalidArgument("scan needs n >= 1".into()));
    }
    let reports: Vec<ConverseReport> = (0..n)
        .into_par_iter()
        .map(|i| check_converse(&scan_instance(seed, i)?))
        .collect::<Result<_>>()?;
    let mut summary = ConverseSummary {
        instances: n,
        failures: Vec::new(),
        max_fw: 0.0,
        max_ns: 0.0,
        max_st: 0.0,
    };
    for (index, r) in (0u64..).zip(reports) {
        summary.max_fw = summary.max_fw.max(r.fw);
        summary.max_ns = summary.max_ns.max(r.ns);
        summary.max_st = summary.max_st.max(r.st);
        if !r.holds {
            summary.failures.push(ConverseFailure { index, report: r });
        }
    }
    Ok(summary)
}
