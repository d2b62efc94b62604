//! Finite joint distributions over settings `A, B, C`, outcomes `X, Y, Z`
//! and an optional ontic variable `Λ`, with the free-choice (FR), free-will
//! (FW), no-signalling (NS) and staticity (ST) conditions as exact table
//! predicates.

mod generate;
mod predicates;
mod scan;
mod table;

pub use generate::{
    dirichlet_uniform, generate_compliant, strictness_counterexample, uniform_product, Alphabets,
    BoxKind,
};
pub use predicates::{
    check_FR, check_FW, check_NS, check_ST, check_converse, check_factorization,
    check_proof_steps, ontic_variable, ConverseReport, PredicateName, PredicateReport,
    ProofReport, ANTECEDENT_TOL, CONVERSE_TOL,
};
pub use scan::{
    classify, converse_scan, scan_instance, theorem_scan, theorem_scan_with, Classification,
    ConverseFailure, ConverseSummary, ScanSummary, ScanViolation,
};
pub use table::{for_each_assignment, Assignment, FiniteJoint, Var, VariableSpec, MAX_CARD, NORM_TOL};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use proptest::prelude::*;

    fn six() -> Vec<VariableSpec> {
        [Var::A, Var::B, Var::C, Var::X, Var::Y, Var::Z]
            .into_iter()
            .map(|v| VariableSpec::new(v, 2))
            .collect()
    }

    fn product() -> FiniteJoint {
        uniform_product(six()).unwrap()
    }

    /// A uniform; B, C, Y independent uniform; X = Z = A.
    fn z_copies_a() -> FiniteJoint {
        FiniteJoint::from_fn(six(), |s| {
            if s[3] == s[0] && s[5] == s[0] {
                1.0 / 16.0
            } else {
                0.0
            }
        })
        .unwrap()
    }

    /// Binary A, B, X, Y; with C, Z trivial unless `full`.
    fn binary_box(p: impl Fn(usize, usize, usize, usize) -> f64) -> FiniteJoint {
        FiniteJoint::from_fn(six(), |s| 0.25 * p(s[0], s[1], s[3], s[4]) * 0.25).unwrap()
    }

    #[test]
    fn fr_examples() {
        assert_eq!(check_FR(&product()).unwrap().max_violation, 0.0);
        let r = check_FR(&z_copies_a()).unwrap();
        assert!((r.max_violation - 0.5).abs() < 1e-12);
        assert!(!r.witness.is_empty());
        let j = generate_compliant(3, Alphabets::uniform(3), BoxKind::LocalMixture(4)).unwrap();
        assert!(check_FR(&j).unwrap().max_violation <= 1e-9);
    }

    #[test]
    fn fw_examples() {
        assert_eq!(check_FW(&product(), Var::Z).unwrap().max_violation, 0.0);
        let a_eq_b = FiniteJoint::from_fn(six(), |s| if s[0] == s[1] { 1.0 / 32.0 } else { 0.0 }).unwrap();
        assert!((check_FW(&a_eq_b, Var::Z).unwrap().max_violation - 0.5).abs() < 1e-12);
        let ce = strictness_counterexample();
        assert!(check_FW(&ce, Var::Lambda).unwrap().max_violation <= 1e-12);
    }

    #[test]
    fn factorization_examples() {
        assert_eq!(check_factorization(&product(), Var::Z).unwrap().max_violation, 0.0);
        let a_eq_b = FiniteJoint::from_fn(six(), |s| if s[0] == s[1] { 1.0 / 32.0 } else { 0.0 }).unwrap();
        assert!(check_factorization(&a_eq_b, Var::Z).unwrap().max_violation > 0.0);
    }

    #[test]
    fn ns_examples() {
        // local deterministic: X = A, Y = not B
        let local = binary_box(|a, b, x, y| if x == a && y == 1 - b { 1.0 } else { 0.0 });
        assert_eq!(check_NS(&local).unwrap().max_violation, 0.0);
        let pr = binary_box(|a, b, x, y| if (x ^ y) == (a & b) { 0.5 } else { 0.0 });
        assert!(check_NS(&pr).unwrap().max_violation <= 1e-15);
        let signalling = binary_box(|_, b, x, y| if x == b { 0.5 * (y as f64 + 0.5) } else { 0.0 });
        assert!((check_NS(&signalling).unwrap().max_violation - 0.5).abs() < 1e-12);
    }

    #[test]
    fn st_examples() {
        assert_eq!(check_ST(&product()).unwrap().max_violation, 0.0);
        // P(C,Z) = 1/4 but P(C,Z|A,...) = 1/2 on the support
        let r = check_ST(&z_copies_a()).unwrap();
        assert!((r.max_violation - 0.25).abs() < 1e-12, "{}", r.max_violation);
        let j = generate_compliant(9, Alphabets::binary(), BoxKind::PrBox).unwrap();
        assert!(check_ST(&j).unwrap().max_violation <= 1e-12);
    }

    #[test]
    fn missing_variables_are_reported() {
        let ab = uniform_product(vec![VariableSpec::new(Var::A, 2), VariableSpec::new(Var::B, 2)]).unwrap();
        assert!(matches!(check_FR(&ab), Err(Error::MissingVariable(_))));
        assert!(matches!(check_FW(&ab, Var::Lambda), Err(Error::MissingVariable(_))));
        assert!(matches!(check_NS(&ab), Err(Error::MissingVariable(_))));
        assert!(matches!(check_ST(&ab), Err(Error::MissingVariable(_))));
        assert!(matches!(check_factorization(&ab, Var::Z), Err(Error::MissingVariable(_))));
    }

    #[test]
    fn zero_probability_conditions_are_skipped() {
        // B never takes value 1: the conditional given B = 1 is undefined.
        let j = FiniteJoint::from_fn(six(), |s| if s[1] == 0 { 1.0 / 32.0 } else { 0.0 }).unwrap();
        assert_eq!(check_FR(&j).unwrap().max_violation, 0.0);
        assert_eq!(check_NS(&j).unwrap().max_violation, 0.0);
    }

    #[test]
    fn proof_steps_examples() {
        let r = check_proof_steps(&product()).unwrap();
        assert_eq!(r.max_deviation(), 0.0);
        let j = generate_compliant(1, Alphabets { a: 3, b: 2, c: 4, x: 2, y: 3, z: 2 }, BoxKind::LocalMixture(3)).unwrap();
        assert!(check_proof_steps(&j).unwrap().max_deviation() <= 1e-9);
        assert!(matches!(check_proof_steps(&z_copies_a()), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn generator_examples() {
        for seed in 0..5 {
            let j = generate_compliant(seed, Alphabets::uniform(3), BoxKind::LocalMixture(4)).unwrap();
            assert!(check_NS(&j).unwrap().max_violation <= 1e-12);
            assert!(check_FR(&j).unwrap().max_violation <= 1e-9);
        }
        let pr = generate_compliant(0, Alphabets::binary(), BoxKind::PrBox).unwrap();
        assert!(check_NS(&pr).unwrap().max_violation <= 1e-12);
        assert!(check_ST(&pr).unwrap().max_violation <= 1e-12);
        assert!(check_FR(&pr).unwrap().max_violation <= 1e-9);
        assert!(matches!(
            generate_compliant(0, Alphabets::uniform(3), BoxKind::PrBox),
            Err(Error::UnsupportedAlphabet(_))
        ));
        assert!(matches!(
            generate_compliant(0, Alphabets::uniform(7), BoxKind::LocalMixture(2)),
            Err(Error::UnsupportedAlphabet(_))
        ));
    }

    #[test]
    fn counterexample_properties() {
        let j = strictness_counterexample();
        assert_eq!(check_FW(&j, Var::Lambda).unwrap().max_violation, 0.0);
        assert_eq!(check_NS(&j).unwrap().max_violation, 0.0);
        assert!(check_ST(&j).unwrap().max_violation >= 0.25);
        assert!(check_FR(&j).unwrap().max_violation >= 0.25);
    }

    #[test]
    fn converse_examples() {
        let r = check_converse(&product()).unwrap();
        assert!(r.fw <= 1e-12 && r.ns <= 1e-12 && r.st <= 1e-12 && r.holds);
        let j = generate_compliant(4, Alphabets::uniform(2), BoxKind::LocalMixture(2)).unwrap();
        assert!(check_converse(&j).unwrap().holds);
        assert!(matches!(check_converse(&strictness_counterexample()), Err(Error::PreconditionViolated(_))));
        assert!(matches!(check_converse(&z_copies_a()), Err(Error::PreconditionViolated(_))));
    }

    #[test]
    fn converse_can_fail_when_z_tracks_an_outcome() {
        // A, B, C independent; X = Z a coin independent of the settings.
        // FR holds, yet Z is correlated with X, so ST fails.
        let j = FiniteJoint::from_fn(six(), |s| if s[3] == s[5] { 1.0 / 32.0 } else { 0.0 }).unwrap();
        let r = check_converse(&j).unwrap();
        assert!(r.fr <= 1e-12);
        assert!((r.st - 0.25).abs() < 1e-12);
        assert!(!r.holds);
    }

    #[test]
    fn scan_examples() {
        let s = theorem_scan(50, 7).unwrap();
        assert_eq!(s.violation_count(), 0);
        assert_eq!(s.compliant, 50);
        assert_eq!(classify(&product()).unwrap(), Classification::Holds { fr: 0.0 });
        assert!(theorem_scan(0, 1).is_err());
    }

    #[test]
    fn scan_detects_injected_st_violation() {
        // Move half of the C = 0 mass to C = 1 wherever X = 0. The A, B, Z
        // marginal and the box are untouched, so only ST can fail.
        let mutate = |_, j: FiniteJoint| {
            let specs = j.variables().to_vec();
            let src = j.clone();
            FiniteJoint::from_fn(specs, |s| {
                let p = src.prob(s);
                if s[3] != 0 {
                    return p;
                }
                let mut other = *s;
                match s[2] {
                    0 => 0.5 * p,
                    1 => {
                        other[2] = 0;
                        p + 0.5 * src.prob(&other)
                    }
                    _ => p,
                }
            })
            .unwrap()
        };
        let s = theorem_scan_with(20, 3, mutate).unwrap();
        assert_eq!(s.non_compliant, 20);
        assert_eq!(s.compliant, 0);
        let j = mutate(0, scan_instance(3, 0).unwrap());
        match classify(&j).unwrap() {
            Classification::NonCompliant { failed, .. } => assert_eq!(failed, PredicateName::St),
            other => panic!("expected non-compliant, got {other:?}"),
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn fw_implies_factorization(seed in any::<u64>(), a in 1usize..4, b in 1usize..4, l in 1usize..4, corr in 0.0f64..1.0) {
            // FW-satisfying tables with an arbitrary extra dependence of X on λ
            let mut rng = crate::mc::block_rng(seed, 0);
            let pa = dirichlet_uniform(&mut rng, a);
            let pb = dirichlet_uniform(&mut rng, b);
            let pl = dirichlet_uniform(&mut rng, l);
            let specs = vec![
                VariableSpec::new(Var::A, a),
                VariableSpec::new(Var::B, b),
                VariableSpec::new(Var::X, 2),
                VariableSpec::new(Var::Lambda, l),
            ];
            let j = FiniteJoint::from_fn(specs, |s| {
                let px = if s[3] == s[6] % 2 { corr } else { 1.0 - corr };
                pa[s[0]] * pb[s[1]] * pl[s[6]] * px
            }).unwrap();
            prop_assert!(check_FW(&j, Var::Lambda).unwrap().max_violation <= 1e-12);
            prop_assert!(check_factorization(&j, Var::Lambda).unwrap().max_violation <= 1e-12);
        }

        #[test]
        fn marginals_stay_normalised(seed in any::<u64>(), k in 1usize..5, mixture in any::<bool>()) {
            let (al, kind) = if mixture {
                (Alphabets { a: 3, b: 2, c: 2, x: 4, y: 2, z: 3 }, BoxKind::LocalMixture(k))
            } else {
                (Alphabets { a: 2, b: 2, c: 3, x: 2, y: 2, z: 2 }, BoxKind::PrBox)
            };
            let j = generate_compliant(seed, al, kind).unwrap();
            for v in [Var::A, Var::B, Var::C, Var::X, Var::Y, Var::Z] {
                let m = j.marginalize_out(v).unwrap();
                let rebuilt = FiniteJoint::new(m.variables().to_vec(), m.probs().to_vec());
                prop_assert!(rebuilt.is_ok());
            }
        }

        #[test]
        fn reports_are_deterministic(seed in any::<u64>()) {
            let j = generate_compliant(seed, Alphabets::uniform(2), BoxKind::LocalMixture(3)).unwrap();
            prop_assert_eq!(check_FR(&j).unwrap(), check_FR(&j).unwrap());
            prop_assert_eq!(check_ST(&j).unwrap(), check_ST(&j).unwrap());
        }
    }
}
