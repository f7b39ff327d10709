//! Single-program semantics against exhaustive search.

use std::collections::BTreeSet;

use mcsc_core::logic::{least_model, ChoiceClause, Constraint, Rule};
use mcsc_core::{Atom, AtomSet, Limits, Program, Semantics};
use proptest::prelude::*;

fn atom(i: usize) -> Atom {
    Atom::new(&format!("p{i}")).unwrap()
}

fn subset(mask: u32, n: usize) -> AtomSet {
    (0..n).filter(|i| mask >> i & 1 == 1).map(atom).collect()
}

fn powerset(n: usize) -> impl Iterator<Item = AtomSet> {
    (0u32..1 << n).map(move |m| subset(m, n))
}

/// Bodies are sparse: each atom appears with probability 1/4.
fn sparse(n: usize) -> impl Strategy<Value = AtomSet> {
    prop::collection::vec(0u8..4, n).prop_map(|v| (0..v.len()).filter(|&i| v[i] == 0).map(atom).collect())
}

fn normal_program() -> impl Strategy<Value = Program> {
    (1usize..=8).prop_flat_map(|n| {
        let rule = (0..n, sparse(n), sparse(n)).prop_map(|(h, pos, neg)| Rule::new(atom(h), pos, neg));
        let constraint = (sparse(n), sparse(n)).prop_map(|(pos, neg)| Constraint::new(pos, neg));
        (prop::collection::vec(rule, 0..10), prop::collection::vec(constraint, 0..3)).prop_map(move |(rules, cs)| {
            let cs = cs.into_iter().filter(|c| !c.pos.is_empty() || !c.neg.is_empty()).collect();
            Program::new(Semantics::AnswerSet, subset(u32::MAX, n), rules, vec![], cs).unwrap()
        })
    })
}

/// Delete rules blocked by `m`, drop the remaining negative bodies.
fn oracle_reduct(p: &Program, m: &AtomSet) -> Vec<Rule> {
    p.rules()
        .iter()
        .filter(|r| r.neg.is_disjoint(m))
        .map(|r| Rule::new(r.head.clone(), r.pos.clone(), AtomSet::new()))
        .collect()
}

fn oracle_least_model(rules: &[Rule]) -> AtomSet {
    let mut m = AtomSet::new();
    while let Some(r) = rules.iter().find(|r| r.pos.is_subset(&m) && !m.contains(&r.head)) {
        m.insert(r.head.clone());
    }
    m
}

fn violates(cs: &[Constraint], m: &AtomSet) -> bool {
    cs.iter().any(|c| c.pos.is_subset(m) && c.neg.is_disjoint(m))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn answer_sets_match_reduct_oracle(p in normal_program()) {
        let n = p.alphabet().len();
        let want: BTreeSet<AtomSet> = powerset(n)
            .filter(|m| oracle_least_model(&oracle_reduct(&p, m)) == *m && !violates(p.constraints(), m))
            .collect();
        let got: BTreeSet<AtomSet> = p.answer_sets(&Limits::default()).unwrap().into_iter().collect();
        prop_assert_eq!(got, want);
        for m in powerset(n) {
            prop_assert_eq!(p.reduct(&m).rules().to_vec(), oracle_reduct(&p, &m));
        }
    }
}

fn choice_program() -> impl Strategy<Value = Program> {
    (2usize..=8).prop_flat_map(|n| {
        let rule = (0..n, sparse(n)).prop_map(|(h, pos)| Rule::new(atom(h), pos, AtomSet::new()));
        let clause = prop::collection::btree_set(0..n, 1..=3)
            .prop_map(|s| ChoiceClause::new(s.into_iter().map(atom).collect()).unwrap());
        let constraint = sparse(n).prop_filter("nonempty", |s| !s.is_empty()).prop_map(|pos| Constraint::new(pos, AtomSet::new()));
        (prop::collection::vec(rule, 0..8), prop::collection::vec(clause, 0..4), prop::collection::vec(constraint, 0..2))
            .prop_map(move |(rules, choices, cs)| {
                Program::new(Semantics::ChoiceMinimalModel, subset(u32::MAX, n), rules, choices, cs).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn minimal_models_match_exhaustive_search(p in choice_program()) {
        let n = p.alphabet().len();
        let is_model = |m: &AtomSet| {
            p.rules().iter().all(|r| !r.pos.is_subset(m) || m.contains(&r.head))
                && p.choices().iter().all(|c| c.alternatives().iter().any(|a| m.contains(a)))
                && !violates(p.constraints(), m)
        };
        let models: Vec<AtomSet> = powerset(n).filter(is_model).collect();
        let want: BTreeSet<AtomSet> = models
            .iter()
            .filter(|m| !models.iter().any(|o| o != *m && o.is_subset(m)))
            .cloned()
            .collect();
        let got = p.minimal_models(&Limits::default()).unwrap();
        for a in &got {
            for b in &got {
                prop_assert!(a == b || !a.is_subset(b), "not an antichain");
            }
        }
        prop_assert_eq!(got.into_iter().collect::<BTreeSet<_>>(), want);
    }

    #[test]
    fn least_model_is_least(p in choice_program(), facts in any::<u32>()) {
        let n = p.alphabet().len();
        let facts = subset(facts, n);
        let lm = least_model(p.rules(), &facts).unwrap();
        prop_assert!(facts.is_subset(&lm));
        for m in powerset(n).filter(|m| facts.is_subset(m)) {
            let closed = p.rules().iter().all(|r| !r.pos.is_subset(&m) || m.contains(&r.head));
            if closed {
                prop_assert!(lm.is_subset(&m));
            }
        }
    }
}
