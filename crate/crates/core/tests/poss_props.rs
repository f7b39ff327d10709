//! Possibilistic systems: projection onto the classical grounded
//! equilibrium, the possibility distribution and monotonicity of necessity.

use std::collections::BTreeSet;

use mcsc_core::logic::{Constraint, PossProgram, PossRule, Rule};
use mcsc_core::mcs::QualifiedAtom;
use mcsc_core::poss::PossBridgeRule;
use mcsc_core::{Atom, AtomSet, BeliefState, BridgeRule, Decimal, Degree, Limits, PossMcs, Semantics};
use proptest::prelude::*;

fn atom(i: usize) -> Atom {
    Atom::new(&format!("p{i}")).unwrap()
}

fn subset(mask: u32, n: usize) -> AtomSet {
    (0..n).filter(|i| mask >> i & 1 == 1).map(atom).collect()
}

type BridgeShape = (usize, usize, Vec<(usize, usize)>, Degree);

#[derive(Debug, Clone)]
struct Shape {
    sizes: Vec<usize>,
    /// (context, head, positive body mask, degree)
    rules: Vec<(usize, usize, u32, Degree)>,
    /// (target, head, positive body, degree)
    bridges: Vec<BridgeShape>,
    /// (context, positive body mask)
    constraints: Vec<(usize, u32)>,
}

/// Degrees in (0, 1], with 1 frequent.
fn degree() -> impl Strategy<Value = Degree> {
    prop_oneof![
        Just(Degree::ONE),
        (1i64..=1_000_000).prop_map(|k| Degree::new(Decimal::from_scaled(k)).unwrap()),
        (1i64..=10).prop_map(|k| Degree::new(Decimal::from_scaled(k * 100_000)).unwrap()),
    ]
}

fn sparse_mask() -> impl Strategy<Value = u32> {
    (any::<u32>(), any::<u32>()).prop_map(|(a, b)| a & b)
}

fn shape() -> impl Strategy<Value = Shape> {
    shape_with(false)
}

fn shape_with(constraints: bool) -> impl Strategy<Value = Shape> {
    (1usize..=3)
        .prop_flat_map(|n| prop::collection::vec(1usize..=12 / n, n))
        .prop_flat_map(move |sizes| {
            let n = sizes.len();
            let s1 = sizes.clone();
            let rule = (0..n, any::<usize>(), sparse_mask(), degree()).prop_map(move |(c, h, p, d)| (c, h % s1[c], p, d));
            let s2 = sizes.clone();
            let bridge = (0..n, any::<usize>(), prop::collection::vec((0..n, any::<usize>()), 0..3), degree())
                .prop_map(move |(t, h, body, d)| {
                    (t, h % s2[t], body.into_iter().map(|(c, a)| (c, a % s2[c])).collect(), d)
                });
            let constraint = (0..n, sparse_mask()).prop_map(|(c, p)| (c, p | 1));
            (
                Just(sizes),
                prop::collection::vec(rule, 0..10),
                prop::collection::vec(bridge, 0..6),
                prop::collection::vec(constraint, 0..(if constraints { 3 } else { 1 })),
            )
        })
        .prop_map(|(sizes, rules, bridges, constraints)| Shape { sizes, rules, bridges, constraints })
}

fn build(s: &Shape) -> PossMcs {
    let contexts = s
        .sizes
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let rules = s
                .rules
                .iter()
                .filter(|r| r.0 == i)
                .map(|&(_, h, p, d)| PossRule::new(Rule::new(atom(h), subset(p, k), AtomSet::new()), d))
                .collect();
            let cs = s.constraints.iter().filter(|c| c.0 == i).map(|&(_, p)| Constraint::new(subset(p, k), AtomSet::new())).collect();
            let p = PossProgram::new(Semantics::AnswerSet, subset(u32::MAX, k), rules, vec![], cs).unwrap();
            (format!("c{i}"), p)
        })
        .collect();
    let bridges = s
        .bridges
        .iter()
        .map(|(t, h, body, d)| {
            let pos: BTreeSet<QualifiedAtom> = body.iter().map(|&(c, a)| QualifiedAtom::new(c, atom(a))).collect();
            PossBridgeRule::new(BridgeRule::new(*t, atom(*h), pos, BTreeSet::new()), *d)
        })
        .collect();
    PossMcs::new(contexts, bridges).unwrap()
}

fn states(sizes: &[usize]) -> Vec<BeliefState> {
    let total: usize = sizes.iter().sum();
    (0u32..1 << total)
        .map(|mut m| {
            BeliefState::new(
                sizes
                    .iter()
                    .map(|&k| {
                        let s = subset(m, k);
                        m >>= k;
                        s
                    })
                    .collect(),
            )
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn possibilistic_grounded_equilibrium_projects(s in shape()) {
        let pm = build(&s);
        let limits = Limits::default();
        let poss = pm.grounded_equilibrium(&limits).unwrap();
        let classical = pm.classical().grounded_equilibrium(&limits).unwrap();
        prop_assert_eq!(poss.classical(), classical);
        prop_assert!(poss.sets().iter().flat_map(|m| m.values()).all(|d| *d > Degree::ZERO));
    }

    #[test]
    fn possibility_one_exactly_on_grounded_equilibrium(s in shape()) {
        let pm = build(&s);
        let limits = Limits::default();
        let g = pm.classical().grounded_equilibrium(&limits).unwrap();
        for st in states(&s.sizes) {
            let p = pm.possibility_of_state(&st, &limits).unwrap();
            prop_assert_eq!(p == Degree::ONE, st == g, "{}", st);
        }
    }

    #[test]
    fn raising_a_degree_never_lowers_necessity(s in shape(), pick in any::<usize>(), bump in degree()) {
        let limits = Limits::default();
        let before = build(&s).distribution(&limits).unwrap();
        let mut raised = s.clone();
        let total = raised.rules.len() + raised.bridges.len();
        prop_assume!(total > 0);
        let i = pick % total;
        if i < raised.rules.len() {
            let d = &mut raised.rules[i].3;
            *d = (*d).max(bump);
        } else {
            let d = &mut raised.bridges[i - s.rules.len()].3;
            *d = (*d).max(bump);
        }
        let after = build(&raised).distribution(&limits).unwrap();
        for (c, &k) in s.sizes.iter().enumerate() {
            for a in subset(u32::MAX, k) {
                prop_assert!(after.necessity(c, &a) >= before.necessity(c, &a), "c{} {}", c, a);
            }
        }
    }

    #[test]
    fn consequence_operator_agrees_with_distribution(s in shape_with(true)) {
        let pm = build(&s);
        let by_distribution = pm.distribution(&Limits::default()).unwrap().positive_necessities();
        if let Some(fix) = pm.fixpoint_necessities() {
            prop_assert_eq!(&fix, &by_distribution);
        }
        prop_assert_eq!(pm.grounded_equilibrium(&Limits::default()).unwrap(), by_distribution);
    }
}
