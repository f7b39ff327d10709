//! Compilation of random coalition problems: the possibilistic system
//! projects onto the classical one, and equilibria respect the mutual
//! exclusion of carried materials.

use std::collections::BTreeMap;

use mcsc_core::coalition::{AgentSpec, ExclusionGroup, Plan, PlanStep, UncertaintyModel};
use mcsc_core::{Atom, CoalitionProblem, Decimal, Degree, Limits};
use proptest::prelude::*;

fn atom(s: &str) -> Atom {
    Atom::new(s).unwrap()
}

#[derive(Debug, Clone)]
struct Shape {
    agents: usize,
    /// for each material, which agents can carry it
    carriers: Vec<Vec<bool>>,
    /// (goal, helper agent or none, carrier index into the material's carriers, material)
    plans: Vec<(usize, Option<usize>, usize, usize)>,
    degrees: Vec<u32>,
}

fn shape() -> impl Strategy<Value = Shape> {
    (2usize..=4, 1usize..=3).prop_flat_map(|(n, m)| {
        let carriers = prop::collection::vec(prop::collection::vec(any::<bool>(), n), m);
        let plan = (0usize..3, prop::option::of(0..n), any::<usize>(), 0..m);
        (Just(n), carriers, prop::collection::vec(plan, 1..6), prop::collection::vec(1u32..=1000, n * m))
            .prop_map(|(agents, carriers, plans, degrees)| Shape { agents, carriers, plans, degrees })
    })
}

/// Agent `i` always provides `info_i`; for each material it may carry, it
/// picks up with `carry_m`. All carry capabilities of an agent form one
/// choice.
fn build(s: &Shape) -> CoalitionProblem {
    let agent_id = |i: usize| format!("ag{i}");
    let carry = |m: usize| atom(&format!("carry_{m}"));
    let carriers: Vec<Vec<usize>> = s
        .carriers
        .iter()
        .map(|row| {
            let mut v: Vec<usize> = (0..s.agents).filter(|&i| row[i]).collect();
            if v.is_empty() {
                v.push(0);
            }
            v
        })
        .collect();
    let agents = (0..s.agents)
        .map(|i| {
            let capable: Vec<Atom> = (0..carriers.len()).filter(|&m| carriers[m].contains(&i)).map(carry).collect();
            AgentSpec {
                id: agent_id(i),
                actions: vec![atom(&format!("info_{i}"))],
                choices: if capable.is_empty() { vec![] } else { vec![capable] },
            }
        })
        .collect();
    let plans = s
        .plans
        .iter()
        .enumerate()
        .map(|(k, &(g, helper, who, m))| {
            let carrier = carriers[m][who % carriers[m].len()];
            let mut steps = Vec::new();
            if let Some(h) = helper {
                steps.push(PlanStep { agent: agent_id(h), action: atom(&format!("info_{h}")), achiever: false });
            }
            steps.push(PlanStep { agent: agent_id(carrier), action: carry(m), achiever: true });
            Plan { id: format!("p{k}"), goal: atom(&format!("g{g}")), steps, alpha: None }
        })
        .collect();
    let exclusions = carriers
        .iter()
        .enumerate()
        .map(|(m, who)| ExclusionGroup {
            material: format!("m{m}"),
            carry_actions: who.iter().map(|&i| (agent_id(i), carry(m))).collect(),
        })
        .collect();
    let mut possibilities: BTreeMap<String, BTreeMap<Atom, Degree>> = BTreeMap::new();
    for (m, who) in carriers.iter().enumerate() {
        for &i in who {
            let d = Degree::new(Decimal::from_scaled(s.degrees[m * s.agents + i] as i64 * 1000)).unwrap();
            possibilities.entry(agent_id(i)).or_default().insert(carry(m), d);
        }
    }
    CoalitionProblem {
        agents,
        goals: (0..3).map(|g| atom(&format!("g{g}"))).collect(),
        plans,
        exclusions,
        distances: None,
        uncertainty: Some(UncertaintyModel::Explicit { possibilities }),
        weights: None,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn possibilistic_compilation_projects_to_classical(s in shape()) {
        let p = build(&s);
        let poss = p.compile_possibilistic().unwrap();
        prop_assert_eq!(poss.classical(), p.compile_classical().unwrap());
    }

    #[test]
    fn at_most_one_carrier_per_material(s in shape()) {
        let p = build(&s);
        let mcs = p.compile_classical().unwrap();
        let limits = Limits::default();
        let eq = mcs.enumerate_equilibria(&limits).unwrap();
        let index = |id: &str| p.agents.iter().position(|a| a.id == id).unwrap();
        for st in &eq {
            for g in &p.exclusions {
                let holding = g.carry_actions.iter().filter(|(a, act)| st.contains(index(a), act)).count();
                prop_assert!(holding <= 1, "{} carried {} times in {}", g.material, holding, st);
            }
        }
        let ex = p.extract_classical(&eq);
        prop_assert!(ex.warnings.iter().all(|w| !w.contains("no plan rule fired")), "{:?}", ex.warnings);
        for c in &ex.coalitions {
            for a in &c.assignments {
                let plan = p.plans.iter().find(|x| x.id == a.plan).unwrap();
                prop_assert_eq!(&plan.goal, &a.goal);
                for step in &plan.steps {
                    prop_assert!(c.state.contains(index(&step.agent), &step.action));
                }
            }
        }
    }

    #[test]
    fn possibilistic_equilibria_project_to_classical(s in shape()) {
        let p = build(&s);
        let limits = Limits::default();
        let classical = p.compile_classical().unwrap().enumerate_equilibria(&limits).unwrap();
        let poss = p.compile_possibilistic().unwrap().equilibria(&limits).unwrap();
        let projected: Vec<_> = poss.iter().map(|e| e.classical()).collect();
        prop_assert_eq!(projected, classical);
    }
}
