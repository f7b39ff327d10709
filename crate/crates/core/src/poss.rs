//! Possibilistic multi-context systems: necessity-annotated rules, the
//! possibility distribution over belief states, and possibilistic
//! equilibria.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::decimal::Degree;
use crate::logic::mask::{self, MaskRule};
use crate::logic::{positive_closure, Atom, AtomSet, Limits, LogicError, PossProgram, Rule};
use crate::mcs::{BeliefState, BridgeRule, ContextId, Mcs, McsError, QualifiedAtom};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PossError {
    #[error(transparent)]
    Mcs(#[from] McsError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("possibility distribution needs a choice-free system: {0}")]
    ChoiceClauses(String),
    #[error("{size} jointly derivable atoms exceed the bound of {limit}")]
    JointAtomsExceeded { size: usize, limit: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PossBridgeRule {
    pub bridge: BridgeRule,
    pub necessity: Degree,
}

impl PossBridgeRule {
    pub fn new(bridge: BridgeRule, necessity: Degree) -> Self {
        PossBridgeRule { bridge, necessity }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossContext {
    pub id: ContextId,
    pub program: PossProgram,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossMcs {
    contexts: Vec<PossContext>,
    bridges: Vec<PossBridgeRule>,
}

/// One set of necessity-annotated atoms per context.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PossBeliefState(pub Vec<BTreeMap<Atom, Degree>>);

impl PossBeliefState {
    pub fn classical(&self) -> BeliefState {
        BeliefState(self.0.iter().map(|s| s.keys().cloned().collect()).collect())
    }

    pub fn necessity(&self, context: usize, atom: &Atom) -> Option<Degree> {
        self.0.get(context).and_then(|s| s.get(atom)).copied()
    }

    pub fn sets(&self) -> &[BTreeMap<Atom, Degree>] {
        &self.0
    }
}

impl fmt::Display for PossBeliefState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| {
                let atoms: Vec<String> = s.iter().map(|(a, d)| format!("({a}, {d})")).collect();
                format!("{{{}}}", atoms.join(", "))
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

impl PossMcs {
    pub fn new(
        contexts: Vec<(String, PossProgram)>,
        bridges: Vec<PossBridgeRule>,
    ) -> Result<Self, PossError> {
        let classical_contexts = contexts
            .iter()
            .map(|(n, p)| (n.clone(), p.classical()))
            .collect();
        let classical_bridges = bridges.iter().map(|b| b.bridge.clone()).collect();
        Mcs::new(classical_contexts, classical_bridges)?;
        let contexts = contexts
            .into_iter()
            .enumerate()
            .map(|(i, (name, program))| PossContext { id: ContextId { index: i + 1, name }, program })
            .collect();
        Ok(PossMcs { contexts, bridges })
    }

    /// Every rule of a classical system at degree 1.
    pub fn certain(mcs: &Mcs) -> Self {
        PossMcs {
            contexts: mcs
                .contexts()
                .iter()
                .map(|c| PossContext { id: c.id.clone(), program: PossProgram::certain(&c.program) })
                .collect(),
            bridges: mcs
                .bridges()
                .iter()
                .map(|b| PossBridgeRule::new(b.clone(), Degree::ONE))
                .collect(),
        }
    }

    pub fn contexts(&self) -> &[PossContext] {
        &self.contexts
    }

    pub fn bridges(&self) -> &[PossBridgeRule] {
        &self.bridges
    }

    pub fn len(&self) -> usize {
        self.contexts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contexts.is_empty()
    }

    pub fn context_index(&self, name: &str) -> Option<usize> {
        self.contexts.iter().position(|c| c.id.name == name)
    }

    /// The classical projection: all degrees dropped.
    pub fn classical(&self) -> Mcs {
        Mcs::new(
            self.contexts
                .iter()
                .map(|c| (c.id.name.clone(), c.program.classical()))
                .collect(),
            self.bridges.iter().map(|b| b.bridge.clone()).collect(),
        )
        .expect("validated on construction")
    }

    pub fn is_definite(&self) -> bool {
        self.contexts.iter().all(|c| c.program.is_definite())
            && self.bridges.iter().all(|b| b.bridge.is_definite())
    }

    /// Local programs reduced by their own belief set, bridge rules by the
    /// whole state.
    pub fn reduct(&self, state: &BeliefState) -> Result<PossMcs, PossError> {
        if state.len() != self.len() {
            return Err(McsError::StateArity { expected: self.len(), found: state.len() }.into());
        }
        let contexts = self
            .contexts
            .iter()
            .zip(state.sets())
            .map(|(c, s)| PossContext { id: c.id.clone(), program: c.program.reduct(s) })
            .collect();
        let bridges = self
            .bridges
            .iter()
            .filter(|b| !b.bridge.neg.iter().any(|q| state.contains(q.context, &q.atom)))
            .map(|b| PossBridgeRule::new(b.bridge.positive_projection(), b.necessity))
            .collect();
        Ok(PossMcs { contexts, bridges })
    }

    /// π of a single belief state.
    pub fn possibility_of_state(&self, state: &BeliefState, limits: &Limits) -> Result<Degree, PossError> {
        let flat = Flat::new(self, limits)?;
        if state.len() != self.len() {
            return Err(McsError::StateArity { expected: self.len(), found: state.len() }.into());
        }
        Ok(match flat.encode(state) {
            Some(s) => flat.possibility(s),
            None => Degree::ZERO,
        })
    }

    /// π over every candidate state, summarised per atom.
    pub fn distribution(&self, limits: &Limits) -> Result<PossibilityDistribution, PossError> {
        let flat = Flat::new(self, limits)?;
        let k = flat.slots.len();
        let states = 1usize << k;
        if states > limits.max_candidates {
            return Err(McsError::SearchSpaceExceeded { size: states, limit: limits.max_candidates }.into());
        }
        let all: Vec<u64> = mask::submasks(flat.full).collect();
        let summary = all
            .par_iter()
            .fold(
                || Summary::new(k),
                |mut acc, &s| {
                    acc.record(s, flat.possibility(s));
                    acc
                },
            )
            .reduce(|| Summary::new(k), Summary::merge);
        Ok(PossibilityDistribution { lookup: flat.lookup, slots: flat.slots, n: self.len(), summary })
    }

    /// Atoms whose necessity is positive, annotated with it.
    pub fn grounded_equilibrium(&self, limits: &Limits) -> Result<PossBeliefState, PossError> {
        if let Some(s) = self.fixpoint_necessities() {
            return Ok(s);
        }
        Ok(self.distribution(limits)?.positive_necessities())
    }

    /// Necessities by iterating the possibilistic consequence operator
    /// (a head gets the max over its rules of the min of the rule degree
    /// and the body necessities). Only answers for definite systems whose
    /// constraints cannot fire inside the least model: every state of
    /// positive possibility lies within that model, so such constraints
    /// leave π untouched.
    pub fn fixpoint_necessities(&self) -> Option<PossBeliefState> {
        if !self.is_definite() {
            return None;
        }
        let mut n: Vec<BTreeMap<Atom, Degree>> = vec![BTreeMap::new(); self.len()];
        loop {
            let mut changed = false;
            let mut raise = |n: &mut Vec<BTreeMap<Atom, Degree>>, c: usize, head: &Atom, v: Degree| {
                let slot = n[c].entry(head.clone()).or_insert_with(|| {
                    changed = true;
                    v
                });
                if v > *slot {
                    *slot = v;
                    changed = true;
                }
            };
            for (i, ctx) in self.contexts.iter().enumerate() {
                for r in ctx.program.rules() {
                    let body = r.rule.pos.iter().map(|a| n[i].get(a).copied()).try_fold(r.necessity, |m, d| d.map(|d| m.min(d)));
                    if let Some(v) = body {
                        raise(&mut n, i, &r.rule.head, v);
                    }
                }
            }
            for b in &self.bridges {
                let body = b
                    .bridge
                    .pos
                    .iter()
                    .map(|q| n[q.context].get(&q.atom).copied())
                    .try_fold(b.necessity, |m, d| d.map(|d| m.min(d)));
                if let Some(v) = body {
                    raise(&mut n, b.bridge.target, &b.bridge.head, v);
                }
            }
            if !changed {
                break;
            }
        }
        let fires = self.contexts.iter().enumerate().any(|(i, ctx)| {
            ctx.program.constraints().iter().any(|c| c.pos.iter().all(|a| n[i].contains_key(a)))
        });
        if fires {
            return None;
        }
        for s in &mut n {
            s.retain(|_, d| *d > Degree::ZERO);
        }
        Some(PossBeliefState(n))
    }

    /// Possibilistic equilibria: for each classical equilibrium `S`, the
    /// grounded equilibrium of the reduct by `S`, kept when it projects
    /// back onto `S`.
    pub fn equilibria(&self, limits: &Limits) -> Result<Vec<PossBeliefState>, PossError> {
        let mut out = Vec::new();
        for s in self.classical().enumerate_equilibria(limits)? {
            let md = self.reduct(&s)?.grounded_equilibrium(limits)?;
            if md.classical() == s {
                out.push(md);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy)]
struct FlatRule {
    rule: MaskRule,
    necessity: Degree,
    bridge: bool,
}

/// The system flattened onto global bits, restricted to atoms that are
/// derivable at all; any state with an atom outside that set has π = 0.
struct Flat {
    slots: Vec<(usize, Atom)>,
    lookup: HashMap<(usize, Atom), u32>,
    rules: Vec<FlatRule>,
    constraints: Vec<(u64, u64)>,
    full: u64,
}

impl Flat {
    fn new(pmcs: &PossMcs, limits: &Limits) -> Result<Self, PossError> {
        if let Some(c) = pmcs.contexts.iter().find(|c| !c.program.choices().is_empty()) {
            return Err(PossError::ChoiceClauses(format!("context `{}`", c.id)));
        }
        // Qualified rules: the context is folded into the atom name space.
        let mut qualified: Vec<(Rule, Degree, bool)> = Vec::new();
        let tag = |c: usize, a: &Atom| Atom::new(&format!("c{c}_{a}")).expect("valid");
        let mut origin: HashMap<Atom, (usize, Atom)> = HashMap::new();
        let mut q = |c: usize, a: &Atom| {
            let t = tag(c, a);
            origin.entry(t.clone()).or_insert_with(|| (c, a.clone()));
            t
        };
        for (i, ctx) in pmcs.contexts.iter().enumerate() {
            for r in ctx.program.rules() {
                let rule = Rule::new(
                    q(i, &r.rule.head),
                    r.rule.pos.iter().map(|a| q(i, a)).collect(),
                    r.rule.neg.iter().map(|a| q(i, a)).collect(),
                );
                qualified.push((rule, r.necessity, false));
            }
        }
        for b in &pmcs.bridges {
            let lit = |qa: &QualifiedAtom| (qa.context, qa.atom.clone());
            let pos: Vec<(usize, Atom)> = b.bridge.pos.iter().map(lit).collect();
            let neg: Vec<(usize, Atom)> = b.bridge.neg.iter().map(lit).collect();
            let rule = Rule::new(
                q(b.bridge.target, &b.bridge.head),
                pos.iter().map(|(c, a)| q(*c, a)).collect(),
                neg.iter().map(|(c, a)| q(*c, a)).collect(),
            );
            qualified.push((rule, b.necessity, true));
        }
        let derivable = positive_closure(qualified.iter().map(|(r, _, _)| r), &AtomSet::new());
        let limit = limits.max_joint_atoms.min(mask::MAX_MASK_ATOMS);
        if derivable.len() > limit {
            return Err(PossError::JointAtomsExceeded { size: derivable.len(), limit });
        }
        let slots: Vec<(usize, Atom)> = derivable.iter().map(|t| origin[t].clone()).collect();
        let bit_of: HashMap<&Atom, u64> = derivable.iter().enumerate().map(|(i, t)| (t, 1u64 << i)).collect();
        let lookup = slots.iter().enumerate().map(|(i, s)| (s.clone(), i as u32)).collect();
        let rules = qualified
            .iter()
            .filter(|(r, _, _)| r.pos.is_subset(&derivable))
            .map(|(r, d, bridge)| FlatRule {
                rule: MaskRule {
                    head: bit_of[&r.head],
                    pos: r.pos.iter().fold(0, |m, a| m | bit_of[a]),
                    neg: r.neg.iter().filter_map(|a| bit_of.get(a)).fold(0, |m, b| m | b),
                },
                necessity: *d,
                bridge: *bridge,
            })
            .collect();
        let constraints = pmcs
            .contexts
            .iter()
            .enumerate()
            .flat_map(|(i, ctx)| ctx.program.constraints().iter().map(move |c| (i, c)))
            .filter_map(|(i, c)| {
                let pos = c.pos.iter().map(|a| bit_of.get(&tag(i, a)).copied()).try_fold(0u64, |m, b| b.map(|b| m | b))?;
                let neg = c.neg.iter().filter_map(|a| bit_of.get(&tag(i, a))).fold(0, |m, b| m | b);
                Some((pos, neg))
            })
            .collect();
        let full = if slots.is_empty() { 0 } else { u64::MAX >> (64 - slots.len()) };
        Ok(Flat { slots, lookup, rules, constraints, full })
    }

    fn encode(&self, state: &BeliefState) -> Option<u64> {
        let mut m = 0u64;
        for (c, set) in state.sets().iter().enumerate() {
            for a in set {
                m |= 1u64 << self.lookup.get(&(c, a.clone()))?;
            }
        }
        Some(m)
    }

    fn possibility(&self, s: u64) -> Degree {
        if self.constraints.iter().any(|&(p, n)| s & p == p && s & n == 0) {
            return Degree::ZERO;
        }
        let applicable: Vec<&FlatRule> = self.rules.iter().filter(|r| r.rule.applicable(s)).collect();
        let heads = applicable.iter().fold(0, |m, r| m | r.rule.head);
        if s & !heads != 0 {
            return Degree::ZERO;
        }
        let app: Vec<MaskRule> = applicable.iter().map(|r| r.rule).collect();
        let reach = mask::least_model(&app, 0);
        if app.iter().any(|r| r.pos & reach != r.pos) {
            return Degree::ZERO;
        }
        let bridge_heads = applicable
            .iter()
            .filter(|r| r.bridge)
            .fold(0, |m, r| m | r.rule.head);
        let local: Vec<MaskRule> = self
            .rules
            .iter()
            .filter(|r| !r.bridge && r.rule.neg & s == 0)
            .map(|r| r.rule)
            .collect();
        if mask::least_model(&local, bridge_heads) == s {
            return Degree::ONE;
        }
        applicable
            .iter()
            .filter(|r| s & r.rule.head == 0)
            .map(|r| r.necessity)
            .max()
            .unwrap_or(Degree::ZERO)
            .complement()
    }
}

#[derive(Debug, Clone)]
struct Summary {
    max_all: Degree,
    with: Vec<Degree>,
    without: Vec<Degree>,
}

impl Summary {
    fn new(k: usize) -> Self {
        Summary { max_all: Degree::ZERO, with: vec![Degree::ZERO; k], without: vec![Degree::ZERO; k] }
    }

    fn record(&mut self, s: u64, pi: Degree) {
        if pi == Degree::ZERO {
            return;
        }
        self.max_all = self.max_all.max(pi);
        for i in 0..self.with.len() {
            let slot = if s >> i & 1 == 1 { &mut self.with[i] } else { &mut self.without[i] };
            *slot = (*slot).max(pi);
        }
    }

    fn merge(mut self, other: Summary) -> Summary {
        self.max_all = self.max_all.max(other.max_all);
        for (a, b) in self.with.iter_mut().zip(other.with) {
            *a = (*a).max(b);
        }
        for (a, b) in self.without.iter_mut().zip(other.without) {
            *a = (*a).max(b);
        }
        self
    }
}

/// Atom-level possibility and necessity derived from π.
#[derive(Debug, Clone)]
pub struct PossibilityDistribution {
    lookup: HashMap<(usize, Atom), u32>,
    slots: Vec<(usize, Atom)>,
    n: usize,
    summary: Summary,
}

impl PossibilityDistribution {
    /// Highest π of any state.
    pub fn max_possibility(&self) -> Degree {
        self.summary.max_all
    }

    /// Π of `atom` in context `context`.
    pub fn possibility(&self, context: usize, atom: &Atom) -> Degree {
        match self.lookup.get(&(context, atom.clone())) {
            Some(&i) => self.summary.with[i as usize],
            None => Degree::ZERO,
        }
    }

    /// N of `atom` in context `context`.
    pub fn necessity(&self, context: usize, atom: &Atom) -> Degree {
        match self.lookup.get(&(context, atom.clone())) {
            Some(&i) => self.summary.without[i as usize].complement(),
            None => self.summary.max_all.complement(),
        }
    }

    pub fn positive_necessities(&self) -> PossBeliefState {
        let mut sets = vec![BTreeMap::new(); self.n];
        for (i, (c, a)) in self.slots.iter().enumerate() {
            let n = self.summary.without[i].complement();
            if n > Degree::ZERO {
                sets[*c].insert(a.clone(), n);
            }
        }
        PossBeliefState(sets)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{atoms, PossRule, Semantics};

    fn a(n: &str) -> Atom {
        Atom::new(n).unwrap()
    }

    fn d(s: &str) -> Degree {
        s.parse().unwrap()
    }

    fn prule(head: &str, pos: &[&str], neg: &[&str], deg: &str) -> PossRule {
        PossRule::new(
            Rule::new(a(head), atoms(pos.iter().copied()), atoms(neg.iter().copied())),
            d(deg),
        )
    }

    fn pbridge(target: usize, head: &str, pos: &[(usize, &str)], deg: &str) -> PossBridgeRule {
        PossBridgeRule::new(
            BridgeRule::new(
                target,
                a(head),
                pos.iter().map(|&(c, n)| QualifiedAtom::new(c, a(n))).collect(),
                Default::default(),
            ),
            d(deg),
        )
    }

    fn example2() -> PossMcs {
        let p1 = PossProgram::new(
            Semantics::AnswerSet,
            atoms(["sensors", "corba", "distributedComputing", "centralizedComputing"]),
            vec![
                prule("sensors", &[], &[], "1"),
                prule("corba", &[], &[], "1"),
                prule("distributedComputing", &["corba"], &["centralizedComputing"], "0.8"),
            ],
            vec![],
            vec![],
        )
        .unwrap();
        let p2 = PossProgram::new(
            Semantics::AnswerSet,
            atoms(["profA", "profB", "middleware"]),
            vec![prule("profA", &[], &[], "1")],
            vec![],
            vec![],
        )
        .unwrap();
        let p3 = PossProgram::inferred(
            Semantics::AnswerSet,
            vec![prule("ambientComputing", &["ubiquitousComputing"], &[], "0.9")],
            vec![],
            vec![],
        )
        .unwrap();
        PossMcs::new(
            vec![("c1".into(), p1), ("c2".into(), p2), ("c3".into(), p3)],
            vec![
                pbridge(0, "centralizedComputing", &[(1, "middleware")], "0.7"),
                pbridge(0, "distributedComputing", &[(2, "ambientComputing")], "0.6"),
                pbridge(1, "middleware", &[(0, "corba")], "0.9"),
                pbridge(2, "ubiquitousComputing", &[(0, "sensors"), (1, "profB")], "0.8"),
            ],
        )
        .unwrap()
    }

    fn state(sets: [&[&str]; 3]) -> BeliefState {
        BeliefState::new(sets.iter().map(|s| atoms(s.iter().copied())).collect())
    }

    #[test]
    fn example2_possibility_of_states() {
        let m = example2();
        let l = Limits::default();
        let s = state([&["sensors", "corba", "centralizedComputing"], &["profA", "middleware"], &[]]);
        let s1 = state([&["sensors", "corba"], &["profA", "middleware"], &[]]);
        let s2 = state([&["sensors", "corba"], &["profA"], &[]]);
        let x = state([&["sensors", "corba", "distributedComputing"], &["profA", "middleware"], &[]]);
        assert_eq!(m.possibility_of_state(&s, &l).unwrap(), Degree::ONE);
        assert_eq!(m.possibility_of_state(&s1, &l).unwrap(), d("0.2"));
        assert_eq!(m.possibility_of_state(&s2, &l).unwrap(), d("0.1"));
        assert_eq!(m.possibility_of_state(&x, &l).unwrap(), d("0.3"));
    }

    #[test]
    fn example2_necessities() {
        let m = example2();
        let dist = m.distribution(&Limits::default()).unwrap();
        assert_eq!(dist.necessity(1, &a("middleware")), d("0.9"));
        assert_eq!(dist.necessity(1, &a("profA")), Degree::ONE);
        assert_eq!(dist.necessity(0, &a("sensors")), Degree::ONE);
        assert_eq!(dist.necessity(0, &a("corba")), Degree::ONE);
        assert_eq!(dist.necessity(0, &a("centralizedComputing")), d("0.7"));
        assert_eq!(dist.possibility(2, &a("ambientComputing")), Degree::ZERO);
        assert_eq!(dist.necessity(2, &a("ambientComputing")), Degree::ZERO);
    }

    #[test]
    fn example2_equilibrium() {
        let eq = example2().equilibria(&Limits::default()).unwrap();
        assert_eq!(eq.len(), 1);
        let e = &eq[0];
        assert_eq!(e.necessity(0, &a("centralizedComputing")), Some(d("0.7")));
        assert_eq!(e.necessity(1, &a("middleware")), Some(d("0.9")));
        assert_eq!(
            e.classical(),
            state([&["sensors", "corba", "centralizedComputing"], &["profA", "middleware"], &[]])
        );
    }

    #[test]
    fn reduct_by_grounded_state_drops_blocked_rule() {
        let s = state([&["sensors", "corba", "centralizedComputing"], &["profA", "middleware"], &[]]);
        let r = example2().reduct(&s).unwrap();
        assert!(r.is_definite());
        assert_eq!(r.contexts()[0].program.rules().len(), 2);
        assert_eq!(r.bridges().len(), 4);
    }

    #[test]
    fn single_uncertain_fact() {
        let p = PossProgram::inferred(Semantics::AnswerSet, vec![prule("a", &[], &[], "0.4")], vec![], vec![]).unwrap();
        let m = PossMcs::new(vec![("c".into(), p)], vec![]).unwrap();
        let l = Limits::default();
        assert_eq!(m.possibility_of_state(&BeliefState::empty(1), &l).unwrap(), d("0.6"));
        let eq = m.equilibria(&l).unwrap();
        assert_eq!(eq, vec![PossBeliefState(vec![BTreeMap::from([(a("a"), d("0.4"))])])]);
    }

    #[test]
    fn certain_facts_keep_degree_one() {
        let p = PossProgram::inferred(
            Semantics::AnswerSet,
            vec![prule("x", &[], &[], "1"), prule("y", &[], &[], "1")],
            vec![],
            vec![],
        )
        .unwrap();
        let m = PossMcs::new(vec![("c".into(), p)], vec![]).unwrap();
        let g = m.grounded_equilibrium(&Limits::default()).unwrap();
        assert_eq!(g.necessity(0, &a("x")), Some(Degree::ONE));
        assert_eq!(g.necessity(0, &a("y")), Some(Degree::ONE));
    }

    #[test]
    fn choice_clauses_are_rejected_for_distribution() {
        let p = PossProgram::inferred(
            Semantics::ChoiceMinimalModel,
            vec![],
            vec![crate::logic::PossChoice::new(vec![(a("x"), Degree::ONE)]).unwrap()],
            vec![],
        )
        .unwrap();
        let m = PossMcs::new(vec![("c".into(), p)], vec![]).unwrap();
        assert!(matches!(m.distribution(&Limits::default()), Err(PossError::ChoiceClauses(_))));
        assert_eq!(m.equilibria(&Limits::default()).unwrap().len(), 1);
    }
}
