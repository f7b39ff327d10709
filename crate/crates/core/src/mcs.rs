//! Multi-context systems: contexts, bridge rules, belief states and
//! equilibria.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::logic::mask::{self, CompiledProgram};
use crate::logic::{Atom, AtomSet, Limits, LogicError, Program};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum McsError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("unknown context `{0}`")]
    UnknownContext(String),
    #[error("context `{0}` declared twice")]
    DuplicateContext(String),
    #[error("bridge rule head `{atom}` is outside the alphabet of context `{context}`")]
    HeadOutsideAlphabet { context: String, atom: Atom },
    #[error("belief state has {found} sets but the system has {expected} contexts")]
    StateArity { expected: usize, found: usize },
    #[error("system is not definite: {0}")]
    NotDefinite(String),
    #[error("search space of {size} candidate states exceeds the bound of {limit}")]
    SearchSpaceExceeded { size: usize, limit: usize },
}

/// A context identifier: 1-based position plus symbolic name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ContextId {
    pub index: usize,
    pub name: String,
}

impl fmt::Display for ContextId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// `(c:a)` with `c` the 0-based position of the context in the system.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QualifiedAtom {
    pub context: usize,
    pub atom: Atom,
}

impl QualifiedAtom {
    pub fn new(context: usize, atom: Atom) -> Self {
        QualifiedAtom { context, atom }
    }
}

/// `(target:head) ← (c:a)…, not (c:b)…`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BridgeRule {
    pub target: usize,
    pub head: Atom,
    pub pos: BTreeSet<QualifiedAtom>,
    pub neg: BTreeSet<QualifiedAtom>,
}

impl BridgeRule {
    pub fn new(
        target: usize,
        head: Atom,
        pos: BTreeSet<QualifiedAtom>,
        neg: BTreeSet<QualifiedAtom>,
    ) -> Self {
        BridgeRule { target, head, pos, neg }
    }

    pub fn is_definite(&self) -> bool {
        self.neg.is_empty()
    }

    pub fn is_applicable(&self, state: &BeliefState) -> bool {
        let holds = |q: &QualifiedAtom| state.0.get(q.context).is_some_and(|s| s.contains(&q.atom));
        self.pos.iter().all(holds) && !self.neg.iter().any(holds)
    }

    pub fn positive_projection(&self) -> BridgeRule {
        BridgeRule::new(self.target, self.head.clone(), self.pos.clone(), BTreeSet::new())
    }

    fn contexts(&self) -> impl Iterator<Item = usize> + '_ {
        std::iter::once(self.target).chain(self.pos.iter().chain(&self.neg).map(|q| q.context))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub id: ContextId,
    pub program: Program,
}

/// One belief set per context, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BeliefState(pub Vec<AtomSet>);

impl BeliefState {
    pub fn new(sets: Vec<AtomSet>) -> Self {
        BeliefState(sets)
    }

    pub fn empty(n: usize) -> Self {
        BeliefState(vec![AtomSet::new(); n])
    }

    pub fn sets(&self) -> &[AtomSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, context: usize, atom: &Atom) -> bool {
        self.0.get(context).is_some_and(|s| s.contains(atom))
    }

    /// Removes every atom for which `drop` returns true.
    pub fn without(&self, drop: impl Fn(&Atom) -> bool) -> BeliefState {
        BeliefState(
            self.0
                .iter()
                .map(|s| s.iter().filter(|a| !drop(a)).cloned().collect())
                .collect(),
        )
    }
}

impl fmt::Display for BeliefState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|s| {
                let atoms: Vec<&str> = s.iter().map(Atom::name).collect();
                format!("{{{}}}", atoms.join(", "))
            })
            .collect();
        write!(f, "({})", parts.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mcs {
    contexts: Vec<Context>,
    bridges: Vec<BridgeRule>,
}

/// A candidate state rejected during enumeration and the contexts whose
/// acceptability check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateFailure {
    pub state: BeliefState,
    pub failed_contexts: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub equilibria: Vec<BeliefState>,
    pub candidates_checked: usize,
    /// At most [`ConsistencyReport::MAX_FAILURES`] entries.
    pub failures: Vec<CandidateFailure>,
    pub failures_total: usize,
}

impl ConsistencyReport {
    pub const MAX_FAILURES: usize = 16;
}

impl Mcs {
    pub fn new(contexts: Vec<(String, Program)>, bridges: Vec<BridgeRule>) -> Result<Self, McsError> {
        let mut seen = BTreeSet::new();
        for (name, _) in &contexts {
            if !seen.insert(name.clone()) {
                return Err(McsError::DuplicateContext(name.clone()));
            }
        }
        let contexts: Vec<Context> = contexts
            .into_iter()
            .enumerate()
            .map(|(i, (name, program))| Context {
                id: ContextId { index: i + 1, name },
                program,
            })
            .collect();
        for b in &bridges {
            if let Some(c) = b.contexts().find(|&c| c >= contexts.len()) {
                return Err(McsError::UnknownContext(format!("#{}", c + 1)));
            }
            let target = &contexts[b.target];
            if !target.program.alphabet().contains(&b.head) {
                return Err(McsError::HeadOutsideAlphabet {
                    context: target.id.name.clone(),
                    atom: b.head.clone(),
                });
            }
        }
        Ok(Mcs { contexts, bridges })
    }

    pub fn contexts(&self) -> &[Context] {
        &self.contexts
    }

    pub fn bridges(&self) -> &[BridgeRule] {
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

    pub fn is_definite(&self) -> bool {
        self.bridges.iter().all(BridgeRule::is_definite)
            && self
                .contexts
                .iter()
                .all(|c| c.program.is_definite() && c.program.choices().is_empty())
    }

    fn check_arity(&self, state: &BeliefState) -> Result<(), McsError> {
        if state.len() != self.len() {
            return Err(McsError::StateArity { expected: self.len(), found: state.len() });
        }
        Ok(())
    }

    /// Heads of the bridge rules applicable in `state`, per target context.
    pub fn applicable_bridge_heads(&self, state: &BeliefState) -> Result<Vec<AtomSet>, McsError> {
        self.check_arity(state)?;
        let mut heads = vec![AtomSet::new(); self.len()];
        for b in self.bridges.iter().filter(|b| b.is_applicable(state)) {
            heads[b.target].insert(b.head.clone());
        }
        Ok(heads)
    }

    /// Contexts whose belief set is not acceptable given the applicable
    /// bridge heads.
    pub fn failed_contexts(&self, state: &BeliefState, limits: &Limits) -> Result<Vec<usize>, McsError> {
        let heads = self.applicable_bridge_heads(state)?;
        let mut failed = Vec::new();
        for (i, ctx) in self.contexts.iter().enumerate() {
            let acc = ctx.program.acceptable(&heads[i], limits)?;
            if !acc.contains(&state.0[i]) {
                failed.push(i);
            }
        }
        Ok(failed)
    }

    pub fn is_equilibrium(&self, state: &BeliefState, limits: &Limits) -> Result<bool, McsError> {
        Ok(self.failed_contexts(state, limits)?.is_empty())
    }

    /// All equilibria, sorted lexicographically.
    pub fn enumerate_equilibria(&self, limits: &Limits) -> Result<Vec<BeliefState>, McsError> {
        Ok(Engine::new(self, limits)?.run(false).0)
    }

    pub fn check_consistency(&self, limits: &Limits) -> Result<ConsistencyReport, McsError> {
        let engine = Engine::new(self, limits)?;
        let (equilibria, failures, failures_total) = engine.run(true);
        Ok(ConsistencyReport {
            consistent: !equilibria.is_empty(),
            equilibria,
            candidates_checked: engine.total,
            failures,
            failures_total,
        })
    }

    /// The grounded equilibrium of a system without negation in its bridge
    /// rules and without choice clauses. Local programs may use default
    /// negation as long as every program met on the way has exactly one
    /// answer set.
    pub fn grounded_equilibrium(&self, limits: &Limits) -> Result<BeliefState, McsError> {
        if let Some(b) = self.bridges.iter().find(|b| !b.is_definite()) {
            return Err(McsError::NotDefinite(format!(
                "bridge rule for ({}:{}) has a negative body",
                self.contexts[b.target].id, b.head
            )));
        }
        if let Some(c) = self.contexts.iter().find(|c| !c.program.choices().is_empty()) {
            return Err(McsError::NotDefinite(format!("context `{}` has choice clauses", c.id)));
        }
        let mut heads = vec![AtomSet::new(); self.len()];
        let bound = self.contexts.iter().map(|c| c.program.alphabet().len()).sum::<usize>() + 2;
        for _ in 0..bound {
            let mut sets = Vec::with_capacity(self.len());
            for (i, ctx) in self.contexts.iter().enumerate() {
                let mut acc = if ctx.program.is_definite() {
                    let m = ctx.program.least_model(&heads[i])?;
                    if ctx.program.constraints().iter().any(|c| c.violated_by(&m)) {
                        Vec::new()
                    } else {
                        vec![m]
                    }
                } else {
                    ctx.program.acceptable(&heads[i], limits)?
                };
                if acc.len() != 1 {
                    return Err(McsError::NotDefinite(format!(
                        "context `{}` has {} answer sets under the derived bridge heads",
                        ctx.id,
                        acc.len()
                    )));
                }
                sets.push(acc.pop().unwrap());
            }
            let state = BeliefState(sets);
            let next = self.applicable_bridge_heads(&state)?;
            if next == heads {
                if !self.is_equilibrium(&state, limits)? {
                    return Err(McsError::NotDefinite("fixpoint is not an equilibrium".into()));
                }
                return Ok(state);
            }
            heads = next;
        }
        Err(McsError::NotDefinite("bridge-head iteration does not stabilise".into()))
    }
}

struct MaskBridge {
    target: usize,
    head: u64,
    /// `(context, mask)` pairs that must all be present.
    pos: Vec<(usize, u64)>,
    /// `(context, bit)` pairs that must all be absent.
    neg: Vec<(usize, u64)>,
}

/// Candidate generation and verification over bitmasks.
struct Engine<'a> {
    mcs: &'a Mcs,
    programs: Vec<CompiledProgram>,
    bridges: Vec<MaskBridge>,
    /// `acc[i][h]` = acceptable sets of context `i` given bridge heads `h`.
    acc: Vec<HashMap<u64, Vec<u64>>>,
    candidates: Vec<Vec<u64>>,
    total: usize,
}

impl<'a> Engine<'a> {
    fn new(mcs: &'a Mcs, limits: &Limits) -> Result<Self, McsError> {
        let programs = mcs
            .contexts
            .iter()
            .map(|c| CompiledProgram::new(&c.program, limits))
            .collect::<Result<Vec<_>, _>>()?;
        let bridges: Vec<MaskBridge> = mcs
            .bridges
            .iter()
            .filter_map(|b| {
                let mut pos: HashMap<usize, u64> = HashMap::new();
                for q in &b.pos {
                    // a body atom outside the context's alphabet never holds
                    let bit = programs[q.context].index.bit(&q.atom)?;
                    *pos.entry(q.context).or_default() |= bit;
                }
                let neg = b
                    .neg
                    .iter()
                    .filter_map(|q| programs[q.context].index.bit(&q.atom).map(|bit| (q.context, bit)))
                    .collect();
                let mut pos: Vec<(usize, u64)> = pos.into_iter().collect();
                pos.sort_unstable();
                Some(MaskBridge {
                    target: b.target,
                    head: programs[b.target].index.bit(&b.head).expect("validated head"),
                    pos,
                    neg,
                })
            })
            .collect();

        let mut acc = Vec::with_capacity(programs.len());
        let mut candidates = Vec::with_capacity(programs.len());
        for (i, program) in programs.iter().enumerate() {
            let heads = bridges
                .iter()
                .filter(|b| b.target == i)
                .fold(0u64, |m, b| m | b.head);
            let subsets = 1usize.checked_shl(heads.count_ones()).unwrap_or(usize::MAX);
            if subsets > limits.max_candidates {
                return Err(McsError::SearchSpaceExceeded { size: subsets, limit: limits.max_candidates });
            }
            let mut table = HashMap::with_capacity(subsets);
            let mut union = BTreeSet::new();
            for h in mask::submasks(heads) {
                let sets = program.acceptable(h, limits)?;
                union.extend(sets.iter().copied());
                table.insert(h, sets);
            }
            acc.push(table);
            candidates.push(union.into_iter().collect::<Vec<u64>>());
        }
        let total = candidates
            .iter()
            .try_fold(1usize, |n, c| n.checked_mul(c.len()))
            .unwrap_or(usize::MAX);
        if total > limits.max_candidates {
            return Err(McsError::SearchSpaceExceeded { size: total, limit: limits.max_candidates });
        }
        Ok(Engine { mcs, programs, bridges, acc, candidates, total })
    }

    fn decode(&self, mut k: usize) -> Vec<u64> {
        self.candidates
            .iter()
            .map(|c| {
                let m = c[k % c.len()];
                k /= c.len();
                m
            })
            .collect()
    }

    fn heads(&self, state: &[u64]) -> Vec<u64> {
        let mut heads = vec![0u64; state.len()];
        for b in &self.bridges {
            let fires = b.pos.iter().all(|&(c, m)| state[c] & m == m)
                && b.neg.iter().all(|&(c, bit)| state[c] & bit == 0);
            if fires {
                heads[b.target] |= b.head;
            }
        }
        heads
    }

    fn failed(&self, state: &[u64]) -> Vec<usize> {
        let heads = self.heads(state);
        (0..state.len())
            .filter(|&i| !self.acc[i].get(&heads[i]).is_some_and(|sets| sets.contains(&state[i])))
            .collect()
    }

    fn to_state(&self, masks: &[u64]) -> BeliefState {
        BeliefState(
            masks
                .iter()
                .zip(&self.programs)
                .map(|(&m, p)| p.index.set(m))
                .collect(),
        )
    }

    /// Equilibria plus, when requested, a sample of failed candidates and
    /// the total number of failures.
    fn run(&self, diagnose: bool) -> (Vec<BeliefState>, Vec<CandidateFailure>, usize) {
        if self.mcs.is_empty() {
            return (vec![BeliefState::default()], Vec::new(), 0);
        }
        let outcomes: Vec<(usize, bool)> = (0..self.total)
            .into_par_iter()
            .filter_map(|k| {
                let masks = self.decode(k);
                let ok = self.failed(&masks).is_empty();
                (ok || diagnose).then_some((k, ok))
            })
            .collect();
        let mut equilibria: Vec<BeliefState> = outcomes
            .iter()
            .filter(|(_, ok)| *ok)
            .map(|&(k, _)| self.to_state(&self.decode(k)))
            .collect();
        equilibria.sort();
        let failures_total = outcomes.iter().filter(|(_, ok)| !ok).count();
        let failures = outcomes
            .iter()
            .filter(|(_, ok)| !ok)
            .take(ConsistencyReport::MAX_FAILURES)
            .map(|&(k, _)| {
                let masks = self.decode(k);
                CandidateFailure { state: self.to_state(&masks), failed_contexts: self.failed(&masks) }
            })
            .collect();
        (equilibria, failures, failures_total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{atoms, Constraint, Rule, Semantics};

    fn a(n: &str) -> Atom {
        Atom::new(n).unwrap()
    }

    fn q(c: usize, n: &str) -> QualifiedAtom {
        QualifiedAtom::new(c, a(n))
    }

    fn bridge(target: usize, head: &str, pos: &[(usize, &str)], neg: &[(usize, &str)]) -> BridgeRule {
        BridgeRule::new(
            target,
            a(head),
            pos.iter().map(|&(c, n)| q(c, n)).collect(),
            neg.iter().map(|&(c, n)| q(c, n)).collect(),
        )
    }

    fn rule(head: &str, pos: &[&str], neg: &[&str]) -> Rule {
        Rule::new(a(head), atoms(pos.iter().copied()), atoms(neg.iter().copied()))
    }

    fn example1(profb: bool) -> Mcs {
        let kb1 = Program::new(
            Semantics::AnswerSet,
            atoms(["sensors", "corba", "distributedComputing", "centralizedComputing"]),
            vec![
                rule("sensors", &[], &[]),
                rule("corba", &[], &[]),
                rule("distributedComputing", &["corba"], &["centralizedComputing"]),
            ],
            vec![],
            vec![Constraint::new(atoms(["centralizedComputing", "distributedComputing"]), AtomSet::new())],
        )
        .unwrap();
        let mut facts2 = vec![rule("profA", &[], &[])];
        if profb {
            facts2.push(rule("profB", &[], &[]));
        }
        let kb2 = Program::new(
            Semantics::AnswerSet,
            atoms(["profA", "profB", "middleware"]),
            facts2,
            vec![],
            vec![],
        )
        .unwrap();
        let kb3 = Program::answer_set(vec![rule("ambientComputing", &["ubiquitousComputing"], &[])]).unwrap();
        Mcs::new(
            vec![("c1".into(), kb1), ("c2".into(), kb2), ("c3".into(), kb3)],
            vec![
                bridge(0, "centralizedComputing", &[(1, "middleware")], &[]),
                bridge(0, "distributedComputing", &[(2, "ambientComputing")], &[]),
                bridge(1, "middleware", &[(0, "corba")], &[]),
                bridge(2, "ubiquitousComputing", &[(0, "sensors"), (1, "profB")], &[]),
            ],
        )
        .unwrap()
    }

    fn example1_state() -> BeliefState {
        BeliefState::new(vec![
            atoms(["sensors", "corba", "centralizedComputing"]),
            atoms(["profA", "middleware"]),
            AtomSet::new(),
        ])
    }

    #[test]
    fn applicable_heads_in_example1() {
        let heads = example1(false).applicable_bridge_heads(&example1_state()).unwrap();
        assert_eq!(heads, vec![atoms(["centralizedComputing"]), atoms(["middleware"]), AtomSet::new()]);
    }

    #[test]
    fn example1_has_one_equilibrium() {
        let limits = Limits::default();
        let m = example1(false);
        assert!(m.is_equilibrium(&example1_state(), &limits).unwrap());
        assert!(!m.is_equilibrium(&BeliefState::empty(3), &limits).unwrap());
        assert_eq!(m.enumerate_equilibria(&limits).unwrap(), vec![example1_state()]);
        assert_eq!(m.grounded_equilibrium(&limits).unwrap(), example1_state());
    }

    #[test]
    fn example1_with_second_author_is_inconsistent() {
        let report = example1(true).check_consistency(&Limits::default()).unwrap();
        assert!(!report.consistent);
        assert!(report.equilibria.is_empty());
        assert_eq!(report.failures_total, report.candidates_checked);
        assert!(report.failures.iter().all(|f| !f.failed_contexts.is_empty()));
    }

    #[test]
    fn empty_system_is_consistent() {
        let m = Mcs::new(vec![], vec![]).unwrap();
        assert_eq!(m.enumerate_equilibria(&Limits::default()).unwrap(), vec![BeliefState::default()]);
    }

    #[test]
    fn no_bridges_gives_local_semantics() {
        let p = Program::answer_set(vec![rule("x", &[], &[])]).unwrap();
        let m = Mcs::new(vec![("c".into(), p)], vec![]).unwrap();
        let s = BeliefState::new(vec![atoms(["x"])]);
        assert_eq!(m.enumerate_equilibria(&Limits::default()).unwrap(), vec![s.clone()]);
        assert_eq!(m.applicable_bridge_heads(&s).unwrap(), vec![AtomSet::new()]);
    }

    #[test]
    fn mutual_positive_loop_grounds_to_empty() {
        let p = |x: &str| Program::new(Semantics::AnswerSet, atoms([x]), vec![], vec![], vec![]).unwrap();
        let m = Mcs::new(
            vec![("c1".into(), p("a")), ("c2".into(), p("b"))],
            vec![bridge(1, "b", &[(0, "a")], &[]), bridge(0, "a", &[(1, "b")], &[])],
        )
        .unwrap();
        let limits = Limits::default();
        assert_eq!(m.grounded_equilibrium(&limits).unwrap(), BeliefState::empty(2));
        // the self-supporting state is an equilibrium too, but not grounded
        assert_eq!(
            m.enumerate_equilibria(&limits).unwrap(),
            vec![BeliefState::empty(2), BeliefState::new(vec![atoms(["a"]), atoms(["b"])])]
        );
    }

    #[test]
    fn bridge_heads_must_be_in_target_alphabet() {
        let p = Program::answer_set(vec![rule("x", &[], &[])]).unwrap();
        let err = Mcs::new(vec![("c".into(), p)], vec![bridge(0, "y", &[], &[])]).unwrap_err();
        assert!(matches!(err, McsError::HeadOutsideAlphabet { .. }));
    }

    #[test]
    fn negative_bridges_reject_grounding() {
        let p = Program::new(Semantics::AnswerSet, atoms(["x"]), vec![], vec![], vec![]).unwrap();
        let m = Mcs::new(vec![("c".into(), p)], vec![bridge(0, "x", &[], &[(0, "x")])]).unwrap();
        assert!(matches!(m.grounded_equilibrium(&Limits::default()), Err(McsError::NotDefinite(_))));
        assert!(m.enumerate_equilibria(&Limits::default()).unwrap().is_empty());
    }
}
