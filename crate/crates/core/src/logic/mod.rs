//! Atoms, rules and single-context programs with their semantics.

pub(crate) mod mask;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::decimal::Degree;
use mask::CompiledProgram;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("invalid atom name `{0}`")]
    InvalidAtom(String),
    #[error("rule for `{head}` has a negative body but the program must be definite")]
    RuleNotDefinite { head: Atom },
    #[error("constraint with a negative body is not allowed in a minimal-model program")]
    ConstraintNotPositive,
    #[error("alphabet of {size} atoms exceeds the enumeration bound of {limit}")]
    AlphabetTooLarge { size: usize, limit: usize },
    #[error("search space of {size} candidates exceeds the bound of {limit}")]
    SearchSpaceExceeded { size: usize, limit: usize },
    #[error("atom `{0}` is not in the program alphabet")]
    AtomOutsideAlphabet(Atom),
    #[error("choice clause has no alternatives")]
    EmptyChoice,
    #[error("atom `{0}` repeated within a choice clause")]
    DuplicateAlternative(Atom),
    #[error("answer-set programs cannot carry choice clauses")]
    ChoiceNotAllowed,
}

/// A propositional atom. Names follow `[A-Za-z_][A-Za-z0-9_]*`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

pub type AtomSet = BTreeSet<Atom>;

pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl Atom {
    pub fn new(name: &str) -> Result<Self, LogicError> {
        if is_identifier(name) {
            Ok(Atom(Arc::from(name)))
        } else {
            Err(LogicError::InvalidAtom(name.to_string()))
        }
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for Atom {
    type Err = LogicError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Atom::new(s)
    }
}

impl Serialize for Atom {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for Atom {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let name = String::deserialize(d)?;
        Atom::new(&name).map_err(serde::de::Error::custom)
    }
}

/// Builds an atom set from names; panics on an invalid name.
pub fn atoms<'a>(names: impl IntoIterator<Item = &'a str>) -> AtomSet {
    names
        .into_iter()
        .map(|n| Atom::new(n).expect("valid atom name"))
        .collect()
}

/// `head ← pos, not neg`. A fact has empty bodies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rule {
    pub head: Atom,
    pub pos: AtomSet,
    pub neg: AtomSet,
}

impl Rule {
    pub fn new(head: Atom, pos: AtomSet, neg: AtomSet) -> Self {
        Rule { head, pos, neg }
    }

    pub fn fact(head: Atom) -> Self {
        Rule::new(head, AtomSet::new(), AtomSet::new())
    }

    pub fn is_fact(&self) -> bool {
        self.pos.is_empty() && self.neg.is_empty()
    }

    pub fn is_definite(&self) -> bool {
        self.neg.is_empty()
    }

    pub fn positive_projection(&self) -> Rule {
        Rule::new(self.head.clone(), self.pos.clone(), AtomSet::new())
    }

    pub fn is_applicable(&self, interpretation: &AtomSet) -> bool {
        self.pos.is_subset(interpretation) && self.neg.is_disjoint(interpretation)
    }

    pub fn atoms(&self) -> impl Iterator<Item = &Atom> {
        std::iter::once(&self.head).chain(&self.pos).chain(&self.neg)
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.head)?;
        if !self.is_fact() {
            f.write_str(" :- ")?;
            write_body(f, &self.pos, &self.neg)?;
        }
        Ok(())
    }
}

fn write_body(f: &mut fmt::Formatter<'_>, pos: &AtomSet, neg: &AtomSet) -> fmt::Result {
    let lits = pos
        .iter()
        .map(|a| a.to_string())
        .chain(neg.iter().map(|a| format!("not {a}")));
    f.write_str(&lits.collect::<Vec<_>>().join(", "))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PossRule {
    pub rule: Rule,
    pub necessity: Degree,
}

impl PossRule {
    pub fn new(rule: Rule, necessity: Degree) -> Self {
        PossRule { rule, necessity }
    }
}

/// An inclusive disjunction of atoms read under minimal-model semantics.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChoiceClause {
    alternatives: Vec<Atom>,
}

fn check_alternatives<'a>(alts: impl IntoIterator<Item = &'a Atom>) -> Result<(), LogicError> {
    let mut seen = AtomSet::new();
    for a in alts {
        if !seen.insert(a.clone()) {
            return Err(LogicError::DuplicateAlternative(a.clone()));
        }
    }
    if seen.is_empty() {
        return Err(LogicError::EmptyChoice);
    }
    Ok(())
}

impl ChoiceClause {
    pub fn new(alternatives: Vec<Atom>) -> Result<Self, LogicError> {
        check_alternatives(&alternatives)?;
        Ok(ChoiceClause { alternatives })
    }

    pub fn alternatives(&self) -> &[Atom] {
        &self.alternatives
    }
}

/// A choice clause whose alternatives each carry a necessity degree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PossChoice {
    alternatives: Vec<(Atom, Degree)>,
}

impl PossChoice {
    pub fn new(alternatives: Vec<(Atom, Degree)>) -> Result<Self, LogicError> {
        check_alternatives(alternatives.iter().map(|(a, _)| a))?;
        Ok(PossChoice { alternatives })
    }

    pub fn alternatives(&self) -> &[(Atom, Degree)] {
        &self.alternatives
    }

    pub fn classical(&self) -> ChoiceClause {
        ChoiceClause {
            alternatives: self.alternatives.iter().map(|(a, _)| a.clone()).collect(),
        }
    }
}

/// An integrity constraint `:- pos, not neg`, violated when its body holds.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub pos: AtomSet,
    pub neg: AtomSet,
}

impl Constraint {
    pub fn new(pos: AtomSet, neg: AtomSet) -> Self {
        Constraint { pos, neg }
    }

    pub fn violated_by(&self, interpretation: &AtomSet) -> bool {
        self.pos.is_subset(interpretation) && self.neg.is_disjoint(interpretation)
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(":- ")?;
        write_body(f, &self.pos, &self.neg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Semantics {
    AnswerSet,
    ChoiceMinimalModel,
}

/// Enumeration bounds shared by every exponential search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    /// Largest alphabet of a single context.
    pub max_atoms: usize,
    /// Largest candidate space for one enumeration.
    pub max_candidates: usize,
    /// Largest number of (context, atom) pairs enumerated jointly.
    pub max_joint_atoms: usize,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_atoms: 24,
            max_candidates: 1 << 22,
            max_joint_atoms: 24,
        }
    }
}

impl Limits {
    pub fn with_max_atoms(self, max_atoms: usize) -> Self {
        Limits { max_atoms, ..self }
    }
}

/// A normal logic program, optionally with choice clauses and constraints,
/// tagged with the semantics that decides its acceptable belief sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    semantics: Semantics,
    alphabet: AtomSet,
    rules: Vec<Rule>,
    choices: Vec<ChoiceClause>,
    constraints: Vec<Constraint>,
}

fn validate(
    semantics: Semantics,
    alphabet: &AtomSet,
    rules: &[Rule],
    choices: &[ChoiceClause],
    constraints: &[Constraint],
) -> Result<(), LogicError> {
    let inside = |a: &Atom| {
        if alphabet.contains(a) {
            Ok(())
        } else {
            Err(LogicError::AtomOutsideAlphabet(a.clone()))
        }
    };
    for r in rules {
        r.atoms().try_for_each(inside)?;
    }
    for c in choices {
        c.alternatives().iter().try_for_each(inside)?;
    }
    for c in constraints {
        c.pos.iter().chain(&c.neg).try_for_each(inside)?;
    }
    match semantics {
        Semantics::AnswerSet if !choices.is_empty() => Err(LogicError::ChoiceNotAllowed),
        Semantics::ChoiceMinimalModel => {
            if let Some(r) = rules.iter().find(|r| !r.is_definite()) {
                return Err(LogicError::RuleNotDefinite { head: r.head.clone() });
            }
            if constraints.iter().any(|c| !c.neg.is_empty()) {
                return Err(LogicError::ConstraintNotPositive);
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

fn infer_alphabet(rules: &[Rule], choices: &[ChoiceClause], constraints: &[Constraint]) -> AtomSet {
    let mut alphabet: AtomSet = rules.iter().flat_map(|r| r.atoms().cloned()).collect();
    alphabet.extend(choices.iter().flat_map(|c| c.alternatives().iter().cloned()));
    alphabet.extend(constraints.iter().flat_map(|c| c.pos.iter().chain(&c.neg).cloned()));
    alphabet
}

impl Program {
    pub fn new(
        semantics: Semantics,
        alphabet: AtomSet,
        rules: Vec<Rule>,
        choices: Vec<ChoiceClause>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, LogicError> {
        validate(semantics, &alphabet, &rules, &choices, &constraints)?;
        Ok(Program { semantics, alphabet, rules, choices, constraints })
    }

    /// Like [`Program::new`] with the alphabet taken from the atoms in use.
    pub fn inferred(
        semantics: Semantics,
        rules: Vec<Rule>,
        choices: Vec<ChoiceClause>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, LogicError> {
        let alphabet = infer_alphabet(&rules, &choices, &constraints);
        Program::new(semantics, alphabet, rules, choices, constraints)
    }

    /// An answer-set program over exactly the atoms its rules mention.
    pub fn answer_set(rules: Vec<Rule>) -> Result<Self, LogicError> {
        Program::inferred(Semantics::AnswerSet, rules, Vec::new(), Vec::new())
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn alphabet(&self) -> &AtomSet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn choices(&self) -> &[ChoiceClause] {
        &self.choices
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn is_definite(&self) -> bool {
        self.rules.iter().all(Rule::is_definite)
    }

    pub fn extend_alphabet(mut self, extra: impl IntoIterator<Item = Atom>) -> Self {
        self.alphabet.extend(extra);
        self
    }

    /// Least model of the rules together with `extra` facts.
    pub fn least_model(&self, extra: &AtomSet) -> Result<AtomSet, LogicError> {
        if !self.choices.is_empty() {
            return Err(LogicError::ChoiceNotAllowed);
        }
        least_model(&self.rules, extra)
    }

    /// Drops rules blocked by `interpretation` and strips the remaining
    /// negative literals; constraints are reduced the same way.
    pub fn reduct(&self, interpretation: &AtomSet) -> Program {
        Program {
            semantics: self.semantics,
            alphabet: self.alphabet.clone(),
            rules: reduct(&self.rules, interpretation),
            choices: self.choices.clone(),
            constraints: self
                .constraints
                .iter()
                .filter(|c| c.neg.is_disjoint(interpretation))
                .map(|c| Constraint::new(c.pos.clone(), AtomSet::new()))
                .collect(),
        }
    }

    pub fn answer_sets(&self, limits: &Limits) -> Result<Vec<AtomSet>, LogicError> {
        if self.semantics != Semantics::AnswerSet {
            return Err(LogicError::ChoiceNotAllowed);
        }
        self.acceptable(&AtomSet::new(), limits)
    }

    pub fn minimal_models(&self, limits: &Limits) -> Result<Vec<AtomSet>, LogicError> {
        if let Some(r) = self.rules.iter().find(|r| !r.is_definite()) {
            return Err(LogicError::RuleNotDefinite { head: r.head.clone() });
        }
        let as_choice = Program { semantics: Semantics::ChoiceMinimalModel, ..self.clone() };
        as_choice.acceptable(&AtomSet::new(), limits)
    }

    /// Acceptable belief sets of the program extended with `extra` facts,
    /// sorted lexicographically.
    pub fn acceptable(&self, extra: &AtomSet, limits: &Limits) -> Result<Vec<AtomSet>, LogicError> {
        let compiled = CompiledProgram::new(self, limits)?;
        let extra_mask = match compiled.index.mask(extra) {
            Some(m) => m,
            None => {
                let outside = extra.iter().find(|a| !self.alphabet.contains(*a)).unwrap();
                return Err(LogicError::AtomOutsideAlphabet(outside.clone()));
            }
        };
        let mut sets: Vec<AtomSet> = compiled
            .acceptable(extra_mask, limits)?
            .into_iter()
            .map(|m| compiled.index.set(m))
            .collect();
        sets.sort();
        Ok(sets)
    }
}

/// Least model of the positive parts of `rules` containing `facts`.
pub fn least_model(rules: &[Rule], facts: &AtomSet) -> Result<AtomSet, LogicError> {
    if let Some(r) = rules.iter().find(|r| !r.is_definite()) {
        return Err(LogicError::RuleNotDefinite { head: r.head.clone() });
    }
    Ok(positive_closure(rules, facts))
}

pub(crate) fn positive_closure<'a, I>(rules: I, facts: &AtomSet) -> AtomSet
where
    I: IntoIterator<Item = &'a Rule>,
    I::IntoIter: Clone,
{
    let rules = rules.into_iter();
    let mut model = facts.clone();
    loop {
        let before = model.len();
        for r in rules.clone() {
            if !model.contains(&r.head) && r.pos.is_subset(&model) {
                model.insert(r.head.clone());
            }
        }
        if model.len() == before {
            return model;
        }
    }
}

/// Reduct of a rule list: rules whose negative body meets `interpretation`
/// are removed, the others keep only their positive part.
pub fn reduct(rules: &[Rule], interpretation: &AtomSet) -> Vec<Rule> {
    rules
        .iter()
        .filter(|r| r.neg.is_disjoint(interpretation))
        .map(Rule::positive_projection)
        .collect()
}

pub fn applicable_rules(rules: &[Rule], interpretation: &AtomSet) -> Vec<Rule> {
    rules
        .iter()
        .filter(|r| r.is_applicable(interpretation))
        .cloned()
        .collect()
}

/// Whether the rules can be ordered so that each is applicable in the heads
/// of its predecessors; only positive bodies are considered.
pub fn is_grounded(rules: &[Rule]) -> bool {
    let derived = positive_closure(rules, &AtomSet::new());
    rules.iter().all(|r| r.pos.is_subset(&derived))
}

/// A program whose rules and choice alternatives carry necessity degrees.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PossProgram {
    semantics: Semantics,
    alphabet: AtomSet,
    rules: Vec<PossRule>,
    choices: Vec<PossChoice>,
    constraints: Vec<Constraint>,
}

impl PossProgram {
    pub fn new(
        semantics: Semantics,
        alphabet: AtomSet,
        rules: Vec<PossRule>,
        choices: Vec<PossChoice>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, LogicError> {
        let plain: Vec<Rule> = rules.iter().map(|r| r.rule.clone()).collect();
        let plain_choices: Vec<ChoiceClause> = choices.iter().map(PossChoice::classical).collect();
        validate(semantics, &alphabet, &plain, &plain_choices, &constraints)?;
        Ok(PossProgram { semantics, alphabet, rules, choices, constraints })
    }

    pub fn inferred(
        semantics: Semantics,
        rules: Vec<PossRule>,
        choices: Vec<PossChoice>,
        constraints: Vec<Constraint>,
    ) -> Result<Self, LogicError> {
        let plain: Vec<Rule> = rules.iter().map(|r| r.rule.clone()).collect();
        let plain_choices: Vec<ChoiceClause> = choices.iter().map(PossChoice::classical).collect();
        let alphabet = infer_alphabet(&plain, &plain_choices, &constraints);
        PossProgram::new(semantics, alphabet, rules, choices, constraints)
    }

    /// Every rule of a classical program at degree 1.
    pub fn certain(program: &Program) -> Self {
        PossProgram {
            semantics: program.semantics,
            alphabet: program.alphabet.clone(),
            rules: program
                .rules
                .iter()
                .map(|r| PossRule::new(r.clone(), Degree::ONE))
                .collect(),
            choices: program
                .choices
                .iter()
                .map(|c| PossChoice {
                    alternatives: c.alternatives.iter().map(|a| (a.clone(), Degree::ONE)).collect(),
                })
                .collect(),
            constraints: program.constraints.clone(),
        }
    }

    pub fn semantics(&self) -> Semantics {
        self.semantics
    }

    pub fn alphabet(&self) -> &AtomSet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[PossRule] {
        &self.rules
    }

    pub fn choices(&self) -> &[PossChoice] {
        &self.choices
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn extend_alphabet(mut self, extra: impl IntoIterator<Item = Atom>) -> Self {
        self.alphabet.extend(extra);
        self
    }

    /// Drops the degrees.
    pub fn classical(&self) -> Program {
        Program {
            semantics: self.semantics,
            alphabet: self.alphabet.clone(),
            rules: self.rules.iter().map(|r| r.rule.clone()).collect(),
            choices: self.choices.iter().map(PossChoice::classical).collect(),
            constraints: self.constraints.clone(),
        }
    }

    /// Reduct with degrees preserved. Choice alternatives true in
    /// `interpretation` become facts at their own degree, so the result is
    /// definite and choice-free.
    pub fn reduct(&self, interpretation: &AtomSet) -> PossProgram {
        let mut rules: Vec<PossRule> = self
            .rules
            .iter()
            .filter(|r| r.rule.neg.is_disjoint(interpretation))
            .map(|r| PossRule::new(r.rule.positive_projection(), r.necessity))
            .collect();
        for c in &self.choices {
            for (a, d) in &c.alternatives {
                if interpretation.contains(a) {
                    rules.push(PossRule::new(Rule::fact(a.clone()), *d));
                }
            }
        }
        PossProgram {
            semantics: self.semantics,
            alphabet: self.alphabet.clone(),
            rules,
            choices: Vec::new(),
            constraints: self
                .constraints
                .iter()
                .filter(|c| c.neg.is_disjoint(interpretation))
                .map(|c| Constraint::new(c.pos.clone(), AtomSet::new()))
                .collect(),
        }
    }

    pub fn is_definite(&self) -> bool {
        self.choices.is_empty() && self.rules.iter().all(|r| r.rule.is_definite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(n: &str) -> Atom {
        Atom::new(n).unwrap()
    }

    fn rule(head: &str, pos: &[&str], neg: &[&str]) -> Rule {
        Rule::new(a(head), atoms(pos.iter().copied()), atoms(neg.iter().copied()))
    }

    #[test]
    fn atom_names_are_validated() {
        assert!(Atom::new("a_1c").is_ok());
        assert!(Atom::new("_x9").is_ok());
        for bad in ["", "1a", "a-b", "a b", "é"] {
            assert!(Atom::new(bad).is_err(), "{bad}");
        }
        assert_ne!(a("A"), a("a"));
    }

    #[test]
    fn least_model_examples() {
        assert!(least_model(&[], &AtomSet::new()).unwrap().is_empty());
        let m = least_model(&[rule("middleware", &["corba"], &[])], &atoms(["corba"])).unwrap();
        assert_eq!(m, atoms(["corba", "middleware"]));
        let chain = [rule("b", &["a"], &[]), rule("c", &["b"], &[]), rule("a", &[], &[])];
        assert_eq!(least_model(&chain, &AtomSet::new()).unwrap(), atoms(["a", "b", "c"]));
        assert!(matches!(
            least_model(&[rule("b", &[], &["c"])], &AtomSet::new()),
            Err(LogicError::RuleNotDefinite { .. })
        ));
    }

    #[test]
    fn reduct_examples() {
        let r = [rule("b", &["a"], &["c"])];
        assert_eq!(reduct(&r, &atoms(["a"])), vec![rule("b", &["a"], &[])]);
        assert!(reduct(&r, &atoms(["a", "c"])).is_empty());

        let p1 = [
            rule("sensors", &[], &[]),
            rule("corba", &[], &[]),
            rule("distributedComputing", &["corba"], &["centralizedComputing"]),
        ];
        assert_eq!(
            reduct(&p1, &atoms(["sensors", "corba"])),
            vec![
                rule("sensors", &[], &[]),
                rule("corba", &[], &[]),
                rule("distributedComputing", &["corba"], &[]),
            ]
        );
    }

    #[test]
    fn answer_set_examples() {
        let limits = Limits::default();
        let p = Program::answer_set(vec![rule("a", &[], &[])]).unwrap();
        assert_eq!(p.answer_sets(&limits).unwrap(), vec![atoms(["a"])]);
        let p = Program::answer_set(vec![rule("a", &[], &["b"]), rule("b", &[], &["a"])]).unwrap();
        assert_eq!(p.answer_sets(&limits).unwrap(), vec![atoms(["a"]), atoms(["b"])]);
        let p = Program::answer_set(vec![rule("a", &[], &["a"])]).unwrap();
        assert!(p.answer_sets(&limits).unwrap().is_empty());
    }

    #[test]
    fn answer_sets_respect_constraints() {
        let p = Program::inferred(
            Semantics::AnswerSet,
            vec![rule("a", &[], &["b"]), rule("b", &[], &["a"])],
            vec![],
            vec![Constraint::new(atoms(["a"]), AtomSet::new())],
        )
        .unwrap();
        assert_eq!(p.answer_sets(&Limits::default()).unwrap(), vec![atoms(["b"])]);
    }

    #[test]
    fn minimal_model_examples() {
        let limits = Limits::default();
        let choice = |alts: &[&str]| ChoiceClause::new(alts.iter().map(|n| a(n)).collect()).unwrap();
        let kb4 = Program::inferred(
            Semantics::ChoiceMinimalModel,
            vec![Rule::fact(a("a_3s"))],
            vec![choice(&["a_1c", "a_4c"])],
            vec![],
        )
        .unwrap();
        assert_eq!(
            kb4.minimal_models(&limits).unwrap(),
            vec![atoms(["a_1c", "a_3s"]), atoms(["a_3s", "a_4c"])]
        );
        let facts = Program::inferred(Semantics::ChoiceMinimalModel, vec![Rule::fact(a("x"))], vec![], vec![]).unwrap();
        assert_eq!(facts.minimal_models(&limits).unwrap(), vec![atoms(["x"])]);
        let hitting = Program::inferred(
            Semantics::ChoiceMinimalModel,
            vec![],
            vec![choice(&["a", "b"]), choice(&["b", "c"])],
            vec![],
        )
        .unwrap();
        assert_eq!(hitting.minimal_models(&limits).unwrap(), vec![atoms(["a", "c"]), atoms(["b"])]);
    }

    #[test]
    fn minimal_models_with_extra_facts() {
        let p = Program::inferred(
            Semantics::ChoiceMinimalModel,
            vec![rule("g", &["x", "y"], &[])],
            vec![ChoiceClause::new(vec![a("x"), a("z")]).unwrap()],
            vec![],
        )
        .unwrap()
        .extend_alphabet([a("y")]);
        let got = p.acceptable(&atoms(["y", "x"]), &Limits::default()).unwrap();
        assert_eq!(got, vec![atoms(["g", "x", "y"])]);
    }

    #[test]
    fn choice_validation() {
        assert_eq!(ChoiceClause::new(vec![]), Err(LogicError::EmptyChoice));
        assert!(matches!(
            ChoiceClause::new(vec![a("x"), a("x")]),
            Err(LogicError::DuplicateAlternative(_))
        ));
        assert!(matches!(
            Program::inferred(
                Semantics::AnswerSet,
                vec![],
                vec![ChoiceClause::new(vec![a("x")]).unwrap()],
                vec![]
            ),
            Err(LogicError::ChoiceNotAllowed)
        ));
    }

    #[test]
    fn applicability_and_grounding() {
        let r = [rule("b", &["a"], &["c"])];
        assert_eq!(applicable_rules(&r, &atoms(["a"])).len(), 1);
        assert!(applicable_rules(&r, &atoms(["a", "c"])).is_empty());
        let p1 = [
            rule("sensors", &[], &[]),
            rule("corba", &[], &[]),
            rule("distributedComputing", &["corba"], &["centralizedComputing"]),
        ];
        let app = applicable_rules(&p1, &atoms(["sensors", "corba", "centralizedComputing"]));
        assert_eq!(app, p1[..2].to_vec());

        assert!(is_grounded(&[rule("a", &[], &[])]));
        assert!(!is_grounded(&[rule("a", &["b"], &[]), rule("b", &["a"], &[])]));
        assert!(is_grounded(&[rule("a", &[], &[]), rule("b", &["a"], &[])]));
    }

    #[test]
    fn alphabet_bound_is_enforced() {
        let rules: Vec<Rule> = (0..30).map(|i| Rule::fact(a(&format!("x{i}")))).collect();
        let p = Program::answer_set(rules).unwrap();
        assert!(matches!(
            p.answer_sets(&Limits::default()),
            Err(LogicError::AlphabetTooLarge { size: 30, limit: 24 })
        ));
        assert_eq!(p.answer_sets(&Limits::default().with_max_atoms(40)).unwrap().len(), 1);
    }

    #[test]
    fn poss_reduct_keeps_degrees() {
        let d = |s: &str| s.parse::<Degree>().unwrap();
        let p = PossProgram::inferred(
            Semantics::ChoiceMinimalModel,
            vec![PossRule::new(rule("g", &["x"], &[]), d("0.5"))],
            vec![PossChoice::new(vec![(a("x"), d("0.9")), (a("y"), d("0.8"))]).unwrap()],
            vec![],
        )
        .unwrap();
        let r = p.reduct(&atoms(["x", "g"]));
        assert!(r.is_definite());
        assert_eq!(r.rules().len(), 2);
        assert_eq!(r.rules()[1], PossRule::new(Rule::fact(a("x")), d("0.9")));
        assert_eq!(r.classical().rules()[0], rule("g", &["x"], &[]));
    }
}
