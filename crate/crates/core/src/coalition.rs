//! Coalition problems: agents with actions and capabilities, plans for
//! goals, mutual-exclusion groups and an uncertainty model. Problems compile
//! into (possibilistic) multi-context systems whose equilibria are read back
//! as coalitions.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decimal::{Decimal, Degree};
use crate::evaluator::{DistanceTable, EvalError};
use crate::logic::{
    Atom, AtomSet, ChoiceClause, Constraint, LogicError, PossChoice, PossProgram, PossRule, Program, Rule,
    Semantics,
};
use crate::mcs::{BeliefState, BridgeRule, Mcs, McsError, QualifiedAtom};
use crate::poss::{PossBeliefState, PossBridgeRule, PossError, PossMcs};

/// Prefix of the auxiliary atoms that record another agent carrying a
/// material.
pub const CARRIES_ELSE: &str = "carriesElse_";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("{path}: unknown agent `{agent}`")]
    UnknownAgent { agent: String, path: String },
    #[error("{path}: agent `{agent}` cannot perform `{action}`")]
    UnknownAction { agent: String, action: Atom, path: String },
    #[error("{path}: undeclared goal `{goal}`")]
    UnknownGoal { goal: Atom, path: String },
    #[error("{path}: duplicate id `{id}`")]
    Duplicate { id: String, path: String },
    #[error("{path}: `{id}` is not a valid identifier")]
    InvalidId { id: String, path: String },
    #[error("{path}: plan `{plan}` has {count} achiever steps, expected one")]
    AchieverCount { plan: String, count: usize, path: String },
    #[error("{path}: plan `{plan}` has no steps")]
    EmptyPlan { plan: String, path: String },
    #[error("weights: {0}")]
    InvalidWeights(String),
    #[error("carry action `{action}` of agent `{agent}` belongs to no exclusion group, so its material is unknown")]
    MissingMaterial { agent: String, action: Atom },
    #[error("no possibility given for `{action}` of agent `{agent}`")]
    MissingPossibility { agent: String, action: Atom },
    #[error("the problem has no uncertainty model")]
    MissingUncertainty,
    #[error("the problem has no distance table")]
    MissingDistances,
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error(transparent)]
    Mcs(#[from] McsError),
    #[error(transparent)]
    Poss(#[from] PossError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentSpec {
    pub id: String,
    /// Actions the agent performs unconditionally.
    #[serde(default)]
    pub actions: Vec<Atom>,
    /// Capabilities of which at least one is exercised.
    #[serde(default)]
    pub choices: Vec<Vec<Atom>>,
}

impl AgentSpec {
    pub fn can_perform(&self, action: &Atom) -> bool {
        self.actions.contains(action) || self.choices.iter().any(|c| c.contains(action))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanStep {
    pub agent: String,
    pub action: Atom,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub achiever: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Plan {
    pub id: String,
    pub goal: Atom,
    pub steps: Vec<PlanStep>,
    /// Replaces the product of step possibilities when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Degree>,
}

impl Plan {
    /// The flagged achiever step, or the last step when none is flagged.
    pub fn achiever(&self) -> &PlanStep {
        self.steps
            .iter()
            .find(|s| s.achiever)
            .or_else(|| self.steps.last())
            .expect("validated plans are nonempty")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExclusionGroup {
    pub material: String,
    /// agent id → the action by which that agent carries the material
    pub carry_actions: BTreeMap<String, Atom>,
}

impl ExclusionGroup {
    pub fn flag(&self) -> Atom {
        Atom::new(&format!("{CARRIES_ELSE}{}", self.material)).expect("validated material id")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum UncertaintyModel {
    Explicit {
        /// agent id → action → possibility
        possibilities: BTreeMap<String, BTreeMap<Atom, Degree>>,
    },
    LinearDistance {
        #[serde(default = "default_pickup")]
        pickup_coeff: Decimal,
        #[serde(default = "default_delivery")]
        delivery_coeff: Decimal,
    },
}

fn default_pickup() -> Decimal {
    Decimal::from_scaled(1_000)
}

fn default_delivery() -> Decimal {
    Decimal::from_scaled(2_000)
}

impl UncertaintyModel {
    pub fn linear() -> Self {
        UncertaintyModel::LinearDistance { pickup_coeff: default_pickup(), delivery_coeff: default_delivery() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DependenceRelation {
    pub depender: String,
    pub dependee: String,
    pub goal: Atom,
    pub plan: String,
    pub action: Atom,
    pub possibility: Degree,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoalitionProblem {
    pub agents: Vec<AgentSpec>,
    pub goals: Vec<Atom>,
    pub plans: Vec<Plan>,
    #[serde(default)]
    pub exclusions: Vec<ExclusionGroup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distances: Option<DistanceTable<Decimal>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<UncertaintyModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<BTreeMap<Atom, Decimal>>,
}

/// One goal of a coalition and who achieves it through which plan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Assignment {
    pub goal: Atom,
    pub agent: String,
    pub plan: String,
    pub action: Atom,
    pub material: Option<String>,
    pub necessity: Degree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coalition {
    pub id: String,
    /// Sorted by goal.
    pub assignments: Vec<Assignment>,
    pub state: BeliefState,
    pub poss_state: Option<PossBeliefState>,
}

impl Coalition {
    pub fn assignment(&self, goal: &Atom) -> Option<&Assignment> {
        self.assignments.iter().find(|a| &a.goal == goal)
    }

    /// `(agent, goal)` pairs sorted by agent.
    pub fn pairs(&self) -> Vec<(String, Atom)> {
        let mut pairs: Vec<(String, Atom)> =
            self.assignments.iter().map(|a| (a.agent.clone(), a.goal.clone())).collect();
        pairs.sort();
        pairs
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Extraction {
    pub coalitions: Vec<Coalition>,
    pub unachievable: Vec<Atom>,
    pub warnings: Vec<String>,
}

fn duplicates<'a>(ids: impl IntoIterator<Item = &'a str>, path: &str) -> Result<(), CompileError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(CompileError::Duplicate { id: id.to_string(), path: path.to_string() });
        }
    }
    Ok(())
}

impl CoalitionProblem {
    /// Cross-reference checks on an already well-typed problem.
    pub fn validate(&self) -> Result<(), CompileError> {
        duplicates(self.agents.iter().map(|a| a.id.as_str()), "agents")?;
        duplicates(self.plans.iter().map(|p| p.id.as_str()), "plans")?;
        duplicates(self.goals.iter().map(Atom::name), "goals")?;
        duplicates(self.exclusions.iter().map(|e| e.material.as_str()), "exclusions")?;
        for (i, a) in self.agents.iter().enumerate() {
            let certain: BTreeSet<&Atom> = a.actions.iter().collect();
            duplicates(a.actions.iter().map(Atom::name), &format!("agents[{i}].actions"))?;
            for (j, c) in a.choices.iter().enumerate() {
                ChoiceClause::new(c.clone())?;
                if let Some(x) = c.iter().find(|x| certain.contains(x)) {
                    return Err(CompileError::Duplicate {
                        id: x.to_string(),
                        path: format!("agents[{i}].choices[{j}]"),
                    });
                }
            }
        }
        for (i, p) in self.plans.iter().enumerate() {
            let path = format!("plans[{i}]");
            if !self.goals.contains(&p.goal) {
                return Err(CompileError::UnknownGoal { goal: p.goal.clone(), path: format!("{path}.goal") });
            }
            if p.steps.is_empty() {
                return Err(CompileError::EmptyPlan { plan: p.id.clone(), path });
            }
            let flagged = p.steps.iter().filter(|s| s.achiever).count();
            if flagged > 1 {
                return Err(CompileError::AchieverCount { plan: p.id.clone(), count: flagged, path });
            }
            for (j, s) in p.steps.iter().enumerate() {
                self.check_step(&s.agent, &s.action, &format!("{path}.steps[{j}]"))?;
            }
        }
        for (i, e) in self.exclusions.iter().enumerate() {
            Atom::new(&format!("{CARRIES_ELSE}{}", e.material)).map_err(|_| CompileError::InvalidId {
                id: e.material.clone(),
                path: format!("exclusions[{i}].material"),
            })?;
            for (agent, action) in &e.carry_actions {
                self.check_step(agent, action, &format!("exclusions[{i}].carry_actions.{agent}"))?;
            }
        }
        if let Some(w) = &self.weights {
            for g in w.keys() {
                if !self.goals.contains(g) {
                    return Err(CompileError::UnknownGoal { goal: g.clone(), path: "weights".into() });
                }
            }
            if w.values().any(|v| *v < Decimal::ZERO) {
                return Err(CompileError::InvalidWeights("negative weight".into()));
            }
            let sum: Decimal = w.values().copied().sum();
            if (sum - Decimal::ONE).abs() > Decimal::from_scaled(1) {
                return Err(CompileError::InvalidWeights(format!("weights sum to {sum}, not 1")));
            }
        }
        if let Some(UncertaintyModel::Explicit { possibilities }) = &self.uncertainty {
            for (agent, actions) in possibilities {
                for action in actions.keys() {
                    self.check_step(agent, action, &format!("uncertainty.possibilities.{agent}"))?;
                }
            }
        }
        Ok(())
    }

    fn check_step(&self, agent: &str, action: &Atom, path: &str) -> Result<(), CompileError> {
        let spec = self.agent(agent).ok_or_else(|| CompileError::UnknownAgent {
            agent: agent.to_string(),
            path: path.to_string(),
        })?;
        if !spec.can_perform(action) {
            return Err(CompileError::UnknownAction {
                agent: agent.to_string(),
                action: action.clone(),
                path: path.to_string(),
            });
        }
        Ok(())
    }

    pub fn agent(&self, id: &str) -> Option<&AgentSpec> {
        self.agents.iter().find(|a| a.id == id)
    }

    fn agent_index(&self, id: &str) -> usize {
        self.agents.iter().position(|a| a.id == id).expect("validated agent id")
    }

    /// The exclusion group in which `agent` carries something with `action`.
    pub fn exclusion_of(&self, agent: &str, action: &Atom) -> Option<&ExclusionGroup> {
        self.exclusions
            .iter()
            .find(|e| e.carry_actions.get(agent) == Some(action))
    }

    /// Carry actions are the uncertain ones: choice alternatives and
    /// members of exclusion groups.
    pub fn is_carry_action(&self, agent: &str, action: &Atom) -> bool {
        self.exclusion_of(agent, action).is_some()
            || self
                .agent(agent)
                .is_some_and(|a| a.choices.iter().any(|c| c.contains(action)))
    }

    /// The auxiliary atoms introduced by compilation.
    pub fn auxiliary_atoms(&self) -> AtomSet {
        self.exclusions.iter().map(ExclusionGroup::flag).collect()
    }

    pub fn distances(&self) -> Result<&DistanceTable<Decimal>, CompileError> {
        self.distances.as_ref().ok_or(CompileError::MissingDistances)
    }

    /// One basic dependence per plan step, with the achiever as depender.
    pub fn derive_dependencies(&self) -> Vec<DependenceRelation> {
        self.dependencies_with(|_, _| Ok(Degree::ONE)).expect("infallible")
    }

    /// As [`Self::derive_dependencies`], each relation carrying the
    /// possibility that the dependee performs its action.
    pub fn derive_poss_dependencies(&self) -> Result<Vec<DependenceRelation>, CompileError> {
        self.dependencies_with(|agent, action| self.action_possibility(agent, action))
    }

    fn dependencies_with(
        &self,
        possibility: impl Fn(&str, &Atom) -> Result<Degree, CompileError>,
    ) -> Result<Vec<DependenceRelation>, CompileError> {
        let mut out = Vec::new();
        for p in &self.plans {
            let achiever = p.achiever();
            for s in &p.steps {
                out.push(DependenceRelation {
                    depender: achiever.agent.clone(),
                    dependee: s.agent.clone(),
                    goal: p.goal.clone(),
                    plan: p.id.clone(),
                    action: s.action.clone(),
                    possibility: possibility(&s.agent, &s.action)?,
                });
            }
        }
        Ok(out)
    }

    /// Possibility that `agent` performs `action` successfully.
    /// Information-providing actions are certain.
    pub fn action_possibility(&self, agent: &str, action: &Atom) -> Result<Degree, CompileError> {
        let model = self.uncertainty.as_ref().ok_or(CompileError::MissingUncertainty)?;
        match model {
            UncertaintyModel::Explicit { possibilities } => {
                if let Some(d) = possibilities.get(agent).and_then(|m| m.get(action)) {
                    return Ok(*d);
                }
                if self.is_carry_action(agent, action) {
                    return Err(CompileError::MissingPossibility {
                        agent: agent.to_string(),
                        action: action.clone(),
                    });
                }
                Ok(Degree::ONE)
            }
            UncertaintyModel::LinearDistance { pickup_coeff, delivery_coeff } => {
                if !self.is_carry_action(agent, action) {
                    return Ok(Degree::ONE);
                }
                let group = self.exclusion_of(agent, action).ok_or_else(|| CompileError::MissingMaterial {
                    agent: agent.to_string(),
                    action: action.clone(),
                })?;
                let table = self.distances()?;
                let pickup = table.agent_to_material(agent, &group.material)?;
                let delivery = table.to_destination(&group.material)?;
                let loss = *pickup_coeff * pickup + *delivery_coeff * delivery;
                let p = (Decimal::ONE - loss).max(Decimal::ZERO).min(Decimal::ONE);
                Ok(Degree::new(p).expect("clamped"))
            }
        }
    }

    /// The plan's override when present, else the product of its step
    /// possibilities.
    pub fn plan_possibility(&self, plan: &Plan) -> Result<Degree, CompileError> {
        if let Some(alpha) = plan.alpha {
            return Ok(alpha);
        }
        plan.steps.iter().try_fold(Degree::ONE, |acc, s| {
            Ok(acc.product(self.action_possibility(&s.agent, &s.action)?))
        })
    }

    /// Classical compilation: one choice-minimal-model context per agent,
    /// one bridge rule per plan, and the exclusion machinery.
    pub fn compile_classical(&self) -> Result<Mcs, CompileError> {
        self.validate()?;
        let skeleton = self.skeleton();
        let contexts = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let program = Program::new(
                    Semantics::ChoiceMinimalModel,
                    skeleton.alphabets[i].clone(),
                    a.actions.iter().cloned().map(Rule::fact).collect(),
                    a.choices.iter().map(|c| ChoiceClause::new(c.clone())).collect::<Result<_, _>>()?,
                    skeleton.constraints[i].clone(),
                )?;
                Ok((a.id.clone(), program))
            })
            .collect::<Result<Vec<_>, CompileError>>()?;
        let bridges = skeleton.bridges.into_iter().map(|(b, _)| b).collect();
        Ok(Mcs::new(contexts, bridges)?)
    }

    /// Possibilistic compilation: action facts and capabilities carry their
    /// action possibility, goal rules the plan possibility and exclusion
    /// rules degree 1.
    pub fn compile_possibilistic(&self) -> Result<PossMcs, CompileError> {
        self.validate()?;
        let skeleton = self.skeleton();
        let mut contexts = Vec::with_capacity(self.agents.len());
        for (i, a) in self.agents.iter().enumerate() {
            let rules = a
                .actions
                .iter()
                .map(|x| Ok(PossRule::new(Rule::fact(x.clone()), self.action_possibility(&a.id, x)?)))
                .collect::<Result<Vec<_>, CompileError>>()?;
            let choices = a
                .choices
                .iter()
                .map(|c| {
                    let alts = c
                        .iter()
                        .map(|x| Ok((x.clone(), self.action_possibility(&a.id, x)?)))
                        .collect::<Result<Vec<_>, CompileError>>()?;
                    Ok(PossChoice::new(alts)?)
                })
                .collect::<Result<Vec<_>, CompileError>>()?;
            let program = PossProgram::new(
                Semantics::ChoiceMinimalModel,
                skeleton.alphabets[i].clone(),
                rules,
                choices,
                skeleton.constraints[i].clone(),
            )?;
            contexts.push((a.id.clone(), program));
        }
        let bridges = skeleton
            .bridges
            .into_iter()
            .map(|(b, plan)| {
                let degree = match plan {
                    Some(p) => self.plan_possibility(&self.plans[p])?,
                    None => Degree::ONE,
                };
                Ok(PossBridgeRule::new(b, degree))
            })
            .collect::<Result<Vec<_>, CompileError>>()?;
        Ok(PossMcs::new(contexts, bridges)?)
    }

    fn skeleton(&self) -> Skeleton {
        let n = self.agents.len();
        let mut alphabets: Vec<AtomSet> = self
            .agents
            .iter()
            .map(|a| a.actions.iter().chain(a.choices.iter().flatten()).cloned().collect())
            .collect();
        let mut constraints = vec![Vec::new(); n];
        let mut bridges = Vec::new();
        for (k, p) in self.plans.iter().enumerate() {
            let achiever = p.achiever();
            let target = self.agent_index(&achiever.agent);
            let pos = p
                .steps
                .iter()
                .map(|s| QualifiedAtom::new(self.agent_index(&s.agent), s.action.clone()))
                .collect();
            let mut neg = BTreeSet::new();
            if let Some(group) = self.exclusion_of(&achiever.agent, &achiever.action) {
                alphabets[target].insert(group.flag());
                neg.insert(QualifiedAtom::new(target, group.flag()));
            }
            alphabets[target].insert(p.goal.clone());
            bridges.push((BridgeRule::new(target, p.goal.clone(), pos, neg), Some(k)));
        }
        for group in self.exclusions.iter().filter(|g| g.carry_actions.len() >= 2) {
            let flag = group.flag();
            for (agent, action) in &group.carry_actions {
                let l = self.agent_index(agent);
                alphabets[l].insert(flag.clone());
                constraints[l].push(Constraint::new(
                    [action.clone(), flag.clone()].into_iter().collect(),
                    AtomSet::new(),
                ));
                for (other, other_action) in group.carry_actions.iter().filter(|(o, _)| *o != agent) {
                    let body = [QualifiedAtom::new(self.agent_index(other), other_action.clone())];
                    bridges.push((
                        BridgeRule::new(l, flag.clone(), body.into_iter().collect(), BTreeSet::new()),
                        None,
                    ));
                }
            }
        }
        Skeleton { alphabets, constraints, bridges }
    }

    pub fn extract_classical(&self, equilibria: &[BeliefState]) -> Extraction {
        let pairs: Vec<(&BeliefState, Option<&PossBeliefState>)> = equilibria.iter().map(|s| (s, None)).collect();
        self.extract(&pairs)
    }

    pub fn extract_possibilistic(&self, equilibria: &[PossBeliefState]) -> Extraction {
        let states: Vec<BeliefState> = equilibria.iter().map(PossBeliefState::classical).collect();
        let pairs: Vec<(&BeliefState, Option<&PossBeliefState>)> =
            states.iter().zip(equilibria).map(|(s, p)| (s, Some(p))).collect();
        self.extract(&pairs)
    }

    fn extract(&self, equilibria: &[(&BeliefState, Option<&PossBeliefState>)]) -> Extraction {
        let mut out = Extraction::default();
        let mut achieved = BTreeSet::new();
        for (n, (state, poss)) in equilibria.iter().enumerate() {
            let id = format!("C{n}");
            let mut assignments: BTreeMap<Atom, Assignment> = BTreeMap::new();
            for (ci, agent) in self.agents.iter().enumerate() {
                for goal in self.goals.iter().filter(|g| state.contains(ci, g)) {
                    let mut fired: Vec<&Plan> = self
                        .plans
                        .iter()
                        .filter(|p| &p.goal == goal && p.achiever().agent == agent.id && self.fires(p, state))
                        .collect();
                    fired.sort_by(|a, b| a.id.cmp(&b.id));
                    let Some(plan) = fired.first() else {
                        out.warnings.push(format!("{id}: `{goal}` holds for `{}` but no plan rule fired", agent.id));
                        continue;
                    };
                    if fired.len() > 1 {
                        let ids: Vec<&str> = fired.iter().map(|p| p.id.as_str()).collect();
                        out.warnings.push(format!(
                            "{id}: ambiguous plan for `{goal}` by `{}` ({}); using `{}`",
                            agent.id,
                            ids.join(", "),
                            plan.id
                        ));
                    }
                    if let Some(prev) = assignments.get(goal) {
                        out.warnings.push(format!(
                            "{id}: `{goal}` achieved by both `{}` and `{}`; keeping `{}`",
                            prev.agent, agent.id, prev.agent
                        ));
                        continue;
                    }
                    let step = plan.achiever();
                    let necessity = poss.and_then(|p| p.necessity(ci, goal)).unwrap_or(Degree::ONE);
                    assignments.insert(
                        goal.clone(),
                        Assignment {
                            goal: goal.clone(),
                            agent: agent.id.clone(),
                            plan: plan.id.clone(),
                            action: step.action.clone(),
                            material: self.exclusion_of(&step.agent, &step.action).map(|g| g.material.clone()),
                            necessity,
                        },
                    );
                    achieved.insert(goal.clone());
                }
            }
            out.coalitions.push(Coalition {
                id,
                assignments: assignments.into_values().collect(),
                state: (*state).clone(),
                poss_state: poss.cloned(),
            });
        }
        out.unachievable = self.goals.iter().filter(|g| !achieved.contains(*g)).cloned().collect();
        out
    }

    fn fires(&self, plan: &Plan, state: &BeliefState) -> bool {
        let steps_hold = plan
            .steps
            .iter()
            .all(|s| state.contains(self.agent_index(&s.agent), &s.action));
        let achiever = plan.achiever();
        let blocked = self
            .exclusion_of(&achiever.agent, &achiever.action)
            .is_some_and(|g| state.contains(self.agent_index(&achiever.agent), &g.flag()));
        steps_hold && !blocked
    }
}

struct Skeleton {
    alphabets: Vec<AtomSet>,
    constraints: Vec<Vec<Constraint>>,
    /// Each bridge with the index of the plan it encodes, if any.
    bridges: Vec<(BridgeRule, Option<usize>)>,
}
