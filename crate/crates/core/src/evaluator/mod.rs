//! Scoring and ranking coalitions.

mod cycles;
mod mcdm;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coalition::{Coalition, CoalitionProblem};
use crate::decimal::{Decimal, Degree};
use crate::scalar::Scalar;

pub use cycles::{
    conviviality, cycle_pair_count, elementary_circuits, omega, theta, Conviviality, DependenceGraph,
    CONVIVIALITY_DIGITS, DEFAULT_CYCLE_CAP,
};
pub use mcdm::{topsis, weighted_product_ratio, weighted_sum, wp_rank, Direction, RankEntry, Ranking, ScoreMatrix};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no distance from agent `{agent}` to material `{material}`")]
    MissingDistance { agent: String, material: String },
    #[error("no destination distance for material `{0}`")]
    MissingDestination(String),
    #[error("coalition {coalition}: goal `{goal}` is achieved by an action with no known material")]
    MissingMaterial { coalition: String, goal: String },
    #[error("negative distance for `{0}`")]
    NegativeDistance(String),
    #[error("dimension mismatch: {0}")]
    WeightMismatch(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("score of `{alternative}` on `{criterion}` is not strictly positive")]
    NonPositiveScore { alternative: String, criterion: String },
    #[error("criterion `{0}` is zero for every alternative")]
    ZeroColumn(String),
    #[error("more than {cap} elementary cycles")]
    GraphTooLarge { cap: usize },
    #[error("conviviality needs at least two agents")]
    TooFewAgents,
    #[error("arithmetic overflow")]
    Overflow,
    #[error("unknown plan `{0}`")]
    UnknownPlan(String),
}

/// Distances from agents to materials and from materials to their
/// destinations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceTable<T> {
    pub agent_to_material: BTreeMap<String, BTreeMap<String, T>>,
    pub material_to_destination: BTreeMap<String, T>,
}

impl<T: Scalar> DistanceTable<T> {
    pub fn agent_to_material(&self, agent: &str, material: &str) -> Result<T, EvalError> {
        self.agent_to_material
            .get(agent)
            .and_then(|m| m.get(material))
            .copied()
            .ok_or_else(|| EvalError::MissingDistance { agent: agent.into(), material: material.into() })
    }

    pub fn to_destination(&self, material: &str) -> Result<T, EvalError> {
        self.material_to_destination
            .get(material)
            .copied()
            .ok_or_else(|| EvalError::MissingDestination(material.into()))
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        let zero = T::zero();
        for (agent, row) in &self.agent_to_material {
            if let Some((m, _)) = row.iter().find(|(_, v)| **v < zero) {
                return Err(EvalError::NegativeDistance(format!("{agent}/{m}")));
            }
        }
        if let Some((m, _)) = self.material_to_destination.iter().find(|(_, v)| **v < zero) {
            return Err(EvalError::NegativeDistance(m.clone()));
        }
        Ok(())
    }

    pub fn map<U>(&self, f: impl Fn(T) -> U) -> DistanceTable<U> {
        DistanceTable {
            agent_to_material: self
                .agent_to_material
                .iter()
                .map(|(a, row)| (a.clone(), row.iter().map(|(m, v)| (m.clone(), f(*v))).collect()))
                .collect(),
            material_to_destination: self.material_to_destination.iter().map(|(m, v)| (m.clone(), f(*v))).collect(),
        }
    }
}

/// Distance each agent covers in a coalition.
pub fn agent_distances<T: Scalar>(
    coalition: &Coalition,
    table: &DistanceTable<T>,
) -> Result<BTreeMap<String, T>, EvalError> {
    let mut out = BTreeMap::new();
    for a in &coalition.assignments {
        let material = a.material.as_deref().ok_or_else(|| EvalError::MissingMaterial {
            coalition: coalition.id.clone(),
            goal: a.goal.to_string(),
        })?;
        let d = table.agent_to_material(&a.agent, material)? + table.to_destination(material)?;
        let slot = out.entry(a.agent.clone()).or_insert_with(T::zero);
        *slot = *slot + d;
    }
    Ok(out)
}

/// Total distance covered by all agents of the coalition.
pub fn coalition_cost<T: Scalar>(coalition: &Coalition, table: &DistanceTable<T>) -> Result<T, EvalError> {
    Ok(agent_distances(coalition, table)?
        .into_values()
        .fold(T::zero(), |a, b| a + b))
}

/// Pareto dominance on per-agent distances: nobody in `c1` travels more
/// than in `c2` and somebody travels less.
pub fn economically_dominates<T: Scalar>(
    c1: &Coalition,
    c2: &Coalition,
    table: &DistanceTable<T>,
) -> Result<bool, EvalError> {
    let d1 = agent_distances(c1, table)?;
    let d2 = agent_distances(c2, table)?;
    let agents: BTreeSet<&String> = d1.keys().chain(d2.keys()).collect();
    let get = |d: &BTreeMap<String, T>, a: &String| d.get(a).copied().unwrap_or_else(T::zero);
    let mut strict = false;
    for a in agents {
        let (x, y) = (get(&d1, a), get(&d2, a));
        if x > y {
            return Ok(false);
        }
        strict |= x < y;
    }
    Ok(strict)
}

/// Columns of a necessity score matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriteriaLayout {
    /// One criterion per goal: the necessity with which it is achieved.
    Goal,
    /// One criterion per agent: the necessity of the goal it achieves
    /// (the lowest one if it achieves several, 0 if none).
    Agent,
}

/// Alternatives are coalitions; scores are per-goal (or per-agent)
/// necessities. Missing weights default to equal weights.
pub fn necessity_matrix(
    problem: &CoalitionProblem,
    coalitions: &[Coalition],
    layout: CriteriaLayout,
    weights: Option<&BTreeMap<String, Decimal>>,
) -> Result<ScoreMatrix<Decimal>, EvalError> {
    let criteria: Vec<String> = match layout {
        CriteriaLayout::Goal => problem.goals.iter().map(|g| g.to_string()).collect(),
        CriteriaLayout::Agent => problem.agents.iter().map(|a| a.id.clone()).collect(),
    };
    let scores = coalitions
        .iter()
        .map(|c| {
            criteria
                .iter()
                .map(|k| {
                    let degrees = c.assignments.iter().filter(|a| match layout {
                        CriteriaLayout::Goal => a.goal.name() == k,
                        CriteriaLayout::Agent => &a.agent == k,
                    });
                    degrees.map(|a| a.necessity).min().unwrap_or(Degree::ZERO).value()
                })
                .collect()
        })
        .collect();
    let weights = match weights {
        Some(w) => {
            if let Some(unknown) = w.keys().find(|k| !criteria.contains(k)) {
                return Err(EvalError::WeightMismatch(format!("no criterion `{unknown}`")));
            }
            criteria.iter().map(|k| w.get(k).copied().unwrap_or(Decimal::ZERO)).collect()
        }
        None => equal_weights(criteria.len())?,
    };
    ScoreMatrix::new(coalitions.iter().map(|c| c.id.clone()).collect(), criteria, scores, weights)
}

/// `n` weights of `1/n`, the last absorbing the rounding remainder so
/// that they sum to exactly 1.
pub fn equal_weights(n: usize) -> Result<Vec<Decimal>, EvalError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let w = Decimal::from_ratio(1, n as i128).ok_or(EvalError::Overflow)?;
    let mut out = vec![w; n];
    let rest: Decimal = out[..n - 1].iter().copied().sum();
    out[n - 1] = Decimal::ONE - rest;
    Ok(out)
}
