//! Result reports shared by all commands.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::coalition::Coalition;
use crate::decimal::Decimal;
use crate::evaluator::{Direction, Ranking};
use crate::mcs::BeliefState;
use crate::poss::PossBeliefState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Classical,
    Possibilistic,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContextBeliefs {
    pub context: String,
    pub atoms: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub necessities: Option<BTreeMap<String, Decimal>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateReport {
    pub id: String,
    pub contexts: Vec<ContextBeliefs>,
}

impl StateReport {
    pub fn classical(id: String, names: &[String], state: &BeliefState) -> Self {
        let contexts = names
            .iter()
            .zip(state.sets())
            .map(|(n, s)| ContextBeliefs {
                context: n.clone(),
                atoms: s.iter().map(|a| a.to_string()).collect(),
                necessities: None,
            })
            .collect();
        StateReport { id, contexts }
    }

    pub fn possibilistic(id: String, names: &[String], state: &PossBeliefState) -> Self {
        let contexts = names
            .iter()
            .zip(state.sets())
            .map(|(n, s)| ContextBeliefs {
                context: n.clone(),
                atoms: s.keys().map(|a| a.to_string()).collect(),
                necessities: Some(s.iter().map(|(a, d)| (a.to_string(), d.value())).collect()),
            })
            .collect();
        StateReport { id, contexts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssignmentReport {
    pub goal: String,
    pub agent: String,
    pub plan: String,
    pub action: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub material: Option<String>,
    pub necessity: Decimal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoalitionReport {
    pub id: String,
    /// The equilibrium the coalition was read from.
    pub state: String,
    pub assignments: Vec<AssignmentReport>,
}

impl CoalitionReport {
    pub fn new(c: &Coalition) -> Self {
        CoalitionReport {
            id: c.id.clone(),
            state: c.id.replacen('C', "S", 1),
            assignments: c
                .assignments
                .iter()
                .map(|a| AssignmentReport {
                    goal: a.goal.to_string(),
                    agent: a.agent.clone(),
                    plan: a.plan.clone(),
                    action: a.action.to_string(),
                    material: a.material.clone(),
                    necessity: a.necessity.value(),
                })
                .collect(),
        }
    }
}

/// Scores of one coalition; which fields are present depends on the metric.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MetricRow {
    pub coalition: String,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub criteria: BTreeMap<String, Decimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cost: Option<Decimal>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub agent_distances: BTreeMap<String, Decimal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycle_pairs: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub conviviality: Option<Decimal>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Score {
    Exact(Decimal),
    Approx(f64),
}

impl std::fmt::Display for Score {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Score::Exact(d) => write!(f, "{d}"),
            Score::Approx(x) => write!(f, "{x:.6}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankedEntry {
    pub rank: usize,
    pub id: String,
    pub score: Score,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingReport {
    pub method: String,
    pub direction: Direction,
    pub entries: Vec<RankedEntry>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub parameters: BTreeMap<String, String>,
}

impl RankingReport {
    pub fn new<T: Copy>(ranking: &Ranking<T>, score: impl Fn(T) -> Score) -> Self {
        RankingReport {
            method: ranking.method.clone(),
            direction: ranking.direction,
            entries: ranking
                .entries
                .iter()
                .enumerate()
                .map(|(i, e)| RankedEntry { rank: i + 1, id: e.id.clone(), score: score(e.score) })
                .collect(),
            parameters: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultReport {
    pub mode: Mode,
    pub consistent: bool,
    pub equilibria: Vec<StateReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub coalitions: Vec<CoalitionReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unachievable: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub metrics: Vec<MetricRow>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rankings: Vec<RankingReport>,
    pub diagnostics: Vec<String>,
}

impl ResultReport {
    pub fn new(mode: Mode) -> Self {
        ResultReport {
            mode,
            consistent: true,
            equilibria: Vec::new(),
            coalitions: Vec::new(),
            unachievable: Vec::new(),
            metrics: Vec::new(),
            rankings: Vec::new(),
            diagnostics: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports always serialize");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if !self.consistent {
            out.push_str("INCONSISTENT\n");
        }
        for s in &self.equilibria {
            let parts: Vec<String> = s
                .contexts
                .iter()
                .map(|c| {
                    let atoms: Vec<String> = match &c.necessities {
                        Some(n) => c.atoms.iter().map(|a| format!("({a}, {})", n[a])).collect(),
                        None => c.atoms.clone(),
                    };
                    format!("{{{}}}", atoms.join(", "))
                })
                .collect();
            let _ = writeln!(out, "{} = ({})", s.id, parts.join(", "));
        }
        for c in &self.coalitions {
            let pairs: Vec<String> = c
                .assignments
                .iter()
                .map(|a| match self.mode {
                    Mode::Classical => format!("{}->{} via {}", a.agent, a.goal, a.plan),
                    Mode::Possibilistic => format!("{}->{} via {} (N={})", a.agent, a.goal, a.plan, a.necessity),
                })
                .collect();
            let _ = writeln!(out, "{}: {}", c.id, pairs.join(", "));
        }
        if !self.unachievable.is_empty() {
            let _ = writeln!(out, "unachievable: {}", self.unachievable.join(", "));
        }
        for m in &self.metrics {
            let mut fields: Vec<String> = m.criteria.iter().map(|(k, v)| format!("{k}={v}")).collect();
            if let Some(c) = m.cost {
                fields.push(format!("cost={c}"));
            }
            fields.extend(m.agent_distances.iter().map(|(k, v)| format!("dist[{k}]={v}")));
            if let Some(p) = m.cycle_pairs {
                fields.push(format!("cycle_pairs={p}"));
            }
            if let Some(c) = m.conviviality {
                fields.push(format!("conv={c}"));
            }
            let _ = writeln!(out, "{}: {}", m.coalition, fields.join(" "));
        }
        for r in &self.rankings {
            let params: Vec<String> = r.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
            let suffix = if params.is_empty() { String::new() } else { format!(" ({})", params.join(", ")) };
            let _ = writeln!(out, "ranking {}{suffix}:", r.method);
            for e in &r.entries {
                let _ = writeln!(out, "  {}. {} {}", e.rank, e.id, e.score);
            }
        }
        for d in &self.diagnostics {
            let _ = writeln!(out, "note: {d}");
        }
        out
    }
}
