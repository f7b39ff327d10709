//! Dependence graphs of coalitions and cycle-based conviviality.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use serde::Serialize;

use super::EvalError;
use crate::coalition::{Coalition, CoalitionProblem};
use crate::decimal::Decimal;
use crate::logic::Atom;

pub const DEFAULT_CYCLE_CAP: usize = 1_000_000;

/// Digits kept when reporting conviviality.
pub const CONVIVIALITY_DIGITS: u32 = 5;

/// Agents as nodes, `depender → dependee` edges labelled by goal. Parallel
/// edges with distinct labels are kept as one edge with several labels.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DependenceGraph {
    nodes: Vec<String>,
    edges: BTreeMap<(usize, usize), BTreeSet<Atom>>,
}

impl DependenceGraph {
    pub fn new(nodes: Vec<String>) -> Self {
        DependenceGraph { nodes, edges: BTreeMap::new() }
    }

    /// Self loops carry no interdependence and are dropped.
    pub fn add_edge(&mut self, from: usize, to: usize, goal: Atom) {
        assert!(from < self.nodes.len() && to < self.nodes.len(), "edge endpoint out of range");
        if from != to {
            self.edges.entry((from, to)).or_default().insert(goal);
        }
    }

    /// In each plan the coalition uses, the achiever depends on every other
    /// agent performing a step.
    pub fn from_coalition(problem: &CoalitionProblem, coalition: &Coalition) -> Result<Self, EvalError> {
        let mut g = DependenceGraph::new(problem.agents.iter().map(|a| a.id.clone()).collect());
        let index = |id: &str| problem.agents.iter().position(|a| a.id == id);
        for a in &coalition.assignments {
            let plan = problem
                .plans
                .iter()
                .find(|p| p.id == a.plan)
                .ok_or_else(|| EvalError::UnknownPlan(a.plan.clone()))?;
            let from = index(&a.agent).ok_or_else(|| EvalError::UnknownPlan(a.plan.clone()))?;
            for s in &plan.steps {
                let to = index(&s.agent).ok_or_else(|| EvalError::UnknownPlan(a.plan.clone()))?;
                g.add_edge(from, to, a.goal.clone());
            }
        }
        Ok(g)
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &BTreeSet<Atom>)> {
        self.edges.iter().map(|(&(a, b), l)| (a, b, l))
    }

    /// Number of goal labels on `from → to`.
    pub fn multiplicity(&self, from: usize, to: usize) -> usize {
        self.edges.get(&(from, to)).map_or(0, BTreeSet::len)
    }

    fn successors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for &(a, b) in self.edges.keys() {
            adj[a].push(b);
        }
        adj
    }

    /// Graphviz rendering, one edge per goal label.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = format!("digraph {name} {{\n");
        for n in &self.nodes {
            out.push_str(&format!("  \"{n}\";\n"));
        }
        for (&(a, b), labels) in &self.edges {
            for l in labels {
                out.push_str(&format!("  \"{}\" -> \"{}\" [label=\"{l}\"];\n", self.nodes[a], self.nodes[b]));
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Elementary circuits of length at least 2 (Johnson's algorithm). Each
/// circuit starts at its smallest node; the output is sorted.
pub fn elementary_circuits(graph: &DependenceGraph, cap: usize) -> Result<Vec<Vec<usize>>, EvalError> {
    let adj = graph.successors();
    let n = adj.len();
    let mut out = Vec::new();
    for s in 0..n {
        let component = scc_of(&adj, s);
        if component.len() < 2 {
            continue;
        }
        let mut search = Johnson {
            adj: &adj,
            allowed: component,
            blocked: vec![false; n],
            b: vec![BTreeSet::new(); n],
            stack: Vec::new(),
            out: &mut out,
            cap,
        };
        search.circuit(s, s)?;
    }
    out.sort();
    Ok(out)
}

/// Nodes `>= s` that lie on the strongly connected component of `s` in the
/// subgraph induced by those nodes.
fn scc_of(adj: &[Vec<usize>], s: usize) -> Vec<bool> {
    let n = adj.len();
    let mut radj = vec![Vec::new(); n];
    for (a, succ) in adj.iter().enumerate().skip(s) {
        for &b in succ.iter().filter(|&&b| b >= s) {
            radj[b].push(a);
        }
    }
    let reach = |graph: &dyn Fn(usize) -> Vec<usize>| {
        let mut seen = vec![false; n];
        let mut todo = vec![s];
        seen[s] = true;
        while let Some(v) = todo.pop() {
            for w in graph(v) {
                if w >= s && !seen[w] {
                    seen[w] = true;
                    todo.push(w);
                }
            }
        }
        seen
    };
    let fwd = reach(&|v| adj[v].clone());
    let bwd = reach(&|v| radj[v].clone());
    fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect()
}

struct Johnson<'a> {
    adj: &'a [Vec<usize>],
    allowed: Vec<bool>,
    blocked: Vec<bool>,
    b: Vec<BTreeSet<usize>>,
    stack: Vec<usize>,
    out: &'a mut Vec<Vec<usize>>,
    cap: usize,
}

impl Johnson<'_> {
    fn circuit(&mut self, v: usize, s: usize) -> Result<bool, EvalError> {
        let mut found = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &self.adj[v] {
            if !self.allowed[w] {
                continue;
            }
            if w == s {
                if self.out.len() >= self.cap {
                    return Err(EvalError::GraphTooLarge { cap: self.cap });
                }
                self.out.push(self.stack.clone());
                found = true;
            } else if !self.blocked[w] && self.circuit(w, s)? {
                found = true;
            }
        }
        if found {
            self.unblock(v);
        } else {
            for &w in &self.adj[v] {
                if self.allowed[w] {
                    self.b[w].insert(v);
                }
            }
        }
        self.stack.pop();
        Ok(found)
    }

    fn unblock(&mut self, u: usize) {
        self.blocked[u] = false;
        for w in std::mem::take(&mut self.b[u]) {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }
}

/// Sum over ordered pairs `(a, b)` of the number of cycles in which `b`
/// immediately follows `a`, cycles through parallel edges with different
/// goals being distinct.
pub fn cycle_pair_count(graph: &DependenceGraph, cap: usize) -> Result<u128, EvalError> {
    elementary_circuits(graph, cap)?.iter().try_fold(0u128, |acc, c| {
        let labelled = (0..c.len()).try_fold(1u128, |m, i| {
            m.checked_mul(graph.multiplicity(c[i], c[(i + 1) % c.len()]) as u128)
        });
        labelled
            .and_then(|m| m.checked_mul(c.len() as u128))
            .and_then(|x| acc.checked_add(x))
            .ok_or(EvalError::Overflow)
    })
}

/// `Σ_{l=2}^{n} Perm(n-2, l-2) · g^l`: the number of goal-labelled cycles in
/// which a fixed agent is immediately followed by another fixed agent.
pub fn theta(agents: usize, goals: usize) -> Result<u128, EvalError> {
    if agents < 2 {
        return Err(EvalError::TooFewAgents);
    }
    let g = goals as u128;
    let mut total = 0u128;
    let mut perm = 1u128;
    let mut power = g.checked_mul(g).ok_or(EvalError::Overflow)?;
    for l in 2..=agents {
        if l > 2 {
            perm = perm.checked_mul((agents - l + 1) as u128).ok_or(EvalError::Overflow)?;
            power = power.checked_mul(g).ok_or(EvalError::Overflow)?;
        }
        total = perm
            .checked_mul(power)
            .and_then(|t| total.checked_add(t))
            .ok_or(EvalError::Overflow)?;
    }
    Ok(total)
}

/// `n(n-1) · Θ`, the largest possible cycle-pair count.
pub fn omega(agents: usize, goals: usize) -> Result<u128, EvalError> {
    theta(agents, goals)?
        .checked_mul((agents * (agents - 1)) as u128)
        .ok_or(EvalError::Overflow)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conviviality {
    pub cycle_pairs: u128,
    pub theta: u128,
    pub omega: u128,
    #[serde(skip)]
    pub exact: Ratio<u128>,
    /// Rounded to [`CONVIVIALITY_DIGITS`] digits.
    pub value: Decimal,
}

pub fn conviviality(graph: &DependenceGraph, goals: usize, cap: usize) -> Result<Conviviality, EvalError> {
    let theta = theta(graph.len(), goals)?;
    let omega = omega(graph.len(), goals)?;
    let cycle_pairs = cycle_pair_count(graph, cap)?;
    let value = if omega == 0 {
        Decimal::ZERO
    } else {
        let num = i128::try_from(cycle_pairs).map_err(|_| EvalError::Overflow)?;
        let den = i128::try_from(omega).map_err(|_| EvalError::Overflow)?;
        Decimal::from_ratio_dp(num, den, CONVIVIALITY_DIGITS).ok_or(EvalError::Overflow)?
    };
    let exact = if omega == 0 { Ratio::from_integer(0) } else { Ratio::new(cycle_pairs, omega) };
    Ok(Conviviality { cycle_pairs, theta, omega, exact, value })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, edges: &[(usize, usize)]) -> DependenceGraph {
        let mut g = DependenceGraph::new((0..n).map(|i| format!("a{i}")).collect());
        for &(a, b) in edges {
            g.add_edge(a, b, Atom::new("g").unwrap());
        }
        g
    }

    #[test]
    fn two_cycle() {
        let g = graph(2, &[(0, 1), (1, 0)]);
        assert_eq!(elementary_circuits(&g, 10).unwrap(), vec![vec![0, 1]]);
        assert_eq!(cycle_pair_count(&g, 10).unwrap(), 2);
    }

    #[test]
    fn complete_graph_circuits() {
        // K4 has 6 two-cycles, 8 three-cycles and 6 four-cycles.
        let edges: Vec<(usize, usize)> =
            (0..4).flat_map(|a| (0..4).filter(move |&b| b != a).map(move |b| (a, b))).collect();
        let g = graph(4, &edges);
        assert_eq!(elementary_circuits(&g, 100).unwrap().len(), 20);
        assert!(matches!(elementary_circuits(&g, 5), Err(EvalError::GraphTooLarge { cap: 5 })));
    }

    #[test]
    fn acyclic_is_zero() {
        let g = graph(3, &[(0, 1), (1, 2), (0, 2)]);
        let c = conviviality(&g, 2, DEFAULT_CYCLE_CAP).unwrap();
        assert_eq!(c.cycle_pairs, 0);
        assert_eq!(c.value, Decimal::ZERO);
    }

    #[test]
    fn parallel_labels_multiply() {
        let mut g = graph(2, &[(0, 1), (1, 0)]);
        g.add_edge(0, 1, Atom::new("h").unwrap());
        assert_eq!(cycle_pair_count(&g, 10).unwrap(), 4);
    }

    #[test]
    fn theta_small_cases() {
        assert_eq!(theta(2, 3).unwrap(), 9);
        assert_eq!(theta(3, 1).unwrap(), 2);
        assert!(theta(1, 3).is_err());
    }
}
