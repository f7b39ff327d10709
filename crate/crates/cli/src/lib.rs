//! Driver behind the `mcsc` binary: argument parsing, the three commands and
//! their reports. [`run`] never touches the process streams, so it can be
//! called from tests.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use mcsc_core::evaluator::{
    agent_distances, coalition_cost, conviviality, economically_dominates, necessity_matrix, topsis, weighted_sum,
    wp_rank, CriteriaLayout, DependenceGraph, Direction, RankEntry, DEFAULT_CYCLE_CAP,
};
use mcsc_core::io::{
    parse_mcs, parse_problem, print_mcs, print_poss_mcs, CoalitionReport, MetricRow, Mode, RankingReport,
    ResultReport, Score, StateReport,
};
use mcsc_core::{Coalition, CoalitionProblem, Decimal, Extraction, Limits, Ranking};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_INCONSISTENT: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "mcsc", version, about = "Coalition formation over (possibilistic) multi-context systems")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    /// Largest alphabet of a single context.
    #[arg(long, env = "MCSC_MAX_ATOMS", global = true)]
    pub max_atoms: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Classical,
    Possibilistic,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Classical => Mode::Classical,
            ModeArg::Possibilistic => Mode::Possibilistic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Ws,
    Wp,
    Topsis,
    Cost,
    Conviviality,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    Goal,
    Agent,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compile a problem document, compute its equilibria and coalitions.
    Solve {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Classical)]
        mode: ModeArg,
        /// Print the compiled system in the MCS language instead of solving.
        #[arg(long)]
        emit_mcs: bool,
        /// Print the dependence graph of each coalition in DOT instead of the report.
        #[arg(long)]
        emit_dot: bool,
    },
    /// Solve, then score and rank the coalitions.
    Rank {
        file: PathBuf,
        #[arg(long, value_enum)]
        metric: Metric,
        #[arg(long, value_enum, default_value_t = ModeArg::Possibilistic)]
        mode: ModeArg,
        /// Criterion weights, e.g. `g_1=0.25,g_2=0.25,...`.
        #[arg(long)]
        weights: Option<String>,
        /// Whether necessity criteria are goals or agents.
        #[arg(long, value_enum, default_value_t = Layout::Goal)]
        criteria: Layout,
    },
    /// Equilibria of a system written in the MCS language.
    Check {
        file: PathBuf,
        /// Defaults to possibilistic when the file carries degrees.
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Also explain why each rejected candidate state fails.
        #[arg(long)]
        all: bool,
    },
}

/// What a command produced.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the command line `args` (program name first).
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Outcome { code: EXIT_OK, stdout: text, stderr: String::new() }
                }
                _ => Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: text },
            };
        }
    };
    match execute(&cli) {
        Ok((code, stdout)) => Outcome { code, stdout, stderr: String::new() },
        Err(e) => Outcome { code: EXIT_ERROR, stdout: String::new(), stderr: format!("error: {e:#}\n") },
    }
}

fn execute(cli: &Cli) -> Result<(i32, String)> {
    let limits = match cli.max_atoms {
        Some(n) => Limits::default().with_max_atoms(n),
        None => Limits::default(),
    };
    let report = match &cli.command {
        Command::Solve { file, mode, emit_mcs, emit_dot } => {
            let problem = load_problem(file)?;
            if *emit_mcs {
                return Ok((EXIT_OK, emit_compiled(&problem, *mode)?));
            }
            let (report, ex) = solve(&problem, (*mode).into(), &limits)?;
            if *emit_dot {
                return Ok((EXIT_OK, dot(&problem, &ex)?));
            }
            report
        }
        Command::Rank { file, metric, mode, weights, criteria } => {
            let problem = load_problem(file)?;
            let (mut report, ex) = solve(&problem, (*mode).into(), &limits)?;
            if report.consistent {
                let weights = weights.as_deref().map(parse_weights).transpose()?;
                rank(&problem, &ex, *metric, *criteria, weights.as_ref(), &mut report)?;
            }
            report
        }
        Command::Check { file, mode, all } => check(file, *mode, *all, &limits)?,
    };
    let code = if report.consistent { EXIT_OK } else { EXIT_INCONSISTENT };
    let out = match cli.format {
        Format::Text => report.to_text(),
        Format::Json => report.to_json(),
    };
    Ok((code, out))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read `{}`", path.display()))
}

fn load_problem(path: &Path) -> Result<CoalitionProblem> {
    let doc = parse_problem(&read(path)?).with_context(|| format!("{}", path.display()))?;
    Ok(doc.problem)
}

fn emit_compiled(problem: &CoalitionProblem, mode: ModeArg) -> Result<String> {
    Ok(match mode {
        ModeArg::Classical => print_mcs(&problem.compile_classical()?),
        ModeArg::Possibilistic => print_poss_mcs(&problem.compile_possibilistic()?),
    })
}

fn dot(problem: &CoalitionProblem, ex: &Extraction) -> Result<String> {
    let mut out = String::new();
    for c in &ex.coalitions {
        out.push_str(&DependenceGraph::from_coalition(problem, c)?.to_dot(&c.id));
    }
    Ok(out)
}

/// Equilibria and coalitions of a problem; auxiliary atoms are left out of
/// the printed states.
fn solve(problem: &CoalitionProblem, mode: Mode, limits: &Limits) -> Result<(ResultReport, Extraction)> {
    let names: Vec<String> = problem.agents.iter().map(|a| a.id.clone()).collect();
    let aux = problem.auxiliary_atoms();
    let mut report = ResultReport::new(mode);
    let ex = match mode {
        Mode::Classical => {
            let eq = problem.compile_classical()?.enumerate_equilibria(limits)?;
            for (i, s) in eq.iter().enumerate() {
                let shown = s.without(|a| aux.contains(a));
                report.equilibria.push(StateReport::classical(format!("S{i}"), &names, &shown));
            }
            problem.extract_classical(&eq)
        }
        Mode::Possibilistic => {
            let eq = problem.compile_possibilistic()?.equilibria(limits)?;
            for (i, s) in eq.iter().enumerate() {
                let mut r = StateReport::possibilistic(format!("S{i}"), &names, s);
                for c in &mut r.contexts {
                    c.atoms.retain(|a| !aux.iter().any(|x| x.name() == a));
                    if let Some(n) = &mut c.necessities {
                        n.retain(|a, _| !aux.iter().any(|x| x.name() == a));
                    }
                }
                report.equilibria.push(r);
            }
            problem.extract_possibilistic(&eq)
        }
    };
    report.consistent = !report.equilibria.is_empty();
    report.coalitions = ex.coalitions.iter().map(CoalitionReport::new).collect();
    report.unachievable = ex.unachievable.iter().map(|g| g.to_string()).collect();
    report.diagnostics.extend(ex.warnings.iter().cloned());
    Ok((report, ex))
}

fn parse_weights(text: &str) -> Result<BTreeMap<String, Decimal>> {
    let mut out = BTreeMap::new();
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part.split_once('=').ok_or_else(|| anyhow!("weight `{part}` is not of the form key=value"))?;
        let v: Decimal = v.trim().parse().with_context(|| format!("weight of `{}`", k.trim()))?;
        if out.insert(k.trim().to_string(), v).is_some() {
            bail!("weight of `{}` given twice", k.trim());
        }
    }
    Ok(out)
}

fn rank(
    problem: &CoalitionProblem,
    ex: &Extraction,
    metric: Metric,
    layout: Layout,
    weights: Option<&BTreeMap<String, Decimal>>,
    report: &mut ResultReport,
) -> Result<()> {
    let coalitions = &ex.coalitions;
    let mut rows: Vec<MetricRow> =
        coalitions.iter().map(|c| MetricRow { coalition: c.id.clone(), ..MetricRow::default() }).collect();
    let ranking = match metric {
        Metric::Ws | Metric::Wp | Metric::Topsis => {
            let layout = match layout {
                Layout::Goal => CriteriaLayout::Goal,
                Layout::Agent => CriteriaLayout::Agent,
            };
            let from_problem: Option<BTreeMap<String, Decimal>> = match (weights, layout, &problem.weights) {
                (None, CriteriaLayout::Goal, Some(w)) => Some(w.iter().map(|(k, v)| (k.to_string(), *v)).collect()),
                _ => None,
            };
            let m = necessity_matrix(problem, coalitions, layout, weights.or(from_problem.as_ref()))?;
            for (row, scores) in rows.iter_mut().zip(m.scores()) {
                row.criteria = m.criteria().iter().cloned().zip(scores.iter().copied()).collect();
            }
            let mut r = match metric {
                Metric::Ws => RankingReport::new(&weighted_sum(&m)?, Score::Exact),
                Metric::Wp => RankingReport::new(&wp_rank(&m.map(|d| d.to_f64())?)?, Score::Approx),
                _ => RankingReport::new(&topsis(&m.map(|d| d.to_f64())?)?, Score::Approx),
            };
            let w: Vec<String> = m.criteria().iter().zip(m.weights()).map(|(k, w)| format!("{k}={w}")).collect();
            r.parameters.insert("criteria".into(), format!("{layout:?}").to_lowercase());
            r.parameters.insert("weights".into(), w.join(","));
            r
        }
        Metric::Cost => {
            let table = problem.distances()?;
            let mut entries = Vec::new();
            for (row, c) in rows.iter_mut().zip(coalitions) {
                let cost = coalition_cost(c, table)?;
                row.cost = Some(cost);
                row.agent_distances = agent_distances(c, table)?;
                entries.push(RankEntry { id: c.id.clone(), score: cost });
            }
            for a in coalitions {
                for b in coalitions {
                    if economically_dominates(a, b, table)? {
                        report.diagnostics.push(format!("{} economically dominates {}", a.id, b.id));
                    }
                }
            }
            RankingReport::new(&Ranking::new("cost", Direction::LowerIsBetter, entries), Score::Exact)
        }
        Metric::Conviviality => {
            let mut entries = Vec::new();
            for (row, c) in rows.iter_mut().zip(coalitions) {
                let conv = coalition_conviviality(problem, c)?;
                row.cycle_pairs = Some(u64::try_from(conv.cycle_pairs).context("cycle count overflow")?);
                row.conviviality = Some(conv.value);
                entries.push(RankEntry { id: c.id.clone(), score: conv.value });
            }
            let mut r =
                RankingReport::new(&Ranking::new("conviviality", Direction::HigherIsBetter, entries), Score::Exact);
            let n = problem.agents.len();
            let g = problem.goals.len();
            r.parameters.insert("theta".into(), mcsc_core::evaluator::theta(n, g)?.to_string());
            r.parameters.insert("omega".into(), mcsc_core::evaluator::omega(n, g)?.to_string());
            r
        }
    };
    report.metrics = rows;
    report.rankings.push(ranking);
    Ok(())
}

fn coalition_conviviality(problem: &CoalitionProblem, c: &Coalition) -> Result<mcsc_core::evaluator::Conviviality> {
    let graph = DependenceGraph::from_coalition(problem, c)?;
    Ok(conviviality(&graph, problem.goals.len(), DEFAULT_CYCLE_CAP)?)
}

fn check(path: &Path, mode: Option<ModeArg>, all: bool, limits: &Limits) -> Result<ResultReport> {
    let doc = parse_mcs(&read(path)?).with_context(|| format!("{}", path.display()))?;
    let names: Vec<String> = doc.system.contexts().iter().map(|c| c.id.name.clone()).collect();
    let mode: Mode = mode.map(Mode::from).unwrap_or(if doc.uncertain { Mode::Possibilistic } else { Mode::Classical });
    let mut report = ResultReport::new(mode);
    let classical = doc.classical();
    let consistency = classical.check_consistency(limits)?;
    report.consistent = consistency.consistent;
    match mode {
        Mode::Classical => {
            for (i, s) in consistency.equilibria.iter().enumerate() {
                report.equilibria.push(StateReport::classical(format!("S{i}"), &names, s));
            }
        }
        Mode::Possibilistic => {
            for (i, s) in doc.system.equilibria(limits)?.iter().enumerate() {
                report.equilibria.push(StateReport::possibilistic(format!("S{i}"), &names, s));
            }
        }
    }
    if all {
        for f in &consistency.failures {
            let failed: Vec<&str> = f.failed_contexts.iter().map(|&c| names[c].as_str()).collect();
            report.diagnostics.push(format!("rejected {}: not acceptable in {}", f.state, failed.join(", ")));
        }
        let hidden = consistency.failures_total - consistency.failures.len();
        if hidden > 0 {
            report.diagnostics.push(format!("{hidden} further rejected candidates not shown"));
        }
        report
            .diagnostics
            .push(format!("{} candidate states checked", consistency.candidates_checked));
    }
    Ok(report)
}
