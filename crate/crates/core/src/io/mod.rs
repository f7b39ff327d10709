//! Input languages and output reports.

pub mod mcs_text;
pub mod problem_json;
pub mod report;

pub use mcs_text::{parse_mcs, print_mcs, print_poss_mcs, McsDocument, ParseError, Span};
pub use problem_json::{parse_problem, ProblemDocument, ProblemError};
pub use report::{
    AssignmentReport, CoalitionReport, ContextBeliefs, MetricRow, Mode, RankedEntry, RankingReport, ResultReport,
    Score, StateReport,
};
