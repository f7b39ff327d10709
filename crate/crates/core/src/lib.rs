//! Multi-context systems, their possibilistic extension, and coalition
//! formation on top of them.
//!
//! Problems described by agents, plans and exclusion groups compile into
//! systems whose equilibria are read back as coalitions, then scored by
//! travel cost, conviviality and multi-criteria aggregation.

pub mod coalition;
pub mod decimal;
pub mod evaluator;
pub mod io;
pub mod logic;
pub mod mcs;
pub mod poss;
pub mod scalar;

pub use coalition::{Coalition, CoalitionProblem, CompileError, Extraction};
pub use decimal::{Decimal, Degree};
pub use evaluator::{DistanceTable, EvalError, Ranking, ScoreMatrix};
pub use logic::{Atom, AtomSet, Limits, LogicError, Program, Semantics};
pub use mcs::{BeliefState, BridgeRule, Mcs, McsError};
pub use poss::{PossBeliefState, PossError, PossMcs};
pub use scalar::Scalar;
