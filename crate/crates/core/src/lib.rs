//! Mapped zero-sum preference games.
//!
//! A preference matrix `p` is turned into a payoff matrix `psi(p)`, the
//! maximin strategy of that game is computed with a dense simplex solver,
//! and the result is compared with the Condorcet winner and Smith set of the
//! underlying majority tournament.

// paired (i, j) / (j, i) indexing is clearer as index loops; negated
// comparisons are kept so that NaN fails the check
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod generators;
pub mod lp;
pub mod mapping;
pub mod matching;
pub mod model;
pub mod social_choice;
pub mod solver;

pub use error::{Error, Result};
pub use mapping::{check_conditions, symmetric_extension, ConditionReport, MappingKind, MappingSpec};
pub use model::{apply_mapping, total_payoff, validate_preferences, PayoffMatrix, Policy, PreferenceMatrix};
pub use social_choice::{condorcet_winner, consistency_verdict, smith_decomposition, ConsistencyVerdict, Decomposition};
pub use solver::{best_response_gap, enumerate_equilibria, solve_maximin, uniqueness_report, NashReport};
