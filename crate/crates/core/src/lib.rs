//! Shielded Q-learning under time-window temporal logic (TWTL) constraints.
//!
//! The pipeline compiles a bounded TWTL constraint into a total automaton,
//! composes it with a labeled MDP whose transition probabilities are only
//! known up to per-edge intervals, computes worst-case lower bounds on the
//! probability of satisfying the constraint, prunes actions that could drop
//! that bound below a desired threshold, and runs tabular Q-learning inside
//! the pruned action sets.
//!
//! Modules, bottom-up:
//!
//! - [`label`]: atomic propositions, label sets, finite words.
//! - [`twtl`]: formula AST, parser, time bounds, reference semantics.
//! - [`automaton`]: formula progression into a deterministic total automaton.
//! - [`mdp`]: labeled MDPs with interval transition bounds.
//! - [`product`]: the time-total product MDP.
//! - [`reachability`]: backward recursion, one-shot and multi-shot pruning.
//! - [`learner`]: shielded Q-learning and greedy evaluation.
//! - [`gridworld`]: the grid case-study environment.
//! - [`oracle`]: brute-force verifiers and random instance generators.
//! - [`experiment`]: end-to-end experiment runner used by the CLI.

pub mod automaton;
pub mod error;
pub mod experiment;
pub mod gridworld;
pub mod label;
pub mod learner;
pub mod mdp;
pub mod oracle;
pub mod product;
pub mod reachability;
pub mod twtl;

pub use automaton::TotalAutomaton;
pub use error::{Error, Result};
pub use label::{Alphabet, AtomicProposition, LabelSet, Word};
pub use learner::{EpisodeLog, LearnerConfig};
pub use mdp::LabeledIntervalMdp;
pub use product::TimeTotalProductMdp;
pub use reachability::{MultiShotPlan, Shield};
pub use twtl::Formula;
