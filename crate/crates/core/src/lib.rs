//! Learning dynamics and equilibrium refinements for finite signalling
//! games: the type-compatibility order, belief-restriction criteria, Gittins
//! index senders, Bayesian receivers, and their steady states.

pub mod compat;
pub mod error;
pub mod fixtures;
pub mod game;
pub mod gittins;
pub mod lp;
pub mod rational;
pub mod receiver;
pub mod refinement;
pub mod report;
pub mod sampling;
pub mod sender;
pub mod spec_file;
pub mod steady;

pub use compat::{compatibility_relation, is_more_compatible, CompatibilityCertificate, CompatibilityQuery};
pub use error::{Error, Result};
pub use game::{Belief, Posterior, SignallingGame, StrategyProfile, Verdict};
pub use gittins::{gittins_index, DirichletArm, GittinsResult, IndexPolicy, SenderBeliefState};
pub use rational::Rational;
pub use receiver::{ReceiverCounts, ReceiverPrior};
pub use refinement::{check_compatibility_criterion, check_strong_compatibility_criterion, BeliefConstraintSet};
pub use spec_file::GameSpec;
pub use steady::{solve_steady_state, LearningParams, Mode, SolverConfig, SteadyStateResult};

/// Installs a global thread pool capped by `SIGLEARN_THREADS`, if set.
/// Returns the cap that was applied.
pub fn init_threads_from_env() -> Option<usize> {
    let n = std::env::var("SIGLEARN_THREADS").ok()?.trim().parse::<usize>().ok().filter(|&n| n > 0)?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().ok()?;
    Some(n)
}
