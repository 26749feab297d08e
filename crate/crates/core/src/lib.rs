//! Online machine covering under random arrival order: schedulers, an exact
//! offline oracle, instance families, the talent contest game and a Monte
//! Carlo harness.

pub mod error;
pub mod instance;
pub mod gen;
pub mod harness;
pub mod opt;
pub mod rng;
pub mod sched;
pub mod talent;
pub mod schedule;

pub use error::{Error, Result};
pub use instance::{harmonic, rank_stats, round_down_pow2, Instance, Order, Provenance, RankStats, Scale};
pub use opt::{classify, opt_exact, opt_upper_bound, OptMethod, OptResult, Taxonomy};
pub use sched::{algorithm1_schedule, greedy_schedule, Algo, OnlineAssigner, TrialReport};
pub use schedule::Schedule;
