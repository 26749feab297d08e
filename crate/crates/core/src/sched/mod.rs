//! Online schedulers. Jobs arrive one at a time and are placed immediately
//! and irrevocably; every scheduler knows `n` up front.

mod alg1;
mod greedy;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use alg1::{
    algorithm1_schedule, guess_t, max_guess, p_up_rank, padded_len, Algorithm1Online,
    Algorithm1Reference, Events, TrialReport,
};
pub(crate) use alg1::{guess_support, PartitionRun};
pub use greedy::{greedy_schedule, GreedyOnline};

use crate::error::{invalid, Error, Result};
use crate::instance::{Instance, Order};
use crate::schedule::Schedule;

/// A scheduler consuming jobs one at a time.
pub trait OnlineAssigner {
    /// Place the next arriving job and return its machine.
    fn assign(&mut self, size: f64) -> usize;

    fn schedule(&self) -> &Schedule;
}

/// Scheduler selection shared by the harness, the CLI and the FFI layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algo {
    Greedy,
    Algorithm1 { forced_t: Option<i32> },
}

impl Algo {
    pub fn name(&self) -> &'static str {
        match self {
            Algo::Greedy => "greedy",
            Algo::Algorithm1 { .. } => "alg1",
        }
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self, Algo::Greedy)
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algo::Algorithm1 { forced_t: Some(t) } => write!(f, "alg1[t={t}]"),
            other => f.write_str(other.name()),
        }
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Algo::Greedy),
            "alg1" => Ok(Algo::Algorithm1 { forced_t: None }),
            other => Err(invalid(format!("unknown algorithm {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrialOutcome {
    pub schedule: Schedule,
    pub report: Option<TrialReport>,
}

impl TrialOutcome {
    pub fn min_load(&self) -> f64 {
        self.schedule.min_load()
    }
}

/// Run `algo` on `instance` in `order`. Greedy ignores `rng` and `reference`.
pub fn run_algo<R: Rng>(
    instance: &Instance,
    order: &Order,
    algo: Algo,
    rng: R,
    reference: Option<&Algorithm1Reference>,
) -> Result<TrialOutcome> {
    match algo {
        Algo::Greedy => Ok(TrialOutcome {
            schedule: greedy_schedule(instance, order),
            report: None,
        }),
        Algo::Algorithm1 { forced_t } => {
            let (schedule, report) =
                algorithm1_schedule(instance, order, rng, forced_t, reference)?;
            Ok(TrialOutcome {
                schedule,
                report: Some(report),
            })
        }
    }
}
