//! Offline optimum, certified bounds and the large/small instance taxonomy.

mod exact;
mod rom;
mod taxonomy;

use serde::{Deserialize, Serialize};

pub use exact::{opt_exact, DEFAULT_NODE_BUDGET};
pub use rom::{exact_rom_value, EXACT_ROM_MAX_N};
pub use taxonomy::{classify, few_large_limit, InstanceKind, SimpleReason, Taxonomy};

use crate::instance::{Instance, RankStats};
use crate::schedule::Schedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OptMethod {
    Exact,
    UpperBoundOnly,
}

impl OptMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            OptMethod::Exact => "exact",
            OptMethod::UpperBoundOnly => "upper-bound-only",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub value: f64,
    pub witness: Option<Schedule>,
    pub method: OptMethod,
}

/// `L_1 / m`, never below the optimum. Returned in the instance's scale.
pub fn opt_upper_bound(instance: &Instance) -> f64 {
    instance
        .scale()
        .scale_by(instance.total(), 1.0 / instance.m() as f64)
}

/// Lower bound on Greedy's minimum load valid for every arrival order:
/// `max(P_m, max_{i <= m} L_i/m - P_i, 0)`, with `P_m` dropped when `n < m`.
pub fn greedy_lower_bounds(stats: &RankStats, m: usize) -> f64 {
    let scale = stats.scale();
    let n = stats.n();
    let mut best = scale.zero();
    if n >= m {
        best = best.max(stats.p(m));
    }
    for i in 1..=m.min(n) {
        let share = scale.scale_by(stats.l(i), 1.0 / m as f64);
        best = best.max(scale.sub_clamped(share, stats.p(i)));
    }
    best
}
