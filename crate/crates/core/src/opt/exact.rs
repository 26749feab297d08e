//! Exact offline optimum by target search over a bin-covering feasibility test.
//!
//! `feasible(target)` asks whether the jobs can be split so every machine
//! reaches `target`. It is a depth-first search over jobs in descending size:
//! each job either joins a machine still below target (machines with equal
//! loads are interchangeable, so only one of them is tried) or is set aside.
//! A branch dies once the remaining volume cannot cover the total deficit.
//! Set-aside jobs end up on machine 0 in the witness, which only raises loads.

use crate::error::{Error, Result};
use crate::instance::{Instance, Order};
use crate::schedule::Schedule;

use super::{OptMethod, OptResult};

/// Default node budget for [`opt_exact`].
pub const DEFAULT_NODE_BUDGET: u64 = 50_000_000;

const SET_ASIDE: usize = usize::MAX;
const FLOAT_REL_GAP: f64 = 1e-10;

struct BudgetExhausted;

struct CoverSearch<'a> {
    sizes: &'a [f64],
    suffix: Vec<f64>,
    m: usize,
    nodes: u64,
    budget: u64,
}

impl<'a> CoverSearch<'a> {
    fn new(sizes: &'a [f64], m: usize, budget: u64) -> Self {
        let mut suffix = vec![0.0; sizes.len() + 1];
        for i in (0..sizes.len()).rev() {
            suffix[i] = suffix[i + 1] + sizes[i];
        }
        Self {
            sizes,
            suffix,
            m,
            nodes: 0,
            budget,
        }
    }

    /// Assignment (per sorted job) reaching `target` on every machine, if any.
    fn feasible(&mut self, target: f64) -> Result<Option<Vec<usize>>, BudgetExhausted> {
        let mut loads = vec![0.0; self.m];
        let mut assign = vec![SET_ASIDE; self.sizes.len()];
        if self.dfs(0, target, &mut loads, &mut assign)? {
            for a in &mut assign {
                if *a == SET_ASIDE {
                    *a = 0;
                }
            }
            Ok(Some(assign))
        } else {
            Ok(None)
        }
    }

    fn dfs(
        &mut self,
        i: usize,
        target: f64,
        loads: &mut [f64],
        assign: &mut [usize],
    ) -> Result<bool, BudgetExhausted> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(BudgetExhausted);
        }
        let mut open = 0;
        let mut deficit = 0.0;
        for &l in loads.iter() {
            if l < target {
                open += 1;
                deficit += target - l;
            }
        }
        if open == 0 {
            return Ok(true);
        }
        let n = self.sizes.len();
        if i == n || n - i < open || self.suffix[i] < deficit {
            return Ok(false);
        }
        let size = self.sizes[i];
        // Among equal sizes, once one is set aside the rest are too.
        let forced_aside = size == 0.0 || (i > 0 && self.sizes[i - 1] == size && assign[i - 1] == SET_ASIDE);
        if !forced_aside {
            for j in 0..self.m {
                let l = loads[j];
                // Loads of earlier machines are restored after their branch, so
                // an equal open load means an identical subtree.
                if l >= target || loads[..j].iter().any(|&x| x == l) {
                    continue;
                }
                loads[j] = l + size;
                assign[i] = j;
                if self.dfs(i + 1, target, loads, assign)? {
                    return Ok(true);
                }
                loads[j] = l;
                assign[i] = SET_ASIDE;
            }
        }
        assign[i] = SET_ASIDE;
        self.dfs(i + 1, target, loads, assign)
    }
}

fn is_integral(sizes: &[f64]) -> bool {
    let total: f64 = sizes.iter().sum();
    total < 2f64.powi(52) && sizes.iter().all(|x| x.fract() == 0.0)
}

/// Witness schedule (jobs in listed order) from a per-sorted-job assignment.
fn witness(instance: &Instance, ranked: &[usize], assign_sorted: &[usize]) -> Schedule {
    let mut per_job = vec![0; instance.n()];
    for (r, &job) in ranked.iter().enumerate() {
        per_job[job] = assign_sorted[r];
    }
    Schedule::from_assignment(instance, &Order::given(instance.n()), &per_job)
        .expect("witness assignment is in range")
}

/// Longest-processing-time greedy, used as the starting lower bound.
fn lpt(sizes_desc: &[f64], m: usize) -> Vec<usize> {
    let mut loads = vec![0.0f64; m];
    sizes_desc
        .iter()
        .map(|&s| {
            let j = (0..m)
                .min_by(|&a, &b| loads[a].total_cmp(&loads[b]))
                .unwrap();
            loads[j] += s;
            j
        })
        .collect()
}

/// Maximum over all assignments of the minimum machine load.
///
/// Integer sizes are solved exactly; otherwise the value is within `1e-9`
/// relative of the optimum and equals the returned witness's minimum load.
/// When the node budget runs out the result degrades to the `L_1/m` bound.
pub fn opt_exact(instance: &Instance, budget: u64) -> Result<OptResult> {
    if instance.scale().is_log() {
        return Err(Error::LogDomainUnsupported("opt_exact"));
    }
    let m = instance.m();
    let n = instance.n();
    let sizes = instance.sizes();
    let mut ranked: Vec<usize> = (0..n).collect();
    ranked.sort_by(|&a, &b| sizes[b].total_cmp(&sizes[a]).then(a.cmp(&b)));
    let desc: Vec<f64> = ranked.iter().map(|&j| sizes[j]).collect();

    if n < m || m == 1 {
        // n < m leaves a machine empty; a single machine takes everything.
        let assign: Vec<usize> = (0..n).map(|r| if m == 1 { 0 } else { r }).collect();
        let w = witness(instance, &ranked, &assign);
        return Ok(OptResult {
            value: w.min_load(),
            witness: Some(w),
            method: OptMethod::Exact,
        });
    }

    let upper = super::opt_upper_bound(instance);
    let mut best = witness(instance, &ranked, &lpt(&desc, m));
    let mut search = CoverSearch::new(&desc, m, budget);
    let exhausted = |_| OptResult {
        value: upper,
        witness: None,
        method: OptMethod::UpperBoundOnly,
    };

    if is_integral(sizes) {
        let mut lo = best.min_load();
        let mut hi = upper.floor();
        while lo < hi {
            let mid = lo + ((hi - lo) / 2.0).ceil();
            match search.feasible(mid) {
                Err(e) => return Ok(exhausted(e)),
                Ok(Some(a)) => {
                    best = witness(instance, &ranked, &a);
                    lo = best.min_load();
                }
                Ok(None) => hi = mid - 1.0,
            }
        }
    } else {
        let mut lo = best.min_load();
        let mut hi = upper;
        while hi - lo > FLOAT_REL_GAP * hi {
            let mid = 0.5 * (lo + hi);
            match search.feasible(mid) {
                Err(e) => return Ok(exhausted(e)),
                Ok(Some(a)) => {
                    let w = witness(instance, &ranked, &a);
                    lo = w.min_load().max(mid);
                    if w.min_load() > best.min_load() {
                        best = w;
                    }
                }
                Ok(None) => hi = mid,
            }
        }
    }
    Ok(OptResult {
        value: best.min_load(),
        witness: Some(best),
        method: OptMethod::Exact,
    })
}
