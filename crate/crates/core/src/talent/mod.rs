//! The talent contest: `n` candidates with distinct valuations each arrive
//! `T` times in uniform random order. For every `h`, a point is scored when
//! the `h`-th arrival of the `K`-th best candidate is marked and the `h`-th
//! arrival of no better candidate is. Larger valuation means better.
//!
//! Marking decisions are immediate and irrevocable.

mod bounds;
mod guess;
mod strategy;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use bounds::{lambert_w0, lemma11_bound, lemma8_bound, theorem10_lower_bound, zeta};
pub use guess::{binomial_guess_game, mode_threshold, poisson_pmf};
pub use strategy::{
    FromFn, MarkAll, MarkNever, MarkingStrategy, Quantile, ScheduleInduced, StrategyKind,
    DEFAULT_WARMUP,
};

use crate::error::{invalid, Result};
use crate::harness::mean_ci95;
use crate::rng::trial_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arrival {
    pub candidate: usize,
    /// 1-based occurrence index of this candidate.
    pub occurrence: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TalentInstance {
    k: usize,
    t: u32,
    valuations: Vec<f64>,
    arrivals: Vec<Arrival>,
    /// 0 = best.
    rank_of: Vec<usize>,
}

impl TalentInstance {
    /// Build from the sequence of arriving candidates; occurrence indices are
    /// numbered along the sequence.
    pub fn from_sequence(k: usize, t: u32, valuations: Vec<f64>, sequence: &[usize]) -> Result<Self> {
        let n = valuations.len();
        if t == 0 {
            return Err(invalid("T must be at least 1"));
        }
        if k == 0 || k > n {
            return Err(invalid(format!("K = {k} must lie in 1..={n}")));
        }
        if valuations.iter().any(|v| v.is_nan()) {
            return Err(invalid("valuation is NaN"));
        }
        let mut rank: Vec<usize> = (0..n).collect();
        rank.sort_by(|&a, &b| valuations[b].total_cmp(&valuations[a]));
        if rank.windows(2).any(|w| valuations[w[0]] == valuations[w[1]]) {
            return Err(invalid("valuations must be pairwise distinct"));
        }
        let mut rank_of = vec![0; n];
        for (r, &c) in rank.iter().enumerate() {
            rank_of[c] = r;
        }
        if sequence.len() != n * t as usize {
            return Err(invalid(format!(
                "expected {} arrivals, got {}",
                n * t as usize,
                sequence.len()
            )));
        }
        let mut seen = vec![0u32; n];
        let mut arrivals = Vec::with_capacity(sequence.len());
        for &c in sequence {
            if c >= n {
                return Err(invalid(format!("candidate {c} out of range")));
            }
            seen[c] += 1;
            if seen[c] > t {
                return Err(invalid(format!("candidate {c} arrives more than {t} times")));
            }
            arrivals.push(Arrival {
                candidate: c,
                occurrence: seen[c],
            });
        }
        Ok(Self {
            k,
            t,
            valuations,
            arrivals,
            rank_of,
        })
    }

    /// Uniformly random arrival order for the given valuations.
    pub fn random<R: Rng + ?Sized>(k: usize, t: u32, valuations: Vec<f64>, rng: &mut R) -> Result<Self> {
        let mut seq: Vec<usize> = (0..valuations.len())
            .flat_map(|c| std::iter::repeat(c).take(t as usize))
            .collect();
        seq.shuffle(rng);
        Self::from_sequence(k, t, valuations, &seq)
    }

    pub fn n(&self) -> usize {
        self.valuations.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn t(&self) -> u32 {
        self.t
    }

    pub fn valuations(&self) -> &[f64] {
        &self.valuations
    }

    pub fn arrivals(&self) -> &[Arrival] {
        &self.arrivals
    }

    /// 1-based rank of candidate `c` (1 = best).
    pub fn rank(&self, c: usize) -> usize {
        self.rank_of[c] + 1
    }

    /// The `K`-th best candidate.
    pub fn target(&self) -> usize {
        self.rank_of.iter().position(|&r| r == self.k - 1).unwrap()
    }
}

/// `n` i.i.d. uniform valuations on `[0, n]`; colliding values are redrawn.
pub fn uniform_valuations<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    let hi = n as f64;
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=hi)).collect();
    loop {
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut clean = true;
        for w in idx.windows(2) {
            if v[w[0]] == v[w[1]] {
                v[w[1]] = rng.random_range(0.0..=hi);
                clean = false;
            }
        }
        if clean {
            return v;
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PastArrival {
    pub valuation: f64,
    pub occurrence: u32,
    pub marked: bool,
}

/// What a strategy sees at one arrival. Everything here is determined by the
/// arrivals so far.
#[derive(Clone, Copy, Debug)]
pub struct ArrivalView<'a> {
    /// 0-based position in the arrival sequence.
    pub position: usize,
    pub n: usize,
    pub t: u32,
    pub k: usize,
    pub valuation: f64,
    pub occurrence: u32,
    /// Distinct candidates seen so far, this one included.
    pub revealed: usize,
    /// Rank of this candidate among the revealed ones (1 = best).
    pub rank_among_revealed: usize,
    pub history: &'a [PastArrival],
}

impl ArrivalView<'_> {
    pub fn total_arrivals(&self) -> usize {
        self.n * self.t as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HOutcome {
    Won,
    /// The target's `h`-th arrival was not marked.
    MissedTarget,
    /// The target's `h`-th arrival was marked, and so was a better candidate's.
    MarkedBetter,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResult {
    pub points: u32,
    /// Entry `h - 1` is the outcome for `h`.
    pub per_h: Vec<HOutcome>,
}

/// Counts of revealed ranks, for rank-among-revealed queries.
struct Fenwick(Vec<u32>);

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick(vec![0; n + 1])
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.0.len() {
            self.0[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of entries with index `< i`.
    fn prefix(&self, i: usize) -> usize {
        let mut i = i;
        let mut s = 0;
        while i > 0 {
            s += self.0[i] as usize;
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Run `strategy` over the instance's arrival sequence and score it.
pub fn play(instance: &TalentInstance, strategy: &mut dyn MarkingStrategy) -> Result<GameResult> {
    let n = instance.n();
    let t = instance.t as usize;
    let target_rank = instance.k - 1;
    // marked_better[h]: some better candidate's h-th arrival is marked.
    let mut marked_better = vec![false; t];
    let mut marked_target = vec![false; t];
    let mut history = Vec::with_capacity(instance.arrivals.len());
    let mut revealed = Fenwick::new(n);
    let mut revealed_count = 0;
    for (position, a) in instance.arrivals.iter().enumerate() {
        let r = instance.rank_of[a.candidate];
        if a.occurrence == 1 {
            revealed.add(r);
            revealed_count += 1;
        }
        let view = ArrivalView {
            position,
            n,
            t: instance.t,
            k: instance.k,
            valuation: instance.valuations[a.candidate],
            occurrence: a.occurrence,
            revealed: revealed_count,
            rank_among_revealed: revealed.prefix(r) + 1,
            history: &history,
        };
        let mark = strategy.decide(&view)?;
        if mark {
            let h = a.occurrence as usize - 1;
            if r < target_rank {
                marked_better[h] = true;
            } else if r == target_rank {
                marked_target[h] = true;
            }
        }
        history.push(PastArrival {
            valuation: view.valuation,
            occurrence: a.occurrence,
            marked: mark,
        });
    }
    let per_h: Vec<HOutcome> = (0..t)
        .map(|h| match (marked_target[h], marked_better[h]) {
            (false, _) => HOutcome::MissedTarget,
            (true, true) => HOutcome::MarkedBetter,
            (true, false) => HOutcome::Won,
        })
        .collect();
    let points = per_h.iter().filter(|&&o| o == HOutcome::Won).count() as u32;
    Ok(GameResult { points, per_h })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointsEstimate {
    pub mean: f64,
    pub ci95: f64,
    pub trials: usize,
}

/// Monte Carlo mean of the points `make()` scores on random instances with
/// uniform valuations. A lower estimate of the optimal expected score.
pub fn estimate_p<F>(k: usize, t: u32, n: usize, make: F, trials: usize, seed: u64) -> Result<PointsEstimate>
where
    F: Fn() -> Box<dyn MarkingStrategy> + Sync,
{
    if trials < 30 {
        return Err(invalid(format!("need at least 30 trials, got {trials}")));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("K = {k} must lie in 1..={n}")));
    }
    let points: Vec<u32> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let v = uniform_valuations(n, &mut rng);
            let inst = TalentInstance::random(k, t, v, &mut rng)?;
            let mut s = make();
            play(&inst, s.as_mut()).map(|r| r.points)
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = points.iter().map(|&p| p as f64).collect();
    let (mean, ci95) = mean_ci95(&xs);
    Ok(PointsEstimate { mean, ci95, trials })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn single_candidate_mark_all() {
        let inst = TalentInstance::from_sequence(1, 2, vec![3.0], &[0, 0]).unwrap();
        let r = play(&inst, &mut MarkAll).unwrap();
        assert_eq!(r.points, 2);
        assert_eq!(r.per_h, vec![HOutcome::Won; 2]);
    }

    #[test]
    fn mark_all_loses_to_better_candidate() {
        let inst = TalentInstance::from_sequence(2, 1, vec![1.0, 2.0], &[0, 1]).unwrap();
        let r = play(&inst, &mut MarkAll).unwrap();
        assert_eq!(r.points, 0);
        assert_eq!(r.per_h, vec![HOutcome::MarkedBetter]);
    }

    #[test]
    fn mark_second_arrival_wins_iff_worse_arrives_second() {
        // Candidate 0 is worse (the target for K = 2).
        let mut s = FromFn(|v: &ArrivalView| v.position == 1);
        let a = TalentInstance::from_sequence(2, 1, vec![1.0, 2.0], &[1, 0]).unwrap();
        let b = TalentInstance::from_sequence(2, 1, vec![1.0, 2.0], &[0, 1]).unwrap();
        assert_eq!(play(&a, &mut s).unwrap().points, 1);
        assert_eq!(play(&b, &mut s).unwrap().points, 0);
        assert_eq!(play(&b, &mut MarkNever).unwrap().per_h, vec![HOutcome::MissedTarget]);
    }

    #[test]
    fn occurrences_follow_the_sequence() {
        let inst = TalentInstance::from_sequence(1, 2, vec![1.0, 2.0], &[1, 0, 1, 0]).unwrap();
        let occ: Vec<u32> = inst.arrivals().iter().map(|a| a.occurrence).collect();
        assert_eq!(occ, vec![1, 1, 2, 2]);
        assert!(TalentInstance::from_sequence(1, 2, vec![1.0, 2.0], &[1, 1, 1, 0]).is_err());
        assert!(TalentInstance::from_sequence(1, 1, vec![1.0, 1.0], &[0, 1]).is_err());
        assert!(TalentInstance::from_sequence(3, 1, vec![1.0, 2.0], &[0, 1]).is_err());
    }

    #[test]
    fn revealed_rank_matches_brute_force() {
        let mut rng = seeded(8);
        let v = uniform_valuations(30, &mut rng);
        let inst = TalentInstance::random(5, 3, v.clone(), &mut rng).unwrap();
        let mut seen: Vec<f64> = Vec::new();
        let mut s = FromFn(|view: &ArrivalView| {
            if view.occurrence == 1 {
                seen.push(view.valuation);
            }
            let better = seen.iter().filter(|&&x| x > view.valuation).count();
            assert_eq!(view.rank_among_revealed, better + 1);
            assert_eq!(view.revealed, seen.len());
            false
        });
        play(&inst, &mut s).unwrap();
    }

    #[test]
    fn estimate_trivial_cases() {
        let never = estimate_p(1, 1, 5, || Box::new(MarkNever), 50, 1).unwrap();
        assert_eq!(never.mean, 0.0);
        let all = estimate_p(1, 1, 1, || Box::new(MarkAll), 50, 1).unwrap();
        assert_eq!(all.mean, 1.0);
        assert!(estimate_p(1, 1, 1, || Box::new(MarkAll), 29, 1).is_err());
    }

    #[test]
    fn uniform_valuations_are_distinct() {
        let mut rng = seeded(2);
        let mut v = uniform_valuations(500, &mut rng);
        v.sort_by(f64::total_cmp);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v.iter().all(|&x| (0.0..=500.0).contains(&x)));
    }
}
