//! Sampling + partition scheduler for random-order machine covering.
//!
//! A run first guesses `t` in `{-1, 0, ..., ceil(3/4 log2 m)}`. For `t = -1`
//! it is plain Greedy. Otherwise machines `0..2^t` are *small* and the rest
//! *large*. The first `n/8` arrivals go to large machines and fix the
//! threshold `P_up`; afterwards jobs at or above `P_up` go large, and the
//! randomized threshold `tau` decides which of the remaining jobs go small.
//!
//! Sizes are rounded down to powers of two for every comparison; machine
//! loads accumulate the raw sizes. Inputs whose length is not a multiple of 8
//! are padded with virtual zero-size jobs at uniformly random positions.
//!
//! Randomness is consumed in a fixed sequence (padding positions, then the
//! guess for `t`, then one Bernoulli draw per `tau` coin flip), so a run is
//! reproducible from its rng state.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::{Instance, Order, RankStats, Scale};
use crate::opt::Taxonomy;
use crate::schedule::{LeastLoaded, Schedule};

use super::greedy::GreedyOnline;
use super::OnlineAssigner;

/// Largest guess, `ceil(3/4 * log2 m)`; `-1` for a single machine.
pub fn max_guess(m: usize) -> i32 {
    if m < 2 {
        return -1;
    }
    (0.75 * (m as f64).log2()).ceil() as i32
}

/// Uniform over `{-1, 0, ..., max_guess(m)}`.
pub fn guess_t<R: Rng + ?Sized>(m: usize, rng: &mut R) -> i32 {
    rng.random_range(-1..=max_guess(m))
}

/// Rank of `P_up` among the `n/8` sampled jobs: `(m - 2^t)/8 - sqrt(m)/2`,
/// rounded half-up and clamped to `[1, n/8]`.
pub fn p_up_rank(m: usize, t: i32, n: usize) -> Result<usize> {
    if t < 0 {
        return Err(invalid("p_up_rank needs t >= 0"));
    }
    let sample = n / 8;
    if sample < 1 {
        return Err(invalid(format!("n = {n} leaves no sampling phase")));
    }
    let x = (m as f64 - 2f64.powi(t)) / 8.0 - (m as f64).sqrt() / 2.0;
    let r = (x + 0.5).floor();
    Ok(r.clamp(1.0, sample as f64) as usize)
}

/// Routing counters for one run. Classification into large/small jobs uses a
/// reference [`Taxonomy`] and is only filled when one is attached.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Events {
    pub large_jobs_misrouted_to_small: u64,
    /// Total (linear) size of small jobs that ended on small machines.
    pub small_size_routed_to_small: f64,
    pub tau_updates_total: u64,
    pub tau_updates_fatal: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub min_load: f64,
    /// Effective guess: `-1` whenever the run fell back to Greedy.
    pub t_guessed: i32,
    pub p_up: Option<f64>,
    pub events: Events,
    /// `P_{k - 8 sqrt(m) - 2^t} >= P_up >= P_k` on rounded sizes.
    pub lemma5_event: Option<bool>,
    /// Rank event holds and no fatal `tau` update happened.
    pub orderly: Option<bool>,
    pub all_large_correct: Option<bool>,
}

impl TrialReport {
    fn greedy(min_load: f64) -> Self {
        Self {
            min_load,
            t_guessed: -1,
            p_up: None,
            events: Events::default(),
            lemma5_event: None,
            orderly: None,
            all_large_correct: None,
        }
    }
}

/// Ground truth about an instance used to label a run's routing decisions.
#[derive(Clone, Debug)]
pub struct Algorithm1Reference {
    m: usize,
    k: usize,
    large_threshold: f64,
    rounded_desc: Vec<f64>,
}

impl Algorithm1Reference {
    pub fn new(instance: &Instance, taxonomy: &Taxonomy) -> Self {
        let stats = RankStats::new(&instance.rounded_pow2());
        Self {
            m: instance.m(),
            k: taxonomy.k,
            large_threshold: taxonomy.large_threshold,
            rounded_desc: stats.sorted_sizes().to_vec(),
        }
    }

    fn labeler(&self, t: i32) -> Labeler {
        let min_rounded_large = if self.k >= 1 {
            self.rounded_desc[self.k - 1]
        } else {
            f64::INFINITY
        };
        let upper = (self.k as f64 - 8.0 * (self.m as f64).sqrt() - 2f64.powi(t)).floor();
        let band = (self.k >= 1 && upper >= 1.0).then(|| {
            (
                self.rounded_desc[upper as usize - 1],
                self.rounded_desc[self.k - 1],
            )
        });
        Labeler {
            large_threshold: self.large_threshold,
            min_rounded_large,
            band,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Labeler {
    large_threshold: f64,
    min_rounded_large: f64,
    band: Option<(f64, f64)>,
}

/// Partition-phase state machine for one fixed `t >= 0` over a padded stream.
///
/// Callers feed every padded position, real or virtual, and resolve coin
/// flips themselves: [`PartitionRun::pending_flip`] says whether the next
/// arrival flips and with what success probability.
#[derive(Clone, Debug)]
pub(crate) struct PartitionRun {
    scale: Scale,
    t: i32,
    small: usize,
    sample_len: usize,
    rank: usize,
    coin_prob: f64,
    schedule: Schedule,
    small_pool: LeastLoaded,
    large_pool: LeastLoaded,
    pos: usize,
    sample: Vec<f64>,
    p_up: Option<f64>,
    tau: f64,
    labeler: Option<Labeler>,
    events: Events,
}

impl PartitionRun {
    pub fn new(
        m: usize,
        t: i32,
        n_padded: usize,
        scale: Scale,
        reference: Option<&Algorithm1Reference>,
    ) -> Result<Self> {
        let small = 1usize << t;
        if t < 0 || small >= m {
            return Err(invalid(format!("cannot split {m} machines with t = {t}")));
        }
        if n_padded % 8 != 0 {
            return Err(invalid("padded length must be a multiple of 8"));
        }
        let rank = p_up_rank(m, t, n_padded)?;
        let schedule = Schedule::new(m, scale);
        let small_pool = LeastLoaded::new(0, small, schedule.loads());
        let large_pool = LeastLoaded::new(small, m - small, schedule.loads());
        Ok(Self {
            scale,
            t,
            small,
            sample_len: n_padded / 8,
            rank,
            coin_prob: 1.0 / (9.0 * small as f64 * (m as f64).sqrt()),
            schedule,
            small_pool,
            large_pool,
            pos: 0,
            sample: Vec::with_capacity(n_padded / 8),
            p_up: None,
            tau: scale.zero(),
            labeler: reference.map(|r| r.labeler(t)),
            events: Events::default(),
        })
    }

    pub fn pending_flip(&self, size: f64) -> Option<f64> {
        let p_up = self.p_up?;
        let r = self.scale.round_down_pow2(size);
        (r < p_up && r > self.tau).then_some(self.coin_prob)
    }

    /// Route one arrival. `real = false` marks a padding job, which occupies a
    /// position but is not recorded in the schedule.
    pub fn arrive(&mut self, size: f64, real: bool, flip_success: bool) -> usize {
        let r = self.scale.round_down_pow2(size);
        let to_small = match self.p_up {
            None => {
                self.sample.push(r);
                false
            }
            Some(p_up) if r >= p_up => false,
            Some(_) => {
                if r > self.tau && flip_success {
                    self.tau = r;
                    self.events.tau_updates_total += 1;
                    if self.labeler.is_some_and(|l| r >= l.min_rounded_large) {
                        self.events.tau_updates_fatal += 1;
                    }
                }
                r <= self.tau
            }
        };
        let machine = if to_small {
            self.small_pool.argmin()
        } else {
            self.large_pool.argmin()
        };
        if real {
            self.schedule.assign(machine, size);
            if to_small {
                self.small_pool.update(machine, self.schedule.loads());
            } else {
                self.large_pool.update(machine, self.schedule.loads());
            }
            if let (true, Some(l)) = (to_small, self.labeler) {
                if size > l.large_threshold {
                    self.events.large_jobs_misrouted_to_small += 1;
                } else {
                    self.events.small_size_routed_to_small += self.scale.to_linear(size);
                }
            }
        }
        self.pos += 1;
        if self.pos == self.sample_len {
            self.close_sample();
        }
        machine
    }

    fn close_sample(&mut self) {
        let idx = self.rank - 1;
        let (_, nth, _) = self
            .sample
            .select_nth_unstable_by(idx, |a, b| b.total_cmp(a));
        self.p_up = Some(*nth);
        self.sample = Vec::new();
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn is_small_machine(&self, machine: usize) -> bool {
        machine < self.small
    }

    pub fn report(&self) -> TrialReport {
        let min_load = self.schedule.min_load();
        let labeler = self.labeler;
        let lemma5_event = match (labeler.and_then(|l| l.band), self.p_up) {
            (Some((hi, lo)), Some(p)) => Some(hi >= p && p >= lo),
            _ => None,
        };
        let orderly = lemma5_event.map(|e| e && self.events.tau_updates_fatal == 0);
        TrialReport {
            min_load,
            t_guessed: self.t,
            p_up: self.p_up,
            events: self.events.clone(),
            lemma5_event,
            orderly,
            all_large_correct: labeler.map(|_| self.events.large_jobs_misrouted_to_small == 0),
        }
    }

    pub fn into_schedule(self) -> Schedule {
        self.schedule
    }
}

/// Length after padding to a multiple of 8.
pub fn padded_len(n: usize) -> usize {
    n.div_ceil(8) * 8
}

/// Effective `t`: guesses that cannot split the machines fall back to Greedy.
fn effective_t(m: usize, n_padded: usize, t: i32) -> i32 {
    if t < 0 || m < 2 || t >= usize::BITS as i32 - 1 || (1usize << t) >= m || n_padded < 8 {
        -1
    } else {
        t
    }
}

#[derive(Clone, Debug)]
enum Mode {
    Greedy(GreedyOnline),
    Partition(PartitionRun),
}

/// The full online algorithm (padding, guess, then Greedy or partition),
/// usable one arrival at a time.
#[derive(Clone, Debug)]
pub struct Algorithm1Online<R> {
    rng: R,
    virtual_positions: Vec<usize>,
    next_virtual: usize,
    pos: usize,
    mode: Mode,
}

impl<R: Rng> Algorithm1Online<R> {
    /// `n` real jobs will arrive. `forced_t` overrides the guess.
    pub fn new(
        m: usize,
        n: usize,
        scale: Scale,
        forced_t: Option<i32>,
        reference: Option<&Algorithm1Reference>,
        mut rng: R,
    ) -> Result<Self> {
        if let Some(t) = forced_t {
            if t < -1 {
                return Err(invalid(format!("forced t = {t} is below -1")));
            }
        }
        let n_padded = padded_len(n);
        let mut virtual_positions = index::sample(&mut rng, n_padded, n_padded - n).into_vec();
        virtual_positions.sort_unstable();
        let guessed = match forced_t {
            Some(t) => t,
            None => guess_t(m, &mut rng),
        };
        let mode = match effective_t(m, n_padded, guessed) {
            -1 => Mode::Greedy(GreedyOnline::new(m, scale)),
            t => Mode::Partition(PartitionRun::new(m, t, n_padded, scale, reference)?),
        };
        Ok(Self {
            rng,
            virtual_positions,
            next_virtual: 0,
            pos: 0,
            mode,
        })
    }

    fn feed(&mut self, size: f64, real: bool) -> usize {
        self.pos += 1;
        match &mut self.mode {
            Mode::Greedy(g) => {
                if real {
                    g.assign(size)
                } else {
                    0
                }
            }
            Mode::Partition(run) => {
                let flip = match run.pending_flip(size) {
                    Some(p) => self.rng.random_bool(p),
                    None => false,
                };
                run.arrive(size, real, flip)
            }
        }
    }

    fn feed_virtual_until_real(&mut self) {
        let zero = self.schedule().scale().zero();
        while self.virtual_positions.get(self.next_virtual) == Some(&self.pos) {
            self.next_virtual += 1;
            self.feed(zero, false);
        }
    }

    /// Whether `machine` belongs to the small set (always false under Greedy).
    pub fn is_small_machine(&self, machine: usize) -> bool {
        match &self.mode {
            Mode::Greedy(_) => false,
            Mode::Partition(run) => run.is_small_machine(machine),
        }
    }

    pub fn finish(mut self) -> (Schedule, TrialReport) {
        let zero = self.schedule().scale().zero();
        while self.next_virtual < self.virtual_positions.len() {
            self.next_virtual += 1;
            self.feed(zero, false);
        }
        match self.mode {
            Mode::Greedy(g) => {
                let s = g.into_schedule();
                let report = TrialReport::greedy(s.min_load());
                (s, report)
            }
            Mode::Partition(run) => {
                let report = run.report();
                (run.into_schedule(), report)
            }
        }
    }
}

impl<R: Rng> OnlineAssigner for Algorithm1Online<R> {
    fn assign(&mut self, size: f64) -> usize {
        self.feed_virtual_until_real();
        self.feed(size, true)
    }

    fn schedule(&self) -> &Schedule {
        match &self.mode {
            Mode::Greedy(g) => g.schedule(),
            Mode::Partition(run) => run.schedule(),
        }
    }
}

pub fn algorithm1_schedule<R: Rng>(
    instance: &Instance,
    order: &Order,
    rng: R,
    forced_t: Option<i32>,
    reference: Option<&Algorithm1Reference>,
) -> Result<(Schedule, TrialReport)> {
    let mut run = Algorithm1Online::new(
        instance.m(),
        instance.n(),
        instance.scale(),
        forced_t,
        reference,
        rng,
    )?;
    for size in order.arrivals(instance) {
        run.assign(size);
    }
    Ok(run.finish())
}

/// Support of the guess for `m` machines, with effective values.
pub(crate) fn guess_support(m: usize, n_padded: usize, forced_t: Option<i32>) -> Vec<i32> {
    match forced_t {
        Some(t) => vec![effective_t(m, n_padded, t)],
        None => (-1..=max_guess(m))
            .map(|t| effective_t(m, n_padded, t))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn guess_ranges() {
        assert_eq!(max_guess(16), 3);
        assert_eq!(max_guess(2), 1);
        assert_eq!(max_guess(1), -1);
        let mut rng = seeded(3);
        for _ in 0..1000 {
            let t = guess_t(16, &mut rng);
            assert!((-1..=3).contains(&t));
        }
    }

    #[test]
    fn p_up_rank_examples() {
        assert_eq!(p_up_rank(100, 3, 8000).unwrap(), 7);
        assert_eq!(p_up_rank(16, 2, 80).unwrap(), 1);
        assert_eq!(p_up_rank(10_000, 0, 1_000_000).unwrap(), 1200);
        assert!(p_up_rank(16, 2, 7).is_err());
        // clamp to the sample size
        assert_eq!(p_up_rank(10_000, 0, 800).unwrap(), 100);
    }

    #[test]
    fn forced_minus_one_is_greedy() {
        let inst = Instance::new(3, vec![1.0, 1.0, 1.0, 3.0, 3.0]).unwrap();
        let (s, rep) =
            algorithm1_schedule(&inst, &Order::given(5), seeded(0), Some(-1), None).unwrap();
        assert_eq!(s.min_load(), 1.0);
        assert_eq!(rep.t_guessed, -1);
        assert_eq!(rep.min_load, 1.0);
    }

    #[test]
    fn zero_instance_never_moves_tau() {
        let inst = Instance::new(4, vec![0.0; 8]).unwrap();
        let (s, rep) =
            algorithm1_schedule(&inst, &Order::given(8), seeded(0), Some(1), None).unwrap();
        assert_eq!(s.min_load(), 0.0);
        assert_eq!(rep.t_guessed, 1);
        assert_eq!(rep.events.tau_updates_total, 0);
    }

    #[test]
    fn oversized_guess_falls_back() {
        let inst = Instance::new(4, vec![1.0; 16]).unwrap();
        let (_, rep) =
            algorithm1_schedule(&inst, &Order::given(16), seeded(0), Some(2), None).unwrap();
        assert_eq!(rep.t_guessed, -1);
        assert!(algorithm1_schedule(&inst, &Order::given(16), seeded(0), Some(-2), None).is_err());
    }

    #[test]
    fn sampling_jobs_land_on_large_machines() {
        let sizes: Vec<f64> = (1..=64).map(|i| i as f64).collect();
        let inst = Instance::new(8, sizes).unwrap();
        let mut rng = seeded(9);
        let order = Order::uniform(64, &mut rng, 9, 0);
        let (s, rep) = algorithm1_schedule(&inst, &order, rng, Some(1), None).unwrap();
        assert!(s.assignment()[..8].iter().all(|&mach| mach >= 2));
        let p_up = rep.p_up.unwrap();
        for (j, &mach) in s.assignment().iter().enumerate().skip(8) {
            let r = crate::instance::round_down_pow2(inst.sizes()[order.perm()[j]]);
            if r >= p_up {
                assert!(mach >= 2);
            }
        }
    }

    #[test]
    fn padding_keeps_all_real_jobs() {
        let inst = Instance::new(3, vec![2.0, 5.0, 1.0]).unwrap();
        for seed in 0..20 {
            let (s, _) =
                algorithm1_schedule(&inst, &Order::given(3), seeded(seed), Some(0), None).unwrap();
            assert_eq!(s.assignment().len(), 3);
            let total: f64 = s.loads().iter().sum();
            assert_eq!(total, 8.0);
        }
    }

    #[test]
    fn runs_are_reproducible() {
        let sizes: Vec<f64> = (0..200).map(|i| ((i * 37) % 101) as f64 / 7.0).collect();
        let inst = Instance::new(20, sizes).unwrap();
        let order = Order::uniform(200, &mut seeded(5), 5, 0);
        let a = algorithm1_schedule(&inst, &order, seeded(11), None, None).unwrap();
        let b = algorithm1_schedule(&inst, &order, seeded(11), None, None).unwrap();
        assert_eq!(a, b);
    }

    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        // Coins are supplied by the strategy, so every success pattern is reachable.
        #[test]
        fn partition_routing_invariants(
            m in 3usize..40,
            blocks in 1usize..30,
            raw in prop::collection::vec(0.0f64..1e3, 240),
            coins in prop::collection::vec(any::<bool>(), 240),
            t_pick in 0u32..8,
        ) {
            let n = 8 * blocks;
            let t = (t_pick as i32).min(max_guess(m));
            prop_assume!(t >= 0 && (1usize << t) < m);
            let mut run = PartitionRun::new(m, t, n, Scale::Linear, None).unwrap();
            let mut tau = run.tau;
            for j in 0..n {
                let size = raw[j];
                let flip = run.pending_flip(size).is_some() && coins[j];
                let mach = run.arrive(size, true, flip);
                prop_assert!(run.tau >= tau);
                tau = run.tau;
                if j < n / 8 {
                    prop_assert!(!run.is_small_machine(mach));
                } else {
                    let p_up = run.p_up.unwrap();
                    if crate::instance::round_down_pow2(size) >= p_up {
                        prop_assert!(!run.is_small_machine(mach));
                    }
                }
            }
            let total: f64 = run.schedule().loads().iter().sum();
            let expect: f64 = raw[..n].iter().sum();
            prop_assert!((total - expect).abs() <= 1e-9 * expect.max(1.0));
        }
    }
}
