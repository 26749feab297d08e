//! Property tests over the public API. Oracles are written out here.

use proptest::prelude::*;
use rand::Rng;

use romcover::gen::{gen_proper, gen_reduction_instance, JobClass};
use romcover::opt::{exact_rom_value, DEFAULT_NODE_BUDGET};
use romcover::rng::{seeded, trial_rng};
use romcover::sched::{Algorithm1Reference, GreedyOnline};
use romcover::talent::{play, uniform_valuations, FromFn, HOutcome, ScheduleInduced, TalentInstance};
use romcover::{
    algorithm1_schedule, classify, greedy_schedule, opt_exact, opt_upper_bound, rank_stats, Algo, Instance,
    OnlineAssigner, Order, Provenance, Scale,
};

fn brute_force_opt(sizes: &[f64], m: usize) -> f64 {
    let n = sizes.len() as u32;
    let mut best = 0.0f64;
    for code in 0..(m as u64).pow(n) {
        let mut loads = vec![0.0f64; m];
        let mut c = code;
        for &s in sizes {
            loads[(c % m as u64) as usize] += s;
            c /= m as u64;
        }
        best = best.max(loads.iter().copied().fold(f64::INFINITY, f64::min));
    }
    best
}

fn instance_strategy(max_n: usize, max_m: usize) -> impl Strategy<Value = Instance> {
    (1..=max_m, prop::collection::vec(0.0f64..100.0, 1..=max_n))
        .prop_map(|(m, sizes)| Instance::new(m, sizes).unwrap())
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<_>>()).prop_shuffle()
}

fn instance_and_order(max_n: usize, max_m: usize) -> impl Strategy<Value = (Instance, Order)> {
    instance_strategy(max_n, max_m).prop_flat_map(|inst| {
        let n = inst.n();
        (Just(inst), permutation(n).prop_map(|p| Order::new(p, Provenance::AdversarialGiven).unwrap()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn greedy_meets_both_lower_bounds((inst, order) in instance_and_order(120, 24)) {
        let got = greedy_schedule(&inst, &order).min_load();
        let mut desc = inst.sizes().to_vec();
        desc.sort_by(|a, b| b.total_cmp(a));
        let m = inst.m();
        if desc.len() >= m {
            prop_assert!(got >= desc[m - 1]);
        }
        for i in 1..=m.min(desc.len()) {
            let l: f64 = desc[i - 1..].iter().sum();
            prop_assert!(got >= l / m as f64 - desc[i - 1] - 1e-9 * l.max(1.0));
        }
    }

    #[test]
    fn greedy_conserves_volume((inst, order) in instance_and_order(120, 24)) {
        let s = greedy_schedule(&inst, &order);
        let total: f64 = s.loads().iter().sum();
        prop_assert!((total - inst.total()).abs() <= 1e-9 * inst.total().max(1.0));
        prop_assert_eq!(s.assignment().len(), inst.n());
    }

    #[test]
    fn rank_stats_ignore_order((inst, order) in instance_and_order(60, 8)) {
        let shuffled: Vec<f64> = order.arrivals(&inst).collect();
        let other = Instance::new(inst.m(), shuffled).unwrap();
        let (a, b) = (rank_stats(&inst), rank_stats(&other));
        prop_assert_eq!(a.sorted_sizes(), b.sorted_sizes());
        for i in 1..=inst.n() {
            prop_assert_eq!(a.p(i), b.p(i));
        }
    }

    #[test]
    fn log_and_linear_greedy_agree((inst, order) in instance_and_order(60, 8)) {
        let logs: Vec<f64> = inst.sizes().iter().map(|x| x.ln()).collect();
        let log_inst = Instance::new_log(inst.m(), logs).unwrap();
        let lin = greedy_schedule(&inst, &order);
        let log = greedy_schedule(&log_inst, &order);
        let (a, b) = (lin.min_load(), log.min_load().exp());
        prop_assert!((a - b).abs() <= 1e-6 * a.max(1e-300) || (a == 0.0 && b == 0.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn exact_opt_matches_enumeration(inst in instance_strategy(7, 3)) {
        let r = opt_exact(&inst, DEFAULT_NODE_BUDGET).unwrap();
        let brute = brute_force_opt(inst.sizes(), inst.m());
        prop_assert!((r.value - brute).abs() <= 1e-9 * brute.max(1.0));
        if let Some(w) = &r.witness {
            prop_assert!((w.min_load() - r.value).abs() <= 1e-9 * r.value.max(1.0));
        }
    }

    #[test]
    fn exact_opt_bracketed((inst, order) in instance_and_order(10, 4)) {
        let opt = opt_exact(&inst, DEFAULT_NODE_BUDGET).unwrap().value;
        prop_assert!(opt <= opt_upper_bound(&inst) * (1.0 + 1e-12));
        prop_assert!(greedy_schedule(&inst, &order).min_load() <= opt * (1.0 + 1e-12));
        let permuted: Vec<f64> = order.arrivals(&inst).collect();
        let again = opt_exact(&Instance::new(inst.m(), permuted).unwrap(), DEFAULT_NODE_BUDGET).unwrap().value;
        prop_assert!((opt - again).abs() <= 1e-9 * opt.max(1.0));
    }

    #[test]
    fn rounding_keeps_half_the_optimum(inst in instance_strategy(9, 3)) {
        let opt = opt_exact(&inst, DEFAULT_NODE_BUDGET).unwrap().value;
        let rounded = opt_exact(&inst.rounded_pow2(), DEFAULT_NODE_BUDGET).unwrap().value;
        prop_assert!(rounded >= opt / 2.0);
        prop_assert!(rounded <= opt);
    }

    #[test]
    fn exact_rom_sits_between_worst_order_and_opt(inst in instance_strategy(6, 3)) {
        let v = exact_rom_value(&inst, Algo::Greedy).unwrap();
        let opt = opt_exact(&inst, DEFAULT_NODE_BUDGET).unwrap().value;
        prop_assert!(v <= opt * (1.0 + 1e-12));
        let worst = rank_stats(&inst);
        if inst.n() >= inst.m() {
            prop_assert!(v >= worst.p(inst.m()) * (1.0 - 1e-12));
        }
    }

    #[test]
    fn taxonomy_degree_tracks_large_count(inst in instance_strategy(40, 16), frac in 0.01f64..1.0) {
        let opt = opt_upper_bound(&inst) * frac;
        let t = classify(&inst, opt).unwrap();
        let k = inst.sizes().iter().filter(|&&x| x > t.large_threshold).count();
        prop_assert_eq!(t.k, k);
        let small: f64 = inst.sizes().iter().filter(|&&x| x <= t.large_threshold).sum();
        prop_assert!((t.l_small - small).abs() <= 1e-9 * small.max(1.0));
    }

    #[test]
    fn algorithm1_is_reproducible(seed in any::<u64>(), m in 2usize..20, n in 1usize..150) {
        let mut rng = seeded(seed);
        let sizes: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..10.0)).collect();
        let inst = Instance::new(m, sizes).unwrap();
        let order = Order::uniform(n, &mut rng, seed, 0);
        let a = algorithm1_schedule(&inst, &order, seeded(seed ^ 1), None, None).unwrap();
        let b = algorithm1_schedule(&inst, &order, seeded(seed ^ 1), None, None).unwrap();
        prop_assert_eq!(&a, &b);
        let total: f64 = a.0.loads().iter().sum();
        prop_assert!((total - inst.total()).abs() <= 1e-9 * inst.total().max(1.0));
        prop_assert_eq!(a.1.min_load, a.0.min_load());
    }
}

/// Per-h outcomes recomputed from a log of marks.
fn score_oracle(inst: &TalentInstance, marks: &[bool]) -> Vec<HOutcome> {
    let t = inst.t() as usize;
    let k = inst.k();
    (1..=t as u32)
        .map(|h| {
            let mut target = false;
            let mut better = false;
            for (a, &marked) in inst.arrivals().iter().zip(marks) {
                if marked && a.occurrence == h {
                    let r = inst.rank(a.candidate);
                    target |= r == k;
                    better |= r < k;
                }
            }
            match (target, better) {
                (false, _) => HOutcome::MissedTarget,
                (true, true) => HOutcome::MarkedBetter,
                (true, false) => HOutcome::Won,
            }
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scoring_matches_oracle(seed in any::<u64>(), n in 1usize..30, k_pick in 0usize..30, t in 1u32..6, p in 0.0f64..1.0) {
        let k = 1 + k_pick % n;
        let mut rng = seeded(seed);
        let v = uniform_valuations(n, &mut rng);
        let inst = TalentInstance::random(k, t, v, &mut rng).unwrap();
        let mut marks = Vec::new();
        let mut coin = trial_rng(seed, 1);
        let mut strategy = FromFn(|_: &romcover::talent::ArrivalView<'_>| {
            let m = coin.random_bool(p);
            marks.push(m);
            m
        });
        let r = play(&inst, &mut strategy).unwrap();
        let expect = score_oracle(&inst, &marks);
        prop_assert!(r.points <= t);
        prop_assert_eq!(r.points as usize, expect.iter().filter(|&&o| o == HOutcome::Won).count());
        prop_assert_eq!(r.per_h, expect);
    }

    // Adding marks on better candidates' h-th arrivals never adds wins.
    #[test]
    fn extra_marks_never_help(seed in any::<u64>(), n in 2usize..20, t in 1u32..5, p in 0.0f64..1.0) {
        let k = 1 + (seed as usize) % n;
        let mut rng = seeded(seed);
        let v = uniform_valuations(n, &mut rng);
        let inst = TalentInstance::random(k, t, v, &mut rng).unwrap();
        let mut coin = trial_rng(seed, 2);
        let base: Vec<bool> = (0..inst.arrivals().len()).map(|_| coin.random_bool(p)).collect();
        let sup: Vec<bool> = inst
            .arrivals()
            .iter()
            .zip(&base)
            .map(|(a, &b)| b || inst.rank(a.candidate) < k)
            .collect();
        let run = |marks: &[bool]| {
            let mut i = 0;
            play(&inst, &mut FromFn(|_: &romcover::talent::ArrivalView<'_>| {
                i += 1;
                marks[i - 1]
            }))
            .unwrap()
            .points
        };
        prop_assert!(run(&sup) <= run(&base));
        if k > 1 {
            prop_assert_eq!(run(&sup), 0);
        }
    }

    #[test]
    fn reduction_structure_holds(seed in any::<u64>(), k in 2usize..6, t in 1u32..4) {
        let lambda = 10.0;
        let red = gen_reduction_instance(k, t, lambda, seed).unwrap();
        let m = red.generated.instance.m();
        prop_assert_eq!(m, (k - 1) * t as usize + 1);
        let mut strategy = ScheduleInduced::new(GreedyOnline::new(m, Scale::Log));
        let points = play(&red.talent, &mut strategy).unwrap().points as usize;
        let s = strategy.assigner().schedule();
        let mut large = vec![0usize; m];
        let mut medium = vec![0usize; m];
        for (job, &mach) in s.assignment().iter().enumerate() {
            match red.classes[job] {
                JobClass::Large => large[mach] += 1,
                JobClass::Medium => medium[mach] += 1,
                JobClass::Small => {}
            }
        }
        prop_assert!((0..m).any(|j| large[j] == 0 && medium[j] <= points + 1));
        let opt = red.generated.known_opt.unwrap();
        let witness = red.generated.witness.as_ref().unwrap();
        prop_assert!((witness.min_load() - opt).abs() <= 1e-9 * opt.abs().max(1.0));
        prop_assert!(s.min_load() <= opt + 1e-9 * opt.abs().max(1.0));
    }
}

#[test]
fn orderly_runs_route_no_large_job_to_small_machines() {
    let gi = gen_proper(4096, 3, 40_000, 3).unwrap();
    let tax = gi.taxonomy_hint.clone().unwrap();
    let reference = Algorithm1Reference::new(&gi.instance, &tax);
    let mut orderly = 0;
    for i in 0..40 {
        let mut rng = trial_rng(77, i);
        let order = Order::uniform(gi.instance.n(), &mut rng, 77, i);
        let (_, rep) = algorithm1_schedule(&gi.instance, &order, rng, Some(3), Some(&reference)).unwrap();
        if rep.orderly == Some(true) {
            orderly += 1;
            assert_eq!(rep.events.large_jobs_misrouted_to_small, 0, "trial {i}");
        }
    }
    assert!(orderly > 0, "no orderly run among 40 trials");
}
