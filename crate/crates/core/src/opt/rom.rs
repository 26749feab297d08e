//! Exact random-order value `E_sigma[A(J^sigma)]` for tiny instances.
//!
//! Greedy is averaged over all `n!` orders. Algorithm 1 is averaged over all
//! orders of the padded stream (virtual zero jobs are told apart, which makes
//! every padded order equally likely), over its guess for `t`, and over every
//! branch of its `tau` coin flips weighted by probability. For `n <= 8` there
//! are at most seven partition-phase arrivals, so the coin tree has at most
//! `2^7` leaves per order and guess; the expansion is always exact.

use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::sched::{guess_support, padded_len, Algo, GreedyOnline, OnlineAssigner, PartitionRun};

/// Largest `n` accepted by [`exact_rom_value`].
pub const EXACT_ROM_MAX_N: usize = 8;

/// Calls `visit` on every permutation of `items` (Heap's algorithm).
fn for_each_permutation<T: Copy>(items: &mut [T], mut visit: impl FnMut(&[T])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

fn greedy_min_load(m: usize, instance: &Instance, stream: impl Iterator<Item = f64>) -> f64 {
    let mut g = GreedyOnline::new(m, instance.scale());
    for s in stream {
        g.assign(s);
    }
    g.schedule().min_load()
}

/// Expected min load of a partition run over the remaining padded stream,
/// branching on every coin flip.
fn expand_flips(mut run: PartitionRun, stream: &[Option<f64>], zero: f64) -> f64 {
    for (i, item) in stream.iter().enumerate() {
        let size = item.unwrap_or(zero);
        if let Some(p) = run.pending_flip(size) {
            let mut hit = run.clone();
            hit.arrive(size, item.is_some(), true);
            run.arrive(size, item.is_some(), false);
            let rest = &stream[i + 1..];
            return p * expand_flips(hit, rest, zero) + (1.0 - p) * expand_flips(run, rest, zero);
        }
        run.arrive(size, item.is_some(), false);
    }
    run.schedule().min_load()
}

/// Exact random-order value of `algo` on `instance`; `n` must be at most
/// [`EXACT_ROM_MAX_N`]. A forced guess in `algo` replaces the uniform guess.
pub fn exact_rom_value(instance: &Instance, algo: Algo) -> Result<f64> {
    let n = instance.n();
    if n > EXACT_ROM_MAX_N {
        return Err(Error::TooLarge {
            what: "exact_rom_value job count",
            n,
            limit: EXACT_ROM_MAX_N,
        });
    }
    if instance.scale().is_log() {
        return Err(Error::LogDomainUnsupported("exact_rom_value"));
    }
    let m = instance.m();
    if m == 1 {
        return Ok(instance.total());
    }
    let sizes = instance.sizes();
    match algo {
        Algo::Greedy => {
            let mut items: Vec<f64> = sizes.to_vec();
            let mut sum = 0.0;
            let mut count = 0u64;
            for_each_permutation(&mut items, |p| {
                sum += greedy_min_load(m, instance, p.iter().copied());
                count += 1;
            });
            Ok(sum / count as f64)
        }
        Algo::Algorithm1 { forced_t } => {
            let n_padded = padded_len(n);
            let support = guess_support(m, n_padded, forced_t);
            let zero = instance.scale().zero();
            let mut items: Vec<Option<f64>> = sizes.iter().map(|&s| Some(s)).collect();
            items.resize(n_padded, None);
            let mut total = 0.0;
            for &t in &support {
                let mut sum = 0.0;
                let mut count = 0u64;
                let mut err = None;
                for_each_permutation(&mut items, |p| {
                    count += 1;
                    if t < 0 {
                        sum += greedy_min_load(m, instance, p.iter().flatten().copied());
                        return;
                    }
                    match PartitionRun::new(m, t, n_padded, instance.scale(), None) {
                        Ok(run) => sum += expand_flips(run, p, zero),
                        Err(e) => err = Some(e),
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                total += sum / count as f64;
            }
            Ok(total / support.len() as f64)
        }
    }
}
