//! Monte Carlo estimation of random-order performance and the statistical
//! checks built on it.
//!
//! Trials run on the rayon pool. Each trial owns the stream
//! [`trial_rng`]`(seed, i)` and results are reduced in trial-index order, so a
//! report is bit-identical for any number of worker threads.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rand::seq::index;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{invalid, Error, Result};
use crate::gen::{gen_figure1, gen_proper, GeneratedInstance};
use crate::instance::{harmonic, rank_stats, Order};
use crate::rng::trial_rng;
use crate::sched::{p_up_rank, padded_len, run_algo, Algo, Algorithm1Reference, TrialReport};

/// Fewest trials any estimator accepts.
pub const MIN_TRIALS: usize = 30;

const Z95: f64 = 1.96;

/// Sample mean and normal-approximation 95% half-width.
pub fn mean_ci95(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, Z95 * (var / n as f64).sqrt())
}

/// Wilson score interval at 95%.
pub fn wilson(count: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = count as f64 / n;
    let z2 = Z95 * Z95;
    let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRate {
    pub count: u64,
    pub trials: u64,
    pub rate: f64,
    pub wilson_low: f64,
    pub wilson_high: f64,
}

impl EventRate {
    pub fn new(count: u64, trials: u64) -> Self {
        let (wilson_low, wilson_high) = wilson(count, trials);
        Self {
            count,
            trials,
            rate: if trials == 0 { f64::NAN } else { count as f64 / trials as f64 },
            wilson_low,
            wilson_high,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub family: String,
    pub params: Value,
    pub m: usize,
    pub n: usize,
    pub algo: String,
    pub trials: usize,
    pub seed: u64,
    pub mean_min_load: Option<f64>,
    pub ci95: Option<f64>,
    pub known_opt: Option<f64>,
    /// `OPT / mean` when the optimum is known.
    pub empirical_ratio: Option<f64>,
    pub event_rates: BTreeMap<String, EventRate>,
    /// Mean total size of small jobs placed on small machines.
    pub mean_small_to_small: Option<f64>,
    /// Total size of small jobs, from the attached taxonomy.
    pub l_small: Option<f64>,
}

/// One trial's contribution, kept small so huge instances are not retained.
#[derive(Clone, Debug)]
struct TrialSummary {
    min_load: f64,
    report: Option<TrialReport>,
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(invalid(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    Ok(())
}

/// Run `algo` on `trials` uniformly random orders of `gi`.
pub fn estimate_rom(gi: &GeneratedInstance, algo: Algo, trials: usize, seed: u64) -> Result<EstimateReport> {
    check_trials(trials)?;
    let inst = &gi.instance;
    if inst.scale().is_log() {
        return Err(Error::LogDomainUnsupported("estimate_rom"));
    }
    let reference = match (algo, &gi.taxonomy_hint) {
        (Algo::Algorithm1 { .. }, Some(tax)) => Some(Algorithm1Reference::new(inst, tax)),
        _ => None,
    };
    let n = inst.n();
    let summaries: Vec<TrialSummary> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let order = Order::uniform(n, &mut rng, seed, i);
            let out = run_algo(inst, &order, algo, &mut rng, reference.as_ref())?;
            Ok(TrialSummary {
                min_load: out.min_load(),
                report: out.report,
            })
        })
        .collect::<Result<_>>()?;

    let loads: Vec<f64> = summaries.iter().map(|s| s.min_load).collect();
    let (mean, ci) = mean_ci95(&loads);
    let mut event_rates = BTreeMap::new();
    let mut small_to_small = Vec::new();
    if let Algo::Algorithm1 { .. } = algo {
        let reports: Vec<&TrialReport> = summaries.iter().filter_map(|s| s.report.as_ref()).collect();
        let mut tally = |name: &str, get: fn(&TrialReport) -> Option<bool>| {
            let vals: Vec<bool> = reports.iter().filter_map(|r| get(r)).collect();
            if !vals.is_empty() {
                let hits = vals.iter().filter(|&&b| b).count() as u64;
                event_rates.insert(name.to_string(), EventRate::new(hits, vals.len() as u64));
            }
        };
        tally("lemma5_event", |r| r.lemma5_event);
        tally("orderly", |r| r.orderly);
        tally("all_large_correct", |r| r.all_large_correct);
        tally("greedy_fallback", |r| Some(r.t_guessed < 0));
        if reference.is_some() {
            small_to_small = reports
                .iter()
                .filter(|r| r.t_guessed >= 0)
                .map(|r| r.events.small_size_routed_to_small)
                .collect();
        }
    }
    Ok(EstimateReport {
        family: gi.family.as_str().to_string(),
        params: gi.params.clone(),
        m: inst.m(),
        n,
        algo: algo.to_string(),
        trials,
        seed,
        mean_min_load: Some(mean),
        ci95: Some(ci),
        known_opt: gi.known_opt,
        empirical_ratio: gi.known_opt.map(|o| o / mean),
        event_rates,
        mean_small_to_small: (!small_to_small.is_empty()).then(|| mean_ci95(&small_to_small).0),
        l_small: gi.taxonomy_hint.as_ref().map(|t| t.l_small),
    })
}

/// Frequency of `P_{k - 8 sqrt(m) - 2^d} >= P_up >= P_k` on a proper
/// instance, with `P_up` taken from the first `n/8` arrivals of a uniform
/// order at `t = d`. Sizes are compared unrounded.
pub fn lemma5_test(m: usize, d: u32, n: usize, trials: usize, seed: u64) -> Result<EstimateReport> {
    check_trials(trials)?;
    let upper = lemma5_upper_rank(m, d)?;
    let gi = gen_proper(m, d, n, seed)?;
    lemma5_on(&gi, d, upper, trials, seed)
}

/// `floor(k - 8 sqrt(m) - 2^d)` with `k = m - 2^d`, refused below 1.
fn lemma5_upper_rank(m: usize, d: u32) -> Result<usize> {
    let k = m.checked_sub(1 << d).ok_or_else(|| invalid("2^d exceeds m"))?;
    let upper = (k as f64 - 8.0 * (m as f64).sqrt() - 2f64.powi(d as i32)).floor();
    if upper < 1.0 {
        return Err(invalid(format!(
            "rank k - 8 sqrt(m) - 2^d = {upper} < 1: m = {m} is too small for d = {d}"
        )));
    }
    Ok(upper as usize)
}

fn lemma5_on(gi: &GeneratedInstance, d: u32, upper: usize, trials: usize, seed: u64) -> Result<EstimateReport> {
    let inst = &gi.instance;
    let tax = gi
        .taxonomy_hint
        .as_ref()
        .ok_or_else(|| invalid("instance has no taxonomy"))?;
    let stats = rank_stats(inst);
    let (hi, lo) = (stats.p(upper), stats.p(tax.k));
    let n = inst.n();
    let n_padded = padded_len(n);
    let sample = n_padded / 8;
    let rank = p_up_rank(inst.m(), d as i32, n_padded)?;
    let zero = inst.scale().zero();
    let hits: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            // The first n/8 padded arrivals form a uniform subset of the padded stream.
            let mut drawn: Vec<f64> = index::sample(&mut rng, n_padded, sample)
                .into_iter()
                .map(|j| inst.sizes().get(j).copied().unwrap_or(zero))
                .collect();
            let (_, p_up, _) = drawn.select_nth_unstable_by(rank - 1, |a, b| b.total_cmp(a));
            hi >= *p_up && *p_up >= lo
        })
        .collect();
    let count = hits.iter().filter(|&&h| h).count() as u64;
    let mut event_rates = BTreeMap::new();
    event_rates.insert("lemma5_event".to_string(), EventRate::new(count, trials as u64));
    Ok(EstimateReport {
        family: gi.family.as_str().to_string(),
        params: gi.params.clone(),
        m: inst.m(),
        n,
        algo: format!("sample[t={d}]"),
        trials,
        seed,
        mean_min_load: None,
        ci95: None,
        known_opt: gi.known_opt,
        empirical_ratio: None,
        event_rates,
        mean_small_to_small: None,
        l_small: Some(tax.l_small),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Pass,
    Fail,
    /// The bound is not positive at this size, so there is nothing to test.
    Vacuous,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass | Verdict::Vacuous => 0,
            Verdict::Fail => 1,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Vacuous => "VACUOUS",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Report {
    pub estimate: EstimateReport,
    /// `(pi^2/3 * H_m^2 / m)^{1/3}`.
    pub c: f64,
    /// `(1/2 - C) H_m / m * OPT`.
    pub threshold: f64,
    pub verdict: Verdict,
    /// `2 m / H_m * 1.1`.
    pub ratio_cap: f64,
    pub ratio_within_cap: bool,
}

pub fn theorem3_constant(m: usize) -> f64 {
    let h = harmonic(m);
    (std::f64::consts::PI.powi(2) / 3.0 * h * h / m as f64).cbrt()
}

/// Greedy's random-order value on the adversarial family against
/// `(1/2 - C) H_m / m * OPT`, with `3 ci95` slack.
pub fn theorem3_test(m: usize, trials: usize, seed: u64) -> Result<Theorem3Report> {
    let gi = gen_figure1(m)?;
    let estimate = estimate_rom(&gi, Algo::Greedy, trials, seed)?;
    let h = harmonic(m);
    let opt = m as f64;
    let c = theorem3_constant(m);
    let threshold = (0.5 - c) * h / m as f64 * opt;
    let mean = estimate.mean_min_load.unwrap_or(f64::NAN);
    let ci = estimate.ci95.unwrap_or(f64::NAN);
    let verdict = if threshold <= 0.0 {
        Verdict::Vacuous
    } else if mean >= threshold - 3.0 * ci {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    let ratio_cap = 2.0 * m as f64 / h * 1.1;
    let ratio_within_cap = estimate.empirical_ratio.is_some_and(|r| r <= ratio_cap);
    Ok(Theorem3Report {
        estimate,
        c,
        threshold,
        verdict,
        ratio_cap,
        ratio_within_cap,
    })
}

/// Event columns written by [`csv_emit`].
pub const CSV_EVENTS: [&str; 3] = ["lemma5_event", "orderly", "all_large_correct"];

fn fmt_f(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => format!("{v:.16e}"),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

/// One CSV row per report, header first. Floats carry 17 significant digits.
pub fn csv_emit<W: std::io::Write>(reports: &[EstimateReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = [
        "family", "params", "m", "n", "algo", "trials", "seed", "mean", "ci95", "known_opt", "ratio",
        "mean_small_to_small", "l_small",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for e in CSV_EVENTS {
        header.push(format!("{e}_count"));
        header.push(format!("{e}_trials"));
        header.push(format!("{e}_rate"));
    }
    w.write_record(&header)?;
    for r in reports {
        let mut row = vec![
            r.family.clone(),
            r.params.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.algo.clone(),
            r.trials.to_string(),
            r.seed.to_string(),
            fmt_f(r.mean_min_load),
            fmt_f(r.ci95),
            fmt_f(r.known_opt),
            fmt_f(r.empirical_ratio),
            fmt_f(r.mean_small_to_small),
            fmt_f(r.l_small),
        ];
        for e in CSV_EVENTS {
            match r.event_rates.get(e) {
                Some(er) => {
                    row.push(er.count.to_string());
                    row.push(er.trials.to_string());
                    row.push(fmt_f(Some(er.rate)));
                }
                None => row.extend([String::new(), String::new(), String::new()]),
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// [`csv_emit`] to a file.
pub fn csv_emit_path(reports: &[EstimateReport], path: &Path) -> Result<()> {
    csv_emit(reports, std::fs::File::create(path)?)
}
