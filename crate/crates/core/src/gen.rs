//! Instance families: the adversarial Greedy example, proper instances of a
//! given degree, steep valuation sets and the talent contest reduction.

use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::instance::{Instance, Order};
use crate::opt::{classify, few_large_limit, InstanceKind, Taxonomy};
use crate::rng::seeded;
use crate::sched::max_guess;
use crate::schedule::Schedule;
use crate::talent::TalentInstance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Figure1,
    Proper,
    Reduction,
    Uniform,
    /// Loaded from a file without a sidecar.
    External,
}

impl Family {
    pub fn as_str(&self) -> &'static str {
        match self {
            Family::Figure1 => "figure1",
            Family::Proper => "proper",
            Family::Reduction => "reduction",
            Family::Uniform => "uniform",
            Family::External => "external",
        }
    }
}

/// An instance plus what its generator knows about it. `known_opt` is in the
/// instance's scale (an exponent for log-domain instances).
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratedInstance {
    pub instance: Instance,
    pub known_opt: Option<f64>,
    pub taxonomy_hint: Option<Taxonomy>,
    pub family: Family,
    pub params: Value,
    /// Schedule reaching `known_opt`, jobs in listed order.
    pub witness: Option<Schedule>,
    /// Arrival order the family prescribes, if any.
    pub order: Option<Order>,
}

/// Metadata written next to a generated instance file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub known_opt: Option<f64>,
    pub family: Family,
    pub params: Value,
    pub log_domain: bool,
}

/// `dir/name.json` -> `dir/name.sidecar.json`.
pub fn sidecar_path(instance_path: &Path) -> PathBuf {
    instance_path.with_extension("sidecar.json")
}

impl GeneratedInstance {
    fn plain(instance: Instance, family: Family, params: Value) -> Self {
        Self {
            instance,
            known_opt: None,
            taxonomy_hint: None,
            family,
            params,
            witness: None,
            order: None,
        }
    }

    pub fn sidecar(&self) -> Sidecar {
        Sidecar {
            known_opt: self.known_opt,
            family: self.family,
            params: self.params.clone(),
            log_domain: self.instance.scale().is_log(),
        }
    }

    /// Reattach sidecar metadata to a loaded instance. The taxonomy is
    /// recomputed from `known_opt`.
    pub fn from_parts(instance: Instance, sidecar: Option<Sidecar>) -> Result<Self> {
        let Some(sc) = sidecar else {
            return Ok(Self::plain(instance, Family::External, Value::Null));
        };
        if sc.log_domain != instance.scale().is_log() {
            return Err(invalid("sidecar log_domain flag disagrees with the instance"));
        }
        let taxonomy_hint = sc.known_opt.map(|o| classify(&instance, o)).transpose()?;
        Ok(Self {
            instance,
            known_opt: sc.known_opt,
            taxonomy_hint,
            family: sc.family,
            params: sc.params,
            witness: None,
            order: None,
        })
    }

    /// Write the instance to `path` and its sidecar next to it.
    pub fn write(&self, path: &Path) -> Result<PathBuf> {
        self.instance.write_json(path)?;
        let side = sidecar_path(path);
        std::fs::write(&side, serde_json::to_string_pretty(&self.sidecar())?)?;
        Ok(side)
    }

    /// Read an instance and, when present, its sidecar.
    pub fn read(path: &Path) -> Result<Self> {
        let instance = Instance::read_json(path)?;
        let side = sidecar_path(path);
        let sidecar = if side.exists() {
            Some(serde_json::from_str(&std::fs::read_to_string(side)?)?)
        } else {
            None
        };
        Self::from_parts(instance, sidecar)
    }
}

/// `m` unit jobs then `m - 1` jobs of size `m`. Listed order is adversarial
/// for Greedy (minimum load 1); the optimum is `m`.
pub fn gen_figure1(m: usize) -> Result<GeneratedInstance> {
    if m < 2 {
        return Err(invalid("figure1 needs m >= 2"));
    }
    let mf = m as f64;
    let mut sizes = vec![1.0; m];
    sizes.extend(std::iter::repeat(mf).take(m - 1));
    let instance = Instance::new(m, sizes)?;
    // Ones share the last machine; each big job gets its own.
    let assign: Vec<usize> = (0..m).map(|_| m - 1).chain(0..m - 1).collect();
    let order = Order::given(instance.n());
    let witness = Schedule::from_assignment(&instance, &order, &assign)?;
    let taxonomy_hint = Some(classify(&instance, mf)?);
    Ok(GeneratedInstance {
        known_opt: Some(mf),
        taxonomy_hint,
        family: Family::Figure1,
        params: json!({ "m": m }),
        witness: Some(witness),
        order: Some(order),
        instance,
    })
}

/// `n` i.i.d. sizes uniform on `[0, 1)`.
pub fn gen_uniform(n: usize, m: usize, seed: u64) -> Result<GeneratedInstance> {
    let mut rng = seeded(seed);
    let sizes = (0..n).map(|_| rng.random::<f64>()).collect();
    let instance = Instance::new(m, sizes)?;
    Ok(GeneratedInstance::plain(
        instance,
        Family::Uniform,
        json!({ "n": n, "m": m, "seed": seed }),
    ))
}

/// Proper instance of degree `d` with optimum 1.
///
/// `k = m - 2^d` large jobs are uniform on `[1, 2]`. The `n - k` small jobs
/// form `2^d` groups, each summing to exactly 1: sizes are log-uniform over a
/// factor-2 range and rescaled, the last job of a group taking the remainder.
/// The witness puts each large job on its own machine and each group on one
/// of the remaining machines; no schedule does better because the machines
/// without a large job can only share the small total `2^d`.
pub fn gen_proper(m: usize, d: u32, n: usize, seed: u64) -> Result<GeneratedInstance> {
    const OPT0: f64 = 1.0;
    if m < 2 || d as i32 > max_guess(m) {
        return Err(invalid(format!("degree {d} out of range for m = {m}")));
    }
    let groups = 1usize << d;
    if groups >= m {
        return Err(invalid(format!("2^{d} >= m = {m}")));
    }
    let k = m - groups;
    if k as f64 <= few_large_limit(m) {
        return Err(invalid(format!(
            "k = {k} <= m - m^(3/4)/50 = {:.4}: such an instance is simple; m is too small for d = {d}",
            few_large_limit(m)
        )));
    }
    if n < 8 * k || n - k < groups {
        return Err(invalid(format!("n = {n} must be at least 8k = {}", 8 * k)));
    }
    let threshold = OPT0 / (100.0 * (m as f64).powf(0.25));
    let mut rng = seeded(seed);

    let mut jobs: Vec<(f64, usize)> = Vec::with_capacity(n);
    for machine in 0..k {
        jobs.push((rng.random_range(OPT0..=2.0 * OPT0), machine));
    }
    let n_small = n - k;
    for g in 0..groups {
        let len = n_small / groups + usize::from(g < n_small % groups);
        let raw: Vec<f64> = (0..len).map(|_| 2f64.powf(rng.random::<f64>())).collect();
        let scale = OPT0 / raw.iter().sum::<f64>();
        let mut partial = 0.0;
        for (i, &x) in raw.iter().enumerate() {
            let size = if i + 1 == len { OPT0 - partial } else { x * scale };
            if !(size > 0.0 && size <= threshold) {
                return Err(invalid(format!(
                    "n = {n} too small: a small job of size {size:.3e} exceeds the threshold {threshold:.3e}"
                )));
            }
            partial += size;
            jobs.push((size, k + g));
        }
    }
    jobs.shuffle(&mut rng);
    let (sizes, assign): (Vec<f64>, Vec<usize>) = jobs.into_iter().unzip();
    let instance = Instance::new(m, sizes)?;
    let order = Order::given(n);
    let witness = Schedule::from_assignment(&instance, &order, &assign)?;
    let taxonomy = classify(&instance, OPT0)?;
    if taxonomy.kind != (InstanceKind::Proper { degree: d }) {
        return Err(invalid(format!("generated instance classifies as {:?}", taxonomy.kind)));
    }
    Ok(GeneratedInstance {
        instance,
        known_opt: Some(OPT0),
        taxonomy_hint: Some(taxonomy),
        family: Family::Proper,
        params: json!({ "m": m, "d": d, "n": n, "seed": seed }),
        witness: Some(witness),
        order: None,
    })
}

/// Valuations as natural-log exponents, pairwise at least `ln lambda` apart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SteepValuations {
    pub exponents: Vec<f64>,
    pub lambda: f64,
    pub attempts: usize,
}

const STEEP_ATTEMPTS: usize = 100;

/// One raw draw: `v_i` uniform on `[0, n]`, mapped to `-v_i ln mu` with
/// `mu = lambda^{n(n-1)/eps'}`.
pub fn draw_steep_raw<R: Rng + ?Sized>(n: usize, lambda: f64, eps_prime: f64, rng: &mut R) -> Vec<f64> {
    let ln_mu = (n * n.saturating_sub(1)) as f64 / eps_prime * lambda.ln();
    (0..n)
        .map(|_| -rng.random_range(0.0..=n as f64) * ln_mu)
        .collect()
}

/// Whether all pairwise gaps are at least `ln lambda` (equal values fail
/// unless `lambda = 1`).
pub fn is_lambda_steep(exponents: &[f64], lambda: f64) -> bool {
    let mut e = exponents.to_vec();
    e.sort_by(f64::total_cmp);
    let gap = lambda.ln();
    e.windows(2).all(|w| w[1] - w[0] >= gap && (w[1] > w[0] || gap == 0.0))
}

pub fn gen_lambda_steep(n: usize, lambda: f64, eps_prime: f64, seed: u64) -> Result<SteepValuations> {
    let mut rng = seeded(seed);
    lambda_steep_from(n, lambda, eps_prime, &mut rng)
}

fn lambda_steep_from<R: Rng + ?Sized>(n: usize, lambda: f64, eps_prime: f64, rng: &mut R) -> Result<SteepValuations> {
    if n == 0 {
        return Err(invalid("need at least one valuation"));
    }
    if !(lambda >= 1.0) || !lambda.is_finite() {
        return Err(invalid(format!("lambda = {lambda} must be >= 1")));
    }
    if !(eps_prime > 0.0 && eps_prime < 1.0) {
        return Err(invalid(format!("eps' = {eps_prime} outside (0, 1)")));
    }
    for attempt in 1..=STEEP_ATTEMPTS {
        let exponents = draw_steep_raw(n, lambda, eps_prime, rng);
        if is_lambda_steep(&exponents, lambda) {
            return Ok(SteepValuations {
                exponents,
                lambda,
                attempts: attempt,
            });
        }
    }
    Err(Error::Exhausted {
        what: "lambda-steep valuations",
        attempts: STEEP_ATTEMPTS,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum JobClass {
    Large,
    Medium,
    Small,
}

/// A talent contest turned into a covering instance: one job per arrival,
/// sized by the arriving candidate's valuation, listed in arrival order.
#[derive(Clone, Debug)]
pub struct ReductionInstance {
    pub generated: GeneratedInstance,
    pub talent: TalentInstance,
    /// Class of each job (= arrival position).
    pub classes: Vec<JobClass>,
    pub lambda: f64,
}

/// `eps'` used for the steep valuations of reduction instances.
pub const REDUCTION_EPS_PRIME: f64 = 0.5;

/// Reduction instance with `K + 3` candidates.
pub fn gen_reduction_instance(k: usize, t: u32, lambda: f64, seed: u64) -> Result<ReductionInstance> {
    gen_reduction_with_candidates(k, t, lambda, k + 3, seed)
}

/// `m = (K-1)T + 1` machines. The `K-1` best candidates give the large jobs,
/// the `K`-th best the medium ones, the rest the small ones. Some machine gets
/// no large job, so the optimum is the whole non-large volume: `T` times the
/// `K`-th valuation plus whatever small jobs arrive. Sizes are log-domain.
pub fn gen_reduction_with_candidates(
    k: usize,
    t: u32,
    lambda: f64,
    candidates: usize,
    seed: u64,
) -> Result<ReductionInstance> {
    if k < 2 || t < 1 {
        return Err(invalid("reduction needs K >= 2 and T >= 1"));
    }
    if !(lambda > t as f64) {
        return Err(invalid(format!("lambda = {lambda} must exceed T = {t}")));
    }
    if candidates < k {
        return Err(invalid(format!("{candidates} candidates cannot have a {k}-th best")));
    }
    let mut rng = seeded(seed);
    let steep = lambda_steep_from(candidates, lambda, REDUCTION_EPS_PRIME, &mut rng)?;
    let talent = TalentInstance::random(k, t, steep.exponents.clone(), &mut rng)?;
    let m = (k - 1) * t as usize + 1;
    let e = &steep.exponents;

    let mut sizes = Vec::with_capacity(talent.arrivals().len());
    let mut classes = Vec::with_capacity(sizes.capacity());
    let mut assign = Vec::with_capacity(sizes.capacity());
    let mut next_large = 0;
    for a in talent.arrivals() {
        sizes.push(e[a.candidate]);
        let rank = talent.rank(a.candidate);
        let class = match rank.cmp(&k) {
            std::cmp::Ordering::Less => JobClass::Large,
            std::cmp::Ordering::Equal => JobClass::Medium,
            std::cmp::Ordering::Greater => JobClass::Small,
        };
        classes.push(class);
        assign.push(match class {
            JobClass::Large => {
                next_large += 1;
                next_large - 1
            }
            _ => m - 1,
        });
    }
    let instance = Instance::new_log(m, sizes)?;
    let order = Order::given(instance.n());
    let witness = Schedule::from_assignment(&instance, &order, &assign)?;
    let known_opt = witness.min_load();
    Ok(ReductionInstance {
        generated: GeneratedInstance {
            instance,
            known_opt: Some(known_opt),
            taxonomy_hint: None,
            family: Family::Reduction,
            params: json!({ "K": k, "T": t, "lambda": lambda, "candidates": candidates, "seed": seed }),
            witness: Some(witness),
            order: Some(order),
        },
        talent,
        classes,
        lambda,
    })
}
