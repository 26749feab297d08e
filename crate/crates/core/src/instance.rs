//! Jobs, machines and the rank statistics every analysis is phrased in.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Representation of job sizes and machine loads.
///
/// `Log` stores natural-log values; a size of zero is `-inf`. Steep valuation
/// families span thousands of orders of magnitude, far beyond `f64` range, so
/// they are carried as exponents. Every comparison the schedulers make is
/// monotone in the stored value, so only addition needs care.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scale {
    #[default]
    Linear,
    Log,
}

impl Scale {
    pub fn is_log(self) -> bool {
        self == Scale::Log
    }

    pub fn zero(self) -> f64 {
        match self {
            Scale::Linear => 0.0,
            Scale::Log => f64::NEG_INFINITY,
        }
    }

    pub fn add(self, a: f64, b: f64) -> f64 {
        match self {
            Scale::Linear => a + b,
            Scale::Log => log_add_exp(a, b),
        }
    }

    /// `max(a - b, 0)`.
    pub fn sub_clamped(self, a: f64, b: f64) -> f64 {
        match self {
            Scale::Linear => (a - b).max(0.0),
            Scale::Log => {
                if !(a > b) {
                    f64::NEG_INFINITY
                } else if b == f64::NEG_INFINITY {
                    a
                } else {
                    a + (-(b - a).exp()).ln_1p()
                }
            }
        }
    }

    /// Multiply by a positive real factor.
    pub fn scale_by(self, x: f64, factor: f64) -> f64 {
        debug_assert!(factor > 0.0);
        match self {
            Scale::Linear => x * factor,
            Scale::Log => x + factor.ln(),
        }
    }

    pub fn to_linear(self, x: f64) -> f64 {
        match self {
            Scale::Linear => x,
            Scale::Log => x.exp(),
        }
    }

    pub fn from_linear(self, x: f64) -> f64 {
        match self {
            Scale::Linear => x,
            Scale::Log => x.ln(),
        }
    }

    pub fn round_down_pow2(self, x: f64) -> f64 {
        match self {
            Scale::Linear => round_down_pow2(x),
            Scale::Log => {
                if x == f64::NEG_INFINITY {
                    x
                } else {
                    (x / std::f64::consts::LN_2).floor() * std::f64::consts::LN_2
                }
            }
        }
    }

    fn check(self, x: f64) -> bool {
        match self {
            Scale::Linear => x.is_finite() && x >= 0.0,
            Scale::Log => !x.is_nan() && x != f64::INFINITY,
        }
    }
}

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// Largest power of two (any integer exponent) not exceeding `size`; 0 maps to 0.
pub fn round_down_pow2(size: f64) -> f64 {
    debug_assert!(size >= 0.0 && size.is_finite());
    if size <= 0.0 {
        return 0.0;
    }
    let bits = size.to_bits();
    if size.is_normal() {
        // Keep sign and exponent, drop the mantissa.
        f64::from_bits(bits & 0xFFF0_0000_0000_0000)
    } else {
        let top = 63 - bits.leading_zeros();
        f64::from_bits(1u64 << top)
    }
}

/// `H_m = 1 + 1/2 + ... + 1/m`.
pub fn harmonic(m: usize) -> f64 {
    // Smallest terms first.
    (1..=m).rev().map(|i| 1.0 / i as f64).sum()
}

/// `m` identical machines and a multiset of job sizes. Arrival order lives in [`Order`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct Instance {
    m: usize,
    sizes: Vec<f64>,
    scale: Scale,
}

impl Instance {
    pub fn new(m: usize, sizes: Vec<f64>) -> Result<Self> {
        Self::with_scale(m, sizes, Scale::Linear)
    }

    /// Sizes given as natural-log exponents.
    pub fn new_log(m: usize, exponents: Vec<f64>) -> Result<Self> {
        Self::with_scale(m, exponents, Scale::Log)
    }

    pub fn with_scale(m: usize, mut sizes: Vec<f64>, scale: Scale) -> Result<Self> {
        if m == 0 {
            return Err(invalid("machine count must be at least 1"));
        }
        if let Some((i, x)) = sizes.iter().enumerate().find(|(_, &x)| !scale.check(x)) {
            return Err(invalid(format!("job {i} has invalid size {x}")));
        }
        if scale == Scale::Linear {
            // -0.0 would sort below 0.0 under total_cmp.
            for x in &mut sizes {
                *x += 0.0;
            }
        }
        Ok(Self { m, sizes, scale })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }

    /// Sum of all sizes, `L_1`.
    pub fn total(&self) -> f64 {
        self.sizes
            .iter()
            .fold(self.scale.zero(), |acc, &x| self.scale.add(acc, x))
    }

    /// Same machines, every size rounded down to a power of two.
    pub fn rounded_pow2(&self) -> Instance {
        Instance {
            m: self.m,
            sizes: self
                .sizes
                .iter()
                .map(|&x| self.scale.round_down_pow2(x))
                .collect(),
            scale: self.scale,
        }
    }

    pub fn with_machines(&self, m: usize) -> Result<Instance> {
        Self::with_scale(m, self.sizes.clone(), self.scale)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string())?;
        Ok(())
    }
}

/// On-disk form: `{"m": int, "sizes": [number, ...]}`. Log-domain files add
/// `"log_domain": true` and write a zero-size job (`-inf`) as `null`.
#[derive(Serialize, Deserialize)]
struct InstanceJson {
    m: usize,
    sizes: Vec<Option<f64>>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    log_domain: bool,
}

impl TryFrom<InstanceJson> for Instance {
    type Error = Error;

    fn try_from(raw: InstanceJson) -> Result<Self> {
        let scale = if raw.log_domain {
            Scale::Log
        } else {
            Scale::Linear
        };
        let sizes = raw
            .sizes
            .into_iter()
            .enumerate()
            .map(|(i, x)| match (x, scale) {
                (Some(x), _) => Ok(x),
                (None, Scale::Log) => Ok(f64::NEG_INFINITY),
                (None, Scale::Linear) => Err(invalid(format!("job {i} has null size"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::with_scale(raw.m, sizes, scale)
    }
}

impl From<Instance> for InstanceJson {
    fn from(inst: Instance) -> Self {
        InstanceJson {
            m: inst.m,
            sizes: inst
                .sizes
                .into_iter()
                .map(|x| x.is_finite().then_some(x))
                .collect(),
            log_domain: inst.scale.is_log(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Provenance {
    AdversarialGiven,
    UniformRandom { seed: u64, stream: u64 },
}

/// Arrival order: `perm[j]` is the job index arriving at position `j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Order {
    perm: Vec<usize>,
    provenance: Provenance,
}

impl Order {
    pub fn new(perm: Vec<usize>, provenance: Provenance) -> Result<Self> {
        let mut seen = vec![false; perm.len()];
        for &j in &perm {
            if j >= perm.len() || std::mem::replace(&mut seen[j], true) {
                return Err(invalid("order is not a permutation"));
            }
        }
        Ok(Self { perm, provenance })
    }

    /// Jobs arrive in the order they are listed.
    pub fn given(n: usize) -> Self {
        Self {
            perm: (0..n).collect(),
            provenance: Provenance::AdversarialGiven,
        }
    }

    /// Fisher-Yates shuffle drawn from `rng`; `seed`/`stream` only label the provenance.
    pub fn uniform<R: Rng + ?Sized>(n: usize, rng: &mut R, seed: u64, stream: u64) -> Self {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(rng);
        Self {
            perm,
            provenance: Provenance::UniformRandom { seed, stream },
        }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Sizes in arrival order.
    pub fn arrivals<'a>(&'a self, instance: &'a Instance) -> impl Iterator<Item = f64> + 'a {
        self.perm.iter().map(move |&j| instance.sizes[j])
    }
}

/// Sorted sizes `P_1 >= ... >= P_n` and suffix sums `L_i = P_i + ... + P_n`.
///
/// Equal sizes are ranked by original job index, which fixes the implicit
/// tie-breaker behind "jobs smaller than `P_i`".
#[derive(Clone, Debug, PartialEq)]
pub struct RankStats {
    scale: Scale,
    p: Vec<f64>,
    l: Vec<f64>,
    ranked: Vec<usize>,
}

impl RankStats {
    pub fn new(instance: &Instance) -> Self {
        let sizes = instance.sizes();
        let scale = instance.scale();
        let mut ranked: Vec<usize> = (0..sizes.len()).collect();
        ranked.sort_by(|&a, &b| sizes[b].total_cmp(&sizes[a]).then(a.cmp(&b)));
        let p: Vec<f64> = ranked.iter().map(|&j| sizes[j]).collect();
        let mut l = vec![scale.zero(); p.len()];
        let mut acc = scale.zero();
        for i in (0..p.len()).rev() {
            acc = scale.add(acc, p[i]);
            l[i] = acc;
        }
        Self {
            scale,
            p,
            l,
            ranked,
        }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    /// `P_i`, 1-indexed; zero beyond `n`.
    pub fn p(&self, i: usize) -> f64 {
        assert!(i >= 1, "ranks are 1-indexed");
        self.p.get(i - 1).copied().unwrap_or(self.scale.zero())
    }

    /// `L_i`, 1-indexed; `L_{n+1} = 0`.
    pub fn l(&self, i: usize) -> f64 {
        assert!(i >= 1, "ranks are 1-indexed");
        self.l.get(i - 1).copied().unwrap_or(self.scale.zero())
    }

    pub fn sorted_sizes(&self) -> &[f64] {
        &self.p
    }

    pub fn suffix_sums(&self) -> &[f64] {
        &self.l
    }

    /// Original job index holding rank `i` (1-indexed).
    pub fn job_at_rank(&self, i: usize) -> usize {
        self.ranked[i - 1]
    }
}

pub fn rank_stats(instance: &Instance) -> RankStats {
    RankStats::new(instance)
}
