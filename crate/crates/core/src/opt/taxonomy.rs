use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instance::Instance;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimpleReason {
    /// `n < m`
    FewerJobsThanMachines,
    /// `k >= m`
    ManyLargeJobs,
    /// `k <= m - m^{3/4}/50`
    FewLargeJobs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum InstanceKind {
    Simple { reason: SimpleReason },
    Proper { degree: u32 },
}

/// Large/small split of an instance relative to its optimum.
///
/// A job is large when its size exceeds `OPT / (100 m^{1/4})`. Values are in
/// the instance's scale. Only the analysis looks at this; no online
/// scheduler does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Taxonomy {
    pub opt: f64,
    pub large_threshold: f64,
    /// Number of large jobs.
    pub k: usize,
    pub kind: InstanceKind,
    /// Total size of small jobs, `L_{k+1}`.
    pub l_small: f64,
}

impl Taxonomy {
    pub fn is_large(&self, size: f64) -> bool {
        size > self.large_threshold
    }

    pub fn is_simple(&self) -> bool {
        matches!(self.kind, InstanceKind::Simple { .. })
    }

    pub fn degree(&self) -> Option<u32> {
        match self.kind {
            InstanceKind::Proper { degree } => Some(degree),
            InstanceKind::Simple { .. } => None,
        }
    }
}

/// `m - m^{3/4}/50`: at most this many large jobs makes an instance simple.
pub fn few_large_limit(m: usize) -> f64 {
    m as f64 - (m as f64).powf(0.75) / 50.0
}

/// `ceil(log2 x)` for `x >= 1`.
pub(crate) fn ceil_log2(x: usize) -> u32 {
    x.next_power_of_two().trailing_zeros()
}

/// Classify `instance` given its optimum `opt` (in the instance's scale).
/// The simple-instance clauses are checked in order and the first match is reported.
pub fn classify(instance: &Instance, opt: f64) -> Result<Taxonomy> {
    let scale = instance.scale();
    let bad = if scale.is_log() {
        opt.is_nan() || opt == f64::INFINITY
    } else {
        !(opt >= 0.0) || !opt.is_finite()
    };
    if bad {
        return Err(invalid(format!("opt must be a non-negative real, got {opt}")));
    }
    let m = instance.m();
    let n = instance.n();
    let large_threshold = scale.scale_by(opt, 1.0 / (100.0 * (m as f64).powf(0.25)));
    let k = instance
        .sizes()
        .iter()
        .filter(|&&x| x > large_threshold)
        .count();
    let l_small = instance
        .sizes()
        .iter()
        .filter(|&&x| x <= large_threshold)
        .fold(scale.zero(), |acc, &x| scale.add(acc, x));

    let kind = if n < m {
        InstanceKind::Simple {
            reason: SimpleReason::FewerJobsThanMachines,
        }
    } else if k >= m {
        InstanceKind::Simple {
            reason: SimpleReason::ManyLargeJobs,
        }
    } else if k as f64 <= few_large_limit(m) {
        InstanceKind::Simple {
            reason: SimpleReason::FewLargeJobs,
        }
    } else {
        InstanceKind::Proper {
            degree: ceil_log2(m - k),
        }
    };
    Ok(Taxonomy {
        opt,
        large_threshold,
        k,
        kind,
        l_small,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fewer_jobs_than_machines() {
        let inst = Instance::new(4, vec![9.0, 1.0, 2.0]).unwrap();
        let t = classify(&inst, 0.0).unwrap();
        assert_eq!(
            t.kind,
            InstanceKind::Simple {
                reason: SimpleReason::FewerJobsThanMachines
            }
        );
    }

    #[test]
    fn many_large_jobs() {
        let mut sizes = vec![100.0; 16];
        sizes.extend(std::iter::repeat(1e-6).take(100));
        let inst = Instance::new(16, sizes).unwrap();
        let t = classify(&inst, 100.0).unwrap();
        assert_eq!(t.large_threshold, 0.5);
        assert_eq!(t.k, 16);
        assert_eq!(
            t.kind,
            InstanceKind::Simple {
                reason: SimpleReason::ManyLargeJobs
            }
        );
        assert!((t.l_small - 1e-4).abs() < 1e-15);
    }

    #[test]
    fn few_large_jobs_at_m16() {
        // 16 - 16^{3/4}/50 = 16 - 8/50 = 15.84
        assert!((few_large_limit(16) - 15.84).abs() < 1e-12);
        let mut sizes = vec![100.0; 14];
        sizes.extend(std::iter::repeat(0.01).take(40));
        let inst = Instance::new(16, sizes).unwrap();
        let t = classify(&inst, 100.0).unwrap();
        assert_eq!(t.k, 14);
        assert_eq!(
            t.kind,
            InstanceKind::Simple {
                reason: SimpleReason::FewLargeJobs
            }
        );
    }

    #[test]
    fn proper_degree() {
        // m = 10^4: limit is 10^4 - 20, so k = 9992 is proper with d = 3.
        let m = 10_000;
        let mut sizes = vec![1.0; 9992];
        sizes.extend(std::iter::repeat(1e-4).take(100_000));
        let inst = Instance::new(m, sizes).unwrap();
        let t = classify(&inst, 1.0).unwrap();
        assert_eq!(t.kind, InstanceKind::Proper { degree: 3 });
        assert_eq!(t.degree(), Some(3));
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(8), 3);
    }

    #[test]
    fn negative_opt_is_rejected() {
        let inst = Instance::new(2, vec![1.0, 1.0]).unwrap();
        assert!(classify(&inst, -1.0).is_err());
        assert!(classify(&inst, f64::NAN).is_err());
    }
}
