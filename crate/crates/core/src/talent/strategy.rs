use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, Error, Result};
use crate::sched::OnlineAssigner;

use super::ArrivalView;

/// An online marking rule. Returning `Err` aborts the game.
pub trait MarkingStrategy {
    fn decide(&mut self, view: &ArrivalView<'_>) -> Result<bool>;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MarkNever;

impl MarkingStrategy for MarkNever {
    fn decide(&mut self, _: &ArrivalView<'_>) -> Result<bool> {
        Ok(false)
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct MarkAll;

impl MarkingStrategy for MarkAll {
    fn decide(&mut self, _: &ArrivalView<'_>) -> Result<bool> {
        Ok(true)
    }
}

/// Wraps a closure.
pub struct FromFn<F>(pub F);

impl<F: FnMut(&ArrivalView<'_>) -> bool> MarkingStrategy for FromFn<F> {
    fn decide(&mut self, view: &ArrivalView<'_>) -> Result<bool> {
        Ok((self.0)(view))
    }
}

pub const DEFAULT_WARMUP: f64 = 0.25;

/// After a warmup fraction of all arrivals, mark an arrival when its rank
/// among revealed candidates, scaled up to the full field, is at least `K`.
#[derive(Clone, Copy, Debug)]
pub struct Quantile {
    pub warmup: f64,
}

impl Default for Quantile {
    fn default() -> Self {
        Self {
            warmup: DEFAULT_WARMUP,
        }
    }
}

impl MarkingStrategy for Quantile {
    fn decide(&mut self, view: &ArrivalView<'_>) -> Result<bool> {
        if (view.position as f64) < self.warmup * view.total_arrivals() as f64 {
            return Ok(false);
        }
        let estimate = view.rank_among_revealed as f64 * view.n as f64 / view.revealed as f64;
        Ok(estimate >= view.k as f64)
    }
}

/// Feeds each arrival, as a job of size equal to its valuation, to a
/// covering scheduler and marks it when its machine already holds a job of
/// the same size.
#[derive(Clone, Debug)]
pub struct ScheduleInduced<A> {
    assigner: A,
    contents: Vec<Vec<f64>>,
}

impl<A: OnlineAssigner> ScheduleInduced<A> {
    pub fn new(assigner: A) -> Self {
        let m = assigner.schedule().m();
        Self {
            assigner,
            contents: vec![Vec::new(); m],
        }
    }

    pub fn assigner(&self) -> &A {
        &self.assigner
    }

    /// Sizes on each machine, in arrival order.
    pub fn contents(&self) -> &[Vec<f64>] {
        &self.contents
    }

    pub fn into_inner(self) -> A {
        self.assigner
    }
}

impl<A: OnlineAssigner> MarkingStrategy for ScheduleInduced<A> {
    fn decide(&mut self, view: &ArrivalView<'_>) -> Result<bool> {
        let machine = self.assigner.assign(view.valuation);
        let bin = self
            .contents
            .get_mut(machine)
            .ok_or_else(|| Error::Strategy(format!("scheduler chose machine {machine}")))?;
        let mark = bin.contains(&view.valuation);
        bin.push(view.valuation);
        Ok(mark)
    }
}

/// Strategies selectable by name.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StrategyKind {
    Never,
    All,
    Quantile { warmup: f64 },
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [
        StrategyKind::Never,
        StrategyKind::All,
        StrategyKind::Quantile {
            warmup: DEFAULT_WARMUP,
        },
    ];

    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Never => "never",
            StrategyKind::All => "all",
            StrategyKind::Quantile { .. } => "quantile",
        }
    }

    pub fn build(&self) -> Box<dyn MarkingStrategy> {
        match *self {
            StrategyKind::Never => Box::new(MarkNever),
            StrategyKind::All => Box::new(MarkAll),
            StrategyKind::Quantile { warmup } => Box::new(Quantile { warmup }),
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "never" => Ok(StrategyKind::Never),
            "all" => Ok(StrategyKind::All),
            "quantile" => Ok(StrategyKind::Quantile {
                warmup: DEFAULT_WARMUP,
            }),
            other => {
                let w = other
                    .strip_prefix("quantile:")
                    .and_then(|w| w.parse::<f64>().ok())
                    .filter(|w| (0.0..1.0).contains(w))
                    .ok_or_else(|| invalid(format!("unknown strategy {other:?}")))?;
                Ok(StrategyKind::Quantile { warmup: w })
            }
        }
    }
}
