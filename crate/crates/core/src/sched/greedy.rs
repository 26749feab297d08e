use crate::instance::{Instance, Order, Scale};
use crate::schedule::{LeastLoaded, Schedule};

use super::OnlineAssigner;

/// Graham's list scheduling: every job goes to a least loaded machine,
/// ties to the lowest machine id.
#[derive(Clone, Debug)]
pub struct GreedyOnline {
    schedule: Schedule,
    pool: LeastLoaded,
}

impl GreedyOnline {
    pub fn new(m: usize, scale: Scale) -> Self {
        let schedule = Schedule::new(m, scale);
        let pool = LeastLoaded::new(0, m, schedule.loads());
        Self { schedule, pool }
    }

    pub fn into_schedule(self) -> Schedule {
        self.schedule
    }
}

impl OnlineAssigner for GreedyOnline {
    fn assign(&mut self, size: f64) -> usize {
        let machine = self.pool.argmin();
        self.schedule.assign(machine, size);
        self.pool.update(machine, self.schedule.loads());
        machine
    }

    fn schedule(&self) -> &Schedule {
        &self.schedule
    }
}

pub fn greedy_schedule(instance: &Instance, order: &Order) -> Schedule {
    let mut g = GreedyOnline::new(instance.m(), instance.scale());
    for size in order.arrivals(instance) {
        g.assign(size);
    }
    g.into_schedule()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(m: usize, sizes: &[f64]) -> Schedule {
        let inst = Instance::new(m, sizes.to_vec()).unwrap();
        greedy_schedule(&inst, &Order::given(inst.n()))
    }

    #[test]
    fn figure1_adversarial_order() {
        let s = run(3, &[1.0, 1.0, 1.0, 3.0, 3.0]);
        assert_eq!(s.min_load(), 1.0);
        assert_eq!(s.loads(), &[4.0, 4.0, 1.0]);
    }

    #[test]
    fn second_job_goes_to_empty_machine() {
        assert_eq!(run(2, &[4.0, 4.0]).min_load(), 4.0);
    }

    #[test]
    fn third_job_joins_the_lighter_machine() {
        let s = run(2, &[1.0, 2.0, 3.0]);
        assert_eq!(s.loads(), &[4.0, 2.0]);
        assert_eq!(s.min_load(), 2.0);
    }

    #[test]
    fn ties_go_to_lowest_id() {
        let s = run(3, &[0.0, 0.0, 0.0]);
        assert_eq!(s.assignment(), &[0, 0, 0]);
        let s = run(3, &[1.0, 1.0, 1.0, 1.0]);
        assert_eq!(s.assignment(), &[0, 1, 2, 0]);
    }
}
