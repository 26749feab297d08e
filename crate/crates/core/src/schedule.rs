use serde::Serialize;

use crate::error::{invalid, Result};
use crate::instance::{Instance, Order, Scale};

/// Assignment of arrival positions to machines with the resulting loads.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Schedule {
    #[serde(skip)]
    scale: Scale,
    assignment: Vec<usize>,
    loads: Vec<f64>,
}

impl Schedule {
    pub fn new(m: usize, scale: Scale) -> Self {
        Self {
            scale,
            assignment: Vec::new(),
            loads: vec![scale.zero(); m],
        }
    }

    /// Rebuild a schedule from a per-arrival machine list.
    pub fn from_assignment(instance: &Instance, order: &Order, assignment: &[usize]) -> Result<Self> {
        if order.len() != instance.n() || assignment.len() != instance.n() {
            return Err(invalid("assignment length does not match instance"));
        }
        let mut s = Self::new(instance.m(), instance.scale());
        for (size, &machine) in order.arrivals(instance).zip(assignment) {
            if machine >= instance.m() {
                return Err(invalid(format!("machine {machine} out of range")));
            }
            s.assign(machine, size);
        }
        Ok(s)
    }

    pub fn assign(&mut self, machine: usize, size: f64) {
        self.loads[machine] = self.scale.add(self.loads[machine], size);
        self.assignment.push(machine);
    }

    pub fn m(&self) -> usize {
        self.loads.len()
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn loads(&self) -> &[f64] {
        &self.loads
    }

    /// Minimum over all machines; an empty machine has load zero.
    pub fn min_load(&self) -> f64 {
        self.loads.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Least-loaded machine among the contiguous id range `start..start + len`,
/// ties to the lowest id. Tournament tree; each node caches the winner's
/// load so an update never reads the load vector.
#[derive(Clone, Debug)]
pub(crate) struct LeastLoaded {
    start: usize,
    leaves: usize,
    tree: Vec<Node>,
}

#[derive(Clone, Copy, Debug)]
struct Node {
    load: f64,
    id: u32,
}

const PAD: Node = Node {
    load: f64::INFINITY,
    id: u32::MAX,
};

impl LeastLoaded {
    pub fn new(start: usize, len: usize, loads: &[f64]) -> Self {
        assert!(len >= 1 && start + len <= loads.len());
        assert!(start + len < u32::MAX as usize);
        let leaves = len.next_power_of_two();
        let mut tree = vec![PAD; 2 * leaves];
        for i in 0..len {
            tree[leaves + i] = Node {
                load: loads[start + i],
                id: (start + i) as u32,
            };
        }
        for node in (1..leaves).rev() {
            tree[node] = Self::winner(tree[2 * node], tree[2 * node + 1]);
        }
        Self { start, leaves, tree }
    }

    #[inline]
    fn winner(a: Node, b: Node) -> Node {
        // Left ids are below right ids, so ties keep `a`. Padding loses
        // against anything, including an infinite load, by id.
        if b.load < a.load || (a.id == u32::MAX && b.id != u32::MAX) {
            b
        } else {
            a
        }
    }

    #[inline]
    pub fn argmin(&self) -> usize {
        self.tree[1].id as usize
    }

    /// Call after `loads[machine]` changed.
    #[inline]
    pub fn update(&mut self, machine: usize, loads: &[f64]) {
        let mut node = self.leaves + machine - self.start;
        self.tree[node].load = loads[machine];
        while node > 1 {
            node /= 2;
            self.tree[node] = Self::winner(self.tree[2 * node], self.tree[2 * node + 1]);
        }
    }
}
