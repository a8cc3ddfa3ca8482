//! 0-1 knapsack selection of the tasks kept for local execution.
//!
//! Loads are continuous, so they are rounded *up* onto a grid of width
//! `resolution` before the dynamic program runs. Rounding up keeps every
//! selection feasible for the true loads. Among equally valued selections the
//! one that keeps the lowest task ids is returned (comparing inclusion vectors
//! in ascending id order).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::TaskId;
use crate::scalar::Scalar;

/// Largest instance the exhaustive oracle accepts.
pub const BRUTE_FORCE_MAX_ITEMS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnapsackItem<T> {
    pub task_id: TaskId,
    pub doe: T,
    pub load: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance<T> {
    pub items: Vec<KnapsackItem<T>>,
    pub capacity: T,
    pub resolution: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnapsackSolution<T> {
    /// Ascending task ids with `x_j = 1`.
    pub local_set: Vec<TaskId>,
    /// Ascending task ids with `x_j = 0`.
    pub offload_set: Vec<TaskId>,
    pub objective: T,
    /// Sum of the true (undiscretized) loads of `local_set`.
    pub used_load: T,
}

impl<T: Scalar> KnapsackInstance<T> {
    pub fn new(items: Vec<KnapsackItem<T>>, capacity: T) -> Self {
        Self {
            items,
            capacity,
            resolution: T::lit(0.01),
        }
    }

    fn grid_weight(&self, load: T) -> usize {
        // Slack keeps loads that sit on a grid line from rounding up a full step.
        let steps = (load / self.resolution - T::lit(1e-9)).ceil();
        steps.max(T::zero()).to_usize().unwrap_or(usize::MAX)
    }

    fn grid_capacity(&self) -> usize {
        if !(self.capacity > T::zero()) {
            return 0;
        }
        (self.capacity / self.resolution + T::lit(1e-9))
            .floor()
            .to_usize()
            .unwrap_or(usize::MAX)
    }

    /// Items sorted by id with their grid weights.
    fn discretized(&self) -> (Vec<KnapsackItem<T>>, Vec<usize>, usize) {
        let mut items = self.items.clone();
        items.sort_by_key(|it| it.task_id);
        let weights = items.iter().map(|it| self.grid_weight(it.load)).collect();
        (items, weights, self.grid_capacity())
    }
}

fn assemble<T: Scalar>(items: &[KnapsackItem<T>], chosen: &[bool]) -> KnapsackSolution<T> {
    let mut sol = KnapsackSolution {
        local_set: Vec::new(),
        offload_set: Vec::new(),
        objective: T::zero(),
        used_load: T::zero(),
    };
    for (it, &keep) in items.iter().zip(chosen) {
        if keep {
            sol.local_set.push(it.task_id);
            sol.objective = sol.objective + it.doe;
            sol.used_load = sol.used_load + it.load;
        } else {
            sol.offload_set.push(it.task_id);
        }
    }
    sol
}

/// Exact dynamic program over the discretized capacity.
pub fn solve<T: Scalar>(instance: &KnapsackInstance<T>) -> KnapsackSolution<T> {
    let (items, weights, cap) = instance.discretized();
    let total: usize = weights.iter().sum();
    if total <= cap {
        return assemble(&items, &vec![true; items.len()]);
    }
    let excess = total - cap;
    let chosen = if excess < cap {
        keep_by_eviction(&items, &weights, excess)
    } else {
        keep_by_inclusion(&items, &weights, cap)
    };
    assemble(&items, &chosen)
}

fn keep_by_inclusion<T: Scalar>(items: &[KnapsackItem<T>], weights: &[usize], cap: usize) -> Vec<bool> {
    let k = items.len();
    // best[i][c]: optimum over items i.. with c grid units left.
    let width = cap + 1;
    let mut best = vec![T::zero(); (k + 1) * width];
    for i in (0..k).rev() {
        let (row, next) = best.split_at_mut((i + 1) * width);
        let row = &mut row[i * width..];
        let next = &next[..width];
        let w = weights[i];
        for c in 0..width {
            let skip = next[c];
            row[c] = if w <= c {
                skip.max(items[i].doe + next[c - w])
            } else {
                skip
            };
        }
    }
    let mut chosen = vec![false; k];
    let mut c = cap;
    for i in 0..k {
        let w = weights[i];
        let next = &best[(i + 1) * width..(i + 2) * width];
        if w <= c && items[i].doe + next[c - w] >= next[c] {
            chosen[i] = true;
            c -= w;
        }
    }
    chosen
}

/// Same optimum phrased as the cheapest eviction covering `excess` grid
/// units; the table is only `excess + 1` wide.
fn keep_by_eviction<T: Scalar>(items: &[KnapsackItem<T>], weights: &[usize], excess: usize) -> Vec<bool> {
    let k = items.len();
    // least[i][r]: cheapest eviction from items i.. freeing at least r units.
    let width = excess + 1;
    let mut least = vec![T::infinity(); (k + 1) * width];
    least[k * width] = T::zero();
    for i in (0..k).rev() {
        let (row, next) = least.split_at_mut((i + 1) * width);
        let row = &mut row[i * width..];
        let next = &next[..width];
        let w = weights[i];
        for r in 0..width {
            row[r] = next[r].min(items[i].doe + next[r.saturating_sub(w)]);
        }
    }
    let mut chosen = vec![true; k];
    let mut r = excess;
    for i in 0..k {
        let w = weights[i];
        let next = &least[(i + 1) * width..(i + 2) * width];
        if next[r] > items[i].doe + next[r.saturating_sub(w)] {
            chosen[i] = false;
            r = r.saturating_sub(w);
        }
    }
    chosen
}

/// Exhaustive enumeration on the same discretization; differential-test oracle.
pub fn brute_force<T: Scalar>(instance: &KnapsackInstance<T>) -> Result<KnapsackSolution<T>> {
    let k = instance.items.len();
    if k > BRUTE_FORCE_MAX_ITEMS {
        return Err(Error::OracleSize {
            max: BRUTE_FORCE_MAX_ITEMS,
            got: k,
        });
    }
    let (items, weights, cap) = instance.discretized();
    let mut best_mask: u32 = 0;
    let mut best_value = T::zero();
    for mask in 0u32..(1u32 << k) {
        let mut weight = 0usize;
        let mut value = T::zero();
        for i in 0..k {
            if mask & (1 << i) != 0 {
                weight += weights[i];
                value = value + items[i].doe;
            }
        }
        if weight > cap {
            continue;
        }
        let better = value > best_value
            || (value == best_value && {
                // Lower ids first: the lowest differing item decides.
                let diff = mask ^ best_mask;
                diff != 0 && mask & (diff & diff.wrapping_neg()) != 0
            });
        if better {
            best_mask = mask;
            best_value = value;
        }
    }
    let chosen: Vec<bool> = (0..k).map(|i| best_mask & (1 << i) != 0).collect();
    Ok(assemble(&items, &chosen))
}
