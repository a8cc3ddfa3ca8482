//! Destination selection for offloaded tasks and the baseline eviction policies.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Destination, NodeId, Task, TaskId, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DestinationRule {
    MinLoad,
    MinCost,
}

impl DestinationRule {
    pub fn as_str(self) -> &'static str {
        match self {
            DestinationRule::MinLoad => "min_load",
            DestinationRule::MinCost => "min_cost",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Baseline {
    /// The knapsack model itself.
    None,
    Random,
    Last,
    Greedy,
}

impl Baseline {
    pub const ALL: [Baseline; 3] = [Baseline::Random, Baseline::Last, Baseline::Greedy];

    pub fn as_str(self) -> &'static str {
        match self {
            Baseline::None => "model",
            Baseline::Random => "random",
            Baseline::Last => "last",
            Baseline::Greedy => "greedy",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CeilingScope {
    /// Quota recomputed from the queue length at every trigger.
    #[default]
    PerTrigger,
    /// Quota over all tasks the node has generated so far in the run.
    Cumulative,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    pub destination_rule: DestinationRule,
    pub baseline: Baseline,
    pub ceiling: f64,
    pub ceiling_scope: CeilingScope,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            destination_rule: DestinationRule::MinLoad,
            baseline: Baseline::None,
            ceiling: 0.10,
            ceiling_scope: CeilingScope::PerTrigger,
        }
    }
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.ceiling > 0.0 && self.ceiling <= 1.0) {
            return Err(Error::Validation {
                key: "ceiling".into(),
                value: self.ceiling.to_string(),
                allowed: "(0, 1]".into(),
            });
        }
        Ok(())
    }

    /// Baselines always send work to the least-loaded peer.
    pub fn effective_rule(&self) -> DestinationRule {
        match self.baseline {
            Baseline::None => self.destination_rule,
            _ => DestinationRule::MinLoad,
        }
    }

    /// Short label such as `model`, `random_10` or `greedy_5`.
    pub fn label(&self) -> String {
        match self.baseline {
            Baseline::None => "model".to_string(),
            b => format!("{}_{}", b.as_str(), (self.ceiling * 100.0).round() as u32),
        }
    }
}

/// Picks the neighbor of `origin` that receives an offloaded task.
///
/// `loads` is indexed by node id. Ties go to the smallest id; a node without
/// neighbors falls back to the Cloud.
pub fn select_destination(
    origin: NodeId,
    topology: &Topology,
    loads: &[f64],
    rule: DestinationRule,
) -> Destination {
    let key = |k: NodeId, cc: f64| match rule {
        DestinationRule::MinLoad => loads[k],
        DestinationRule::MinCost => cc,
    };
    topology
        .neighbors(origin)
        .fold(None::<(NodeId, f64)>, |best, (k, cc)| {
            let v = key(k, cc);
            match best {
                Some((_, bv)) if bv <= v => best,
                _ => Some((k, v)),
            }
        })
        .map_or(Destination::Cloud, |(k, _)| Destination::Node(k))
}

/// `floor(ceiling · queue_len)`.
pub fn eviction_quota(queue_len: usize, ceiling: f64) -> usize {
    (ceiling * queue_len as f64 + 1e-9).floor() as usize
}

/// Chooses up to `n` tasks from `candidates` (queue order, head excluded).
///
/// Returned ids keep queue order.
pub fn baseline_select<R: Rng + ?Sized>(
    candidates: &[Task],
    baseline: Baseline,
    n: usize,
    rng: &mut R,
) -> Vec<TaskId> {
    let n = n.min(candidates.len());
    if n == 0 {
        return Vec::new();
    }
    let mut picked: Vec<usize> = match baseline {
        Baseline::None => Vec::new(),
        Baseline::Random => index::sample(rng, candidates.len(), n).into_vec(),
        Baseline::Last => (candidates.len() - n..candidates.len()).collect(),
        Baseline::Greedy => {
            let mut order: Vec<usize> = (0..candidates.len()).collect();
            order.sort_by(|&a, &b| {
                candidates[b]
                    .l
                    .total_cmp(&candidates[a].l)
                    .then(candidates[a].id.cmp(&candidates[b].id))
            });
            order.truncate(n);
            order
        }
    };
    picked.sort_unstable();
    picked.into_iter().map(|i| candidates[i].id).collect()
}

/// Baseline eviction with the per-trigger quota `floor(ceiling · |queue|)`.
pub fn baseline_evict<R: Rng + ?Sized>(
    queue: &[Task],
    baseline: Baseline,
    ceiling: f64,
    rng: &mut R,
) -> Vec<TaskId> {
    baseline_select(queue, baseline, eviction_quota(queue.len(), ceiling), rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn queue(n: usize) -> Vec<Task> {
        (0..n)
            .map(|i| Task {
                id: i as TaskId,
                dd: 0.5,
                l: ((i * 37) % 20) as f64 / 20.0,
                dl: 0.5,
                arrival_time: i as u64,
                origin_node: 0,
                received: false,
            })
            .collect()
    }

    fn star() -> Topology {
        let mut t = Topology::with_nodes(4);
        t.connect(0, 2, 0.2).unwrap();
        t.connect(0, 3, 0.7).unwrap();
        t.connect(0, 1, 0.9).unwrap();
        t
    }

    #[test]
    fn min_load_and_min_cost() {
        let t = star();
        let loads = [0.0, 2.0, 3.0, 1.0];
        assert_eq!(
            select_destination(0, &t, &loads, DestinationRule::MinLoad),
            Destination::Node(3)
        );
        assert_eq!(
            select_destination(0, &t, &loads, DestinationRule::MinCost),
            Destination::Node(2)
        );
    }

    #[test]
    fn ties_pick_smallest_id() {
        let t = star();
        let loads = [0.0, 1.0, 1.0, 1.0];
        assert_eq!(
            select_destination(0, &t, &loads, DestinationRule::MinLoad),
            Destination::Node(1)
        );
    }

    #[test]
    fn isolated_node_goes_to_cloud() {
        let t = Topology::with_nodes(3);
        assert_eq!(
            select_destination(1, &t, &[0.0; 3], DestinationRule::MinLoad),
            Destination::Cloud
        );
    }

    #[test]
    fn last_takes_most_recent() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(baseline_evict(&queue(20), Baseline::Last, 0.10, &mut rng), vec![18, 19]);
    }

    #[test]
    fn greedy_takes_heaviest() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let q = queue(20);
        let got = baseline_evict(&q, Baseline::Greedy, 0.05, &mut rng);
        assert_eq!(got.len(), 1);
        let max_l = q.iter().map(|t| t.l).fold(0.0, f64::max);
        let heaviest = q.iter().find(|t| t.l == max_l).unwrap().id;
        assert_eq!(got, vec![heaviest]);
    }

    #[test]
    fn small_queue_yields_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for b in Baseline::ALL {
            assert!(baseline_evict(&queue(5), b, 0.10, &mut rng).is_empty());
        }
    }

    #[test]
    fn random_respects_quota() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for len in 0..60 {
            let got = baseline_evict(&queue(len), Baseline::Random, 0.10, &mut rng);
            assert_eq!(got.len(), len / 10);
            let mut dedup = got.clone();
            dedup.dedup();
            assert_eq!(dedup, got);
        }
    }

    #[test]
    fn baselines_force_min_load() {
        let cfg = PolicyConfig {
            destination_rule: DestinationRule::MinCost,
            baseline: Baseline::Greedy,
            ..Default::default()
        };
        assert_eq!(cfg.effective_rule(), DestinationRule::MinLoad);
        assert_eq!(cfg.label(), "greedy_10");
        assert!(PolicyConfig { ceiling: 0.0, ..Default::default() }.validate().is_err());
    }
}
