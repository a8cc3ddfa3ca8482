//! Domain types shared across the crate: tasks, nodes, topology, epochs and decisions.

use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qos::KdeWindow;

pub type TaskId = u64;
pub type NodeId = usize;

/// A unit of work described by its characteristics `{dd, l, dl}`, all in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    /// Data dependency score.
    pub dd: f64,
    /// Load fraction the task places on its host.
    pub l: f64,
    /// Deadline score; lower is more urgent.
    pub dl: f64,
    /// Generation tick.
    pub arrival_time: u64,
    pub origin_node: NodeId,
    /// Set on tasks received from a peer; such tasks are never offloaded again
    /// unless re-offloading is enabled.
    pub received: bool,
}

impl Task {
    pub fn characteristics_in_range(&self) -> bool {
        [self.dd, self.l, self.dl]
            .iter()
            .all(|v| (0.0..=1.0).contains(v))
    }
}

/// Draws a fresh task with characteristics independently uniform on `[0, 1]`.
pub fn generate_task<R: Rng + ?Sized>(rng: &mut R, tick: u64, id: TaskId, origin: NodeId) -> Task {
    Task {
        id,
        dd: rng.gen::<f64>(),
        l: rng.gen::<f64>(),
        dl: rng.gen::<f64>(),
        arrival_time: tick,
        origin_node: origin,
        received: false,
    }
}

/// A task waiting in (or at the head of) a node queue.
#[derive(Clone, Debug, PartialEq)]
pub struct QueuedTask {
    pub task: Task,
    /// Tick at which the task entered this node's queue.
    pub enqueued_at: u64,
    /// Work units still needed before completion.
    pub remaining_work: f64,
}

/// Running totals of the epoch currently being filled.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EpochAccumulator {
    pub completed: usize,
    pub rt_sum: f64,
    pub start: f64,
}

/// Closed-epoch statistics. `rt` and `tp` are normalized to `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub rt: f64,
    pub tp: f64,
    pub task_count: usize,
    pub duration: f64,
}

/// An edge node: FIFO queue, load capacity and sliding QoS windows.
#[derive(Clone, Debug)]
pub struct NodeState {
    pub id: NodeId,
    pub queue: VecDeque<QueuedTask>,
    /// Load capacity `L`.
    pub capacity: f64,
    /// Work units processed per tick.
    pub speed: f64,
    pub rt_window: KdeWindow<f64>,
    pub tp_window: KdeWindow<f64>,
    pub epoch: EpochAccumulator,
}

impl NodeState {
    pub fn new(
        id: NodeId,
        capacity: f64,
        speed: f64,
        rt_window: KdeWindow<f64>,
        tp_window: KdeWindow<f64>,
    ) -> Self {
        Self {
            id,
            queue: VecDeque::new(),
            capacity,
            speed,
            rt_window,
            tp_window,
            epoch: EpochAccumulator::default(),
        }
    }

    /// Sum of `l` over every queued task, head included.
    pub fn queue_load(&self) -> f64 {
        self.queue.iter().map(|q| q.task.l).sum()
    }

    pub fn head(&self) -> Option<&QueuedTask> {
        self.queue.front()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyKind {
    Complete,
    /// Erdős–Rényi edges with probability `p` on top of a random spanning tree.
    Random { p: f64 },
}

/// Undirected weighted graph of nodes with symmetric communication costs `cc`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    adjacency: Vec<BTreeMap<NodeId, f64>>,
    pub cloud_cc: Option<f64>,
}

impl Topology {
    /// Empty graph over `n` nodes; edges are added with [`Topology::connect`].
    pub fn with_nodes(n: usize) -> Self {
        Self {
            adjacency: vec![BTreeMap::new(); n],
            cloud_cc: None,
        }
    }

    /// Adds (or replaces) the undirected edge `i - k`.
    pub fn connect(&mut self, i: NodeId, k: NodeId, cc: f64) -> Result<()> {
        if i == k || i >= self.len() || k >= self.len() {
            return Err(Error::InvalidConfig(format!("bad edge {i} - {k}")));
        }
        if !(cc > 0.0 && cc.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "communication cost must be positive, got {cc}"
            )));
        }
        self.adjacency[i].insert(k, cc);
        self.adjacency[k].insert(i, cc);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.adjacency.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjacency.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.len()
    }

    /// Neighbors of `i` in ascending id order, with their edge costs.
    pub fn neighbors(&self, i: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.adjacency[i].iter().map(|(&k, &cc)| (k, cc))
    }

    pub fn degree(&self, i: NodeId) -> usize {
        self.adjacency[i].len()
    }

    pub fn cc(&self, i: NodeId, k: NodeId) -> Option<f64> {
        self.adjacency.get(i)?.get(&k).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeMap::len).sum::<usize>() / 2
    }

    /// Every stored edge once, as `(i, k, cc)` with `i < k`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, f64)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, adj)| {
            adj.iter()
                .filter(move |(&k, _)| k > i)
                .map(move |(&k, &cc)| (i, k, cc))
        })
    }

    pub fn is_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.len()];
        let mut frontier = VecDeque::from([0]);
        seen[0] = true;
        while let Some(i) = frontier.pop_front() {
            for &k in self.adjacency[i].keys() {
                if !seen[k] {
                    seen[k] = true;
                    frontier.push_back(k);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }
}

/// Uniform draw on `(0, 1]`.
fn positive_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    1.0 - rng.gen::<f64>()
}

/// Builds a connected topology with communication costs uniform on `(0, 1]`.
pub fn build_topology<R: Rng + ?Sized>(n: usize, kind: TopologyKind, rng: &mut R) -> Result<Topology> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!(
            "topology needs at least 2 nodes, got {n}"
        )));
    }
    let mut topo = Topology::with_nodes(n);
    match kind {
        TopologyKind::Complete => {
            for i in 0..n {
                for k in (i + 1)..n {
                    topo.connect(i, k, positive_unit(rng))?;
                }
            }
        }
        TopologyKind::Random { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "edge probability must be in (0, 1], got {p}"
                )));
            }
            // Spanning tree over a random permutation guarantees connectivity.
            let mut order: Vec<NodeId> = (0..n).collect();
            order.shuffle(rng);
            for idx in 1..n {
                let parent = order[rng.gen_range(0..idx)];
                topo.connect(order[idx], parent, positive_unit(rng))?;
            }
            for i in 0..n {
                for k in (i + 1)..n {
                    if topo.cc(i, k).is_none() && rng.gen::<f64>() < p {
                        topo.connect(i, k, positive_unit(rng))?;
                    }
                }
            }
        }
    }
    Ok(topo)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Local,
    Offload,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Destination {
    Node(NodeId),
    Cloud,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecisionRecord {
    pub task_id: TaskId,
    pub node_id: NodeId,
    pub decision: Decision,
    pub destination: Destination,
    pub lc: f64,
    pub oc: f64,
    pub tick: u64,
}

impl DecisionRecord {
    pub fn is_consistent(&self) -> bool {
        self.decision == Decision::Local || self.destination != Destination::None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_tasks_are_in_range_and_deterministic() {
        let mut a = ChaCha8Rng::seed_from_u64(7);
        let mut b = ChaCha8Rng::seed_from_u64(7);
        for i in 0..100 {
            let ta = generate_task(&mut a, 0, i, 0);
            let tb = generate_task(&mut b, 0, i, 0);
            assert!(ta.characteristics_in_range());
            assert_eq!(ta.arrival_time, 0);
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn uniform_generator_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 100_000;
        let mean = (0..n)
            .map(|i| generate_task(&mut rng, 3, i, 0).dd)
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.5).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn complete_graph_edge_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = build_topology(5, TopologyKind::Complete, &mut rng).unwrap();
        assert_eq!(t.edge_count(), 10);
        assert!(t.edges().all(|(_, _, cc)| cc > 0.0 && cc <= 1.0));
    }

    #[test]
    fn two_node_graph_is_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = build_topology(2, TopologyKind::Complete, &mut rng).unwrap();
        assert_eq!(t.edge_count(), 1);
        assert_eq!(t.cc(0, 1), t.cc(1, 0));
        assert!(t.cc(0, 1).is_some());
    }

    #[test]
    fn random_graph_is_connected() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let t = build_topology(100, TopologyKind::Random { p: 0.1 }, &mut rng).unwrap();
            assert!(t.is_connected());
            assert!(t.node_ids().all(|i| t.degree(i) >= 1));
            for (i, k, cc) in t.edges() {
                assert_eq!(t.cc(k, i), Some(cc));
            }
        }
    }

    #[test]
    fn rejects_tiny_or_bad_configs() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(build_topology(1, TopologyKind::Complete, &mut rng).is_err());
        assert!(build_topology(5, TopologyKind::Random { p: 0.0 }, &mut rng).is_err());
        let mut t = Topology::with_nodes(3);
        assert!(t.connect(0, 1, 0.0).is_err());
        assert!(t.connect(1, 1, 0.5).is_err());
    }

    #[test]
    fn offload_record_needs_destination() {
        let rec = DecisionRecord {
            task_id: 1,
            node_id: 0,
            decision: Decision::Offload,
            destination: Destination::None,
            lc: 0.1,
            oc: 0.2,
            tick: 0,
        };
        assert!(!rec.is_consistent());
    }
}
