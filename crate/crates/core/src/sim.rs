//! Synchronous-round discrete-event simulation of an edge node ecosystem.
//!
//! One tick runs: deliveries of tasks in transit, new arrivals, execution of
//! queue heads, epoch bookkeeping, QoS assessment and, on a trigger, the local
//! vs offload decision followed by destination selection.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::doe::{fit_expert_model, DoeNetwork, DoeTrainingConfig, ExpertRule};
use crate::error::{Error, Result};
use crate::knapsack::{solve, KnapsackInstance, KnapsackItem};
use crate::metrics::{
    aprf, average_cost, classify_decision, local_cost, offload_cost, relative_difference,
    run_cost, Aprf, ConfusionCounts, CostLedger,
};
use crate::model::{
    build_topology, generate_task, Decision, DecisionRecord, Destination, NodeId, NodeState,
    QueuedTask, Task, TaskId, Topology, TopologyKind,
};
use crate::policy::{
    baseline_select, eviction_quota, select_destination, Baseline, CeilingScope, PolicyConfig,
};
use crate::qos::{assess, epoch_tp, normalize, Bandwidth, Kernel, KdeWindow, QosAssessment, QosConfig};

/// Node counts used by the comparison grid.
pub const NODE_GRID: [usize; 5] = [5, 10, 20, 50, 100];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrivalConfig {
    /// Inclusive range of the per-tick, per-node batch size.
    pub min: u32,
    pub max: u32,
}

/// Epoch and window parameters of the per-node QoS monitor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorConfig {
    pub window: usize,
    pub bandwidth: Bandwidth<f64>,
    pub kernel: Kernel,
    /// Completed tasks per epoch.
    pub epoch_size: usize,
    /// Response time (ticks) that maps to 1.0 after normalization.
    pub rt_scale: f64,
    /// Throughput (tasks per tick) that maps to 1.0 after normalization.
    pub max_throughput: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScorerConfig {
    /// Network trained on the rule dataset at campaign start.
    Network,
    /// Network loaded from a model file.
    ModelFile { path: std::path::PathBuf },
    /// The labelling rule itself, no learning.
    Rule { rule: ExpertRule },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_nodes: usize,
    pub itrs: u64,
    pub n_experiments: usize,
    pub seed: u64,
    pub qos: QosConfig<f64>,
    pub monitor: MonitorConfig,
    pub policy: PolicyConfig,
    /// Cost constant `b`.
    pub b: f64,
    pub arrival: ArrivalConfig,
    /// Work units per unit of task load.
    pub service_scale: f64,
    /// Node capacity `L` is drawn uniformly from this range.
    pub capacity_min: f64,
    pub capacity_max: f64,
    /// Work units processed per tick per unit of capacity.
    pub speed_per_capacity: f64,
    /// Transit delay of an offload is `ceil(cc · transit_scale)` ticks, at least one.
    pub transit_scale: f64,
    pub topology: TopologyKind,
    pub cloud_cc: f64,
    /// Subtract the running task's load from `L` before solving the knapsack.
    pub residual_capacity: bool,
    pub allow_reoffload: bool,
    pub knapsack_resolution: f64,
    pub scorer: ScorerConfig,
    pub doe: DoeTrainingConfig,
    pub record_decisions: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_nodes: 20,
            itrs: 100,
            n_experiments: 100,
            seed: 42,
            qos: QosConfig::default(),
            monitor: MonitorConfig {
                window: 50,
                bandwidth: Bandwidth::default(),
                kernel: Kernel::Epanechnikov,
                epoch_size: 2,
                rt_scale: 7.0,
                max_throughput: 6.0,
            },
            policy: PolicyConfig::default(),
            b: 0.5,
            arrival: ArrivalConfig { min: 0, max: 2 },
            service_scale: 1.0,
            capacity_min: 5.0,
            capacity_max: 10.0,
            speed_per_capacity: 0.064,
            transit_scale: 3.0,
            topology: TopologyKind::Random { p: 0.1 },
            cloud_cc: 0.8,
            residual_capacity: true,
            allow_reoffload: false,
            knapsack_resolution: 0.01,
            scorer: ScorerConfig::Network,
            doe: DoeTrainingConfig::default(),
            record_decisions: true,
        }
    }
}

fn invalid(key: &str, value: impl ToString, allowed: &str) -> Error {
    Error::Validation {
        key: key.into(),
        value: value.to_string(),
        allowed: allowed.into(),
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.qos.validate()?;
        self.policy.validate()?;
        if self.n_nodes < 2 {
            return Err(invalid("n_nodes", self.n_nodes, ">= 2"));
        }
        if self.itrs == 0 {
            return Err(invalid("itrs", self.itrs, ">= 1"));
        }
        if self.n_experiments == 0 {
            return Err(invalid("n_experiments", self.n_experiments, ">= 1"));
        }
        if !(0.0..=1.0).contains(&self.b) {
            return Err(invalid("b", self.b, "[0, 1]"));
        }
        if self.arrival.min > self.arrival.max {
            return Err(invalid(
                "arrival_min",
                self.arrival.min,
                "<= arrival_max",
            ));
        }
        if !(self.capacity_min > 0.0 && self.capacity_min <= self.capacity_max) {
            return Err(invalid(
                "capacity_min",
                self.capacity_min,
                "0 < capacity_min <= capacity_max",
            ));
        }
        for (key, v) in [
            ("service_scale", self.service_scale),
            ("speed_per_capacity", self.speed_per_capacity),
            ("rt_scale", self.monitor.rt_scale),
            ("max_throughput", self.monitor.max_throughput),
            ("knapsack_resolution", self.knapsack_resolution),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, v, "> 0"));
            }
        }
        if !(self.transit_scale >= 0.0) {
            return Err(invalid("transit_scale", self.transit_scale, ">= 0"));
        }
        if !(self.cloud_cc > 0.0 && self.cloud_cc <= 1.0) {
            return Err(invalid("cloud_cc", self.cloud_cc, "(0, 1]"));
        }
        if self.monitor.window == 0 {
            return Err(invalid("window", 0, ">= 1"));
        }
        if self.monitor.epoch_size == 0 {
            return Err(invalid("epoch_size", 0, ">= 1"));
        }
        if self.qos.min_samples > self.monitor.window {
            return Err(invalid("min_samples", self.qos.min_samples, "<= window"));
        }
        if let TopologyKind::Random { p } = self.topology {
            if !(p > 0.0 && p <= 1.0) {
                return Err(invalid("topology", format!("random:{p}"), "random:p with p in (0, 1]"));
            }
        }
        Ok(())
    }

    /// Seed of experiment `index`.
    pub fn experiment_seed(&self, index: usize) -> u64 {
        self.seed ^ index as u64
    }
}

/// DoE scoring used by the knapsack.
#[derive(Clone, Debug)]
pub enum Scorer {
    Network(Arc<DoeNetwork<f64>>),
    Rule(ExpertRule),
}

impl Scorer {
    /// Resolves the configured scorer, training or loading a network if needed.
    pub fn from_config(cfg: &SimConfig) -> Result<Self> {
        match &cfg.scorer {
            ScorerConfig::Network => {
                let report = fit_expert_model::<f64>(&cfg.doe)?;
                log::debug!(
                    "DoE network trained: train MSE {:.5}, hold-out MSE {:.5}",
                    report.train_mse,
                    report.holdout_mse
                );
                Ok(Scorer::Network(Arc::new(report.net)))
            }
            ScorerConfig::ModelFile { path } => {
                Ok(Scorer::Network(Arc::new(DoeNetwork::load(path)?)))
            }
            ScorerConfig::Rule { rule } => Ok(Scorer::Rule(*rule)),
        }
    }

    pub fn score(&self, task: &Task) -> f64 {
        match self {
            Scorer::Network(net) => net.forward_unchecked(&[task.dd, task.l, task.dl]),
            Scorer::Rule(rule) => rule.label(task.dd, task.l, task.dl),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InTransit {
    pub task: Task,
    pub from: NodeId,
    pub destination: Destination,
    pub arrives_at: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NodeCounters {
    pub generated: u64,
    pub offloaded: u64,
    /// Own tasks completed on this node.
    pub executed_local: u64,
    pub received: u64,
    pub triggers: u64,
}

impl NodeCounters {
    pub fn offload_pct(&self) -> Option<f64> {
        let settled = self.offloaded + self.executed_local;
        (settled > 0).then(|| 100.0 * self.offloaded as f64 / settled as f64)
    }
}

/// Tick/node pair at which an assessment crossed the trigger.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriggerEvent {
    pub tick: u64,
    pub node: NodeId,
    pub p_qos: f64,
    /// Queue length behind the running head when the trigger fired.
    pub tail_len: usize,
    pub offloaded: usize,
}

struct Streams {
    arrivals: ChaCha8Rng,
    policy: ChaCha8Rng,
}

/// Mutable state of one experiment.
pub struct SimState {
    pub tick: u64,
    pub nodes: Vec<NodeState>,
    pub topology: Topology,
    pub in_transit: Vec<InTransit>,
    pub decision_log: Vec<DecisionRecord>,
    pub trigger_log: Vec<TriggerEvent>,
    pub ledger: CostLedger<f64>,
    pub confusion: ConfusionCounts,
    pub counters: Vec<NodeCounters>,
    pub assessments: Vec<Option<QosAssessment<f64>>>,
    pub generated: u64,
    pub completed: u64,
    cfg: Arc<SimConfig>,
    scorer: Scorer,
    streams: Streams,
    next_task_id: TaskId,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

impl SimState {
    /// Fresh state for one experiment seeded with `seed`.
    pub fn new(cfg: Arc<SimConfig>, scorer: Scorer, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let mut topo_rng = stream(seed, 0);
        let mut topology = build_topology(cfg.n_nodes, cfg.topology, &mut topo_rng)?;
        topology.cloud_cc = Some(cfg.cloud_cc);
        let mut node_rng = stream(seed, 1);
        let mut nodes = Vec::with_capacity(cfg.n_nodes);
        for id in 0..cfg.n_nodes {
            let capacity = if cfg.capacity_max > cfg.capacity_min {
                node_rng.gen_range(cfg.capacity_min..=cfg.capacity_max)
            } else {
                cfg.capacity_min
            };
            let window = || KdeWindow::new(cfg.monitor.window, cfg.monitor.bandwidth, cfg.monitor.kernel);
            nodes.push(NodeState::new(
                id,
                capacity,
                capacity * cfg.speed_per_capacity,
                window()?,
                window()?,
            ));
        }
        Ok(Self {
            tick: 0,
            counters: vec![NodeCounters::default(); nodes.len()],
            assessments: vec![None; nodes.len()],
            nodes,
            topology,
            in_transit: Vec::new(),
            decision_log: Vec::new(),
            trigger_log: Vec::new(),
            ledger: CostLedger::default(),
            confusion: ConfusionCounts::default(),
            generated: 0,
            completed: 0,
            streams: Streams {
                arrivals: stream(seed, 2),
                policy: stream(seed, 3),
            },
            cfg,
            scorer,
            next_task_id: 0,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn queued(&self) -> u64 {
        self.nodes.iter().map(|n| n.queue.len() as u64).sum()
    }

    /// Tasks generated = completed + queued + in transit.
    pub fn conserves_tasks(&self) -> bool {
        self.generated == self.completed + self.queued() + self.in_transit.len() as u64
    }

    /// Advances the simulation by one tick.
    pub fn step(&mut self) {
        self.deliver();
        self.arrive();
        let epochs_closed = self.execute();
        self.monitor(&epochs_closed);
        self.decide();
        self.tick += 1;
    }

    fn deliver(&mut self) {
        let tick = self.tick;
        let (due, pending): (Vec<_>, Vec<_>) = std::mem::take(&mut self.in_transit)
            .into_iter()
            .partition(|t| t.arrives_at <= tick);
        self.in_transit = pending;
        for t in due {
            match t.destination {
                Destination::Node(k) => {
                    let mut task = t.task;
                    task.received = true;
                    self.counters[k].received += 1;
                    let work = task.l * self.cfg.service_scale;
                    self.nodes[k].queue.push_back(QueuedTask {
                        task,
                        enqueued_at: tick,
                        remaining_work: work,
                    });
                }
                Destination::Cloud | Destination::None => self.completed += 1,
            }
        }
    }

    fn arrive(&mut self) {
        let tick = self.tick;
        let ArrivalConfig { min, max } = self.cfg.arrival;
        for node in 0..self.nodes.len() {
            let batch = self.streams.arrivals.gen_range(min..=max);
            for _ in 0..batch {
                let task = generate_task(&mut self.streams.arrivals, tick, self.next_task_id, node);
                self.next_task_id += 1;
                let work = task.l * self.cfg.service_scale;
                self.nodes[node].queue.push_back(QueuedTask {
                    task,
                    enqueued_at: tick,
                    remaining_work: work,
                });
                self.counters[node].generated += 1;
                self.generated += 1;
            }
        }
    }

    /// Runs each node's heads for one tick; returns which nodes closed an epoch.
    fn execute(&mut self) -> Vec<bool> {
        let now = self.tick as f64;
        let b = self.cfg.b;
        let mon = self.cfg.monitor;
        let mut closed = vec![false; self.nodes.len()];
        for (idx, node) in self.nodes.iter_mut().enumerate() {
            let mut budget = node.speed;
            while budget > 0.0 {
                let Some(head) = node.queue.front_mut() else { break };
                if head.remaining_work > budget {
                    head.remaining_work -= budget;
                    break;
                }
                budget -= head.remaining_work;
                let done = node.queue.pop_front().expect("head exists");
                let finished_at = now + (node.speed - budget) / node.speed;
                let rt = finished_at - done.enqueued_at as f64;
                self.completed += 1;
                if done.task.received {
                    // already charged as an offload at its origin
                } else {
                    self.ledger.local_costs.push(local_cost(done.task.l, b));
                    self.counters[idx].executed_local += 1;
                }
                node.epoch.completed += 1;
                node.epoch.rt_sum += rt;
                if node.epoch.completed >= mon.epoch_size {
                    let count = node.epoch.completed;
                    let mean_rt = node.epoch.rt_sum / count as f64;
                    let duration = finished_at - node.epoch.start;
                    node.rt_window.push(normalize(mean_rt, mon.rt_scale));
                    if let Ok(tp) = epoch_tp(count, duration) {
                        node.tp_window.push(normalize(tp, mon.max_throughput));
                    }
                    node.epoch.completed = 0;
                    node.epoch.rt_sum = 0.0;
                    node.epoch.start = finished_at;
                    closed[idx] = true;
                }
            }
        }
        closed
    }

    fn monitor(&mut self, closed: &[bool]) {
        for (idx, node) in self.nodes.iter().enumerate() {
            if closed[idx] || self.assessments[idx].is_none() {
                self.assessments[idx] = assess(&node.rt_window, &node.tp_window, &self.cfg.qos);
            }
        }
    }

    fn decide(&mut self) {
        let cfg = Arc::clone(&self.cfg);
        // Committed load: queued work plus tasks already heading to each node.
        let mut loads: Vec<f64> = self.nodes.iter().map(NodeState::queue_load).collect();
        for t in &self.in_transit {
            if let Destination::Node(k) = t.destination {
                loads[k] += t.task.l;
            }
        }
        let rule = cfg.policy.effective_rule();
        for idx in 0..self.nodes.len() {
            let Some(a) = self.assessments[idx] else { continue };
            if !a.triggered || self.nodes[idx].queue.len() < 2 {
                continue;
            }
            self.counters[idx].triggers += 1;
            let tail_len = self.nodes[idx].queue.len() - 1;
            let offload = self.choose_offloads(idx);
            let hypothetical = select_destination(idx, &self.topology, &loads, rule);
            let hyp_cc = self.edge_cost(idx, hypothetical);

            let node = &mut self.nodes[idx];
            let tail: Vec<QueuedTask> = node.queue.drain(1..).collect();
            let mut moved = 0usize;
            for q in tail {
                let task = &q.task;
                let lc = local_cost(task.l, cfg.b);
                if offload.binary_search(&task.id).is_ok() {
                    let dest = select_destination(idx, &self.topology, &loads, rule);
                    let cc = match dest {
                        Destination::Node(k) => {
                            loads[k] += task.l;
                            self.topology.cc(idx, k).expect("neighbor edge")
                        }
                        _ => cfg.cloud_cc,
                    };
                    loads[idx] -= task.l;
                    let oc = offload_cost(task.l, cfg.b, cc);
                    self.confusion.record(classify_decision(Decision::Offload, lc, oc));
                    if cfg.record_decisions {
                        self.decision_log.push(DecisionRecord {
                            task_id: task.id,
                            node_id: idx,
                            decision: Decision::Offload,
                            destination: dest,
                            lc,
                            oc,
                            tick: self.tick,
                        });
                    }
                    self.ledger.offload_ccs.push(cc);
                    self.counters[idx].offloaded += 1;
                    let delay = ((cc * cfg.transit_scale).ceil() as u64).max(1);
                    self.in_transit.push(InTransit {
                        task: q.task,
                        from: idx,
                        destination: dest,
                        arrives_at: self.tick + delay,
                    });
                    moved += 1;
                } else {
                    if task.received && !cfg.allow_reoffload {
                        // Not a decision: received work must stay.
                        node.queue.push_back(q);
                        continue;
                    }
                    let oc = offload_cost(task.l, cfg.b, hyp_cc);
                    self.confusion.record(classify_decision(Decision::Local, lc, oc));
                    if cfg.record_decisions {
                        self.decision_log.push(DecisionRecord {
                            task_id: task.id,
                            node_id: idx,
                            decision: Decision::Local,
                            destination: Destination::None,
                            lc,
                            oc,
                            tick: self.tick,
                        });
                    }
                    node.queue.push_back(q);
                }
            }
            self.trigger_log.push(TriggerEvent {
                tick: self.tick,
                node: idx,
                p_qos: a.p_qos,
                tail_len,
                offloaded: moved,
            });
        }
    }

    fn edge_cost(&self, from: NodeId, dest: Destination) -> f64 {
        match dest {
            Destination::Node(k) => self.topology.cc(from, k).unwrap_or(self.cfg.cloud_cc),
            _ => self.cfg.cloud_cc,
        }
    }

    /// Ids (ascending) of the tail tasks selected for offloading at `idx`.
    fn choose_offloads(&mut self, idx: NodeId) -> Vec<TaskId> {
        let cfg = &self.cfg;
        let node = &self.nodes[idx];
        let tail_len = node.queue.len() - 1;
        let eligible: Vec<Task> = node
            .queue
            .iter()
            .skip(1)
            .filter(|q| cfg.allow_reoffload || !q.task.received)
            .map(|q| q.task.clone())
            .collect();
        let mut ids = match cfg.policy.baseline {
            Baseline::None => {
                let forced: f64 = node
                    .queue
                    .iter()
                    .skip(1)
                    .filter(|q| !cfg.allow_reoffload && q.task.received)
                    .map(|q| q.task.l)
                    .sum();
                let running = if cfg.residual_capacity {
                    node.queue[0].task.l
                } else {
                    0.0
                };
                let capacity = (node.capacity - running - forced).max(0.0);
                let items = eligible
                    .iter()
                    .map(|t| KnapsackItem {
                        task_id: t.id,
                        doe: self.scorer.score(t),
                        load: t.l,
                    })
                    .collect();
                let instance = KnapsackInstance {
                    items,
                    capacity,
                    resolution: cfg.knapsack_resolution,
                };
                solve(&instance).offload_set
            }
            baseline => {
                let quota = match cfg.policy.ceiling_scope {
                    CeilingScope::PerTrigger => eviction_quota(tail_len, cfg.policy.ceiling),
                    CeilingScope::Cumulative => {
                        let c = &self.counters[idx];
                        eviction_quota(c.generated as usize, cfg.policy.ceiling)
                            .saturating_sub(c.offloaded as usize)
                    }
                };
                baseline_select(&eligible, baseline, quota, &mut self.streams.policy)
            }
        };
        ids.sort_unstable();
        ids
    }

    pub fn into_result(self, experiment_index: usize, seed: u64) -> Result<ExperimentResult> {
        let cost = run_cost(&self.ledger)?;
        let settled = self.ledger.lambda_local() + self.ledger.lambda_offload();
        Ok(ExperimentResult {
            experiment_index,
            seed,
            cost,
            offload_pct: 100.0 * self.ledger.lambda_offload() as f64 / settled as f64,
            per_node_offload_pct: self.counters.iter().map(NodeCounters::offload_pct).collect(),
            lambda_local: self.ledger.lambda_local(),
            lambda_offload: self.ledger.lambda_offload(),
            confusion: self.confusion,
            counters: self.counters,
            generated: self.generated,
            completed: self.completed,
            triggers: self.trigger_log.len(),
            decision_log: self.decision_log,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub experiment_index: usize,
    pub seed: u64,
    /// Run cost `C`.
    pub cost: f64,
    pub offload_pct: f64,
    pub per_node_offload_pct: Vec<Option<f64>>,
    pub lambda_local: usize,
    pub lambda_offload: usize,
    pub confusion: ConfusionCounts,
    pub counters: Vec<NodeCounters>,
    pub generated: u64,
    pub completed: u64,
    pub triggers: usize,
    pub decision_log: Vec<DecisionRecord>,
}

/// Runs `cfg.itrs` ticks of experiment `index` from a fresh seeded state.
pub fn run_experiment(cfg: &Arc<SimConfig>, scorer: &Scorer, index: usize) -> Result<ExperimentResult> {
    let seed = cfg.experiment_seed(index);
    let mut state = SimState::new(Arc::clone(cfg), scorer.clone(), seed)?;
    for _ in 0..cfg.itrs {
        state.step();
    }
    state.into_result(index, seed)
}

/// Aggregate of one policy over `E` experiments.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolicySummary {
    pub policy: PolicyConfig,
    pub label: String,
    pub n_nodes: usize,
    pub itrs: u64,
    pub experiments: usize,
    pub costs: Vec<f64>,
    /// Average cost `AC`.
    pub ac: f64,
    pub confusion: ConfusionCounts,
    pub metrics: Option<Aprf<f64>>,
    pub offload_pct: f64,
    pub triggers: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSummary {
    pub n_nodes: usize,
    pub seed: u64,
    pub policies: Vec<PolicySummary>,
}

impl CampaignSummary {
    pub fn get(&self, label: &str) -> Option<&PolicySummary> {
        self.policies.iter().find(|p| p.label == label)
    }

    /// `D_AC` of the model against the policy labelled `label`.
    pub fn d_ac(&self, label: &str) -> Option<Result<f64>> {
        let model = self.policies.iter().find(|p| p.policy.baseline == Baseline::None)?;
        let other = self.get(label)?;
        Some(relative_difference(model.ac, other.ac))
    }
}

/// Runs every experiment of one policy and aggregates cost and correctness.
pub fn run_policy(cfg: &SimConfig, scorer: &Scorer) -> Result<PolicySummary> {
    cfg.validate()?;
    let mut light = cfg.clone();
    light.record_decisions = false;
    let shared = Arc::new(light);
    let results: Vec<ExperimentResult> = (0..cfg.n_experiments)
        .into_par_iter()
        .map(|i| run_experiment(&shared, scorer, i))
        .collect::<Result<_>>()?;
    let costs: Vec<f64> = results.iter().map(|r| r.cost).collect();
    let mut confusion = ConfusionCounts::default();
    for r in &results {
        confusion += r.confusion;
    }
    let offload_pct = results.iter().map(|r| r.offload_pct).sum::<f64>() / results.len() as f64;
    Ok(PolicySummary {
        policy: cfg.policy,
        label: cfg.policy.label(),
        n_nodes: cfg.n_nodes,
        itrs: cfg.itrs,
        experiments: results.len(),
        ac: average_cost(&costs)?,
        costs,
        metrics: aprf(&confusion).ok(),
        confusion,
        offload_pct,
        triggers: results.iter().map(|r| r.triggers).sum(),
    })
}

/// Runs `policies` on identical task streams (same seeds) and collects their summaries.
pub fn run_campaign(cfg: &SimConfig, policies: &[PolicyConfig], scorer: &Scorer) -> Result<CampaignSummary> {
    if policies.is_empty() {
        return Err(Error::InvalidConfig("campaign needs at least one policy".into()));
    }
    let summaries = policies
        .iter()
        .map(|p| {
            let mut c = cfg.clone();
            c.policy = *p;
            run_policy(&c, scorer)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CampaignSummary {
        n_nodes: cfg.n_nodes,
        seed: cfg.seed,
        policies: summaries,
    })
}

/// The model followed by every baseline at each ceiling.
pub fn comparison_policies(model: PolicyConfig, ceilings: &[f64]) -> Vec<PolicyConfig> {
    let mut out = vec![PolicyConfig {
        baseline: Baseline::None,
        ..model
    }];
    for &ceiling in ceilings {
        for baseline in Baseline::ALL {
            out.push(PolicyConfig {
                destination_rule: crate::policy::DestinationRule::MinLoad,
                baseline,
                ceiling,
                ceiling_scope: model.ceiling_scope,
            });
        }
    }
    out
}
