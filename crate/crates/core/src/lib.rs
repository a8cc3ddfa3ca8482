//! QoS-aware proactive task offloading for edge node ecosystems.
//!
//! Nodes watch the distribution of their response time and throughput through
//! kernel density estimates. When the fused violation probability crosses a
//! trigger, a node scores its queued tasks with a small neural network and keeps
//! the best subset that fits its load capacity (a 0-1 knapsack); the rest go to
//! a peer picked by load or by communication cost.
//!
//! The numeric building blocks are generic over [`Scalar`] (`f32` or `f64`); the
//! aliases below fix them to `f64`, which is what the simulator uses.

pub mod cli;
pub mod doe;
pub mod error;
pub mod knapsack;
pub mod metrics;
pub mod model;
pub mod policy;
pub mod qos;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type KdeWindow = qos::KdeWindow<f64>;
pub type QosConfig = qos::QosConfig<f64>;
pub type DoeNetwork = doe::DoeNetwork<f64>;
pub type TrainingSet = doe::TrainingSet<f64>;
pub type KnapsackInstance = knapsack::KnapsackInstance<f64>;
pub type KnapsackSolution = knapsack::KnapsackSolution<f64>;
pub type CostLedger = metrics::CostLedger<f64>;
pub type Aprf = metrics::Aprf<f64>;
