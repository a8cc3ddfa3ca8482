//! Line-oriented `key = value` configuration.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; absent keys
//! keep their defaults. Overrides given on the command line are applied after
//! the file, so they win.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::doe::ExpertRule;
use crate::error::{Error, Result};
use crate::model::TopologyKind;
use crate::policy::{Baseline, CeilingScope, DestinationRule};
use crate::qos::{Bandwidth, Kernel, TriggerDirection};
use crate::sim::{ScorerConfig, SimConfig, NODE_GRID};

/// Everything a CLI run needs: the simulator config plus the comparison grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub campaign_id: u64,
    /// Node counts visited by `compare`.
    pub node_grid: Vec<usize>,
    /// Baseline ceilings visited by `compare`.
    pub ceilings: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            sim: SimConfig::default(),
            campaign_id: 0,
            node_grid: NODE_GRID.to_vec(),
            ceilings: vec![0.10, 0.05],
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        self.sim.validate()?;
        if self.node_grid.is_empty() || self.node_grid.iter().any(|&n| n < 2) {
            return Err(Error::Validation {
                key: "node_grid".into(),
                value: join(&self.node_grid),
                allowed: "a non-empty list of node counts >= 2".into(),
            });
        }
        if self.ceilings.is_empty() || self.ceilings.iter().any(|&c| !(c > 0.0 && c <= 1.0)) {
            return Err(Error::Validation {
                key: "ceilings".into(),
                value: join(&self.ceilings),
                allowed: "a non-empty list of values in (0, 1]".into(),
            });
        }
        Ok(())
    }

    /// Non-fatal remarks about unusual but accepted settings.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let mut ns = vec![self.sim.n_nodes];
        ns.extend(&self.node_grid);
        ns.sort_unstable();
        ns.dedup();
        for n in ns {
            if !NODE_GRID.contains(&n) {
                out.push(format!(
                    "node count {n} is outside the usual grid {}",
                    join(&NODE_GRID)
                ));
            }
        }
        out
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// One `key = value` entry and the line it came from (0 for overrides).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Entry {
    pub line: usize,
    pub key: String,
    pub value: String,
}

pub fn parse_entries(text: &str) -> Result<Vec<Entry>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                message: "empty key".into(),
            });
        }
        out.push(Entry {
            line: i + 1,
            key: key.to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(out)
}

/// Parses a `key=value` override as given on the command line.
pub fn parse_override(text: &str) -> Result<Entry> {
    let (key, value) = text.split_once('=').ok_or_else(|| Error::Parse {
        line: 0,
        message: format!("override `{text}` is not of the form key=value"),
    })?;
    Ok(Entry {
        line: 0,
        key: key.trim().to_string(),
        value: value.trim().to_string(),
    })
}

/// Builds a validated config from optional file text and overrides.
pub fn parse_config(text: Option<&str>, overrides: &[Entry]) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let file_entries = match text {
        Some(t) => parse_entries(t)?,
        None => Vec::new(),
    };
    for e in file_entries.iter().chain(overrides) {
        apply(&mut cfg, &e.key, &e.value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Reads `path` (if any) and applies `overrides` on top.
pub fn load_config(path: Option<&Path>, overrides: &[Entry]) -> Result<RunConfig> {
    let text = match path {
        Some(p) => Some(std::fs::read_to_string(p)?),
        None => None,
    };
    parse_config(text.as_deref(), overrides)
}

fn bad(key: &str, value: &str, allowed: &str) -> Error {
    Error::Validation {
        key: key.into(),
        value: value.into(),
        allowed: allowed.into(),
    }
}

fn num<T: std::str::FromStr>(key: &str, value: &str, allowed: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value, allowed))
}

fn real(key: &str, value: &str) -> Result<f64> {
    let v: f64 = num(key, value, "a number")?;
    if !v.is_finite() {
        return Err(bad(key, value, "a finite number"));
    }
    Ok(v)
}

fn unit(key: &str, value: &str) -> Result<f64> {
    let v = real(key, value)?;
    if !(0.0..=1.0).contains(&v) {
        return Err(bad(key, value, "[0, 1]"));
    }
    Ok(v)
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

fn list<T: std::str::FromStr>(key: &str, value: &str, allowed: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(|s| num(key, s.trim(), allowed).map_err(|_| bad(key, value, allowed)))
        .collect()
}

/// Applies one setting. Values are range-checked individually here; cross-field
/// constraints are checked by [`RunConfig::validate`].
pub fn apply(cfg: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    let sim = &mut cfg.sim;
    match key {
        "n_nodes" => sim.n_nodes = num(key, value, "an integer >= 2")?,
        "itrs" => sim.itrs = num(key, value, "an integer >= 1")?,
        "experiments" => sim.n_experiments = num(key, value, "an integer >= 1")?,
        "seed" => sim.seed = num(key, value, "an unsigned integer")?,
        "campaign_id" => cfg.campaign_id = num(key, value, "an unsigned integer")?,
        "node_grid" => cfg.node_grid = list(key, value, "a comma-separated list of integers")?,
        "ceilings" => cfg.ceilings = list(key, value, "a comma-separated list of numbers")?,
        "th" => {
            let v = unit(key, value)?;
            sim.qos.th_rt = v;
            sim.qos.th_tp = v;
        }
        "th_rt" => sim.qos.th_rt = unit(key, value)?,
        "th_tp" => sim.qos.th_tp = unit(key, value)?,
        "w_rt" => sim.qos.w_rt = unit(key, value)?,
        "w_tp" => sim.qos.w_tp = unit(key, value)?,
        "p_trig" => sim.qos.p_trig = unit(key, value)?,
        "trigger_direction" => {
            sim.qos.direction = match value {
                "at_least" => TriggerDirection::AtLeast,
                "at_most" => TriggerDirection::AtMost,
                _ => return Err(bad(key, value, "at_least or at_most")),
            }
        }
        "min_samples" => sim.qos.min_samples = num(key, value, "an integer >= 1")?,
        "window" => sim.monitor.window = num(key, value, "an integer >= 1")?,
        "epoch_size" => sim.monitor.epoch_size = num(key, value, "an integer >= 1")?,
        "bandwidth" => {
            sim.monitor.bandwidth = match value {
                "silverman" => Bandwidth::default(),
                _ => {
                    let h = real(key, value).map_err(|_| bad(key, value, "silverman or a number > 0"))?;
                    if !(h > 0.0) {
                        return Err(bad(key, value, "silverman or a number > 0"));
                    }
                    Bandwidth::Fixed { h }
                }
            }
        }
        "kernel" => {
            sim.monitor.kernel = match value {
                "gaussian" => Kernel::Gaussian,
                "epanechnikov" => Kernel::Epanechnikov,
                _ => return Err(bad(key, value, "gaussian or epanechnikov")),
            }
        }
        "rt_scale" => sim.monitor.rt_scale = real(key, value)?,
        "max_throughput" => sim.monitor.max_throughput = real(key, value)?,
        "destination_rule" => {
            sim.policy.destination_rule = match value {
                "min_load" => DestinationRule::MinLoad,
                "min_cost" => DestinationRule::MinCost,
                _ => return Err(bad(key, value, "min_load or min_cost")),
            }
        }
        "baseline" => {
            sim.policy.baseline = match value {
                "none" | "model" => Baseline::None,
                "random" => Baseline::Random,
                "last" => Baseline::Last,
                "greedy" => Baseline::Greedy,
                _ => return Err(bad(key, value, "none, random, last or greedy")),
            }
        }
        "ceiling" => sim.policy.ceiling = real(key, value)?,
        "ceiling_scope" => {
            sim.policy.ceiling_scope = match value {
                "per_trigger" => CeilingScope::PerTrigger,
                "cumulative" => CeilingScope::Cumulative,
                _ => return Err(bad(key, value, "per_trigger or cumulative")),
            }
        }
        "b" => sim.b = unit(key, value)?,
        "arrival_min" => sim.arrival.min = num(key, value, "an unsigned integer")?,
        "arrival_max" => sim.arrival.max = num(key, value, "an unsigned integer")?,
        "service_scale" => sim.service_scale = real(key, value)?,
        "capacity_min" => sim.capacity_min = real(key, value)?,
        "capacity_max" => sim.capacity_max = real(key, value)?,
        "speed_per_capacity" => sim.speed_per_capacity = real(key, value)?,
        "transit_scale" => sim.transit_scale = real(key, value)?,
        "topology" => {
            sim.topology = match value {
                "complete" => TopologyKind::Complete,
                _ => match value.strip_prefix("random:") {
                    Some(p) => TopologyKind::Random {
                        p: real(key, p).map_err(|_| bad(key, value, "complete or random:<p>"))?,
                    },
                    None => return Err(bad(key, value, "complete or random:<p>")),
                },
            }
        }
        "cloud_cc" => sim.cloud_cc = real(key, value)?,
        "residual_capacity" => sim.residual_capacity = flag(key, value)?,
        "allow_reoffload" => sim.allow_reoffload = flag(key, value)?,
        "knapsack_resolution" => sim.knapsack_resolution = real(key, value)?,
        "scorer" => {
            sim.scorer = match value {
                "network" => ScorerConfig::Network,
                "rule:linear" => ScorerConfig::Rule { rule: ExpertRule::Linear },
                "rule:curved" => ScorerConfig::Rule { rule: ExpertRule::Curved },
                _ => match value.strip_prefix("file:") {
                    Some(p) if !p.is_empty() => ScorerConfig::ModelFile { path: PathBuf::from(p) },
                    _ => return Err(bad(key, value, "network, rule:linear, rule:curved or file:<path>")),
                },
            }
        }
        "doe_rule" => {
            sim.doe.rule = match value {
                "linear" => ExpertRule::Linear,
                "curved" => ExpertRule::Curved,
                _ => return Err(bad(key, value, "linear or curved")),
            }
        }
        "doe_rows" => sim.doe.rows = num(key, value, "an integer >= 2")?,
        "doe_hidden" => sim.doe.hidden = num(key, value, "an integer >= 1")?,
        "doe_epochs" => sim.doe.options.epochs = num(key, value, "an integer >= 1")?,
        "doe_learning_rate" => sim.doe.options.learning_rate = real(key, value)?,
        "doe_holdout" => sim.doe.holdout_fraction = real(key, value)?,
        "doe_seed" => sim.doe.seed = num(key, value, "an unsigned integer")?,
        _ => return Err(Error::UnknownKey(key.to_string())),
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_keeps_defaults() {
        let cfg = parse_config(Some("# nothing here\n\n"), &[]).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.sim.qos.th_rt, 0.3);
        assert_eq!(cfg.sim.qos.th_tp, 0.3);
        assert_eq!(cfg.sim.b, 0.5);
        assert_eq!(cfg.sim.qos.w_rt, 0.5);
        assert_eq!(cfg.sim.qos.w_tp, 0.5);
        assert_eq!(cfg.sim.n_experiments, 100);
    }

    #[test]
    fn override_wins_over_file() {
        let text = "seed = 5\nb = 0.4 # trailing comment\n";
        let cfg = parse_config(Some(text), &[parse_override("seed=9").unwrap()]).unwrap();
        assert_eq!(cfg.sim.seed, 9);
        assert_eq!(cfg.sim.b, 0.4);
    }

    #[test]
    fn unknown_key_rejected() {
        let err = parse_config(Some("colour = blue"), &[]).unwrap_err();
        assert!(matches!(err, Error::UnknownKey(ref k) if k == "colour"));
        assert!(err.is_validation());
    }

    #[test]
    fn out_of_range_names_key_and_range() {
        let err = parse_config(Some("th = 1.5"), &[]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("`th`") && msg.contains("[0, 1]"), "{msg}");
        assert!(err.is_validation());
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let err = parse_config(Some("seed = 1\njunk\n"), &[]).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn off_grid_node_count_warns_only() {
        let cfg = parse_config(Some("n_nodes = 7"), &[]).unwrap();
        assert_eq!(cfg.sim.n_nodes, 7);
        let w = cfg.warnings();
        assert_eq!(w.len(), 1);
        assert!(w[0].contains('7'));
        assert!(RunConfig::default().warnings().is_empty());
    }

    #[test]
    fn structured_values() {
        let text = "topology = random:0.3\nscorer = file:/tmp/m.txt\nbandwidth = 0.05\nnode_grid = 5, 10\nceilings = 0.2\n";
        let cfg = parse_config(Some(text), &[]).unwrap();
        assert_eq!(cfg.sim.topology, TopologyKind::Random { p: 0.3 });
        assert_eq!(cfg.sim.monitor.bandwidth, Bandwidth::Fixed { h: 0.05 });
        assert_eq!(cfg.node_grid, vec![5, 10]);
        assert_eq!(cfg.ceilings, vec![0.2]);
        assert!(matches!(cfg.sim.scorer, ScorerConfig::ModelFile { .. }));
        assert!(parse_config(Some("topology = ring"), &[]).unwrap_err().is_validation());
        assert!(parse_config(Some("ceilings = 0.1,2"), &[]).is_err());
        assert!(parse_config(Some("n_nodes = 1"), &[]).is_err());
    }
}
