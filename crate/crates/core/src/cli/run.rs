//! The four subcommands, independent of argument parsing.

use std::path::Path;

use crate::doe::{fit_expert_model, FitReport};
use crate::error::Result;
use crate::sim::{comparison_policies, run_campaign, Scorer};

use super::config::RunConfig;
use super::results::{rows_from_campaign, ResultsDocument};

/// One campaign of the configured policy at the configured node count.
pub fn simulate(cfg: &RunConfig) -> Result<ResultsDocument> {
    cfg.validate()?;
    let scorer = Scorer::from_config(&cfg.sim)?;
    let campaign = run_campaign(&cfg.sim, &[cfg.sim.policy], &scorer)?;
    Ok(ResultsDocument {
        command: "simulate".into(),
        config: cfg.clone(),
        rows: rows_from_campaign(cfg.campaign_id, &campaign)?,
    })
}

/// The model and every baseline at every ceiling, for each node count of the
/// grid, on shared seeds.
pub fn compare(cfg: &RunConfig) -> Result<ResultsDocument> {
    cfg.validate()?;
    let scorer = Scorer::from_config(&cfg.sim)?;
    let policies = comparison_policies(cfg.sim.policy, &cfg.ceilings);
    let mut rows = Vec::new();
    for &n in &cfg.node_grid {
        let mut sim = cfg.sim.clone();
        sim.n_nodes = n;
        log::info!("comparing {} policies at N = {n}", policies.len());
        let campaign = run_campaign(&sim, &policies, &scorer)?;
        rows.extend(rows_from_campaign(cfg.campaign_id, &campaign)?);
    }
    Ok(ResultsDocument {
        command: "compare".into(),
        config: cfg.clone(),
        rows,
    })
}

/// Trains the DoE network on the rule dataset and saves it to `path`.
pub fn train_doe(cfg: &RunConfig, path: &Path) -> Result<FitReport<f64>> {
    cfg.validate()?;
    let report = fit_expert_model::<f64>(&cfg.sim.doe)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    report.net.save(path)?;
    Ok(report)
}

/// Re-renders the CSV files of a previous `simulate` or `compare` in `from`
/// into `to`.
pub fn export(from: &Path, to: &Path) -> Result<ResultsDocument> {
    let doc = ResultsDocument::read(from)?;
    if from == to {
        doc.write_csv(to)?;
    } else {
        doc.write(to)?;
    }
    Ok(doc)
}
