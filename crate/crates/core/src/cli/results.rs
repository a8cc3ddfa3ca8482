//! Results rows and their CSV / JSON renderings.
//!
//! Floating-point columns are printed with six decimals and undefined values as
//! `NA`. `d_ac` is computed from the already rounded AC values so that it can be
//! reproduced from the CSV alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::relative_difference;
use crate::policy::Baseline;
use crate::sim::CampaignSummary;

use super::config::RunConfig;

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_JSON: &str = "results.json";
pub const TABLE_CSV: &str = "results_table.csv";

pub const CSV_COLUMNS: [&str; 14] = [
    "campaign_id",
    "n",
    "itrs",
    "policy",
    "ceiling",
    "destination_rule",
    "accuracy",
    "precision",
    "recall",
    "f_measure",
    "ac",
    "d_ac",
    "offload_pct",
    "seed",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsRow {
    pub campaign_id: u64,
    pub n: usize,
    pub itrs: u64,
    /// `model`, `random`, `last` or `greedy`.
    pub policy: String,
    /// Baseline ceiling; `None` for the model.
    pub ceiling: Option<f64>,
    pub destination_rule: String,
    pub accuracy: Option<f64>,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f_measure: Option<f64>,
    pub ac: f64,
    /// Model vs this row's policy, in percent; `None` on the model row.
    pub d_ac: Option<f64>,
    pub offload_pct: f64,
    pub seed: u64,
}

impl ResultsRow {
    /// Column label such as `model` or `random_10`.
    pub fn label(&self) -> String {
        match self.ceiling {
            None => self.policy.clone(),
            Some(c) => format!("{}_{}", self.policy, (c * 100.0).round() as u32),
        }
    }
}

/// Rounds to the six decimals that are printed.
pub fn round6(x: f64) -> f64 {
    (x * 1e6).round() / 1e6
}

pub fn fmt6(x: f64) -> String {
    let s = format!("{:.6}", x);
    if s == "-0.000000" {
        "0.000000".to_string()
    } else {
        s
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt6).unwrap_or_else(|| "NA".to_string())
}

/// One row per policy of `campaign`, in campaign order.
pub fn rows_from_campaign(campaign_id: u64, campaign: &CampaignSummary) -> Result<Vec<ResultsRow>> {
    let model_ac = campaign
        .policies
        .iter()
        .find(|p| p.policy.baseline == Baseline::None)
        .map(|p| round6(p.ac));
    campaign
        .policies
        .iter()
        .map(|p| {
            let is_model = p.policy.baseline == Baseline::None;
            let ac = round6(p.ac);
            let d_ac = match (is_model, model_ac) {
                (false, Some(m)) => Some(relative_difference(m, ac)?),
                _ => None,
            };
            Ok(ResultsRow {
                campaign_id,
                n: p.n_nodes,
                itrs: p.itrs,
                policy: p.policy.baseline.as_str().to_string(),
                ceiling: (!is_model).then_some(p.policy.ceiling),
                destination_rule: p.policy.effective_rule().as_str().to_string(),
                accuracy: p.metrics.map(|m| m.accuracy),
                precision: p.metrics.and_then(|m| m.precision),
                recall: p.metrics.and_then(|m| m.recall),
                f_measure: p.metrics.and_then(|m| m.f_measure),
                ac: p.ac,
                d_ac,
                offload_pct: p.offload_pct,
                seed: campaign.seed,
            })
        })
        .collect()
}

/// Long format: header plus one newline-terminated record per row.
pub fn to_csv(rows: &[ResultsRow]) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        let fields = [
            r.campaign_id.to_string(),
            r.n.to_string(),
            r.itrs.to_string(),
            r.policy.clone(),
            fmt_opt(r.ceiling),
            r.destination_rule.clone(),
            fmt_opt(r.accuracy),
            fmt_opt(r.precision),
            fmt_opt(r.recall),
            fmt_opt(r.f_measure),
            fmt6(r.ac),
            fmt_opt(r.d_ac),
            fmt6(r.offload_pct),
            r.seed.to_string(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

/// Wide format: one line per node count, AC of the model and AC plus `d_ac`
/// of every other policy, in first-appearance order.
pub fn to_table_csv(rows: &[ResultsRow]) -> String {
    let mut labels: Vec<String> = Vec::new();
    let mut ns: Vec<usize> = Vec::new();
    for r in rows {
        let l = r.label();
        if !labels.contains(&l) {
            labels.push(l);
        }
        if !ns.contains(&r.n) {
            ns.push(r.n);
        }
    }
    let mut out = String::from("n");
    for l in &labels {
        if l == "model" {
            out.push_str(",model_ac");
        } else {
            let _ = write!(out, ",{l}_ac,{l}_d_ac");
        }
    }
    out.push('\n');
    for n in ns {
        out.push_str(&n.to_string());
        for l in &labels {
            let row = rows.iter().find(|r| r.n == n && &r.label() == l);
            let ac = row.map(|r| fmt6(r.ac)).unwrap_or_else(|| "NA".into());
            out.push(',');
            out.push_str(&ac);
            if l != "model" {
                out.push(',');
                out.push_str(&fmt_opt(row.and_then(|r| r.d_ac)));
            }
        }
        out.push('\n');
    }
    out
}

/// Everything `export` needs to re-render the CSV files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub command: String,
    pub config: RunConfig,
    pub rows: Vec<ResultsRow>,
}

impl ResultsDocument {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(RESULTS_JSON);
        if !path.is_file() {
            return Err(Error::NoResults(dir.to_path_buf()));
        }
        let doc: ResultsDocument = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if doc.rows.is_empty() {
            return Err(Error::NoResults(dir.to_path_buf()));
        }
        Ok(doc)
    }

    /// Writes the JSON document and both CSV files into `dir`; returns their paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut json = serde_json::to_string_pretty(self)?;
        json.push('\n');
        let json_path = dir.join(RESULTS_JSON);
        std::fs::write(&json_path, json)?;
        let mut written = self.write_csv(dir)?;
        written.insert(0, json_path);
        Ok(written)
    }

    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let csv = dir.join(RESULTS_CSV);
        std::fs::write(&csv, to_csv(&self.rows))?;
        let table = dir.join(TABLE_CSV);
        std::fs::write(&table, to_table_csv(&self.rows))?;
        Ok(vec![csv, table])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(policy: &str, ceiling: Option<f64>, ac: f64, d_ac: Option<f64>) -> ResultsRow {
        ResultsRow {
            campaign_id: 0,
            n: 20,
            itrs: 100,
            policy: policy.into(),
            ceiling,
            destination_rule: "min_load".into(),
            accuracy: Some(0.9),
            precision: None,
            recall: Some(0.9),
            f_measure: None,
            ac,
            d_ac,
            offload_pct: 10.0,
            seed: 42,
        }
    }

    #[test]
    fn csv_layout() {
        let rows = [row("model", None, 0.364, None), row("random", Some(0.1), 0.446, Some(-18.385650))];
        let csv = to_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], CSV_COLUMNS.join(","));
        assert_eq!(
            lines[1],
            "0,20,100,model,NA,min_load,0.900000,NA,0.900000,NA,0.364000,NA,10.000000,42"
        );
        assert!(lines[2].starts_with("0,20,100,random,0.100000,"));
        assert!(csv.ends_with('\n'));
        for l in &lines {
            assert_eq!(l.split(',').count(), CSV_COLUMNS.len());
        }
    }

    #[test]
    fn table_layout() {
        let rows = [row("model", None, 0.364, None), row("greedy", Some(0.05), 0.4, Some(-9.0))];
        assert_eq!(
            to_table_csv(&rows),
            "n,model_ac,greedy_5_ac,greedy_5_d_ac\n20,0.364000,0.400000,-9.000000\n"
        );
    }

    #[test]
    fn negative_zero_is_printed_plainly() {
        assert_eq!(fmt6(-1e-9), "0.000000");
        assert_eq!(fmt6(-0.5), "-0.500000");
    }
}
