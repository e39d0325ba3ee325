//! Selection report: the JSON document and human-readable table emitted
//! after scoring a garrotte path, plus the CSV serialisation of the path
//! itself.
//!
//! Report schema (`gdss-selection-report/1`): every entry of `rows` carries
//! exactly (criterion, df_source, kappa, support, k, sigma2_hat, total) with
//! 1-based group ids in `support`; heuristic selections live in `heuristics`
//! with (criterion, level, kappa, support, reference, fallback).

use serde::{Deserialize, Serialize};

use crate::criteria::{HeuristicSelection, ModelScore};
use crate::error::{Error, Result};
use crate::nng::NngPath;

pub const REPORT_SCHEMA: &str = "gdss-selection-report/1";

/// One selected model under an information criterion.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportRow {
    pub criterion: String,
    pub df_source: String,
    pub kappa: f64,
    /// 1-based selection-group ids.
    pub support: Vec<usize>,
    pub k: f64,
    pub sigma2_hat: f64,
    pub total: f64,
}

/// One selected model under a credible-interval heuristic.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeuristicRow {
    pub criterion: String,
    pub level: f64,
    pub kappa: f64,
    pub support: Vec<usize>,
    /// Posterior mean of the κ = 0 statistic the interval must contain.
    pub reference: f64,
    pub fallback: bool,
}

/// One candidate of the path as serialised.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathRow {
    pub kappa: f64,
    pub d: Vec<f64>,
    pub support: Vec<usize>,
    pub sse: f64,
}

/// The full selection report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionReport {
    pub schema: String,
    pub prior: String,
    pub seed: u64,
    pub n: usize,
    pub p: usize,
    pub group_count: usize,
    pub group_sizes: Vec<usize>,
    pub kappa_max: f64,
    /// 1-based ids of groups with an all-zero design column.
    pub forced_inactive: Vec<usize>,
    pub rows: Vec<ReportRow>,
    pub heuristics: Vec<HeuristicRow>,
    pub path: Vec<PathRow>,
}

fn one_based(support: &[usize]) -> Vec<usize> {
    support.iter().map(|&g| g + 1).collect()
}

impl SelectionReport {
    pub fn new(prior: &str, seed: u64, n: usize, p: usize, path: &NngPath) -> Self {
        SelectionReport {
            schema: REPORT_SCHEMA.into(),
            prior: prior.into(),
            seed,
            n,
            p,
            group_count: path.sizes.len(),
            group_sizes: path.sizes.clone(),
            kappa_max: path.kappa_max,
            forced_inactive: one_based(&path.forced_inactive),
            rows: Vec::new(),
            heuristics: Vec::new(),
            path: path
                .candidates
                .iter()
                .map(|c| PathRow {
                    kappa: c.kappa,
                    d: c.d.clone(),
                    support: one_based(&c.support),
                    sse: c.sse,
                })
                .collect(),
        }
    }

    pub fn push_criterion(&mut self, criterion: &str, df_source: &str, score: &ModelScore) {
        self.rows.push(ReportRow {
            criterion: criterion.into(),
            df_source: df_source.into(),
            kappa: score.kappa,
            support: one_based(&score.support),
            k: score.k,
            sigma2_hat: score.sigma2_hat,
            total: score.total,
        });
    }

    pub fn push_heuristic(
        &mut self,
        criterion: &str,
        level: f64,
        path: &NngPath,
        sel: &HeuristicSelection,
    ) {
        let cand = &path.candidates[sel.candidate];
        self.heuristics.push(HeuristicRow {
            criterion: criterion.into(),
            level,
            kappa: cand.kappa,
            support: one_based(&cand.support),
            reference: sel.reference,
            fallback: sel.fallback,
        });
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let report: SelectionReport = serde_json::from_str(s)?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::Store(format!("unexpected report schema '{}'", report.schema)));
        }
        Ok(report)
    }

    /// Human-readable summary table.
    pub fn render(&self) -> String {
        let fmt_support = |s: &[usize]| {
            if s.is_empty() {
                "-".to_string()
            } else {
                s.iter().map(|g| g.to_string()).collect::<Vec<_>>().join("+")
            }
        };
        let mut out = String::new();
        out.push_str(&format!(
            "selection over {} candidates (kappa_max {:.6e}, {} groups)\n",
            self.path.len(),
            self.kappa_max,
            self.group_count
        ));
        if !self.forced_inactive.is_empty() {
            out.push_str(&format!("zero-design groups forced inactive: {:?}\n", self.forced_inactive));
        }
        out.push_str(&format!(
            "{:<10}{:<6}{:>12}{:>14}{:>10}{:>12}{:>14}\n",
            "criterion", "df", "kappa", "support", "k", "sigma2_hat", "total"
        ));
        for r in &self.rows {
            out.push_str(&format!(
                "{:<10}{:<6}{:>12.4e}{:>14}{:>10.3}{:>12.4}{:>14.4}\n",
                r.criterion,
                r.df_source,
                r.kappa,
                fmt_support(&r.support),
                r.k,
                r.sigma2_hat,
                r.total
            ));
        }
        for h in &self.heuristics {
            out.push_str(&format!(
                "{:<10}{:<6}{:>12.4e}{:>14}  reference {:.4}{}\n",
                h.criterion,
                format!("{:.0}%", h.level * 100.0),
                h.kappa,
                fmt_support(&h.support),
                h.reference,
                if h.fallback { " (fallback)" } else { "" }
            ));
        }
        out
    }
}

/// CSV path table: kappa, d_1..d_G, support bitmask, SSE.
pub fn path_table_csv(path: &NngPath) -> Result<String> {
    let g = path.sizes.len();
    if g > 64 {
        return Err(Error::Usage(format!(
            "path table bitmask supports at most 64 groups, got {g}"
        )));
    }
    let mut out = String::from("kappa");
    for i in 1..=g {
        out.push_str(&format!(",d{i}"));
    }
    out.push_str(",support_mask,sse\n");
    for c in &path.candidates {
        let mut mask = 0u64;
        for &s in &c.support {
            mask |= 1 << s;
        }
        out.push_str(&format!("{}", c.kappa));
        for v in &c.d {
            out.push_str(&format!(",{v}"));
        }
        out.push_str(&format!(",{mask},{}\n", c.sse));
    }
    Ok(out)
}
