//! Synthetic designs and the replication harness for measuring group
//! identification rates.
//!
//! Each replication generates a dataset, standardises it, runs a chain,
//! computes the garrotte path and the df table, applies every requested
//! selection method, and tallies which groups were selected. Replication `r`
//! draws all of its randomness from stream `r` of the base seed, so tallies
//! are reproducible and independent of the number of worker threads.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::criteria::{
    score_path, select_best, select_heuristic, DfSource, HeuristicStat, IcKind,
};
use crate::data::standardize_matrix;
use crate::dof::group_dof_pe;
use crate::error::{Error, Result};
use crate::gibbs::{posterior_summary, run_chain_from, McmcConfig, PriorKind};
use crate::groups::GroupHierarchy;
use crate::nng::{sparsify, DEFAULT_GRID};
use crate::rng::RngStream;

/// Credible level used by the heuristic selection methods.
pub const HEURISTIC_LEVEL: f64 = 0.90;

/// A way of choosing one candidate from the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SelectionMethod {
    Ic(IcKind, DfSource),
    Heuristic(HeuristicStat),
}

impl SelectionMethod {
    /// Canonical presentation order: the heuristic columns, then each
    /// criterion under the garrotte df, then under the posterior-expected df.
    pub fn canonical() -> Vec<SelectionMethod> {
        let mut out = vec![
            SelectionMethod::Heuristic(HeuristicStat::VarExp),
            SelectionMethod::Heuristic(HeuristicStat::ExcErr),
        ];
        for df in [DfSource::YuanLin, DfSource::PosteriorExpected] {
            for kind in IcKind::ALL {
                out.push(SelectionMethod::Ic(kind, df));
            }
        }
        out
    }

    pub fn name(&self) -> String {
        match self {
            SelectionMethod::Ic(kind, df) => format!("{}_{}", kind.name(), df.name()),
            SelectionMethod::Heuristic(stat) => stat.name().to_string(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let canon = s.trim().to_ascii_lowercase();
        match canon.as_str() {
            "varexp" => return Ok(SelectionMethod::Heuristic(HeuristicStat::VarExp)),
            "excerr" => return Ok(SelectionMethod::Heuristic(HeuristicStat::ExcErr)),
            _ => {}
        }
        if let Some((kind, df)) = canon.split_once('_') {
            let kind = match kind {
                "bic" => IcKind::Bic,
                "aic" => IcKind::Aic,
                "aicc" => IcKind::Aicc,
                "mmlu" => IcKind::Mmlu,
                _ => return Err(Error::Usage(format!("unknown selection method '{s}'"))),
            };
            let df = match df {
                "yl" => DfSource::YuanLin,
                "pe" => DfSource::PosteriorExpected,
                _ => return Err(Error::Usage(format!("unknown df source in '{s}'"))),
            };
            return Ok(SelectionMethod::Ic(kind, df));
        }
        Err(Error::Usage(format!("unknown selection method '{s}'")))
    }

    /// Parse a comma-separated list; `all` expands to the canonical set.
    pub fn parse_list(spec: &str) -> Result<Vec<SelectionMethod>> {
        if spec.trim().eq_ignore_ascii_case("all") {
            return Ok(Self::canonical());
        }
        spec.split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Self::parse)
            .collect()
    }
}

/// Within-group covariance of the generated predictors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum CovarianceSpec {
    /// Common variance with a common correlation inside each group, zero
    /// across groups.
    WithinGroup { variance: f64, correlation: f64 },
    /// Independent standard normal columns.
    IidStandard,
}

/// How the true coefficients are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefficientSpec {
    /// Fixed values at fixed (0-based) positions, identical across
    /// replications.
    Fixed(Vec<(usize, f64)>),
    /// The leading `active[g]` coefficients of group g get a fresh ±1 sign
    /// each replication.
    RandomSigns { active: Vec<usize> },
}

/// A fully specified synthetic design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimDesign {
    pub name: String,
    pub n: usize,
    pub group_sizes: Vec<usize>,
    pub covariance: CovarianceSpec,
    pub coefficients: CoefficientSpec,
    pub noise_var: f64,
}

/// One generated replication.
#[derive(Debug, Clone)]
pub struct SimData {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub beta: DVector<f64>,
    pub hierarchy: GroupHierarchy,
    pub active_groups: Vec<bool>,
    /// Realised Var(xᵀβ)/σ² under the design covariance.
    pub snr: f64,
}

impl SimDesign {
    /// n = 50, p = 60, groups (5,5,10,10,15,15), X within-group correlated
    /// (variance 1.25, correlation 0.2), five fixed active coefficients.
    pub fn example1(noise_var: f64) -> Self {
        SimDesign {
            name: "example1".into(),
            n: 50,
            group_sizes: vec![5, 5, 10, 10, 15, 15],
            covariance: CovarianceSpec::WithinGroup { variance: 1.25, correlation: 0.2 },
            // 1-based positions 3, 11, 12, 31, 32.
            coefficients: CoefficientSpec::Fixed(vec![
                (2, 3.2),
                (10, -2.0),
                (11, 1.0),
                (30, 1.5),
                (31, -1.5),
            ]),
            noise_var,
        }
    }

    /// n = 200, p = 100, ten groups of ten, independent standard-normal
    /// predictors, (10,8,6,4,2,1,0,0,0,0) active ±1 coefficients per group.
    pub fn example2() -> Self {
        SimDesign {
            name: "example2".into(),
            n: 200,
            group_sizes: vec![10; 10],
            covariance: CovarianceSpec::IidStandard,
            coefficients: CoefficientSpec::RandomSigns {
                active: vec![10, 8, 6, 4, 2, 1, 0, 0, 0, 0],
            },
            noise_var: 16.0,
        }
    }

    pub fn by_name(name: &str, noise_var: Option<f64>) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "example1" => Ok(Self::example1(noise_var.unwrap_or(4.0))),
            "example2" => {
                if noise_var.is_some_and(|v| v != 16.0) {
                    return Err(Error::Usage("example2 has a fixed noise variance of 16".into()));
                }
                Ok(Self::example2())
            }
            other => Err(Error::Usage(format!(
                "unknown design '{other}' (expected example1 or example2)"
            ))),
        }
    }

    pub fn p(&self) -> usize {
        self.group_sizes.iter().sum()
    }

    pub fn hierarchy(&self) -> GroupHierarchy {
        let mut raw = Vec::with_capacity(self.p());
        for (g, &s) in self.group_sizes.iter().enumerate() {
            raw.extend(std::iter::repeat((g + 1) as u32).take(s));
        }
        GroupHierarchy::new(self.p(), &[raw]).expect("design layout is valid")
    }

    fn draw_coefficients(&self, rng: &mut RngStream) -> DVector<f64> {
        let p = self.p();
        let mut beta = DVector::zeros(p);
        match &self.coefficients {
            CoefficientSpec::Fixed(entries) => {
                for &(j, v) in entries {
                    beta[j] = v;
                }
            }
            CoefficientSpec::RandomSigns { active } => {
                let mut start = 0;
                for (g, &s) in self.group_sizes.iter().enumerate() {
                    for j in 0..active[g] {
                        beta[start + j] = if rng.random::<bool>() { 1.0 } else { -1.0 };
                    }
                    start += s;
                }
            }
        }
        beta
    }

    /// Analytic Var(xᵀβ) under the design covariance.
    fn signal_variance(&self, beta: &DVector<f64>) -> f64 {
        match self.covariance {
            CovarianceSpec::IidStandard => beta.norm_squared(),
            CovarianceSpec::WithinGroup { variance, correlation } => {
                let cov = variance * correlation;
                let mut total = 0.0;
                let mut start = 0;
                for &s in &self.group_sizes {
                    let seg = beta.rows(start, s);
                    let sum: f64 = seg.iter().sum();
                    let sq: f64 = seg.iter().map(|v| v * v).sum();
                    total += variance * sq + cov * (sum * sum - sq);
                    start += s;
                }
                total
            }
        }
    }

    /// Generate one replication from the stream.
    pub fn generate(&self, rng: &mut RngStream) -> SimData {
        let p = self.p();
        let n = self.n;
        let beta = self.draw_coefficients(rng);

        let mut x = DMatrix::zeros(n, p);
        match self.covariance {
            CovarianceSpec::IidStandard => {
                for i in 0..n {
                    for j in 0..p {
                        x[(i, j)] = rng.sample::<f64, _>(StandardNormal);
                    }
                }
            }
            CovarianceSpec::WithinGroup { variance, correlation } => {
                // x_j = sqrt(cov) u_g + sqrt(variance - cov) z_j gives the
                // common covariance cov inside the group.
                let cov = variance * correlation;
                let shared = cov.sqrt();
                let own = (variance - cov).sqrt();
                for i in 0..n {
                    let mut start = 0;
                    for &s in &self.group_sizes {
                        let u: f64 = rng.sample(StandardNormal);
                        for j in start..start + s {
                            let z: f64 = rng.sample(StandardNormal);
                            x[(i, j)] = shared * u + own * z;
                        }
                        start += s;
                    }
                }
            }
        }

        let noise = self.noise_var.sqrt();
        let y = &x * &beta
            + DVector::from_fn(n, |_, _| noise * rng.sample::<f64, _>(StandardNormal));

        let mut active_groups = Vec::with_capacity(self.group_sizes.len());
        let mut start = 0;
        for &s in &self.group_sizes {
            active_groups.push(beta.rows(start, s).iter().any(|&v| v != 0.0));
            start += s;
        }

        SimData {
            snr: self.signal_variance(&beta) / self.noise_var,
            x,
            y,
            beta,
            hierarchy: self.hierarchy(),
            active_groups,
        }
    }
}

/// Chain/selection settings for a replication study.
#[derive(Debug, Clone, Copy)]
pub struct StudyConfig {
    pub prior: PriorKind,
    pub iterations: usize,
    pub burn_in: usize,
    pub grid_size: usize,
    pub reps: usize,
    pub base_seed: u64,
}

impl StudyConfig {
    pub fn new(prior: PriorKind, reps: usize, base_seed: u64) -> Self {
        StudyConfig {
            prior,
            iterations: 10_000,
            burn_in: 1_000,
            grid_size: DEFAULT_GRID,
            reps,
            base_seed,
        }
    }
}

/// Selection counts per method and group over a replication study.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentificationTally {
    pub design: String,
    pub methods: Vec<SelectionMethod>,
    pub active: Vec<bool>,
    pub reps: usize,
    pub completed: usize,
    /// counts[m][g] = replications in which method m selected group g.
    pub counts: Vec<Vec<usize>>,
    /// Mean realised signal-to-noise ratio over completed replications.
    pub mean_snr: f64,
    /// Failed replications as (index, error) pairs; excluded from counts.
    pub failures: Vec<(usize, String)>,
}

struct RepOutcome {
    selected: Vec<Vec<bool>>,
    snr: f64,
}

fn run_one_replication(
    design: &SimDesign,
    methods: &[SelectionMethod],
    cfg: &StudyConfig,
    rep: usize,
) -> Result<RepOutcome> {
    let mut rng = RngStream::new(cfg.base_seed, rep as u64);
    let data = design.generate(&mut rng);

    let names: Vec<String> = (1..=data.x.ncols()).map(|j| format!("x{j}")).collect();
    let (x, _, _) = standardize_matrix(&data.x, &names)?;
    let y_mean = data.y.sum() / data.y.len() as f64;
    let y = data.y.map(|v| v - y_mean);

    let mcmc = McmcConfig {
        prior: cfg.prior,
        iterations: cfg.iterations,
        burn_in: cfg.burn_in,
        seed: cfg.base_seed,
    };
    let draws = run_chain_from(&x, &y, &data.hierarchy, &mcmc, &mut rng)?;
    let summary = posterior_summary(&draws)?;

    let groups = data.hierarchy.selection_groups(0);
    let path = sparsify(&x, &summary.beta_bar, &groups, cfg.grid_size)?;

    let needs_pe = methods
        .iter()
        .any(|m| matches!(m, SelectionMethod::Ic(_, DfSource::PosteriorExpected)));
    let pe_table = if needs_pe {
        Some(group_dof_pe(&draws, &x, &data.hierarchy, 0)?)
    } else {
        None
    };

    let n = x.nrows();
    let y_norm2 = y.norm_squared();
    let g_count = groups.len();
    let mut selected = Vec::with_capacity(methods.len());
    for method in methods {
        let support: Vec<usize> = match method {
            SelectionMethod::Ic(kind, df) => {
                let scores =
                    score_path(&path, n, summary.sigma2_bar, y_norm2, *kind, *df, pe_table.as_ref())?;
                select_best(&scores).support.clone()
            }
            SelectionMethod::Heuristic(stat) => {
                let sel = select_heuristic(
                    &path,
                    &draws,
                    &x,
                    &summary.beta_bar,
                    *stat,
                    HEURISTIC_LEVEL,
                )?;
                path.candidates[sel.candidate].support.clone()
            }
        };
        let mut flags = vec![false; g_count];
        for g in support {
            flags[g] = true;
        }
        selected.push(flags);
    }
    Ok(RepOutcome { selected, snr: data.snr })
}

/// Run `cfg.reps` replications of the design and tally the selections.
///
/// Replications run in parallel; the tally is a deterministic function of
/// `(design, methods, cfg)` because replication `r` uses stream `r`.
pub fn run_replications(
    design: &SimDesign,
    methods: &[SelectionMethod],
    cfg: &StudyConfig,
) -> Result<IdentificationTally> {
    if cfg.reps == 0 {
        return Err(Error::Usage("replication count must be at least 1".into()));
    }
    let outcomes: Vec<(usize, Result<RepOutcome>)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| (rep, run_one_replication(design, methods, cfg, rep)))
        .collect();

    let g_count = design.group_sizes.len();
    let mut counts = vec![vec![0usize; g_count]; methods.len()];
    let mut failures = Vec::new();
    let mut completed = 0usize;
    let mut snr_sum = 0.0;
    for (rep, outcome) in outcomes {
        match outcome {
            Ok(out) => {
                completed += 1;
                snr_sum += out.snr;
                for (m, flags) in out.selected.iter().enumerate() {
                    for (g, &hit) in flags.iter().enumerate() {
                        if hit {
                            counts[m][g] += 1;
                        }
                    }
                }
            }
            Err(e) => failures.push((rep, e.to_string())),
        }
    }
    if completed == 0 {
        return Err(Error::Selection("every replication failed".into()));
    }

    let active: Vec<bool> = {
        // Activity pattern is a property of the design, not the draw.
        let mut rng = RngStream::new(cfg.base_seed, 0);
        let beta = design.draw_coefficients(&mut rng);
        let mut flags = Vec::with_capacity(g_count);
        let mut start = 0;
        for &s in &design.group_sizes {
            flags.push(beta.rows(start, s).iter().any(|&v| v != 0.0));
            start += s;
        }
        flags
    };

    Ok(IdentificationTally {
        design: design.name.clone(),
        methods: methods.to_vec(),
        active,
        reps: cfg.reps,
        completed,
        counts,
        mean_snr: snr_sum / completed as f64,
        failures,
    })
}

/// Percentages and overall-correct sums derived from a tally.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TallyReport {
    pub design: String,
    pub method_names: Vec<String>,
    pub active: Vec<bool>,
    /// percentages[m][g], selections per hundred replications.
    pub percentages: Vec<Vec<f64>>,
    /// Per method: Σ_g (active ? pct : 100 − pct). Out of 100·G.
    pub overall: Vec<f64>,
    pub completed: usize,
    pub reps: usize,
    pub mean_snr: f64,
    pub failures: usize,
}

/// Selection percentages per group with the overall sum of correct
/// identifications, scaled to percentages of the completed replications.
pub fn tally_report(tally: &IdentificationTally) -> TallyReport {
    let g_count = tally.active.len();
    let mut percentages = Vec::with_capacity(tally.methods.len());
    let mut overall = Vec::with_capacity(tally.methods.len());
    for counts in &tally.counts {
        let pct: Vec<f64> = counts
            .iter()
            .map(|&c| 100.0 * c as f64 / tally.completed as f64)
            .collect();
        let sum: f64 = (0..g_count)
            .map(|g| if tally.active[g] { pct[g] } else { 100.0 - pct[g] })
            .sum();
        percentages.push(pct);
        overall.push(sum);
    }
    TallyReport {
        design: tally.design.clone(),
        method_names: tally.methods.iter().map(|m| m.name()).collect(),
        active: tally.active.clone(),
        percentages,
        overall,
        completed: tally.completed,
        reps: tally.reps,
        mean_snr: tally.mean_snr,
        failures: tally.failures.len(),
    }
}

impl TallyReport {
    /// Text table: one row per group, one column per method, plus the
    /// overall-correct row.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "design {}: {} of {} replications (mean SNR {:.2})\n",
            self.design, self.completed, self.reps, self.mean_snr
        ));
        if self.failures > 0 {
            out.push_str(&format!("excluded failures: {}\n", self.failures));
        }
        out.push_str(&format!("{:<10}", "group"));
        for name in &self.method_names {
            out.push_str(&format!("{name:>10}"));
        }
        out.push('\n');
        for g in 0..self.active.len() {
            let label = format!("{}{}", g + 1, if self.active[g] { "*" } else { " " });
            out.push_str(&format!("{label:<10}"));
            for pct in &self.percentages {
                out.push_str(&format!("{:>10.1}", pct[g]));
            }
            out.push('\n');
        }
        out.push_str(&format!("{:<10}", "overall"));
        for v in &self.overall {
            out.push_str(&format!("{v:>10.1}"));
        }
        out.push('\n');
        out
    }

    /// CSV mirroring the text table: rows are groups plus an overall row,
    /// columns are methods.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,active");
        for name in &self.method_names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for g in 0..self.active.len() {
            out.push_str(&format!("{},{}", g + 1, if self.active[g] { 1 } else { 0 }));
            for pct in &self.percentages {
                out.push_str(&format!(",{:.4}", pct[g]));
            }
            out.push('\n');
        }
        out.push_str("overall,");
        for v in &self.overall {
            out.push_str(&format!(",{:.4}", v));
        }
        out.push('\n');
        out
    }
}
