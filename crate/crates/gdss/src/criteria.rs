//! Scoring and selection of candidate models on the garrotte path.
//!
//! The goodness-of-fit term is the KL divergence from the reference model
//! `N(Xβ̄, σ̄²Iₙ)` to the candidate `N(Xβ_κ, σ²Iₙ)`, with the candidate's σ²
//! profiled out in closed form; BIC, AIC, AICc and MMLu penalties are added
//! on top of it. The original credible-interval heuristics on the
//! variation-explained and excess-error statistics are also provided.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::dof::{dof_pe, dof_yl, GroupDofTable};
use crate::error::{Error, Result};
use crate::gibbs::PosteriorDraws;
use crate::nng::NngPath;
use crate::validation::quantile;

/// Information criterion family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    Bic,
    Aic,
    Aicc,
    Mmlu,
}

impl IcKind {
    pub const ALL: [IcKind; 4] = [IcKind::Bic, IcKind::Aic, IcKind::Aicc, IcKind::Mmlu];

    pub fn name(&self) -> &'static str {
        match self {
            IcKind::Bic => "bic",
            IcKind::Aic => "aic",
            IcKind::Aicc => "aicc",
            IcKind::Mmlu => "mmlu",
        }
    }
}

/// Which degrees-of-freedom estimate feeds the penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DfSource {
    #[serde(rename = "yl")]
    YuanLin,
    #[serde(rename = "pe")]
    PosteriorExpected,
}

impl DfSource {
    pub fn name(&self) -> &'static str {
        match self {
            DfSource::YuanLin => "yl",
            DfSource::PosteriorExpected => "pe",
        }
    }
}

/// Coefficient of the σ̄²/(2σ²) term in the KL divergence. `N` is the
/// analytic value; `NSquared` reproduces a printed variant and is kept only
/// so the two can be compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KlCoefficient {
    N,
    NSquared,
}

/// KL divergence from `N(Xβ̄, σ̄²Iₙ)` to `N(Xβ_κ, σ²Iₙ)`.
pub fn kl_divergence(
    beta_bar: &DVector<f64>,
    sigma2_bar: f64,
    beta_kappa: &DVector<f64>,
    sigma2: f64,
    x: &DMatrix<f64>,
) -> f64 {
    let sse = (x * beta_kappa - x * beta_bar).norm_squared();
    kl_from_sse(KlCoefficient::N, x.nrows(), sse, sigma2_bar, sigma2)
}

/// KL divergence with the fit discrepancy `‖Xβ_κ − Xβ̄‖²` already known.
pub fn kl_from_sse(
    coef: KlCoefficient,
    n: usize,
    sse: f64,
    sigma2_bar: f64,
    sigma2: f64,
) -> f64 {
    let n = n as f64;
    let lead = match coef {
        KlCoefficient::N => n,
        KlCoefficient::NSquared => n * n,
    };
    n / 2.0 * (sigma2 / sigma2_bar).ln() - n / 2.0
        + lead * sigma2_bar / (2.0 * sigma2)
        + sse / (2.0 * sigma2)
}

/// The σ² that minimises the criterion at a fixed candidate:
/// `σ̂² = SSE/(n − d) + σ̄²`, with `d = k` only under MMLu.
pub fn profile_sigma2(sse: f64, n: usize, d: f64, sigma2_bar: f64) -> Result<f64> {
    if d >= n as f64 {
        return Err(Error::Inadmissible(format!(
            "degrees of freedom {d:.3} reach the sample size {n}"
        )));
    }
    Ok(sse / (n as f64 - d) + sigma2_bar)
}

/// Complexity penalty of a criterion at `k` estimated degrees of freedom.
///
/// `sigma2` and `y_norm2` (the squared norm of the centered response) only
/// enter the MMLu penalty.
pub fn penalty(kind: IcKind, k: f64, n: usize, sigma2: f64, y_norm2: f64) -> Result<f64> {
    match kind {
        IcKind::Bic => Ok(k / 2.0 * (n as f64).ln()),
        IcKind::Aic => Ok(k),
        IcKind::Aicc => {
            let denom = n as f64 - k - 1.0;
            if denom <= 0.0 {
                return Err(Error::Inadmissible(format!(
                    "AICc needs n - k - 1 > 0 (n = {n}, k = {k:.3})"
                )));
            }
            Ok(k * n as f64 / denom)
        }
        IcKind::Mmlu => {
            let snr = y_norm2 / (2.0 * sigma2);
            Ok((k + 1.0) / 2.0 * snr.ln() - statrs::function::gamma::ln_gamma((k + 3.0) / 2.0)
                + 0.5 * (k + 1.0).ln())
        }
    }
}

/// Scored candidate: `total = kl + penalty`.
#[derive(Debug, Clone)]
pub struct ModelScore {
    /// Index into `path.candidates`.
    pub candidate: usize,
    pub kappa: f64,
    pub support: Vec<usize>,
    /// Estimated degrees of freedom.
    pub k: f64,
    pub sigma2_hat: f64,
    pub kl: f64,
    pub penalty: f64,
    pub total: f64,
}

/// Score every admissible candidate on the path under one criterion and df
/// source. Candidates failing the AICc or profiling admissibility conditions
/// are dropped; an empty admissible set is an error.
pub fn score_path(
    path: &NngPath,
    n: usize,
    sigma2_bar: f64,
    y_norm2: f64,
    kind: IcKind,
    df_source: DfSource,
    pe_table: Option<&GroupDofTable>,
) -> Result<Vec<ModelScore>> {
    if df_source == DfSource::PosteriorExpected && pe_table.is_none() {
        return Err(Error::Usage(
            "posterior-expected df requested but no df table supplied".into(),
        ));
    }
    let mut scores = Vec::new();
    for (idx, cand) in path.candidates.iter().enumerate() {
        let k = match df_source {
            DfSource::YuanLin => dof_yl(&cand.d, &path.sizes),
            DfSource::PosteriorExpected => dof_pe(&cand.support, pe_table.unwrap()),
        };
        let d_profile = if kind == IcKind::Mmlu { k } else { 0.0 };
        let sigma2_hat = match profile_sigma2(cand.sse, n, d_profile, sigma2_bar) {
            Ok(v) => v,
            Err(Error::Inadmissible(_)) => continue,
            Err(e) => return Err(e),
        };
        let pen = match penalty(kind, k, n, sigma2_hat, y_norm2) {
            Ok(v) => v,
            Err(Error::Inadmissible(_)) => continue,
            Err(e) => return Err(e),
        };
        let kl = kl_from_sse(KlCoefficient::N, n, cand.sse, sigma2_bar, sigma2_hat);
        scores.push(ModelScore {
            candidate: idx,
            kappa: cand.kappa,
            support: cand.support.clone(),
            k,
            sigma2_hat,
            kl,
            penalty: pen,
            total: kl + pen,
        });
    }
    if scores.is_empty() {
        return Err(Error::Selection(format!(
            "no admissible candidate for {} with {} df",
            kind.name(),
            df_source.name()
        )));
    }
    Ok(scores)
}

/// The minimising score; ties break toward the smaller support, then the
/// larger κ.
pub fn select_best(scores: &[ModelScore]) -> &ModelScore {
    scores
        .iter()
        .min_by(|a, b| {
            a.total
                .partial_cmp(&b.total)
                .unwrap()
                .then(a.support.len().cmp(&b.support.len()))
                .then(b.kappa.partial_cmp(&a.kappa).unwrap())
        })
        .expect("score_path never returns an empty list")
}

/// Heuristic selection statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeuristicStat {
    VarExp,
    ExcErr,
}

impl HeuristicStat {
    pub fn name(&self) -> &'static str {
        match self {
            HeuristicStat::VarExp => "varexp",
            HeuristicStat::ExcErr => "excerr",
        }
    }
}

/// Per-draw fitted values and noise draws, shared by the heuristic statistics.
struct DrawFits {
    /// n × retained matrix of X β^(t).
    fits: DMatrix<f64>,
    fit_norm2: Vec<f64>,
    sigma2: Vec<f64>,
    n: f64,
}

impl DrawFits {
    fn new(draws: &PosteriorDraws, x: &DMatrix<f64>) -> Self {
        let fits = x * draws.beta.transpose();
        let fit_norm2 = (0..fits.ncols()).map(|t| fits.column(t).norm_squared()).collect();
        DrawFits {
            fits,
            fit_norm2,
            sigma2: draws.sigma2.iter().copied().collect(),
            n: x.nrows() as f64,
        }
    }

    /// Per-draw statistic against the candidate fit `v = X β_κ`.
    fn stat(&self, v: &DVector<f64>, stat: HeuristicStat) -> Vec<f64> {
        let vn2 = v.norm_squared();
        let cross = self.fits.transpose() * v;
        (0..self.sigma2.len())
            .map(|t| {
                let gap2 = (self.fit_norm2[t] - 2.0 * cross[t] + vn2).max(0.0) / self.n;
                match stat {
                    HeuristicStat::VarExp => {
                        let signal = self.fit_norm2[t] / self.n;
                        signal / (signal + self.sigma2[t] + gap2)
                    }
                    HeuristicStat::ExcErr => {
                        (gap2 + self.sigma2[t]).sqrt() - self.sigma2[t].sqrt()
                    }
                }
            })
            .collect()
    }
}

/// Per-draw variation explained ρ²_κ of the sparsified predictor `β_κ`.
pub fn variation_explained(
    draws: &PosteriorDraws,
    x: &DMatrix<f64>,
    beta_kappa: &DVector<f64>,
) -> Vec<f64> {
    DrawFits::new(draws, x).stat(&(x * beta_kappa), HeuristicStat::VarExp)
}

/// Per-draw excess error ψ_κ of the sparsified predictor `β_κ`.
pub fn excess_error(
    draws: &PosteriorDraws,
    x: &DMatrix<f64>,
    beta_kappa: &DVector<f64>,
) -> Vec<f64> {
    DrawFits::new(draws, x).stat(&(x * beta_kappa), HeuristicStat::ExcErr)
}

/// Outcome of a credible-interval heuristic selection.
#[derive(Debug, Clone)]
pub struct HeuristicSelection {
    /// Index into `path.candidates`.
    pub candidate: usize,
    /// Posterior mean of the κ = 0 reference statistic.
    pub reference: f64,
    /// True when no candidate's interval contained the reference and the
    /// full (κ = 0) model was returned instead.
    pub fallback: bool,
}

/// Select the smallest support whose equal-tailed credible interval of the
/// statistic contains the κ = 0 reference expectation.
pub fn select_heuristic(
    path: &NngPath,
    draws: &PosteriorDraws,
    x: &DMatrix<f64>,
    beta_bar: &DVector<f64>,
    stat: HeuristicStat,
    level: f64,
) -> Result<HeuristicSelection> {
    if path.candidates.is_empty() {
        return Err(Error::Selection("empty candidate path".into()));
    }
    if !(0.0..1.0).contains(&level) || level <= 0.0 {
        return Err(Error::Usage(format!("credible level must be in (0,1), got {level}")));
    }
    let engine = DrawFits::new(draws, x);
    let reference_stats = engine.stat(&(x * beta_bar), stat);
    let reference = reference_stats.iter().sum::<f64>() / reference_stats.len() as f64;

    // Smallest support first; ties by larger kappa (sparser end of the path).
    let mut order: Vec<usize> = (0..path.candidates.len()).collect();
    order.sort_by(|&a, &b| {
        let ca = &path.candidates[a];
        let cb = &path.candidates[b];
        ca.support
            .len()
            .cmp(&cb.support.len())
            .then(cb.kappa.partial_cmp(&ca.kappa).unwrap())
    });

    let lo_q = (1.0 - level) / 2.0;
    let hi_q = 1.0 - lo_q;
    for idx in order {
        let cand = &path.candidates[idx];
        let beta_kappa = crate::nng::reconstruct_beta(&cand.d, beta_bar, &path.groups);
        let mut stats = engine.stat(&(x * &beta_kappa), stat);
        stats.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let lo = quantile(&stats, lo_q);
        let hi = quantile(&stats, hi_q);
        if lo <= reference && reference <= hi {
            return Ok(HeuristicSelection { candidate: idx, reference, fallback: false });
        }
    }
    // Nothing qualified: return the kappa = 0 model with a flag.
    let full = path
        .candidates
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.kappa.partial_cmp(&b.1.kappa).unwrap())
        .map(|(i, _)| i)
        .unwrap();
    Ok(HeuristicSelection { candidate: full, reference, fallback: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gibbs::PriorKind;
    use crate::nng;
    use crate::rng::RngStream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_x(n: usize, p: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = RngStream::new(seed, 0);
        DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    #[test]
    fn kl_zero_at_reference() {
        let x = random_x(6, 3, 1);
        let b = DVector::from_vec(vec![1.0, -0.5, 0.25]);
        assert_eq!(kl_divergence(&b, 1.3, &b, 1.3, &x), 0.0);
    }

    #[test]
    fn kl_hand_value() {
        // n = 3, same mean, sigma2 = 2 sigma2_bar:
        // (3/2) ln 2 - 3/2 + 3/4 = (3/2)(ln 2 - 1) + 3/4.
        let x = random_x(3, 2, 2);
        let b = DVector::from_vec(vec![0.4, 0.6]);
        let v = kl_divergence(&b, 1.0, &b, 2.0, &x);
        let expect = 1.5 * (2.0f64.ln() - 1.0) + 0.75;
        assert!((v - expect).abs() < 1e-12, "{v} vs {expect}");
        assert!((expect - 0.2897).abs() < 1e-4);
    }

    #[test]
    fn kl_matches_monte_carlo() {
        // n = 2 instance against a simulated E_P[log p/q].
        let x = random_x(2, 2, 3);
        let beta_bar = DVector::from_vec(vec![0.8, -0.3]);
        let beta_kappa = DVector::from_vec(vec![0.5, 0.0]);
        let (s2_bar, s2) = (0.7, 1.4);
        let analytic = kl_divergence(&beta_bar, s2_bar, &beta_kappa, s2, &x);

        let mp = &x * &beta_bar;
        let mq = &x * &beta_kappa;
        let mut rng = RngStream::new(4, 0);
        let m = 2_000_000;
        let mut acc = 0.0;
        for _ in 0..m {
            let mut logp = 0.0;
            let mut logq = 0.0;
            for i in 0..2 {
                let w = mp[i] + s2_bar.sqrt() * rng.sample::<f64, _>(StandardNormal);
                logp += -0.5 * (w - mp[i]).powi(2) / s2_bar - 0.5 * s2_bar.ln();
                logq += -0.5 * (w - mq[i]).powi(2) / s2 - 0.5 * s2.ln();
            }
            acc += logp - logq;
        }
        let mc = acc / m as f64;
        assert!((analytic - mc).abs() < 1e-2, "{analytic} vs {mc}");
    }

    #[test]
    fn profile_sigma2_cases() {
        assert_eq!(profile_sigma2(0.0, 10, 0.0, 2.5).unwrap(), 2.5);
        // d = 0, SSE = n sigma2_bar doubles it.
        assert_eq!(profile_sigma2(30.0, 10, 0.0, 3.0).unwrap(), 6.0);
        assert!(matches!(
            profile_sigma2(1.0, 5, 5.0, 1.0),
            Err(Error::Inadmissible(_))
        ));
    }

    #[test]
    fn profiled_sigma2_is_the_kl_minimiser() {
        // d = 0: golden-section minimisation of the KL over sigma2 agrees.
        let n = 17;
        let sse = 4.2;
        let s2_bar = 0.9;
        let hat = profile_sigma2(sse, n, 0.0, s2_bar).unwrap();
        let f = |s2: f64| kl_from_sse(KlCoefficient::N, n, sse, s2_bar, s2);
        let (mut a, mut b) = (hat / 50.0, hat * 50.0);
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        for _ in 0..300 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if f(c) < f(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let numeric = 0.5 * (a + b);
        assert!((numeric - hat).abs() < 1e-6 * hat, "{numeric} vs {hat}");
    }

    #[test]
    fn penalty_hand_values() {
        assert_eq!(penalty(IcKind::Bic, 0.0, 50, 1.0, 10.0).unwrap(), 0.0);
        let aicc = penalty(IcKind::Aicc, 5.0, 50, 1.0, 10.0).unwrap();
        assert!((aicc - 250.0 / 44.0).abs() < 1e-12);
        // MMLu with k = 1 and ||y||^2 = 2 sigma2: ln Gamma(2) = 0, so the
        // penalty is ln(2)/2.
        let mml = penalty(IcKind::Mmlu, 1.0, 33, 3.0, 6.0).unwrap();
        assert!((mml - 0.5 * 2.0f64.ln()).abs() < 1e-12, "{mml}");
        assert!(matches!(
            penalty(IcKind::Aicc, 49.0, 50, 1.0, 10.0),
            Err(Error::Inadmissible(_))
        ));
    }

    fn toy_path(seed: u64) -> (DMatrix<f64>, DVector<f64>, NngPath) {
        let x = random_x(12, 4, seed);
        let beta_bar = DVector::from_vec(vec![1.5, -0.9, 0.03, 0.02]);
        let groups = vec![vec![0, 1], vec![2, 3]];
        let path = nng::sparsify(&x, &beta_bar, &groups, 60).unwrap();
        (x, beta_bar, path)
    }

    #[test]
    fn score_path_null_candidate_assembly() {
        let (x, beta_bar, path) = toy_path(5);
        let n = x.nrows();
        let scores =
            score_path(&path, n, 0.8, 25.0, IcKind::Bic, DfSource::YuanLin, None).unwrap();
        // First candidate on the path is the empty support.
        let null = &scores[0];
        assert!(null.support.is_empty());
        assert_eq!(null.k, 0.0);
        let sse = (x * &beta_bar).norm_squared();
        assert!((path.candidates[0].sse - sse).abs() < 1e-9 * sse);
        let hat = profile_sigma2(sse, n, 0.0, 0.8).unwrap();
        let expect = kl_from_sse(KlCoefficient::N, n, sse, 0.8, hat);
        assert!((null.kl - expect).abs() < 1e-9, "{} vs {expect}", null.kl);
        assert_eq!(null.penalty, 0.0);
        assert_eq!(null.total, null.kl);
    }

    #[test]
    fn identical_candidates_score_identically() {
        let (_, _, path) = toy_path(6);
        let scores =
            score_path(&path, 12, 1.0, 30.0, IcKind::Mmlu, DfSource::YuanLin, None).unwrap();
        let again =
            score_path(&path, 12, 1.0, 30.0, IcKind::Mmlu, DfSource::YuanLin, None).unwrap();
        for (a, b) in scores.iter().zip(again.iter()) {
            assert_eq!(a.total, b.total);
        }
    }

    #[test]
    fn extra_degrees_of_freedom_increase_totals() {
        // Same SSE, larger k: every criterion's total must grow (MMLu needs a
        // sane signal-to-noise ratio, which regression data always has).
        let n = 40;
        let sse = 3.0;
        let s2_bar = 1.1;
        let y_norm2 = 80.0;
        for kind in IcKind::ALL {
            for k in [0.0, 1.0, 3.5, 7.0] {
                let d0 = if kind == IcKind::Mmlu { k } else { 0.0 };
                let d1 = if kind == IcKind::Mmlu { k + 1.0 } else { 0.0 };
                let s0 = profile_sigma2(sse, n, d0, s2_bar).unwrap();
                let s1 = profile_sigma2(sse, n, d1, s2_bar).unwrap();
                let t0 = kl_from_sse(KlCoefficient::N, n, sse, s2_bar, s0)
                    + penalty(kind, k, n, s0, y_norm2).unwrap();
                let t1 = kl_from_sse(KlCoefficient::N, n, sse, s2_bar, s1)
                    + penalty(kind, k + 1.0, n, s1, y_norm2).unwrap();
                assert!(t1 > t0, "{kind:?} at k={k}: {t1} <= {t0}");
            }
        }
    }

    #[test]
    fn select_best_breaks_ties_toward_sparsity() {
        let mk = |candidate: usize, total: f64, support: Vec<usize>, kappa: f64| ModelScore {
            candidate,
            kappa,
            support,
            k: 1.0,
            sigma2_hat: 1.0,
            kl: total,
            penalty: 0.0,
            total,
        };
        let scores = vec![
            mk(0, 5.0, vec![0, 1], 0.5),
            mk(1, 5.0, vec![0], 0.2),
            mk(2, 5.0, vec![1], 0.9),
        ];
        let best = select_best(&scores);
        assert_eq!(best.candidate, 2); // singleton support, larger kappa
    }

    #[test]
    fn nsquared_variant_differs() {
        let v_n = kl_from_sse(KlCoefficient::N, 10, 1.0, 1.0, 2.0);
        let v_n2 = kl_from_sse(KlCoefficient::NSquared, 10, 1.0, 1.0, 2.0);
        assert!(v_n2 > v_n);
    }

    fn constant_draws(beta: &[f64], sigma2: f64, reps: usize) -> PosteriorDraws {
        let p = beta.len();
        PosteriorDraws {
            prior: PriorKind::GroupHorseshoe,
            iterations: reps + 1,
            burn_in: 1,
            seed: 0,
            beta: DMatrix::from_fn(reps, p, |_, j| beta[j]),
            sigma2: DVector::from_element(reps, sigma2),
            tau2: DVector::from_element(reps, 1.0),
            lambda2: DMatrix::from_element(reps, p, 1.0),
            delta2: vec![],
        }
    }

    #[test]
    fn variation_explained_limits() {
        let x = random_x(6, 2, 7);
        let beta = [1.0, -2.0];
        // Candidate equals every draw and sigma2 is tiny: rho^2 -> 1.
        let draws = constant_draws(&beta, 1e-12, 5);
        let rho = variation_explained(&draws, &x, &DVector::from_column_slice(&beta));
        assert!(rho.iter().all(|&r| (r - 1.0).abs() < 1e-9), "{rho:?}");
        // Zero draws: rho^2 = 0.
        let zero = constant_draws(&[0.0, 0.0], 1.0, 4);
        let rho0 = variation_explained(&zero, &x, &DVector::zeros(2));
        assert!(rho0.iter().all(|&r| r == 0.0));
    }

    #[test]
    fn heuristic_statistics_hand_assembled() {
        // Single draw, n = 2: check both statistics against the formulas.
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
        let beta = [1.0, 1.0];
        let sigma2 = 0.25;
        let draws = constant_draws(&beta, sigma2, 1);
        let beta_kappa = DVector::from_vec(vec![0.5, 0.0]);

        let fit = &x * DVector::from_column_slice(&beta);
        let v = &x * &beta_kappa;
        let signal = fit.norm_squared() / 2.0;
        let gap2 = (&fit - &v).norm_squared() / 2.0;

        let rho = variation_explained(&draws, &x, &beta_kappa);
        let expect_rho = signal / (signal + sigma2 + gap2);
        assert!((rho[0] - expect_rho).abs() < 1e-12);

        let psi = excess_error(&draws, &x, &beta_kappa);
        let expect_psi = (gap2 + sigma2).sqrt() - sigma2.sqrt();
        assert!((psi[0] - expect_psi).abs() < 1e-12);

        // beta_kappa = beta gives zero excess error.
        let psi0 = excess_error(&draws, &x, &DVector::from_column_slice(&beta));
        assert!(psi0[0].abs() < 1e-12);

        // beta_kappa = 0 with ||X beta||^2/n = 3 sigma2 gives psi = sigma.
        let scale = (3.0 * sigma2 / signal).sqrt();
        let scaled: Vec<f64> = beta.iter().map(|b| b * scale).collect();
        let draws2 = constant_draws(&scaled, sigma2, 1);
        let psi2 = excess_error(&draws2, &x, &DVector::zeros(2));
        assert!((psi2[0] - sigma2.sqrt()).abs() < 1e-12, "{}", psi2[0]);
    }

    #[test]
    fn heuristic_selects_reference_model() {
        let (x, beta_bar, path) = toy_path(8);
        // Draws scattered around beta_bar.
        let mut rng = RngStream::new(9, 0);
        let reps = 400;
        let p = beta_bar.len();
        let beta = DMatrix::from_fn(reps, p, |_, j| {
            beta_bar[j] + 0.05 * rng.sample::<f64, _>(StandardNormal)
        });
        let draws = PosteriorDraws {
            prior: PriorKind::GroupHorseshoe,
            iterations: reps + 1,
            burn_in: 1,
            seed: 0,
            beta,
            sigma2: DVector::from_element(reps, 0.5),
            tau2: DVector::from_element(reps, 1.0),
            lambda2: DMatrix::from_element(reps, p, 1.0),
            delta2: vec![],
        };
        let sel =
            select_heuristic(&path, &draws, &x, &beta_bar, HeuristicStat::VarExp, 0.9).unwrap();
        // The full model always qualifies, so no fallback can be reported.
        assert!(!sel.fallback);
        let sel2 =
            select_heuristic(&path, &draws, &x, &beta_bar, HeuristicStat::ExcErr, 0.9).unwrap();
        assert!(!sel2.fallback);
    }
}
