//! Gibbs samplers for the grouped global-local shrinkage regression model
//! under the group Lasso, group horseshoe, and group horseshoe+ priors.
//!
//! One sweep updates, in this fixed order: β, σ², (τ², ν), the local
//! shrinkage block (λ² and its half-Cauchy auxiliaries), then the group
//! shrinkage block level by level. Local and group blocks iterate in
//! ascending predictor / group index so a chain is fully determined by its
//! seed.
//!
//! The response is assumed centered and the design standardised; the
//! intercept is handled by that centering, not sampled.

use nalgebra::{DMatrix, DVector};

use crate::dist::{
    sample_gig, sample_inverse_gamma, sample_inverse_gaussian, sample_mvn_precision,
};
use crate::error::{Error, Result};
use crate::groups::GroupHierarchy;
use crate::rng::RngStream;

/// Floor applied to the Gaussian data terms of the λ and δ updates so that an
/// exactly zero coefficient cannot produce a degenerate conditional.
pub const DATA_TERM_FLOOR: f64 = 1e-30;

/// Which local/group shrinkage prior the chain runs under.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriorKind {
    GroupLasso,
    GroupHorseshoe,
    GroupHorseshoePlus,
}

impl PriorKind {
    pub fn name(&self) -> &'static str {
        match self {
            PriorKind::GroupLasso => "lasso",
            PriorKind::GroupHorseshoe => "horseshoe",
            PriorKind::GroupHorseshoePlus => "horseshoe+",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lasso" | "group-lasso" => Ok(PriorKind::GroupLasso),
            "horseshoe" | "hs" => Ok(PriorKind::GroupHorseshoe),
            "horseshoe+" | "horseshoe-plus" | "hs+" => Ok(PriorKind::GroupHorseshoePlus),
            other => Err(Error::Usage(format!(
                "unknown prior '{other}' (expected lasso, horseshoe, or horseshoe+)"
            ))),
        }
    }
}

/// One iteration's parameter values, including every auxiliary variable.
///
/// `c`, `phi2`, `eta` back the local half-Cauchy decompositions (horseshoe
/// uses `c`; horseshoe+ uses all three). `t`, `xi`, `psi` are the group-level
/// counterparts; under the horseshoe `t` holds t_{k,g}, under horseshoe+ it
/// holds t²_{k,g}.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub beta: DVector<f64>,
    pub sigma2: f64,
    pub tau2: f64,
    pub nu: f64,
    pub lambda2: Vec<f64>,
    pub c: Vec<f64>,
    pub phi2: Vec<f64>,
    pub eta: Vec<f64>,
    pub delta2: Vec<Vec<f64>>,
    pub t: Vec<Vec<f64>>,
    pub xi: Vec<Vec<f64>>,
    pub psi: Vec<Vec<f64>>,
}

impl ChainState {
    /// Starting state: zero coefficients, every variance-like quantity one.
    pub fn init(h: &GroupHierarchy) -> Self {
        let p = h.predictor_count();
        let per_level: Vec<Vec<f64>> = h.group_counts().iter().map(|&g| vec![1.0; g]).collect();
        ChainState {
            beta: DVector::zeros(p),
            sigma2: 1.0,
            tau2: 1.0,
            nu: 1.0,
            lambda2: vec![1.0; p],
            c: vec![1.0; p],
            phi2: vec![1.0; p],
            eta: vec![1.0; p],
            delta2: per_level.clone(),
            t: per_level.clone(),
            xi: per_level.clone(),
            psi: per_level,
        }
    }

    /// Ω_{k,j}: the group scale of predictor `j` at level `k`, or 1 if
    /// ungrouped there.
    pub fn omega(&self, h: &GroupHierarchy, k: usize, j: usize) -> f64 {
        match h.group_of(k, j) {
            Some(g) => self.delta2[k][g],
            None => 1.0,
        }
    }

    /// `∏_k Ω_{k,j}` over all levels.
    pub fn omega_product(&self, h: &GroupHierarchy, j: usize) -> f64 {
        (0..h.level_count()).map(|k| self.omega(h, k, j)).product()
    }

    /// `∏_{i≠k} Ω_{i,j}`.
    pub fn omega_product_excluding(&self, h: &GroupHierarchy, k: usize, j: usize) -> f64 {
        (0..h.level_count())
            .filter(|&i| i != k)
            .map(|i| self.omega(h, i, j))
            .product()
    }

    /// Diagonal of the full prior scale matrix τ² D_λ D_δ1 ⋯ D_δK.
    pub fn scale_diag(&self, h: &GroupHierarchy) -> Vec<f64> {
        (0..h.predictor_count())
            .map(|j| self.tau2 * self.lambda2[j] * self.omega_product(h, j))
            .collect()
    }
}

/// Draw β from its full conditional N(A⁻¹Xᵀy, σ²A⁻¹) with
/// A = XᵀX + (τ² D_λ D_δ1 ⋯ D_δK)⁻¹.
pub fn update_beta(
    state: &ChainState,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    h: &GroupHierarchy,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    update_beta_with(state, &xtx, &xty, h, rng)
}

/// [`update_beta`] with the Gram matrix and XᵀY precomputed by the caller.
pub fn update_beta_with(
    state: &ChainState,
    xtx: &DMatrix<f64>,
    xty: &DVector<f64>,
    h: &GroupHierarchy,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let scale = state.scale_diag(h);
    let mut a = xtx.clone();
    for (j, s) in scale.iter().enumerate() {
        if !(*s > 0.0) {
            return Err(Error::Domain(format!(
                "prior scale for predictor {} is non-positive ({s})",
                j + 1
            )));
        }
        a[(j, j)] += 1.0 / s;
    }
    sample_mvn_precision(xty, &a, state.sigma2, rng)
}

/// Shape and scale of the σ² inverse-gamma full conditional.
///
/// Exposed so joint-distribution tests can add proper-prior offsets to both
/// parameters; the sampler itself uses them unmodified.
pub fn sigma2_shape_scale(
    state: &ChainState,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    h: &GroupHierarchy,
) -> (f64, f64) {
    let n = y.len() as f64;
    let p = state.beta.len() as f64;
    let resid = y - x * &state.beta;
    let sse = resid.norm_squared();
    let scale_diag = state.scale_diag(h);
    let quad: f64 = state
        .beta
        .iter()
        .zip(scale_diag.iter())
        .map(|(b, s)| b * b / s)
        .sum();
    ((n - 1.0 + p) / 2.0, (sse + quad) / 2.0)
}

/// Draw σ² from IG((n−1+p)/2, ((y−Xβ)ᵀ(y−Xβ) + βᵀ(τ²D_λD_δ)⁻¹β)/2).
pub fn update_sigma2(
    state: &ChainState,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    h: &GroupHierarchy,
    rng: &mut RngStream,
) -> Result<f64> {
    let (shape, scale) = sigma2_shape_scale(state, x, y, h);
    sample_inverse_gamma(shape, scale, rng)
}

/// Draw τ² from IG((p+1)/2, βᵀ(D_λD_δ1⋯D_δK)⁻¹β/(2σ²) + 1/ν).
pub fn update_tau2(state: &ChainState, h: &GroupHierarchy, rng: &mut RngStream) -> Result<f64> {
    let p = state.beta.len() as f64;
    let quad: f64 = (0..state.beta.len())
        .map(|j| {
            let b = state.beta[j];
            b * b / (state.lambda2[j] * state.omega_product(h, j))
        })
        .sum();
    sample_inverse_gamma((p + 1.0) / 2.0, quad / (2.0 * state.sigma2) + 1.0 / state.nu, rng)
}

/// Draw ν from IG(1, 1/τ² + 1), the half-Cauchy auxiliary of τ.
pub fn update_nu(tau2: f64, rng: &mut RngStream) -> Result<f64> {
    sample_inverse_gamma(1.0, 1.0 / tau2 + 1.0, rng)
}

/// Draw (τ², ν) in sequence: ν conditions on the fresh τ².
pub fn update_tau2_nu(
    state: &ChainState,
    h: &GroupHierarchy,
    rng: &mut RngStream,
) -> Result<(f64, f64)> {
    let tau2 = update_tau2(state, h, rng)?;
    let nu = update_nu(tau2, rng)?;
    Ok((tau2, nu))
}

/// Gaussian data term of the λ_j update: β_j² / (2σ²τ²[D]_{j,j}) with
/// D = D_δ1 ⋯ D_δK, floored at [`DATA_TERM_FLOOR`].
pub(crate) fn local_data_term(state: &ChainState, h: &GroupHierarchy, j: usize) -> f64 {
    let d_jj = state.omega_product(h, j);
    let raw = state.beta[j] * state.beta[j] / (2.0 * state.sigma2 * state.tau2 * d_jj);
    if raw < DATA_TERM_FLOOR {
        log::warn!(
            "numerical guard: floored local data term for predictor {} ({raw:e})",
            j + 1
        );
        DATA_TERM_FLOOR
    } else {
        raw
    }
}

/// Gaussian data term of the δ_{k,g} update:
/// α_{k,g} = (σ²τ²)⁻¹ Σ_{i∈l(k,g)} β_i²/(λ_i²[D_{-k}]_{i,i}), floored.
pub(crate) fn group_data_term(
    state: &ChainState,
    h: &GroupHierarchy,
    k: usize,
    g: usize,
) -> f64 {
    let raw: f64 = h
        .members(k, g)
        .iter()
        .map(|&i| {
            let b = state.beta[i];
            b * b / (state.lambda2[i] * state.omega_product_excluding(h, k, i))
        })
        .sum::<f64>()
        / (state.sigma2 * state.tau2);
    if raw < DATA_TERM_FLOOR {
        log::warn!(
            "numerical guard: floored group data term for level {} group {} ({raw:e})",
            k + 1,
            g + 1
        );
        DATA_TERM_FLOOR
    } else {
        raw
    }
}

/// New local-shrinkage block (λ², c, φ², η), drawn in ascending predictor
/// order. Returns the updated vectors without touching `state`.
pub fn update_lambdas(
    state: &ChainState,
    prior: PriorKind,
    h: &GroupHierarchy,
    rng: &mut RngStream,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> {
    let p = state.beta.len();
    let mut lambda2 = state.lambda2.clone();
    let mut c = state.c.clone();
    let mut phi2 = state.phi2.clone();
    let mut eta = state.eta.clone();

    for j in 0..p {
        let dt = local_data_term(state, h, j);
        match prior {
            PriorKind::GroupLasso => {
                // λ_j⁻² | · ~ InvGaussian(√(1/dt), 2).
                let inv = sample_inverse_gaussian((1.0 / dt).sqrt(), 2.0, rng)?;
                lambda2[j] = 1.0 / inv;
            }
            PriorKind::GroupHorseshoe => {
                lambda2[j] = sample_inverse_gamma(1.0, dt + 1.0 / c[j], rng)?;
                c[j] = sample_inverse_gamma(1.0, 1.0 / lambda2[j] + 1.0, rng)?;
            }
            PriorKind::GroupHorseshoePlus => {
                lambda2[j] = sample_inverse_gamma(1.0, dt + 1.0 / c[j], rng)?;
                c[j] = sample_inverse_gamma(1.0, 1.0 / lambda2[j] + 1.0 / phi2[j], rng)?;
                phi2[j] = sample_inverse_gamma(1.0, 1.0 / c[j] + 1.0 / eta[j], rng)?;
                eta[j] = sample_inverse_gamma(1.0, 1.0 / phi2[j] + 1.0, rng)?;
            }
        }
    }
    Ok((lambda2, c, phi2, eta))
}

/// New group-shrinkage block (δ², t, ξ, ψ) over every level and group, drawn
/// in ascending (level, group) order.
pub fn update_deltas(
    state: &ChainState,
    prior: PriorKind,
    h: &GroupHierarchy,
    rng: &mut RngStream,
) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let mut delta2 = state.delta2.clone();
    let mut t = state.t.clone();
    let mut xi = state.xi.clone();
    let mut psi = state.psi.clone();

    for k in 0..h.level_count() {
        for g in 0..h.group_count(k) {
            let alpha = group_data_term(state, h, k, g);
            let s_kg = h.group_size(k, g) as f64;
            match prior {
                PriorKind::GroupLasso => {
                    // δ⁻² | · is GIG with x-coefficient α, 1/x-coefficient 2,
                    // order s/2 − 1 (an Exp(1) prior on δ² against the
                    // Gaussian group term).
                    let inv = sample_gig(2.0, alpha, s_kg / 2.0 - 1.0, rng)?;
                    delta2[k][g] = 1.0 / inv;
                }
                PriorKind::GroupHorseshoe => {
                    delta2[k][g] =
                        sample_inverse_gamma((s_kg + 1.0) / 2.0, alpha / 2.0 + 1.0 / t[k][g], rng)?;
                    t[k][g] = sample_inverse_gamma(1.0, 1.0 / delta2[k][g] + 1.0, rng)?;
                }
                PriorKind::GroupHorseshoePlus => {
                    // t[k][g] stores t² under this prior.
                    delta2[k][g] = sample_inverse_gamma(
                        (s_kg + 1.0) / 2.0,
                        alpha / 2.0 + 1.0 / xi[k][g],
                        rng,
                    )?;
                    xi[k][g] =
                        sample_inverse_gamma(1.0, 1.0 / delta2[k][g] + 1.0 / t[k][g], rng)?;
                    t[k][g] = sample_inverse_gamma(1.0, 1.0 / xi[k][g] + 1.0 / psi[k][g], rng)?;
                    psi[k][g] = sample_inverse_gamma(1.0, 1.0 / t[k][g] + 1.0, rng)?;
                }
            }
        }
    }
    Ok((delta2, t, xi, psi))
}

/// Chain configuration; `iterations` counts total sweeps and the first
/// `burn_in` of them are discarded.
#[derive(Debug, Clone, Copy)]
pub struct McmcConfig {
    pub prior: PriorKind,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
}

/// Retained post-burn-in draws of (β, σ², τ², λ², δ²) plus the configuration
/// that produced them. Auxiliary variables are not retained.
#[derive(Debug, Clone)]
pub struct PosteriorDraws {
    pub prior: PriorKind,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// retained × p
    pub beta: DMatrix<f64>,
    /// retained
    pub sigma2: DVector<f64>,
    /// retained
    pub tau2: DVector<f64>,
    /// retained × p
    pub lambda2: DMatrix<f64>,
    /// per level: retained × G_k
    pub delta2: Vec<DMatrix<f64>>,
}

impl PosteriorDraws {
    pub fn retained(&self) -> usize {
        self.beta.nrows()
    }

    pub fn predictor_count(&self) -> usize {
        self.beta.ncols()
    }

    /// Posterior mean of β.
    pub fn beta_bar(&self) -> DVector<f64> {
        let t = self.retained() as f64;
        DVector::from_fn(self.predictor_count(), |j, _| self.beta.column(j).sum() / t)
    }

    /// Posterior mean of σ².
    pub fn sigma2_bar(&self) -> f64 {
        self.sigma2.sum() / self.retained() as f64
    }
}

/// Empirical posterior means over the retained draws.
#[derive(Debug, Clone)]
pub struct PosteriorSummary {
    pub beta_bar: DVector<f64>,
    pub sigma2_bar: f64,
    pub tau2_bar: f64,
    pub lambda2_bar: Vec<f64>,
    pub delta2_bar: Vec<Vec<f64>>,
}

/// Empirical means of the retained draws.
pub fn posterior_summary(draws: &PosteriorDraws) -> Result<PosteriorSummary> {
    let t = draws.retained();
    if t == 0 {
        return Err(Error::Usage("posterior summary requires at least one retained draw".into()));
    }
    let tf = t as f64;
    Ok(PosteriorSummary {
        beta_bar: draws.beta_bar(),
        sigma2_bar: draws.sigma2_bar(),
        tau2_bar: draws.tau2.sum() / tf,
        lambda2_bar: (0..draws.predictor_count())
            .map(|j| draws.lambda2.column(j).sum() / tf)
            .collect(),
        delta2_bar: draws
            .delta2
            .iter()
            .map(|m| (0..m.ncols()).map(|g| m.column(g).sum() / tf).collect())
            .collect(),
    })
}

/// Run a chain from the stream derived from `config.seed`.
pub fn run_chain(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    h: &GroupHierarchy,
    config: &McmcConfig,
) -> Result<PosteriorDraws> {
    let mut rng = RngStream::new(config.seed, 0);
    run_chain_from(x, y, h, config, &mut rng)
}

/// Run a chain consuming randomness from an existing stream (used by the
/// replication harness, where data generation and the chain share stream r).
pub fn run_chain_from(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    h: &GroupHierarchy,
    config: &McmcConfig,
    rng: &mut RngStream,
) -> Result<PosteriorDraws> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::Shape(format!("X has {n} rows but y has {} entries", y.len())));
    }
    if h.predictor_count() != p {
        return Err(Error::Shape(format!(
            "X has {p} columns but the hierarchy declares {}",
            h.predictor_count()
        )));
    }
    if config.iterations <= config.burn_in {
        return Err(Error::Usage(format!(
            "iterations ({}) must exceed burn-in ({})",
            config.iterations, config.burn_in
        )));
    }

    let retained = config.iterations - config.burn_in;
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    let group_counts = h.group_counts();

    let mut state = ChainState::init(h);
    let mut beta = DMatrix::zeros(retained, p);
    let mut sigma2 = DVector::zeros(retained);
    let mut tau2 = DVector::zeros(retained);
    let mut lambda2 = DMatrix::zeros(retained, p);
    let mut delta2: Vec<DMatrix<f64>> = group_counts
        .iter()
        .map(|&g| DMatrix::zeros(retained, g))
        .collect();

    for iter in 0..config.iterations {
        let step = |e: Error| match e {
            Error::Conditioning(msg) => {
                Error::Conditioning(format!("iteration {}: {msg}", iter + 1))
            }
            other => other,
        };
        state.beta = update_beta_with(&state, &xtx, &xty, h, rng).map_err(step)?;
        state.sigma2 = update_sigma2(&state, x, y, h, rng).map_err(step)?;
        let (t2, nu) = update_tau2_nu(&state, h, rng).map_err(step)?;
        state.tau2 = t2;
        state.nu = nu;
        let (l2, c, phi2, eta) = update_lambdas(&state, config.prior, h, rng).map_err(step)?;
        state.lambda2 = l2;
        state.c = c;
        state.phi2 = phi2;
        state.eta = eta;
        let (d2, t, xi, psi) = update_deltas(&state, config.prior, h, rng).map_err(step)?;
        state.delta2 = d2;
        state.t = t;
        state.xi = xi;
        state.psi = psi;

        if iter >= config.burn_in {
            let r = iter - config.burn_in;
            for j in 0..p {
                beta[(r, j)] = state.beta[j];
                lambda2[(r, j)] = state.lambda2[j];
            }
            sigma2[r] = state.sigma2;
            tau2[r] = state.tau2;
            for (k, m) in delta2.iter_mut().enumerate() {
                for g in 0..group_counts[k] {
                    m[(r, g)] = state.delta2[k][g];
                }
            }
        }
    }

    Ok(PosteriorDraws {
        prior: config.prior,
        iterations: config.iterations,
        burn_in: config.burn_in,
        seed: config.seed,
        beta,
        sigma2,
        tau2,
        lambda2,
        delta2,
    })
}
