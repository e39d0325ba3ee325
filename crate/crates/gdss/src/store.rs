//! The fitted-draws container: a binary payload holding the data matrix and
//! every retained draw exactly, plus a JSON sidecar describing dimensions,
//! configuration, and posterior summaries.
//!
//! Binary layout (`<path>`): magic `GDSS`, one version byte, then
//! little-endian f64s — X row-major (n·p), y (n), then per retained draw:
//! β (p), σ², τ², λ² (p), δ² per level (G_1, …, G_K). The sidecar lives at
//! `<path>.json`.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::Standardization;
use crate::dof::GroupDofTable;
use crate::error::{Error, Result};
use crate::gibbs::{PosteriorDraws, PriorKind};
use crate::groups::GroupHierarchy;

const MAGIC: &[u8; 4] = b"GDSS";
const VERSION: u8 = 1;

/// JSON sidecar: configuration echo, dimensions, and posterior summaries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub version: u8,
    pub n: usize,
    pub p: usize,
    pub prior: String,
    pub iterations: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub retained: usize,
    /// 1-based selection level the df table was computed at.
    pub selection_level: usize,
    /// Group-label vectors per level (1-based labels, 0 = ungrouped).
    pub levels: Vec<Vec<u32>>,
    pub column_names: Vec<String>,
    pub standardization: Option<Standardization>,
    pub beta_bar: Vec<f64>,
    pub sigma2_bar: f64,
    /// Coefficients mapped back to the original scale, when the
    /// standardization record is present.
    pub beta_bar_original: Option<Vec<f64>>,
    pub intercept: Option<f64>,
    /// Squared norm of the centered response (the MMLu penalty input).
    pub y_norm2: f64,
    /// Posterior-expected df per selection group at `selection_level`.
    pub df_table: Vec<f64>,
    pub payload_layout: String,
}

/// A fit read back from disk.
#[derive(Debug, Clone)]
pub struct FitStore {
    pub sidecar: Sidecar,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub hierarchy: GroupHierarchy,
    pub draws: PosteriorDraws,
}

fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

/// Write the fit container and its sidecar.
#[allow(clippy::too_many_arguments)]
pub fn write_fit(
    path: impl AsRef<Path>,
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    h: &GroupHierarchy,
    draws: &PosteriorDraws,
    column_names: &[String],
    standardization: Option<&Standardization>,
    selection_level: usize,
    df_table: &GroupDofTable,
) -> Result<()> {
    let path = path.as_ref();
    let (n, p) = x.shape();
    let retained = draws.retained();
    let group_counts = h.group_counts();

    let mut payload: Vec<f64> =
        Vec::with_capacity(n * p + n + retained * (2 * p + 2 + group_counts.iter().sum::<usize>()));
    for i in 0..n {
        for j in 0..p {
            payload.push(x[(i, j)]);
        }
    }
    payload.extend(y.iter());
    for t in 0..retained {
        for j in 0..p {
            payload.push(draws.beta[(t, j)]);
        }
        payload.push(draws.sigma2[t]);
        payload.push(draws.tau2[t]);
        for j in 0..p {
            payload.push(draws.lambda2[(t, j)]);
        }
        for (k, &g_k) in group_counts.iter().enumerate() {
            for g in 0..g_k {
                payload.push(draws.delta2[k][(t, g)]);
            }
        }
    }

    let mut bytes = Vec::with_capacity(5 + payload.len() * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.push(VERSION);
    for v in payload {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, bytes)?;

    let beta_bar = draws.beta_bar();
    let (beta_orig, intercept) = match standardization {
        Some(rec) => {
            let (b, i) = rec.original_scale(&beta_bar);
            (Some(b.iter().copied().collect()), Some(i))
        }
        None => (None, None),
    };
    let sidecar = Sidecar {
        format: "gdss-draws".into(),
        version: VERSION,
        n,
        p,
        prior: draws.prior.name().into(),
        iterations: draws.iterations,
        burn_in: draws.burn_in,
        seed: draws.seed,
        retained,
        selection_level: selection_level + 1,
        levels: h.assignments(),
        column_names: column_names.to_vec(),
        standardization: standardization.cloned(),
        beta_bar: beta_bar.iter().copied().collect(),
        sigma2_bar: draws.sigma2_bar(),
        beta_bar_original: beta_orig,
        intercept,
        y_norm2: y.norm_squared(),
        df_table: df_table.df.clone(),
        payload_layout:
            "x[n*p] y[n] then per retained draw: beta[p] sigma2 tau2 lambda2[p] delta2[G_k per level]"
                .into(),
    };
    fs::write(sidecar_path(path), serde_json::to_vec_pretty(&sidecar)?)?;
    Ok(())
}

/// Read a fit container and its sidecar back.
pub fn read_fit(path: impl AsRef<Path>) -> Result<FitStore> {
    let path = path.as_ref();
    let sidecar: Sidecar = serde_json::from_slice(&fs::read(sidecar_path(path))?)?;
    if sidecar.format != "gdss-draws" {
        return Err(Error::Store(format!("unexpected sidecar format '{}'", sidecar.format)));
    }

    let bytes = fs::read(path)?;
    if bytes.len() < 5 || &bytes[0..4] != MAGIC {
        return Err(Error::Store("missing GDSS magic bytes".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Store(format!("unsupported container version {}", bytes[4])));
    }
    let body = &bytes[5..];
    if body.len() % 8 != 0 {
        return Err(Error::Store("payload is not a whole number of f64s".into()));
    }
    let vals: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();

    let (n, p, retained) = (sidecar.n, sidecar.p, sidecar.retained);
    let hierarchy = GroupHierarchy::new(p, &sidecar.levels)?;
    let group_counts = hierarchy.group_counts();
    let per_draw = 2 * p + 2 + group_counts.iter().sum::<usize>();
    let expected = n * p + n + retained * per_draw;
    if vals.len() != expected {
        return Err(Error::Store(format!(
            "payload holds {} values but the sidecar implies {expected}",
            vals.len()
        )));
    }

    let mut at = 0usize;
    let x = DMatrix::from_fn(n, p, |i, j| vals[i * p + j]);
    at += n * p;
    let y = DVector::from_column_slice(&vals[at..at + n]);
    at += n;

    let mut beta = DMatrix::zeros(retained, p);
    let mut sigma2 = DVector::zeros(retained);
    let mut tau2 = DVector::zeros(retained);
    let mut lambda2 = DMatrix::zeros(retained, p);
    let mut delta2: Vec<DMatrix<f64>> =
        group_counts.iter().map(|&g| DMatrix::zeros(retained, g)).collect();
    for t in 0..retained {
        for j in 0..p {
            beta[(t, j)] = vals[at];
            at += 1;
        }
        sigma2[t] = vals[at];
        at += 1;
        tau2[t] = vals[at];
        at += 1;
        for j in 0..p {
            lambda2[(t, j)] = vals[at];
            at += 1;
        }
        for (k, &g_k) in group_counts.iter().enumerate() {
            for g in 0..g_k {
                delta2[k][(t, g)] = vals[at];
                at += 1;
            }
        }
    }

    let draws = PosteriorDraws {
        prior: PriorKind::parse(&sidecar.prior)?,
        iterations: sidecar.iterations,
        burn_in: sidecar.burn_in,
        seed: sidecar.seed,
        beta,
        sigma2,
        tau2,
        lambda2,
        delta2,
    };
    Ok(FitStore { sidecar, x, y, hierarchy, draws })
}
