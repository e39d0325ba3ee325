//! Degrees-of-freedom estimators for candidate models on the garrotte path.
//!
//! [`dof_yl`] is the Yuan–Lin garrotte formula, a function of the garrotte
//! coefficients alone; it treats every predictor of an active group as a full
//! parameter and so overstates the complexity of sparse groups. The
//! posterior-expected estimate ([`group_dof_pe`] / [`dof_pe`]) instead
//! averages the per-group ridge trace
//! `tr(X_gᵀX_g (X_gᵀX_g + Σ_g)⁻¹)` over the retained draws of the shrinkage
//! scales, so heavily shrunk coefficients contribute less than one degree.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gibbs::PosteriorDraws;
use crate::groups::GroupHierarchy;

/// Per-group posterior-expected degrees of freedom at the selection level.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupDofTable {
    pub df: Vec<f64>,
}

/// Yuan–Lin garrotte degrees of freedom: `2 Σ_g 1(d_g>0) + Σ_g d_g (s_g − 2)`.
pub fn dof_yl(d: &[f64], sizes: &[usize]) -> f64 {
    let active = d.iter().filter(|&&v| v > 0.0).count() as f64;
    let weighted: f64 = d
        .iter()
        .zip(sizes.iter())
        .map(|(&v, &s)| v * (s as f64 - 2.0))
        .sum();
    2.0 * active + weighted
}

/// Posterior-expected degrees of freedom per selection group:
/// `df_g = tr( X_gᵀX_g · E[(X_gᵀX_g + Σ_g)⁻¹ | y] )` with
/// `Σ_g = diag((τ² λ_j² ∏_k Ω_{k,j})⁻¹)` over the group's predictors and the
/// expectation taken over the retained draws.
pub fn group_dof_pe(
    draws: &PosteriorDraws,
    x: &DMatrix<f64>,
    h: &GroupHierarchy,
    level: usize,
) -> Result<GroupDofTable> {
    if level >= h.level_count() {
        return Err(Error::Usage(format!(
            "selection level {} does not exist (hierarchy has {} levels)",
            level + 1,
            h.level_count()
        )));
    }
    if x.ncols() != h.predictor_count() {
        return Err(Error::Shape(format!(
            "X has {} columns but the hierarchy declares {}",
            x.ncols(),
            h.predictor_count()
        )));
    }
    let groups = h.selection_groups(level);
    let retained = draws.retained();
    if retained == 0 {
        return Err(Error::Usage("posterior-expected df requires retained draws".into()));
    }

    let mut df = Vec::with_capacity(groups.len());
    for members in &groups {
        let m = members.len();
        let xg = DMatrix::from_fn(x.nrows(), m, |r, c| x[(r, members[c])]);
        let xtx = xg.transpose() * &xg;

        // Group membership of each member at every level, for the Ω product.
        let level_groups: Vec<Vec<Option<usize>>> = members
            .iter()
            .map(|&j| (0..h.level_count()).map(|k| h.group_of(k, j)).collect())
            .collect();

        let mut acc = DMatrix::<f64>::zeros(m, m);
        for t in 0..retained {
            let mut mat = xtx.clone();
            for (c, &j) in members.iter().enumerate() {
                let mut scale = draws.tau2[t] * draws.lambda2[(t, j)];
                for (k, g) in level_groups[c].iter().enumerate() {
                    if let Some(g) = g {
                        scale *= draws.delta2[k][(t, *g)];
                    }
                }
                mat[(c, c)] += 1.0 / scale;
            }
            let inv = nalgebra::Cholesky::new(mat)
                .ok_or_else(|| {
                    Error::Conditioning(format!(
                        "X_g'X_g + Sigma_g not positive definite for group of size {m} at draw {t}"
                    ))
                })?
                .inverse();
            acc += inv;
        }
        acc /= retained as f64;
        // tr(XtX * acc)
        let mut tr = 0.0;
        for a in 0..m {
            for b in 0..m {
                tr += xtx[(a, b)] * acc[(b, a)];
            }
        }
        df.push(tr);
    }
    Ok(GroupDofTable { df })
}

/// Degrees of freedom of a candidate: the per-group estimates summed over its
/// support.
pub fn dof_pe(support: &[usize], table: &GroupDofTable) -> f64 {
    support.iter().map(|&g| table.df[g]).sum()
}

/// Full-model ridge trace `tr(X (XᵀX + Σ)⁻¹ Xᵀ)` for a diagonal Σ.
///
/// Only used as the reference in the orthogonal-group equivalence check; the
/// production scorer always goes through the per-group decomposition.
pub fn full_model_ridge_trace(x: &DMatrix<f64>, sigma_diag: &[f64]) -> Result<f64> {
    let p = x.ncols();
    if sigma_diag.len() != p {
        return Err(Error::Shape(format!(
            "Sigma diagonal has length {} but X has {p} columns",
            sigma_diag.len()
        )));
    }
    let xtx = x.transpose() * x;
    let mut m = xtx.clone();
    for j in 0..p {
        m[(j, j)] += sigma_diag[j];
    }
    let inv = nalgebra::Cholesky::new(m)
        .ok_or_else(|| Error::Conditioning("XᵀX + Σ not positive definite".into()))?
        .inverse();
    let mut tr = 0.0;
    for a in 0..p {
        for b in 0..p {
            tr += xtx[(a, b)] * inv[(b, a)];
        }
    }
    Ok(tr)
}
