//! Group decoupled shrinkage and selection: regress the smoothed fit
//! `ȳ = X β̄` onto per-group columns `Z_g = X_g β̄_g` under a non-negative
//! garrotte penalty, producing a path of candidate supports indexed by the
//! penalty strength κ.
//!
//! Each path point solves
//!
//! ```text
//! d_κ = argmin_{d ≥ 0}  ½‖ȳ − Z d‖² + κ Σ_g s_g d_g
//! ```
//!
//! by cyclic coordinate descent with closed-form non-negative updates; every
//! accepted solution carries a duality-gap / KKT certificate. The candidate
//! coefficient vector is `β_κ,j = d_{g(j)} · β̄_j`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative duality-gap / KKT tolerance for a path solution.
const SOLVE_TOL: f64 = 1e-10;
const MAX_SWEEPS: usize = 200_000;

/// Default number of κ grid points between κ_max and 10⁻⁶ κ_max.
pub const DEFAULT_GRID: usize = 200;

/// One candidate model on the path.
#[derive(Debug, Clone)]
pub struct NngCandidate {
    /// Penalty strength.
    pub kappa: f64,
    /// Per-group garrotte coefficients, all ≥ 0.
    pub d: Vec<f64>,
    /// Groups with d_g > 0, ascending.
    pub support: Vec<usize>,
    /// ‖ȳ − Z d‖², which equals ‖Xβ̄ − Xβ_κ‖².
    pub sse: f64,
}

/// The ordered candidate path plus the group design it was computed from.
#[derive(Debug, Clone)]
pub struct NngPath {
    /// Group design, column g is X_g β̄_g.
    pub z: DMatrix<f64>,
    /// Smoothed target X β̄.
    pub y_bar: DVector<f64>,
    /// Group sizes s_g.
    pub sizes: Vec<usize>,
    /// Predictor members of each group.
    pub groups: Vec<Vec<usize>>,
    /// Largest penalty on the grid; the candidate there has empty support.
    pub kappa_max: f64,
    /// Groups with an exactly zero design column, forced inactive.
    pub forced_inactive: Vec<usize>,
    /// Candidates in strictly decreasing κ order, deduplicated by support
    /// (smallest κ kept per support).
    pub candidates: Vec<NngCandidate>,
}

impl NngPath {
    /// ½‖ȳ − Zd‖² + κ Σ s_g d_g for candidate `idx`.
    pub fn objective(&self, idx: usize) -> f64 {
        let c = &self.candidates[idx];
        let weighted: f64 = c
            .d
            .iter()
            .zip(self.sizes.iter())
            .map(|(d, &s)| d * s as f64)
            .sum();
        0.5 * c.sse + c.kappa * weighted
    }

    /// Largest KKT violation of candidate `idx`:
    /// `|Z_gᵀr − κ s_g|` on the support, `max(0, Z_gᵀr − κ s_g)` off it.
    pub fn kkt_violation(&self, idx: usize) -> f64 {
        let c = &self.candidates[idx];
        let d = DVector::from_column_slice(&c.d);
        let r = &self.y_bar - &self.z * &d;
        let mut worst = 0.0f64;
        for g in 0..self.sizes.len() {
            let grad = self.z.column(g).dot(&r);
            let bound = c.kappa * self.sizes[g] as f64;
            let v = if c.d[g] > 0.0 { (grad - bound).abs() } else { (grad - bound).max(0.0) };
            worst = worst.max(v);
        }
        worst
    }
}

/// The smoothed target vector ȳ = X β̄.
pub fn smoothed_target(x: &DMatrix<f64>, beta_bar: &DVector<f64>) -> DVector<f64> {
    x * beta_bar
}

/// The group design: column g is `X_g β̄_g`, the fitted contribution of group
/// g under the posterior mean.
pub fn group_design(
    x: &DMatrix<f64>,
    beta_bar: &DVector<f64>,
    groups: &[Vec<usize>],
) -> DMatrix<f64> {
    let n = x.nrows();
    let mut z = DMatrix::zeros(n, groups.len());
    for (g, members) in groups.iter().enumerate() {
        for &j in members {
            let b = beta_bar[j];
            for i in 0..n {
                z[(i, g)] += x[(i, j)] * b;
            }
        }
    }
    z
}

/// β_κ from the garrotte coefficients: β_κ,j = d_{g(j)} β̄_j.
pub fn reconstruct_beta(
    d: &[f64],
    beta_bar: &DVector<f64>,
    groups: &[Vec<usize>],
) -> DVector<f64> {
    let mut beta = DVector::zeros(beta_bar.len());
    for (g, members) in groups.iter().enumerate() {
        for &j in members {
            beta[j] = d[g] * beta_bar[j];
        }
    }
    beta
}

/// Exact solution of the garrotte problem at one κ by cyclic coordinate
/// descent, warm-started from `d`.
fn solve_at_kappa(
    ztz: &DMatrix<f64>,
    zty: &DVector<f64>,
    yn2: f64,
    sizes: &[usize],
    active_cols: &[bool],
    kappa: f64,
    d: &mut DVector<f64>,
) -> Result<()> {
    let g_count = sizes.len();
    let tol = SOLVE_TOL * yn2.max(f64::MIN_POSITIVE);
    // q = ZᵀZ d, maintained incrementally.
    let mut q = ztz * &*d;

    for _ in 0..MAX_SWEEPS {
        for g in 0..g_count {
            if !active_cols[g] {
                continue;
            }
            let norm2 = ztz[(g, g)];
            let old = d[g];
            let grad_rest = zty[g] - (q[g] - norm2 * old);
            let new = ((grad_rest - kappa * sizes[g] as f64) / norm2).max(0.0);
            if new != old {
                let diff = new - old;
                q.axpy(diff, &ztz.column(g).into_owned(), 1.0);
                d[g] = new;
            }
        }

        // KKT residual from the cached inner products.
        let mut kkt = 0.0f64;
        let mut max_ratio = 0.0f64;
        for g in 0..g_count {
            if !active_cols[g] {
                continue;
            }
            let grad = zty[g] - q[g];
            let bound = kappa * sizes[g] as f64;
            let v = if d[g] > 0.0 { (grad - bound).abs() } else { (grad - bound).max(0.0) };
            kkt = kkt.max(v);
            if kappa > 0.0 && grad > 0.0 {
                max_ratio = max_ratio.max(grad / bound);
            }
        }
        if kkt <= tol {
            return Ok(());
        }
        if kappa > 0.0 {
            // Duality gap with the scaled residual as the dual point.
            let dty = d.dot(zty);
            let dqd = d.dot(&q);
            let primal = 0.5 * (yn2 - 2.0 * dty + dqd)
                + kappa * d.iter().zip(sizes).map(|(v, &s)| v * s as f64).sum::<f64>();
            let rty = yn2 - dty;
            let rn2 = yn2 - 2.0 * dty + dqd;
            let c = 1.0 / max_ratio.max(1.0);
            let dual = c * rty - 0.5 * c * c * rn2;
            if primal - dual <= tol {
                return Ok(());
            }
        }
    }
    Err(Error::Conditioning(format!(
        "garrotte coordinate descent did not converge at kappa = {kappa:e}"
    )))
}

/// Solve the garrotte problem at a single κ from a cold start.
pub fn solve_garrotte(
    z: &DMatrix<f64>,
    y_bar: &DVector<f64>,
    sizes: &[usize],
    kappa: f64,
) -> Result<Vec<f64>> {
    let g_count = z.ncols();
    if sizes.len() != g_count {
        return Err(Error::Shape(format!(
            "Z has {g_count} columns but {} sizes were given",
            sizes.len()
        )));
    }
    if kappa < 0.0 {
        return Err(Error::Usage(format!("kappa must be nonnegative, got {kappa}")));
    }
    let ztz = z.transpose() * z;
    let zty = z.transpose() * y_bar;
    let active: Vec<bool> = (0..g_count).map(|g| ztz[(g, g)] > 0.0).collect();
    let mut d = DVector::zeros(g_count);
    solve_at_kappa(&ztz, &zty, y_bar.norm_squared(), sizes, &active, kappa, &mut d)?;
    Ok(d.iter().copied().collect())
}

/// Compute the candidate path over a log-spaced κ grid (with κ = 0 appended),
/// deduplicating consecutive candidates that share a support.
pub fn nng_path(
    z: &DMatrix<f64>,
    y_bar: &DVector<f64>,
    sizes: &[usize],
    grid_size: usize,
) -> Result<NngPath> {
    let g_count = z.ncols();
    if sizes.len() != g_count {
        return Err(Error::Shape(format!(
            "Z has {g_count} columns but {} sizes were given",
            sizes.len()
        )));
    }
    if grid_size < 2 {
        return Err(Error::Usage(format!("grid size must be at least 2, got {grid_size}")));
    }

    let ztz = z.transpose() * z;
    let zty = z.transpose() * y_bar;
    let yn2 = y_bar.norm_squared();

    // Groups whose design column is exactly zero can never become active.
    let mut active_cols = vec![true; g_count];
    let mut forced_inactive = Vec::new();
    for g in 0..g_count {
        if ztz[(g, g)] <= 0.0 {
            active_cols[g] = false;
            forced_inactive.push(g);
        }
    }

    let kappa_max = (0..g_count)
        .filter(|&g| active_cols[g])
        .map(|g| zty[g].max(0.0) / sizes[g] as f64)
        .fold(0.0f64, f64::max);

    let mut grid = Vec::with_capacity(grid_size + 1);
    if kappa_max > 0.0 {
        let lo = 1e-6f64;
        for i in 0..grid_size {
            let t = i as f64 / (grid_size - 1) as f64;
            grid.push(kappa_max * lo.powf(t));
        }
    }
    grid.push(0.0);

    let mut d = DVector::zeros(g_count);
    let mut candidates: Vec<NngCandidate> = Vec::new();
    for &kappa in &grid {
        solve_at_kappa(&ztz, &zty, yn2, sizes, &active_cols, kappa, &mut d)?;
        let support: Vec<usize> = (0..g_count).filter(|&g| d[g] > 0.0).collect();
        let sse = yn2 - 2.0 * d.dot(&zty) + d.dot(&(&ztz * &d));
        let cand = NngCandidate {
            kappa,
            d: d.iter().copied().collect(),
            support,
            sse: sse.max(0.0),
        };
        match candidates.last_mut() {
            Some(prev) if prev.support == cand.support => *prev = cand,
            _ => candidates.push(cand),
        }
    }

    Ok(NngPath {
        z: z.clone(),
        y_bar: y_bar.clone(),
        sizes: sizes.to_vec(),
        groups: Vec::new(),
        kappa_max,
        forced_inactive,
        candidates,
    })
}

/// Full sparsification step: smoothed target, group design, and path, with
/// the group membership recorded on the result.
pub fn sparsify(
    x: &DMatrix<f64>,
    beta_bar: &DVector<f64>,
    groups: &[Vec<usize>],
    grid_size: usize,
) -> Result<NngPath> {
    let y_bar = smoothed_target(x, beta_bar);
    let z = group_design(x, beta_bar, groups);
    let sizes: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let mut path = nng_path(&z, &y_bar, &sizes, grid_size)?;
    path.groups = groups.to_vec();
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use rand::Rng;
    use rand_distr::StandardNormal;

    fn random_matrix(n: usize, m: usize, rng: &mut RngStream) -> DMatrix<f64> {
        DMatrix::from_fn(n, m, |_, _| rng.sample::<f64, _>(StandardNormal))
    }

    /// Brute-force oracle: enumerate every active set, solve the equality
    /// system, keep feasible solutions, return the best.
    fn brute_force_qp(
        z: &DMatrix<f64>,
        y_bar: &DVector<f64>,
        sizes: &[usize],
        kappa: f64,
    ) -> Vec<f64> {
        let g_count = z.ncols();
        let mut best: Option<(f64, Vec<f64>)> = None;
        for mask in 0..(1usize << g_count) {
            let active: Vec<usize> = (0..g_count).filter(|g| mask >> g & 1 == 1).collect();
            let m = active.len();
            let mut d = vec![0.0; g_count];
            if m > 0 {
                let zs = DMatrix::from_fn(z.nrows(), m, |r, c| z[(r, active[c])]);
                let rhs = zs.transpose() * y_bar
                    - DVector::from_fn(m, |i, _| kappa * sizes[active[i]] as f64);
                let gram = zs.transpose() * &zs;
                let sol = match gram.lu().solve(&rhs) {
                    Some(s) => s,
                    None => continue,
                };
                if sol.iter().any(|&v| v < -1e-12) {
                    continue;
                }
                for (i, &g) in active.iter().enumerate() {
                    d[g] = sol[i].max(0.0);
                }
            }
            let dv = DVector::from_column_slice(&d);
            let r = y_bar - z * &dv;
            // Dual feasibility off the active set.
            let feasible = (0..g_count).all(|g| {
                d[g] > 0.0 || z.column(g).dot(&r) <= kappa * sizes[g] as f64 + 1e-10
            });
            if !feasible {
                continue;
            }
            let obj = 0.5 * r.norm_squared()
                + kappa * d.iter().zip(sizes).map(|(v, &s)| v * s as f64).sum::<f64>();
            if best.as_ref().map_or(true, |(b, _)| obj < *b) {
                best = Some((obj, d));
            }
        }
        best.expect("some active set is feasible").1
    }

    #[test]
    fn smoothed_target_cases() {
        let x = DMatrix::<f64>::identity(3, 3);
        let b = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        assert_eq!(smoothed_target(&x, &b), b);
        assert_eq!(
            smoothed_target(&x, &DVector::zeros(3)),
            DVector::<f64>::zeros(3)
        );
        let mut rng = RngStream::new(1, 0);
        let x = random_matrix(5, 3, &mut rng);
        let b = DVector::from_vec(vec![0.3, 1.2, -0.7]);
        let t = smoothed_target(&x, &b);
        for i in 0..5 {
            let expect: f64 = (0..3).map(|j| x[(i, j)] * b[j]).sum();
            assert!((t[i] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn group_design_cases() {
        let mut rng = RngStream::new(2, 0);
        let x = random_matrix(6, 4, &mut rng);
        let b = DVector::from_vec(vec![0.5, -1.0, 2.0, 0.25]);

        // One group holding everything gives Z = ybar as a single column.
        let z_all = group_design(&x, &b, &[vec![0, 1, 2, 3]]);
        let ybar = smoothed_target(&x, &b);
        assert!((z_all.column(0) - &ybar).norm() < 1e-14);

        // Singleton groups give Z_j = x_j * b_j.
        let z_single = group_design(&x, &b, &[vec![0], vec![1], vec![2], vec![3]]);
        for j in 0..4 {
            for i in 0..6 {
                assert!((z_single[(i, j)] - x[(i, j)] * b[j]).abs() < 1e-14);
            }
        }

        // Example-1 layout: six columns whose norms match brute force.
        let sizes = [5usize, 5, 10, 10, 15, 15];
        let mut groups = Vec::new();
        let mut start = 0;
        for &s in &sizes {
            groups.push((start..start + s).collect::<Vec<_>>());
            start += s;
        }
        let x1 = random_matrix(20, 60, &mut rng);
        let b1 = DVector::from_fn(60, |_, _| rng.sample::<f64, _>(StandardNormal));
        let z = group_design(&x1, &b1, &groups);
        assert_eq!(z.ncols(), 6);
        for (g, members) in groups.iter().enumerate() {
            let mut expect = DVector::<f64>::zeros(20);
            for &j in members {
                expect += x1.column(j) * b1[j];
            }
            assert!((z.column(g) - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_beta_cases() {
        let b = DVector::from_vec(vec![1.0, 2.0, -3.0, 0.5]);
        let groups = vec![vec![0, 2], vec![1], vec![3]];
        assert_eq!(reconstruct_beta(&[1.0, 1.0, 1.0], &b, &groups), b);
        assert_eq!(
            reconstruct_beta(&[0.0, 0.0, 0.0], &b, &groups),
            DVector::<f64>::zeros(4)
        );
        let mixed = reconstruct_beta(&[0.5, 2.0, 0.0], &b, &groups);
        assert_eq!(mixed, DVector::from_vec(vec![0.5, 4.0, -1.5, 0.0]));
    }

    #[test]
    fn kappa_max_gives_empty_support() {
        let mut rng = RngStream::new(3, 0);
        let z = random_matrix(12, 3, &mut rng);
        let y = random_matrix(12, 1, &mut rng).column(0).into_owned();
        let path = nng_path(&z, &y, &[2, 3, 4], 50).unwrap();
        let first = &path.candidates[0];
        assert_eq!(first.kappa, path.kappa_max);
        assert!(first.support.is_empty());
        // Kappas strictly decreasing.
        for w in path.candidates.windows(2) {
            assert!(w[1].kappa < w[0].kappa);
        }
        // Objective nonincreasing as kappa decreases at fixed kappa... the
        // fit term alone is nonincreasing along the path.
        for w in 0..path.candidates.len() - 1 {
            assert!(path.candidates[w + 1].sse <= path.candidates[w].sse + 1e-9);
        }
    }

    #[test]
    fn single_group_at_zero_kappa_is_nnls() {
        let mut rng = RngStream::new(4, 0);
        let z = random_matrix(10, 1, &mut rng);
        let mut y = z.column(0) * 1.8;
        y[0] += 0.3;
        let path = nng_path(&z, &y.clone_owned(), &[3], 30).unwrap();
        let last = path.candidates.last().unwrap();
        assert_eq!(last.kappa, 0.0);
        let expect = (z.column(0).dot(&y) / z.column(0).norm_squared()).max(0.0);
        assert!((last.d[0] - expect).abs() < 1e-10);
    }

    #[test]
    fn coordinate_descent_matches_brute_force_qp() {
        let mut rng = RngStream::new(5, 0);
        let sizes = [2usize, 3, 1];
        let z = random_matrix(15, 3, &mut rng);
        let truth = DVector::from_vec(vec![1.0, 0.0, 2.0]);
        let y = &z * truth + random_matrix(15, 1, &mut rng).column(0) * 0.1;
        let kappa = 0.37;

        let ztz = z.transpose() * &z;
        let zty = z.transpose() * &y;
        let mut d = DVector::zeros(3);
        solve_at_kappa(&ztz, &zty, y.norm_squared(), &sizes, &[true; 3], kappa, &mut d).unwrap();
        let oracle = brute_force_qp(&z, &y, &sizes, kappa);
        for g in 0..3 {
            assert!((d[g] - oracle[g]).abs() < 1e-8, "g={g}: {} vs {}", d[g], oracle[g]);
        }
    }

    #[test]
    fn kkt_certificates_hold_on_every_candidate() {
        let mut rng = RngStream::new(6, 0);
        let z = random_matrix(25, 4, &mut rng);
        let truth = DVector::from_vec(vec![0.8, 0.0, 1.5, 0.0]);
        let y = &z * truth;
        let path = nng_path(&z, &y, &[4, 2, 5, 3], 100).unwrap();
        let bound = 1e-8 * y.norm_squared();
        for i in 0..path.candidates.len() {
            assert!(path.kkt_violation(i) < bound, "candidate {i}");
        }
    }

    #[test]
    fn joint_scaling_leaves_support_path_unchanged() {
        let mut rng = RngStream::new(7, 0);
        let z = random_matrix(18, 3, &mut rng);
        let truth = DVector::from_vec(vec![1.0, 0.4, 0.0]);
        let y = &z * truth + random_matrix(18, 1, &mut rng).column(0) * 0.05;
        let path = nng_path(&z, &y, &[2, 2, 2], 60).unwrap();
        let c = 3.7f64;
        let path_scaled = nng_path(&(&z * c), &(&y * c), &[2, 2, 2], 60).unwrap();
        // kappa_max scales by c^2 and the support sequence is identical.
        assert!((path_scaled.kappa_max - c * c * path.kappa_max).abs() < 1e-8 * path.kappa_max);
        let supports: Vec<_> = path.candidates.iter().map(|c| c.support.clone()).collect();
        let supports_scaled: Vec<_> =
            path_scaled.candidates.iter().map(|c| c.support.clone()).collect();
        assert_eq!(supports, supports_scaled);
    }

    #[test]
    fn zero_column_is_forced_inactive() {
        let mut rng = RngStream::new(8, 0);
        let mut z = random_matrix(10, 3, &mut rng);
        z.column_mut(1).fill(0.0);
        let y = z.column(0) * 2.0 + z.column(2) * 0.5;
        let path = nng_path(&z, &y.clone_owned(), &[2, 2, 2], 40).unwrap();
        assert_eq!(path.forced_inactive, vec![1]);
        for c in &path.candidates {
            assert_eq!(c.d[1], 0.0);
        }
    }

    #[test]
    fn all_nonpositive_correlations_give_null_path() {
        let z = DMatrix::from_column_slice(3, 1, &[1.0, 0.0, 0.0]);
        let y = DVector::from_vec(vec![-2.0, 0.0, 0.0]);
        let path = nng_path(&z, &y, &[1], 20).unwrap();
        assert_eq!(path.kappa_max, 0.0);
        assert_eq!(path.candidates.len(), 1);
        assert_eq!(path.candidates[0].d, vec![0.0]);
    }

    #[test]
    fn duplicate_supports_keep_smallest_kappa() {
        let mut rng = RngStream::new(9, 0);
        let z = random_matrix(30, 2, &mut rng);
        let y = z.column(0) * 5.0;
        let path = nng_path(&z, &y.clone_owned(), &[1, 1], 200).unwrap();
        let mut seen = std::collections::HashSet::new();
        for c in &path.candidates {
            assert!(seen.insert(c.support.clone()), "support repeated: {:?}", c.support);
        }
    }

    #[test]
    fn sparsify_wires_groups_through() {
        let mut rng = RngStream::new(10, 0);
        let x = random_matrix(20, 5, &mut rng);
        let beta_bar = DVector::from_vec(vec![1.2, -0.8, 0.02, 0.01, 0.9]);
        let groups = vec![vec![0, 1], vec![2, 3], vec![4]];
        let path = sparsify(&x, &beta_bar, &groups, 80).unwrap();
        assert_eq!(path.groups, groups);
        // Full-fit candidate at kappa = 0 reproduces beta_bar.
        let last = path.candidates.last().unwrap();
        let beta = reconstruct_beta(&last.d, &beta_bar, &groups);
        assert!((beta - &beta_bar).norm() < 1e-6);
    }
}
