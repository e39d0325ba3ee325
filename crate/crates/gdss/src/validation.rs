//! Distribution-checking utilities: quadrature-normalised CDFs built from a
//! log-density, Kolmogorov–Smirnov statistics, and Monte-Carlo standard
//! errors.
//!
//! These are the independent oracles used by the test suites to certify the
//! samplers; they never touch the sampling code paths themselves.

/// A CDF tabulated by trapezoidal quadrature of an unnormalised log-density.
#[derive(Debug, Clone)]
pub struct GridCdf {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

const GRID_POINTS: usize = 80_000;
/// Log-density drop (relative to the maximum) beyond which a tail is cut.
const LOG_TAIL_CUTOFF: f64 = 80.0;

impl GridCdf {
    /// Tabulate the CDF of a density supported on `(0, ∞)` given its
    /// unnormalised log-density. Integration runs in u = ln x with the
    /// Jacobian folded in (∫ f dx = ∫ f(eᵘ)eᵘ du), so widely varying scales
    /// and boundary modes are handled alike.
    pub fn on_positive(log_density: impl Fn(f64) -> f64) -> Self {
        // Log of the u-space integrand.
        let g = |u: f64| {
            let v = log_density(u.exp()) + u;
            if v.is_finite() {
                v
            } else {
                f64::NEG_INFINITY
            }
        };

        // Locate the u-space mode by coarse scan plus refinement.
        let mut best_u = 0.0;
        let mut best = f64::NEG_INFINITY;
        let consider = |u: f64, best: &mut f64, best_u: &mut f64| {
            let v = g(u);
            if v > *best {
                *best = v;
                *best_u = u;
            }
        };
        let mut u = -680.0;
        while u <= 680.0 {
            consider(u, &mut best, &mut best_u);
            u += 1.0;
        }
        for i in 0..400 {
            let cand = best_u - 2.0 + 4.0 * i as f64 / 399.0;
            consider(cand, &mut best, &mut best_u);
        }

        // Expand until the integrand drops LOG_TAIL_CUTOFF below its peak.
        let mut ulo = best_u;
        while ulo > -690.0 && g(ulo) > best - LOG_TAIL_CUTOFF {
            ulo -= 0.5;
        }
        let mut uhi = best_u;
        while uhi < 690.0 && g(uhi) > best - LOG_TAIL_CUTOFF {
            uhi += 0.5;
        }
        ulo -= 0.5;
        uhi += 0.5;

        let n = GRID_POINTS;
        let du = (uhi - ulo) / (n - 1) as f64;
        let mut xs = Vec::with_capacity(n);
        let mut vals = Vec::with_capacity(n);
        for i in 0..n {
            let ui = ulo + du * i as f64;
            xs.push(ui.exp());
            let lv = g(ui) - best;
            vals.push(if lv.is_finite() { lv.exp() } else { 0.0 });
        }
        Self::from_grid(xs, vals, du)
    }

    /// Tabulate the CDF of a density supported on the whole real line.
    pub fn on_real(log_density: impl Fn(f64) -> f64, center: f64, half_width: f64) -> Self {
        let n = GRID_POINTS;
        let lo = center - half_width;
        let dx = 2.0 * half_width / (n - 1) as f64;
        let mut best = f64::NEG_INFINITY;
        let mut raw = Vec::with_capacity(n);
        for i in 0..n {
            let v = log_density(lo + dx * i as f64);
            if v.is_finite() && v > best {
                best = v;
            }
            raw.push(v);
        }
        let xs: Vec<f64> = (0..n).map(|i| lo + dx * i as f64).collect();
        let vals: Vec<f64> = raw
            .into_iter()
            .map(|lv| {
                let s = lv - best;
                if s.is_finite() {
                    s.exp()
                } else {
                    0.0
                }
            })
            .collect();
        Self::from_grid(xs, vals, dx)
    }

    fn from_grid(xs: Vec<f64>, vals: Vec<f64>, step: f64) -> Self {
        let n = xs.len();
        let mut cdf = Vec::with_capacity(n);
        cdf.push(0.0);
        let mut acc = 0.0;
        for i in 1..n {
            acc += 0.5 * (vals[i - 1] + vals[i]) * step;
            cdf.push(acc);
        }
        let total = *cdf.last().unwrap();
        assert!(total > 0.0, "grid CDF degenerate: zero total mass");
        for v in &mut cdf {
            *v /= total;
        }
        GridCdf { xs, cdf }
    }

    /// Evaluate the tabulated CDF at `x` by linear interpolation.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.xs[0] {
            return 0.0;
        }
        if x >= *self.xs.last().unwrap() {
            return 1.0;
        }
        let idx = self.xs.partition_point(|&g| g < x);
        let (x0, x1) = (self.xs[idx - 1], self.xs[idx]);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        c0 + (c1 - c0) * (x - x0) / (x1 - x0)
    }
}

/// One-sample Kolmogorov–Smirnov statistic of `sample` against `cdf`.
pub fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((f - i as f64 / n).abs());
        d = d.max((f - (i as f64 + 1.0) / n).abs());
    }
    d
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn two_sample_ks(a: &[f64], b: &[f64]) -> f64 {
    let mut sa = a.to_vec();
    let mut sb = b.to_vec();
    sa.sort_by(|x, y| x.partial_cmp(y).unwrap());
    sb.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (na, nb) = (sa.len() as f64, sb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < sa.len() && j < sb.len() {
        if sa[i] <= sb[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Sample mean and (population) variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|&x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Monte-Carlo standard error of the mean for an autocorrelated sequence,
/// estimated with non-overlapping batch means.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let b = batches.max(2).min(xs.len());
    let len = xs.len() / b;
    assert!(len >= 1, "too few points for batch means");
    let means: Vec<f64> = (0..b)
        .map(|i| xs[i * len..(i + 1) * len].iter().sum::<f64>() / len as f64)
        .collect();
    let (_, var) = mean_var(&means);
    (var / (b as f64 - 1.0)).sqrt()
}

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let h = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_cdf_matches_exponential() {
        // Unnormalised Exp(1) log-density.
        let cdf = GridCdf::on_positive(|x| -x);
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0] {
            let exact = 1.0 - (-x as f64).exp();
            assert!((cdf.eval(x) - exact).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn grid_cdf_real_matches_normal() {
        let cdf = GridCdf::on_real(|x| -0.5 * x * x, 0.0, 40.0);
        assert!((cdf.eval(0.0) - 0.5).abs() < 1e-6);
        assert!((cdf.eval(1.0) - 0.8413447460685429).abs() < 1e-6);
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..1000).map(|i| i as f64 / 1000.0).collect();
        let d = ks_statistic(&a, |x| x.clamp(0.0, 1.0));
        assert!(d < 0.01);
        let d_shift = ks_statistic(&a, |x| (x - 0.2).clamp(0.0, 1.0));
        assert!(d_shift > 0.15);
    }

    #[test]
    fn quantile_interpolates() {
        let xs = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&xs, 0.5), 2.0);
        assert_eq!(quantile(&xs, 0.0), 0.0);
        assert_eq!(quantile(&xs, 1.0), 4.0);
        assert!((quantile(&xs, 0.05) - 0.2).abs() < 1e-12);
    }
}
