//! Exact samplers for the non-standard distributions needed by the full
//! conditionals: inverse gamma, inverse Gaussian, generalised inverse
//! Gaussian, and a multivariate normal parameterised by its precision matrix.
//!
//! Every sampler is a pure function of its parameters and the supplied
//! [`RngStream`], so callers may run them concurrently on distinct streams.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Draw from the inverse gamma distribution with density
/// `∝ x^{-shape-1} exp(-scale/x)`.
pub fn sample_inverse_gamma(shape: f64, scale: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0) || !(scale > 0.0) || !shape.is_finite() || !scale.is_finite() {
        return Err(Error::Domain(format!(
            "inverse gamma requires shape > 0 and scale > 0, got shape={shape}, scale={scale}"
        )));
    }
    // 1/X ~ Gamma(shape, rate = scale).
    let g = Gamma::new(shape, 1.0 / scale)
        .map_err(|e| Error::Domain(format!("gamma setup failed: {e}")))?;
    let mut x = g.sample(rng);
    // Guard against an underflowed gamma draw in extreme tails.
    while x == 0.0 {
        x = g.sample(rng);
    }
    Ok(1.0 / x)
}

/// Draw from the inverse Gaussian distribution with the given mean and shape
/// parameter, using the Michael–Schucany–Haas transformation.
pub fn sample_inverse_gaussian(mean: f64, shape: f64, rng: &mut RngStream) -> Result<f64> {
    if !(mean > 0.0) || !(shape > 0.0) || !mean.is_finite() || !shape.is_finite() {
        return Err(Error::Domain(format!(
            "inverse Gaussian requires mean > 0 and shape > 0, got mean={mean}, shape={shape}"
        )));
    }
    let nu: f64 = rng.sample(StandardNormal);
    let y = nu * nu;
    let mu_over_2l = mean / (2.0 * shape);
    let x = mean + mean * mu_over_2l * y
        - mu_over_2l * (4.0 * mean * shape * y + mean * mean * y * y).sqrt();
    let u: f64 = rng.random();
    let draw = if u <= mean / (mean + x) { x } else { mean * mean / x };
    // x can round to zero when mean/shape is extreme; retry rather than emit 0.
    if draw > 0.0 && draw.is_finite() {
        Ok(draw)
    } else {
        sample_inverse_gaussian(mean, shape, rng)
    }
}

/// Draw from the generalised inverse Gaussian distribution with density
/// `∝ x^{order-1} exp(-(chi/x + psi·x)/2)`.
///
/// Admissible parameter sets: `chi>0, psi>0` (any order); `chi>0, psi=0,
/// order<0` (inverse gamma boundary); `chi=0, psi>0, order>0` (gamma
/// boundary). Uses the Hörmann–Leydold generator: ratio-of-uniforms with and
/// without mode shift, plus a three-piece rejection hat for the small-ω,
/// `0 ≤ |order| < 1` region. All three are exact rejection methods.
pub fn sample_gig(chi: f64, psi: f64, order: f64, rng: &mut RngStream) -> Result<f64> {
    if chi < 0.0 || psi < 0.0 || !chi.is_finite() || !psi.is_finite() || !order.is_finite() {
        return Err(Error::Domain(format!(
            "GIG requires chi >= 0 and psi >= 0, got chi={chi}, psi={psi}, order={order}"
        )));
    }
    if chi == 0.0 {
        if psi > 0.0 && order > 0.0 {
            // Gamma(order, rate psi/2).
            let g = Gamma::new(order, 2.0 / psi)
                .map_err(|e| Error::Domain(format!("gamma setup failed: {e}")))?;
            return Ok(g.sample(rng));
        }
        return Err(Error::Domain(format!(
            "GIG with chi=0 requires psi > 0 and order > 0, got psi={psi}, order={order}"
        )));
    }
    if psi == 0.0 {
        if order < 0.0 {
            return sample_inverse_gamma(-order, chi / 2.0, rng);
        }
        return Err(Error::Domain(format!(
            "GIG with psi=0 requires order < 0, got order={order}"
        )));
    }

    let alpha = (chi / psi).sqrt();
    let omega = chi.sqrt() * psi.sqrt();
    let lambda = order.abs();
    if omega < 1e-280 {
        return Err(Error::Domain(format!(
            "GIG parameters too extreme: sqrt(chi*psi)={omega:e} underflows"
        )));
    }

    let x = if lambda > 2.0 || omega > 3.0 {
        gig_rou_shift(lambda, omega, rng)
    } else if lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2 {
        gig_rou_noshift(lambda, omega, rng)
    } else {
        gig_three_piece(lambda, omega, rng)
    };
    Ok(if order < 0.0 { alpha / x } else { alpha * x })
}

/// Mode of the two-parameter GIG density `x^{lambda-1} exp(-omega(x+1/x)/2)`,
/// written in the numerically stable form for `lambda < 1`.
fn gig_mode(lambda: f64, omega: f64) -> f64 {
    if lambda >= 1.0 {
        (((lambda - 1.0) * (lambda - 1.0) + omega * omega).sqrt() + (lambda - 1.0)) / omega
    } else {
        omega / (((1.0 - lambda) * (1.0 - lambda) + omega * omega).sqrt() + (1.0 - lambda))
    }
}

/// Ratio-of-uniforms without shift; valid when the bounding rectangle around
/// the origin is tight enough (moderate lambda and omega).
fn gig_rou_noshift(lambda: f64, omega: f64, rng: &mut RngStream) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);
    // Maximum of x*sqrt(density): positive root of omega/2 y^2 - (lambda+1) y - omega/2.
    let ym = ((lambda + 1.0) + ((lambda + 1.0) * (lambda + 1.0) + omega * omega).sqrt()) / omega;
    let um = (0.5 * (lambda + 1.0) * ym.ln() - s * (ym + 1.0 / ym) - nc).exp();

    loop {
        let u: f64 = um * rng.random::<f64>();
        let v: f64 = rng.random();
        if v == 0.0 {
            continue;
        }
        let x = u / v;
        if v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Ratio-of-uniforms with the density shifted to its mode; the u-range comes
/// from the two relevant roots of a cubic, found with Cardano's formula.
fn gig_rou_shift(lambda: f64, omega: f64, rng: &mut RngStream) -> f64 {
    let t = 0.5 * (lambda - 1.0);
    let s = 0.25 * omega;
    let xm = gig_mode(lambda, omega);
    let nc = t * xm.ln() - s * (xm + 1.0 / xm);

    // u-extremes solve x^3 + a x^2 + b x + c = 0.
    let a = -(2.0 * (lambda + 1.0) / omega + xm);
    let b = 2.0 * (lambda - 1.0) * xm / omega - 1.0;
    let c = xm;

    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let fi = (-q / (2.0 * (-(p * p * p) / 27.0).sqrt())).clamp(-1.0, 1.0).acos();
    let fak = 2.0 * (-p / 3.0).sqrt();
    let y1 = fak * (fi / 3.0).cos() - a / 3.0;
    let y2 = fak * (fi / 3.0 + 4.0 / 3.0 * std::f64::consts::PI).cos() - a / 3.0;

    let uplus = (y1 - xm) * (t * y1.ln() - s * (y1 + 1.0 / y1) - nc).exp();
    let uminus = (y2 - xm) * (t * y2.ln() - s * (y2 + 1.0 / y2) - nc).exp();

    loop {
        let u = uminus + rng.random::<f64>() * (uplus - uminus);
        let v: f64 = rng.random();
        if v == 0.0 {
            continue;
        }
        let x = u / v + xm;
        if x > 0.0 && v.ln() <= t * x.ln() - s * (x + 1.0 / x) - nc {
            return x;
        }
    }
}

/// Rejection from a three-piece hat (constant over the T-concave part, power
/// and exponential tails elsewhere) for `0 <= lambda < 1` and small omega.
fn gig_three_piece(lambda: f64, omega: f64, rng: &mut RngStream) -> f64 {
    debug_assert!(lambda < 1.0 && omega <= 1.0);
    let xm = gig_mode(lambda, omega);
    let x0 = omega / (1.0 - lambda);

    // Piece over (0, x0]: constant at the density maximum.
    let k0 = ((lambda - 1.0) * xm.ln() - 0.5 * omega * (xm + 1.0 / xm)).exp();
    let a0 = k0 * x0;

    // Pieces over (x0, 2/omega] (power hat) and the exponential tail.
    let (k1, a1, k2, a2);
    if x0 >= 2.0 / omega {
        k1 = 0.0;
        a1 = 0.0;
        k2 = x0.powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-omega * x0 / 2.0).exp() / omega;
    } else {
        k1 = (-omega).exp();
        a1 = if lambda == 0.0 {
            k1 * (2.0 / (omega * omega)).ln()
        } else {
            k1 / lambda * ((2.0 / omega).powf(lambda) - x0.powf(lambda))
        };
        k2 = (2.0 / omega).powf(lambda - 1.0);
        a2 = k2 * 2.0 * (-1.0f64).exp() / omega;
    }
    let atot = a0 + a1 + a2;

    loop {
        let mut v = atot * rng.random::<f64>();
        let (x, hx);
        if v <= a0 {
            x = x0 * v / a0;
            hx = k0;
        } else {
            v -= a0;
            if v <= a1 {
                if lambda == 0.0 {
                    x = omega * (omega.exp() * v).exp();
                    hx = k1 / x;
                } else {
                    x = (x0.powf(lambda) + lambda / k1 * v).powf(1.0 / lambda);
                    hx = k1 * x.powf(lambda - 1.0);
                }
            } else {
                v -= a1;
                let tail_start = x0.max(2.0 / omega);
                x = -2.0 / omega * ((-omega / 2.0 * tail_start).exp() - omega / (2.0 * k2) * v).ln();
                hx = k2 * (-omega / 2.0 * x).exp();
            }
        }
        if x <= 0.0 || !x.is_finite() {
            continue;
        }
        let u = rng.random::<f64>() * hx;
        if u.ln() <= (lambda - 1.0) * x.ln() - omega / 2.0 * (x + 1.0 / x) {
            return x;
        }
    }
}

/// Exact draw from `N(A^{-1} b, noise_var · A^{-1})` given the precision
/// matrix `A` (symmetric positive definite) and the linear term `b`.
pub fn sample_mvn_precision(
    linear_term: &DVector<f64>,
    precision: &DMatrix<f64>,
    noise_var: f64,
    rng: &mut RngStream,
) -> Result<DVector<f64>> {
    let p = linear_term.len();
    if precision.nrows() != p || precision.ncols() != p {
        return Err(Error::Shape(format!(
            "precision is {}x{} but linear term has length {p}",
            precision.nrows(),
            precision.ncols()
        )));
    }
    if !(noise_var > 0.0) || !noise_var.is_finite() {
        return Err(Error::Domain(format!(
            "noise variance must be positive and finite, got {noise_var}"
        )));
    }
    let chol = nalgebra::Cholesky::new(precision.clone()).ok_or_else(|| {
        Error::Conditioning(format!(
            "precision matrix of size {p} is not positive definite (diagonal range [{:e}, {:e}])",
            precision.diagonal().min(),
            precision.diagonal().max()
        ))
    })?;
    let mean = chol.solve(linear_term);
    let z = DVector::from_fn(p, |_, _| rng.sample::<f64, _>(StandardNormal));
    // Solve L^T w = z so that w ~ N(0, A^{-1}).
    let w = chol
        .l_dirty()
        .tr_solve_lower_triangular(&z)
        .ok_or_else(|| Error::Conditioning("triangular solve failed".into()))?;
    Ok(mean + w * noise_var.sqrt())
}
