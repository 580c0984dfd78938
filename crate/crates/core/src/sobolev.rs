//! Fractional Sobolev machinery on R/Z: Gagliardo-type double-integral
//! seminorms, their Fourier-weight form, the fractional Laplacian D^sigma,
//! and the near-diagonal tail seminorm.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cells::{inner_cells, Cell};
use crate::curve::SampledCurve;
use crate::error::{Error, Result};
use crate::quad::CkCache;
use crate::spectral::{dist, wavenumber, Coeffs, Samples};

/// Sobolev order k + s with integer part k and fractional part s in (0,1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SobolevOrder {
    pub k: u32,
    pub s: Option<f64>,
}

impl SobolevOrder {
    pub fn new(k: u32, s: Option<f64>) -> Result<Self> {
        if let Some(s) = s {
            if !(s > 0.0 && s < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "fractional order s={s} must lie strictly in (0,1)"
                )));
            }
        }
        Ok(SobolevOrder { k, s })
    }

    /// Split a positive real order into integer and fractional parts.
    pub fn from_total(order: f64) -> Result<Self> {
        if !(order > 0.0) || !order.is_finite() {
            return Err(Error::InvalidInput(format!("order {order} must be positive")));
        }
        let k = order.floor();
        let s = order - k;
        if s == 0.0 {
            SobolevOrder::new(k as u32, None)
        } else {
            SobolevOrder::new(k as u32, Some(s))
        }
    }

    pub fn total(&self) -> f64 {
        self.k as f64 + self.s.unwrap_or(0.0)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidInput(format!("s={s} outside (0,1)")));
    }
    Ok(())
}

/// Mean over the grid of |f(u_j + i/N) - f(u_j)|^2.
fn mean_sq_difference(f: &Samples, i: usize) -> f64 {
    let n = f.len();
    let mut acc = 0.0;
    for j in 0..n {
        let js = (j + i) % n;
        let d = dist(f.point(js), f.point(j));
        acc += d * d;
    }
    acc / n as f64
}

fn mean_sq_difference_shifted(f: &Coeffs, base: &Samples, w: f64) -> f64 {
    let shifted = f.shifted_samples(w);
    let n = base.len();
    let mut acc = 0.0;
    for j in 0..n {
        let d = dist(shifted.point(j), base.point(j));
        acc += d * d;
    }
    acc / n as f64
}

/// Model coefficients for the near-diagonal behavior of the squared
/// difference: mean |f(u+w)-f(u)|^2 = P1 w^2 + P2 w^4 + O(w^6) with
/// P1 = mean |f'|^2 and P2 = -mean |f''|^2 / 12.
fn diagonal_model(f: &Coeffs) -> (f64, f64) {
    let d1 = f.derivative().samples();
    let d2 = f.derivative().derivative().samples();
    let n = d1.len() as f64;
    let p1: f64 = d1.data().iter().map(|x| x * x).sum::<f64>() / n;
    let p2: f64 = -d2.data().iter().map(|x| x * x).sum::<f64>() / n / 12.0;
    (p1, p2)
}

/// Squared double-integral seminorm over the cut domain |w| <= eps
/// (eps = 1/2 gives the full seminorm). The singular factor |w|^{-expo}
/// multiplies the squared difference; near-diagonal behavior is removed by
/// the two-term model and restored analytically.
fn gagliardo_sq(f: &Samples, expo: f64, eps: f64) -> f64 {
    let n = f.len();
    let coeffs = f.coeffs();
    let (p1, p2) = diagonal_model(&coeffs);
    let e1 = 2.0 - expo; // exponent of the P1 model term
    let e2 = 4.0 - expo;
    let mut total = 0.0;
    for cell in inner_cells(n, eps) {
        match cell {
            Cell::OnGrid { i, width } => {
                let w = (i.min(n - i)) as f64 / n as f64;
                let val = mean_sq_difference(f, i) * w.powf(-expo);
                total += (val - p1 * w.powf(e1) - p2 * w.powf(e2)) * width;
            }
            Cell::Shifted { w, width } => {
                let wa = w.abs();
                let val = mean_sq_difference_shifted(&coeffs, f, w) * wa.powf(-expo);
                total += (val - p1 * wa.powf(e1) - p2 * wa.powf(e2)) * width;
            }
        }
    }
    total += p1 * 2.0 * eps.powf(e1 + 1.0) / (e1 + 1.0);
    total += p2 * 2.0 * eps.powf(e2 + 1.0) / (e2 + 1.0);
    total
}

/// Gagliardo seminorm |f|_{H^{s,2}} by tensor midpoint quadrature of the
/// double integral, with the diagonal handled by the local-slope model.
pub fn seminorm_double_integral(f: &Samples, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(gagliardo_sq(f, 1.0 + 2.0 * s, 0.5).max(0.0).sqrt())
}

/// The same seminorm from Fourier coefficients:
/// |f|^2 = sum_k c_k(s) |f_hat(k)|^2, weights by adaptive quadrature.
pub fn seminorm_fourier(f_hat: &Coeffs, s: f64, cache: &CkCache) -> Result<f64> {
    check_s(s)?;
    let n = f_hat.n();
    let mut total = 0.0;
    for k in 1..(n / 2) as i64 {
        let power = f_hat.mode_power(k) + f_hat.mode_power(-k);
        if power == 0.0 {
            continue;
        }
        total += cache.get(k, s) * power;
    }
    Ok(total.sqrt())
}

/// Fractional Laplacian D^sigma = (-Delta)^{sigma/2}: Fourier multiplier
/// (2 pi |k|)^sigma on period-1 functions. sigma = 0 is the identity;
/// for sigma > 0 the mean maps to zero; for sigma < 0 a nonzero mean is
/// rejected.
pub fn fractional_laplacian(f_hat: &Coeffs, sigma: f64) -> Result<Coeffs> {
    if sigma == 0.0 {
        return Ok(f_hat.clone());
    }
    if sigma < 0.0 {
        let mean: f64 = (0..f_hat.dim()).map(|c| f_hat.mode(c, 0).norm()).sum();
        let scale: f64 = (0..f_hat.dim())
            .flat_map(|c| (0..f_hat.n()).map(move |i| (c, i)))
            .map(|(c, i)| f_hat.bin(c, i).norm())
            .fold(0.0, f64::max);
        if mean > 1e-12 * (1.0 + scale) {
            return Err(Error::InvalidInput(format!(
                "D^sigma with sigma={sigma} < 0 requires a mean-free input (|f_hat(0)| = {mean:e})"
            )));
        }
    }
    Ok(f_hat.apply_multiplier(|k| {
        if k == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new((2.0 * PI * k.abs() as f64).powf(sigma), 0.0)
        }
    }))
}

/// Near-diagonal tail seminorm of gamma' at the energy exponent alpha:
/// ( int int_{|w|<=eps} |gamma'(u+w)-gamma'(u)|^2 / |w|^alpha )^{1/2}.
pub fn tail_seminorm(curve: &SampledCurve, alpha: f64, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidInput(format!("eps={eps} outside (0, 1/2]")));
    }
    if !(2.0 <= alpha && alpha < 3.0) {
        return Err(Error::InvalidInput(format!("alpha={alpha} outside [2,3)")));
    }
    curve.ensure_regular()?;
    Ok(gagliardo_sq(curve.derivative(), alpha, eps).max(0.0).sqrt())
}

/// Full norm of H^{1+s,2} used to normalize Euler-Lagrange residuals:
/// (|f|_{L^2}^2 + |f'|_{L^2}^2 + |f'|_{H^{s,2}}^2)^{1/2} with s=(alpha-1)/2,
/// the fractional part evaluated through the Fourier weights.
pub fn energy_space_norm(f: &Samples, alpha: f64, cache: &CkCache) -> Result<f64> {
    let s = 0.5 * (alpha - 1.0);
    check_s(s)?;
    let c = f.coeffs();
    let n = c.n();
    let mut l2 = 0.0;
    let mut dl2 = 0.0;
    let mut semi = 0.0;
    for i in 0..n {
        let k = wavenumber(i, n);
        let power: f64 = (0..c.dim()).map(|cc| c.bin(cc, i).norm_sqr()).sum();
        if power == 0.0 {
            continue;
        }
        l2 += power;
        if k != 0 && !(n % 2 == 0 && i == n / 2) {
            let deriv = (2.0 * PI * k as f64).powi(2) * power;
            dl2 += deriv;
            semi += cache.get(k, s) * deriv;
        }
    }
    Ok((l2 + dl2 + semi).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::c_k;
    use approx::assert_abs_diff_eq;

    fn mode_pair(n: usize, k: usize) -> Samples {
        // (cos 2 pi k u, sin 2 pi k u): coefficient power 1 at +-k combined
        let mut data = Vec::with_capacity(2 * n);
        for j in 0..n {
            let t = 2.0 * PI * k as f64 * j as f64 / n as f64;
            data.push(t.cos());
            data.push(t.sin());
        }
        Samples::new(2, data).unwrap()
    }

    #[test]
    fn constant_has_zero_seminorm() {
        let f = Samples::new(1, vec![3.25; 64]).unwrap();
        assert_abs_diff_eq!(seminorm_double_integral(&f, 0.5).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn single_mode_matches_fourier_weight() {
        let n = 512;
        let f = mode_pair(n, 1);
        let s = 0.5;
        let dbl = seminorm_double_integral(&f, s).unwrap();
        let expect = c_k(1, s).sqrt();
        assert!((dbl - expect).abs() / expect < 1e-4, "dbl={dbl} expect={expect}");
        let cache = CkCache::new();
        let four = seminorm_fourier(&f.coeffs(), s, &cache).unwrap();
        assert_abs_diff_eq!(four, expect, epsilon = 1e-9);
    }

    #[test]
    fn translation_invariance() {
        let n = 128;
        let f = mode_pair(n, 3);
        let shifted = f.coeffs().shifted_samples(0.23);
        let a = seminorm_double_integral(&f, 0.3).unwrap();
        let b = seminorm_double_integral(&shifted, 0.3).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-11 * a.max(1.0));
    }

    #[test]
    fn rejects_bad_s() {
        let f = mode_pair(64, 1);
        assert!(seminorm_double_integral(&f, 0.0).is_err());
        assert!(seminorm_double_integral(&f, 1.0).is_err());
    }

    #[test]
    fn laplacian_second_derivative_consistency() {
        // sigma = 2 on e^{2 pi i u}: multiplier (2 pi)^2
        let n = 64;
        let f = mode_pair(n, 1);
        let lap = fractional_laplacian(&f.coeffs(), 2.0).unwrap().samples();
        for j in 0..n {
            let expect = (2.0 * PI).powi(2) * f.point(j)[0];
            assert_abs_diff_eq!(lap.point(j)[0], expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn laplacian_zero_is_identity() {
        let f = mode_pair(64, 2);
        let out = fractional_laplacian(&f.coeffs(), 0.0).unwrap().samples();
        for j in 0..64 {
            assert_abs_diff_eq!(out.point(j)[0], f.point(j)[0], epsilon = 1e-13);
        }
    }

    #[test]
    fn laplacian_inverse_roundtrip_mean_free() {
        let n = 64;
        let f = mode_pair(n, 3);
        let sigma = 1.3;
        let fwd = fractional_laplacian(&f.coeffs(), sigma).unwrap();
        let back = fractional_laplacian(&fwd, -sigma).unwrap().samples();
        for j in 0..n {
            assert_abs_diff_eq!(back.point(j)[0], f.point(j)[0], epsilon = 1e-10);
            assert_abs_diff_eq!(back.point(j)[1], f.point(j)[1], epsilon = 1e-10);
        }
    }

    #[test]
    fn laplacian_negative_rejects_mean() {
        let mut f = mode_pair(64, 1);
        for j in 0..64 {
            f.point_mut(j)[0] += 1.0;
        }
        assert!(fractional_laplacian(&f.coeffs(), -0.5).is_err());
    }

    #[test]
    fn seminorm_scaling_linearity() {
        let f = mode_pair(256, 2);
        let g = f.scaled(-2.5);
        let a = seminorm_double_integral(&f, 0.75).unwrap();
        let b = seminorm_double_integral(&g, 0.75).unwrap();
        assert_abs_diff_eq!(b, 2.5 * a, epsilon = 1e-12 * b.max(1.0));
    }

    #[test]
    fn tail_matches_full_seminorm_at_half() {
        let c = crate::curve::make_circle(256, 1.0).unwrap();
        let alpha = 2.5;
        let tail = tail_seminorm(&c, alpha, 0.5).unwrap();
        let full = seminorm_double_integral(c.derivative(), 0.5 * (alpha - 1.0)).unwrap();
        assert_abs_diff_eq!(tail, full, epsilon = 1e-12 * full);
    }

    #[test]
    fn tail_monotone_in_eps() {
        let c = crate::curve::make_circle(256, 1.0).unwrap();
        let mut prev = 0.0;
        for eps in [0.05, 0.1, 0.2, 0.35, 0.5] {
            let t = tail_seminorm(&c, 2.5, eps).unwrap();
            assert!(t >= prev, "tail not monotone at eps={eps}");
            prev = t;
        }
    }

    #[test]
    fn tail_rejects_bad_eps() {
        let c = crate::curve::make_circle(256, 1.0).unwrap();
        assert!(tail_seminorm(&c, 2.5, 0.0).is_err());
        assert!(tail_seminorm(&c, 2.5, 0.6).is_err());
    }
}
