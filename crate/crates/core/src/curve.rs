//! Closed-curve representations on the period-1 parameter circle:
//! sampled curves with cached spectral data, truncated Fourier curves,
//! generators, arc-length reparametrization, intrinsic distance, and
//! embeddedness diagnostics.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::{dist, norm, Antiderivative, Coeffs, Samples};

/// Threshold below which the minimal sampled speed flags a degenerate curve.
pub const REGULARITY_FLOOR: f64 = 1e-10;

fn is_power_of_two(n: usize) -> bool {
    n != 0 && n & (n - 1) == 0
}

fn validate_sample_count(n: usize) -> Result<()> {
    if !is_power_of_two(n) || n < 16 {
        return Err(Error::InvalidInput(format!(
            "sample count {n} must be a power of two >= 16"
        )));
    }
    Ok(())
}

/// N uniform samples of a closed curve gamma: R/Z -> R^n with cached
/// spectral derivative, speeds, curvature and cumulative arc length.
#[derive(Debug, Clone)]
pub struct SampledCurve {
    samples: Samples,
    coeffs: Coeffs,
    derivative: Samples,
    second_derivative: Samples,
    speeds: Vec<f64>,
    curvature_sq: Vec<f64>,
    arclen: Antiderivative,
    length: f64,
}

impl SampledCurve {
    pub fn from_samples(samples: Samples) -> Result<Self> {
        validate_sample_count(samples.len())?;
        if samples.dim() < 2 {
            return Err(Error::InvalidInput(format!(
                "curve dimension {} must be >= 2",
                samples.dim()
            )));
        }
        let coeffs = samples.coeffs();
        let dcoeffs = coeffs.derivative();
        let derivative = dcoeffs.samples();
        let second_derivative = dcoeffs.derivative().samples();
        let speeds = derivative.norms();
        let n = samples.len();
        let mut curvature_sq = Vec::with_capacity(n);
        for j in 0..n {
            let d = derivative.point(j);
            let dd = second_derivative.point(j);
            let v2 = crate::spectral::dot(d, d);
            let w2 = crate::spectral::dot(dd, dd);
            let cross = crate::spectral::dot(d, dd);
            let denom = v2 * v2 * v2;
            curvature_sq.push(if denom > 0.0 { (w2 * v2 - cross * cross) / denom } else { 0.0 });
        }
        let speed_field = Samples::new(1, speeds.clone())?;
        let arclen = Antiderivative::of_scalar(&speed_field);
        let length = arclen.mean;
        Ok(SampledCurve {
            samples,
            coeffs,
            derivative,
            second_derivative,
            speeds,
            curvature_sq,
            arclen,
            length,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }

    pub fn dim(&self) -> usize {
        self.samples.dim()
    }

    pub fn samples(&self) -> &Samples {
        &self.samples
    }

    pub fn coeffs(&self) -> &Coeffs {
        &self.coeffs
    }

    /// Samples of gamma' obtained by spectral differentiation.
    pub fn derivative(&self) -> &Samples {
        &self.derivative
    }

    pub fn second_derivative(&self) -> &Samples {
        &self.second_derivative
    }

    pub fn speeds(&self) -> &[f64] {
        &self.speeds
    }

    /// Squared geometric curvature at each sample.
    pub fn curvature_sq(&self) -> &[f64] {
        &self.curvature_sq
    }

    pub fn min_speed(&self) -> f64 {
        self.speeds.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn arclen(&self) -> &Antiderivative {
        &self.arclen
    }

    /// Scale of the curve for relative thresholds: max |gamma(u_j)|.
    pub fn radius_scale(&self) -> f64 {
        (0..self.n_samples())
            .map(|j| norm(self.samples.point(j)))
            .fold(0.0, f64::max)
    }

    pub fn ensure_regular(&self) -> Result<()> {
        let floor = REGULARITY_FLOOR * (1.0 + self.radius_scale());
        let v = self.min_speed();
        if v <= floor {
            return Err(Error::NonRegular { min_speed: v });
        }
        Ok(())
    }

    /// Relative deviation of the speed from its mean.
    pub fn speed_spread(&self) -> f64 {
        let mean = self.length;
        let max_dev = self
            .speeds
            .iter()
            .map(|v| (v - mean).abs())
            .fold(0.0, f64::max);
        max_dev / mean
    }

    pub fn is_arclength(&self, rel_tol: f64) -> bool {
        self.speed_spread() <= rel_tol
    }

    /// Resample spectrally to a different power-of-two grid.
    pub fn resampled(&self, n_out: usize) -> Result<SampledCurve> {
        validate_sample_count(n_out)?;
        if n_out == self.n_samples() {
            return Ok(self.clone());
        }
        let dim = self.dim();
        let n_in = self.n_samples();
        let mut out = Coeffs::zeros(dim, n_out);
        let k_keep = (n_in.min(n_out)) / 2 - 1;
        for c in 0..dim {
            for k in -(k_keep as i64)..=(k_keep as i64) {
                out.set_mode(c, k, self.coeffs.mode(c, k));
            }
        }
        SampledCurve::from_samples(out.samples())
    }

    /// Apply a displacement field: gamma + c * h.
    pub fn displaced(&self, c: f64, h: &Samples) -> Result<SampledCurve> {
        if h.dim() != self.dim() || h.len() != self.n_samples() {
            return Err(Error::InvalidInput(
                "displacement grid does not match the curve".into(),
            ));
        }
        SampledCurve::from_samples(self.samples.add_scaled(c, h))
    }

    /// Arc length of the curve segment from u to u+w along the parameter
    /// path, evaluated from the cumulative table with linear interpolation.
    fn segment_length_interp(&self, u: f64, w: f64) -> f64 {
        let s_u = self.arclen_linear(u);
        let s_uw = self.arclen_linear(u + w);
        (s_uw - s_u).abs()
    }

    /// Cumulative arc length s(x) for arbitrary real x, linear interpolation
    /// between grid values of the spectral table.
    fn arclen_linear(&self, x: f64) -> f64 {
        let n = self.n_samples() as f64;
        let wrap = x.floor();
        let frac = x - wrap;
        let pos = frac * n;
        let j = (pos.floor() as usize).min(self.n_samples() - 1);
        let t = pos - j as f64;
        let s_j = self.arclen.mean * (j as f64 / n) + self.arclen.periodic[j];
        let s_next = if j + 1 == self.n_samples() {
            self.length + self.arclen.periodic[0]
        } else {
            self.arclen.mean * ((j + 1) as f64 / n) + self.arclen.periodic[j + 1]
        };
        wrap * self.length + s_j + t * (s_next - s_j)
    }
}

/// Intrinsic distance d_gamma(u+w, u): the shorter of the two arcs.
pub fn intrinsic_distance(curve: &SampledCurve, u: f64, w: f64) -> Result<f64> {
    if !(w.is_finite() && u.is_finite()) || w.abs() > 0.5 {
        return Err(Error::InvalidInput(format!("offset w={w} outside [-1/2, 1/2]")));
    }
    curve.ensure_regular()?;
    let l = curve.segment_length_interp(u, w);
    Ok(l.min(curve.length - l))
}

/// Total length of the curve (spectral quadrature of |gamma'|).
pub fn length(curve: &SampledCurve) -> Result<f64> {
    curve.ensure_regular()?;
    Ok(curve.length())
}

/// Round circle of given circumference in the plane, arc-length
/// parametrized, centered at the origin.
pub fn make_circle(n_samples: usize, length: f64) -> Result<SampledCurve> {
    validate_sample_count(n_samples)?;
    if !(length > 0.0) || !length.is_finite() {
        return Err(Error::InvalidInput(format!("length {length} must be positive")));
    }
    let r = length / (2.0 * PI);
    let mut data = Vec::with_capacity(2 * n_samples);
    for j in 0..n_samples {
        let t = 2.0 * PI * j as f64 / n_samples as f64;
        data.push(r * t.cos());
        data.push(r * t.sin());
    }
    SampledCurve::from_samples(Samples::new(2, data)?)
}

/// Truncated Fourier representation: coefficients gamma_hat(k), |k| <= K.
#[derive(Debug, Clone)]
pub struct FourierCurve {
    dim: usize,
    k_max: usize,
    /// coeffs[c][k + k_max] = gamma_hat_c(k)
    coeffs: Vec<Vec<Complex64>>,
}

impl FourierCurve {
    pub fn new(dim: usize, k_max: usize, coeffs: Vec<Vec<Complex64>>) -> Result<Self> {
        if coeffs.len() != dim || coeffs.iter().any(|c| c.len() != 2 * k_max + 1) {
            return Err(Error::InvalidInput(
                "fourier coefficient table has the wrong shape".into(),
            ));
        }
        let fc = FourierCurve { dim, k_max, coeffs };
        fc.check_reality()?;
        Ok(fc)
    }

    /// Reality condition: coefficients at -k must conjugate those at +k.
    fn check_reality(&self) -> Result<()> {
        let scale: f64 = self
            .coeffs
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let tol = 1e-9 * (1.0 + scale);
        for c in 0..self.dim {
            for k in 0..=self.k_max as i64 {
                let a = self.mode(c, k);
                let b = self.mode(c, -k);
                if (a - b.conj()).norm() > tol {
                    return Err(Error::InvalidInput(format!(
                        "reality condition violated at mode k={k}, coordinate {c}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    pub fn mode(&self, c: usize, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.k_max {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[c][(k + self.k_max as i64) as usize]
    }

    pub fn set_mode(&mut self, c: usize, k: i64, z: Complex64) {
        self.coeffs[c][(k + self.k_max as i64) as usize] = z;
    }

    pub fn zeros(dim: usize, k_max: usize) -> FourierCurve {
        FourierCurve {
            dim,
            k_max,
            coeffs: vec![vec![Complex64::new(0.0, 0.0); 2 * k_max + 1]; dim],
        }
    }

    /// Extract modes |k| <= k_max from a sampled curve.
    pub fn analyze(curve: &SampledCurve, k_max: usize) -> Result<FourierCurve> {
        if 2 * k_max >= curve.n_samples() {
            return Err(Error::InvalidInput(format!(
                "k_max {k_max} exceeds the curve resolution"
            )));
        }
        let mut fc = FourierCurve::zeros(curve.dim(), k_max);
        for c in 0..curve.dim() {
            for k in -(k_max as i64)..=(k_max as i64) {
                fc.set_mode(c, k, curve.coeffs().mode(c, k));
            }
        }
        Ok(fc)
    }

    /// Synthesize samples by inverse transform at n_out >= max(16, 4K) points.
    pub fn synthesize(&self, n_out: Option<usize>) -> Result<SampledCurve> {
        let min_n = (4 * self.k_max).max(16).next_power_of_two();
        let n = n_out.unwrap_or(min_n);
        validate_sample_count(n)?;
        if n < 4 * self.k_max {
            return Err(Error::InvalidInput(format!(
                "synthesis resolution {n} is below 4*K = {}",
                4 * self.k_max
            )));
        }
        let mut grid = Coeffs::zeros(self.dim, n);
        for c in 0..self.dim {
            for k in -(self.k_max as i64)..=(self.k_max as i64) {
                grid.set_mode(c, k, self.mode(c, k));
            }
        }
        SampledCurve::from_samples(grid.samples())
    }
}

/// Build a sampled curve from Fourier coefficients (inverse DFT).
pub fn make_fourier_curve(fc: &FourierCurve) -> Result<SampledCurve> {
    fc.synthesize(None)
}

/// Reparametrize to constant speed. The cumulative arc length is inverted
/// with a monotone interpolation start and Newton-polished against the
/// spectral arc-length function, then the curve is re-sampled.
pub fn reparametrize_arclength(curve: &SampledCurve, n_out: usize) -> Result<SampledCurve> {
    validate_sample_count(n_out)?;
    curve.ensure_regular()?;
    let n = curve.n_samples();
    let total = curve.length();
    // monotone initial guess from the grid table
    let mut table = Vec::with_capacity(n + 1);
    for j in 0..n {
        table.push(curve.arclen.mean * (j as f64 / n as f64) + curve.arclen.periodic[j]
            - curve.arclen.periodic[0]);
    }
    table.push(total);
    let targets: Vec<f64> = (0..n_out).map(|j| total * j as f64 / n_out as f64).collect();
    let mut us = Vec::with_capacity(n_out);
    let mut lo = 0usize;
    for &t in &targets {
        while lo + 1 < table.len() && table[lo + 1] < t {
            lo += 1;
        }
        let seg = table[lo + 1] - table[lo];
        let frac = if seg > 0.0 { (t - table[lo]) / seg } else { 0.0 };
        us.push((lo as f64 + frac) / n as f64);
    }
    // Newton polish: solve s(u) = t with spectral s and v
    let s0 = curve.arclen.eval_points(&[0.0])[0];
    for _ in 0..4 {
        let s_vals = curve.arclen.eval_points(&us);
        let v_vals = curve.coeffs().derivative().eval_points(&us);
        for (j, u) in us.iter_mut().enumerate() {
            let v = norm(v_vals.point(j));
            *u -= (s_vals[j] - s0 - targets[j]) / v;
        }
    }
    let pts = curve.coeffs().eval_points(&us);
    SampledCurve::from_samples(pts)
}

/// Bi-Lipschitz and regularity constants from an all-pairs grid scan.
#[derive(Debug, Clone)]
pub struct EmbeddednessReport {
    /// min over grid pairs of min(|chord|, d_gamma) / |w|
    pub c_bi_lip: f64,
    /// min_j |gamma'(u_j)|
    pub c_reg: f64,
    /// (u, w) attaining the bi-Lipschitz minimum
    pub attained_at: (f64, f64),
}

/// Scan all sample pairs for the embeddedness constants. O(N^2).
pub fn embeddedness_constants(curve: &SampledCurve) -> Result<EmbeddednessReport> {
    let c_reg = curve.min_speed();
    let floor = REGULARITY_FLOOR * (1.0 + curve.radius_scale());
    if c_reg <= floor {
        return Err(Error::NonRegular { min_speed: c_reg });
    }
    let n = curve.n_samples();
    let total = curve.length();
    let s = &curve.arclen;
    let cum: Vec<f64> = (0..n)
        .map(|j| s.mean * (j as f64 / n as f64) + s.periodic[j])
        .collect();
    let per_i: Vec<(f64, f64, f64)> = (1..n)
        .into_par_iter()
        .map(|i| {
            let w_abs = (i.min(n - i)) as f64 / n as f64;
            let w_signed = if i <= n / 2 {
                i as f64 / n as f64
            } else {
                i as f64 / n as f64 - 1.0
            };
            let mut best = f64::INFINITY;
            let mut at_u = 0.0;
            for j in 0..n {
                let js = (j + i) % n;
                let chord = dist(curve.samples.point(js), curve.samples.point(j));
                let mut ell = cum[js] - cum[j];
                if js < j {
                    ell += total;
                }
                let d = ell.min(total - ell);
                let ratio = chord.min(d) / w_abs;
                if ratio < best {
                    best = ratio;
                    at_u = j as f64 / n as f64;
                }
            }
            (best, at_u, w_signed)
        })
        .collect();
    let mut c_bi_lip = f64::INFINITY;
    let mut attained_at = (0.0, 0.0);
    for (best, u, w) in per_i {
        if best < c_bi_lip {
            c_bi_lip = best;
            attained_at = (u, w);
        }
    }
    Ok(EmbeddednessReport { c_bi_lip, c_reg, attained_at })
}

/// Coefficients of the standard (2,3) torus-knot trefoil:
/// ((2+cos 3t) cos 2t, (2+cos 3t) sin 2t, sin 3t), t = 2 pi u.
pub fn trefoil_fourier() -> FourierCurve {
    let mut fc = FourierCurve::zeros(3, 5);
    let half = Complex64::new(0.5, 0.0);
    // x = 2 cos 2t + (cos 5t + cos t)/2
    fc.set_mode(0, 2, Complex64::new(1.0, 0.0));
    fc.set_mode(0, -2, Complex64::new(1.0, 0.0));
    fc.set_mode(0, 5, half * 0.5);
    fc.set_mode(0, -5, half * 0.5);
    fc.set_mode(0, 1, half * 0.5);
    fc.set_mode(0, -1, half * 0.5);
    // y = 2 sin 2t + (sin 5t - sin t)/2 ; sin kt = (e^{ikt} - e^{-ikt})/(2i)
    let sin_pair = |fc: &mut FourierCurve, c: usize, k: i64, amp: f64| {
        let z = Complex64::new(0.0, -amp / 2.0);
        let prev = fc.mode(c, k);
        fc.set_mode(c, k, prev + z);
        let prev = fc.mode(c, -k);
        fc.set_mode(c, -k, prev + z.conj());
    };
    sin_pair(&mut fc, 1, 2, 2.0);
    sin_pair(&mut fc, 1, 5, 0.5);
    sin_pair(&mut fc, 1, 1, -0.5);
    // z = sin 3t
    sin_pair(&mut fc, 2, 3, 1.0);
    fc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn circle_constant_speed_and_length() {
        let c = make_circle(256, 1.0).unwrap();
        for &v in c.speeds() {
            assert_abs_diff_eq!(v, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(length(&c).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn circle_radius() {
        let c = make_circle(256, 4.0 * PI).unwrap();
        let max_r = c.radius_scale();
        assert_abs_diff_eq!(max_r, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn rejects_bad_sample_counts() {
        assert!(make_circle(100, 1.0).is_err());
        assert!(make_circle(8, 1.0).is_err());
        assert!(make_circle(256, 0.0).is_err());
    }

    #[test]
    fn fourier_circle_matches_make_circle() {
        let r = 1.0 / (2.0 * PI);
        let mut fc = FourierCurve::zeros(2, 1);
        fc.set_mode(0, 1, Complex64::new(r / 2.0, 0.0));
        fc.set_mode(0, -1, Complex64::new(r / 2.0, 0.0));
        fc.set_mode(1, 1, Complex64::new(0.0, -r / 2.0));
        fc.set_mode(1, -1, Complex64::new(0.0, r / 2.0));
        let c1 = fc.synthesize(Some(256)).unwrap();
        let c2 = make_circle(256, 1.0).unwrap();
        for j in 0..256 {
            assert!(dist(c1.samples().point(j), c2.samples().point(j)) < 1e-12);
        }
    }

    #[test]
    fn constant_curve_flagged_non_regular() {
        let mut fc = FourierCurve::zeros(2, 1);
        fc.set_mode(0, 0, Complex64::new(0.3, 0.0));
        let c = fc.synthesize(Some(16)).unwrap();
        assert!(length(&c).is_err());
        assert!(embeddedness_constants(&c).is_err());
    }

    #[test]
    fn reality_violation_rejected() {
        let mut coeffs = vec![vec![Complex64::new(0.0, 0.0); 3]; 2];
        coeffs[0][2] = Complex64::new(1.0, 1.0); // k=+1
        coeffs[0][0] = Complex64::new(1.0, 1.0); // k=-1, not conjugate
        assert!(FourierCurve::new(2, 1, coeffs).is_err());
    }

    #[test]
    fn intrinsic_distance_circle() {
        let c = make_circle(256, 1.0).unwrap();
        assert_abs_diff_eq!(intrinsic_distance(&c, 0.0, 0.3).unwrap(), 0.3, epsilon = 1e-10);
        assert_abs_diff_eq!(intrinsic_distance(&c, 0.0, -0.4).unwrap(), 0.4, epsilon = 1e-10);
        assert!(intrinsic_distance(&c, 0.0, 0.6).is_err());
    }

    #[test]
    fn reparametrize_is_idempotent_on_circle() {
        let c = make_circle(256, 1.0).unwrap();
        let r = reparametrize_arclength(&c, 256).unwrap();
        for j in 0..256 {
            assert!(dist(c.samples().point(j), r.samples().point(j)) < 1e-10);
        }
    }

    #[test]
    fn embeddedness_circle_constant() {
        // unit-length circle: min over pairs of chord/|w| = 2/pi at w = 1/2
        let c = make_circle(256, 1.0).unwrap();
        let rep = embeddedness_constants(&c).unwrap();
        assert_abs_diff_eq!(rep.c_bi_lip, 2.0 / PI, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.c_reg, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.attained_at.1.abs(), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn trefoil_is_embedded() {
        let c = make_fourier_curve(&trefoil_fourier()).unwrap();
        let rep = embeddedness_constants(&c).unwrap();
        assert!(rep.c_bi_lip > 0.0);
        assert!(rep.c_reg > 0.0);
    }

    #[test]
    fn spectral_derivative_circle() {
        let c = make_circle(64, 2.0 * PI).unwrap(); // radius 1
        for &v in c.speeds() {
            assert_abs_diff_eq!(v, 2.0 * PI, epsilon = 1e-11);
        }
    }
}
