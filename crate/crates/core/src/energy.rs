//! Evaluation of the knot energies E^(alpha) and their truncations.
//!
//! The integrand compares the inverse chord power with the inverse
//! intrinsic-distance power, weighted by both speeds. Quadrature is the
//! tensor midpoint rule on the sample grid; the |w|^{2-alpha} part of the
//! integrand near the diagonal is removed pointwise via the local
//! curvature model and restored analytically, which keeps the rule
//! uniformly second order.

use rayon::prelude::*;

use crate::cells::{outer_cells, Cell};
use crate::curve::SampledCurve;
use crate::error::{Error, Result};
use crate::spectral::dist;

/// Chord lengths below this bound (off the diagonal) abort evaluation.
pub const CHORD_GUARD: f64 = 1e-12;

/// Default principal-value cutoff schedule 2^-3 .. 2^-9.
pub fn default_eps_schedule() -> Vec<f64> {
    (3..=9).map(|m| (2.0f64).powi(-m)).collect()
}

/// Parameters shared by the energy, variation and flow machinery.
#[derive(Debug, Clone)]
pub struct EnergyParams {
    pub alpha: f64,
    pub lambda: f64,
    pub eps_schedule: Vec<f64>,
    /// Integration grid resolution; defaults to the curve's own N.
    pub quad_n: Option<usize>,
}

impl EnergyParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let p = EnergyParams {
            alpha,
            lambda: 0.0,
            eps_schedule: default_eps_schedule(),
            quad_n: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_lambda(mut self, lambda: f64) -> Result<Self> {
        self.lambda = lambda;
        self.validate()?;
        Ok(self)
    }

    pub fn with_eps_schedule(mut self, schedule: Vec<f64>) -> Result<Self> {
        self.eps_schedule = schedule;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2.0 <= self.alpha && self.alpha < 3.0) {
            return Err(Error::InvalidInput(format!(
                "alpha={} outside [2,3)",
                self.alpha
            )));
        }
        if !(self.lambda >= 0.0) || !self.lambda.is_finite() {
            return Err(Error::InvalidInput(format!(
                "lambda={} must be nonnegative",
                self.lambda
            )));
        }
        if self.eps_schedule.is_empty() {
            return Err(Error::InvalidInput("empty eps schedule".into()));
        }
        for pair in self.eps_schedule.windows(2) {
            if pair[1] >= pair[0] {
                return Err(Error::InvalidInput(
                    "eps schedule must be strictly decreasing".into(),
                ));
            }
        }
        if self
            .eps_schedule
            .iter()
            .any(|&e| !(e > 0.0 && e < 0.5))
        {
            return Err(Error::InvalidInput(
                "eps schedule values must lie in (0, 1/2)".into(),
            ));
        }
        Ok(())
    }

    /// Gradient-bearing operations only admit alpha strictly inside (2,3).
    pub fn require_gradient_alpha(&self) -> Result<()> {
        if self.alpha <= 2.0 {
            return Err(Error::InvalidInput(format!(
                "alpha={} must lie strictly in (2,3) for first-variation work",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Evaluated energy with the effective near-diagonal cutoff and a
/// conservative error bound.
#[derive(Debug, Clone, Copy)]
pub struct EnergyValue {
    pub value: f64,
    /// Half-width of the diagonal cell taken over by the curvature model.
    pub eps_used: f64,
    /// Near-diagonal model mass bound plus the grid-refinement delta.
    pub error_estimate: f64,
}

/// u-averaged energy integrand at grid offset i.
fn row_on_grid(curve: &SampledCurve, alpha: f64, i: usize) -> Result<f64> {
    let n = curve.n_samples();
    let samples = curve.samples();
    let speeds = curve.speeds();
    let arclen = curve.arclen();
    let total = curve.length();
    let mut acc = 0.0;
    for j in 0..n {
        let js = (j + i) % n;
        let chord = dist(samples.point(js), samples.point(j));
        if chord < CHORD_GUARD {
            return Err(Error::SelfIntersection {
                u: j as f64 / n as f64,
                w: (i.min(n - i)) as f64 / n as f64,
                chord,
            });
        }
        let mut ell = arclen.mean * ((js as f64 - j as f64) / n as f64)
            + arclen.periodic[js]
            - arclen.periodic[j];
        if js < j {
            ell += total;
        }
        let d = ell.min(total - ell);
        acc += (chord.powf(-alpha) - d.powf(-alpha)) * speeds[js] * speeds[j];
    }
    Ok(acc / n as f64)
}

/// u-averaged energy integrand at an off-grid signed offset w
/// (trigonometric translation of the curve data).
fn row_shifted(curve: &SampledCurve, alpha: f64, w: f64) -> Result<f64> {
    let n = curve.n_samples();
    let samples = curve.samples();
    let speeds = curve.speeds();
    let shifted = curve.coeffs().shifted_samples(w);
    let shifted_speeds = curve.coeffs().derivative().shifted_samples(w).norms();
    let dl = curve.arclen().shifted_differences(w);
    let total = curve.length();
    let mut acc = 0.0;
    for j in 0..n {
        let chord = dist(shifted.point(j), samples.point(j));
        if chord < CHORD_GUARD {
            return Err(Error::SelfIntersection { u: j as f64 / n as f64, w, chord });
        }
        let ell = dl[j].abs();
        let d = ell.min(total - ell);
        acc += (chord.powf(-alpha) - d.powf(-alpha)) * shifted_speeds[j] * speeds[j];
    }
    Ok(acc / n as f64)
}

/// Mean of the near-diagonal model coefficient
/// c(u) = alpha kappa(u)^2 v(u)^{4-alpha} / 24.
fn model_coefficient(curve: &SampledCurve, alpha: f64) -> f64 {
    let n = curve.n_samples();
    let mut acc = 0.0;
    for j in 0..n {
        acc += curve.curvature_sq()[j] * curve.speeds()[j].powf(4.0 - alpha);
    }
    alpha * acc / (24.0 * n as f64)
}

fn energy_over(curve: &SampledCurve, alpha: f64, eps: f64) -> Result<f64> {
    let n = curve.n_samples();
    let cbar = model_coefficient(curve, alpha);
    let e1 = 2.0 - alpha;
    let cells = outer_cells(n, eps, false);
    let contributions: Vec<Result<f64>> = cells
        .par_iter()
        .map(|cell| match *cell {
            Cell::OnGrid { i, width } => {
                let w = (i.min(n - i)) as f64 / n as f64;
                Ok((row_on_grid(curve, alpha, i)? - cbar * w.powf(e1)) * width)
            }
            Cell::Shifted { w, width } => {
                let wa = w.abs();
                Ok((row_shifted(curve, alpha, w)? - cbar * wa.powf(e1)) * width)
            }
        })
        .collect();
    let mut total = 0.0;
    for c in contributions {
        total += c?;
    }
    total += cbar * 2.0 * ((0.5f64).powf(3.0 - alpha) - eps.powf(3.0 - alpha))
        / (3.0 - alpha);
    Ok(total)
}

fn prepared(curve: &SampledCurve, params: &EnergyParams) -> Result<SampledCurve> {
    curve.ensure_regular()?;
    match params.quad_n {
        Some(qn) if qn != curve.n_samples() => curve.resampled(qn),
        _ => Ok(curve.clone()),
    }
}

/// E^(alpha) of an embedded regular curve.
pub fn energy(curve: &SampledCurve, params: &EnergyParams) -> Result<EnergyValue> {
    params.validate()?;
    let work = prepared(curve, params)?;
    let n = work.n_samples();
    let value = energy_over(&work, params.alpha, 0.0)?;
    let cbar = model_coefficient(&work, params.alpha);
    let model_mass =
        1.5 * cbar * 2.0 * (1.0 / n as f64).powf(3.0 - params.alpha) / (3.0 - params.alpha);
    let refinement = if n / 2 >= 16 {
        let coarse = work.resampled(n / 2)?;
        (value - energy_over(&coarse, params.alpha, 0.0)?).abs()
    } else {
        0.0
    };
    Ok(EnergyValue {
        value,
        eps_used: 0.5 / n as f64,
        error_estimate: model_mass + refinement,
    })
}

/// Truncated energy E_eps over the exact domain {|w| >= eps}.
pub fn energy_truncated(
    curve: &SampledCurve,
    params: &EnergyParams,
    eps: f64,
) -> Result<EnergyValue> {
    params.validate()?;
    if !(eps > 0.0 && eps <= 0.5) {
        return Err(Error::InvalidInput(format!("eps={eps} outside (0, 1/2]")));
    }
    let work = prepared(curve, params)?;
    let n = work.n_samples();
    let value = if eps == 0.5 {
        0.0
    } else {
        energy_over(&work, params.alpha, eps)?
    };
    let refinement = if n / 2 >= 16 && eps < 0.5 {
        let coarse = work.resampled(n / 2)?;
        (value - energy_over(&coarse, params.alpha, eps)?).abs()
    } else {
        0.0
    };
    Ok(EnergyValue { value, eps_used: eps, error_estimate: refinement })
}

/// E^(alpha) + lambda * length.
pub fn energy_plus_length(curve: &SampledCurve, params: &EnergyParams) -> Result<f64> {
    let e = energy(curve, params)?;
    Ok(e.value + params.lambda * crate::curve::length(curve)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::make_circle;
    use approx::assert_abs_diff_eq;

    #[test]
    fn unit_circle_alpha2_is_4() {
        let c = make_circle(512, 1.0).unwrap();
        let params = EnergyParams::new(2.0).unwrap();
        let e = energy(&c, &params).unwrap();
        assert_abs_diff_eq!(e.value, 4.0, epsilon = 1e-3);
        assert!(e.value > 0.0);
    }

    #[test]
    fn scaling_law_exact_in_grid_arithmetic() {
        let c = make_circle(128, 1.0).unwrap();
        let alpha = 2.5;
        let params = EnergyParams::new(alpha).unwrap();
        let e1 = energy(&c, &params).unwrap().value;
        for r in [0.5, 2.0, 5.0] {
            let scaled =
                SampledCurve::from_samples(c.samples().scaled(r)).unwrap();
            let er = energy(&scaled, &params).unwrap().value;
            let expect = r.powf(2.0 - alpha) * e1;
            assert!((er - expect).abs() <= 1e-10 * er.abs());
        }
    }

    #[test]
    fn truncated_at_half_is_zero() {
        let c = make_circle(64, 1.0).unwrap();
        let params = EnergyParams::new(2.5).unwrap();
        let e = energy_truncated(&c, &params, 0.5).unwrap();
        assert_eq!(e.value, 0.0);
    }

    #[test]
    fn truncation_monotone_and_convergent() {
        let c = make_circle(256, 1.0).unwrap();
        let params = EnergyParams::new(2.5).unwrap();
        let full = energy(&c, &params).unwrap();
        let mut prev = 0.0;
        for &eps in &params.eps_schedule {
            let t = energy_truncated(&c, &params, eps).unwrap().value;
            assert!(t >= prev - 1e-12, "not monotone at eps={eps}");
            assert!(t <= full.value);
            prev = t;
        }
        let gap = full.value - prev;
        assert!(
            gap <= full.error_estimate,
            "final gap {gap} exceeds error estimate {}",
            full.error_estimate
        );
    }

    #[test]
    fn lambda_term_added() {
        let c = make_circle(64, 1.0).unwrap();
        let params = EnergyParams::new(2.5).unwrap().with_lambda(1.0).unwrap();
        let e = energy(&c, &params).unwrap().value;
        let obj = energy_plus_length(&c, &params).unwrap();
        assert_abs_diff_eq!(obj, e + 1.0, epsilon = 1e-12);
    }

    #[test]
    fn alpha_validation() {
        assert!(EnergyParams::new(1.9).is_err());
        assert!(EnergyParams::new(3.0).is_err());
        assert!(EnergyParams::new(2.0).is_ok());
        assert!(EnergyParams::new(2.0).unwrap().require_gradient_alpha().is_err());
    }

    #[test]
    fn rigid_motion_invariance() {
        let c = make_circle(128, 1.0).unwrap();
        let params = EnergyParams::new(2.5).unwrap();
        let e1 = energy(&c, &params).unwrap().value;
        // rotate by a fixed angle and translate
        let th: f64 = 0.7;
        let (sin, cos) = th.sin_cos();
        let mut data = Vec::with_capacity(2 * 128);
        for j in 0..128 {
            let p = c.samples().point(j);
            data.push(cos * p[0] - sin * p[1] + 3.0);
            data.push(sin * p[0] + cos * p[1] - 1.5);
        }
        let moved = SampledCurve::from_samples(
            crate::spectral::Samples::new(2, data).unwrap(),
        )
        .unwrap();
        let e2 = energy(&moved, &params).unwrap().value;
        assert_abs_diff_eq!(e1, e2, epsilon = 1e-12 * e1.max(1.0));
    }

    #[test]
    fn self_intersection_guard_fires() {
        // figure-eight-like degenerate: two loops touching at the origin
        let n = 64;
        let mut data = Vec::with_capacity(2 * n);
        for j in 0..n {
            let t = 2.0 * std::f64::consts::PI * j as f64 / n as f64;
            data.push((2.0 * t).sin() / 2.0);
            data.push(t.sin());
        }
        let c = SampledCurve::from_samples(
            crate::spectral::Samples::new(2, data).unwrap(),
        )
        .unwrap();
        let params = EnergyParams::new(2.5).unwrap();
        match energy(&c, &params) {
            Err(Error::SelfIntersection { .. }) => {}
            other => panic!("expected self-intersection error, got {other:?}"),
        }
    }
}
