//! FFT plumbing for period-1 grid functions: coefficients, synthesis,
//! differentiation, translation, and antiderivatives.
//!
//! Grid functions are sampled at u_j = j/N. Coefficients use the usual FFT
//! layout (k = 0, 1, ..., N/2-1, -N/2, ..., -1). The Nyquist mode is zeroed
//! by derivative and shift operators so that all operators map real samples
//! to real samples.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};

static PLANNER: OnceLock<Mutex<FftPlanner<f64>>> = OnceLock::new();

fn plan(n: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = PLANNER
        .get_or_init(|| Mutex::new(FftPlanner::new()))
        .lock()
        .expect("fft planner poisoned");
    if forward {
        planner.plan_fft_forward(n)
    } else {
        planner.plan_fft_inverse(n)
    }
}

/// Signed integer wavenumber for FFT bin `i` of an `n`-point transform.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Real samples of a vector-valued grid function on u_j = j/N, stored
/// point-major: `data[j * dim + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Samples {
    dim: usize,
    data: Vec<f64>,
}

impl Samples {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() || data.len() % dim != 0 {
            return Err(Error::InvalidInput(format!(
                "samples length {} is not a multiple of dim {}",
                data.len(),
                dim
            )));
        }
        if !data.iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidInput("non-finite sample value".into()));
        }
        Ok(Samples { dim, data })
    }

    pub fn zeros(dim: usize, n: usize) -> Self {
        Samples { dim, data: vec![0.0; dim * n] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn point_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Euclidean norms |f(u_j)| for all j.
    pub fn norms(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            out.push(norm(self.point(j)));
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Samples {
        Samples { dim: self.dim, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn add_scaled(&self, c: f64, other: &Samples) -> Samples {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.data.len(), other.data.len());
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + c * b)
            .collect();
        Samples { dim: self.dim, data }
    }

    pub fn coeffs(&self) -> Coeffs {
        let n = self.len();
        let fft = plan(n, true);
        let mut per_coord = Vec::with_capacity(self.dim);
        for c in 0..self.dim {
            let mut buf: Vec<Complex64> = (0..n)
                .map(|j| Complex64::new(self.data[j * self.dim + c], 0.0))
                .collect();
            fft.process(&mut buf);
            let scale = 1.0 / n as f64;
            for z in &mut buf {
                *z *= scale;
            }
            per_coord.push(buf);
        }
        Coeffs { dim: self.dim, n, per_coord }
    }
}

/// Mean over the grid of the pointwise dot product of two fields.
pub fn mean_dot(a: &Samples, b: &Samples) -> f64 {
    assert_eq!(a.data.len(), b.data.len());
    let n = a.len() as f64;
    let mut acc = 0.0;
    for (x, y) in a.data.iter().zip(&b.data) {
        acc += x * y;
    }
    acc / n
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Fourier coefficients of a vector-valued grid function (FFT bin layout).
#[derive(Debug, Clone)]
pub struct Coeffs {
    dim: usize,
    n: usize,
    per_coord: Vec<Vec<Complex64>>,
}

impl Coeffs {
    pub fn zeros(dim: usize, n: usize) -> Self {
        Coeffs { dim, n, per_coord: vec![vec![Complex64::new(0.0, 0.0); n]; dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Coefficient of signed mode k for coordinate c; zero when |k| too large.
    pub fn mode(&self, c: usize, k: i64) -> Complex64 {
        let n = self.n as i64;
        if k.abs() > n / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let i = k.rem_euclid(n) as usize;
        self.per_coord[c][i]
    }

    pub fn set_mode(&mut self, c: usize, k: i64, z: Complex64) {
        let n = self.n as i64;
        let i = k.rem_euclid(n) as usize;
        self.per_coord[c][i] = z;
    }

    pub fn bin(&self, c: usize, i: usize) -> Complex64 {
        self.per_coord[c][i]
    }

    pub fn bin_mut(&mut self, c: usize, i: usize) -> &mut Complex64 {
        &mut self.per_coord[c][i]
    }

    /// Sum over coordinates of |coefficient|^2 at signed mode k.
    pub fn mode_power(&self, k: i64) -> f64 {
        (0..self.dim).map(|c| self.mode(c, k).norm_sqr()).sum()
    }

    pub fn samples(&self) -> Samples {
        let fft = plan(self.n, false);
        let mut data = vec![0.0; self.n * self.dim];
        for c in 0..self.dim {
            let mut buf = self.per_coord[c].clone();
            fft.process(&mut buf);
            for j in 0..self.n {
                data[j * self.dim + c] = buf[j].re;
            }
        }
        Samples { dim: self.dim, data }
    }

    /// Multiply every mode by `f(k)`; the Nyquist bin is zeroed.
    pub fn apply_multiplier(&self, f: impl Fn(i64) -> Complex64) -> Coeffs {
        let mut out = self.clone();
        for c in 0..self.dim {
            for i in 0..self.n {
                let k = wavenumber(i, self.n);
                if self.n % 2 == 0 && i == self.n / 2 {
                    out.per_coord[c][i] = Complex64::new(0.0, 0.0);
                } else {
                    out.per_coord[c][i] = self.per_coord[c][i] * f(k);
                }
            }
        }
        out
    }

    /// Coefficients of the derivative: multiply mode k by 2*pi*i*k.
    pub fn derivative(&self) -> Coeffs {
        self.apply_multiplier(|k| Complex64::new(0.0, 2.0 * PI * k as f64))
    }

    /// Samples of f(u + delta) on the grid. Exact for band-limited f.
    pub fn shifted_samples(&self, delta: f64) -> Samples {
        let n = self.n;
        let fft = plan(n, false);
        let mut data = vec![0.0; n * self.dim];
        for c in 0..self.dim {
            let mut buf = self.per_coord[c].clone();
            for (i, z) in buf.iter_mut().enumerate() {
                let k = wavenumber(i, n) as f64;
                if n % 2 == 0 && i == n / 2 {
                    // Nyquist: real cosine convention keeps samples real.
                    *z *= (2.0 * PI * k * delta).cos();
                } else {
                    *z *= Complex64::from_polar(1.0, 2.0 * PI * k * delta);
                }
            }
            fft.process(&mut buf);
            for j in 0..n {
                data[j * self.dim + c] = buf[j].re;
            }
        }
        Samples { dim: self.dim, data }
    }

    /// Evaluate the trigonometric interpolant at arbitrary parameters.
    pub fn eval_points(&self, us: &[f64]) -> Samples {
        let n = self.n;
        let mut data = vec![0.0; us.len() * self.dim];
        for (jq, &u) in us.iter().enumerate() {
            for c in 0..self.dim {
                let mut acc = 0.0;
                for i in 0..n {
                    let k = wavenumber(i, n) as f64;
                    let z = self.per_coord[c][i];
                    let ph = 2.0 * PI * k * u;
                    if n % 2 == 0 && i == n / 2 {
                        acc += z.re * ph.cos();
                    } else {
                        acc += z.re * ph.cos() - z.im * ph.sin();
                    }
                }
                data[jq * self.dim + c] = acc;
            }
        }
        Samples { dim: self.dim, data }
    }

    /// Truncate to modes |k| <= k_max (zero the rest; Nyquist cleared).
    pub fn truncated(&self, k_max: usize) -> Coeffs {
        self.apply_multiplier(|k| {
            if k.unsigned_abs() as usize <= k_max {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }
}

/// Antiderivative of a scalar grid function f, split as
/// F(u) = mean * u + P(u) with P periodic and P(0) = 0 dropped
/// (we keep P itself; callers use differences so the constant cancels).
#[derive(Debug, Clone)]
pub struct Antiderivative {
    pub mean: f64,
    /// Periodic part sampled on the grid.
    pub periodic: Vec<f64>,
    /// Coefficients of the periodic part (dim 1), for shifted evaluation.
    pub periodic_coeffs: Coeffs,
}

impl Antiderivative {
    pub fn of_scalar(f: &Samples) -> Antiderivative {
        assert_eq!(f.dim(), 1);
        let n = f.len();
        let c = f.coeffs();
        let mean = c.bin(0, 0).re;
        let mut pc = Coeffs::zeros(1, n);
        for i in 1..n {
            let k = wavenumber(i, n) as f64;
            if n % 2 == 0 && i == n / 2 {
                continue;
            }
            let z = c.bin(0, i) / Complex64::new(0.0, 2.0 * PI * k);
            pc.set_mode(0, wavenumber(i, n), z);
        }
        let periodic: Vec<f64> = pc.samples().data().to_vec();
        Antiderivative { mean, periodic, periodic_coeffs: pc }
    }

    /// F(u_j + delta) - F(u_j) for all grid points j, delta arbitrary.
    pub fn shifted_differences(&self, delta: f64) -> Vec<f64> {
        let shifted = self.periodic_coeffs.shifted_samples(delta);
        self.periodic
            .iter()
            .zip(shifted.data())
            .map(|(p, ps)| self.mean * delta + (ps - p))
            .collect()
    }

    /// F(u_j + w) - F(u_j) along the parameter path for the signed grid
    /// offset w = i/N (i <= N/2) or w = i/N - 1 (i > N/2). Since u_j + w
    /// lands back on the grid, only the linear part sees the offset.
    pub fn grid_differences(&self, i: usize) -> Vec<f64> {
        let n = self.periodic.len();
        let w = if i > n / 2 {
            i as f64 / n as f64 - 1.0
        } else {
            i as f64 / n as f64
        };
        let mut res = Vec::with_capacity(n);
        for j in 0..n {
            let js = (j + i) % n;
            res.push(self.mean * w + self.periodic[js] - self.periodic[j]);
        }
        res
    }

    /// Evaluate F at arbitrary parameters (values of mean*u + P(u)).
    pub fn eval_points(&self, us: &[f64]) -> Vec<f64> {
        let p = self.periodic_coeffs.eval_points(us);
        us.iter()
            .zip(p.data())
            .map(|(u, pv)| self.mean * u + pv)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sample_fn(n: usize, f: impl Fn(f64) -> f64) -> Samples {
        let data = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        Samples::new(1, data).unwrap()
    }

    #[test]
    fn derivative_of_single_mode() {
        let n = 64;
        let f = sample_fn(n, |u| (2.0 * PI * 3.0 * u).sin());
        let d = f.coeffs().derivative().samples();
        for j in 0..n {
            let u = j as f64 / n as f64;
            let expect = 6.0 * PI * (6.0 * PI * u).cos();
            assert_abs_diff_eq!(d.point(j)[0], expect, epsilon = 1e-9);
        }
    }

    #[test]
    fn shift_matches_resampling() {
        let n = 64;
        let f = sample_fn(n, |u| (2.0 * PI * u).cos() + 0.3 * (2.0 * PI * 5.0 * u).sin());
        let sh = f.coeffs().shifted_samples(0.15);
        for j in 0..n {
            let u = j as f64 / n as f64 + 0.15;
            let expect = (2.0 * PI * u).cos() + 0.3 * (2.0 * PI * 5.0 * u).sin();
            assert_abs_diff_eq!(sh.point(j)[0], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn antiderivative_differences() {
        let n = 128;
        let f = sample_fn(n, |u| 2.0 + (2.0 * PI * u).cos());
        let anti = Antiderivative::of_scalar(&f);
        assert_abs_diff_eq!(anti.mean, 2.0, epsilon = 1e-13);
        // F(u) = 2u + sin(2 pi u)/(2 pi)
        let d = anti.shifted_differences(0.2);
        for j in 0..n {
            let u = j as f64 / n as f64;
            let expect = 2.0 * 0.2 + ((2.0 * PI * (u + 0.2)).sin() - (2.0 * PI * u).sin()) / (2.0 * PI);
            assert_abs_diff_eq!(d[j], expect, epsilon = 1e-12);
        }
        let g = anti.grid_differences(n - n / 4); // w = -1/4
        for j in 0..n {
            let u = j as f64 / n as f64;
            let expect = -2.0 * 0.25 + ((2.0 * PI * (u - 0.25)).sin() - (2.0 * PI * u).sin()) / (2.0 * PI);
            assert_abs_diff_eq!(g[j], expect, epsilon = 1e-12);
        }
    }

    #[test]
    fn roundtrip_and_eval() {
        let n = 32;
        let f = sample_fn(n, |u| (2.0 * PI * 2.0 * u).cos() - 0.7);
        let c = f.coeffs();
        let back = c.samples();
        for j in 0..n {
            assert_abs_diff_eq!(back.point(j)[0], f.point(j)[0], epsilon = 1e-13);
        }
        let at = c.eval_points(&[0.123]);
        assert_abs_diff_eq!(at.point(0)[0], (2.0 * PI * 2.0 * 0.123).cos() - 0.7, epsilon = 1e-12);
    }
}
