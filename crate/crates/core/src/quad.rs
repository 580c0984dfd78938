//! 1-D quadrature used by the Fourier-side machinery: adaptive Simpson
//! integration, Gauss-Legendre nodes on [0,1], and the mode integrals
//! c_k(s) and q_k(alpha).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Mutex;

/// Adaptive Simpson quadrature with absolute tolerance.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let fb = f(b);
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Gauss-Legendre nodes and weights transplanted to [0, 1].
pub fn gauss_legendre_unit(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess, Newton on P_n
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_and_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_and_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // map [-1,1] -> [0,1]
    for i in 0..n {
        nodes[i] = 0.5 * (nodes[i] + 1.0);
        weights[i] *= 0.5;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// c_k(s) = int_{-1/2}^{1/2} 4 sin^2(pi k w) / |w|^{1+2s} dw.
///
/// The seminorm identity |f|_{H^{s,2}}^2 = sum_k c_k(s) |f_hat(k)|^2 uses
/// exactly these weights.
pub fn c_k(k: i64, s: f64) -> f64 {
    let k = k.unsigned_abs() as f64;
    if k == 0.0 {
        return 0.0;
    }
    // analytic head on [0, a]: 4 sin^2(pi k w) ~ 4 (pi k w)^2 (1 - (pi k w)^2 / 3)
    let a = (1e-3f64).min(0.05 / k);
    let pk = PI * k;
    let head = 4.0 * pk * pk * a.powf(2.0 - 2.0 * s) / (2.0 - 2.0 * s)
        - (4.0 / 3.0) * pk.powi(4) * a.powf(4.0 - 2.0 * s) / (4.0 - 2.0 * s);
    let f = |w: f64| 4.0 * (pk * w).sin().powi(2) / w.powf(1.0 + 2.0 * s);
    // panels of about one oscillation keep the adaptive depth small
    let mut total = head;
    let mut x = a;
    let step = (0.5 / k).max(1e-3);
    while x < 0.5 - 1e-15 {
        let x2 = (x + step).min(0.5);
        total += adaptive_simpson(&f, x, x2, 1e-12);
        x = x2;
    }
    2.0 * total
}

/// q_k(alpha) from the 1-D reduction of Q on single Fourier modes:
/// Q(e_k, e_k) = q_k |k|^{alpha+1} with
/// q_k = 8 int_0^{k/2} (pi^2 - sin^2(pi t)/t^2) / t^alpha dt.
pub fn q_k(k: i64, alpha: f64) -> f64 {
    let k = k.unsigned_abs() as f64;
    assert!(k >= 1.0);
    // head on [0, a]: pi^2 t^2 - sin^2(pi t) = (pi t)^4/3 - 2 (pi t)^6/45 + ...
    let a = 0.05f64;
    let head = (PI.powi(4) / 3.0) * a.powf(3.0 - alpha) / (3.0 - alpha)
        - (2.0 * PI.powi(6) / 45.0) * a.powf(5.0 - alpha) / (5.0 - alpha);
    let f = |t: f64| (PI * PI - (PI * t).sin().powi(2) / (t * t)) / t.powf(alpha);
    let mut total = head;
    let mut x = a;
    while x < 0.5 * k - 1e-12 {
        let x2 = (x + 0.5).min(0.5 * k);
        total += adaptive_simpson(&f, x, x2, 1e-12);
        x = x2;
    }
    8.0 * total
}

/// Deterministic cache for the c_k weights, keyed by (k, s bit pattern).
#[derive(Debug, Default)]
pub struct CkCache {
    map: Mutex<BTreeMap<(i64, u64), f64>>,
}

impl CkCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, k: i64, s: f64) -> f64 {
        let key = (k.abs(), s.to_bits());
        {
            let map = self.map.lock().expect("c_k cache poisoned");
            if let Some(&v) = map.get(&key) {
                return v;
            }
        }
        let v = c_k(k, s);
        let mut map = self.map.lock().expect("c_k cache poisoned");
        *map.entry(key).or_insert(v)
    }
}
