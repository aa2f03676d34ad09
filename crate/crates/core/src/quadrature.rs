//! Numerical integration helpers: tensor-product Gauss-Legendre on boxes and
//! adaptive Simpson in one dimension.

use std::collections::HashMap;
use std::num::NonZeroUsize;
use std::sync::{Arc, Mutex, OnceLock};

use gauss_quad::legendre::GaussLegendre;

use crate::patterns::Window;

type Rule = Arc<Vec<(f64, f64)>>;

/// Gauss-Legendre nodes and weights on `[-1, 1]`, cached per degree.
pub fn gauss_legendre(degree: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry(degree)
        .or_insert_with(|| {
            let deg = NonZeroUsize::new(degree).expect("quadrature degree must be positive");
            Arc::new(GaussLegendre::new(deg).as_node_weight_pairs().to_vec())
        })
        .clone()
}

pub fn integrate_1d(a: f64, b: f64, degree: usize, f: impl Fn(f64) -> f64) -> f64 {
    let rule = gauss_legendre(degree);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * rule.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>()
}

/// Tensor-product Gauss-Legendre over an axis-aligned box.
pub fn integrate_box(window: &Window, degree: usize, f: impl Fn(&[f64]) -> f64) -> f64 {
    let rule = gauss_legendre(degree);
    let d = window.dim();
    let half: Vec<f64> = (0..d).map(|k| 0.5 * window.side(k)).collect();
    let mid: Vec<f64> = (0..d)
        .map(|k| 0.5 * (window.lower()[k] + window.upper()[k]))
        .collect();
    let jac: f64 = half.iter().product();
    let n = rule.len();
    let total = n.pow(d as u32);
    let mut p = vec![0.0; d];
    let mut sum = 0.0;
    for flat in 0..total {
        let mut rem = flat;
        let mut w = 1.0;
        for k in (0..d).rev() {
            let (x, wk) = rule[rem % n];
            rem /= n;
            p[k] = mid[k] + half[k] * x;
            w *= wk;
        }
        sum += w * f(&p);
    }
    jac * sum
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step(
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
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
