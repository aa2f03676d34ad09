use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::poisson::poisson_count;
use super::SeedSpec;
use crate::error::{Error, Result};
use crate::patterns::{SpatialPattern, Window};
use crate::SpatialFn;

type CovarianceFn = Arc<dyn Fn(&[f64], &[f64]) -> f64 + Send + Sync>;

/// Covariance function of the latent Gaussian field.
#[derive(Clone)]
pub enum Covariance {
    Zero,
    /// `variance · exp(−‖s−t‖² / scale²)`
    SquaredExponential { variance: f64, scale: f64 },
    /// `variance · exp(−‖s−t‖ / scale)`
    Exponential { variance: f64, scale: f64 },
    Custom { name: String, func: CovarianceFn },
}

impl fmt::Debug for Covariance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.cache_key())
    }
}

impl Covariance {
    pub fn value(&self, s: &[f64], t: &[f64]) -> f64 {
        let sq: f64 = s.iter().zip(t).map(|(a, b)| (a - b) * (a - b)).sum();
        match self {
            Self::Zero => 0.0,
            Self::SquaredExponential { variance, scale } => variance * (-sq / (scale * scale)).exp(),
            Self::Exponential { variance, scale } => variance * (-sq.sqrt() / scale).exp(),
            Self::Custom { func, .. } => func(s, t),
        }
    }

    fn cache_key(&self) -> String {
        match self {
            Self::Zero => "zero".into(),
            Self::SquaredExponential { variance, scale } => {
                format!("sqexp:{:x}:{:x}", variance.to_bits(), scale.to_bits())
            }
            Self::Exponential { variance, scale } => format!("exp:{:x}:{:x}", variance.to_bits(), scale.to_bits()),
            Self::Custom { name, func } => format!("custom:{name}:{:p}", Arc::as_ptr(func)),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Self::SquaredExponential { variance, scale } | Self::Exponential { variance, scale } => {
                if !(*variance >= 0.0 && variance.is_finite() && *scale > 0.0 && scale.is_finite()) {
                    return Err(Error::InvalidModel(format!(
                        "covariance needs variance >= 0 and scale > 0, got {variance}, {scale}"
                    )));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Log-Gaussian Cox process `Λ(ds) = exp(μ(s) + Z(s)) ds` discretised on an
/// `m × m` grid of cell centres.
#[derive(Clone)]
pub struct LgcpConfig {
    pub mean: SpatialFn,
    pub covariance: Covariance,
    pub grid: usize,
}

impl LgcpConfig {
    pub fn new(mean: SpatialFn, covariance: Covariance, grid: usize) -> Self {
        Self { mean, covariance, grid }
    }

    /// `exp(μ(s) + C(s,s)/2)`.
    pub fn intensity(&self, s: &[f64]) -> f64 {
        ((self.mean)(s) + 0.5 * self.covariance.value(s, s)).exp()
    }
}

enum Factor {
    Zero,
    /// One lower-triangular factor per axis; the field covariance is their
    /// Kronecker product.
    Kronecker(Vec<DMatrix<f64>>),
    Dense(DMatrix<f64>),
}

static FACTORIZATIONS: AtomicUsize = AtomicUsize::new(0);

/// Number of covariance factorizations computed so far in this process.
pub fn factorization_count() -> usize {
    FACTORIZATIONS.load(Ordering::SeqCst)
}

fn cell_centres(window: &Window, axis: usize, m: usize) -> Vec<f64> {
    let lo = window.lower()[axis];
    let h = window.side(axis) / m as f64;
    (0..m).map(|i| lo + (i as f64 + 0.5) * h).collect()
}

fn cholesky_with_jitter(mut matrix: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = matrix.nrows();
    if let Some(c) = nalgebra::Cholesky::new(matrix.clone()) {
        return Ok(c.unpack());
    }
    let base = 1e-10 * matrix.trace() / n as f64;
    let mut jitter = base;
    let mut added = 0.0;
    for _ in 0..8 {
        for i in 0..n {
            matrix[(i, i)] += jitter - added;
        }
        added = jitter;
        if let Some(c) = nalgebra::Cholesky::new(matrix.clone()) {
            return Ok(c.unpack());
        }
        jitter *= 10.0;
    }
    Err(Error::Factorization { jitter: added })
}

fn factorize(covariance: &Covariance, window: &Window, m: usize) -> Result<Factor> {
    FACTORIZATIONS.fetch_add(1, Ordering::SeqCst);
    let d = window.dim();
    match covariance {
        Covariance::Zero => Ok(Factor::Zero),
        Covariance::SquaredExponential { variance, scale } => {
            if *variance == 0.0 {
                return Ok(Factor::Zero);
            }
            // exp(−‖h‖²/ℓ²) = Π_k exp(−h_k²/ℓ²); the variance goes on the first axis
            let mut factors = Vec::with_capacity(d);
            for axis in 0..d {
                let c = cell_centres(window, axis, m);
                let amp = if axis == 0 { *variance } else { 1.0 };
                let mat = DMatrix::from_fn(m, m, |i, j| {
                    let h = c[i] - c[j];
                    amp * (-h * h / (scale * scale)).exp()
                });
                factors.push(cholesky_with_jitter(mat)?);
            }
            Ok(Factor::Kronecker(factors))
        }
        _ => {
            let centres: Vec<Vec<f64>> = (0..d).map(|k| cell_centres(window, k, m)).collect();
            let n = m.pow(d as u32);
            let points: Vec<Vec<f64>> = (0..n).map(|flat| centre_of(flat, &centres, m)).collect();
            let mat = DMatrix::from_fn(n, n, |i, j| covariance.value(&points[i], &points[j]));
            Ok(Factor::Dense(cholesky_with_jitter(mat)?))
        }
    }
}

fn centre_of(flat: usize, centres: &[Vec<f64>], m: usize) -> Vec<f64> {
    let d = centres.len();
    let mut p = vec![0.0; d];
    let mut rem = flat;
    for k in (0..d).rev() {
        p[k] = centres[k][rem % m];
        rem /= m;
    }
    p
}

fn cached_factor(config: &LgcpConfig, window: &Window) -> Result<Arc<Factor>> {
    static CACHE: OnceLock<Mutex<HashMap<String, Arc<Factor>>>> = OnceLock::new();
    let key = format!(
        "{}|{}|{:?}|{:?}",
        config.covariance.cache_key(),
        config.grid,
        window.lower(),
        window.upper()
    );
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    // holding the lock while factorizing keeps concurrent first calls from
    // duplicating the work
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    if let Some(f) = guard.get(&key) {
        return Ok(f.clone());
    }
    let f = Arc::new(factorize(&config.covariance, window, config.grid)?);
    guard.insert(key, f.clone());
    Ok(f)
}

fn apply_lower(l: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    let m = v.len();
    for i in 0..m {
        let mut s = 0.0;
        for j in 0..=i {
            s += l[(i, j)] * v[j];
        }
        out[i] = s;
    }
}

fn draw_fields<R: Rng + ?Sized>(factor: &Factor, d: usize, m: usize, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = m.pow(d as u32);
    match factor {
        Factor::Zero => vec![vec![0.0; n]; count],
        Factor::Kronecker(factors) => (0..count)
            .map(|_| {
                let mut z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                apply_kronecker(factors, d, m, &mut z);
                z
            })
            .collect(),
        Factor::Dense(l) => {
            // one matrix product per batch reads the factor once
            let e: Vec<f64> = (0..n * count).map(|_| rng.sample(StandardNormal)).collect();
            let z = l * DMatrix::from_vec(n, count, e);
            z.column_iter().map(|c| c.as_slice().to_vec()).collect()
        }
    }
}

fn apply_kronecker(factors: &[DMatrix<f64>], d: usize, m: usize, z: &mut [f64]) {
    let n = z.len();
    let mut fiber = vec![0.0; m];
    let mut mapped = vec![0.0; m];
    for (axis, l) in factors.iter().enumerate() {
        let stride = m.pow((d - 1 - axis) as u32);
        let outer = n / (stride * m);
        for o in 0..outer {
            for inner in 0..stride {
                let base = o * m * stride + inner;
                for i in 0..m {
                    fiber[i] = z[base + i * stride];
                }
                apply_lower(l, &fiber, &mut mapped);
                for i in 0..m {
                    z[base + i * stride] = mapped[i];
                }
            }
        }
    }
}

pub fn sample_lgcp(config: &LgcpConfig, window: &Window, seed: SeedSpec) -> Result<SpatialPattern> {
    sample_lgcp_with(config, window, &mut seed.rng())
}

pub fn sample_lgcp_with<R: Rng + ?Sized>(config: &LgcpConfig, window: &Window, rng: &mut R) -> Result<SpatialPattern> {
    Ok(sample_lgcp_batch_with(config, window, 1, rng)?.pop().expect("one pattern"))
}

/// `count` independent patterns. All Gaussian fields are drawn first, then
/// the points of each pattern in order; `count = 1` is `sample_lgcp_with`.
pub fn sample_lgcp_batch_with<R: Rng + ?Sized>(
    config: &LgcpConfig,
    window: &Window,
    count: usize,
    rng: &mut R,
) -> Result<Vec<SpatialPattern>> {
    if config.grid == 0 {
        return Err(Error::InvalidModel("LGCP grid resolution must be positive".into()));
    }
    config.covariance.validate()?;
    let m = config.grid;
    let d = window.dim();
    let factor = cached_factor(config, window)?;
    let fields = draw_fields(&factor, d, m, count, rng);
    let centres: Vec<Vec<f64>> = (0..d).map(|k| cell_centres(window, k, m)).collect();
    let mean: Vec<f64> = (0..m.pow(d as u32)).map(|flat| (config.mean)(&centre_of(flat, &centres, m))).collect();
    fields
        .iter()
        .map(|field| points_from_field(field, &mean, &centres, window, rng))
        .collect()
}

fn points_from_field<R: Rng + ?Sized>(
    field: &[f64],
    mean: &[f64],
    centres: &[Vec<f64>],
    window: &Window,
    rng: &mut R,
) -> Result<SpatialPattern> {
    let d = window.dim();
    let m = centres[0].len();
    let h: Vec<f64> = (0..d).map(|k| window.side(k) / m as f64).collect();
    let cell_volume: f64 = h.iter().product();
    let mut coords = Vec::new();
    for (flat, (z, mu)) in field.iter().zip(mean).enumerate() {
        let rate = (mu + z).exp();
        if !rate.is_finite() {
            return Err(Error::Domain(format!("LGCP intensity overflow at {:?}", centre_of(flat, centres, m))));
        }
        let k = poisson_count(cell_volume * rate, rng);
        if k == 0 {
            continue;
        }
        let c = centre_of(flat, centres, m);
        for _ in 0..k {
            for axis in 0..d {
                let lo = c[axis] - 0.5 * h[axis];
                // clamp guards the closed upper edge against rounding
                let x = (lo + h[axis] * rng.gen::<f64>()).min(window.upper()[axis]);
                coords.push(x);
            }
        }
    }
    SpatialPattern::new(coords, window.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
        let (ra, ca) = a.shape();
        let (rb, cb) = b.shape();
        DMatrix::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
    }

    #[test]
    fn kronecker_sampling_matches_dense_product() {
        let m = 5;
        let mut rng = SeedSpec::new(1, 0).rng();
        let l1 = DMatrix::from_fn(m, m, |i, j| if j <= i { rng.gen::<f64>() } else { 0.0 });
        let l2 = DMatrix::from_fn(m, m, |i, j| if j <= i { rng.gen::<f64>() } else { 0.0 });
        let factor = Factor::Kronecker(vec![l1.clone(), l2.clone()]);
        let z = draw_fields(&factor, 2, m, 1, &mut SeedSpec::new(2, 0).rng()).remove(0);
        let mut rng = SeedSpec::new(2, 0).rng();
        let e = DVector::from_fn(m * m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let dense = kron(&l1, &l2) * e;
        for (a, b) in z.iter().zip(dense.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dense_batch_matches_column_by_column() {
        let n = 6;
        let mut rng = SeedSpec::new(3, 0).rng();
        let l = DMatrix::from_fn(n, n, |i, j| if j <= i { rng.gen::<f64>() } else { 0.0 });
        let fields = draw_fields(&Factor::Dense(l.clone()), 1, n, 3, &mut SeedSpec::new(5, 1).rng());
        let mut rng = SeedSpec::new(5, 1).rng();
        for field in &fields {
            let e = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
            let expected = &l * e;
            for (a, b) in field.iter().zip(expected.iter()) {
                assert!((a - b).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn separable_factor_reproduces_covariance() {
        let w = Window::unit_square();
        let cov = Covariance::SquaredExponential { variance: 0.25, scale: 0.3 };
        let m = 6;
        let Factor::Kronecker(f) = factorize(&cov, &w, m).unwrap() else { panic!() };
        let l = kron(&f[0], &f[1]);
        let c = &l * l.transpose();
        let centres: Vec<Vec<f64>> = (0..2).map(|k| cell_centres(&w, k, m)).collect();
        for i in 0..m * m {
            for j in 0..m * m {
                let exact = cov.value(&centre_of(i, &centres, m), &centre_of(j, &centres, m));
                assert!((c[(i, j)] - exact).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn zero_covariance_is_poisson_exp_mean() {
        let cfg = LgcpConfig::new(Arc::new(|_| 30f64.ln()), Covariance::Zero, 8);
        let w = Window::unit_square();
        let mut rng = SeedSpec::new(4, 0).rng();
        let reps = 4000;
        let total: usize = (0..reps).map(|_| sample_lgcp_with(&cfg, &w, &mut rng).unwrap().len()).sum();
        let mean = total as f64 / reps as f64;
        assert!((mean - 30.0).abs() < 4.0 * (30.0f64 / reps as f64).sqrt());
    }

    #[test]
    fn dense_path_for_exponential_covariance() {
        let cfg = LgcpConfig::new(Arc::new(|_| 3.0), Covariance::Exponential { variance: 0.2, scale: 0.2 }, 6);
        let w = Window::unit_square();
        let a = sample_lgcp(&cfg, &w, SeedSpec::new(8, 1)).unwrap();
        let b = sample_lgcp(&cfg, &w, SeedSpec::new(8, 1)).unwrap();
        assert_eq!(a.coords(), b.coords());
    }

    #[test]
    fn jitter_rescues_singular_matrix() {
        let ones = DMatrix::from_element(4, 4, 1.0);
        let l = cholesky_with_jitter(ones).unwrap();
        let back = &l * l.transpose();
        assert!((back[(0, 1)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn indefinite_matrix_reports_jitter() {
        let mut m = DMatrix::identity(3, 3);
        m[(2, 2)] = -1.0;
        match cholesky_with_jitter(m) {
            Err(Error::Factorization { jitter }) => assert!(jitter > 0.0),
            other => panic!("unexpected {other:?}"),
        }
    }
}
