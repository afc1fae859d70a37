//! Lie algebra charts and sampled estimates of the local BCH constants.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::linalg::{expm, logm};
use super::LieError;

/// Algebra elements are stored as matrices.
pub type Element = DMatrix<f64>;

/// JSON description of a chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartSpec {
    #[serde(default)]
    pub name: Option<String>,
    /// Matrix size `m` (basis matrices are `m × m`).
    pub size: usize,
    /// Basis matrices, each row-major of length `m²`.
    pub basis: Vec<Vec<f64>>,
    #[serde(default)]
    pub inner_product: InnerProduct,
    #[serde(default = "default_safety")]
    pub safety: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sampling: SamplingSpec,
}

fn default_safety() -> f64 {
    1.25
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerProduct {
    /// `<A, B> = tr(A^T B)`.
    #[default]
    Frobenius,
}

/// How the constants are sampled.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingSpec {
    /// Starting radius for the sampled ball; halved on domain failures.
    pub radius: f64,
    /// Random pairs drawn uniformly from the ball.
    pub pairs: usize,
    /// Halton points taken before the random pairs.
    pub grid: usize,
    /// Number of times the radius may be halved.
    pub max_shrink: u32,
}

impl Default for SamplingSpec {
    fn default() -> Self {
        SamplingSpec { radius: 0.5, pairs: 100_000, grid: 4096, max_shrink: 20 }
    }
}

impl ChartSpec {
    fn builtin(name: &str, size: usize, basis: Vec<Vec<f64>>) -> Self {
        ChartSpec {
            name: Some(name.into()),
            size,
            basis,
            inner_product: InnerProduct::Frobenius,
            safety: default_safety(),
            seed: 0,
            sampling: SamplingSpec::default(),
        }
    }

    /// Skew-symmetric 3 × 3 matrices with the standard generators.
    pub fn so3() -> Self {
        Self::builtin(
            "so3",
            3,
            vec![
                vec![0., 0., 0., 0., 0., -1., 0., 1., 0.],
                vec![0., 0., 1., 0., 0., 0., -1., 0., 0.],
                vec![0., -1., 0., 1., 0., 0., 0., 0., 0.],
            ],
        )
    }

    /// Trace-free 2 × 2 matrices, basis `H, E, F`.
    pub fn sl2() -> Self {
        Self::builtin(
            "sl2",
            2,
            vec![vec![1., 0., 0., -1.], vec![0., 1., 0., 0.], vec![0., 0., 1., 0.]],
        )
    }

    /// Diagonal `m × m` matrices (an abelian algebra).
    pub fn diagonal(m: usize) -> Self {
        let basis = (0..m)
            .map(|i| {
                let mut b = vec![0.0; m * m];
                b[i * m + i] = 1.0;
                b
            })
            .collect();
        Self::builtin(&format!("diag{m}"), m, basis)
    }

    /// `so3`, `sl2` or `diag<m>`.
    pub fn named(name: &str) -> Option<Self> {
        match name {
            "so3" => Some(Self::so3()),
            "sl2" => Some(Self::sl2()),
            _ => name.strip_prefix("diag").and_then(|m| m.parse().ok()).filter(|&m| m > 0).map(Self::diagonal),
        }
    }
}

/// A matrix Lie algebra with a Frobenius-orthonormal basis.
#[derive(Clone, Debug)]
pub struct LieChart {
    pub spec: ChartSpec,
    /// Frobenius-orthonormal basis spanning the same algebra as `spec.basis`.
    basis: Vec<Element>,
    size: usize,
}

impl LieChart {
    pub fn new(spec: ChartSpec) -> Result<Self, LieError> {
        let m = spec.size;
        if m == 0 || spec.basis.is_empty() {
            return Err(LieError::Chart("empty basis".into()));
        }
        if !(spec.safety >= 1.0) {
            return Err(LieError::Chart(format!("safety {} is below 1", spec.safety)));
        }
        let mut ortho: Vec<Element> = Vec::new();
        for (i, b) in spec.basis.iter().enumerate() {
            if b.len() != m * m {
                return Err(LieError::Chart(format!("basis matrix {i} has {} entries, expected {}", b.len(), m * m)));
            }
            let mut v = DMatrix::from_row_slice(m, m, b);
            let scale = v.norm();
            for e in &ortho {
                let c = v.dot(e);
                v -= e * c;
            }
            let n = v.norm();
            if n <= 1e-10 * scale.max(1.0) {
                return Err(LieError::Chart(format!("basis matrix {i} is linearly dependent on the previous ones")));
            }
            ortho.push(v / n);
        }
        Ok(LieChart { spec, basis: ortho, size: m })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn matrix_size(&self) -> usize {
        self.size
    }

    /// `Σ c_i e_i` for the orthonormal basis `e`.
    pub fn element(&self, coords: &[f64]) -> Element {
        let mut out = DMatrix::zeros(self.size, self.size);
        for (c, e) in coords.iter().zip(&self.basis) {
            out += e * *c;
        }
        out
    }

    pub fn coords(&self, x: &Element) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.basis.iter().map(|e| e.dot(x)))
    }

    pub fn norm(&self, x: &Element) -> f64 {
        x.norm()
    }

    pub fn exp(&self, x: &Element) -> DMatrix<f64> {
        expm(x)
    }

    pub fn log(&self, g: &DMatrix<f64>) -> Result<Element, LieError> {
        logm(g)
    }

    /// `x ∗ y = log(exp(x) exp(y))`.
    pub fn bch(&self, x: &Element, y: &Element) -> Result<Element, LieError> {
        logm(&(expm(x) * expm(y)))
    }

    /// `log` of the product `exp(x_1) ... exp(x_k)`.
    pub fn bch_all(&self, xs: &[&Element]) -> Result<Element, LieError> {
        let mut g = DMatrix::identity(self.size, self.size);
        for x in xs {
            g *= expm(x);
        }
        logm(&g)
    }

    /// Uniform point of the closed ball of radius `r`.
    pub fn sample_ball(&self, rng: &mut impl Rng, r: f64) -> Element {
        let d = self.dim();
        let u: f64 = rng.random();
        self.sample_sphere(rng, r * u.powf(1.0 / d as f64))
    }

    /// Uniform point of the sphere of radius `r`.
    pub fn sample_sphere(&self, rng: &mut impl Rng, r: f64) -> Element {
        loop {
            let v: Vec<f64> = (0..self.dim()).map(|_| rng.sample(StandardNormal)).collect();
            let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
            if n > 1e-12 {
                return self.element(&v.iter().map(|a| a * r / n).collect::<Vec<_>>());
            }
        }
    }
}

/// Local constants of the BCH product on a chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    /// `‖x∗y − (x+y)‖ <= C0 ‖x‖‖y‖` below `eps0`.
    pub c0: f64,
    /// Bounds both `‖x∗y∗(−x)∗(−y)‖` and `‖x∗y∗(−x) − y‖` by `C1 ‖x‖‖y‖` below `eps1`.
    pub c1: f64,
    pub eps0: f64,
    pub eps1: f64,
    /// `min(eps1, 1/(2 C1), 1/(17 C0))`.
    pub eps: f64,
    pub safety: f64,
    /// Largest sampled ratios before the safety factor.
    pub sampled_c0: f64,
    pub sampled_c1: f64,
    pub pairs: usize,
    /// Times the sampling radius was halved.
    pub shrinks: u32,
}

/// Degenerate constants (abelian directions) are raised to this floor.
pub const CONSTANT_FLOOR: f64 = 1e-9;

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [usize; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Pairs in the closed ball of radius `r`: Halton points in the cube `[-1,1]^(2d)`
/// that land in the product of unit balls, then uniform random pairs.
fn sample_pairs(chart: &LieChart, s: &SamplingSpec, seed: u64, r: f64) -> Vec<(Element, Element)> {
    let d = chart.dim();
    let mut out = Vec::with_capacity(s.grid + s.pairs);
    if 2 * d <= PRIMES.len() {
        for i in 1..=s.grid {
            let p: Vec<f64> = (0..2 * d).map(|k| 2.0 * halton(i, PRIMES[k]) - 1.0).collect();
            let (a, b) = p.split_at(d);
            let in_ball = |v: &[f64]| v.iter().map(|t| t * t).sum::<f64>() <= 1.0;
            if in_ball(a) && in_ball(b) {
                let scale = |v: &[f64]| v.iter().map(|t| t * r).collect::<Vec<_>>();
                out.push((chart.element(&scale(a)), chart.element(&scale(b))));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..s.pairs {
        out.push((chart.sample_ball(&mut rng, r), chart.sample_ball(&mut rng, r)));
    }
    out
}

/// Ratios `(C0, C1)` for one pair, or a domain error.
fn pair_ratios(x: &Element, y: &Element) -> Result<(f64, f64), LieError> {
    let nx = x.norm();
    let ny = y.norm();
    if nx * ny <= f64::MIN_POSITIVE {
        return Ok((0.0, 0.0));
    }
    let ex = expm(x);
    let ey = expm(y);
    let exi = expm(&-x);
    let eyi = expm(&-y);
    let prod = logm(&(&ex * &ey))?;
    let r0 = (prod - x - y).norm() / (nx * ny);
    let conj = logm(&(&ex * &ey * &exi))?;
    let comm = logm(&(&ex * &ey * &exi * &eyi))?;
    let r1 = comm.norm().max((conj - y).norm()) / (nx * ny);
    Ok((r0, r1))
}

/// Samples the BCH deviation ratios and derives `C0, C1, eps`.
///
/// Starts at `sampling.radius` and halves it whenever a sampled product
/// leaves the logarithm's domain; `eps0 = eps1` is the final radius.
pub fn estimate_constants(chart: &LieChart, sampling: &SamplingSpec, safety: f64, seed: u64) -> Result<Constants, LieError> {
    if !(safety >= 1.0) {
        return Err(LieError::Chart(format!("safety {safety} is below 1")));
    }
    let mut r = sampling.radius;
    for shrinks in 0..=sampling.max_shrink {
        let pairs = sample_pairs(chart, sampling, seed, r);
        let ratios: Result<Vec<(f64, f64)>, LieError> =
            pairs.par_iter().map(|(x, y)| pair_ratios(x, y)).collect();
        match ratios {
            Ok(ratios) => {
                let sampled_c0 = ratios.iter().map(|p| p.0).fold(0.0, f64::max);
                let sampled_c1 = ratios.iter().map(|p| p.1).fold(0.0, f64::max);
                let c0 = (safety * sampled_c0).max(CONSTANT_FLOOR);
                let c1 = (safety * sampled_c1).max(CONSTANT_FLOOR);
                let eps = r.min(1.0 / (2.0 * c1)).min(1.0 / (17.0 * c0));
                return Ok(Constants {
                    c0,
                    c1,
                    eps0: r,
                    eps1: r,
                    eps,
                    safety,
                    sampled_c0,
                    sampled_c1,
                    pairs: pairs.len(),
                    shrinks,
                });
            }
            Err(_) => r /= 2.0,
        }
    }
    Err(LieError::Sampling(format!(
        "logarithm domain still fails after {} halvings of the radius",
        sampling.max_shrink
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SamplingSpec {
        SamplingSpec { radius: 0.2, pairs: 2000, grid: 500, max_shrink: 10 }
    }

    /// Rotation matrix of the axis-angle vector `w` by Rodrigues' formula.
    fn rodrigues(w: [f64; 3]) -> DMatrix<f64> {
        let t = (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt();
        let k = DMatrix::from_row_slice(3, 3, &[0., -w[2], w[1], w[2], 0., -w[0], -w[1], w[0], 0.]) / t;
        DMatrix::identity(3, 3) + &k * t.sin() + &k * &k * (1.0 - t.cos())
    }

    /// Axis-angle vector of a rotation matrix.
    fn rotation_log(r: &DMatrix<f64>) -> [f64; 3] {
        let t = ((r.trace() - 1.0) / 2.0).clamp(-1.0, 1.0).acos();
        let s = t / (2.0 * t.sin());
        [s * (r[(2, 1)] - r[(1, 2)]), s * (r[(0, 2)] - r[(2, 0)]), s * (r[(1, 0)] - r[(0, 1)])]
    }

    #[test]
    fn bch_matches_rodrigues_oracle() {
        let spec = ChartSpec::so3();
        let chart = LieChart::new(spec.clone()).unwrap();
        let raw = |i: usize, t: f64| DMatrix::from_row_slice(3, 3, &spec.basis[i]) * t;
        let (x, y) = (raw(0, 0.1), raw(1, 0.1));
        let z = chart.bch(&x, &y).unwrap();
        let w = rotation_log(&(rodrigues([0.1, 0.0, 0.0]) * rodrigues([0.0, 0.1, 0.0])));
        let oracle = DMatrix::from_row_slice(3, 3, &[0., -w[2], w[1], w[2], 0., -w[0], -w[1], w[0], 0.]);
        assert!((&z - oracle).norm() <= 1e-9);
        assert!((expm(&z) - expm(&x) * expm(&y)).norm() <= 1e-10);
    }

    #[test]
    fn bch_identities() {
        let chart = LieChart::new(ChartSpec::sl2()).unwrap();
        let x = chart.element(&[0.1, -0.2, 0.05]);
        let zero = DMatrix::zeros(2, 2);
        assert!((chart.bch(&x, &zero).unwrap() - &x).norm() < 1e-13);
        let y = &x * 0.7;
        assert!((chart.bch(&x, &y).unwrap() - &x - &y).norm() < 1e-13);
    }

    #[test]
    fn orthonormalization_and_rejection() {
        let chart = LieChart::new(ChartSpec::so3()).unwrap();
        let x = chart.element(&[1.0, 2.0, 2.0]);
        assert!((chart.norm(&x) - 3.0).abs() < 1e-12);
        assert!((chart.coords(&x) - DVector::from_vec(vec![1.0, 2.0, 2.0])).norm() < 1e-12);
        let mut bad = ChartSpec::so3();
        bad.basis.push(bad.basis[0].iter().map(|v| v * 2.0).collect());
        assert!(matches!(LieChart::new(bad), Err(LieError::Chart(_))));
    }

    #[test]
    fn abelian_constants_hit_the_floor() {
        let chart = LieChart::new(ChartSpec::diagonal(2)).unwrap();
        let c = estimate_constants(&chart, &small(), 1.25, 1).unwrap();
        // Round-off only, well under the floor.
        assert!(c.sampled_c0 < 1e-10 && c.sampled_c1 < 1e-10, "{c:?}");
        assert_eq!(c.c0, CONSTANT_FLOOR);
        assert_eq!(c.eps, c.eps1);
    }

    #[test]
    fn so3_constants_scale_with_safety() {
        let chart = LieChart::new(ChartSpec::so3()).unwrap();
        let a = estimate_constants(&chart, &small(), 1.0, 3).unwrap();
        let b = estimate_constants(&chart, &small(), 1.5, 3).unwrap();
        assert!(b.c0 >= a.c0 && b.c1 >= a.c1 && b.eps <= a.eps);
        assert_eq!(a.sampled_c0, b.sampled_c0);
        println!("so3 sampled C0 = {}", a.sampled_c0);
    }
}
