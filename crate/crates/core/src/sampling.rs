//! Seedable Gaussian sample generation.
//!
//! [`Prng`] wraps ChaCha8 keyed by a 64-bit seed. ChaCha has a 64-bit stream
//! selector next to its block counter, so [`Prng::split`] hands every trial
//! its own stream of the same key: streams never overlap and any trial can
//! be replayed on its own. Standard normals come from the ziggurat sampler
//! in `rand_distr`; the golden-value test in this module pins the stream.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, SpdMatrix};
use crate::shape::ShapeModel;

#[derive(Debug, Clone)]
pub struct Prng {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl Prng {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::split(seed, 0)
    }

    /// Stream `stream` of the generator keyed by `master_seed`.
    pub fn split(master_seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream);
        Self { seed: master_seed, stream, inner }
    }

    /// Packs a (model, grid point, trial) triple into a stream index:
    /// 16 bits of model, 16 bits of grid point, 32 bits of trial.
    pub fn stream_id(model: usize, point: usize, trial: usize) -> u64 {
        assert!(model < 1 << 16 && point < 1 << 16 && (trial as u64) < 1 << 32, "stream index out of range");
        ((model as u64) << 48) | ((point as u64) << 32) | trial as u64
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }
}

/// Independent samples `X` (columns `xₖ ~ N(0, Σ)`) and their correlated
/// counterpart `Y = X Λ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub n: usize,
    pub m: usize,
    pub x: DenseMatrix,
    pub y: DenseMatrix,
}

/// Draws an `n × m` matrix whose columns are `L g` with `L` the Cholesky
/// factor of `sigma` and `g` standard normal. The underlying standard normal
/// matrix is filled row by row, `m` draws per row.
pub fn sample_x(rng: &mut Prng, n: usize, m: usize, sigma: &SpdMatrix) -> Result<DenseMatrix> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidInputs(format!("need n, m >= 1, got n={n}, m={m}")));
    }
    if sigma.dim() != n {
        return Err(Error::DimensionMismatch(format!("covariance is {0}x{0} but n = {n}", sigma.dim())));
    }
    let mut data = vec![0.0; n * m];
    let mut g = if sigma.is_identity() { Vec::new() } else { vec![0.0; n * m] };
    for (i, row) in data.chunks_exact_mut(m).enumerate() {
        draw_row(rng, sigma, &mut g, i, row);
    }
    Ok(DenseMatrix::from_raw(n, m, data))
}

/// Row `i` of `X = L G`. Draws row `i` of `G` into `g` (an `n × m` scratch
/// buffer holding the earlier rows, unused when `sigma` is the identity)
/// and writes `Σ_{k≤i} L_ik G_k` to `out`. Rows must be drawn in order.
pub(crate) fn draw_row(rng: &mut Prng, sigma: &SpdMatrix, g: &mut [f64], i: usize, out: &mut [f64]) {
    if sigma.is_identity() {
        out.iter_mut().for_each(|v| *v = rng.standard_normal());
        return;
    }
    let m = out.len();
    g[i * m..(i + 1) * m].iter_mut().for_each(|v| *v = rng.standard_normal());
    out.fill(0.0);
    let l = sigma.cholesky().row(i);
    for (k, gk) in g.chunks_exact(m).take(i + 1).enumerate() {
        for (o, v) in out.iter_mut().zip(gk) {
            *o += l[k] * v;
        }
    }
}

/// Forms `Y = X Λ` for the given model.
pub fn correlate(x: DenseMatrix, model: &ShapeModel) -> Result<SampleBatch> {
    let y = model.apply_lambda(&x)?;
    Ok(SampleBatch { n: x.rows(), m: x.cols(), x, y })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_stream() {
        let mut rng = Prng::new(42);
        let draws: Vec<f64> = (0..3).map(|_| rng.standard_normal()).collect();
        assert_eq!(draws, GOLDEN_SEED_42);
    }

    // First draws of stream 0 under seed 42; a change here means every stored result moves.
    const GOLDEN_SEED_42: [f64; 3] = [0.47798123835102174, 1.3340706102318078, -0.21086668327103028];

    #[test]
    fn same_seed_same_stream_and_splits_differ() {
        let a: Vec<f64> = {
            let mut r = Prng::split(9, 3);
            (0..50).map(|_| r.standard_normal()).collect()
        };
        let b: Vec<f64> = {
            let mut r = Prng::split(9, 3);
            (0..50).map(|_| r.standard_normal()).collect()
        };
        let c: Vec<f64> = {
            let mut r = Prng::split(9, 4);
            (0..50).map(|_| r.standard_normal()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn moments_of_a_million_draws() {
        let mut rng = Prng::new(2024);
        let n = 1_000_000;
        let draws: Vec<f64> = (0..n).map(|_| rng.standard_normal()).collect();
        let mean = draws.iter().sum::<f64>() / n as f64;
        let var = draws.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() <= 5e-3, "mean {mean}");
        assert!((var - 1.0).abs() <= 7e-3, "variance {var}");
    }

    fn empirical_cov(x: &DenseMatrix) -> DenseMatrix {
        x.gram().scale(1.0 / x.cols() as f64)
    }

    #[test]
    fn sample_x_identity_variance() {
        let mut rng = Prng::new(1);
        let x = sample_x(&mut rng, 3, 100_000, &SpdMatrix::identity(3)).unwrap();
        let c = empirical_cov(&x);
        for i in 0..3 {
            assert!((c.get(i, i) - 1.0).abs() <= 0.03, "{c:?}");
        }
    }

    #[test]
    fn sample_x_scaled_variance() {
        let mut rng = Prng::new(2);
        let sigma = SpdMatrix::new(DenseMatrix::from_rows(&[[4.0]]).unwrap()).unwrap();
        let x = sample_x(&mut rng, 1, 100_000, &sigma).unwrap();
        let v = empirical_cov(&x).get(0, 0);
        assert!((v / 4.0 - 1.0).abs() <= 0.03, "{v}");
    }

    #[test]
    fn sample_x_correlated_covariance() {
        let mut rng = Prng::new(3);
        let target = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]]).unwrap();
        let sigma = SpdMatrix::new(target.clone()).unwrap();
        let x = sample_x(&mut rng, 2, 100_000, &sigma).unwrap();
        let c = empirical_cov(&x);
        assert!(c.max_abs_diff(&target).unwrap() <= 0.05, "{c:?}");
    }

    #[test]
    fn sample_x_validates() {
        let mut rng = Prng::new(0);
        assert!(matches!(
            sample_x(&mut rng, 2, 3, &SpdMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
        assert!(sample_x(&mut rng, 0, 3, &SpdMatrix::identity(3)).is_err());
    }

    #[test]
    fn correlate_examples() {
        let x = DenseMatrix::from_rows(&[[0.3, -1.2, 2.0]]).unwrap();
        let batch = correlate(x.clone(), &ShapeModel::identity(3).unwrap()).unwrap();
        assert_eq!(batch.y, x);

        let x = DenseMatrix::from_rows(&[[1.0, 3.0]]).unwrap();
        let batch = correlate(x, &ShapeModel::all_ones(2).unwrap()).unwrap();
        let v = 4.0 / 2f64.sqrt();
        assert!((batch.y.get(0, 0) - v).abs() < 1e-15 && (batch.y.get(0, 1) - v).abs() < 1e-15);

        let x = DenseMatrix::from_rows(&[[1.0, 0.0]]).unwrap();
        let batch = correlate(x, &ShapeModel::toeplitz(0.5, 2).unwrap()).unwrap();
        assert_eq!(batch.y.row(0), &[1.0, 0.0]);
        let x = DenseMatrix::from_rows(&[[0.0, 1.0]]).unwrap();
        let batch = correlate(x, &ShapeModel::toeplitz(0.5, 2).unwrap()).unwrap();
        assert_eq!(batch.y.get(0, 0), 0.5);
        assert!((batch.y.get(0, 1) - 0.75f64.sqrt()).abs() < 1e-15);

        assert!(matches!(
            correlate(DenseMatrix::zeros(1, 3), &ShapeModel::identity(2).unwrap()),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn batches_are_deterministic() {
        let sigma = SpdMatrix::new(DenseMatrix::from_rows(&[[2.0, 0.3], [0.3, 1.0]]).unwrap()).unwrap();
        let model = ShapeModel::toeplitz(0.4, 7).unwrap();
        let make = || {
            let mut rng = Prng::split(17, 5);
            correlate(sample_x(&mut rng, 2, 7, &sigma).unwrap(), &model).unwrap()
        };
        assert_eq!(make(), make());
    }
}
