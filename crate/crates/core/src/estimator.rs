//! The correlated sample covariance `Σ̂ = (1/m) Y Yᵀ = (1/m) X B Xᵀ` and the
//! error metrics reported by the experiments.

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix, SpdMatrix};
use crate::sampling::SampleBatch;

#[derive(Debug, Clone, PartialEq)]
pub struct CovEstimate {
    pub n: usize,
    pub m: usize,
    /// Exactly symmetric.
    pub sigma_hat: DenseMatrix,
}

pub fn sample_covariance(batch: &SampleBatch) -> CovEstimate {
    let m = batch.y.cols();
    let sigma_hat = batch.y.gram().scale(1.0 / m as f64);
    CovEstimate { n: batch.y.rows(), m, sigma_hat }
}

/// `(1/m) X B Xᵀ` for an arbitrary symmetric `b`, symmetrized after the
/// product.
pub fn compound_wishart(x: &DenseMatrix, b: &DenseMatrix) -> Result<CovEstimate> {
    if !b.is_square() || b.rows() != x.cols() {
        return Err(Error::DimensionMismatch(format!(
            "shape matrix is {}x{} but samples have {} columns",
            b.rows(),
            b.cols(),
            x.cols()
        )));
    }
    let m = x.cols();
    let xb = x.matmul(b)?;
    let w = xb.matmul(&x.transpose())?.scale(1.0 / m as f64).symmetrized()?;
    Ok(CovEstimate { n: x.rows(), m, sigma_hat: w })
}

/// `‖Σ̂ - Σ‖`.
pub fn spectral_error(est: &CovEstimate, sigma: &SpdMatrix) -> Result<f64> {
    let diff = difference(est, sigma)?;
    linalg::spectral_norm(&diff, linalg::DEFAULT_TOL, linalg::DEFAULT_MAX_ITER)
}

/// `‖Σ̂ - Σ‖_F / ‖Σ‖_F`.
pub fn relative_frobenius_error(est: &CovEstimate, sigma: &SpdMatrix) -> Result<f64> {
    let diff = difference(est, sigma)?;
    Ok(linalg::frobenius_norm(&diff) / linalg::frobenius_norm(sigma.matrix()))
}

fn difference(est: &CovEstimate, sigma: &SpdMatrix) -> Result<DenseMatrix> {
    if est.n != sigma.dim() {
        return Err(Error::DimensionMismatch(format!(
            "estimate is {0}x{0} but covariance is {1}x{1}",
            est.n,
            sigma.dim()
        )));
    }
    est.sigma_hat.sub(sigma.matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{correlate, sample_x, Prng};
    use crate::shape::ShapeModel;

    fn batch_from_y(y: DenseMatrix) -> SampleBatch {
        SampleBatch { n: y.rows(), m: y.cols(), x: y.clone(), y }
    }

    fn est(m: DenseMatrix) -> CovEstimate {
        CovEstimate { n: m.rows(), m: 1, sigma_hat: m }
    }

    #[test]
    fn sample_covariance_examples() {
        let e = sample_covariance(&batch_from_y(DenseMatrix::from_rows(&[[1.0, 3.0]]).unwrap()));
        assert_eq!(e.sigma_hat.get(0, 0), 5.0);
        let e = sample_covariance(&batch_from_y(DenseMatrix::zeros(3, 4)));
        assert_eq!(e.sigma_hat, DenseMatrix::zeros(3, 3));
        let e = sample_covariance(&batch_from_y(DenseMatrix::identity(2)));
        assert_eq!(e.sigma_hat, DenseMatrix::identity(2).scale(0.5));
        assert!(e.sigma_hat.is_symmetric());
    }

    #[test]
    fn compound_wishart_examples() {
        let x = DenseMatrix::from_rows(&[[1.0, 2.0], [0.5, -1.0]]).unwrap();
        let w = compound_wishart(&x, &DenseMatrix::identity(2)).unwrap();
        assert_eq!(w.sigma_hat, x.gram().scale(0.5));

        let x = DenseMatrix::from_rows(&[[1.0, 2.0]]).unwrap();
        let w = compound_wishart(&x, &DenseMatrix::filled(2, 2, 1.0)).unwrap();
        assert_eq!(w.sigma_hat.get(0, 0), 4.5);

        let x = DenseMatrix::from_rows(&[[1.0, 5.0]]).unwrap();
        let w = compound_wishart(&x, &DenseMatrix::diag(&[2.0, 0.0])).unwrap();
        assert_eq!(w.sigma_hat.get(0, 0), 1.0);

        assert!(matches!(
            compound_wishart(&x, &DenseMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn error_metric_examples() {
        let sigma = SpdMatrix::new(DenseMatrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap()).unwrap();
        assert_eq!(spectral_error(&est(sigma.matrix().clone()), &sigma).unwrap(), 0.0);
        assert_eq!(relative_frobenius_error(&est(sigma.matrix().clone()), &sigma).unwrap(), 0.0);
        let r = relative_frobenius_error(&est(sigma.matrix().scale(1.2)), &sigma).unwrap();
        assert!((r - 0.2).abs() < 1e-15);

        let i2 = SpdMatrix::identity(2);
        let s = spectral_error(&est(DenseMatrix::identity(2).scale(2.0)), &i2).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
        let s = spectral_error(&est(DenseMatrix::diag(&[1.0, 4.0])), &i2).unwrap();
        assert!((s - 3.0).abs() < 1e-12);
        let r = relative_frobenius_error(&est(DenseMatrix::diag(&[2.0, 1.0])), &i2).unwrap();
        assert!((r - 0.5f64.sqrt()).abs() < 1e-15);

        assert!(matches!(
            spectral_error(&est(DenseMatrix::identity(3)), &i2),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn compound_wishart_agrees_with_correlated_batch() {
        let mut rng = Prng::new(8);
        for n in [1usize, 4, 10] {
            for m in [1usize, 6, 50] {
                let sigma = SpdMatrix::identity(n);
                for model in [
                    ShapeModel::identity(m).unwrap(),
                    ShapeModel::toeplitz(0.7, m).unwrap(),
                    ShapeModel::all_ones(m).unwrap(),
                    ShapeModel::random_diagonal(0.2, 1.0, 4, m).unwrap(),
                ] {
                    let x = sample_x(&mut rng, n, m, &sigma).unwrap();
                    let w = compound_wishart(&x, &model.materialize_b()).unwrap();
                    let s = sample_covariance(&correlate(x, &model).unwrap());
                    let scale = s.sigma_hat.as_slice().iter().fold(1.0f64, |a, v| a.max(v.abs()));
                    let diff = w.sigma_hat.max_abs_diff(&s.sigma_hat).unwrap();
                    assert!(diff <= 1e-12 * scale, "{:?} n={n} m={m}: {diff:e}", model.kind());
                }
            }
        }
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = Prng::new(12);
        let x = sample_x(&mut rng, 3, 8, &SpdMatrix::identity(3)).unwrap();
        let b = ShapeModel::toeplitz(0.3, 8).unwrap().materialize_b();
        let base = compound_wishart(&x, &b).unwrap();
        // Powers of two keep the scaling exact in floating point.
        let scaled = compound_wishart(&x.scale(4.0), &b).unwrap();
        assert_eq!(scaled.sigma_hat, base.sigma_hat.scale(16.0));
    }
}
