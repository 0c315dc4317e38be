//! Correlation models for the sample index.
//!
//! A model fixes the `m × m` mixing matrix `Λ` applied to independent
//! samples (`Y = X Λ`) and with it the shape matrix `B = Λ Λᵀ`:
//!
//! | kind              | `B`                         | `Λ`                                |
//! |-------------------|-----------------------------|------------------------------------|
//! | identity          | `I`                         | `I`                                |
//! | Toeplitz `T(θ)`   | `B[i][j] = θ^|i-j|`         | lower Cholesky factor of `T(θ)`    |
//! | all-ones          | every entry 1               | every entry `1/√m`                 |
//! | random diagonal   | `diag(ρᵢ²)`                 | `diag(ρᵢ)`, `ρᵢ ~ N(μ, σ²)` i.i.d. |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, DenseMatrix};
use crate::sampling::Prng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ShapeKind {
    Identity,
    Toeplitz { theta: f64 },
    AllOnes,
    RandomDiagonal { mu: f64, sigma: f64, seed: u64 },
}

/// A correlation model family without a sample count, as written on the
/// command line or in experiment configs: `identity`, `toeplitz:<θ>`,
/// `all_ones`, `random_diag:<μ>,<σ>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum ModelDescriptor {
    Identity,
    Toeplitz { theta: f64 },
    AllOnes,
    RandomDiagonal { mu: f64, sigma: f64 },
}

impl ModelDescriptor {
    /// Instantiates the family at sample count `m`. `seed` is only consumed
    /// by the random diagonal family.
    pub fn build(&self, m: usize, seed: u64) -> Result<ShapeModel> {
        let kind = match *self {
            ModelDescriptor::Identity => ShapeKind::Identity,
            ModelDescriptor::Toeplitz { theta } => ShapeKind::Toeplitz { theta },
            ModelDescriptor::AllOnes => ShapeKind::AllOnes,
            ModelDescriptor::RandomDiagonal { mu, sigma } => ShapeKind::RandomDiagonal { mu, sigma, seed },
        };
        ShapeModel::new(kind, m)
    }

    pub fn is_random(&self) -> bool {
        matches!(self, ModelDescriptor::RandomDiagonal { .. })
    }

    /// File-name friendly form of the descriptor.
    pub fn slug(&self) -> String {
        self.to_string().replace([':', ','], "_")
    }

    fn validate(self) -> Result<Self> {
        match self {
            ModelDescriptor::Toeplitz { theta } => check_theta(theta)?,
            ModelDescriptor::RandomDiagonal { mu, sigma } => check_mu_sigma(mu, sigma)?,
            _ => {}
        }
        Ok(self)
    }
}

impl fmt::Display for ModelDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelDescriptor::Identity => write!(f, "identity"),
            ModelDescriptor::Toeplitz { theta } => write!(f, "toeplitz:{theta}"),
            ModelDescriptor::AllOnes => write!(f, "all_ones"),
            ModelDescriptor::RandomDiagonal { mu, sigma } => write!(f, "random_diag:{mu},{sigma}"),
        }
    }
}

impl FromStr for ModelDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (name, args) = match s.split_once(':') {
            Some((name, args)) => (name.trim(), Some(args)),
            None => (s, None),
        };
        let number = |text: &str| -> Result<f64> {
            let text = text.trim();
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| Error::InvalidModel(format!("`{text}` is not a finite number in `{s}`")))
        };
        let desc = match (name, args) {
            ("identity", None) => ModelDescriptor::Identity,
            ("all_ones", None) => ModelDescriptor::AllOnes,
            ("toeplitz", Some(args)) => ModelDescriptor::Toeplitz { theta: number(args)? },
            ("random_diag", Some(args)) => {
                let (mu, sigma) = args
                    .split_once(',')
                    .ok_or_else(|| Error::InvalidModel(format!("`{s}`: expected random_diag:<mu>,<sigma>")))?;
                ModelDescriptor::RandomDiagonal { mu: number(mu)?, sigma: number(sigma)? }
            }
            _ => {
                return Err(Error::InvalidModel(format!(
                    "unknown model `{s}` (expected identity, toeplitz:<theta>, all_ones or random_diag:<mu>,<sigma>)"
                )))
            }
        };
        desc.validate()
    }
}

impl TryFrom<String> for ModelDescriptor {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        value.parse()
    }
}

impl From<ModelDescriptor> for String {
    fn from(value: ModelDescriptor) -> Self {
        value.to_string()
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidModel(format!("Toeplitz theta must lie strictly inside (0, 1), got {theta}")))
    }
}

fn check_mu_sigma(mu: f64, sigma: f64) -> Result<()> {
    if !mu.is_finite() || !sigma.is_finite() || sigma < 0.0 {
        return Err(Error::InvalidModel(format!(
            "random diagonal needs finite mu and sigma >= 0, got mu={mu}, sigma={sigma}"
        )));
    }
    Ok(())
}

/// Closed-form values for `tr(B)`, `‖B‖_F` and `‖B‖`. When `exact` is false
/// the Frobenius and spectral entries are upper bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalyticNorms {
    pub trace: f64,
    pub frobenius_upper: f64,
    pub spectral_upper: f64,
    pub exact: bool,
}

/// A correlation model instantiated at a fixed sample count.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeModel {
    kind: ShapeKind,
    m: usize,
    /// Diagonal of `Λ` for the random diagonal kind, drawn once at
    /// construction; empty otherwise.
    rho: Vec<f64>,
}

impl ShapeModel {
    pub fn new(kind: ShapeKind, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidModel("sample count m must be positive".into()));
        }
        let rho = match kind {
            ShapeKind::Toeplitz { theta } => {
                check_theta(theta)?;
                Vec::new()
            }
            ShapeKind::RandomDiagonal { mu, sigma, seed } => {
                check_mu_sigma(mu, sigma)?;
                let mut rng = Prng::new(seed);
                (0..m).map(|_| mu + sigma * rng.standard_normal()).collect()
            }
            ShapeKind::Identity | ShapeKind::AllOnes => Vec::new(),
        };
        Ok(Self { kind, m, rho })
    }

    pub fn identity(m: usize) -> Result<Self> {
        Self::new(ShapeKind::Identity, m)
    }

    pub fn toeplitz(theta: f64, m: usize) -> Result<Self> {
        Self::new(ShapeKind::Toeplitz { theta }, m)
    }

    pub fn all_ones(m: usize) -> Result<Self> {
        Self::new(ShapeKind::AllOnes, m)
    }

    pub fn random_diagonal(mu: f64, sigma: f64, seed: u64, m: usize) -> Result<Self> {
        Self::new(ShapeKind::RandomDiagonal { mu, sigma, seed }, m)
    }

    pub fn kind(&self) -> ShapeKind {
        self.kind
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn descriptor(&self) -> ModelDescriptor {
        match self.kind {
            ShapeKind::Identity => ModelDescriptor::Identity,
            ShapeKind::Toeplitz { theta } => ModelDescriptor::Toeplitz { theta },
            ShapeKind::AllOnes => ModelDescriptor::AllOnes,
            ShapeKind::RandomDiagonal { mu, sigma, .. } => ModelDescriptor::RandomDiagonal { mu, sigma },
        }
    }

    /// The diagonal `ρ` of a random diagonal model.
    pub fn rho(&self) -> Option<&[f64]> {
        match self.kind {
            ShapeKind::RandomDiagonal { .. } => Some(&self.rho),
            _ => None,
        }
    }

    pub fn materialize_lambda(&self) -> Result<DenseMatrix> {
        let m = self.m;
        Ok(match self.kind {
            ShapeKind::Identity => DenseMatrix::identity(m),
            ShapeKind::Toeplitz { .. } => linalg::cholesky(&self.materialize_b()).map_err(|e| {
                Error::InvalidModel(format!("internal error: Toeplitz Cholesky failed: {e}"))
            })?,
            ShapeKind::AllOnes => DenseMatrix::filled(m, m, 1.0 / (m as f64).sqrt()),
            ShapeKind::RandomDiagonal { .. } => DenseMatrix::diag(&self.rho),
        })
    }

    pub fn materialize_b(&self) -> DenseMatrix {
        let m = self.m;
        match self.kind {
            ShapeKind::Identity => DenseMatrix::identity(m),
            ShapeKind::Toeplitz { theta } => {
                let powers: Vec<f64> = (0..m as i32).map(|k| theta.powi(k)).collect();
                let mut b = DenseMatrix::zeros(m, m);
                for i in 0..m {
                    for j in 0..m {
                        b.set(i, j, powers[i.abs_diff(j)]);
                    }
                }
                b
            }
            ShapeKind::AllOnes => DenseMatrix::filled(m, m, 1.0),
            ShapeKind::RandomDiagonal { .. } => {
                DenseMatrix::diag(&self.rho.iter().map(|r| r * r).collect::<Vec<_>>())
            }
        }
    }

    pub fn analytic_norms(&self) -> Result<AnalyticNorms> {
        let m = self.m as f64;
        match self.kind {
            ShapeKind::Identity => Ok(AnalyticNorms { trace: m, frobenius_upper: m.sqrt(), spectral_upper: 1.0, exact: true }),
            ShapeKind::AllOnes => Ok(AnalyticNorms { trace: m, frobenius_upper: m, spectral_upper: m, exact: true }),
            ShapeKind::Toeplitz { theta } => Ok(AnalyticNorms {
                trace: m,
                frobenius_upper: toeplitz_frobenius_exact(theta, self.m),
                spectral_upper: toeplitz_gershgorin_bound(theta),
                exact: false,
            }),
            ShapeKind::RandomDiagonal { .. } => Err(Error::NoAnalyticForm(self.descriptor().to_string())),
        }
    }

    /// `Y = X Λ` without materializing `Λ`.
    ///
    /// The Toeplitz factor has the closed form `Λ[j][0] = θ^j` and
    /// `Λ[j][k] = √(1-θ²) θ^(j-k)` for `1 ≤ k ≤ j`, so each row of `Y` is a
    /// backward geometric recursion over the row of `X`.
    pub fn apply_lambda(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let m = self.m;
        if x.cols() != m {
            return Err(Error::DimensionMismatch(format!(
                "samples have {} columns but the model has m = {m}",
                x.cols()
            )));
        }
        let mut y = x.clone();
        for r in 0..x.rows() {
            self.apply_lambda_row(y.row_mut(r));
        }
        Ok(y)
    }

    /// In-place `row ← row · Λ` for a single row of length `m`.
    pub fn apply_lambda_row(&self, row: &mut [f64]) {
        debug_assert_eq!(row.len(), self.m);
        match self.kind {
            ShapeKind::Identity => {}
            ShapeKind::Toeplitz { theta } => {
                let tail = (1.0 - theta * theta).sqrt();
                let mut acc = 0.0;
                for k in (0..row.len()).rev() {
                    acc = row[k] + theta * acc;
                    row[k] = if k == 0 { acc } else { tail * acc };
                }
            }
            ShapeKind::AllOnes => {
                let v = row.iter().sum::<f64>() / (self.m as f64).sqrt();
                row.fill(v);
            }
            ShapeKind::RandomDiagonal { .. } => {
                for (v, rho) in row.iter_mut().zip(&self.rho) {
                    *v *= rho;
                }
            }
        }
    }
}

/// `‖T(θ)‖_F` at finite `m`, including the `θ^(2m)` correction term.
pub fn toeplitz_frobenius_exact(theta: f64, m: usize) -> f64 {
    let t2 = theta * theta;
    let m_f = m as f64;
    let sq = m_f * (1.0 + t2) / (1.0 - t2) + 2.0 * t2 * (t2.powi(m as i32) - 1.0) / ((1.0 - t2) * (1.0 - t2));
    sq.sqrt()
}

/// `√(m(1+θ²)/(1-θ²))`, the `m`-linear relaxation of [`toeplitz_frobenius_exact`].
pub fn toeplitz_frobenius_relaxed(theta: f64, m: usize) -> f64 {
    let t2 = theta * theta;
    (m as f64 * (1.0 + t2) / (1.0 - t2)).sqrt()
}

/// Gershgorin bound `(1+θ)/(1-θ)` on `‖T(θ)‖`.
pub fn toeplitz_gershgorin_bound(theta: f64) -> f64 {
    (1.0 + theta) / (1.0 - theta)
}
