//! Monte Carlo experiments.
//!
//! Two kinds of sweep are supported:
//!
//! * [`ExperimentKind::MinSampleVsDim`]: for each model and dimension `n`,
//!   the smallest `m` at which the relative Frobenius error of `Σ̂` drops
//!   below `eta`, averaged over trials, with a least-squares line of mean
//!   minimal `m` against `n`.
//! * [`ExperimentKind::LogErrorVsM`]: for each model and sample count `m`
//!   at fixed `n`, the mean spectral error `‖Σ̂ - Σ‖` next to the expectation
//!   bound, with a least-squares line of `log10(error)` against `log10(m)`.
//!
//! Trial `t` of model `i` at grid point `j` always draws from stream
//! `Prng::stream_id(i, j, t)` of the master seed. Trials run on the ambient
//! rayon pool and are reduced in trial order, so results do not depend on
//! the thread count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, BoundReport};
use crate::error::{Error, Result};
use crate::estimator::{sample_covariance, spectral_error};
use crate::linalg::{DenseMatrix, SpdMatrix};
use crate::sampling::{correlate, draw_row, sample_x, Prng};
use crate::shape::{ModelDescriptor, ShapeModel};

/// `m_cap = DEFAULT_M_CAP_FACTOR · n` unless the config says otherwise.
pub const DEFAULT_M_CAP_FACTOR: usize = 200;
/// Censoring above this fraction of trials raises a warning.
pub const CENSORING_WARN_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    MinSampleVsDim,
    LogErrorVsM,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::MinSampleVsDim => "min_sample_vs_dim",
            ExperimentKind::LogErrorVsM => "log_error_vs_m",
        }
    }
}

/// Inclusive integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntRange {
    pub start: usize,
    pub end: usize,
    #[serde(default = "one")]
    pub step: usize,
}

fn one() -> usize {
    1
}

impl IntRange {
    pub fn new(start: usize, end: usize, step: usize) -> Self {
        Self { start, end, step }
    }

    pub fn single(value: usize) -> Self {
        Self::new(value, value, 1)
    }

    pub fn values(&self) -> Vec<usize> {
        (self.start..=self.end).step_by(self.step.max(1)).collect()
    }

    fn validate(&self, what: &str) -> Result<()> {
        if self.step == 0 || self.start == 0 || self.start > self.end {
            return Err(Error::Config(format!(
                "{what} must satisfy 1 <= start <= end with step >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Covariance used to generate samples: `"identity"` or an explicit matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SigmaSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

impl Default for SigmaSpec {
    fn default() -> Self {
        SigmaSpec::Named("identity".into())
    }
}

impl SigmaSpec {
    pub fn to_spd(&self, n: usize) -> Result<SpdMatrix> {
        match self {
            SigmaSpec::Named(name) if name == "identity" => Ok(SpdMatrix::identity(n)),
            SigmaSpec::Named(name) => Err(Error::Config(format!("unknown sigma_spec `{name}`"))),
            SigmaSpec::Matrix(rows) => {
                let s = SpdMatrix::new(DenseMatrix::from_rows(rows)?)?;
                if s.dim() != n {
                    return Err(Error::Config(format!("sigma_spec is {0}x{0} but n = {n}", s.dim())));
                }
                Ok(s)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Prefix for output files; defaults to the experiment kind.
    #[serde(default)]
    pub name: Option<String>,
    pub experiment: ExperimentKind,
    pub models: Vec<ModelDescriptor>,
    pub n_range: IntRange,
    /// Sample counts, `LogErrorVsM` only.
    #[serde(default)]
    pub m_range: Option<IntRange>,
    /// Relative Frobenius threshold, `MinSampleVsDim` only.
    #[serde(default)]
    pub eta: Option<f64>,
    pub trials: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub sigma_spec: SigmaSpec,
    /// `m_cap = m_cap_factor · n`, `MinSampleVsDim` only.
    #[serde(default)]
    pub m_cap_factor: Option<usize>,
}

impl ExperimentConfig {
    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| self.experiment.as_str().to_string())
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() {
            return Err(Error::Config("at least one model is required".into()));
        }
        if self.models.len() >= 1 << 16 {
            return Err(Error::Config("too many models".into()));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        self.n_range.validate("n_range")?;
        if self.n_range.values().len() >= 1 << 16 {
            return Err(Error::Config("n_range has too many points".into()));
        }
        match self.experiment {
            ExperimentKind::MinSampleVsDim => {
                let eta = self.eta.ok_or_else(|| Error::Config("eta is required for min_sample_vs_dim".into()))?;
                if !(eta > 0.0 && eta < 1.0) {
                    return Err(Error::Config(format!("eta must lie in (0, 1), got {eta}")));
                }
                if self.m_cap_factor == Some(0) {
                    return Err(Error::Config("m_cap_factor must be >= 1".into()));
                }
            }
            ExperimentKind::LogErrorVsM => {
                let m_range =
                    self.m_range.ok_or_else(|| Error::Config("m_range is required for log_error_vs_m".into()))?;
                m_range.validate("m_range")?;
                if m_range.values().len() >= 1 << 16 {
                    return Err(Error::Config("m_range has too many points".into()));
                }
                if self.n_range.start != self.n_range.end {
                    return Err(Error::Config("log_error_vs_m runs at a single n (n_range.start == n_range.end)".into()));
                }
            }
        }
        if let SigmaSpec::Matrix(_) = self.sigma_spec {
            if self.n_range.start != self.n_range.end {
                return Err(Error::Config("an explicit sigma_spec matrix requires a single n".into()));
            }
        }
        self.sigma_spec.to_spd(self.n_range.start)?;
        Ok(())
    }

    /// Time-varying scale factors: identity and three random diagonal
    /// models with `E ρ² = 1`, `n = 1..30`, `eta = 0.2`.
    pub fn time_variant_scale(trials: usize, master_seed: u64) -> Self {
        Self {
            name: Some("fig1".into()),
            experiment: ExperimentKind::MinSampleVsDim,
            models: vec![
                ModelDescriptor::Identity,
                ModelDescriptor::RandomDiagonal { mu: 3f64.sqrt() / 2.0, sigma: 0.5 },
                ModelDescriptor::RandomDiagonal { mu: 2f64.sqrt() / 2.0, sigma: 2f64.sqrt() / 2.0 },
                ModelDescriptor::RandomDiagonal { mu: 0.0, sigma: 1.0 },
            ],
            n_range: IntRange::new(1, 30, 1),
            m_range: None,
            eta: Some(0.2),
            trials,
            master_seed,
            sigma_spec: SigmaSpec::default(),
            m_cap_factor: None,
        }
    }

    /// Toeplitz correlation sweep: identity and `T(θ)` for θ = 1/4, 1/2,
    /// 3/4, `n = 1..30`, `eta = 0.2`.
    pub fn toeplitz_sample_size(trials: usize, master_seed: u64) -> Self {
        Self {
            name: Some("fig2".into()),
            models: toeplitz_family(),
            ..Self::time_variant_scale(trials, master_seed)
        }
    }

    /// Error decay: identity and `T(θ)` for θ = 1/4, 1/2, 3/4 at `n = 15`,
    /// `m = 50, 100, …, 1000`.
    pub fn error_decay(trials: usize, master_seed: u64) -> Self {
        Self {
            name: Some("fig3".into()),
            experiment: ExperimentKind::LogErrorVsM,
            models: toeplitz_family(),
            n_range: IntRange::single(15),
            m_range: Some(IntRange::new(50, 1000, 50)),
            eta: None,
            trials,
            master_seed,
            sigma_spec: SigmaSpec::default(),
            m_cap_factor: None,
        }
    }
}

fn toeplitz_family() -> Vec<ModelDescriptor> {
    vec![
        ModelDescriptor::Identity,
        ModelDescriptor::Toeplitz { theta: 0.25 },
        ModelDescriptor::Toeplitz { theta: 0.5 },
        ModelDescriptor::Toeplitz { theta: 0.75 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinSampleRecord {
    pub model_id: String,
    pub n: usize,
    /// Mean over uncensored trials.
    pub mean_min_m: f64,
    pub stderr_min_m: f64,
    pub trials: usize,
    pub censored: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogErrorRecord {
    pub model_id: String,
    pub n: usize,
    pub m: usize,
    pub mean_spectral_error: f64,
    pub stderr_spectral_error: f64,
    pub log10_mean_error: f64,
    /// Expectation bound from numerically computed norms of `B` (averaged
    /// over trials for random models).
    pub theoretical_bound: f64,
    /// Expectation bound from closed-form norms, where the model has them.
    pub theoretical_bound_analytic: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFit {
    pub model_id: String,
    #[serde(flatten)]
    pub fit: LinearFit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub experiment: ExperimentKind,
    pub master_seed: u64,
    pub trials: usize,
    pub min_sample_records: Vec<MinSampleRecord>,
    pub log_error_records: Vec<LogErrorRecord>,
    /// Per model: mean minimal `m` against `n`, or `log10` error against
    /// `log10 m`. Models with fewer than three grid points are not fitted.
    pub fits: Vec<ModelFit>,
    pub warnings: Vec<String>,
}

impl ExperimentResult {
    pub fn fit(&self, model_id: &str) -> Option<&LinearFit> {
        self.fits.iter().find(|f| f.model_id == model_id).map(|f| &f.fit)
    }

    pub fn model_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = Vec::new();
        let all = self
            .min_sample_records
            .iter()
            .map(|r| &r.model_id)
            .chain(self.log_error_records.iter().map(|r| &r.model_id));
        for id in all {
            if !ids.contains(id) {
                ids.push(id.clone());
            }
        }
        ids
    }

    /// Log-error cells whose empirical mean error exceeds either bound.
    pub fn bound_violations(&self) -> Vec<&LogErrorRecord> {
        self.log_error_records
            .iter()
            .filter(|r| {
                r.mean_spectral_error > r.theoretical_bound
                    || r.theoretical_bound_analytic.is_some_and(|b| r.mean_spectral_error > b)
            })
            .collect()
    }

    pub fn censored_total(&self) -> usize {
        self.min_sample_records.iter().map(|r| r.censored).sum()
    }
}

/// Ordinary least squares of `ys` on `xs`. `r_squared` is 1 when `ys` is
/// constant.
pub fn ols_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInputs(format!("{} abscissae but {} ordinates", xs.len(), ys.len())));
    }
    if xs.len() < 3 {
        return Err(Error::InvalidInputs("least squares needs at least 3 points".into()));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::InvalidInputs("least squares inputs must be finite".into()));
    }
    let k = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / k;
    let y_mean = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInputs("abscissae are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_tot: f64 = ys.iter().map(|y| (y - y_mean).powi(2)).sum();
    let ss_res: f64 = xs.iter().zip(ys).map(|(x, y)| (y - (intercept + slope * x)).powi(2)).sum();
    let r_squared = if ss_tot == 0.0 { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(LinearFit { slope, intercept, r_squared })
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

/// Smallest `m` in `1..=m_cap` at which a fresh batch meets
/// `‖Σ̂ - Σ‖_F / ‖Σ‖_F ≤ eta`.
///
/// Every probe draws new samples and a new model instance at that `m`;
/// random models take their seed from `rng` as well.
pub fn min_sample_size_trial(
    rng: &mut Prng,
    n: usize,
    family: &ModelDescriptor,
    sigma: &SpdMatrix,
    eta: f64,
    m_cap: usize,
) -> Result<usize> {
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidInputs(format!("eta must lie in (0, 1), got {eta}")));
    }
    if m_cap < n {
        return Err(Error::InvalidInputs(format!("m_cap ({m_cap}) must be >= n ({n})")));
    }
    if sigma.dim() != n {
        return Err(Error::DimensionMismatch(format!("covariance is {0}x{0} but n = {n}", sigma.dim())));
    }
    let mut scratch = ProbeScratch::default();
    let mut last_error = f64::NAN;
    for m in 1..=m_cap {
        let model_seed = if family.is_random() { rng.next_u64() } else { 0 };
        let model = family.build(m, model_seed)?;
        match probe_relative_error(rng, &model, sigma, eta, &mut scratch) {
            ProbeOutcome::Within(_) => return Ok(m),
            ProbeOutcome::Exceeds(err) => last_error = err,
        }
    }
    Err(Error::CapExceeded { cap: m_cap, last_error })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProbeOutcome {
    /// Full relative error, at most `eta`.
    Within(f64),
    /// A partial relative error already above `eta`; the full error is at
    /// least this large.
    Exceeds(f64),
}

#[derive(Debug, Default)]
pub struct ProbeScratch {
    g: Vec<f64>,
    y: Vec<f64>,
}

/// Relative Frobenius error of `Σ̂` for one fresh batch, built row by row.
///
/// Row `i` of `Y` fixes entries `(i, j ≤ i)` of `Σ̂`, so the squared error
/// over the rows seen so far only grows; generation stops as soon as it
/// passes `eta`. Draws come from `rng` in the order used by
/// [`sample_x`], so a probe that runs to the end sees the same `Y` as
/// `correlate(sample_x(..))`.
pub fn probe_relative_error(
    rng: &mut Prng,
    model: &ShapeModel,
    sigma: &SpdMatrix,
    eta: f64,
    scratch: &mut ProbeScratch,
) -> ProbeOutcome {
    let n = sigma.dim();
    let m = model.m();
    let inv_m = 1.0 / m as f64;
    let target = sigma.matrix();
    let sigma_norm = crate::linalg::frobenius_norm(target);
    scratch.y.resize(n * m, 0.0);
    if !sigma.is_identity() {
        scratch.g.resize(n * m, 0.0);
    }
    let mut sq = 0.0;
    for i in 0..n {
        let (done, rest) = scratch.y.split_at_mut(i * m);
        let row = &mut rest[..m];
        draw_row(rng, sigma, &mut scratch.g, i, row);
        model.apply_lambda_row(row);
        for (j, prev) in done.chunks_exact(m).enumerate() {
            let d = crate::linalg::dot(row, prev) * inv_m - target.get(i, j);
            sq += 2.0 * d * d;
        }
        let d = crate::linalg::dot(row, row) * inv_m - target.get(i, i);
        sq += d * d;
        let err = sq.sqrt() / sigma_norm;
        if err > eta {
            return ProbeOutcome::Exceeds(err);
        }
    }
    ProbeOutcome::Within(sq.sqrt() / sigma_norm)
}

/// Outcomes of every trial of one (model, n) cell, in trial order.
pub fn min_sample_trials(cfg: &ExperimentConfig, model_index: usize, n_index: usize) -> Result<Vec<Result<usize>>> {
    let family = cfg
        .models
        .get(model_index)
        .ok_or_else(|| Error::InvalidInputs(format!("no model at index {model_index}")))?;
    let n = *cfg
        .n_range
        .values()
        .get(n_index)
        .ok_or_else(|| Error::InvalidInputs(format!("no n at index {n_index}")))?;
    let sigma = cfg.sigma_spec.to_spd(n)?;
    let eta = cfg.eta.ok_or_else(|| Error::Config("eta is required".into()))?;
    let m_cap = cfg.m_cap_factor.unwrap_or(DEFAULT_M_CAP_FACTOR) * n;
    Ok((0..cfg.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Prng::split(cfg.master_seed, Prng::stream_id(model_index, n_index, t));
            min_sample_size_trial(&mut rng, n, family, &sigma, eta, m_cap)
        })
        .collect())
}

pub fn run_min_sample_experiment(cfg: &ExperimentConfig, progress: &dyn Fn(&str)) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.experiment != ExperimentKind::MinSampleVsDim {
        return Err(Error::Config("expected a min_sample_vs_dim config".into()));
    }
    let ns = cfg.n_range.values();
    let mut records = Vec::new();
    let mut fits = Vec::new();
    let mut warnings = Vec::new();
    for (mi, family) in cfg.models.iter().enumerate() {
        let model_id = family.to_string();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (ni, &n) in ns.iter().enumerate() {
            let outcomes = min_sample_trials(cfg, mi, ni)?;
            let mut found = Vec::with_capacity(outcomes.len());
            let mut censored = 0;
            for outcome in outcomes {
                match outcome {
                    Ok(m) => found.push(m as f64),
                    Err(Error::CapExceeded { .. }) => censored += 1,
                    Err(e) => return Err(e),
                }
            }
            if found.is_empty() {
                return Err(Error::FullyCensored { model: model_id, n });
            }
            if censored as f64 > CENSORING_WARN_FRACTION * cfg.trials as f64 {
                warnings.push(format!(
                    "{model_id}, n = {n}: {censored} of {} trials hit the sample-size cap",
                    cfg.trials
                ));
            }
            let (mean, stderr) = mean_and_stderr(&found);
            progress(&format!("{} {model_id} n={n}: mean minimal m {mean:.2} (stderr {stderr:.2}, censored {censored})", cfg.name()));
            xs.push(n as f64);
            ys.push(mean);
            records.push(MinSampleRecord {
                model_id: model_id.clone(),
                n,
                mean_min_m: mean,
                stderr_min_m: stderr,
                trials: cfg.trials,
                censored,
            });
        }
        if xs.len() >= 3 {
            fits.push(ModelFit { model_id, fit: ols_fit(&xs, &ys)? });
        }
    }
    Ok(ExperimentResult {
        name: cfg.name(),
        experiment: cfg.experiment,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        min_sample_records: records,
        log_error_records: Vec::new(),
        fits,
        warnings,
    })
}

fn expectation_bound(model: &ShapeModel, sigma: &SpdMatrix, analytic: bool) -> Result<f64> {
    let inputs = bounds::inputs_from_model(model, sigma, analytic)?;
    Ok(bounds::mean_shift_term(&inputs) + bounds::compound_wishart_expectation(&inputs))
}

pub fn run_log_error_experiment(cfg: &ExperimentConfig, progress: &dyn Fn(&str)) -> Result<ExperimentResult> {
    cfg.validate()?;
    if cfg.experiment != ExperimentKind::LogErrorVsM {
        return Err(Error::Config("expected a log_error_vs_m config".into()));
    }
    let n = cfg.n_range.start;
    let sigma = cfg.sigma_spec.to_spd(n)?;
    let ms = cfg.m_range.expect("validated").values();
    let mut records = Vec::new();
    let mut fits = Vec::new();
    for (mi, family) in cfg.models.iter().enumerate() {
        let model_id = family.to_string();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (pi, &m) in ms.iter().enumerate() {
            let fixed = if family.is_random() { None } else { Some(family.build(m, 0)?) };
            let outcomes: Vec<Result<(f64, Option<f64>)>> = (0..cfg.trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = Prng::split(cfg.master_seed, Prng::stream_id(mi, pi, t));
                    let drawn;
                    let model = match &fixed {
                        Some(model) => model,
                        None => {
                            drawn = family.build(m, rng.next_u64())?;
                            &drawn
                        }
                    };
                    let x = sample_x(&mut rng, n, m, &sigma)?;
                    let err = spectral_error(&sample_covariance(&correlate(x, model)?), &sigma)?;
                    let bound = if fixed.is_none() { Some(expectation_bound(model, &sigma, false)?) } else { None };
                    Ok((err, bound))
                })
                .collect();
            let mut errors = Vec::with_capacity(cfg.trials);
            let mut trial_bounds = Vec::new();
            for outcome in outcomes {
                let (err, bound) = outcome?;
                errors.push(err);
                trial_bounds.extend(bound);
            }
            let (mean, stderr) = mean_and_stderr(&errors);
            let (theoretical, analytic) = match &fixed {
                Some(model) => (
                    expectation_bound(model, &sigma, false)?,
                    match expectation_bound(model, &sigma, true) {
                        Ok(v) => Some(v),
                        Err(Error::NoAnalyticForm(_)) => None,
                        Err(e) => return Err(e),
                    },
                ),
                None => (trial_bounds.iter().sum::<f64>() / trial_bounds.len() as f64, None),
            };
            progress(&format!(
                "{} {model_id} n={n} m={m}: mean error {mean:.4e} (bound {theoretical:.4e})",
                cfg.name()
            ));
            xs.push((m as f64).log10());
            ys.push(mean.log10());
            records.push(LogErrorRecord {
                model_id: model_id.clone(),
                n,
                m,
                mean_spectral_error: mean,
                stderr_spectral_error: stderr,
                log10_mean_error: mean.log10(),
                theoretical_bound: theoretical,
                theoretical_bound_analytic: analytic,
            });
        }
        if xs.len() >= 3 {
            fits.push(ModelFit { model_id, fit: ols_fit(&xs, &ys)? });
        }
    }
    Ok(ExperimentResult {
        name: cfg.name(),
        experiment: cfg.experiment,
        master_seed: cfg.master_seed,
        trials: cfg.trials,
        min_sample_records: Vec::new(),
        log_error_records: records,
        fits,
        warnings: Vec::new(),
    })
}

pub fn run_experiment(cfg: &ExperimentConfig, progress: &dyn Fn(&str)) -> Result<ExperimentResult> {
    match cfg.experiment {
        ExperimentKind::MinSampleVsDim => run_min_sample_experiment(cfg, progress),
        ExperimentKind::LogErrorVsM => run_log_error_experiment(cfg, progress),
    }
}

/// Entrywise Monte Carlo mean of `Σ̂` and its standard error.
#[derive(Debug, Clone)]
pub struct MeanEstimate {
    pub mean: DenseMatrix,
    pub stderr: DenseMatrix,
    pub trials: usize,
}

/// Averages `Σ̂` over `trials` independent batches drawn with a fixed model.
pub fn monte_carlo_mean(model: &ShapeModel, sigma: &SpdMatrix, trials: usize, seed: u64) -> Result<MeanEstimate> {
    if trials < 2 {
        return Err(Error::InvalidInputs("need at least two trials for a standard error".into()));
    }
    let n = sigma.dim();
    let m = model.m();
    let estimates: Vec<Result<DenseMatrix>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Prng::split(seed, t as u64);
            let x = sample_x(&mut rng, n, m, sigma)?;
            Ok(sample_covariance(&correlate(x, model)?).sigma_hat)
        })
        .collect();
    let mut sum = vec![0.0; n * n];
    let mut sum_sq = vec![0.0; n * n];
    for est in estimates {
        for ((s, q), v) in sum.iter_mut().zip(sum_sq.iter_mut()).zip(est?.as_slice()) {
            *s += v;
            *q += v * v;
        }
    }
    let k = trials as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / k).collect();
    let stderr: Vec<f64> = sum_sq
        .iter()
        .zip(&mean)
        .map(|(q, mu)| ((q - k * mu * mu).max(0.0) / (k - 1.0) / k).sqrt())
        .collect();
    Ok(MeanEstimate { mean: DenseMatrix::from_raw(n, n, mean), stderr: DenseMatrix::from_raw(n, n, stderr), trials })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailCheck {
    pub threshold: f64,
    pub prob_bound: f64,
    pub exceedances: usize,
    pub trials: usize,
    pub frequency: f64,
}

/// Frequency of `‖W - EW‖ ≥ t(δ)` over independent batches, next to the
/// compound Wishart tail bound at `δ`.
pub fn tail_exceedance_frequency(
    model: &ShapeModel,
    sigma: &SpdMatrix,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<TailCheck> {
    let inputs = bounds::inputs_from_model(model, sigma, false)?;
    let tail = bounds::compound_wishart_tail(&inputs, delta)?;
    let n = sigma.dim();
    let m = model.m();
    let mean = sigma.matrix().scale(inputs.b_trace / m as f64);
    let mean = SpdMatrix::new(mean)?;
    let deviations: Vec<Result<f64>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = Prng::split(seed, t as u64);
            let x = sample_x(&mut rng, n, m, sigma)?;
            spectral_error(&sample_covariance(&correlate(x, model)?), &mean)
        })
        .collect();
    let mut exceedances = 0;
    for d in deviations {
        if d? >= tail.threshold {
            exceedances += 1;
        }
    }
    Ok(TailCheck {
        threshold: tail.threshold,
        prob_bound: tail.prob_bound,
        exceedances,
        trials,
        frequency: exceedances as f64 / trials as f64,
    })
}

/// Expectation bounds for every model of a config at each of its grid
/// points (`m_range` at fixed `n`).
pub fn bound_reports(cfg: &ExperimentConfig) -> Result<Vec<(String, usize, BoundReport)>> {
    cfg.validate()?;
    let n = cfg.n_range.start;
    let sigma = cfg.sigma_spec.to_spd(n)?;
    let ms = cfg.m_range.map(|r| r.values()).unwrap_or_default();
    let mut out = Vec::new();
    for family in cfg.models.iter().filter(|f| !f.is_random()) {
        for &m in &ms {
            let model = family.build(m, 0)?;
            let inputs = bounds::inputs_from_model(&model, &sigma, false)?;
            out.push((family.to_string(), m, bounds::covariance_error_expectation(&inputs)?));
        }
    }
    Ok(out)
}
