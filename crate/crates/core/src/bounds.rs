//! Closed-form error bounds for compound Wishart matrices and for the
//! covariance estimate built from correlated samples.
//!
//! Every bound is a function of a handful of scalars: the dimension `n`, the
//! sample count `m`, the shape matrix norms `‖B‖_F`, `‖B‖`, its trace, and
//! `‖Σ‖`. Those are collected in [`BoundInputs`]. All logarithms are natural.
//!
//! * [`compound_wishart_tail`], [`compound_wishart_expectation`]: deviation of
//!   `W = X B Xᵀ / m` from its mean,
//! * [`covariance_error_tail`], [`covariance_error_expectation`]: deviation of
//!   `Σ̂` from `Σ`, which adds the bias `|tr(B)/m - 1| · ‖Σ‖`,
//! * [`soloveychik_expectation`], [`paulin_expectation`]: earlier bounds for
//!   general shape matrices, kept for comparison.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, SpdMatrix};
use crate::shape::{ShapeKind, ShapeModel};

/// Relative slack allowed on `‖B‖ ≤ ‖B‖_F ≤ √m ‖B‖` for numerically computed norms.
const NORM_ORDER_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NormSource {
    NumericNorms,
    AnalyticNorms,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundInputs {
    pub n: usize,
    pub m: usize,
    pub b_frobenius: f64,
    pub b_spectral: f64,
    pub b_trace: f64,
    pub sigma_spectral: f64,
    pub source: NormSource,
    /// How each norm was obtained, for the report metadata.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub provenance: Vec<String>,
}

impl BoundInputs {
    /// Validates the inputs. The norm ordering `‖B‖ ≤ ‖B‖_F ≤ √m ‖B‖` is
    /// only enforced for numeric norms: analytic spectral values may be
    /// upper bounds that exceed the Frobenius norm.
    pub fn new(
        n: usize,
        m: usize,
        b_frobenius: f64,
        b_spectral: f64,
        b_trace: f64,
        sigma_spectral: f64,
        source: NormSource,
    ) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidInputs(format!("need n, m >= 1, got n={n}, m={m}")));
        }
        for (name, v) in [("b_frobenius", b_frobenius), ("b_spectral", b_spectral), ("sigma_spectral", sigma_spectral)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidInputs(format!("{name} must be finite and nonnegative, got {v}")));
            }
        }
        if !b_trace.is_finite() {
            return Err(Error::InvalidInputs(format!("b_trace must be finite, got {b_trace}")));
        }
        if source == NormSource::NumericNorms {
            let slack = NORM_ORDER_SLACK * b_frobenius.max(b_spectral);
            if b_spectral > b_frobenius + slack || b_frobenius > (m as f64).sqrt() * b_spectral + slack {
                return Err(Error::InvalidInputs(format!(
                    "norms violate ‖B‖ <= ‖B‖_F <= sqrt(m)‖B‖: spectral {b_spectral}, frobenius {b_frobenius}, m {m}"
                )));
            }
        }
        Ok(Self { n, m, b_frobenius, b_spectral, b_trace, sigma_spectral, source, provenance: Vec::new() })
    }

    fn with_provenance(mut self, notes: Vec<String>) -> Self {
        self.provenance = notes;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    /// Deviation level `t(δ)`.
    pub threshold: f64,
    /// Bound on the probability of exceeding `threshold`; not clamped, so
    /// values above 1 mean the bound is vacuous.
    pub prob_bound: f64,
}

/// `2 exp(-2δ² + 2n log 3)`.
pub fn tail_probability(n: usize, delta: f64) -> f64 {
    2.0 * (-2.0 * delta * delta + 2.0 * n as f64 * 3f64.ln()).exp()
}

/// Smallest `δ` whose tail probability bound equals `p`.
pub fn delta_for_probability(p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidInputs(format!("probability must lie in (0, 1], got {p}")));
    }
    Ok(((2.0 * n as f64 * 3f64.ln() + (2.0 / p).ln()) / 2.0).sqrt())
}

/// `δ = √(2 n log 3)`, the level at which the tail bound becomes
/// `2 exp(-δ²)`; used when no `δ` is requested.
pub fn default_delta(n: usize) -> f64 {
    (2.0 * n as f64 * 3f64.ln()).sqrt()
}

fn check_delta(delta: f64) -> Result<()> {
    if delta >= 0.0 && delta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInputs(format!("delta must be finite and >= 0, got {delta}")))
    }
}

fn deviation_level(inputs: &BoundInputs, delta: f64) -> f64 {
    (32.0 * inputs.b_frobenius * delta + 64.0 * inputs.b_spectral * delta * delta) / inputs.m as f64
        * inputs.sigma_spectral
}

/// `‖W - EW‖ ≤ (32‖B‖_F δ + 64‖B‖δ²)/m · ‖Σ‖` except with probability
/// `2 exp(-2δ² + 2n log 3)`.
pub fn compound_wishart_tail(inputs: &BoundInputs, delta: f64) -> Result<TailBound> {
    check_delta(delta)?;
    Ok(TailBound { threshold: deviation_level(inputs, delta), prob_bound: tail_probability(inputs.n, delta) })
}

/// `E‖W - EW‖ ≤ (72‖B‖_F √n + 282‖B‖ n)/m · ‖Σ‖`.
pub fn compound_wishart_expectation(inputs: &BoundInputs) -> f64 {
    let n = inputs.n as f64;
    (72.0 * inputs.b_frobenius * n.sqrt() + 282.0 * inputs.b_spectral * n) / inputs.m as f64 * inputs.sigma_spectral
}

/// Bias of the estimate: `‖EΣ̂ - Σ‖ = |tr(B)/m - 1| · ‖Σ‖`.
pub fn mean_shift_term(inputs: &BoundInputs) -> f64 {
    (inputs.b_trace / inputs.m as f64 - 1.0).abs() * inputs.sigma_spectral
}

/// Tail bound on `‖Σ̂ - Σ‖`: the compound Wishart level shifted by the bias.
pub fn covariance_error_tail(inputs: &BoundInputs, delta: f64) -> Result<TailBound> {
    let wishart = compound_wishart_tail(inputs, delta)?;
    Ok(TailBound { threshold: mean_shift_term(inputs) + wishart.threshold, prob_bound: wishart.prob_bound })
}

/// Expectation bound on `‖Σ̂ - Σ‖` with the default `δ` for the tail fields
/// and no Paulin comparison.
pub fn covariance_error_expectation(inputs: &BoundInputs) -> Result<BoundReport> {
    BoundReport::evaluate(inputs, &ReportOptions::default())
}

/// `24 ⌈log 2n⌉² √n (4‖B‖ + √π ‖B‖_F/‖B‖) / m · ‖Σ‖`.
pub fn soloveychik_expectation(inputs: &BoundInputs) -> Result<f64> {
    if !(inputs.b_spectral > 0.0) {
        return Err(Error::InvalidInputs("Soloveychik bound divides by ‖B‖, which is zero".into()));
    }
    let n = inputs.n as f64;
    let log_factor = (2.0 * n).ln().ceil();
    Ok(24.0 * log_factor * log_factor * n.sqrt()
        * (4.0 * inputs.b_spectral + PI.sqrt() * inputs.b_frobenius / inputs.b_spectral)
        / inputs.m as f64
        * inputs.sigma_spectral)
}

/// `(2 √(v log n) + 32√3 L n log n ‖B‖) / m` with
/// `v = 44 (n σ² + L²) ‖B‖_F²`, for entries bounded by `L` with standard
/// deviation `σ`.
pub fn paulin_expectation(inputs: &BoundInputs, l_bound: f64, entry_sigma: f64) -> Result<f64> {
    if inputs.n < 2 {
        return Err(Error::InvalidInputs("Paulin bound needs n >= 2 (log n must be positive)".into()));
    }
    if !(l_bound > 0.0) || !(entry_sigma > 0.0) {
        return Err(Error::InvalidInputs(format!(
            "Paulin bound needs L > 0 and sigma > 0, got L={l_bound}, sigma={entry_sigma}"
        )));
    }
    let n = inputs.n as f64;
    let log_n = n.ln();
    let v = 44.0 * (n * entry_sigma * entry_sigma + l_bound * l_bound) * inputs.b_frobenius * inputs.b_frobenius;
    Ok((2.0 * (v * log_n).sqrt() + 32.0 * 3f64.sqrt() * l_bound * n * log_n * inputs.b_spectral) / inputs.m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PaulinParams {
    pub l_bound: f64,
    pub entry_sigma: f64,
}

#[derive(Debug, Clone, Default)]
pub struct ReportOptions {
    /// Tail level; [`default_delta`] when absent.
    pub delta: Option<f64>,
    pub paulin: Option<PaulinParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportMetadata {
    pub norm_source: NormSource,
    pub delta: f64,
    pub tail_vacuous: bool,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    /// `mean_shift_term + concentration_term`.
    pub expectation_bound: f64,
    pub tail_threshold_t: f64,
    /// Failure probability bound clamped to `[0, 1]`.
    pub tail_probability: f64,
    pub tail_probability_raw: f64,
    pub mean_shift_term: f64,
    pub concentration_term: f64,
    pub comparison_soloveychik: f64,
    pub comparison_paulin: Option<f64>,
    pub inputs: BoundInputs,
    pub metadata: ReportMetadata,
}

impl BoundReport {
    pub fn evaluate(inputs: &BoundInputs, options: &ReportOptions) -> Result<Self> {
        let delta = options.delta.unwrap_or_else(|| default_delta(inputs.n));
        let tail = covariance_error_tail(inputs, delta)?;
        let mean_shift = mean_shift_term(inputs);
        let concentration = compound_wishart_expectation(inputs);
        let paulin = options
            .paulin
            .map(|p| paulin_expectation(inputs, p.l_bound, p.entry_sigma))
            .transpose()?;
        let mut notes = inputs.provenance.clone();
        if tail.prob_bound > 1.0 {
            notes.push(format!("tail bound is vacuous at delta = {delta} (raw probability {:e})", tail.prob_bound));
        }
        Ok(Self {
            expectation_bound: mean_shift + concentration,
            tail_threshold_t: tail.threshold,
            tail_probability: tail.prob_bound.clamp(0.0, 1.0),
            tail_probability_raw: tail.prob_bound,
            mean_shift_term: mean_shift,
            concentration_term: concentration,
            comparison_soloveychik: soloveychik_expectation(inputs)?,
            comparison_paulin: paulin,
            inputs: inputs.clone(),
            metadata: ReportMetadata {
                norm_source: inputs.source,
                delta,
                tail_vacuous: tail.prob_bound > 1.0,
                notes,
            },
        })
    }
}

/// `(tr B, ‖B‖_F, ‖B‖)` computed numerically.
///
/// Diagonal shape matrices are read off their diagonal. `T(θ)` is never
/// materialized: its Frobenius norm is summed along the diagonals, and since
/// `T(θ)⁻¹ (1 - θ²)` is tridiagonal with diagonal `(1, 1+θ², …, 1+θ², 1)` and
/// off-diagonal `-θ`, `‖T‖` is the reciprocal of the smallest eigenvalue of
/// that inverse. Other shapes are materialized and handed to
/// [`linalg::spectral_norm`].
pub fn numeric_b_norms(model: &ShapeModel) -> Result<(f64, f64, f64)> {
    let m = model.m();
    let diagonal: Option<Vec<f64>> = match model.kind() {
        ShapeKind::Identity => Some(vec![1.0; m]),
        ShapeKind::RandomDiagonal { .. } => model.rho().map(|rho| rho.iter().map(|r| r * r).collect()),
        _ => None,
    };
    if let Some(d) = diagonal {
        let trace = d.iter().sum();
        let frob = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        let spec = d.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        return Ok((trace, frob, spec));
    }
    if let ShapeKind::Toeplitz { theta } = model.kind() {
        if m == 1 {
            return Ok((1.0, 1.0, 1.0));
        }
        let t2 = theta * theta;
        let mut frob_sq = m as f64;
        let mut power = 1.0;
        for k in 1..m {
            power *= t2;
            frob_sq += 2.0 * (m - k) as f64 * power;
        }
        let scale = 1.0 / (1.0 - t2);
        let diag: Vec<f64> = (0..m).map(|i| if i == 0 || i == m - 1 { scale } else { (1.0 + t2) * scale }).collect();
        let off = vec![-theta * scale; m - 1];
        let (lowest, _) = linalg::tridiagonal_extremes(&diag, &off);
        return Ok((m as f64, frob_sq.sqrt(), 1.0 / lowest));
    }
    let b = model.materialize_b();
    Ok((
        linalg::trace(&b)?,
        linalg::frobenius_norm(&b),
        linalg::spectral_norm(&b, linalg::DEFAULT_TOL, linalg::DEFAULT_MAX_ITER)?,
    ))
}

pub fn inputs_from_model(model: &ShapeModel, sigma: &SpdMatrix, use_analytic: bool) -> Result<BoundInputs> {
    let sigma_spectral = sigma.spectral_norm()?;
    let n = sigma.dim();
    let m = model.m();
    if use_analytic {
        let a = model.analytic_norms()?;
        let mut notes = vec![format!("analytic norms for {}", model.descriptor())];
        if let ShapeKind::Toeplitz { .. } = model.kind() {
            notes.push("toeplitz frobenius: exact finite-m identity (with the theta^(2m) correction)".into());
            notes.push("toeplitz spectral: Gershgorin upper bound (1+theta)/(1-theta)".into());
        }
        return Ok(BoundInputs::new(n, m, a.frobenius_upper, a.spectral_upper, a.trace, sigma_spectral, NormSource::AnalyticNorms)?
            .with_provenance(notes));
    }
    let (trace, frob, spec) = numeric_b_norms(model)?;
    Ok(BoundInputs::new(n, m, frob, spec, trace, sigma_spectral, NormSource::NumericNorms)?
        .with_provenance(vec![format!("numeric norms of the shape matrix for {}", model.descriptor())]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inputs(n: usize, m: usize, frob: f64, spec: f64, trace: f64, sigma: f64) -> BoundInputs {
        BoundInputs::new(n, m, frob, spec, trace, sigma, NormSource::AnalyticNorms).unwrap()
    }

    fn identity_inputs(n: usize, m: usize) -> BoundInputs {
        inputs(n, m, (m as f64).sqrt(), 1.0, m as f64, 1.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn wishart_tail_examples() {
        let t = compound_wishart_tail(&identity_inputs(4, 9), 0.0).unwrap();
        assert_eq!(t.threshold, 0.0);
        assert!(rel(t.prob_bound, 2.0 * 9f64.powi(4)) < 1e-13);

        let t = compound_wishart_tail(&inputs(1, 1, 1.0, 1.0, 1.0, 1.0), 2.0).unwrap();
        assert_eq!(t.threshold, 320.0);
        assert!(rel(t.prob_bound, 2.0 * (-8.0f64 + 2.0 * 3f64.ln()).exp()) < 1e-15);

        let delta = (2.0 * 3f64.ln() * 15.0).sqrt();
        let t = compound_wishart_tail(&identity_inputs(15, 100), delta).unwrap();
        assert!(rel(t.threshold, (32.0 * 10.0 * delta + 64.0 * delta * delta) / 100.0) < 1e-15);

        assert!(compound_wishart_tail(&identity_inputs(1, 1), -0.1).is_err());
    }

    #[test]
    fn wishart_expectation_examples() {
        for (n, m) in [(1usize, 1usize), (15, 100), (30, 7)] {
            let (nf, mf) = (n as f64, m as f64);
            let expected = 72.0 * (nf / mf).sqrt() + 282.0 * nf / mf;
            assert!(rel(compound_wishart_expectation(&identity_inputs(n, m)), expected) < 1e-13);
        }
        let v = compound_wishart_expectation(&inputs(4, 100, 10.0, 1.0, 100.0, 2.0));
        assert!(rel(v, 51.36) < 1e-14, "{v}");
        for m in [1usize, 10, 1000] {
            let mf = m as f64;
            let v = compound_wishart_expectation(&inputs(7, m, mf, mf, mf, 1.0));
            assert!(rel(v, 72.0 * 7f64.sqrt() + 282.0 * 7.0) < 1e-13);
        }
    }

    #[test]
    fn covariance_expectation_examples() {
        let i = identity_inputs(15, 100);
        let r = covariance_error_expectation(&i).unwrap();
        assert_eq!(r.mean_shift_term, 0.0);
        assert_eq!(r.expectation_bound, compound_wishart_expectation(&i));
        assert_eq!(r.expectation_bound, r.mean_shift_term + r.concentration_term);

        // B = 2I: tr/m = 2.
        let m = 30;
        let b2 = inputs(3, m, 2.0 * (m as f64).sqrt(), 2.0, 2.0 * m as f64, 1.7);
        let r = covariance_error_expectation(&b2).unwrap();
        assert!(rel(r.mean_shift_term, 1.7) < 1e-15);
    }

    #[test]
    fn toeplitz_half_expectation_against_direct_arithmetic() {
        let model = ShapeModel::toeplitz(0.5, 100).unwrap();
        let sigma = SpdMatrix::identity(15);
        let i = inputs_from_model(&model, &sigma, false).unwrap();
        let r = covariance_error_expectation(&i).unwrap();
        // Frobenius norm from the direct sum m + 2 Σ_k (m-k) θ^{2k}.
        let mut sq = 100.0;
        for k in 1..100 {
            sq += 2.0 * (100 - k) as f64 * 0.25f64.powi(k);
        }
        let frob = sq.sqrt();
        let spec = i.b_spectral;
        assert!(rel(i.b_frobenius, frob) < 1e-12);
        assert!(spec < 3.0 && spec > 2.9);
        let expected = (72.0 * frob * 15f64.sqrt() + 282.0 * spec * 15.0) / 100.0;
        assert!(rel(r.concentration_term, expected) < 1e-12);
        assert!(r.mean_shift_term.abs() < 1e-12);
    }

    #[test]
    fn covariance_tail_examples() {
        let t = covariance_error_tail(&identity_inputs(3, 20), 0.0).unwrap();
        assert_eq!(t.threshold, 0.0);

        let t = covariance_error_tail(&identity_inputs(2, 50), 3.0).unwrap();
        let expected = (32.0 * 50f64.sqrt() * 3.0 + 64.0 * 9.0) / 50.0;
        assert!(rel(t.threshold, expected) < 1e-14);
        assert!(rel(t.prob_bound, 2.0 * (-18.0 + 4.0 * 3f64.ln()).exp()) < 1e-14);

        let b2 = inputs(2, 10, 2.0 * 10f64.sqrt(), 2.0, 20.0, 1.5);
        assert_eq!(covariance_error_tail(&b2, 0.0).unwrap().threshold, 1.5);
    }

    #[test]
    fn soloveychik_examples() {
        let v = soloveychik_expectation(&identity_inputs(1, 1)).unwrap();
        assert!(rel(v, 24.0 * (4.0 + PI.sqrt())) < 1e-15);
        let v = soloveychik_expectation(&identity_inputs(2, 1)).unwrap();
        assert!(rel(v, 24.0 * 4.0 * 2f64.sqrt() * (4.0 + PI.sqrt())) < 1e-15);
        let a = soloveychik_expectation(&inputs(5, 40, 3.0, 2.0, 40.0, 1.0)).unwrap();
        let b = soloveychik_expectation(&inputs(5, 80, 3.0, 2.0, 40.0, 1.0)).unwrap();
        assert_eq!(a, 2.0 * b);
        assert!(soloveychik_expectation(&inputs(3, 3, 0.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn paulin_examples() {
        let v = paulin_expectation(&inputs(2, 1, 1.0, 1.0, 1.0, 1.0), 1.0, 1.0).unwrap();
        let expected = 2.0 * (132.0 * 2f64.ln()).sqrt() + 32.0 * 3f64.sqrt() * 2.0 * 2f64.ln();
        assert!(rel(v, expected) < 1e-15);
        let a = paulin_expectation(&inputs(6, 10, 3.0, 2.0, 10.0, 1.0), 2.0, 0.5).unwrap();
        let b = paulin_expectation(&inputs(6, 10, 7.5, 5.0, 10.0, 1.0), 2.0, 0.5).unwrap();
        assert!(rel(b, 2.5 * a) < 1e-14);
        let c = paulin_expectation(&inputs(6, 20, 3.0, 2.0, 10.0, 1.0), 2.0, 0.5).unwrap();
        assert!(rel(a, 2.0 * c) < 1e-15);
        assert!(paulin_expectation(&inputs(1, 1, 1.0, 1.0, 1.0, 1.0), 1.0, 1.0).is_err());
        assert!(paulin_expectation(&inputs(3, 1, 1.0, 1.0, 1.0, 1.0), 0.0, 1.0).is_err());
    }

    #[test]
    fn delta_inverter_round_trips() {
        for n in [1usize, 2, 15] {
            for p in [1.0, 0.5, 1e-3] {
                let d = delta_for_probability(p, n).unwrap();
                assert!(rel(tail_probability(n, d), p) < 1e-12);
            }
        }
        assert!(delta_for_probability(0.0, 2).is_err());
        let d = default_delta(3);
        assert!(rel(tail_probability(3, d), 2.0 * (-d * d).exp()) < 1e-12);
    }

    #[test]
    fn report_clamps_and_flags_vacuous_tails() {
        let r = BoundReport::evaluate(&identity_inputs(3, 10), &ReportOptions { delta: Some(0.0), paulin: None }).unwrap();
        assert_eq!(r.tail_probability, 1.0);
        assert!(r.tail_probability_raw > 1.0);
        assert!(r.metadata.tail_vacuous);
        let r = BoundReport::evaluate(
            &identity_inputs(3, 10),
            &ReportOptions { delta: Some(10.0), paulin: Some(PaulinParams { l_bound: 3.0, entry_sigma: 1.0 }) },
        )
        .unwrap();
        assert!(!r.metadata.tail_vacuous);
        assert_eq!(r.tail_probability, r.tail_probability_raw);
        assert!(r.comparison_paulin.is_some());
        let json = serde_json::to_value(&r).unwrap();
        for key in [
            "expectation_bound",
            "tail_threshold_t",
            "tail_probability",
            "mean_shift_term",
            "concentration_term",
            "comparison_soloveychik",
            "comparison_paulin",
            "metadata",
        ] {
            assert!(json.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn inputs_from_model_examples() {
        let sigma = SpdMatrix::identity(4);
        let i = inputs_from_model(&ShapeModel::identity(16).unwrap(), &sigma, true).unwrap();
        assert_eq!((i.b_trace, i.b_frobenius, i.b_spectral, i.sigma_spectral), (16.0, 4.0, 1.0, 1.0));
        let i = inputs_from_model(&ShapeModel::all_ones(9).unwrap(), &sigma, true).unwrap();
        assert_eq!((i.b_trace, i.b_frobenius, i.b_spectral), (9.0, 9.0, 9.0));
        let t = ShapeModel::toeplitz(0.75, 60).unwrap();
        let numeric = inputs_from_model(&t, &sigma, false).unwrap();
        let analytic = inputs_from_model(&t, &sigma, true).unwrap();
        assert!(rel(analytic.b_spectral, 7.0) < 1e-15);
        assert!(numeric.b_spectral <= analytic.b_spectral);
        assert!(rel(numeric.b_frobenius, analytic.b_frobenius) < 1e-10);
        assert!(matches!(
            inputs_from_model(&ShapeModel::random_diagonal(0.0, 1.0, 1, 5).unwrap(), &sigma, true),
            Err(Error::NoAnalyticForm(_))
        ));
        let numeric = inputs_from_model(&ShapeModel::all_ones(12).unwrap(), &sigma, false).unwrap();
        assert!(rel(numeric.b_spectral, 12.0) < 1e-12);
        assert!(rel(numeric.b_frobenius, 12.0) < 1e-12);
    }

    #[test]
    fn inputs_reject_inconsistent_numeric_norms() {
        assert!(BoundInputs::new(2, 4, 1.0, 2.0, 4.0, 1.0, NormSource::NumericNorms).is_err());
        assert!(BoundInputs::new(2, 4, 5.0, 2.0, 4.0, 1.0, NormSource::NumericNorms).is_err());
        assert!(BoundInputs::new(2, 4, 1.0, -1.0, 4.0, 1.0, NormSource::AnalyticNorms).is_err());
        assert!(BoundInputs::new(0, 4, 1.0, 1.0, 4.0, 1.0, NormSource::AnalyticNorms).is_err());
        // Gershgorin upper bounds may exceed the Frobenius norm.
        assert!(BoundInputs::new(2, 2, 2.5f64.sqrt(), 3.0, 2.0, 1.0, NormSource::AnalyticNorms).is_ok());
    }

    #[test]
    fn structured_toeplitz_norms_match_dense() {
        for &theta in &[0.1, 0.5, 0.9] {
            for &m in &[1usize, 2, 3, 10, 60, 200] {
                let model = ShapeModel::toeplitz(theta, m).unwrap();
                let (trace, frob, spec) = numeric_b_norms(&model).unwrap();
                let b = model.materialize_b();
                assert_eq!(trace, m as f64);
                let dense_frob = linalg::frobenius_norm(&b);
                assert!((frob - dense_frob).abs() <= 1e-12 * dense_frob, "θ={theta} m={m}");
                let dense_spec = linalg::spectral_norm(&b, 1e-13, linalg::DEFAULT_MAX_ITER).unwrap();
                assert!((spec - dense_spec).abs() <= 1e-9 * dense_spec, "θ={theta} m={m}: {spec} vs {dense_spec}");
                if m <= linalg::ORACLE_MAX_DIM {
                    let top = linalg::eig_oracle(&b).unwrap()[0];
                    assert!((spec - top).abs() <= 1e-10 * top, "θ={theta} m={m}: {spec} vs {top}");
                }
            }
        }
    }
}
