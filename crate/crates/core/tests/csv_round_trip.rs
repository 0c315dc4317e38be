use corrcov::experiments::{ExperimentKind, ExperimentResult, LogErrorRecord, MinSampleRecord};
use corrcov::io::{csv_rows, read_csv, write_csv};
use proptest::prelude::*;

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        -1e3f64..1e3,
        Just(0.0),
        Just(-0.0),
        Just(f64::MIN_POSITIVE),
        Just(5e-324),
    ]
}

fn model_id() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("identity".to_string()),
        (0.01f64..0.99).prop_map(|t| format!("toeplitz:{t}")),
        (finite(), 0.0f64..3.0).prop_map(|(a, b)| format!("random_diag:{a},{b}")),
    ]
}

fn result() -> impl Strategy<Value = ExperimentResult> {
    let min = prop::collection::vec(
        (model_id(), 1usize..100, finite(), finite(), 0usize..50).prop_map(|(id, n, mean, se, c)| MinSampleRecord {
            model_id: id,
            n,
            mean_min_m: mean,
            stderr_min_m: se,
            trials: 50,
            censored: c,
        }),
        0..6,
    );
    let log = prop::collection::vec(
        (model_id(), 1usize..2000, finite(), finite(), finite()).prop_map(|(id, m, mean, se, b)| LogErrorRecord {
            model_id: id,
            n: 15,
            m,
            mean_spectral_error: mean,
            stderr_spectral_error: se,
            log10_mean_error: mean.abs().log10(),
            theoretical_bound: b,
            theoretical_bound_analytic: None,
        }),
        0..6,
    );
    (min, log).prop_map(|(min_sample_records, log_error_records)| ExperimentResult {
        name: "prop".into(),
        experiment: ExperimentKind::MinSampleVsDim,
        master_seed: 0,
        trials: 50,
        min_sample_records,
        log_error_records,
        fits: Vec::new(),
        warnings: Vec::new(),
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_preserves_every_bit(r in result()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_csv(&r, &path).unwrap();
        let back = read_csv(&path).unwrap();
        let expected = csv_rows(&r);
        prop_assert_eq!(back.len(), expected.len());
        for (a, b) in back.iter().zip(&expected) {
            prop_assert_eq!(&a.model, &b.model);
            prop_assert_eq!(a.x, b.x);
            prop_assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            prop_assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
            prop_assert_eq!(a.theoretical.map(f64::to_bits), b.theoretical.map(f64::to_bits));
            prop_assert_eq!(a.censored, b.censored);
        }
    }
}
