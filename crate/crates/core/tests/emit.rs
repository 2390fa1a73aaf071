use std::fs;

use ucmarket_core::analytics::{emit, summarize, ARTIFACT_FILES};
use ucmarket_core::learning::{run_simulation, SimConfig};
use ucmarket_core::market_data::{illustrative_case, IllustrativeScenario};
use ucmarket_core::pricing::PricingModel;
use ucmarket_core::uc::HighsBackend;

#[test]
fn emitted_artifacts_are_complete_and_reproducible() {
    let case = illustrative_case(IllustrativeScenario::T1D1);
    let config = SimConfig {
        iterations: 300,
        seed: 5,
        pricing_model: PricingModel::Fcp,
        ..SimConfig::default()
    };
    let backend = HighsBackend::default();
    let log = run_simulation(&case, &config, &backend, None).unwrap();
    let summary = summarize(&log, &case, 150);

    let first = tempfile::tempdir().unwrap();
    let second = tempfile::tempdir().unwrap();
    let written = emit(&summary, &log, &case, first.path()).unwrap();
    assert_eq!(written.len(), ARTIFACT_FILES.len());
    let again = run_simulation(&case, &config, &backend, None).unwrap();
    emit(&summarize(&again, &case, 150), &again, &case, second.path()).unwrap();
    for name in ARTIFACT_FILES {
        let a = fs::read(first.path().join(name)).unwrap();
        let b = fs::read(second.path().join(name)).unwrap();
        assert!(!a.is_empty(), "{name} is empty");
        assert_eq!(a, b, "{name} differs between identical runs");
    }

    let strategies = fs::read_to_string(first.path().join("strategies.csv")).unwrap();
    let mut lines = strategies.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 1 + case.generators.len());
    assert_eq!(lines.count(), config.iterations);

    let mut reader = csv::Reader::from_path(first.path().join("profit_duration.csv")).unwrap();
    let competitive: Vec<f64> = reader
        .records()
        .map(|r| r.unwrap()[3].parse::<f64>().unwrap())
        .collect();
    assert_eq!(competitive.len(), 15);
    assert!(competitive.windows(2).all(|w| w[0] >= w[1]), "{competitive:?}");

    let mut reader = csv::Reader::from_path(first.path().join("market_share_count.csv")).unwrap();
    for record in reader.records() {
        let r = record.unwrap();
        let total: f64 = (1..4).map(|i| r[i].parse::<f64>().unwrap()).sum();
        assert!((total - 100.0).abs() < 1e-9);
    }

    let svg = fs::read_to_string(first.path().join("prices.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}
