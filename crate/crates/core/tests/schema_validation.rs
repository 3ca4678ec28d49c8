use std::f64::consts::PI;

use serde_json::Value;

use spectral_noise::cli::config::{McConfig, ProbeConfig, RenderConfig, ScanConfig, ThresholdConfig};
use spectral_noise::cli::{execute_with_threads, CommandConfig, ExperimentConfig};
use spectral_noise::spectra::Grid;

fn schema(name: &str) -> jsonschema::Validator {
    let path = format!("{}/schema/{name}", env!("CARGO_MANIFEST_DIR"));
    let value: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&value).unwrap()
}

fn small_configs() -> Vec<CommandConfig> {
    let fast_checkpoints: Vec<usize> = (6..=11).map(|j| (1usize << j) - 1).collect();
    let mut mc = McConfig::default();
    mc.plan.trials = 40;
    vec![
        CommandConfig::default_for("weyl").unwrap(),
        CommandConfig::default_for("modes").unwrap(),
        CommandConfig::default_for("sample").unwrap(),
        CommandConfig::Render(RenderConfig {
            n: 99,
            grid: Grid::sphere(16, 32),
            ..RenderConfig::figure_preset()
        }),
        CommandConfig::default_for("norms").unwrap(),
        CommandConfig::Threshold(ThresholdConfig {
            n_max: (1 << 14) - 1,
            ..ThresholdConfig::default()
        }),
        CommandConfig::default_for("hs").unwrap(),
        CommandConfig::Probe(ProbeConfig {
            checkpoints: fast_checkpoints.clone(),
            ..ProbeConfig::default()
        }),
        CommandConfig::Scan(ScanConfig {
            positions: vec![vec![PI, PI]],
            direction_count: 4,
            checkpoints: fast_checkpoints,
            trials: 2,
            ..ScanConfig::default()
        }),
        CommandConfig::Mc(mc),
    ]
}

#[test]
fn every_command_report_matches_the_published_schema() {
    let reports = schema("report.schema.json");
    let sidecars = schema("sidecar.schema.json");
    for params in small_configs() {
        let name = params.name();
        let exec = execute_with_threads(&ExperimentConfig::new(params), 1).unwrap();
        let value: Value = serde_json::from_str(&exec.report.to_json()).unwrap();
        let errors: Vec<String> = reports.iter_errors(&value).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{name}: {errors:?}");
        for (file, bytes) in &exec.files {
            if file.ends_with(".json") {
                let side: Value = serde_json::from_slice(bytes).unwrap();
                let errors: Vec<String> = sidecars.iter_errors(&side).map(|e| e.to_string()).collect();
                assert!(errors.is_empty(), "{file}: {errors:?}");
            } else if file.ends_with(".csv") {
                let text = std::str::from_utf8(bytes).unwrap();
                let width = text.lines().next().unwrap().split(',').count();
                assert!(width >= 2, "{file} header");
            }
        }
    }
}

#[test]
fn schema_rejects_inconsistent_exit_codes() {
    let reports = schema("report.schema.json");
    let exec = execute_with_threads(&ExperimentConfig::new(CommandConfig::default_for("hs").unwrap()), 1).unwrap();
    let mut value: Value = serde_json::from_str(&exec.report.to_json()).unwrap();
    value["exit_code"] = Value::from(2);
    assert!(!reports.is_valid(&value));
}
