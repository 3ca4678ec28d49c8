use std::fs;
use std::path::Path;

use serde_json::Value;

use spectral_noise::cli::config::{
    HsConfig, McConfig, NormsConfig, RenderConfig, SampleConfig, ThresholdConfig, WeylConfig,
};
use spectral_noise::cli::{execute_with_threads, run, Cli, CommandConfig, ExperimentConfig};
use spectral_noise::spectra::{Grid, ManifoldSpec};

fn write_config(dir: &Path, params: CommandConfig) -> String {
    let path = dir.join("config.json");
    fs::write(&path, ExperimentConfig::new(params).to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

fn invoke(command: &str, config: Option<&str>, out: &Path, extra: &[&str]) -> i32 {
    let mut args = vec!["spectral-noise".to_string(), command.to_string(), "--out".into()];
    args.push(out.to_string_lossy().into_owned());
    if let Some(c) = config {
        args.push("--config".into());
        args.push(c.into());
    }
    args.extend(extra.iter().map(|s| s.to_string()));
    run(args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn hs_convergent_multiplier_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke("hs", None, dir.path(), &[]), 0);
    let r = report(dir.path());
    assert_eq!(r["result"]["growth"]["verdict"]["kind"], "converges");
    let csv = fs::read_to_string(dir.path().join("hs.csv")).unwrap();
    assert!(csv.starts_with("radius,partial_sum\n"));
}

#[test]
fn report_envelope_is_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke("sample", None, dir.path(), &["--seed", "42"]), 0);
    let r = report(dir.path());
    for key in [
        "command",
        "schema_version",
        "version",
        "config_hash",
        "seed",
        "status",
        "exit_code",
        "config",
        "result",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["seed"], 42);
    assert_eq!(r["config"]["params"]["seed"], 42);
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);

    let again = tempfile::tempdir().unwrap();
    let cfg = again.path().join("replay.json");
    fs::write(&cfg, serde_json::to_string(&r["config"]).unwrap()).unwrap();
    assert_eq!(invoke("sample", Some(cfg.to_str().unwrap()), again.path(), &[]), 0);
    for name in ["report.json", "coefficients.csv"] {
        assert_eq!(
            fs::read(dir.path().join(name)).unwrap(),
            fs::read(again.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn mc_with_too_few_trials_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut mc = McConfig::default();
    mc.plan.trials = 10;
    let cfg = write_config(dir.path(), CommandConfig::Mc(mc));
    assert_eq!(invoke("mc", Some(&cfg), dir.path(), &[]), 1);
    assert!(!dir.path().join("report.json").exists());
}

#[test]
fn threshold_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke("threshold", None, dir.path(), &[]), 0);
    let r = report(dir.path());
    assert!(r["result"]["report"]["estimate"]["s_star_hat"].as_f64().unwrap().abs() <= 0.1 + 1e-9);

    let unbracketed = ThresholdConfig {
        s_grid: vec![-0.5, -0.4, -0.3],
        n_max: (1 << 14) - 1,
        ..ThresholdConfig::default()
    };
    let cfg = write_config(dir.path(), CommandConfig::Threshold(unbracketed));
    assert_eq!(invoke("threshold", Some(&cfg), dir.path(), &[]), 2);
    assert_eq!(report(dir.path())["exit_code"], 2);
}

#[test]
fn weyl_band_controls_the_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(invoke("weyl", None, dir.path(), &[]), 0);
    let strict = WeylConfig {
        band: Some([1.5, 2.0]),
        ..WeylConfig::default()
    };
    let cfg = write_config(dir.path(), CommandConfig::Weyl(strict));
    assert_eq!(invoke("weyl", Some(&cfg), dir.path(), &[]), 1);
}

#[test]
fn bad_configs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CommandConfig::Hs(HsConfig::default()));
    assert_eq!(invoke("weyl", Some(&cfg), dir.path(), &[]), 1);
    let path = dir.path().join("bad.json");
    fs::write(
        &path,
        r#"{"schema_version": 1, "params": {"command": "hs", "colour": 3}}"#,
    )
    .unwrap();
    assert_eq!(invoke("hs", Some(path.to_str().unwrap()), dir.path(), &[]), 1);
    assert_eq!(invoke("hs", None, dir.path(), &["--threads", "0"]), 1);
}

#[test]
fn render_writes_images_and_sidecars() {
    let dir = tempfile::tempdir().unwrap();
    let small = RenderConfig {
        n: 99,
        grid: Grid::sphere(16, 32),
        ..RenderConfig::figure_preset()
    };
    let cfg = write_config(dir.path(), CommandConfig::Render(small.clone()));
    assert_eq!(invoke("render", Some(&cfg), dir.path(), &[]), 0);
    for named in &small.schedules {
        let pgm = fs::read(dir.path().join(format!("render_{}.pgm", named.name))).unwrap();
        assert!(pgm.starts_with(b"P5\n32 16\n65535\n"));
        assert_eq!(pgm.len(), b"P5\n32 16\n65535\n".len() + 2 * 32 * 16);
        let side: Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(format!("render_{}.json", named.name))).unwrap())
                .unwrap();
        assert!(side["min"].as_f64().unwrap() <= side["max"].as_f64().unwrap());
        assert_eq!(side["seed"], small.seed);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let configs = vec![
        CommandConfig::Sample(SampleConfig {
            grid: Some(Grid::torus(vec![64])),
            ..SampleConfig::default()
        }),
        CommandConfig::Norms(NormsConfig {
            manifold: ManifoldSpec::Sphere2,
            checkpoints: (4..=12).map(|j| (1usize << j) - 1).collect(),
            ..NormsConfig::default()
        }),
        CommandConfig::Hs(HsConfig::default()),
        CommandConfig::Mc(McConfig {
            plan: {
                let mut p = McConfig::default().plan;
                p.trials = 200;
                p
            },
            ..McConfig::default()
        }),
    ];
    for params in configs {
        let cfg = ExperimentConfig::new(params);
        let one = execute_with_threads(&cfg, 1).unwrap();
        let eight = execute_with_threads(&cfg, 8).unwrap();
        assert_eq!(one.report.to_json(), eight.report.to_json(), "{}", cfg.params.name());
        assert_eq!(one.files, eight.files, "{}", cfg.params.name());
    }
}

#[test]
fn threads_flag_falls_back_to_the_environment() {
    use clap::Parser;
    std::env::set_var("SPECTRAL_NOISE_THREADS", "3");
    let from_env = Cli::try_parse_from(["spectral-noise", "modes"]).unwrap();
    let explicit = Cli::try_parse_from(["spectral-noise", "modes", "--threads", "5"]).unwrap();
    std::env::remove_var("SPECTRAL_NOISE_THREADS");
    assert_eq!(from_env.threads, Some(3));
    assert_eq!(explicit.threads, Some(5));
}
