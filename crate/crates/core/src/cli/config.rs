//! Experiment configuration files.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hsdiag::OperatorSpec;
use crate::microlocal::{ScanTemplate, DEFAULT_APERTURE, DEFAULT_HALFWIDTH, DEFAULT_R0, DEFAULT_R1};
use crate::noise::DampingSchedule;
use crate::probab::TrialPlan;
use crate::spectra::{Grid, ManifoldSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub params: CommandConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum CommandConfig {
    Weyl(WeylConfig),
    Modes(ModesConfig),
    Sample(SampleConfig),
    Render(RenderConfig),
    Norms(NormsConfig),
    Threshold(ThresholdConfig),
    Hs(HsConfig),
    Probe(ProbeConfig),
    Scan(ScanConfig),
    Mc(McConfig),
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Weyl(_) => "weyl",
            CommandConfig::Modes(_) => "modes",
            CommandConfig::Sample(_) => "sample",
            CommandConfig::Render(_) => "render",
            CommandConfig::Norms(_) => "norms",
            CommandConfig::Threshold(_) => "threshold",
            CommandConfig::Hs(_) => "hs",
            CommandConfig::Probe(_) => "probe",
            CommandConfig::Scan(_) => "scan",
            CommandConfig::Mc(_) => "mc",
        }
    }

    /// Default parameters for a subcommand name.
    pub fn default_for(name: &str) -> Result<Self> {
        Ok(match name {
            "weyl" => CommandConfig::Weyl(WeylConfig::default()),
            "modes" => CommandConfig::Modes(ModesConfig::default()),
            "sample" => CommandConfig::Sample(SampleConfig::default()),
            "render" => CommandConfig::Render(RenderConfig::default()),
            "norms" => CommandConfig::Norms(NormsConfig::default()),
            "threshold" => CommandConfig::Threshold(ThresholdConfig::default()),
            "hs" => CommandConfig::Hs(HsConfig::default()),
            "probe" => CommandConfig::Probe(ProbeConfig::default()),
            "scan" => CommandConfig::Scan(ScanConfig::default()),
            "mc" => CommandConfig::Mc(McConfig::default()),
            other => return Err(Error::Config(format!("unknown command {other}"))),
        })
    }

    /// Replaces the configured seed, if the command has one.
    pub fn set_seed(&mut self, seed: u64) {
        match self {
            CommandConfig::Sample(c) => c.seed = seed,
            CommandConfig::Render(c) => c.seed = seed,
            CommandConfig::Norms(c) => c.seed = seed,
            CommandConfig::Threshold(c) => c.seed = seed,
            CommandConfig::Probe(c) => c.seed = seed,
            CommandConfig::Scan(c) => c.seed = seed,
            CommandConfig::Mc(c) => c.plan.base_seed = seed,
            CommandConfig::Weyl(_) | CommandConfig::Modes(_) | CommandConfig::Hs(_) => {}
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self {
            CommandConfig::Sample(c) => Some(c.seed),
            CommandConfig::Render(c) => Some(c.seed),
            CommandConfig::Norms(c) => Some(c.seed),
            CommandConfig::Threshold(c) => Some(c.seed),
            CommandConfig::Probe(c) => Some(c.seed),
            CommandConfig::Scan(c) => Some(c.seed),
            CommandConfig::Mc(c) => Some(c.plan.base_seed),
            CommandConfig::Weyl(_) | CommandConfig::Modes(_) | CommandConfig::Hs(_) => None,
        }
    }
}

impl ExperimentConfig {
    pub fn new(params: CommandConfig) -> Self {
        ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            params,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema_version {} is not supported (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("configs serialize")
    }
}

fn circle() -> ManifoldSpec {
    ManifoldSpec::Circle
}

fn t2() -> ManifoldSpec {
    ManifoldSpec::Torus { dim: 2 }
}

fn half_power() -> DampingSchedule {
    DampingSchedule::power(1.0, 0.5).expect("valid schedule")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeylConfig {
    pub manifold: ManifoldSpec,
    pub lambdas: Vec<f64>,
    /// Accepted range of `N(λ)/prediction`; `None` only tabulates.
    pub band: Option<[f64; 2]>,
}

impl Default for WeylConfig {
    fn default() -> Self {
        WeylConfig {
            manifold: t2(),
            lambdas: vec![1e2, 1e3, 1e4],
            band: Some([0.98, 1.02]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModesConfig {
    pub manifold: ManifoldSpec,
    pub count: usize,
}

impl Default for ModesConfig {
    fn default() -> Self {
        ModesConfig {
            manifold: ManifoldSpec::Sphere2,
            count: 25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleConfig {
    pub manifold: ManifoldSpec,
    pub schedule: DampingSchedule,
    pub n: usize,
    pub seed: u64,
    /// Also tabulate the field on this grid.
    pub grid: Option<Grid>,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            manifold: circle(),
            schedule: half_power(),
            n: 256,
            seed: 0,
            grid: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedSchedule {
    pub name: String,
    pub schedule: DampingSchedule,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderConfig {
    pub manifold: ManifoldSpec,
    pub schedules: Vec<NamedSchedule>,
    pub n: usize,
    pub seed: u64,
    pub grid: Grid,
    /// Allowed relative gap between grid and coefficient L² norms.
    pub parseval_tolerance: f64,
}

impl RenderConfig {
    /// Four sphere renders at `ℓ ≤ 40`: power laws with ς = 1/2, 1, 2/3 and white noise.
    pub fn figure_preset() -> Self {
        let power = |v: f64| DampingSchedule::power(1.0, v).expect("valid schedule");
        RenderConfig {
            manifold: ManifoldSpec::Sphere2,
            schedules: vec![
                NamedSchedule {
                    name: "power_0.5".into(),
                    schedule: power(0.5),
                },
                NamedSchedule {
                    name: "power_1".into(),
                    schedule: power(1.0),
                },
                NamedSchedule {
                    name: "power_0.667".into(),
                    schedule: power(2.0 / 3.0),
                },
                NamedSchedule {
                    name: "white".into(),
                    schedule: DampingSchedule::white(),
                },
            ],
            n: 41 * 41 - 1,
            seed: 0,
            grid: Grid::sphere(256, 512),
            parseval_tolerance: 0.01,
        }
    }
}

impl Default for RenderConfig {
    fn default() -> Self {
        Self::figure_preset()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormsConfig {
    pub manifold: ManifoldSpec,
    pub schedule: DampingSchedule,
    pub s_values: Vec<f64>,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        NormsConfig {
            manifold: circle(),
            schedule: half_power(),
            s_values: vec![-0.5, 0.0, 0.5],
            seed: 0,
            checkpoints: (4..=16).map(|j| (1usize << j) - 1).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThresholdConfig {
    pub manifold: ManifoldSpec,
    pub schedule: DampingSchedule,
    pub s_grid: Vec<f64>,
    pub n_max: usize,
    pub trials: usize,
    pub seed: u64,
    /// Value the estimate is compared with; defaults to `d(ς - 1/2)`.
    pub expected: Option<f64>,
    pub tolerance: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        ThresholdConfig {
            manifold: circle(),
            schedule: half_power(),
            s_grid: vec![-0.3, -0.2, -0.1, 0.0, 0.1, 0.2],
            n_max: (1 << 18) - 1,
            trials: 8,
            seed: 0,
            expected: None,
            tolerance: 0.1 + 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadiusLadder {
    pub base: f64,
    pub ratio: f64,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedVerdict {
    Converges,
    Diverges,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HsConfig {
    pub manifold: ManifoldSpec,
    pub operator: OperatorSpec,
    /// Weights the sum by `σ_n²` when present.
    pub schedule: Option<DampingSchedule>,
    pub radii: RadiusLadder,
    /// Defaults to the order-based prediction.
    pub expect: Option<ExpectedVerdict>,
}

impl Default for HsConfig {
    fn default() -> Self {
        HsConfig {
            manifold: t2(),
            operator: OperatorSpec::multiplier(-1.5),
            schedule: None,
            radii: RadiusLadder {
                base: 8.0,
                ratio: 2.0,
                count: 7,
            },
            expect: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConfig {
    pub x0: Vec<f64>,
    #[serde(default = "default_halfwidth")]
    pub halfwidth: f64,
    /// `None` gives an isotropic cutoff.
    pub direction: Option<Vec<f64>>,
    #[serde(default = "default_aperture")]
    pub aperture: f64,
    #[serde(default = "default_r0")]
    pub r0: f64,
    #[serde(default = "default_r1")]
    pub r1: f64,
}

fn default_halfwidth() -> f64 {
    DEFAULT_HALFWIDTH
}
fn default_aperture() -> f64 {
    DEFAULT_APERTURE
}
fn default_r0() -> f64 {
    DEFAULT_R0
}
fn default_r1() -> f64 {
    DEFAULT_R1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeConfig {
    pub manifold: ManifoldSpec,
    pub schedule: DampingSchedule,
    pub cutoff: CutoffConfig,
    pub s: f64,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            manifold: t2(),
            schedule: half_power(),
            cutoff: CutoffConfig {
                x0: vec![std::f64::consts::PI, std::f64::consts::PI],
                halfwidth: DEFAULT_HALFWIDTH,
                direction: Some(vec![1.0, 0.0]),
                aperture: DEFAULT_APERTURE,
                r0: DEFAULT_R0,
                r1: DEFAULT_R1,
            },
            s: 0.5,
            seed: 0,
            checkpoints: (10..=16).map(|j| (1usize << j) - 1).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanConfig {
    pub manifold: ManifoldSpec,
    pub schedule: DampingSchedule,
    pub positions: Vec<Vec<f64>>,
    /// Explicit directions; when empty, `direction_count` evenly spaced planar directions.
    pub directions: Vec<Vec<f64>>,
    pub direction_count: usize,
    pub s_values: Vec<f64>,
    pub seed: u64,
    pub checkpoints: Vec<usize>,
    pub trials: usize,
    pub template: ScanTemplate,
    pub max_spread: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        use std::f64::consts::PI;
        let q = [PI / 2.0, 3.0 * PI / 2.0];
        ScanConfig {
            manifold: t2(),
            schedule: half_power(),
            positions: vec![vec![q[0], q[0]], vec![q[1], q[0]], vec![q[0], q[1]], vec![q[1], q[1]]],
            directions: Vec::new(),
            direction_count: 8,
            s_values: vec![0.0, -0.3],
            seed: 0,
            checkpoints: (10..=17).map(|j| (1usize << j) - 1).collect(),
            trials: 20,
            template: ScanTemplate::default(),
            max_spread: 0.1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum McCheck {
    EnergyIdentity {
        s: f64,
    },
    KahaneKhintchine {
        p: f64,
    },
    PaleyZygmund {
        thetas: Vec<f64>,
    },
    /// Radii given directly, or as quantiles of the final statistic.
    LevyMaximal {
        #[serde(default)]
        radii: Vec<f64>,
        #[serde(default)]
        quantiles: Vec<f64>,
    },
    CauchyInProbability {
        s: f64,
        delta: f64,
    },
    Symmetrization,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McConfig {
    pub plan: TrialPlan,
    pub checks: Vec<McCheck>,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            plan: TrialPlan::new(DampingSchedule::white(), circle(), 200, 2000, 0),
            checks: vec![
                McCheck::PaleyZygmund {
                    thetas: vec![0.0, 0.25, 0.5, 0.75, 1.0],
                },
                McCheck::LevyMaximal {
                    radii: Vec::new(),
                    quantiles: vec![0.25, 0.5, 0.75],
                },
                McCheck::KahaneKhintchine { p: 1.0 },
                McCheck::KahaneKhintchine { p: 4.0 },
                McCheck::Symmetrization,
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NAMES: [&str; 10] = [
        "weyl",
        "modes",
        "sample",
        "render",
        "norms",
        "threshold",
        "hs",
        "probe",
        "scan",
        "mc",
    ];

    #[test]
    fn defaults_roundtrip() {
        for name in NAMES {
            let cfg = ExperimentConfig::new(CommandConfig::default_for(name).unwrap());
            assert_eq!(cfg.params.name(), name);
            let back = ExperimentConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(back, cfg);
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad =
            r#"{"schema_version":1,"params":{"command":"modes","manifold":{"kind":"sphere2"},"count":3,"extra":1}}"#;
        assert!(matches!(ExperimentConfig::from_json(bad), Err(Error::Config(_))));
        let bad = r#"{"schema_version":1,"params":{"command":"modes"},"other":true}"#;
        assert!(ExperimentConfig::from_json(bad).is_err());
        let wrong_version = r#"{"schema_version":7,"params":{"command":"modes"}}"#;
        assert!(ExperimentConfig::from_json(wrong_version).is_err());
    }

    #[test]
    fn partial_configs_take_defaults() {
        let text = r#"{"schema_version":1,"params":{"command":"modes","count":7}}"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(
            cfg.params,
            CommandConfig::Modes(ModesConfig {
                count: 7,
                ..ModesConfig::default()
            })
        );
    }
}
