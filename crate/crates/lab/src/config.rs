//! JSON experiment configuration.
//!
//! Frequencies are given in Hz and multiplied by `2 pi`; times are given in
//! nanoseconds. Everything is converted to rad/s and seconds when the
//! configuration is turned into model objects.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use zeno_core::distributions::IntervalDistribution;
use zeno_core::linalg::StateVector;
use zeno_core::spin::{build_spin_model, ghz_state, product_zero_state, MAX_FD_ORDER, MAX_SPINS};
use zeno_core::SpinModel;

use crate::ensemble::DEFAULT_SAMPLE_BUDGET;
use crate::error::{LabError, Result};
use crate::trajectory::TrajectoryMode;

pub const NS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Calibration {
    /// 2 pi x 5 kHz.
    Khz,
    /// 2 pi x 5 MHz.
    Mhz,
}

impl Calibration {
    pub fn omega_hz(self) -> f64 {
        match self {
            Self::Khz => 5e3,
            Self::Mhz => 5e6,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::Khz => "khz",
            Self::Mhz => "mhz",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphaPreset {
    #[serde(rename = "all_x")]
    AllX,
    #[serde(rename = "all_z")]
    AllZ,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Alphas {
    Preset(AlphaPreset),
    Explicit(Vec<[f64; 3]>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    ProductZero,
    Ghz,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub n: usize,
    pub omega_hz: f64,
    pub alphas: Alphas,
    pub state: InitialState,
}

impl ModelConfig {
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.omega_hz
    }

    /// Same model with a different number of spins.
    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn build(&self) -> Result<SpinModel> {
        let alphas = match &self.alphas {
            Alphas::Preset(AlphaPreset::AllX) => vec![[1.0, 0.0, 0.0]; self.n],
            Alphas::Preset(AlphaPreset::AllZ) => vec![[0.0, 0.0, 1.0]; self.n],
            Alphas::Explicit(a) => a.clone(),
        };
        Ok(build_spin_model(self.n, self.omega(), &alphas)?)
    }

    pub fn initial_state(&self) -> Result<StateVector> {
        Ok(match self.state {
            InitialState::ProductZero => product_zero_state(self.n)?,
            InitialState::Ghz => ghz_state(self.n)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum DistributionConfig {
    Uniform { mu1_ns: f64, mu2_ns: f64 },
    Dirac { mu_ns: f64 },
}

impl DistributionConfig {
    pub fn build(&self) -> Result<IntervalDistribution> {
        Ok(match *self {
            Self::Uniform { mu1_ns, mu2_ns } => IntervalDistribution::uniform(mu1_ns * NS, mu2_ns * NS)?,
            Self::Dirac { mu_ns } => IntervalDistribution::dirac(mu_ns * NS)?,
        })
    }

    /// `(mu1, mu2)` in seconds for a uniform density.
    pub fn uniform_bounds(&self) -> Result<(f64, f64)> {
        match *self {
            Self::Uniform { mu1_ns, mu2_ns } => Ok((mu1_ns * NS, mu2_ns * NS)),
            Self::Dirac { .. } => Err(LabError::Config(
                "this experiment needs a uniform distribution".into(),
            )),
        }
    }
}

/// `points` evenly spaced values from `start` to `stop` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        (0..self.points)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (self.points - 1) as f64)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceConfig {
    pub mu1_ns: Axis,
    pub mu2_ns: Axis,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingConfig {
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    /// Monte Carlo batches per point for the empirical column; zero skips it.
    #[serde(default)]
    pub batches: usize,
    /// Runs per batch, defaulting to the top-level `runs`.
    #[serde(default)]
    pub runs_per_batch: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimationConfig {
    pub batches: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LdConfig {
    pub m_values: Vec<usize>,
}

fn default_k() -> usize {
    8
}

fn default_budget() -> u64 {
    DEFAULT_SAMPLE_BUDGET
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub distribution: DistributionConfig,
    pub m: usize,
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_k")]
    pub k_moments: usize,
    #[serde(default)]
    pub mode: TrajectoryMode,
    #[serde(default = "default_budget")]
    pub sample_budget: u64,
    #[serde(default)]
    pub surface: Option<SurfaceConfig>,
    #[serde(default)]
    pub scaling: Option<ScalingConfig>,
    #[serde(default)]
    pub estimation: Option<EstimationConfig>,
    #[serde(default)]
    pub ld: Option<LdConfig>,
}

impl ExperimentConfig {
    /// Nine spins, all-x couplings, `|0..0>`, uniform waiting times on
    /// [10 ns, 60 ns], m = 5000, at the kHz calibration.
    pub fn reference() -> Self {
        Self {
            model: ModelConfig {
                n: 9,
                omega_hz: Calibration::Khz.omega_hz(),
                alphas: Alphas::Preset(AlphaPreset::AllX),
                state: InitialState::ProductZero,
            },
            distribution: DistributionConfig::Uniform {
                mu1_ns: 10.0,
                mu2_ns: 60.0,
            },
            m: 5000,
            runs: 10_000,
            seed: 20_240_917,
            k_moments: 8,
            mode: TrajectoryMode::Product,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
            surface: Some(SurfaceConfig {
                mu1_ns: Axis {
                    start: 0.0,
                    stop: 100.0,
                    points: 21,
                },
                mu2_ns: Axis {
                    start: 5.0,
                    stop: 100.0,
                    points: 20,
                },
            }),
            scaling: Some(ScalingConfig {
                n_values: (1..=9).collect(),
                m_values: vec![1000, 2000, 3000, 4000, 5000],
                batches: 0,
                runs_per_batch: None,
            }),
            estimation: Some(EstimationConfig { batches: 200 }),
            ld: Some(LdConfig {
                m_values: vec![100, 1000, 10_000],
            }),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn with_calibration(mut self, c: Calibration) -> Self {
        self.model.omega_hz = c.omega_hz();
        self
    }

    /// SHA-256 of the canonical JSON form, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serialises");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(LabError::Config(msg));
        let model = &self.model;
        if model.n == 0 || model.n > MAX_SPINS {
            return bad(format!("model.n must be in 1..={MAX_SPINS}, got {}", model.n));
        }
        if !(model.omega_hz > 0.0 && model.omega_hz.is_finite()) {
            return bad(format!("model.omega_hz must be positive, got {}", model.omega_hz));
        }
        if let Alphas::Explicit(a) = &model.alphas {
            if a.len() != model.n {
                return bad(format!("expected {} alpha vectors, got {}", model.n, a.len()));
            }
        }
        match self.distribution {
            DistributionConfig::Uniform { mu1_ns, mu2_ns } => {
                if !(mu1_ns >= 0.0 && mu2_ns > mu1_ns && mu2_ns.is_finite()) {
                    return bad(format!("need 0 <= mu1_ns < mu2_ns, got ({mu1_ns}, {mu2_ns})"));
                }
            }
            DistributionConfig::Dirac { mu_ns } => {
                if !(mu_ns >= 0.0 && mu_ns.is_finite()) {
                    return bad(format!("mu_ns must be non-negative, got {mu_ns}"));
                }
            }
        }
        if self.m == 0 || self.runs == 0 {
            return bad("m and runs must be at least 1".into());
        }
        if self.k_moments == 0 || self.k_moments > MAX_FD_ORDER {
            return bad(format!("k_moments must be in 1..={MAX_FD_ORDER}"));
        }
        if let Some(s) = &self.surface {
            for (name, axis) in [("mu1_ns", &s.mu1_ns), ("mu2_ns", &s.mu2_ns)] {
                if axis.points == 0 || !(axis.start >= 0.0) || !(axis.stop >= axis.start) {
                    return bad(format!("surface.{name} must have points >= 1 and 0 <= start <= stop"));
                }
            }
        }
        if let Some(s) = &self.scaling {
            if s.n_values.is_empty() || s.m_values.is_empty() {
                return bad("scaling sweeps must not be empty".into());
            }
            if s.n_values.iter().any(|&n| n == 0 || n > MAX_SPINS) || s.m_values.contains(&0) {
                return bad("scaling values must be positive and N at most 12".into());
            }
            if s.runs_per_batch == Some(0) {
                return bad("scaling.runs_per_batch must be at least 1".into());
            }
        }
        if let Some(e) = &self.estimation {
            if e.batches < 2 {
                return bad("estimation.batches must be at least 2".into());
            }
        }
        if let Some(l) = &self.ld {
            if l.m_values.is_empty() || l.m_values.windows(2).any(|w| w[1] <= w[0]) || l.m_values[0] == 0 {
                return bad("ld.m_values must be positive and strictly ascending".into());
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "model": {"n": 3, "omega_hz": 5000.0, "alphas": "all_x", "state": "product_zero"},
        "distribution": {"type": "uniform", "mu1_ns": 10, "mu2_ns": 60},
        "m": 100,
        "runs": 50
    }"#;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg = ExperimentConfig::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.k_moments, 8);
        assert_eq!(cfg.mode, TrajectoryMode::Product);
        assert_eq!(cfg.seed, 0);
        assert!((cfg.model.omega() - 2.0 * PI * 5e3).abs() < 1e-9);
        let (a, b) = cfg.distribution.uniform_bounds().unwrap();
        assert!((a - 1e-8).abs() < 1e-20 && (b - 6e-8).abs() < 1e-20);
    }

    #[test]
    fn explicit_alphas_and_dirac() {
        let text = r#"{
            "model": {"n": 2, "omega_hz": 1.0, "alphas": [[1,0,0],[0,1,1]], "state": "ghz"},
            "distribution": {"type": "dirac", "mu_ns": 30},
            "m": 10, "runs": 10, "k_moments": 4, "mode": "sequential"
        }"#;
        let cfg = ExperimentConfig::from_json(text).unwrap();
        assert_eq!(cfg.mode, TrajectoryMode::Sequential);
        let model = cfg.model.build().unwrap();
        assert!((model.alphas()[1][2] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(cfg.model.initial_state().unwrap().dim(), 4);
        assert!(cfg.distribution.uniform_bounds().is_err());
    }

    #[test]
    fn invalid_configs() {
        let swap = MINIMAL.replace("\"mu1_ns\": 10, \"mu2_ns\": 60", "\"mu1_ns\": 60, \"mu2_ns\": 10");
        assert!(ExperimentConfig::from_json(&swap).is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"m\": 100", "\"m\": 0")).is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"n\": 3", "\"n\": 13")).is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("all_x", "all_y")).is_err());
        assert!(ExperimentConfig::from_json(&MINIMAL.replace("\"runs\": 50", "\"runs\": 50, \"bogus\": 1")).is_err());
    }

    #[test]
    fn shipped_configs_load() {
        let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let reference = ExperimentConfig::load(&dir.join("khz_reference.json")).unwrap();
        assert_eq!(reference, ExperimentConfig::reference());
        let ghz = ExperimentConfig::load(&dir.join("ghz_sequential.json")).unwrap();
        assert_eq!((ghz.mode, ghz.k_moments), (TrajectoryMode::Sequential, 8));
    }

    #[test]
    fn reference_round_trips_and_hash_tracks_content() {
        let cfg = ExperimentConfig::reference();
        cfg.validate().unwrap();
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ExperimentConfig::from_json(&text).unwrap();
        assert_eq!(back.digest(), cfg.digest());
        let mhz = cfg.clone().with_calibration(Calibration::Mhz);
        assert_ne!(mhz.digest(), cfg.digest());
        assert_eq!(mhz.model.omega_hz, 5e6);
    }

    #[test]
    fn axis_values() {
        let a = Axis { start: 5.0, stop: 100.0, points: 20 };
        let v = a.values();
        assert_eq!(v.len(), 20);
        assert_eq!(v[0], 5.0);
        assert_eq!(v[19], 100.0);
        assert_eq!(Axis { start: 3.0, stop: 9.0, points: 1 }.values(), vec![3.0]);
    }
}
