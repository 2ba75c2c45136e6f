//! TOML experiment files.
//!
//! Every table is optional; missing keys take the defaults below.
//!
//! ```toml
//! [radar]
//! n_angles = 16          # N
//! n_freqs = 16           # M
//! f0 = 10e9              # Hz
//! bandwidth = 500e6      # Hz, split into M steps
//! # theta_span = 0.047   # rad; omitted means square resolution cells
//!
//! [scene]
//! preset = "quadcopter"  # or "none"
//! [[scene.scatterers]]   # appended to the preset
//! x = 0.3
//! y = -0.2
//! sigma = 1.0
//!
//! [solver]               # FRAND settings
//! max_iters = 30
//!
//! [lambda]
//! mode = "noise"         # "noise" scales with the noise level, "fixed" uses solver.lambda
//! calibration = 0.0625   # omitted means 1/sqrt(NM)
//!
//! [baselines]
//! model_order = 3
//!
//! [experiment]
//! methods = ["frand", "sl0"]
//! snr_db = [-10.0, 0.0, 10.0]   # inf means noiseless
//! samples = [79]
//! trials = 10
//! base_seed = 1
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::BaselineConfig;
use crate::error::{Error, Result};
use crate::frand::SolverConfig;
use crate::harness::Method;
use crate::model::{RadarParams, Scatterer, Scene, REFERENCE_BANDWIDTH, REFERENCE_F0};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadarSpec {
    pub n_angles: usize,
    pub n_freqs: usize,
    pub f0: f64,
    pub bandwidth: f64,
    pub theta_span: Option<f64>,
}

impl Default for RadarSpec {
    fn default() -> Self {
        Self { n_angles: 16, n_freqs: 16, f0: REFERENCE_F0, bandwidth: REFERENCE_BANDWIDTH, theta_span: None }
    }
}

impl RadarSpec {
    pub fn params(&self) -> Result<RadarParams> {
        match self.theta_span {
            None => RadarParams::square_cells(self.n_angles, self.n_freqs, self.f0, self.bandwidth),
            Some(span) => {
                RadarParams::new(self.f0, self.bandwidth / self.n_freqs.max(1) as f64, self.n_freqs, self.n_angles, span)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenePreset {
    #[default]
    Quadcopter,
    None,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneSpec {
    pub preset: ScenePreset,
    pub scatterers: Vec<Scatterer>,
}

impl SceneSpec {
    pub fn scene(&self) -> Result<Scene> {
        let base = match self.preset {
            ScenePreset::Quadcopter => Scene::quadcopter(),
            ScenePreset::None => Scene::empty(),
        };
        Ok(base.union(&Scene::new(self.scatterers.clone())?))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LambdaMode {
    #[default]
    Noise,
    Fixed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LambdaSpec {
    pub mode: LambdaMode,
    pub calibration: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSpec {
    pub methods: Vec<Method>,
    pub snr_db: Vec<f64>,
    pub samples: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads for trials; 0 uses all cores.
    pub workers: usize,
    /// Fill the `seconds` column of sweep rows.
    pub timing: bool,
    pub bench_repetitions: usize,
    /// Zero-padding factor for images used in metrics and rendering.
    pub zero_pad: usize,
    pub output_dir: Option<PathBuf>,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            methods: vec![Method::Frand],
            snr_db: vec![10.0],
            samples: vec![79],
            trials: 1,
            base_seed: 0,
            workers: 0,
            timing: false,
            bench_repetitions: 5,
            zero_pad: 4,
            output_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub radar: RadarSpec,
    pub scene: SceneSpec,
    pub solver: SolverConfig,
    pub lambda: LambdaSpec,
    pub baselines: BaselineConfig,
    pub experiment: ExperimentSpec,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            radar: RadarSpec::default(),
            scene: SceneSpec::default(),
            solver: SolverConfig { max_iters: 30, ..SolverConfig::default() },
            lambda: LambdaSpec::default(),
            baselines: BaselineConfig::default(),
            experiment: ExperimentSpec::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        let params = self.radar.params()?;
        self.scene.scene()?;
        if self.lambda.mode == LambdaMode::Fixed {
            self.solver.validate()?;
        } else {
            SolverConfig { lambda: 1.0, ..self.solver.clone() }.validate()?;
        }
        if let Some(c) = self.lambda.calibration {
            if !(c > 0.0 && c.is_finite()) {
                return bad(format!("lambda.calibration must be positive, got {c}"));
            }
        }
        let e = &self.experiment;
        if e.methods.is_empty() || e.snr_db.is_empty() || e.samples.is_empty() {
            return bad("methods, snr_db and samples must be non-empty".into());
        }
        if e.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        if e.bench_repetitions < 5 {
            return bad(format!("bench_repetitions must be at least 5, got {}", e.bench_repetitions));
        }
        if e.zero_pad == 0 {
            return bad("zero_pad must be at least 1".into());
        }
        if let Some(s) = e.snr_db.iter().find(|s| s.is_nan() || **s == f64::NEG_INFINITY) {
            return bad(format!("invalid SNR {s}"));
        }
        let nm = params.nm();
        if let Some(&k) = e.samples.iter().find(|&&k| k == 0 || k > nm) {
            return bad(format!("samples must lie in 1..={nm}, got {k}"));
        }
        for &m in &e.methods {
            if let Some(b) = m.baseline() {
                self.baselines.validate(b)?;
            }
        }
        Ok(())
    }
}
