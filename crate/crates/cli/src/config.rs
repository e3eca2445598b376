//! Experiment configuration (TOML).

use serde::Deserialize;

use crate::registry;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unknown example '{0}'")]
    UnknownExample(String),
    #[error("{0}")]
    Invalid(String),
}

pub fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: Option<u64>,
    pub system: Option<SystemSpec>,
    pub controller: Option<ControllerSpec>,
    pub integrator: Option<IntegratorSpec>,
    pub partition: Option<PartitionSpec>,
    pub simulate: Option<SimulateSpec>,
    pub synthesize: Option<SynthesizeSpec>,
    pub check_lie: Option<CheckLieSpec>,
    pub patchwork: Option<PatchworkSpec>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum SystemKind {
    /// `ẋ = A(x)x + B(x)u`.
    #[default]
    StateLinear,
    /// `ẋ = f(x) + g(x)u`, scalar input.
    Affine,
    /// `ẋ = F(x, y)`, `ẏ = u`; the last variable is `y`.
    Integrator,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    /// Registry name; other fields are ignored when set.
    pub example: Option<String>,
    #[serde(default)]
    pub kind: SystemKind,
    pub vars: Option<Vec<String>>,
    pub a: Option<Vec<Vec<String>>>,
    pub b: Option<Vec<Vec<String>>>,
    pub drift: Option<Vec<String>>,
    pub input: Option<Vec<String>>,
    pub map: Option<Vec<String>>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerKindSpec {
    #[default]
    FrozenGain,
    FrozenGainZoh,
    Zero,
    /// Per-region feedback held over each interval, dispatched through the
    /// patchwork section.
    Patchwork,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ControllerSpec {
    #[serde(default)]
    pub kind: ControllerKindSpec,
    /// Feedback expressions per region, for `kind = "patchwork"`.
    pub pieces: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSpec {
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_blowup")]
    pub blowup: f64,
}

fn default_step() -> f64 {
    1e-3
}

fn default_blowup() -> f64 {
    1e6
}

impl Default for IntegratorSpec {
    fn default() -> Self {
        Self {
            step: default_step(),
            blowup: default_blowup(),
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PartitionSpec {
    /// Uniform step, also used to extend an explicit prefix.
    pub h: f64,
    pub prefix: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum LyapunovSpec {
    /// `½xᵀP(ξ_k)x` from the frozen-gain plan of each interval.
    #[default]
    PerSample,
    /// The patchwork function of the `[patchwork]` section.
    Patchwork,
    /// A fixed expression.
    #[serde(untagged)]
    Expr(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub initial: Vec<Vec<f64>>,
    pub horizon: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub lyapunov: LyapunovSpec,
    /// Slope of the comparison function `a(s) = comparison·s`.
    #[serde(default = "default_comparison")]
    pub comparison: f64,
}

fn default_threshold() -> f64 {
    1e-2
}

fn default_comparison() -> f64 {
    2.0
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SynthesizeSpec {
    pub points: Option<Vec<Vec<f64>>>,
    /// Ball used for sampled points and the uniform bounds.
    pub radius: Option<f64>,
    #[serde(default = "default_synth_samples")]
    pub samples: usize,
}

fn default_synth_samples() -> usize {
    200
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct LiePieceSpec {
    pub v: String,
    pub region: String,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct IntegratorCheckSpec {
    pub v: String,
    pub w: String,
    pub d1: String,
    pub d2: String,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CheckLieSpec {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    pub grid: GridSpec,
    #[serde(default)]
    pub pieces: Vec<LiePieceSpec>,
    pub integrator: Option<IntegratorCheckSpec>,
    /// Quasi-random points used to reject pieces that are not positive on
    /// their region.
    #[serde(default = "default_positivity_samples")]
    pub positivity_samples: usize,
}

fn default_n_max() -> usize {
    4
}

fn default_positivity_samples() -> usize {
    2000
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PatchPieceSpec {
    pub v: String,
    pub region: String,
    pub lo: Option<Vec<f64>>,
    pub hi: Option<Vec<f64>>,
    /// `[coef, exp]` of `coef·r^exp`.
    pub omega1: [f64; 2],
    pub omega2: [f64; 2],
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PatchworkSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub pieces: Vec<PatchPieceSpec>,
    /// Fixed offsets; skips the schedule search.
    pub offsets: Option<Vec<f64>>,
    #[serde(default = "default_radius")]
    pub radius: f64,
    #[serde(default = "default_patch_samples")]
    pub samples: usize,
    #[serde(default = "default_tol")]
    pub boundary_tol: f64,
}

fn default_radius() -> f64 {
    2.0
}

fn default_patch_samples() -> usize {
    10_000
}

fn default_tol() -> f64 {
    sdstab::patchwork::BOUNDARY_TOL
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.resolve()
    }

    pub fn load(path: &std::path::Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text)
    }

    /// Replaces a `system.example` reference by the registry entry and
    /// fills sections the config leaves out from it.
    pub fn resolve(self) -> Result<Self, ConfigError> {
        let Some(name) = self.system.as_ref().and_then(|s| s.example.clone()) else {
            return Ok(self);
        };
        let base = registry::example(&name)?;
        Ok(ExperimentConfig {
            seed: self.seed.or(base.seed),
            system: base.system,
            controller: self.controller.or(base.controller),
            integrator: self.integrator.or(base.integrator),
            partition: self.partition.or(base.partition),
            simulate: self.simulate.or(base.simulate),
            synthesize: self.synthesize.or(base.synthesize),
            check_lie: self.check_lie.or(base.check_lie),
            patchwork: self.patchwork.or(base.patchwork),
        })
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn system(&self) -> Result<&SystemSpec, ConfigError> {
        self.system.as_ref().ok_or_else(|| invalid("missing [system] section"))
    }

    pub fn integrator(&self) -> IntegratorSpec {
        self.integrator.clone().unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example_reference_fills_sections() {
        let cfg = ExperimentConfig::parse(
            "seed = 3\n[system]\nexample = \"scalar-unstable\"\n[partition]\nh = 0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.seed(), 3);
        assert_eq!(cfg.partition.unwrap().h, 0.5);
        assert!(cfg.simulate.is_some());
        assert!(cfg.system.unwrap().a.is_some());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(ExperimentConfig::parse("[system]\nkindd = \"affine\"\n").is_err());
        assert!(matches!(
            ExperimentConfig::parse("[system]\nexample = \"nope\"\n"),
            Err(ConfigError::UnknownExample(_))
        ));
    }

    #[test]
    fn lyapunov_spec_forms() {
        let s: SimulateSpec = toml::from_str("initial = [[1.0]]\nhorizon = 1.0\nlyapunov = \"x1^2\"").unwrap();
        assert_eq!(s.lyapunov, LyapunovSpec::Expr("x1^2".into()));
        let s: SimulateSpec = toml::from_str("initial = [[1.0]]\nhorizon = 1.0\nlyapunov = \"patchwork\"").unwrap();
        assert_eq!(s.lyapunov, LyapunovSpec::Patchwork);
    }
}
