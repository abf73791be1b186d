//! Experiment configuration: strict JSON, validated against the physical
//! constraints of the library types at load time.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use worldtube::compare::{CompareOptions, ConeRule, Convention, PairingRule, KAPPA};
use worldtube::suite::{Scenario, SuiteSizes};
use worldtube::testfn::BumpTestFunction;
use worldtube::{Frame, UniformWorldline, Velocity};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config JSON: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error(transparent)]
    Physics(#[from] worldtube::Error),
}

/// Centre worldline. Directions are spatial components in the rest frame
/// reached from the lab by the rotation-free boost to `u_c`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldlineConfig {
    /// Proper acceleration `a_c ≥ 0`.
    pub acceleration: f64,
    #[serde(default)]
    pub rapidity: f64,
    #[serde(default = "x_axis")]
    pub velocity_direction: [f64; 3],
    /// `n_c`, normalized on load.
    #[serde(default = "x_axis")]
    pub acceleration_direction: [f64; 3],
}

fn x_axis() -> [f64; 3] {
    [1.0, 0.0, 0.0]
}

/// A bump test function. Offset and radius are in units of `d0`; the offset
/// is taken in the centre's adapted frame at `s = 0` (time, along `n_c`, then
/// the two remaining axes).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunctionConfig {
    pub offset: [f64; 4],
    pub radius: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellSpec {
    /// Shell radius for `compare`, in units of `d0`.
    pub eps: f64,
    pub convention: Convention,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureConfig {
    #[serde(default)]
    pub cone: ConeRule,
    #[serde(default = "prediction_rule")]
    pub prediction: ConeRule,
    /// Sphere rule `N_θ × N_φ` over the shell directions.
    #[serde(default = "eight")]
    pub polar: usize,
    #[serde(default = "sixteen")]
    pub azimuthal: usize,
    /// Optional independent 4D pairing of `Δ` at the compare radius. A Monte
    /// Carlo seed here is replaced by the run seed.
    #[serde(default)]
    pub cross_check: Option<PairingRule>,
}

fn prediction_rule() -> ConeRule {
    CompareOptions::default().prediction
}
fn eight() -> usize {
    8
}
fn sixteen() -> usize {
    16
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        let o = CompareOptions::default();
        QuadratureConfig { cone: o.cone, prediction: o.prediction, polar: o.polar, azimuthal: o.azimuthal, cross_check: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// `Δ` is nonzero when it exceeds `error_factor` times its error estimate.
    #[serde(default = "ten")]
    pub error_factor: f64,
    /// and `relative` times the point pairing.
    #[serde(default = "relative_default")]
    pub relative: f64,
    /// Accepted distance of the sweep slope from its expected value.
    #[serde(default = "slope_default")]
    pub slope: f64,
    /// Accepted distance of the smallest-ε ratio from 1.
    #[serde(default = "slope_default")]
    pub ratio: f64,
}

fn ten() -> f64 {
    10.0
}
fn relative_default() -> f64 {
    1e-9
}
fn slope_default() -> f64 {
    0.1
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { error_factor: ten(), relative: relative_default(), slope: slope_default(), ratio: slope_default() }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    /// Output directory; `--out` takes precedence, then `./out`.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub worldline: WorldlineConfig,
    pub shell: ShellSpec,
    /// Length unit of test-function offsets, radii and `ε`.
    #[serde(default = "one")]
    pub d0: f64,
    pub test_functions: Vec<TestFunctionConfig>,
    #[serde(default)]
    pub quadrature: QuadratureConfig,
    /// Sweep radii in units of `d0`.
    #[serde(default)]
    pub sweep: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "kappa_default")]
    pub kappa: f64,
    #[serde(default)]
    pub suite: SuiteSizes,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

fn kappa_default() -> f64 {
    KAPPA
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

fn check_rule(name: &str, r: &ConeRule) -> Result<(), ConfigError> {
    // the error estimate halves every order
    if r.s_panels == 0 || [r.s_order, r.polar, r.azimuthal, r.radial].iter().any(|&n| n < 4) {
        return Err(invalid(format!("quadrature.{name}: s_panels ≥ 1 and every order ≥ 4 required, got {r:?}")));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn center(&self) -> Result<UniformWorldline, ConfigError> {
        let w = &self.worldline;
        let u = Velocity::from_rapidity(w.rapidity, w.velocity_direction)?;
        let d = w.acceleration_direction;
        let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(worldtube::Error::InvalidDirection.into());
        }
        let n = Frame::boosted(&u).spatial(d.map(|c| c / norm));
        Ok(UniformWorldline::new(worldtube::Event::ORIGIN, u, n, w.acceleration)?)
    }

    pub fn test_functions(&self, center: &UniformWorldline) -> Result<Vec<BumpTestFunction>, ConfigError> {
        let frame = Frame::adapted(&center.u(), &center.n())?;
        self.test_functions
            .iter()
            .map(|t| {
                let c = frame.vector(t.offset.map(|v| v * self.d0));
                Ok(BumpTestFunction::new(center.origin() + c, t.radius * self.d0, t.amplitude, frame)?)
            })
            .collect()
    }

    pub fn options(&self) -> CompareOptions {
        let q = &self.quadrature;
        CompareOptions {
            kappa: self.kappa,
            cone: q.cone,
            prediction: q.prediction,
            polar: q.polar,
            azimuthal: q.azimuthal,
            error_factor: self.tolerances.error_factor,
            relative_tolerance: self.tolerances.relative,
        }
    }

    /// The cross-check rule with its Monte Carlo seed tied to the run seed.
    pub fn cross_check(&self) -> Option<PairingRule> {
        self.quadrature.cross_check.map(|rule| match rule {
            PairingRule::MonteCarlo { samples, .. } => PairingRule::MonteCarlo { samples, seed: self.seed },
            other => other,
        })
    }

    pub fn scenario(&self) -> Result<Scenario, ConfigError> {
        let center = self.center()?;
        let charge = match self.shell.convention {
            Convention::FixedCharge { charge } => charge,
            Convention::FixedDensity { density } => density * 4.0 * std::f64::consts::PI,
        };
        Ok(Scenario {
            center,
            charge,
            test_functions: self.test_functions(&center)?,
            d0: self.d0,
            sweep: self.sweep.clone(),
            options: self.options(),
        })
    }

    /// Radii used by `compare` and `sweep`, in absolute units.
    pub fn radii(&self) -> Vec<f64> {
        std::iter::once(self.shell.eps).chain(self.sweep.iter().copied()).map(|e| e * self.d0).collect()
    }

    /// Re-validates every physical constraint: velocity and direction,
    /// wedge condition and support clearance at every radius, quadrature orders.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.d0 > 0.0 && self.d0.is_finite()) {
            return Err(invalid(format!("d0 must be positive and finite, got {}", self.d0)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(invalid(format!("kappa must be positive and finite, got {}", self.kappa)));
        }
        if self.test_functions.is_empty() {
            return Err(invalid("at least one test function is required"));
        }
        let t = &self.tolerances;
        for (name, v) in [("error_factor", t.error_factor), ("relative", t.relative), ("slope", t.slope), ("ratio", t.ratio)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(format!("tolerances.{name} must be finite and non-negative, got {v}")));
            }
        }
        check_rule("cone", &self.quadrature.cone)?;
        check_rule("prediction", &self.quadrature.prediction)?;
        if self.quadrature.polar < 4 || self.quadrature.azimuthal < 8 {
            return Err(invalid("quadrature: polar ≥ 4 and azimuthal ≥ 8 required"));
        }
        match self.quadrature.cross_check {
            Some(PairingRule::Gauss { order }) if order < 4 => {
                return Err(invalid("quadrature.cross_check: Gauss order ≥ 4 required"))
            }
            Some(PairingRule::MonteCarlo { samples, .. }) if samples < 2 => {
                return Err(invalid("quadrature.cross_check: at least 2 Monte Carlo samples required"))
            }
            _ => {}
        }
        let center = self.center()?;
        let phis = self.test_functions(&center)?;
        for eps in self.radii() {
            let shell = self.shell.convention.shell(center, eps)?;
            for phi in &phis {
                phi.check_exterior(&shell)?;
            }
        }
        Ok(())
    }
}
