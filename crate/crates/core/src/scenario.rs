//! Scenario documents: a JSON description of one source, the rays to test,
//! and the flux, charge, sampling and convergence runs to perform.
//!
//! ```json
//! {
//!   "schema": "fieldcheck/scenario/v1",
//!   "name": "oscillating-monopole",
//!   "theory": "scalar",
//!   "source": { "kind": "oscillating_monopole", "amplitude": 1.0, "omega": 0.3, "radius": 0.1 },
//!   "orientation": "retarded",
//!   "ladder": { "directions": [[0, 0, 1]], "r0": 20, "rungs": 11, "u0": 1.0 }
//! }
//! ```
//!
//! Every other section is optional. Unknown keys are rejected.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{RayLadder, Thresholds};
use crate::error::{Error, Result};
use crate::minkowski::{NullDirection, Orientation, Vec3};
use crate::quadrature::{QuadratureOrders, SphereRule, VolumeRule};
use crate::solver::GaugeShift;
use crate::sources::{
    hertzian_dipole, oscillating_monopole, static_charge, static_monopole, CurrentSource, ScalarSource, Superposition,
};

pub const SCHEMA: &str = "fieldcheck/scenario/v1";

/// Above this value of `ωa` the source is not small compared with its
/// wavelength and the report carries a warning flag.
pub const OMEGA_A_WARNING: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Theory {
    Scalar,
    Maxwell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourceSpec {
    StaticMonopole {
        charge: f64,
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    OscillatingMonopole {
        amplitude: f64,
        omega: f64,
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    StaticCharge {
        charge: f64,
        radius: f64,
        #[serde(default)]
        center: [f64; 3],
    },
    HertzianDipole {
        moment: f64,
        omega: f64,
        radius: f64,
        axis: [f64; 3],
        #[serde(default)]
        center: [f64; 3],
    },
    Superposition {
        parts: Vec<SourceSpec>,
    },
}

impl SourceSpec {
    /// Largest `ωa` over the parts; `None` for static sources.
    pub fn omega_a(&self) -> Option<f64> {
        match self {
            Self::OscillatingMonopole { omega, radius, .. } | Self::HertzianDipole { omega, radius, .. } => {
                Some(omega * radius)
            }
            Self::StaticMonopole { .. } | Self::StaticCharge { .. } => None,
            Self::Superposition { parts } => parts.iter().filter_map(Self::omega_a).reduce(f64::max),
        }
    }

    fn validate(&self, key: &str) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{key}.{name}"), format!("must be positive and finite, got {v}")))
            }
        };
        let finite = |name: &str, v: &[f64]| {
            if v.iter().all(|x| x.is_finite()) {
                Ok(())
            } else {
                Err(Error::config(format!("{key}.{name}"), "must be finite"))
            }
        };
        match self {
            Self::StaticMonopole { charge, radius, center } | Self::StaticCharge { charge, radius, center } => {
                finite("charge", &[*charge])?;
                positive("radius", *radius)?;
                finite("center", center)
            }
            Self::OscillatingMonopole {
                amplitude,
                omega,
                radius,
                center,
            } => {
                finite("amplitude", &[*amplitude])?;
                positive("omega", *omega)?;
                positive("radius", *radius)?;
                finite("center", center)
            }
            Self::HertzianDipole {
                moment,
                omega,
                radius,
                axis,
                center,
            } => {
                finite("moment", &[*moment])?;
                positive("omega", *omega)?;
                positive("radius", *radius)?;
                finite("axis", axis)?;
                if Vec3::from(*axis).norm() == 0.0 {
                    return Err(Error::config(format!("{key}.axis"), "must be non-zero"));
                }
                finite("center", center)
            }
            Self::Superposition { parts } => {
                if parts.is_empty() {
                    return Err(Error::config(format!("{key}.parts"), "needs at least one part"));
                }
                parts
                    .iter()
                    .enumerate()
                    .try_for_each(|(i, p)| p.validate(&format!("{key}.parts[{i}]")))
            }
        }
    }

    pub fn scalar(&self) -> Result<Box<dyn ScalarSource>> {
        self.scalar_at("source")
    }

    fn scalar_at(&self, key: &str) -> Result<Box<dyn ScalarSource>> {
        Ok(match self {
            Self::StaticMonopole { charge, radius, center } | Self::StaticCharge { charge, radius, center } => {
                Box::new(static_monopole(*charge, *radius).with_center((*center).into()))
            }
            Self::OscillatingMonopole {
                amplitude,
                omega,
                radius,
                center,
            } => Box::new(oscillating_monopole(*amplitude, *omega, *radius).with_center((*center).into())),
            Self::HertzianDipole { .. } => {
                return Err(Error::config(key, "a hertzian_dipole is a current and has no scalar density"));
            }
            Self::Superposition { parts } => Box::new(Superposition::new(
                parts
                    .iter()
                    .enumerate()
                    .map(|(i, p)| p.scalar_at(&format!("{key}.parts[{i}]")))
                    .collect::<Result<Vec<_>>>()?,
            )),
        })
    }

    pub fn current(&self) -> Result<Box<dyn CurrentSource>> {
        Ok(match self {
            Self::StaticMonopole { charge, radius, center } | Self::StaticCharge { charge, radius, center } => {
                Box::new(static_charge(*charge, *radius).with_center((*center).into()))
            }
            Self::OscillatingMonopole { .. } => {
                return Err(Error::config(
                    "source",
                    "an oscillating monopole does not conserve charge and cannot drive Maxwell's equations",
                ));
            }
            Self::HertzianDipole {
                moment,
                omega,
                radius,
                axis,
                center,
            } => Box::new(hertzian_dipole(*moment, *omega, *radius, (*axis).into())?.with_center((*center).into())),
            Self::Superposition { parts } => Box::new(Superposition::new(
                parts.iter().map(Self::current).collect::<Result<Vec<_>>>()?,
            )),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LadderSpec {
    /// Orientation of the null vector; defaults to the solution's.
    #[serde(default)]
    pub orientation: Option<Orientation>,
    pub directions: Vec<[f64; 3]>,
    /// Defaults to `20a·max(1, 1/ω)`.
    #[serde(default)]
    pub r0: Option<f64>,
    #[serde(default = "default_growth")]
    pub growth: f64,
    #[serde(default = "default_rungs")]
    pub rungs: usize,
    #[serde(default)]
    pub u0: f64,
}

fn default_growth() -> f64 {
    RayLadder::DEFAULT_GROWTH
}

fn default_rungs() -> usize {
    RayLadder::DEFAULT_RUNGS
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SphereSpec {
    pub polar: usize,
    pub azimuthal: usize,
}

impl Default for SphereSpec {
    fn default() -> Self {
        Self {
            polar: 16,
            azimuthal: 32,
        }
    }
}

/// Flux through spheres of the given radii, phase-locked at `u = u₀`, and
/// at `phases` retarded times spread evenly over one period when the source
/// oscillates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxSpec {
    pub radii: Vec<f64>,
    #[serde(default)]
    pub u0: f64,
    #[serde(default = "one")]
    pub phases: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChargeSpec {
    pub radii: Vec<f64>,
    #[serde(default)]
    pub time: f64,
}

/// Gauge function `χ = c·sin(ω(t ∓ r))/r`, applied to every potential sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub amplitude: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleKind {
    Potential,
    Gradient,
    Field,
    Stress,
    Psi,
}

/// Points `r·direction` for each radius. Without `time` each point is
/// phase-locked at the ladder's `u₀`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSpec {
    pub what: SampleKind,
    #[serde(default = "z_axis")]
    pub direction: [f64; 3],
    /// Defaults to the ladder radii.
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
    #[serde(default)]
    pub time: Option<f64>,
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvergenceQuantity {
    /// Exact-integrand flux at the first flux radius and phase.
    Flux,
    /// Gauss charge at every charge radius.
    Charge,
    /// Fitted exponents of every condition.
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSpec {
    pub quantity: ConvergenceQuantity,
    #[serde(default = "default_factors")]
    pub factors: Vec<f64>,
}

fn default_factors() -> Vec<f64> {
    vec![1.0, 1.5, 2.0]
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub schema: String,
    pub name: String,
    pub theory: Theory,
    pub source: SourceSpec,
    pub orientation: Orientation,
    pub ladder: LadderSpec,
    #[serde(default)]
    pub quadrature: QuadratureOrders,
    #[serde(default)]
    pub sphere: SphereSpec,
    #[serde(default)]
    pub flux: Option<FluxSpec>,
    #[serde(default)]
    pub charge: Option<ChargeSpec>,
    #[serde(default)]
    pub gauge: Option<GaugeSpec>,
    #[serde(default)]
    pub thresholds: Thresholds,
    #[serde(default)]
    pub sample: Option<SampleSpec>,
    #[serde(default)]
    pub convergence: Option<ConvergenceSpec>,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Scenario {
    /// Parses and validates a scenario document. Errors name the offending key.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let scenario: Scenario = serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            // serde_json already appends "at line L column C"
            let message = e.into_inner().to_string();
            Error::config(if key == "." { String::new() } else { key }, message)
        })?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config("", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA {
            return Err(Error::config("schema", format!("expected \"{SCHEMA}\", got \"{}\"", self.schema)));
        }
        self.source.validate("source")?;
        match self.theory {
            Theory::Scalar => self.source.scalar().map(drop)?,
            Theory::Maxwell => self.source.current().map(drop)?,
        }
        let l = &self.ladder;
        if l.directions.is_empty() {
            return Err(Error::config("ladder.directions", "needs at least one direction"));
        }
        for (i, d) in l.directions.iter().enumerate() {
            if !d.iter().all(|x| x.is_finite()) || Vec3::from(*d).norm() == 0.0 {
                return Err(Error::config(format!("ladder.directions[{i}]"), "must be a finite non-zero vector"));
            }
        }
        check_positive("ladder.r0", l.r0.iter().copied())?;
        if !(l.growth.is_finite() && l.growth > 1.0) {
            return Err(Error::config("ladder.growth", format!("must exceed 1, got {}", l.growth)));
        }
        if !l.u0.is_finite() {
            return Err(Error::config("ladder.u0", "must be finite"));
        }
        VolumeRule::new(self.quadrature).map_err(|e| Error::config("quadrature", e.to_string()))?;
        SphereRule::new(1.0, self.sphere.polar, self.sphere.azimuthal).map_err(|e| Error::config("sphere", e.to_string()))?;
        if let Some(f) = &self.flux {
            check_nonempty("flux.radii", &f.radii)?;
            check_positive("flux.radii", f.radii.iter().copied())?;
            if f.phases == 0 {
                return Err(Error::config("flux.phases", "must be at least 1"));
            }
        }
        if let Some(c) = &self.charge {
            if self.theory == Theory::Scalar {
                return Err(Error::config("charge", "Gauss charge needs theory \"maxwell\""));
            }
            check_nonempty("charge.radii", &c.radii)?;
            check_positive("charge.radii", c.radii.iter().copied())?;
        }
        if let Some(g) = &self.gauge {
            if self.theory == Theory::Scalar {
                return Err(Error::config("gauge", "gauge shifts need theory \"maxwell\""));
            }
            check_positive("gauge.omega", [g.omega])?;
            if !g.amplitude.is_finite() {
                return Err(Error::config("gauge.amplitude", "must be finite"));
            }
        }
        if let Some(s) = &self.sample {
            if Vec3::from(s.direction).norm() == 0.0 {
                return Err(Error::config("sample.direction", "must be non-zero"));
            }
            if let Some(r) = &s.radii {
                check_nonempty("sample.radii", r)?;
                check_positive("sample.radii", r.iter().copied())?;
            }
            if s.what == SampleKind::Field && self.theory == Theory::Scalar {
                return Err(Error::config("sample.what", "field samples need theory \"maxwell\"; use gradient"));
            }
        }
        if let Some(c) = &self.convergence {
            if c.factors.len() < 3 {
                return Err(Error::config("convergence.factors", "needs at least three refinement levels"));
            }
            check_positive("convergence.factors", c.factors.iter().copied())?;
            let needs = match c.quantity {
                ConvergenceQuantity::Flux => self.flux.is_none().then_some("flux"),
                ConvergenceQuantity::Charge => self.charge.is_none().then_some("charge"),
                ConvergenceQuantity::Verify => None,
            };
            if let Some(section) = needs {
                return Err(Error::config("convergence.quantity", format!("requires a \"{section}\" section")));
            }
        }
        Ok(())
    }

    /// `ωa` and whether it reaches the warning level.
    pub fn omega_a(&self) -> Option<f64> {
        self.source.omega_a()
    }

    pub fn omega_a_warning(&self) -> bool {
        self.omega_a().is_some_and(|x| x >= OMEGA_A_WARNING)
    }

    pub fn ladder_orientation(&self) -> Orientation {
        self.ladder.orientation.unwrap_or(self.orientation)
    }

    /// One ladder per configured direction.
    pub fn ladders(&self) -> Result<Vec<RayLadder>> {
        let (support, omega) = match self.theory {
            Theory::Scalar => {
                let s = self.source.scalar()?;
                (s.support(), s.frequency())
            }
            Theory::Maxwell => {
                let s = self.source.current()?;
                (s.support(), s.frequency())
            }
        };
        let l = &self.ladder;
        l.directions
            .iter()
            .map(|d| {
                let dir = NullDirection::new((*d).into(), self.ladder_orientation())?;
                let r0 = l
                    .r0
                    .unwrap_or_else(|| 20.0 * support.radius * omega.map_or(1.0, |w| (1.0 / w).max(1.0)));
                RayLadder::new(dir, l.u0, r0, l.growth, l.rungs)
            })
            .collect()
    }

    pub fn gauge_shift(&self) -> Option<GaugeShift> {
        self.gauge.map(|g| GaugeShift::new(g.amplitude, g.omega, self.orientation))
    }

    pub fn volume_rule(&self) -> Result<VolumeRule> {
        VolumeRule::new(self.quadrature)
    }

    pub fn sphere_rule(&self, radius: f64) -> Result<SphereRule> {
        SphereRule::new(radius, self.sphere.polar, self.sphere.azimuthal)
    }

    /// Same scenario with every quadrature order scaled by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        let mut s = self.clone();
        s.quadrature = self.quadrature.scaled(factor);
        s
    }
}

fn check_nonempty(key: &str, v: &[f64]) -> Result<()> {
    if v.is_empty() {
        Err(Error::config(key, "must not be empty"))
    } else {
        Ok(())
    }
}

fn check_positive(key: &str, v: impl IntoIterator<Item = f64>) -> Result<()> {
    match v.into_iter().find(|x| !(x.is_finite() && *x > 0.0)) {
        Some(x) => Err(Error::config(key, format!("must be positive and finite, got {x}"))),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MONOPOLE: &str = r#"{
        "schema": "fieldcheck/scenario/v1",
        "name": "m",
        "theory": "scalar",
        "source": { "kind": "oscillating_monopole", "amplitude": 1.0, "omega": 0.3, "radius": 0.1 },
        "orientation": "retarded",
        "ladder": { "directions": [[0, 0, 1]], "r0": 20, "rungs": 11, "u0": 1.0 }
    }"#;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::from_json(MONOPOLE).unwrap();
        assert_eq!(s.theory, Theory::Scalar);
        assert_eq!(s.quadrature, QuadratureOrders::default());
        assert_eq!(s.ladder_orientation(), Orientation::Retarded);
        assert!((s.omega_a().unwrap() - 0.03).abs() < 1e-15);
        assert!(!s.omega_a_warning());
        let ladders = s.ladders().unwrap();
        assert_eq!(ladders[0].radii().len(), 11);
        assert!((ladders[0].radii()[10] - 640.0).abs() < 1e-9);
    }

    #[test]
    fn missing_omega_is_named() {
        let text = MONOPOLE.replace(r#""omega": 0.3, "#, "");
        let err = Scenario::from_json(&text).unwrap_err();
        match &err {
            Error::Config { key, message } => {
                assert_eq!(key, "source");
                assert!(message.contains("omega"), "{message}");
            }
            e => panic!("{e}"),
        }
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MONOPOLE.replace(r#""rungs": 11"#, r#""rungs": 11, "rung": 3"#);
        let err = Scenario::from_json(&text).unwrap_err();
        assert!(matches!(&err, Error::Config { key, message } if key == "ladder.rung" && message.contains("rung")), "{err}");
    }

    #[test]
    fn wrong_schema_is_rejected() {
        let text = MONOPOLE.replace("scenario/v1", "scenario/v0");
        assert!(matches!(Scenario::from_json(&text), Err(Error::Config { key, .. }) if key == "schema"));
    }

    #[test]
    fn dipole_is_not_a_scalar_source() {
        let text = MONOPOLE.replace(
            r#""kind": "oscillating_monopole", "amplitude": 1.0,"#,
            r#""kind": "hertzian_dipole", "moment": 1.0, "axis": [0, 0, 1],"#,
        );
        assert!(matches!(Scenario::from_json(&text), Err(Error::Config { key, .. }) if key == "source"));
    }

    #[test]
    fn nonpositive_radius_is_rejected() {
        let text = MONOPOLE.replace(r#""radius": 0.1"#, r#""radius": -0.1"#);
        assert!(matches!(Scenario::from_json(&text), Err(Error::Config { key, .. }) if key == "source.radius"));
    }

    #[test]
    fn large_omega_a_raises_the_flag() {
        let text = MONOPOLE.replace(r#""omega": 0.3"#, r#""omega": 6.0"#);
        assert!(Scenario::from_json(&text).unwrap().omega_a_warning());
    }

    #[test]
    fn default_ladder_start() {
        let text = MONOPOLE.replace(r#""r0": 20, "#, "");
        let s = Scenario::from_json(&text).unwrap();
        // 20 · 0.1 / 0.3
        assert!((s.ladders().unwrap()[0].radii()[0] - 20.0 / 3.0).abs() < 1e-12);
    }
}
