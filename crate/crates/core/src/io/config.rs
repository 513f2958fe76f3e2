use serde::{Deserialize, Serialize};

use super::{IoError, IoResult};
use crate::dispersion::ScanGrid;
use crate::model::{
    BeamParameters, FilmParameters, REFERENCE_STRAIN_RATE, REFERENCE_STRESS_NORMAL,
    REFERENCE_SURFACE_ENERGY, REFERENCE_THICKNESS,
};
use crate::oracle::{CollocationConfig, DEFAULT_NODES, MIN_NODES};
use crate::units::{gpa_to_pa, nm_to_m, GPA, NM};

/// A run described in human units. Convert with the accessor methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub beam: BeamSection,
    pub film: FilmSection,
    pub sweep: SweepSection,
    #[serde(default)]
    pub oracle: OracleSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BeamSection {
    /// `f A`, 1/s.
    #[serde(default = "default_strain_rate")]
    pub strain_rate_per_s: f64,
    /// Incidence angle for single-angle commands.
    #[serde(default = "default_theta")]
    pub theta_deg: f64,
}

impl Default for BeamSection {
    fn default() -> Self {
        BeamSection {
            strain_rate_per_s: default_strain_rate(),
            theta_deg: default_theta(),
        }
    }
}

/// Film constants. Exactly one of `stress_normal_gpa` and `viscosity_pa_s`
/// must be given; the other follows from `|T0(0)| = 6 η f A`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilmSection {
    pub thickness_nm: f64,
    pub surface_energy_j_per_m2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stress_normal_gpa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub viscosity_pa_s: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RelationMode {
    Full,
    Longwave,
    #[default]
    Both,
}

impl RelationMode {
    pub fn includes_full(self) -> bool {
        self != RelationMode::Longwave
    }

    pub fn includes_longwave(self) -> bool {
        self != RelationMode::Full
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub angles_deg: Vec<f64>,
    #[serde(default)]
    pub relation: RelationMode,
    #[serde(default = "default_q_min")]
    pub q_min: f64,
    #[serde(default = "default_q_max")]
    pub q_max: f64,
    #[serde(default = "default_q_points")]
    pub q_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    #[serde(default = "default_nodes")]
    pub nodes: usize,
    /// Relative agreement required between oracle and closed form.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

impl Default for OracleSection {
    fn default() -> Self {
        OracleSection {
            nodes: default_nodes(),
            tolerance: default_tolerance(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison_csv: Option<String>,
}

fn default_strain_rate() -> f64 {
    REFERENCE_STRAIN_RATE
}
fn default_theta() -> f64 {
    60.0
}
fn default_q_min() -> f64 {
    crate::dispersion::MAXIMIZER_Q_MIN
}
fn default_q_max() -> f64 {
    crate::dispersion::MAXIMIZER_Q_MAX
}
fn default_q_points() -> usize {
    crate::dispersion::MAXIMIZER_POINTS
}
fn default_nodes() -> usize {
    DEFAULT_NODES
}
fn default_tolerance() -> f64 {
    1e-8
}

/// Parse and validate a TOML run description.
pub fn parse_config(text: &str) -> IoResult<RunConfig> {
    let de = toml::Deserializer::parse(text).map_err(|e| IoError::Config(e.to_string()))?;
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner().message().trim().to_string();
        if path == "." {
            IoError::Config(inner)
        } else {
            IoError::Config(format!("{path}: {inner}"))
        }
    })?;
    config.validate()?;
    Ok(config)
}

fn check(ok: bool, path: &str, reason: String) -> IoResult<()> {
    if ok {
        Ok(())
    } else {
        Err(IoError::Config(format!("{path}: {reason}")))
    }
}

fn positive(x: f64, path: &str) -> IoResult<()> {
    check(
        x.is_finite() && x > 0.0,
        path,
        format!("must be > 0, got {x}"),
    )
}

fn angle(x: f64, path: &str) -> IoResult<()> {
    check(
        x.is_finite() && (0.0..=90.0).contains(&x),
        path,
        format!("angle {x} outside [0, 90] degrees"),
    )
}

impl RunConfig {
    /// Reference film constants and a four-angle sweep.
    pub fn reference() -> Self {
        RunConfig {
            beam: BeamSection::default(),
            film: FilmSection {
                thickness_nm: REFERENCE_THICKNESS / NM,
                surface_energy_j_per_m2: REFERENCE_SURFACE_ENERGY,
                stress_normal_gpa: Some(REFERENCE_STRESS_NORMAL / GPA),
                viscosity_pa_s: None,
            },
            sweep: SweepSection {
                angles_deg: vec![50.0, 60.0, 70.0, 80.0],
                relation: RelationMode::Both,
                q_min: default_q_min(),
                q_max: default_q_max(),
                q_points: default_q_points(),
            },
            oracle: OracleSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn validate(&self) -> IoResult<()> {
        let b = &self.beam;
        check(
            b.strain_rate_per_s.is_finite() && b.strain_rate_per_s >= 0.0,
            "beam.strain_rate_per_s",
            format!("must be >= 0, got {}", b.strain_rate_per_s),
        )?;
        angle(b.theta_deg, "beam.theta_deg")?;

        let f = &self.film;
        positive(f.thickness_nm, "film.thickness_nm")?;
        check(
            f.surface_energy_j_per_m2.is_finite() && f.surface_energy_j_per_m2 >= 0.0,
            "film.surface_energy_j_per_m2",
            format!("must be >= 0, got {}", f.surface_energy_j_per_m2),
        )?;
        match (f.stress_normal_gpa, f.viscosity_pa_s) {
            (Some(s), None) => {
                positive(s, "film.stress_normal_gpa")?;
                positive(b.strain_rate_per_s, "beam.strain_rate_per_s")?;
            }
            (None, Some(v)) => positive(v, "film.viscosity_pa_s")?,
            (Some(_), Some(_)) => {
                return Err(IoError::Config(
                    "film: give only one of `stress_normal_gpa` and `viscosity_pa_s`".into(),
                ))
            }
            (None, None) => {
                return Err(IoError::Config(
                    "film: missing field `stress_normal_gpa` (or `viscosity_pa_s`)".into(),
                ))
            }
        }

        let s = &self.sweep;
        check(
            !s.angles_deg.is_empty(),
            "sweep.angles_deg",
            "must not be empty".into(),
        )?;
        for (i, &a) in s.angles_deg.iter().enumerate() {
            angle(a, &format!("sweep.angles_deg[{i}]"))?;
        }
        positive(s.q_min, "sweep.q_min")?;
        check(
            s.q_max.is_finite() && s.q_max > s.q_min,
            "sweep.q_max",
            format!("must exceed q_min, got {}", s.q_max),
        )?;
        check(
            s.q_points >= 3,
            "sweep.q_points",
            format!("need at least 3, got {}", s.q_points),
        )?;

        check(
            self.oracle.nodes >= MIN_NODES,
            "oracle.nodes",
            format!("need at least {MIN_NODES}, got {}", self.oracle.nodes),
        )?;
        positive(self.oracle.tolerance, "oracle.tolerance")?;
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn viscosity(&self) -> f64 {
        match (self.film.viscosity_pa_s, self.film.stress_normal_gpa) {
            (Some(v), _) => v,
            (None, Some(s)) => gpa_to_pa(s) / (6.0 * self.beam.strain_rate_per_s),
            (None, None) => f64::NAN,
        }
    }

    pub fn film(&self) -> IoResult<FilmParameters> {
        Ok(FilmParameters::new(
            self.viscosity(),
            self.film.surface_energy_j_per_m2,
            nm_to_m(self.film.thickness_nm),
        )?)
    }

    /// Beam at the configured single angle.
    pub fn beam(&self) -> IoResult<BeamParameters> {
        self.beam_at(self.beam.theta_deg.to_radians())
    }

    pub fn beam_at(&self, theta: f64) -> IoResult<BeamParameters> {
        Ok(BeamParameters::from_strain_rate(
            self.beam.strain_rate_per_s,
            theta,
        )?)
    }

    /// Normal-incidence stress magnitude, Pa.
    pub fn stress_normal(&self) -> f64 {
        6.0 * self.viscosity() * self.beam.strain_rate_per_s
    }

    /// Sweep angles in radians.
    pub fn thetas(&self) -> Vec<f64> {
        self.sweep
            .angles_deg
            .iter()
            .map(|a| a.to_radians())
            .collect()
    }

    pub fn scan_grid(&self) -> ScanGrid {
        ScanGrid {
            q_min: self.sweep.q_min,
            q_max: self.sweep.q_max,
            points: self.sweep.q_points,
        }
    }

    pub fn collocation(&self) -> IoResult<CollocationConfig> {
        Ok(CollocationConfig::new(self.oracle.nodes)?)
    }
}
