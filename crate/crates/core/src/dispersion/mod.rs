//! Dispersion relations for a perturbed film surface, and the selection of
//! the most unstable mode.
//!
//! A surface perturbation `h1 exp(i(k1 x + k2 y) + σ t)` grows at rate
//! `Re σ` and travels with angular frequency `ω = -Im σ`. Lengths are
//! made dimensionless with the film thickness (`Q = h0 |k|`) and rates
//! with the beam strain rate `f A`; the only remaining parameter is the
//! surface-tension number `S`.

mod relation;
mod search;
mod selection;

use num_complex::Complex64;

use crate::model::FilmParameters;

pub use relation::{
    bottom_bracket, bottom_bracket_printed, hyperbolic_envelope, leveling_shape, phase_velocity,
    phase_velocity_closed_form, phase_velocity_longwave, sigma_full, sigma_full_terms,
    sigma_hat_full, sigma_hat_longwave, sigma_longwave, translation_factor, DispersionTerms,
};
pub use search::{bisect_root, golden_section_max, log_scan_argmax, Maximum};
pub use selection::{
    angle_sweep, angle_sweep_on, angle_sweep_sequential, check_axis_dominance, growth_rate_hat,
    maximize_growth_rate, maximize_growth_rate_on, most_unstable_mode, most_unstable_mode_longwave,
    most_unstable_mode_longwave_on, most_unstable_mode_on, unstable_band, wavelength_longwave,
    Relation, ScanGrid, SweepRow, UnstableBand, MAXIMIZER_POINTS, MAXIMIZER_Q_MAX, MAXIMIZER_Q_MIN,
    MAXIMIZER_REL_TOL,
};

/// Surface wavevector in 1/m.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wavevector {
    pub k1: f64,
    pub k2: f64,
}

impl Wavevector {
    pub fn new(k1: f64, k2: f64) -> Self {
        Self { k1, k2 }
    }

    /// Wavevector of dimensionless magnitude `q` along an axis, for a film of
    /// thickness `h0`.
    pub fn along(orientation: Orientation, q: f64, h0: f64) -> Self {
        match orientation {
            Orientation::Parallel => Self::new(q / h0, 0.0),
            Orientation::Perpendicular => Self::new(0.0, q / h0),
        }
    }

    /// `R = sqrt(k1² + k2²)`.
    pub fn magnitude(&self) -> f64 {
        self.k1.hypot(self.k2)
    }

    /// `Q = h0 R`.
    pub fn q(&self, h0: f64) -> f64 {
        h0 * self.magnitude()
    }

    pub fn q_film(&self, film: &FilmParameters) -> f64 {
        self.q(film.thickness)
    }

    pub fn is_finite(&self) -> bool {
        self.k1.is_finite() && self.k2.is_finite()
    }
}

/// Ripple orientation relative to the projected beam direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Wavevector along the beam projection (`k2 = 0`).
    Parallel,
    /// Wavevector across the beam projection (`k1 = 0`).
    Perpendicular,
}

impl Orientation {
    pub fn as_str(&self) -> &'static str {
        match self {
            Orientation::Parallel => "parallel",
            Orientation::Perpendicular => "perpendicular",
        }
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "parallel" => Ok(Orientation::Parallel),
            "perpendicular" => Ok(Orientation::Perpendicular),
            other => Err(format!(
                "unknown orientation `{other}` (expected parallel or perpendicular)"
            )),
        }
    }
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Complex growth rate `σ = r - iω` in 1/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexGrowthRate {
    pub sigma: Complex64,
}

impl ComplexGrowthRate {
    pub fn new(sigma: Complex64) -> Self {
        Self { sigma }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0))
    }

    /// Growth rate `r = Re σ`.
    pub fn growth_rate(&self) -> f64 {
        self.sigma.re
    }

    /// Angular frequency `ω = -Im σ`.
    pub fn angular_frequency(&self) -> f64 {
        -self.sigma.im
    }

    pub fn is_finite(&self) -> bool {
        self.sigma.re.is_finite() && self.sigma.im.is_finite()
    }
}

/// Most unstable mode of a dispersion relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSelection {
    /// True when no wavenumber grows.
    pub stable: bool,
    /// Dimensionless wavenumber maximizing the growth rate.
    pub q_star: f64,
    pub orientation: Orientation,
    /// `2π h0 / Q*` in m; `None` when stable.
    pub wavelength: Option<f64>,
    /// Growth rate at the maximum, 1/s.
    pub growth_rate: f64,
}
