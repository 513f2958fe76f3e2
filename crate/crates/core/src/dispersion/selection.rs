use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use rayon::prelude::*;

use super::relation::{
    phase_velocity, sigma_full, sigma_hat_full, sigma_hat_longwave, sigma_longwave,
};
use super::search::{bisect_root, golden_section_max, log_scan_argmax, log_scan_point, Maximum};
use super::{ModeSelection, Orientation, Wavevector};
use crate::error::{invalid, Error, Result};
use crate::model::{check_angle, BeamParameters, FilmParameters};

/// Lower end of the initial log-spaced scan in `Q`.
pub const MAXIMIZER_Q_MIN: f64 = 1e-4;
/// Upper end of the initial log-spaced scan in `Q`.
pub const MAXIMIZER_Q_MAX: f64 = 10.0;
pub const MAXIMIZER_POINTS: usize = 2000;
/// Relative bracket width at which golden-section refinement stops.
pub const MAXIMIZER_REL_TOL: f64 = 1e-10;

// bounds on how far the scan window may be pushed when the peak sits on its edge
const SCAN_FLOOR: f64 = 1e-12;
const SCAN_CEILING: f64 = 1e8;

/// Log-spaced scan used to bracket the growth-rate maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanGrid {
    pub q_min: f64,
    pub q_max: f64,
    pub points: usize,
}

impl Default for ScanGrid {
    fn default() -> Self {
        ScanGrid {
            q_min: MAXIMIZER_Q_MIN,
            q_max: MAXIMIZER_Q_MAX,
            points: MAXIMIZER_POINTS,
        }
    }
}

impl ScanGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_min.is_finite() && self.q_min > 0.0) {
            return Err(invalid("q_min", format!("must be > 0, got {}", self.q_min)));
        }
        if !(self.q_max.is_finite() && self.q_max > self.q_min) {
            return Err(invalid(
                "q_max",
                format!("must exceed q_min, got {}", self.q_max),
            ));
        }
        if self.points < 3 {
            return Err(invalid(
                "points",
                format!("need at least 3, got {}", self.points),
            ));
        }
        Ok(())
    }
}

/// Which dispersion relation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Full,
    Longwave,
}

/// Dimensionless growth rate `Re σ / (f A)` along an axis.
pub fn growth_rate_hat(
    relation: Relation,
    q: f64,
    theta: f64,
    s: f64,
    orientation: Orientation,
) -> f64 {
    let (q1, q2) = match orientation {
        Orientation::Parallel => (q, 0.0),
        Orientation::Perpendicular => (0.0, q),
    };
    match relation {
        Relation::Full => sigma_hat_full(q1, q2, theta, s).re,
        Relation::Longwave => sigma_hat_longwave(q1, q2, theta, s).re,
    }
}

/// Maximize a growth-rate curve over `Q > 0`: log scan on
/// `[MAXIMIZER_Q_MIN, MAXIMIZER_Q_MAX]`, then golden-section refinement
/// around the best scan point. A positive peak found on the edge of the scan
/// window moves the window outward.
pub fn maximize_growth_rate<F>(f: F) -> Maximum
where
    F: Fn(f64) -> f64,
{
    maximize_growth_rate_on(f, &ScanGrid::default())
}

/// [`maximize_growth_rate`] with a caller-chosen initial scan.
pub fn maximize_growth_rate_on<F>(f: F, grid: &ScanGrid) -> Maximum
where
    F: Fn(f64) -> f64,
{
    let points = grid.points;
    let (mut lo, mut hi) = (grid.q_min, grid.q_max);
    loop {
        let (i, best) = log_scan_argmax(&f, lo, hi, points);
        if best.value > 0.0 && i == 0 && lo > SCAN_FLOOR {
            hi = log_scan_point(lo, hi, points, 1);
            lo = (lo * 1e-3).max(SCAN_FLOOR);
            continue;
        }
        if best.value > 0.0 && i == points - 1 && hi < SCAN_CEILING {
            lo = log_scan_point(lo, hi, points, points - 2);
            hi = (hi * 1e3).min(SCAN_CEILING);
            continue;
        }
        let left = log_scan_point(lo, hi, points, i.saturating_sub(1));
        let right = log_scan_point(lo, hi, points, (i + 1).min(points - 1));
        let refined = golden_section_max(&f, left, right, MAXIMIZER_REL_TOL);
        return if refined.value >= best.value {
            refined
        } else {
            best
        };
    }
}

/// The set of `Q > 0` with positive growth for parallel-mode ripples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum UnstableBand {
    Empty,
    /// `(0, upper)`; `upper` is infinite when nothing stabilizes short waves.
    Interval {
        upper: f64,
    },
}

impl UnstableBand {
    pub fn is_empty(&self) -> bool {
        matches!(self, UnstableBand::Empty)
    }

    pub fn upper(&self) -> Option<f64> {
        match self {
            UnstableBand::Empty => None,
            UnstableBand::Interval { upper } => Some(*upper),
        }
    }

    pub fn contains(&self, q: f64) -> bool {
        match self {
            UnstableBand::Empty => false,
            UnstableBand::Interval { upper } => q > 0.0 && q < *upper,
        }
    }
}

/// Band of unstable dimensionless wavenumbers for the worst-case (parallel)
/// orientation, with the upper edge located by bisection.
pub fn unstable_band(theta: f64, s: f64) -> Result<UnstableBand> {
    check_angle(theta)?;
    if !(s.is_finite() && s >= 0.0) {
        return Err(invalid(
            "surface_tension_number",
            format!("must be >= 0, got {s}"),
        ));
    }
    let growth = |q: f64| growth_rate_hat(Relation::Full, q, theta, s, Orientation::Parallel);
    let peak = maximize_growth_rate(growth);
    if peak.value <= 0.0 {
        return Ok(UnstableBand::Empty);
    }
    if s == 0.0 {
        // the beam term alone stays positive for every Q once cos 2θ < 0
        return Ok(UnstableBand::Interval {
            upper: f64::INFINITY,
        });
    }
    let mut hi = peak.x;
    while growth(hi) > 0.0 {
        hi *= 2.0;
        if hi > SCAN_CEILING {
            return Ok(UnstableBand::Interval {
                upper: f64::INFINITY,
            });
        }
    }
    let upper = bisect_root(growth, peak.x, hi, 1e-12 * hi)
        .expect("growth changes sign between the peak and the doubled bracket");
    Ok(UnstableBand::Interval { upper })
}

fn select_mode<F>(growth: F, film: &FilmParameters, grid: &ScanGrid) -> ModeSelection
where
    F: Fn(f64, Orientation) -> f64,
{
    let parallel = maximize_growth_rate_on(|q| growth(q, Orientation::Parallel), grid);
    let perpendicular = maximize_growth_rate_on(|q| growth(q, Orientation::Perpendicular), grid);
    let (orientation, peak) = if perpendicular.value > parallel.value {
        (Orientation::Perpendicular, perpendicular)
    } else {
        (Orientation::Parallel, parallel)
    };
    let stable = peak.value <= 0.0;
    ModeSelection {
        stable,
        q_star: peak.x,
        orientation,
        wavelength: (!stable).then(|| 2.0 * PI * film.thickness / peak.x),
        growth_rate: peak.value,
    }
}

/// Most unstable mode of the full relation, comparing the two axis
/// orientations.
pub fn most_unstable_mode(beam: &BeamParameters, film: &FilmParameters) -> ModeSelection {
    most_unstable_mode_on(beam, film, &ScanGrid::default())
}

pub fn most_unstable_mode_on(
    beam: &BeamParameters,
    film: &FilmParameters,
    grid: &ScanGrid,
) -> ModeSelection {
    select_mode(
        |q, o| sigma_full(&Wavevector::along(o, q, film.thickness), beam, film).growth_rate(),
        film,
        grid,
    )
}

/// Most unstable mode of the longwave relation, found numerically.
pub fn most_unstable_mode_longwave(beam: &BeamParameters, film: &FilmParameters) -> ModeSelection {
    most_unstable_mode_longwave_on(beam, film, &ScanGrid::default())
}

pub fn most_unstable_mode_longwave_on(
    beam: &BeamParameters,
    film: &FilmParameters,
    grid: &ScanGrid,
) -> ModeSelection {
    select_mode(
        |q, o| sigma_longwave(&Wavevector::along(o, q, film.thickness), beam, film).growth_rate(),
        film,
        grid,
    )
}

/// Closed-form most unstable wavelength of the longwave relation, written
/// through the measured normal-incidence stress:
/// `λ* = 2π sqrt(4 γ h0 / (3 |T0(0)| |cos 2θ|))`.
pub fn wavelength_longwave(theta: f64, film: &FilmParameters, stress_normal: f64) -> Result<f64> {
    check_angle(theta)?;
    if !(stress_normal.is_finite() && stress_normal > 0.0) {
        return Err(invalid(
            "stress_normal",
            format!("must be > 0, got {stress_normal}"),
        ));
    }
    let c2 = (2.0 * theta).cos();
    if theta <= FRAC_PI_4 || c2 >= 0.0 {
        return Err(Error::NoUnstableMode {
            theta_deg: theta.to_degrees(),
        });
    }
    Ok(2.0
        * PI
        * (4.0 * film.surface_energy * film.thickness / (3.0 * stress_normal * c2.abs())).sqrt())
}

/// Check on a coarse grid of wavevectors that no oblique orientation grows
/// faster than the better of the two axes at the same `|k|`.
pub fn check_axis_dominance(beam: &BeamParameters, film: &FilmParameters) -> Result<()> {
    let h0 = film.thickness;
    for i in 0..12 {
        let q = 0.02 * 1.6f64.powi(i);
        let par =
            sigma_full(&Wavevector::along(Orientation::Parallel, q, h0), beam, film).growth_rate();
        let perp = sigma_full(
            &Wavevector::along(Orientation::Perpendicular, q, h0),
            beam,
            film,
        )
        .growth_rate();
        let ceiling = par.max(perp);
        let slack = 1e-12 * par.abs().max(perp.abs());
        for j in 1..8 {
            let phi = FRAC_PI_2 * j as f64 / 8.0;
            let k = Wavevector::new(q / h0 * phi.cos(), q / h0 * phi.sin());
            let mixed = sigma_full(&k, beam, film).growth_rate();
            if mixed > ceiling + slack {
                return Err(Error::Verification(format!(
                    "oblique wavevector beats both axes at theta = {:.3} deg, Q = {q:.4}, phi = {:.1} deg",
                    beam.theta.to_degrees(),
                    phi.to_degrees()
                )));
            }
        }
    }
    Ok(())
}

/// One angle of a wavelength sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub theta: f64,
    pub full: ModeSelection,
    pub longwave: ModeSelection,
    /// Phase velocity (m/s) of the full relation's most unstable mode; `None`
    /// when stable or when that mode has no downbeam component.
    pub phase_velocity: Option<f64>,
}

fn sweep_row(
    beam: &BeamParameters,
    film: &FilmParameters,
    theta: f64,
    grid: &ScanGrid,
) -> Result<SweepRow> {
    let beam = beam.with_theta(theta)?;
    check_axis_dominance(&beam, film)?;
    let full = most_unstable_mode_on(&beam, film, grid);
    let longwave = most_unstable_mode_longwave_on(&beam, film, grid);
    let phase_velocity = match (full.stable, full.orientation) {
        (false, Orientation::Parallel) => Some(phase_velocity(
            &Wavevector::along(Orientation::Parallel, full.q_star, film.thickness),
            &beam,
            film,
        )?),
        _ => None,
    };
    Ok(SweepRow {
        theta,
        full,
        longwave,
        phase_velocity,
    })
}

/// Most unstable modes of both relations at every angle in `thetas`
/// (radians), evaluated in parallel. Row order follows `thetas` and the
/// result is identical to [`angle_sweep_sequential`].
pub fn angle_sweep(
    beam: &BeamParameters,
    film: &FilmParameters,
    thetas: &[f64],
) -> Result<Vec<SweepRow>> {
    angle_sweep_on(beam, film, thetas, &ScanGrid::default())
}

pub fn angle_sweep_on(
    beam: &BeamParameters,
    film: &FilmParameters,
    thetas: &[f64],
    grid: &ScanGrid,
) -> Result<Vec<SweepRow>> {
    grid.validate()?;
    thetas
        .par_iter()
        .map(|&theta| sweep_row(beam, film, theta, grid))
        .collect()
}

pub fn angle_sweep_sequential(
    beam: &BeamParameters,
    film: &FilmParameters,
    thetas: &[f64],
) -> Result<Vec<SweepRow>> {
    let grid = ScanGrid::default();
    thetas
        .iter()
        .map(|&theta| sweep_row(beam, film, theta, &grid))
        .collect()
}
