//! Physical parameters, the beam strain-shape tensor, and the flat-film
//! steady state.
//!
//! Everything here is SI: flux in ions/m²/s, strain per ion in m²,
//! viscosity in Pa·s, surface energy in J/m², thickness in m. Angles are
//! radians measured from the surface normal.

use std::f64::consts::FRAC_PI_2;
use std::ops::{Add, Mul, Sub};

use crate::error::{invalid, Result};

/// A 3×3 real tensor indexed `(x, y, z)`, stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor3(pub [[f64; 3]; 3]);

impl Tensor3 {
    pub const ZERO: Tensor3 = Tensor3([[0.0; 3]; 3]);

    pub fn identity() -> Self {
        Self::diag(1.0, 1.0, 1.0)
    }

    pub fn diag(xx: f64, yy: f64, zz: f64) -> Self {
        Tensor3([[xx, 0.0, 0.0], [0.0, yy, 0.0], [0.0, 0.0, zz]])
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.0[row][col]
    }

    pub fn transpose(&self) -> Self {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in self.0.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                out[j][i] = *v;
            }
        }
        Tensor3(out)
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn scale(&self, factor: f64) -> Self {
        Tensor3(self.0.map(|row| row.map(|v| v * factor)))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Largest absolute entrywise difference between two tensors.
    pub fn max_abs_diff(&self, other: &Tensor3) -> f64 {
        (*self - *other).max_abs()
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.transpose()) <= tol
    }

    /// Traction `T·n` on a plane with unit normal `n`.
    pub fn dot(&self, n: [f64; 3]) -> [f64; 3] {
        self.0
            .map(|row| row[0] * n[0] + row[1] * n[1] + row[2] * n[2])
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Mul for Tensor3 {
    type Output = Tensor3;

    fn mul(self, rhs: Tensor3) -> Tensor3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        Tensor3(out)
    }
}

impl Add for Tensor3 {
    type Output = Tensor3;

    fn add(self, rhs: Tensor3) -> Tensor3 {
        let mut out = self.0;
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += rhs.0[i][j];
            }
        }
        Tensor3(out)
    }
}

impl Sub for Tensor3 {
    type Output = Tensor3;

    fn sub(self, rhs: Tensor3) -> Tensor3 {
        self + rhs.scale(-1.0)
    }
}

/// The ion beam: flux `f`, strain per ion `A`, and polar incidence angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamParameters {
    /// Ions per m² per second.
    pub flux: f64,
    /// Strain magnitude per ion, in m² (so that `flux * strain_per_ion` is a rate).
    pub strain_per_ion: f64,
    /// Incidence angle from the surface normal, radians.
    pub theta: f64,
}

impl BeamParameters {
    pub fn new(flux: f64, strain_per_ion: f64, theta: f64) -> Result<Self> {
        if !(flux.is_finite() && flux >= 0.0) {
            return Err(invalid(
                "flux",
                format!("must be finite and >= 0, got {flux}"),
            ));
        }
        if !(strain_per_ion.is_finite() && strain_per_ion >= 0.0) {
            return Err(invalid(
                "strain_per_ion",
                format!("must be finite and >= 0, got {strain_per_ion}"),
            ));
        }
        check_angle(theta)?;
        Ok(Self {
            flux,
            strain_per_ion,
            theta,
        })
    }

    /// Beam described only by its strain rate `f·A` (1/s). The flux carries
    /// the rate and the strain per ion is set to one.
    pub fn from_strain_rate(rate: f64, theta: f64) -> Result<Self> {
        Self::new(rate, 1.0, theta)
    }

    /// Strain rate `f·A` in 1/s.
    pub fn strain_rate(&self) -> f64 {
        self.flux * self.strain_per_ion
    }

    pub fn with_theta(&self, theta: f64) -> Result<Self> {
        Self::new(self.flux, self.strain_per_ion, theta)
    }
}

pub(crate) fn check_angle(theta: f64) -> Result<()> {
    // allow a few ulps of slack so degree conversions of 90 stay valid
    if !(theta.is_finite() && (-1e-15..=FRAC_PI_2 + 1e-15).contains(&theta)) {
        return Err(invalid(
            "theta",
            format!("must lie in [0, pi/2] radians, got {theta}"),
        ));
    }
    Ok(())
}

/// The irradiated amorphous film.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilmParameters {
    /// Ion-enhanced viscosity, Pa·s.
    pub viscosity: f64,
    /// Surface energy, J/m².
    pub surface_energy: f64,
    /// Film thickness, m.
    pub thickness: f64,
}

impl FilmParameters {
    pub fn new(viscosity: f64, surface_energy: f64, thickness: f64) -> Result<Self> {
        if !(viscosity.is_finite() && viscosity > 0.0) {
            return Err(invalid(
                "viscosity",
                format!("must be > 0, got {viscosity}"),
            ));
        }
        if !(surface_energy.is_finite() && surface_energy >= 0.0) {
            return Err(invalid(
                "surface_energy",
                format!("must be >= 0, got {surface_energy}"),
            ));
        }
        if !(thickness.is_finite() && thickness > 0.0) {
            return Err(invalid(
                "thickness",
                format!("must be > 0, got {thickness}"),
            ));
        }
        Ok(Self {
            viscosity,
            surface_energy,
            thickness,
        })
    }
}

/// The single number controlling the shape of the dispersion relation once
/// rates are measured in units of `f·A` and lengths in units of `h0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionlessGroups {
    /// `S = γ / (η f A h0)`.
    pub surface_tension_number: f64,
    pub theta: f64,
}

/// Flat film under steady irradiation: uniform pressure, linear shear
/// `u0 = c z`, and the in-plane stress tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Base pressure `p0`, Pa.
    pub pressure: f64,
    /// Shear coefficient `c` in `u0(z) = c z`, 1/s.
    pub shear_rate: f64,
    /// Steady stress `T0`, Pa.
    pub stress: Tensor3,
}

impl SteadyState {
    /// Downbeam velocity `u0(z)`; the steady flow has no y or z component.
    pub fn velocity(&self, z: f64) -> [f64; 3] {
        [self.shear_rate * z, 0.0, 0.0]
    }
}

/// Amorphous silicon under argon irradiation: surface energy, J/m².
pub const REFERENCE_SURFACE_ENERGY: f64 = 1.36;
/// Film thickness, m.
pub const REFERENCE_THICKNESS: f64 = 3e-9;
/// Measured stress magnitude at normal incidence, Pa.
pub const REFERENCE_STRESS_NORMAL: f64 = 1.5e9;
/// Strain rate `f A` used when only the stress is known, 1/s. Rates scale
/// with it; wavelengths and `S` do not.
pub const REFERENCE_STRAIN_RATE: f64 = 1.0;

/// Film with the reference constants; the viscosity follows from
/// `|T0(0)| = 6 η f A` at [`REFERENCE_STRAIN_RATE`].
pub fn reference_film() -> FilmParameters {
    FilmParameters {
        viscosity: REFERENCE_STRESS_NORMAL / (6.0 * REFERENCE_STRAIN_RATE),
        surface_energy: REFERENCE_SURFACE_ENERGY,
        thickness: REFERENCE_THICKNESS,
    }
}

pub fn reference_beam(theta: f64) -> Result<BeamParameters> {
    BeamParameters::from_strain_rate(REFERENCE_STRAIN_RATE, theta)
}

/// Rotation about the y axis by `theta`.
pub fn rotation_y(theta: f64) -> Tensor3 {
    let (s, c) = theta.sin_cos();
    Tensor3([[c, 0.0, -s], [0.0, 1.0, 0.0], [s, 0.0, c]])
}

/// Strain shape at normal incidence: in-plane expansion, vertical contraction.
pub fn normal_incidence_tensor() -> Tensor3 {
    Tensor3::diag(1.0, 1.0, -2.0)
}

/// Beam strain-shape tensor `D(θ)`, the normal-incidence shape rotated about y.
///
/// The conjugation is ordered so that `D_xz = +(3/2) sin 2θ`, which is the
/// sign that produces the downbeam steady shear.
pub fn apf_tensor(theta: f64) -> Tensor3 {
    rotation_y(theta) * normal_incidence_tensor() * rotation_y(-theta)
}

/// Closed form of [`apf_tensor`], kept separate so the two can be compared.
pub fn apf_tensor_closed_form(theta: f64) -> Tensor3 {
    let (s2, c2) = (2.0 * theta).sin_cos();
    Tensor3([
        [1.5 * c2 - 0.5, 0.0, 1.5 * s2],
        [0.0, 1.0, 0.0],
        [1.5 * s2, 0.0, -1.5 * c2 - 0.5],
    ])
}

/// Steady flat-film solution under the beam.
pub fn steady_state(beam: &BeamParameters, film: &FilmParameters) -> SteadyState {
    let rate = beam.strain_rate();
    let eta_rate = film.viscosity * rate;
    let (s2, c2) = (2.0 * beam.theta).sin_cos();
    let cos_sq = beam.theta.cos().powi(2);
    SteadyState {
        pressure: eta_rate * (3.0 * c2 + 1.0),
        shear_rate: 3.0 * rate * s2,
        stress: Tensor3::diag(-6.0 * eta_rate * c2, -6.0 * eta_rate * cos_sq, 0.0),
    }
}

/// Steady stress tensor assembled from the constitutive law
/// `T = -p I + 2η(Ė - fA D)` with the steady pressure and shear. Used to
/// check [`steady_state`]; the z-row and z-column should vanish.
pub fn steady_stress_from_constitutive_law(
    beam: &BeamParameters,
    film: &FilmParameters,
) -> Tensor3 {
    let steady = steady_state(beam, film);
    let half_shear = 0.5 * steady.shear_rate;
    let strain_rate = Tensor3([
        [0.0, 0.0, half_shear],
        [0.0, 0.0, 0.0],
        [half_shear, 0.0, 0.0],
    ]);
    let beam_rate = apf_tensor(beam.theta).scale(beam.strain_rate());
    Tensor3::identity().scale(-steady.pressure)
        + (strain_rate - beam_rate).scale(2.0 * film.viscosity)
}

/// Magnitude of the in-plane stress at normal incidence, `|T0(0)| = 6 η f A`.
pub fn stress_magnitude_at_normal(beam: &BeamParameters, film: &FilmParameters) -> f64 {
    6.0 * film.viscosity * beam.strain_rate()
}

/// Recover the product `η f A` from a measured normal-incidence stress.
pub fn infer_eta_fa_from_stress(stress_normal: f64) -> Result<f64> {
    if !(stress_normal.is_finite() && stress_normal >= 0.0) {
        return Err(invalid(
            "stress_normal",
            format!("must be finite and >= 0, got {stress_normal}"),
        ));
    }
    Ok(stress_normal / 6.0)
}

/// Surface-tension number `S = γ / (η f A h0)`.
pub fn surface_tension_number(
    beam: &BeamParameters,
    film: &FilmParameters,
) -> Result<DimensionlessGroups> {
    let denom = film.viscosity * beam.strain_rate() * film.thickness;
    if !(denom > 0.0) {
        return Err(invalid(
            "strain_rate",
            "surface-tension number needs eta * f * A * h0 > 0",
        ));
    }
    Ok(DimensionlessGroups {
        surface_tension_number: film.surface_energy / denom,
        theta: beam.theta,
    })
}

/// `S` expressed through the measured stress: `S = 6γ / (|T0(0)| h0)`.
pub fn surface_tension_number_from_stress(
    surface_energy: f64,
    stress_normal: f64,
    thickness: f64,
) -> Result<f64> {
    let denom = stress_normal * thickness;
    if !(denom > 0.0) {
        return Err(invalid(
            "stress_normal",
            "surface-tension number needs |T0(0)| * h0 > 0",
        ));
    }
    Ok(6.0 * surface_energy / denom)
}
