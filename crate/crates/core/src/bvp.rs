//! Closed-form solution of the linearized Stokes problem for one surface
//! mode, step by step: bottom constants, the 3×3 top-boundary system,
//! field profiles and the growth rate from the kinematic condition.
//!
//! The surface is `h0 + h1 exp(i k·x)` and the crystalline interface moves
//! with it (`g1 = h1`). Results are per unit amplitude where noted.

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::dispersion::{ComplexGrowthRate, Wavevector};
use crate::error::{invalid, Error, Result};
use crate::model::{steady_state, BeamParameters, FilmParameters, SteadyState};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest tolerated `cond₁(M)` in the direct solve.
pub const MAX_MATRIX_CONDITION: f64 = 1e12;

/// Largest tolerated amplification `(|w1(h0)| + |u0 k1 h1|) / |σ h1|` in the
/// kinematic step. Beyond it the cancellation costs more than the
/// `1e-10` accuracy the pipeline is held to; this happens as `Q -> 0`.
pub const MAX_KINEMATIC_AMPLIFICATION: f64 = 1e5;

/// Integration constants of the perturbation fields. `C, E, G` fix the
/// velocity at `z = 0`, `D, F, H` come from the top boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeCoefficients {
    pub c: Complex64,
    pub d: Complex64,
    pub e: Complex64,
    pub f: Complex64,
    pub g: Complex64,
    pub h: Complex64,
}

impl ModeCoefficients {
    pub fn is_finite(&self) -> bool {
        [self.c, self.d, self.e, self.f, self.g, self.h]
            .iter()
            .all(|z| z.is_finite())
    }

    pub fn scale(&self, factor: f64) -> Self {
        ModeCoefficients {
            c: self.c * factor,
            d: self.d * factor,
            e: self.e * factor,
            f: self.f * factor,
            g: self.g * factor,
            h: self.h * factor,
        }
    }
}

/// How the bottom boundary follows the surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BottomBoundary {
    /// The interface is displaced with the surface, `g1 = h1`.
    #[default]
    Conforming,
    /// Diagnostic: the interface stays flat, `g1 = 0`.
    Flat,
}

/// `(C, E, G)` from no-slip on the displaced interface,
/// `v1(0) + v0'(0) h1 = 0`.
pub fn bottom_constants(
    theta: f64,
    strain_rate: f64,
    h1: f64,
) -> (Complex64, Complex64, Complex64) {
    let c = -3.0 * strain_rate * (2.0 * theta).sin() * h1;
    (
        Complex64::new(c, 0.0),
        Complex64::new(0.0, 0.0),
        Complex64::new(0.0, 0.0),
    )
}

fn magnitude_and_q(k: &Wavevector, h0: f64) -> Result<(f64, f64)> {
    if !k.is_finite() {
        return Err(invalid("wavevector", "components must be finite"));
    }
    let r = k.magnitude();
    let q = r * h0;
    if q == 0.0 {
        return Err(Error::DegenerateWavevector(
            "Q = 0 has no boundary system; σ(0) = 0",
        ));
    }
    Ok((r, q))
}

/// Top-boundary matrix acting on `(D, F, H)`, units of 1/length.
pub fn boundary_matrix(k: &Wavevector, h0: f64) -> Result<Matrix3<Complex64>> {
    let (r, q) = magnitude_and_q(k, h0)?;
    let (k1, k2) = (k.k1, k.k2);
    let (ch, sh) = (q.cosh(), q.sinh());
    let bend = ch + 2.0 * q * sh;
    let re = |x: f64| Complex64::new(x, 0.0);
    let off = re(k1 * k2 / r * bend);
    let m13 = -2.0 * I * k1 * q * ch;
    let m23 = -2.0 * I * k2 * q * ch;
    Ok(Matrix3::new(
        re(r * ch + k1 * k1 / r * bend),
        off,
        m13,
        off,
        re(r * ch + k2 * k2 / r * bend),
        m23,
        m13,
        m23,
        re(2.0 * r * (ch - q * sh)),
    ))
}

/// `Δ = 2 R³ cosh Q (1 + 2Q² + cosh 2Q)`, the determinant of
/// [`boundary_matrix`].
pub fn boundary_determinant(k: &Wavevector, h0: f64) -> Result<f64> {
    let (r, q) = magnitude_and_q(k, h0)?;
    Ok(2.0 * r.powi(3) * q.cosh() * (1.0 + 2.0 * q * q + (2.0 * q).cosh()))
}

/// Right-hand side of the top-boundary system in stress units, split by
/// origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRHS {
    /// Curvature pressure `-γ κ1` acting on the normal.
    pub surface_tension: Vector3<Complex64>,
    /// Steady beam stress rotated onto the tilted surface normal.
    pub bulk_stress: Vector3<Complex64>,
    /// Stress carried by the shear flow over the displaced bottom.
    pub bottom: Vector3<Complex64>,
}

impl BoundaryRHS {
    pub fn total(&self) -> Vector3<Complex64> {
        self.surface_tension + self.bulk_stress + self.bottom
    }

    /// The three components of [`BoundaryRHS::total`].
    pub fn components(&self) -> [Complex64; 3] {
        let t = self.total();
        [t[0], t[1], t[2]]
    }

    pub fn is_finite(&self) -> bool {
        self.total().iter().all(|z| z.is_finite())
    }
}

/// Stress forcing of the top-boundary system for amplitude `h1`.
pub fn boundary_rhs(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
    h1: f64,
) -> Result<BoundaryRHS> {
    let (r, q) = magnitude_and_q(k, film.thickness)?;
    let (k1, k2) = (k.k1, k.k2);
    let theta = beam.theta;
    let stress_scale = film.viscosity * beam.strain_rate() * h1;
    let (ch, sh) = (q.cosh(), q.sinh());
    let zero = Complex64::new(0.0, 0.0);

    let surface_tension = Vector3::new(
        zero,
        zero,
        Complex64::new(-film.surface_energy * r * r * h1, 0.0),
    );
    let bulk_stress = Vector3::new(
        -6.0 * stress_scale * I * k1 * (2.0 * theta).cos(),
        -6.0 * stress_scale * I * k2 * theta.cos().powi(2),
        zero,
    );
    let shear = 3.0 * stress_scale * (2.0 * theta).sin();
    let lift = sh + 2.0 * q * ch;
    let bottom = Vector3::new(
        Complex64::new(shear * (r * sh + k1 * k1 / r * lift), 0.0),
        Complex64::new(shear * k1 * k2 / r * lift, 0.0),
        -2.0 * I * shear * k1 * q * sh,
    );
    Ok(BoundaryRHS {
        surface_tension,
        bulk_stress,
        bottom,
    })
}

/// `(D, F, H)` by Cramer's rule. `forcing` is the right-hand side divided
/// by the viscosity.
pub fn solve_coefficients_closed(
    k: &Wavevector,
    h0: f64,
    forcing: &Vector3<Complex64>,
) -> Result<Vector3<Complex64>> {
    let (r, q) = magnitude_and_q(k, h0)?;
    let delta = boundary_determinant(k, h0)?;
    let (k1, k2) = (k.k1, k.k2);
    let (ch, sh) = (q.cosh(), q.sinh());
    let (a, b, g) = (forcing[0], forcing[1], forcing[2]);
    let diag = ch * ch - q * sh * ch;
    let cross = ch * ch + q * sh * ch + 2.0 * q * q;
    let twist = a * k2 - b * k1;
    let couple = 2.0 * I * r * q * ch * ch;
    let d = 2.0 * a * r * r * diag + 2.0 * k2 * twist * cross + couple * g * k1;
    let f = 2.0 * b * r * r * diag - 2.0 * k1 * twist * cross + couple * g * k2;
    let h = couple * (a * k1 + b * k2) + 2.0 * g * r * r * (ch * ch + q * sh * ch);
    Ok(Vector3::new(d, f, h) / Complex64::new(delta, 0.0))
}

fn norm1(m: &Matrix3<Complex64>) -> f64 {
    (0..3)
        .map(|j| (0..3).map(|i| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Generic 3×3 complex solve by LU with partial pivoting. Fails on an exactly
/// singular matrix, or when `cond₁` exceeds [`MAX_MATRIX_CONDITION`].
pub fn solve_coefficients_direct(
    matrix: &Matrix3<Complex64>,
    rhs: &Vector3<Complex64>,
) -> Result<Vector3<Complex64>> {
    if !matrix.iter().chain(rhs.iter()).all(|z| z.is_finite()) {
        return Err(invalid("matrix", "entries must be finite"));
    }
    let lu = matrix.lu();
    let inverse = lu.try_inverse().ok_or(Error::Singular)?;
    let condition = norm1(matrix) * norm1(&inverse);
    if !(condition.is_finite() && condition <= MAX_MATRIX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    lu.solve(rhs).ok_or(Error::Singular)
}

/// Assemble all six constants for amplitude `h1`.
pub fn mode_coefficients(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
    h1: f64,
    bottom: BottomBoundary,
) -> Result<ModeCoefficients> {
    let (c, e, g) = match bottom {
        BottomBoundary::Conforming => bottom_constants(beam.theta, beam.strain_rate(), h1),
        BottomBoundary::Flat => bottom_constants(beam.theta, beam.strain_rate(), 0.0),
    };
    let mut rhs = boundary_rhs(k, beam, film, h1)?;
    if bottom == BottomBoundary::Flat {
        rhs.bottom = Vector3::zeros();
    }
    let dfh = solve_coefficients_closed(k, film.thickness, &(rhs.total().unscale(film.viscosity)))?;
    Ok(ModeCoefficients {
        c,
        d: dfh[0],
        e,
        f: dfh[1],
        g,
        h: dfh[2],
    })
}

/// Perturbation pressure and velocity at one height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldValues {
    pub pressure: Complex64,
    pub u: Complex64,
    pub v: Complex64,
    pub w: Complex64,
}

/// Pointwise residuals of the bulk equations, each relative to the size of
/// the terms it balances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BulkResiduals {
    pub continuity: f64,
    pub x_momentum: f64,
    pub y_momentum: f64,
    pub z_momentum: f64,
}

impl BulkResiduals {
    pub fn max(&self) -> f64 {
        self.continuity
            .max(self.x_momentum)
            .max(self.y_momentum)
            .max(self.z_momentum)
    }
}

/// Perturbation fields `p1, u1, v1, w1` as functions of height.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldProfiles {
    pub coefficients: ModeCoefficients,
    pub wavevector: Wavevector,
    pub viscosity: f64,
    magnitude: f64,
}

/// Profiles built from a set of constants.
pub fn evaluate_fields(
    coefficients: ModeCoefficients,
    k: &Wavevector,
    viscosity: f64,
    h0: f64,
) -> Result<FieldProfiles> {
    let (r, _) = magnitude_and_q(k, h0)?;
    Ok(FieldProfiles {
        coefficients,
        wavevector: *k,
        viscosity,
        magnitude: r,
    })
}

/// `a cosh(Rz) + b sinh(Rz) + c z cosh(Rz) + d z sinh(Rz)`.
#[derive(Debug, Clone, Copy)]
struct HyperbolicProfile([Complex64; 4]);

impl HyperbolicProfile {
    /// Value and first two derivatives at `z`.
    fn jet(&self, r: f64, z: f64) -> [Complex64; 3] {
        let [a, b, c, d] = self.0;
        let (ch, sh) = ((r * z).cosh(), (r * z).sinh());
        [
            a * ch + b * sh + z * (c * ch + d * sh),
            r * (a * sh + b * ch) + c * ch + d * sh + r * z * (c * sh + d * ch),
            r * r * (a * ch + b * sh) + 2.0 * r * (c * sh + d * ch) + r * r * z * (c * ch + d * sh),
        ]
    }
}

impl FieldProfiles {
    /// Pressure, u, v, w in hyperbolic form.
    fn components(&self) -> [HyperbolicProfile; 4] {
        let ModeCoefficients { c, d, e, f, g, h } = self.coefficients;
        let (k1, k2, r) = (self.wavevector.k1, self.wavevector.k2, self.magnitude);
        let zero = Complex64::new(0.0, 0.0);
        let odd = r * g + I * k1 * d + I * k2 * f;
        let even = r * h + I * k1 * c + I * k2 * e;
        let eta = self.viscosity;
        [
            HyperbolicProfile([-2.0 * eta * even, -2.0 * eta * odd, zero, zero]),
            HyperbolicProfile([c, d, -I * k1 * odd / r, -I * k1 * even / r]),
            HyperbolicProfile([e, f, -I * k2 * odd / r, -I * k2 * even / r]),
            HyperbolicProfile([g, h, -even, -odd]),
        ]
    }

    pub fn at(&self, z: f64) -> FieldValues {
        let [p, u, v, w] = self.components().map(|c| c.jet(self.magnitude, z)[0]);
        FieldValues {
            pressure: p,
            u,
            v,
            w,
        }
    }

    /// Residuals of continuity and the three momentum equations at `z`.
    /// Each term is differentiated exactly, then the equations are summed.
    pub fn bulk_residuals(&self, z: f64) -> BulkResiduals {
        let (k1, k2, r) = (self.wavevector.k1, self.wavevector.k2, self.magnitude);
        let eta = self.viscosity;
        let [p, u, v, w] = self.components().map(|c| c.jet(r, z));
        let speed = u[0].norm() + v[0].norm() + w[0].norm();

        let continuity = I * k1 * u[0] + I * k2 * v[0] + w[1];
        let continuity_scale = r * speed + w[1].norm();

        let x_mom = eta * (u[2] - r * r * u[0]) - I * k1 * p[0];
        let y_mom = eta * (v[2] - r * r * v[0]) - I * k2 * p[0];
        let z_mom = eta * (w[2] - r * r * w[0]) - p[1];
        let momentum_scale = eta * (r * r * speed + u[2].norm() + v[2].norm() + w[2].norm())
            + r * p[0].norm()
            + p[1].norm();

        let rel = |x: Complex64, scale: f64| {
            if scale > 0.0 {
                x.norm() / scale
            } else {
                x.norm()
            }
        };
        BulkResiduals {
            continuity: rel(continuity, continuity_scale),
            x_momentum: rel(x_mom, momentum_scale),
            y_momentum: rel(y_mom, momentum_scale),
            z_momentum: rel(z_mom, momentum_scale),
        }
    }
}

/// `σ = [w1(h0) - u0(h0) i k1 h1 - v0(h0) i k2 h1] / h1`.
pub fn sigma_from_kinematic(
    profiles: &FieldProfiles,
    steady: &SteadyState,
    h0: f64,
    h1: f64,
) -> Result<ComplexGrowthRate> {
    let (sigma, _) = kinematic_terms(profiles, steady, h0, h1)?;
    Ok(ComplexGrowthRate::new(sigma))
}

fn kinematic_terms(
    profiles: &FieldProfiles,
    steady: &SteadyState,
    h0: f64,
    h1: f64,
) -> Result<(Complex64, f64)> {
    if !(h1.is_finite() && h1 != 0.0) {
        return Err(invalid(
            "amplitude",
            format!("must be finite and nonzero, got {h1}"),
        ));
    }
    let k = profiles.wavevector;
    let [u0, v0, _] = steady.velocity(h0);
    let w1 = profiles.at(h0).w;
    let advection = I * (u0 * k.k1 + v0 * k.k2) * h1;
    let sigma = (w1 - advection) / h1;
    let amplification = (w1.norm() + advection.norm()) / (sigma.norm() * h1.abs());
    Ok((sigma, amplification))
}

/// Options for [`pipeline_sigma`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PipelineOptions {
    pub bottom: BottomBoundary,
    /// Solve with the direct LU instead of Cramer's rule.
    pub direct_solve: bool,
    /// Relative perturbation `(row, col, ε)` of one matrix entry; forces the
    /// direct solve. Used to check that verification detects corruption.
    pub matrix_perturbation: Option<(usize, usize, f64)>,
    /// Perturbation amplitude; defaults to 1 when zero.
    pub amplitude: f64,
}

/// Output of the full pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipelineResult {
    pub sigma: ComplexGrowthRate,
    pub coefficients: ModeCoefficients,
    /// Cancellation factor of the kinematic step.
    pub amplification: f64,
}

/// Growth rate through the explicit chain constants → fields → kinematic
/// condition. `k = 0` returns `σ = 0` without solving.
pub fn pipeline_sigma(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
    options: &PipelineOptions,
) -> Result<PipelineResult> {
    let h1 = if options.amplitude == 0.0 {
        1.0
    } else {
        options.amplitude
    };
    if k.is_finite() && k.magnitude() == 0.0 {
        return Ok(PipelineResult {
            sigma: ComplexGrowthRate::zero(),
            coefficients: ModeCoefficients {
                c: Complex64::new(0.0, 0.0),
                d: Complex64::new(0.0, 0.0),
                e: Complex64::new(0.0, 0.0),
                f: Complex64::new(0.0, 0.0),
                g: Complex64::new(0.0, 0.0),
                h: Complex64::new(0.0, 0.0),
            },
            amplification: 1.0,
        });
    }
    let h0 = film.thickness;
    let mut coefficients = mode_coefficients(k, beam, film, h1, options.bottom)?;
    if options.direct_solve || options.matrix_perturbation.is_some() {
        let mut matrix = boundary_matrix(k, h0)?;
        if let Some((i, j, eps)) = options.matrix_perturbation {
            if i > 2 || j > 2 {
                return Err(invalid(
                    "matrix_perturbation",
                    format!("entry ({i}, {j}) out of range"),
                ));
            }
            matrix[(i, j)] *= 1.0 + eps;
        }
        let mut rhs = boundary_rhs(k, beam, film, h1)?;
        if options.bottom == BottomBoundary::Flat {
            rhs.bottom = Vector3::zeros();
        }
        let dfh = solve_coefficients_direct(&matrix, &(rhs.total().unscale(film.viscosity)))?;
        coefficients.d = dfh[0];
        coefficients.f = dfh[1];
        coefficients.h = dfh[2];
    }
    let profiles = evaluate_fields(coefficients, k, film.viscosity, h0)?;
    let steady = steady_state(beam, film);
    let (sigma, amplification) = kinematic_terms(&profiles, &steady, h0, h1)?;
    if !(amplification <= MAX_KINEMATIC_AMPLIFICATION) {
        return Err(Error::IllConditioned {
            condition: amplification,
        });
    }
    Ok(PipelineResult {
        sigma: ComplexGrowthRate::new(sigma),
        coefficients,
        amplification,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dispersion::{sigma_full, Orientation};
    use crate::model::reference_film;
    use std::f64::consts::FRAC_PI_4;

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn film() -> FilmParameters {
        FilmParameters::new(2.0, 0.7, 1.3).unwrap()
    }

    #[test]
    fn bottom_constants_examples() {
        assert_eq!(bottom_constants(0.0, 1.0, 1.0).0, Complex64::new(0.0, 0.0));
        let (c, e, g) = bottom_constants(FRAC_PI_4, 1.0, 1.0);
        assert!((c.re + 3.0).abs() < 1e-15 && c.im == 0.0);
        assert_eq!((e, g), (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)));
        let c2 = bottom_constants(0.6, 1.7, 2.0).0;
        let c1 = bottom_constants(0.6, 1.7, 1.0).0;
        assert_eq!(c2, 2.0 * c1);
    }

    #[test]
    fn matrix_is_symmetric_with_printed_determinant() {
        let h0 = 3.0;
        let k = Wavevector::new(0.3, 0.2);
        let m = boundary_matrix(&k, h0).unwrap();
        assert!((m - m.transpose()).iter().all(|z| z.norm() <= 1e-14));
        for (k1, k2) in [(0.3, 0.2), (0.01, 0.0), (0.0, 0.7), (1.1, -0.4), (2.0, 1.0)] {
            let k = Wavevector::new(k1, k2);
            let det = boundary_matrix(&k, h0).unwrap().determinant();
            let delta = boundary_determinant(&k, h0).unwrap();
            assert!(rel(det, Complex64::new(delta, 0.0)) <= 1e-10, "{k1} {k2}");
        }
    }

    #[test]
    fn matrix_decouples_without_cross_component() {
        let m = boundary_matrix(&Wavevector::new(0.4, 0.0), 2.0).unwrap();
        for (i, j) in [(0, 1), (1, 0), (1, 2), (2, 1)] {
            assert_eq!(m[(i, j)], Complex64::new(0.0, 0.0));
        }
        assert!(m[(1, 1)].norm() > 0.0);
    }

    #[test]
    fn zero_wavevector_is_rejected() {
        let k = Wavevector::new(0.0, 0.0);
        assert!(matches!(
            boundary_matrix(&k, 1.0),
            Err(Error::DegenerateWavevector(_))
        ));
        let beam = BeamParameters::from_strain_rate(1.0, 1.0).unwrap();
        let r = pipeline_sigma(&k, &beam, &film(), &PipelineOptions::default()).unwrap();
        assert_eq!(r.sigma.sigma, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn rhs_examples() {
        let k = Wavevector::new(0.3, 0.2);
        let no_beam = BeamParameters::from_strain_rate(0.0, 0.7).unwrap();
        let t = boundary_rhs(&k, &no_beam, &film(), 1.0).unwrap().total();
        assert_eq!(t[0], Complex64::new(0.0, 0.0));
        assert_eq!(t[1], Complex64::new(0.0, 0.0));
        assert!((t[2].re + 0.7 * 0.13).abs() < 1e-15);

        let normal = BeamParameters::from_strain_rate(1.5, 0.0).unwrap();
        let rhs = boundary_rhs(&k, &normal, &film(), 1.0).unwrap();
        assert!(rhs.bottom.iter().all(|z| z.norm() == 0.0));
        let scale = 6.0 * 2.0 * 1.5;
        assert!((rhs.bulk_stress[0] - Complex64::new(0.0, -scale * 0.3)).norm() < 1e-14);
        assert!((rhs.bulk_stress[1] - Complex64::new(0.0, -scale * 0.2)).norm() < 1e-14);

        let oblique = BeamParameters::from_strain_rate(1.0, FRAC_PI_4).unwrap();
        let no_tension = FilmParameters::new(2.0, 0.0, 1.3).unwrap();
        let rhs = boundary_rhs(&k, &oblique, &no_tension, 1.0).unwrap();
        assert!(rhs.bottom.iter().all(|z| z.norm() > 0.0));
        assert!(rhs.surface_tension.iter().all(|z| z.norm() == 0.0));
        assert!(rhs.bulk_stress[0].norm() < 1e-15);
    }

    #[test]
    fn cramer_matches_direct_solve() {
        let h0 = 1.3;
        for theta in [0.0, 0.4, FRAC_PI_4, 1.1, 1.5] {
            let beam = BeamParameters::from_strain_rate(1.0, theta).unwrap();
            for q in [0.1, 0.5, 1.0, 2.0, 3.0] {
                for o in [Orientation::Parallel, Orientation::Perpendicular] {
                    let k = Wavevector::along(o, q, h0);
                    let forcing = boundary_rhs(&k, &beam, &film(), 1.0)
                        .unwrap()
                        .total()
                        .unscale(2.0);
                    let closed = solve_coefficients_closed(&k, h0, &forcing).unwrap();
                    let m = boundary_matrix(&k, h0).unwrap();
                    let direct = solve_coefficients_direct(&m, &forcing).unwrap();
                    let scale = direct.norm();
                    assert!((closed - direct).norm() <= 1e-12 * scale, "{theta} {q} {o}");
                    assert!((m * direct - forcing).norm() <= 1e-12 * forcing.norm());
                }
            }
        }
        let zero = Vector3::zeros();
        let k = Wavevector::new(0.3, 0.1);
        assert_eq!(solve_coefficients_closed(&k, h0, &zero).unwrap(), zero);
    }

    #[test]
    fn cross_component_decouples_in_cramer_form() {
        let k = Wavevector::new(0.5, 0.0);
        let forcing = Vector3::new(
            Complex64::new(1.0, 0.5),
            Complex64::new(0.0, 0.0),
            Complex64::new(-0.3, 2.0),
        );
        let x = solve_coefficients_closed(&k, 1.0, &forcing).unwrap();
        assert_eq!(x[1], Complex64::new(0.0, 0.0));
        let forcing = Vector3::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(0.7, 0.0),
            Complex64::new(0.0, 0.0),
        );
        let x = solve_coefficients_closed(&k, 1.0, &forcing).unwrap();
        assert!(x[1].norm() > 0.0 && x[0].norm() == 0.0 && x[2].norm() == 0.0);
    }

    #[test]
    fn direct_solve_identity_and_singular() {
        let one = Complex64::new(1.0, 0.0);
        let b = Vector3::new(one, 2.0 * one, 3.0 * one);
        assert_eq!(
            solve_coefficients_direct(&Matrix3::identity(), &b).unwrap(),
            b
        );
        let mut m = Matrix3::identity();
        m[(2, 2)] = Complex64::new(0.0, 0.0);
        assert!(matches!(
            solve_coefficients_direct(&m, &b),
            Err(Error::Singular)
        ));
        m[(2, 2)] = Complex64::new(1e-14, 0.0);
        assert!(matches!(
            solve_coefficients_direct(&m, &b),
            Err(Error::IllConditioned { .. })
        ));
    }

    #[test]
    fn fields_satisfy_bulk_equations_and_bottom_condition() {
        let h0 = 1.3;
        for theta in [0.3, 1.0] {
            let beam = BeamParameters::from_strain_rate(1.0, theta).unwrap();
            for (k1, k2) in [(0.4, 0.0), (0.0, 1.1), (0.9, 0.6), (2.0, 1.5)] {
                let k = Wavevector::new(k1, k2);
                let coeffs =
                    mode_coefficients(&k, &beam, &film(), 1.0, BottomBoundary::Conforming).unwrap();
                let fields = evaluate_fields(coeffs, &k, 2.0, h0).unwrap();
                let at0 = fields.at(0.0);
                assert_eq!(at0.u, coeffs.c);
                assert_eq!(
                    (at0.v, at0.w),
                    (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
                );
                for i in 0..20 {
                    let z = h0 * i as f64 / 19.0;
                    let res = fields.bulk_residuals(z);
                    assert!(res.max() <= 1e-10, "z = {z}: {res:?}");
                }
            }
        }
    }

    #[test]
    fn exact_derivatives_match_finite_differences() {
        let h0 = 1.3;
        let beam = BeamParameters::from_strain_rate(1.0, 0.7).unwrap();
        let k = Wavevector::new(0.9, 0.6);
        let coeffs =
            mode_coefficients(&k, &beam, &film(), 1.0, BottomBoundary::Conforming).unwrap();
        let fields = evaluate_fields(coeffs, &k, 2.0, h0).unwrap();
        let r = k.magnitude();
        let step = 1e-3;
        for (i, comp) in fields.components().iter().enumerate() {
            for z in [0.0, 0.4, 1.3] {
                let f = |x: f64| comp.jet(r, x)[0];
                let fd1 = (f(z + step) - f(z - step)) / (2.0 * step);
                let fd2 = (f(z + step) - 2.0 * f(z) + f(z - step)) / (step * step);
                let [_, d1, d2] = comp.jet(r, z);
                let scale = 1.0 + f(z).norm();
                assert!((fd1 - d1).norm() <= 1e-5 * scale, "component {i} z {z}");
                assert!((fd2 - d2).norm() <= 1e-4 * scale, "component {i} z {z}");
            }
        }
    }

    #[test]
    fn pipeline_matches_closed_form() {
        let film = film();
        for theta in [0.0, 0.2, 0.8, 1.2, 1.5] {
            let beam = BeamParameters::from_strain_rate(0.9, theta).unwrap();
            for (k1, k2) in [(0.2, 0.0), (0.0, 0.5), (0.7, 0.4), (1.9, 0.3)] {
                let k = Wavevector::new(k1, k2);
                let closed = sigma_full(&k, &beam, &film).sigma;
                let r = pipeline_sigma(&k, &beam, &film, &PipelineOptions::default()).unwrap();
                assert!(rel(r.sigma.sigma, closed) <= 1e-10, "{theta} {k1} {k2}");
            }
        }
    }

    #[test]
    fn growth_rate_is_real_at_normal_incidence() {
        let beam = BeamParameters::from_strain_rate(1.0, 0.0).unwrap();
        for k in [Wavevector::new(0.5, 0.0), Wavevector::new(0.3, 0.9)] {
            let r = pipeline_sigma(&k, &beam, &film(), &PipelineOptions::default()).unwrap();
            assert_eq!(r.sigma.sigma.im, 0.0);
        }
    }

    #[test]
    fn growth_rate_does_not_depend_on_amplitude() {
        let beam = BeamParameters::from_strain_rate(1.0, 1.1).unwrap();
        let k = Wavevector::new(0.6, 0.25);
        let base = pipeline_sigma(&k, &beam, &film(), &PipelineOptions::default()).unwrap();
        let opts = PipelineOptions {
            amplitude: 10.0,
            ..Default::default()
        };
        let scaled = pipeline_sigma(&k, &beam, &film(), &opts).unwrap();
        assert!(
            rel(scaled.sigma.sigma, base.sigma.sigma) <= 1e-12,
            "{:?} {:?}",
            scaled.sigma,
            base.sigma
        );
        let ratio = scaled.coefficients.d / base.coefficients.d;
        assert!((ratio - 10.0).norm() < 1e-12);
    }

    #[test]
    fn flat_bottom_keeps_only_shear_translation() {
        let beam = BeamParameters::from_strain_rate(1.0, 1.0).unwrap();
        let film = film();
        let opts = PipelineOptions {
            bottom: BottomBoundary::Flat,
            ..Default::default()
        };
        for q in [0.2, 1.0, 2.5] {
            let k = Wavevector::along(Orientation::Parallel, q, film.thickness);
            let flat = pipeline_sigma(&k, &beam, &film, &opts).unwrap().sigma.sigma;
            let translation = -3.0 * (2.0f64).sin() * q;
            assert!(
                (flat.im - translation).abs() <= 1e-12 * translation.abs(),
                "q = {q}"
            );
            let full = sigma_full(&k, &beam, &film).sigma;
            assert!((flat.re - full.re).abs() <= 1e-12 * full.re.abs());
        }
    }

    #[test]
    fn perturbed_matrix_breaks_agreement() {
        let film = reference_film();
        let beam = BeamParameters::from_strain_rate(1.0, 1.0).unwrap();
        let k = Wavevector::along(Orientation::Parallel, 0.8, film.thickness);
        let closed = sigma_full(&k, &beam, &film).sigma;
        let opts = PipelineOptions {
            matrix_perturbation: Some((0, 0, 1e-6)),
            ..Default::default()
        };
        let r = pipeline_sigma(&k, &beam, &film, &opts).unwrap();
        assert!(rel(r.sigma.sigma, closed) > 1e-10);
        let opts = PipelineOptions {
            direct_solve: true,
            ..Default::default()
        };
        let r = pipeline_sigma(&k, &beam, &film, &opts).unwrap();
        assert!(rel(r.sigma.sigma, closed) <= 1e-12);
    }

    #[test]
    fn vanishing_wavenumber_is_flagged() {
        let film = reference_film();
        let beam = BeamParameters::from_strain_rate(1.0, 1.0).unwrap();
        let k = Wavevector::along(Orientation::Parallel, 1e-7, film.thickness);
        assert!(matches!(
            pipeline_sigma(&k, &beam, &film, &PipelineOptions::default()),
            Err(Error::IllConditioned { .. })
        ));
        let k = Wavevector::along(Orientation::Parallel, 0.05, film.thickness);
        assert!(pipeline_sigma(&k, &beam, &film, &PipelineOptions::default()).is_ok());
    }
}
