//! The effective-body-force (EBF) model's steady stress and ripple velocity,
//! side by side with the anisotropic-plastic-flow predictions.
//!
//! EBF coordinates put the free surface at `z = 0` and the crystalline
//! interface at `z = -d`. Stresses are 2×2 tensors over `(x, z)`.

use std::fmt;
use std::sync::Arc;

use crate::dispersion::phase_velocity_closed_form;
use crate::error::{invalid, Error, Result};
use crate::model::{check_angle, steady_state, BeamParameters, FilmParameters};

/// Angle response `Ψ` of the body force.
#[derive(Clone, Default)]
pub enum AngleResponse {
    /// `Ψ(θ) = cos θ`, proportional to the flux density on the surface.
    #[default]
    Cosine,
    Constant(f64),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl AngleResponse {
    pub fn eval(&self, theta: f64) -> f64 {
        match self {
            AngleResponse::Cosine => theta.cos(),
            AngleResponse::Constant(c) => *c,
            AngleResponse::Custom(f) => f(theta),
        }
    }
}

impl fmt::Debug for AngleResponse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AngleResponse::Cosine => write!(f, "Cosine"),
            AngleResponse::Constant(c) => write!(f, "Constant({c})"),
            AngleResponse::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Parameters of the EBF model.
#[derive(Debug, Clone)]
pub struct EBFParameters {
    /// Stress-gradient magnitude `f_E`, N/m³.
    pub body_force: f64,
    /// Film depth `d`, m.
    pub depth: f64,
    /// Viscosity, Pa·s.
    pub viscosity: f64,
    pub angle_response: AngleResponse,
}

impl EBFParameters {
    pub fn new(body_force: f64, depth: f64, viscosity: f64) -> Result<Self> {
        if !body_force.is_finite() {
            return Err(invalid(
                "body_force",
                format!("must be finite, got {body_force}"),
            ));
        }
        if !(depth.is_finite() && depth > 0.0) {
            return Err(invalid("depth", format!("must be > 0, got {depth}")));
        }
        if !(viscosity.is_finite() && viscosity > 0.0) {
            return Err(invalid(
                "viscosity",
                format!("must be > 0, got {viscosity}"),
            ));
        }
        Ok(EBFParameters {
            body_force,
            depth,
            viscosity,
            angle_response: AngleResponse::Cosine,
        })
    }

    pub fn with_angle_response(mut self, angle_response: AngleResponse) -> Self {
        self.angle_response = angle_response;
        self
    }
}

/// Steady EBF stress `f_E Ψ(θ) z [[cos θ, -sin θ], [-sin θ, cos θ]]`.
///
/// The additional tensor `T^S` of the EBF constitutive law has no defined
/// form and is left out; see [`EBF_STRESS_OMITS_TS`].
pub fn ebf_steady_stress(z: f64, theta: f64, params: &EBFParameters) -> Result<[[f64; 2]; 2]> {
    check_angle(theta)?;
    if !(z >= -params.depth && z <= 0.0) {
        return Err(Error::OutsideFilm {
            z,
            depth: params.depth,
        });
    }
    let scale = params.body_force * params.angle_response.eval(theta) * z;
    let (s, c) = theta.sin_cos();
    Ok([[scale * c, -scale * s], [-scale * s, scale * c]])
}

/// Recorded with every comparison: the `T^S` term is set to zero.
pub const EBF_STRESS_OMITS_TS: bool = true;

/// EBF ripple velocity `d² f_E sin 2θ (1 - 3Q²/8) / (2η)`, as published.
pub fn ebf_ripple_velocity(theta: f64, q: f64, params: &EBFParameters) -> f64 {
    params.depth.powi(2) * params.body_force * (2.0 * theta).sin() * (1.0 - 0.375 * q * q)
        / (2.0 * params.viscosity)
}

/// `f_E` rescaled in proportion to the steady stress magnitude.
pub fn rescale_body_force(body_force: f64, stress_old: f64, stress_new: f64) -> Result<f64> {
    if !(stress_old.is_finite() && stress_old > 0.0) {
        return Err(invalid(
            "stress_old",
            format!("must be > 0, got {stress_old}"),
        ));
    }
    if !stress_new.is_finite() {
        return Err(invalid(
            "stress_new",
            format!("must be finite, got {stress_new}"),
        ));
    }
    Ok(body_force * stress_new / stress_old)
}

fn frobenius2(t: &[[f64; 2]; 2]) -> f64 {
    t.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// One angle of a model comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonRow {
    pub theta: f64,
    /// Phase velocity of the plastic-flow model at `q`, m/s.
    pub velocity_apf: f64,
    /// EBF ripple velocity at `q`, m/s.
    pub velocity_ebf: f64,
    /// Long-wave limits of the two velocities.
    pub velocity_apf_longwave_limit: f64,
    pub velocity_ebf_longwave_limit: f64,
    /// Frobenius norm of the (x, z) steady stress at the interface, Pa.
    pub stress_apf: f64,
    pub stress_ebf: f64,
    /// Magnitude of the traction on horizontal planes, `|T·ẑ|`, at the interface.
    pub vertical_traction_apf: f64,
    pub vertical_traction_ebf: f64,
    /// The plastic-flow ripples stop as `Q -> 0` while EBF ripples keep moving.
    pub longwave_motion_differs: bool,
    /// Only one model carries stress on horizontal planes.
    pub vertical_stress_differs: bool,
}

/// Inputs shared by all rows of a comparison.
#[derive(Debug, Clone)]
pub struct ComparisonInputs {
    pub beam: BeamParameters,
    pub film: FilmParameters,
    pub ebf: EBFParameters,
    /// Dimensionless wavenumber at which velocities are compared.
    pub q: f64,
}

/// Compare the two models across incidence angles (radians).
pub fn comparison_table(thetas: &[f64], inputs: &ComparisonInputs) -> Result<Vec<ComparisonRow>> {
    if !(inputs.q.is_finite() && inputs.q >= 0.0) {
        return Err(invalid("q", format!("must be >= 0, got {}", inputs.q)));
    }
    let relative_zero = |x: f64, scale: f64| x.abs() <= 1e-12 * scale.abs();
    thetas
        .iter()
        .map(|&theta| {
            let beam = inputs.beam.with_theta(theta)?;
            let film = &inputs.film;
            let rate = beam.strain_rate();
            let velocity_apf = phase_velocity_closed_form(theta, inputs.q, rate, film.thickness);
            let velocity_apf_longwave_limit =
                phase_velocity_closed_form(theta, 0.0, rate, film.thickness);
            let velocity_ebf = ebf_ripple_velocity(theta, inputs.q, &inputs.ebf);
            let velocity_ebf_longwave_limit = ebf_ripple_velocity(theta, 0.0, &inputs.ebf);

            let t0 = steady_state(&beam, film).stress;
            let apf = [[t0.get(0, 0), t0.get(0, 2)], [t0.get(2, 0), t0.get(2, 2)]];
            let ebf = ebf_steady_stress(-inputs.ebf.depth, theta, &inputs.ebf)?;
            let vertical = |t: &[[f64; 2]; 2]| t[0][1].hypot(t[1][1]);
            let (stress_apf, stress_ebf) = (frobenius2(&apf), frobenius2(&ebf));
            let (vertical_traction_apf, vertical_traction_ebf) = (vertical(&apf), vertical(&ebf));

            let apf_stops = relative_zero(velocity_apf_longwave_limit, film.thickness * rate);
            let ebf_stops = velocity_ebf_longwave_limit == 0.0;
            let apf_flat = relative_zero(vertical_traction_apf, stress_apf.max(f64::MIN_POSITIVE));
            let ebf_flat = relative_zero(vertical_traction_ebf, stress_ebf.max(f64::MIN_POSITIVE));
            Ok(ComparisonRow {
                theta,
                velocity_apf,
                velocity_ebf,
                velocity_apf_longwave_limit,
                velocity_ebf_longwave_limit,
                stress_apf,
                stress_ebf,
                vertical_traction_apf,
                vertical_traction_ebf,
                longwave_motion_differs: apf_stops != ebf_stops,
                vertical_stress_differs: apf_flat != ebf_flat,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::reference_film;
    use crate::units::body_force_to_si;
    use std::f64::consts::FRAC_PI_4;

    fn params() -> EBFParameters {
        EBFParameters::new(body_force_to_si(0.424), 3e-9, 2.5e8).unwrap()
    }

    #[test]
    fn stress_vanishes_at_surface_and_peaks_at_interface() {
        let p = params();
        assert_eq!(ebf_steady_stress(0.0, 0.7, &p).unwrap(), [[0.0; 2]; 2]);
        let mut last = 0.0;
        for i in 0..=10 {
            let z = -p.depth * i as f64 / 10.0;
            let norm = frobenius2(&ebf_steady_stress(z, 0.7, &p).unwrap());
            assert!(norm >= last);
            last = norm;
        }
        let bottom = ebf_steady_stress(-p.depth, 0.0, &p).unwrap();
        let expected = -p.body_force * p.depth;
        assert_eq!(bottom, [[expected, 0.0], [0.0, expected]]);
        assert!(matches!(
            ebf_steady_stress(1e-12, 0.3, &p),
            Err(Error::OutsideFilm { .. })
        ));
        assert!(ebf_steady_stress(-2.0 * p.depth, 0.3, &p).is_err());
    }

    #[test]
    fn stress_is_linear_in_depth_and_force() {
        let p = params();
        let a = ebf_steady_stress(-1e-9, 0.9, &p).unwrap();
        let b = ebf_steady_stress(-2e-9, 0.9, &p).unwrap();
        let doubled = EBFParameters::new(2.0 * p.body_force, p.depth, p.viscosity).unwrap();
        let c = ebf_steady_stress(-1e-9, 0.9, &doubled).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((b[i][j] - 2.0 * a[i][j]).abs() <= 1e-15 * b[i][j].abs());
                assert!((c[i][j] - 2.0 * a[i][j]).abs() <= 1e-15 * c[i][j].abs());
            }
        }
    }

    #[test]
    fn angle_response_is_pluggable() {
        let p = params().with_angle_response(AngleResponse::Constant(0.5));
        let t = ebf_steady_stress(-p.depth, 0.0, &p).unwrap();
        assert_eq!(t[0][0], -0.5 * p.body_force * p.depth);
        let p =
            params().with_angle_response(AngleResponse::Custom(Arc::new(|t: f64| t.cos().powi(2))));
        assert!((p.angle_response.eval(FRAC_PI_4) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ripple_velocity_examples() {
        let p = params();
        assert_eq!(ebf_ripple_velocity(0.0, 0.5, &p), 0.0);
        let v0 = ebf_ripple_velocity(FRAC_PI_4, 0.0, &p);
        assert!((v0 - p.depth.powi(2) * p.body_force / (2.0 * p.viscosity)).abs() <= 1e-15 * v0);
        let root = (8.0f64 / 3.0).sqrt();
        assert!(ebf_ripple_velocity(0.6, root - 1e-6, &p) > 0.0);
        assert!(ebf_ripple_velocity(0.6, root + 1e-6, &p) < 0.0);
        assert!(ebf_ripple_velocity(0.6, root, &p).abs() <= 1e-15 * v0);
    }

    #[test]
    fn velocity_scalings_differ() {
        let p = params();
        let thick = EBFParameters::new(p.body_force, p.depth, 2.0 * p.viscosity).unwrap();
        let v = ebf_ripple_velocity(1.0, 0.3, &p);
        assert!((ebf_ripple_velocity(1.0, 0.3, &thick) - 0.5 * v).abs() <= 1e-15 * v);
        // the plastic-flow velocity depends on flux but not viscosity
        let a = phase_velocity_closed_form(1.0, 0.3, 1.0, 3e-9);
        let b = phase_velocity_closed_form(1.0, 0.3, 2.0, 3e-9);
        assert!((b - 2.0 * a).abs() <= 1e-15 * b);
    }

    #[test]
    fn rescaling_examples() {
        let fe = rescale_body_force(0.424, 569.0, 1400.0).unwrap();
        assert!((fe - 1.043234).abs() < 1e-6);
        assert_eq!(rescale_body_force(0.7, 2.0, 2.0).unwrap(), 0.7);
        assert_eq!(rescale_body_force(0.7, 2.0, 1.0).unwrap(), 0.35);
        assert!(rescale_body_force(0.7, 0.0, 1.0).is_err());
        assert!(rescale_body_force(0.7, -3.0, 1.0).is_err());
    }

    #[test]
    fn comparison_flags_qualitative_differences() {
        let inputs = ComparisonInputs {
            beam: BeamParameters::from_strain_rate(1.0, 0.0).unwrap(),
            film: reference_film(),
            ebf: params(),
            q: 0.0,
        };
        let rows = comparison_table(&[FRAC_PI_4], &inputs).unwrap();
        let r = rows[0];
        assert_eq!(r.velocity_apf, 0.0);
        let expected = params().depth.powi(2) * params().body_force / (2.0 * params().viscosity);
        assert!((r.velocity_ebf - expected).abs() <= 1e-15 * expected);
        assert!(r.longwave_motion_differs);
        assert_eq!(r.vertical_traction_apf, 0.0);
        assert!(r.vertical_traction_ebf > 0.0);
        assert!(r.vertical_stress_differs);
        assert!(comparison_table(&[], &inputs).unwrap().is_empty());
    }
}
