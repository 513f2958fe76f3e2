use num_complex::Complex64;

use super::{ComplexGrowthRate, Wavevector};
use crate::error::{Error, Result};
use crate::model::{BeamParameters, FilmParameters};

/// Above this `Q` the hyperbolic ratios are evaluated with numerator and
/// denominator divided by `e^{2Q}`; `cosh 2Q` overflows near `Q = 355`.
const SCALED_FORM_Q: f64 = 30.0;

/// `(1 + 2Q² + cosh 2Q) e^{-2Q}`.
fn scaled_denominator(q: f64) -> f64 {
    let e2 = (-2.0 * q).exp();
    (1.0 + 2.0 * q * q) * e2 + 0.5 * (1.0 + e2 * e2)
}

/// `1 / (1 + 2Q² + cosh 2Q)`, the envelope shared by every line of the
/// full relation.
pub fn hyperbolic_envelope(q: f64) -> f64 {
    if q <= SCALED_FORM_Q {
        1.0 / (1.0 + 2.0 * q * q + (2.0 * q).cosh())
    } else {
        (-2.0 * q).exp() / scaled_denominator(q)
    }
}

/// Braced factor of the nonplanar-bottom line as printed,
/// `2 cosh Q (Q² + sinh² Q) / (1 + 2Q² + cosh 2Q) - cosh Q`.
///
/// The two terms cancel to `O(cosh Q / e^{2Q})`, so this loses about
/// `2Q / ln 10` digits; [`bottom_bracket`] is the form used for evaluation.
pub fn bottom_bracket_printed(q: f64) -> f64 {
    if q <= SCALED_FORM_Q {
        let (c, s) = (q.cosh(), q.sinh());
        2.0 * c * (q * q + s * s) * hyperbolic_envelope(q) - c
    } else {
        bottom_bracket(q)
    }
}

/// Braced factor of the nonplanar-bottom line, simplified exactly to
/// `-2 cosh Q / (1 + 2Q² + cosh 2Q)`.
pub fn bottom_bracket(q: f64) -> f64 {
    if q <= SCALED_FORM_Q {
        -2.0 * q.cosh() * hyperbolic_envelope(q)
    } else {
        let e = (-q).exp();
        -(e + e * e * e) / scaled_denominator(q)
    }
}

/// `1 + bottom_bracket(Q)`: the shear translation of the first line plus the
/// bottom-boundary correction. Near `Q = 0` the two nearly cancel, so the
/// sum is rewritten as `2(Q² + 2 cosh Q sinh²(Q/2)) / (1 + 2Q² + cosh 2Q)`.
pub fn translation_factor(q: f64) -> f64 {
    if q < 1.0 {
        let half = (0.5 * q).sinh();
        2.0 * (q * q + 2.0 * q.cosh() * half * half) * hyperbolic_envelope(q)
    } else {
        1.0 + bottom_bracket(q)
    }
}

/// Orchard leveling shape `Q (sinh 2Q - 2Q) / (1 + 2Q² + cosh 2Q)`.
pub fn leveling_shape(q: f64) -> f64 {
    if q <= SCALED_FORM_Q {
        q * ((2.0 * q).sinh() - 2.0 * q) * hyperbolic_envelope(q)
    } else {
        let e2 = (-2.0 * q).exp();
        q * (0.5 * (1.0 - e2 * e2) - 2.0 * q * e2) / scaled_denominator(q)
    }
}

/// The three lines of the full relation, kept apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionTerms {
    /// Anisotropic plastic flow in the bulk, including the shear translation.
    pub bulk: Complex64,
    /// Correction from the displaced bottom boundary.
    pub bottom: Complex64,
    /// Surface-tension leveling (always real).
    pub leveling: f64,
}

impl DispersionTerms {
    pub fn total(&self) -> Complex64 {
        self.bulk + self.bottom + self.leveling
    }
}

/// Line-by-line evaluation of the full relation in SI units.
pub fn sigma_full_terms(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
) -> DispersionTerms {
    let h0 = film.thickness;
    let q = k.q(h0);
    if q == 0.0 {
        return DispersionTerms {
            bulk: Complex64::new(0.0, 0.0),
            bottom: Complex64::new(0.0, 0.0),
            leveling: 0.0,
        };
    }
    let rate = beam.strain_rate();
    let (q1, q2) = (h0 * k.k1, h0 * k.k2);
    let (s2, c2) = (2.0 * beam.theta).sin_cos();
    let cos_sq = beam.theta.cos().powi(2);
    let env = hyperbolic_envelope(q);

    let bulk = Complex64::new(
        -6.0 * rate * (c2 * q1 * q1 + cos_sq * q2 * q2) * env,
        -3.0 * rate * s2 * q1,
    );
    let bottom = Complex64::new(0.0, -3.0 * rate * s2 * q1 * bottom_bracket(q));
    let leveling = -film.surface_energy / (2.0 * film.viscosity * h0) * leveling_shape(q);
    DispersionTerms {
        bulk,
        bottom,
        leveling,
    }
}

/// Full dispersion relation `σ(k1, k2)` in 1/s.
///
/// Equal to the sum of [`sigma_full_terms`]; the imaginary parts of the
/// first two lines are combined through [`translation_factor`] so that the
/// phase velocity keeps full precision as `Q -> 0`.
pub fn sigma_full(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
) -> ComplexGrowthRate {
    let h0 = film.thickness;
    let q = k.q(h0);
    if q == 0.0 {
        return ComplexGrowthRate::zero();
    }
    let rate = beam.strain_rate();
    let (q1, q2) = (h0 * k.k1, h0 * k.k2);
    let (s2, c2) = (2.0 * beam.theta).sin_cos();
    let cos_sq = beam.theta.cos().powi(2);
    let re = -6.0 * rate * (c2 * q1 * q1 + cos_sq * q2 * q2) * hyperbolic_envelope(q)
        - film.surface_energy / (2.0 * film.viscosity * h0) * leveling_shape(q);
    let im = -3.0 * rate * s2 * q1 * translation_factor(q);
    ComplexGrowthRate::new(Complex64::new(re, im))
}

/// Full relation in units of `f A`, for dimensionless wavevector components
/// `q1 = h0 k1`, `q2 = h0 k2` and surface-tension number `s`.
pub fn sigma_hat_full(q1: f64, q2: f64, theta: f64, s: f64) -> Complex64 {
    let q = q1.hypot(q2);
    if q == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (s2, c2) = (2.0 * theta).sin_cos();
    let cos_sq = theta.cos().powi(2);
    let re = -6.0 * (c2 * q1 * q1 + cos_sq * q2 * q2) * hyperbolic_envelope(q)
        - 0.5 * s * leveling_shape(q);
    let im = -3.0 * s2 * q1 * translation_factor(q);
    Complex64::new(re, im)
}

/// Long-wavelength (`Q ≪ 1`) form of the relation, in 1/s.
pub fn sigma_longwave(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
) -> ComplexGrowthRate {
    let h0 = film.thickness;
    let rate = beam.strain_rate();
    let (q1, q2) = (h0 * k.k1, h0 * k.k2);
    let q_sq = q1 * q1 + q2 * q2;
    let (s2, c2) = (2.0 * beam.theta).sin_cos();
    let cos_sq = beam.theta.cos().powi(2);
    let re = -3.0 * rate * (c2 * q1 * q1 + cos_sq * q2 * q2)
        - film.surface_energy / (3.0 * film.viscosity * h0) * q_sq * q_sq;
    let im = -4.5 * rate * s2 * q1 * q_sq;
    ComplexGrowthRate::new(Complex64::new(re, im))
}

/// Longwave relation in units of `f A`.
pub fn sigma_hat_longwave(q1: f64, q2: f64, theta: f64, s: f64) -> Complex64 {
    let q_sq = q1 * q1 + q2 * q2;
    let (s2, c2) = (2.0 * theta).sin_cos();
    let cos_sq = theta.cos().powi(2);
    Complex64::new(
        -3.0 * (c2 * q1 * q1 + cos_sq * q2 * q2) - s / 3.0 * q_sq * q_sq,
        -4.5 * s2 * q1 * q_sq,
    )
}

/// Phase velocity `ω / k1` of the full relation, m/s. Positive values
/// travel downbeam.
pub fn phase_velocity(k: &Wavevector, beam: &BeamParameters, film: &FilmParameters) -> Result<f64> {
    if k.k1 == 0.0 {
        return Err(Error::DegenerateWavevector(
            "phase velocity needs k1 != 0 (no propagation direction)",
        ));
    }
    Ok(sigma_full(k, beam, film).angular_frequency() / k.k1)
}

/// `V = 3 f A h0 sin 2θ [1 - 2 cosh Q / (1 + 2Q² + cosh 2Q)]`, evaluated as
/// written (loses relative precision like `1e-16 / Q²` near `Q = 0`).
pub fn phase_velocity_closed_form(theta: f64, q: f64, strain_rate: f64, h0: f64) -> f64 {
    let ratio = if q <= SCALED_FORM_Q {
        2.0 * q.cosh() / (1.0 + 2.0 * q * q + (2.0 * q).cosh())
    } else {
        -bottom_bracket(q)
    };
    3.0 * strain_rate * h0 * (2.0 * theta).sin() * (1.0 - ratio)
}

/// Leading-order phase velocity `(9/2) f A h0 sin 2θ Q²`.
pub fn phase_velocity_longwave(theta: f64, q: f64, strain_rate: f64, h0: f64) -> f64 {
    4.5 * strain_rate * h0 * (2.0 * theta).sin() * q * q
}
