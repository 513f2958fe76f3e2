//! Conversions between the human units used in configuration files and
//! output columns, and the SI units used internally.

/// Metres per nanometre.
pub const NM: f64 = 1e-9;
/// Pascals per gigapascal.
pub const GPA: f64 = 1e9;
/// Pascals per megapascal.
pub const MPA: f64 = 1e6;
/// N/m³ per kg/(nm·s)², the unit body-force gradients are quoted in.
pub const KG_PER_NM2_S2: f64 = 1e18;

pub fn nm_to_m(x: f64) -> f64 {
    x * NM
}

pub fn m_to_nm(x: f64) -> f64 {
    x / NM
}

pub fn gpa_to_pa(x: f64) -> f64 {
    x * GPA
}

pub fn pa_to_gpa(x: f64) -> f64 {
    x / GPA
}

/// kg/(nm·s)² to N/m³.
pub fn body_force_to_si(x: f64) -> f64 {
    x * KG_PER_NM2_S2
}

/// N/m³ to kg/(nm·s)².
pub fn body_force_from_si(x: f64) -> f64 {
    x / KG_PER_NM2_S2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        assert_eq!(m_to_nm(nm_to_m(3.0)), 3.0);
        assert_eq!(pa_to_gpa(gpa_to_pa(1.5)), 1.5);
        assert_eq!(body_force_from_si(body_force_to_si(0.424)), 0.424);
        // kg/(nm² s²) = 1e18 kg/(m² s²) = 1e18 N/m³
        assert_eq!(body_force_to_si(1.0), 1e18);
    }
}
