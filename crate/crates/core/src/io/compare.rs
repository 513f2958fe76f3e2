use std::io::Write;

use super::sweep::format_number;
use super::{IoResult, RunConfig};
use crate::ebf::{
    comparison_table, ComparisonInputs, ComparisonRow, EBFParameters, EBF_STRESS_OMITS_TS,
};
use crate::units::{body_force_to_si, m_to_nm, nm_to_m, pa_to_gpa};

/// Column order of the model comparison table.
pub const COMPARE_COLUMNS: [&str; 12] = [
    "theta_deg",
    "V_apf_nm_per_s",
    "V_ebf_nm_per_s",
    "V_apf_longwave_limit_nm_per_s",
    "V_ebf_longwave_limit_nm_per_s",
    "stress_apf_gpa",
    "stress_ebf_gpa",
    "vertical_traction_apf_gpa",
    "vertical_traction_ebf_gpa",
    "longwave_motion_differs",
    "vertical_stress_differs",
    "ebf_omits_ts",
];

/// Comparison at every configured angle. `body_force` is in kg/(nm·s)²,
/// `depth_nm` in nm; the EBF model shares the configured viscosity.
pub fn run_comparison(
    config: &RunConfig,
    body_force: f64,
    depth_nm: f64,
    q: f64,
) -> IoResult<Vec<ComparisonRow>> {
    let film = config.film()?;
    let ebf = EBFParameters::new(
        body_force_to_si(body_force),
        nm_to_m(depth_nm),
        film.viscosity,
    )?;
    let inputs = ComparisonInputs {
        beam: config.beam()?,
        film,
        ebf,
        q,
    };
    Ok(comparison_table(&config.thetas(), &inputs)?)
}

pub fn write_comparison<W: Write>(rows: &[ComparisonRow], out: W) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COMPARE_COLUMNS)?;
    for row in rows {
        let speed = |x: f64| format_number(m_to_nm(x));
        let stress = |x: f64| format_number(pa_to_gpa(x));
        w.write_record([
            format_number(row.theta.to_degrees()),
            speed(row.velocity_apf),
            speed(row.velocity_ebf),
            speed(row.velocity_apf_longwave_limit),
            speed(row.velocity_ebf_longwave_limit),
            stress(row.stress_apf),
            stress(row.stress_ebf),
            stress(row.vertical_traction_apf),
            stress(row.vertical_traction_ebf),
            row.longwave_motion_differs.to_string(),
            row.vertical_stress_differs.to_string(),
            EBF_STRESS_OMITS_TS.to_string(),
        ])?;
    }
    w.flush()
        .map_err(|e| super::IoError::file("<comparison output>", e))?;
    Ok(())
}
