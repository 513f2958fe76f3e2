use std::io::Write;

use super::{IoResult, RelationMode, RunConfig};
use crate::dispersion::{angle_sweep_on, SweepRow};
use crate::units::m_to_nm;

/// Column order of the sweep table.
pub const SWEEP_COLUMNS: [&str; 7] = [
    "theta_deg",
    "lambda_full_nm",
    "lambda_longwave_nm",
    "Q_star",
    "r_star_per_s",
    "V_nm_per_s",
    "stable_flag",
];

const SIGNIFICANT_DIGITS: usize = 12;

/// Shortest rendering of `x` rounded to 12 significant digits: fixed
/// notation for moderate exponents, scientific otherwise.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn optional(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Most unstable modes for every configured angle, in configuration order.
pub fn run_sweep(config: &RunConfig) -> IoResult<Vec<SweepRow>> {
    let film = config.film()?;
    let beam = config.beam()?;
    Ok(angle_sweep_on(
        &beam,
        &film,
        &config.thetas(),
        &config.scan_grid(),
    )?)
}

/// Write the sweep as CSV. Columns for a relation left out by `mode`, and
/// all mode columns of stable rows, are empty.
pub fn write_sweep<W: Write>(rows: &[SweepRow], mode: RelationMode, out: W) -> IoResult<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SWEEP_COLUMNS)?;
    for row in rows {
        let full = mode.includes_full().then_some(&row.full);
        let longwave = mode.includes_longwave().then_some(&row.longwave);
        let primary = full.or(longwave).expect("at least one relation");
        fn unstable(
            m: Option<&crate::dispersion::ModeSelection>,
        ) -> Option<&crate::dispersion::ModeSelection> {
            m.filter(|m| !m.stable)
        }
        let lead = unstable(Some(primary));
        let velocity = if mode.includes_full() {
            row.phase_velocity.map(m_to_nm)
        } else {
            None
        };
        w.write_record([
            format_number(row.theta.to_degrees()),
            optional(unstable(full).and_then(|m| m.wavelength).map(m_to_nm)),
            optional(unstable(longwave).and_then(|m| m.wavelength).map(m_to_nm)),
            optional(lead.map(|m| m.q_star)),
            optional(lead.map(|m| m.growth_rate)),
            optional(velocity),
            primary.stable.to_string(),
        ])?;
    }
    w.flush()
        .map_err(|e| super::IoError::file("<sweep output>", e))?;
    Ok(())
}
