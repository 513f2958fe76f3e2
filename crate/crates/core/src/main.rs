use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use apf_ripple::dispersion::{sigma_full, sigma_longwave, Orientation, Wavevector};
use apf_ripple::io::format_number;
use apf_ripple::io::{
    ingest_experiment, parse_config, read_sweep_wavelengths, read_text, residual_rows,
    run_comparison, run_sweep, run_verification, write_comparison, write_residuals, write_sweep,
    GridKind, IoError, IoResult, RunConfig, VerifyOptions, EXIT_OK, EXIT_VALIDATION,
    EXIT_VERIFICATION,
};
use apf_ripple::model::steady_state;
use apf_ripple::units::{m_to_nm, pa_to_gpa};

const AFTER_HELP: &str = "\
Exit status: 0 success, 1 invalid input, 2 verification failure, 3 I/O error.

CSV columns, in order:
  sweep        theta_deg, lambda_full_nm, lambda_longwave_nm, Q_star, r_star_per_s,
               V_nm_per_s, stable_flag
  compare-ebf  theta_deg, V_apf_nm_per_s, V_ebf_nm_per_s, V_apf_longwave_limit_nm_per_s,
               V_ebf_longwave_limit_nm_per_s, stress_apf_gpa, stress_ebf_gpa,
               vertical_traction_apf_gpa, vertical_traction_ebf_gpa,
               longwave_motion_differs, vertical_stress_differs, ebf_omits_ts
  ingest       angle_deg, wavelength_nm, mode, source, comparable, lambda_model_nm,
               residual_nm
Empty cells mark stable angles or relations left out of the run.";

/// Ripple formation on ion-irradiated amorphous films: steady state,
/// dispersion relation, wavelength selection and model comparison.
#[derive(Debug, Parser)]
#[command(name = "apf-ripple", version, after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print the steady flow and stress of the flat film.
    Steady {
        /// TOML run description; built-in reference constants when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Incidence angle in degrees; overrides `beam.theta_deg`.
        #[arg(long)]
        theta_deg: Option<f64>,
    },
    /// Evaluate the growth rate at one wavevector, printed as key=value pairs.
    Dispersion {
        #[arg(long)]
        theta_deg: f64,
        /// Dimensionless wavenumber |k| h0.
        #[arg(long)]
        q: f64,
        /// parallel (along the beam) or perpendicular.
        #[arg(long)]
        orientation: Orientation,
        /// Use the long-wavelength relation.
        #[arg(long)]
        longwave: bool,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Most unstable mode for each configured angle, as CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output file; `output.sweep_csv` or standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare ripple velocity and steady stress with the effective-body-force model.
    CompareEbf {
        #[arg(long)]
        config: PathBuf,
        /// Body-force gradient f_E in kg/(nm·s)².
        #[arg(long)]
        fe: f64,
        /// Depth of the stressed layer in nm.
        #[arg(long)]
        d: f64,
        /// Dimensionless wavenumber at which velocities are compared.
        #[arg(long, default_value_t = 0.0)]
        q: f64,
        /// Output file; `output.comparison_csv` or standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check closed form, boundary-value pipeline and collocation solver.
    Verify {
        /// Include the collocation solver.
        #[arg(long)]
        oracle: bool,
        #[arg(long, default_value = "coarse")]
        grid: GridKind,
        /// Collocation nodes; `oracle.nodes` when absent.
        #[arg(long)]
        nodes: Option<usize>,
        /// Relative tolerance of the collocation check; `oracle.tolerance` when absent.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Scale one boundary-matrix entry, `ROW,COL,REL`, to exercise the checks.
        #[arg(long, hide = true, value_parser = parse_perturbation)]
        perturb_matrix: Option<(usize, usize, f64)>,
    },
    /// Validate measured wavelengths and report residuals against a sweep.
    Ingest {
        /// CSV with header angle_deg,wavelength_nm,mode,source.
        #[arg(long)]
        data: PathBuf,
        /// Sweep table produced by `sweep`.
        #[arg(long)]
        sweep: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_perturbation(s: &str) -> Result<(usize, usize, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let bad = || format!("expected ROW,COL,REL, got `{s}`");
    if parts.len() != 3 {
        return Err(bad());
    }
    let row = parts[0].trim().parse().map_err(|_| bad())?;
    let col = parts[1].trim().parse().map_err(|_| bad())?;
    let rel = parts[2].trim().parse().map_err(|_| bad())?;
    if row > 2 || col > 2 {
        return Err(format!("matrix indices must be 0..=2, got {row},{col}"));
    }
    Ok((row, col, rel))
}

fn load_config(path: Option<&Path>) -> IoResult<RunConfig> {
    match path {
        Some(p) => parse_config(&read_text(p)?),
        None => Ok(RunConfig::reference()),
    }
}

/// Buffered writer to `path`, or standard output.
fn output(path: Option<&Path>) -> IoResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| IoError::file(p, e))?,
        )),
        None => Box::new(io::stdout().lock()),
    })
}

fn steady(config: &RunConfig, theta_deg: Option<f64>) -> IoResult<()> {
    let theta_deg = theta_deg.unwrap_or(config.beam.theta_deg);
    let mut c = config.clone();
    c.beam.theta_deg = theta_deg;
    c.validate()?;
    let state = steady_state(&c.beam()?, &c.film()?);
    let t = state.stress;
    let h0 = c.film()?.thickness;
    println!(
        "theta_deg={} pressure_gpa={} shear_rate_per_s={} surface_velocity_nm_per_s={} \
         T_xx_gpa={} T_yy_gpa={} T_zz_gpa={} T_xz_gpa={}",
        format_number(theta_deg),
        format_number(pa_to_gpa(state.pressure)),
        format_number(state.shear_rate),
        format_number(m_to_nm(state.velocity(h0)[0])),
        format_number(pa_to_gpa(t.get(0, 0))),
        format_number(pa_to_gpa(t.get(1, 1))),
        format_number(pa_to_gpa(t.get(2, 2))),
        format_number(pa_to_gpa(t.get(0, 2))),
    );
    Ok(())
}

fn dispersion(
    config: &RunConfig,
    theta_deg: f64,
    q: f64,
    orientation: Orientation,
    longwave: bool,
) -> IoResult<()> {
    let mut c = config.clone();
    c.beam.theta_deg = theta_deg;
    c.validate()?;
    if !(q.is_finite() && q >= 0.0) {
        return Err(IoError::Config(format!("q: must be >= 0, got {q}")));
    }
    let (beam, film) = (c.beam()?, c.film()?);
    let k = Wavevector::along(orientation, q, film.thickness);
    let sigma = if longwave {
        sigma_longwave(&k, &beam, &film)
    } else {
        sigma_full(&k, &beam, &film)
    };
    let velocity = if k.k1 != 0.0 {
        format_number(m_to_nm(sigma.angular_frequency() / k.k1))
    } else {
        String::new()
    };
    println!(
        "theta_deg={} q={} orientation={} relation={} growth_rate_per_s={} \
         angular_frequency_per_s={} phase_velocity_nm_per_s={} unstable={}",
        format_number(theta_deg),
        format_number(q),
        orientation,
        if longwave { "longwave" } else { "full" },
        format_number(sigma.growth_rate()),
        format_number(sigma.angular_frequency()),
        velocity,
        sigma.growth_rate() > 0.0,
    );
    Ok(())
}

fn run(cli: Cli) -> IoResult<i32> {
    match cli.command {
        Command::Steady { config, theta_deg } => {
            steady(&load_config(config.as_deref())?, theta_deg)?;
        }
        Command::Dispersion {
            theta_deg,
            q,
            orientation,
            longwave,
            config,
        } => dispersion(
            &load_config(config.as_deref())?,
            theta_deg,
            q,
            orientation,
            longwave,
        )?,
        Command::Sweep { config, out } => {
            let config = load_config(Some(&config))?;
            let rows = run_sweep(&config)?;
            let path = out.or_else(|| config.output.sweep_csv.clone().map(PathBuf::from));
            write_sweep(&rows, config.sweep.relation, output(path.as_deref())?)?;
        }
        Command::CompareEbf {
            config,
            fe,
            d,
            q,
            out,
        } => {
            let config = load_config(Some(&config))?;
            let rows = run_comparison(&config, fe, d, q)?;
            let path = out.or_else(|| config.output.comparison_csv.clone().map(PathBuf::from));
            write_comparison(&rows, output(path.as_deref())?)?;
        }
        Command::Verify {
            oracle,
            grid,
            nodes,
            tolerance,
            config,
            perturb_matrix,
        } => {
            let config = load_config(config.as_deref())?;
            let mut c = config.clone();
            c.oracle.nodes = nodes.unwrap_or(c.oracle.nodes);
            c.oracle.tolerance = tolerance.unwrap_or(c.oracle.tolerance);
            c.validate()?;
            let options = VerifyOptions {
                grid,
                oracle,
                oracle_nodes: c.oracle.nodes,
                oracle_tolerance: c.oracle.tolerance,
                matrix_perturbation: perturb_matrix,
            };
            let report = run_verification(&c.film()?, c.beam.strain_rate_per_s, &options)?;
            let color = std::env::var_os("NO_COLOR").is_none() && io::stdout().is_terminal();
            print!("{}", report.render(color));
            if !report.passed() {
                return Ok(EXIT_VERIFICATION);
            }
        }
        Command::Ingest { data, sweep, out } => {
            let records = ingest_experiment(&data)?;
            let model = sweep.as_deref().map(read_sweep_wavelengths).transpose()?;
            let rows = residual_rows(&records, model.as_deref());
            write_residuals(&rows, output(out.as_deref())?)?;
        }
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                EXIT_VALIDATION as u8
            } else {
                EXIT_OK as u8
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
