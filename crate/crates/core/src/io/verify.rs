use std::fmt::Write as _;

use rayon::prelude::*;

use crate::bvp::{
    boundary_determinant, boundary_matrix, boundary_rhs, evaluate_fields, mode_coefficients,
    pipeline_sigma, solve_coefficients_closed, solve_coefficients_direct, BottomBoundary,
    PipelineOptions,
};
use crate::dispersion::{sigma_full, Orientation, Wavevector};
use crate::error::Result;
use crate::model::{BeamParameters, FilmParameters};
use crate::oracle::{sigma_collocation, CollocationConfig};

/// Incidence angles of the verification grid, degrees.
pub const VERIFY_ANGLES_DEG: [f64; 9] = [0.0, 15.0, 30.0, 45.0, 50.0, 60.0, 70.0, 80.0, 90.0];
/// Dimensionless wavenumbers of the coarse grid.
pub const COARSE_Q: [f64; 8] = [0.1, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0];
/// Dimensionless wavenumbers of the full grid.
pub const FULL_Q: [f64; 12] = [0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 4.0, 5.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GridKind {
    #[default]
    Coarse,
    Full,
}

impl std::str::FromStr for GridKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "coarse" => Ok(GridKind::Coarse),
            "full" => Ok(GridKind::Full),
            other => Err(format!("unknown grid `{other}` (expected coarse or full)")),
        }
    }
}

/// `(θ radians, Q, orientation)` for every grid point, angle-major.
pub fn grid_cases(grid: GridKind) -> Vec<(f64, f64, Orientation)> {
    let qs: &[f64] = match grid {
        GridKind::Coarse => &COARSE_Q,
        GridKind::Full => &FULL_Q,
    };
    let mut cases = Vec::new();
    for theta in VERIFY_ANGLES_DEG {
        for &q in qs {
            for o in [Orientation::Parallel, Orientation::Perpendicular] {
                cases.push((theta.to_radians(), q, o));
            }
        }
    }
    cases
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub grid: GridKind,
    pub oracle: bool,
    pub oracle_nodes: usize,
    pub oracle_tolerance: f64,
    /// Relative perturbation of one boundary-matrix entry in the pipeline.
    pub matrix_perturbation: Option<(usize, usize, f64)>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            grid: GridKind::Coarse,
            oracle: false,
            oracle_nodes: crate::oracle::DEFAULT_NODES,
            oracle_tolerance: 1e-8,
            matrix_perturbation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub max_error: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Oracle only: largest relative change when the node count doubles.
    pub convergence: Option<f64>,
    /// Where the largest error occurred, or the first failure message.
    pub worst_case: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub grid: GridKind,
    pub cases: usize,
    pub checks: Vec<CheckResult>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Plain-text report; ANSI colors only when `color` is set.
    pub fn render(&self, color: bool) -> String {
        let paint = |ok: bool| match (ok, color) {
            (true, true) => "\x1b[32mPASS\x1b[0m",
            (false, true) => "\x1b[31mFAIL\x1b[0m",
            (true, false) => "PASS",
            (false, false) => "FAIL",
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verification grid: {:?}, {} cases (angles x Q x orientations)",
            self.grid, self.cases
        );
        let _ = writeln!(
            out,
            "{:<6} {:<26} {:>12} {:>12} {:>12}  worst case",
            "status", "check", "max_error", "tolerance", "convergence"
        );
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<6} {:<26} {:>12.3e} {:>12.1e} {:>12}  {}",
                paint(c.passed),
                c.name,
                c.max_error,
                c.tolerance,
                c.convergence
                    .map(|x| format!("{x:.3e}"))
                    .unwrap_or_else(|| "-".into()),
                c.worst_case
            );
        }
        let _ = writeln!(out, "overall: {}", paint(self.passed()));
        out
    }
}

fn describe(theta: f64, q: f64, o: Orientation) -> String {
    format!("theta={:.1} Q={q} {o}", theta.to_degrees())
}

/// Fold per-case outcomes, in grid order, into one check.
fn summarize(
    name: &'static str,
    tolerance: f64,
    cases: &[(f64, f64, Orientation)],
    outcomes: Vec<std::result::Result<f64, String>>,
) -> CheckResult {
    let mut max_error: f64 = 0.0;
    let mut worst_case = String::new();
    let mut failure = None;
    for (case, outcome) in cases.iter().zip(outcomes) {
        match outcome {
            Ok(e) if e.is_nan() => {
                failure.get_or_insert_with(|| format!("{}: NaN", describe(case.0, case.1, case.2)));
            }
            Ok(e) => {
                if e > max_error || worst_case.is_empty() {
                    max_error = max_error.max(e);
                    worst_case = describe(case.0, case.1, case.2);
                }
            }
            Err(msg) => {
                failure
                    .get_or_insert_with(|| format!("{}: {msg}", describe(case.0, case.1, case.2)));
            }
        }
    }
    let passed = failure.is_none() && max_error <= tolerance;
    CheckResult {
        name,
        max_error: if failure.is_some() {
            f64::INFINITY
        } else {
            max_error
        },
        tolerance,
        passed,
        convergence: None,
        worst_case: failure.unwrap_or(worst_case),
    }
}

fn relative(a: num_complex::Complex64, b: num_complex::Complex64, floor: f64) -> f64 {
    (a - b).norm() / b.norm().max(floor)
}

/// Run the consistency checks on `film` with strain rate `rate`.
pub fn run_verification(
    film: &FilmParameters,
    rate: f64,
    options: &VerifyOptions,
) -> Result<VerificationReport> {
    let cases = grid_cases(options.grid);
    let h0 = film.thickness;
    let setup = |theta: f64, q: f64, o: Orientation| -> Result<(BeamParameters, Wavevector)> {
        Ok((
            BeamParameters::from_strain_rate(rate, theta)?,
            Wavevector::along(o, q, h0),
        ))
    };
    let map = |f: &(dyn Fn(f64, f64, Orientation) -> Result<f64> + Sync)| -> Vec<std::result::Result<f64, String>> {
        cases
            .par_iter()
            .map(|&(t, q, o)| f(t, q, o).map_err(|e| e.to_string()))
            .collect()
    };

    let pipeline_opts = PipelineOptions {
        matrix_perturbation: options.matrix_perturbation,
        ..Default::default()
    };
    let mut checks = vec![
        summarize(
            "pipeline_vs_closed_form",
            1e-10,
            &cases,
            map(&|t, q, o| {
                let (beam, k) = setup(t, q, o)?;
                let closed = sigma_full(&k, &beam, film).sigma;
                let piped = pipeline_sigma(&k, &beam, film, &pipeline_opts)?.sigma.sigma;
                Ok(relative(piped, closed, rate * 1e-12))
            }),
        ),
        summarize(
            "determinant_identity",
            1e-10,
            &cases,
            map(&|t, q, o| {
                let (_, k) = setup(t, q, o)?;
                let det = boundary_matrix(&k, h0)?.determinant();
                let delta = boundary_determinant(&k, h0)?;
                Ok(relative(det, delta.into(), 0.0))
            }),
        ),
        summarize(
            "cramer_vs_direct",
            1e-12,
            &cases,
            map(&|t, q, o| {
                let (beam, k) = setup(t, q, o)?;
                let forcing = boundary_rhs(&k, &beam, film, 1.0)?
                    .total()
                    .unscale(film.viscosity);
                let closed = solve_coefficients_closed(&k, h0, &forcing)?;
                let direct = solve_coefficients_direct(&boundary_matrix(&k, h0)?, &forcing)?;
                Ok((closed - direct).norm() / direct.norm())
            }),
        ),
        summarize(
            "bulk_equations",
            1e-10,
            &cases,
            map(&|t, q, o| {
                let (beam, k) = setup(t, q, o)?;
                let coeffs = mode_coefficients(&k, &beam, film, 1.0, BottomBoundary::Conforming)?;
                let fields = evaluate_fields(coeffs, &k, film.viscosity, h0)?;
                Ok((0..5)
                    .map(|i| fields.bulk_residuals(h0 * i as f64 / 4.0).max())
                    .fold(0.0, f64::max))
            }),
        ),
    ];

    if options.oracle {
        let config = CollocationConfig::new(options.oracle_nodes)?;
        let finer = CollocationConfig::new(2 * options.oracle_nodes)?;
        let solved: Vec<std::result::Result<(f64, f64), String>> = cases
            .par_iter()
            .map(|&(t, q, o)| {
                let run = || -> Result<(f64, f64)> {
                    let (beam, k) = setup(t, q, o)?;
                    let closed = sigma_full(&k, &beam, film).sigma;
                    let coarse = sigma_collocation(&k, &beam, film, &config)?.sigma.sigma;
                    let fine = sigma_collocation(&k, &beam, film, &finer)?.sigma.sigma;
                    Ok((
                        relative(coarse, closed, rate * 1e-12),
                        relative(coarse, fine, rate * 1e-12),
                    ))
                };
                run().map_err(|e| e.to_string())
            })
            .collect();
        let convergence = solved
            .iter()
            .filter_map(|r| r.as_ref().ok().map(|x| x.1))
            .fold(0.0, f64::max);
        let mut check = summarize(
            "oracle_vs_closed_form",
            options.oracle_tolerance,
            &cases,
            solved.into_iter().map(|r| r.map(|x| x.0)).collect(),
        );
        check.convergence = Some(convergence);
        checks.push(check);
    }

    Ok(VerificationReport {
        grid: options.grid,
        cases: cases.len(),
        checks,
    })
}
