//! Chebyshev collocation solver for the linearized Stokes problem in `z`.
//!
//! Independent of the closed-form solution: the bulk equations are
//! discretized directly, the boundary conditions are built from the steady
//! stress tensor and the tilted surface normal, and `σ` follows from the
//! kinematic condition. Velocities live on `N` Gauss-Lobatto nodes and the
//! pressure on the `N - 2` interior nodes, which removes the spurious
//! pressure modes of an equal-order discretization.

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;

use crate::dispersion::{ComplexGrowthRate, Wavevector};
use crate::error::{invalid, Error, Result};
use crate::model::{steady_state, BeamParameters, FilmParameters};

const I: Complex64 = Complex64::new(0.0, 1.0);

pub const DEFAULT_NODES: usize = 48;
pub const MIN_NODES: usize = 8;
/// Above this `cond₁` the discrete system is reported as ill-conditioned.
pub const MAX_CONDITION: f64 = 1e14;

/// Discretization settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollocationConfig {
    /// Number of velocity nodes across the film.
    pub nodes: usize,
    /// Perturbation amplitude in units of the film thickness.
    pub amplitude: f64,
}

impl Default for CollocationConfig {
    fn default() -> Self {
        CollocationConfig {
            nodes: DEFAULT_NODES,
            amplitude: 1.0,
        }
    }
}

impl CollocationConfig {
    pub fn new(nodes: usize) -> Result<Self> {
        let config = CollocationConfig {
            nodes,
            ..Default::default()
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        if self.nodes < MIN_NODES {
            return Err(invalid(
                "nodes",
                format!("need at least {MIN_NODES}, got {}", self.nodes),
            ));
        }
        if !(self.amplitude.is_finite() && self.amplitude != 0.0) {
            return Err(invalid(
                "amplitude",
                format!("must be finite and nonzero, got {}", self.amplitude),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult {
    pub sigma: ComplexGrowthRate,
    /// Normwise backward error `‖Ax - b‖ / (‖A‖ ‖x‖ + ‖b‖)`, infinity norms.
    pub residual_norm: f64,
    /// Largest relative continuity residual over the interior nodes.
    pub continuity_residual: f64,
    /// `cond₁` of the discrete system.
    pub condition: f64,
    pub nodes: usize,
}

/// Gauss-Lobatto nodes `cos(jπ/n)` on `[-1, 1]` and the differentiation matrix.
fn chebyshev(nodes: usize) -> (Vec<f64>, DMatrix<f64>) {
    let n = nodes - 1;
    // sin form keeps the nodes exactly antisymmetric
    let x: Vec<f64> = (0..nodes)
        .map(|j| (std::f64::consts::PI * (n as f64 - 2.0 * j as f64) / (2.0 * n as f64)).sin())
        .collect();
    let c = |j: usize| {
        let edge = if j == 0 || j == n { 2.0 } else { 1.0 };
        if j.is_multiple_of(2) {
            edge
        } else {
            -edge
        }
    };
    // x_i - x_j through sines avoids cancellation between nearby nodes
    let h = std::f64::consts::PI / (2.0 * n as f64);
    let gap =
        |i: usize, j: usize| 2.0 * (h * (i + j) as f64).sin() * (h * (j as f64 - i as f64)).sin();
    let mut d = DMatrix::zeros(nodes, nodes);
    for i in 0..nodes {
        let mut row_sum = 0.0;
        for j in 0..nodes {
            if i != j {
                let v = c(i) / c(j) / gap(i, j);
                d[(i, j)] = v;
                row_sum += v;
            }
        }
        d[(i, i)] = -row_sum;
    }
    (x, d)
}

/// Interpolation and differentiation from the interior nodes to all nodes.
/// Returns `(P, D)` with `p(x_a) = Σ P[a, j] p_j` and likewise for `p'`.
fn interior_interpolant(x: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
    let nodes = x.len();
    let n = nodes - 1;
    let m = n - 1;
    // barycentric weights of the second-kind Chebyshev points
    let w: Vec<f64> = (1..n)
        .map(|j| {
            let s = (std::f64::consts::PI * j as f64 / n as f64).sin();
            if j % 2 == 0 {
                s * s
            } else {
                -s * s
            }
        })
        .collect();
    let h = std::f64::consts::PI / (2.0 * n as f64);
    let gap =
        |i: usize, j: usize| 2.0 * (h * (i + j) as f64).sin() * (h * (j as f64 - i as f64)).sin();
    let mut p = DMatrix::zeros(nodes, m);
    let mut dp = DMatrix::zeros(nodes, m);
    for a in 0..nodes {
        if a >= 1 && a < n {
            let i = a - 1;
            p[(a, i)] = 1.0;
            let mut row_sum = 0.0;
            for j in 0..m {
                if j != i {
                    let v = w[j] / w[i] / gap(a, j + 1);
                    dp[(a, j)] = v;
                    row_sum += v;
                }
            }
            dp[(a, i)] = -row_sum;
            continue;
        }
        let t: Vec<f64> = (0..m).map(|j| w[j] / gap(a, j + 1)).collect();
        let s: f64 = t.iter().sum();
        let coef: Vec<f64> = (0..m).map(|j| t[j] / gap(a, j + 1) / s).collect();
        let coef_sum: f64 = coef.iter().sum();
        for j in 0..m {
            p[(a, j)] = t[j] / s;
            dp[(a, j)] = coef_sum * t[j] / s - coef[j];
        }
    }
    (p, dp)
}

fn norm_inf(m: &DMatrix<Complex64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn norm_1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Lower bound on `‖A⁻¹‖₁` from the LU factors (Hager–Higham estimator),
/// usually exact to within a small factor.
fn inverse_norm_1_estimate(lu: &LU<Complex64, Dyn, Dyn>) -> Option<f64> {
    let n = lu.l().nrows();
    let (l, u) = (lu.l(), lu.u());
    let adjoint_solve = |b: &DVector<Complex64>| -> Option<DVector<Complex64>> {
        let t = u.ad_solve_upper_triangular(b)?;
        let mut z = l.ad_solve_lower_triangular(&t)?;
        lu.p().inv_permute_rows(&mut z);
        Some(z)
    };
    let norm1 = |v: &DVector<Complex64>| v.iter().map(|z| z.norm()).sum::<f64>();

    let mut x = DVector::from_element(n, Complex64::from(1.0 / n as f64));
    let mut estimate = 0.0;
    let mut last = usize::MAX;
    for _ in 0..5 {
        let y = lu.solve(&x)?;
        let norm = norm1(&y);
        if norm <= estimate {
            break;
        }
        estimate = norm;
        let signs = y.map(|z| {
            if z.norm() > 0.0 {
                z / z.norm()
            } else {
                Complex64::from(1.0)
            }
        });
        let z = adjoint_solve(&signs)?;
        let j = z.icamax();
        if j == last {
            break;
        }
        last = j;
        x.fill(Complex64::from(0.0));
        x[j] = Complex64::from(1.0);
    }
    // alternating probe guards against the estimator stalling
    let probe = DVector::from_fn(n, |i, _| {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        Complex64::from(sign * (1.0 + i as f64 / (n.max(2) - 1) as f64))
    });
    let alt = 2.0 * norm1(&lu.solve(&probe)?) / (3.0 * n as f64);
    Some(estimate.max(alt))
}

fn vec_inf(v: &DVector<Complex64>) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Growth rate of the surface mode `k` from a collocation solve.
///
/// Heights are scaled by `h0`, velocities by `ν h0` and pressure by `η ν`,
/// with `ν = f A + γ / (η h0)`.
pub fn sigma_collocation(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
    config: &CollocationConfig,
) -> Result<OracleResult> {
    config.validate()?;
    if !k.is_finite() {
        return Err(invalid("wavevector", "components must be finite"));
    }
    let h0 = film.thickness;
    let eta = film.viscosity;
    let (k1, k2) = (k.k1, k.k2);
    let (q1, q2) = (k1 * h0, k2 * h0);
    let q_sq = q1 * q1 + q2 * q2;
    if q_sq == 0.0 {
        return Err(Error::DegenerateWavevector("Q = 0 has no boundary problem"));
    }
    let nu = beam.strain_rate() + film.surface_energy / (eta * h0);
    if !(nu > 0.0) {
        return Err(invalid(
            "strain_rate",
            "beam and surface tension both vanish",
        ));
    }
    let h1 = config.amplitude * h0;
    let steady = steady_state(beam, film);

    let nodes = config.nodes;
    let (x, dx) = chebyshev(nodes);
    // ζ = (x + 1) / 2; node 0 is the surface, node N-1 the bottom
    let dz = dx * 2.0;
    let d2 = &dz * &dz;
    let (pi, dpi) = interior_interpolant(&x);
    let dpi = dpi * 2.0;
    let interior = nodes - 2;
    let size = 3 * nodes + interior;
    let (top, bottom) = (0, nodes - 1);
    let (u_at, v_at, w_at, p_at) = (0, nodes, 2 * nodes, 3 * nodes);

    let mut a = DMatrix::<Complex64>::zeros(size, size);
    let mut b = DVector::<Complex64>::zeros(size);
    let mut row = 0;
    for node in 1..nodes - 1 {
        for (offset, q) in [(u_at, q1), (v_at, q2)] {
            for j in 0..nodes {
                a[(row, offset + j)] = Complex64::from(d2[(node, j)]);
            }
            a[(row, offset + node)] -= q_sq;
            for j in 0..interior {
                a[(row, p_at + j)] = -I * q * pi[(node, j)];
            }
            row += 1;
        }
        for j in 0..nodes {
            a[(row, w_at + j)] = Complex64::from(d2[(node, j)]);
        }
        a[(row, w_at + node)] -= q_sq;
        for j in 0..interior {
            a[(row, p_at + j)] = Complex64::from(-dpi[(node, j)]);
        }
        row += 1;

        a[(row, u_at + node)] = I * q1;
        a[(row, v_at + node)] = I * q2;
        for j in 0..nodes {
            a[(row, w_at + j)] = Complex64::from(dz[(node, j)]);
        }
        row += 1;
    }

    // no slip on the displaced interface: v1(0) = -v0'(0) h1
    let bottom_slip = -steady.shear_rate * h1 / (nu * h0);
    for (offset, value) in [(u_at, bottom_slip), (v_at, 0.0), (w_at, 0.0)] {
        a[(row, offset + bottom)] = Complex64::from(1.0);
        b[row] = Complex64::from(value);
        row += 1;
    }

    // T1·n0 = -T0·n1 - γ κ1 n0 with n0 = z, n1 = -(i k1, i k2, 0) h1,
    // κ1 = |k|² h1
    let tilt = [-I * k1 * h1, -I * k2 * h1, Complex64::from(0.0)];
    let traction: Vec<Complex64> = (0..3)
        .map(|r| (0..3).map(|c| steady.stress.get(r, c) * tilt[c]).sum())
        .collect();
    let stress_unit = eta * nu;
    for (offset, q) in [(u_at, q1), (v_at, q2)] {
        for j in 0..nodes {
            a[(row, offset + j)] = Complex64::from(dz[(top, j)]);
        }
        a[(row, w_at + top)] += I * q;
        row += 1;
    }
    b[row - 2] = -traction[0] / stress_unit;
    b[row - 1] = -traction[1] / stress_unit;
    for j in 0..interior {
        a[(row, p_at + j)] = Complex64::from(-pi[(top, j)]);
    }
    for j in 0..nodes {
        a[(row, w_at + j)] += 2.0 * dz[(top, j)];
    }
    let curvature = (k1 * k1 + k2 * k2) * h1;
    b[row] = (-traction[2] - film.surface_energy * curvature) / stress_unit;
    row += 1;
    debug_assert_eq!(row, size);

    // equilibrate rows: second-derivative rows are O(N⁴), boundary rows O(1)
    for r in 0..size {
        let scale = a.row(r).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if scale > 0.0 {
            a.row_mut(r).unscale_mut(scale);
            b[r] /= scale;
        }
    }

    let lu = a.clone().lu();
    if !lu.is_invertible() {
        return Err(Error::Singular);
    }
    let condition = norm_1(&a) * inverse_norm_1_estimate(&lu).ok_or(Error::Singular)?;
    if !(condition.is_finite() && condition <= MAX_CONDITION) {
        return Err(Error::IllConditioned { condition });
    }
    let mut sol = lu.solve(&b).ok_or(Error::Singular)?;
    // one step of iterative refinement
    let r = &b - &a * &sol;
    if let Some(dx) = lu.solve(&r) {
        sol += dx;
    }
    let r = &b - &a * &sol;
    let residual_norm =
        vec_inf(&r) / (norm_inf(&a) * vec_inf(&sol) + vec_inf(&b)).max(f64::MIN_POSITIVE);

    let mut continuity_residual: f64 = 0.0;
    for node in 1..nodes - 1 {
        let mut dw = Complex64::from(0.0);
        let mut scale = 0.0;
        for j in 0..nodes {
            let term = dz[(node, j)] * sol[w_at + j];
            dw += term;
            scale += term.norm();
        }
        let lateral = I * q1 * sol[u_at + node] + I * q2 * sol[v_at + node];
        scale += lateral.norm();
        let res = (lateral + dw).norm();
        continuity_residual = continuity_residual.max(if scale > 0.0 { res / scale } else { res });
    }

    let [u0, v0, _] = steady.velocity(h0);
    let w_surface = sol[w_at + top] * nu * h0;
    let sigma = (w_surface - I * (u0 * k1 + v0 * k2) * h1) / h1;
    Ok(OracleResult {
        sigma: ComplexGrowthRate::new(sigma),
        residual_norm,
        continuity_residual,
        condition,
        nodes,
    })
}

/// One row of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub nodes: usize,
    pub sigma: Complex64,
    /// `|σ_N - σ_ref|` against the largest node count.
    pub error: f64,
}

/// Solve at each node count and compare with the last (largest) one.
pub fn convergence_study(
    k: &Wavevector,
    beam: &BeamParameters,
    film: &FilmParameters,
    node_counts: &[usize],
) -> Result<Vec<ConvergenceRow>> {
    if node_counts.is_empty() {
        return Ok(Vec::new());
    }
    if node_counts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("node_counts", "must be strictly ascending"));
    }
    let sigmas = node_counts
        .iter()
        .map(|&n| {
            sigma_collocation(k, beam, film, &CollocationConfig::new(n)?).map(|r| r.sigma.sigma)
        })
        .collect::<Result<Vec<_>>>()?;
    let reference = *sigmas.last().expect("nonempty");
    Ok(node_counts
        .iter()
        .zip(sigmas)
        .map(|(&nodes, sigma)| ConvergenceRow {
            nodes,
            sigma,
            error: (sigma - reference).norm(),
        })
        .collect())
}
