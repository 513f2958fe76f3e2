//! One-dimensional extremum and root search used on growth-rate curves.

/// Location and value of a maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
}

/// Evaluate `f` on `points` log-spaced abscissae spanning `[lo, hi]` and
/// return the index and location of the largest value. Ties go to the
/// smaller abscissa.
pub fn log_scan_argmax<F>(f: F, lo: f64, hi: f64, points: usize) -> (usize, Maximum)
where
    F: Fn(f64) -> f64,
{
    assert!(lo > 0.0 && hi > lo && points >= 2, "invalid scan range");
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    let mut best = (
        0,
        Maximum {
            x: lo,
            value: f(lo),
        },
    );
    for i in 1..points {
        let x = if i == points - 1 {
            hi
        } else {
            lo * (ratio * i as f64).exp()
        };
        let value = f(x);
        if value > best.1.value {
            best = (i, Maximum { x, value });
        }
    }
    best
}

/// x-coordinate of the `i`-th point of the scan used by [`log_scan_argmax`].
pub(crate) fn log_scan_point(lo: f64, hi: f64, points: usize, i: usize) -> f64 {
    if i == 0 {
        lo
    } else if i >= points - 1 {
        hi
    } else {
        lo * ((hi / lo).ln() / (points - 1) as f64 * i as f64).exp()
    }
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of a unimodal `f` on `[a, b]`,
/// stopping when the bracket width falls below `rel_tol` times its midpoint.
pub fn golden_section_max<F>(f: F, mut a: f64, mut b: f64, rel_tol: f64) -> Maximum
where
    F: Fn(f64) -> f64,
{
    if a > b {
        std::mem::swap(&mut a, &mut b);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    // the bracket shrinks by 1/phi per pass; 200 passes reach any tolerance
    for _ in 0..200 {
        if (b - a) <= rel_tol * (0.5 * (a + b)).abs() {
            break;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc >= fd {
        Maximum { x: c, value: fc }
    } else {
        Maximum { x: d, value: fd }
    }
}

/// Bisection for a sign change of `f` on `[a, b]`. Returns `None` when the
/// endpoints do not bracket a root.
pub fn bisect_root<F>(f: F, mut a: f64, mut b: f64, tol: f64) -> Option<f64>
where
    F: Fn(f64) -> f64,
{
    let mut fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Some(a);
    }
    if fb == 0.0 {
        return Some(b);
    }
    if fa.signum() == fb.signum() {
        return None;
    }
    for _ in 0..300 {
        let mid = 0.5 * (a + b);
        if (b - a).abs() <= tol || mid == a || mid == b {
            return Some(mid);
        }
        let fm = f(mid);
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Some(0.5 * (a + b))
}
