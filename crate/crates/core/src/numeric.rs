//! Small numerical routines shared across modules: 1-D optimization,
//! adaptive quadrature, and a symmetric 3x3 eigensolver.

use crate::error::{Error, Result};

/// Golden-section maximization of a unimodal function on `[a, b]`.
///
/// Returns `(x_max, f(x_max))`. The bracketing interval is driven below
/// `tol`, but for smooth peaks the returned abscissa is only reliable to
/// about `sqrt(machine epsilon)` times the scale: past that point the
/// comparisons are fp noise. Kinked peaks locate to full precision.
pub fn golden_section_max(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (a, b);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
    }
    let xm = 0.5 * (lo + hi);
    (xm, f(xm))
}

/// Golden-section minimization on `[a, b]`.
pub fn golden_section_min(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (x, neg) = golden_section_max(|x| -f(x), a, b, tol);
    (x, -neg)
}

/// Adaptive Simpson quadrature of `f` over `[a, b]`.
///
/// `tol` is treated as a relative tolerance against the accumulated integral
/// (with a tiny absolute floor). The integrand must be finite on `[a, b]`;
/// singular endpoints belong in [`integrate_singular_lower`].
pub fn adaptive_simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    if !(fa.is_finite() && fb.is_finite() && fm.is_finite()) {
        return Err(Error::numeric(format!(
            "integrand not finite on [{a}, {b}]"
        )));
    }
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(f, a, b, fa, fm, fb, whole, tol.max(1e-15), 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    if !(flm.is_finite() && frm.is_finite()) {
        return Err(Error::numeric(format!(
            "integrand not finite inside [{a}, {b}]"
        )));
    }
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 {
        return Ok(left + right + delta / 15.0);
    }
    // Richardson-style acceptance: the subdivision error estimate must be
    // small relative to the local contribution.
    if delta.abs() <= 15.0 * tol * (left + right).abs().max(1e-300) {
        return Ok(left + right + delta / 15.0);
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, tol, depth - 1)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, tol, depth - 1)?;
    Ok(l + r)
}

/// Integrates `g(u)` over `(0, u1]` where `g` has an integrable power
/// singularity `g(u) ~ A u^{-q}`, `q < 1`, at the origin.
///
/// The bulk `[u_floor, u1]` is handled by adaptive Simpson under a log
/// substitution (which turns power behavior into smooth exponentials); the
/// unresolvable sliver `(0, u_floor)` below floating-point resolution is
/// added analytically from the locally fitted exponent, which is exact for
/// pure power tails.
pub fn integrate_singular_lower(
    g: &impl Fn(f64) -> f64,
    u1: f64,
    u_floor: f64,
    tol: f64,
) -> Result<f64> {
    if !(u_floor > 0.0 && u_floor < u1) {
        return Err(Error::numeric(format!(
            "bad singular-integration range: floor {u_floor}, upper {u1}"
        )));
    }
    // g(e^v) e^v is smooth and exponentially decaying toward v -> -inf
    let transformed = |v: f64| {
        let u = v.exp();
        g(u) * u
    };
    let bulk = adaptive_simpson(&transformed, u_floor.ln(), u1.ln(), tol)?;

    // local exponent from two probes, then the analytic sliver
    // integral of A u^-q over (0, u_floor) = g(u_floor) * u_floor / (1 - q)
    let g1 = g(u_floor);
    let g2 = g(u_floor * 8.0);
    if !(g1 > 0.0 && g2 > 0.0) {
        return Err(Error::numeric("singular integrand must be positive near 0"));
    }
    let q = (g1 / g2).ln() / 8.0f64.ln();
    if q >= 1.0 {
        return Err(Error::numeric(format!(
            "tail exponent {q:.3} is not integrable"
        )));
    }
    let sliver = if q > 0.0 { g1 * u_floor / (1.0 - q) } else { 0.0 };
    Ok(bulk + sliver)
}

/// Eigenvalues of a symmetric 3x3 matrix by cyclic Jacobi rotations,
/// returned in descending order.
pub fn symmetric_eigenvalues_3x3(m: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a = m;
    for _sweep in 0..64 {
        let off = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
        if off < 1e-300 {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq.abs() < 1e-300 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            let mut b = a;
            for i in 0..3 {
                b[i][p] = c * a[i][p] - s * a[i][q];
                b[i][q] = s * a[i][p] + c * a[i][q];
            }
            let mut r = b;
            for j in 0..3 {
                r[p][j] = c * b[p][j] - s * b[q][j];
                r[q][j] = s * b[p][j] + c * b[q][j];
            }
            a = r;
        }
    }
    let mut ev = [a[0][0], a[1][1], a[2][2]];
    ev.sort_by(|x, y| y.partial_cmp(x).unwrap());
    ev
}
