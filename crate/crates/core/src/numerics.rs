//! Shared numerical primitives: Gauss-Legendre rules and bracketed root finding.

use std::sync::LazyLock;

/// Nodes and weights of an n-point Gauss-Legendre rule on [-1, 1].
///
/// Computed by Newton iteration on the Legendre polynomial; accurate to
/// machine precision for the orders used here.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "quadrature order must be positive");
    let mut rule = Vec::with_capacity(n);
    let nf = n as f64;
    // Roots come in symmetric pairs; solve for the non-negative half.
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push((-x, w));
    }
    // Mirror onto the negative half (midpoint of odd rules is its own mirror).
    for i in (0..n / 2).rev() {
        let (x, w) = rule[i];
        rule.push((-x, w));
    }
    rule
}

/// The fixed 128-node rule used for Kendall's tau integrals.
pub static GL128: LazyLock<Vec<(f64, f64)>> = LazyLock::new(|| gauss_legendre(128));

static GL15: LazyLock<Vec<(f64, f64)>> = LazyLock::new(|| gauss_legendre(15));

/// Integrate `f` over [a, b] with a fixed node/weight rule.
pub fn integrate_fixed(rule: &[(f64, f64)], a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for &(x, w) in rule {
        acc += w * f(mid + half * x);
    }
    half * acc
}

/// Adaptive Gauss-Legendre integration to an absolute tolerance.
///
/// Compares a single 15-point panel against its bisection and recurses on
/// disagreement. Panics only on pathological non-finite integrands.
pub fn integrate_adaptive(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    fn recurse(
        f: &mut impl FnMut(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> f64 {
        let mid = 0.5 * (a + b);
        let left = integrate_fixed(&GL15, a, mid, &mut *f);
        let right = integrate_fixed(&GL15, mid, b, &mut *f);
        let refined = left + right;
        if depth == 0 || (refined - whole).abs() <= tol {
            return refined;
        }
        recurse(f, a, mid, left, 0.5 * tol, depth - 1)
            + recurse(f, mid, b, right, 0.5 * tol, depth - 1)
    }
    let whole = integrate_fixed(&GL15, a, b, &mut *f);
    recurse(f, a, b, whole, abs_tol, 40)
}

/// Error from bracketed root finding.
#[derive(Debug, Clone, thiserror::Error)]
pub enum RootError {
    #[error("no sign change on [{a}, {b}]: f(a)={fa}, f(b)={fb}")]
    NoBracket { a: f64, b: f64, fa: f64, fb: f64 },
    #[error("root finding did not converge within {0} iterations")]
    NoConvergence(usize),
}

/// Brent's method for a root of `f` on the bracket [a, b].
///
/// Stops when `|f| <= f_tol` or the bracket width falls below `x_tol`.
pub fn brent_root(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    x_tol: f64,
    f_tol: f64,
) -> Result<f64, RootError> {
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 || fa.abs() <= f_tol {
        return Ok(a);
    }
    if fb == 0.0 || fb.abs() <= f_tol {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(RootError::NoBracket { a, b, fa, fb });
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut mflag = true;
    for _ in 0..200 {
        if fb.abs() <= f_tol {
            return Ok(b);
        }
        let mut s = if fa != fc && fb != fc {
            // inverse quadratic interpolation
            a * fb * fc / ((fa - fb) * (fa - fc))
                + b * fa * fc / ((fb - fa) * (fb - fc))
                + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let lo = (3.0 * a + b) / 4.0;
        let cond = (s - lo) * (s - b) >= 0.0
            || (mflag && (s - b).abs() >= (b - c).abs() / 2.0)
            || (!mflag && (s - b).abs() >= (c - d).abs() / 2.0)
            || (mflag && (b - c).abs() < x_tol)
            || (!mflag && (c - d).abs() < x_tol);
        if cond {
            s = 0.5 * (a + b);
            mflag = true;
        } else {
            mflag = false;
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa.signum() != fs.signum() {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
        if (b - a).abs() <= x_tol {
            return Ok(b);
        }
    }
    Err(RootError::NoConvergence(200))
}

/// log(exp(a) + exp(b)) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}
