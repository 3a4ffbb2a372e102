//! Small numeric helpers shared across modules. All logarithms are natural.

/// `ln(n!)`, exact summation for small `n`, log-gamma above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 32 {
        let mut acc = 0.0;
        for i in 2..=n {
            acc += libm::log(i as f64);
        }
        acc
    } else {
        libm::lgamma(n as f64 + 1.0)
    }
}

/// `ln C(n, k)`; `-inf` when `k > n`.
pub fn ln_binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + libm::log1p(libm::exp(lo - hi))
}

/// Adaptive Simpson quadrature on `[a, b]`.
///
/// Recursion stops once the Richardson-corrected error estimate is within
/// `rel_tol * |whole estimate|` (with a tiny absolute floor) or at `max_depth`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, max_depth: u32) -> f64 {
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let tol = rel_tol * libm::fabs(whole).max(1e-300);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, max_depth)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || libm::fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(ln_factorial(0), 0.0);
        assert_eq!(ln_factorial(1), 0.0);
        assert!((ln_factorial(5) - libm::log(120.0)).abs() < 1e-14);
        // 40! = 8.159152832478977e47
        assert!((ln_factorial(40) - libm::log(8.159_152_832_478_977e47)).abs() < 1e-12);
        assert!((ln_binomial(6, 3) - libm::log(20.0)).abs() < 1e-13);
    }

    #[test]
    fn simpson_polynomial_and_exp() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12, 40);
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(libm::exp, 0.0, 1.0, 1e-10, 40);
        assert!((v - (core::f64::consts::E - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn log_add() {
        let v = log_add_exp(libm::log(3.0), libm::log(5.0));
        assert!((v - libm::log(8.0)).abs() < 1e-14);
        assert_eq!(log_add_exp(f64::NEG_INFINITY, 1.0), 1.0);
    }
}
