//! Small numerical helpers shared by the analyzers: bracketing, root location, line fits.

use crate::scalar::{linspace, Real};

/// Bisection for a sign change of `g` on `[a, b]`; returns the midpoint of the final bracket.
/// Stops early once the bracket cannot be split further.
pub fn bisect<T: Real>(g: impl Fn(T) -> T, mut a: T, mut b: T, iterations: usize) -> T {
    let mut ga = g(a);
    if ga == T::zero() {
        return a;
    }
    let two = T::lit(2.0);
    for _ in 0..iterations {
        let m = (a + b) / two;
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == T::zero() {
            return m;
        }
        if (gm < T::zero()) == (ga < T::zero()) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    (a + b) / two
}

/// Roots of `g` on `[lo, hi]` located by sampling `n` points and bisecting each sign change.
/// Samples that are exactly zero are reported as roots.
pub fn sign_change_roots<T: Real>(g: impl Fn(T) -> T, lo: T, hi: T, n: usize) -> Vec<T> {
    let xs = linspace(lo, hi, n.max(2));
    let vals: Vec<T> = xs.iter().map(|&x| g(x)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() {
        if vals[i] == T::zero() {
            roots.push(xs[i]);
            continue;
        }
        if i + 1 < xs.len() && vals[i + 1] != T::zero() && (vals[i] < T::zero()) != (vals[i + 1] < T::zero()) {
            roots.push(bisect(&g, xs[i], xs[i + 1], 2000));
        }
    }
    roots
}

/// Ordinary least-squares line with its coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

pub fn fit_line<T: Real>(x: &[T], y: &[T]) -> Option<LineFit<T>> {
    let n = x.len();
    if n < 2 || n != y.len() {
        return None;
    }
    let nf = T::from_usize_lossy(n);
    let mx = x.iter().copied().sum::<T>() / nf;
    let my = y.iter().copied().sum::<T>() / nf;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&xi, &yi) in x.iter().zip(y) {
        let (dx, dy) = (xi - mx, yi - my);
        sxx = sxx + dx * dx;
        sxy = sxy + dx * dy;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == T::zero() { T::one() } else { (sxy * sxy) / (sxx * syy) };
    Some(LineFit { slope, intercept, r_squared })
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_fit<T: Real>(x: &[T], y: &[T]) -> Option<LineFit<T>> {
    if x.iter().chain(y).any(|v| !(*v > T::zero())) {
        return None;
    }
    let lx: Vec<T> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<T> = y.iter().map(|v| v.ln()).collect();
    fit_line(&lx, &ly)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 200);
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn roots_of_cubic() {
        let r = sign_change_roots(|x: f64| x * (x - 0.5) * (x + 0.3), -1.0, 1.0, 101);
        assert_eq!(r.len(), 3);
        assert!((r[0] + 0.3).abs() < 1e-14 && r[1].abs() < 1e-14 && (r[2] - 0.5).abs() < 1e-14);
    }

    #[test]
    fn exact_line() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v - 1.0).collect();
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 3.0).abs() < 1e-14 && (f.intercept + 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
    }
}
