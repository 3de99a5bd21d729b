//! One-dimensional root finding and maximisation.

use crate::scalar::Real;

/// Sign-change bracket `f(lo) <= 0 <= f(hi)` for an increasing function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bracket<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

impl<T: Real> Bracket<T> {
    /// Weight on `lo` of the secant root inside the bracket.
    pub fn theta(&self) -> T {
        let span = self.f_hi - self.f_lo;
        if span > T::zero() {
            (self.f_hi / span).max(T::zero()).min(T::one())
        } else {
            T::lit(0.5)
        }
    }

    pub fn root(&self) -> T {
        let t = self.theta();
        t * self.lo + (T::one() - t) * self.hi
    }
}

/// Illinois regula falsi on an increasing `f`, safeguarded by bisection.
///
/// Stops when the bracket is narrower than `xtol`, when `|f| <= ftol` at an
/// iterate, or after `max_iter` steps, and returns the final bracket. An
/// iterate with `|f| <= ftol` collapses the bracket onto itself.
#[allow(clippy::too_many_arguments)]
pub fn refine_increasing<T: Real, F: FnMut(T) -> T>(
    mut f: F,
    lo: T,
    hi: T,
    f_lo: T,
    f_hi: T,
    xtol: T,
    ftol: T,
    max_iter: usize,
) -> Bracket<T> {
    let mut b = Bracket { lo, hi, f_lo, f_hi };
    if f_lo >= T::zero() {
        return Bracket { lo, hi: lo, f_lo, f_hi: f_lo };
    }
    if f_hi <= T::zero() {
        return Bracket { lo: hi, hi, f_lo: f_hi, f_hi };
    }
    // Scaled copies of the endpoint values drive the Illinois update.
    let (mut g_lo, mut g_hi) = (b.f_lo, b.f_hi);
    let mut side = 0i8;
    let half = T::lit(0.5);
    for it in 0..max_iter {
        let width = b.hi - b.lo;
        if width <= xtol {
            break;
        }
        let mut x = if it % 4 == 3 {
            b.lo + half * width
        } else {
            let t = g_hi / (g_hi - g_lo);
            b.lo * t + b.hi * (T::one() - t)
        };
        let guard = width * T::lit(1e-3);
        if !(x > b.lo + guard && x < b.hi - guard) {
            x = b.lo + half * width;
        }
        let fx = f(x);
        if fx.abs() <= ftol {
            return Bracket { lo: x, hi: x, f_lo: fx, f_hi: fx };
        }
        if fx < T::zero() {
            b.lo = x;
            b.f_lo = fx;
            g_lo = fx;
            if side == -1 {
                g_hi = g_hi * half;
            }
            side = -1;
        } else {
            b.hi = x;
            b.f_hi = fx;
            g_hi = fx;
            if side == 1 {
                g_lo = g_lo * half;
            }
            side = 1;
        }
    }
    b
}

/// Plain bisection on an increasing `f` returning the final bracket.
pub fn bisect<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, xtol: T, max_iter: usize) -> (T, T) {
    let half = T::lit(0.5);
    for _ in 0..max_iter {
        if hi - lo <= xtol {
            break;
        }
        let mid = lo + half * (hi - lo);
        if f(mid) < T::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo, hi)
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`.
///
/// Returns the best point seen and its value. Ties keep the smaller abscissa.
pub fn golden_max<T: Real, F: FnMut(T) -> T>(mut f: F, mut lo: T, mut hi: T, xtol: T, max_iter: usize) -> (T, T) {
    let r = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f2 > f1 { (x2, f2) } else { (x1, f1) };
    for _ in 0..max_iter {
        if hi - lo <= xtol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
            if f1 > best.1 || (f1 == best.1 && x1 < best.0) {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
            if f2 > best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn illinois_finds_cubic_root() {
        let f = |x: f64| x * x * x - 2.0;
        let b = refine_increasing(f, 0.0, 2.0, f(0.0), f(2.0), 1e-14, 0.0, 200);
        assert!((b.root() - 2f64.cbrt()).abs() < 1e-12);
        assert!(b.f_lo <= 0.0 && b.f_hi >= 0.0);
    }

    #[test]
    fn illinois_handles_steep_kink() {
        let f = |x: f64| if x < 0.3 { x - 0.3 } else { 1e8 * (x - 0.3) };
        let b = refine_increasing(f, 0.0, 1.0, f(0.0), f(1.0), 1e-15, 0.0, 300);
        assert!((b.root() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn illinois_endpoint_roots() {
        let f = |x: f64| x;
        let b = refine_increasing(f, 0.0, 1.0, 0.0, 1.0, 1e-12, 0.0, 50);
        assert_eq!(b.root(), 0.0);
        let g = |x: f64| x - 1.0;
        let b = refine_increasing(g, 0.0, 1.0, -1.0, 0.0, 1e-12, 0.0, 50);
        assert_eq!(b.root(), 1.0);
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x: f64| -(x - 0.37) * (x - 0.37), 0.0, 1.0, 1e-10, 200);
        assert!((x - 0.37).abs() < 1e-6);
        assert!(v <= 0.0);
    }

    #[test]
    fn bisection_brackets() {
        let (lo, hi) = bisect(|x: f64| x * x - 0.5, 0.0, 1.0, 1e-13, 100);
        assert!(lo <= 0.5f64.sqrt() && hi >= 0.5f64.sqrt());
        assert!(hi - lo <= 1e-13);
    }
}
