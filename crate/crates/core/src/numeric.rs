//! Scalar abstraction and the small numerical kernels shared by every module:
//! error-free summation and adaptive Simpson quadrature.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

use crate::error::{Error, Result};

/// Floating point scalar the statistics are computed in: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Default absolute tolerance for window quadrature.
    const QUAD_TOL: f64;
    /// Relative level below which a Fourier coefficient counts as negligible.
    const TAIL_FLOOR: f64;
}

impl Real for f64 {
    const QUAD_TOL: f64 = 1e-10;
    const TAIL_FLOOR: f64 = 1e-14;
}

impl Real for f32 {
    const QUAD_TOL: f64 = 1e-5;
    const TAIL_FLOOR: f64 = 1e-6;
}

/// Converts an `f64` literal into the working scalar.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable")
}

#[inline]
pub fn from_i64<T: Real>(x: i64) -> T {
    T::from_i64(x).expect("integer representable")
}

#[inline]
pub fn from_u64<T: Real>(x: u64) -> T {
    T::from_u64(x).expect("integer representable")
}

/// Running sum carried with its rounding error (Knuth's TwoSum).
///
/// The result of a fixed sequence of `add`s is bit-reproducible, and the
/// error is that of a single rounding at the end for all practical sizes.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum<T> {
    sum: T,
    comp: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self { sum: T::zero(), comp: T::zero() }
    }

    #[inline]
    pub fn add(&mut self, x: T) {
        let t = self.sum + x;
        let bp = t - self.sum;
        let err = (self.sum - (t - bp)) + (x - bp);
        self.sum = t;
        self.comp = self.comp + err;
    }

    /// Folds another partial sum in; used to merge block sums in block order.
    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.comp = self.comp + other.comp;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.comp
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(iter: I) -> T {
    iter.into_iter().collect::<CompensatedSum<T>>().value()
}

/// Upper bound on the number of leaf intervals adaptive Simpson may create.
pub const MAX_INTERVALS: usize = 1 << 20;

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Uses the usual local Richardson correction `S2 + (S2 - S1)/15`. Fails with
/// [`Error::QuadratureFailure`] when more than `max_intervals` leaves would be
/// needed.
pub fn adaptive_simpson<T, F>(f: F, a: T, b: T, tol: T, max_intervals: usize) -> Result<T>
where
    T: Real,
    F: Fn(T) -> T,
{
    if a == b {
        return Ok(T::zero());
    }
    let (lo, hi, sign) = if a < b { (a, b, T::one()) } else { (b, a, -T::one()) };
    let two = lit::<T>(2.0);
    let six = lit::<T>(6.0);

    struct Panel<T> {
        a: T,
        b: T,
        fa: T,
        fm: T,
        fb: T,
        whole: T,
        tol: T,
        depth: u32,
    }

    let fa = f(lo);
    let fb = f(hi);
    let m = (lo + hi) / two;
    let fm = f(m);
    let whole = (hi - lo) / six * (fa + lit::<T>(4.0) * fm + fb);

    let mut stack = vec![Panel { a: lo, b: hi, fa, fm, fb, whole, tol, depth: 0 }];
    let mut acc = CompensatedSum::new();
    let mut leaves = 0usize;
    // Depth 50 exhausts f64 resolution on any reasonable interval.
    let max_depth = 50;
    while let Some(p) = stack.pop() {
        let m = (p.a + p.b) / two;
        let lm = (p.a + m) / two;
        let rm = (m + p.b) / two;
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - p.a) / six * (p.fa + lit::<T>(4.0) * flm + p.fm);
        let right = (p.b - m) / six * (p.fm + lit::<T>(4.0) * frm + p.fb);
        let delta = left + right - p.whole;
        if delta.abs() <= lit::<T>(15.0) * p.tol || p.depth >= max_depth || m <= p.a || m >= p.b {
            acc.add(left + right + delta / lit::<T>(15.0));
            leaves += 1;
            if leaves > max_intervals {
                return Err(Error::QuadratureFailure { tol: tol.to_f64().unwrap_or(f64::NAN), max_intervals });
            }
            continue;
        }
        if stack.len() + leaves >= max_intervals {
            return Err(Error::QuadratureFailure { tol: tol.to_f64().unwrap_or(f64::NAN), max_intervals });
        }
        let half = p.tol / two;
        // Push right first so the left half is integrated first.
        stack.push(Panel { a: m, b: p.b, fa: p.fm, fm: frm, fb: p.fb, whole: right, tol: half, depth: p.depth + 1 });
        stack.push(Panel { a: p.a, b: m, fa: p.fa, fm: flm, fb: p.fm, whole: left, tol: half, depth: p.depth + 1 });
    }
    Ok(sign * acc.value())
}

/// Integer square root, floor(sqrt(n)).
pub fn isqrt(n: u64) -> u64 {
    if n < 2 {
        return n;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r.checked_mul(r).is_none_or(|v| v > n) {
        r -= 1;
    }
    while (r + 1).checked_mul(r + 1).is_some_and(|v| v <= n) {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancelled_terms() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(xs.iter().copied()), 2.0);
        let naive: f64 = xs.iter().sum();
        assert_ne!(naive, 2.0);
    }

    #[test]
    fn merge_matches_sequential() {
        let xs: Vec<f64> = (1..1000).map(|i| 1.0 / i as f64).collect();
        let whole = compensated_sum(xs.iter().copied());
        let mut a: CompensatedSum<f64> = xs[..500].iter().copied().collect();
        let b: CompensatedSum<f64> = xs[500..].iter().copied().collect();
        a.merge(&b);
        assert!((a.value() - whole).abs() <= 1e-15 * whole);
    }

    #[test]
    fn simpson_polynomials_and_smooth() {
        let v = adaptive_simpson(|x: f64| x * x * x, 0.0, 2.0, 1e-12, MAX_INTERVALS).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
        let v = adaptive_simpson(|x: f64| x.sin(), 0.0, std::f64::consts::PI, 1e-12, MAX_INTERVALS).unwrap();
        assert!((v - 2.0).abs() < 1e-11);
        let v = adaptive_simpson(|x: f64| x, 1.0, 0.0, 1e-12, MAX_INTERVALS).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
    }

    #[test]
    fn simpson_reports_failure_on_budget() {
        let r = adaptive_simpson(|x: f64| (1.0 / x).sin(), 1e-6, 1.0, 1e-14, 64);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn isqrt_edges() {
        for n in 0..2000u64 {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
        assert_eq!(isqrt(u64::MAX), 4294967295);
    }
}
