//! Prime ideals of `Z[sqrt 2]` and their angle parameter
//! `t = log|alpha/conj(alpha)|` on the circle `R / (2 log eps) Z`, `eps = 1 + sqrt 2`.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideals::{is_prime, sieve_rational_primes, sqrt_mod};
use crate::numeric::{from_i64, from_u64, lit, CompensatedSum, Real};
use crate::report::fmt_float;

/// `log(1 + sqrt 2)`.
pub fn log_eps<T: Real>() -> T {
    (T::one() + T::SQRT_2()).ln()
}

/// The period `2 log eps` of the angle parameter.
pub fn period<T: Real>() -> T {
    lit::<T>(2.0) * log_eps::<T>()
}

fn norm(a: i64, b: i64) -> i128 {
    a as i128 * a as i128 - 2 * b as i128 * b as i128
}

fn reduce<T: Real>(t: T) -> T {
    let per = period::<T>();
    let r = t - (t / per).floor() * per;
    if r >= per || r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// `log|(a + b sqrt 2)/(a - b sqrt 2)|` reduced into `[0, 2 log eps)`.
pub fn angle_t<T: Real>(a: i64, b: i64) -> Result<T> {
    let n = norm(a, b);
    if n == 0 {
        return Err(Error::BadInput(format!("({a}, {b}) has norm zero")));
    }
    let (af, bf) = (from_i64::<T>(a), from_i64::<T>(b));
    let nf = lit::<T>(n as f64);
    // avoid cancelling a + b sqrt 2 when a and b have opposite signs
    let alpha = if (a >= 0) == (b >= 0) { af + bf * T::SQRT_2() } else { nf / (af - bf * T::SQRT_2()) };
    Ok(reduce(lit::<T>(2.0) * alpha.abs().ln() - nf.abs().ln()))
}

/// The angle of the conjugate ideal.
pub fn conjugate_t<T: Real>(t: T) -> T {
    reduce(period::<T>() - t)
}

/// `(a + b sqrt 2)(1 + sqrt 2)`; flips the sign of the norm.
pub fn times_eps(a: i64, b: i64) -> (i64, i64) {
    (a + 2 * b, a + b)
}

/// `(a + b sqrt 2)(-1 + sqrt 2)`, the inverse of [`times_eps`].
pub fn times_eps_inv(a: i64, b: i64) -> (i64, i64) {
    (2 * b - a, a - b)
}

/// The generator of `(a + b sqrt 2)` with `t` in `[0, 2 log eps)` and `a > 0`.
pub fn canonical(a: i64, b: i64) -> Result<(i64, i64)> {
    if norm(a, b) == 0 {
        return Err(Error::BadInput(format!("({a}, {b}) has norm zero")));
    }
    // log|alpha/conj(alpha)| moves by 2 log eps per unit step
    let raw = |a: i64, b: i64| {
        let (af, bf) = (a as f64, b as f64);
        let n = norm(a, b) as f64;
        let alpha = if (a >= 0) == (b >= 0) {
            af + bf * std::f64::consts::SQRT_2
        } else {
            n / (af - bf * std::f64::consts::SQRT_2)
        };
        2.0 * alpha.abs().ln() - n.abs().ln()
    };
    let per = period::<f64>();
    let (mut a, mut b) = (a, b);
    let steps = (raw(a, b) / per).floor() as i64;
    for _ in 0..steps.max(0) {
        (a, b) = times_eps_inv(a, b);
    }
    for _ in 0..(-steps).max(0) {
        (a, b) = times_eps(a, b);
    }
    // settle any rounding at the ends of the fundamental interval
    while raw(a, b) < 0.0 {
        (a, b) = times_eps(a, b);
    }
    while raw(a, b) >= per {
        (a, b) = times_eps_inv(a, b);
    }
    Ok(if a < 0 { (-a, -b) } else { (a, b) })
}

/// Algorithm for [`solve_norm_equation`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Solver {
    /// Scan `b` upward until `p + 2 b^2` is a square.
    #[default]
    BruteForce,
    /// `sqrt(2) mod p` followed by a Euclidean gcd in `Z[sqrt 2]`.
    Fast,
}

fn check_split(p: u64) -> Result<()> {
    if p < 3 || !is_prime(p) {
        return Err(Error::BadInput(format!("{p} is not an odd prime")));
    }
    if matches!(p % 8, 3 | 5) {
        return Err(Error::NotSplit(p));
    }
    Ok(())
}

fn is_square(n: u64) -> Option<u64> {
    let r = crate::numeric::isqrt(n);
    (r * r == n).then_some(r)
}

fn brute_force(p: u64) -> Result<(i64, i64)> {
    let limit = crate::numeric::isqrt(p) + 1;
    (0..=limit).find_map(|b| is_square(p + 2 * b * b).map(|a| (a as i64, b as i64))).ok_or(Error::NotSplit(p))
}

fn gcd_z2(mut x: (i128, i128), mut y: (i128, i128)) -> (i128, i128) {
    let n = |(a, b): (i128, i128)| a * a - 2 * b * b;
    let round_div = |num: i128, den: i128| {
        let (num, den) = if den < 0 { (-num, -den) } else { (num, den) };
        (2 * num + den).div_euclid(2 * den)
    };
    while y != (0, 0) {
        let ny = n(y);
        // x / y = x conj(y) / N(y)
        let re = x.0 * y.0 - 2 * x.1 * y.1;
        let im = x.1 * y.0 - x.0 * y.1;
        let q = (round_div(re, ny), round_div(im, ny));
        let qy = (q.0 * y.0 + 2 * q.1 * y.1, q.0 * y.1 + q.1 * y.0);
        let r = (x.0 - qy.0, x.1 - qy.1);
        (x, y) = (y, r);
    }
    x
}

fn fast(p: u64) -> Result<(i64, i64)> {
    let r = sqrt_mod(2, p)?;
    let g = gcd_z2((p as i128, 0), (r as i128, 1));
    let (a, b) = (i64::try_from(g.0), i64::try_from(g.1));
    let (a, b) = (a.map_err(|_| Error::NotSplit(p))?, b.map_err(|_| Error::NotSplit(p))?);
    if norm(a, b).unsigned_abs() != p as u128 {
        return Err(Error::NotSplit(p));
    }
    // of the two conjugate ideals, exactly one has a canonical generator of norm +p
    for (a, b) in [canonical(a, b)?, canonical(a, -b)?] {
        if norm(a, b) == p as i128 {
            return Ok((a, b));
        }
    }
    Err(Error::NotSplit(p))
}

/// `a^2 - 2 b^2 = sign p` with `a > 0`, `b >= 0` minimal.
///
/// This is the canonical generator of norm `+p`; the conjugate ideal's
/// canonical generator has norm `-p`.
pub fn solve_norm_equation(p: u64, solver: Solver) -> Result<(i64, i64, i8)> {
    check_split(p)?;
    let (a, b) = match solver {
        Solver::BruteForce => brute_force(p)?,
        Solver::Fast => fast(p)?,
    };
    debug_assert_eq!(norm(a, b), p as i128);
    Ok((a, b, 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealQuadPrimeIdeal<T> {
    pub p: u64,
    pub a: i64,
    pub b: i64,
    pub sign: i8,
    pub t: T,
}

impl<T: Real> RealQuadPrimeIdeal<T> {
    /// The two ideals above a split `p`: the norm `+p` one first, then its conjugate.
    pub fn above(p: u64, solver: Solver) -> Result<[Self; 2]> {
        let (a, b, _) = solve_norm_equation(p, solver)?;
        let make = |(a, b): (i64, i64)| -> Result<Self> {
            let n = norm(a, b);
            if n.unsigned_abs() != p as u128 {
                return Err(Error::BadInput(format!("({a}, {b}) does not have norm +-{p}")));
            }
            Ok(Self { p, a, b, sign: if n > 0 { 1 } else { -1 }, t: angle_t(a, b)? })
        };
        Ok([make((a, b))?, make(canonical(a, -b)?)?])
    }

    /// Exact check of `a^2 - 2 b^2 = sign p`.
    pub fn verify(&self) -> bool {
        norm(self.a, self.b) == self.sign as i128 * self.p as i128
    }
}

/// Both ideals above every split prime `p <= limit`, ordered by `p`.
pub fn real_prime_ideals<T: Real>(limit: u64, solver: Solver) -> Result<Vec<RealQuadPrimeIdeal<T>>> {
    let primes: Vec<u64> = sieve_rational_primes(limit).into_iter().filter(|p| matches!(p % 8, 1 | 7)).collect();
    let pairs = primes.par_iter().map(|&p| RealQuadPrimeIdeal::above(p, solver)).collect::<Result<Vec<_>>>()?;
    Ok(pairs.into_iter().flatten().collect())
}

/// Normalized Weyl sums `sum exp(i pi k t / log eps) / count` over the ideals above split `p <= limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealWeylReport {
    pub limit: u64,
    pub count: usize,
    pub solver: Solver,
    pub sums: Vec<WeylEntry>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylEntry {
    pub k: u32,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

impl RealWeylReport {
    pub fn magnitude(&self, k: u32) -> Option<f64> {
        self.sums.iter().find(|e| e.k == k).map(|e| e.abs)
    }
}

pub fn weyl_sums_real<T: Real>(ideals: &[RealQuadPrimeIdeal<T>], k_max: u32) -> Vec<Complex<T>> {
    let n = from_u64::<T>(ideals.len().max(1) as u64);
    (0..=k_max)
        .map(|k| {
            let scale = T::PI() * from_u64::<T>(k as u64) / log_eps::<T>();
            let mut re = CompensatedSum::new();
            let mut im = CompensatedSum::new();
            for id in ideals {
                let (s, c) = (scale * id.t).sin_cos();
                re.add(c);
                im.add(s);
            }
            Complex::new(re.value() / n, im.value() / n)
        })
        .collect()
}

pub fn equidistribution_report_real<T: Real>(limit: u64, k_max: u32, solver: Solver) -> Result<RealWeylReport> {
    if limit < 17 {
        return Err(Error::BadInput(format!("limit {limit} is below 17")));
    }
    let ideals = real_prime_ideals::<T>(limit, solver)?;
    let sums = weyl_sums_real(&ideals, k_max)
        .into_iter()
        .enumerate()
        .map(|(k, z)| {
            let (re, im) = (z.re.to_f64().unwrap_or(f64::NAN), z.im.to_f64().unwrap_or(f64::NAN));
            WeylEntry { k: k as u32, re, im, abs: re.hypot(im) }
        })
        .collect();
    Ok(RealWeylReport { limit, count: ideals.len(), solver, sums })
}

/// CSV rows `p,a,b,sign,t`.
pub fn write_ideals_csv<T: Real, W: Write>(out: &mut W, ideals: &[RealQuadPrimeIdeal<T>]) -> Result<()> {
    writeln!(out, "p,a,b,sign,t")?;
    for id in ideals {
        writeln!(out, "{},{},{},{},{}", id.p, id.a, id.b, id.sign, fmt_float(id.t.to_f64().unwrap_or(f64::NAN)))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solver_examples() {
        for solver in [Solver::BruteForce, Solver::Fast] {
            assert_eq!(solve_norm_equation(7, solver), Ok((3, 1, 1)));
            assert_eq!(solve_norm_equation(17, solver), Ok((5, 2, 1)));
            assert_eq!(solve_norm_equation(23, solver), Ok((5, 1, 1)));
            assert_eq!(solve_norm_equation(5, solver), Err(Error::NotSplit(5)));
            assert_eq!(solve_norm_equation(11, solver), Err(Error::NotSplit(11)));
            assert!(matches!(solve_norm_equation(15, solver), Err(Error::BadInput(_))));
        }
    }

    #[test]
    fn angle_examples() {
        let t: f64 = angle_t(3, 1).unwrap();
        let want = ((3.0 + 2f64.sqrt()) / (3.0 - 2f64.sqrt())).ln();
        // reference value from an independent double-precision evaluation
        assert!((t - want).abs() < 1e-15 && (t - 1.0237492301873474).abs() < 1e-15);
        assert_eq!(angle_t::<f64>(1, 0), Ok(0.0));
        let shifted: f64 = angle_t(5, 4).unwrap();
        assert!((shifted - t).abs() < 1e-12);
        assert!(angle_t::<f64>(0, 0).is_err());
        assert!((period::<f64>() - 1.762747174039086).abs() < 1e-15);
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(conjugate_t(0.0f64), 0.0);
        let t: f64 = angle_t(3, 1).unwrap();
        assert!((conjugate_t(t) - 0.7389979438517384).abs() < 1e-15);
        for t in [0.1f64, 0.9, 1.7] {
            assert!((conjugate_t(conjugate_t(t)) - t).abs() <= 2.0 * f64::EPSILON * 2.0);
        }
    }

    #[test]
    fn canonical_is_unit_invariant() {
        let (a, b) = (3i64, 1i64);
        let mut g = (a, b);
        for _ in 0..6 {
            g = times_eps(g.0, g.1);
            assert_eq!(canonical(g.0, g.1), Ok((3, 1)));
            assert_eq!(canonical(-g.0, -g.1), Ok((3, 1)));
        }
        assert_eq!(canonical(3, -1), Ok((1, 2)));
    }

    #[test]
    fn conjugate_pair_above_seven() {
        let [x, y] = RealQuadPrimeIdeal::<f64>::above(7, Solver::BruteForce).unwrap();
        assert_eq!((x.a, x.b, x.sign), (3, 1, 1));
        assert_eq!((y.a, y.b, y.sign), (1, 2, -1));
        assert!((x.t + y.t - period::<f64>()).abs() < 1e-14);
        assert!(x.verify() && y.verify());
    }

    #[test]
    fn splitting_criterion_matches_legendre_symbol() {
        for p in sieve_rational_primes(10_000).into_iter().skip(1) {
            let two_is_square = crate::ideals::modular::pow_mod(2, (p - 1) / 2, p) == 1;
            let solved = solve_norm_equation(p, Solver::BruteForce);
            assert_eq!(solved.is_ok(), two_is_square, "p = {p}");
            if let Ok((a, b, s)) = solved {
                assert_eq!(norm(a, b), s as i128 * p as i128);
                let (c, d) = times_eps(a, b);
                assert_eq!(norm(c, d), -(s as i128) * p as i128);
            }
        }
    }

    #[test]
    fn fast_path_matches_brute_force() {
        for p in sieve_rational_primes(100_000).into_iter().filter(|p| matches!(p % 8, 1 | 7)) {
            assert_eq!(solve_norm_equation(p, Solver::Fast), solve_norm_equation(p, Solver::BruteForce), "p = {p}");
        }
    }

    #[test]
    fn weyl_report_basics() {
        let r = equidistribution_report_real::<f64>(1000, 3, Solver::Fast).unwrap();
        assert_eq!(r.sums[0].re, 1.0);
        assert_eq!(r.sums[0].im, 0.0);
        for e in &r.sums {
            assert!(e.abs <= 1.0 + 1e-12);
            assert!(e.im.abs() < 1e-12, "{e:?}");
        }
        assert!(equidistribution_report_real::<f64>(10, 3, Solver::Fast).is_err());
    }

    #[test]
    fn csv_lists_both_conjugates() {
        let ideals = real_prime_ideals::<f64>(30, Solver::BruteForce).unwrap();
        let mut buf = Vec::new();
        write_ideals_csv(&mut buf, &ideals).unwrap();
        let text = String::from_utf8(buf).unwrap();
        // split primes up to 30: 7, 17, 23
        assert_eq!(text.lines().count(), 1 + 6);
        assert!(text.lines().nth(1).unwrap().starts_with("7,3,1,1,"));
    }
}
