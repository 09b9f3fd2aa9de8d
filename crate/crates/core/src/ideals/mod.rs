//! Prime ideals of the Gaussian integers `Z[i]` and their prime powers.
//!
//! Every ideal is stored through its normalized generator `a + ib` with
//! `a > 0, b >= 0`, so the Hecke angle `atan2(b, a)` lies in `[0, pi/2)`.
//! A rational prime `p` contributes
//!
//! * two conjugate ideals of norm `p` when `p ≡ 1 (mod 4)`,
//! * the ramified ideal `(1 + i)` of norm 2,
//! * one inert ideal `(p)` of norm `p^2` (angle 0) when `p ≡ 3 (mod 4)`.
//!
//! Outputs are sorted by `(norm, theta)`, which is also the summation order
//! used everywhere downstream.

pub mod cache;
pub mod modular;
pub mod sieve;

use std::cmp::Ordering;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::numeric::{from_i64, from_u64, isqrt, Real};

pub use modular::{cornacchia, is_prime, sqrt_mod};
pub use sieve::{primes_in_range, sieve_rational_primes};

/// How a rational prime decomposes in `Z[i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    Split,
    Ramified,
    Inert,
}

impl Splitting {
    pub fn of(p: u64) -> Self {
        match p % 4 {
            1 => Splitting::Split,
            2 => Splitting::Ramified,
            _ => Splitting::Inert,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Splitting::Split => "split",
            Splitting::Ramified => "ramified",
            Splitting::Inert => "inert",
        }
    }
}

impl fmt::Display for Splitting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Splitting {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "split" => Ok(Splitting::Split),
            "ramified" => Ok(Splitting::Ramified),
            "inert" => Ok(Splitting::Inert),
            other => Err(format!("unknown splitting type {other:?}")),
        }
    }
}

/// Rotates `a + ib` by a power of `i` into the associate with `a > 0, b >= 0`.
///
/// Panics on zero.
pub fn normalize_associate(a: i64, b: i64) -> (i64, i64) {
    assert!(a != 0 || b != 0, "zero has no associate class");
    let (mut a, mut b) = (a, b);
    // multiplication by -i maps (a, b) to (b, -a)
    while !(a > 0 && b >= 0) {
        (a, b) = (b, -a);
    }
    (a, b)
}

/// Product of two Gaussian integers.
pub fn gaussian_mul((a, b): (i64, i64), (c, d): (i64, i64)) -> (i64, i64) {
    (a * c - b * d, a * d + b * c)
}

/// Angle of a normalized generator, in `[0, pi/2)`.
pub fn hecke_angle<T: Real>(a: i64, b: i64) -> T {
    let (a, b) = normalize_associate(a, b);
    from_i64::<T>(b).atan2(from_i64::<T>(a))
}

/// A prime ideal of `Z[i]` with its normalized generator and Hecke angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPrimeIdeal<T> {
    pub p: u64,
    pub a: i64,
    pub b: i64,
    pub norm: u64,
    pub splitting: Splitting,
    pub theta: T,
}

impl<T: Real> GaussianPrimeIdeal<T> {
    fn from_generator(p: u64, a: i64, b: i64, splitting: Splitting) -> Self {
        let (a, b) = normalize_associate(a, b);
        Self { p, a, b, norm: (a * a + b * b) as u64, splitting, theta: from_i64::<T>(b).atan2(from_i64::<T>(a)) }
    }

    /// The ideals above the rational prime `p` (two, one or one).
    pub fn above(p: u64) -> Vec<Self> {
        match Splitting::of(p) {
            Splitting::Ramified => vec![Self::from_generator(2, 1, 1, Splitting::Ramified)],
            Splitting::Inert => vec![Self::from_generator(p, p as i64, 0, Splitting::Inert)],
            Splitting::Split => {
                let (x, y) = cornacchia(p).expect("split prime decomposes");
                let (x, y) = (x as i64, y as i64);
                let mut pair =
                    [Self::from_generator(p, x, y, Splitting::Split), Self::from_generator(p, y, x, Splitting::Split)];
                pair.sort_by(|u, v| u.theta.partial_cmp(&v.theta).unwrap_or(Ordering::Equal));
                pair.to_vec()
            }
        }
    }

    pub fn is_split(&self) -> bool {
        self.splitting == Splitting::Split
    }
}

/// A prime-power ideal `p^r`, the summand of the von Mangoldt weighted sums.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaEntry<T> {
    pub base: GaussianPrimeIdeal<T>,
    pub r: u32,
    pub norm: u64,
    /// Angle of the normalized generator of `p^r`, in `[0, pi/2)`.
    pub theta: T,
    /// `log N(p)` of the base prime ideal.
    pub weight: T,
}

impl<T: Real> LambdaEntry<T> {
    fn power(base: GaussianPrimeIdeal<T>, r: u32) -> Self {
        let mut g = (1i64, 0i64);
        for _ in 0..r {
            g = gaussian_mul(g, (base.a, base.b));
        }
        let (a, b) = normalize_associate(g.0, g.1);
        Self {
            base,
            r,
            norm: base.norm.pow(r),
            theta: from_i64::<T>(b).atan2(from_i64::<T>(a)),
            weight: from_u64::<T>(base.norm).ln(),
        }
    }
}

fn by_norm_then_angle<T: Real>(n1: u64, t1: T, n2: u64, t2: T) -> Ordering {
    n1.cmp(&n2).then(t1.partial_cmp(&t2).unwrap_or(Ordering::Equal))
}

/// Ideals of norm in `(norm_min, norm_max]` within one block, unsorted.
fn ideals_in_block<T: Real>(norm_min: u64, norm_max: u64) -> Vec<GaussianPrimeIdeal<T>> {
    let mut out = Vec::new();
    for p in primes_in_range(norm_min, norm_max) {
        if Splitting::of(p) != Splitting::Inert {
            out.extend(GaussianPrimeIdeal::above(p));
        }
    }
    // inert ideals have norm p^2
    for p in primes_in_range(isqrt(norm_min), isqrt(norm_max)) {
        if Splitting::of(p) == Splitting::Inert {
            out.extend(GaussianPrimeIdeal::above(p));
        }
    }
    out
}

const BLOCK: u64 = 1 << 18;

/// Prime ideals of `Z[i]` with norm in `(norm_min, norm_max]`, sorted by `(norm, theta)`.
pub fn enumerate_prime_ideals<T: Real>(norm_min: u64, norm_max: u64) -> Vec<GaussianPrimeIdeal<T>> {
    if norm_max <= norm_min {
        return Vec::new();
    }
    let blocks: Vec<(u64, u64)> = (0..)
        .map(|i| norm_min + i * BLOCK)
        .take_while(|&lo| lo < norm_max)
        .map(|lo| (lo, (lo + BLOCK).min(norm_max)))
        .collect();
    let mut out: Vec<GaussianPrimeIdeal<T>> =
        blocks.par_iter().map(|&(lo, hi)| ideals_in_block(lo, hi)).collect::<Vec<_>>().into_iter().flatten().collect();
    out.sort_by(|x, y| by_norm_then_angle(x.norm, x.theta, y.norm, y.theta));
    out
}

/// All prime-power ideals `p^r` (`r >= 1`) with norm in `(norm_min, norm_max]`,
/// sorted by `(norm, theta)`.
pub fn lambda_entries<T: Real>(norm_min: u64, norm_max: u64) -> Vec<LambdaEntry<T>> {
    if norm_max <= norm_min {
        return Vec::new();
    }
    let mut out: Vec<LambdaEntry<T>> =
        enumerate_prime_ideals::<T>(norm_min, norm_max).into_iter().map(|base| LambdaEntry::power(base, 1)).collect();
    // bases of higher powers have norm <= sqrt(norm_max)
    for base in enumerate_prime_ideals::<T>(0, isqrt(norm_max)) {
        let mut r = 2u32;
        while let Some(n) = base.norm.checked_pow(r) {
            if n > norm_max {
                break;
            }
            if n > norm_min {
                out.push(LambdaEntry::power(base, r));
            }
            r += 1;
        }
    }
    out.sort_by(|x, y| by_norm_then_angle(x.norm, x.theta, y.norm, y.theta));
    out
}
