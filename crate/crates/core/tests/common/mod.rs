//! Brute-force reference implementations shared by the integration tests.

#![allow(dead_code)]

use std::collections::BTreeSet;

/// Trial-division primality, independent of the library sieve.
pub fn is_prime_naive(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Prime ideals of `Z[i]` with norm in `(lo, hi]` as `(norm, a, b)`, found by
/// scanning the lattice `a > 0, b >= 0` and keeping the Gaussian primes.
///
/// `a + bi` is a Gaussian prime iff its norm is a rational prime, or `b = 0`
/// and `a` is a rational prime `≡ 3 (mod 4)`. Each ideal has exactly one
/// generator in the quadrant `a > 0, b >= 0`.
pub fn brute_force_ideals(lo: u64, hi: u64) -> BTreeSet<(u64, i64, i64)> {
    let mut out = BTreeSet::new();
    let side = (hi as f64).sqrt() as i64 + 1;
    for a in 1..=side {
        for b in 0..=side {
            let n = (a * a + b * b) as u64;
            if n <= lo || n > hi {
                continue;
            }
            let prime = is_prime_naive(n) || (b == 0 && a % 4 == 3 && is_prime_naive(a as u64));
            if prime {
                out.insert((n, a, b));
            }
        }
    }
    out
}

/// `p = a^2 + b^2` with `a` odd, `b` even, both positive, by scanning `b`.
pub fn brute_force_two_squares(p: u64) -> Option<(u64, u64)> {
    let mut b = 2;
    while b * b < p {
        let rest = p - b * b;
        let a = (rest as f64).sqrt().round() as u64;
        for a in a.saturating_sub(1)..=a + 1 {
            if a * a == rest && a % 2 == 1 {
                return Some((a, b));
            }
        }
        b += 2;
    }
    None
}
