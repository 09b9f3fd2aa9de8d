//! Modular square roots and the Cornacchia decomposition `p = a^2 + b^2`.

use crate::error::{Error, Result};
use crate::numeric::isqrt;

#[inline]
fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &q in &BASES {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Square root of `n` modulo an odd prime `p` (Tonelli–Shanks).
///
/// Returns the smaller of the two roots `r <= p - r`.
pub fn sqrt_mod(n: i64, p: u64) -> Result<u64> {
    if p < 3 || p.is_multiple_of(2) {
        return Err(Error::BadInput(format!("modulus {p} is not an odd prime")));
    }
    let a = n.rem_euclid(p as i64) as u64;
    if a == 0 {
        return Err(Error::BadInput(format!("{n} is not coprime to {p}")));
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return Err(Error::NonResidue { n, p });
    }
    let r = if p % 4 == 3 {
        pow_mod(a, (p + 1) / 4, p)
    } else {
        let mut q = p - 1;
        let mut s = 0u32;
        while q.is_multiple_of(2) {
            q /= 2;
            s += 1;
        }
        let mut z = 2u64;
        while pow_mod(z, (p - 1) / 2, p) != p - 1 {
            z += 1;
        }
        let mut m = s;
        let mut c = pow_mod(z, q, p);
        let mut t = pow_mod(a, q, p);
        let mut r = pow_mod(a, q.div_ceil(2), p);
        while t != 1 {
            let mut i = 0u32;
            let mut tt = t;
            while tt != 1 {
                tt = mul_mod(tt, tt, p);
                i += 1;
            }
            let b = pow_mod(c, 1u64 << (m - i - 1), p);
            m = i;
            c = mul_mod(b, b, p);
            t = mul_mod(t, c, p);
            r = mul_mod(r, b, p);
        }
        r
    };
    Ok(r.min(p - r))
}

/// Writes a prime `p ≡ 1 (mod 4)` as `a^2 + b^2` with `a` odd and `b` even, both positive.
pub fn cornacchia(p: u64) -> Result<(u64, u64)> {
    if p % 4 != 1 {
        return Err(Error::BadInput(format!("{p} is not 1 mod 4")));
    }
    let root = sqrt_mod(-1, p)?;
    let bound = isqrt(p);
    let (mut r0, mut r1) = (p, root);
    while r1 > bound {
        (r0, r1) = (r1, r0 % r1);
    }
    let a = r1;
    let rest = p - a * a;
    let b = isqrt(rest);
    if b * b != rest {
        return Err(Error::BadInput(format!("{p} is not prime")));
    }
    Ok(if a % 2 == 1 { (a, b) } else { (b, a) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_mod_examples() {
        assert_eq!(sqrt_mod(-1, 5), Ok(2));
        assert_eq!(sqrt_mod(2, 7), Ok(3));
        assert_eq!(sqrt_mod(2, 5), Err(Error::NonResidue { n: 2, p: 5 }));
        assert!(matches!(sqrt_mod(7, 7), Err(Error::BadInput(_))));
        assert!(matches!(sqrt_mod(3, 8), Err(Error::BadInput(_))));
    }

    #[test]
    fn sqrt_mod_exhaustive_small_primes() {
        for p in [3u64, 5, 7, 11, 13, 17, 41, 73, 97, 257, 65537, 1_000_003] {
            for n in 1..200i64 {
                if (n as u64).is_multiple_of(p) {
                    continue;
                }
                match sqrt_mod(n, p) {
                    Ok(r) => {
                        assert_eq!(mul_mod(r, r, p), n as u64 % p, "n={n} p={p}");
                        assert!(r <= p - r);
                    }
                    Err(Error::NonResidue { .. }) => {
                        assert!((1..p.min(5000)).all(|x| mul_mod(x, x, p) != n as u64 % p) || p > 5000);
                    }
                    Err(e) => panic!("{e}"),
                }
            }
        }
    }

    #[test]
    fn primality_matches_sieve() {
        let primes = crate::ideals::sieve::sieve_rational_primes(20_000);
        let flagged: Vec<u64> = (0..=20_000).filter(|&n| is_prime(n)).collect();
        assert_eq!(flagged, primes);
        assert!(is_prime(1_000_000_007) && !is_prime(3_215_031_751) && is_prime(u64::MAX - 58));
    }

    #[test]
    fn cornacchia_examples() {
        assert_eq!(cornacchia(5), Ok((1, 2)));
        assert_eq!(cornacchia(13), Ok((3, 2)));
        assert_eq!(cornacchia(17), Ok((1, 4)));
        assert!(matches!(cornacchia(7), Err(Error::BadInput(_))));
        assert!(matches!(cornacchia(2), Err(Error::BadInput(_))));
    }
}
