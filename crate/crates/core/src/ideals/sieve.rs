//! Segmented sieve of Eratosthenes over half-open ranges `(lo, hi]`.

use crate::numeric::isqrt;

const SEGMENT: u64 = 1 << 16;

/// Primes `<= limit` by a plain (unsegmented) sieve; used for the base primes.
fn small_primes(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// All primes `p` with `lo < p <= hi`, ascending.
pub fn primes_in_range(lo: u64, hi: u64) -> Vec<u64> {
    if hi < 2 || hi <= lo {
        return Vec::new();
    }
    let base = small_primes(isqrt(hi));
    let start = lo.max(1) + 1;
    let mut out = Vec::new();
    let mut seg_lo = start;
    let mut marks = vec![false; SEGMENT as usize];
    while seg_lo <= hi {
        let seg_hi = (seg_lo + SEGMENT - 1).min(hi);
        let len = (seg_hi - seg_lo + 1) as usize;
        marks[..len].fill(false);
        for &p in &base {
            if p * p > seg_hi {
                break;
            }
            let first = (p * p).max(seg_lo.div_ceil(p) * p);
            let mut m = first;
            while m <= seg_hi {
                marks[(m - seg_lo) as usize] = true;
                m += p;
            }
        }
        for (i, &c) in marks[..len].iter().enumerate() {
            let n = seg_lo + i as u64;
            if !c && n >= 2 {
                out.push(n);
            }
        }
        seg_lo = seg_hi + 1;
    }
    out
}

/// Rational primes `<= limit`, ascending.
pub fn sieve_rational_primes(limit: u64) -> Vec<u64> {
    primes_in_range(0, limit)
}
