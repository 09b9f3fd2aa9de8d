//! Hecke characters `Xi_k(a) = (alpha/conj(alpha))^{2k} = e^{4 i k theta_a}` and
//! the smoothed, von Mangoldt weighted character sums
//! `S_k = sum_a Phi(N(a)/X) Lambda(a) Xi_k(a)`.

use std::io::Write;

use num_complex::Complex;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ideals::{enumerate_prime_ideals, lambda_entries, normalize_associate, LambdaEntry};
use crate::numeric::{from_i64, from_u64, lit, CompensatedSum, Real};
use crate::report::fmt_float;
use crate::window::SmoothWindow;

/// `Xi_k` at the ideal generated by `a + ib`; invariant under units.
pub fn xi<T: Real>(a: i64, b: i64, k: i64) -> Result<Complex<T>> {
    if a == 0 && b == 0 {
        return Err(Error::BadInput("the zero ideal has no Hecke character value".into()));
    }
    let (a, b) = normalize_associate(a, b);
    let theta = from_i64::<T>(b).atan2(from_i64::<T>(a));
    Ok(cis(lit::<T>(4.0) * from_i64::<T>(k) * theta))
}

#[inline]
fn cis<T: Real>(phase: T) -> Complex<T> {
    let (s, c) = phase.sin_cos();
    Complex::new(c, s)
}

/// An angle carrying the weight it enters a smoothed sum with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedAngle<T> {
    pub theta: T,
    pub weight: T,
}

/// Integer norm range `(lo, hi]` containing every `N` with `Phi(N/X) != 0`.
pub fn norm_range<T: Real>(x: T, phi: &SmoothWindow<T>) -> (u64, u64) {
    let (lo, hi) = phi.support();
    let lo = (x * lo).floor().max(T::zero()).to_u64().unwrap_or(0);
    let hi = (x * hi).ceil().to_u64().unwrap_or(u64::MAX);
    (lo, hi)
}

fn check_scale<T: Real>(x: T, phi: &SmoothWindow<T>) -> Result<()> {
    if !(x >= lit(2.0)) {
        return Err(Error::BadInput(format!("X = {x} must be at least 2")));
    }
    if phi.support().0 < T::zero() {
        return Err(Error::BadInput("norm window must be supported in (0, inf)".into()));
    }
    Ok(())
}

/// `Phi(N/X) * Lambda` for each entry, dropping zero weights; order is kept.
pub fn weigh_entries<T: Real>(x: T, phi: &SmoothWindow<T>, entries: &[LambdaEntry<T>]) -> Vec<WeightedAngle<T>> {
    entries
        .iter()
        .filter_map(|e| {
            let w = phi.eval(from_u64::<T>(e.norm) / x) * e.weight;
            (w != T::zero()).then_some(WeightedAngle { theta: e.theta, weight: w })
        })
        .collect()
}

/// `sum w e^{4 i k theta}` in the given order, compensated.
pub fn sum_character<T: Real>(points: &[WeightedAngle<T>], k: i64) -> Complex<T> {
    let four_k = lit::<T>(4.0) * from_i64::<T>(k);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for p in points {
        let z = cis(four_k * p.theta) * p.weight;
        re.add(z.re);
        im.add(z.im);
    }
    Complex::new(re.value(), im.value())
}

const TABLE_BLOCK: usize = 64;
const FLUSH: usize = 32;
const LANES: usize = 8;

#[inline(always)]
fn lane_sum<T: Real>(z: &[Complex<T>; LANES], part: impl Fn(&Complex<T>) -> T) -> T {
    let mut acc = [T::zero(); 4];
    for (i, c) in z.iter().enumerate() {
        acc[i % 4] = acc[i % 4] + part(c);
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

/// `sum w e^{4 i k theta}` for `k = 0..=k_max`.
///
/// Each block of consecutive `k` starts from an exactly evaluated phase and
/// advances by rotation, so the phase error stays within ~64 ulp. Points are
/// summed plainly in chunks of 32 whose partials feed a compensated sum, in
/// the given order, so each `S_k` is independent of how blocks are scheduled.
pub fn character_table<T: Real>(points: &[WeightedAngle<T>], k_max: usize) -> Vec<Complex<T>> {
    let steps: Vec<Complex<T>> = points.iter().map(|p| cis(lit::<T>(4.0) * p.theta)).collect();
    let blocks: Vec<usize> = (0..=k_max).step_by(TABLE_BLOCK).collect();
    blocks
        .par_iter()
        .map(|&k0| {
            let len = TABLE_BLOCK.min(k_max + 1 - k0);
            let mut re = vec![CompensatedSum::<T>::new(); len];
            let mut im = vec![CompensatedSum::<T>::new(); len];
            let four_k0 = lit::<T>(4.0) * from_u64::<T>(k0 as u64);
            let mut part_re = vec![T::zero(); len];
            let mut part_im = vec![T::zero(); len];
            for (chunk, chunk_steps) in points.chunks(FLUSH).zip(steps.chunks(FLUSH)) {
                // Independent rotations per pass hide the multiply latency.
                let mut quads = chunk.chunks_exact(LANES).zip(chunk_steps.chunks_exact(LANES));
                for (ps, st) in &mut quads {
                    let mut z: [Complex<T>; LANES] = std::array::from_fn(|i| cis(four_k0 * ps[i].theta) * ps[i].weight);
                    for j in 0..len {
                        part_re[j] = part_re[j] + lane_sum(&z, |c| c.re);
                        part_im[j] = part_im[j] + lane_sum(&z, |c| c.im);
                        for i in 0..LANES {
                            z[i] = z[i] * st[i];
                        }
                    }
                }
                let rest = chunk.len() - chunk.len() % LANES;
                for (p, step) in chunk[rest..].iter().zip(&chunk_steps[rest..]) {
                    let mut z = cis(four_k0 * p.theta) * p.weight;
                    for j in 0..len {
                        part_re[j] = part_re[j] + z.re;
                        part_im[j] = part_im[j] + z.im;
                        z = z * step;
                    }
                }
                for j in 0..len {
                    re[j].add(part_re[j]);
                    im[j].add(part_im[j]);
                    part_re[j] = T::zero();
                    part_im[j] = T::zero();
                }
            }
            re.iter().zip(&im).map(|(r, i)| Complex::new(r.value(), i.value())).collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// `S_k = sum_a Phi(N(a)/X) Lambda(a) Xi_k(a)` over prime powers.
pub fn character_sum<T: Real>(k: i64, x: T, phi: &SmoothWindow<T>) -> Result<Complex<T>> {
    check_scale(x, phi)?;
    let (lo, hi) = norm_range(x, phi);
    let points = weigh_entries(x, phi, &lambda_entries::<T>(lo, hi));
    Ok(sum_character(&points, k))
}

/// Unweighted Weyl sum `sum_p e^{4 i k theta_p}` over prime ideals with norm in `(norm_min, norm_max]`.
pub fn weyl_sum<T: Real>(k: i64, norm_min: u64, norm_max: u64) -> Result<Complex<T>> {
    if k == 0 {
        return Err(Error::BadInput("k = 0 gives the ideal count, not a Weyl sum".into()));
    }
    let points: Vec<WeightedAngle<T>> = enumerate_prime_ideals::<T>(norm_min, norm_max)
        .into_iter()
        .map(|p| WeightedAngle { theta: p.theta, weight: T::one() })
        .collect();
    Ok(sum_character(&points, k))
}

/// `S_k` for `0 <= k <= k_max`; negative `k` by conjugation.
#[derive(Debug, Clone)]
pub struct CharacterSumTable<T> {
    pub x: T,
    pub k_max: usize,
    pub values: Vec<Complex<T>>,
    pub window_id: String,
}

impl<T: Real> CharacterSumTable<T> {
    pub fn compute(x: T, phi: &SmoothWindow<T>, k_max: usize) -> Result<Self> {
        check_scale(x, phi)?;
        let (lo, hi) = norm_range(x, phi);
        let points = weigh_entries(x, phi, &lambda_entries::<T>(lo, hi));
        Ok(Self::from_points(x, phi, &points, k_max))
    }

    pub fn from_points(x: T, phi: &SmoothWindow<T>, points: &[WeightedAngle<T>], k_max: usize) -> Self {
        Self { x, k_max, values: character_table(points, k_max), window_id: phi.id() }
    }

    /// `S_k` for any `|k| <= k_max`.
    pub fn get(&self, k: i64) -> Option<Complex<T>> {
        let v = *self.values.get(k.unsigned_abs() as usize)?;
        Some(if k < 0 { v.conj() } else { v })
    }

    /// CSV with a `#` header carrying X, the window id and k_max.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        let f = |v: T| fmt_float(v.to_f64().unwrap_or(f64::NAN));
        writeln!(out, "# X={} window_id={} k_max={}", f(self.x), self.window_id, self.k_max)?;
        writeln!(out, "k,re,im")?;
        for (k, v) in self.values.iter().enumerate() {
            writeln!(out, "{k},{},{}", f(v.re), f(v.im))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideals::gaussian_mul;

    #[test]
    fn xi_examples() {
        for k in -5..=5i64 {
            let v: Complex<f64> = xi(1, 1, k).unwrap();
            let expect = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((v.re - expect).abs() < 1e-15 && v.im.abs() < 1e-14);
        }
        assert_eq!(xi::<f64>(3, 7, 0).unwrap(), Complex::new(1.0, 0.0));
        assert_eq!(xi::<f64>(1, 2, 1).unwrap(), xi::<f64>(-2, 1, 1).unwrap());
        assert!(xi::<f64>(0, 0, 1).is_err());
    }

    #[test]
    fn xi_is_multiplicative() {
        let pairs = [((2, 1), (3, 2)), ((1, 4), (5, 2)), ((7, 2), (1, 1)), ((3, 0), (2, 5))];
        for (u, v) in pairs {
            let w = gaussian_mul(u, v);
            for k in [1i64, 2, 5, 17] {
                let lhs: Complex<f64> = xi(w.0, w.1, k).unwrap();
                let rhs = xi::<f64>(u.0, u.1, k).unwrap() * xi::<f64>(v.0, v.1, k).unwrap();
                assert!((lhs - rhs).norm() < 8.0 * f64::EPSILON * (k as f64).max(1.0) * 4.0);
            }
        }
    }

    #[test]
    fn weyl_sum_first_block() {
        let w: Complex<f64> = weyl_sum(1, 1, 10).unwrap();
        let t1 = 0.5f64.atan();
        let t2 = 2f64.atan();
        let expect = Complex::new(-1.0, 0.0)
            + Complex::from_polar(1.0, 4.0 * t1)
            + Complex::from_polar(1.0, 4.0 * t2)
            + Complex::new(1.0, 0.0);
        assert!((w - expect).norm() < 1e-14);
        let neg: Complex<f64> = weyl_sum(-1, 1, 10).unwrap();
        assert!((neg - w.conj()).norm() < 1e-14);
        assert!(weyl_sum::<f64>(0, 1, 10).is_err());
    }

    #[test]
    fn character_sum_matches_direct_enumeration() {
        let phi = SmoothWindow::<f64>::norm_plus(0.05).unwrap();
        let x = 50.0;
        let entries = lambda_entries::<f64>(0, 120);
        for k in [0i64, 1, 2, 3, -2] {
            let mut direct = Complex::new(0.0, 0.0);
            for e in &entries {
                let w = phi.eval(e.norm as f64 / x) * e.weight;
                direct += Complex::from_polar(w, 4.0 * k as f64 * e.theta);
            }
            let s = character_sum(k, x, &phi).unwrap();
            assert!((s - direct).norm() < 1e-12 * direct.norm().max(1.0), "k={k}");
        }
        let s0 = character_sum(0, x, &phi).unwrap();
        assert!(s0.im == 0.0 && s0.re > 0.0);
        let s3 = character_sum(3, x, &phi).unwrap();
        assert!(s3.norm() <= s0.re);
        assert!((character_sum(-3, x, &phi).unwrap() - s3.conj()).norm() < 1e-13);
    }

    #[test]
    fn table_agrees_with_direct_sums() {
        let phi = SmoothWindow::<f64>::norm_plus(0.05).unwrap();
        let t = CharacterSumTable::compute(2000.0, &phi, 300).unwrap();
        for k in [0i64, 1, 63, 64, 65, 200, 300] {
            let direct = character_sum(k, 2000.0, &phi).unwrap();
            let tab = t.get(k).unwrap();
            assert!((tab - direct).norm() < 1e-11 * t.values[0].re, "k = {k}");
            assert_eq!(t.get(-k).unwrap(), tab.conj());
        }
        assert!(t.get(301).is_none());
    }

    #[test]
    fn conjugate_closed_sums_are_real() {
        let phi = SmoothWindow::<f64>::norm_plus(0.05).unwrap();
        let t = CharacterSumTable::compute(5000.0, &phi, 50).unwrap();
        for v in &t.values {
            assert!(v.im.abs() < 1e-10 * t.values[0].re);
        }
    }

    #[test]
    fn rejects_small_scale() {
        let phi = SmoothWindow::<f64>::norm_plus(0.05).unwrap();
        assert!(character_sum(1, 1.0, &phi).is_err());
    }

    #[test]
    fn csv_header_carries_metadata() {
        let phi = SmoothWindow::<f64>::norm_plus(0.05).unwrap();
        let t = CharacterSumTable::compute(100.0, &phi, 3).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let header = lines.next().unwrap();
        assert!(header.contains(&phi.id()) && header.contains("k_max=3"));
        assert_eq!(lines.next(), Some("k,re,im"));
        assert_eq!(lines.count(), 4);
    }
}
