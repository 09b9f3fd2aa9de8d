//! Unsmoothed sector counts over prime ideals, their expected values,
//! almost-all scans, forbidden regions and star discrepancy.
//!
//! Sectors are half-open `(beta, beta + gamma]` taken modulo `pi/2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ideals::{enumerate_prime_ideals, GaussianPrimeIdeal};
use crate::numeric::{adaptive_simpson, from_u64, lit, Real, MAX_INTERVALS};

/// How the expected count of a sector is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ExpectedMode {
    /// `gamma/(pi/2)` times the number of ideals in the range.
    #[default]
    Empirical,
    /// `gamma/(pi/2)` times `int dt / log t` over the range.
    Pit,
}

fn check_gamma<T: Real>(gamma: T) -> Result<()> {
    if !(gamma > T::zero() && gamma <= T::FRAC_PI_2()) {
        return Err(Error::BadSector(gamma.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(())
}

/// Sorted angles of the prime ideals in a norm range, for repeated sector queries.
#[derive(Debug, Clone)]
pub struct SectorIndex<T> {
    norm_min: u64,
    norm_max: u64,
    theta: Vec<T>,
    /// `prefix[i]` is the total `log N` weight of the first `i` angles.
    prefix: Vec<T>,
}

impl<T: Real> SectorIndex<T> {
    /// Indexes the prime ideals with norm in `(norm_min, norm_max]`; with
    /// `include_nonsplit = false` the ramified and inert ideals are dropped.
    pub fn new(norm_min: u64, norm_max: u64, include_nonsplit: bool) -> Self {
        let ideals = enumerate_prime_ideals::<T>(norm_min, norm_max);
        Self::from_ideals(norm_min, norm_max, &ideals, include_nonsplit)
    }

    pub fn from_ideals(norm_min: u64, norm_max: u64, ideals: &[GaussianPrimeIdeal<T>], include_nonsplit: bool) -> Self {
        let mut pairs: Vec<(T, T)> = ideals
            .iter()
            .filter(|p| include_nonsplit || p.is_split())
            .map(|p| (p.theta, from_u64::<T>(p.norm).ln()))
            .collect();
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut prefix = Vec::with_capacity(pairs.len() + 1);
        let mut acc = T::zero();
        prefix.push(acc);
        for &(_, w) in &pairs {
            acc = acc + w;
            prefix.push(acc);
        }
        Self { norm_min, norm_max, theta: pairs.into_iter().map(|p| p.0).collect(), prefix }
    }

    pub fn norm_range(&self) -> (u64, u64) {
        (self.norm_min, self.norm_max)
    }

    pub fn total(&self) -> usize {
        self.theta.len()
    }

    pub fn angles(&self) -> &[T] {
        &self.theta
    }

    /// Number of angles `<= t`.
    fn at_most(&self, t: T) -> usize {
        self.theta.partition_point(|&x| x <= t)
    }

    /// Index ranges covering `(beta, beta + gamma]` mod `pi/2`.
    fn ranges(&self, beta: T, gamma: T) -> Result<[(usize, usize); 2]> {
        check_gamma(gamma)?;
        if !(beta >= T::zero() && beta < T::FRAC_PI_2()) {
            return Err(Error::BadInput(format!("sector start {beta} outside [0, pi/2)")));
        }
        let end = beta + gamma;
        let start = self.at_most(beta);
        Ok(if end < T::FRAC_PI_2() {
            [(start, self.at_most(end)), (0, 0)]
        } else {
            [(start, self.total()), (0, self.at_most(end - T::FRAC_PI_2()))]
        })
    }

    pub fn count(&self, beta: T, gamma: T) -> Result<usize> {
        Ok(self.ranges(beta, gamma)?.iter().map(|(a, b)| b - a).sum())
    }

    /// `sum log N` over the sector.
    pub fn weighted_count(&self, beta: T, gamma: T) -> Result<T> {
        Ok(self.ranges(beta, gamma)?.iter().fold(T::zero(), |acc, &(a, b)| acc + (self.prefix[b] - self.prefix[a])))
    }

    pub fn expected(&self, gamma: T, mode: ExpectedMode) -> Result<T> {
        check_gamma(gamma)?;
        let share = gamma / T::FRAC_PI_2();
        match mode {
            ExpectedMode::Empirical => Ok(share * from_u64::<T>(self.total() as u64)),
            ExpectedMode::Pit => Ok(share * log_integral(self.norm_min, self.norm_max)?),
        }
    }
}

/// `int_a^b dt / log t`.
pub fn log_integral<T: Real>(a: u64, b: u64) -> Result<T> {
    if a < 2 {
        return Err(Error::BadInput(format!("log integral needs a lower limit >= 2, got {a}")));
    }
    let (a, b) = (from_u64::<T>(a), from_u64::<T>(b));
    let tol = lit::<T>(T::QUAD_TOL) * (b - a).max(T::one());
    adaptive_simpson(|t: T| t.ln().recip(), a, b, tol, MAX_INTERVALS)
}

/// Prime ideals with norm in `(norm_min, norm_max]` and angle in `(beta, beta + gamma]` mod `pi/2`.
pub fn sector_count<T: Real>(beta: T, gamma: T, norm_min: u64, norm_max: u64) -> Result<usize> {
    SectorIndex::<T>::new(norm_min, norm_max, true).count(beta, gamma)
}

pub fn expected_count<T: Real>(gamma: T, norm_min: u64, norm_max: u64, mode: ExpectedMode) -> Result<T> {
    check_gamma(gamma)?;
    match mode {
        ExpectedMode::Empirical => SectorIndex::<T>::new(norm_min, norm_max, true).expected(gamma, mode),
        ExpectedMode::Pit => Ok(gamma / T::FRAC_PI_2() * log_integral(norm_min, norm_max)?),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub mode: ExpectedMode,
    pub include_nonsplit: bool,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { mode: ExpectedMode::Empirical, include_nonsplit: true }
    }
}

/// Sector counts of width `gamma = (pi/2) X^-rho` at every offset of a uniform grid over `(X, 2X]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorScanReport {
    pub x: f64,
    pub rho: f64,
    pub gamma: f64,
    pub grid_size: usize,
    pub norm_min: u64,
    pub norm_max: u64,
    pub total: usize,
    pub mode: ExpectedMode,
    pub include_nonsplit: bool,
    pub counts: Vec<usize>,
    pub expected: f64,
    pub deviations: Vec<f64>,
    /// `(delta, fraction of offsets with |deviation| > delta)`, in the order given.
    pub exceptional_fraction: Vec<(f64, f64)>,
}

impl SectorScanReport {
    pub fn beta(&self, j: usize) -> f64 {
        j as f64 * std::f64::consts::FRAC_PI_2 / self.grid_size as f64
    }

    pub fn fraction_at(&self, delta: f64) -> Option<f64> {
        self.exceptional_fraction.iter().find(|(d, _)| *d == delta).map(|(_, f)| *f)
    }
}

/// Scans `grid_size` offsets `beta_j = j (pi/2)/M`.
///
/// When `gamma` spans a whole number `m` of grid cells the sector ends are
/// snapped to the cell boundaries, so the counts of `M/m` consecutive
/// disjoint sectors add up to the total exactly.
pub fn sector_scan<T: Real>(
    x: T,
    rho: T,
    grid_size: usize,
    deltas: &[T],
    opts: ScanOptions,
) -> Result<SectorScanReport> {
    if !(rho >= T::zero() && rho < T::one()) {
        return Err(Error::BadInput(format!("rho = {rho} outside [0, 1)")));
    }
    if grid_size == 0 {
        return Err(Error::BadInput("grid size must be positive".into()));
    }
    if !(x >= lit(2.0)) {
        return Err(Error::BadInput(format!("X = {x} must be at least 2")));
    }
    let norm_min = x.floor().to_u64().unwrap_or(0);
    let norm_max = (x + x).floor().to_u64().unwrap_or(0);
    let index = SectorIndex::<T>::new(norm_min, norm_max, opts.include_nonsplit);
    let gamma = T::FRAC_PI_2() * x.powf(-rho);
    let m_f = gamma / T::FRAC_PI_2() * from_u64::<T>(grid_size as u64);
    let m = m_f.round();
    let aligned = m >= T::one() && (m_f - m).abs() <= lit::<T>(1e-9) * m;

    let cell = T::FRAC_PI_2() / from_u64::<T>(grid_size as u64);
    let counts: Vec<usize> = if aligned {
        let m = m.to_usize().unwrap_or(0);
        let total = index.total();
        let pos: Vec<usize> = (0..grid_size).map(|i| index.at_most(from_u64::<T>(i as u64) * cell)).collect();
        let cum = |i: usize| (i / grid_size) * total + pos[i % grid_size];
        (0..grid_size).map(|j| cum(j + m) - cum(j)).collect()
    } else {
        (0..grid_size).map(|j| index.count(from_u64::<T>(j as u64) * cell, gamma)).collect::<Result<_>>()?
    };

    let expected = index.expected(gamma, opts.mode)?.to_f64().unwrap_or(f64::NAN);
    let deviations: Vec<f64> = counts.iter().map(|&c| (c as f64 - expected) / expected).collect();
    let exceptional_fraction = deltas
        .iter()
        .map(|d| {
            let d = d.to_f64().unwrap_or(f64::NAN);
            let n = deviations.iter().filter(|v| v.abs() > d).count();
            (d, n as f64 / grid_size as f64)
        })
        .collect();
    Ok(SectorScanReport {
        x: x.to_f64().unwrap_or(f64::NAN),
        rho: rho.to_f64().unwrap_or(f64::NAN),
        gamma: gamma.to_f64().unwrap_or(f64::NAN),
        grid_size,
        norm_min,
        norm_max,
        total: index.total(),
        mode: opts.mode,
        include_nonsplit: opts.include_nonsplit,
        counts,
        expected,
        deviations,
        exceptional_fraction,
    })
}

/// Smallest positive angle among ideals of norm `<= norm_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForbiddenRegion {
    pub norm_max: u64,
    pub min_angle: f64,
    pub a: i64,
    pub b: i64,
    pub norm: u64,
    /// `1 / (2 sqrt(norm_max))`.
    pub bound: f64,
    pub holds: bool,
}

pub fn forbidden_region_check<T: Real>(norm_max: u64) -> Result<ForbiddenRegion> {
    if norm_max < 2 {
        return Err(Error::BadInput(format!("norm_max = {norm_max} must be at least 2")));
    }
    let best = enumerate_prime_ideals::<T>(0, norm_max)
        .into_iter()
        .filter(|p| p.theta > T::zero())
        .min_by(|u, v| u.theta.partial_cmp(&v.theta).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or(Error::EmptyRange(0, norm_max))?;
    let bound = lit::<T>(0.5) / from_u64::<T>(norm_max).sqrt();
    Ok(ForbiddenRegion {
        norm_max,
        min_angle: best.theta.to_f64().unwrap_or(f64::NAN),
        a: best.a,
        b: best.b,
        norm: best.norm,
        bound: bound.to_f64().unwrap_or(f64::NAN),
        holds: best.theta > bound,
    })
}

/// Star discrepancy of points in `[0, 1)`; sorts a copy.
pub fn star_discrepancy<T: Real>(points: &[T]) -> Option<T> {
    if points.is_empty() {
        return None;
    }
    let mut xs = points.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = from_u64::<T>(xs.len() as u64);
    let d = xs.iter().enumerate().fold(T::zero(), |d, (i, &x)| {
        let i = from_u64::<T>(i as u64);
        d.max((i + T::one()) / n - x).max(x - i / n)
    });
    Some(d)
}

/// Star discrepancy of `theta/(pi/2)` over the prime ideals with norm in `(norm_min, norm_max]`.
pub fn discrepancy<T: Real>(norm_min: u64, norm_max: u64) -> Result<T> {
    let u: Vec<T> = enumerate_prime_ideals::<T>(norm_min, norm_max).iter().map(|p| p.theta / T::FRAC_PI_2()).collect();
    star_discrepancy(&u).ok_or(Error::EmptyRange(norm_min, norm_max))
}
