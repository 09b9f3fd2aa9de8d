//! The smoothed angular count
//! `psi(theta) = sum_a Phi(N(a)/X) Lambda(a) F_K(theta_a - theta)`,
//! its Fourier spectrum `c_k S_k`, and its number variance computed both on a
//! uniform grid and by Parseval over the spectrum.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hecke::{character_table, norm_range, weigh_entries, WeightedAngle};
use crate::ideals::{lambda_entries, LambdaEntry};
use crate::numeric::{from_u64, lit, CompensatedSum, Real};
use crate::window::{PeriodizedWindow, SmoothWindow, WindowDescriptor};

/// Which ideals enter `psi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// All prime powers, weight `Lambda`.
    #[default]
    Powers,
    /// Prime ideals only, weight `log N`.
    Primes,
}

/// Largest spectrum length accepted before giving up on the tail certificate.
pub const MAX_K: usize = 10_000_000;

/// Smallest `k_max` with `|hat(k/K)| <= floor * |hat(0)|` for all `k >= k_max`.
pub fn truncation_order<T: Real>(f: &SmoothWindow<T>, k: T) -> Result<usize> {
    let limit = from_u64::<T>(MAX_K as u64) / k;
    let xi = f.tail_cutoff(lit(T::TAIL_FLOOR), limit)?;
    let k_max = (xi * k).ceil().to_usize().unwrap_or(usize::MAX);
    if k_max > MAX_K {
        return Err(Error::TruncationFailure { limit: MAX_K as u64 });
    }
    Ok(k_max.max(1))
}

/// `psi` for fixed `(K, X, f, Phi)`, with the contributing angles sorted for fast evaluation.
#[derive(Debug, Clone)]
pub struct SmoothedCount<T: Real> {
    window: PeriodizedWindow<T>,
    x: T,
    phi: WindowDescriptor,
    variant: Variant,
    /// Weighted angles in `(norm, theta)` order, for the character sums.
    points: Vec<WeightedAngle<T>>,
    /// `(theta/(pi/2), weight)` sorted by angle, for pointwise evaluation.
    sorted: Vec<(T, T)>,
}

impl<T: Real> SmoothedCount<T> {
    pub fn new(k: T, x: T, f: &SmoothWindow<T>, phi: &SmoothWindow<T>, variant: Variant) -> Result<Self> {
        Self::with_filter(k, x, f, phi, variant, |e| variant == Variant::Powers || e.r == 1)
    }

    /// `psi - psi^prime`: the prime powers with `r >= 2` alone.
    pub fn higher_powers(k: T, x: T, f: &SmoothWindow<T>, phi: &SmoothWindow<T>) -> Result<Self> {
        Self::with_filter(k, x, f, phi, Variant::Powers, |e| e.r >= 2)
    }

    fn with_filter(
        k: T,
        x: T,
        f: &SmoothWindow<T>,
        phi: &SmoothWindow<T>,
        variant: Variant,
        keep: impl Fn(&LambdaEntry<T>) -> bool,
    ) -> Result<Self> {
        if !(x >= lit(2.0)) {
            return Err(Error::BadInput(format!("X = {x} must be at least 2")));
        }
        if phi.support().0 < T::zero() {
            return Err(Error::BadInput("norm window must be supported in (0, inf)".into()));
        }
        let window = PeriodizedWindow::new(f.clone(), k)?;
        let (lo, hi) = norm_range(x, phi);
        let entries: Vec<LambdaEntry<T>> = lambda_entries::<T>(lo, hi).into_iter().filter(keep).collect();
        let points = weigh_entries(x, phi, &entries);
        let mut sorted: Vec<(T, T)> = points.iter().map(|p| (p.theta / T::FRAC_PI_2(), p.weight)).collect();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        Ok(Self { window, x, phi: phi.descriptor(), variant, points, sorted })
    }

    pub fn scale(&self) -> T {
        self.window.scale()
    }

    pub fn x(&self) -> T {
        self.x
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn f(&self) -> &SmoothWindow<T> {
        self.window.base()
    }

    pub fn phi_descriptor(&self) -> &WindowDescriptor {
        &self.phi
    }

    pub fn points(&self) -> &[WeightedAngle<T>] {
        &self.points
    }

    /// `psi` at `theta = u (pi/2)`.
    pub fn eval_normalized(&self, u: T) -> T {
        let u = u - u.floor();
        let (lo, hi) = self.f().support();
        let k = self.scale();
        let mut acc = CompensatedSum::new();
        let mut add = |range: &[(T, T)]| {
            for &(ua, w) in range {
                acc.add(w * self.window.eval_normalized(ua - u));
            }
        };
        if (hi - lo) / k >= T::one() {
            add(&self.sorted);
        } else {
            // F_K(u_a - u) != 0 needs u_a in (u + lo/K, u + hi/K) mod 1
            let s = u + lo / k;
            let s = s - s.floor();
            let e = s + (hi - lo) / k;
            let first = self.sorted.partition_point(|p| p.0 < s);
            let last = self.sorted.partition_point(|p| p.0 <= e.min(T::one()));
            add(&self.sorted[first..last]);
            if e > T::one() {
                let wrap = self.sorted.partition_point(|p| p.0 <= e - T::one());
                add(&self.sorted[..wrap.min(first)]);
            }
        }
        acc.value()
    }

    pub fn eval(&self, theta: T) -> T {
        self.eval_normalized(theta / T::FRAC_PI_2())
    }

    /// `psi(j (pi/2)/G)` for `j = 0..G`.
    pub fn sample_grid(&self, grid_size: usize) -> Vec<T> {
        let g = from_u64::<T>(grid_size as u64);
        (0..grid_size).into_par_iter().map(|j| self.eval_normalized(from_u64::<T>(j as u64) / g)).collect()
    }

    pub fn spectrum(&self) -> Result<PsiSpectrum<T>> {
        self.spectrum_to(truncation_order(self.f(), self.scale())?)
    }

    /// Spectrum truncated at a given order, certified against the tail.
    pub fn spectrum_to(&self, k_max: usize) -> Result<PsiSpectrum<T>> {
        let k = self.scale();
        let xis: Vec<T> = (0..=k_max).map(|j| from_u64::<T>(j as u64) / k).collect();
        let c: Vec<Complex<T>> = self.f().fourier_hat_many(&xis)?.into_iter().map(|z| z / k).collect();
        let s = character_table(&self.points, k_max);
        let coeffs: Vec<Complex<T>> = c.iter().zip(&s).map(|(a, b)| a * b).collect();
        let tail = c[k_max].norm() * s[0].re.abs();
        let head = coeffs[0].norm();
        let tail_ratio = if head > T::zero() { tail / head } else { T::zero() };
        if tail_ratio > lit::<T>(100.0 * T::TAIL_FLOOR) {
            return Err(Error::TruncationFailure { limit: k_max as u64 });
        }
        Ok(PsiSpectrum {
            k,
            x: self.x,
            k_max,
            coeffs,
            f: self.f().descriptor(),
            phi: self.phi.clone(),
            variant: self.variant,
            tail_ratio,
        })
    }
}

/// `psi(theta)` evaluated directly.
pub fn psi_eval<T: Real>(
    theta: T,
    k: T,
    x: T,
    f: &SmoothWindow<T>,
    phi: &SmoothWindow<T>,
    variant: Variant,
) -> Result<T> {
    Ok(SmoothedCount::new(k, x, f, phi, variant)?.eval(theta))
}

/// `(X/K) ∫f ∫Phi`.
pub fn mean_formula<T: Real>(k: T, x: T, f: &SmoothWindow<T>, phi: &SmoothWindow<T>) -> Result<T> {
    Ok(x / k * f.integral()? * phi.integral()?)
}

/// Fourier data of `psi = sum_k coeffs(k) e^{-4ik theta}`, `coeffs(-k) = conj(coeffs(k))`.
#[derive(Debug, Clone)]
pub struct PsiSpectrum<T> {
    pub k: T,
    pub x: T,
    pub k_max: usize,
    /// `c_k S_k` for `0 <= k <= k_max`.
    pub coeffs: Vec<Complex<T>>,
    pub f: WindowDescriptor,
    pub phi: WindowDescriptor,
    pub variant: Variant,
    /// `|c_{k_max}| S_0 / |coeffs(0)|`.
    pub tail_ratio: T,
}

impl<T: Real> PsiSpectrum<T> {
    pub fn mean(&self) -> T {
        self.coeffs[0].re
    }

    /// The truncated series at `theta`; the imaginary part is rounding noise.
    pub fn synthesize(&self, theta: T) -> Complex<T> {
        let mut re = CompensatedSum::new();
        let mut im = CompensatedSum::new();
        re.add(self.coeffs[0].re);
        im.add(self.coeffs[0].im);
        for (k, a) in self.coeffs.iter().enumerate().skip(1) {
            let (s, c) = (lit::<T>(4.0) * from_u64::<T>(k as u64) * theta).sin_cos();
            let minus = a * Complex::new(c, -s);
            let plus = a.conj() * Complex::new(c, s);
            re.add(minus.re);
            re.add(plus.re);
            im.add(minus.im);
            im.add(plus.im);
        }
        Complex::new(re.value(), im.value())
    }
}

/// `2 sum_{k=1}^{k_max} |coeffs(k)|^2`.
pub fn variance_parseval<T: Real>(spectrum: &PsiSpectrum<T>) -> T {
    let two = lit::<T>(2.0);
    spectrum
        .coeffs
        .iter()
        .skip(1)
        .map(|a| two * a.norm_sqr())
        .fold(CompensatedSum::new(), |mut s, v| {
            s.add(v);
            s
        })
        .value()
}

/// Mean and variance of uniform samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMoments<T> {
    pub mean: T,
    pub variance: T,
}

pub fn grid_moments<T: Real>(values: &[T]) -> GridMoments<T> {
    let n = from_u64::<T>(values.len().max(1) as u64);
    let mean = values.iter().copied().collect::<CompensatedSum<T>>().value() / n;
    let variance = values.iter().map(|&v| (v - mean) * (v - mean)).collect::<CompensatedSum<T>>().value() / n;
    GridMoments { mean, variance }
}

fn check_grid(grid_size: usize, k_max: usize) -> Result<()> {
    let required = 4 * k_max;
    if grid_size < required {
        return Err(Error::AliasingRisk { grid: grid_size, required });
    }
    Ok(())
}

/// Grid variance about the grid mean; the grid must have at least `4 k_max` points.
pub fn variance_direct<T: Real>(count: &SmoothedCount<T>, grid_size: usize) -> Result<GridMoments<T>> {
    check_grid(grid_size, truncation_order(count.f(), count.scale())?)?;
    Ok(grid_moments(&count.sample_grid(grid_size)))
}

/// Knobs for [`variance_sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Grid points per spectral mode, at least 4.
    pub grid_factor: usize,
    pub variant: Variant,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { grid_factor: 4, variant: Variant::Powers }
    }
}

/// One `(X, K = X^tau)` cell of a variance sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceReport {
    pub x: f64,
    pub k: f64,
    pub tau: f64,
    pub variant: Variant,
    pub mean_empirical: f64,
    pub mean_formula: f64,
    pub mean_spectral: f64,
    pub var_direct: f64,
    pub var_parseval: f64,
    /// `var_direct / mean_empirical^2`.
    pub ratio: f64,
    /// Grid mean square of `psi - psi^prime`.
    pub prime_power_gap: f64,
    pub grid_size: usize,
    pub k_max: usize,
    pub tail_ratio: f64,
    pub f: WindowDescriptor,
    pub phi: WindowDescriptor,
    pub method_direct: String,
    pub method_parseval: String,
}

impl VarianceReport {
    pub fn gap_ratio(&self) -> f64 {
        self.prime_power_gap / (self.mean_empirical * self.mean_empirical)
    }

    pub fn mean_gap(&self) -> f64 {
        (self.mean_empirical - self.mean_formula).abs() / self.mean_formula
    }

    pub fn parseval_mismatch(&self) -> f64 {
        (self.var_direct - self.var_parseval).abs() / self.var_direct
    }
}

fn f64_of<T: Real>(v: T) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Full report for one `(K, X)`.
pub fn variance_cell<T: Real>(
    k: T,
    x: T,
    f: &SmoothWindow<T>,
    phi: &SmoothWindow<T>,
    opts: SweepOptions,
) -> Result<VarianceReport> {
    if opts.grid_factor < 4 {
        return Err(Error::BadInput(format!("grid factor {} is below 4", opts.grid_factor)));
    }
    let count = SmoothedCount::new(k, x, f, phi, opts.variant)?;
    let spectrum = count.spectrum()?;
    let grid_size = opts.grid_factor * spectrum.k_max;
    check_grid(grid_size, spectrum.k_max)?;
    let moments = grid_moments(&count.sample_grid(grid_size));
    let var_parseval = variance_parseval(&spectrum);
    let gap = match opts.variant {
        Variant::Powers => {
            let extra = SmoothedCount::higher_powers(k, x, f, phi)?.sample_grid(grid_size);
            extra.iter().map(|&v| v * v).collect::<CompensatedSum<T>>().value() / from_u64::<T>(grid_size as u64)
        }
        Variant::Primes => T::zero(),
    };
    let mean = f64_of(moments.mean);
    let var = f64_of(moments.variance);
    Ok(VarianceReport {
        x: f64_of(x),
        k: f64_of(k),
        tau: f64_of(k.ln() / x.ln()),
        variant: opts.variant,
        mean_empirical: mean,
        mean_formula: f64_of(mean_formula(k, x, f, phi)?),
        mean_spectral: f64_of(spectrum.mean()),
        var_direct: var,
        var_parseval: f64_of(var_parseval),
        ratio: var / (mean * mean),
        prime_power_gap: f64_of(gap),
        grid_size,
        k_max: spectrum.k_max,
        tail_ratio: f64_of(spectrum.tail_ratio),
        f: f.descriptor(),
        phi: phi.descriptor(),
        method_direct: "uniform-grid".into(),
        method_parseval: "character-table".into(),
    })
}

/// Reports for every `(tau, X)` with `K = X^tau`, ordered by `tau` then `X`.
pub fn variance_sweep<T: Real>(
    taus: &[T],
    xs: &[T],
    f: &SmoothWindow<T>,
    phi: &SmoothWindow<T>,
    opts: SweepOptions,
) -> Result<Vec<VarianceReport>> {
    if let Some(t) = taus.iter().find(|t| !(**t >= T::zero() && **t < T::one())) {
        return Err(Error::BadInput(format!("tau = {t} outside [0, 1)")));
    }
    if xs.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::BadInput("X values must be strictly ascending".into()));
    }
    let mut out = Vec::with_capacity(taus.len() * xs.len());
    for &tau in taus {
        for &x in xs {
            out.push(variance_cell(x.powf(tau), x, f, phi, opts)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn windows() -> (SmoothWindow<f64>, SmoothWindow<f64>) {
        (SmoothWindow::mollifier(), SmoothWindow::norm_plus(0.05).unwrap())
    }

    #[test]
    fn eval_matches_direct_sum() {
        let (f, phi) = windows();
        let (k, x) = (5.0, 50.0);
        let fk = PeriodizedWindow::new(f.clone(), k).unwrap();
        let entries = lambda_entries::<f64>(0, 200);
        for theta in [0.0, 0.3, 1.2, 1.55] {
            let direct: f64 =
                entries.iter().map(|e| phi.eval(e.norm as f64 / x) * e.weight * fk.eval(e.theta - theta)).sum();
            let got = psi_eval(theta, k, x, &f, &phi, Variant::Powers).unwrap();
            assert!((got - direct).abs() < 1e-12 * direct.max(1.0), "{theta}: {got} vs {direct}");
        }
    }

    #[test]
    fn narrow_window_gather_matches_full_scan() {
        let (f, phi) = windows();
        let count = SmoothedCount::new(40.0, 3000.0, &f, &phi, Variant::Powers).unwrap();
        let wide = SmoothedCount::new(1.0, 3000.0, &f, &phi, Variant::Powers).unwrap();
        let fk = PeriodizedWindow::new(f.clone(), 40.0).unwrap();
        for u in [0.0, 0.001, 0.37, 0.99, 0.9999] {
            let full: f64 = count.points().iter().map(|p| p.weight * fk.eval_normalized(p.theta / FRAC_PI_2 - u)).sum();
            assert!((count.eval_normalized(u) - full).abs() < 1e-10 * full.max(1.0));
        }
        assert!(wide.eval(0.2) > 0.0);
    }

    #[test]
    fn zero_window_gives_zero() {
        let zero = SmoothWindow::custom(-1.0, 1.0, |_| 0.0).unwrap();
        let (_, phi) = windows();
        for theta in [0.0, 0.7] {
            assert_eq!(psi_eval(theta, 3.0, 100.0, &zero, &phi, Variant::Powers), Ok(0.0));
        }
        let count = SmoothedCount::new(3.0, 100.0, &zero, &phi, Variant::Powers).unwrap();
        assert_eq!(grid_moments(&count.sample_grid(64)).variance, 0.0);
    }

    #[test]
    fn powers_dominate_primes() {
        let (f, phi) = windows();
        let all = SmoothedCount::new(6.0, 400.0, &f, &phi, Variant::Powers).unwrap();
        let primes = SmoothedCount::new(6.0, 400.0, &f, &phi, Variant::Primes).unwrap();
        for j in 0..50 {
            let u = j as f64 / 50.0;
            assert!(all.eval_normalized(u) >= primes.eval_normalized(u));
        }
    }

    #[test]
    fn mean_formula_scales_inversely_with_k() {
        let (f, phi) = windows();
        let a = mean_formula(4.0, 1e4, &f, &phi).unwrap();
        let b = mean_formula(8.0, 1e4, &f, &phi).unwrap();
        assert!((a - 2.0 * b).abs() < 1e-12 * a);
        let i_f = f.integral().unwrap();
        let i_phi = phi.integral().unwrap();
        assert!((a - 1e4 / 4.0 * i_f * i_phi).abs() < 1e-12 * a);
    }

    #[test]
    fn spectrum_synthesis_and_parseval_agree_with_grid() {
        let (f, phi) = windows();
        let count = SmoothedCount::new(8.0, 1e4, &f, &phi, Variant::Powers).unwrap();
        let spectrum = count.spectrum().unwrap();
        assert!(spectrum.tail_ratio < 1e-12);
        let grid = 4 * spectrum.k_max;
        let m = grid_moments(&count.sample_grid(grid));
        assert!((m.mean - spectrum.mean()).abs() < 1e-10 * m.mean);
        for theta in [0.0, 0.1, 0.77, 1.5] {
            let z = spectrum.synthesize(theta);
            let direct = count.eval(theta);
            assert!((z.re - direct).abs() < 1e-8 * m.mean);
            assert!(z.im.abs() < 1e-10 * m.mean);
        }
        let p = variance_parseval(&spectrum);
        assert!((m.variance - p).abs() < 1e-6 * m.variance);
        let finer = grid_moments(&count.sample_grid(2 * grid));
        assert!((finer.variance - m.variance).abs() < 1e-9 * m.variance);
    }

    #[test]
    fn parseval_of_simple_spectra() {
        let mut spectrum: PsiSpectrum<f64> = PsiSpectrum {
            k: 1.0,
            x: 2.0,
            k_max: 0,
            coeffs: vec![Complex::new(3.0, 0.0)],
            f: SmoothWindow::<f64>::mollifier().descriptor(),
            phi: SmoothWindow::<f64>::mollifier().descriptor(),
            variant: Variant::Powers,
            tail_ratio: 0.0,
        };
        assert_eq!(variance_parseval(&spectrum), 0.0);
        spectrum.coeffs.push(Complex::new(0.5, -1.5));
        spectrum.k_max = 1;
        assert!((variance_parseval(&spectrum) - 2.0 * 2.5).abs() < 1e-15);
    }

    #[test]
    fn direct_variance_rejects_coarse_grid() {
        let (f, phi) = windows();
        let count = SmoothedCount::new(8.0, 1e3, &f, &phi, Variant::Powers).unwrap();
        assert!(matches!(variance_direct(&count, 64), Err(Error::AliasingRisk { .. })));
        let k_max = truncation_order(&f, 8.0).unwrap();
        assert!(variance_direct(&count, 4 * k_max).unwrap().variance > 0.0);
    }

    #[test]
    fn sweep_cell_fields_are_consistent() {
        let (f, phi) = windows();
        let r = variance_sweep(&[0.0, 0.3], &[2000.0], &f, &phi, SweepOptions::default()).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(r[0].k, 1.0);
        assert!(r[0].ratio < 1e-3, "{}", r[0].ratio);
        for c in &r {
            assert!(c.var_direct >= 0.0 && c.var_parseval >= 0.0);
            assert!(c.parseval_mismatch() < 1e-6);
            assert!(c.prime_power_gap > 0.0);
            assert_eq!(c.grid_size, 4 * c.k_max);
        }
        assert!(variance_sweep(&[1.2], &[2000.0], &f, &phi, SweepOptions::default()).is_err());
        assert!(variance_sweep(&[0.2], &[2000.0, 1000.0], &f, &phi, SweepOptions::default()).is_err());
    }
}
