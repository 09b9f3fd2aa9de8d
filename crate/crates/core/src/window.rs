//! Compactly supported test functions and their Fourier data.
//!
//! * the mollifier `exp(-1/(1 - x^2))` on `(-1, 1)` (affinely moved to any support),
//! * plateau windows: 1 on a core interval, a smooth monotone ramp of width
//!   `eps` on each side, 0 outside,
//! * caller supplied windows,
//! * the `pi/2`-periodization `F_K(theta) = sum_j f(K/(pi/2) (theta - j pi/2))`.
//!
//! Fourier convention: `hat(xi) = ∫ w(u) e^{-2 pi i u xi} du`, so the
//! coefficient of `e^{4 i k theta}` in `F_K` is `hat(k/K) / K`.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::numeric::{adaptive_simpson, from_u64, lit, CompensatedSum, Real, MAX_INTERVALS};

/// Cells in the cached ramp table.
pub const RAMP_CELLS: usize = 4096;

/// The standard bump `exp(-1/(1 - s^2))` on `(-1, 1)`.
#[inline]
pub fn bump<T: Real>(s: T) -> T {
    let one = T::one();
    if s.abs() >= one {
        return T::zero();
    }
    (-(one / ((one - s) * (one + s)))).exp()
}

/// Mollifier value `exp(-1/(1-x^2))` for `|x| < 1`, else 0.
pub fn mollifier_eval<T: Real>(x: T) -> T {
    bump(x)
}

/// Normalized integral of the bump: a smooth monotone ramp from 0 at `t <= 0`
/// to 1 at `t >= 1`, tabulated with exact slopes and read back by cubic
/// Hermite interpolation.
#[derive(Debug, Clone)]
pub struct RampTable<T> {
    values: Vec<T>,
    slopes: Vec<T>,
}

impl<T: Real> RampTable<T> {
    pub fn build() -> Self {
        let n = RAMP_CELLS;
        let half = n / 2;
        let width = lit::<T>(2.0) / from_u64::<T>(n as u64);
        let x = |i: usize| -T::one() + width * from_u64::<T>(i as u64);
        let tol = T::epsilon() * width * lit(1e-2);
        // the bump is even: integrate the left half and mirror
        let cells: Vec<T> = (0..half)
            .map(|i| adaptive_simpson(bump::<T>, x(i), x(i + 1), tol, 1 << 12).expect("bump cell quadrature"))
            .collect();
        let mut prefix = Vec::with_capacity(half + 1);
        let mut acc = CompensatedSum::new();
        prefix.push(T::zero());
        for c in &cells {
            acc.add(*c);
            prefix.push(acc.value());
        }
        let total = lit::<T>(2.0) * prefix[half];
        let mut values = vec![T::zero(); n + 1];
        for i in 0..=half {
            values[i] = prefix[i] / total;
            values[n - i] = T::one() - values[i];
        }
        values[half] = lit(0.5);
        // d/dt of int_{-1}^{2t-1} bump = 2 bump(2t - 1)
        let slopes = (0..=n).map(|i| lit::<T>(2.0) * bump(x(i)) / total).collect();
        Self { values, slopes }
    }

    pub fn eval(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        if t >= T::one() {
            return T::one();
        }
        let n = from_u64::<T>(RAMP_CELLS as u64);
        let pos = t * n;
        let i = pos.floor().to_usize().unwrap_or(0).min(RAMP_CELLS - 1);
        let s = pos - from_u64::<T>(i as u64);
        let h = T::one() / n;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.slopes[i] * h, self.slopes[i + 1] * h);
        let two = lit::<T>(2.0);
        let three = lit::<T>(3.0);
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = two * s3 - three * s2 + T::one();
        let h10 = s3 - two * s2 + s;
        let h01 = three * s2 - two * s3;
        let h11 = s3 - s2;
        (h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1).max(T::zero()).min(T::one())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowKind {
    Mollifier,
    PlateauPlus,
    PlateauMinus,
    Custom,
}

/// Serializable description of a window; `id()` is stable across runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDescriptor {
    pub kind: WindowKind,
    pub lo: f64,
    pub hi: f64,
    pub eps: f64,
    pub quad_tol: f64,
}

impl WindowDescriptor {
    /// First 16 hex digits of the SHA-256 of the canonical JSON form.
    pub fn id(&self) -> String {
        let json = serde_json::to_string(self).expect("descriptor serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Rebuilds the window. Custom windows carry code and cannot be rebuilt.
    pub fn build<T: Real>(&self) -> Result<SmoothWindow<T>> {
        let w = match self.kind {
            WindowKind::Mollifier => SmoothWindow::mollifier_on(lit(self.lo), lit(self.hi))?,
            WindowKind::PlateauPlus => {
                SmoothWindow::plateau_plus(lit(self.lo + self.eps), lit(self.hi - self.eps), lit(self.eps))?
            }
            WindowKind::PlateauMinus => SmoothWindow::plateau_minus(lit(self.lo), lit(self.hi), lit(self.eps))?,
            WindowKind::Custom => {
                return Err(Error::BadInput("custom windows cannot be rebuilt from a descriptor".into()))
            }
        };
        Ok(w.with_quad_tol(lit(self.quad_tol)))
    }
}

type Evaluator<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// An even-or-not, compactly supported, real test function.
#[derive(Clone)]
pub struct SmoothWindow<T> {
    kind: WindowKind,
    lo: T,
    hi: T,
    eps: T,
    quad_tol: T,
    ramp: Option<Arc<RampTable<T>>>,
    custom: Option<Evaluator<T>>,
}

impl<T: Real> fmt::Debug for SmoothWindow<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothWindow")
            .field("kind", &self.kind)
            .field("lo", &self.lo)
            .field("hi", &self.hi)
            .field("eps", &self.eps)
            .field("quad_tol", &self.quad_tol)
            .finish()
    }
}

fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps > T::zero() && eps < lit(0.5) {
        Ok(())
    } else {
        Err(Error::BadEps(eps.to_f64().unwrap_or(f64::NAN)))
    }
}

impl<T: Real> SmoothWindow<T> {
    fn plain(kind: WindowKind, lo: T, hi: T, eps: T) -> Self {
        Self { kind, lo, hi, eps, quad_tol: lit(T::QUAD_TOL), ramp: None, custom: None }
    }

    /// `exp(-1/(1-x^2))` on `(-1, 1)`.
    pub fn mollifier() -> Self {
        Self::plain(WindowKind::Mollifier, -T::one(), T::one(), T::zero())
    }

    /// The mollifier moved affinely onto `(lo, hi)`.
    pub fn mollifier_on(lo: T, hi: T) -> Result<Self> {
        if !(lo < hi) {
            return Err(Error::BadInput(format!("empty support [{lo}, {hi}]")));
        }
        Ok(Self::plain(WindowKind::Mollifier, lo, hi, T::zero()))
    }

    /// 1 on `[core_lo, core_hi]`, ramps on `[core_lo - eps, core_lo]` and
    /// `[core_hi, core_hi + eps]`, 0 elsewhere.
    pub fn plateau_plus(core_lo: T, core_hi: T, eps: T) -> Result<Self> {
        check_eps(eps)?;
        if !(core_lo < core_hi) {
            return Err(Error::BadInput(format!("empty core [{core_lo}, {core_hi}]")));
        }
        let mut w = Self::plain(WindowKind::PlateauPlus, core_lo - eps, core_hi + eps, eps);
        w.ramp = Some(Arc::new(RampTable::build()));
        Ok(w)
    }

    /// Supported in `[lo, hi]`, equal to 1 on `[lo + eps, hi - eps]`.
    pub fn plateau_minus(lo: T, hi: T, eps: T) -> Result<Self> {
        check_eps(eps)?;
        if !(hi - lo > lit::<T>(2.0) * eps) {
            return Err(Error::BadInput(format!("support [{lo}, {hi}] too short for eps {eps}")));
        }
        let mut w = Self::plain(WindowKind::PlateauMinus, lo, hi, eps);
        w.ramp = Some(Arc::new(RampTable::build()));
        Ok(w)
    }

    /// `f_eps^+`: 1 on `[0, 1]`, supported in `[-eps, 1 + eps]`.
    pub fn unit_plus(eps: T) -> Result<Self> {
        Self::plateau_plus(T::zero(), T::one(), eps)
    }

    /// `f_eps^-`: 1 on `[eps, 1 - eps]`, supported in `[0, 1]`.
    pub fn unit_minus(eps: T) -> Result<Self> {
        Self::plateau_minus(T::zero(), T::one(), eps)
    }

    /// Norm window `Phi_eps^+`: 1 on `[1, 2]`, supported in `[1 - eps, 2 + eps]`.
    pub fn norm_plus(eps: T) -> Result<Self> {
        Self::plateau_plus(T::one(), lit(2.0), eps)
    }

    /// Norm window `Phi_eps^-`: 1 on `[1 + eps, 2 - eps]`, supported in `[1, 2]`.
    pub fn norm_minus(eps: T) -> Result<Self> {
        Self::plateau_minus(T::one(), lit(2.0), eps)
    }

    /// Wraps a caller supplied function; values outside `[lo, hi]` read as 0.
    pub fn custom<F>(lo: T, hi: T, f: F) -> Result<Self>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        if !(lo < hi) {
            return Err(Error::BadInput(format!("empty support [{lo}, {hi}]")));
        }
        let mut w = Self::plain(WindowKind::Custom, lo, hi, T::zero());
        w.custom = Some(Arc::new(f));
        Ok(w)
    }

    pub fn with_quad_tol(mut self, tol: T) -> Self {
        self.quad_tol = tol;
        self
    }

    pub fn kind(&self) -> WindowKind {
        self.kind
    }

    pub fn support(&self) -> (T, T) {
        (self.lo, self.hi)
    }

    pub fn eps(&self) -> T {
        self.eps
    }

    pub fn quad_tol(&self) -> T {
        self.quad_tol
    }

    pub fn descriptor(&self) -> WindowDescriptor {
        let f = |x: T| x.to_f64().unwrap_or(f64::NAN);
        WindowDescriptor {
            kind: self.kind,
            lo: f(self.lo),
            hi: f(self.hi),
            eps: f(self.eps),
            quad_tol: f(self.quad_tol),
        }
    }

    pub fn id(&self) -> String {
        self.descriptor().id()
    }

    #[inline]
    pub fn eval(&self, x: T) -> T {
        if !(x > self.lo && x < self.hi) {
            return match self.kind {
                WindowKind::Custom if x == self.lo || x == self.hi => (self.custom.as_ref().unwrap())(x),
                _ => T::zero(),
            };
        }
        match self.kind {
            WindowKind::Mollifier => {
                let two = lit::<T>(2.0);
                bump((two * x - self.lo - self.hi) / (self.hi - self.lo))
            }
            WindowKind::PlateauPlus | WindowKind::PlateauMinus => {
                let ramp = self.ramp.as_ref().expect("plateau windows carry a ramp");
                if x < self.lo + self.eps {
                    ramp.eval((x - self.lo) / self.eps)
                } else if x > self.hi - self.eps {
                    ramp.eval((self.hi - x) / self.eps)
                } else {
                    T::one()
                }
            }
            WindowKind::Custom => (self.custom.as_ref().unwrap())(x),
        }
    }

    /// `∫ w` by adaptive Simpson to `quad_tol`.
    pub fn integral(&self) -> Result<T> {
        match self.kind {
            WindowKind::PlateauPlus | WindowKind::PlateauMinus => {
                // flat core integrates exactly; only the ramps need quadrature
                let ramp = adaptive_simpson(
                    |x| self.eval(x),
                    self.lo,
                    self.lo + self.eps,
                    self.quad_tol / lit(2.0),
                    MAX_INTERVALS,
                )?;
                Ok(lit::<T>(2.0) * ramp + (self.hi - self.lo - lit::<T>(2.0) * self.eps))
            }
            _ => adaptive_simpson(|x| self.eval(x), self.lo, self.hi, self.quad_tol, MAX_INTERVALS),
        }
    }

    /// `∫ w^2` (used for heuristic variance scales in reports).
    pub fn integral_of_square(&self) -> Result<T> {
        adaptive_simpson(|x| self.eval(x).powi(2), self.lo, self.hi, self.quad_tol, MAX_INTERVALS)
    }

    fn initial_nodes(&self, xi: T) -> usize {
        let len = (self.hi - self.lo).to_f64().unwrap_or(1.0);
        let want = (4.0 * xi.abs().to_f64().unwrap_or(0.0) * len).ceil() as usize;
        want.max(64).next_power_of_two()
    }

    /// Node samples of the trapezoid rule with `n` panels, centered offsets.
    fn samples(&self, n: usize) -> (T, T, Vec<T>) {
        let two = lit::<T>(2.0);
        let center = (self.lo + self.hi) / two;
        let half = (self.hi - self.lo) / two;
        let h = (self.hi - self.lo) / from_u64::<T>(n as u64);
        let vals = (0..=n)
            .map(|j| {
                let v = -half + h * from_u64::<T>(j as u64);
                let w = self.eval(center + v);
                if j == 0 || j == n {
                    w / two
                } else {
                    w
                }
            })
            .collect();
        (center, h, vals)
    }

    /// Trapezoid sums with `n` and `n/2` panels from one set of samples.
    fn trapezoid_pair(center: T, h: T, vals: &[T], xi: T, exact_phase: bool) -> (Complex<T>, Complex<T>) {
        let n = vals.len() - 1;
        let tau = lit::<T>(2.0) * T::PI();
        let half = h * from_u64::<T>(n as u64) / lit(2.0);
        let phase_at = |j: usize| {
            let v = -half + h * from_u64::<T>(j as u64);
            let (s, c) = (-tau * v * xi).sin_cos();
            Complex::new(c, s)
        };
        let (s, c) = (-tau * h * xi).sin_cos();
        let step = Complex::new(c, s);
        let mut fine_re = CompensatedSum::new();
        let mut fine_im = CompensatedSum::new();
        let mut coarse_re = CompensatedSum::new();
        let mut coarse_im = CompensatedSum::new();
        let mut z = phase_at(0);
        for (j, &w) in vals.iter().enumerate() {
            // re-anchor the rotation regularly to keep the phase error at a few ulp
            if exact_phase || j % 16 == 0 {
                z = phase_at(j);
            }
            let term = z * w;
            fine_re.add(term.re);
            fine_im.add(term.im);
            if j % 2 == 0 {
                // panels of width 2h: endpoint samples already carry the 1/2
                let ct = z * (w + w);
                coarse_re.add(ct.re);
                coarse_im.add(ct.im);
            }
            z = z * step;
        }
        let (s, c) = (-tau * center * xi).sin_cos();
        let shift = Complex::new(c, s);
        let fine = Complex::new(fine_re.value(), fine_im.value()) * h * shift;
        let coarse = Complex::new(coarse_re.value(), coarse_im.value()) * h * shift;
        (fine, coarse)
    }

    /// `hat(xi) = ∫ w(u) e^{-2 pi i u xi} du`.
    ///
    /// Trapezoid rule with repeated panel halving until two successive levels
    /// agree to `quad_tol`; for windows vanishing smoothly at the ends the
    /// rule converges faster than any power of the step.
    pub fn fourier_hat(&self, xi: T) -> Result<Complex<T>> {
        let mut n = self.initial_nodes(xi);
        while n <= MAX_INTERVALS {
            let (center, h, vals) = self.samples(n);
            let (fine, coarse) = Self::trapezoid_pair(center, h, &vals, xi, true);
            if (fine - coarse).norm() <= self.quad_tol {
                return Ok(fine);
            }
            n *= 2;
        }
        Err(self.quadrature_failure())
    }

    /// `hat` at many frequencies from one shared sample set.
    pub fn fourier_hat_many(&self, xis: &[T]) -> Result<Vec<Complex<T>>> {
        let xi_max = xis.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let mut n = self.initial_nodes(xi_max);
        while n <= MAX_INTERVALS {
            let (center, h, vals) = self.samples(n);
            let out: Vec<(Complex<T>, bool)> = xis
                .par_iter()
                .map(|&xi| {
                    let (fine, coarse) = Self::trapezoid_pair(center, h, &vals, xi, false);
                    (fine, (fine - coarse).norm() <= self.quad_tol)
                })
                .collect();
            if out.iter().all(|(_, ok)| *ok) {
                return Ok(out.into_iter().map(|(v, _)| v).collect());
            }
            n *= 2;
        }
        Err(self.quadrature_failure())
    }

    fn quadrature_failure(&self) -> Error {
        Error::QuadratureFailure { tol: self.quad_tol.to_f64().unwrap_or(f64::NAN), max_intervals: MAX_INTERVALS }
    }

    /// Smallest frequency `xi*` (on a 1/16 grid) beyond which `|hat|` stays
    /// below `rel * |hat(0)|` over the whole octave `[xi*, 2 xi*]`, confirmed
    /// again at `4 xi*` and `8 xi*`.
    pub fn tail_cutoff(&self, rel: T, xi_limit: T) -> Result<T> {
        let step = lit::<T>(1.0 / 16.0);
        let h0 = self.fourier_hat(T::zero())?.norm();
        let thr = rel * h0;
        let fail = || Error::TruncationFailure {
            limit: (xi_limit.to_f64().unwrap_or(f64::INFINITY)).min(u64::MAX as f64) as u64,
        };
        let mut mags: Vec<T> = vec![h0];
        let mut span = 32usize;
        loop {
            if from_u64::<T>(span as u64) * step > xi_limit * lit(2.0) {
                return Err(fail());
            }
            let xis: Vec<T> = (mags.len()..=span).map(|i| from_u64::<T>(i as u64) * step).collect();
            mags.extend(self.fourier_hat_many(&xis)?.into_iter().map(|z| z.norm()));
            let mut j = 1usize;
            while 2 * j <= span {
                match (j..=2 * j).rev().find(|&i| mags[i] > thr) {
                    None => {
                        let xi = from_u64::<T>(j as u64) * step;
                        if xi > xi_limit {
                            return Err(fail());
                        }
                        let far = self.fourier_hat_many(&[xi * lit(4.0), xi * lit(8.0)])?;
                        if far.iter().any(|z| z.norm() > thr) {
                            return Err(fail());
                        }
                        return Ok(xi);
                    }
                    Some(i) => j = i + 1,
                }
            }
            span *= 2;
        }
    }
}

/// `F_K(theta) = sum_j f(K/(pi/2) (theta - j pi/2))`, period `pi/2`.
#[derive(Debug, Clone)]
pub struct PeriodizedWindow<T: Real> {
    base: SmoothWindow<T>,
    scale: T,
}

impl<T: Real> PeriodizedWindow<T> {
    pub fn new(base: SmoothWindow<T>, scale: T) -> Result<Self> {
        if !(scale >= T::one()) {
            return Err(Error::BadInput(format!("scale K = {scale} must be >= 1")));
        }
        Ok(Self { base, scale })
    }

    pub fn base(&self) -> &SmoothWindow<T> {
        &self.base
    }

    pub fn scale(&self) -> T {
        self.scale
    }

    /// Value at an angle given in units of the period (`u = theta/(pi/2)`).
    #[inline]
    pub fn eval_normalized(&self, u: T) -> T {
        let u = u - u.floor();
        let (lo, hi) = self.base.support();
        let k = self.scale;
        // f(K (u - j)) != 0 needs u - hi/K < j < u - lo/K
        let first = (u - hi / k).ceil().to_i64().unwrap_or(0);
        let last = (u - lo / k).floor().to_i64().unwrap_or(-1);
        let mut acc = T::zero();
        for j in first..=last {
            acc = acc + self.base.eval(k * (u - T::from_i64(j).unwrap()));
        }
        acc
    }

    pub fn eval(&self, theta: T) -> T {
        self.eval_normalized(theta / T::FRAC_PI_2())
    }

    /// Fourier coefficient of `e^{4 i k theta}`.
    pub fn coefficient(&self, k: i64) -> Result<Complex<T>> {
        fourier_coefficient(&self.base, self.scale, k)
    }
}

/// `c_k = hat(k/K) / K`, the coefficient of `e^{4 i k theta}` in `F_K`.
pub fn fourier_coefficient<T: Real>(base: &SmoothWindow<T>, scale: T, k: i64) -> Result<Complex<T>> {
    if !(scale >= T::one()) {
        return Err(Error::BadInput(format!("scale K = {scale} must be >= 1")));
    }
    let xi = T::from_i64(k).unwrap() / scale;
    Ok(base.fourier_hat(xi)? / scale)
}

/// Pointwise plateau evaluation; errors unless `w` is a plateau window.
pub fn plateau_eval<T: Real>(w: &SmoothWindow<T>, x: T) -> Result<T> {
    match w.kind() {
        WindowKind::PlateauPlus | WindowKind::PlateauMinus => Ok(w.eval(x)),
        other => Err(Error::BadInput(format!("{other:?} is not a plateau window"))),
    }
}

/// Convenience used by [`fourier_hat`] callers that only have a window reference.
pub fn fourier_hat<T: Real>(w: &SmoothWindow<T>, xi: T) -> Result<Complex<T>> {
    w.fourier_hat(xi)
}
