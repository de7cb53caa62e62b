//! Time-of-flight density synthesis and the contrast function `F(z)`.
//!
//! `F(z) = 1 + Σ_n A_n cos(B_n + 2π n z / D)` where `A_n e^{iB_n}` is the
//! normalized lag-`n` autocorrelation of the site phasors. Equivalently
//! `F(z) = |Σ_j α_j e^{iφ_j} e^{2πi j z/D}|² / Σ_j α_j²`.

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DensityProfile, Harmonic, HarmonicSpectrum, LatticeShot, PhysicalParams};
use crate::scalar::Real;
use crate::scales::HBAR;

/// Above this many sites the autocorrelation goes through an FFT.
const DIRECT_AUTOCORRELATION_LIMIT: usize = 512;

/// Minimum samples per period for each harmonic order present.
pub const SAMPLES_PER_ORDER: usize = 64;

/// Uniform sampling `z_min..=z_max` with `point_count` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec<T = f64> {
    pub z_min: T,
    pub z_max: T,
    pub point_count: usize,
}

impl<T: Real> GridSpec<T> {
    pub fn new(z_min: T, z_max: T, point_count: usize) -> Result<Self> {
        let g = Self { z_min, z_max, point_count };
        g.check()?;
        Ok(g)
    }

    /// Grid symmetric about zero.
    pub fn centered(half_width: T, point_count: usize) -> Result<Self> {
        Self::new(-half_width, half_width, point_count)
    }

    pub fn check(&self) -> Result<()> {
        if self.point_count < 2 {
            return Err(Error::InvalidGrid(format!("point_count {} < 2", self.point_count)));
        }
        if !(self.z_min.is_finite() && self.z_max.is_finite() && self.z_min < self.z_max) {
            return Err(Error::InvalidGrid("z_min must be below z_max".into()));
        }
        Ok(())
    }

    pub fn step(&self) -> T {
        (self.z_max - self.z_min) / T::from_usize_lossy(self.point_count - 1)
    }

    pub fn point(&self, i: usize) -> T {
        self.z_min + T::from_usize_lossy(i) * self.step()
    }

    pub fn points(&self) -> Vec<T> {
        let step = self.step();
        (0..self.point_count)
            .map(|i| self.z_min + T::from_usize_lossy(i) * step)
            .collect()
    }
}

/// Site positions `z_n = (n − (N+1)/2) d`, centred on the origin.
pub fn site_positions<T: Real>(site_count: usize, lattice_period: T) -> Vec<T> {
    let mid = T::from_usize_lossy(site_count + 1) * T::lit(0.5);
    (1..=site_count)
        .map(|n| (T::from_usize_lossy(n) - mid) * lattice_period)
        .collect()
}

/// Density after free expansion:
/// `I(z) = |Σ_n α_n e^{iφ_n} e^{−i m (z−z_n)²/(2ħt)} e^{−(z−z_n)²/Z₀²}|²`.
///
/// The propagator phase carries a minus sign so that in the far field
/// `I(z) ∝ Σα² e^{−2z²/Z₀²} F(z)` with `F` exactly as built by
/// [`harmonics_from_phases`]; the opposite sign gives `F(−z)`, i.e. the
/// same ensemble with conjugated phases.
///
/// No normalization is applied; interactions during expansion are ignored.
pub fn synthesize_density<T: Real>(
    shot: &LatticeShot<T>,
    params: &PhysicalParams<T>,
    grid: &GridSpec<T>,
) -> Result<DensityProfile<T>> {
    grid.check()?;
    params.check()?;
    let z_sites = site_positions(shot.site_count, params.lattice_period);
    let chirp = params.mass / (T::lit(2.0 * HBAR) * params.expansion_time);
    let z0 = params.expansion_width();
    let inv_z0_sq = T::one() / (z0 * z0);

    let sources: Vec<(Complex<T>, T)> = shot
        .amplitudes
        .iter()
        .zip(&shot.phases)
        .zip(&z_sites)
        .filter(|((a, _), _)| **a > T::zero())
        .map(|((&a, &phi), &zn)| (Complex::from_polar(a, phi), zn))
        .collect();

    let z_grid = grid.points();
    let values = z_grid
        .iter()
        .map(|&z| {
            let mut field = Complex::new(T::zero(), T::zero());
            for &(c, zn) in &sources {
                let u = z - zn;
                let u2 = u * u;
                let weight = (-u2 * inv_z0_sq).exp();
                field = field + c * Complex::from_polar(weight, -chirp * u2);
            }
            field.norm_sqr()
        })
        .collect();
    Ok(DensityProfile { z_grid, values, grid_step: grid.step() })
}

/// Site phasors `α_j e^{iφ_j}`.
pub(crate) fn phasors<T: Real>(amplitudes: &[T], phases: &[T]) -> Vec<Complex<T>> {
    amplitudes
        .iter()
        .zip(phases)
        .map(|(&a, &p)| Complex::from_polar(a, p))
        .collect()
}

/// Lag autocorrelation `r_n = Σ_j c_{j+n} c_j*` for `n = 0..len`.
pub(crate) fn autocorrelation<T: Real>(c: &[Complex<T>], planner: &mut FftPlanner<T>) -> Vec<Complex<T>> {
    let n = c.len();
    if n <= DIRECT_AUTOCORRELATION_LIMIT {
        return (0..n)
            .map(|lag| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for j in lag..n {
                    acc = acc + c[j] * c[j - lag].conj();
                }
                acc
            })
            .collect();
    }
    let len = (2 * n).next_power_of_two();
    let mut buf = vec![Complex::new(T::zero(), T::zero()); len];
    buf[..n].copy_from_slice(c);
    planner.plan_fft_forward(len).process(&mut buf);
    for x in buf.iter_mut() {
        *x = Complex::new(x.norm_sqr(), T::zero());
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = T::one() / T::from_usize_lossy(len);
    buf.truncate(n);
    buf.into_iter().map(|x| x * scale).collect()
}

/// Harmonic amplitudes and phases of `F(z)` for one shot.
///
/// `A_n e^{iB_n} = 2 Σ_j α_j α_{j−n} e^{i(φ_j − φ_{j−n})} / Σ_j α_j²`, which
/// is `(2/N) Σ_j e^{i(φ_j − φ_{j−n})}` when all amplitudes are equal.
pub fn harmonics_from_phases<T: Real>(shot: &LatticeShot<T>, period: T) -> Result<HarmonicSpectrum<T>> {
    let mut planner = FftPlanner::new();
    harmonics_from_phases_with(shot, period, &mut planner)
}

pub fn harmonics_from_phases_with<T: Real>(
    shot: &LatticeShot<T>,
    period: T,
    planner: &mut FftPlanner<T>,
) -> Result<HarmonicSpectrum<T>> {
    let c = phasors(&shot.amplitudes, &shot.phases);
    let norm: T = shot.amplitudes.iter().map(|&a| a * a).sum();
    if !(norm > T::zero()) {
        return Err(Error::Degenerate("all amplitudes are zero".into()));
    }
    let r = autocorrelation(&c, planner);
    let two = T::lit(2.0);
    let entries = r
        .iter()
        .enumerate()
        .skip(1)
        .map(|(order, s)| {
            let s = *s * (two / norm);
            Harmonic {
                order,
                amplitude: s.norm().min(two),
                phase: s.arg().wrap_phase(),
            }
        })
        .collect();
    HarmonicSpectrum::new(period, entries)
}

/// `F(z)` at one position.
pub fn f_value<T: Real>(spectrum: &HarmonicSpectrum<T>, z: T) -> T {
    let k = T::TAU() * z / spectrum.period;
    T::one()
        + spectrum
            .entries
            .iter()
            .map(|h| h.amplitude * (h.phase + T::from_usize_lossy(h.order) * k).cos())
            .sum::<T>()
}

/// `F(z)` sampled on a grid.
pub fn evaluate_f<T: Real>(spectrum: &HarmonicSpectrum<T>, grid: &GridSpec<T>) -> Vec<T> {
    grid.points().into_iter().map(|z| f_value(spectrum, z)).collect()
}

/// Grating function of a phase-coherent array,
/// `F(z) = sin²(Nπz/D) / (N sin²(πz/D))`, equal to `N` at `z = pD`.
pub fn coherent_f_value<T: Real>(n_sites: usize, z: T, period: T) -> T {
    let n = T::from_usize_lossy(n_sites);
    let x = z / period;
    let xr = x - x.round();
    let y = n * xr;
    let yr = y - y.round();
    let s_den = (T::PI() * xr).sin();
    if s_den.abs() < T::lit(1e-8) {
        let u = T::PI() * xr;
        return n * (T::one() - (n * n - T::one()) * u * u / T::lit(3.0));
    }
    let s_num = (T::PI() * yr).sin();
    s_num * s_num / (n * s_den * s_den)
}

pub fn coherent_f<T: Real>(n_sites: usize, grid: &GridSpec<T>, period: T) -> Vec<T> {
    grid.points()
        .into_iter()
        .map(|z| coherent_f_value(n_sites, z, period))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema<T = f64> {
    pub max: T,
    pub min: T,
    pub z_at_max: T,
    pub z_at_min: T,
}

/// Dense coefficients `b_n = A_n e^{iB_n}`, index = order.
struct DensePoly<T> {
    coeffs: Vec<Complex<T>>,
    period: T,
}

impl<T: Real> DensePoly<T> {
    fn new(spectrum: &HarmonicSpectrum<T>) -> Self {
        let mut coeffs = vec![Complex::new(T::zero(), T::zero()); spectrum.max_order() + 1];
        for h in &spectrum.entries {
            coeffs[h.order] = Complex::from_polar(h.amplitude, h.phase);
        }
        Self { coeffs, period: spectrum.period }
    }

    /// `1 + Re Σ b_n w^n` by Horner's rule, `w = e^{2πiz/D}`.
    fn eval(&self, z: T) -> T {
        let w = Complex::from_polar(T::one(), T::TAU() * z / self.period);
        let mut acc = Complex::new(T::zero(), T::zero());
        for &b in self.coeffs.iter().rev() {
            acc = acc * w + b;
        }
        T::one() + acc.re
    }
}

/// Single-shot maximum and minimum of `F` over one period.
///
/// Samples `samples_per_period` points (at least 64 per harmonic order
/// present) with one inverse FFT, then polishes the best few samples by
/// golden-section search to a position tolerance of 1e-8 D.
pub fn f_extrema<T: Real>(spectrum: &HarmonicSpectrum<T>, samples_per_period: usize) -> Result<Extrema<T>> {
    let mut planner = FftPlanner::new();
    f_extrema_with(spectrum, samples_per_period, &mut planner)
}

pub fn f_extrema_with<T: Real>(
    spectrum: &HarmonicSpectrum<T>,
    samples_per_period: usize,
    planner: &mut FftPlanner<T>,
) -> Result<Extrema<T>> {
    let needed = SAMPLES_PER_ORDER * (spectrum.max_order() + 1);
    if samples_per_period < needed {
        return Err(Error::Undersampled(format!(
            "{samples_per_period} samples per period, need at least {needed}"
        )));
    }
    let m = samples_per_period;
    let poly = DensePoly::new(spectrum);
    let mut buf = vec![Complex::new(T::zero(), T::zero()); m];
    buf[..poly.coeffs.len()].copy_from_slice(&poly.coeffs);
    planner.plan_fft_inverse(m).process(&mut buf);
    let samples: Vec<T> = buf.iter().map(|c| T::one() + c.re).collect();

    let step = spectrum.period / T::from_usize_lossy(m);
    let tol = T::lit(1e-8) * spectrum.period;
    let (max, z_at_max) = polish(&poly, &samples, step, tol, true);
    let (min, z_at_min) = polish(&poly, &samples, step, tol, false);
    Ok(Extrema { max, min, z_at_max, z_at_min })
}

const POLISH_CANDIDATES: usize = 3;

fn polish<T: Real>(poly: &DensePoly<T>, samples: &[T], step: T, tol: T, maximize: bool) -> (T, T) {
    let m = samples.len();
    let sign = if maximize { T::one() } else { -T::one() };
    let score = |v: T| sign * v;
    // Circular local extrema, best first.
    let mut candidates: Vec<usize> = (0..m)
        .filter(|&k| {
            let v = score(samples[k]);
            v >= score(samples[(k + m - 1) % m]) && v >= score(samples[(k + 1) % m])
        })
        .collect();
    candidates.sort_by(|&a, &b| {
        score(samples[b])
            .partial_cmp(&score(samples[a]))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    if candidates.is_empty() {
        candidates.push(0);
    }
    let mut best_val = samples[candidates[0]];
    let mut best_z = T::from_usize_lossy(candidates[0]) * step;
    for &k in candidates.iter().take(POLISH_CANDIDATES) {
        let center = T::from_usize_lossy(k) * step;
        let (z, v) = golden_section(|z| score(poly.eval(z)), center - step, center + step, tol);
        let v = sign * v;
        if score(v) > score(best_val) {
            best_val = v;
            best_z = z;
        }
    }
    (best_val, best_z)
}

/// Maximizes `f` on `[a, b]`; returns `(argmax, max)`.
pub(crate) fn golden_section<T: Real, F: Fn(T) -> T>(f: F, mut a: T, mut b: T, tol: T) -> (T, T) {
    let inv_phi = T::lit(0.618_033_988_749_894_8);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iter = 0;
    while (b - a).abs() > tol && iter < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        iter += 1;
    }
    if fc > fd {
        (c, fc)
    } else {
        (d, fd)
    }
}
