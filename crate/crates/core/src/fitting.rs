//! Image-analysis chain for fringe profiles: imaging-resolution blur,
//! radial band averaging, the Gaussian-envelope fringe fit and direct
//! harmonic projection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_uniform_axis, DensityProfile, FringeFit, GaussianEnvelope};
use crate::scalar::Real;

/// Kernel half-extent in standard deviations.
const KERNEL_HALF_EXTENT: f64 = 6.0;
/// Fits with a smaller amplitude carry no meaningful phase.
pub const PHASE_FLAG_AMPLITUDE: f64 = 0.01;
/// Half-width of the harmonic projection window in envelope widths.
pub const PROJECTION_HALF_WINDOW: f64 = 1.5;

/// How a quoted resolution "width" maps to the kernel standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidthConvention {
    /// The width is σ of `exp(−z²/2σ²)`.
    Sigma,
    /// The width is `w` of `exp(−z²/w²)`, i.e. σ = w/√2.
    #[default]
    OneOverEHalfWidth,
    /// The width is the full width at half maximum, σ = w / (2√(2 ln 2)).
    Fwhm,
}

impl WidthConvention {
    pub fn sigma<T: Real>(self, width: T) -> T {
        match self {
            WidthConvention::Sigma => width,
            WidthConvention::OneOverEHalfWidth => width / T::SQRT_2(),
            WidthConvention::Fwhm => width / (T::lit(2.0) * (T::lit(2.0) * T::LN_2()).sqrt()),
        }
    }
}

/// Blurs a profile with a normalized Gaussian of standard deviation `sigma`.
///
/// The kernel is truncated at ±6σ. Mass that would leave the grid is
/// reflected back at the edges, so the integral is conserved.
pub fn convolve_psf<T: Real>(profile: &DensityProfile<T>, sigma: T) -> Result<DensityProfile<T>> {
    if !(sigma >= T::zero()) {
        return Err(Error::InvalidParameter("sigma must be non-negative".into()));
    }
    if sigma == T::zero() {
        return Ok(profile.clone());
    }
    let step = profile.grid_step;
    if step >= sigma / T::lit(4.0) {
        return Err(Error::Undersampled(format!(
            "grid step {step} must be below sigma/4 = {}",
            sigma / T::lit(4.0)
        )));
    }
    let half = (T::lit(KERNEL_HALF_EXTENT) * sigma / step)
        .floor()
        .to_usize()
        .expect("kernel size");
    let mut kernel: Vec<T> = (0..=2 * half)
        .map(|k| {
            let x = (T::from_usize_lossy(k) - T::from_usize_lossy(half)) * step / sigma;
            (-T::lit(0.5) * x * x).exp()
        })
        .collect();
    let total: T = kernel.iter().copied().sum();
    kernel.iter_mut().for_each(|k| *k /= total);

    let n = profile.values.len() as i64;
    let reflect = |m: i64| -> usize {
        let period = 2 * n;
        let r = m.rem_euclid(period);
        (if r < n { r } else { period - 1 - r }) as usize
    };
    let mut out = vec![T::zero(); profile.values.len()];
    for (j, &x) in profile.values.iter().enumerate() {
        if x == T::zero() {
            continue;
        }
        for (k, &w) in kernel.iter().enumerate() {
            let target = j as i64 + k as i64 - half as i64;
            out[reflect(target)] += x * w;
        }
    }
    Ok(DensityProfile {
        z_grid: profile.z_grid.clone(),
        values: out,
        grid_step: step,
    })
}

/// 2D density image; `values` is row-major with one row per radial position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Image2D<T = f64> {
    pub r_grid: Vec<T>,
    pub z_grid: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> Image2D<T> {
    pub fn new(r_grid: Vec<T>, z_grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        let img = Self { r_grid, z_grid, values };
        img.check()?;
        Ok(img)
    }

    pub fn check(&self) -> Result<()> {
        let step = |a: &[T]| {
            if a.len() < 2 {
                T::zero()
            } else {
                (a[a.len() - 1] - a[0]) / T::from_usize_lossy(a.len() - 1)
            }
        };
        check_uniform_axis(&self.r_grid, step(&self.r_grid), "r_grid")?;
        check_uniform_axis(&self.z_grid, step(&self.z_grid), "z_grid")?;
        if self.values.len() != self.r_grid.len() * self.z_grid.len() {
            return Err(Error::InvalidGrid("image shape does not match axes".into()));
        }
        if self.values.iter().any(|v| !(v.is_finite() && *v >= T::zero())) {
            return Err(Error::InvalidParameter("image values must be non-negative".into()));
        }
        Ok(())
    }

    pub fn row(&self, ir: usize) -> &[T] {
        let nz = self.z_grid.len();
        &self.values[ir * nz..(ir + 1) * nz]
    }
}

/// Mean over rows with `|r| ≤ band_halfwidth`, one value per `z` column.
pub fn radial_average<T: Real>(image: &Image2D<T>, band_halfwidth: T) -> Result<DensityProfile<T>> {
    image.check()?;
    let r_min = image.r_grid[0];
    let r_max = image.r_grid[image.r_grid.len() - 1];
    if !(band_halfwidth >= T::zero()) || -band_halfwidth < r_min || band_halfwidth > r_max {
        return Err(Error::InvalidParameter(format!(
            "band ±{band_halfwidth} does not fit inside [{r_min}, {r_max}]"
        )));
    }
    let r_step = (r_max - r_min) / T::from_usize_lossy(image.r_grid.len() - 1);
    let limit = band_halfwidth + T::lit(1e-9) * r_step;
    let rows: Vec<usize> = (0..image.r_grid.len())
        .filter(|&i| image.r_grid[i].abs() <= limit)
        .collect();
    if rows.is_empty() {
        return Err(Error::InvalidParameter("radial band contains no rows".into()));
    }
    let count = T::from_usize_lossy(rows.len());
    let values = (0..image.z_grid.len())
        .map(|iz| rows.iter().map(|&ir| image.row(ir)[iz]).sum::<T>() / count)
        .collect();
    DensityProfile::new(image.z_grid.clone(), values)
}

/// Gaussian with the profile's mass, centroid and RMS width.
pub fn moment_envelope<T: Real>(profile: &DensityProfile<T>) -> Result<GaussianEnvelope<T>> {
    let mass: T = profile.values.iter().copied().sum();
    if !(mass > T::zero()) {
        return Err(Error::Degenerate("profile has no mass".into()));
    }
    let center = profile
        .z_grid
        .iter()
        .zip(&profile.values)
        .map(|(&z, &v)| z * v)
        .sum::<T>()
        / mass;
    let var = profile
        .z_grid
        .iter()
        .zip(&profile.values)
        .map(|(&z, &v)| (z - center) * (z - center) * v)
        .sum::<T>()
        / mass;
    let width = var.sqrt();
    if !(width > T::zero()) {
        return Err(Error::Degenerate("profile has zero width".into()));
    }
    let height = mass * profile.grid_step / (width * (T::TAU()).sqrt());
    Ok(GaussianEnvelope { height, center, width })
}

/// Amplitude and phase of harmonic `n` of `profile / envelope`.
///
/// The window spans the largest whole number of periods inside
/// `|z − center| ≤ 1.5 width`. The ratio is projected by least squares onto
/// `{1, cos kθ, sin kθ : k = 1..n}` with `θ = 2πz/period`; the result is
/// normalized by the constant term, so `[1 + A cos(B + nθ)] G(z)` yields
/// `(A, B)`.
pub fn extract_harmonic<T: Real>(
    profile: &DensityProfile<T>,
    envelope: &GaussianEnvelope<T>,
    n: usize,
    period: T,
) -> Result<(T, T)> {
    if n == 0 {
        return Err(Error::InvalidParameter("harmonic order must be at least 1".into()));
    }
    if !(period > T::zero()) || !(envelope.width > T::zero()) || !(envelope.height > T::zero()) {
        return Err(Error::InvalidParameter("period, envelope width and height must be positive".into()));
    }
    let half = T::lit(PROJECTION_HALF_WINDOW) * envelope.width;
    let periods = (T::lit(2.0) * half / period).floor();
    if periods < T::one() {
        return Err(Error::InvalidParameter("window shorter than one period".into()));
    }
    let half = periods * period * T::lit(0.5);
    let lo = envelope.center - half;
    let hi = envelope.center + half;
    let z_first = profile.z_grid[0];
    let z_last = profile.z_grid[profile.z_grid.len() - 1];
    if lo < z_first || hi > z_last {
        return Err(Error::WindowClipped(format!(
            "window [{lo}, {hi}] exceeds grid [{z_first}, {z_last}]"
        )));
    }

    let dim = 2 * n + 1;
    let mut normal = vec![T::zero(); dim * dim];
    let mut rhs = vec![T::zero(); dim];
    let mut basis = vec![T::zero(); dim];
    for (&z, &v) in profile.z_grid.iter().zip(&profile.values) {
        if z < lo || z > hi {
            continue;
        }
        let q = v / envelope.eval(z);
        let theta = T::TAU() * z / period;
        basis[0] = T::one();
        for k in 1..=n {
            let (s, c) = (T::from_usize_lossy(k) * theta).sin_cos();
            basis[2 * k - 1] = c;
            basis[2 * k] = s;
        }
        for i in 0..dim {
            rhs[i] += basis[i] * q;
            for j in 0..dim {
                normal[i * dim + j] += basis[i] * basis[j];
            }
        }
    }
    let coef = solve_dense(&mut normal, &mut rhs, dim)
        .ok_or_else(|| Error::Degenerate("projection basis is singular on this window".into()))?;
    let mean = coef[0];
    if !(mean.abs() > T::zero()) {
        return Err(Error::Degenerate("zero mean ratio in window".into()));
    }
    let a = coef[2 * n - 1] / mean;
    let b = coef[2 * n] / mean;
    // A cos(B + nθ) = A cos B cos nθ − A sin B sin nθ
    let amplitude = (a * a + b * b).sqrt();
    let phase = (-b).atan2(a).wrap_phase();
    Ok((amplitude, phase))
}

/// Solves `A x = b` in place by Gaussian elimination with partial pivoting.
fn solve_dense<T: Real>(a: &mut [T], b: &mut [T], n: usize) -> Option<Vec<T>> {
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i * n + col]
                .abs()
                .partial_cmp(&a[j * n + col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[pivot * n + col].abs() > T::min_positive_value()) {
            return None;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            b.swap(col, pivot);
        }
        for row in col + 1..n {
            let f = a[row * n + col] / a[col * n + col];
            if f == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col * n + k];
                a[row * n + k] -= f * v;
            }
            let v = b[col];
            b[row] -= f * v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row * n + k] * x[k];
        }
        x[row] = s / a[row * n + row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitOptions {
    /// Fit the period (true) or hold it at the expected value.
    pub fit_period: bool,
    /// Fit window half-width in units of the initial envelope width.
    pub window_halfwidths: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { fit_period: true, window_halfwidths: 2.0, max_iterations: 200 }
    }
}

const RELATIVE_COST_TOL: f64 = 1e-10;
const PARAMETER_STEP_TOL: f64 = 1e-8;

/// Parameter layout of the fit, in scaled units.
const A: usize = 0;
const B: usize = 1;
const PERIOD: usize = 2;
const HEIGHT: usize = 3;
const CENTER: usize = 4;
const WIDTH: usize = 5;
const NPAR: usize = 6;

/// Fits `[1 + A₁ cos(B₁ + 2πz/D)] G(z)` with a Gaussian `G`, holding or
/// fitting the period according to `fit_period`.
pub fn fit_fringes<T: Real>(profile: &DensityProfile<T>, expected_period: T, fit_period: bool) -> Result<FringeFit<T>> {
    fit_fringes_with(profile, expected_period, &FitOptions { fit_period, ..FitOptions::default() })
}

/// Levenberg–Marquardt fit of the fringe model.
///
/// The envelope starts from the profile moments, `(A₁, B₁)` from
/// [`extract_harmonic`] on that envelope, and the period from
/// `expected_period`. A negative amplitude is folded into `B₁ + π`.
pub fn fit_fringes_with<T: Real>(
    profile: &DensityProfile<T>,
    expected_period: T,
    options: &FitOptions,
) -> Result<FringeFit<T>> {
    profile.check()?;
    if !(expected_period > T::zero()) {
        return Err(Error::InvalidParameter("expected period must be positive".into()));
    }
    if expected_period / profile.grid_step < T::lit(8.0) {
        return Err(Error::Undersampled(format!(
            "need at least 8 points per period, have {}",
            expected_period / profile.grid_step
        )));
    }
    let peak = profile.peak();
    let n_all = T::from_usize_lossy(profile.len());
    let mean = profile.values.iter().copied().sum::<T>() / n_all;
    let var = profile.values.iter().map(|&v| (v - mean) * (v - mean)).sum::<T>() / n_all;
    if !(peak > T::zero()) || var < T::lit(1e-15) * peak * peak {
        return Err(Error::Degenerate("profile is flat".into()));
    }

    let env0 = moment_envelope(profile)?;
    let (a0, b0) = extract_harmonic(profile, &env0, 1, expected_period).unwrap_or((T::lit(0.1), T::zero()));

    // Scaled units: z in expected periods, values in units of the peak.
    let zs = expected_period;
    let half = T::lit(options.window_halfwidths) * env0.width;
    let (zw, yw): (Vec<T>, Vec<T>) = profile
        .z_grid
        .iter()
        .zip(&profile.values)
        .filter(|(&z, _)| (z - env0.center).abs() <= half)
        .map(|(&z, &v)| (z / zs, v / peak))
        .unzip();
    if zw.len() < 2 * NPAR {
        return Err(Error::Degenerate("fit window holds too few points".into()));
    }

    let mut p = [T::zero(); NPAR];
    p[A] = a0;
    p[B] = b0;
    p[PERIOD] = T::one();
    p[HEIGHT] = env0.height / peak;
    p[CENTER] = env0.center / zs;
    p[WIDTH] = env0.width / zs;
    let free: Vec<usize> = (0..NPAR).filter(|&i| options.fit_period || i != PERIOD).collect();

    let outcome = levenberg_marquardt(&zw, &yw, p, &free, options.max_iterations);
    let mut p = outcome.params;
    if p[A] < T::zero() {
        p[A] = -p[A];
        p[B] = p[B] + T::PI();
    }
    let amplitude = p[A];
    let rms = (outcome.cost / T::from_usize_lossy(zw.len())).sqrt() * peak;
    let fit = FringeFit {
        amplitude,
        phase: p[B].wrap_phase(),
        fitted_period: p[PERIOD] * zs,
        envelope: GaussianEnvelope {
            height: p[HEIGHT] * peak,
            center: p[CENTER] * zs,
            width: p[WIDTH].abs() * zs,
        },
        residual_rms: rms,
        converged: outcome.converged && rms.is_finite(),
        iterations: outcome.iterations,
        phase_uncertain: amplitude < T::lit(PHASE_FLAG_AMPLITUDE),
    };
    Ok(fit)
}

struct LmOutcome<T> {
    params: [T; NPAR],
    cost: T,
    converged: bool,
    iterations: usize,
}

/// Model value and gradient at one point.
fn model_and_gradient<T: Real>(z: T, p: &[T; NPAR]) -> (T, [T; NPAR]) {
    let two_pi = T::TAU();
    let u = z - p[CENTER];
    let w = p[WIDTH];
    let g = (-u * u / (T::lit(2.0) * w * w)).exp();
    let phi = p[B] + two_pi * z / p[PERIOD];
    let (s, c) = phi.sin_cos();
    let mod_ = T::one() + p[A] * c;
    let hg = p[HEIGHT] * g;
    let y = hg * mod_;
    let grad = [
        hg * c,
        -hg * p[A] * s,
        hg * p[A] * s * two_pi * z / (p[PERIOD] * p[PERIOD]),
        g * mod_,
        y * u / (w * w),
        y * u * u / (w * w * w),
    ];
    (y, grad)
}

fn cost_of<T: Real>(z: &[T], y: &[T], p: &[T; NPAR]) -> T {
    z.iter()
        .zip(y)
        .map(|(&zi, &yi)| {
            let r = yi - model_and_gradient(zi, p).0;
            r * r
        })
        .sum()
}

fn levenberg_marquardt<T: Real>(z: &[T], y: &[T], mut p: [T; NPAR], free: &[usize], max_iter: usize) -> LmOutcome<T> {
    let m = free.len();
    let mut cost = cost_of(z, y, &p);
    let mut lambda = T::lit(1e-3);
    let lambda_max = T::lit(1e16);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < max_iter {
        iterations += 1;
        let mut jtj = vec![T::zero(); m * m];
        let mut jtr = vec![T::zero(); m];
        for (&zi, &yi) in z.iter().zip(y) {
            let (f, g) = model_and_gradient(zi, &p);
            let r = yi - f;
            for (a, &ia) in free.iter().enumerate() {
                jtr[a] += g[ia] * r;
                for (b, &ib) in free.iter().enumerate().skip(a) {
                    jtj[a * m + b] += g[ia] * g[ib];
                }
            }
        }
        for a in 0..m {
            for b in 0..a {
                jtj[a * m + b] = jtj[b * m + a];
            }
        }

        // Raise the damping until a step lowers the cost.
        let mut accepted = false;
        while lambda <= lambda_max {
            let mut lhs = jtj.clone();
            for a in 0..m {
                let d = jtj[a * m + a];
                lhs[a * m + a] = d + lambda * d.max(T::lit(1e-30));
            }
            let mut rhs = jtr.clone();
            let Some(delta) = solve_dense(&mut lhs, &mut rhs, m) else {
                lambda *= T::lit(10.0);
                continue;
            };
            let mut trial = p;
            for (a, &ia) in free.iter().enumerate() {
                trial[ia] += delta[a];
            }
            if !(trial[WIDTH] > T::zero() && trial[PERIOD] > T::zero() && trial[HEIGHT] > T::zero()) {
                lambda *= T::lit(10.0);
                continue;
            }
            let trial_cost = cost_of(z, y, &trial);
            if trial_cost.is_finite() && trial_cost <= cost {
                let decrease = (cost - trial_cost) / cost.max(T::min_positive_value());
                let step = free
                    .iter()
                    .enumerate()
                    .map(|(a, &ia)| delta[a].abs() / (p[ia].abs() + T::lit(1e-12)))
                    .fold(T::zero(), T::max);
                p = trial;
                cost = trial_cost;
                lambda = (lambda / T::lit(10.0)).max(T::lit(1e-12));
                accepted = true;
                if decrease < T::lit(RELATIVE_COST_TOL) || step < T::lit(PARAMETER_STEP_TOL) {
                    converged = true;
                }
                break;
            }
            lambda *= T::lit(10.0);
        }
        if !accepted {
            // no descent direction left at working precision
            converged = cost.is_finite();
            break;
        }
        if converged || cost == T::zero() {
            converged = true;
            break;
        }
    }
    LmOutcome { params: p, cost, converged, iterations }
}
