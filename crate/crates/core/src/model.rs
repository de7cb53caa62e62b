//! Domain types shared by the synthesis, fitting and ensemble modules.
//!
//! Types keep public fields so they mirror their JSON form one to one.
//! Constructors enforce the hard invariants; [`validate`] reports on values
//! assembled by other means (deserialization, struct literals).

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::scales;

/// Far-field ratios at or above this value produce a warning.
pub const FAR_FIELD_RATIO_LIMIT: f64 = 0.1;

/// One experimental configuration, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams<T = f64> {
    /// Atomic mass (kg).
    pub mass: T,
    /// Lattice period `d` (m).
    pub lattice_period: T,
    /// Time of flight `t` (s).
    pub expansion_time: T,
    /// Gaussian width `ℓ` of the on-site ground state (m).
    pub onsite_width: T,
    /// Quoted imaging resolution width (m). How it maps onto a kernel
    /// standard deviation is set by [`crate::fitting::WidthConvention`].
    pub imaging_resolution: T,
    /// Axial on-site trap frequency ω_z (rad/s); only used to derive `ℓ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub axial_trap_freq: Option<T>,
}

impl<T: Real> PhysicalParams<T> {
    pub fn new(
        mass: T,
        lattice_period: T,
        expansion_time: T,
        onsite_width: T,
        imaging_resolution: T,
    ) -> Result<Self> {
        let p = Self {
            mass,
            lattice_period,
            expansion_time,
            onsite_width,
            imaging_resolution,
            axial_trap_freq: None,
        };
        p.check()?;
        Ok(p)
    }

    /// Builds parameters with `ℓ` derived from the axial trap frequency.
    pub fn from_trap_frequency(
        mass: T,
        lattice_period: T,
        expansion_time: T,
        axial_trap_freq: T,
        imaging_resolution: T,
    ) -> Result<Self> {
        if !(axial_trap_freq > T::zero()) {
            return invalid("axial_trap_freq must be strictly positive");
        }
        let ell = scales::onsite_width(axial_trap_freq, mass);
        let mut p = Self::new(mass, lattice_period, expansion_time, ell, imaging_resolution)?;
        p.axial_trap_freq = Some(axial_trap_freq);
        Ok(p)
    }

    /// Rejects non-positive or non-finite lengths, times and mass.
    /// The imaging width may be zero (no convolution).
    pub fn check(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("lattice_period", self.lattice_period),
            ("expansion_time", self.expansion_time),
            ("onsite_width", self.onsite_width),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > T::zero()) {
                return invalid(format!("{name} must be finite and strictly positive, got {v}"));
            }
        }
        if !(self.imaging_resolution.is_finite() && self.imaging_resolution >= T::zero()) {
            return invalid("imaging_resolution must be finite and non-negative");
        }
        if let Some(w) = self.axial_trap_freq {
            if !(w.is_finite() && w > T::zero()) {
                return invalid("axial_trap_freq must be finite and strictly positive");
            }
        }
        Ok(())
    }

    /// Fringe period `D = h t / (m d)`.
    pub fn fringe_period(&self) -> T {
        scales::fringe_period(self.expansion_time, self.mass, self.lattice_period)
    }

    /// Expansion width `Z₀ = ħ t / (m ℓ)`.
    pub fn expansion_width(&self) -> T {
        scales::expansion_width(self.expansion_time, self.mass, self.onsite_width)
    }
}

impl PhysicalParams<f64> {
    /// ⁸⁷Rb released from a 2.7 µm lattice and imaged after 22 ms,
    /// ℓ = 120 nm, 5 µm imaging resolution.
    pub fn rb87_reference() -> Self {
        Self {
            mass: scales::RB87_MASS,
            lattice_period: 2.7e-6,
            expansion_time: 22e-3,
            onsite_width: 120e-9,
            imaging_resolution: 5e-6,
            axial_trap_freq: None,
        }
    }
}

/// One realization of the lattice: per-site amplitudes and phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeShot<T = f64> {
    pub site_count: usize,
    pub amplitudes: Vec<T>,
    /// Canonically in `[0, 2π)`.
    pub phases: Vec<T>,
}

impl<T: Real> LatticeShot<T> {
    /// Phases are reduced into `[0, 2π)`.
    ///
    /// A single site is accepted so the single-source limit can be
    /// synthesized; [`validate`] still reports `N < 2` as a violation.
    pub fn new(amplitudes: Vec<T>, phases: Vec<T>) -> Result<Self> {
        let shot = Self {
            site_count: amplitudes.len(),
            amplitudes,
            phases: phases.into_iter().map(Real::wrap_phase).collect(),
        };
        let problems = shot.violations();
        let fatal: Vec<_> = problems
            .into_iter()
            .filter(|p| !p.starts_with("site_count < 2"))
            .collect();
        if fatal.is_empty() {
            Ok(shot)
        } else {
            invalid(fatal.join("; "))
        }
    }

    /// Equal unit amplitudes.
    pub fn uniform(phases: Vec<T>) -> Result<Self> {
        Self::new(vec![T::one(); phases.len()], phases)
    }

    /// Amplitudes `α_n ∝ n(N − n)`, n = 1..N, mimicking a Thomas-Fermi
    /// profile cut by the lattice. Note that `α_N = 0`.
    pub fn thomas_fermi(phases: Vec<T>) -> Result<Self> {
        let n = phases.len();
        let amps = thomas_fermi_amplitudes(n);
        Self::new(amps, phases)
    }

    pub fn all_equal_amplitudes(&self) -> bool {
        self.amplitudes.windows(2).all(|w| w[0] == w[1])
    }

    fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.site_count < 2 {
            v.push(format!("site_count < 2 (N = {})", self.site_count));
        }
        if self.site_count == 0 {
            v.push("site_count must be at least 1".to_string());
        }
        if self.amplitudes.len() != self.site_count {
            v.push(format!(
                "amplitudes length mismatch: {} != N = {}",
                self.amplitudes.len(),
                self.site_count
            ));
        }
        if self.phases.len() != self.site_count {
            v.push(format!(
                "phases length mismatch: {} != N = {}",
                self.phases.len(),
                self.site_count
            ));
        }
        if self.amplitudes.iter().any(|a| !(a.is_finite() && *a >= T::zero())) {
            v.push("amplitudes must be finite and non-negative".to_string());
        }
        if !self.amplitudes.iter().any(|a| *a > T::zero()) {
            v.push("at least one amplitude must be positive".to_string());
        }
        if self
            .phases
            .iter()
            .any(|p| !(p.is_finite() && *p >= T::zero() && *p < T::TAU()))
        {
            v.push("phases must lie in [0, 2π)".to_string());
        }
        v
    }
}

pub fn thomas_fermi_amplitudes<T: Real>(n_sites: usize) -> Vec<T> {
    (1..=n_sites)
        .map(|n| T::from_usize_lossy(n * (n_sites - n)))
        .collect()
}

/// Sampled 1D density on a uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityProfile<T = f64> {
    pub z_grid: Vec<T>,
    pub values: Vec<T>,
    pub grid_step: T,
}

impl<T: Real> DensityProfile<T> {
    pub fn new(z_grid: Vec<T>, values: Vec<T>) -> Result<Self> {
        if z_grid.len() < 2 {
            return Err(Error::InvalidGrid("profile needs at least 2 points".into()));
        }
        let step = (z_grid[z_grid.len() - 1] - z_grid[0]) / T::from_usize_lossy(z_grid.len() - 1);
        let p = Self { z_grid, values, grid_step: step };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        check_uniform_axis(&self.z_grid, self.grid_step, "z_grid")?;
        if self.values.len() != self.z_grid.len() {
            return Err(Error::InvalidGrid(format!(
                "values length {} != grid length {}",
                self.values.len(),
                self.z_grid.len()
            )));
        }
        let peak = self.values.iter().fold(T::zero(), |m, &v| m.max(v));
        let floor = -T::lit(1e-12) * peak;
        if self.values.iter().any(|v| !v.is_finite() || *v < floor) {
            return invalid("profile values must be finite and non-negative");
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Riemann sum `Σ I(z) Δz`.
    pub fn integral(&self) -> T {
        self.values.iter().copied().sum::<T>() * self.grid_step
    }

    pub fn peak(&self) -> T {
        self.values.iter().fold(T::zero(), |m, &v| m.max(v))
    }

    /// Copy rescaled to unit integral.
    pub fn normalized(&self) -> Result<Self> {
        let total = self.integral();
        if !(total > T::zero()) {
            return Err(Error::Degenerate("profile has zero integral".into()));
        }
        Ok(Self {
            z_grid: self.z_grid.clone(),
            values: self.values.iter().map(|&v| v / total).collect(),
            grid_step: self.grid_step,
        })
    }
}

/// Strictly increasing axis with constant spacing.
///
/// The spacing tolerance is 1e-12 relative to the step, widened by the
/// rounding error carried by coordinates of magnitude `max |z|`.
pub(crate) fn check_uniform_axis<T: Real>(axis: &[T], step: T, name: &str) -> Result<()> {
    if axis.len() < 2 {
        return Err(Error::InvalidGrid(format!("{name} needs at least 2 points")));
    }
    if !(step > T::zero() && step.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} must be strictly increasing")));
    }
    let scale = axis
        .iter()
        .fold(T::zero(), |m, &z| m.max(z.abs()))
        .max(step);
    let tol = T::lit(1e-12).max(T::lit(8.0) * T::epsilon() * scale / step);
    for w in axis.windows(2) {
        let delta = w[1] - w[0];
        if !(delta > T::zero()) || ((delta - step) / step).abs() > tol {
            return Err(Error::InvalidGrid(format!(
                "{name} is not uniformly spaced (step {delta} vs {step})"
            )));
        }
    }
    Ok(())
}

/// One harmonic `A cos(B + 2π n z / D)` of the contrast function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonic<T = f64> {
    pub order: usize,
    pub amplitude: T,
    pub phase: T,
}

/// Period plus harmonic amplitudes and phases of `F(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicSpectrum<T = f64> {
    pub period: T,
    pub entries: Vec<Harmonic<T>>,
}

impl<T: Real> HarmonicSpectrum<T> {
    pub fn new(period: T, entries: Vec<Harmonic<T>>) -> Result<Self> {
        let s = Self {
            period,
            entries: entries
                .into_iter()
                .map(|h| Harmonic { phase: h.phase.wrap_phase(), ..h })
                .collect(),
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.period > T::zero() && self.period.is_finite()) {
            return invalid("spectrum period must be strictly positive");
        }
        let mut orders: Vec<usize> = self.entries.iter().map(|h| h.order).collect();
        orders.sort_unstable();
        if orders.first() == Some(&0) {
            return invalid("harmonic orders start at 1");
        }
        if orders.windows(2).any(|w| w[0] == w[1]) {
            return invalid("harmonic orders must be unique");
        }
        let limit = T::lit(2.0) * (T::one() + T::lit(64.0) * T::epsilon());
        for h in &self.entries {
            if !(h.amplitude >= T::zero() && h.amplitude <= limit) {
                return invalid(format!("harmonic {} amplitude {} outside [0, 2]", h.order, h.amplitude));
            }
        }
        Ok(())
    }

    pub fn max_order(&self) -> usize {
        self.entries.iter().map(|h| h.order).max().unwrap_or(0)
    }

    pub fn get(&self, order: usize) -> Option<&Harmonic<T>> {
        self.entries.iter().find(|h| h.order == order)
    }
}

/// Gaussian envelope `height · exp(−(z − center)² / (2 width²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianEnvelope<T = f64> {
    pub height: T,
    pub center: T,
    pub width: T,
}

impl<T: Real> GaussianEnvelope<T> {
    #[inline]
    pub fn eval(&self, z: T) -> T {
        let u = (z - self.center) / self.width;
        self.height * (-T::lit(0.5) * u * u).exp()
    }
}

/// Result of fitting `[1 + A₁ cos(B₁ + 2π z / D)] G(z)` to a profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringeFit<T = f64> {
    pub amplitude: T,
    pub phase: T,
    pub fitted_period: T,
    pub envelope: GaussianEnvelope<T>,
    pub residual_rms: T,
    pub converged: bool,
    pub iterations: usize,
    /// Set when the amplitude is too small for the phase to mean anything.
    #[serde(default)]
    pub phase_uncertain: bool,
}

impl<T: Real> FringeFit<T> {
    pub fn check(&self) -> Result<()> {
        if self.amplitude < T::zero() || !(self.phase >= T::zero() && self.phase < T::TAU()) {
            return invalid("fit amplitude must be non-negative and phase in [0, 2π)");
        }
        if self.converged && !(self.residual_rms.is_finite() && self.envelope.width > T::zero()) {
            return invalid("converged fit needs finite residual and positive width");
        }
        Ok(())
    }
}

/// Phases on an `N_x × N_y × N_z` lattice, row-major with z fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice3DShot<T = f64> {
    pub dims: [usize; 3],
    pub phases: Vec<T>,
    pub amplitudes: Vec<T>,
}

impl<T: Real> Lattice3DShot<T> {
    pub fn new(dims: [usize; 3], phases: Vec<T>, amplitudes: Vec<T>) -> Result<Self> {
        let s = Self {
            dims,
            phases: phases.into_iter().map(Real::wrap_phase).collect(),
            amplitudes,
        };
        s.check()?;
        Ok(s)
    }

    pub fn uniform(dims: [usize; 3], phases: Vec<T>) -> Result<Self> {
        let n = dims.iter().product();
        Self::new(dims, phases, vec![T::one(); n])
    }

    pub fn check(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return invalid("lattice dimensions must be positive");
        }
        let n = self.site_count();
        if self.phases.len() != n || self.amplitudes.len() != n {
            return invalid(format!(
                "array shapes do not match dims {:?}: phases {}, amplitudes {}",
                self.dims,
                self.phases.len(),
                self.amplitudes.len()
            ));
        }
        if self.amplitudes.iter().any(|a| !(a.is_finite() && *a >= T::zero())) {
            return invalid("amplitudes must be finite and non-negative");
        }
        if !self.amplitudes.iter().any(|a| *a > T::zero()) {
            return invalid("at least one amplitude must be positive");
        }
        Ok(())
    }

    pub fn site_count(&self) -> usize {
        self.dims.iter().product()
    }

    #[inline]
    pub fn index(&self, ix: usize, iy: usize, iz: usize) -> usize {
        (ix * self.dims[1] + iy) * self.dims[2] + iz
    }
}

/// Binned counts over `[lo, hi)`; values outside are clamped to the end bins.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(lo: f64, hi: f64, bins: usize) -> Self {
        assert!(hi > lo && bins > 0);
        Self { lo, hi, counts: vec![0; bins] }
    }

    pub fn add(&mut self, x: f64) {
        let bins = self.counts.len();
        let f = (x - self.lo) / (self.hi - self.lo) * bins as f64;
        let i = if f.is_nan() || f < 0.0 { 0 } else { (f as usize).min(bins - 1) };
        self.counts[i] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleHistograms {
    #[serde(rename = "A1")]
    pub a1: Histogram,
    #[serde(rename = "B1")]
    pub b1: Histogram,
}

/// Monte-Carlo summary of one ensemble run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    /// Trials that produced a usable fit (histograms sum to this).
    pub trials: usize,
    #[serde(rename = "mean_A1")]
    pub mean_a1: f64,
    #[serde(rename = "std_A1")]
    pub std_a1: f64,
    #[serde(rename = "circular_mean_B1")]
    pub circular_mean_b1: f64,
    #[serde(rename = "circular_resultant_length_B1")]
    pub circular_resultant_length_b1: f64,
    #[serde(rename = "mean_Fmax")]
    pub mean_fmax: f64,
    #[serde(rename = "mean_Fmin")]
    pub mean_fmin: f64,
    pub histograms: EnsembleHistograms,
    pub seed: u64,
    /// Trials requested, including failed fits.
    pub requested_trials: usize,
    pub failed_fits: usize,
}

impl EnsembleStats {
    pub fn check(&self) -> Result<()> {
        if self.trials < 1 {
            return invalid("ensemble needs at least one trial");
        }
        if !(0.0..=1.0).contains(&self.circular_resultant_length_b1) {
            return invalid("circular resultant length outside [0, 1]");
        }
        let n = self.trials as u64;
        if self.histograms.a1.total() != n || self.histograms.b1.total() != n {
            return invalid("histogram counts do not sum to trials");
        }
        Ok(())
    }
}

/// Outcome of [`validate`]: hard violations and soft far-field warnings.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a parameter set and a shot together.
///
/// Far-field validity is assessed through `ℓ/d` and `N d / Z₀`, each
/// compared against [`FAR_FIELD_RATIO_LIMIT`]; excess produces a warning.
pub fn validate<T: Real>(params: &PhysicalParams<T>, shot: &LatticeShot<T>) -> ValidationReport {
    let mut report = ValidationReport::default();
    if let Err(e) = params.check() {
        report.violations.push(e.to_string());
    }
    report.violations.extend(shot.violations());
    if !report.violations.is_empty() {
        return report;
    }

    let limit = T::lit(FAR_FIELD_RATIO_LIMIT);
    let source_ratio = params.onsite_width / params.lattice_period;
    if source_ratio >= limit {
        report
            .warnings
            .push(format!("far-field ratio ℓ/d = {source_ratio} ≥ {FAR_FIELD_RATIO_LIMIT}"));
    }
    let extent_ratio =
        T::from_usize_lossy(shot.site_count) * params.lattice_period / params.expansion_width();
    if extent_ratio >= limit {
        report
            .warnings
            .push(format!("far-field ratio N·d/Z0 = {extent_ratio} ≥ {FAR_FIELD_RATIO_LIMIT}"));
    }
    report
}
