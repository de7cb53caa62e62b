//! Seeded Monte-Carlo ensembles over the condensate phases.
//!
//! Every trial draws from its own `(seed, trial_index)` stream and results
//! are reduced in trial order, so outputs are bit-identical for any worker
//! count.

use num_complex::Complex;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::density::{
    f_extrema_with, harmonics_from_phases_with, synthesize_density, GridSpec, SAMPLES_PER_ORDER,
};
use crate::error::{Error, Result};
use crate::fitting::{convolve_psf, extract_harmonic, fit_fringes_with, moment_envelope, FitOptions, WidthConvention};
use crate::lattice3d::{f_extrema_3d, Extrema3D};
use crate::model::{
    DensityProfile, EnsembleHistograms, EnsembleStats, Histogram, Lattice3DShot, LatticeShot, PhysicalParams,
};
use crate::rng::{derive_seed, PhaseStream};
use crate::stats::{circular_summary, summarize, Summary};

/// Largest tolerated share of failed fits in an ensemble.
pub const MAX_FAILURE_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeProfile {
    #[default]
    Uniform,
    /// `α_n ∝ n (N − n)`.
    ThomasFermi,
}

impl AmplitudeProfile {
    pub fn shot(self, phases: Vec<f64>) -> Result<LatticeShot<f64>> {
        match self {
            AmplitudeProfile::Uniform => LatticeShot::uniform(phases),
            AmplitudeProfile::ThomasFermi => LatticeShot::thomas_fermi(phases),
        }
    }
}

/// Missing fields take their values from [`EnsembleConfig::reference`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnsembleConfig {
    pub trials: usize,
    pub site_count: usize,
    pub amplitude_profile: AmplitudeProfile,
    pub apply_convolution: bool,
    pub seed: u64,
    pub params: PhysicalParams<f64>,
    pub grid: GridSpec<f64>,
    /// Interpretation of `params.imaging_resolution`.
    pub width_convention: WidthConvention,
    pub fit: FitOptions,
    /// Fixed phases used for every trial instead of random draws.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phase_override: Option<Vec<f64>>,
}

impl EnsembleConfig {
    /// 30 sites with Thomas-Fermi amplitudes, ⁸⁷Rb after 22 ms, 5 µm
    /// imaging blur, 1000 trials.
    pub fn reference() -> Self {
        Self {
            trials: 1000,
            site_count: 30,
            amplitude_profile: AmplitudeProfile::ThomasFermi,
            apply_convolution: true,
            seed: 20_050_121,
            params: PhysicalParams::rb87_reference(),
            grid: GridSpec { z_min: -300e-6, z_max: 300e-6, point_count: 2401 },
            width_convention: WidthConvention::default(),
            fit: FitOptions::default(),
            phase_override: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.trials < 1 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        if self.site_count < 2 {
            return Err(Error::InvalidParameter("site_count must be at least 2".into()));
        }
        if let Some(p) = &self.phase_override {
            if p.len() != self.site_count {
                return Err(Error::InvalidParameter("phase_override length must equal site_count".into()));
            }
        }
        self.params.check()?;
        self.grid.check()
    }

    pub fn imaging_sigma(&self) -> f64 {
        self.width_convention.sigma(self.params.imaging_resolution)
    }

    fn phases(&self, stream: &mut PhaseStream) -> Vec<f64> {
        match &self.phase_override {
            Some(p) => p.clone(),
            None => sample_phases(self.site_count, stream),
        }
    }

    /// Synthesized (and optionally blurred) profile for one trial.
    pub fn trial_profile(&self, trial: u64) -> Result<(LatticeShot<f64>, DensityProfile<f64>)> {
        let mut stream = PhaseStream::new(self.seed, trial);
        let shot = self.amplitude_profile.shot(self.phases(&mut stream))?;
        let mut profile = synthesize_density(&shot, &self.params, &self.grid)?;
        if self.apply_convolution {
            profile = convolve_psf(&profile, self.imaging_sigma())?;
        }
        Ok((shot, profile))
    }
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self::reference()
    }
}

/// `n` independent phases uniform on `[0, 2π)`.
pub fn sample_phases(n: usize, stream: &mut PhaseStream) -> Vec<f64> {
    (0..n).map(|_| stream.phase()).collect()
}

/// Runs `f` on a pool with `workers` threads (0 = rayon default).
pub fn with_workers<R: Send>(workers: usize, f: impl FnOnce() -> R + Send) -> R {
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    #[serde(rename = "A1")]
    pub a1: f64,
    #[serde(rename = "B1")]
    pub b1: f64,
    #[serde(rename = "Fmax")]
    pub fmax: f64,
    #[serde(rename = "Fmin")]
    pub fmin: f64,
    /// First harmonic by direct projection on the fitted envelope.
    #[serde(rename = "A1_projected")]
    pub a1_projected: f64,
    pub fit_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleRun {
    pub stats: EnsembleStats,
    pub records: Vec<TrialRecord>,
}

fn run_trial(config: &EnsembleConfig, trial: u64, planner: &mut FftPlanner<f64>) -> Result<TrialRecord> {
    let (shot, profile) = config.trial_profile(trial)?;
    let period = config.params.fringe_period();
    let spectrum = harmonics_from_phases_with(&shot, period, planner)?;
    let extrema = f_extrema_with(&spectrum, SAMPLES_PER_ORDER * shot.site_count, planner)?;
    let (a1, b1, a1_projected, fit_ok) = match fit_fringes_with(&profile, period, &config.fit) {
        Ok(fit) if fit.converged => {
            let proj = extract_harmonic(&profile, &fit.envelope, 1, fit.fitted_period)
                .map(|(a, _)| a)
                .unwrap_or(f64::NAN);
            (fit.amplitude, fit.phase, proj, true)
        }
        _ => (f64::NAN, f64::NAN, f64::NAN, false),
    };
    Ok(TrialRecord { trial, a1, b1, fmax: extrema.max, fmin: extrema.min, a1_projected, fit_ok })
}

/// Full ensemble: per trial sample phases, synthesize, optionally blur,
/// fit, and record the extrema of the unblurred contrast function.
///
/// Trials whose fit fails are excluded; more than 5% failures is an error.
pub fn run_ensemble(config: &EnsembleConfig, workers: usize) -> Result<EnsembleRun> {
    config.check()?;
    let results: Vec<Result<TrialRecord>> = with_workers(workers, || {
        (0..config.trials as u64)
            .into_par_iter()
            .map_init(FftPlanner::new, |planner, trial| run_trial(config, trial, planner))
            .collect()
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    let failed = records.iter().filter(|r| !r.fit_ok).count();
    if failed as f64 > MAX_FAILURE_FRACTION * config.trials as f64 {
        return Err(Error::TooManyFailures { failed, trials: config.trials });
    }
    let stats = summarize_records(&records, config.seed);
    Ok(EnsembleRun { stats, records })
}

fn summarize_records(records: &[TrialRecord], seed: u64) -> EnsembleStats {
    let ok: Vec<&TrialRecord> = records.iter().filter(|r| r.fit_ok).collect();
    let a1: Vec<f64> = ok.iter().map(|r| r.a1).collect();
    let b1: Vec<f64> = ok.iter().map(|r| r.b1).collect();
    let a1s = summarize(&a1);
    let (circ_mean, circ_r) = circular_summary(&b1);
    let mut ha = Histogram::new(0.0, 2.0, 40);
    let mut hb = Histogram::new(0.0, std::f64::consts::TAU, 36);
    for r in &ok {
        ha.add(r.a1);
        hb.add(r.b1);
    }
    let fmax = summarize(&ok.iter().map(|r| r.fmax).collect::<Vec<_>>());
    let fmin = summarize(&ok.iter().map(|r| r.fmin).collect::<Vec<_>>());
    EnsembleStats {
        trials: ok.len(),
        mean_a1: a1s.mean,
        std_a1: a1s.std,
        circular_mean_b1: circ_mean,
        circular_resultant_length_b1: circ_r,
        mean_fmax: fmax.mean,
        mean_fmin: fmin.mean,
        histograms: EnsembleHistograms { a1: ha, b1: hb },
        seed,
        requested_trials: records.len(),
        failed_fits: records.len() - ok.len(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AveragedProfile {
    pub profile: DensityProfile<f64>,
    /// First-harmonic amplitude of the averaged profile.
    pub amplitude: f64,
    pub phase: f64,
    pub shots: usize,
}

/// Mean of `shots` unit-integral single-shot profiles (trials `0..shots`)
/// and the first harmonic left in the average.
pub fn average_profiles(config: &EnsembleConfig, shots: usize, workers: usize) -> Result<AveragedProfile> {
    config.check()?;
    if shots < 1 {
        return Err(Error::InvalidParameter("need at least one shot".into()));
    }
    let profiles: Vec<Result<DensityProfile<f64>>> = with_workers(workers, || {
        (0..shots as u64)
            .into_par_iter()
            .map(|trial| config.trial_profile(trial).and_then(|(_, p)| p.normalized()))
            .collect()
    });
    let mut sum = vec![0.0; config.grid.point_count];
    let mut z_grid = Vec::new();
    let mut step = 0.0;
    for p in profiles {
        let p = p?;
        for (s, v) in sum.iter_mut().zip(&p.values) {
            *s += v;
        }
        z_grid = p.z_grid;
        step = p.grid_step;
    }
    let values = sum.into_iter().map(|s| s / shots as f64).collect();
    let profile = DensityProfile { z_grid, values, grid_step: step };
    let envelope = moment_envelope(&profile)?;
    let (amplitude, phase) = extract_harmonic(&profile, &envelope, 1, config.params.fringe_period())?;
    Ok(AveragedProfile { profile, amplitude, phase, shots })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "Fmax_mean")]
    pub fmax_mean: f64,
    #[serde(rename = "Fmin_mean")]
    pub fmin_mean: f64,
    #[serde(rename = "A1sq_mean")]
    pub a1sq_mean: f64,
    #[serde(rename = "Fmax_stderr")]
    pub fmax_stderr: f64,
    #[serde(rename = "Fmin_stderr")]
    pub fmin_stderr: f64,
    #[serde(rename = "A1sq_stderr")]
    pub a1sq_stderr: f64,
    pub trials: usize,
}

/// Equal-amplitude random-phase statistics of `F` per site count: mean
/// extrema and `⟨A₁²⟩`, straight from the phases (no imaging, no fit).
///
/// Each `N` uses the seed `derive_seed(seed, N)`.
pub fn scaling_study(site_counts: &[usize], trials: usize, seed: u64, workers: usize) -> Result<Vec<ScalingRow>> {
    if trials < 1 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    site_counts
        .iter()
        .map(|&n| {
            if n < 2 {
                return Err(Error::InvalidParameter(format!("site count {n} < 2")));
            }
            let seed_n = derive_seed(seed, n as u64);
            let rows: Vec<Result<(f64, f64, f64)>> = with_workers(workers, || {
                (0..trials as u64)
                    .into_par_iter()
                    .map_init(FftPlanner::new, |planner, trial| {
                        let mut stream = PhaseStream::new(seed_n, trial);
                        let shot = LatticeShot::uniform(sample_phases(n, &mut stream))?;
                        let spectrum = harmonics_from_phases_with(&shot, 1.0, planner)?;
                        let e = f_extrema_with(&spectrum, SAMPLES_PER_ORDER * n, planner)?;
                        let a1 = spectrum.get(1).map_or(0.0, |h| h.amplitude);
                        Ok((e.max, e.min, a1 * a1))
                    })
                    .collect()
            });
            let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
            let fmax = summarize(&rows.iter().map(|r| r.0).collect::<Vec<_>>());
            let fmin = summarize(&rows.iter().map(|r| r.1).collect::<Vec<_>>());
            let a1sq = summarize(&rows.iter().map(|r| r.2).collect::<Vec<_>>());
            Ok(ScalingRow {
                n,
                fmax_mean: fmax.mean,
                fmin_mean: fmin.mean,
                a1sq_mean: a1sq.mean,
                fmax_stderr: fmax.stderr,
                fmin_stderr: fmin.stderr,
                a1sq_stderr: a1sq.stderr,
                trials,
            })
        })
        .collect()
}

/// `⟨A_n²⟩` for several orders from equal-amplitude random-phase shots.
pub fn harmonic_content(
    site_count: usize,
    orders: &[usize],
    trials: usize,
    seed: u64,
    workers: usize,
) -> Result<Vec<(usize, Summary)>> {
    if orders.iter().any(|&n| n == 0 || n >= site_count) {
        return Err(Error::InvalidParameter("orders must lie in 1..N-1".into()));
    }
    let draws: Vec<Result<Vec<f64>>> = with_workers(workers, || {
        (0..trials as u64)
            .into_par_iter()
            .map_init(FftPlanner::new, |planner, trial| {
                let mut stream = PhaseStream::new(seed, trial);
                let shot = LatticeShot::uniform(sample_phases(site_count, &mut stream))?;
                let s = harmonics_from_phases_with(&shot, 1.0, planner)?;
                Ok(orders
                    .iter()
                    .map(|&n| s.get(n).map_or(0.0, |h| h.amplitude * h.amplitude))
                    .collect())
            })
            .collect()
    });
    let draws = draws.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(orders
        .iter()
        .enumerate()
        .map(|(k, &n)| (n, summarize(&draws.iter().map(|d| d[k]).collect::<Vec<_>>())))
        .collect())
}

/// Equal-amplitude 3D shot with phases from stream `(seed, draw)`.
pub fn random_shot_3d(dims: [usize; 3], seed: u64, draw: u64) -> Result<Lattice3DShot<f64>> {
    let mut stream = PhaseStream::new(seed, draw);
    Lattice3DShot::uniform(dims, sample_phases(dims.iter().product(), &mut stream))
}

/// Extrema of `F(r)` for `draws` random 3D shots, in draw order.
pub fn extrema_3d_study(
    dims: [usize; 3],
    draws: usize,
    seed: u64,
    oversample: usize,
    workers: usize,
) -> Result<Vec<Extrema3D<f64>>> {
    with_workers(workers, || {
        (0..draws as u64)
            .into_par_iter()
            .map(|draw| f_extrema_3d(&random_shot_3d(dims, seed, draw)?, oversample))
            .collect()
    })
}

/// Harmonic content of a lattice with exactly one atom per site,
/// `C_n = 4 (N − n) / [N (N − 1)]`.
pub fn mott_cn_analytic(site_count: usize, order: usize) -> Result<f64> {
    if site_count < 2 || order < 1 || order >= site_count {
        return Err(Error::InvalidParameter(format!(
            "need N ≥ 2 and 1 ≤ n ≤ N−1, got N = {site_count}, n = {order}"
        )));
    }
    let n = site_count as f64;
    Ok(4.0 * (n - order as f64) / (n * (n - 1.0)))
}

/// Random-phase coherent-state ensemble value `4 (N − n) / N²`.
pub fn coherent_cn(site_count: usize, order: usize) -> f64 {
    let n = site_count as f64;
    4.0 * (n - order as f64) / (n * n)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MottConfig {
    pub site_count: usize,
    pub order: usize,
    pub shots: usize,
    pub seed: u64,
    pub params: PhysicalParams<f64>,
    pub grid: GridSpec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MottTarget {
    /// `4 (N − n) / N²`
    CoherentEnsemble,
    /// `4 (N − n) / [N (N − 1)]`
    Mott,
    Both,
    Neither,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MottEstimate {
    pub real: f64,
    pub real_stderr: f64,
    pub imag: f64,
    pub imag_stderr: f64,
    pub shots: usize,
    pub coherent_target: f64,
    pub mott_target: f64,
    /// Which candidate lies within three standard errors of `real`.
    pub matches: MottTarget,
}

/// Inverse-CDF sampler over a gridded density; each sample's mass is spread
/// uniformly over its grid cell.
struct CdfSampler<'a> {
    z: &'a [f64],
    step: f64,
    cumulative: Vec<f64>,
}

impl<'a> CdfSampler<'a> {
    fn new(profile: &'a DensityProfile<f64>) -> Result<Self> {
        let mut acc = 0.0;
        let cumulative: Vec<f64> = profile
            .values
            .iter()
            .map(|&v| {
                acc += v.max(0.0);
                acc
            })
            .collect();
        if !(acc > 0.0) {
            return Err(Error::Degenerate("density has no mass".into()));
        }
        Ok(Self { z: &profile.z_grid, step: profile.grid_step, cumulative })
    }

    fn sample(&self, u: f64) -> f64 {
        let total = *self.cumulative.last().expect("non-empty");
        let target = u * total;
        let k = self.cumulative.partition_point(|&c| c <= target).min(self.z.len() - 1);
        let below = if k == 0 { 0.0 } else { self.cumulative[k - 1] };
        let cell = self.cumulative[k] - below;
        let frac = if cell > 0.0 { (target - below) / cell } else { 0.5 };
        self.z[k] + (frac - 0.5) * self.step
    }
}

/// Two-point estimator of `C_n` from single-atom detections.
///
/// Per shot: random phases, equal amplitudes, the single-shot density,
/// `N` independent positions drawn from it, then
/// `(4 / [N(N−1)]) Σ_j Σ_{j'≠j} exp(2πi (ζ_j − ζ_j') n / D)`.
/// Independent draws give the coherent-ensemble value `4(N−n)/N²`, which
/// differs from the Mott value by `(N−1)/N`.
pub fn mott_cn_sampled(config: &MottConfig, workers: usize) -> Result<MottEstimate> {
    let n_sites = config.site_count;
    let mott_target = mott_cn_analytic(n_sites, config.order)?;
    if config.shots < 100 {
        return Err(Error::InvalidParameter("need at least 100 shots".into()));
    }
    config.params.check()?;
    config.grid.check()?;
    let period = config.params.fringe_period();
    if config.grid.step() > period / 32.0 {
        return Err(Error::Undersampled(format!(
            "grid step {} exceeds D/32 = {}",
            config.grid.step(),
            period / 32.0
        )));
    }
    let k = std::f64::consts::TAU * config.order as f64 / period;
    let norm = 4.0 / (n_sites as f64 * (n_sites as f64 - 1.0));

    let per_shot: Vec<Result<Complex<f64>>> = with_workers(workers, || {
        (0..config.shots as u64)
            .into_par_iter()
            .map(|shot_index| {
                let mut stream = PhaseStream::new(config.seed, shot_index);
                let shot = LatticeShot::uniform(sample_phases(n_sites, &mut stream))?;
                let density = synthesize_density(&shot, &config.params, &config.grid)?;
                let sampler = CdfSampler::new(&density)?;
                let phasors: Vec<Complex<f64>> = (0..n_sites)
                    .map(|_| Complex::from_polar(1.0, k * sampler.sample(stream.uniform())))
                    .collect();
                let mut pair_sum = Complex::new(0.0, 0.0);
                for (j, a) in phasors.iter().enumerate() {
                    for (jp, b) in phasors.iter().enumerate() {
                        if j != jp {
                            pair_sum += a * b.conj();
                        }
                    }
                }
                Ok(pair_sum * norm)
            })
            .collect()
    });
    let values = per_shot.into_iter().collect::<Result<Vec<_>>>()?;
    let re = summarize(&values.iter().map(|c| c.re).collect::<Vec<_>>());
    let im = summarize(&values.iter().map(|c| c.im).collect::<Vec<_>>());
    let coherent_target = coherent_cn(n_sites, config.order);
    let near = |t: f64| (re.mean - t).abs() <= 3.0 * re.stderr;
    let matches = match (near(coherent_target), near(mott_target)) {
        (true, true) => MottTarget::Both,
        (true, false) => MottTarget::CoherentEnsemble,
        (false, true) => MottTarget::Mott,
        (false, false) => MottTarget::Neither,
    };
    Ok(MottEstimate {
        real: re.mean,
        real_stderr: re.stderr,
        imag: im.mean,
        imag_stderr: im.stderr,
        shots: config.shots,
        coherent_target,
        mott_target,
        matches,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::ks_distance_uniform;

    #[test]
    fn partial_config_takes_reference_defaults() {
        let c: EnsembleConfig = serde_json::from_str(r#"{"trials": 5, "seed": 3}"#).unwrap();
        assert_eq!(c, EnsembleConfig { trials: 5, seed: 3, ..EnsembleConfig::reference() });
        assert!(serde_json::from_str::<EnsembleConfig>(r#"{"trails": 5}"#).is_err());
    }

    #[test]
    fn extrema_3d_study_is_worker_independent() {
        let a = extrema_3d_study([3, 4, 2], 6, 1, 4, 1).unwrap();
        let b = extrema_3d_study([3, 4, 2], 6, 1, 4, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|e| e.max >= 1.0 && e.min <= 1.0));
    }

    #[test]
    fn phases_deterministic_per_trial() {
        let a = sample_phases(30, &mut PhaseStream::new(9, 5));
        let b = sample_phases(30, &mut PhaseStream::new(9, 5));
        assert_eq!(a, b);
        assert_ne!(a, sample_phases(30, &mut PhaseStream::new(9, 6)));
    }

    #[test]
    fn phases_are_uniform() {
        let mut pooled = Vec::new();
        for trial in 0..1000 {
            pooled.extend(sample_phases(100, &mut PhaseStream::new(1234, trial)));
        }
        let n = pooled.len() as f64;
        let ks = ks_distance_uniform(&pooled, 0.0, std::f64::consts::TAU);
        assert!(ks < 1.36 / n.sqrt() * 1.5, "KS = {ks}");
        let (_, r) = circular_summary(&pooled);
        assert!(r < 0.01);
        assert!(pooled.iter().all(|p| (0.0..std::f64::consts::TAU).contains(p)));
    }

    #[test]
    fn mott_analytic_values() {
        assert!((mott_cn_analytic(30, 1).unwrap() - 116.0 / 870.0).abs() < 1e-15);
        assert_eq!(mott_cn_analytic(2, 1).unwrap(), 2.0);
        assert!((mott_cn_analytic(17, 16).unwrap() - 4.0 / (17.0 * 16.0)).abs() < 1e-15);
        assert!(mott_cn_analytic(30, 0).is_err());
        assert!(mott_cn_analytic(30, 30).is_err());
        assert!(mott_cn_analytic(1, 1).is_err());
    }

    #[test]
    fn cdf_sampler_stays_in_grid_cells() {
        let p = DensityProfile::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        let s = CdfSampler::new(&p).unwrap();
        assert!((s.sample(0.25) - 1.0).abs() < 1e-12);
        assert!((s.sample(0.75) - 3.0).abs() < 1e-12);
        assert!((s.sample(0.0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn config_validation() {
        let mut c = EnsembleConfig::reference();
        c.trials = 0;
        assert!(c.check().is_err());
        let mut c = EnsembleConfig::reference();
        c.phase_override = Some(vec![0.0; 3]);
        assert!(c.check().is_err());
    }

    #[test]
    fn mott_rejects_coarse_grid_and_few_shots() {
        let params = PhysicalParams::rb87_reference();
        let mut cfg = MottConfig {
            site_count: 2,
            order: 1,
            shots: 100,
            seed: 1,
            params,
            grid: GridSpec { z_min: -300e-6, z_max: 300e-6, point_count: 200 },
        };
        assert!(matches!(mott_cn_sampled(&cfg, 1), Err(Error::Undersampled(_))));
        cfg.grid.point_count = 2048;
        cfg.shots = 50;
        assert!(mott_cn_sampled(&cfg, 1).is_err());
    }
}
