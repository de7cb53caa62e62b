use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use latticefringe::fitting::{convolve_psf, fit_fringes_with, radial_average, Image2D};
use latticefringe::io;
use latticefringe::lattice3d::{integrate_line_of_sight, line_of_sight_spectrum};
use latticefringe::monte_carlo::{extrema_3d_study, random_shot_3d, run_ensemble, sample_phases, scaling_study};
use latticefringe::rng::PhaseStream;
use latticefringe::stats::summarize;
use latticefringe::{
    harmonics_from_phases, synthesize_density, validate, DensityProfile, EnsembleConfig, FringeFit, GridSpec,
    LatticeShot, PhysicalParams, ScalesReport, ValidationReport,
};
use serde::Serialize;

use crate::config::{self, FitConfig, Lattice3DConfig, ScalesConfig, ScalingConfig, SimulateConfig};
use crate::error::{CliError, CliResult};
use crate::output::{write_manifest, Format, OutDir};

/// Flags shared by every subcommand.
pub struct Context<'a> {
    pub config: Option<&'a Path>,
    pub seed: Option<u64>,
    pub out: &'a Path,
    pub workers: usize,
    pub format: Format,
    pub started: Instant,
}

impl Context<'_> {
    fn finish<C: Serialize>(&self, out: &mut OutDir, command: &str, seed: Option<u64>, config: &C) -> CliResult<()> {
        write_manifest(out, command, seed, self.workers, self.format, config, self.started)
    }
}

/// Replay record written next to a simulated profile.
#[derive(Serialize)]
struct ShotRecord<'a> {
    seed: u64,
    trial: u64,
    shot: &'a LatticeShot<f64>,
    params: &'a PhysicalParams<f64>,
    convolved: bool,
    imaging_sigma: f64,
    validation: &'a ValidationReport,
    fit: Option<FringeFit<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    fit_error: Option<String>,
}

fn report_validation(report: &ValidationReport) -> CliResult<()> {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if report.is_valid() {
        Ok(())
    } else {
        Err(CliError::Config(report.violations.join("; ")))
    }
}

pub fn simulate(ctx: &Context) -> CliResult<()> {
    let mut cfg: SimulateConfig = config::load(ctx.config)?;
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    let phases = match &cfg.phases {
        Some(p) if p.len() != cfg.site_count => {
            return Err(CliError::Config(format!(
                "{} phases given for site_count {}",
                p.len(),
                cfg.site_count
            )))
        }
        Some(p) => p.clone(),
        None => sample_phases(cfg.site_count, &mut PhaseStream::new(cfg.seed, cfg.trial)),
    };
    let shot = cfg.amplitude_profile.shot(phases)?;
    let validation = validate(&cfg.params, &shot);
    report_validation(&validation)?;

    let mut profile = synthesize_density(&shot, &cfg.params, &cfg.grid)?;
    let sigma = cfg.width_convention.sigma(cfg.params.imaging_resolution);
    if cfg.apply_convolution {
        profile = convolve_psf(&profile, sigma)?;
    }
    let period = cfg.params.fringe_period();
    let spectrum = harmonics_from_phases(&shot, period)?;
    let (fit, fit_error) = match fit_fringes_with(&profile, period, &cfg.fit) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };

    let mut out = OutDir::create(ctx.out)?;
    match ctx.format {
        Format::Csv => {
            out.csv("profile.csv", |w| io::write_profile_csv(w, &profile))?;
            out.csv("spectrum.csv", |w| io::write_spectrum_csv(w, &spectrum))?;
        }
        Format::Json => {
            out.json("profile.json", &profile)?;
            out.json("spectrum.json", &spectrum)?;
        }
    }
    let record = ShotRecord {
        seed: cfg.seed,
        trial: cfg.trial,
        shot: &shot,
        params: &cfg.params,
        convolved: cfg.apply_convolution,
        imaging_sigma: sigma,
        validation: &validation,
        fit,
        fit_error,
    };
    out.json("shot.json", &record)?;
    if let Some(f) = fit {
        println!("A1 = {:.4}  B1 = {:.4}  D = {:.3} um", f.amplitude, f.phase, f.fitted_period * 1e6);
    }
    ctx.finish(&mut out, "simulate", Some(cfg.seed), &cfg)
}

pub fn ensemble(ctx: &Context) -> CliResult<()> {
    let mut cfg: EnsembleConfig = config::load(ctx.config)?;
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    let run = run_ensemble(&cfg, ctx.workers)?;
    let mut out = OutDir::create(ctx.out)?;
    match ctx.format {
        Format::Csv => out.csv("trials.csv", |w| io::write_trials_csv(w, &run.records))?,
        Format::Json => out.json("trials.json", &run.records)?,
    };
    out.json("summary.json", &run.stats)?;
    let s = &run.stats;
    println!(
        "{} fits ({} failed): mean A1 = {:.4}, std A1 = {:.4}, <Fmax> = {:.3}, <Fmin> = {:.3e}",
        s.trials, s.failed_fits, s.mean_a1, s.std_a1, s.mean_fmax, s.mean_fmin
    );
    ctx.finish(&mut out, "ensemble", Some(cfg.seed), &cfg)
}

pub fn scaling(ctx: &Context) -> CliResult<()> {
    let mut cfg: ScalingConfig = config::load(ctx.config)?;
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    let rows = scaling_study(&cfg.site_counts, cfg.trials, cfg.seed, ctx.workers)?;
    let mut out = OutDir::create(ctx.out)?;
    match ctx.format {
        Format::Csv => out.csv("scaling.csv", |w| io::write_scaling_csv(w, &rows))?,
        Format::Json => out.json("scaling.json", &rows)?,
    };
    for r in &rows {
        println!("N = {:>6}  <Fmax> = {:.3}  <Fmin> = {:.3e}  <A1^2> = {:.4e}", r.n, r.fmax_mean, r.fmin_mean, r.a1sq_mean);
    }
    ctx.finish(&mut out, "scaling", Some(cfg.seed), &cfg)
}

fn read_fit_input(path: &Path, band_halfwidth: f64) -> CliResult<DensityProfile<f64>> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: latticefringe::Error| CliError::Config(format!("{}: {e}", path.display()));
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return io::read_profile_csv(bytes.as_slice()).map_err(bad);
    }
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if value.get("r_grid").is_some() {
        let image: Image2D<f64> = serde_json::from_value(value).map_err(|e| bad(e.into()))?;
        radial_average(&image, band_halfwidth).map_err(bad)
    } else {
        let profile: DensityProfile<f64> = serde_json::from_value(value).map_err(|e| bad(e.into()))?;
        profile.check().map_err(bad)?;
        Ok(profile)
    }
}

pub fn fit(ctx: &Context, input: Option<&Path>) -> CliResult<()> {
    let mut cfg: FitConfig = config::load(ctx.config)?;
    if let Some(p) = input {
        cfg.input = Some(p.to_path_buf());
    }
    let Some(path) = cfg.input.clone() else {
        return Err(CliError::Config("fit needs an input profile (--input or config \"input\")".into()));
    };
    cfg.params.check()?;
    let profile = read_fit_input(&path, cfg.band_halfwidth)?;
    let period = cfg.expected_period.unwrap_or_else(|| cfg.params.fringe_period());
    let fit = fit_fringes_with(&profile, period, &cfg.fit)?;
    if !fit.converged {
        eprintln!("warning: fit did not converge after {} iterations", fit.iterations);
    }
    let mut out = OutDir::create(ctx.out)?;
    match ctx.format {
        Format::Csv => out.csv("fit.csv", |w| io::write_fits_csv(w, &[fit]))?,
        Format::Json => out.json("fit.json", &fit)?,
    };
    println!(
        "A1 = {:.4}  B1 = {:.4}  D = {:.3} um  width = {:.2} um",
        fit.amplitude,
        fit.phase,
        fit.fitted_period * 1e6,
        fit.envelope.width * 1e6
    );
    ctx.finish(&mut out, "fit", None, &cfg)
}

#[derive(Serialize)]
struct Lattice3DSummary {
    dims: [usize; 3],
    draws: usize,
    #[serde(rename = "mean_Fmax")]
    mean_fmax: f64,
    #[serde(rename = "stderr_Fmax")]
    stderr_fmax: f64,
    #[serde(rename = "mean_Fmin")]
    mean_fmin: f64,
    #[serde(rename = "stderr_Fmin")]
    stderr_fmin: f64,
    /// First transverse harmonic of draw 0 after line-of-sight integration.
    #[serde(rename = "line_of_sight_A10")]
    line_of_sight_a10: f64,
}

pub fn lattice3d(ctx: &Context) -> CliResult<()> {
    let mut cfg: Lattice3DConfig = config::load(ctx.config)?;
    if let Some(seed) = ctx.seed {
        cfg.seed = seed;
    }
    if cfg.draws < 1 || cfg.field_points < 2 {
        return Err(CliError::Config("draws must be ≥ 1 and field_points ≥ 2".into()));
    }
    cfg.params.check()?;
    let extrema = extrema_3d_study(cfg.dims, cfg.draws, cfg.seed, cfg.oversample, ctx.workers)?;
    let fmax = summarize(&extrema.iter().map(|e| e.max).collect::<Vec<_>>());
    let fmin = summarize(&extrema.iter().map(|e| e.min).collect::<Vec<_>>());

    let shot = random_shot_3d(cfg.dims, cfg.seed, 0)?;
    let period = cfg.params.fringe_period();
    let n = cfg.field_points;
    let axis_grid = GridSpec::new(0.0, period * (1.0 - 1.0 / n as f64), n)?;
    let field = integrate_line_of_sight(&shot, cfg.axis, &axis_grid, &axis_grid, period)?;
    let a10 = line_of_sight_spectrum(&shot, cfg.axis)?
        .iter()
        .find(|h| h.lag == [1, 0])
        .map_or(0.0, |h| h.amplitude);

    let mut out = OutDir::create(ctx.out)?;
    match ctx.format {
        Format::Csv => {
            let mut text = String::from("draw,Fmax,Fmin\n");
            for (i, e) in extrema.iter().enumerate() {
                writeln!(text, "{i},{},{}", e.max, e.min).expect("string write");
            }
            out.write("draws.csv", text.as_bytes())?;
            out.csv("line_of_sight.csv", |w| io::write_field2d_csv(w, &field))?;
        }
        Format::Json => {
            out.json("draws.json", &extrema)?;
            out.json("line_of_sight.json", &field)?;
        }
    }
    let summary = Lattice3DSummary {
        dims: cfg.dims,
        draws: cfg.draws,
        mean_fmax: fmax.mean,
        stderr_fmax: fmax.stderr,
        mean_fmin: fmin.mean,
        stderr_fmin: fmin.stderr,
        line_of_sight_a10: a10,
    };
    out.json("summary.json", &summary)?;
    println!("<Fmax> = {:.3} ± {:.3}  <Fmin> = {:.3e}", fmax.mean, fmax.stderr, fmin.mean);
    ctx.finish(&mut out, "lattice3d", Some(cfg.seed), &cfg)
}

pub fn scales(ctx: &Context) -> CliResult<()> {
    let cfg: ScalesConfig = config::load(ctx.config)?;
    cfg.params.check()?;
    let report = ScalesReport::new(&cfg.params, cfg.lattice_depth_in_er);
    print!("{}", report.render_table());
    let mut out = OutDir::create(ctx.out)?;
    match ctx.format {
        Format::Csv => {
            let text = format!(
                "quantity,value\nrecoil_energy_J,{}\nrecoil_energy_Hz,{}\nfringe_period_m,{}\nexpansion_width_m,{}\nonsite_width_m,{}\nlattice_depth_ER,{}\n",
                report.recoil_energy.joules,
                report.recoil_energy.hertz,
                report.fringe_period,
                report.expansion_width,
                report.onsite_width,
                report.lattice_depth_in_er
            );
            out.write("scales.csv", text.as_bytes())?;
        }
        Format::Json => {
            out.json("scales.json", &report)?;
        }
    }
    ctx.finish(&mut out, "scales", None, &cfg)
}
