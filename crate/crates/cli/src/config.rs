//! Per-command JSON configs. Every field is optional and defaults to the
//! reference setup; unknown keys are rejected.

use std::path::{Path, PathBuf};

use latticefringe::fitting::{FitOptions, WidthConvention};
use latticefringe::monte_carlo::AmplitudeProfile;
use latticefringe::{Axis, GridSpec, PhysicalParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const DEFAULT_SEED: u64 = 20_050_121;

pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> CliResult<T> {
    let Some(path) = path else { return Ok(T::default()) };
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

fn reference_grid() -> GridSpec<f64> {
    GridSpec { z_min: -300e-6, z_max: 300e-6, point_count: 2401 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulateConfig {
    pub site_count: usize,
    pub amplitude_profile: AmplitudeProfile,
    /// Explicit phases; when absent they are drawn from `(seed, trial)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phases: Option<Vec<f64>>,
    pub seed: u64,
    pub trial: u64,
    pub params: PhysicalParams<f64>,
    pub grid: GridSpec<f64>,
    pub apply_convolution: bool,
    pub width_convention: WidthConvention,
    pub fit: FitOptions,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            site_count: 30,
            amplitude_profile: AmplitudeProfile::ThomasFermi,
            phases: None,
            seed: DEFAULT_SEED,
            trial: 0,
            params: PhysicalParams::rb87_reference(),
            grid: reference_grid(),
            apply_convolution: true,
            width_convention: WidthConvention::default(),
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingConfig {
    pub site_counts: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ScalingConfig {
    fn default() -> Self {
        Self { site_counts: vec![10, 100, 1000, 10_000], trials: 500, seed: DEFAULT_SEED }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FitConfig {
    /// Profile CSV (`z,value`), profile JSON or 2D image JSON.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Defaults to `h t / (m d)` of `params`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected_period: Option<f64>,
    pub params: PhysicalParams<f64>,
    /// Radial half-width averaged over when the input is an image.
    pub band_halfwidth: f64,
    pub fit: FitOptions,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self {
            input: None,
            expected_period: None,
            params: PhysicalParams::rb87_reference(),
            band_halfwidth: 12.5e-6,
            fit: FitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lattice3DConfig {
    pub dims: [usize; 3],
    pub draws: usize,
    pub seed: u64,
    /// FFT grid points per site along each axis before refinement.
    pub oversample: usize,
    pub axis: Axis,
    /// Samples per transverse axis of the integrated pattern (one period).
    pub field_points: usize,
    pub params: PhysicalParams<f64>,
}

impl Default for Lattice3DConfig {
    fn default() -> Self {
        Self {
            dims: [20, 20, 20],
            draws: 100,
            seed: DEFAULT_SEED,
            oversample: 4,
            axis: Axis::Z,
            field_points: 64,
            params: PhysicalParams::rb87_reference(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalesConfig {
    pub params: PhysicalParams<f64>,
    pub lattice_depth_in_er: f64,
}

impl Default for ScalesConfig {
    fn default() -> Self {
        Self { params: PhysicalParams::rb87_reference(), lattice_depth_in_er: 600.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<SimulateConfig>(r#"{"site_cont": 3}"#).is_err());
        assert!(serde_json::from_str::<ScalingConfig>(r#"{"trials": 3, "extra": 1}"#).is_err());
        assert!(serde_json::from_str::<FitConfig>(r#"{"fit": {"window": 2}}"#).is_err());
    }

    #[test]
    fn partial_configs_keep_defaults() {
        let c: SimulateConfig = serde_json::from_str(r#"{"site_count": 12}"#).unwrap();
        assert_eq!(c, SimulateConfig { site_count: 12, ..SimulateConfig::default() });
        let l: Lattice3DConfig = serde_json::from_str(r#"{"axis": "x"}"#).unwrap();
        assert_eq!(l.axis, Axis::X);
    }

    #[test]
    fn configs_round_trip() {
        let c = SimulateConfig { phases: Some(vec![0.5, 1.5]), site_count: 2, ..Default::default() };
        let back: SimulateConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }
}
