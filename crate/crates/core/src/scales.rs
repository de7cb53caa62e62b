//! Closed-form physical scales: recoil energy, fringe period, expansion
//! width, on-site width, tunneling suppression and number-squeezing regimes.
//!
//! Products are ordered so intermediates stay within `f32` range for
//! SI-sized inputs (ħ² alone underflows single precision).

use serde::{Deserialize, Serialize};

use crate::model::PhysicalParams;
use crate::scalar::Real;

/// Planck constant (J s), exact in SI.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Reduced Planck constant ħ = h / 2π (J s).
pub const HBAR: f64 = PLANCK / std::f64::consts::TAU;
/// Mass of ⁸⁷Rb (kg), CODATA.
pub const RB87_MASS: f64 = 1.443_16e-25;

/// `E_R = ħ² k² / 2m` with `k = π / d`.
pub fn recoil_energy<T: Real>(lattice_period: T, mass: T) -> T {
    let hbar_k = T::lit(HBAR) * T::PI() / lattice_period;
    hbar_k / (T::lit(2.0) * mass) * hbar_k
}

/// Converts an energy to its frequency equivalent `E / h`.
pub fn energy_to_hz<T: Real>(energy: T) -> T {
    energy / T::lit(PLANCK)
}

/// `D = h t / (m d)`.
pub fn fringe_period<T: Real>(expansion_time: T, mass: T, lattice_period: T) -> T {
    T::lit(PLANCK) * expansion_time / (mass * lattice_period)
}

/// `Z₀ = ħ t / (m ℓ)`.
pub fn expansion_width<T: Real>(expansion_time: T, mass: T, onsite_width: T) -> T {
    T::lit(HBAR) * expansion_time / (mass * onsite_width)
}

/// `ℓ = √(ħ / (2 m ω_z))`.
pub fn onsite_width<T: Real>(omega_z: T, mass: T) -> T {
    (T::lit(HBAR) / (T::lit(2.0) * mass * omega_z)).sqrt()
}

/// Ratio `J(V₀) / J(V₀_ref)` from the deep-lattice law
/// `J ∝ E_R exp(−2 √(V₀/E_R))`. Only the ratio is defined.
pub fn tunneling_ratio<T: Real>(v0: T, v0_ref: T, recoil: T) -> T {
    let two = T::lit(2.0);
    (-two * ((v0 / recoil).sqrt() - (v0_ref / recoil).sqrt())).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SqueezingRegime {
    Poissonian,
    Squeezed,
    Mott,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingPrediction {
    pub regime: SqueezingRegime,
    /// Predicted on-site number standard deviation.
    pub sigma: f64,
    /// For the Mott regime `sigma` is an upper bound (σ < 1).
    pub sigma_is_upper_bound: bool,
}

/// Classifies the ground-state number statistics from tunneling `J`,
/// on-site interaction `U` and mean occupation `n₀`.
///
/// The three regimes sit at `J ≳ n₀U`, `J ∼ U` and `J ∼ U/n₀`. Cutoffs are
/// the geometric midpoints between neighbouring scales: `U √n₀` and
/// `U / √n₀`. These cutoffs are a convention of this crate.
pub fn squeezing_regime(tunneling: f64, interaction: f64, n0: f64) -> SqueezingPrediction {
    assert!(tunneling >= 0.0 && interaction > 0.0 && n0 >= 1.0);
    let upper = interaction * n0.sqrt();
    let lower = interaction / n0.sqrt();
    if tunneling >= upper {
        SqueezingPrediction {
            regime: SqueezingRegime::Poissonian,
            sigma: n0.sqrt(),
            sigma_is_upper_bound: false,
        }
    } else if tunneling >= lower {
        SqueezingPrediction {
            regime: SqueezingRegime::Squeezed,
            sigma: n0.powf(0.25),
            sigma_is_upper_bound: false,
        }
    } else {
        SqueezingPrediction {
            regime: SqueezingRegime::Mott,
            sigma: 1.0,
            sigma_is_upper_bound: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoilEnergy {
    pub joules: f64,
    pub hertz: f64,
}

/// Derived scales for one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalesReport {
    pub recoil_energy: RecoilEnergy,
    pub fringe_period: f64,
    pub expansion_width: f64,
    pub onsite_width: f64,
    pub lattice_depth_in_er: f64,
}

impl ScalesReport {
    pub fn new(params: &PhysicalParams<f64>, lattice_depth_in_er: f64) -> Self {
        let er = recoil_energy(params.lattice_period, params.mass);
        Self {
            recoil_energy: RecoilEnergy { joules: er, hertz: energy_to_hz(er) },
            fringe_period: params.fringe_period(),
            expansion_width: params.expansion_width(),
            onsite_width: params.onsite_width,
            lattice_depth_in_er,
        }
    }

    pub fn render_table(&self) -> String {
        let rows = [
            ("recoil energy E_R", format!("{:.4e} J  (h x {:.2} Hz)", self.recoil_energy.joules, self.recoil_energy.hertz)),
            ("fringe period D", format!("{:.3} um", self.fringe_period * 1e6)),
            ("expansion width Z0", format!("{:.2} um", self.expansion_width * 1e6)),
            ("on-site width l", format!("{:.1} nm", self.onsite_width * 1e9)),
            ("lattice depth V0/E_R", format!("{:.1}", self.lattice_depth_in_er)),
        ];
        let mut out = String::new();
        for (k, v) in rows {
            out.push_str(&format!("{k:<22} {v}\n"));
        }
        out
    }
}
