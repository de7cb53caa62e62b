//! CSV and JSON interchange.
//!
//! CSV layouts are tidy and plot-ready:
//! profiles `z,value`; spectra `n,A,B`; fits one row per fit starting
//! `A1,B1`; ensemble trials `trial,A1,B1,Fmax,Fmin`; scaling tables
//! `N,Fmax_mean,Fmin_mean,A1sq_mean,...`. Floats are written in shortest
//! round-trip form, so reading a file back reproduces every value exactly.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice3d::Field2D;
use crate::model::{DensityProfile, FringeFit, HarmonicSpectrum};
use crate::monte_carlo::{ScalingRow, TrialRecord};
use crate::scalar::Real;

pub fn write_profile_csv<T: Real, W: Write>(out: W, profile: &DensityProfile<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["z", "value"])?;
    for (z, v) in profile.z_grid.iter().zip(&profile.values) {
        w.write_record([z.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn parse<T: FromStr>(field: Option<&str>, line: usize) -> Result<T> {
    field
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::InvalidParameter(format!("malformed number on CSV record {line}")))
}

/// Reads a `z,value` profile and checks its grid.
pub fn read_profile_csv<T: Real + FromStr, R: Read>(input: R) -> Result<DensityProfile<T>> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers()?.clone();
    if headers.len() < 2 || &headers[0] != "z" || &headers[1] != "value" {
        return Err(Error::InvalidParameter("profile CSV must start with columns z,value".into()));
    }
    let mut z = Vec::new();
    let mut v = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        z.push(parse(rec.get(0), i + 1)?);
        v.push(parse(rec.get(1), i + 1)?);
    }
    DensityProfile::new(z, v)
}

pub fn write_spectrum_csv<T: Real, W: Write>(out: W, spectrum: &HarmonicSpectrum<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n", "A", "B"])?;
    for h in &spectrum.entries {
        w.write_record([h.order.to_string(), h.amplitude.to_string(), h.phase.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub const FIT_CSV_HEADER: [&str; 9] = [
    "A1",
    "B1",
    "D",
    "height",
    "center",
    "width",
    "residual_rms",
    "converged",
    "iterations",
];

pub fn write_fits_csv<T: Real, W: Write>(out: W, fits: &[FringeFit<T>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(FIT_CSV_HEADER)?;
    for f in fits {
        w.write_record([
            f.amplitude.to_string(),
            f.phase.to_string(),
            f.fitted_period.to_string(),
            f.envelope.height.to_string(),
            f.envelope.center.to_string(),
            f.envelope.width.to_string(),
            f.residual_rms.to_string(),
            f.converged.to_string(),
            f.iterations.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_trials_csv<W: Write>(out: W, records: &[TrialRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["trial", "A1", "B1", "Fmax", "Fmin"])?;
    for r in records {
        w.write_record([
            r.trial.to_string(),
            r.a1.to_string(),
            r.b1.to_string(),
            r.fmax.to_string(),
            r.fmin.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_scaling_csv<W: Write>(out: W, rows: &[ScalingRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_field2d_csv<T: Real, W: Write>(out: W, field: &Field2D<T>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["u", "v", "value"])?;
    for (iu, u) in field.u_grid.iter().enumerate() {
        for (iv, v) in field.v_grid.iter().enumerate() {
            w.write_record([u.to_string(), v.to_string(), field.at(iu, iv).to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn to_json<S: Serialize + ?Sized>(value: &S) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

pub fn from_json<D: DeserializeOwned>(text: &str) -> Result<D> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GaussianEnvelope, Harmonic, LatticeShot};
    use proptest::prelude::*;

    #[test]
    fn profile_csv_round_trip_is_exact() {
        let z: Vec<f64> = (0..50).map(|i| -1e-4 + i as f64 * 4.1e-6).collect();
        let v: Vec<f64> = z.iter().map(|z| (z * 1e5).sin().powi(2) / 3.0).collect();
        let p = DensityProfile::new(z, v).unwrap();
        let mut buf = Vec::new();
        write_profile_csv(&mut buf, &p).unwrap();
        let q: DensityProfile<f64> = read_profile_csv(buf.as_slice()).unwrap();
        assert_eq!(p.values, q.values);
        assert_eq!(p.z_grid, q.z_grid);
    }

    #[test]
    fn profile_csv_header_enforced() {
        let text = "x,y\n0,1\n1,2\n";
        assert!(read_profile_csv::<f64, _>(text.as_bytes()).is_err());
    }

    #[test]
    fn spectrum_and_fit_csv_layout() {
        let s = HarmonicSpectrum::new(2.0, vec![Harmonic { order: 1, amplitude: 0.5, phase: 1.0 }]).unwrap();
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &s).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "n,A,B\n1,0.5,1\n");
        let fit = FringeFit {
            amplitude: 0.3,
            phase: 2.0,
            fitted_period: 3.9e-5,
            envelope: GaussianEnvelope { height: 1.0, center: 0.0, width: 1e-4 },
            residual_rms: 0.0,
            converged: true,
            iterations: 7,
            phase_uncertain: false,
        };
        let mut buf = Vec::new();
        write_fits_csv(&mut buf, &[fit]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("A1,B1,"));
        assert!(text.lines().nth(1).unwrap().starts_with("0.3,2,"));
    }

    #[test]
    fn json_field_names() {
        let shot = LatticeShot::uniform(vec![0.0, 1.0]).unwrap();
        let text = to_json(&shot).unwrap();
        for key in ["site_count", "amplitudes", "phases"] {
            assert!(text.contains(key));
        }
        assert!(from_json::<LatticeShot<f64>>(r#"{"site_count":1,"amplitudes":[1],"phases":[0],"extra":1}"#).is_err());
    }

    proptest! {
        #[test]
        fn shot_json_round_trip(phases in proptest::collection::vec(0.0f64..std::f64::consts::TAU, 2..40),
                                scale in 0.1f64..10.0) {
            let amps: Vec<f64> = (0..phases.len()).map(|i| scale * (1.0 + i as f64)).collect();
            let shot = LatticeShot::new(amps, phases).unwrap();
            let back: LatticeShot<f64> = from_json(&to_json(&shot).unwrap()).unwrap();
            prop_assert_eq!(back, shot);
        }

        #[test]
        fn fit_json_round_trip(a in 0.0f64..1.5, b in 0.0f64..std::f64::consts::TAU, w in 1e-6f64..1e-3, it in 0usize..500) {
            let fit = FringeFit {
                amplitude: a, phase: b, fitted_period: 3.7e-5,
                envelope: GaussianEnvelope { height: 2.5, center: -1e-6, width: w },
                residual_rms: a * 1e-3, converged: it % 2 == 0, iterations: it, phase_uncertain: a < 0.01,
            };
            let back: FringeFit<f64> = from_json(&to_json(&fit).unwrap()).unwrap();
            prop_assert_eq!(back, fit);
        }
    }
}
