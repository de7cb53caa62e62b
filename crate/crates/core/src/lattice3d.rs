//! Three-dimensional lattices: harmonic content of `F(r)`, its extrema and
//! the pattern seen after integrating along a line of sight.
//!
//! `F(r) = 1 + Σ_n A_n cos(B_n + 2π n·r / D)` with one lag vector per `±n`
//! pair and a single period `D` on every axis (cubic lattice).

use num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::density::{golden_section, phasors, GridSpec};
use crate::error::{Error, Result};
use crate::model::Lattice3DShot;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic3D<T = f64> {
    pub lag: [i64; 3],
    pub amplitude: T,
    pub phase: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    /// The two remaining axes, in increasing order.
    pub fn transverse(self) -> [usize; 2] {
        match self {
            Axis::X => [1, 2],
            Axis::Y => [0, 2],
            Axis::Z => [0, 1],
        }
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            other => Err(Error::InvalidParameter(format!("unknown axis {other:?}"))),
        }
    }
}

/// In-place multidimensional FFT over a row-major buffer (last axis fastest).
fn fft_nd<T: Real>(buf: &mut [Complex<T>], dims: [usize; 3], inverse: bool, planner: &mut FftPlanner<T>) {
    let strides = [dims[1] * dims[2], dims[2], 1];
    for axis in 0..3 {
        let len = dims[axis];
        if len == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(len)
        } else {
            planner.plan_fft_forward(len)
        };
        let stride = strides[axis];
        let mut line = vec![Complex::new(T::zero(), T::zero()); len];
        let total: usize = dims.iter().product();
        for start in 0..total {
            // visit each line once: start has zero coordinate along `axis`
            if (start / stride) % len != 0 {
                continue;
            }
            for (k, v) in line.iter_mut().enumerate() {
                *v = buf[start + k * stride];
            }
            fft.process(&mut line);
            for (k, v) in line.iter().enumerate() {
                buf[start + k * stride] = *v;
            }
        }
    }
}

/// Dense autocorrelation `r(n) = Σ_j c_{j+n} c_j*` over the full lag box.
/// Returned buffer has shape `2N_a` per axis with negative lags wrapped.
struct Autocorrelation<T> {
    values: Vec<Complex<T>>,
    padded: [usize; 3],
}

impl<T: Real> Autocorrelation<T> {
    fn compute(c: &[Complex<T>], dims: [usize; 3], planner: &mut FftPlanner<T>) -> Self {
        let padded = [2 * dims[0], 2 * dims[1], 2 * dims[2]];
        let mut buf = vec![Complex::new(T::zero(), T::zero()); padded.iter().product()];
        for ix in 0..dims[0] {
            for iy in 0..dims[1] {
                for iz in 0..dims[2] {
                    buf[(ix * padded[1] + iy) * padded[2] + iz] = c[(ix * dims[1] + iy) * dims[2] + iz];
                }
            }
        }
        fft_nd(&mut buf, padded, false, planner);
        for v in buf.iter_mut() {
            *v = Complex::new(v.norm_sqr(), T::zero());
        }
        fft_nd(&mut buf, padded, true, planner);
        let scale = T::one() / T::from_usize_lossy(buf.len());
        for v in buf.iter_mut() {
            *v = *v * scale;
        }
        Self { values: buf, padded }
    }

    fn at(&self, lag: [i64; 3]) -> Complex<T> {
        let wrap = |n: i64, len: usize| n.rem_euclid(len as i64) as usize;
        let i = wrap(lag[0], self.padded[0]);
        let j = wrap(lag[1], self.padded[1]);
        let k = wrap(lag[2], self.padded[2]);
        self.values[(i * self.padded[1] + j) * self.padded[2] + k]
    }
}

/// True for the representative of each `±n` pair: first nonzero component positive.
fn is_representative(lag: &[i64]) -> bool {
    lag.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0)
}

fn lag_range(n: usize) -> std::ops::RangeInclusive<i64> {
    -(n as i64 - 1)..=(n as i64 - 1)
}

fn amplitude_norm<T: Real>(shot: &Lattice3DShot<T>) -> Result<T> {
    shot.check()?;
    let norm: T = shot.amplitudes.iter().map(|&a| a * a).sum();
    if !(norm > T::zero()) {
        return Err(Error::Degenerate("all amplitudes are zero".into()));
    }
    Ok(norm)
}

/// Harmonics of the 3D contrast function,
/// `A_n e^{iB_n} = 2 Σ_j α_{j+n} α_j e^{i(φ_{j+n} − φ_j)} / Σ_j α_j²`.
pub fn harmonics_3d<T: Real>(shot: &Lattice3DShot<T>) -> Result<Vec<Harmonic3D<T>>> {
    let norm = amplitude_norm(shot)?;
    let c = phasors(&shot.amplitudes, &shot.phases);
    let mut planner = FftPlanner::new();
    let ac = Autocorrelation::compute(&c, shot.dims, &mut planner);
    let scale = T::lit(2.0) / norm;
    let mut out = Vec::new();
    for nx in lag_range(shot.dims[0]) {
        for ny in lag_range(shot.dims[1]) {
            for nz in lag_range(shot.dims[2]) {
                let lag = [nx, ny, nz];
                if !is_representative(&lag) {
                    continue;
                }
                let s = ac.at(lag) * scale;
                out.push(Harmonic3D {
                    lag,
                    amplitude: s.norm().min(T::lit(2.0)),
                    phase: s.arg().wrap_phase(),
                });
            }
        }
    }
    Ok(out)
}

/// `F(r)` from a harmonic list; `r` in metres, `period` = D.
pub fn f_value_3d<T: Real>(harmonics: &[Harmonic3D<T>], r: [T; 3], period: T) -> T {
    let k = T::TAU() / period;
    T::one()
        + harmonics
            .iter()
            .map(|h| {
                let dot = (0..3)
                    .map(|a| T::from_i64(h.lag[a]).expect("lag fits") * r[a])
                    .sum::<T>();
                h.amplitude * (h.phase + k * dot).cos()
            })
            .sum::<T>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrema3D<T = f64> {
    pub max: T,
    pub min: T,
    /// Position of the maximum in units of the period.
    pub at_max: [T; 3],
    pub at_min: [T; 3],
}

/// Separable phasor field `E(r) = Σ_j c_j e^{2πi j·r}` with `r` in periods.
struct PhasorField<'a, T> {
    c: &'a [Complex<T>],
    dims: [usize; 3],
    norm: T,
}

impl<T: Real> PhasorField<'_, T> {
    fn f(&self, r: [T; 3]) -> T {
        let axis_phases = |a: usize| -> Vec<Complex<T>> {
            (0..self.dims[a])
                .map(|j| Complex::from_polar(T::one(), T::TAU() * T::from_usize_lossy(j) * r[a]))
                .collect()
        };
        let (px, py, pz) = (axis_phases(0), axis_phases(1), axis_phases(2));
        let mut total = Complex::new(T::zero(), T::zero());
        for ix in 0..self.dims[0] {
            for iy in 0..self.dims[1] {
                let base = (ix * self.dims[1] + iy) * self.dims[2];
                let mut line = Complex::new(T::zero(), T::zero());
                for iz in 0..self.dims[2] {
                    line = line + self.c[base + iz] * pz[iz];
                }
                total = total + line * px[ix] * py[iy];
            }
        }
        total.norm_sqr() / self.norm
    }
}

/// Maximum and minimum of `F(r)` over one unit cell.
///
/// Samples `oversample · N_a` points per axis with one FFT, then refines the
/// best candidates by cyclic golden-section line searches.
pub fn f_extrema_3d<T: Real>(shot: &Lattice3DShot<T>, oversample: usize) -> Result<Extrema3D<T>> {
    if oversample < 2 {
        return Err(Error::Undersampled("oversample must be at least 2".into()));
    }
    let norm = amplitude_norm(shot)?;
    let c = phasors(&shot.amplitudes, &shot.phases);
    let dims = shot.dims;
    let grid = [oversample * dims[0], oversample * dims[1], oversample * dims[2]];
    let mut buf = vec![Complex::new(T::zero(), T::zero()); grid.iter().product()];
    for ix in 0..dims[0] {
        for iy in 0..dims[1] {
            for iz in 0..dims[2] {
                buf[(ix * grid[1] + iy) * grid[2] + iz] = c[shot.index(ix, iy, iz)];
            }
        }
    }
    let mut planner = FftPlanner::new();
    fft_nd(&mut buf, grid, true, &mut planner);
    let samples: Vec<T> = buf.iter().map(|v| v.norm_sqr() / norm).collect();

    let field = PhasorField { c: &c, dims, norm };
    let (max, at_max) = refine_3d(&field, &samples, grid, true);
    let (min, at_min) = refine_3d(&field, &samples, grid, false);
    Ok(Extrema3D { max, min, at_max, at_min })
}

const CANDIDATES_3D: usize = 4;
const SWEEPS_3D: usize = 8;

fn refine_3d<T: Real>(field: &PhasorField<'_, T>, samples: &[T], grid: [usize; 3], maximize: bool) -> (T, [T; 3]) {
    let sign = if maximize { T::one() } else { -T::one() };
    let mut order: Vec<usize> = (0..samples.len()).collect();
    let k = CANDIDATES_3D.min(order.len());
    order.select_nth_unstable_by(k - 1, |&a, &b| {
        (sign * samples[b])
            .partial_cmp(&(sign * samples[a]))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    order.truncate(k);
    order.sort_unstable();

    let step = [0, 1, 2].map(|a| T::one() / T::from_usize_lossy(grid[a]));
    let mut best: Option<(T, [T; 3])> = None;
    for idx in order {
        let coords = [idx / (grid[1] * grid[2]), (idx / grid[2]) % grid[1], idx % grid[2]];
        let mut r = [0, 1, 2].map(|a| T::from_usize_lossy(coords[a]) * step[a]);
        let mut value = sign * samples[idx];
        let mut half = T::one();
        for _ in 0..SWEEPS_3D {
            for a in 0..3 {
                let h = half * step[a];
                let center = r[a];
                let (x, v) = golden_section(
                    |x| {
                        let mut p = r;
                        p[a] = x;
                        sign * field.f(p)
                    },
                    center - h,
                    center + h,
                    T::lit(1e-9),
                );
                if v > value {
                    value = v;
                    r[a] = x;
                }
            }
            half = half * T::lit(0.5);
        }
        let v = sign * value;
        if best.is_none_or(|(bv, _)| sign * v > sign * bv) {
            best = Some((v, r));
        }
    }
    best.expect("at least one candidate")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic2D<T = f64> {
    pub lag: [i64; 2],
    pub amplitude: T,
    pub phase: T,
}

/// Harmonics that survive integration along `axis`: lag vectors with a zero
/// component on that axis, built from phasor sums averaged over the layers.
pub fn line_of_sight_spectrum<T: Real>(shot: &Lattice3DShot<T>, axis: Axis) -> Result<Vec<Harmonic2D<T>>> {
    let norm = amplitude_norm(shot)?;
    let along = axis.index();
    let [ua, va] = axis.transverse();
    let layer_dims = [shot.dims[ua], shot.dims[va], 1];
    let mut planner = FftPlanner::new();
    let mut summed: Option<Vec<Complex<T>>> = None;
    let mut padded = [0; 3];
    for layer in 0..shot.dims[along] {
        let mut c = Vec::with_capacity(layer_dims[0] * layer_dims[1]);
        for iu in 0..layer_dims[0] {
            for iv in 0..layer_dims[1] {
                let mut site = [0; 3];
                site[along] = layer;
                site[ua] = iu;
                site[va] = iv;
                let i = shot.index(site[0], site[1], site[2]);
                c.push(Complex::from_polar(shot.amplitudes[i], shot.phases[i]));
            }
        }
        let ac = Autocorrelation::compute(&c, layer_dims, &mut planner);
        padded = ac.padded;
        match summed.as_mut() {
            None => summed = Some(ac.values),
            Some(acc) => {
                for (a, b) in acc.iter_mut().zip(&ac.values) {
                    *a = *a + *b;
                }
            }
        }
    }
    let total = Autocorrelation { values: summed.expect("at least one layer"), padded };
    let scale = T::lit(2.0) / norm;
    let mut out = Vec::new();
    for nu in lag_range(layer_dims[0]) {
        for nv in lag_range(layer_dims[1]) {
            if !is_representative(&[nu, nv]) {
                continue;
            }
            let s = total.at([nu, nv, 0]) * scale;
            out.push(Harmonic2D {
                lag: [nu, nv],
                amplitude: s.norm().min(T::lit(2.0)),
                phase: s.arg().wrap_phase(),
            });
        }
    }
    Ok(out)
}

/// Sampled 2D field, row-major with `u` as the slow index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field2D<T = f64> {
    pub u_grid: Vec<T>,
    pub v_grid: Vec<T>,
    pub values: Vec<T>,
}

impl<T: Real> Field2D<T> {
    pub fn at(&self, iu: usize, iv: usize) -> T {
        self.values[iu * self.v_grid.len() + iv]
    }
}

pub fn f_value_2d<T: Real>(harmonics: &[Harmonic2D<T>], u: T, v: T, period: T) -> T {
    let k = T::TAU() / period;
    T::one()
        + harmonics
            .iter()
            .map(|h| {
                let dot = T::from_i64(h.lag[0]).expect("lag fits") * u + T::from_i64(h.lag[1]).expect("lag fits") * v;
                h.amplitude * (h.phase + k * dot).cos()
            })
            .sum::<T>()
}

/// `F` integrated along `axis` and normalized by the number of layers,
/// sampled on the transverse grid (`u`, `v` are the remaining axes in
/// increasing order).
pub fn integrate_line_of_sight<T: Real>(
    shot: &Lattice3DShot<T>,
    axis: Axis,
    grid_u: &GridSpec<T>,
    grid_v: &GridSpec<T>,
    period: T,
) -> Result<Field2D<T>> {
    grid_u.check()?;
    grid_v.check()?;
    let harmonics = line_of_sight_spectrum(shot, axis)?;
    let u_grid = grid_u.points();
    let v_grid = grid_v.points();
    let mut values = Vec::with_capacity(u_grid.len() * v_grid.len());
    for &u in &u_grid {
        for &v in &v_grid {
            values.push(f_value_2d(&harmonics, u, v, period));
        }
    }
    Ok(Field2D { u_grid, v_grid, values })
}
