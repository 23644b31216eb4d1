//! Point-source recovery from trigonometric moments and Monte-Carlo
//! density estimation on the circle.
//!
//! For a measure `Σ a_k δ_{ω_k}` the moments are `μ̂(ℓ) = Σ a_k e^{-iω_k ℓ}`,
//! and the reconstruction `σ_n(x) = Σ_{|ℓ|<n} h(ℓ/n) μ̂(ℓ) e^{iℓx}` equals
//! `Σ a_k Φ_n(x - ω_k)`. Peaks of `|σ_n|` sit at the source locations.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::LocalizedKernel;

/// Grid points per unit of degree used when no grid is supplied.
pub const GRID_POINTS_PER_DEGREE: usize = 32;

/// Fraction of the spectrum maximum used when source amplitudes are unknown.
pub const DEFAULT_RELATIVE_THRESHOLD: f64 = 0.1;

/// Moments `μ̂(ℓ)` for `ℓ = -(n-1) ..= n-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSequence {
    degree: usize,
    values: Vec<Complex64>,
}

impl MomentSequence {
    /// `values[0]` holds `μ̂(-(n-1))`.
    pub fn new(degree: usize, values: Vec<Complex64>) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Domain("moment degree must be positive".into()));
        }
        if values.len() != 2 * degree - 1 {
            return Err(Error::Dimension {
                expected: 2 * degree - 1,
                got: values.len(),
            });
        }
        Ok(Self { degree, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn get(&self, l: i64) -> Complex64 {
        self.values[(l + self.degree as i64 - 1) as usize]
    }

    /// `(ℓ, μ̂(ℓ))` in increasing `ℓ`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        let off = self.degree as i64 - 1;
        self.values
            .iter()
            .enumerate()
            .map(move |(i, v)| (i as i64 - off, *v))
    }

    /// Largest `|μ̂(-ℓ) - conj(μ̂(ℓ))|`; zero for a real measure.
    pub fn hermitian_defect(&self) -> f64 {
        (0..self.degree as i64)
            .map(|l| (self.get(-l) - self.get(l).conj()).norm())
            .fold(0.0, f64::max)
    }
}

/// `Σ a_k δ_{ω_k}` with locations in `[-π, π)`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PointSourceModel {
    locations: Vec<f64>,
    amplitudes: Vec<f64>,
}

impl PointSourceModel {
    pub fn new(sources: &[(f64, f64)]) -> Result<Self> {
        let mut locations = Vec::with_capacity(sources.len());
        let mut amplitudes = Vec::with_capacity(sources.len());
        for &(a, w) in sources {
            if !a.is_finite() || !w.is_finite() {
                return Err(Error::Domain("non-finite source".into()));
            }
            let w = wrap(w);
            if locations.iter().any(|&o| circle_distance(o, w) < 1e-12) {
                return Err(Error::Domain(format!("duplicate source location {w}")));
            }
            locations.push(w);
            amplitudes.push(a);
        }
        Ok(Self {
            locations,
            amplitudes,
        })
    }

    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.amplitudes.iter().copied().zip(self.locations.iter().copied())
    }

    /// Minimal pairwise separation modulo 2π, `None` below two sources.
    pub fn separation(&self) -> Option<f64> {
        let mut best: Option<f64> = None;
        for (i, &a) in self.locations.iter().enumerate() {
            for &b in &self.locations[i + 1..] {
                let d = circle_distance(a, b);
                best = Some(best.map_or(d, |x| x.min(d)));
            }
        }
        best
    }

    /// `Σ a_k Φ_n(x - ω_k)`.
    pub fn convolve(&self, kernel: &LocalizedKernel, x: f64) -> f64 {
        self.sources().map(|(a, w)| a * kernel.phi(x - w)).sum()
    }
}

/// Map an angle into `[-π, π)`.
pub fn wrap(t: f64) -> f64 {
    let r = (t + PI).rem_euclid(TAU) - PI;
    if r >= PI {
        -PI
    } else {
        r
    }
}

pub fn circle_distance(a: f64, b: f64) -> f64 {
    wrap(a - b).abs()
}

/// `len` uniform points `-π + 2πi/len`.
pub fn uniform_grid(len: usize) -> Vec<f64> {
    (0..len).map(|i| -PI + TAU * i as f64 / len as f64).collect()
}

pub fn default_grid(degree: usize) -> Vec<f64> {
    uniform_grid(GRID_POINTS_PER_DEGREE * degree.max(1))
}

/// `|σ_n|` on a grid. `scale` is `Φ_n(0)`: a unit point mass peaks at
/// `scale`, so `value / scale` reads in amplitude units.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub scale: f64,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Values divided by `Φ_n(0)`.
    pub fn normalized(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().map(move |v| v / self.scale)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeakSet {
    pub locations: Vec<f64>,
    pub heights: Vec<f64>,
    pub threshold: f64,
}

impl PeakSet {
    pub fn len(&self) -> usize {
        self.locations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.locations.is_empty()
    }
}

pub fn moments_from_sources(model: &PointSourceModel, degree: usize) -> Result<MomentSequence> {
    if degree == 0 {
        return Err(Error::Domain("moment degree must be positive".into()));
    }
    let n = degree as i64;
    let values = (-(n - 1)..n)
        .map(|l| {
            model
                .sources()
                .map(|(a, w)| Complex64::from_polar(a, -w * l as f64))
                .sum()
        })
        .collect();
    MomentSequence::new(degree, values)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.iter().position(|x| !(-PI..PI).contains(x)) {
        Some(i) => Err(Error::Domain(format!(
            "grid point {i} = {} outside [-π, π)",
            grid[i]
        ))),
        None => Ok(()),
    }
}

/// `|Σ_{|ℓ|<n} h(ℓ/n) μ̂(ℓ) e^{iℓx}|` at each grid point.
pub fn reconstruct_spectrum(
    moments: &MomentSequence,
    kernel: &LocalizedKernel,
    grid: &[f64],
) -> Result<Spectrum> {
    check_grid(grid)?;
    if kernel.degree() != moments.degree() {
        return Err(Error::Domain(format!(
            "kernel degree {} does not match moment degree {}",
            kernel.degree(),
            moments.degree()
        )));
    }
    let weights = kernel.weights();
    let coeffs: Vec<(f64, Complex64)> = moments
        .iter()
        .map(|(l, m)| (l as f64, m * weights[l.unsigned_abs() as usize]))
        .collect();
    let values = grid
        .par_iter()
        .map(|&x| {
            coeffs
                .iter()
                .map(|&(l, c)| c * Complex64::from_polar(1.0, l * x))
                .sum::<Complex64>()
                .norm()
        })
        .collect();
    Ok(Spectrum {
        grid: grid.to_vec(),
        values,
        scale: kernel.phi_at_zero(),
    })
}

/// `|(1/M) Σ_j Φ_n(t - u_j)|`, the Monte-Carlo estimate of `σ_n`.
pub fn empirical_sigma(samples: &[f64], kernel: &LocalizedKernel, grid: &[f64]) -> Result<Spectrum> {
    if samples.is_empty() {
        return Err(Error::NoSamples);
    }
    check_grid(grid)?;
    let m = samples.len() as f64;
    let values = grid
        .par_iter()
        .map(|&t| (samples.iter().map(|&u| kernel.phi(t - u)).sum::<f64>() / m).abs())
        .collect();
    Ok(Spectrum {
        grid: grid.to_vec(),
        values,
        scale: kernel.phi_at_zero(),
    })
}

/// Local maxima of the spectrum whose normalized height (`value / Φ_n(0)`)
/// reaches `threshold`. Neighbors wrap around the circle; a flat-topped
/// maximum is reported once, at the middle of its plateau.
pub fn detect_peaks(spectrum: &Spectrum, threshold: f64) -> Result<PeakSet> {
    if !(threshold > 0.0) {
        return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
    }
    let v: Vec<f64> = spectrum.normalized().collect();
    let len = v.len();
    let mut peaks = PeakSet {
        locations: Vec::new(),
        heights: Vec::new(),
        threshold,
    };
    if len < 3 {
        return Ok(peaks);
    }
    for i in 0..len {
        let prev = v[(i + len - 1) % len];
        if !(v[i] >= threshold && v[i] > prev) {
            continue;
        }
        // walk the plateau
        let mut run = 0;
        while run + 1 < len && v[(i + run + 1) % len] == v[i] {
            run += 1;
        }
        if v[(i + run + 1) % len] < v[i] {
            let mid = (i + run / 2) % len;
            peaks.locations.push(spectrum.grid[mid]);
            peaks.heights.push(v[mid]);
        }
    }
    Ok(peaks)
}

/// Threshold at [`DEFAULT_RELATIVE_THRESHOLD`] of the normalized maximum.
pub fn default_threshold(spectrum: &Spectrum) -> f64 {
    DEFAULT_RELATIVE_THRESHOLD * spectrum.max() / spectrum.scale
}
