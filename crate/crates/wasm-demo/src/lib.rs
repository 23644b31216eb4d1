//! wasm-bindgen exports for the static demo page in `www/`.
//!
//! Each export is a thin wrapper over a plain Rust function so the logic is
//! testable natively; `JsError` only exists on the wasm side.

use masc_core::experiment::{prepare, KernelEval, Toggle};
use masc_core::masc::{GroundTruth, LabelSource};
use masc_core::preprocess::Preprocess;
use masc_core::signal::{self, PointSourceModel};
use masc_core::synth::two_moons;
use masc_core::{classify, compute_field, metrics, DistanceProvider, LocalizedKernel, MascConfig, PointCloud, Result};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct SpectrumView {
    grid: Vec<f64>,
    values: Vec<f64>,
    peak_x: Vec<f64>,
    peak_h: Vec<f64>,
}

#[wasm_bindgen]
impl SpectrumView {
    pub fn grid(&self) -> Vec<f64> {
        self.grid.clone()
    }

    /// `|σ_n| / Φ_n(0)`, in amplitude units.
    pub fn values(&self) -> Vec<f64> {
        self.values.clone()
    }

    pub fn peak_x(&self) -> Vec<f64> {
        self.peak_x.clone()
    }

    pub fn peak_h(&self) -> Vec<f64> {
        self.peak_h.clone()
    }
}

pub fn spectrum_view(locations: &[f64], amplitudes: &[f64], degree: usize, threshold: f64) -> Result<SpectrumView> {
    if locations.len() != amplitudes.len() {
        return Err(masc_core::Error::LengthMismatch(locations.len(), amplitudes.len()));
    }
    let pairs: Vec<(f64, f64)> = amplitudes.iter().copied().zip(locations.iter().copied()).collect();
    let model = PointSourceModel::new(&pairs)?;
    let moments = signal::moments_from_sources(&model, degree)?;
    let kernel = LocalizedKernel::new(degree);
    let s = signal::reconstruct_spectrum(&moments, &kernel, &signal::default_grid(degree))?;
    let peaks = signal::detect_peaks(&s, threshold)?;
    Ok(SpectrumView {
        values: s.normalized().collect(),
        grid: s.grid,
        peak_x: peaks.locations,
        peak_h: peaks.heights,
    })
}

#[wasm_bindgen]
pub fn spectrum(locations: &[f64], amplitudes: &[f64], degree: usize, threshold: f64) -> Result<SpectrumView, JsError> {
    spectrum_view(locations, amplitudes, degree, threshold).map_err(js)
}

#[wasm_bindgen]
pub struct FieldView {
    field: Vec<f64>,
    mask: Vec<u8>,
}

#[wasm_bindgen]
impl FieldView {
    /// `F_n` divided by its maximum.
    pub fn field(&self) -> Vec<f64> {
        self.field.clone()
    }

    /// 1 for points in the threshold set.
    pub fn mask(&self) -> Vec<u8> {
        self.mask.clone()
    }
}

/// Support field of planar points given as `[x0, y0, x1, y1, ...]`.
pub fn field_view(xy: &[f64], degree: usize, theta: f64) -> Result<FieldView> {
    let cloud = PointCloud::new(2, xy.to_vec())?;
    let provider = DistanceProvider::embed(&cloud, &Default::default())?;
    let field = compute_field(&provider, &LocalizedKernel::new(degree));
    let mask = field.threshold_mask(theta)?.into_iter().map(u8::from).collect();
    let max = field.max();
    Ok(FieldView {
        field: field.values().iter().map(|v| v / max).collect(),
        mask,
    })
}

#[wasm_bindgen]
pub fn support(xy: &[f64], degree: usize, theta: f64) -> Result<FieldView, JsError> {
    field_view(xy, degree, theta).map_err(js)
}

#[wasm_bindgen]
pub struct MascView {
    points: Vec<f64>,
    truth: Vec<u32>,
    labels: Vec<u32>,
    sources: Vec<u8>,
    queries: Vec<u32>,
    accuracy: f64,
    eta: f64,
}

#[wasm_bindgen]
impl MascView {
    pub fn points(&self) -> Vec<f64> {
        self.points.clone()
    }

    pub fn truth(&self) -> Vec<u32> {
        self.truth.clone()
    }

    pub fn labels(&self) -> Vec<u32> {
        self.labels.clone()
    }

    /// 0 queried, 1 extended, 2 nearest-neighbor vote.
    pub fn sources(&self) -> Vec<u8> {
        self.sources.clone()
    }

    /// Queried point ids in query order.
    pub fn queries(&self) -> Vec<u32> {
        self.queries.clone()
    }

    pub fn accuracy(&self) -> f64 {
        self.accuracy
    }

    /// Scale at which the loop stopped.
    pub fn eta(&self) -> f64 {
        self.eta
    }
}

pub struct MoonsParams {
    pub m: usize,
    pub noise: f64,
    pub seed: u64,
    pub degree: usize,
    pub theta: f64,
    pub eta_start: f64,
    pub eta_step: f64,
    pub min_component: usize,
    pub neighbors: usize,
}

pub fn moons_view(p: &MoonsParams) -> Result<MascView> {
    let data = two_moons(p.m, p.noise, p.seed);
    let truth = data.truth.clone().expect("two-moons is labeled");
    let points = data.cloud.as_slice().to_vec();
    let config = MascConfig {
        degree: p.degree,
        theta: p.theta,
        eta_start: p.eta_start,
        eta_step: p.eta_step,
        min_component: p.min_component,
        neighbors: p.neighbors,
        ..Default::default()
    };
    let prepared = prepare(
        data,
        Preprocess::None,
        &Default::default(),
        Toggle::Off,
        KernelEval::Auto,
        p.degree,
    )?;
    let r = classify(&config, &prepared.provider, &prepared.field, &mut GroundTruth::new(&truth))?;
    Ok(MascView {
        points,
        accuracy: metrics::accuracy(&r.labels.labels, &truth)?,
        truth,
        sources: r
            .labels
            .sources
            .iter()
            .map(|s| match s {
                LabelSource::Queried => 0,
                LabelSource::Extended => 1,
                LabelSource::Knn => 2,
            })
            .collect(),
        labels: r.labels.labels,
        queries: r.state.log.iter().map(|q| q.point as u32).collect(),
        eta: r.state.eta,
    })
}

#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn masc_two_moons(
    m: usize,
    noise: f64,
    seed: u32,
    degree: usize,
    theta: f64,
    eta_start: f64,
    eta_step: f64,
    min_component: usize,
    neighbors: usize,
) -> Result<MascView, JsError> {
    moons_view(&MoonsParams {
        m,
        noise,
        seed: seed.into(),
        degree,
        theta,
        eta_start,
        eta_step,
        min_component,
        neighbors,
    })
    .map_err(js)
}

fn js(e: masc_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_finds_the_sources() {
        let v = spectrum_view(&[-1.0, 0.5, 2.0], &[1.0, 0.7, 0.9], 64, 0.4).unwrap();
        assert_eq!(v.grid().len(), v.values().len());
        assert_eq!(v.peak_x().len(), 3);
        for (x, want) in v.peak_x().iter().zip([-1.0, 0.5, 2.0]) {
            assert!((x - want).abs() < 0.01, "{x}");
        }
        for (h, want) in v.peak_h().iter().zip([1.0, 0.7, 0.9]) {
            assert!((h - want).abs() < 0.01, "{h}");
        }
    }

    #[test]
    fn spectrum_rejects_mismatched_inputs() {
        assert!(spectrum_view(&[0.0, 1.0], &[1.0], 16, 0.5).is_err());
        assert!(spectrum_view(&[0.0], &[1.0], 16, 0.0).is_err());
    }

    #[test]
    fn field_marks_dense_points() {
        // a tight cluster plus one far outlier
        let mut xy = Vec::new();
        for i in 0..50 {
            let t = i as f64 * 0.1;
            xy.extend([0.05 * t.cos(), 0.05 * t.sin()]);
        }
        xy.extend([1.0, 1.0]);
        let v = field_view(&xy, 16, 0.5).unwrap();
        let f = v.field();
        let max = f.iter().copied().fold(0.0, f64::max);
        assert!((max - 1.0).abs() < 1e-12);
        let mask = v.mask();
        assert!(mask[..50].iter().all(|&b| b == 1));
        assert_eq!(mask[50], 0);
        assert!(field_view(&[0.0, 0.0, 1.0], 16, 0.5).is_err());
    }

    #[test]
    fn two_moons_demo_defaults() {
        let v = moons_view(&MoonsParams {
            m: 400,
            noise: 0.05,
            seed: 7,
            degree: 32,
            theta: 0.15,
            eta_start: 0.1,
            eta_step: 0.01,
            min_component: 5,
            neighbors: 5,
        })
        .unwrap();
        assert_eq!(v.points().len(), 800);
        assert_eq!(v.labels().len(), 400);
        assert!(v.accuracy() > 0.95, "{}", v.accuracy());
        let q = v.queries();
        assert!(!q.is_empty() && q.len() <= 10, "{q:?} {}", v.eta());
        for id in q {
            assert_eq!(v.sources()[id as usize], 0);
        }
    }
}
