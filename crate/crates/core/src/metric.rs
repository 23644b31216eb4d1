//! Point clouds, the two diameter-π embeddings and pairwise distance access.
//!
//! Every distance handed to the kernels lies in `[0, π]`. Euclidean data is
//! either rescaled so its diameter becomes π, or lifted onto the unit sphere
//! with an inverse stereographic projection and measured by arc length.

use std::f64::consts::PI;
use std::ops::Range;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this many points the exact diameter pass is replaced by the
/// centroid bound `2 max |x - c|`.
pub const EXACT_DIAMETER_LIMIT: usize = 30_000;

/// Row-major `M x q` matrix of finite coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl PointCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 || data.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension {
                expected: dim,
                got: data.len() % dim,
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / dim,
                col: pos % dim,
            });
        }
        Ok(Self { dim, data })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(dim, data)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// First two columns, or the first column and zero for 1-D data.
    pub fn planar(&self) -> Vec<[f64; 2]> {
        self.rows()
            .map(|r| [r[0], r.get(1).copied().unwrap_or(0.0)])
            .collect()
    }

    pub(crate) fn map_rows(&self, dim: usize, f: impl Fn(&[f64], &mut [f64])) -> Self {
        let mut data = vec![0.0; self.len() * dim];
        for (src, dst) in self.rows().zip(data.chunks_exact_mut(dim)) {
            f(src, dst);
        }
        Self { dim, data }
    }
}

#[inline]
pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Arc length between two unit vectors.
#[inline]
pub fn geodesic(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    dot.clamp(-1.0, 1.0).acos()
}

/// Exact diameter by a full pairwise pass.
pub fn diameter(cloud: &PointCloud) -> f64 {
    let m = cloud.len();
    (0..m)
        .into_par_iter()
        .map(|i| {
            let a = cloud.row(i);
            (i + 1..m).fold(0.0f64, |acc, j| acc.max(euclidean(a, cloud.row(j))))
        })
        .reduce(|| 0.0, f64::max)
}

/// `2 max_i |x_i - centroid|`, an upper bound on the diameter.
pub fn diameter_bound(cloud: &PointCloud) -> f64 {
    let m = cloud.len() as f64;
    let mut centroid = vec![0.0; cloud.dim()];
    for r in cloud.rows() {
        for (c, v) in centroid.iter_mut().zip(r) {
            *c += v;
        }
    }
    centroid.iter_mut().for_each(|c| *c /= m);
    2.0 * cloud
        .rows()
        .map(|r| euclidean(r, &centroid))
        .fold(0.0, f64::max)
}

/// Scale a cloud so that its Euclidean diameter becomes π.
///
/// Returns the rescaled cloud and the diameter measured before scaling.
/// Clouds above [`EXACT_DIAMETER_LIMIT`] use the centroid bound, so their
/// diameter ends up at most π.
pub fn rescale_to_pi(cloud: &PointCloud) -> Result<(PointCloud, f64)> {
    if cloud.len() < 2 {
        return Err(Error::DegenerateCloud);
    }
    let d = if cloud.len() <= EXACT_DIAMETER_LIMIT {
        diameter(cloud)
    } else {
        diameter_bound(cloud)
    };
    if d <= 0.0 {
        return Err(Error::DegenerateCloud);
    }
    let s = PI / d;
    let scaled = cloud.map_rows(cloud.dim(), |src, dst| {
        for (o, v) in dst.iter_mut().zip(src) {
            *o = v * s;
        }
    });
    Ok((scaled, d))
}

/// Lift `R^q` onto the unit sphere in `R^{q+1}`:
/// `u = (2 s x, |s x|^2 - 1) / (|s x|^2 + 1)`. The origin maps to the south pole.
pub fn inverse_stereographic(cloud: &PointCloud, scale: f64) -> Result<PointCloud> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("sphere scale must be positive, got {scale}")));
    }
    let q = cloud.dim();
    Ok(cloud.map_rows(q + 1, |x, u| {
        let r2: f64 = x.iter().map(|v| (scale * v) * (scale * v)).sum();
        let denom = r2 + 1.0;
        for (o, v) in u[..q].iter_mut().zip(x) {
            *o = 2.0 * scale * v / denom;
        }
        u[q] = (r2 - 1.0) / denom;
    }))
}

/// Scale that puts the median point norm on the unit circle, i.e. the
/// sphere's equator. Falls back to 1 when the median norm is zero.
pub fn median_sphere_scale(cloud: &PointCloud) -> f64 {
    let mut norms: Vec<f64> = cloud
        .rows()
        .map(|r| r.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    norms.sort_by(f64::total_cmp);
    let mid = norms.len() / 2;
    let median = if norms.len() % 2 == 1 {
        norms[mid]
    } else {
        0.5 * (norms[mid - 1] + norms[mid])
    };
    if median > 0.0 {
        1.0 / median
    } else {
        1.0
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricMode {
    #[default]
    EuclideanRescaled,
    SphereGeodesic,
    Precomputed,
}

impl std::str::FromStr for MetricMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean-rescaled" | "euclidean" | "rescale" => Ok(Self::EuclideanRescaled),
            "sphere-geodesic" | "sphere" => Ok(Self::SphereGeodesic),
            "precomputed" => Ok(Self::Precomputed),
            other => Err(Error::Config(format!("unknown metric mode `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MetricConfig {
    pub mode: MetricMode,
    /// Stereographic scale; `None` means the median rule.
    pub sphere_scale: Option<f64>,
}

#[derive(Clone, Debug)]
enum Geometry {
    Euclidean(PointCloud),
    Sphere(PointCloud),
    Matrix { m: usize, values: Arc<Vec<f64>> },
}

/// Blockwise access to `ρ(x_i, x_j)`, optionally backed by a frozen
/// condensed cache stored at 32-bit precision.
#[derive(Clone, Debug)]
pub struct DistanceProvider {
    geometry: Geometry,
    cache: Option<Arc<Vec<f32>>>,
}

impl DistanceProvider {
    /// Embed a cloud according to `config`. `Precomputed` is rejected here;
    /// use [`DistanceProvider::precomputed`].
    pub fn embed(cloud: &PointCloud, config: &MetricConfig) -> Result<Self> {
        match config.mode {
            MetricMode::EuclideanRescaled => {
                let (scaled, _) = rescale_to_pi(cloud)?;
                Ok(Self::euclidean(scaled))
            }
            MetricMode::SphereGeodesic => {
                let s = config
                    .sphere_scale
                    .unwrap_or_else(|| median_sphere_scale(cloud));
                Ok(Self::sphere(inverse_stereographic(cloud, s)?))
            }
            MetricMode::Precomputed => Err(Error::Config(
                "precomputed metric needs a distance matrix, not coordinates".into(),
            )),
        }
    }

    /// Plain Euclidean distances on an already-normalized cloud.
    pub fn euclidean(cloud: PointCloud) -> Self {
        Self {
            geometry: Geometry::Euclidean(cloud),
            cache: None,
        }
    }

    /// Arc-length distances on a cloud of unit vectors.
    pub fn sphere(cloud: PointCloud) -> Self {
        Self {
            geometry: Geometry::Sphere(cloud),
            cache: None,
        }
    }

    /// Full symmetric `m x m` matrix with zero diagonal and entries in `[0, π]`.
    pub fn precomputed(m: usize, values: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyCloud);
        }
        if values.len() != m * m {
            return Err(Error::Dimension {
                expected: m * m,
                got: values.len(),
            });
        }
        for i in 0..m {
            for j in 0..m {
                let v = values[i * m + j];
                if !(0.0..=PI + 1e-9).contains(&v) || (i == j && v != 0.0) {
                    return Err(Error::Domain(format!("distance ({i}, {j}) = {v} outside [0, π]")));
                }
                if (v - values[j * m + i]).abs() > 1e-12 {
                    return Err(Error::Domain(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self {
            geometry: Geometry::Matrix {
                m,
                values: Arc::new(values),
            },
            cache: None,
        })
    }

    pub fn len(&self) -> usize {
        match &self.geometry {
            Geometry::Euclidean(c) | Geometry::Sphere(c) => c.len(),
            Geometry::Matrix { m, .. } => *m,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Embedded coordinates, if the provider has any.
    pub fn cloud(&self) -> Option<&PointCloud> {
        match &self.geometry {
            Geometry::Euclidean(c) | Geometry::Sphere(c) => Some(c),
            Geometry::Matrix { .. } => None,
        }
    }

    pub fn is_cached(&self) -> bool {
        self.cache.is_some()
    }

    /// Populate the condensed upper-triangle cache. Single pass, then frozen.
    pub fn with_cache(mut self) -> Self {
        if self.cache.is_some() {
            return self;
        }
        let m = self.len();
        let rows: Vec<Vec<f32>> = (0..m)
            .into_par_iter()
            .map(|i| (i + 1..m).map(|j| self.compute(i, j) as f32).collect())
            .collect();
        let mut flat = Vec::with_capacity(m * (m.saturating_sub(1)) / 2);
        for r in rows {
            flat.extend_from_slice(&r);
        }
        self.cache = Some(Arc::new(flat));
        self
    }

    #[inline]
    fn condensed_index(&self, i: usize, j: usize) -> usize {
        let m = self.len();
        i * (2 * m - i - 1) / 2 + (j - i - 1)
    }

    #[inline]
    fn compute(&self, i: usize, j: usize) -> f64 {
        match &self.geometry {
            Geometry::Euclidean(c) => euclidean(c.row(i), c.row(j)),
            Geometry::Sphere(c) => geodesic(c.row(i), c.row(j)),
            Geometry::Matrix { m, values } => values[i * m + j],
        }
    }

    /// `ρ(x_i, x_j)`.
    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        if i == j {
            return 0.0;
        }
        match &self.cache {
            Some(cache) => {
                let (a, b) = if i < j { (i, j) } else { (j, i) };
                cache[self.condensed_index(a, b)] as f64
            }
            None => self.compute(i, j),
        }
    }

    /// Distance from an arbitrary point of the ambient space to sample `j`.
    pub fn distance_to(&self, x: &[f64], j: usize) -> Result<f64> {
        match &self.geometry {
            Geometry::Euclidean(c) | Geometry::Sphere(c) if x.len() != c.dim() => {
                Err(Error::Dimension {
                    expected: c.dim(),
                    got: x.len(),
                })
            }
            Geometry::Euclidean(c) => Ok(euclidean(x, c.row(j))),
            Geometry::Sphere(c) => Ok(geodesic(x, c.row(j))),
            Geometry::Matrix { .. } => Err(Error::Domain(
                "off-sample distances are undefined for a precomputed metric".into(),
            )),
        }
    }

    /// Row-major block of distances for `rows x cols`.
    pub fn pairwise_block(&self, rows: Range<usize>, cols: Range<usize>) -> Vec<f64> {
        let width = cols.len();
        let mut out = vec![0.0; rows.len() * width];
        out.par_chunks_mut(width.max(1))
            .zip(rows.clone().into_par_iter())
            .for_each(|(dst, i)| {
                for (o, j) in dst.iter_mut().zip(cols.clone()) {
                    *o = self.distance(i, j);
                }
            });
        out
    }

    /// All unordered pairs `(i, j)` of `ids` with `lo <= ρ < hi`, as positions
    /// into `ids`. Pairs come out sorted by `(i, j)`.
    pub fn pairs_in_band(&self, ids: &[usize], lo: f64, hi: f64) -> Vec<(u32, u32)> {
        let per_row: Vec<Vec<(u32, u32)>> = (0..ids.len())
            .into_par_iter()
            .map(|a| {
                let ia = ids[a];
                let mut out = Vec::new();
                for (b, &ib) in ids.iter().enumerate().skip(a + 1) {
                    let d = self.distance(ia, ib);
                    if d >= lo && d < hi {
                        out.push((a as u32, b as u32));
                    }
                }
                out
            })
            .collect();
        per_row.into_iter().flatten().collect()
    }
}
