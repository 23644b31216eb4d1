//! Seeded synthetic data sets.
//!
//! All generators draw from a ChaCha8 stream seeded with a 64-bit value, so a
//! given spec string always produces the same bytes on every platform.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::metric::PointCloud;
use crate::signal::wrap;
use crate::Label;

pub const DEFAULT_SEED: u64 = 7;

/// Circle radius of the circle/ellipse set; the ellipse shares its centre.
pub const CIRCLE_RADIUS: f64 = 1.0;
/// Semi-major axis of the ellipse, along the first coordinate.
pub const ELLIPSE_MAJOR: f64 = 1.7;

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub cloud: PointCloud,
    pub truth: Option<Vec<Label>>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(sd: f64) -> Normal<f64> {
    Normal::new(0.0, sd.max(0.0)).expect("finite standard deviation")
}

/// Two interleaved half circles, `m / 2` evenly spaced points each (the odd
/// point goes to the upper moon), plus isotropic Gaussian noise.
pub fn two_moons(m: usize, noise: f64, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let upper = m - m / 2;
    let lower = m / 2;
    let jitter = normal(noise);
    let mut rows = Vec::with_capacity(m);
    let mut truth = Vec::with_capacity(m);
    let spaced = |i: usize, count: usize| {
        if count <= 1 {
            0.0
        } else {
            PI * i as f64 / (count - 1) as f64
        }
    };
    for i in 0..upper {
        let t = spaced(i, upper);
        rows.push([t.cos(), t.sin()]);
        truth.push(0);
    }
    for i in 0..lower {
        let t = spaced(i, lower);
        rows.push([1.0 - t.cos(), 0.5 - t.sin()]);
        truth.push(1);
    }
    if noise > 0.0 {
        for r in rows.iter_mut() {
            r[0] += jitter.sample(&mut rng);
            r[1] += jitter.sample(&mut rng);
        }
    }
    Dataset {
        cloud: PointCloud::from_rows(&rows).expect("finite rows"),
        truth: Some(truth),
    }
}

/// Cumulative arc length of an ellipse `(a cos t, b sin t)` on a uniform
/// parameter grid.
fn ellipse_arclength(a: f64, b: f64, steps: usize) -> Vec<f64> {
    let mut acc = Vec::with_capacity(steps + 1);
    acc.push(0.0);
    let mut prev = [a, 0.0];
    let mut total = 0.0;
    for i in 1..=steps {
        let t = TAU * i as f64 / steps as f64;
        let p = [a * t.cos(), b * t.sin()];
        total += ((p[0] - prev[0]).powi(2) + (p[1] - prev[1]).powi(2)).sqrt();
        acc.push(total);
        prev = p;
    }
    acc
}

/// Parameter `t` at arc length `s` by inverting the cumulative table.
fn invert_arclength(table: &[f64], s: f64) -> f64 {
    let steps = table.len() - 1;
    let i = table.partition_point(|&v| v <= s).clamp(1, steps);
    let (lo, hi) = (table[i - 1], table[i]);
    let frac = if hi > lo { (s - lo) / (hi - lo) } else { 0.0 };
    TAU * ((i - 1) as f64 + frac) / steps as f64
}

/// `per_class` points uniform in arc length on a circle of radius
/// [`CIRCLE_RADIUS`] (label 0) and on a concentric ellipse with semi-major
/// axis [`ELLIPSE_MAJOR`] and eccentricity `ecc` (label 1), each coordinate
/// perturbed by independent `N(0, noise_sd^2)` noise.
pub fn circle_ellipse(per_class: usize, ecc: f64, noise_sd: f64, seed: u64) -> Result<Dataset> {
    if !(0.0..1.0).contains(&ecc) {
        return Err(Error::Config(format!("eccentricity must lie in [0, 1), got {ecc}")));
    }
    let mut rng = rng(seed);
    let jitter = normal(noise_sd);
    let a = ELLIPSE_MAJOR;
    let b = a * (1.0 - ecc * ecc).sqrt();
    let table = ellipse_arclength(a, b, 1 << 14);
    let perimeter = *table.last().expect("non-empty table");
    let mut rows = Vec::with_capacity(2 * per_class);
    let mut truth = Vec::with_capacity(2 * per_class);
    for _ in 0..per_class {
        let t = rng.random::<f64>() * TAU;
        rows.push([CIRCLE_RADIUS * t.cos(), CIRCLE_RADIUS * t.sin()]);
        truth.push(0);
    }
    for _ in 0..per_class {
        let t = invert_arclength(&table, rng.random::<f64>() * perimeter);
        rows.push([a * t.cos(), b * t.sin()]);
        truth.push(1);
    }
    if noise_sd > 0.0 {
        for r in rows.iter_mut() {
            r[0] += jitter.sample(&mut rng);
            r[1] += jitter.sample(&mut rng);
        }
    }
    Ok(Dataset {
        cloud: PointCloud::from_rows(&rows).expect("finite rows"),
        truth: Some(truth),
    })
}

/// Angles of the two arcs used by [`arcs`]: each of length `arc_len`,
/// centred at `±(gap + arc_len) / 2`, so the closer ends are `gap` apart.
pub fn arc_bounds(arc_len: f64, gap: f64) -> [(f64, f64); 2] {
    let c = 0.5 * (gap + arc_len);
    [
        (-c - 0.5 * arc_len, -c + 0.5 * arc_len),
        (c - 0.5 * arc_len, c + 0.5 * arc_len),
    ]
}

/// Uniform samples on two disjoint arcs of the unit circle, returned as unit
/// vectors in the plane (geodesic distance = angle). Labels 0 and 1.
pub fn arcs(m: usize, arc_len: f64, gap: f64, seed: u64) -> Result<Dataset> {
    if !(arc_len > 0.0 && gap > 0.0 && 2.0 * arc_len + 2.0 * gap <= TAU) {
        return Err(Error::Config(format!(
            "arcs of length {arc_len} with gap {gap} do not fit on the circle"
        )));
    }
    let mut rng = rng(seed);
    let bounds = arc_bounds(arc_len, gap);
    let mut rows = Vec::with_capacity(m);
    let mut truth = Vec::with_capacity(m);
    for i in 0..m {
        let class = (i % 2) as Label;
        let (lo, hi) = bounds[class as usize];
        let t = lo + rng.random::<f64>() * (hi - lo);
        rows.push([t.cos(), t.sin()]);
        truth.push(class);
    }
    Ok(Dataset {
        cloud: PointCloud::from_rows(&rows).expect("finite rows"),
        truth: Some(truth),
    })
}

/// The mixture on the circle: 1200 uniform on `[-0.6, -0.4]`, 2400 from
/// `N(0.05, 0.04)` (variance 0.04), and atoms at -2, 0.4, 1.5 with 60, 120,
/// 120 copies. Returned as angles in `[-π, π)`.
pub fn point_mixture(seed: u64) -> Vec<f64> {
    let mut rng = rng(seed);
    let mut out = Vec::with_capacity(3900);
    for _ in 0..1200 {
        out.push(-0.6 + 0.2 * rng.random::<f64>());
    }
    let gauss = Normal::new(0.05, 0.04f64.sqrt()).expect("valid normal");
    for _ in 0..2400 {
        out.push(wrap(gauss.sample(&mut rng)));
    }
    for (atom, count) in [(-2.0, 60), (0.4, 120), (1.5, 120)] {
        out.extend(std::iter::repeat_n(atom, count));
    }
    out
}

/// `k` isotropic Gaussian clusters in `dim` dimensions with centres drawn
/// uniformly from `[-1, 1]^dim`. Point `i` belongs to cluster `i % k`.
pub fn blobs(m: usize, dim: usize, k: usize, spread: f64, seed: u64) -> Dataset {
    let mut rng = rng(seed);
    let centres: Vec<Vec<f64>> = (0..k)
        .map(|_| (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect())
        .collect();
    let jitter = normal(spread);
    let mut data = Vec::with_capacity(m * dim);
    let mut truth = Vec::with_capacity(m);
    for i in 0..m {
        let c = i % k;
        for v in &centres[c] {
            data.push(v + jitter.sample(&mut rng));
        }
        truth.push(c as Label);
    }
    Dataset {
        cloud: PointCloud::new(dim, data).expect("finite data"),
        truth: Some(truth),
    }
}

/// Parsed generator spec: `name` or `name:key=value,key=value`.
///
/// | name | keys (defaults) |
/// |------|-----------------|
/// | `two-moons` | `m` (1000), `noise` (0.05), `seed` |
/// | `circle-ellipse` | `m` per class (1000), `ecc` (0.79), `noise` (0.05), `seed` |
/// | `arcs` | `m` (2000), `len` (1.0), `gap` (0.5), `seed` |
/// | `point-mixture` | `seed` |
/// | `blobs` | `m` (1000), `dim` (2), `k` (3), `spread` (0.05), `seed` |
#[derive(Clone, Debug, PartialEq)]
pub enum SyntheticSpec {
    TwoMoons { m: usize, noise: f64, seed: u64 },
    CircleEllipse { per_class: usize, ecc: f64, noise: f64, seed: u64 },
    Arcs { m: usize, arc_len: f64, gap: f64, seed: u64 },
    PointMixture { seed: u64 },
    Blobs { m: usize, dim: usize, k: usize, spread: f64, seed: u64 },
}

struct Params<'a> {
    name: &'a str,
    values: BTreeMap<&'a str, &'a str>,
}

impl<'a> Params<'a> {
    fn get<T: FromStr>(&mut self, key: &str, default: T) -> Result<T> {
        match self.values.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Error::Config(format!("{}: bad value `{v}` for `{key}`", self.name))),
        }
    }

    fn finish(self) -> Result<()> {
        match self.values.keys().next() {
            Some(k) => Err(Error::Config(format!("{}: unknown key `{k}`", self.name))),
            None => Ok(()),
        }
    }
}

impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let name = name.trim();
        let mut values = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("{name}: expected key=value, got `{kv}`")))?;
            values.insert(k.trim(), v.trim());
        }
        let mut p = Params { name, values };
        let seed = p.get("seed", DEFAULT_SEED)?;
        let spec = match name {
            "two-moons" => Self::TwoMoons {
                m: p.get("m", 1000)?,
                noise: p.get("noise", 0.05)?,
                seed,
            },
            "circle-ellipse" => Self::CircleEllipse {
                per_class: p.get("m", 1000)?,
                ecc: p.get("ecc", 0.79)?,
                noise: p.get("noise", 0.05)?,
                seed,
            },
            "arcs" => Self::Arcs {
                m: p.get("m", 2000)?,
                arc_len: p.get("len", 1.0)?,
                gap: p.get("gap", 0.5)?,
                seed,
            },
            "point-mixture" => Self::PointMixture { seed },
            "blobs" => Self::Blobs {
                m: p.get("m", 1000)?,
                dim: p.get("dim", 2)?,
                k: p.get("k", 3)?,
                spread: p.get("spread", 0.05)?,
                seed,
            },
            other => return Err(Error::Config(format!("unknown generator `{other}`"))),
        };
        p.finish()?;
        Ok(spec)
    }
}

impl SyntheticSpec {
    pub fn generate(&self) -> Result<Dataset> {
        match *self {
            Self::TwoMoons { m, noise, seed } => {
                if m < 2 {
                    return Err(Error::Config("two-moons needs at least 2 points".into()));
                }
                Ok(two_moons(m, noise, seed))
            }
            Self::CircleEllipse {
                per_class,
                ecc,
                noise,
                seed,
            } => {
                if per_class == 0 {
                    return Err(Error::Config("circle-ellipse needs m >= 1".into()));
                }
                circle_ellipse(per_class, ecc, noise, seed)
            }
            Self::Arcs { m, arc_len, gap, seed } => {
                if m == 0 {
                    return Err(Error::Config("arcs needs m >= 1".into()));
                }
                arcs(m, arc_len, gap, seed)
            }
            Self::PointMixture { seed } => {
                let rows: Vec<[f64; 1]> = point_mixture(seed).into_iter().map(|t| [t]).collect();
                Ok(Dataset {
                    cloud: PointCloud::from_rows(&rows)?,
                    truth: None,
                })
            }
            Self::Blobs {
                m,
                dim,
                k,
                spread,
                seed,
            } => {
                if m == 0 || dim == 0 || k == 0 {
                    return Err(Error::Config("blobs needs m, dim, k >= 1".into()));
                }
                Ok(blobs(m, dim, k, spread, seed))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_ellipse_defaults() {
        let d: SyntheticSpec = "circle-ellipse".parse().unwrap();
        let data = d.generate().unwrap();
        assert_eq!(data.cloud.len(), 2000);
        let truth = data.truth.unwrap();
        assert_eq!(truth.iter().filter(|&&l| l == 1).count(), 1000);
    }

    #[test]
    fn noiseless_points_on_curves() {
        let data = circle_ellipse(300, 0.79, 0.0, 3).unwrap();
        let b = ELLIPSE_MAJOR * (1.0 - 0.79f64 * 0.79).sqrt();
        for (i, r) in data.cloud.rows().enumerate() {
            let resid = if i < 300 {
                (r[0].hypot(r[1]) - CIRCLE_RADIUS).abs()
            } else {
                ((r[0] / ELLIPSE_MAJOR).powi(2) + (r[1] / b).powi(2) - 1.0).abs()
            };
            assert!(resid < 1e-12, "row {i}: {resid}");
        }
        let moons = two_moons(50, 0.0, 1);
        for r in moons.cloud.rows().take(25) {
            assert!((r[0].hypot(r[1]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_generators_repeat() {
        for spec in ["two-moons:m=200", "circle-ellipse:m=100", "arcs:m=100", "point-mixture", "blobs:m=50,dim=4"] {
            let s: SyntheticSpec = spec.parse().unwrap();
            assert_eq!(s.generate().unwrap(), s.generate().unwrap(), "{spec}");
        }
        let a = "two-moons:seed=1".parse::<SyntheticSpec>().unwrap().generate().unwrap();
        let b = "two-moons:seed=2".parse::<SyntheticSpec>().unwrap().generate().unwrap();
        assert_ne!(a, b);
    }

    #[test]
    fn arcs_stay_on_their_arcs() {
        let data = arcs(400, 1.0, 0.5, 9).unwrap();
        let bounds = arc_bounds(1.0, 0.5);
        for (r, &l) in data.cloud.rows().zip(data.truth.as_ref().unwrap()) {
            let t = r[1].atan2(r[0]);
            let (lo, hi) = bounds[l as usize];
            assert!(t >= lo - 1e-12 && t <= hi + 1e-12);
        }
        assert!(arcs(10, 4.0, 0.5, 1).is_err());
    }

    #[test]
    fn mixture_counts() {
        let s = point_mixture(1);
        assert_eq!(s.len(), 3900);
        assert_eq!(s.iter().filter(|&&x| x == 0.4).count(), 120);
        assert!(s[..1200].iter().all(|&x| (-0.6..=-0.4).contains(&x)));
    }

    #[test]
    fn bad_specs() {
        assert!("spiral".parse::<SyntheticSpec>().is_err());
        assert!("two-moons:m=abc".parse::<SyntheticSpec>().is_err());
        assert!("two-moons:q=1".parse::<SyntheticSpec>().is_err());
        assert!("two-moons:m".parse::<SyntheticSpec>().is_err());
        assert!("circle-ellipse:ecc=1.5".parse::<SyntheticSpec>().unwrap().generate().is_err());
    }
}
