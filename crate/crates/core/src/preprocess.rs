//! Per-row normalization and PCA.

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metric::PointCloud;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Preprocess {
    #[default]
    None,
    Normalize,
    Pca(usize),
}

impl FromStr for Preprocess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "none" => Ok(Self::None),
            "normalize" => Ok(Self::Normalize),
            other => match other.strip_prefix("pca:") {
                Some(d) => d
                    .trim()
                    .parse()
                    .map(Self::Pca)
                    .map_err(|_| Error::Config(format!("bad PCA dimension in `{other}`"))),
                None => Err(Error::Config(format!("unknown preprocess `{other}`"))),
            },
        }
    }
}

impl Preprocess {
    pub fn apply(self, cloud: &PointCloud) -> Result<PointCloud> {
        match self {
            Self::None => Ok(cloud.clone()),
            Self::Normalize => normalize_rows(cloud),
            Self::Pca(d) => Ok(pca(cloud, d)?.projected),
        }
    }
}

/// Scale each row to unit Euclidean norm.
pub fn normalize_rows(cloud: &PointCloud) -> Result<PointCloud> {
    if let Some(i) = cloud.rows().position(|r| r.iter().all(|&v| v == 0.0)) {
        return Err(Error::ZeroRow(i));
    }
    Ok(cloud.map_rows(cloud.dim(), |src, dst| {
        let norm = src.iter().map(|v| v * v).sum::<f64>().sqrt();
        for (o, v) in dst.iter_mut().zip(src) {
            *o = v / norm;
        }
    }))
}

#[derive(Clone, Debug)]
pub struct Pca {
    pub projected: PointCloud,
    pub mean: Vec<f64>,
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Row `k` is the `k`-th principal axis.
    pub components: Vec<Vec<f64>>,
}

/// Center, then project onto the top-`d` eigenvectors of the sample
/// covariance (divisor `M - 1`). Each axis is signed so that its
/// largest-magnitude entry is positive.
pub fn pca(cloud: &PointCloud, d: usize) -> Result<Pca> {
    let q = cloud.dim();
    if d == 0 || d > q {
        return Err(Error::TooManyComponents {
            requested: d,
            available: q,
        });
    }
    let m = cloud.len();
    let mut mean = vec![0.0; q];
    for r in cloud.rows() {
        for (a, v) in mean.iter_mut().zip(r) {
            *a += v;
        }
    }
    mean.iter_mut().for_each(|a| *a /= m as f64);

    let mut cov = vec![0.0; q * q];
    let mut centered = vec![0.0; q];
    for r in cloud.rows() {
        for (c, (v, mu)) in centered.iter_mut().zip(r.iter().zip(&mean)) {
            *c = v - mu;
        }
        for a in 0..q {
            let ca = centered[a];
            if ca == 0.0 {
                continue;
            }
            for b in a..q {
                cov[a * q + b] += ca * centered[b];
            }
        }
    }
    let denom = (m.max(2) - 1) as f64;
    for a in 0..q {
        for b in a..q {
            let v = cov[a * q + b] / denom;
            cov[a * q + b] = v;
            cov[b * q + a] = v;
        }
    }

    let (values, vectors) = jacobi_eigen(cov, q);
    let mut order: Vec<usize> = (0..q).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut components = Vec::with_capacity(d);
    let mut eigenvalues = Vec::with_capacity(d);
    for &k in &order[..d] {
        let mut axis: Vec<f64> = (0..q).map(|r| vectors[r * q + k]).collect();
        let lead = axis
            .iter()
            .copied()
            .fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if lead < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(axis);
        eigenvalues.push(values[k]);
    }

    let projected = cloud.map_rows(d, |src, dst| {
        for (o, axis) in dst.iter_mut().zip(&components) {
            *o = src
                .iter()
                .zip(&mean)
                .zip(axis)
                .map(|((v, mu), a)| (v - mu) * a)
                .sum();
        }
    });
    Ok(Pca {
        projected,
        mean,
        eigenvalues,
        components,
    })
}

/// Cyclic Jacobi rotations on a symmetric `q x q` matrix. Returns the
/// eigenvalues and the eigenvector matrix (columns). Stops once the
/// off-diagonal Frobenius norm drops below `1e-10 * trace`.
pub fn jacobi_eigen(mut a: Vec<f64>, q: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; q * q];
    for i in 0..q {
        v[i * q + i] = 1.0;
    }
    let trace: f64 = (0..q).map(|i| a[i * q + i].abs()).sum();
    let tol = 1e-10 * trace.max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let off: f64 = (0..q)
            .flat_map(|i| (0..q).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * q + j] * a[i * q + j])
            .sum::<f64>()
            .sqrt();
        if off < tol {
            break;
        }
        for p in 0..q {
            for r in p + 1..q {
                let apr = a[p * q + r];
                if apr == 0.0 {
                    continue;
                }
                let app = a[p * q + p];
                let arr = a[r * q + r];
                let theta = (arr - app) / (2.0 * apr);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..q {
                    let akp = a[k * q + p];
                    let akr = a[k * q + r];
                    a[k * q + p] = c * akp - s * akr;
                    a[k * q + r] = s * akp + c * akr;
                }
                for k in 0..q {
                    let apk = a[p * q + k];
                    let ark = a[r * q + k];
                    a[p * q + k] = c * apk - s * ark;
                    a[r * q + k] = s * apk + c * ark;
                }
                for k in 0..q {
                    let vkp = v[k * q + p];
                    let vkr = v[k * q + r];
                    v[k * q + p] = c * vkp - s * vkr;
                    v[k * q + r] = s * vkp + c * vkr;
                }
            }
        }
    }
    ((0..q).map(|i| a[i * q + i]).collect(), v)
}
