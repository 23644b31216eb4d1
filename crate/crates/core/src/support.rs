//! Data-based support estimation.
//!
//! `F_n(x) = (1/M) Σ_j Ψ_n(x, x_j)` is large on the support of the sampling
//! measure and decays quickly away from it. The threshold set keeps the
//! samples with `F_n(x_i) >= Θ max_k F_n(x_k)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::RadialKernel;
use crate::metric::DistanceProvider;

#[derive(Clone, Debug, PartialEq)]
pub struct SupportField {
    degree: usize,
    values: Vec<f64>,
    max: f64,
}

impl SupportField {
    /// Wrap precomputed values (e.g. read back from a dump).
    pub fn from_values(degree: usize, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::NoSamples);
        }
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Ok(Self {
            degree,
            values,
            max,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn get(&self, i: usize) -> f64 {
        self.values[i]
    }

    /// Membership in `G_n(Θ)`: `F[i] >= Θ max F`, ties included.
    pub fn threshold_mask(&self, theta: f64) -> Result<Vec<bool>> {
        check_theta(theta)?;
        let cut = theta * self.max;
        Ok(self.values.iter().map(|&f| f >= cut).collect())
    }

    /// Ids of the samples inside `G_n(Θ)`, ascending.
    pub fn in_set(&self, theta: f64) -> Result<Vec<usize>> {
        Ok(self
            .threshold_mask(theta)?
            .into_iter()
            .enumerate()
            .filter_map(|(i, keep)| keep.then_some(i))
            .collect())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta > 0.0 && theta <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("threshold must lie in (0, 1], got {theta}")))
    }
}

/// `F_n` at every sample, self term included. Rows are independent and each
/// row sums in index order, so the result does not depend on scheduling.
pub fn compute_field<K: RadialKernel + Sync>(provider: &DistanceProvider, kernel: &K) -> SupportField {
    let m = provider.len();
    let inv = 1.0 / m as f64;
    let values = (0..m)
        .into_par_iter()
        .map(|i| (0..m).map(|j| kernel.psi(provider.distance(i, j))).sum::<f64>() * inv)
        .collect();
    SupportField::from_values(kernel.degree(), values).expect("provider is non-empty")
}

/// `F_n(x)` for a point of the ambient space of `provider`.
pub fn field_at<K: RadialKernel>(x: &[f64], provider: &DistanceProvider, kernel: &K) -> Result<f64> {
    let m = provider.len();
    let mut sum = 0.0;
    for j in 0..m {
        sum += kernel.psi(provider.distance_to(x, j)?);
    }
    Ok(sum / m as f64)
}

/// `r(Θ) = (8 C / Θ)^{1/(S - α)}` where `C` stands for `C_1 / (C* C_2)`.
pub fn r_theta(theta: f64, smoothness: f64, alpha: f64, c_ratio: f64) -> Result<f64> {
    if !(theta > 0.0 && theta < 1.0 || theta == 1.0) {
        return Err(Error::Domain(format!("Θ must lie in (0, 1], got {theta}")));
    }
    if !(smoothness > alpha) {
        return Err(Error::Domain(format!("need S > α, got S = {smoothness}, α = {alpha}")));
    }
    if !(c_ratio > 0.0) {
        return Err(Error::Domain("constant ratio must be positive".into()));
    }
    Ok((8.0 * c_ratio / theta).powf(1.0 / (smoothness - alpha)))
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::kernel::LocalizedKernel;
    use crate::metric::PointCloud;

    #[test]
    fn single_point_field_is_self_term() {
        let k = LocalizedKernel::new(16);
        let p = DistanceProvider::euclidean(PointCloud::from_rows(&[[0.3]]).unwrap());
        let f = compute_field(&p, &k);
        assert!((f.get(0) - k.psi(0.0)).abs() < 1e-9);
    }

    #[test]
    fn antipodal_pair_halves() {
        let k = LocalizedKernel::new(128);
        let p = DistanceProvider::euclidean(PointCloud::from_rows(&[[0.0], [PI]]).unwrap());
        let f = compute_field(&p, &k);
        let half = k.psi(0.0) / 2.0;
        for i in 0..2 {
            assert!((f.get(i) - half).abs() < 1e-6 * half);
        }
    }

    #[test]
    fn mask_edges() {
        let f = SupportField::from_values(4, vec![1.0, 3.0, 3.0, 2.0]).unwrap();
        assert_eq!(f.threshold_mask(1.0).unwrap(), vec![false, true, true, false]);
        assert_eq!(f.threshold_mask(1e-9).unwrap(), vec![true; 4]);
        assert_eq!(f.in_set(0.5).unwrap(), vec![1, 2, 3]);
        assert!(f.threshold_mask(0.0).is_err());
        assert!(f.threshold_mask(1.5).is_err());
    }

    #[test]
    fn r_theta_examples() {
        assert!((r_theta(1.0, 9.0, 1.0, 0.125).unwrap() - 1.0).abs() < 1e-15);
        let a = r_theta(0.2, 9.0, 1.0, 1.0).unwrap();
        let b = r_theta(0.1, 9.0, 1.0, 1.0).unwrap();
        assert!((b / a - 2f64.powf(1.0 / 8.0)).abs() < 1e-12);
        assert!((b - 80f64.powf(1.0 / 8.0)).abs() < 1e-12);
        assert!(r_theta(0.0, 9.0, 1.0, 1.0).is_err());
        assert!(r_theta(0.5, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn field_at_sample_matches_field() {
        let k = LocalizedKernel::new(32);
        let c = PointCloud::from_rows(&[[0.0, 0.0], [0.05, 0.0], [1.0, 1.0]]).unwrap();
        let p = DistanceProvider::euclidean(c.clone());
        let f = compute_field(&p, &k);
        for i in 0..3 {
            assert!((field_at(c.row(i), &p, &k).unwrap() - f.get(i)).abs() < 1e-12);
        }
        assert!(field_at(&[0.0], &p, &k).is_err());
    }
}
