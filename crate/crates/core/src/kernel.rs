//! Smooth band-pass filter and the localized kernels built from it.
//!
//! `Φ_n(t) = Σ_{|k|<n} h(k/n) e^{ikt}` is a real, even trigonometric
//! polynomial that peaks at `t = 0` and decays faster than any power of
//! `n|t|` away from it. `Ψ_n(d) = Φ_n(d)^2` is its positive counterpart,
//! evaluated at distances of a metric space with diameter at most π.

use std::f64::consts::PI;

/// Default decay exponent used by the localization checks.
pub const DEFAULT_SMOOTHNESS: u32 = 9;

/// Samples per unit of degree in a [`KernelTable`] over `[0, π]`.
pub const TABLE_DENSITY: usize = 64;

/// `ψ(t) = a(t) / (a(t) + a(1 - t))` with `a(t) = exp(-1/t)` for `t > 0`.
/// Zero for `t <= 0`, one for `t >= 1`, every derivative flat at both ends.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Even `C^∞` filter: 1 on `[-1/2, 1/2]`, 0 outside `(-1, 1)`, and
/// `ψ(2(1 - |u|))` in between.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BandpassFilter {
    smoothness: u32,
}

impl Default for BandpassFilter {
    fn default() -> Self {
        Self {
            smoothness: DEFAULT_SMOOTHNESS,
        }
    }
}

impl BandpassFilter {
    pub fn new(smoothness: u32) -> Self {
        Self { smoothness }
    }

    /// Exponent `S` of the localization envelope `n / max(1, (n|t|)^S)`.
    pub fn smoothness(&self) -> u32 {
        self.smoothness
    }

    pub fn eval(&self, u: f64) -> f64 {
        let u = u.abs();
        if u <= 0.5 {
            1.0
        } else if u >= 1.0 {
            0.0
        } else {
            smooth_step(2.0 * (1.0 - u))
        }
    }
}

/// Distance kernel on a metric space.
pub trait RadialKernel {
    fn degree(&self) -> usize;

    /// `Ψ_n` at distance `d`.
    fn psi(&self, d: f64) -> f64;
}

/// Degree-`n` kernel with precomputed filter weights `w_k = h(k/n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedKernel {
    filter: BandpassFilter,
    weights: Vec<f64>,
    peak: f64,
}

impl LocalizedKernel {
    pub fn new(degree: usize) -> Self {
        Self::with_filter(degree, BandpassFilter::default())
    }

    pub fn with_filter(degree: usize, filter: BandpassFilter) -> Self {
        assert!(degree > 0, "kernel degree must be positive");
        let n = degree as f64;
        let weights: Vec<f64> = (0..degree).map(|k| filter.eval(k as f64 / n)).collect();
        let peak = weights[0] + 2.0 * weights[1..].iter().sum::<f64>();
        Self {
            filter,
            weights,
            peak,
        }
    }

    pub fn degree(&self) -> usize {
        self.weights.len()
    }

    pub fn filter(&self) -> BandpassFilter {
        self.filter
    }

    /// `w_k` for `0 <= k < n`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `Φ_n(0) = Σ_{|k|<n} h(k/n)`, the maximum of `|Φ_n|`.
    pub fn phi_at_zero(&self) -> f64 {
        self.peak
    }

    /// `w_0 + 2 Σ_{k>=1} w_k cos(kt)`.
    pub fn phi(&self, t: f64) -> f64 {
        let mut sum = 0.0;
        for (k, w) in self.weights.iter().enumerate().skip(1) {
            if *w == 0.0 {
                break;
            }
            sum += w * (k as f64 * t).cos();
        }
        self.weights[0] + 2.0 * sum
    }

    pub fn phi_grid(&self, grid: &[f64]) -> Vec<f64> {
        grid.iter().map(|&t| self.phi(t)).collect()
    }

    /// `Φ_n(d)^2`.
    pub fn psi(&self, d: f64) -> f64 {
        let p = self.phi(d);
        p * p
    }

    /// Interpolation table of `Φ_n` on `[0, π]`.
    pub fn tabulate(&self) -> KernelTable {
        KernelTable::new(self, TABLE_DENSITY * self.degree())
    }
}

impl RadialKernel for LocalizedKernel {
    fn degree(&self) -> usize {
        LocalizedKernel::degree(self)
    }

    fn psi(&self, d: f64) -> f64 {
        LocalizedKernel::psi(self, d)
    }
}

/// `Φ_n` sampled at `intervals + 1` uniform points of `[0, π]` with linear
/// interpolation in between; `Ψ_n` is the square of the interpolant.
#[derive(Clone, Debug)]
pub struct KernelTable {
    degree: usize,
    step_inv: f64,
    values: Vec<f64>,
}

impl KernelTable {
    pub fn new(kernel: &LocalizedKernel, intervals: usize) -> Self {
        let intervals = intervals.max(1);
        let h = PI / intervals as f64;
        let values = (0..=intervals).map(|i| kernel.phi(i as f64 * h)).collect();
        Self {
            degree: kernel.degree(),
            step_inv: 1.0 / h,
            values,
        }
    }

    /// Interpolated `Φ_n(|t|)` for `|t| <= π`; clamps beyond π.
    #[inline]
    pub fn phi(&self, t: f64) -> f64 {
        let x = t.abs() * self.step_inv;
        let last = self.values.len() - 1;
        let i = x as usize;
        if i >= last {
            return self.values[last];
        }
        let frac = x - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }
}

impl RadialKernel for KernelTable {
    fn degree(&self) -> usize {
        self.degree
    }

    #[inline]
    fn psi(&self, d: f64) -> f64 {
        let p = self.phi(d);
        p * p
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn filter_plateau_and_cutoff() {
        let h = BandpassFilter::default();
        assert_eq!(h.eval(0.0), 1.0);
        assert_eq!(h.eval(0.5), 1.0);
        assert_eq!(h.eval(-2.0), 0.0);
        assert_eq!(h.eval(1.0), 0.0);
        let v = h.eval(0.75);
        assert!(v > 0.0 && v < 1.0);
        assert_eq!(v, h.eval(-0.75));
        // ψ(1/2) = 1/2 by symmetry of the step
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn filter_monotone_on_transition() {
        let h = BandpassFilter::default();
        let mut prev = 1.0;
        for i in 0..=1000 {
            let u = 0.5 + 0.5 * i as f64 / 1000.0;
            let v = h.eval(u);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn weights_invariants() {
        let k = LocalizedKernel::new(64);
        assert_eq!(k.weights()[0], 1.0);
        assert!(k.weights().windows(2).all(|w| w[1] <= w[0]));
        assert_eq!(k.degree(), 64);
        let sum: f64 = k.weights().iter().sum::<f64>() * 2.0 - 1.0;
        assert!((k.phi(0.0) - sum).abs() < 1e-12);
        assert_eq!(k.phi_at_zero(), k.phi(0.0));
    }

    #[test]
    fn grid_matches_pointwise() {
        let k = LocalizedKernel::new(16);
        assert!(k.phi_grid(&[]).is_empty());
        assert_eq!(k.phi_grid(&[0.0]), vec![k.phi_at_zero()]);
        let grid = [-1.0, 0.3, 2.0];
        let g = k.phi_grid(&grid);
        for (t, v) in grid.iter().zip(g) {
            assert_eq!(v.to_bits(), k.phi(*t).to_bits());
        }
    }

    #[test]
    fn degree_one_is_constant() {
        let k = LocalizedKernel::new(1);
        assert_eq!(k.phi(1.234), 1.0);
        assert_eq!(k.psi(3.0), 1.0);
    }

    #[test]
    fn psi_at_zero_and_quarter_period() {
        let k = LocalizedKernel::new(128);
        let p0 = k.phi_at_zero();
        assert_eq!(k.psi(0.0), p0 * p0);
        let far = k.psi(PI / 2.0);
        assert!(far < 1e-6 * p0 * p0, "psi(π/2) = {far}");
    }

    #[test]
    fn table_close_to_direct() {
        let k = LocalizedKernel::new(32);
        let t = k.tabulate();
        let bound = k.phi_at_zero() * 1e-4;
        for i in 0..5000 {
            let x = PI * i as f64 / 4999.0;
            assert!((t.phi(x) - k.phi(x)).abs() <= bound);
        }
        assert_eq!(t.phi(-0.2), t.phi(0.2));
    }

    #[test]
    #[should_panic]
    fn zero_degree_panics() {
        let _ = LocalizedKernel::new(0);
    }
}
