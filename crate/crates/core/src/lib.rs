//! Localized trigonometric kernels for point-source separation and for
//! multiscale active clustering (MASC) on compact metric spaces.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`kernel`] | band-pass filter `h`, kernels `Φ_n` and `Ψ_n` |
//! | [`signal`] | moments, reconstruction `σ_n`, peak detection |
//! | [`metric`] | point clouds, diameter-π embeddings, distance access |
//! | [`support`] | support estimator `F_n` and threshold sets |
//! | [`masc`] | the multiscale query/extension loop and `k̄`-NN fill-in |
//! | [`metrics`] | accuracy, confusion matrix, F-score |
//! | [`preprocess`] | row normalization and PCA |
//! | [`synth`] | seeded synthetic data sets |
//! | [`io`] | text and CSV formats |
//! | [`experiment`] | config files and end-to-end runs |

pub mod error;
pub mod experiment;
pub mod io;
pub mod kernel;
pub mod masc;
pub mod metric;
pub mod metrics;
pub mod preprocess;
pub mod signal;
pub mod support;
pub mod synth;

pub use error::{Error, Result};
pub use kernel::{BandpassFilter, KernelTable, LocalizedKernel, RadialKernel};
pub use masc::{classify, knn_extend, Masc, MascConfig, MascState, Oracle, PointStatus};
pub use metric::{DistanceProvider, MetricConfig, MetricMode, PointCloud};
pub use support::{compute_field, SupportField};

/// Class label.
pub type Label = u32;
