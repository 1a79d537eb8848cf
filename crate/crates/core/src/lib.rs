//! Group-valued pairwise comparison matrices and their holonomy picture.
//!
//! * [`group`]: ℝ₊*, U(1), SU(2) and ℤ_m with bi-invariant metrics.
//! * [`pc_matrix`]: PC matrices, consistency, inconsistency indicators and
//!   gauge vectors.
//! * [`consistencize`]: nearest consistent matrix in the least-squares sense.
//! * [`simplicial`]: edge fields on 2-complexes, holonomy and curvature.
//! * [`integration`]: Monte Carlo under product Haar measure.
//! * [`io`]: JSON and CSV formats.
//! * [`cli`]: the `pcgauge` command-line tool.

pub mod error;
pub mod group;
pub mod integration;
pub mod io;
pub mod cli;
pub mod consistencize;
pub mod pc_matrix;
pub mod simplicial;

pub use error::{Error, Result};
pub use group::{Element, Group};
pub use pc_matrix::{GaugeVector, Indicator, IndicatorMap, PcMatrix, Variance};
