//! Monte Carlo expectations under product Haar measure.
//!
//! Edge fields are drawn with i.i.d. Haar entries per edge; random PC matrices
//! with i.i.d. Haar upper triangles. Sample `k` draws from a ChaCha stream
//! keyed by `(seed, k)`, so estimates depend only on `(seed, N)` and not on
//! how samples are spread over worker threads. Sums use pairwise reduction in
//! sample order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::Group;
use crate::pc_matrix::{random_pc_matrix, Indicator};
use crate::simplicial::{
    curvature_values, global_ii, path_holonomy, EdgeField, EdgePath, SimplicialComplex2,
};

pub const HISTOGRAM_BINS: usize = 64;

/// Quantity averaged over samples.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    /// Mean of `In(curvature)` over the triangles of the complex.
    MeanCurvatureIn(Indicator),
    /// Largest `In(curvature)` over the triangles (the global indicator).
    SupCurvatureIn(Indicator),
    /// Normalized real character of a loop holonomy; `None` uses the boundary
    /// of the first triangle.
    WilsonCharacter(Option<EdgePath>),
    /// Indicator value of a random `n × n` PC matrix.
    IiOfRandomMatrix { n: usize, indicator: Indicator },
}

impl Observable {
    pub fn tag(&self) -> &'static str {
        match self {
            Observable::MeanCurvatureIn(_) => "mean_curvature_In",
            Observable::SupCurvatureIn(_) => "sup_curvature_In",
            Observable::WilsonCharacter(_) => "wilson_character",
            Observable::IiOfRandomMatrix { .. } => "ii3_of_random_matrix",
        }
    }

    pub fn needs_complex(&self) -> bool {
        !matches!(self, Observable::IiOfRandomMatrix { .. })
    }

    /// Evaluates a field observable on one field.
    pub fn eval_field(&self, complex: &SimplicialComplex2, field: &EdgeField) -> Result<f64> {
        match self {
            Observable::MeanCurvatureIn(ind) => {
                let vals = curvature_values(complex, field, ind)?;
                if vals.is_empty() {
                    return Err(Error::InvalidArgument(
                        "mean_curvature_In needs at least one triangle".into(),
                    ));
                }
                let v: Vec<f64> = vals.into_iter().map(|(_, x)| x).collect();
                Ok(pairwise_sum(&v) / v.len() as f64)
            }
            Observable::SupCurvatureIn(ind) => Ok(global_ii(complex, field, ind)?.value),
            Observable::WilsonCharacter(path) => {
                let path = self.wilson_loop(complex, path.as_ref())?;
                path_holonomy(complex, field, &path)?
                    .character()
                    .ok_or_else(|| Error::NoHaarMeasure(field.group().tag()))
            }
            Observable::IiOfRandomMatrix { .. } => Err(Error::InvalidArgument(
                "ii3_of_random_matrix is not a field observable".into(),
            )),
        }
    }

    fn wilson_loop(&self, complex: &SimplicialComplex2, path: Option<&EdgePath>) -> Result<EdgePath> {
        let path = match path {
            Some(p) => p.clone(),
            None => EdgePath::triangle_boundary(*complex.triangles().first().ok_or_else(|| {
                Error::InvalidArgument("wilson_character needs a loop or a triangle".into())
            })?),
        };
        if !path.is_loop() {
            return Err(Error::InvalidArgument(format!(
                "wilson loop {:?} is not closed",
                path.vertices
            )));
        }
        if let Some(w) = path.vertices.windows(2).find(|w| !complex.has_edge(w[0], w[1])) {
            return Err(Error::NonAdjacentStep(w[0], w[1]));
        }
        Ok(path)
    }

    fn validate(&self, complex: Option<&SimplicialComplex2>) -> Result<()> {
        match (self, complex) {
            (Observable::IiOfRandomMatrix { n, .. }, _) => {
                if *n < 2 {
                    return Err(Error::InvalidArgument(format!("matrix size {n} < 2")));
                }
                Ok(())
            }
            (_, None) => Err(Error::InvalidArgument(format!(
                "{} needs a complex",
                self.tag()
            ))),
            (Observable::WilsonCharacter(p), Some(k)) => self.wilson_loop(k, p.as_ref()).map(|_| ()),
            (Observable::MeanCurvatureIn(_), Some(k)) if k.triangles().is_empty() => Err(
                Error::InvalidArgument("mean_curvature_In needs at least one triangle".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McEstimate {
    pub observable: String,
    pub group: String,
    #[serde(rename = "N")]
    pub samples: usize,
    pub seed: u64,
    pub mean: f64,
    pub std_error: f64,
}

/// Uniform-bin histogram over `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize) -> Self {
        let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut counts = vec![0u64; bins];
        if values.is_empty() {
            return Histogram {
                lo: 0.0,
                hi: 0.0,
                counts,
            };
        }
        let width = hi - lo;
        for &v in values {
            let b = if width > 0.0 {
                (((v - lo) / width) * bins as f64).floor() as usize
            } else {
                0
            };
            counts[b.min(bins - 1)] += 1;
        }
        Histogram { lo, hi, counts }
    }

    pub fn bin_edges(&self, b: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + w * b as f64, self.lo + w * (b + 1) as f64)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_lo,bin_hi,count\n");
        for (b, c) in self.counts.iter().enumerate() {
            let (lo, hi) = self.bin_edges(b);
            s.push_str(&format!("{lo},{hi},{c}\n"));
        }
        s
    }
}

/// Pairwise (cascade) summation.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let (a, b) = v.split_at(v.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// RNG for sample `k` of a run seeded with `seed`.
pub fn sample_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Draws an edge field with i.i.d. Haar entries, one per canonical edge.
pub fn sample_field<R: Rng + ?Sized>(
    complex: &SimplicialComplex2,
    group: Group,
    rng: &mut R,
) -> Result<EdgeField> {
    if !group.is_compact() {
        return Err(Error::NoHaarMeasure(group.tag()));
    }
    let values = (0..complex.edges().len())
        .map(|_| group.haar_sample(rng))
        .collect::<Result<Vec<_>>>()?;
    EdgeField::from_values(complex, group, values)
}

fn eval_sample(
    complex: Option<&SimplicialComplex2>,
    group: Group,
    obs: &Observable,
    rng: &mut ChaCha8Rng,
) -> Result<f64> {
    match obs {
        Observable::IiOfRandomMatrix { n, indicator } => {
            Ok(random_pc_matrix(group, *n, rng)?.ii_indicator(indicator)?.value)
        }
        _ => {
            let k = complex.expect("validated");
            obs.eval_field(k, &sample_field(k, group, rng)?)
        }
    }
}

/// Observable values for samples `0..n`, in sample order.
///
/// `workers = None` uses the global thread pool; the values do not depend on
/// the worker count.
pub fn sample_values(
    complex: Option<&SimplicialComplex2>,
    group: Group,
    obs: &Observable,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<Vec<f64>> {
    if !group.is_compact() {
        return Err(Error::NoHaarMeasure(group.tag()));
    }
    obs.validate(complex)?;
    let run = || {
        (0..samples as u64)
            .into_par_iter()
            .map(|k| eval_sample(complex, group, obs, &mut sample_rng(seed, k)))
            .collect::<Result<Vec<f64>>>()
    };
    match workers {
        None => run(),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w.max(1))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(run),
    }
}

/// Mean and standard error (unbiased variance) of a sample.
pub fn estimate(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let dev: Vec<f64> = values.iter().map(|x| (x - mean).powi(2)).collect();
    let var = pairwise_sum(&dev) / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    Ok(())
}

/// Plain Monte Carlo estimate of `E[obs]`.
pub fn expectation(
    complex: Option<&SimplicialComplex2>,
    group: Group,
    obs: &Observable,
    samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    expectation_with_workers(complex, group, obs, samples, seed, None)
}

pub fn expectation_with_workers(
    complex: Option<&SimplicialComplex2>,
    group: Group,
    obs: &Observable,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
) -> Result<McEstimate> {
    check_samples(samples)?;
    let values = sample_values(complex, group, obs, samples, seed, workers)?;
    Ok(to_estimate(obs, group, samples, seed, &values))
}

fn to_estimate(obs: &Observable, group: Group, samples: usize, seed: u64, values: &[f64]) -> McEstimate {
    let (mean, std_error) = estimate(values);
    McEstimate {
        observable: obs.tag().to_string(),
        group: group.tag(),
        samples,
        seed,
        mean,
        std_error,
    }
}

/// Distribution of the indicator over random `n × n` PC matrices.
pub fn ii_distribution(
    group: Group,
    n: usize,
    samples: usize,
    seed: u64,
    indicator: Indicator,
) -> Result<(Histogram, McEstimate)> {
    check_samples(samples)?;
    let obs = Observable::IiOfRandomMatrix { n, indicator };
    let values = sample_values(None, group, &obs, samples, seed, None)?;
    Ok((
        Histogram::from_values(&values, HISTOGRAM_BINS),
        to_estimate(&obs, group, samples, seed, &values),
    ))
}

/// Full report written by the command line front end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    #[serde(flatten)]
    pub estimate: McEstimate,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub histogram: Option<Histogram>,
}

/// Runs an estimate and builds its report, with a histogram of the sample
/// values when requested.
pub fn run_report(
    complex: Option<&SimplicialComplex2>,
    group: Group,
    obs: &Observable,
    samples: usize,
    seed: u64,
    workers: Option<usize>,
    with_histogram: bool,
) -> Result<McReport> {
    check_samples(samples)?;
    let values = sample_values(complex, group, obs, samples, seed, workers)?;
    Ok(McReport {
        estimate: to_estimate(obs, group, samples, seed, &values),
        histogram: with_histogram.then(|| Histogram::from_values(&values, HISTOGRAM_BINS)),
    })
}
