//! k-means regime tagging: k-means++ seeding, Lloyd iterations, restarts.
//!
//! Centroids are reordered by ascending Euclidean norm (ties broken
//! lexicographically) after fitting, so label 0 is always the cluster nearest
//! the origin and labels depend only on the centroid set.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::rng::{seeded_rng, TaggerRng};

pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_MAX_ITER: usize = 300;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KMeansConfig {
    pub k: usize,
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Stop once no centroid moves farther than this.
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_restarts() -> usize {
    DEFAULT_RESTARTS
}
fn default_max_iter() -> usize {
    DEFAULT_MAX_ITER
}
fn default_tol() -> f64 {
    DEFAULT_TOL
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self { k, seed, restarts: DEFAULT_RESTARTS, max_iter: DEFAULT_MAX_ITER, tol: DEFAULT_TOL }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("tol must be finite and non-negative, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansModel {
    pub k: usize,
    pub centroids: Vec<Vec<f64>>,
    /// Sum of squared distances from each training point to its centroid.
    pub inertia: f64,
    pub seed: u64,
    #[serde(default)]
    pub iterations_run: usize,
    /// Inertia after every assignment step of the winning restart.
    #[serde(skip)]
    pub inertia_trace: Vec<f64>,
}

impl KMeansModel {
    pub fn dim(&self) -> usize {
        self.centroids.first().map_or(0, Vec::len)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedWindow {
    pub window_index: usize,
    pub start_time: f64,
    pub features: Vec<f64>,
    pub label: usize,
}

/// [`kmeans_fit_with`] using the default restart count.
pub fn kmeans_fit(features: &[Vec<f64>], k: usize, seed: u64, max_iter: usize, tol: f64) -> Result<KMeansModel> {
    kmeans_fit_with(features, &KMeansConfig { k, seed, restarts: DEFAULT_RESTARTS, max_iter, tol })
}

pub fn kmeans_fit_with(features: &[Vec<f64>], config: &KMeansConfig) -> Result<KMeansModel> {
    config.validate()?;
    let dim = check_data(features, config.k)?;
    let mut rng = seeded_rng(config.seed);
    let mut best: Option<Run> = None;
    for _ in 0..config.restarts {
        let run = lloyd(features, dim, config, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    let mut centroids = best.centroids;
    centroids.sort_by(|a, b| norm2(a).total_cmp(&norm2(b)).then_with(|| lex_cmp(a, b)));
    Ok(KMeansModel {
        k: config.k,
        centroids,
        inertia: best.inertia,
        seed: config.seed,
        iterations_run: best.iterations,
        inertia_trace: best.trace,
    })
}

/// Index of the nearest centroid; ties go to the lowest index.
pub fn kmeans_predict(model: &KMeansModel, feature: &[f64]) -> Result<usize> {
    if feature.len() != model.dim() {
        return Err(Error::DimensionMismatch { expected: model.dim(), actual: feature.len() });
    }
    Ok(nearest(&model.centroids, feature).0)
}

pub fn predict_all(model: &KMeansModel, features: &[Vec<f64>]) -> Result<Vec<usize>> {
    features.iter().map(|f| kmeans_predict(model, f)).collect()
}

pub fn tag_windows(model: &KMeansModel, features: &[FeatureVector]) -> Result<Vec<TaggedWindow>> {
    features
        .iter()
        .map(|f| {
            Ok(TaggedWindow {
                window_index: f.window_index,
                start_time: f.start_time,
                features: f.lengths.clone(),
                label: kmeans_predict(model, &f.lengths)?,
            })
        })
        .collect()
}

fn check_data(features: &[Vec<f64>], k: usize) -> Result<usize> {
    if features.len() < k {
        return Err(Error::TooShort { required: k, actual: features.len() });
    }
    let dim = features[0].len();
    if dim == 0 {
        return Err(Error::InvalidParameter("feature vectors are empty".into()));
    }
    for (i, f) in features.iter().enumerate() {
        if f.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: f.len() });
        }
        if f.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("feature vector {i}")));
        }
    }
    Ok(dim)
}

struct Run {
    centroids: Vec<Vec<f64>>,
    inertia: f64,
    iterations: usize,
    trace: Vec<f64>,
}

fn lloyd(data: &[Vec<f64>], dim: usize, config: &KMeansConfig, rng: &mut TaggerRng) -> Run {
    let mut centroids = plus_plus(data, config.k, rng);
    let (mut labels, mut dists, mut inertia) = assign(data, &centroids);
    let mut trace = vec![inertia];
    let mut iterations = 0;
    for it in 1..=config.max_iter {
        let updated = update(data, dim, &centroids, &labels, &dists);
        let shift = centroids
            .iter()
            .zip(&updated)
            .map(|(a, b)| dist2(a, b).sqrt())
            .fold(0.0, f64::max);
        centroids = updated;
        (labels, dists, inertia) = assign(data, &centroids);
        debug_assert!(
            inertia <= trace[trace.len() - 1] * (1.0 + 1e-12) + 1e-300,
            "Lloyd step increased inertia"
        );
        trace.push(inertia);
        iterations = it;
        if shift <= config.tol {
            break;
        }
    }
    Run { centroids, inertia, iterations, trace }
}

fn plus_plus(data: &[Vec<f64>], k: usize, rng: &mut TaggerRng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centroids = vec![data[rng.random_range(0..n)].clone()];
    let mut d2: Vec<f64> = data.iter().map(|p| dist2(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if acc > target && w > 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = data[pick].clone();
        for (d, p) in d2.iter_mut().zip(data) {
            *d = d.min(dist2(p, &c));
        }
        centroids.push(c);
    }
    centroids
}

fn assign(data: &[Vec<f64>], centroids: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, f64) {
    let mut labels = Vec::with_capacity(data.len());
    let mut dists = Vec::with_capacity(data.len());
    for p in data {
        let (l, d) = nearest(centroids, p);
        labels.push(l);
        dists.push(d);
    }
    let inertia = dists.iter().sum();
    (labels, dists, inertia)
}

/// Means of the assigned points. An empty cluster takes the point farthest
/// from its current centroid.
fn update(data: &[Vec<f64>], dim: usize, old: &[Vec<f64>], labels: &[usize], dists: &[f64]) -> Vec<Vec<f64>> {
    let k = old.len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in data.iter().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(p) {
            *s += x;
        }
    }
    let mut taken = vec![false; data.len()];
    for c in 0..k {
        if counts[c] > 0 {
            for s in sums[c].iter_mut() {
                *s /= counts[c] as f64;
            }
            continue;
        }
        let far = (0..data.len())
            .filter(|&i| !taken[i])
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        match far {
            Some(i) => {
                taken[i] = true;
                sums[c] = data[i].clone();
            }
            None => sums[c] = old[c].clone(),
        }
    }
    sums
}

fn nearest(centroids: &[Vec<f64>], p: &[f64]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, c) in centroids.iter().enumerate() {
        let d = dist2(c, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn norm2(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum()
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| vec![x]).collect()
    }

    #[test]
    fn two_separated_pairs() {
        let data = col(&[0.0, 0.1, 10.0, 10.1]);
        let m = kmeans_fit(&data, 2, 1, 300, 1e-9).unwrap();
        assert!((m.centroids[0][0] - 0.05).abs() < 1e-12);
        assert!((m.centroids[1][0] - 10.05).abs() < 1e-12);
        assert_eq!(predict_all(&m, &data).unwrap(), vec![0, 0, 1, 1]);
    }

    #[test]
    fn single_cluster_is_the_mean() {
        let data = vec![vec![1.0, 2.0], vec![3.0, -2.0], vec![5.0, 6.0]];
        let m = kmeans_fit(&data, 1, 7, 300, 1e-9).unwrap();
        assert!((m.centroids[0][0] - 3.0).abs() < 1e-12);
        assert!((m.centroids[0][1] - 2.0).abs() < 1e-12);
        // per-coordinate variance times n: (8 + 32)
        assert!((m.inertia - 40.0).abs() < 1e-9);
    }

    #[test]
    fn predict_ties_and_shifts() {
        let m = KMeansModel {
            k: 2,
            centroids: vec![vec![0.0], vec![2.0]],
            inertia: 0.0,
            seed: 0,
            iterations_run: 0,
            inertia_trace: vec![],
        };
        assert_eq!(kmeans_predict(&m, &[2.0]).unwrap(), 1);
        assert_eq!(kmeans_predict(&m, &[1.0]).unwrap(), 0);
        assert_eq!(kmeans_predict(&m, &[1.0 + 1e-9]).unwrap(), 1);
        assert!(kmeans_predict(&m, &[1.0, 2.0]).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(kmeans_fit(&col(&[1.0]), 2, 0, 10, 1e-9).is_err());
        assert!(kmeans_fit(&col(&[1.0, f64::NAN]), 1, 0, 10, 1e-9).is_err());
        assert!(kmeans_fit(&col(&[1.0, 2.0]), 0, 0, 10, 1e-9).is_err());
        assert!(kmeans_fit(&[vec![1.0], vec![1.0, 2.0]], 1, 0, 10, 1e-9).is_err());
    }

    #[test]
    fn empty_cluster_takes_farthest_point() {
        let data = col(&[0.0, 1.0, 9.0]);
        let old = vec![vec![0.5], vec![100.0]];
        let (labels, dists, _) = assign(&data, &old);
        assert_eq!(labels, vec![0, 0, 0]);
        let new = update(&data, 1, &old, &labels, &dists);
        assert_eq!(new[1], vec![9.0]);
    }

    #[test]
    fn duplicate_points() {
        let data = col(&[3.0; 5]);
        let m = kmeans_fit(&data, 2, 3, 50, 1e-9).unwrap();
        assert_eq!(m.inertia, 0.0);
    }
}
