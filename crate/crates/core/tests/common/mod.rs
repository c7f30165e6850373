#![allow(dead_code)]

pub mod oracle;

use rand::Rng;
use regime_tagger::embed::PointCloud;
use regime_tagger::ph::PersistenceDiagram;

use oracle::OracleBar;

/// Positive-length bars of a computed diagram, capped deaths as infinity.
pub fn as_oracle_bars(diagram: &PersistenceDiagram) -> Vec<OracleBar> {
    let mut bars: Vec<OracleBar> = diagram
        .bars
        .iter()
        .filter(|b| !b.is_zero_length())
        .map(|b| (b.dim, b.birth, if b.capped { f64::INFINITY } else { b.death }))
        .collect();
    oracle::sort_bars(&mut bars);
    bars
}

pub fn random_points(rng: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect()).collect()
}

pub fn cloud_of(points: &[Vec<f64>]) -> PointCloud {
    PointCloud::from_points(points).unwrap()
}

/// `n` points on the unit circle at random angles.
pub fn circle_sample(rng: &mut impl Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let a = rng.random_range(0.0..std::f64::consts::TAU);
            vec![a.cos(), a.sin()]
        })
        .collect()
}

pub fn even_circle(n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|i| {
            let a = std::f64::consts::TAU * i as f64 / n as f64;
            vec![a.cos(), a.sin()]
        })
        .collect()
}

/// Moves every point by a random vector of norm exactly `delta`.
pub fn perturb(rng: &mut impl Rng, points: &[Vec<f64>], delta: f64) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            let dir: Vec<f64> = p.iter().map(|_| rng.random_range(-1.0..1.0)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt().max(1e-300);
            p.iter().zip(&dir).map(|(x, d)| x + delta * d / norm).collect()
        })
        .collect()
}

/// Sorted (descending) positive degree-1 lengths, finite bars only.
pub fn degree_one_lengths(diagram: &PersistenceDiagram) -> Vec<f64> {
    let mut l: Vec<f64> = diagram.features(1).filter(|b| !b.capped).map(|b| b.length()).collect();
    l.sort_by(|a, b| b.total_cmp(a));
    l
}

/// `per` points around each center with isotropic Gaussian noise `sd`,
/// returned with their planted labels.
pub fn planted_blobs(rng: &mut impl Rng, centers: &[Vec<f64>], per: usize, sd: f64) -> (Vec<Vec<f64>>, Vec<usize>) {
    use rand_distr::{Distribution, Normal};
    let noise = Normal::new(0.0, sd).unwrap();
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for (l, c) in centers.iter().enumerate() {
        for _ in 0..per {
            pts.push(c.iter().map(|x| x + noise.sample(rng)).collect());
            labels.push(l);
        }
    }
    (pts, labels)
}

/// Fraction of items on which `a` and `b` agree under the best relabeling of
/// `b` (exhaustive over permutations, so small label counts only).
pub fn agreement_up_to_permutation(a: &[usize], b: &[usize], k: usize) -> f64 {
    fn perms(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in perms(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    let best = perms(k)
        .into_iter()
        .map(|p| a.iter().zip(b).filter(|&(&x, &y)| x == p[y]).count())
        .max()
        .unwrap_or(0);
    best as f64 / a.len() as f64
}
