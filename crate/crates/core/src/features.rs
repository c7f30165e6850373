//! Fixed-length feature vectors from persistence diagrams.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ph::PersistenceDiagram;

/// Which bars feed the feature vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FeatureSpec {
    /// Number of longest bars kept per window.
    pub k_lengths: usize,
    /// Homology degree of those bars.
    pub dim: usize,
    /// Extra degree-0 lengths appended after the main block (0 disables).
    pub h0_lengths: usize,
    /// Standardize each column to zero mean and unit variance.
    pub standardize: bool,
}

impl Default for FeatureSpec {
    fn default() -> Self {
        Self { k_lengths: 2, dim: 1, h0_lengths: 0, standardize: false }
    }
}

impl FeatureSpec {
    pub fn width(&self) -> usize {
        self.k_lengths + self.h0_lengths
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_lengths == 0 {
            return Err(Error::InvalidParameter("k_lengths must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub window_index: usize,
    pub start_time: f64,
    pub lengths: Vec<f64>,
}

/// The `k` longest positive-length bars of degree `dim`, descending,
/// zero-padded. Capped bars count with their capped death.
pub fn top_persistence_lengths(diagram: &PersistenceDiagram, k: usize, dim: usize) -> Vec<f64> {
    let mut lengths: Vec<f64> = diagram.features(dim).map(|b| b.length()).collect();
    lengths.sort_unstable_by(|a, b| b.total_cmp(a));
    lengths.resize(k, 0.0);
    lengths
}

pub fn feature_vector(diagram: &PersistenceDiagram, window_index: usize, start_time: f64, spec: &FeatureSpec) -> FeatureVector {
    let mut lengths = top_persistence_lengths(diagram, spec.k_lengths, spec.dim);
    if spec.h0_lengths > 0 {
        lengths.extend(top_persistence_lengths(diagram, spec.h0_lengths, 0));
    }
    FeatureVector { window_index, start_time, lengths }
}

/// One vector per diagram, in input order. `starts[i]` is the start time of
/// window `i`.
pub fn featurize_windows(diagrams: &[PersistenceDiagram], starts: &[f64], spec: &FeatureSpec) -> Result<Vec<FeatureVector>> {
    spec.validate()?;
    if diagrams.is_empty() {
        return Err(Error::Empty("no diagrams to featurize".into()));
    }
    if starts.len() != diagrams.len() {
        return Err(Error::DimensionMismatch { expected: diagrams.len(), actual: starts.len() });
    }
    let mut out: Vec<FeatureVector> = diagrams
        .iter()
        .zip(starts)
        .enumerate()
        .map(|(i, (d, &t))| feature_vector(d, i, t, spec))
        .collect();
    if spec.standardize {
        standardize(&mut out);
    }
    Ok(out)
}

/// Per-column z-scores; constant columns become 0.
pub fn standardize(vectors: &mut [FeatureVector]) {
    let Some(width) = vectors.first().map(|v| v.lengths.len()) else {
        return;
    };
    let n = vectors.len() as f64;
    for c in 0..width {
        let mean = vectors.iter().map(|v| v.lengths[c]).sum::<f64>() / n;
        let var = vectors.iter().map(|v| (v.lengths[c] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for v in vectors.iter_mut() {
            v.lengths[c] = if sd > 0.0 { (v.lengths[c] - mean) / sd } else { 0.0 };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ph::Bar;

    fn bar(dim: usize, birth: f64, death: f64, capped: bool) -> Bar {
        Bar { dim, birth, death, capped }
    }

    #[test]
    fn sort_truncate_pad() {
        let d = PersistenceDiagram::new(
            vec![bar(1, 0.0, 5.0, false), bar(1, 1.0, 1.3, false), bar(1, 2.0, 2.1, false), bar(0, 0.0, 9.0, false)],
            1,
            10.0,
            2.0,
        );
        let l = top_persistence_lengths(&d, 2, 1);
        assert_eq!(l[0], 5.0);
        assert!((l[1] - 0.3).abs() < 1e-15);

        let empty = PersistenceDiagram::new(vec![], 1, 1.0, 2.0);
        assert_eq!(top_persistence_lengths(&empty, 3, 1), vec![0.0; 3]);

        let capped = PersistenceDiagram::new(vec![bar(1, 1.0, 7.0, true)], 1, 5.0, 2.0);
        assert_eq!(top_persistence_lengths(&capped, 2, 1), vec![6.0, 0.0]);

        let zero = PersistenceDiagram::new(vec![bar(1, 1.0, 1.0, false)], 1, 5.0, 2.0);
        assert_eq!(top_persistence_lengths(&zero, 1, 1), vec![0.0]);
    }

    #[test]
    fn batch_keeps_order() {
        let ds = vec![
            PersistenceDiagram::new(vec![bar(1, 0.0, 1.0, false)], 1, 5.0, 2.0),
            PersistenceDiagram::new(vec![], 1, 5.0, 2.0),
            PersistenceDiagram::new(vec![bar(1, 0.0, 3.0, false)], 1, 5.0, 2.0),
        ];
        let v = featurize_windows(&ds, &[0.0, 1.0, 2.0], &FeatureSpec::default()).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.iter().map(|f| f.lengths[0]).collect::<Vec<_>>(), vec![1.0, 0.0, 3.0]);
        assert_eq!(v[2].window_index, 2);
        assert_eq!(v[1].start_time, 1.0);
        assert!(featurize_windows(&[], &[], &FeatureSpec::default()).is_err());
    }

    #[test]
    fn degree_zero_block_and_standardization() {
        let ds = vec![
            PersistenceDiagram::new(vec![bar(1, 0.0, 1.0, false), bar(0, 0.0, 0.5, false)], 1, 5.0, 2.0),
            PersistenceDiagram::new(vec![bar(1, 0.0, 3.0, false), bar(0, 0.0, 0.5, false)], 1, 5.0, 2.0),
        ];
        let spec = FeatureSpec { k_lengths: 1, dim: 1, h0_lengths: 1, standardize: false };
        let v = featurize_windows(&ds, &[0.0, 1.0], &spec).unwrap();
        assert_eq!(v[0].lengths, vec![1.0, 0.5]);
        let spec = FeatureSpec { standardize: true, ..spec };
        let v = featurize_windows(&ds, &[0.0, 1.0], &spec).unwrap();
        assert_eq!(v[0].lengths, vec![-1.0, 0.0]);
        assert_eq!(v[1].lengths, vec![1.0, 0.0]);
    }
}
