use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offset added to the cutoff scale for classes still alive there.
pub const DEFAULT_CAP_OFFSET: f64 = 2.0;

/// A persistence interval `[birth, death)` in homology degree `dim`.
///
/// Classes that never die inside the filtration are `capped`: their death is
/// the artificial value `t_max + r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bar {
    pub dim: usize,
    pub birth: f64,
    pub death: f64,
    pub capped: bool,
}

impl Bar {
    pub fn length(&self) -> f64 {
        self.death - self.birth
    }

    /// Birth and death coincide: a reduction artifact, not a feature.
    pub fn is_zero_length(&self) -> bool {
        self.death == self.birth
    }

    pub fn alive_at(&self, eps: f64) -> bool {
        self.birth <= eps && eps < self.death
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceDiagram {
    pub bars: Vec<Bar>,
    pub max_dim: usize,
    pub t_max: f64,
    pub r: f64,
}

impl PersistenceDiagram {
    pub fn new(mut bars: Vec<Bar>, max_dim: usize, t_max: f64, r: f64) -> Self {
        sort_bars(&mut bars);
        Self { bars, max_dim, t_max, r }
    }

    pub fn bars_of_dim(&self, dim: usize) -> impl Iterator<Item = &Bar> + '_ {
        self.bars.iter().filter(move |b| b.dim == dim)
    }

    pub fn count(&self, dim: usize) -> usize {
        self.bars_of_dim(dim).count()
    }

    /// Bars of degree `dim` with positive length.
    pub fn features(&self, dim: usize) -> impl Iterator<Item = &Bar> + '_ {
        self.bars_of_dim(dim).filter(|b| !b.is_zero_length())
    }

    /// Betti numbers `beta_0..=beta_max_dim` of the complex at scale `eps`.
    pub fn betti_at(&self, eps: f64) -> Result<Vec<usize>> {
        if !(0.0..=self.t_max).contains(&eps) {
            return Err(Error::InvalidParameter(format!(
                "scale {eps} outside [0, {}]",
                self.t_max
            )));
        }
        let mut betti = vec![0; self.max_dim + 1];
        for b in self.bars.iter().filter(|b| b.alive_at(eps)) {
            if b.dim <= self.max_dim {
                betti[b.dim] += 1;
            }
        }
        Ok(betti)
    }
}

/// Re-caps every unpaired bar at `t_max + r`; finite bars are untouched.
pub fn cap_infinite_bars(diagram: &PersistenceDiagram, t_max: f64, r: f64) -> Result<PersistenceDiagram> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("cap offset r must be positive, got {r}")));
    }
    let bars = diagram
        .bars
        .iter()
        .map(|b| {
            if b.capped {
                Bar { death: t_max + r, ..*b }
            } else {
                *b
            }
        })
        .collect();
    Ok(PersistenceDiagram::new(bars, diagram.max_dim, t_max, r))
}

pub(crate) fn sort_bars(bars: &mut [Bar]) {
    bars.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.total_cmp(&b.death))
            .then(a.capped.cmp(&b.capped))
    });
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bar(dim: usize, birth: f64, death: f64, capped: bool) -> Bar {
        Bar { dim, birth, death, capped }
    }

    #[test]
    fn capping() {
        let d = PersistenceDiagram::new(vec![bar(0, 0.0, 3.0, true)], 1, 1.0, 2.0);
        let c = cap_infinite_bars(&d, 5.0, 2.0).unwrap();
        assert_eq!(c.bars, vec![bar(0, 0.0, 7.0, true)]);

        let finite = PersistenceDiagram::new(vec![bar(0, 0.0, 1.0, false), bar(1, 1.0, 1.5, false)], 1, 5.0, 2.0);
        assert_eq!(cap_infinite_bars(&finite, 5.0, 2.0).unwrap(), finite);

        let two = PersistenceDiagram::new(vec![bar(0, 0.0, 0.0, true), bar(1, 1.0, 0.0, true)], 1, 5.0, 2.0);
        let r2 = cap_infinite_bars(&two, 5.0, 2.0).unwrap();
        let r3 = cap_infinite_bars(&two, 5.0, 3.0).unwrap();
        for (a, b) in r2.bars.iter().zip(&r3.bars) {
            assert_eq!(b.death - a.death, 1.0);
        }
        assert!(cap_infinite_bars(&two, 5.0, 0.0).is_err());
    }

    #[test]
    fn betti_range() {
        let d = PersistenceDiagram::new(vec![bar(0, 0.0, 7.0, true)], 1, 5.0, 2.0);
        assert_eq!(d.betti_at(0.0).unwrap(), vec![1, 0]);
        assert!(d.betti_at(5.5).is_err());
        assert!(d.betti_at(-0.1).is_err());
    }
}
