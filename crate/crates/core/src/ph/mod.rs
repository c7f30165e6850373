//! Vietoris–Rips persistent homology over the two-element field.
//!
//! A simplex is present at scale `eps` once `eps >= value`, where `value` is
//! its longest edge (closed convention). Diagrams coincide with those of the
//! open `d < eps` convention as multisets of intervals.

mod diagram;
mod filtration;
mod reduce;

pub use diagram::{cap_infinite_bars, Bar, PersistenceDiagram, DEFAULT_CAP_OFFSET};
pub use filtration::{rips_filtration, Filtration, Simplex, Vertices};
pub use reduce::{compute_persistence, compute_persistence_capped, compute_persistence_with, Reduction};

use crate::embed::PointCloud;
use crate::error::Result;

/// Where the filtration stops.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TMax {
    /// The cloud's diameter: the full filtration.
    Diameter,
    Fixed(f64),
}

impl TMax {
    pub fn resolve(self, cloud: &PointCloud) -> f64 {
        match self {
            // a single point has diameter 0; any positive cutoff is equivalent
            TMax::Diameter => {
                let d = cloud.diameter();
                if d > 0.0 { d } else { f64::MIN_POSITIVE }
            }
            TMax::Fixed(t) => t,
        }
    }
}

/// Filtration + reduction + capping for one cloud.
pub fn diagram_of_cloud(cloud: &PointCloud, max_dim: usize, t_max: TMax, r: f64) -> Result<PersistenceDiagram> {
    let eps = t_max.resolve(cloud);
    let filtration = rips_filtration(cloud, eps, max_dim)?;
    compute_persistence_capped(&filtration, r)
}
