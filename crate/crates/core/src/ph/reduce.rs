//! Column reduction over the two-element field.
//!
//! Two equivalent matrices are supported. [`Reduction::Boundary`] reduces the
//! boundary matrix in filtration order, one dimension at a time from
//! `max_dim + 1` down to 1 (the twist order): each pivot row found in
//! dimension `k + 1` names a positive `k`-simplex whose own column must
//! reduce to zero, so it is skipped ("clearing").
//!
//! [`Reduction::Coboundary`] reduces the anti-transposed matrix (persistent
//! cohomology), dimensions ascending, clearing the `(k+1)`-columns that were
//! pivots in dimension `k`. Both yield the same persistence pairs; the
//! coboundary form never touches the many triangles that only create
//! 2-cycles, which makes it much faster on Rips complexes.

use serde::{Deserialize, Serialize};

use super::diagram::{Bar, PersistenceDiagram, DEFAULT_CAP_OFFSET};
use super::filtration::{FaceIndex, Filtration};
use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reduction {
    Boundary,
    #[default]
    Coboundary,
}

/// Persistence diagram of `filtration` in degrees `0..=max_dim`, with
/// unpaired classes capped at `max_eps + 2`.
pub fn compute_persistence(filtration: &Filtration) -> Result<PersistenceDiagram> {
    compute_persistence_with(filtration, DEFAULT_CAP_OFFSET, Reduction::default())
}

pub fn compute_persistence_capped(filtration: &Filtration, r: f64) -> Result<PersistenceDiagram> {
    compute_persistence_with(filtration, r, Reduction::default())
}

pub fn compute_persistence_with(filtration: &Filtration, r: f64, reduction: Reduction) -> Result<PersistenceDiagram> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("cap offset r must be positive, got {r}")));
    }
    let pairing = match reduction {
        Reduction::Boundary => reduce_boundary(filtration)?,
        Reduction::Coboundary => reduce_coboundary(filtration)?,
    };
    Ok(collect_bars(filtration, &pairing, r))
}

/// Result of a reduction, indexed by filtration position.
struct Pairing {
    /// `partner[i]` = the simplex paired with `i` (either direction).
    partner: Vec<u32>,
}

fn collect_bars(filtration: &Filtration, pairing: &Pairing, r: f64) -> PersistenceDiagram {
    let simplices = filtration.simplices();
    let max_dim = filtration.max_dim();
    let t_max = filtration.max_eps();
    let mut bars = Vec::new();
    for (pos, s) in simplices.iter().enumerate() {
        let dim = s.dim();
        if dim > max_dim {
            continue;
        }
        match pairing.partner[pos] {
            NONE => bars.push(Bar {
                dim,
                birth: s.value,
                death: t_max + r,
                capped: true,
            }),
            other if other as usize > pos => bars.push(Bar {
                dim,
                birth: s.value,
                death: simplices[other as usize].value,
                capped: false,
            }),
            // a death simplex; its bar is emitted with the birth
            _ => {}
        }
    }
    PersistenceDiagram::new(bars, max_dim, t_max, r)
}

fn reduce_boundary(filtration: &Filtration) -> Result<Pairing> {
    let simplices = filtration.simplices();
    let n = simplices.len();
    let max_dim = filtration.max_dim();
    let index = FaceIndex::new(filtration)?;

    let top = simplices.iter().map(|s| s.dim()).max().unwrap_or(0);
    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); top + 1];
    for (pos, s) in simplices.iter().enumerate() {
        by_dim[s.dim()].push(pos as u32);
    }

    // pivot_owner[row] = column whose reduced pivot is `row`
    let mut pivot_owner = vec![NONE; n];
    let mut reduced: Vec<Option<Vec<u32>>> = vec![None; n];
    let mut cleared = vec![false; n];
    let mut scratch = Vec::new();

    for dim in (1..=top.min(max_dim + 1)).rev() {
        for &j in &by_dim[dim] {
            let j = j as usize;
            if cleared[j] {
                continue;
            }
            let mut col: Vec<u32> = index
                .boundary(&simplices[j].vertices)
                .map(|face| face.expect("validated filtration contains all faces"))
                .collect();
            col.sort_unstable();
            while let Some(&pivot) = col.last() {
                let owner = pivot_owner[pivot as usize];
                if owner == NONE {
                    break;
                }
                let other = reduced[owner as usize].as_ref().expect("owner column is stored");
                add_sorted(&col, other, &mut scratch);
                std::mem::swap(&mut col, &mut scratch);
            }
            if let Some(&pivot) = col.last() {
                pivot_owner[pivot as usize] = j as u32;
                cleared[pivot as usize] = true;
                reduced[j] = Some(col);
            }
        }
    }

    let mut partner = vec![NONE; n];
    for (row, &col) in pivot_owner.iter().enumerate() {
        if col != NONE {
            partner[row] = col;
            partner[col as usize] = row as u32;
        }
    }
    Ok(Pairing { partner })
}

fn reduce_coboundary(filtration: &Filtration) -> Result<Pairing> {
    let simplices = filtration.simplices();
    let n = simplices.len();
    let max_dim = filtration.max_dim();
    let n_points = filtration.n_points();
    let index = FaceIndex::complete(filtration)?;
    // Row coordinates are reversed positions so the pivot (earliest coface)
    // is the largest entry.
    let flip = |pos: u32| (n as u32 - 1) - pos;

    let mut by_dim: Vec<Vec<u32>> = vec![Vec::new(); max_dim + 1];
    for (pos, s) in simplices.iter().enumerate() {
        if s.dim() <= max_dim {
            by_dim[s.dim()].push(pos as u32);
        }
    }

    let mut partner = vec![NONE; n];
    let mut reduced: Vec<Option<Vec<u32>>> = vec![None; n];
    // row (flipped) -> owning column position
    let mut pivot_owner = vec![NONE; n];
    let mut col = Vec::new();
    let mut scratch = Vec::new();

    for columns in &by_dim {
        for &j in columns.iter().rev() {
            let j = j as usize;
            if partner[j] != NONE {
                // cleared: already the death of a lower-degree class
                continue;
            }
            index.coboundary(&simplices[j].vertices, n_points, &mut col);
            for entry in col.iter_mut() {
                *entry = flip(*entry);
            }
            col.sort_unstable();
            while let Some(&pivot) = col.last() {
                let owner = pivot_owner[pivot as usize];
                if owner == NONE {
                    break;
                }
                let other = reduced[owner as usize].as_ref().expect("owner column is stored");
                add_sorted(&col, other, &mut scratch);
                std::mem::swap(&mut col, &mut scratch);
            }
            if let Some(&pivot) = col.last() {
                let row = flip(pivot);
                pivot_owner[pivot as usize] = j as u32;
                partner[j] = row;
                partner[row as usize] = j as u32;
                reduced[j] = Some(std::mem::take(&mut col));
            }
        }
    }
    Ok(Pairing { partner })
}

/// Symmetric difference of two ascending index lists.
fn add_sorted(a: &[u32], b: &[u32], out: &mut Vec<u32>) {
    out.clear();
    out.reserve(a.len() + b.len());
    let (mut i, mut k) = (0, 0);
    while i < a.len() && k < b.len() {
        match a[i].cmp(&b[k]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[k]);
                k += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                k += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[k..]);
}
