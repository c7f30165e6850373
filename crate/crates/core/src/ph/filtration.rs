use std::cmp::Ordering;

use smallvec::SmallVec;

use crate::embed::PointCloud;
use crate::error::{Error, Result};

/// Sorted vertex indices of a simplex; inline up to tetrahedra.
pub type Vertices = SmallVec<[u32; 4]>;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    pub vertices: Vertices,
    /// Scale at which the simplex enters: its largest edge length.
    pub value: f64,
}

impl Simplex {
    pub fn new(vertices: &[u32], value: f64) -> Self {
        Self {
            vertices: Vertices::from_slice(vertices),
            value,
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Filtration order: value, then dimension, then vertices lexicographically.
    pub fn filtration_cmp(&self, other: &Self) -> Ordering {
        self.value
            .total_cmp(&other.value)
            .then(self.vertices.len().cmp(&other.vertices.len()))
            .then_with(|| self.vertices.cmp(&other.vertices))
    }
}

/// Vietoris–Rips (clique) filtration of a point cloud.
///
/// Holds every simplex of dimension `<= max_dim + 1` with value `<= max_eps`;
/// the extra dimension is what kills degree-`max_dim` cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct Filtration {
    simplices: Vec<Simplex>,
    max_dim: usize,
    max_eps: f64,
    n_points: usize,
}

impl Filtration {
    /// Sorts `simplices` into filtration order and checks the face condition.
    pub fn from_simplices(mut simplices: Vec<Simplex>, n_points: usize, max_dim: usize, max_eps: f64) -> Result<Self> {
        simplices.sort_by(Simplex::filtration_cmp);
        let f = Self {
            simplices,
            max_dim,
            max_eps,
            n_points,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn max_eps(&self) -> f64 {
        self.max_eps
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Checks vertex sorting, value monotonicity and that every face of every
    /// simplex precedes it.
    pub fn validate(&self) -> Result<()> {
        let index = FaceIndex::new(self)?;
        for (pos, s) in self.simplices.iter().enumerate() {
            if s.vertices.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidParameter(format!("simplex {pos} has unsorted vertices")));
            }
            if s.vertices.iter().any(|&v| v as usize >= self.n_points) {
                return Err(Error::InvalidParameter(format!("simplex {pos} references a missing vertex")));
            }
            if pos > 0 && self.simplices[pos - 1].value > s.value {
                return Err(Error::InvalidParameter(format!("filtration values decrease at {pos}")));
            }
            if s.dim() > 0 {
                for face in index.boundary(&s.vertices) {
                    match face {
                        Some(f) if (f as usize) < pos => {}
                        _ => return Err(Error::InvalidParameter(format!("simplex {pos} enters before one of its faces"))),
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds the Rips filtration of `cloud` up to scale `max_eps`.
pub fn rips_filtration(cloud: &PointCloud, max_eps: f64, max_dim: usize) -> Result<Filtration> {
    let n = cloud.len();
    if n == 0 {
        return Err(Error::Empty("point cloud".into()));
    }
    if !(max_eps > 0.0) {
        return Err(Error::InvalidParameter(format!("max_eps must be positive, got {max_eps}")));
    }
    if n > u32::MAX as usize {
        return Err(Error::InvalidParameter("too many points".into()));
    }

    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cloud.distance(i, j);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    // Higher neighbours within max_eps, ascending.
    let upper: Vec<Vec<u32>> = (0..n)
        .map(|i| (i + 1..n).filter(|&j| dist[i * n + j] <= max_eps).map(|j| j as u32).collect())
        .collect();

    let max_size = max_dim + 2;
    let mut simplices = Vec::new();
    let mut current = Vertices::new();
    for v in 0..n {
        current.push(v as u32);
        simplices.push(Simplex {
            vertices: current.clone(),
            value: 0.0,
        });
        if max_size > 1 {
            grow_cliques(&mut simplices, &mut current, 0.0, &upper[v], &upper, &dist, n, max_size);
        }
        current.pop();
    }
    simplices.sort_unstable_by(Simplex::filtration_cmp);

    Ok(Filtration {
        simplices,
        max_dim,
        max_eps,
        n_points: n,
    })
}

#[allow(clippy::too_many_arguments)]
fn grow_cliques(
    out: &mut Vec<Simplex>,
    current: &mut Vertices,
    value: f64,
    candidates: &[u32],
    upper: &[Vec<u32>],
    dist: &[f64],
    n: usize,
    max_size: usize,
) {
    for (k, &c) in candidates.iter().enumerate() {
        let cu = c as usize;
        let v = current
            .iter()
            .fold(value, |acc, &u| acc.max(dist[u as usize * n + cu]));
        current.push(c);
        out.push(Simplex {
            vertices: current.clone(),
            value: v,
        });
        if current.len() < max_size {
            // candidates are ascending, so the common neighbours above c are
            // the later candidates adjacent to c
            let next: Vec<u32> = candidates[k + 1..]
                .iter()
                .copied()
                .filter(|w| upper[cu].binary_search(w).is_ok())
                .collect();
            if !next.is_empty() {
                grow_cliques(out, current, v, &next, upper, dist, n, max_size);
            }
        }
        current.pop();
    }
}

/// Maps a simplex to its position in a filtration through the combinatorial
/// number system, one dense table per simplex size.
pub(crate) struct FaceIndex {
    binom: Vec<Vec<u64>>,
    positions: Vec<Vec<u32>>,
}

pub(crate) const ABSENT: u32 = u32::MAX;

impl FaceIndex {
    /// Indexes simplices with fewer than `limit` vertices.
    fn with_limit(f: &Filtration, limit: usize) -> Result<Self> {
        let n = f.n_points as u64;
        // binom[k][v] = C(v, k)
        let binom: Vec<Vec<u64>> = (0..=limit as u64)
            .map(|k| (0..=n).map(|v| binomial(v, k)).collect())
            .collect();
        if f.simplices.len() >= ABSENT as usize {
            return Err(Error::InvalidParameter("filtration too large".into()));
        }
        let mut positions: Vec<Vec<u32>> = (1..limit)
            .map(|size| vec![ABSENT; binom[size][f.n_points] as usize])
            .collect();
        for (pos, s) in f.simplices.iter().enumerate() {
            let size = s.vertices.len();
            if size < limit {
                let key = combinatorial_key(&binom, &s.vertices) as usize;
                positions[size - 1][key] = pos as u32;
            }
        }
        Ok(Self { binom, positions })
    }

    /// Index of all faces of the filtration's simplices.
    pub(crate) fn new(f: &Filtration) -> Result<Self> {
        let top = f.simplices.iter().map(|s| s.vertices.len()).max().unwrap_or(1);
        Self::with_limit(f, top)
    }

    /// Index of every simplex, for coface lookups.
    pub(crate) fn complete(f: &Filtration) -> Result<Self> {
        let top = f.simplices.iter().map(|s| s.vertices.len()).max().unwrap_or(1);
        Self::with_limit(f, top + 1)
    }

    /// Filtration position of each codimension-1 face, `None` if absent.
    pub(crate) fn boundary<'a>(&'a self, vertices: &'a [u32]) -> impl Iterator<Item = Option<u32>> + 'a {
        let size = vertices.len();
        (0..size).map(move |skip| {
            let mut key = 0u64;
            let mut slot = 1;
            for (i, &v) in vertices.iter().enumerate() {
                if i != skip {
                    key += self.binom[slot][v as usize];
                    slot += 1;
                }
            }
            let pos = self.positions[size - 2][key as usize];
            (pos != ABSENT).then_some(pos)
        })
    }

    /// Filtration positions of all codimension-1 cofaces present.
    pub(crate) fn coboundary(&self, vertices: &[u32], n_points: usize, out: &mut Vec<u32>) {
        out.clear();
        let size = vertices.len() + 1;
        if size > self.positions.len() {
            return;
        }
        let table = &self.positions[size - 1];
        // Inserting vertex c shifts the slots of all larger vertices up by one.
        let mut below = 0u64;
        let mut above: u64 = vertices
            .iter()
            .enumerate()
            .map(|(i, &v)| self.binom[i + 2][v as usize])
            .sum();
        let mut next = 0;
        for c in 0..n_points as u32 {
            if next < vertices.len() && vertices[next] == c {
                let v = c as usize;
                above -= self.binom[next + 2][v];
                below += self.binom[next + 1][v];
                next += 1;
                continue;
            }
            let key = below + self.binom[next + 1][c as usize] + above;
            let pos = table[key as usize];
            if pos != ABSENT {
                out.push(pos);
            }
        }
    }
}

fn combinatorial_key(binom: &[Vec<u64>], vertices: &[u32]) -> u64 {
    vertices
        .iter()
        .enumerate()
        .map(|(i, &v)| binom[i + 1][v as usize])
        .sum()
}

fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cloud(points: &[[f64; 2]]) -> PointCloud {
        PointCloud::from_points(points).unwrap()
    }

    fn summary(f: &Filtration) -> Vec<(usize, f64)> {
        f.simplices().iter().map(|s| (s.dim(), s.value)).collect()
    }

    #[test]
    fn two_points() {
        let f = rips_filtration(&cloud(&[[0.0, 0.0], [3.0, 0.0]]), 5.0, 1).unwrap();
        assert_eq!(summary(&f), vec![(0, 0.0), (0, 0.0), (1, 3.0)]);
        let f = rips_filtration(&cloud(&[[0.0, 0.0], [3.0, 0.0]]), 2.0, 1).unwrap();
        assert_eq!(f.len(), 2);
    }

    #[test]
    fn equilateral_triangle() {
        let h = 3f64.sqrt() / 2.0;
        let f = rips_filtration(&cloud(&[[0.0, 0.0], [1.0, 0.0], [0.5, h]]), 2.0, 1).unwrap();
        let dims: Vec<usize> = f.simplices().iter().map(Simplex::dim).collect();
        assert_eq!(dims, vec![0, 0, 0, 1, 1, 1, 2]);
        for s in &f.simplices()[3..] {
            assert!((s.value - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn unit_square() {
        let f = rips_filtration(&cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), 2.0, 1).unwrap();
        let count = |d: usize, v: f64| f.simplices().iter().filter(|s| s.dim() == d && (s.value - v).abs() < 1e-15).count();
        let r2 = 2f64.sqrt();
        assert_eq!(count(0, 0.0), 4);
        assert_eq!(count(1, 1.0), 4);
        assert_eq!(count(1, r2), 2);
        assert_eq!(count(2, r2), 4);
        assert_eq!(f.len(), 14);

        let f = rips_filtration(&cloud(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]), 2.0, 2).unwrap();
        assert_eq!(f.simplices().iter().filter(|s| s.dim() == 3).count(), 1);
        assert_eq!(f.simplices().last().unwrap().dim(), 3);
    }

    #[test]
    fn errors() {
        let c = cloud(&[[0.0, 0.0]]);
        assert!(rips_filtration(&c, 0.0, 1).is_err());
        let single = rips_filtration(&c, 1.0, 1).unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn validate_catches_bad_order() {
        let s = vec![Simplex::new(&[0], 0.0), Simplex::new(&[0, 1], 1.0)];
        assert!(Filtration::from_simplices(s, 2, 0, 1.0).is_err());
        let ok = vec![Simplex::new(&[1], 0.0), Simplex::new(&[0, 1], 1.0), Simplex::new(&[0], 0.0)];
        let f = Filtration::from_simplices(ok, 2, 0, 1.0).unwrap();
        assert_eq!(f.simplices()[2].vertices.as_slice(), &[0, 1]);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(100, 3), 161_700);
        assert_eq!(binomial(3, 4), 0);
    }
}
