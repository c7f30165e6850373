//! Brute-force persistence by rank counting.
//!
//! Shares no code with the crate's filtration or reduction: simplices are
//! enumerated as raw vertex subsets, and bars are recovered from persistent
//! Betti numbers `beta^{i,j} = dim Z(K_i) - dim(Z(K_i) ∩ B(K_j))` computed by
//! Gaussian elimination over GF(2) on `u128` bitsets (so at most 128
//! simplices per dimension).

/// `(dim, birth, death)`; `death` is `f64::INFINITY` for essential classes.
pub type OracleBar = (usize, f64, f64);

struct Cx {
    /// simplices[k] = (vertices, value), value = max pairwise distance
    simplices: Vec<Vec<(Vec<usize>, f64)>>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::new();
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, size, cur, out);
            cur.pop();
        }
    }
    rec(0, n, size, &mut cur, &mut out);
    out
}

impl Cx {
    fn new(points: &[Vec<f64>], top_dim: usize) -> Self {
        let n = points.len();
        let simplices = (0..=top_dim)
            .map(|k| {
                subsets(n, k + 1)
                    .into_iter()
                    .map(|vs| {
                        let mut v: f64 = 0.0;
                        for a in 0..vs.len() {
                            for b in a + 1..vs.len() {
                                v = v.max(dist(&points[vs[a]], &points[vs[b]]));
                            }
                        }
                        (vs, v)
                    })
                    .collect::<Vec<_>>()
            })
            .collect::<Vec<_>>();
        assert!(simplices.iter().all(|s| s.len() <= 128), "oracle limited to 128 simplices per dimension");
        Self { simplices }
    }

    /// Boundary of the `idx`-th k-simplex as a bitset over (k-1)-simplices.
    fn boundary(&self, k: usize, idx: usize) -> u128 {
        let (vs, _) = &self.simplices[k][idx];
        let mut bits = 0u128;
        for skip in 0..vs.len() {
            let face: Vec<usize> = vs.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v).collect();
            let pos = self.simplices[k - 1].iter().position(|(f, _)| *f == face).unwrap();
            bits ^= 1u128 << pos;
        }
        bits
    }

    fn present(&self, k: usize, eps: f64) -> Vec<usize> {
        (0..self.simplices[k].len()).filter(|&i| self.simplices[k][i].1 <= eps).collect()
    }

    /// Basis of the cycle space Z_k(K_eps) as bitsets over k-simplices.
    fn cycles(&self, k: usize, eps: f64) -> Vec<u128> {
        let cols = self.present(k, eps);
        if k == 0 {
            return cols.iter().map(|&i| 1u128 << i).collect();
        }
        let mut basis: Vec<(u128, u128)> = Vec::new(); // (reduced column, combination)
        let mut kernel = Vec::new();
        for &i in &cols {
            let mut v = self.boundary(k, i);
            let mut combo = 1u128 << i;
            loop {
                if v == 0 {
                    kernel.push(combo);
                    break;
                }
                let top = 127 - v.leading_zeros();
                match basis.iter().find(|(b, _)| 127 - b.leading_zeros() == top) {
                    Some(&(b, c)) => {
                        v ^= b;
                        combo ^= c;
                    }
                    None => {
                        basis.push((v, combo));
                        break;
                    }
                }
            }
        }
        kernel
    }

    /// Spanning set of the boundary space B_k(K_eps).
    fn boundaries(&self, k: usize, eps: f64) -> Vec<u128> {
        if k + 1 >= self.simplices.len() {
            return Vec::new();
        }
        self.present(k + 1, eps).into_iter().map(|i| self.boundary(k + 1, i)).collect()
    }
}

pub fn rank(vectors: &[u128]) -> usize {
    let mut basis: Vec<u128> = Vec::new();
    for &v in vectors {
        let mut v = v;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

fn persistent_betti(cx: &Cx, k: usize, eps_i: f64, eps_j: f64) -> usize {
    let z = cx.cycles(k, eps_i);
    let b = cx.boundaries(k, eps_j);
    let dz = z.len();
    let db = rank(&b);
    let sum: Vec<u128> = z.iter().chain(&b).copied().collect();
    let inter = dz + db - rank(&sum);
    dz - inter
}

/// Betti numbers `beta_0..=beta_max_dim` at scale `eps` (closed convention).
pub fn betti_numbers(points: &[Vec<f64>], max_dim: usize, eps: f64) -> Vec<usize> {
    let cx = Cx::new(points, max_dim + 1);
    (0..=max_dim).map(|k| persistent_betti(&cx, k, eps, eps)).collect()
}

/// All positive-length bars in degrees `0..=max_dim`, sorted.
pub fn oracle_bars(points: &[Vec<f64>], max_dim: usize) -> Vec<OracleBar> {
    let cx = Cx::new(points, max_dim + 1);
    let mut crit: Vec<f64> = cx.simplices.iter().flatten().map(|(_, v)| *v).collect();
    crit.sort_by(f64::total_cmp);
    crit.dedup();
    let m = crit.len();

    let mut bars = Vec::new();
    for k in 0..=max_dim {
        // beta[i][j] for i <= j
        let mut beta = vec![vec![0usize; m]; m];
        for i in 0..m {
            for j in i..m {
                beta[i][j] = persistent_betti(&cx, k, crit[i], crit[j]);
            }
        }
        let b = |i: isize, j: usize| -> isize {
            if i < 0 {
                0
            } else {
                beta[i as usize][j] as isize
            }
        };
        for i in 0..m {
            let ii = i as isize;
            for j in i + 1..m {
                let mu = b(ii, j - 1) - b(ii, j) - b(ii - 1, j - 1) + b(ii - 1, j);
                assert!(mu >= 0, "negative multiplicity");
                for _ in 0..mu {
                    bars.push((k, crit[i], crit[j]));
                }
            }
            let mu_inf = b(ii, m - 1) - b(ii - 1, m - 1);
            assert!(mu_inf >= 0);
            for _ in 0..mu_inf {
                bars.push((k, crit[i], f64::INFINITY));
            }
        }
    }
    sort_bars(&mut bars);
    bars
}

pub fn sort_bars(bars: &mut [OracleBar]) {
    bars.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
}

/// Multiset equality up to `tol` on finite endpoints.
pub fn same_bars(a: &[OracleBar], b: &[OracleBar], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().zip(b).all(|(x, y)| {
            x.0 == y.0
                && (x.1 - y.1).abs() <= tol
                && ((x.2.is_infinite() && y.2.is_infinite()) || (x.2 - y.2).abs() <= tol)
        })
}
