//! Sparse symmetric positive definite solves by envelope (skyline) Cholesky
//! after a reverse Cuthill–McKee reordering.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
}

/// Reverse Cuthill–McKee ordering of a graph given by adjacency lists.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_last = |start: usize, seen: &[bool]| -> usize {
        let mut mark = seen.to_vec();
        let mut q = VecDeque::from([start]);
        mark[start] = true;
        let mut last = start;
        while let Some(v) = q.pop_front() {
            last = v;
            for &w in &adj[v] {
                if !mark[w] {
                    mark[w] = true;
                    q.push_back(w);
                }
            }
        }
        last
    };
    while order.len() < n {
        // Start each component from a pseudo-peripheral node.
        let seed = (0..n)
            .filter(|&v| !seen[v])
            .min_by_key(|&v| (adj[v].len(), v))
            .unwrap();
        let far = bfs_last(bfs_last(seed, &seen), &seen);
        let mut q = VecDeque::from([far]);
        seen[far] = true;
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !seen[w]).collect();
            next.sort_by_key(|&w| (adj[w].len(), w));
            for w in next {
                seen[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// A symmetric matrix stored by rows of its lower envelope in RCM order,
/// factorized in place.
#[derive(Clone, Debug)]
pub struct Envelope {
    perm: Vec<usize>,
    inv: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    vals: Vec<f64>,
}

impl Envelope {
    /// Builds the envelope for the sparsity pattern given by `adj`
    /// (adjacency lists over `0..n`, diagonal implied).
    pub fn new(adj: &[Vec<usize>]) -> Self {
        let n = adj.len();
        let perm = reverse_cuthill_mckee(adj);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (old, nb) in adj.iter().enumerate() {
            let i = inv[old];
            for &w in nb {
                let j = inv[w];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for i in 0..n {
            start.push(total);
            total += i - first[i] + 1;
        }
        start.push(total);
        Self { perm, inv, first, start, vals: vec![0.0; total] }
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Number of stored entries.
    pub fn stored(&self) -> usize {
        self.vals.len()
    }

    pub fn clear(&mut self) {
        self.vals.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && j >= self.first[i]);
        self.start[i] + (j - self.first[i])
    }

    /// Adds `v` to entry `(i, j)` (and implicitly `(j, i)`); call once per
    /// unordered pair for off-diagonal contributions.
    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (a, b) = (self.inv[i], self.inv[j]);
        let (r, c) = if a >= b { (a, b) } else { (b, a) };
        let s = self.slot(r, c);
        self.vals[s] += v;
    }

    /// Cholesky factorization `A = L Lᵀ` in place.
    pub fn factor(&mut self) -> Result<(), LinalgError> {
        let n = self.dim();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            for j in fi..i {
                let fj = self.first[j];
                let sj = self.start[j];
                let k0 = fi.max(fj);
                let mut s = self.vals[si + (j - fi)];
                let ri = &self.vals[si + (k0 - fi)..si + (j - fi)];
                let rj = &self.vals[sj + (k0 - fj)..sj + (j - fj)];
                s -= ri.iter().zip(rj).map(|(a, b)| a * b).sum::<f64>();
                let djj = self.vals[sj + (j - fj)];
                self.vals[si + (j - fi)] = s / djj;
            }
            let row = &self.vals[si..si + (i - fi)];
            let d = self.vals[si + (i - fi)] - row.iter().map(|a| a * a).sum::<f64>();
            if !(d > 0.0) || !d.is_finite() {
                return Err(LinalgError::NotPositiveDefinite { row: self.perm[i], pivot: d });
            }
            self.vals[si + (i - fi)] = d.sqrt();
        }
        Ok(())
    }

    /// Solves `A x = b` with the factor from [`Envelope::factor`].
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let si = self.start[i];
            let row = &self.vals[si..si + (i - fi)];
            let s: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - s) / self.vals[si + (i - fi)];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let si = self.start[i];
            y[i] /= self.vals[si + (i - fi)];
            let yi = y[i];
            for (k, a) in (fi..i).zip(&self.vals[si..si + (i - fi)]) {
                y[k] -= a * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn path_laplacian(n: usize) -> (Vec<Vec<usize>>, Envelope) {
        let adj: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        let mut e = Envelope::new(&adj);
        for i in 0..n {
            e.add(i, i, 2.0);
            if i + 1 < n {
                e.add(i, i + 1, -1.0);
            }
        }
        (adj, e)
    }

    #[test]
    fn rcm_is_a_permutation() {
        let (adj, _) = path_laplacian(10);
        let mut p = reverse_cuthill_mckee(&adj);
        p.sort_unstable();
        assert_eq!(p, (0..10).collect::<Vec<_>>());
    }

    #[test]
    fn tridiagonal_solve() {
        let n = 50;
        let (_, mut e) = path_laplacian(n);
        assert!(e.stored() <= 2 * n);
        e.factor().unwrap();
        let x = e.solve(&vec![1.0; n]);
        // Discrete solution of -u'' = 1 with unit spacing: u_i = (i+1)(n-i)/2.
        for (i, xi) in x.iter().enumerate() {
            let exact = ((i + 1) * (n - i)) as f64 / 2.0;
            assert!((xi - exact).abs() < 1e-9 * exact);
        }
    }

    #[test]
    fn random_grid_matrix_matches_dense_product() {
        let m = 7;
        let n = m * m;
        let mut adj = vec![Vec::new(); n];
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut dense = vec![vec![0.0; n]; n];
        for j in 0..m {
            for i in 0..m {
                let v = j * m + i;
                for w in [if i + 1 < m { Some(v + 1) } else { None }, if j + 1 < m { Some(v + m) } else { None }]
                    .into_iter()
                    .flatten()
                {
                    adj[v].push(w);
                    adj[w].push(v);
                    let a: f64 = -rng.gen_range(0.1..1.0);
                    dense[v][w] += a;
                    dense[w][v] += a;
                    dense[v][v] -= a;
                    dense[w][w] -= a;
                }
                dense[v][v] += 0.5;
            }
        }
        let mut e = Envelope::new(&adj);
        for i in 0..n {
            for j in 0..=i {
                if dense[i][j] != 0.0 {
                    e.add(i, j, dense[i][j]);
                }
            }
        }
        e.factor().unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = e.solve(&b);
        for i in 0..n {
            let r: f64 = (0..n).map(|j| dense[i][j] * x[j]).sum::<f64>() - b[i];
            assert!(r.abs() < 1e-12);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let adj = vec![vec![1], vec![0]];
        let mut e = Envelope::new(&adj);
        e.add(0, 0, 1.0);
        e.add(1, 1, 1.0);
        e.add(0, 1, 2.0);
        assert!(matches!(e.factor(), Err(LinalgError::NotPositiveDefinite { .. })));
    }
}
