//! Sparse complex matrices, bandwidth-reducing orderings and a skyline
//! Cholesky factorization for Hermitian positive definite systems.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::C64;

/// Compressed sparse row matrix with complex entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    n_rows: usize,
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

/// Accumulates `(row, col, value)` entries; duplicates are summed.
#[derive(Clone, Debug, Default)]
pub struct Triplets {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, C64)>,
}

impl Triplets {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: C64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        self.entries.push((row, col, value));
    }

    pub fn into_csr(mut self) -> CsrMatrix {
        self.entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; self.n_rows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<C64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.n_rows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            indptr,
            indices,
            values,
        }
    }
}

impl CsrMatrix {
    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            indptr: vec![0; n_rows + 1],
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self {
            n_rows: n,
            n_cols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            values: diag.to_vec(),
        }
    }

    pub fn from_dense(m: &DMatrix<C64>, drop_below: f64) -> Self {
        let mut t = Triplets::new(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                if m[(i, j)].norm() > drop_below {
                    t.push(i, j, m[(i, j)]);
                }
            }
        }
        t.into_csr()
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and values of one row.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn row_nnz(&self, i: usize) -> usize {
        self.indptr[i + 1] - self.indptr[i]
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let r = self.indptr[i]..self.indptr[i + 1];
        match self.indices[r.clone()].binary_search(&j) {
            Ok(p) => self.values[r.start + p],
            Err(_) => C64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.n_rows).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.values
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n_cols);
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn conj_transpose(&self) -> CsrMatrix {
        let mut t = Triplets::new(self.n_cols, self.n_rows);
        for (i, j, v) in self.triplets() {
            t.push(j, i, v.conj());
        }
        t.into_csr()
    }

    /// `diag(left) * self * diag(right)`.
    pub fn scale(&self, left: &[C64], right: &[C64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                out.values[p] = left[i] * self.values[p] * right[self.indices[p]];
            }
        }
        out
    }

    pub fn scale_rows_real(&self, left: &[f64]) -> CsrMatrix {
        let mut out = self.clone();
        for i in 0..self.n_rows {
            for p in self.indptr[i]..self.indptr[i + 1] {
                out.values[p] *= left[i];
            }
        }
        out
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        for (i, j, v) in self.triplets() {
            m[(i, j)] += v;
        }
        m
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - self.get(j, i).conj()).norm());
        }
        worst
    }

    /// `max |A_ij - B_ij|` over the union of both patterns.
    pub fn max_abs_diff(&self, other: &CsrMatrix) -> f64 {
        assert_eq!(self.n_rows, other.n_rows);
        assert_eq!(self.n_cols, other.n_cols);
        let mut worst: f64 = 0.0;
        for (i, j, v) in self.triplets() {
            worst = worst.max((v - other.get(i, j)).norm());
        }
        for (i, j, v) in other.triplets() {
            worst = worst.max((v - self.get(i, j)).norm());
        }
        worst
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == C64::new(0.0, 0.0))
    }

    pub fn is_identity(&self) -> bool {
        self.n_rows == self.n_cols
            && self.triplets().all(|(i, j, v)| {
                if i == j {
                    v == C64::new(1.0, 0.0)
                } else {
                    v == C64::new(0.0, 0.0)
                }
            })
            && (0..self.n_rows).all(|i| self.get(i, i) == C64::new(1.0, 0.0))
    }

    pub fn is_diagonal(&self) -> bool {
        self.triplets()
            .all(|(i, j, v)| i == j || v == C64::new(0.0, 0.0))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}

/// Reverse Cuthill-McKee ordering of the symmetrized sparsity graph.
/// Returns `perm` with `perm[new] = old`.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n_rows();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, j, _) in a.triplets() {
        if i != j {
            adj[i].push(j);
            adj[j].push(i);
        }
    }
    for nb in adj.iter_mut() {
        nb.sort_unstable();
        nb.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();

    let bfs_levels = |start: usize, seen: &mut Vec<bool>| -> Vec<Vec<usize>> {
        let mut levels = vec![vec![start]];
        seen[start] = true;
        loop {
            let mut next = Vec::new();
            for &u in levels.last().unwrap() {
                for &v in &adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        next.push(v);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            levels.push(next);
        }
        levels
    };

    let mut order = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        // pseudo-peripheral start node for this connected component
        let mut start = (0..n)
            .filter(|&i| !placed[i])
            .min_by_key(|&i| degree[i])
            .unwrap();
        let mut depth = 0;
        for _ in 0..4 {
            let mut seen = placed.clone();
            let levels = bfs_levels(start, &mut seen);
            if levels.len() <= depth {
                break;
            }
            depth = levels.len();
            start = *levels
                .last()
                .unwrap()
                .iter()
                .min_by_key(|&&v| degree[v])
                .unwrap();
        }

        let mut queue = VecDeque::from([start]);
        placed[start] = true;
        while let Some(u) = queue.pop_front() {
            order.push(u);
            let mut nbrs: Vec<usize> = adj[u].iter().copied().filter(|&v| !placed[v]).collect();
            nbrs.sort_by_key(|&v| (degree[v], v));
            for v in nbrs {
                placed[v] = true;
                queue.push_back(v);
            }
        }
    }
    order.reverse();
    order
}

/// Number of lower-envelope entries of `P A P^T` for `perm[new] = old`.
pub fn envelope_size(a: &CsrMatrix, perm: &[usize]) -> usize {
    let n = a.n_rows();
    let mut inv = vec![0usize; n];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let mut first: Vec<usize> = (0..n).collect();
    for (i, j, _) in a.triplets() {
        let (pi, pj) = (inv[i], inv[j]);
        let (lo, hi) = if pi < pj { (pi, pj) } else { (pj, pi) };
        first[hi] = first[hi].min(lo);
    }
    (0..n).map(|i| i - first[i] + 1).sum()
}

/// Cholesky factor `P (A - shift I) P^T = L L^H` stored by rows over the
/// envelope of the permuted matrix.
pub struct SkylineCholesky {
    n: usize,
    perm: Vec<usize>,
    first: Vec<usize>,
    offset: Vec<usize>,
    data: Vec<C64>,
}

/// Factorization broke down on a non-positive pivot.
#[derive(Debug, Clone, Copy)]
pub struct NotPositiveDefinite {
    pub row: usize,
    pub pivot: f64,
}

impl SkylineCholesky {
    pub fn factor(
        a: &CsrMatrix,
        perm: &[usize],
        shift: f64,
    ) -> Result<Self, NotPositiveDefinite> {
        let n = a.n_rows();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for (i, j, _) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pj < pi {
                first[pi] = first[pi].min(pj);
            } else if pi < pj {
                first[pj] = first[pj].min(pi);
            }
        }
        let mut offset = vec![0usize; n + 1];
        for i in 0..n {
            offset[i + 1] = offset[i] + (i - first[i] + 1);
        }
        let mut data = vec![C64::new(0.0, 0.0); offset[n]];
        for (i, j, v) in a.triplets() {
            let (pi, pj) = (inv[i], inv[j]);
            if pj <= pi {
                data[offset[pi] + (pj - first[pi])] += v;
            }
        }
        for i in 0..n {
            data[offset[i] + (i - first[i])] -= C64::new(shift, 0.0);
        }

        for i in 0..n {
            let fi = first[i];
            let row_i = offset[i];
            for j in fi..i {
                let fj = first[j];
                let start = fi.max(fj);
                let mut acc_re = 0.0;
                let mut acc_im = 0.0;
                let base_i = row_i + (start - fi);
                let base_j = offset[j] + (start - fj);
                let len = j - start;
                {
                    let li = &data[base_i..base_i + len];
                    let lj = &data[base_j..base_j + len];
                    for (x, y) in li.iter().zip(lj.iter()) {
                        // x * conj(y)
                        acc_re += x.re * y.re + x.im * y.im;
                        acc_im += x.im * y.re - x.re * y.im;
                    }
                }
                let djj = data[offset[j] + (j - fj)].re;
                let idx = row_i + (j - fi);
                let v = data[idx] - C64::new(acc_re, acc_im);
                data[idx] = v / djj;
            }
            let row = &data[row_i..row_i + (i - fi)];
            let sq: f64 = row.iter().map(|x| x.norm_sqr()).sum();
            let diag = data[row_i + (i - fi)].re - sq;
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(NotPositiveDefinite {
                    row: i,
                    pivot: diag,
                });
            }
            data[row_i + (i - fi)] = C64::new(diag.sqrt(), 0.0);
        }
        Ok(Self {
            n,
            perm: perm.to_vec(),
            first,
            offset,
            data,
        })
    }

    /// Number of stored factor entries.
    pub fn envelope_size(&self) -> usize {
        self.data.len()
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y: Vec<C64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.offset[i]..self.offset[i] + (i - fi)];
            let mut acc = y[i];
            for (l, yk) in row.iter().zip(&y[fi..i]) {
                acc -= l * yk;
            }
            y[i] = acc / self.data[self.offset[i] + (i - fi)].re;
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let xi = y[i] / self.data[self.offset[i] + (i - fi)].re;
            y[i] = xi;
            let row = &self.data[self.offset[i]..self.offset[i] + (i - fi)];
            for (l, yk) in row.iter().zip(y[fi..i].iter_mut()) {
                *yk -= l.conj() * xi;
            }
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Weighted inner product `sum w_i conj(a_i) b_i`.
pub fn weighted_dot(w: &[f64], a: &[C64], b: &[C64]) -> C64 {
    w.iter()
        .zip(a.iter().zip(b))
        .map(|(w, (x, y))| *w * x.conj() * y)
        .sum()
}
