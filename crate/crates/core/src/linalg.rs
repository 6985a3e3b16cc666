//! Sparse matrices and the linear solvers used by the nonlinear iteration.
//!
//! Systems below [`DIRECT_LIMIT`] unknowns are factorized directly: the matrix is
//! reordered by reverse Cuthill–McKee and factorized as a banded LU with partial
//! pivoting. Larger systems fall back to Jacobi-preconditioned BiCGSTAB.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Unknown count above which the Krylov path is used.
pub const DIRECT_LIMIT: usize = 10_000;

/// Relative residual target of the Krylov path.
pub const KRYLOV_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, Default)]
pub struct Triplets {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: Vec::new() }
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    pub fn to_csr(mut self) -> CsrMatrix {
        self.entries.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; self.rows + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (i, j, v) in self.entries {
            if last == Some((i, j)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(j);
                values.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..self.rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix { rows: self.rows, cols: self.cols, row_ptr, col_idx, values }
    }
}

#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub rows: usize,
    pub cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for (i, yi) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[p] * x[self.col_idx[p]];
            }
            *yi = s;
        }
        y
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |p| (self.col_idx[p], self.values[p]))
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows)
            .map(|i| self.row(i).find(|&(j, _)| j == i).map_or(0.0, |(_, v)| v))
            .collect()
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }
}

/// Reverse Cuthill–McKee ordering of the symmetrized sparsity pattern.
/// Returns `perm` with `perm[new] = old`.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.rows;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for (j, _) in a.row(i) {
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    for list in adj.iter_mut() {
        list.sort_unstable();
        list.dedup();
    }
    let degree: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        let start = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("unvisited vertex");
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_unstable_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Banded LU factorization with partial pivoting of a reordered sparse matrix.
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    /// `perm[new] = old`.
    perm: Vec<usize>,
    upper: Vec<f64>,
    lower: Vec<f64>,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        if a.rows != a.cols {
            return Err(Error::LinearSolveFailure(format!("matrix is {}x{}", a.rows, a.cols)));
        }
        let n = a.rows;
        let perm = reverse_cuthill_mckee(a);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for i in 0..n {
            for (j, _) in a.row(i) {
                let (pi, pj) = (inv[i], inv[j]);
                if pi > pj {
                    kl = kl.max(pi - pj);
                } else {
                    ku = ku.max(pj - pi);
                }
            }
        }
        let width = 2 * kl + ku + 1;
        let mut upper = vec![0.0; n * width];
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        for i in 0..n {
            for (j, v) in a.row(i) {
                upper[idx(inv[i], inv[j])] += v;
            }
        }
        let mut lower = vec![0.0; n * kl.max(1)];
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last_row = (k + kl + 1).min(n);
            let last_col = (k + kl + ku + 1).min(n);
            let mut p = k;
            let mut best = upper[idx(k, k)].abs();
            for i in k + 1..last_row {
                let v = upper[idx(i, k)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == 0.0 || !best.is_finite() {
                return Err(Error::LinearSolveFailure(format!("singular pivot at column {k}")));
            }
            pivots[k] = p;
            if p != k {
                for j in k..last_col {
                    upper.swap(idx(k, j), idx(p, j));
                }
            }
            let pivot = upper[idx(k, k)];
            for i in k + 1..last_row {
                let l = upper[idx(i, k)] / pivot;
                lower[k * kl + (i - k - 1)] = l;
                upper[idx(i, k)] = 0.0;
                if l != 0.0 {
                    for j in k + 1..last_col {
                        upper[idx(i, j)] -= l * upper[idx(k, j)];
                    }
                }
            }
        }
        Ok(Self { n, kl, ku, width, perm, upper, lower, pivots })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let (kl, ku, width) = (self.kl, self.ku, self.width);
        let idx = |i: usize, j: usize| i * width + (j + kl - i);
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            if yk != 0.0 {
                for i in k + 1..(k + kl + 1).min(n) {
                    y[i] -= self.lower[k * kl + (i - k - 1)] * yk;
                }
            }
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..(i + kl + ku + 1).min(n) {
                s -= self.upper[idx(i, j)] * y[j];
            }
            y[i] = s / self.upper[idx(i, i)];
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }

    pub fn bandwidth(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }
}

/// Jacobi-preconditioned BiCGSTAB. Returns the solution and the iteration count.
pub fn bicgstab(a: &CsrMatrix, b: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, usize)> {
    let n = a.rows;
    let inv_diag: Vec<f64> = a
        .diagonal()
        .iter()
        .map(|&d| if d != 0.0 { 1.0 / d } else { 1.0 })
        .collect();
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let norm_b = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if norm_b == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    for iter in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new == 0.0 {
            return Err(Error::LinearSolveFailure("BiCGSTAB breakdown (rho = 0)".into()));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let p_hat: Vec<f64> = p.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
        v = a.mul_vec(&p_hat);
        alpha = rho / dot(&r_hat, &v);
        let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        if dot(&s, &s).sqrt() <= tol * norm_b {
            for i in 0..n {
                x[i] += alpha * p_hat[i];
            }
            return Ok((x, iter));
        }
        let s_hat: Vec<f64> = s.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
        let t = a.mul_vec(&s_hat);
        omega = dot(&t, &s) / dot(&t, &t);
        for i in 0..n {
            x[i] += alpha * p_hat[i] + omega * s_hat[i];
            r[i] = s[i] - omega * t[i];
        }
        if dot(&r, &r).sqrt() <= tol * norm_b {
            return Ok((x, iter));
        }
        if omega == 0.0 || !omega.is_finite() {
            return Err(Error::LinearSolveFailure("BiCGSTAB breakdown (omega = 0)".into()));
        }
    }
    Err(Error::LinearSolveFailure(format!(
        "BiCGSTAB did not reach relative residual {tol:.1e} in {max_iter} iterations"
    )))
}

/// A matrix prepared for repeated solves.
#[derive(Clone, Debug)]
pub enum Factorized {
    Direct(BandLu),
    Iterative(CsrMatrix),
}

impl Factorized {
    pub fn new(a: CsrMatrix) -> Result<Self> {
        Self::with_limit(a, DIRECT_LIMIT)
    }

    pub fn with_limit(a: CsrMatrix, direct_limit: usize) -> Result<Self> {
        if a.rows < direct_limit {
            Ok(Factorized::Direct(BandLu::factor(&a)?))
        } else {
            Ok(Factorized::Iterative(a))
        }
    }

    /// Solves and returns the iteration count (1 for the direct path).
    pub fn solve(&self, b: &[f64]) -> Result<(Vec<f64>, usize)> {
        match self {
            Factorized::Direct(lu) => {
                let x = lu.solve(b);
                if x.iter().all(|v| v.is_finite()) {
                    Ok((x, 1))
                } else {
                    Err(Error::LinearSolveFailure("non-finite solution".into()))
                }
            }
            Factorized::Iterative(a) => bicgstab(a, b, KRYLOV_TOLERANCE, 20 * a.rows.max(100)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn laplacian_1d_periodic(n: usize, shift: f64) -> CsrMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.add(i, i, 2.0 + shift);
            t.add(i, (i + 1) % n, -1.0);
            t.add(i, (i + n - 1) % n, -1.0);
        }
        t.to_csr()
    }

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        a.mul_vec(x).iter().zip(b).map(|(ax, bi)| (ax - bi).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn triplets_sum_duplicates() {
        let mut t = Triplets::new(2, 2);
        t.add(0, 0, 1.0);
        t.add(0, 0, 2.0);
        t.add(1, 0, -1.0);
        let a = t.to_csr();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.mul_vec(&[1.0, 5.0]), vec![3.0, -1.0]);
    }

    #[test]
    fn band_lu_solves_random_nonsymmetric_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 60;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.add(i, i, rng.gen_range(-1.0..1.0));
            for _ in 0..4 {
                t.add(i, rng.gen_range(0..n), rng.gen_range(-1.0..1.0));
            }
        }
        let a = t.to_csr();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = BandLu::factor(&a).unwrap().solve(&b);
        assert!(residual(&a, &x, &b) < 1e-9);
    }

    #[test]
    fn band_lu_needs_pivoting() {
        // zero on the diagonal
        let mut t = Triplets::new(2, 2);
        t.add(0, 1, 1.0);
        t.add(1, 0, 1.0);
        let a = t.to_csr();
        let x = BandLu::factor(&a).unwrap().solve(&[2.0, 3.0]);
        assert_eq!(x, vec![3.0, 2.0]);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut t = Triplets::new(2, 2);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            t.add(i, j, 1.0);
        }
        assert!(matches!(BandLu::factor(&t.to_csr()), Err(Error::LinearSolveFailure(_))));
    }

    #[test]
    fn rcm_keeps_periodic_band_narrow() {
        let a = laplacian_1d_periodic(100, 0.1);
        let lu = BandLu::factor(&a).unwrap();
        let (kl, ku) = lu.bandwidth();
        assert!(kl <= 2 && ku <= 2, "{kl} {ku}");
    }

    #[test]
    fn krylov_path_matches_direct() {
        let a = laplacian_1d_periodic(200, 0.5);
        let b: Vec<f64> = (0..200).map(|i| ((i * 7) % 13) as f64).collect();
        let direct = Factorized::with_limit(a.clone(), 1000).unwrap().solve(&b).unwrap();
        let krylov = Factorized::with_limit(a.clone(), 10).unwrap().solve(&b).unwrap();
        assert!(matches!(Factorized::with_limit(a.clone(), 10).unwrap(), Factorized::Iterative(_)));
        assert!(krylov.1 > 1);
        let diff = direct.0.iter().zip(&krylov.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-9, "{diff}");
    }
}
