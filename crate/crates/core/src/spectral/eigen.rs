//! Lowest eigenpairs of `W^{-1} K` with `K` Hermitian and `W` a positive
//! diagonal, solved through the similarity `S = W^{-1/2} K W^{-1/2}`.
//!
//! The iterative path is a thick-restart block method: the basis grows by
//! `(S - sigma)^{-1}` applied to the residuals of the least converged Ritz
//! pairs, so it spans a block Krylov space of the shift-inverted operator,
//! and Ritz pairs come from the projection of `S` itself. The inverse is an
//! envelope Cholesky factorization. `sigma` starts at -1 and moves down by
//! decades until the factorization succeeds, bottoming out at a Gershgorin bound. Once the
//! lowest Ritz pair is resolved the shift is moved up close to it, which
//! keeps clustered low spectra from stalling the iteration.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{dot, envelope_size, norm, rcm_ordering, CsrMatrix, SkylineCholesky};
use crate::C64;

/// Largest dimension accepted by the dense path.
pub const DENSE_CAP: usize = 20000;

/// Below this dimension the iterative path hands over to the dense solver.
pub const SMALL_DIM: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Dense,
    Iterative,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dense" => Ok(Method::Dense),
            "iterative" => Ok(Method::Iterative),
            other => Err(Error::Param(format!("unknown solver method '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub k: usize,
    pub method: Method,
    /// Residual tolerance, relative to `max(1, |lambda|)`. Residuals already at
    /// the rounding floor `32 eps ||S||_inf` also count as converged.
    pub tol: f64,
    pub vectors: bool,
    pub seed: u64,
    pub block: usize,
    pub max_expansions: usize,
}

impl SolverOptions {
    pub fn new(k: usize, method: Method, tol: f64) -> Self {
        Self {
            k,
            method,
            tol,
            vectors: true,
            seed: 0x6d61_6762_696c_6c00,
            block: 4,
            max_expansions: 3000,
        }
    }
}

/// Lowest eigenvalues in ascending order with residuals
/// `||H v - lambda v||_W / ||v||_W` and, optionally, W-orthonormal vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<C64>>>,
    pub residuals: Vec<f64>,
    /// Largest `|Im <v, K v>| / <v, W v>` over the returned pairs.
    pub max_imag: f64,
    pub method: Method,
    /// Block expansions (iterative) or 1 (dense).
    pub iterations: usize,
    pub tol: f64,
    /// Absolute residual that rounding alone produces, `32 eps ||S||_inf`.
    pub residual_floor: f64,
    pub shift: Option<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().cloned().fold(0.0, f64::max)
    }

    /// `max_i |a_i - b_i|` over the common prefix.
    pub fn max_difference(&self, other: &Spectrum) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

fn symmetrized(k: &CsrMatrix, weights: &[f64]) -> CsrMatrix {
    let s: Vec<C64> = weights.iter().map(|w| C64::new(1.0 / w.sqrt(), 0.0)).collect();
    k.scale(&s, &s)
}

/// Lowest `opts.k` eigenpairs of `W^{-1} K`.
pub fn solve_weighted(k: &CsrMatrix, weights: &[f64], opts: &SolverOptions) -> Result<Spectrum> {
    let n = weights.len();
    if k.n_rows() != n || k.n_cols() != n {
        return Err(Error::Dimension { expected: n, got: k.n_rows() });
    }
    if opts.k == 0 || opts.k > n {
        return Err(Error::Param(format!("k must be in 1..={n}, got {}", opts.k)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Param(format!("tolerance must be positive, got {}", opts.tol)));
    }
    if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
        return Err(Error::Param(format!("weights must be positive, got {w}")));
    }
    let s = symmetrized(k, weights);
    let (pairs, iterations, shift) = match opts.method {
        Method::Dense => {
            if n > DENSE_CAP {
                return Err(Error::Solver(format!("dense path is capped at {DENSE_CAP}, got {n}")));
            }
            (dense_lowest(&s, opts.k), 1, None)
        }
        Method::Iterative if n <= SMALL_DIM => (dense_lowest(&s, opts.k), 1, None),
        Method::Iterative => {
            let (p, it, sigma) = krylov_lowest(&s, opts)?;
            (p, it, Some(sigma))
        }
    };
    let mut values = Vec::with_capacity(opts.k);
    let mut residuals = Vec::with_capacity(opts.k);
    let mut vectors = Vec::with_capacity(opts.k);
    let mut max_imag: f64 = 0.0;
    for (lam, y) in pairs {
        let sy = s.matvec(&y);
        let r: Vec<C64> = sy.iter().zip(&y).map(|(a, b)| a - lam * b).collect();
        residuals.push(norm(&r));
        let v: Vec<C64> = y.iter().zip(weights).map(|(c, w)| c / w.sqrt()).collect();
        let kv = k.matvec(&v);
        let wn: f64 = v.iter().zip(weights).map(|(c, w)| w * c.norm_sqr()).sum();
        max_imag = max_imag.max((dot(&v, &kv).im / wn).abs());
        values.push(lam);
        if opts.vectors {
            vectors.push(v);
        }
    }
    Ok(Spectrum {
        values,
        vectors: opts.vectors.then_some(vectors),
        residuals,
        max_imag,
        method: opts.method,
        iterations,
        tol: opts.tol,
        residual_floor: rounding_floor(&s),
        shift,
    })
}

fn dense_lowest(s: &CsrMatrix, k: usize) -> Vec<(f64, Vec<C64>)> {
    let eig = SymmetricEigen::new(s.to_dense());
    let mut idx: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    idx.into_iter()
        .take(k)
        .map(|i| {
            let y: Vec<C64> = eig.eigenvectors.column(i).iter().cloned().collect();
            let sy = s.matvec(&y);
            (dot(&y, &sy).re, y)
        })
        .collect()
}

fn gershgorin_lower(s: &CsrMatrix) -> f64 {
    (0..s.n_rows())
        .map(|i| {
            let mut d = 0.0;
            let mut off = 0.0;
            for (j, v) in s.row(i) {
                if j == i {
                    d += v.re;
                } else {
                    off += v.norm();
                }
            }
            d - off
        })
        .fold(f64::INFINITY, f64::min)
}

fn rounding_floor(s: &CsrMatrix) -> f64 {
    let norm = (0..s.n_rows())
        .map(|i| s.row(i).map(|(_, v)| v.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    32.0 * f64::EPSILON * norm
}

/// Factors `S - sigma` for the first admissible shift in
/// `-1, -10, -100, ...`, ending at a Gershgorin bound.
fn factor_below_spectrum(s: &CsrMatrix, start: f64) -> Result<(SkylineCholesky, f64, Vec<usize>)> {
    let natural: Vec<usize> = (0..s.n_rows()).collect();
    let rcm = rcm_ordering(s);
    let perm = if envelope_size(s, &rcm) < envelope_size(s, &natural) { rcm } else { natural };
    let floor = gershgorin_lower(s) - 1.0;
    let mut sigma = start;
    loop {
        let last = sigma <= floor;
        if last {
            sigma = floor;
        }
        match SkylineCholesky::factor(s, &perm, sigma) {
            Ok(f) => return Ok((f, sigma, perm)),
            Err(e) if last => {
                return Err(Error::Solver(format!(
                    "shifted matrix is not positive definite even at the Gershgorin bound (row {}, pivot {:e})",
                    e.row, e.pivot
                )))
            }
            Err(_) => sigma = if sigma >= -1.0 { -10.0 } else { sigma * 10.0 },
        }
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im)
        })
        .collect()
}

/// Orthogonalizes `w` against `basis` twice and normalizes it; `None`
/// when almost nothing is left.
fn orthonormalize(basis: &[Vec<C64>], mut w: Vec<C64>) -> Option<Vec<C64>> {
    let n0 = norm(&w);
    if n0 == 0.0 {
        return None;
    }
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, &w);
            for (x, y) in w.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
    let n1 = norm(&w);
    if n1 < 1e-10 * n0 {
        return None;
    }
    for x in w.iter_mut() {
        *x /= n1;
    }
    Some(w)
}

fn combine(basis: &[Vec<C64>], coeffs: impl Iterator<Item = C64>) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); basis[0].len()];
    for (b, c) in basis.iter().zip(coeffs) {
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        for (o, x) in out.iter_mut().zip(b) {
            *o += c * x;
        }
    }
    out
}

/// Shift moves toward the lowest Ritz value per solve.
const MAX_RESHIFTS: usize = 3;

/// Expansions without halving the worst residual before giving up.
const STALL_LIMIT: usize = 200;

type Pairs = Vec<(f64, Vec<C64>)>;

fn krylov_lowest(s: &CsrMatrix, opts: &SolverOptions) -> Result<(Pairs, usize, f64)> {
    let n = s.n_rows();
    let k = opts.k;
    let bs = opts.block.max(1).min(n);
    let keep = (k + 2 * bs).min(n);
    let m_max = (2 * keep + 4 * bs).max(40).min(n);
    let (mut chol, mut sigma, perm) = factor_below_spectrum(s, -1.0)?;
    let floor = rounding_floor(s);
    let mut reshifts = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);

    // basis, its image under S and the projection Q^* S Q
    let mut q: Vec<Vec<C64>> = Vec::with_capacity(m_max);
    let mut sq: Vec<Vec<C64>> = Vec::with_capacity(m_max);
    let mut t = DMatrix::<C64>::zeros(0, 0);
    let mut block: Vec<Vec<C64>> = (0..bs).map(|_| chol.solve(&random_vector(&mut rng, n))).collect();
    let mut worst = f64::INFINITY;
    let (mut best, mut improved_at) = (f64::INFINITY, 0);

    for it in 1..=opts.max_expansions {
        let old = q.len();
        for w in block.drain(..) {
            if q.len() >= n {
                break;
            }
            let mut cand = orthonormalize(&q, w);
            let mut tries = 0;
            while cand.is_none() && tries < 5 {
                cand = orthonormalize(&q, random_vector(&mut rng, n));
                tries += 1;
            }
            if let Some(v) = cand {
                sq.push(s.matvec(&v));
                q.push(v);
            }
        }
        let m = q.len();
        let mut grown = DMatrix::<C64>::zeros(m, m);
        grown.view_mut((0, 0), (old, old)).copy_from(&t);
        for j in old..m {
            for i in 0..m {
                grown[(i, j)] = dot(&q[i], &sq[j]);
                grown[(j, i)] = grown[(i, j)].conj();
            }
        }
        t = grown;
        let herm = (&t + t.adjoint()).scale(0.5);
        let eig = SymmetricEigen::new(herm);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));

        let want = (k + bs).min(m);
        let mut ritz: Vec<(f64, Vec<C64>, f64)> = Vec::with_capacity(want);
        let mut resid: Vec<Vec<C64>> = Vec::with_capacity(want);
        for &c in order.iter().take(want) {
            let col = eig.eigenvectors.column(c);
            let y = combine(&q, col.iter().cloned());
            let sy = combine(&sq, col.iter().cloned());
            let lam = dot(&y, &sy).re / dot(&y, &y).re;
            let r: Vec<C64> = sy.iter().zip(&y).map(|(a, b)| a - lam * b).collect();
            ritz.push((lam, y, norm(&r) / lam.abs().max(1.0)));
            resid.push(r);
        }
        let converged: Vec<bool> = ritz
            .iter()
            .map(|r| r.2 <= opts.tol || r.2 * r.0.abs().max(1.0) <= floor)
            .collect();
        worst = ritz.iter().take(k).map(|r| r.2).fold(0.0, f64::max);
        if m >= k && converged.iter().take(k).all(|c| *c) {
            let mut pairs: Pairs = ritz.into_iter().take(k).map(|(l, y, _)| (l, y)).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok((pairs, it, sigma));
        }
        if worst < 0.5 * best {
            best = worst;
            improved_at = it;
        }
        // stagnation at the rounding floor
        if m >= n || it - improved_at > STALL_LIMIT {
            return Err(Error::NoConvergence { restarts: it, residual: worst });
        }

        // move the shift up to the spectrum once the bottom is resolved
        if reshifts < MAX_RESHIFTS {
            let l1 = ritz[0].0;
            let r1 = ritz[0].2 * l1.abs().max(1.0);
            let spread = ritz.last().map(|r| r.0 - l1).unwrap_or(0.0);
            let d = (0.25 * spread).max(10.0 * r1).max(1e-6 * l1.abs().max(1.0));
            if r1 < 1e-2 * (l1 - sigma) && d < 0.1 * (l1 - sigma) {
                reshifts += 1;
                if let Ok(f) = SkylineCholesky::factor(s, &perm, l1 - d) {
                    chol = f;
                    sigma = l1 - d;
                }
            }
        }

        // expansion: the inverse applied to the residuals of the least
        // converged pairs. Same span as the inverse applied to the Ritz
        // vectors, without the cancellation against the basis.
        let mut picks: Vec<usize> = (0..want.min(k)).filter(|&i| !converged[i]).collect();
        picks.sort_by(|&a, &b| ritz[b].2.total_cmp(&ritz[a].2));
        picks.extend((k..want).filter(|&i| !converged[i]));
        picks.extend((0..want).filter(|&i| converged[i]));
        picks.truncate(bs);
        for &p in &picks {
            block.push(chol.solve(&resid[p]));
        }

        if m + bs > m_max {
            let kept: Vec<usize> = order.iter().take(keep.min(m)).cloned().collect();
            q = kept
                .iter()
                .map(|&c| combine(&q, eig.eigenvectors.column(c).iter().cloned()))
                .collect();
            // fresh products keep recombination drift out of the residuals
            sq = q.iter().map(|v| s.matvec(v)).collect();
            let mk = q.len();
            t = DMatrix::from_fn(mk, mk, |i, j| dot(&q[i], &sq[j]));
        }
    }
    Err(Error::NoConvergence {
        restarts: opts.max_expansions,
        residual: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Triplets;

    fn chain(n: usize) -> CsrMatrix {
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, C64::new(2.0, 0.0));
            if i + 1 < n {
                t.push(i, i + 1, C64::new(0.0, -1.0));
                t.push(i + 1, i, C64::new(0.0, 1.0));
            }
        }
        t.into_csr()
    }

    #[test]
    fn dense_and_iterative_agree() {
        let n = 400;
        let k = chain(n);
        let w: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.1).sin()).collect();
        let a = solve_weighted(&k, &w, &SolverOptions::new(6, Method::Dense, 1e-10)).unwrap();
        let b = solve_weighted(&k, &w, &SolverOptions::new(6, Method::Iterative, 1e-10)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() < 1e-9, "{x} {y}");
        }
        assert!(b.max_residual() < 1e-9);
    }

    #[test]
    fn chain_eigenvalues() {
        // 2 - 2 cos(pi j / (n + 1))
        let n = 300;
        let w = vec![1.0; n];
        let s = solve_weighted(&chain(n), &w, &SolverOptions::new(3, Method::Iterative, 1e-10)).unwrap();
        for (j, v) in s.values.iter().enumerate() {
            let exact = 2.0 - 2.0 * (std::f64::consts::PI * (j + 1) as f64 / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-10);
        }
    }

    #[test]
    fn indefinite_matrix_moves_the_shift() {
        let n = 300;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, C64::new(i as f64 - 500.0, 0.0));
        }
        let s = solve_weighted(&t.into_csr(), &vec![1.0; n], &SolverOptions::new(2, Method::Iterative, 1e-10)).unwrap();
        assert!((s.values[0] + 500.0).abs() < 1e-8 && (s.values[1] + 499.0).abs() < 1e-8);
        assert!(s.shift.unwrap() < -500.0);
    }
}
