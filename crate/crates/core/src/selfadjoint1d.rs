//! Self-adjoint boundary conditions for the magnetic Schrodinger operator on
//! an interval, parametrized by a unitary `U` acting on the endpoint data:
//! `i (I + U) gamma psi = (I - U) nu psi`, with `gamma psi = (psi(0), psi(L))`
//! and `nu` the outward covariant derivative `(-D psi(0), D psi(L))`,
//! `D = d/dx + i (e/hbar) A`.
//!
//! When `1` is not an eigenvalue of `U` the same condition reads
//! `nu psi = L gamma psi` with the Hermitian Cayley transform
//! `L = i (I + U) (I - U)^{-1}`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gauge::PhysicalParams;
use crate::linalg::{weighted_dot, CsrMatrix, Triplets};
use crate::spectral::{solve_weighted, Method, SolverOptions, Spectrum};
use crate::C64;

/// Singular values of `I - U` below this mark Dirichlet directions.
pub const RANK_THRESHOLD: f64 = 1e-10;

const I: C64 = C64::new(0.0, 1.0);

fn max_norm<R: nalgebra::Dim, Cc: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, Cc>>(
    m: &nalgebra::Matrix<C64, R, Cc, S>,
) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn unitarity_defect(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    max_norm(&(u.adjoint() * u - DMatrix::<C64>::identity(n, n)))
}

fn hermitian_defect(l: &DMatrix<C64>) -> f64 {
    max_norm(&(l - l.adjoint()))
}

/// Unitary boundary parameter.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryBC {
    u: DMatrix<C64>,
}

impl UnitaryBC {
    /// Accepts `u` when `||U^* U - I||_max <= 1e-12`.
    pub fn new(u: DMatrix<C64>) -> Result<Self> {
        if u.nrows() != u.ncols() {
            return Err(Error::Dimension { expected: u.nrows(), got: u.ncols() });
        }
        let d = unitarity_defect(&u);
        if !(d <= 1e-12) {
            return Err(Error::NotUnitary(d));
        }
        Ok(Self { u })
    }

    pub fn dirichlet() -> Self {
        Self { u: DMatrix::identity(2, 2) }
    }

    pub fn neumann() -> Self {
        Self { u: -DMatrix::<C64>::identity(2, 2) }
    }

    /// `diag(e^{i a}, e^{i b})`: independent conditions at the two ends.
    pub fn diagonal(a: f64, b: f64) -> Self {
        Self {
            u: DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
                C64::from_polar(1.0, a),
                C64::from_polar(1.0, b),
            ])),
        }
    }

    /// `e^{i theta} I`.
    pub fn scalar(theta: f64) -> Self {
        Self::diagonal(theta, theta)
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.u
    }

    pub fn dim(&self) -> usize {
        self.u.nrows()
    }

    /// `T1 = i (I + U)`.
    pub fn t1(&self) -> DMatrix<C64> {
        (DMatrix::identity(self.dim(), self.dim()) + &self.u) * I
    }

    /// `T2 = I - U`.
    pub fn t2(&self) -> DMatrix<C64> {
        DMatrix::identity(self.dim(), self.dim()) - &self.u
    }

    /// Columns spanning the admissible endpoint data `(gamma psi, nu psi)`:
    /// the range of `[(I - U); i (I + U)]`.
    pub fn kernel_basis(&self) -> DMatrix<C64> {
        let r = self.dim();
        let mut b = DMatrix::zeros(2 * r, r);
        b.view_mut((0, 0), (r, r)).copy_from(&self.t2());
        b.view_mut((r, 0), (r, r)).copy_from(&self.t1());
        b
    }

    /// `max |T1 psi - T2 psi_dot|`.
    pub fn residual(&self, psi: &[C64], psi_dot: &[C64]) -> f64 {
        let p = nalgebra::DVector::from_column_slice(psi);
        let d = nalgebra::DVector::from_column_slice(psi_dot);
        max_norm(&(self.t1() * p - self.t2() * d))
    }
}

/// `(T1, T2) = (i (I + U), I - U)`.
pub fn bc_from_unitary(u: &DMatrix<C64>) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    let bc = UnitaryBC::new(u.clone())?;
    Ok((bc.t1(), bc.t2()))
}

/// Hermitian boundary operator with `nu psi = L gamma psi`.
#[derive(Clone, Debug, PartialEq)]
pub struct CayleyOperator {
    l: DMatrix<C64>,
}

impl CayleyOperator {
    pub fn new(l: DMatrix<C64>) -> Result<Self> {
        if l.nrows() != l.ncols() {
            return Err(Error::Dimension { expected: l.nrows(), got: l.ncols() });
        }
        let d = hermitian_defect(&l);
        if !(d <= 1e-12) {
            return Err(Error::NotHermitian(d));
        }
        Ok(Self { l })
    }

    /// Robin data `L = alpha I` on both endpoints.
    pub fn robin(alpha: f64) -> Self {
        Self {
            l: DMatrix::identity(2, 2) * C64::new(alpha, 0.0),
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.l
    }
}

/// `L = i (I + U) (I - U)^{-1}`; fails when `1` is an eigenvalue of `U`.
pub fn cayley(u: &UnitaryBC) -> Result<CayleyOperator> {
    let a = u.t2();
    let smin = a.singular_values().min();
    if smin <= RANK_THRESHOLD {
        return Err(Error::CayleySingular(smin));
    }
    let inv = a.try_inverse().ok_or(Error::CayleySingular(smin))?;
    Ok(CayleyOperator { l: u.t1() * inv })
}

/// `U = (L + i)^{-1} (L - i)`.
pub fn inverse_cayley(l: &CayleyOperator) -> Result<UnitaryBC> {
    let n = l.l.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let plus = &l.l + &id * I;
    let minus = &l.l - &id * I;
    let u = plus
        .lu()
        .solve(&minus)
        .ok_or_else(|| Error::Solver("L + i is singular".into()))?;
    UnitaryBC::new(u)
}

/// Endpoint condition for `interval_spectrum`.
#[derive(Clone, Debug, PartialEq)]
pub enum IntervalBc {
    Unitary(UnitaryBC),
    Cayley(CayleyOperator),
}

/// Uniform interval lattice `x_i = i L / N`, `i = 0..=N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub length: f64,
    pub n: usize,
}

impl Interval {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Geometry(format!("interval length must be positive, got {length}")));
        }
        if n < 100 {
            return Err(Error::Geometry(format!("interval resolution must be at least 100, got {n}")));
        }
        Ok(Self { length, n })
    }

    pub fn h(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|i| self.x(i)).collect()
    }

    /// Link phases `(e/hbar) int A dx` per cell by Simpson's rule.
    pub fn link_phases(&self, a: &dyn Fn(f64) -> f64, params: PhysicalParams) -> Vec<f64> {
        let h = self.h();
        (0..self.n)
            .map(|i| {
                let x = self.x(i);
                params.coupling() * h / 6.0 * (a(x) + 4.0 * a(x + 0.5 * h) + a(x + h))
            })
            .collect()
    }
}

/// Discrete operator over interior nodes plus the retained endpoint
/// coordinates `c` with `gamma psi = B c`.
#[derive(Clone, Debug)]
pub struct IntervalOperator {
    pub interval: Interval,
    /// `W H`, Hermitian.
    pub weighted: CsrMatrix,
    pub weights: Vec<f64>,
    /// Orthonormal basis of the non-Dirichlet endpoint directions.
    pub boundary_basis: DMatrix<C64>,
}

impl IntervalOperator {
    pub fn hermiticity_defect(&self) -> f64 {
        self.weighted.hermitian_defect()
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Node values `psi_0 .. psi_N` of a degree-of-freedom vector.
    pub fn to_nodes(&self, x: &[C64]) -> Vec<C64> {
        let n = self.interval.n;
        let mut out = vec![C64::new(0.0, 0.0); n + 1];
        out[1..n].copy_from_slice(&x[..n - 1]);
        let c = &x[n - 1..];
        for e in 0..2 {
            let node = if e == 0 { 0 } else { n };
            out[node] = (0..c.len()).map(|m| self.boundary_basis[(e, m)] * c[m]).sum();
        }
        out
    }

    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        weighted_dot(&self.weights, a, b)
    }
}

/// Splits the endpoint space into Dirichlet directions and their
/// complement, returning an orthonormal basis `B` of the complement and
/// the Hermitian boundary operator `B^* L B` on it.
fn endpoint_reduction(bc: &IntervalBc) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    match bc {
        IntervalBc::Cayley(l) => {
            if l.l.nrows() != 2 {
                return Err(Error::Dimension { expected: 2, got: l.l.nrows() });
            }
            Ok((DMatrix::identity(2, 2), l.l.clone()))
        }
        IntervalBc::Unitary(u) => {
            if u.dim() != 2 {
                return Err(Error::Dimension { expected: 2, got: u.dim() });
            }
            let svd = u.t2().svd(true, true);
            let (uu, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
            let keep: Vec<usize> = (0..2).filter(|&j| svd.singular_values[j] > RANK_THRESHOLD).collect();
            let mut b = DMatrix::<C64>::zeros(2, keep.len());
            let mut pinv = DMatrix::<C64>::zeros(2, 2);
            for (c, &j) in keep.iter().enumerate() {
                let v = vt.row(j).adjoint();
                b.set_column(c, &v);
                pinv += &v * uu.column(j).adjoint() / C64::new(svd.singular_values[j], 0.0);
            }
            let l = u.t1() * pinv;
            Ok((b.clone(), b.adjoint() * l * &b))
        }
    }
}

/// Assembles `-(hbar^2/2m) D^2` on `[0, L]` under the endpoint condition.
///
/// Interior nodes carry weight `h`; each retained endpoint direction
/// carries `h / 2`. Dirichlet directions are removed from the space.
pub fn assemble_interval(
    bc: &IntervalBc,
    a: &dyn Fn(f64) -> f64,
    interval: Interval,
    params: PhysicalParams,
) -> Result<IntervalOperator> {
    let (b, lc) = endpoint_reduction(bc)?;
    let theta = interval.link_phases(a, params);
    let links: Vec<C64> = theta.iter().map(|t| C64::from_polar(1.0, *t)).collect();
    assemble_with_links(&b, &lc, &links, interval, params)
}

fn assemble_with_links(
    b: &DMatrix<C64>,
    lc: &DMatrix<C64>,
    links: &[C64],
    interval: Interval,
    params: PhysicalParams,
) -> Result<IntervalOperator> {
    let n = interval.n;
    let h = interval.h();
    let kin = params.kinetic();
    let nb = b.ncols();
    let dim = n - 1 + nb;
    // node -> list of (dof, coefficient)
    let expand = |node: usize| -> Vec<(usize, C64)> {
        if node == 0 || node == n {
            let e = if node == 0 { 0 } else { 1 };
            (0..nb).map(|m| (n - 1 + m, b[(e, m)])).filter(|(_, c)| *c != C64::new(0.0, 0.0)).collect()
        } else {
            vec![(node - 1, C64::new(1.0, 0.0))]
        }
    };
    let mut t = Triplets::new(dim, dim);
    let w = kin / h;
    for (i, u) in links.iter().enumerate() {
        // w |psi_i - u psi_{i+1}|^2
        let (ei, ej) = (expand(i), expand(i + 1));
        let mut add = |ra: &[(usize, C64)], ca: &[(usize, C64)], coef: C64| {
            for &(r, cr) in ra {
                for &(c, cc) in ca {
                    t.push(r, c, coef * cr.conj() * cc);
                }
            }
        };
        add(&ei, &ei, C64::new(w, 0.0));
        add(&ej, &ej, C64::new(w, 0.0));
        add(&ei, &ej, -w * u);
        add(&ej, &ei, -w * u.inv());
    }
    for r in 0..nb {
        for c in 0..nb {
            let v = lc[(r, c)];
            if v != C64::new(0.0, 0.0) {
                t.push(n - 1 + r, n - 1 + c, -kin * v);
            }
        }
    }
    let mut weights = vec![h; n - 1];
    weights.extend(std::iter::repeat(0.5 * h).take(nb));
    Ok(IntervalOperator {
        interval,
        weighted: t.into_csr(),
        weights,
        boundary_basis: b.clone(),
    })
}

/// Lowest `k` eigenvalues of the interval operator.
pub fn interval_spectrum(
    bc: &IntervalBc,
    a: &dyn Fn(f64) -> f64,
    interval: Interval,
    k: usize,
    params: PhysicalParams,
) -> Result<Spectrum> {
    let op = assemble_interval(bc, a, interval, params)?;
    solve_weighted(&op.weighted, &op.weights, &SolverOptions::new(k, Method::Iterative, 1e-10))
}

/// Node-wise gauge function on the interval.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFunction1D {
    pub chi: Vec<f64>,
    pub phases: Vec<C64>,
}

impl GaugeFunction1D {
    /// `diag(U(0), U(L))`.
    pub fn endpoint_phases(&self) -> [C64; 2] {
        [self.phases[0], *self.phases.last().unwrap()]
    }

    pub fn apply(&self, state: &[C64]) -> Result<Vec<C64>> {
        crate::error::check_len(self.phases.len(), state.len())?;
        Ok(state.iter().zip(&self.phases).map(|(s, u)| s * u).collect())
    }
}

/// `chi(x) = int_0^x A`, accumulated cell by cell with the same quadrature
/// as the link phases, so the transformed links are trivial.
pub fn gauge_away_1d(a: &dyn Fn(f64) -> f64, interval: Interval, params: PhysicalParams) -> GaugeFunction1D {
    let theta = interval.link_phases(a, params);
    let q = params.coupling();
    let mut chi = Vec::with_capacity(interval.n + 1);
    chi.push(0.0);
    let mut acc = 0.0;
    for t in &theta {
        acc += t / q;
        chi.push(acc);
    }
    let phases = chi.iter().map(|c| C64::from_polar(1.0, q * c)).collect();
    GaugeFunction1D { chi, phases }
}

/// `U -> u U u^*` with `u` the gauge phases at the endpoints.
pub fn transform_unitary(u: &UnitaryBC, g: &GaugeFunction1D) -> UnitaryBC {
    let d = g.endpoint_phases();
    let m = DMatrix::from_fn(2, 2, |i, j| d[i] * u.u[(i, j)] * d[j].conj());
    UnitaryBC { u: m }
}

/// Endpoint traces and outward covariant derivatives of node values,
/// using second-order one-sided differences.
pub fn endpoint_data(
    values: &[C64],
    a: &dyn Fn(f64) -> f64,
    interval: Interval,
    params: PhysicalParams,
) -> Result<([C64; 2], [C64; 2])> {
    crate::error::check_len(interval.n + 1, values.len())?;
    let n = interval.n;
    let h = interval.h();
    let theta = interval.link_phases(a, params);
    let u = |i: usize| C64::from_polar(1.0, theta[i]);
    // left end: transport psi_1, psi_2 back to x = 0
    let l1 = u(0) * values[1];
    let l2 = u(0) * u(1) * values[2];
    let d0 = (-3.0 * values[0] + 4.0 * l1 - l2) / (2.0 * h);
    let r1 = u(n - 1).inv() * values[n - 1];
    let r2 = (u(n - 1) * u(n - 2)).inv() * values[n - 2];
    let dn = (3.0 * values[n] - 4.0 * r1 + r2) / (2.0 * h);
    Ok(([values[0], values[n]], [-d0, dn]))
}

/// `Lambda(psi, phi) = -(hbar^2/2m) sum_ends [conj(Psi) Phi_dot - conj(Psi_dot) Phi]`.
pub fn boundary_form_1d(
    psi: &[C64],
    phi: &[C64],
    a: &dyn Fn(f64) -> f64,
    interval: Interval,
    params: PhysicalParams,
) -> Result<C64> {
    let (tp, dp) = endpoint_data(psi, a, interval, params)?;
    let (tf, df) = endpoint_data(phi, a, interval, params)?;
    let s: C64 = (0..2).map(|e| tp[e].conj() * df[e] - dp[e].conj() * tf[e]).sum();
    Ok(-params.kinetic() * s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn dirichlet_and_neumann_pairs() {
        let (t1, t2) = bc_from_unitary(&DMatrix::identity(2, 2)).unwrap();
        assert_eq!(t1, DMatrix::identity(2, 2) * c(0.0, 2.0));
        assert!(t2.iter().all(|v| *v == c(0.0, 0.0)));
        let (t1, t2) = bc_from_unitary(&-DMatrix::<C64>::identity(2, 2)).unwrap();
        assert!(t1.iter().all(|v| *v == c(0.0, 0.0)));
        assert_eq!(t2, DMatrix::identity(2, 2) * c(2.0, 0.0));
    }

    #[test]
    fn non_unitary_is_rejected() {
        let m = DMatrix::identity(2, 2) * c(2.0, 0.0);
        assert!(matches!(UnitaryBC::new(m), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn scalar_cayley() {
        let l = cayley(&UnitaryBC::scalar(PI / 2.0)).unwrap();
        assert!((l.matrix()[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-14);
        let l = cayley(&UnitaryBC::scalar(PI)).unwrap();
        assert!(l.matrix()[(0, 0)].norm() < 1e-15);
        assert!(matches!(cayley(&UnitaryBC::dirichlet()), Err(Error::CayleySingular(_))));
    }

    #[test]
    fn inverse_cayley_scalars() {
        let u = inverse_cayley(&CayleyOperator::new(DMatrix::zeros(1, 1)).unwrap()).unwrap();
        assert!((u.matrix()[(0, 0)] + c(1.0, 0.0)).norm() < 1e-15);
        let u = inverse_cayley(&CayleyOperator::new(DMatrix::from_element(1, 1, c(-1.0, 0.0))).unwrap()).unwrap();
        assert!((u.matrix()[(0, 0)] - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn boundary_form_of_constant_and_square() {
        let iv = Interval::new(1.0, 200).unwrap();
        let zero = |_: f64| 0.0;
        let psi: Vec<C64> = iv.nodes().iter().map(|_| c(1.0, 0.0)).collect();
        let phi: Vec<C64> = iv.nodes().iter().map(|x| c(x * x, 0.0)).collect();
        let lam = boundary_form_1d(&psi, &phi, &zero, iv, PhysicalParams::default()).unwrap();
        assert!((lam - c(-1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn mixed_endpoints_split_directions() {
        let (b, l) = endpoint_reduction(&IntervalBc::Unitary(UnitaryBC::diagonal(0.0, PI))).unwrap();
        assert_eq!(b.ncols(), 1);
        assert!((b[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!(l[(0, 0)].norm() < 1e-14);
    }
}
