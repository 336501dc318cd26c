//! Traces, covariant normal derivatives and bulk-to-boundary operators
//! `B_A = T1 gamma - T2 nu_A`.
//!
//! A boundary vector holds one value per chart point, in chart order.
//! Rectangle traces are the lattice boundary values. Polar traces are the
//! values at the chart points on `r = R`; states produced by the operator
//! module carry those values reconstructed from the boundary condition.

use std::fmt;

use crate::error::{check_len, Error, Result};
use crate::gauge::{eval_potential, GaugeFunction, LinkField, PhysicalParams, PotentialSpec};
use crate::geometry::{BoundaryChart, Grid2D};
use crate::linalg::{CsrMatrix, Triplets};
use crate::C64;

/// One complex value per chart point.
pub type BoundaryVector = Vec<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BcKind {
    Dirichlet,
    Neumann,
    Robin,
    Chiral,
}

impl fmt::Display for BcKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BcKind::Dirichlet => "dirichlet",
            BcKind::Neumann => "neumann",
            BcKind::Robin => "robin",
            BcKind::Chiral => "chiral",
        })
    }
}

/// A boundary condition with `alpha` sampled at the chart points.
///
/// Each chart component carries its own family; `make_bc` builds the
/// uniform case and `with_component` overrides one component.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCondition {
    kinds: Vec<BcKind>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

impl BoundaryCondition {
    pub fn kind(&self, component: usize) -> BcKind {
        self.kinds[component]
    }

    pub fn kinds(&self) -> &[BcKind] {
        &self.kinds
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn beta(&self, component: usize) -> f64 {
        self.beta[component]
    }

    /// Replaces the condition on one chart component.
    pub fn with_component(
        mut self,
        chart: &BoundaryChart,
        component: usize,
        kind: BcKind,
        alpha: Option<&dyn Fn(f64) -> f64>,
        beta: Option<f64>,
    ) -> Result<Self> {
        let range = chart
            .components()
            .get(component)
            .ok_or_else(|| Error::Boundary(format!("no chart component {component}")))?
            .clone();
        let (a, b) = sample_params(chart, range.clone(), kind, alpha, beta)?;
        self.kinds[component] = kind;
        self.alpha[range].copy_from_slice(&a);
        self.beta[component] = b;
        Ok(self)
    }
}

fn sample_params(
    chart: &BoundaryChart,
    range: std::ops::Range<usize>,
    kind: BcKind,
    alpha: Option<&dyn Fn(f64) -> f64>,
    beta: Option<f64>,
) -> Result<(Vec<f64>, f64)> {
    let needs_alpha = matches!(kind, BcKind::Robin | BcKind::Chiral);
    let a = match (needs_alpha, alpha) {
        (true, None) => return Err(Error::Boundary(format!("{kind} condition needs alpha"))),
        (true, Some(f)) => chart.points()[range].iter().map(|p| f(p.s)).collect::<Vec<_>>(),
        (false, _) => vec![0.0; range.len()],
    };
    if let Some(bad) = a.iter().find(|v| !v.is_finite()) {
        return Err(Error::Boundary(format!("alpha must be finite, got {bad}")));
    }
    let b = match (kind, beta) {
        (BcKind::Chiral, None) => return Err(Error::Boundary("chiral condition needs beta".into())),
        (BcKind::Chiral, Some(b)) if !b.is_finite() => {
            return Err(Error::Boundary(format!("beta must be finite, got {b}")))
        }
        (BcKind::Chiral, Some(b)) => b,
        _ => 0.0,
    };
    Ok((a, b))
}

/// Builds a uniform boundary condition; `alpha` is a function of the
/// arclength `s` on each component.
pub fn make_bc(
    chart: &BoundaryChart,
    kind: BcKind,
    alpha: Option<&dyn Fn(f64) -> f64>,
    beta: Option<f64>,
) -> Result<BoundaryCondition> {
    let mut bc = BoundaryCondition {
        kinds: vec![kind; chart.components().len()],
        alpha: vec![0.0; chart.len()],
        beta: vec![0.0; chart.components().len()],
    };
    for c in 0..chart.components().len() {
        bc = bc.with_component(chart, c, kind, alpha, beta)?;
    }
    Ok(bc)
}

/// The pair `(T1, T2)` over the boundary space.
///
/// `T2` is the identity or zero on each component. `T1` is Hermitian with
/// respect to the line-quadrature weights `ds`.
#[derive(Clone, Debug, PartialEq)]
pub struct BulkToBoundaryOp {
    t1: CsrMatrix,
    t2: CsrMatrix,
    dirichlet: Vec<bool>,
    provenance: String,
}

impl BulkToBoundaryOp {
    pub fn t1(&self) -> &CsrMatrix {
        &self.t1
    }

    pub fn t2(&self) -> &CsrMatrix {
        &self.t2
    }

    /// True when `T2 = 0` on the component.
    pub fn is_dirichlet(&self, component: usize) -> bool {
        self.dirichlet[component]
    }

    /// Which condition and gauge produced the operator.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.t1.n_rows()
    }

    pub fn is_empty(&self) -> bool {
        self.t1.n_rows() == 0
    }

    /// `B_A` applied to boundary data: `T1 psi - T2 psi_dot`.
    pub fn apply(&self, psi: &[C64], psi_dot: &[C64]) -> Result<BoundaryVector> {
        check_len(self.len(), psi.len())?;
        check_len(self.len(), psi_dot.len())?;
        let a = self.t1.matvec(psi);
        let b = self.t2.matvec(psi_dot);
        Ok(a.iter().zip(&b).map(|(x, y)| x - y).collect())
    }
}

/// Centered periodic tangential difference on each chart component.
pub fn tangential_difference(chart: &BoundaryChart) -> CsrMatrix {
    let mut t = Triplets::new(chart.len(), chart.len());
    for k in 0..chart.len() {
        let w = 0.5 / chart.point(k).ds;
        t.push(k, chart.next(k), C64::new(w, 0.0));
        t.push(k, chart.prev(k), C64::new(-w, 0.0));
    }
    t.into_csr()
}

/// `(T1, T2)` for `bc` in the gauge `spec`.
pub fn bc_operators(
    bc: &BoundaryCondition,
    chart: &BoundaryChart,
    spec: &PotentialSpec,
    params: PhysicalParams,
) -> Result<BulkToBoundaryOp> {
    check_len(chart.len(), bc.alpha.len())?;
    check_len(chart.components().len(), bc.kinds.len())?;
    let n = chart.len();
    let q = params.coupling();
    let mut t1 = Triplets::new(n, n);
    let mut t2 = Triplets::new(n, n);
    let one = C64::new(1.0, 0.0);
    for (c, range) in chart.components().iter().enumerate() {
        for k in range.clone() {
            let alpha = bc.alpha[k];
            match bc.kinds[c] {
                BcKind::Dirichlet => t1.push(k, k, one),
                BcKind::Neumann => t2.push(k, k, one),
                BcKind::Robin => {
                    if alpha != 0.0 {
                        t1.push(k, k, C64::new(alpha, 0.0));
                    }
                    t2.push(k, k, one);
                }
                BcKind::Chiral => {
                    let beta = bc.beta[c];
                    let p = chart.point(k);
                    if range.len() < 3 {
                        return Err(Error::Boundary("chiral condition needs a closed component of at least 3 points".into()));
                    }
                    let a = eval_potential(spec, p.position)?;
                    let ta = p.tangent[0] * a[0] + p.tangent[1] * a[1];
                    let diag = alpha - beta * q * ta;
                    if diag != 0.0 {
                        t1.push(k, k, C64::new(diag, 0.0));
                    }
                    if beta != 0.0 {
                        let w = 0.5 * beta / p.ds;
                        t1.push(k, chart.next(k), C64::new(0.0, w));
                        t1.push(k, chart.prev(k), C64::new(0.0, -w));
                    }
                    t2.push(k, k, one);
                }
            }
        }
    }
    let kinds: Vec<String> = bc.kinds.iter().map(|k| k.to_string()).collect();
    let op = BulkToBoundaryOp {
        t1: t1.into_csr(),
        t2: t2.into_csr(),
        dirichlet: bc.kinds.iter().map(|k| *k == BcKind::Dirichlet).collect(),
        provenance: format!("{} in gauge {:?}", kinds.join("/"), spec),
    };
    check_structure(&op, chart)?;
    Ok(op)
}

/// `max |(D T1)_ij - conj((D T1)_ji)|` with `D = diag(ds)`.
pub fn weighted_hermitian_defect(t1: &CsrMatrix, chart: &BoundaryChart) -> f64 {
    let ds: Vec<f64> = chart.points().iter().map(|p| p.ds).collect();
    t1.scale_rows_real(&ds).hermitian_defect()
}

fn check_structure(op: &BulkToBoundaryOp, chart: &BoundaryChart) -> Result<()> {
    let scale = op.t1.max_abs().max(1.0);
    let ds_max = chart.points().iter().map(|p| p.ds).fold(0.0, f64::max);
    let defect = weighted_hermitian_defect(&op.t1, chart);
    if defect > 1e-12 * scale * ds_max {
        return Err(Error::Boundary(format!("T1 is not Hermitian (defect {defect:e})")));
    }
    for (c, range) in chart.components().iter().enumerate() {
        for k in range.clone() {
            let d2 = op.t2.get(k, k);
            let expect = if op.dirichlet[c] { 0.0 } else { 1.0 };
            if d2 != C64::new(expect, 0.0) || op.t2.row_nnz(k) > 1 {
                return Err(Error::Boundary("T2 must be 0 or I on each component".into()));
            }
            if op.dirichlet[c] && op.t1.row_nnz(k) == 0 {
                return Err(Error::Boundary(format!("T1 and T2 both vanish on chart row {k}")));
            }
        }
    }
    Ok(())
}

/// `gamma psi`: the state at the chart points.
pub fn trace(grid: &Grid2D, state: &[C64]) -> Result<BoundaryVector> {
    check_len(grid.len(), state.len())?;
    Ok(grid.chart().points().iter().map(|p| state[p.node]).collect())
}

/// Coefficients `(c0, c1, c2)` of the one-sided outward derivative
/// `c0 f(0) + c1 f(d1) + c2 f(d2)` from samples at inward distances
/// `0 < d1 < d2`; second order.
pub fn one_sided_coefficients(d1: f64, d2: f64) -> [f64; 3] {
    [
        1.0 / d1 + 1.0 / d2,
        -d2 / (d1 * (d2 - d1)),
        d1 / (d2 * (d2 - d1)),
    ]
}

/// Transporters from a chart point to its two inward stencil nodes:
/// `(u_{b->1}, u_{b->1} u_{1->2})`.
pub(crate) fn inward_transport(grid: &Grid2D, links: &LinkField, k: usize) -> Result<(C64, C64)> {
    let p = grid.chart().point(k);
    let step = |a: usize, b: usize| -> Result<C64> {
        let (e, _) = grid
            .edge_between(a, b)
            .ok_or_else(|| Error::Geometry(format!("nodes {a} and {b} are not adjacent")))?;
        Ok(links.transport(grid, e, a))
    };
    let u1 = step(p.node, p.inward[0])?;
    let u2 = u1 * step(p.inward[0], p.inward[1])?;
    Ok((u1, u2))
}

/// `nu_A psi = n . (grad + i (e/hbar) A) psi` at each chart point.
///
/// Uses a second-order one-sided stencil along the inward normal on values
/// parallel-transported to the boundary point through the links, so the
/// result is exactly covariant under lattice gauge transformations.
pub fn covariant_normal_derivative(grid: &Grid2D, links: &LinkField, state: &[C64]) -> Result<BoundaryVector> {
    check_len(grid.len(), state.len())?;
    check_len(grid.edges().len(), links.len())?;
    let chart = grid.chart();
    (0..chart.len())
        .map(|k| {
            let p = chart.point(k);
            let c = one_sided_coefficients(p.inward_dist[0], p.inward_dist[1]);
            let (u1, u2) = inward_transport(grid, links, k)?;
            Ok(state[p.node] * c[0] + u1 * state[p.inward[0]] * c[1] + u2 * state[p.inward[1]] * c[2])
        })
        .collect()
}

/// `max |T1 psi - T2 psi_dot|`.
pub fn bc_residual(op: &BulkToBoundaryOp, psi: &[C64], psi_dot: &[C64]) -> Result<f64> {
    Ok(op.apply(psi, psi_dot)?.iter().fold(0.0, |m, v| m.max(v.norm())))
}

/// `T_i -> u T_i u^*` with `u = gamma U_chi`.
pub fn transform_bc(op: &BulkToBoundaryOp, chi: &GaugeFunction, chart: &BoundaryChart) -> Result<BulkToBoundaryOp> {
    check_len(chart.len(), op.len())?;
    let u = chi.on_chart(chart);
    let uc: Vec<C64> = u.iter().map(|z| z.conj()).collect();
    Ok(BulkToBoundaryOp {
        t1: op.t1.scale(&u, &uc),
        t2: op.t2.scale(&u, &uc),
        dirichlet: op.dirichlet.clone(),
        provenance: format!("{} transformed by a gauge function", op.provenance),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_disk, build_rectangle};

    #[test]
    fn one_sided_weights() {
        let c = one_sided_coefficients(1.0, 2.0);
        assert!((c[0] - 1.5).abs() < 1e-15 && (c[1] + 2.0).abs() < 1e-15 && (c[2] - 0.5).abs() < 1e-15);
        let c = one_sided_coefficients(0.5, 1.5);
        assert!((c[0] - 8.0 / 3.0).abs() < 1e-14 && (c[1] + 3.0).abs() < 1e-14 && (c[2] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn dirichlet_and_robin_operators() {
        let g = build_rectangle(1.0, 1.0, 4, 4).unwrap();
        let p = PhysicalParams::default();
        let d = make_bc(g.chart(), BcKind::Dirichlet, None, None).unwrap();
        let op = bc_operators(&d, g.chart(), &PotentialSpec::Zero, p).unwrap();
        assert!(op.t1().is_identity() && op.t2().is_zero());
        let r = make_bc(g.chart(), BcKind::Robin, Some(&|_| 2.0), None).unwrap();
        let op = bc_operators(&r, g.chart(), &PotentialSpec::Zero, p).unwrap();
        assert!(op.t2().is_identity());
        assert!(op.t1().triplets().all(|(i, j, v)| i == j && v == C64::new(2.0, 0.0)));
    }

    #[test]
    fn missing_parameters_are_rejected() {
        let g = build_disk(1.0, 4, 8).unwrap();
        assert!(make_bc(g.chart(), BcKind::Robin, None, None).is_err());
        assert!(make_bc(g.chart(), BcKind::Chiral, Some(&|_| 0.0), None).is_err());
        assert!(make_bc(g.chart(), BcKind::Robin, Some(&|_| f64::NAN), None).is_err());
    }

    #[test]
    fn chiral_on_four_point_ring() {
        let chart = BoundaryChart::ring(4, 1.0);
        let bc = make_bc(&chart, BcKind::Chiral, Some(&|_| 0.0), Some(1.0)).unwrap();
        let op = bc_operators(&bc, &chart, &PotentialSpec::Zero, PhysicalParams::default()).unwrap();
        let t1 = op.t1().to_dense();
        let i = C64::new(0.0, 1.0);
        for r in 0..4 {
            let row = [0.0, 0.5, 0.0, -0.5];
            for c in 0..4 {
                assert_eq!(t1[(r, c)], i * row[(c + 4 - r) % 4]);
            }
        }
        assert_eq!(op.t1().hermitian_defect(), 0.0);
    }

    #[test]
    fn residuals() {
        let chart = BoundaryChart::ring(6, 0.5);
        let p = PhysicalParams::default();
        let one = vec![C64::new(1.0, 0.0); 6];
        let zero = vec![C64::new(0.0, 0.0); 6];
        let r = bc_operators(&make_bc(&chart, BcKind::Robin, Some(&|_| 1.0), None).unwrap(), &chart, &PotentialSpec::Zero, p).unwrap();
        assert_eq!(bc_residual(&r, &one, &one).unwrap(), 0.0);
        assert_eq!(bc_residual(&r, &one, &zero).unwrap(), 1.0);
        let d = bc_operators(&make_bc(&chart, BcKind::Dirichlet, None, None).unwrap(), &chart, &PotentialSpec::Zero, p).unwrap();
        assert_eq!(bc_residual(&d, &zero, &one).unwrap(), 0.0);
    }
}
