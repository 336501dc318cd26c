//! Assembly of the discrete magnetic Hamiltonian on the kernel of a
//! boundary condition, the boundary form, the probability current and
//! Hermiticity diagnostics.
//!
//! The matrix `K = W H` is assembled from finite-volume fluxes
//! `(hbar^2 / 2m) c_ij (psi_i - u_{i->j} psi_j)` and is Hermitian, so `H` is
//! self-adjoint in the weighted product `<psi, phi> = sum W_i conj(psi_i) phi_i`.
//!
//! Degrees of freedom are ordered as interior nodes by increasing node index
//! followed by retained boundary nodes in chart order. Rectangles keep their
//! boundary nodes unless the condition is Dirichlet; polar grids always keep
//! only their cells and eliminate the boundary values through the condition.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::boundary::{covariant_normal_derivative, inward_transport, trace, BulkToBoundaryOp};
use crate::error::{check_len, Error, Result};
use crate::gauge::{LinkField, PhysicalParams};
use crate::geometry::{Grid2D, GridKind, NodeClass};
use crate::linalg::{weighted_dot, CsrMatrix, Triplets};
use crate::C64;

/// Largest tolerated `||W H - (W H)^*||_max` before assembly fails.
pub const HERMITICITY_LIMIT: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct Hamiltonian {
    weighted: CsrMatrix,
    matrix: CsrMatrix,
    weights: Vec<f64>,
    dof_nodes: Vec<usize>,
    n_nodes: usize,
    chart_nodes: Vec<usize>,
    // boundary values as a linear map of the degrees of freedom
    reconstruction: CsrMatrix,
    grid_hash: u64,
    provenance: String,
}

impl Hamiltonian {
    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `H` over the degrees of freedom.
    pub fn matrix(&self) -> &CsrMatrix {
        &self.matrix
    }

    /// `W H`, Hermitian.
    pub fn weighted(&self) -> &CsrMatrix {
        &self.weighted
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Grid node of each degree of freedom.
    pub fn dof_nodes(&self) -> &[usize] {
        &self.dof_nodes
    }

    pub fn grid_hash(&self) -> u64 {
        self.grid_hash
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim(), x.len())?;
        Ok(self.matrix.matvec(x))
    }

    /// Weighted inner product over the degrees of freedom.
    pub fn inner(&self, a: &[C64], b: &[C64]) -> C64 {
        weighted_dot(&self.weights, a, b)
    }

    /// Full grid vector carrying boundary values implied by the condition.
    pub fn to_bulk(&self, x: &[C64]) -> Result<Vec<C64>> {
        check_len(self.dim(), x.len())?;
        let mut out = vec![C64::new(0.0, 0.0); self.n_nodes];
        for (d, &node) in self.dof_nodes.iter().enumerate() {
            out[node] = x[d];
        }
        let b = self.reconstruction.matvec(x);
        for (k, &node) in self.chart_nodes.iter().enumerate() {
            out[node] = b[k];
        }
        Ok(out)
    }

    /// Restriction of a full grid vector to the degrees of freedom.
    pub fn from_bulk(&self, state: &[C64]) -> Result<Vec<C64>> {
        check_len(self.n_nodes, state.len())?;
        Ok(self.dof_nodes.iter().map(|&n| state[n]).collect())
    }

    /// Coordinate dump, one `row,col,re,im` line per stored entry of `H`.
    pub fn dump_matrix(&self) -> String {
        let mut out = String::from("row,col,re,im\n");
        for (i, j, v) in self.matrix.triplets() {
            let _ = writeln!(out, "{i},{j},{:.16e},{:.16e}", v.re, v.im);
        }
        out
    }

    /// One `index,weight` line per degree of freedom.
    pub fn dump_weights(&self) -> String {
        let mut out = String::from("index,weight\n");
        for (i, w) in self.weights.iter().enumerate() {
            let _ = writeln!(out, "{i},{w:.16e}");
        }
        out
    }
}

/// `||W H - (W H)^*||_max`.
pub fn hermiticity_defect(h: &Hamiltonian) -> f64 {
    h.weighted.hermitian_defect()
}

/// Assembles `H_A` on the kernel of `op`; fails when the result is not
/// W-Hermitian to `HERMITICITY_LIMIT`.
pub fn assemble(grid: &Grid2D, links: &LinkField, op: &BulkToBoundaryOp, params: PhysicalParams) -> Result<Hamiltonian> {
    let h = assemble_unchecked(grid, links, op, params)?;
    let defect = hermiticity_defect(&h);
    if defect.is_nan() || defect > HERMITICITY_LIMIT {
        return Err(Error::Hermiticity {
            defect,
            limit: HERMITICITY_LIMIT,
        });
    }
    Ok(h)
}

/// Assembly without the final Hermiticity check.
pub fn assemble_unchecked(
    grid: &Grid2D,
    links: &LinkField,
    op: &BulkToBoundaryOp,
    params: PhysicalParams,
) -> Result<Hamiltonian> {
    check_len(grid.edges().len(), links.len())?;
    check_len(grid.chart().len(), op.len())?;
    match grid.kind() {
        GridKind::Rectangle { .. } => assemble_rectangle(grid, links, op, params),
        GridKind::Disk { radius, nr, .. } => assemble_polar(grid, links, op, params, radius / nr as f64),
        GridKind::Annulus { r_in, r_out, nr, .. } => {
            assemble_polar(grid, links, op, params, (r_out - r_in) / nr as f64)
        }
    }
}

fn finish(
    grid: &Grid2D,
    k: Triplets,
    weights: Vec<f64>,
    dof_nodes: Vec<usize>,
    reconstruction: CsrMatrix,
    op: &BulkToBoundaryOp,
) -> Hamiltonian {
    let weighted = k.into_csr();
    let inv: Vec<f64> = weights.iter().map(|w| 1.0 / w).collect();
    let matrix = weighted.scale_rows_real(&inv);
    Hamiltonian {
        weighted,
        matrix,
        weights,
        dof_nodes,
        n_nodes: grid.len(),
        chart_nodes: grid.chart().points().iter().map(|p| p.node).collect(),
        reconstruction,
        grid_hash: grid.hash(),
        provenance: op.provenance().to_string(),
    }
}

fn push_edge(k: &mut Triplets, a: Option<usize>, b: Option<usize>, w: f64, u_ab: C64) {
    if let Some(a) = a {
        k.push(a, a, C64::new(w, 0.0));
        if let Some(b) = b {
            k.push(a, b, -w * u_ab);
        }
    }
    if let Some(b) = b {
        k.push(b, b, C64::new(w, 0.0));
        if let Some(a) = a {
            k.push(b, a, -w * u_ab.inv());
        }
    }
}

fn assemble_rectangle(
    grid: &Grid2D,
    links: &LinkField,
    op: &BulkToBoundaryOp,
    params: PhysicalParams,
) -> Result<Hamiltonian> {
    let kin = params.kinetic();
    let chart = grid.chart();
    let dirichlet = op.is_dirichlet(0);
    if dirichlet && !op.t1().is_diagonal() {
        return Err(Error::Boundary("Dirichlet T1 must be diagonal".into()));
    }
    let mut node_dof = vec![None; grid.len()];
    let mut dof_nodes = Vec::new();
    for (i, n) in grid.nodes().iter().enumerate() {
        if n.class == NodeClass::Interior {
            node_dof[i] = Some(dof_nodes.len());
            dof_nodes.push(i);
        }
    }
    if !dirichlet {
        for p in chart.points() {
            node_dof[p.node] = Some(dof_nodes.len());
            dof_nodes.push(p.node);
        }
    }
    let n = dof_nodes.len();
    let mut k = Triplets::new(n, n);
    for (e, ed) in grid.edges().iter().enumerate() {
        let (a, b) = (node_dof[ed.i], node_dof[ed.j]);
        if a.is_none() && b.is_none() {
            continue;
        }
        push_edge(&mut k, a, b, kin * ed.coupling, links.u(e));
    }
    let mut rec = Triplets::new(chart.len(), n);
    if !dirichlet {
        for (r, c, v) in op.t1().triplets() {
            let (dr, dc) = (node_dof[chart.point(r).node].unwrap(), node_dof[chart.point(c).node].unwrap());
            k.push(dr, dc, -kin * chart.point(r).ds * v);
        }
        for (c, p) in chart.points().iter().enumerate() {
            rec.push(c, node_dof[p.node].unwrap(), C64::new(1.0, 0.0));
        }
    }
    let weights = dof_nodes.iter().map(|&i| grid.node(i).weight).collect();
    Ok(finish(grid, k, weights, dof_nodes, rec.into_csr(), op))
}

/// `M = (I - h T1)^{-1} T1` on one chart component, with `h = dr / 2`.
fn boundary_response(op: &BulkToBoundaryOp, range: std::ops::Range<usize>, h: f64) -> Result<DMatrix<C64>> {
    let n = range.len();
    let mut t = DMatrix::<C64>::zeros(n, n);
    for r in range.clone() {
        for (c, v) in op.t1().row(r) {
            if !range.contains(&c) {
                return Err(Error::Boundary("T1 couples different boundary components".into()));
            }
            t[(r - range.start, c - range.start)] = v;
        }
    }
    let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || t[(i, j)] == C64::new(0.0, 0.0)));
    let singular = || Error::Boundary("boundary condition makes the ghost elimination singular".into());
    if diagonal {
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let d = C64::new(1.0, 0.0) - h * t[(i, i)];
            if d.norm() < 1e-12 {
                return Err(singular());
            }
            m[(i, i)] = t[(i, i)] / d;
        }
        return Ok(m);
    }
    let a = DMatrix::<C64>::identity(n, n) - t.scale(h);
    let lu = a.lu();
    lu.solve(&t).ok_or_else(singular)
}

fn assemble_polar(
    grid: &Grid2D,
    links: &LinkField,
    op: &BulkToBoundaryOp,
    params: PhysicalParams,
    dr: f64,
) -> Result<Hamiltonian> {
    let kin = params.kinetic();
    let chart = grid.chart();
    let mut node_dof = vec![None; grid.len()];
    let mut dof_nodes = Vec::new();
    for (i, n) in grid.nodes().iter().enumerate() {
        if n.class == NodeClass::Interior {
            node_dof[i] = Some(dof_nodes.len());
            dof_nodes.push(i);
        }
    }
    let n = dof_nodes.len();
    let mut k = Triplets::new(n, n);
    for (e, ed) in grid.edges().iter().enumerate() {
        if ed.coupling == 0.0 {
            continue;
        }
        push_edge(&mut k, node_dof[ed.i], node_dof[ed.j], kin * ed.coupling, links.u(e));
    }
    let mut rec = Triplets::new(chart.len(), n);
    for (c, range) in chart.components().iter().enumerate() {
        if op.is_dirichlet(c) {
            for b in range.clone() {
                let p = chart.point(b);
                let l = node_dof[p.inward[0]].unwrap();
                k.push(l, l, C64::new(kin * 2.0 * p.ds / dr, 0.0));
            }
            continue;
        }
        let m = boundary_response(op, range.clone(), 0.5 * dr)?;
        // a_b = v_b psi_L: cell values transported to the boundary points
        let mut v = Vec::with_capacity(range.len());
        let mut l = Vec::with_capacity(range.len());
        for b in range.clone() {
            let (u1, _) = inward_transport(grid, links, b)?;
            v.push(u1);
            l.push(node_dof[chart.point(b).inward[0]].unwrap());
        }
        let nb = range.len();
        for r in 0..nb {
            let ds = chart.point(range.start + r).ds;
            for s in 0..nb {
                let mrs = m[(r, s)];
                if mrs != C64::new(0.0, 0.0) {
                    k.push(l[r], l[s], -kin * ds * v[r].inv() * mrs * v[s]);
                }
                let recon = if r == s { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) } + 0.5 * dr * mrs;
                if recon != C64::new(0.0, 0.0) {
                    rec.push(range.start + r, l[s], recon * v[s]);
                }
            }
        }
    }
    let weights = dof_nodes.iter().map(|&i| grid.node(i).weight).collect();
    Ok(finish(grid, k, weights, dof_nodes, rec.into_csr(), op))
}

/// The operator without boundary condition, applied to a full grid vector.
///
/// Boundary fluxes use the measured covariant normal derivative of the
/// state. Rows of zero-weight nodes are zero.
pub fn apply_unconstrained(grid: &Grid2D, links: &LinkField, params: PhysicalParams, state: &[C64]) -> Result<Vec<C64>> {
    check_len(grid.len(), state.len())?;
    check_len(grid.edges().len(), links.len())?;
    let kin = params.kinetic();
    let mut flux = vec![C64::new(0.0, 0.0); grid.len()];
    for (e, ed) in grid.edges().iter().enumerate() {
        if ed.coupling == 0.0 {
            continue;
        }
        let u = links.u(e);
        let w = kin * ed.coupling;
        flux[ed.i] += w * (state[ed.i] - u * state[ed.j]);
        flux[ed.j] += w * (state[ed.j] - u.inv() * state[ed.i]);
    }
    let nu = covariant_normal_derivative(grid, links, state)?;
    let polar = grid.is_polar();
    for (k, p) in grid.chart().points().iter().enumerate() {
        if polar {
            let cell = p.inward[0];
            let (e, _) = grid.edge_between(cell, p.node).expect("boundary stub edge");
            flux[cell] -= kin * p.ds * links.transport(grid, e, cell) * nu[k];
        } else {
            flux[p.node] -= kin * p.ds * nu[k];
        }
    }
    Ok(grid
        .nodes()
        .iter()
        .zip(flux)
        .map(|(n, f)| if n.weight > 0.0 { f / n.weight } else { C64::new(0.0, 0.0) })
        .collect())
}

/// `<psi, H phi> - <H psi, phi>` with the unconstrained operator.
pub fn bulk_form(grid: &Grid2D, links: &LinkField, params: PhysicalParams, psi: &[C64], phi: &[C64]) -> Result<C64> {
    let hphi = apply_unconstrained(grid, links, params, phi)?;
    let hpsi = apply_unconstrained(grid, links, params, psi)?;
    let w = grid.weights();
    Ok(weighted_dot(&w, psi, &hphi) - weighted_dot(&w, &hpsi, phi))
}

/// `Lambda_A(psi, phi) = -(hbar^2 / 2m) sum_s ds [conj(Psi) Phi_dot - conj(Psi_dot) Phi]`.
pub fn boundary_form(grid: &Grid2D, links: &LinkField, params: PhysicalParams, psi: &[C64], phi: &[C64]) -> Result<C64> {
    let (t_psi, t_phi) = (trace(grid, psi)?, trace(grid, phi)?);
    let n_psi = covariant_normal_derivative(grid, links, psi)?;
    let n_phi = covariant_normal_derivative(grid, links, phi)?;
    let mut s = C64::new(0.0, 0.0);
    for (k, p) in grid.chart().points().iter().enumerate() {
        s += p.ds * (t_psi[k].conj() * n_phi[k] - n_psi[k].conj() * t_phi[k]);
    }
    Ok(-params.kinetic() * s)
}

/// Sesquilinear current `j = -(hbar^2 / 2m) [conj(psi) D phi - conj(D psi) phi]`
/// with `D` the centered covariant difference; `None` where the stencil is
/// incomplete.
#[derive(Clone, Debug, PartialEq)]
pub struct CurrentField {
    pub values: Vec<Option<[C64; 2]>>,
}

impl CurrentField {
    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .flatten()
            .map(|v| v[0].norm().max(v[1].norm()))
            .fold(0.0, f64::max)
    }
}

fn covariant_gradient(grid: &Grid2D, links: &LinkField, state: &[C64], i: usize) -> Option<[C64; 2]> {
    let t = |j: usize| -> Option<C64> {
        let (e, _) = grid.edge_between(i, j)?;
        Some(links.transport(grid, e, i) * state[j])
    };
    match grid.kind() {
        GridKind::Rectangle { nx, ny, a, b } => {
            if grid.node(i).class != NodeClass::Interior {
                return None;
            }
            let (hx, hy) = (a / nx as f64, b / ny as f64);
            let w = nx + 1;
            let dx = (t(i + 1)? - t(i - 1)?) / (2.0 * hx);
            let dy = (t(i + w)? - t(i - w)?) / (2.0 * hy);
            let _ = ny;
            Some([dx, dy])
        }
        GridKind::Disk { nr, ntheta, .. } | GridKind::Annulus { nr, ntheta, .. } => {
            if i >= nr * ntheta {
                return None;
            }
            let (j, k) = (i / ntheta, i % ntheta);
            if j == 0 || j + 1 >= nr {
                return None;
            }
            let radii = grid.ring_radii();
            let dr = radii[1] - radii[0];
            let dth = 2.0 * std::f64::consts::PI / ntheta as f64;
            let r = radii[j];
            let kp = j * ntheta + (k + 1) % ntheta;
            let km = j * ntheta + (k + ntheta - 1) % ntheta;
            let d_r = (t(i + ntheta)? - t(i - ntheta)?) / (2.0 * dr);
            let d_t = (t(kp)? - t(km)?) / (2.0 * r * dth);
            let (s, c) = (k as f64 * dth).sin_cos();
            Some([d_r * c - d_t * s, d_r * s + d_t * c])
        }
    }
}

pub fn current(grid: &Grid2D, links: &LinkField, params: PhysicalParams, psi: &[C64], phi: &[C64]) -> Result<CurrentField> {
    check_len(grid.len(), psi.len())?;
    check_len(grid.len(), phi.len())?;
    check_len(grid.edges().len(), links.len())?;
    let kin = params.kinetic();
    let values = (0..grid.len())
        .map(|i| {
            let gphi = covariant_gradient(grid, links, phi, i)?;
            let gpsi = covariant_gradient(grid, links, psi, i)?;
            let f = |c: usize| -kin * (psi[i].conj() * gphi[c] - gpsi[c].conj() * phi[i]);
            Some([f(0), f(1)])
        })
        .collect();
    Ok(CurrentField { values })
}
