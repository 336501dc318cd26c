//! Vector potentials, Peierls link phases, holonomies and gauge functions.
//!
//! Gauge transformations follow `A -> A - grad chi`. On states they act by
//! the node-wise phase `U_chi = exp(+i e chi / hbar)`, the sign for which
//! `H_{A - grad chi} = U_chi H_A U_chi^*` holds with the covariant derivative
//! `grad + i (e/hbar) A`. Link phases transform as
//! `theta'_{i->j} = theta_{i->j} - (e/hbar) (chi_j - chi_i)`.

use std::collections::VecDeque;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::geometry::{Grid2D, NodeClass};
use crate::C64;

/// Physical constants: reduced Planck constant, charge, mass.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalParams {
    pub hbar: f64,
    pub e: f64,
    pub m: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self { hbar: 1.0, e: 1.0, m: 1.0 }
    }
}

impl PhysicalParams {
    pub fn new(hbar: f64, e: f64, m: f64) -> Result<Self> {
        for (v, name) in [(hbar, "hbar"), (e, "e"), (m, "m")] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Param(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { hbar, e, m })
    }

    /// `2 pi hbar / e`.
    pub fn flux_quantum(&self) -> f64 {
        2.0 * PI * self.hbar / self.e
    }

    /// `e / hbar`.
    pub fn coupling(&self) -> f64 {
        self.e / self.hbar
    }

    /// `hbar^2 / 2m`.
    pub fn kinetic(&self) -> f64 {
        self.hbar * self.hbar / (2.0 * self.m)
    }
}

/// One smooth plane-wave component `A = amp * cos(k . x + phase)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub amp: [f64; 2],
    pub k: [f64; 2],
    pub phase: f64,
}

impl Mode {
    fn arg(&self, p: [f64; 2]) -> f64 {
        self.k[0] * p[0] + self.k[1] * p[1] + self.phase
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    Zero,
    /// `A = (0, B x)`.
    Landau { b: f64 },
    /// `A = (-B y / 2, B x / 2)`.
    Symmetric { b: f64 },
    /// `A = (phi / 2 pi) (-y, x) / r^2`, flux `phi` through the origin.
    AharonovBohm { phi: f64 },
    Superposition(Vec<PotentialSpec>),
    /// Sum of closed-form smooth modes.
    Perturbation(Vec<Mode>),
}

impl PotentialSpec {
    pub fn sum(parts: impl IntoIterator<Item = PotentialSpec>) -> Self {
        PotentialSpec::Superposition(parts.into_iter().collect())
    }

    /// `self - other`, as a superposition.
    pub fn minus(&self, other: &PotentialSpec) -> Self {
        PotentialSpec::Superposition(vec![self.clone(), other.scaled(-1.0)])
    }

    pub fn scaled(&self, c: f64) -> Self {
        match self {
            PotentialSpec::Zero => PotentialSpec::Zero,
            PotentialSpec::Landau { b } => PotentialSpec::Landau { b: c * b },
            PotentialSpec::Symmetric { b } => PotentialSpec::Symmetric { b: c * b },
            PotentialSpec::AharonovBohm { phi } => PotentialSpec::AharonovBohm { phi: c * phi },
            PotentialSpec::Superposition(v) => {
                PotentialSpec::Superposition(v.iter().map(|p| p.scaled(c)).collect())
            }
            PotentialSpec::Perturbation(m) => PotentialSpec::Perturbation(
                m.iter()
                    .map(|m| Mode { amp: [c * m.amp[0], c * m.amp[1]], ..*m })
                    .collect(),
            ),
        }
    }

    pub fn has_aharonov_bohm(&self) -> bool {
        match self {
            PotentialSpec::AharonovBohm { .. } => true,
            PotentialSpec::Superposition(v) => v.iter().any(|p| p.has_aharonov_bohm()),
            _ => false,
        }
    }

    /// Checks the pairing with a grid: flux lines must sit in a hole.
    pub fn check_admissible(&self, grid: &Grid2D) -> Result<()> {
        if self.has_aharonov_bohm() && !grid.is_annulus() {
            return Err(Error::Potential(
                "Aharonov-Bohm potential requires an annulus grid".into(),
            ));
        }
        Ok(())
    }
}

fn singular_check(p: [f64; 2]) -> Result<f64> {
    let r2 = p[0] * p[0] + p[1] * p[1];
    if r2 < 1e-28 {
        Err(Error::Singular(p[0], p[1]))
    } else {
        Ok(r2)
    }
}

/// `A(x, y)`.
pub fn eval_potential(spec: &PotentialSpec, p: [f64; 2]) -> Result<[f64; 2]> {
    Ok(match spec {
        PotentialSpec::Zero => [0.0, 0.0],
        PotentialSpec::Landau { b } => [0.0, b * p[0]],
        PotentialSpec::Symmetric { b } => [-0.5 * b * p[1], 0.5 * b * p[0]],
        PotentialSpec::AharonovBohm { phi } => {
            let r2 = singular_check(p)?;
            let c = phi / (2.0 * PI * r2);
            [-c * p[1], c * p[0]]
        }
        PotentialSpec::Superposition(v) => {
            let mut a = [0.0, 0.0];
            for s in v {
                let t = eval_potential(s, p)?;
                a[0] += t[0];
                a[1] += t[1];
            }
            a
        }
        PotentialSpec::Perturbation(modes) => {
            let mut a = [0.0, 0.0];
            for m in modes {
                let c = m.arg(p).cos();
                a[0] += m.amp[0] * c;
                a[1] += m.amp[1] * c;
            }
            a
        }
    })
}

/// `B = dA_y/dx - dA_x/dy`, analytically.
pub fn curl(spec: &PotentialSpec, p: [f64; 2]) -> Result<f64> {
    Ok(match spec {
        PotentialSpec::Zero => 0.0,
        PotentialSpec::Landau { b } | PotentialSpec::Symmetric { b } => *b,
        PotentialSpec::AharonovBohm { .. } => {
            singular_check(p)?;
            0.0
        }
        PotentialSpec::Superposition(v) => {
            let mut b = 0.0;
            for s in v {
                b += curl(s, p)?;
            }
            b
        }
        PotentialSpec::Perturbation(modes) => modes
            .iter()
            .map(|m| (m.amp[0] * m.k[1] - m.amp[1] * m.k[0]) * m.arg(p).sin())
            .sum(),
    })
}

/// Curl by centered differences with step `h`.
pub fn curl_fd(spec: &PotentialSpec, p: [f64; 2], h: f64) -> Result<f64> {
    let ay_r = eval_potential(spec, [p[0] + h, p[1]])?[1];
    let ay_l = eval_potential(spec, [p[0] - h, p[1]])?[1];
    let ax_u = eval_potential(spec, [p[0], p[1] + h])?[0];
    let ax_d = eval_potential(spec, [p[0], p[1] - h])?[0];
    Ok((ay_r - ay_l - ax_u + ax_d) / (2.0 * h))
}

/// Exact `int_p^q A . dl` along the straight segment from `p` to `q`.
pub fn line_integral(spec: &PotentialSpec, p: [f64; 2], q: [f64; 2]) -> Result<f64> {
    let d = [q[0] - p[0], q[1] - p[1]];
    Ok(match spec {
        PotentialSpec::Zero => 0.0,
        // linear fields: the midpoint rule is exact
        PotentialSpec::Landau { .. } | PotentialSpec::Symmetric { .. } => {
            let a = eval_potential(spec, [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0])?;
            a[0] * d[0] + a[1] * d[1]
        }
        PotentialSpec::AharonovBohm { phi } => ab_angle(*phi, p, q)?,
        PotentialSpec::Superposition(v) => {
            let mut s = 0.0;
            for part in v {
                s += line_integral(part, p, q)?;
            }
            s
        }
        PotentialSpec::Perturbation(modes) => modes
            .iter()
            .map(|m| {
                let a = m.arg(p);
                let b = m.k[0] * d[0] + m.k[1] * d[1];
                let mean = if b.abs() < 1e-8 {
                    a.cos() - 0.5 * b * a.sin()
                } else {
                    ((a + b).sin() - a.sin()) / b
                };
                (m.amp[0] * d[0] + m.amp[1] * d[1]) * mean
            })
            .sum(),
    })
}

fn ab_angle(phi: f64, p: [f64; 2], q: [f64; 2]) -> Result<f64> {
    singular_check(p)?;
    singular_check(q)?;
    let cross = p[0] * q[1] - p[1] * q[0];
    let dot = p[0] * q[0] + p[1] * q[1];
    Ok(phi / (2.0 * PI) * cross.atan2(dot))
}

/// Edge integral used for link phases: midpoint rule, exact angles for
/// Aharonov-Bohm components.
fn link_integral(spec: &PotentialSpec, p: [f64; 2], q: [f64; 2]) -> Result<f64> {
    match spec {
        PotentialSpec::AharonovBohm { phi } => ab_angle(*phi, p, q),
        PotentialSpec::Superposition(v) => {
            let mut s = 0.0;
            for part in v {
                s += link_integral(part, p, q)?;
            }
            Ok(s)
        }
        PotentialSpec::Zero => Ok(0.0),
        _ => {
            let a = eval_potential(spec, [(p[0] + q[0]) / 2.0, (p[1] + q[1]) / 2.0])?;
            Ok(a[0] * (q[0] - p[0]) + a[1] * (q[1] - p[1]))
        }
    }
}

/// Peierls phases on the edges of a grid, stored along each edge's
/// orientation. The reverse transporter of an edge is `1 / u`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkField {
    theta: Vec<f64>,
    u: Vec<C64>,
}

impl LinkField {
    pub fn from_phases(theta: Vec<f64>) -> Self {
        let u = theta.iter().map(|t| C64::from_polar(1.0, *t)).collect();
        Self { theta, u }
    }

    pub fn trivial(n_edges: usize) -> Self {
        Self::from_phases(vec![0.0; n_edges])
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn u(&self, e: usize) -> C64 {
        self.u[e]
    }

    pub fn theta(&self, e: usize) -> f64 {
        self.theta[e]
    }

    pub fn phases(&self) -> &[f64] {
        &self.theta
    }

    /// Replaces one transporter verbatim; used to probe invariant checks.
    pub fn with_link(mut self, e: usize, u: C64) -> Self {
        self.u[e] = u;
        self.theta[e] = u.arg();
        self
    }

    /// Transporter `u_{i->j}` along edge `e` traversed from `i`.
    pub fn transport(&self, grid: &Grid2D, e: usize, from: usize) -> C64 {
        if grid.edges()[e].i == from {
            self.u[e]
        } else {
            self.u[e].inv()
        }
    }

    /// Signed phase of edge `e` traversed from `from`.
    pub fn signed_phase(&self, grid: &Grid2D, e: usize, from: usize) -> f64 {
        if grid.edges()[e].i == from {
            self.theta[e]
        } else {
            -self.theta[e]
        }
    }

    /// `max_e | |u_e| - 1 |`.
    pub fn modulus_defect(&self) -> f64 {
        self.u.iter().map(|u| (u.norm() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// One `edge_index,node_i,node_j,phase` line per edge.
    pub fn dump(&self, grid: &Grid2D) -> String {
        let mut out = String::from("edge_index,node_i,node_j,phase\n");
        for (k, e) in grid.edges().iter().enumerate() {
            let _ = writeln!(out, "{k},{},{},{:.16e}", e.i, e.j, self.theta[k]);
        }
        out
    }
}

/// Link phases `(e/hbar) int_edge A . dl`.
pub fn link_phases(grid: &Grid2D, spec: &PotentialSpec, params: PhysicalParams) -> Result<LinkField> {
    spec.check_admissible(grid)?;
    let q = params.coupling();
    let theta = grid
        .edges()
        .par_iter()
        .map(|e| {
            let p0 = grid.node(e.i).pos();
            let p1 = grid.node(e.j).pos();
            link_integral(spec, p0, p1).map(|v| q * v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LinkField::from_phases(theta))
}

/// Holonomy of a closed node cycle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Holonomy {
    /// Unwrapped sum of signed edge phases.
    pub total: f64,
    /// `total` reduced to `(-pi, pi]`.
    pub principal: f64,
    /// Number of full turns removed: `total = principal + 2 pi winding`.
    pub winding: i64,
}

impl Holonomy {
    fn new(total: f64) -> Self {
        let winding = ((total + PI) / (2.0 * PI)).ceil() as i64 - 1;
        Self {
            total,
            principal: total - 2.0 * PI * winding as f64,
            winding,
        }
    }
}

/// Sum of signed edge phases around `cycle`, closing last to first.
pub fn loop_holonomy(grid: &Grid2D, links: &LinkField, cycle: &[usize]) -> Result<Holonomy> {
    check_len(grid.edges().len(), links.len())?;
    if cycle.len() < 2 {
        return Err(Error::Param("a cycle needs at least two nodes".into()));
    }
    let mut total = 0.0;
    for w in 0..cycle.len() {
        let (a, b) = (cycle[w], cycle[(w + 1) % cycle.len()]);
        let (e, _) = grid
            .edge_between(a, b)
            .ok_or_else(|| Error::Param(format!("cycle is broken between nodes {a} and {b}")))?;
        total += links.signed_phase(grid, e, a);
    }
    Ok(Holonomy::new(total))
}

/// Outcome of a gauge-equivalence test.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeCertificate {
    pub equivalent: bool,
    /// Largest curl mismatch over interior nodes.
    pub max_curl_difference: f64,
    /// Flux quanta separating the two potentials, one entry per hole.
    pub flux_quanta: Vec<i64>,
    /// Distance of each hole's holonomy difference from `2 pi Z`.
    pub holonomy_residuals: Vec<f64>,
    pub diagnostic: String,
}

fn loop_integral(spec: &PotentialSpec, grid: &Grid2D, cycle: &[usize]) -> Result<f64> {
    let mut s = 0.0;
    for w in 0..cycle.len() {
        let p = grid.node(cycle[w]).pos();
        let q = grid.node(cycle[(w + 1) % cycle.len()]).pos();
        s += line_integral(spec, p, q)?;
    }
    Ok(s)
}

/// Decides whether `a` and `a2` differ by a gauge transformation on `grid`:
/// curls must agree at interior nodes to 1e-8 and, around each hole, the
/// holonomies must differ by a multiple of `2 pi` to 1e-8.
pub fn is_gauge_equivalent(
    a: &PotentialSpec,
    a2: &PotentialSpec,
    grid: &Grid2D,
    params: PhysicalParams,
) -> Result<GaugeCertificate> {
    a.check_admissible(grid)?;
    a2.check_admissible(grid)?;
    let mut max_curl: f64 = 0.0;
    let mut worst = 0;
    for (i, n) in grid.nodes().iter().enumerate() {
        if n.class != NodeClass::Interior {
            continue;
        }
        let d = (curl(a, n.pos())? - curl(a2, n.pos())?).abs();
        if d > max_curl {
            max_curl = d;
            worst = i;
        }
    }
    let q = params.coupling();
    let mut flux_quanta = Vec::new();
    let mut residuals = Vec::new();
    for cycle in grid.hole_loops() {
        let diff = q * (loop_integral(a2, grid, &cycle)? - loop_integral(a, grid, &cycle)?);
        let n = (diff / (2.0 * PI)).round();
        flux_quanta.push(n as i64);
        residuals.push((diff - 2.0 * PI * n).abs());
    }
    let curls_ok = max_curl <= 1e-8;
    let holes_ok = residuals.iter().all(|r| *r <= 1e-8);
    let mut diagnostic = String::new();
    if !curls_ok {
        let p = grid.node(worst).pos();
        let _ = write!(
            diagnostic,
            "curls differ by {max_curl:e} at node {worst} ({:.6}, {:.6})",
            p[0], p[1]
        );
    }
    if !holes_ok {
        if !diagnostic.is_empty() {
            diagnostic.push_str("; ");
        }
        let _ = write!(
            diagnostic,
            "hole holonomy difference is off 2 pi Z by {:e}",
            residuals.iter().cloned().fold(0.0, f64::max)
        );
    }
    Ok(GaugeCertificate {
        equivalent: curls_ok && holes_ok,
        max_curl_difference: max_curl,
        flux_quanta,
        holonomy_residuals: residuals,
        diagnostic,
    })
}

/// Node-wise gauge data `chi`, `U_chi = exp(i e chi / hbar)` and `grad chi`.
///
/// On multiply connected grids `chi` is the branch obtained along a
/// spanning tree; `U_chi` is single valued regardless.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFunction {
    chi: Vec<f64>,
    u: Vec<C64>,
    grad: Vec<[f64; 2]>,
    basepoint: Option<usize>,
    coupling: f64,
    max_cycle_defect: f64,
}

/// Smooth scalar gauge `chi = constant + sum c sin(k . x + phase)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarGauge {
    pub constant: f64,
    /// `(c, k, phase)` triples.
    pub modes: Vec<(f64, [f64; 2], f64)>,
}

impl ScalarGauge {
    pub fn constant(c: f64) -> Self {
        Self { constant: c, modes: Vec::new() }
    }

    /// Random smooth gauge with `n` modes of amplitude at most `amp` and
    /// wavenumbers at most `kmax`.
    pub fn random<R: Rng>(rng: &mut R, n: usize, amp: f64, kmax: f64) -> Self {
        let modes = (0..n)
            .map(|_| {
                (
                    rng.random_range(-amp..amp),
                    [rng.random_range(-kmax..kmax), rng.random_range(-kmax..kmax)],
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        Self {
            constant: rng.random_range(-amp..amp),
            modes,
        }
    }

    pub fn value(&self, p: [f64; 2]) -> f64 {
        self.constant
            + self
                .modes
                .iter()
                .map(|(c, k, ph)| c * (k[0] * p[0] + k[1] * p[1] + ph).sin())
                .sum::<f64>()
    }

    /// `grad chi` as a potential.
    pub fn gradient(&self) -> PotentialSpec {
        PotentialSpec::Perturbation(
            self.modes
                .iter()
                .map(|(c, k, ph)| Mode {
                    amp: [c * k[0], c * k[1]],
                    k: *k,
                    phase: *ph,
                })
                .collect(),
        )
    }
}

impl GaugeFunction {
    /// Gauge function sampled from a closed-form scalar.
    pub fn from_scalar(grid: &Grid2D, g: &ScalarGauge, params: PhysicalParams) -> Result<Self> {
        let chi: Vec<f64> = grid.sample(|x, y| g.value([x, y]));
        let grad_spec = g.gradient();
        let grad = grid
            .nodes()
            .iter()
            .map(|n| eval_potential(&grad_spec, n.pos()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_parts(chi, grad, None, params.coupling(), 0.0))
    }

    fn from_parts(
        chi: Vec<f64>,
        grad: Vec<[f64; 2]>,
        basepoint: Option<usize>,
        coupling: f64,
        max_cycle_defect: f64,
    ) -> Self {
        let u = chi.iter().map(|c| C64::from_polar(1.0, coupling * c)).collect();
        Self {
            chi,
            u,
            grad,
            basepoint,
            coupling,
            max_cycle_defect,
        }
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    pub fn chi(&self) -> &[f64] {
        &self.chi
    }

    /// `U_chi` per node.
    pub fn phases(&self) -> &[C64] {
        &self.u
    }

    pub fn gradient(&self) -> &[[f64; 2]] {
        &self.grad
    }

    pub fn basepoint(&self) -> Option<usize> {
        self.basepoint
    }

    /// `e / hbar` used to build the phases.
    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// Largest mismatch, modulo `2 pi`, between `(e/hbar) (chi_j - chi_i)` and
    /// the edge integral of `grad chi` over non-tree edges.
    pub fn max_cycle_defect(&self) -> f64 {
        self.max_cycle_defect
    }

    /// The inverse transformation `-chi`.
    pub fn inverse(&self) -> Self {
        Self::from_parts(
            self.chi.iter().map(|c| -c).collect(),
            self.grad.iter().map(|g| [-g[0], -g[1]]).collect(),
            self.basepoint,
            self.coupling,
            self.max_cycle_defect,
        )
    }

    /// Restriction of `U_chi` to the chart nodes, in chart order.
    pub fn on_chart(&self, chart: &crate::geometry::BoundaryChart) -> Vec<C64> {
        chart.points().iter().map(|p| self.u[p.node]).collect()
    }
}

fn wrap(x: f64) -> f64 {
    x - 2.0 * PI * ((x + PI) / (2.0 * PI)).floor()
}

/// Gauge function with `grad chi = a - a2`, so that `a2 = a - grad chi`.
///
/// `chi` is integrated from `basepoint` (where it vanishes) along a
/// breadth-first spanning tree using exact edge integrals; consistency of
/// `U_chi` across every non-tree edge is enforced to 1e-8.
pub fn gauge_function(
    a: &PotentialSpec,
    a2: &PotentialSpec,
    grid: &Grid2D,
    basepoint: usize,
    params: PhysicalParams,
) -> Result<GaugeFunction> {
    if basepoint >= grid.len() {
        return Err(Error::Param(format!("basepoint {basepoint} is not a node")));
    }
    let cert = is_gauge_equivalent(a, a2, grid, params)?;
    if !cert.equivalent {
        return Err(Error::NotGaugeEquivalent(cert.diagnostic));
    }
    let diff = a.minus(a2);
    let n = grid.len();
    let mut chi = vec![f64::NAN; n];
    let mut tree_edge = vec![false; grid.edges().len()];
    chi[basepoint] = 0.0;
    let mut queue = VecDeque::from([basepoint]);
    while let Some(i) = queue.pop_front() {
        for &(j, e) in grid.neighbors(i) {
            if chi[j].is_nan() {
                chi[j] = chi[i] + line_integral(&diff, grid.node(i).pos(), grid.node(j).pos())?;
                tree_edge[e] = true;
                queue.push_back(j);
            }
        }
    }
    let q = params.coupling();
    let mut defect: f64 = 0.0;
    for (k, e) in grid.edges().iter().enumerate() {
        if tree_edge[k] {
            continue;
        }
        let exact = line_integral(&diff, grid.node(e.i).pos(), grid.node(e.j).pos())?;
        defect = defect.max(wrap(q * (exact - (chi[e.j] - chi[e.i]))).abs());
    }
    if defect > 1e-8 {
        return Err(Error::NotGaugeEquivalent(format!(
            "gauge phase is not single valued: cycle defect {defect:e}"
        )));
    }
    let grad = grid
        .nodes()
        .iter()
        .map(|nd| eval_potential(&diff, nd.pos()))
        .collect::<Result<Vec<_>>>()?;
    Ok(GaugeFunction::from_parts(chi, grad, Some(basepoint), q, defect))
}

/// `psi -> U_chi psi`.
pub fn apply_gauge(state: &[C64], chi: &GaugeFunction) -> Result<Vec<C64>> {
    check_len(chi.len(), state.len())?;
    Ok(state.iter().zip(&chi.u).map(|(s, u)| s * u).collect())
}

/// Links of the transformed potential `A - grad chi`:
/// `u'_{i->j} = U_chi(i) u_{i->j} conj(U_chi(j))`.
pub fn transform_links(grid: &Grid2D, links: &LinkField, chi: &GaugeFunction) -> Result<LinkField> {
    check_len(grid.edges().len(), links.len())?;
    check_len(grid.len(), chi.len())?;
    let mut theta = Vec::with_capacity(links.len());
    let mut u = Vec::with_capacity(links.len());
    for (k, e) in grid.edges().iter().enumerate() {
        theta.push(links.theta[k] + chi.coupling * (chi.chi[e.i] - chi.chi[e.j]));
        u.push(chi.u[e.i] * links.u[k] * chi.u[e.j].conj());
    }
    Ok(LinkField { theta, u })
}
