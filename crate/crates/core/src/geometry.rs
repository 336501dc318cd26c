//! Discrete billiard domains: uniform rectangles and cell-centered polar
//! disks and annuli, each with an exact boundary chart.
//!
//! Node numbering:
//! * rectangle: lexicographic `iy * (nx + 1) + ix`;
//! * polar: cells ring-major `j * ntheta + k` (ring `j` at radius
//!   `r_min + (j + 1/2) dr`), followed by the outer boundary points
//!   `nr * ntheta + k` at `r = r_max` and, for annuli, the inner boundary
//!   points `(nr + 1) * ntheta + k` at `r = r_min`.
//!
//! Polar boundary points sit on cell faces and carry no area; their weight
//! is zero. Every other node's weight is the area of its control volume.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::ops::Range;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridKind {
    Rectangle { a: f64, b: f64, nx: usize, ny: usize },
    Disk { radius: f64, nr: usize, ntheta: usize },
    Annulus { r_in: f64, r_out: f64, nr: usize, ntheta: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Boundary,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Node {
    pub x: f64,
    pub y: f64,
    pub class: NodeClass,
    pub weight: f64,
}

impl Node {
    pub fn pos(&self) -> [f64; 2] {
        [self.x, self.y]
    }
}

/// A straight lattice edge oriented `i -> j`.
///
/// `coupling` is the finite-volume transmissibility (face length over node
/// distance). Edges joining a polar boundary point to its cell have zero
/// coupling: they only carry parallel transport.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub length: f64,
    pub midpoint: [f64; 2],
    pub coupling: f64,
}

/// One boundary point of the chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartPoint {
    /// Grid node index.
    pub node: usize,
    pub position: [f64; 2],
    pub component: usize,
    /// Arclength from the component's anchor point.
    pub s: f64,
    pub normal: [f64; 2],
    pub tangent: [f64; 2],
    /// Line-quadrature weight.
    pub ds: f64,
    /// The two nearest nodes along the inward normal.
    pub inward: [usize; 2],
    /// Distances of `inward` from the boundary point.
    pub inward_dist: [f64; 2],
}

/// Boundary chart: per component, an ordered closed cycle of points with
/// arclength, unit outward normal and unit tangent (`t` is `n` rotated by
/// +90 degrees).
///
/// Anchors: the rectangle's single component starts at the origin corner and
/// runs counterclockwise; polar outer components start at angle 0 and run
/// counterclockwise; the annulus's inner component starts at angle 0 and
/// runs clockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryChart {
    points: Vec<ChartPoint>,
    components: Vec<Range<usize>>,
}

impl BoundaryChart {
    /// Synthetic single-component ring of `n` points with uniform spacing,
    /// used to exercise boundary operators independently of a grid.
    pub fn ring(n: usize, ds: f64) -> Self {
        let radius = n as f64 * ds / (2.0 * PI);
        let points = (0..n)
            .map(|k| {
                let th = 2.0 * PI * k as f64 / n as f64;
                let (s, c) = th.sin_cos();
                ChartPoint {
                    node: k,
                    position: [radius * c, radius * s],
                    component: 0,
                    s: k as f64 * ds,
                    normal: [c, s],
                    tangent: [-s, c],
                    ds,
                    inward: [k, k],
                    inward_dist: [radius, radius],
                }
            })
            .collect();
        Self {
            points,
            components: vec![0..n],
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[ChartPoint] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &ChartPoint {
        &self.points[i]
    }

    pub fn components(&self) -> &[Range<usize>] {
        &self.components
    }

    /// Chart index of the next point along the tangent, wrapping.
    pub fn next(&self, i: usize) -> usize {
        let r = &self.components[self.points[i].component];
        if i + 1 == r.end {
            r.start
        } else {
            i + 1
        }
    }

    pub fn prev(&self, i: usize) -> usize {
        let r = &self.components[self.points[i].component];
        if i == r.start {
            r.end - 1
        } else {
            i - 1
        }
    }

    pub fn perimeter(&self) -> f64 {
        self.points.iter().map(|p| p.ds).sum()
    }

    pub fn component_length(&self, c: usize) -> f64 {
        self.points[self.components[c].clone()]
            .iter()
            .map(|p| p.ds)
            .sum()
    }

    /// Sum of signed turning angles of the tangent around a component.
    pub fn turning_number(&self, c: usize) -> f64 {
        let mut total = 0.0;
        for i in self.components[c].clone() {
            let t0 = self.points[i].tangent;
            let t1 = self.points[self.next(i)].tangent;
            let cross = t0[0] * t1[1] - t0[1] * t1[0];
            let dot = t0[0] * t1[0] + t0[1] * t1[1];
            total += cross.atan2(dot);
        }
        total
    }
}

/// Discretized billiard.
#[derive(Clone, Debug)]
pub struct Grid2D {
    kind: GridKind,
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<(usize, usize)>>,
    chart: BoundaryChart,
    chart_of_node: Vec<Option<usize>>,
}

fn edge(nodes: &[Node], i: usize, j: usize, coupling: f64) -> Edge {
    let (a, b) = (nodes[i], nodes[j]);
    Edge {
        i,
        j,
        length: ((b.x - a.x).powi(2) + (b.y - a.y).powi(2)).sqrt(),
        midpoint: [(a.x + b.x) / 2.0, (a.y + b.y) / 2.0],
        coupling,
    }
}

fn finite_positive(v: f64, what: &str) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Geometry(format!("{what} must be positive and finite, got {v}")))
    }
}

/// Uniform `(nx + 1) x (ny + 1)` node lattice on `[0, a] x [0, b]`.
pub fn build_rectangle(a: f64, b: f64, nx: usize, ny: usize) -> Result<Grid2D> {
    finite_positive(a, "rectangle width")?;
    finite_positive(b, "rectangle height")?;
    if nx < 4 || ny < 4 {
        return Err(Error::Geometry(format!(
            "rectangle resolution must be at least 4x4, got {nx}x{ny}"
        )));
    }
    let (hx, hy) = (a / nx as f64, b / ny as f64);
    let idx = |ix: usize, iy: usize| iy * (nx + 1) + ix;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for iy in 0..=ny {
        for ix in 0..=nx {
            let edge_x = ix == 0 || ix == nx;
            let edge_y = iy == 0 || iy == ny;
            let mut w = hx * hy;
            if edge_x {
                w *= 0.5;
            }
            if edge_y {
                w *= 0.5;
            }
            nodes.push(Node {
                x: ix as f64 * hx,
                y: iy as f64 * hy,
                class: if edge_x || edge_y {
                    NodeClass::Boundary
                } else {
                    NodeClass::Interior
                },
                weight: w,
            });
        }
    }
    let mut edges = Vec::new();
    for iy in 0..=ny {
        for ix in 0..=nx {
            if ix < nx {
                let face = if iy == 0 || iy == ny { hy / 2.0 } else { hy };
                edges.push(edge(&nodes, idx(ix, iy), idx(ix + 1, iy), face / hx));
            }
            if iy < ny {
                let face = if ix == 0 || ix == nx { hx / 2.0 } else { hx };
                edges.push(edge(&nodes, idx(ix, iy), idx(ix, iy + 1), face / hy));
            }
        }
    }

    // counterclockwise from the origin; each segment owns the corners it
    // reaches first
    let mut walk: Vec<(usize, usize, [f64; 2])> = Vec::new();
    for ix in 0..=nx {
        walk.push((ix, 0, [0.0, -1.0]));
    }
    for iy in 1..=ny {
        walk.push((nx, iy, [1.0, 0.0]));
    }
    for ix in (0..nx).rev() {
        walk.push((ix, ny, [0.0, 1.0]));
    }
    for iy in (1..ny).rev() {
        walk.push((0, iy, [-1.0, 0.0]));
    }
    let n_chart = walk.len();
    let mut points = Vec::with_capacity(n_chart);
    let mut s = 0.0;
    for (k, &(ix, iy, n)) in walk.iter().enumerate() {
        if k > 0 {
            let (px, py) = (walk[k - 1].0, walk[k - 1].1);
            s += ((ix as f64 - px as f64) * hx).hypot((iy as f64 - py as f64) * hy);
        }
        let step = |d: i64| -> (usize, usize) {
            (
                (ix as i64 - n[0] as i64 * d) as usize,
                (iy as i64 - n[1] as i64 * d) as usize,
            )
        };
        let (a1, b1) = step(1);
        let (a2, b2) = step(2);
        let h = if n[0] != 0.0 { hx } else { hy };
        points.push(ChartPoint {
            node: idx(ix, iy),
            position: [ix as f64 * hx, iy as f64 * hy],
            component: 0,
            s,
            normal: n,
            tangent: [-n[1], n[0]],
            ds: 0.0,
            inward: [idx(a1, b1), idx(a2, b2)],
            inward_dist: [h, 2.0 * h],
        });
    }
    for k in 0..n_chart {
        let p = nodes[points[k].node].pos();
        let q = nodes[points[(k + 1) % n_chart].node].pos();
        let o = nodes[points[(k + n_chart - 1) % n_chart].node].pos();
        let gap_next = (q[0] - p[0]).hypot(q[1] - p[1]);
        let gap_prev = (p[0] - o[0]).hypot(p[1] - o[1]);
        points[k].ds = 0.5 * (gap_next + gap_prev);
    }
    let chart = BoundaryChart {
        points,
        components: vec![0..n_chart],
    };
    Ok(Grid2D::finish(
        GridKind::Rectangle { a, b, nx, ny },
        nodes,
        edges,
        chart,
    ))
}

/// Builds the grid described by `kind`.
pub fn build(kind: GridKind) -> Result<Grid2D> {
    match kind {
        GridKind::Rectangle { a, b, nx, ny } => build_rectangle(a, b, nx, ny),
        GridKind::Disk { radius, nr, ntheta } => build_disk(radius, nr, ntheta),
        GridKind::Annulus { r_in, r_out, nr, ntheta } => build_annulus(r_in, r_out, nr, ntheta),
    }
}

/// Cell-centered polar disk of radius `radius`.
pub fn build_disk(radius: f64, nr: usize, ntheta: usize) -> Result<Grid2D> {
    finite_positive(radius, "disk radius")?;
    check_polar_resolution(nr, ntheta)?;
    Ok(build_polar(GridKind::Disk { radius, nr, ntheta }, 0.0, radius, nr, ntheta))
}

/// Cell-centered polar annulus `r_in < r < r_out`.
pub fn build_annulus(r_in: f64, r_out: f64, nr: usize, ntheta: usize) -> Result<Grid2D> {
    finite_positive(r_in, "inner radius")?;
    finite_positive(r_out, "outer radius")?;
    if r_in >= r_out {
        return Err(Error::Geometry(format!(
            "annulus needs r_in < r_out, got {r_in} >= {r_out}"
        )));
    }
    check_polar_resolution(nr, ntheta)?;
    Ok(build_polar(
        GridKind::Annulus { r_in, r_out, nr, ntheta },
        r_in,
        r_out,
        nr,
        ntheta,
    ))
}

fn check_polar_resolution(nr: usize, ntheta: usize) -> Result<()> {
    if nr < 4 || ntheta < 8 {
        return Err(Error::Geometry(format!(
            "polar resolution needs nr >= 4 and ntheta >= 8, got {nr}x{ntheta}"
        )));
    }
    Ok(())
}

fn build_polar(kind: GridKind, r_min: f64, r_max: f64, nr: usize, ntheta: usize) -> Grid2D {
    let dr = (r_max - r_min) / nr as f64;
    let dth = 2.0 * PI / ntheta as f64;
    let has_hole = matches!(kind, GridKind::Annulus { .. });
    let cell = |j: usize, k: usize| j * ntheta + k;
    let outer = |k: usize| nr * ntheta + k;
    let inner = |k: usize| (nr + 1) * ntheta + k;

    let mut nodes = Vec::new();
    for j in 0..nr {
        let r = r_min + (j as f64 + 0.5) * dr;
        for k in 0..ntheta {
            let (s, c) = (k as f64 * dth).sin_cos();
            nodes.push(Node {
                x: r * c,
                y: r * s,
                class: NodeClass::Interior,
                weight: r * dr * dth,
            });
        }
    }
    let boundary_ring = |r: f64, nodes: &mut Vec<Node>| {
        for k in 0..ntheta {
            let (s, c) = (k as f64 * dth).sin_cos();
            nodes.push(Node {
                x: r * c,
                y: r * s,
                class: NodeClass::Boundary,
                weight: 0.0,
            });
        }
    };
    boundary_ring(r_max, &mut nodes);
    if has_hole {
        boundary_ring(r_min, &mut nodes);
    }

    let mut edges = Vec::new();
    for j in 0..nr {
        let r = r_min + (j as f64 + 0.5) * dr;
        for k in 0..ntheta {
            let kn = (k + 1) % ntheta;
            let (a, b) = if kn == 0 { (cell(j, kn), cell(j, k)) } else { (cell(j, k), cell(j, kn)) };
            edges.push(edge(&nodes, a, b, dr / (r * dth)));
            if j + 1 < nr {
                let r_face = r_min + (j as f64 + 1.0) * dr;
                edges.push(edge(&nodes, cell(j, k), cell(j + 1, k), r_face * dth / dr));
            }
        }
    }
    for k in 0..ntheta {
        edges.push(edge(&nodes, cell(nr - 1, k), outer(k), 0.0));
        if has_hole {
            edges.push(edge(&nodes, cell(0, k), inner(k), 0.0));
        }
    }

    let mut points = Vec::new();
    for k in 0..ntheta {
        let (s, c) = (k as f64 * dth).sin_cos();
        points.push(ChartPoint {
            node: outer(k),
            position: [r_max * c, r_max * s],
            component: 0,
            s: k as f64 * r_max * dth,
            normal: [c, s],
            tangent: [-s, c],
            ds: r_max * dth,
            inward: [cell(nr - 1, k), cell(nr - 2, k)],
            inward_dist: [0.5 * dr, 1.5 * dr],
        });
    }
    let mut components = vec![0..ntheta];
    if has_hole {
        for (step, k) in std::iter::once(0).chain((1..ntheta).rev()).enumerate() {
            let (s, c) = (k as f64 * dth).sin_cos();
            points.push(ChartPoint {
                node: inner(k),
                position: [r_min * c, r_min * s],
                component: 1,
                s: step as f64 * r_min * dth,
                normal: [-c, -s],
                tangent: [s, -c],
                ds: r_min * dth,
                inward: [cell(0, k), cell(1, k)],
                inward_dist: [0.5 * dr, 1.5 * dr],
            });
        }
        components.push(ntheta..2 * ntheta);
    }
    let chart = BoundaryChart { points, components };
    Grid2D::finish(kind, nodes, edges, chart)
}

impl Grid2D {
    fn finish(kind: GridKind, nodes: Vec<Node>, edges: Vec<Edge>, chart: BoundaryChart) -> Self {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (e, ed) in edges.iter().enumerate() {
            adjacency[ed.i].push((ed.j, e));
            adjacency[ed.j].push((ed.i, e));
        }
        let mut chart_of_node = vec![None; nodes.len()];
        for (c, p) in chart.points.iter().enumerate() {
            chart_of_node[p.node] = Some(c);
        }
        Self {
            kind,
            nodes,
            edges,
            adjacency,
            chart,
            chart_of_node,
        }
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn is_polar(&self) -> bool {
        !matches!(self.kind, GridKind::Rectangle { .. })
    }

    pub fn is_annulus(&self) -> bool {
        matches!(self.kind, GridKind::Annulus { .. })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// `(neighbor, edge index)` pairs.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    /// Edge joining `i` and `j`, with `true` when stored as `i -> j`.
    pub fn edge_between(&self, i: usize, j: usize) -> Option<(usize, bool)> {
        self.adjacency[i]
            .iter()
            .find(|(n, _)| *n == j)
            .map(|&(_, e)| (e, self.edges[e].i == i))
    }

    pub fn chart(&self) -> &BoundaryChart {
        &self.chart
    }

    pub fn chart_index(&self, node: usize) -> Option<usize> {
        self.chart_of_node[node]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.weight).collect()
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn area(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { a, b, .. } => a * b,
            GridKind::Disk { radius, .. } => PI * radius * radius,
            GridKind::Annulus { r_in, r_out, .. } => PI * (r_out * r_out - r_in * r_in),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { a, b, .. } => 2.0 * (a + b),
            GridKind::Disk { radius, .. } => 2.0 * PI * radius,
            GridKind::Annulus { r_in, r_out, .. } => 2.0 * PI * (r_in + r_out),
        }
    }

    /// Largest linear extent, used to scale finite-difference steps.
    pub fn size(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { a, b, .. } => a.max(b),
            GridKind::Disk { radius, .. } => 2.0 * radius,
            GridKind::Annulus { r_out, .. } => 2.0 * r_out,
        }
    }

    /// Typical mesh spacing.
    pub fn spacing(&self) -> f64 {
        match self.kind {
            GridKind::Rectangle { a, b, nx, ny } => (a / nx as f64).max(b / ny as f64),
            GridKind::Disk { radius, nr, ntheta } => {
                (radius / nr as f64).max(2.0 * PI * radius / ntheta as f64)
            }
            GridKind::Annulus { r_in, r_out, nr, ntheta } => {
                ((r_out - r_in) / nr as f64).max(2.0 * PI * r_out / ntheta as f64)
            }
        }
    }

    /// Node on a rectangle lattice.
    pub fn rect_node(&self, ix: usize, iy: usize) -> usize {
        match self.kind {
            GridKind::Rectangle { nx, .. } => iy * (nx + 1) + ix,
            _ => panic!("rect_node on a polar grid"),
        }
    }

    /// Cell `(ring j, angle k)` on a polar grid.
    pub fn polar_cell(&self, j: usize, k: usize) -> usize {
        match self.kind {
            GridKind::Disk { ntheta, .. } | GridKind::Annulus { ntheta, .. } => j * ntheta + k,
            _ => panic!("polar_cell on a rectangle"),
        }
    }

    /// Radii of the polar cell rings.
    pub fn ring_radii(&self) -> Vec<f64> {
        match self.kind {
            GridKind::Disk { radius, nr, .. } => {
                (0..nr).map(|j| (j as f64 + 0.5) * radius / nr as f64).collect()
            }
            GridKind::Annulus { r_in, r_out, nr, .. } => (0..nr)
                .map(|j| r_in + (j as f64 + 0.5) * (r_out - r_in) / nr as f64)
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Elementary counterclockwise node cycles (lattice plaquettes).
    pub fn plaquettes(&self) -> Vec<Vec<usize>> {
        match self.kind {
            GridKind::Rectangle { nx, ny, .. } => {
                let idx = |ix: usize, iy: usize| iy * (nx + 1) + ix;
                let mut out = Vec::new();
                for iy in 0..ny {
                    for ix in 0..nx {
                        out.push(vec![idx(ix, iy), idx(ix + 1, iy), idx(ix + 1, iy + 1), idx(ix, iy + 1)]);
                    }
                }
                out
            }
            GridKind::Disk { nr, ntheta, .. } | GridKind::Annulus { nr, ntheta, .. } => {
                let mut out = Vec::new();
                for j in 0..nr - 1 {
                    for k in 0..ntheta {
                        let kn = (k + 1) % ntheta;
                        out.push(vec![
                            j * ntheta + k,
                            (j + 1) * ntheta + k,
                            (j + 1) * ntheta + kn,
                            j * ntheta + kn,
                        ]);
                    }
                }
                out
            }
        }
    }

    /// One counterclockwise representative cycle around each hole.
    pub fn hole_loops(&self) -> Vec<Vec<usize>> {
        match self.kind {
            GridKind::Annulus { ntheta, .. } => vec![(0..ntheta).collect()],
            _ => Vec::new(),
        }
    }

    /// Interior nodes whose full 5-point stencil exists.
    pub fn is_stencil_complete(&self, i: usize) -> bool {
        self.nodes[i].class == NodeClass::Interior && self.adjacency[i].len() >= 4
    }

    /// Stable 64-bit FNV-1a fingerprint of the grid parameters.
    pub fn hash(&self) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        let mut feed = |bytes: &[u8]| {
            for b in bytes {
                h ^= *b as u64;
                h = h.wrapping_mul(0x100000001b3);
            }
        };
        match self.kind {
            GridKind::Rectangle { a, b, nx, ny } => {
                feed(b"rectangle");
                feed(&a.to_bits().to_le_bytes());
                feed(&b.to_bits().to_le_bytes());
                feed(&(nx as u64).to_le_bytes());
                feed(&(ny as u64).to_le_bytes());
            }
            GridKind::Disk { radius, nr, ntheta } => {
                feed(b"disk");
                feed(&radius.to_bits().to_le_bytes());
                feed(&(nr as u64).to_le_bytes());
                feed(&(ntheta as u64).to_le_bytes());
            }
            GridKind::Annulus { r_in, r_out, nr, ntheta } => {
                feed(b"annulus");
                feed(&r_in.to_bits().to_le_bytes());
                feed(&r_out.to_bits().to_le_bytes());
                feed(&(nr as u64).to_le_bytes());
                feed(&(ntheta as u64).to_le_bytes());
            }
        }
        h
    }

    /// Debug dump, one `index,class,x,y,weight` line per node.
    pub fn dump(&self) -> String {
        let mut out = String::from("index,class,x,y,weight\n");
        for (i, n) in self.nodes.iter().enumerate() {
            let class = match n.class {
                NodeClass::Interior => "interior",
                NodeClass::Boundary => "boundary",
            };
            let _ = writeln!(out, "{i},{class},{:.16e},{:.16e},{:.16e}", n.x, n.y, n.weight);
        }
        out
    }

    /// Samples `f(x, y)` at every node.
    pub fn sample<T>(&self, f: impl Fn(f64, f64) -> T) -> Vec<T> {
        self.nodes.iter().map(|n| f(n.x, n.y)).collect()
    }
}

/// Boundary chart of a grid.
pub fn boundary_chart(grid: &Grid2D) -> &BoundaryChart {
    grid.chart()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_counts() {
        let g = build_rectangle(1.0, 1.0, 4, 4).unwrap();
        assert_eq!(g.len(), 25);
        let boundary = g.nodes().iter().filter(|n| n.class == NodeClass::Boundary).count();
        assert_eq!(boundary, 16);
        assert_eq!(g.len() - boundary, 9);
        assert_eq!(g.chart().len(), 16);
    }

    #[test]
    fn rectangle_spacing() {
        let g = build_rectangle(2.0, 1.0, 8, 4).unwrap();
        let dx = g.node(1).x - g.node(0).x;
        let dy = g.node(g.rect_node(0, 1)).y;
        assert!((dx - 0.25).abs() < 1e-15 && (dy - 0.25).abs() < 1e-15);
    }

    #[test]
    fn rectangle_rejects_bad_input() {
        assert!(build_rectangle(0.0, 1.0, 4, 4).is_err());
        assert!(build_rectangle(1.0, -1.0, 4, 4).is_err());
        assert!(build_rectangle(1.0, 1.0, 3, 4).is_err());
    }

    #[test]
    fn corners_belong_to_first_segment_counterclockwise() {
        let g = build_rectangle(1.0, 1.0, 4, 4).unwrap();
        let normal_at = |ix, iy| g.chart().point(g.chart_index(g.rect_node(ix, iy)).unwrap()).normal;
        assert_eq!(normal_at(0, 0), [0.0, -1.0]);
        assert_eq!(normal_at(4, 0), [0.0, -1.0]);
        assert_eq!(normal_at(4, 4), [1.0, 0.0]);
        assert_eq!(normal_at(0, 4), [0.0, 1.0]);
    }

    #[test]
    fn disk_inner_ring_is_cell_centered() {
        let g = build_disk(1.0, 4, 8).unwrap();
        assert!((g.ring_radii()[0] - 0.125).abs() < 1e-15);
        let n0 = g.node(g.polar_cell(0, 0));
        assert!((n0.x.hypot(n0.y) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn disk_chart_spacing() {
        let g = build_disk(1.0, 8, 16).unwrap();
        assert_eq!(g.chart().len(), 16);
        for p in g.chart().points() {
            assert!((p.ds - 2.0 * PI / 16.0).abs() < 1e-15);
        }
    }

    #[test]
    fn annulus_has_two_components() {
        let g = build_annulus(0.5, 1.0, 32, 64).unwrap();
        assert_eq!(g.chart().components().len(), 2);
        assert!(g.chart().components().iter().all(|c| c.len() == 64));
        assert!(build_annulus(1.0, 0.5, 8, 16).is_err());
    }

    #[test]
    fn turning_numbers() {
        let g = build_annulus(0.5, 1.0, 8, 32).unwrap();
        assert!((g.chart().turning_number(0) - 2.0 * PI).abs() < 1e-10);
        assert!((g.chart().turning_number(1) + 2.0 * PI).abs() < 1e-10);
        let r = build_rectangle(1.0, 2.0, 5, 7).unwrap();
        assert!((r.chart().turning_number(0) - 2.0 * PI).abs() < 1e-10);
    }

    #[test]
    fn dump_has_one_line_per_node() {
        let g = build_disk(1.0, 4, 8).unwrap();
        assert_eq!(g.dump().lines().count(), g.len() + 1);
    }
}
