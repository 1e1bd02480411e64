//! Discrete two-dimensional bands.
//!
//! A band is an `nu × nv` grid of cells in coordinates `(u, v)`, each cell
//! carrying a constant metric `g11 du² + 2 g12 du dv + g22 dv²` in index
//! units. Vertices are `(i, j)` with `0 ≤ i ≤ nu`; the row `i = 0` is `∂₋`
//! and the row `i = nu` is `∂₊`. Cylinders are periodic in `v`.
//!
//! Every cell is split along its `(i, j)–(i+1, j+1)` diagonal into two
//! triangles. Edge lengths shared between cells use the mean of the adjacent
//! cell metrics, which makes the triangulation a genuine polyhedral surface:
//! angle defects give Gaussian curvature and 8-neighbour shortest paths give
//! distances.

use alloc::{
    collections::{BTreeSet, BinaryHeap, VecDeque},
    format, vec,
    vec::Vec,
};
use core::cmp::Ordering;
use core::f64::consts::PI;

#[allow(unused_imports)]
use num_traits::Float;
use once_cell::race::OnceBox;
use serde::{Deserialize, Serialize};

use crate::warp::ModelSpace;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    /// Periodic in `v`.
    Cylinder,
    Rectangle,
}

impl Topology {
    pub fn name(self) -> &'static str {
        match self {
            Topology::Cylinder => "cylinder",
            Topology::Rectangle => "rectangle",
        }
    }
}

/// Constant metric coefficients of one cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellMetric {
    pub g11: f64,
    pub g12: f64,
    pub g22: f64,
}

impl CellMetric {
    pub fn new(g11: f64, g12: f64, g22: f64) -> Self {
        CellMetric { g11, g12, g22 }
    }

    pub fn det(&self) -> f64 {
        self.g11 * self.g22 - self.g12 * self.g12
    }

    pub fn is_positive_definite(&self) -> bool {
        self.g11.is_finite() && self.g12.is_finite() && self.g22.is_finite() && self.g11 > 0.0 && self.det() > 0.0
    }

    /// Length of the coordinate vector `(du, dv)`.
    pub fn length(&self, du: f64, dv: f64) -> f64 {
        (self.g11 * du * du + 2.0 * self.g12 * du * dv + self.g22 * dv * dv).sqrt()
    }
}

/// A triangle of the cell split with its corner angles and area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub angles: [f64; 3],
    pub area: f64,
}

impl Triangle {
    /// Triangle with side `sides[k]` opposite corner `k`.
    pub fn from_sides(sides: [f64; 3]) -> Self {
        let [a, b, c] = sides;
        let angle = |o: f64, p: f64, q: f64| ((p * p + q * q - o * o) / (2.0 * p * q)).clamp(-1.0, 1.0).acos();
        // Heron's formula in the cancellation-free ordering.
        let mut s = [a, b, c];
        s.sort_by(|x, y| y.total_cmp(x));
        let [x, y, z] = s;
        let prod = (x + (y + z)) * (z - (x - y)) * (z + (x - y)) * (x + (y - z));
        Triangle {
            angles: [angle(a, b, c), angle(b, c, a), angle(c, a, b)],
            area: 0.25 * prod.max(0.0).sqrt(),
        }
    }
}

/// A discrete Riemannian band.
pub struct DiscreteBand {
    nu: usize,
    nv: usize,
    topology: Topology,
    metric: Vec<CellMetric>,
    minus_distance: OnceBox<Vec<f64>>,
}

impl Clone for DiscreteBand {
    fn clone(&self) -> Self {
        DiscreteBand {
            nu: self.nu,
            nv: self.nv,
            topology: self.topology,
            metric: self.metric.clone(),
            minus_distance: OnceBox::new(),
        }
    }
}

impl core::fmt::Debug for DiscreteBand {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("DiscreteBand")
            .field("nu", &self.nu)
            .field("nv", &self.nv)
            .field("topology", &self.topology)
            .finish_non_exhaustive()
    }
}

impl PartialEq for DiscreteBand {
    fn eq(&self, other: &Self) -> bool {
        self.nu == other.nu && self.nv == other.nv && self.topology == other.topology && self.metric == other.metric
    }
}

#[derive(Clone, Copy, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: usize,
}

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.dist.total_cmp(&self.dist).then(other.vertex.cmp(&self.vertex))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl DiscreteBand {
    /// Band from per-cell metrics in row-major order (`i` outer, `j` inner).
    pub fn from_cells(nu: usize, nv: usize, topology: Topology, metric: Vec<CellMetric>) -> Result<Self> {
        let min_nv = if topology == Topology::Cylinder { 3 } else { 1 };
        if nu < 1 || nv < min_nv {
            return Err(Error::Argument(format!(
                "grid {nu}x{nv} too small for a {}",
                topology.name()
            )));
        }
        if metric.len() != nu * nv {
            return Err(Error::Argument(format!(
                "expected {} cell metrics, got {}",
                nu * nv,
                metric.len()
            )));
        }
        if let Some(k) = metric.iter().position(|g| !g.is_positive_definite()) {
            return Err(Error::Argument(format!(
                "metric of cell ({}, {}) is not positive definite",
                k / nv,
                k % nv
            )));
        }
        Ok(DiscreteBand {
            nu,
            nv,
            topology,
            metric,
            minus_distance: OnceBox::new(),
        })
    }

    pub fn nu(&self) -> usize {
        self.nu
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn is_cylinder(&self) -> bool {
        self.topology == Topology::Cylinder
    }

    pub fn cells(&self) -> &[CellMetric] {
        &self.metric
    }

    pub fn cell_count(&self) -> usize {
        self.nu * self.nv
    }

    pub fn cell_index(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    /// Cell `(i, j)` with `j` wrapped on cylinders; `None` outside the band.
    pub fn cell_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || i >= self.nu as isize {
            return None;
        }
        let j = self.wrap_cell_j(j)?;
        Some(self.cell_index(i as usize, j))
    }

    fn wrap_cell_j(&self, j: isize) -> Option<usize> {
        let nv = self.nv as isize;
        match self.topology {
            Topology::Cylinder => Some(j.rem_euclid(nv) as usize),
            Topology::Rectangle if (0..nv).contains(&j) => Some(j as usize),
            Topology::Rectangle => None,
        }
    }

    pub fn metric(&self, i: usize, j: usize) -> CellMetric {
        self.metric[self.cell_index(i, j)]
    }

    /// Riemannian area `√det g` of a cell.
    pub fn cell_area(&self, cell: usize) -> f64 {
        self.metric[cell].det().sqrt()
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cell_count()).map(|c| self.cell_area(c)).sum()
    }

    /// Number of distinct vertex columns.
    pub fn vertex_columns(&self) -> usize {
        match self.topology {
            Topology::Cylinder => self.nv,
            Topology::Rectangle => self.nv + 1,
        }
    }

    pub fn vertex_count(&self) -> usize {
        (self.nu + 1) * self.vertex_columns()
    }

    /// Vertex id of `(i, j)` with `j` wrapped on cylinders.
    pub fn vertex_at(&self, i: isize, j: isize) -> Option<usize> {
        if i < 0 || i > self.nu as isize {
            return None;
        }
        let cols = self.vertex_columns() as isize;
        let j = match self.topology {
            Topology::Cylinder => j.rem_euclid(cols),
            Topology::Rectangle if (0..cols).contains(&j) => j,
            Topology::Rectangle => return None,
        };
        Some(i as usize * self.vertex_columns() + j as usize)
    }

    pub fn vertex_coords(&self, vertex: usize) -> (usize, usize) {
        (vertex / self.vertex_columns(), vertex % self.vertex_columns())
    }

    /// Vertex away from `∂X`, where curvature is defined.
    pub fn is_interior_vertex(&self, i: usize, j: usize) -> bool {
        i > 0 && i < self.nu && (self.is_cylinder() || (j > 0 && j < self.nv))
    }

    /// Length of an edge from the mean metric of the two cells sharing it.
    /// Edges on `∂X` extrapolate the mean metric of the three nearest
    /// interior edges with a cubic stencil.
    fn edge_length(
        &self,
        before: [isize; 2],
        after: [isize; 2],
        step: [isize; 2],
        f: impl Fn(&CellMetric) -> f64,
    ) -> f64 {
        let at = |k: isize, c: [isize; 2]| self.cell_at(c[0] + k * step[0], c[1] + k * step[1]);
        let g = |c: usize| f(&self.metric[c]);
        let (inside, dir) = match (self.cell_at(before[0], before[1]), self.cell_at(after[0], after[1])) {
            (Some(x), Some(y)) => return (0.5 * (g(x) + g(y))).sqrt(),
            (Some(_), None) => (before, -1),
            (None, Some(_)) => (after, 1),
            (None, None) => unreachable!("edges touch at least one cell"),
        };
        let interior: Vec<f64> = (0..3)
            .map_while(|k| Some(0.5 * (g(at(dir * k, inside)?) + g(at(dir * (k + 1), inside)?))))
            .collect();
        let near = g(at(0, inside).expect("cell exists"));
        let extrapolated = match interior[..] {
            [g1, g2, g3] => 3.0 * g1 - 3.0 * g2 + g3,
            [g1, g2] => 2.0 * g1 - g2,
            _ => near,
        };
        if extrapolated > 0.25 * near {
            extrapolated.sqrt()
        } else {
            near.sqrt()
        }
    }

    /// Length of the edge `(i, j)–(i+1, j)`.
    pub fn u_edge_length(&self, i: usize, j: isize) -> f64 {
        let i = i as isize;
        self.edge_length([i, j - 1], [i, j], [0, 1], |g| g.g11)
    }

    /// Length of the edge `(i, j)–(i, j+1)`.
    pub fn v_edge_length(&self, i: usize, j: isize) -> f64 {
        let i = i as isize;
        self.edge_length([i - 1, j], [i, j], [1, 0], |g| g.g22)
    }

    /// Length of the diagonal `(i, j)–(i+1, j+1)` of cell `(i, j)`.
    pub fn diagonal_length(&self, i: usize, j: isize) -> f64 {
        let c = self.cell_at(i as isize, j).expect("cell in range");
        self.metric[c].length(1.0, 1.0)
    }

    /// Length of the anti-diagonal `(i+1, j)–(i, j+1)` of cell `(i, j)`.
    pub fn anti_diagonal_length(&self, i: usize, j: isize) -> f64 {
        let c = self.cell_at(i as isize, j).expect("cell in range");
        self.metric[c].length(1.0, -1.0)
    }

    /// The two triangles of cell `(i, j)`: `T1 = (c00, c10, c11)` and
    /// `T2 = (c00, c11, c01)`.
    pub fn cell_triangles(&self, i: usize, j: isize) -> [Triangle; 2] {
        let u0 = self.u_edge_length(i, j);
        let u1 = self.u_edge_length(i, j + 1);
        let v0 = self.v_edge_length(i, j);
        let v1 = self.v_edge_length(i + 1, j);
        let d = self.diagonal_length(i, j);
        // Corner order (c00, c10, c11): side opposite c00 is c10–c11 = v1.
        let t1 = Triangle::from_sides([v1, d, u0]);
        // Corner order (c00, c11, c01): side opposite c00 is c11–c01 = u1.
        let t2 = Triangle::from_sides([u1, v0, d]);
        [t1, t2]
    }

    /// Angle at vertex `(i, j)` inside quadrant `q`, with quadrants ordered
    /// counter-clockwise in the `(u, v)` plane: `Q0` is cell `(i, j)`, `Q1`
    /// is `(i-1, j)`, `Q2` is `(i-1, j-1)` and `Q3` is `(i, j-1)`. Returns
    /// `None` for quadrants outside the band.
    pub fn quadrant_angle(&self, i: usize, j: isize, q: usize) -> Option<f64> {
        let (ii, jj) = (i as isize, j);
        match q % 4 {
            0 => {
                self.cell_at(ii, jj)?;
                let [t1, t2] = self.cell_triangles(i, jj);
                Some(t1.angles[0] + t2.angles[0])
            }
            1 => {
                self.cell_at(ii - 1, jj)?;
                Some(self.cell_triangles(i - 1, jj)[0].angles[1])
            }
            2 => {
                self.cell_at(ii - 1, jj - 1)?;
                let [t1, t2] = self.cell_triangles(i - 1, jj - 1);
                Some(t1.angles[2] + t2.angles[1])
            }
            _ => {
                self.cell_at(ii, jj - 1)?;
                Some(self.cell_triangles(i, jj - 1)[1].angles[2])
            }
        }
    }

    /// Area of the triangles incident to vertex `(i, j)` inside quadrant `q`.
    fn quadrant_area(&self, i: usize, j: isize, q: usize) -> f64 {
        let (ii, jj) = (i as isize, j);
        let cell = match q % 4 {
            0 => (ii, jj),
            1 => (ii - 1, jj),
            2 => (ii - 1, jj - 1),
            _ => (ii, jj - 1),
        };
        if self.cell_at(cell.0, cell.1).is_none() {
            return 0.0;
        }
        let [t1, t2] = self.cell_triangles(cell.0 as usize, cell.1);
        match q % 4 {
            0 | 2 => t1.area + t2.area,
            1 => t1.area,
            _ => t2.area,
        }
    }

    /// Gaussian curvature at an interior vertex: angle defect over one third
    /// of the incident triangle area.
    pub fn gaussian_curvature(&self, i: usize, j: usize) -> Option<f64> {
        if !self.is_interior_vertex(i, j) {
            return None;
        }
        let j = j as isize;
        let mut angle = 0.0;
        let mut area = 0.0;
        for q in 0..4 {
            angle += self.quadrant_angle(i, j, q)?;
            area += self.quadrant_area(i, j, q);
        }
        Some((2.0 * PI - angle) / (area / 3.0))
    }

    /// Scalar curvature `2K` at an interior vertex.
    pub fn scalar_curvature(&self, i: usize, j: usize) -> Option<f64> {
        self.gaussian_curvature(i, j).map(|k| 2.0 * k)
    }

    /// The 8-neighbourhood of a vertex with metric edge lengths.
    pub fn neighbours(&self, vertex: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (i, j) = self.vertex_coords(vertex);
        let (ii, jj) = (i as isize, j as isize);
        const DIRS: [(isize, isize); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (-1, -1), (1, -1), (-1, 1)];
        DIRS.iter().filter_map(move |&(di, dj)| {
            let w = self.vertex_at(ii + di, jj + dj)?;
            let len = match (di, dj) {
                (1, 0) => self.u_edge_length(i, jj),
                (-1, 0) => self.u_edge_length(i - 1, jj),
                (0, 1) => self.v_edge_length(i, jj),
                (0, -1) => self.v_edge_length(i, jj - 1),
                (1, 1) => self.diagonal_length(i, jj),
                (-1, -1) => self.diagonal_length(i - 1, jj - 1),
                (1, -1) => self.anti_diagonal_length(i, jj - 1),
                _ => self.anti_diagonal_length(i - 1, jj),
            };
            Some((w, len))
        })
    }

    /// Shortest-path distances on the 8-neighbour graph from `sources`.
    pub fn distance_field(&self, sources: &[usize]) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(HeapItem { dist: 0.0, vertex: s });
        }
        while let Some(HeapItem { dist: d, vertex }) = heap.pop() {
            if d > dist[vertex] {
                continue;
            }
            for (w, len) in self.neighbours(vertex) {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    heap.push(HeapItem { dist: nd, vertex: w });
                }
            }
        }
        dist
    }

    /// Vertices of row `i`.
    pub fn row_vertices(&self, i: usize) -> Vec<usize> {
        let cols = self.vertex_columns();
        (0..cols).map(|j| i * cols + j).collect()
    }

    /// Distance to `∂₋` for every vertex. Computed once and cached; the
    /// cache tolerates concurrent first access.
    pub fn minus_distance(&self) -> &[f64] {
        self.minus_distance
            .get_or_init(|| alloc::boxed::Box::new(self.distance_field(&self.row_vertices(0))))
    }

    /// Distance between `∂₋` and `∂₊`.
    pub fn width(&self) -> f64 {
        let d = self.minus_distance();
        self.row_vertices(self.nu)
            .iter()
            .map(|&v| d[v])
            .fold(f64::INFINITY, f64::min)
    }

    /// Metric length between the centres of two 4-adjacent cells.
    pub fn dual_length(&self, a: usize, b: usize) -> f64 {
        let (ia, ib) = (a / self.nv, b / self.nv);
        let (ga, gb) = (&self.metric[a], &self.metric[b]);
        if ia != ib {
            (0.5 * (ga.g11 + gb.g11)).sqrt()
        } else {
            (0.5 * (ga.g22 + gb.g22)).sqrt()
        }
    }

    /// Length of the mesh edge separating two 4-adjacent cells.
    pub fn shared_edge_length(&self, a: usize, b: usize) -> f64 {
        let (ia, ja) = (a / self.nv, a % self.nv);
        let (ib, jb) = (b / self.nv, b % self.nv);
        if ia != ib {
            self.v_edge_length(ia.max(ib), ja as isize)
        } else {
            // Upper cell in v, accounting for the cylinder seam.
            let upper = if (ja + 1) % self.nv == jb { jb } else { ja };
            self.u_edge_length(ia, upper as isize)
        }
    }

    /// 4-neighbour cells of a cell.
    pub fn cell_neighbours(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = ((cell / self.nv) as isize, (cell % self.nv) as isize);
        [(1, 0), (-1, 0), (0, 1), (0, -1)]
            .into_iter()
            .filter_map(move |(di, dj)| self.cell_at(i + di, j + dj))
            .filter(move |&c| c != cell)
    }

    /// Breadth-first search over cells from row `0`, never crossing a pair
    /// for which `blocked` holds. True iff row `nu - 1` is unreachable.
    pub fn separates(&self, blocked: impl Fn(usize, usize) -> bool) -> bool {
        let mut seen = vec![false; self.cell_count()];
        let mut queue = VecDeque::new();
        for j in 0..self.nv {
            let c = self.cell_index(0, j);
            seen[c] = true;
            queue.push_back(c);
        }
        while let Some(c) = queue.pop_front() {
            if c / self.nv == self.nu - 1 {
                return false;
            }
            for d in self.cell_neighbours(c) {
                if !seen[d] && !blocked(c, d) {
                    seen[d] = true;
                    queue.push_back(d);
                }
            }
        }
        true
    }
}

/// Flat cylinder `S¹_r × [0, L]`.
pub fn build_flat_cylinder(length: f64, radius: f64, nu: usize, nv: usize) -> Result<DiscreteBand> {
    if !(length > 0.0 && radius > 0.0 && length.is_finite() && radius.is_finite()) {
        return Err(Error::Argument(format!(
            "cylinder needs positive length and radius, got {length}, {radius}"
        )));
    }
    if nu < 4 || nv < 4 {
        return Err(Error::Argument(format!(
            "cylinder grid must be at least 4x4, got {nu}x{nv}"
        )));
    }
    let du = length / nu as f64;
    let dv = 2.0 * PI * radius / nv as f64;
    DiscreteBand::from_cells(
        nu,
        nv,
        Topology::Cylinder,
        vec![CellMetric::new(du * du, 0.0, dv * dv); nu * nv],
    )
}

/// Surface of revolution `φ(t)² dθ² + dt²` of a two-dimensional model over a
/// circle of the given circumference, with `nu` cells along `t`.
pub fn build_warped_band(m: &ModelSpace, nv: usize, nu: usize, circumference: f64) -> Result<DiscreteBand> {
    if m.n() != 2 {
        return Err(Error::Unsupported(format!("warped bands need n = 2, got {}", m.n())));
    }
    if m.base_scalar() != 0.0 {
        return Err(Error::Unsupported("a circle has zero scalar curvature".into()));
    }
    if nu < 4 || nv < 4 || !(circumference > 0.0 && circumference.is_finite()) {
        return Err(Error::Argument(format!(
            "invalid warped band grid {nu}x{nv} with circumference {circumference}"
        )));
    }
    let (a, b) = m.domain();
    let dt = (b - a) / nu as f64;
    let dth = circumference / nv as f64;
    let mut cells = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let phi = m.warp().eval(a + (i as f64 + 0.5) * dt)?.value;
        let g22 = phi * phi * dth * dth;
        cells.extend(core::iter::repeat_n(CellMetric::new(dt * dt, 0.0, g22), nv));
    }
    DiscreteBand::from_cells(nu, nv, Topology::Cylinder, cells)
}

/// Per-vertex values of a band map `X → [a, b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandMap {
    pub values: Vec<f64>,
    pub a: f64,
    pub b: f64,
    /// Largest `|φ(v) - φ(w)| / d(v, w)` over 8-neighbour edges.
    pub lipschitz: f64,
    pub declared_bound: f64,
}

fn measured_lipschitz(band: &DiscreteBand, values: &[f64]) -> f64 {
    let mut lip = 0.0_f64;
    for v in 0..band.vertex_count() {
        for (w, len) in band.neighbours(v) {
            lip = lip.max((values[v] - values[w]).abs() / len);
        }
    }
    lip
}

impl BandMap {
    /// `φ(i, j) = a + (b - a)·i/nu`.
    pub fn affine_in_u(band: &DiscreteBand, a: f64, b: f64) -> Result<Self> {
        if !(a < b && a.is_finite() && b.is_finite()) {
            return Err(Error::Argument(format!("invalid target interval [{a}, {b}]")));
        }
        let cols = band.vertex_columns();
        let values: Vec<f64> = (0..band.vertex_count())
            .map(|v| {
                let i = v / cols;
                if i == band.nu() {
                    b
                } else {
                    a + (b - a) * i as f64 / band.nu() as f64
                }
            })
            .collect();
        let lipschitz = measured_lipschitz(band, &values);
        Ok(BandMap {
            values,
            a,
            b,
            lipschitz,
            declared_bound: lipschitz,
        })
    }

    pub fn value(&self, band: &DiscreteBand, i: usize, j: isize) -> f64 {
        self.values[band.vertex_at(i as isize, j).expect("vertex in range")]
    }

    /// Map value at the centre of a cell, the mean of its corners.
    pub fn cell_value(&self, band: &DiscreteBand, cell: usize) -> f64 {
        let (i, j) = ((cell / band.nv()) as isize, (cell % band.nv()) as isize);
        let corner = |di: isize, dj: isize| self.values[band.vertex_at(i + di, j + dj).expect("corner")];
        0.25 * (corner(0, 0) + corner(1, 0) + corner(0, 1) + corner(1, 1))
    }
}

/// Band map `X → [a, bb]` with Lipschitz constant below `1 - margin`, built
/// from the distance to `∂₋` scaled by the band width and smoothed by one
/// Jacobi pass on interior vertices. The pass is dropped when it would push
/// the measured constant to the declared bound.
pub fn lipschitz_band_map(band: &DiscreteBand, a: f64, bb: f64, margin: f64) -> Result<BandMap> {
    if !(a < bb && a.is_finite() && bb.is_finite()) {
        return Err(Error::Argument(format!("invalid target interval [{a}, {bb}]")));
    }
    if !(0.0..1.0).contains(&margin) {
        return Err(Error::Argument(format!("margin must lie in [0, 1), got {margin}")));
    }
    let width = band.width();
    let declared = 1.0 - margin;
    if width <= (bb - a) / declared {
        return Err(Error::Precondition(format!(
            "band width {width} does not exceed (b - a)/(1 - margin) = {}",
            (bb - a) / declared
        )));
    }
    let dist = band.minus_distance();
    let cols = band.vertex_columns();
    let nu = band.nu();
    let raw: Vec<f64> = (0..band.vertex_count())
        .map(|v| match v / cols {
            0 => a,
            i if i == nu => bb,
            _ => a + (bb - a) * (dist[v] / width).min(1.0),
        })
        .collect();

    let mut smooth = raw.clone();
    for v in 0..band.vertex_count() {
        let (i, j) = band.vertex_coords(v);
        if i == 0 || i == nu {
            continue;
        }
        let (ii, jj) = (i as isize, j as isize);
        let mut sum = 0.0;
        let mut count = 0.0;
        for (di, dj) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            if let Some(w) = band.vertex_at(ii + di, jj + dj) {
                sum += raw[w];
                count += 1.0;
            }
        }
        smooth[v] = sum / count;
    }
    let lip_smooth = measured_lipschitz(band, &smooth);
    let (values, lipschitz) = if lip_smooth < declared {
        (smooth, lip_smooth)
    } else {
        let lip = measured_lipschitz(band, &raw);
        (raw, lip)
    };
    Ok(BandMap {
        values,
        a,
        b: bb,
        lipschitz,
        declared_bound: declared,
    })
}

/// Side of the direction of travel that the normal points to, in the
/// `(u, v)` plane oriented like `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalSide {
    Left,
    Right,
}

/// A closed, embedded path along mesh edges with a transverse orientation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    vertices: Vec<(usize, usize)>,
    normal: NormalSide,
}

/// One segment of a curve with the cells on either side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSegment {
    pub from: (usize, usize),
    pub to: (usize, usize),
    /// Cell on the normal side, if inside the band.
    pub outer: Option<usize>,
    /// Cell opposite the normal, if inside the band.
    pub inner: Option<usize>,
}

impl Curve {
    pub fn new(band: &DiscreteBand, vertices: Vec<(usize, usize)>, normal: NormalSide) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Argument("a closed curve needs at least 3 vertices".into()));
        }
        let mut seen = BTreeSet::new();
        for &(i, j) in &vertices {
            let v = band
                .vertex_at(i as isize, j as isize)
                .filter(|_| j < band.vertex_columns())
                .ok_or_else(|| Error::Argument(format!("vertex ({i}, {j}) outside the band")))?;
            if !seen.insert(v) {
                return Err(Error::Argument(format!("vertex ({i}, {j}) repeats")));
            }
        }
        let curve = Curve { vertices, normal };
        for k in 0..curve.vertices.len() {
            curve
                .step(band, k)
                .ok_or_else(|| Error::Argument(format!("curve is not a closed edge path at vertex {k}")))?;
        }
        Ok(curve)
    }

    /// Horizontal circle `i = const` of a cylinder, travelled in `+v` with
    /// the normal pointing towards `∂₊`.
    pub fn horizontal_circle(band: &DiscreteBand, i: usize) -> Result<Self> {
        if !band.is_cylinder() {
            return Err(Error::Argument("horizontal circles need a cylinder".into()));
        }
        Curve::new(band, (0..band.nv()).map(|j| (i, j)).collect(), NormalSide::Right)
    }

    pub fn vertices(&self) -> &[(usize, usize)] {
        &self.vertices
    }

    pub fn normal(&self) -> NormalSide {
        self.normal
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Copy with the segment order rotated by `shift`.
    pub fn rotated(&self, shift: usize) -> Self {
        let mut vertices = self.vertices.clone();
        let m = vertices.len();
        vertices.rotate_left(shift % m);
        Curve {
            vertices,
            normal: self.normal,
        }
    }

    /// Step `(du, dv)` of segment `k`, accounting for the cylinder seam.
    fn step(&self, band: &DiscreteBand, k: usize) -> Option<(isize, isize)> {
        let (i0, j0) = self.vertices[k];
        let (i1, j1) = self.vertices[(k + 1) % self.vertices.len()];
        let du = i1 as isize - i0 as isize;
        let mut dv = j1 as isize - j0 as isize;
        if band.is_cylinder() {
            let nv = band.nv() as isize;
            if dv == nv - 1 {
                dv = -1;
            } else if dv == 1 - nv {
                dv = 1;
            }
        }
        (du.abs() + dv.abs() == 1).then_some((du, dv))
    }

    pub fn segment(&self, band: &DiscreteBand, k: usize) -> CurveSegment {
        let (du, dv) = self.step(band, k).expect("validated at construction");
        let from = self.vertices[k];
        let to = self.vertices[(k + 1) % self.vertices.len()];
        let (i, j) = (from.0 as isize, from.1 as isize);
        // Cells to the left and right of travel.
        let (left, right) = match (du, dv) {
            (0, 1) => (band.cell_at(i - 1, j), band.cell_at(i, j)),
            (0, _) => (band.cell_at(i, j - 1), band.cell_at(i - 1, j - 1)),
            (1, _) => (band.cell_at(i, j), band.cell_at(i, j - 1)),
            _ => (band.cell_at(i - 1, j - 1), band.cell_at(i - 1, j)),
        };
        let (outer, inner) = match self.normal {
            NormalSide::Left => (left, right),
            NormalSide::Right => (right, left),
        };
        CurveSegment { from, to, outer, inner }
    }

    pub fn segments<'a>(&'a self, band: &'a DiscreteBand) -> impl Iterator<Item = CurveSegment> + 'a {
        (0..self.vertices.len()).map(move |k| self.segment(band, k))
    }
}

fn ordered(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// True iff every path of cells from `∂₋` to `∂₊` crosses the curve.
pub fn separation_check(band: &DiscreteBand, curve: &Curve) -> bool {
    let cut: BTreeSet<(usize, usize)> = curve
        .segments(band)
        .filter_map(|s| Some(ordered(s.outer?, s.inner?)))
        .collect();
    band.separates(|a, b| cut.contains(&ordered(a, b)))
}

/// Outcome of evaluating the structural inequality
/// `Sc(X) + n/(n-1) h² + 2⟨∇h, ν⟩ ≥ Sc(N)/φ²` along a curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructuralReport {
    pub holds: bool,
    /// Smallest `LHS - RHS` over evaluated segments.
    pub min_margin: f64,
    pub segments_checked: usize,
    /// Segments touching `∂X`, where curvature is undefined.
    pub segments_skipped: usize,
}

/// Evaluates the structural inequality for `h = h_φ ∘ map` on each segment
/// of `curve`, with `Sc(X)` from angle defects at the segment ends and the
/// normal derivative of `h` from the two adjacent cells.
pub fn structural_check(
    band: &DiscreteBand,
    map: &BandMap,
    m: &ModelSpace,
    curve: &Curve,
    tol: f64,
) -> Result<StructuralReport> {
    if map.values.len() != band.vertex_count() {
        return Err(Error::Argument("band map does not match the band".into()));
    }
    let (lo, hi) = m.domain();
    let clamp = |x: f64| x.max(lo).min(hi);
    let n = m.n() as f64;
    let c = n / (n - 1.0);
    let mut report = StructuralReport {
        holds: true,
        min_margin: f64::INFINITY,
        segments_checked: 0,
        segments_skipped: 0,
    };
    for s in curve.segments(band) {
        let (Some(outer), Some(inner)) = (s.outer, s.inner) else {
            report.segments_skipped += 1;
            continue;
        };
        let (Some(k0), Some(k1)) = (
            band.scalar_curvature(s.from.0, s.from.1),
            band.scalar_curvature(s.to.0, s.to.1),
        ) else {
            report.segments_skipped += 1;
            continue;
        };
        let sc = 0.5 * (k0 + k1);
        let mid =
            clamp(0.5 * (map.value(band, s.from.0, s.from.1 as isize) + map.value(band, s.to.0, s.to.1 as isize)));
        let h = m.mean_curvature(mid)?;
        let h_out = m.mean_curvature(clamp(map.cell_value(band, outer)))?;
        let h_in = m.mean_curvature(clamp(map.cell_value(band, inner)))?;
        let dnu_h = (h_out - h_in) / band.dual_length(outer, inner);
        let phi = m.warp().eval(mid)?.value;
        let margin = sc + c * h * h + 2.0 * dnu_h - m.base_scalar() / (phi * phi);
        report.min_margin = report.min_margin.min(margin);
        report.segments_checked += 1;
    }
    report.holds = report.segments_checked > 0 && report.min_margin >= -tol;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::warp::ModelFamily;

    #[test]
    fn flat_cylinder_basics() {
        let b = build_flat_cylinder(2.0, 1.0, 64, 64).unwrap();
        assert!((b.width() - 2.0).abs() < 1e-9);
        assert!((b.total_area() - 4.0 * PI).abs() < 1e-9);
        for (i, j) in [(1, 0), (10, 5), (32, 63)] {
            assert!(b.gaussian_curvature(i, j).unwrap().abs() < 1e-10);
        }
        assert!(b.gaussian_curvature(0, 3).is_none());
        assert!(build_flat_cylinder(2.0, 1.0, 3, 64).is_err());
        assert!(build_flat_cylinder(-2.0, 1.0, 8, 8).is_err());
    }

    #[test]
    fn triangle_from_sides() {
        let t = Triangle::from_sides([3.0, 4.0, 5.0]);
        assert!((t.area - 6.0).abs() < 1e-12);
        assert!((t.angles[2] - PI / 2.0).abs() < 1e-12);
        assert!((t.angles.iter().sum::<f64>() - PI).abs() < 1e-12);
    }

    #[test]
    fn metric_validation() {
        let bad = vec![CellMetric::new(1.0, 2.0, 1.0); 16];
        assert!(DiscreteBand::from_cells(4, 4, Topology::Cylinder, bad).is_err());
        let short = vec![CellMetric::new(1.0, 0.0, 1.0); 15];
        assert!(DiscreteBand::from_cells(4, 4, Topology::Rectangle, short).is_err());
    }

    #[test]
    fn warped_cos_band() {
        let m = ModelFamily::Cos.build(2, -0.5, 0.5).unwrap();
        let b = build_warped_band(&m, 128, 64, 2.0 * PI).unwrap();
        assert!((b.width() - 1.0).abs() < 1e-9);
        for i in [8, 32, 56] {
            let k = b.gaussian_curvature(i, 7).unwrap();
            assert!((k - 1.0).abs() < 0.05, "K = {k} at row {i}");
        }
        let m3 = ModelFamily::Cos.build(3, -0.3, 0.3).unwrap();
        assert!(matches!(
            build_warped_band(&m3, 16, 16, 1.0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn constant_model_gives_flat_cylinder() {
        let m = ModelFamily::Constant.build(2, 0.0, 2.0).unwrap();
        let w = build_warped_band(&m, 16, 8, 2.0 * PI).unwrap();
        let f = build_flat_cylinder(2.0, 1.0, 8, 16).unwrap();
        for (x, y) in w.cells().iter().zip(f.cells()) {
            assert!((x.g11 - y.g11).abs() < 1e-15 && (x.g22 - y.g22).abs() < 1e-15);
        }
    }

    #[test]
    fn lipschitz_map_on_flat_cylinder() {
        let b = build_flat_cylinder(2.0, 1.0, 32, 32).unwrap();
        let map = lipschitz_band_map(&b, 0.0, 1.0, 0.25).unwrap();
        assert!((map.lipschitz - 0.5).abs() < 1e-9);
        assert!(map.lipschitz < map.declared_bound);
        for v in b.row_vertices(0) {
            assert_eq!(map.values[v], 0.0);
        }
        for v in b.row_vertices(32) {
            assert_eq!(map.values[v], 1.0);
        }
        assert!(matches!(
            lipschitz_band_map(&b, 0.0, 2.0, 0.25),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn separation_examples() {
        let b = build_flat_cylinder(2.0, 1.0, 8, 8).unwrap();
        let mid = Curve::horizontal_circle(&b, 4).unwrap();
        assert!(separation_check(&b, &mid));
        assert!(separation_check(&b, &mid.rotated(3)));
        let square = Curve::new(&b, vec![(3, 3), (4, 3), (4, 4), (3, 4)], NormalSide::Left).unwrap();
        assert!(!separation_check(&b, &square));
        assert!(Curve::new(&b, vec![(3, 3), (5, 3), (4, 4)], NormalSide::Left).is_err());
    }

    #[test]
    fn structural_flat_constant() {
        let b = build_flat_cylinder(2.0, 1.0, 16, 16).unwrap();
        let m = ModelFamily::Constant.build(2, 0.0, 1.0).unwrap();
        let map = lipschitz_band_map(&b, 0.0, 1.0, 0.25).unwrap();
        let c = Curve::horizontal_circle(&b, 8).unwrap();
        let r = structural_check(&b, &map, &m, &c, 1e-9).unwrap();
        assert!(r.holds);
        assert!(r.min_margin.abs() < 1e-9);
        assert_eq!(r.segments_checked, 16);
    }

    #[test]
    fn cylinder_seam_segments() {
        let b = build_flat_cylinder(1.0, 1.0, 4, 6).unwrap();
        let c = Curve::horizontal_circle(&b, 2).unwrap();
        let last = c.segment(&b, 5);
        assert_eq!(last.to, (2, 0));
        assert_eq!(last.outer, Some(b.cell_index(2, 5)));
        assert_eq!(last.inner, Some(b.cell_index(1, 5)));
    }
}
