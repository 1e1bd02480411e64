//! Discrete μ-bubbles: minimisers of `A_h(Ω) = |∂*Ω ∩ X̊| - ∫_Ω h` and of the
//! weighted variant `A^u_h(Ω) = ∫_{∂*Ω} u - ∫ (χ_Ω - χ_{Ω₀}) h u`.
//!
//! Regions are sets of cells that contain the row next to `∂₋` and avoid the
//! row next to `∂₊`. Perimeter is a sum of pair weights over cut cell pairs,
//! so minimisation is an `s–t` minimum cut and the optimum is global.
//!
//! Boundary chains of a region are oriented with the region on the left and
//! carry the per-node data used by the variation formulas: geodesic
//! curvature from angle sums, the prescription and its normal derivative,
//! and the scalar curvature of the band.

use alloc::{collections::BTreeMap, format, string::String, vec, vec::Vec};
use core::f64::consts::{FRAC_1_SQRT_2, PI};

#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::band::{lipschitz_band_map, BandMap, CellMetric, DiscreteBand};
use crate::maxflow::FlowGraph;
use crate::warp::ModelSpace;
use crate::{Error, Result};

/// Prescriptions are clamped to this magnitude.
pub const PRESCRIPTION_CLAMP: f64 = 1e6;

/// An admissible set of cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    inside: Vec<bool>,
}

impl Region {
    /// Validates that row `0` is inside and row `nu - 1` is outside.
    pub fn new(band: &DiscreteBand, inside: Vec<bool>) -> Result<Self> {
        if band.nu() < 2 {
            return Err(Error::Argument("regions need at least two cell rows".into()));
        }
        if inside.len() != band.cell_count() {
            return Err(Error::Argument(format!(
                "region has {} cells, band has {}",
                inside.len(),
                band.cell_count()
            )));
        }
        let nv = band.nv();
        if inside[..nv].iter().any(|x| !x) {
            return Err(Error::Argument(
                "region must contain the cells along the lower boundary".into(),
            ));
        }
        if inside[(band.nu() - 1) * nv..].iter().any(|x| *x) {
            return Err(Error::Argument(
                "region must avoid the cells along the upper boundary".into(),
            ));
        }
        Ok(Region { inside })
    }

    pub fn from_fn(band: &DiscreteBand, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let nv = band.nv();
        Self::new(band, (0..band.cell_count()).map(|c| f(c / nv, c % nv)).collect())
    }

    /// The cells of the lowest `rows` rows.
    pub fn lower_rows(band: &DiscreteBand, rows: usize) -> Result<Self> {
        Self::from_fn(band, |i, _| i < rows)
    }

    pub fn contains(&self, cell: usize) -> bool {
        self.inside[cell]
    }

    pub fn cells(&self) -> &[bool] {
        &self.inside
    }

    pub fn len(&self) -> usize {
        self.inside.iter().filter(|x| **x).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Each row as alternating runs starting with an "outside" run (possibly
    /// empty).
    pub fn run_lengths(&self, band: &DiscreteBand) -> Vec<Vec<usize>> {
        self.inside
            .chunks(band.nv())
            .map(|row| {
                let mut runs = Vec::new();
                let mut current = false;
                let mut len = 0;
                for &x in row {
                    if x == current {
                        len += 1;
                    } else {
                        runs.push(len);
                        current = x;
                        len = 1;
                    }
                }
                runs.push(len);
                runs
            })
            .collect()
    }

    /// Inverse of [`Region::run_lengths`].
    pub fn from_run_lengths(band: &DiscreteBand, rows: &[Vec<usize>]) -> Result<Self> {
        if rows.len() != band.nu() {
            return Err(Error::Argument("wrong number of rows".into()));
        }
        let mut inside = Vec::with_capacity(band.cell_count());
        for row in rows {
            let start = inside.len();
            for (k, &len) in row.iter().enumerate() {
                inside.extend(core::iter::repeat_n(k % 2 == 1, len));
            }
            if inside.len() - start != band.nv() {
                return Err(Error::Argument("row runs do not add up to the row length".into()));
            }
        }
        Self::new(band, inside)
    }

    /// True iff every path of cells from `∂₋` to `∂₊` leaves the region.
    pub fn separates(&self, band: &DiscreteBand) -> bool {
        band.separates(|a, b| self.inside[a] != self.inside[b])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrescriptionTag {
    Constant { c: f64 },
    FromModelPullback { n: u32, a: f64, b: f64 },
    TanProfile { ell: f64 },
    Custom,
}

/// Per-cell prescribed mean curvature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrescriptionField {
    pub values: Vec<f64>,
    pub tag: PrescriptionTag,
}

impl PrescriptionField {
    pub fn constant(band: &DiscreteBand, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::Argument(format!(
                "constant prescription must be finite, got {c}"
            )));
        }
        Ok(PrescriptionField {
            values: vec![c; band.cell_count()],
            tag: PrescriptionTag::Constant { c },
        })
    }

    /// `h = h_φ ∘ map` evaluated at cell centres.
    pub fn from_model_pullback(band: &DiscreteBand, m: &ModelSpace, map: &BandMap) -> Result<Self> {
        if map.values.len() != band.vertex_count() {
            return Err(Error::Argument("band map does not match the band".into()));
        }
        let (a, b) = m.domain();
        let values = (0..band.cell_count())
            .map(|c| m.mean_curvature(map.cell_value(band, c).max(a).min(b)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PrescriptionField {
            values,
            tag: PrescriptionTag::FromModelPullback { n: m.n(), a, b },
        })
    }

    /// `h = -(2π/ℓ) tan(π x/ℓ)` for a band map `x: X → [-ℓ/2, ℓ/2]` with
    /// Lipschitz constant below one, clamped to [`PRESCRIPTION_CLAMP`].
    pub fn tan_profile(band: &DiscreteBand, ell: f64) -> Result<Self> {
        if !(ell > 0.0 && ell.is_finite()) {
            return Err(Error::Argument(format!(
                "tan profile length must be positive, got {ell}"
            )));
        }
        let map = lipschitz_band_map(band, -0.5 * ell, 0.5 * ell, 0.0)?;
        let values = (0..band.cell_count())
            .map(|c| {
                let x = map.cell_value(band, c);
                (-(2.0 * PI / ell) * (PI * x / ell).tan()).clamp(-PRESCRIPTION_CLAMP, PRESCRIPTION_CLAMP)
            })
            .collect();
        Ok(PrescriptionField {
            values,
            tag: PrescriptionTag::TanProfile { ell },
        })
    }

    pub fn custom(band: &DiscreteBand, values: Vec<f64>) -> Result<Self> {
        if values.len() != band.cell_count() {
            return Err(Error::Argument("prescription does not match the band".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("prescription must be finite".into()));
        }
        Ok(PrescriptionField {
            values,
            tag: PrescriptionTag::Custom,
        })
    }

    fn check(&self, band: &DiscreteBand) -> Result<()> {
        if self.values.len() != band.cell_count() {
            return Err(Error::Argument("prescription does not match the band".into()));
        }
        Ok(())
    }
}

/// Positive per-cell weights for the warped functional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightField {
    pub values: Vec<f64>,
}

impl WeightField {
    pub fn new(band: &DiscreteBand, values: Vec<f64>) -> Result<Self> {
        if values.len() != band.cell_count() {
            return Err(Error::Argument("weight field does not match the band".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Argument(format!("weights must be positive, found {v}")));
        }
        Ok(WeightField { values })
    }

    pub fn constant(band: &DiscreteBand, u: f64) -> Result<Self> {
        Self::new(band, vec![u; band.cell_count()])
    }

    /// Linear in the row index, `u0` at `∂₋` and `u1` at `∂₊`.
    pub fn ramp(band: &DiscreteBand, u0: f64, u1: f64) -> Result<Self> {
        let nu = band.nu() as f64;
        let nv = band.nv();
        Self::new(
            band,
            (0..band.cell_count())
                .map(|c| u0 + (u1 - u0) * ((c / nv) as f64 + 0.5) / nu)
                .collect(),
        )
    }
}

/// Discretisation of perimeter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stencil {
    /// 4-neighbour pairs weighted by the metric length of the shared edge.
    Axis,
    /// 8-neighbour pairs with weights fitted so that straight cuts along the
    /// two axes and the two diagonals have exact metric length.
    Crofton,
}

/// Pair weights `(w_u, w_v, w_diag, w_anti)` of one cell.
pub fn crofton_weights(g: &CellMetric) -> [f64; 4] {
    let alpha = g.g11.sqrt();
    let beta = g.g22.sqrt();
    let gamma1 = (0.5 * (g.g11 + g.g22 - 2.0 * g.g12)).sqrt();
    let gamma2 = (0.5 * (g.g11 + g.g22 + 2.0 * g.g12)).sqrt();
    let d = alpha + beta - (gamma1 + gamma2) * FRAC_1_SQRT_2;
    let s = (gamma1 + gamma2) * FRAC_1_SQRT_2 - d;
    let diag = (gamma1 - s * FRAC_1_SQRT_2) * FRAC_1_SQRT_2;
    let anti = (gamma2 - s * FRAC_1_SQRT_2) * FRAC_1_SQRT_2;
    let w = [beta - d, alpha - d, diag, anti];
    if w.iter().all(|x| *x >= 0.0) {
        w
    } else {
        [beta, alpha, 0.0, 0.0]
    }
}

/// Unordered cell pairs with their perimeter weights.
pub fn perimeter_pairs(band: &DiscreteBand, stencil: Stencil) -> Vec<(usize, usize, f64)> {
    let mut pairs = Vec::new();
    let weights: Vec<[f64; 4]> = match stencil {
        Stencil::Axis => Vec::new(),
        Stencil::Crofton => band.cells().iter().map(crofton_weights).collect(),
    };
    for c in 0..band.cell_count() {
        let (i, j) = ((c / band.nv()) as isize, (c % band.nv()) as isize);
        let offsets: &[(isize, isize, usize)] = match stencil {
            Stencil::Axis => &[(1, 0, 0), (0, 1, 1)],
            Stencil::Crofton => &[(1, 0, 0), (0, 1, 1), (1, 1, 2), (1, -1, 3)],
        };
        for &(di, dj, kind) in offsets {
            let Some(d) = band.cell_at(i + di, j + dj) else {
                continue;
            };
            if d == c {
                continue;
            }
            let w = match stencil {
                Stencil::Axis => band.shared_edge_length(c, d),
                Stencil::Crofton => 0.5 * (weights[c][kind] + weights[d][kind]),
            };
            if w > 0.0 {
                pairs.push((c, d, w));
            }
        }
    }
    pairs
}

fn check_region(band: &DiscreteBand, r: &Region) -> Result<()> {
    Region::new(band, r.inside.clone()).map(|_| ())
}

/// Perimeter of the region inside `X̊` under `stencil`.
pub fn perimeter(band: &DiscreteBand, r: &Region, stencil: Stencil) -> f64 {
    perimeter_pairs(band, stencil)
        .into_iter()
        .filter(|&(a, b, _)| r.inside[a] != r.inside[b])
        .map(|(_, _, w)| w)
        .sum()
}

/// `A_h` with the given perimeter stencil.
pub fn functional(band: &DiscreteBand, r: &Region, h: &PrescriptionField, stencil: Stencil) -> Result<f64> {
    check_region(band, r)?;
    h.check(band)?;
    let bulk: f64 = (0..band.cell_count())
        .filter(|&c| r.inside[c])
        .map(|c| h.values[c] * band.cell_area(c))
        .sum();
    Ok(perimeter(band, r, stencil) - bulk)
}

/// `A_h(Ω) = |∂*Ω ∩ X̊| - ∫_Ω h` with axis edge lengths.
pub fn functional_a_h(band: &DiscreteBand, r: &Region, h: &PrescriptionField) -> Result<f64> {
    functional(band, r, h, Stencil::Axis)
}

/// `A^u_h` with the given stencil; pair weights are scaled by the mean of
/// `u` over the two cells.
pub fn warped_functional(
    band: &DiscreteBand,
    r: &Region,
    u: &WeightField,
    h: &PrescriptionField,
    anchor: &Region,
    stencil: Stencil,
) -> Result<f64> {
    check_region(band, r)?;
    check_region(band, anchor)?;
    h.check(band)?;
    let u = WeightField::new(band, u.values.clone())?;
    let per: f64 = perimeter_pairs(band, stencil)
        .into_iter()
        .filter(|&(a, b, _)| r.inside[a] != r.inside[b])
        .map(|(a, b, w)| w * 0.5 * (u.values[a] + u.values[b]))
        .sum();
    let bulk: f64 = (0..band.cell_count())
        .map(|c| {
            let chi = r.inside[c] as i32 - anchor.inside[c] as i32;
            chi as f64 * h.values[c] * u.values[c] * band.cell_area(c)
        })
        .sum();
    Ok(per - bulk)
}

/// `A^u_h` with axis edge lengths.
pub fn warped_functional_a_u_h(
    band: &DiscreteBand,
    r: &Region,
    u: &WeightField,
    h: &PrescriptionField,
    anchor: &Region,
) -> Result<f64> {
    warped_functional(band, r, u, h, anchor, Stencil::Axis)
}

/// One segment of a boundary chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSegment {
    pub inside: usize,
    pub outside: usize,
    pub length: f64,
    /// Distance between the two cell centres.
    pub dual_length: f64,
    /// Mean of the prescription over the two cells.
    pub h: f64,
    /// `(h_out - h_in)/dual_length`
    pub dnu_h: f64,
    pub u: f64,
    pub dnu_u: f64,
    /// Second normal derivative of `u` from four cells across the segment.
    pub dnunu_u: f64,
    /// `((hu)_out - (hu)_in)/dual_length`
    pub dnu_hu: f64,
}

/// Per-vertex data of a boundary chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainNode {
    pub vertex: (usize, usize),
    /// Mean length of the two adjacent segments.
    pub mass: f64,
    /// Geodesic curvature, positive where the region is convex.
    pub curvature: f64,
    pub scalar: Option<f64>,
    pub h: f64,
    pub dnu_h: f64,
    pub u: f64,
    pub dnu_u: f64,
    pub dnunu_u: f64,
    pub dnu_hu: f64,
    /// `H - h` for plain bubbles, `H + ∂_ν u/u - h` for warped ones.
    pub residual: f64,
    /// Adjacent to a hard-assigned collar cell or the side of a rectangle.
    pub in_collar: bool,
}

/// A connected piece of the reduced boundary, oriented with the region on
/// the left. Closed chains have one node per vertex; open chains (ending on
/// the sides of a rectangle) have nodes only at interior vertices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryChain {
    pub vertices: Vec<(usize, usize)>,
    pub closed: bool,
    pub segments: Vec<ChainSegment>,
    pub nodes: Vec<ChainNode>,
}

#[derive(Debug, Clone, Copy)]
struct DirectedEdge {
    from: (usize, usize),
    to: (usize, usize),
    dir: usize,
    inside: usize,
    outside: usize,
}

const DIRS: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

fn directed_boundary(band: &DiscreteBand, r: &Region) -> Vec<DirectedEdge> {
    let nv = band.nv();
    let wrap = |i: usize, j: usize| {
        let v = band.vertex_at(i as isize, j as isize).expect("vertex in range");
        band.vertex_coords(v)
    };
    let mut edges = Vec::new();
    for p in 0..band.cell_count() {
        if !r.inside[p] {
            continue;
        }
        let (i, j) = (p / nv, p % nv);
        let (ii, jj) = (i as isize, j as isize);
        // (neighbour offset, from, to, direction)
        let cases = [
            ((1, 0), (i + 1, j), (i + 1, j + 1), 1),
            ((-1, 0), (i, j + 1), (i, j), 3),
            ((0, 1), (i + 1, j + 1), (i, j + 1), 2),
            ((0, -1), (i, j), (i + 1, j), 0),
        ];
        for ((di, dj), from, to, dir) in cases {
            let Some(q) = band.cell_at(ii + di, jj + dj) else {
                continue;
            };
            if q == p || r.inside[q] {
                continue;
            }
            edges.push(DirectedEdge {
                from: wrap(from.0, from.1),
                to: wrap(to.0, to.1),
                dir,
                inside: p,
                outside: q,
            });
        }
    }
    edges
}

/// Cell `steps` cells away from `cell` along the normal of a segment with
/// direction `dir` (the normal points to the right of travel).
fn cell_along_normal(band: &DiscreteBand, cell: usize, dir: usize, steps: isize) -> Option<usize> {
    let (du, dv) = DIRS[(dir + 3) % 4];
    let (i, j) = ((cell / band.nv()) as isize, (cell % band.nv()) as isize);
    band.cell_at(i + du * steps, j + dv * steps)
}

fn chain_segment(band: &DiscreteBand, e: &DirectedEdge, h: &[f64], u: &[f64]) -> ChainSegment {
    let (a, b) = (e.inside, e.outside);
    let dual = band.dual_length(a, b);
    let dnunu_u = match (
        cell_along_normal(band, a, e.dir, -1),
        cell_along_normal(band, b, e.dir, 1),
    ) {
        (Some(a2), Some(b2)) => ((u[b2] + u[a2]) - (u[b] + u[a])) / (2.0 * dual * dual),
        _ => 0.0,
    };
    ChainSegment {
        inside: a,
        outside: b,
        length: band.shared_edge_length(a, b),
        dual_length: dual,
        h: 0.5 * (h[a] + h[b]),
        dnu_h: (h[b] - h[a]) / dual,
        u: 0.5 * (u[a] + u[b]),
        dnu_u: (u[b] - u[a]) / dual,
        dnunu_u,
        dnu_hu: (h[b] * u[b] - h[a] * u[a]) / dual,
    }
}

/// Geodesic curvature at a vertex where the chain turns from `d_in` to
/// `d_out`: `π` minus the region's angle there, over `mass`.
fn node_curvature(band: &DiscreteBand, vertex: (usize, usize), d_in: usize, d_out: usize, mass: f64) -> f64 {
    let count = ((d_in + 2) + 4 - d_out) % 4;
    let angle: f64 = (0..count)
        .map(|k| {
            band.quadrant_angle(vertex.0, vertex.1 as isize, d_out + k)
                .unwrap_or(0.0)
        })
        .sum();
    (PI - angle) / mass
}

fn make_node(
    band: &DiscreteBand,
    vertex: (usize, usize),
    s_in: &ChainSegment,
    s_out: &ChainSegment,
    d_in: usize,
    d_out: usize,
    weighted: bool,
) -> ChainNode {
    let mass = 0.5 * (s_in.length + s_out.length);
    let curvature = node_curvature(band, vertex, d_in, d_out, mass);
    let avg = |f: fn(&ChainSegment) -> f64| 0.5 * (f(s_in) + f(s_out));
    let h = avg(|s| s.h);
    let u = avg(|s| s.u);
    let dnu_u = avg(|s| s.dnu_u);
    let residual = if weighted {
        curvature + dnu_u / u - h
    } else {
        curvature - h
    };
    let (i, j) = vertex;
    let in_collar = i <= 1 || i + 1 >= band.nu() || (!band.is_cylinder() && (j == 0 || j == band.nv()));
    ChainNode {
        vertex,
        mass,
        curvature,
        scalar: band.scalar_curvature(i, j),
        h,
        dnu_h: avg(|s| s.dnu_h),
        u,
        dnu_u,
        dnunu_u: avg(|s| s.dnunu_u),
        dnu_hu: avg(|s| s.dnu_hu),
        residual,
        in_collar,
    }
}

/// Traces the reduced boundary of `r` into chains, turning left at saddle
/// vertices.
pub fn boundary_chains(
    band: &DiscreteBand,
    r: &Region,
    h: &PrescriptionField,
    u: Option<&WeightField>,
) -> Result<Vec<BoundaryChain>> {
    check_region(band, r)?;
    h.check(band)?;
    let ones;
    let uvals: &[f64] = match u {
        Some(w) => &w.values,
        None => {
            ones = vec![1.0; band.cell_count()];
            &ones
        }
    };
    let edges = directed_boundary(band, r);
    let mut outgoing: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut indegree: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (k, e) in edges.iter().enumerate() {
        outgoing.entry(e.from).or_default().push(k);
        *indegree.entry(e.to).or_default() += 1;
    }
    let pick = |vertex: (usize, usize), d_in: usize| -> Option<usize> {
        let outs = outgoing.get(&vertex)?;
        [1, 0, 3]
            .into_iter()
            .find_map(|turn| outs.iter().copied().find(|&k| edges[k].dir == (d_in + turn) % 4))
    };

    let mut used = vec![false; edges.len()];
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&k| (indegree.contains_key(&edges[k].from), edges[k].from, edges[k].dir));

    let mut chains = Vec::new();
    for start in order {
        if used[start] {
            continue;
        }
        let mut path = vec![start];
        used[start] = true;
        let mut closed = false;
        loop {
            let last = &edges[*path.last().expect("nonempty")];
            match pick(last.to, last.dir) {
                Some(k) if k == start => {
                    closed = true;
                    break;
                }
                Some(k) if !used[k] => {
                    used[k] = true;
                    path.push(k);
                }
                _ => break,
            }
        }
        let segments: Vec<ChainSegment> = path
            .iter()
            .map(|&k| chain_segment(band, &edges[k], &h.values, uvals))
            .collect();
        let mut vertices: Vec<(usize, usize)> = path.iter().map(|&k| edges[k].from).collect();
        if !closed {
            vertices.push(edges[*path.last().expect("nonempty")].to);
        }
        let m = path.len();
        let node_range = if closed { 0..m } else { 1..m };
        let nodes = node_range
            .map(|k| {
                let prev = if k == 0 { m - 1 } else { k - 1 };
                make_node(
                    band,
                    vertices[k],
                    &segments[prev],
                    &segments[k],
                    edges[path[prev]].dir,
                    edges[path[k]].dir,
                    u.is_some(),
                )
            })
            .collect();
        chains.push(BoundaryChain {
            vertices,
            closed,
            segments,
            nodes,
        });
    }
    Ok(chains)
}

/// Result of a minimisation with the data needed by the variation checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizerReport {
    pub region: Region,
    /// Functional recomputed on `region` under `stencil`.
    pub value: f64,
    /// The same value obtained from the maximum flow.
    pub flow_value: f64,
    pub stencil: Stencil,
    pub weighted: bool,
    pub chains: Vec<BoundaryChain>,
    /// Largest `|residual|` over nodes away from the collars.
    pub max_residual: f64,
    /// `(test function, quadratic form)` samples on closed chains.
    pub second_variation: Vec<(String, f64)>,
}

impl MinimizerReport {
    pub fn nodes(&self) -> impl Iterator<Item = &ChainNode> {
        self.chains.iter().flat_map(|c| c.nodes.iter())
    }

    pub fn node_count(&self) -> usize {
        self.chains.iter().map(|c| c.nodes.len()).sum()
    }

    pub fn all_closed(&self) -> bool {
        self.chains.iter().all(|c| c.closed)
    }
}

fn solve_cut(band: &DiscreteBand, pairs: &[(usize, usize, f64)], terminal: &[f64]) -> (Vec<bool>, f64) {
    let cells = band.cell_count();
    let (s, t) = (cells, cells + 1);
    let mut g = FlowGraph::new(cells + 2);
    for &(a, b, w) in pairs {
        g.add_edge(a, b, w, w);
    }
    let nv = band.nv();
    for c in 0..cells {
        let row = c / nv;
        if row == 0 {
            g.add_edge(s, c, f64::INFINITY, 0.0);
        } else if row + 1 == band.nu() {
            g.add_edge(c, t, f64::INFINITY, 0.0);
        } else if terminal[c] > 0.0 {
            g.add_edge(s, c, terminal[c], 0.0);
        } else if terminal[c] < 0.0 {
            g.add_edge(c, t, -terminal[c], 0.0);
        }
    }
    let flow = g.max_flow(s, t);
    let mut side = g.source_side(s);
    side.truncate(cells);
    let offset: f64 = (0..cells)
        .map(|c| match c / nv {
            0 => terminal[c],
            row if row + 1 == band.nu() => 0.0,
            _ => terminal[c].max(0.0),
        })
        .sum();
    (side, flow - offset)
}

fn finish_report(
    band: &DiscreteBand,
    region: Region,
    value: f64,
    flow_value: f64,
    stencil: Stencil,
    h: &PrescriptionField,
    u: Option<&WeightField>,
) -> Result<MinimizerReport> {
    let chains = boundary_chains(band, &region, h, u)?;
    let max_residual = chains
        .iter()
        .flat_map(|c| c.nodes.iter())
        .filter(|n| !n.in_collar)
        .fold(0.0_f64, |m, n| m.max(n.residual.abs()));
    let mut rep = MinimizerReport {
        region,
        value,
        flow_value,
        stencil,
        weighted: u.is_some(),
        chains,
        max_residual,
        second_variation: Vec::new(),
    };
    if rep.all_closed() && rep.node_count() > 0 {
        for (name, psi) in standard_test_functions(&rep) {
            rep.second_variation
                .push((name.into(), second_variation_value(&rep, &psi)?));
        }
    }
    Ok(rep)
}

/// `ψ ≡ 1` and the first Fourier modes in arclength along each chain.
fn standard_test_functions(rep: &MinimizerReport) -> Vec<(&'static str, Vec<f64>)> {
    let mut constant = Vec::new();
    let mut cosine = Vec::new();
    let mut sine = Vec::new();
    for chain in &rep.chains {
        let total: f64 = chain.segments.iter().map(|s| s.length).sum();
        let mut s = 0.0;
        for (k, _) in chain.nodes.iter().enumerate() {
            let x = 2.0 * PI * s / total;
            constant.push(1.0);
            cosine.push(x.cos());
            sine.push(x.sin());
            s += chain.segments[k].length;
        }
    }
    vec![("constant", constant), ("cos1", cosine), ("sin1", sine)]
}

/// Global minimiser of `A_h` under the Crofton stencil.
pub fn minimize(band: &DiscreteBand, h: &PrescriptionField) -> Result<MinimizerReport> {
    minimize_with(band, h, Stencil::Crofton)
}

pub fn minimize_with(band: &DiscreteBand, h: &PrescriptionField, stencil: Stencil) -> Result<MinimizerReport> {
    if band.nu() < 2 {
        return Err(Error::Argument("bubbles need at least two cell rows".into()));
    }
    h.check(band)?;
    let pairs = perimeter_pairs(band, stencil);
    let terminal: Vec<f64> = (0..band.cell_count())
        .map(|c| h.values[c] * band.cell_area(c))
        .collect();
    let (side, flow_value) = solve_cut(band, &pairs, &terminal);
    let region = Region::new(band, side)?;
    let value = functional(band, &region, h, stencil)?;
    finish_report(band, region, value, flow_value, stencil, h, None)
}

/// Global minimiser of `A^u_h` relative to `anchor` under the Crofton stencil.
pub fn minimize_warped(
    band: &DiscreteBand,
    u: &WeightField,
    h: &PrescriptionField,
    anchor: &Region,
) -> Result<MinimizerReport> {
    minimize_warped_with(band, u, h, anchor, Stencil::Crofton)
}

pub fn minimize_warped_with(
    band: &DiscreteBand,
    u: &WeightField,
    h: &PrescriptionField,
    anchor: &Region,
    stencil: Stencil,
) -> Result<MinimizerReport> {
    h.check(band)?;
    check_region(band, anchor)?;
    let u = WeightField::new(band, u.values.clone())?;
    let pairs: Vec<(usize, usize, f64)> = perimeter_pairs(band, stencil)
        .into_iter()
        .map(|(a, b, w)| (a, b, w * 0.5 * (u.values[a] + u.values[b])))
        .collect();
    let terminal: Vec<f64> = (0..band.cell_count())
        .map(|c| h.values[c] * u.values[c] * band.cell_area(c))
        .collect();
    let (side, flow) = solve_cut(band, &pairs, &terminal);
    let anchor_bulk: f64 = (0..band.cell_count())
        .filter(|&c| anchor.inside[c])
        .map(|c| terminal[c])
        .sum();
    let region = Region::new(band, side)?;
    let value = warped_functional(band, &region, &u, h, anchor, stencil)?;
    finish_report(band, region, value, flow + anchor_bulk, stencil, h, Some(&u))
}

/// True iff `max |H - h|` (or the warped residual) over nodes away from the
/// collars is at most `tol`.
pub fn first_variation_check(rep: &MinimizerReport, tol: f64) -> bool {
    rep.max_residual <= tol
}

fn check_psi(rep: &MinimizerReport, psi: &[f64]) -> Result<()> {
    if !rep.all_closed() {
        return Err(Error::Unsupported(
            "second variation needs closed boundary chains".into(),
        ));
    }
    if psi.len() != rep.node_count() {
        return Err(Error::Argument(format!(
            "test function has {} values, boundary has {} nodes",
            psi.len(),
            rep.node_count()
        )));
    }
    Ok(())
}

/// Discrete second variation along the closed chains of `rep`, with `psi`
/// listed node by node, chain by chain:
///
/// ```text
/// Σ u_k (ψ_{k+1} - ψ_k)²/ℓ_k
///   + Σ m_k (-½ Sc u - H h u + 2H ∂_ν u + ∂²_ν u - ∂_ν(hu)) ψ_k²
/// ```
///
/// For `u ≡ 1` this is `Σ (Δψ)²/ℓ - Σ m (½ Sc + H h + ∂_ν h) ψ²`.
pub fn second_variation_value(rep: &MinimizerReport, psi: &[f64]) -> Result<f64> {
    check_psi(rep, psi)?;
    let mut total = 0.0;
    let mut offset = 0;
    for chain in &rep.chains {
        let m = chain.nodes.len();
        let p = &psi[offset..offset + m];
        for k in 0..m {
            let seg = &chain.segments[k];
            let diff = p[(k + 1) % m] - p[k];
            total += seg.u * diff * diff / seg.length;
            let n = &chain.nodes[k];
            let sc = n
                .scalar
                .ok_or_else(|| Error::Unsupported("chain touches the band boundary".into()))?;
            let pot = -0.5 * sc * n.u - n.curvature * n.h * n.u + 2.0 * n.curvature * n.dnu_u + n.dnunu_u - n.dnu_hu;
            total += n.mass * pot * p[k] * p[k];
        }
        offset += m;
    }
    Ok(total)
}

/// Node values of `h = h_φ ∘ map` and its normal derivative along the
/// chains of `rep`.
pub fn pullback_along_chains(
    band: &DiscreteBand,
    rep: &MinimizerReport,
    m: &ModelSpace,
    map: &BandMap,
) -> Result<Vec<Vec<(f64, f64)>>> {
    let field = PrescriptionField::from_model_pullback(band, m, map)?;
    let h = &field.values;
    Ok(rep
        .chains
        .iter()
        .map(|chain| {
            let seg = |s: &ChainSegment| {
                (
                    0.5 * (h[s.inside] + h[s.outside]),
                    (h[s.outside] - h[s.inside]) / s.dual_length,
                )
            };
            let count = chain.segments.len();
            chain
                .nodes
                .iter()
                .enumerate()
                .map(|(k, _)| {
                    let k = if chain.closed { k } else { k + 1 };
                    let prev = if k == 0 { count - 1 } else { k - 1 };
                    let (h0, d0) = seg(&chain.segments[prev]);
                    let (h1, d1) = seg(&chain.segments[k % count]);
                    (0.5 * (h0 + h1), 0.5 * (d0 + d1))
                })
                .collect()
        })
        .collect())
}

/// `Σ |∇ψ|² - Σ m ½ (Sc + n/(n-1) h² + 2∂_ν h) ψ²` for `h = h_φ ∘ map`,
/// the two sides of the rearranged stability inequality for curves.
pub fn key_inequality_check(
    band: &DiscreteBand,
    rep: &MinimizerReport,
    m: &ModelSpace,
    map: &BandMap,
    psi: &[f64],
) -> Result<f64> {
    check_psi(rep, psi)?;
    let n = m.n() as f64;
    let c = n / (n - 1.0);
    let pulled = pullback_along_chains(band, rep, m, map)?;
    let mut total = 0.0;
    let mut offset = 0;
    for (chain, hv) in rep.chains.iter().zip(&pulled) {
        let len = chain.nodes.len();
        let p = &psi[offset..offset + len];
        for k in 0..len {
            let diff = p[(k + 1) % len] - p[k];
            total += diff * diff / chain.segments[k].length;
            let node = &chain.nodes[k];
            let sc = node
                .scalar
                .ok_or_else(|| Error::Unsupported("chain touches the band boundary".into()))?;
            let (h, dh) = hv[k];
            total -= node.mass * 0.5 * (sc + c * h * h + 2.0 * dh) * p[k] * p[k];
        }
        offset += len;
    }
    Ok(total)
}

/// Pair weight of a straight cut of direction `(du, dv)` (index units) per
/// unit metric length, for a constant metric. Equals one exactly along the
/// axes and diagonals under the Crofton stencil.
pub fn crofton_length_ratio(g: &CellMetric, du: f64, dv: f64) -> f64 {
    let [wu, wv, diag, anti] = crofton_weights(g);
    let norm = (du * du + dv * dv).sqrt();
    let (nu, nv) = (dv / norm, -du / norm);
    let cost = wu * nu.abs() + wv * nv.abs() + diag * (nu + nv).abs() + anti * (nu - nv).abs();
    cost / g.length(du / norm, dv / norm)
}
