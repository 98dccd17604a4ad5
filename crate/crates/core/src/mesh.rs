//! Uniform rectangulations of an axis-aligned box.
//!
//! Numbering is lexicographic by (row, column) for nodes and elements. Edges
//! come in two blocks: horizontal edges (normal `+y`) first, row by row, then
//! vertical edges (normal `+x`). Every edge normal points along a coordinate
//! axis, so the Raviart-Thomas basis needs no per-element sign flips.
//!
//! Local vertex order inside an element is `v1 = (0,0)`, `v2 = (hx,0)`,
//! `v3 = (hx,hy)`, `v4 = (0,hy)`, and local edge order is bottom, right,
//! top, left.

use crate::error::{Error, Result};
use crate::field::NodalField;

/// Axis-aligned rectangle `[min.0, max.0] x [min.1, max.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl BoundingBox {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Result<Self> {
        if !(max[0] > min[0] && max[1] > min[1]) {
            return Err(Error::Geometry(format!(
                "degenerate box {min:?} .. {max:?}"
            )));
        }
        Ok(Self { min, max })
    }

    /// The square `(-1, 1)^2` used by all benchmarks.
    pub fn reference_square() -> Self {
        Self {
            min: [-1.0, -1.0],
            max: [1.0, 1.0],
        }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }
}

fn divisions(side: f64, h: f64) -> Result<usize> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::MeshSize { h, side });
    }
    let n = (side / h).round();
    if n < 1.0 || (n * h - side).abs() > 1e-12 * side.max(1.0) {
        return Err(Error::MeshSize { h, side });
    }
    Ok(n as usize)
}

/// Uniform rectangular mesh with an element activity mask.
///
/// Geometry and numbering never depend on the mask; masking only selects
/// which elements take part in assembly.
#[derive(Debug, Clone, PartialEq)]
pub struct RectMesh {
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    origin: [f64; 2],
    nodes: Vec<[f64; 2]>,
    elements: Vec<[usize; 4]>,
    edges: Vec<[usize; 2]>,
    elem_edges: Vec<[usize; 4]>,
    active: Vec<bool>,
}

impl RectMesh {
    /// Builds the uniform mesh of `bbox` with square elements of size `h`.
    pub fn uniform(bbox: BoundingBox, h: f64) -> Result<Self> {
        let nx = divisions(bbox.width(), h)?;
        let ny = divisions(bbox.height(), h)?;
        Ok(Self::from_counts(
            bbox.min,
            nx,
            ny,
            bbox.width() / nx as f64,
            bbox.height() / ny as f64,
        ))
    }

    /// Builds an `nx x ny` mesh with element sizes `hx x hy` starting at `origin`.
    pub fn from_counts(origin: [f64; 2], nx: usize, ny: usize, hx: f64, hy: f64) -> Self {
        assert!(nx >= 1 && ny >= 1, "mesh needs at least one element per axis");
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                nodes.push([origin[0] + i as f64 * hx, origin[1] + j as f64 * hy]);
            }
        }
        let node = |i: usize, j: usize| j * (nx + 1) + i;
        let n_horizontal = nx * (ny + 1);
        let horizontal = |i: usize, j: usize| j * nx + i;
        let vertical = |i: usize, j: usize| n_horizontal + j * (nx + 1) + i;

        let mut edges = Vec::with_capacity(n_horizontal + ny * (nx + 1));
        for j in 0..=ny {
            for i in 0..nx {
                edges.push([node(i, j), node(i + 1, j)]);
            }
        }
        for j in 0..ny {
            for i in 0..=nx {
                edges.push([node(i, j), node(i, j + 1)]);
            }
        }

        let mut elements = Vec::with_capacity(nx * ny);
        let mut elem_edges = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                elements.push([node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)]);
                elem_edges.push([
                    horizontal(i, j),
                    vertical(i + 1, j),
                    horizontal(i, j + 1),
                    vertical(i, j),
                ]);
            }
        }

        Self {
            nx,
            ny,
            hx,
            hy,
            origin,
            nodes,
            elements,
            edges,
            elem_edges,
            active: vec![true; nx * ny],
        }
    }

    /// Same geometry with a different activity mask.
    pub fn with_active(&self, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != self.n_elements() {
            return Err(Error::SizeMismatch {
                expected: self.n_elements(),
                got: mask.len(),
            });
        }
        Ok(Self {
            active: mask,
            ..self.clone()
        })
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn hx(&self) -> f64 {
        self.hx
    }

    pub fn hy(&self) -> f64 {
        self.hy
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    pub fn element_area(&self) -> f64 {
        self.hx * self.hy
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_elements(&self) -> usize {
        self.elements.len()
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[[f64; 2]] {
        &self.nodes
    }

    pub fn elements(&self) -> &[[usize; 4]] {
        &self.elements
    }

    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    pub fn elem_edges(&self) -> &[[usize; 4]] {
        &self.elem_edges
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn node_index(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn element_index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    /// Number of horizontal edges; vertical edges are numbered after them.
    pub fn n_horizontal_edges(&self) -> usize {
        self.nx * (self.ny + 1)
    }

    pub fn is_horizontal_edge(&self, e: usize) -> bool {
        e < self.n_horizontal_edges()
    }

    pub fn active_elements(&self) -> impl Iterator<Item = usize> + '_ {
        self.active
            .iter()
            .enumerate()
            .filter_map(|(e, &a)| a.then_some(e))
    }

    pub fn n_active_elements(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    /// Lower-left corner of element `e`.
    pub fn element_corner(&self, e: usize) -> [f64; 2] {
        self.nodes[self.elements[e][0]]
    }

    pub fn element_center(&self, e: usize) -> [f64; 2] {
        let c = self.element_corner(e);
        [c[0] + 0.5 * self.hx, c[1] + 0.5 * self.hy]
    }

    /// Nodes touched by at least one active element.
    pub fn node_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_nodes()];
        for e in self.active_elements() {
            for &n in &self.elements[e] {
                mask[n] = true;
            }
        }
        mask
    }

    /// Edges touched by at least one active element.
    pub fn edge_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.n_edges()];
        for e in self.active_elements() {
            for &k in &self.elem_edges[e] {
                mask[k] = true;
            }
        }
        mask
    }

    /// Nodes on the boundary of the active region: touched by an active
    /// element and lying on the box boundary or touched by an inactive element.
    pub fn boundary_node_mask(&self) -> Vec<bool> {
        let active_nodes = self.node_mask();
        let mut touches_inactive = vec![false; self.n_nodes()];
        for (e, nodes) in self.elements.iter().enumerate() {
            if !self.active[e] {
                for &n in nodes {
                    touches_inactive[n] = true;
                }
            }
        }
        (0..self.n_nodes())
            .map(|n| {
                let (i, j) = (n % (self.nx + 1), n / (self.nx + 1));
                let on_box = i == 0 || j == 0 || i == self.nx || j == self.ny;
                active_nodes[n] && (on_box || touches_inactive[n])
            })
            .collect()
    }

    /// Splits every element into four; children inherit the parent's mask.
    pub fn refine(&self) -> (RectMesh, ProlongationMap) {
        let fine = RectMesh::from_counts(
            self.origin,
            2 * self.nx,
            2 * self.ny,
            0.5 * self.hx,
            0.5 * self.hy,
        );
        let mut active = vec![false; fine.n_elements()];
        for j in 0..fine.ny {
            for i in 0..fine.nx {
                active[fine.element_index(i, j)] = self.active[self.element_index(i / 2, j / 2)];
            }
        }
        let fine = RectMesh { active, ..fine };

        let mut stencils = Vec::with_capacity(fine.n_nodes());
        for fj in 0..=fine.ny {
            for fi in 0..=fine.nx {
                let (i, j) = (fi / 2, fj / 2);
                let s = match (fi % 2, fj % 2) {
                    (0, 0) => Stencil::Copy(self.node_index(i, j)),
                    (1, 0) => Stencil::Pair([self.node_index(i, j), self.node_index(i + 1, j)]),
                    (0, 1) => Stencil::Pair([self.node_index(i, j), self.node_index(i, j + 1)]),
                    _ => Stencil::Quad([
                        self.node_index(i, j),
                        self.node_index(i + 1, j),
                        self.node_index(i + 1, j + 1),
                        self.node_index(i, j + 1),
                    ]),
                };
                stencils.push(s);
            }
        }
        let coarse_to_fine = (0..self.n_nodes())
            .map(|n| {
                let (i, j) = (n % (self.nx + 1), n / (self.nx + 1));
                fine.node_index(2 * i, 2 * j)
            })
            .collect();
        let map = ProlongationMap {
            coarse_nodes: self.n_nodes(),
            coarse_to_fine,
            stencils,
        };
        (fine, map)
    }

    /// Nodal interpolation of `g`.
    pub fn interpolate<F: Fn(f64, f64) -> f64>(&self, g: F) -> NodalField {
        NodalField(self.nodes.iter().map(|p| g(p[0], p[1])).collect())
    }
}

/// Interpolation stencil of one fine node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    /// Coincides with a coarse node.
    Copy(usize),
    /// Midpoint of a coarse edge.
    Pair([usize; 2]),
    /// Center of a coarse element.
    Quad([usize; 4]),
}

/// Nodal prolongation from a mesh to its uniform refinement.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongationMap {
    coarse_nodes: usize,
    coarse_to_fine: Vec<usize>,
    stencils: Vec<Stencil>,
}

impl ProlongationMap {
    pub fn coarse_to_fine(&self) -> &[usize] {
        &self.coarse_to_fine
    }

    pub fn stencils(&self) -> &[Stencil] {
        &self.stencils
    }

    /// Bilinear interpolation of a coarse nodal field onto the fine nodes.
    pub fn prolongate(&self, v: &NodalField) -> Result<NodalField> {
        if v.len() != self.coarse_nodes {
            return Err(Error::SizeMismatch {
                expected: self.coarse_nodes,
                got: v.len(),
            });
        }
        Ok(NodalField(
            self.stencils
                .iter()
                .map(|s| match *s {
                    Stencil::Copy(a) => v[a],
                    Stencil::Pair([a, b]) => 0.5 * (v[a] + v[b]),
                    Stencil::Quad([a, b, c, d]) => 0.25 * (v[a] + v[b] + v[c] + v[d]),
                })
                .collect(),
        ))
    }
}

const INSIDE_TOL: f64 = 1e-12;

/// Inscribed and circumscribed rectangulations of the unit disk.
#[derive(Debug, Clone, PartialEq)]
pub struct RingMeshPair {
    pub full: RectMesh,
    /// Elements with all four vertices in the closed unit disk.
    pub inscribed_mask: Vec<bool>,
    /// Elements with at least one vertex strictly inside the unit disk.
    pub circumscribed_mask: Vec<bool>,
    /// Nodes on the boundary of the inscribed rectangulation.
    pub dirichlet_nodes_inscribed: Vec<usize>,
}

impl RingMeshPair {
    pub fn inscribed(&self) -> RectMesh {
        RectMesh {
            active: self.inscribed_mask.clone(),
            ..self.full.clone()
        }
    }

    pub fn circumscribed(&self) -> RectMesh {
        RectMesh {
            active: self.circumscribed_mask.clone(),
            ..self.full.clone()
        }
    }

    /// True when no element is completely inscribed.
    pub fn is_degenerate(&self) -> bool {
        !self.inscribed_mask.iter().any(|&a| a)
    }
}

/// Splits the elements of a mesh covering `[-1,1]^2` by their position
/// relative to the unit circle.
pub fn classify_ring(mesh: &RectMesh) -> RingMeshPair {
    let full = RectMesh {
        active: vec![true; mesh.n_elements()],
        ..mesh.clone()
    };
    let r2 = |n: usize| {
        let p = full.nodes[n];
        p[0] * p[0] + p[1] * p[1]
    };
    let mut inscribed_mask = Vec::with_capacity(full.n_elements());
    let mut circumscribed_mask = Vec::with_capacity(full.n_elements());
    for nodes in &full.elements {
        let inside = nodes.iter().all(|&n| r2(n) <= 1.0 + INSIDE_TOL);
        let touches = nodes.iter().any(|&n| r2(n) < 1.0 - INSIDE_TOL);
        inscribed_mask.push(inside);
        circumscribed_mask.push(inside || touches);
    }
    let inscribed = RectMesh {
        active: inscribed_mask.clone(),
        ..full.clone()
    };
    let dirichlet_nodes_inscribed = inscribed
        .boundary_node_mask()
        .iter()
        .enumerate()
        .filter_map(|(n, &b)| b.then_some(n))
        .collect();
    RingMeshPair {
        full,
        inscribed_mask,
        circumscribed_mask,
        dirichlet_nodes_inscribed,
    }
}
