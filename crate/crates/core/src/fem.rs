//! Element matrices and global assembly for bilinear (Q1) nodal elements,
//! lowest-order Raviart-Thomas (RT0) edge elements and piecewise constants.
//!
//! Local quantities live on the reference rectangle `[0,hx] x [0,hy]` with
//! the vertex and edge orders documented in [`crate::mesh`]. Every RT0 basis
//! function has unit normal flux through its own edge, measured along the
//! global `+x` / `+y` direction.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{EdgeFluxField, ElementField, NodalField};
use crate::mesh::RectMesh;
use crate::sparse::SparseSymMatrix;

pub type Local4 = [[f64; 4]; 4];

fn check_lengths(hx: f64, hy: f64) -> Result<()> {
    if !(hx > 0.0 && hy > 0.0) || !hx.is_finite() || !hy.is_finite() {
        return Err(Error::Geometry(format!(
            "element lengths must be positive, got hx = {hx}, hy = {hy}"
        )));
    }
    Ok(())
}

/// Q1 stiffness matrix `int grad psi_i . grad psi_j` on an `hx x hy` rectangle.
pub fn local_kbil(hx: f64, hy: f64) -> Result<Local4> {
    check_lengths(hx, hy)?;
    let (a, b) = (hx * hx, hy * hy);
    let d = 2.0 * a + 2.0 * b;
    let p = a - 2.0 * b;
    let q = -a - b;
    let r = -2.0 * a + b;
    let s = 1.0 / (6.0 * hx * hy);
    Ok([
        [d * s, p * s, q * s, r * s],
        [p * s, d * s, r * s, q * s],
        [q * s, r * s, d * s, p * s],
        [r * s, q * s, p * s, d * s],
    ])
}

/// Q1 mass matrix `int psi_i psi_j`.
pub fn local_mbil(hx: f64, hy: f64) -> Result<Local4> {
    check_lengths(hx, hy)?;
    let s = hx * hy / 36.0;
    Ok([
        [4.0 * s, 2.0 * s, s, 2.0 * s],
        [2.0 * s, 4.0 * s, 2.0 * s, s],
        [s, 2.0 * s, 4.0 * s, 2.0 * s],
        [2.0 * s, s, 2.0 * s, 4.0 * s],
    ])
}

/// RT0 divergence-divergence and mass matrices, in that order.
pub fn local_rt0(hx: f64, hy: f64) -> Result<(Local4, Local4)> {
    check_lengths(hx, hy)?;
    let div = rt0_divergence(hx, hy);
    let area = hx * hy;
    let mut k = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            k[i][j] = area * div[i] * div[j];
        }
    }
    let (t, s) = (area / 3.0, area / 6.0);
    let m = [
        [t, 0.0, s, 0.0],
        [0.0, t, 0.0, s],
        [s, 0.0, t, 0.0],
        [0.0, s, 0.0, t],
    ];
    Ok((k, m))
}

/// Constant divergences of the four local RT0 basis functions.
pub fn rt0_divergence(hx: f64, hy: f64) -> [f64; 4] {
    [-1.0 / hy, 1.0 / hx, 1.0 / hy, -1.0 / hx]
}

/// Q1 basis values at local coordinates `(x, y)`.
pub fn bilinear_basis(hx: f64, hy: f64, x: f64, y: f64) -> [f64; 4] {
    let (s, t) = (x / hx, y / hy);
    [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t]
}

/// Q1 basis gradients at local coordinates `(x, y)`.
pub fn bilinear_gradients(hx: f64, hy: f64, x: f64, y: f64) -> [[f64; 2]; 4] {
    let (s, t) = (x / hx, y / hy);
    [
        [-(1.0 - t) / hx, -(1.0 - s) / hy],
        [(1.0 - t) / hx, -s / hy],
        [t / hx, s / hy],
        [-t / hx, (1.0 - s) / hy],
    ]
}

/// RT0 basis vectors at local coordinates `(x, y)`.
pub fn rt0_basis(hx: f64, hy: f64, x: f64, y: f64) -> [[f64; 2]; 4] {
    [
        [0.0, 1.0 - y / hy],
        [x / hx, 0.0],
        [0.0, y / hy],
        [1.0 - x / hx, 0.0],
    ]
}

/// 2x2 Gauss rule on `[0,hx] x [0,hy]`: `(point, weight)`. Exact up to bicubics.
pub fn gauss2x2(hx: f64, hy: f64) -> [([f64; 2], f64); 4] {
    let g = 0.5 / 3f64.sqrt();
    let w = 0.25 * hx * hy;
    let (a, b) = (0.5 - g, 0.5 + g);
    [
        ([a * hx, a * hy], w),
        ([b * hx, a * hy], w),
        ([b * hx, b * hy], w),
        ([a * hx, b * hy], w),
    ]
}

/// 3x3 Gauss rule on `[0,hx] x [0,hy]`.
pub fn gauss3x3(hx: f64, hy: f64) -> [([f64; 2], f64); 9] {
    let g = 0.5 * (0.6f64).sqrt();
    let pts = [0.5 - g, 0.5, 0.5 + g];
    let wts = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
    let mut out = [([0.0; 2], 0.0); 9];
    for j in 0..3 {
        for i in 0..3 {
            out[3 * j + i] = ([pts[i] * hx, pts[j] * hy], wts[i] * wts[j] * hx * hy);
        }
    }
    out
}

/// Global operators assembled from the local matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    /// Q1 stiffness, nodal.
    StiffnessBil,
    /// Q1 mass, nodal.
    MassBil,
    /// RT0 divergence-divergence, edge-based.
    StiffnessRt0,
    /// RT0 mass, edge-based.
    MassRt0,
}

/// Sums local matrices over the active elements of `mesh`. No boundary
/// conditions are applied.
pub fn assemble_global(mesh: &RectMesh, op: Operator) -> SparseSymMatrix {
    let (hx, hy) = (mesh.hx(), mesh.hy());
    let (local, n, dofs): (Local4, usize, &[[usize; 4]]) = match op {
        Operator::StiffnessBil => (local_kbil(hx, hy).unwrap(), mesh.n_nodes(), mesh.elements()),
        Operator::MassBil => (local_mbil(hx, hy).unwrap(), mesh.n_nodes(), mesh.elements()),
        Operator::StiffnessRt0 => (local_rt0(hx, hy).unwrap().0, mesh.n_edges(), mesh.elem_edges()),
        Operator::MassRt0 => (local_rt0(hx, hy).unwrap().1, mesh.n_edges(), mesh.elem_edges()),
    };
    let active: Vec<usize> = mesh.active_elements().collect();
    let triplets: Vec<(usize, usize, f64)> = active
        .par_iter()
        .flat_map_iter(|&e| {
            let d = dofs[e];
            (0..16).filter_map(move |k| {
                let (i, j) = (k / 4, k % 4);
                (local[i][j] != 0.0).then_some((d[i], d[j], local[i][j]))
            })
        })
        .collect();
    SparseSymMatrix::from_triplets(n, &triplets).expect("mesh connectivity is in range")
}

/// Mean of the four vertex values on every element.
pub fn element_average(mesh: &RectMesh, g: &NodalField) -> ElementField {
    ElementField(
        mesh.elements()
            .iter()
            .map(|n| 0.25 * (g[n[0]] + g[n[1]] + g[n[2]] + g[n[3]]))
            .collect(),
    )
}

/// Element averages of the vertex values of a function.
pub fn element_average_fn<F: Fn(f64, f64) -> f64>(mesh: &RectMesh, g: F) -> ElementField {
    element_average(mesh, &mesh.interpolate(g))
}

/// `b_i = int fbar psi_i` over active elements; each Q1 basis function
/// integrates to `hx hy / 4` on an element.
pub fn load_vector(mesh: &RectMesh, fbar: &ElementField) -> Vec<f64> {
    let quarter = 0.25 * mesh.element_area();
    let mut b = vec![0.0; mesh.n_nodes()];
    for e in mesh.active_elements() {
        for &n in &mesh.elements()[e] {
            b[n] += fbar[e] * quarter;
        }
    }
    b
}

/// `b_i = int f psi_i` with 3x3 Gauss quadrature of the exact loading.
pub fn load_vector_quadrature<F: Fn(f64, f64) -> f64>(mesh: &RectMesh, f: F) -> Vec<f64> {
    let (hx, hy) = (mesh.hx(), mesh.hy());
    let rule = gauss3x3(hx, hy);
    let mut b = vec![0.0; mesh.n_nodes()];
    for e in mesh.active_elements() {
        let c = mesh.element_corner(e);
        for &([x, y], w) in &rule {
            let fv = f(c[0] + x, c[1] + y) * w;
            let psi = bilinear_basis(hx, hy, x, y);
            for (k, &n) in mesh.elements()[e].iter().enumerate() {
                b[n] += fv * psi[k];
            }
        }
    }
    b
}

/// Local vector `int grad v . eta_i` on one element from its four nodal values.
pub fn local_gradient_flux(hx: f64, hy: f64, v: [f64; 4]) -> [f64; 4] {
    let dx = (v[1] - v[0]) + (v[2] - v[3]);
    let dy = (v[3] - v[0]) + (v[2] - v[1]);
    let cx = 0.25 * hy * dx;
    let cy = 0.25 * hx * dy;
    [cy, cx, cy, cx]
}

/// Right-hand sides of the flux system: `c_i = int grad v . eta_i` and
/// `d_i = int g div eta_i` for the piecewise constant `g`.
pub fn flux_rhs(mesh: &RectMesh, v: &NodalField, g: &ElementField) -> (Vec<f64>, Vec<f64>) {
    let (hx, hy) = (mesh.hx(), mesh.hy());
    let div = rt0_divergence(hx, hy);
    let area = mesh.element_area();
    let mut c = vec![0.0; mesh.n_edges()];
    let mut d = vec![0.0; mesh.n_edges()];
    for e in mesh.active_elements() {
        let nodes = mesh.elements()[e];
        let local_c = local_gradient_flux(hx, hy, nodes.map(|n| v[n]));
        for (k, &edge) in mesh.elem_edges()[e].iter().enumerate() {
            c[edge] += local_c[k];
            d[edge] += g[e] * area * div[k];
        }
    }
    (c, d)
}

/// Constant divergence of an RT0 field on every element.
pub fn element_divergence(mesh: &RectMesh, y: &EdgeFluxField) -> ElementField {
    let div = rt0_divergence(mesh.hx(), mesh.hy());
    ElementField(
        mesh.elem_edges()
            .iter()
            .map(|k| (0..4).map(|i| div[i] * y[k[i]]).sum())
            .collect(),
    )
}

/// Value of an RT0 field at local coordinates `(x, y)` of element `e`.
pub fn flux_at(mesh: &RectMesh, y: &EdgeFluxField, e: usize, x: f64, yy: f64) -> [f64; 2] {
    let eta = rt0_basis(mesh.hx(), mesh.hy(), x, yy);
    let k = mesh.elem_edges()[e];
    let mut out = [0.0; 2];
    for i in 0..4 {
        out[0] += y[k[i]] * eta[i][0];
        out[1] += y[k[i]] * eta[i][1];
    }
    out
}

/// Gradient of a Q1 field at local coordinates `(x, y)` of element `e`.
pub fn gradient_at(mesh: &RectMesh, v: &NodalField, e: usize, x: f64, y: f64) -> [f64; 2] {
    let g = bilinear_gradients(mesh.hx(), mesh.hy(), x, y);
    let n = mesh.elements()[e];
    let mut out = [0.0; 2];
    for i in 0..4 {
        out[0] += v[n[i]] * g[i][0];
        out[1] += v[n[i]] * g[i][1];
    }
    out
}
