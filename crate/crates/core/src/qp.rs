//! Discrete obstacle problem:
//!
//! ```text
//! minimize 1/2 w^T K w - b^T w   subject to   w_i >= phi_i (free nodes),  w_j = u_j (fixed nodes)
//! ```
//!
//! solved by projected successive over-relaxation, plus recovery of a
//! piecewise-constant multiplier from the nodal KKT residual.

use crate::error::{Error, Result};
use crate::field::{ElementField, NodalField};
use crate::mesh::RectMesh;
use crate::sparse::{cg_solve, CgOptions, SparseSymMatrix};

/// Bound-constrained quadratic program on nodal unknowns.
#[derive(Debug, Clone)]
pub struct QpProblem {
    k: SparseSymMatrix,
    b: Vec<f64>,
    lower: Vec<f64>,
    fixed: Vec<Option<f64>>,
}

impl QpProblem {
    /// `lower` is read at free nodes only; `dirichlet` lists `(node, value)` pairs.
    pub fn new(
        k: SparseSymMatrix,
        b: Vec<f64>,
        lower: Vec<f64>,
        dirichlet: &[(usize, f64)],
    ) -> Result<Self> {
        let n = k.dim();
        for len in [b.len(), lower.len()] {
            if len != n {
                return Err(Error::SizeMismatch { expected: n, got: len });
            }
        }
        let mut fixed = vec![None; n];
        for &(i, v) in dirichlet {
            if i >= n {
                return Err(Error::IndexOutOfRange { row: i, col: i, n });
            }
            fixed[i] = Some(v);
        }
        for i in 0..n {
            if fixed[i].is_none() {
                if !lower[i].is_finite() {
                    return Err(Error::Parameter(format!("non-finite bound at node {i}")));
                }
                if !(k.get(i, i) > 0.0) {
                    return Err(Error::Parameter(format!(
                        "free node {i} has no positive stiffness"
                    )));
                }
            }
        }
        Ok(Self { k, b, lower, fixed })
    }

    pub fn stiffness(&self) -> &SparseSymMatrix {
        &self.k
    }

    pub fn load(&self) -> &[f64] {
        &self.b
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn dim(&self) -> usize {
        self.k.dim()
    }

    pub fn is_free(&self, i: usize) -> bool {
        self.fixed[i].is_none()
    }

    pub fn free_nodes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.is_free(i)).collect()
    }

    /// Fixed values on Dirichlet nodes, zero elsewhere.
    fn fixed_vector(&self) -> Vec<f64> {
        self.fixed.iter().map(|f| f.unwrap_or(0.0)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsorOptions {
    /// Relaxation factor in `(0, 2)`.
    pub omega: f64,
    /// Bound on the projected-residual measure.
    pub tol: f64,
    pub max_sweeps: usize,
    /// Keep a per-sweep energy trace.
    pub record_trace: bool,
}

impl Default for PsorOptions {
    fn default() -> Self {
        Self {
            omega: 1.5,
            tol: 1e-10,
            max_sweeps: 1_000_000,
            record_trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsorTraceRow {
    pub sweep: usize,
    pub energy: f64,
    pub measure: f64,
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub v: NodalField,
    /// Free nodes sitting on their bound.
    pub active_set: Vec<bool>,
    /// `K v - b` on free nodes, zero on fixed nodes.
    pub nodal_multiplier: Vec<f64>,
    pub sweeps: usize,
    /// Final projected-residual measure.
    pub measure: f64,
    pub trace: Vec<PsorTraceRow>,
}

/// Discrete energy `1/2 v^T K v - b^T v`.
pub fn discrete_energy(k: &SparseSymMatrix, b: &[f64], v: &[f64]) -> Result<f64> {
    if b.len() != v.len() {
        return Err(Error::SizeMismatch {
            expected: v.len(),
            got: b.len(),
        });
    }
    let bv: f64 = b.iter().zip(v).map(|(p, q)| p * q).sum();
    Ok(0.5 * k.quad_form(v, v)? - bv)
}

/// `max_i |v_i - max(phi_i, v_i - r_i / K_ii)|` over free nodes, `r = K v - b`.
pub fn projected_residual(p: &QpProblem, v: &[f64]) -> f64 {
    let r = p.k.mul_vec(v).expect("sizes checked at construction");
    (0..p.dim())
        .filter(|&i| p.is_free(i))
        .map(|i| {
            let kii = p.k.get(i, i);
            let step = (v[i] - (r[i] - p.b[i]) / kii).max(p.lower[i]);
            (v[i] - step).abs()
        })
        .fold(0.0, f64::max)
}

fn warm_start(p: &QpProblem, free: &[usize]) -> Result<Vec<f64>> {
    let mut v = p.fixed_vector();
    if free.is_empty() {
        return Ok(v);
    }
    // rhs = b_f - K_fd u_d
    let kv = p.k.mul_vec(&v)?;
    let rhs: Vec<f64> = free.iter().map(|&i| p.b[i] - kv[i]).collect();
    let kff = p.k.restrict(free);
    let sol = cg_solve(&kff, &rhs, None, CgOptions::default())?;
    for (&i, x) in free.iter().zip(sol.x) {
        v[i] = x.max(p.lower[i]);
    }
    Ok(v)
}

/// Projected SOR, warm-started from the clipped unconstrained minimizer.
pub fn solve_obstacle_qp(p: &QpProblem, opts: &PsorOptions) -> Result<QpSolution> {
    if !(opts.omega > 0.0 && opts.omega < 2.0) {
        return Err(Error::Parameter(format!(
            "relaxation factor must lie in (0, 2), got {}",
            opts.omega
        )));
    }
    let free = p.free_nodes();
    let mut v = warm_start(p, &free)?;
    let diag: Vec<f64> = free.iter().map(|&i| p.k.get(i, i)).collect();

    let mut energy = if opts.record_trace {
        discrete_energy(&p.k, &p.b, &v)?
    } else {
        0.0
    };
    let mut trace = Vec::new();
    let mut measure = projected_residual(p, &v);
    let mut sweeps = 0;
    if opts.record_trace {
        trace.push(PsorTraceRow {
            sweep: 0,
            energy,
            measure,
        });
    }
    while measure > opts.tol {
        if sweeps >= opts.max_sweeps {
            return Err(Error::PsorNotConverged { sweeps, measure });
        }
        let mut sweep_measure = 0.0f64;
        for (&i, &kii) in free.iter().zip(&diag) {
            let (cols, vals) = p.k.row(i);
            let r: f64 = cols.iter().zip(vals).map(|(&j, &a)| a * v[j]).sum::<f64>() - p.b[i];
            let gs = (v[i] - r / kii).max(p.lower[i]);
            sweep_measure = sweep_measure.max((v[i] - gs).abs());
            let new = (v[i] - opts.omega * r / kii).max(p.lower[i]);
            let t = new - v[i];
            if opts.record_trace {
                energy += 0.5 * kii * t * t + r * t;
            }
            v[i] = new;
        }
        sweeps += 1;
        measure = if sweep_measure <= opts.tol {
            projected_residual(p, &v)
        } else {
            sweep_measure
        };
        if opts.record_trace {
            trace.push(PsorTraceRow {
                sweep: sweeps,
                energy,
                measure,
            });
        }
    }

    let kv = p.k.mul_vec(&v)?;
    let mut active_set = vec![false; p.dim()];
    let mut nodal_multiplier = vec![0.0; p.dim()];
    for &i in &free {
        active_set[i] = v[i] <= p.lower[i];
        nodal_multiplier[i] = kv[i] - p.b[i];
    }
    Ok(QpSolution {
        v: NodalField(v),
        active_set,
        nodal_multiplier,
        sweeps,
        measure,
        trace,
    })
}

/// Violations of the discrete KKT conditions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KktResiduals {
    /// `max (phi_i - v_i)^+` over free nodes.
    pub primal: f64,
    /// `max (-lambda_i)^+` over active free nodes.
    pub dual: f64,
    /// `max |lambda_i (v_i - phi_i)|` over free nodes.
    pub complementarity: f64,
    /// `max |(K v - b)_i|` over inactive free nodes.
    pub stationarity: f64,
}

pub fn kkt_residuals(p: &QpProblem, sol: &QpSolution) -> KktResiduals {
    let mut out = KktResiduals {
        primal: 0.0,
        dual: 0.0,
        complementarity: 0.0,
        stationarity: 0.0,
    };
    for i in p.free_nodes() {
        let gap = sol.v[i] - p.lower[i];
        let lam = sol.nodal_multiplier[i];
        out.primal = out.primal.max(-gap);
        out.complementarity = out.complementarity.max((lam * gap).abs());
        if sol.active_set[i] {
            out.dual = out.dual.max(-lam);
        } else {
            out.stationarity = out.stationarity.max(lam.abs());
        }
    }
    out
}

/// Piecewise-constant multiplier from the nodal KKT residual.
///
/// Each nodal value is divided by the lumped mass of its node (`hx hy / 4`
/// per incident active element); an element takes the positive part of the
/// mean of its four vertex values. Nodes off the active set count as zero,
/// so round-off in the stationarity residual never leaks into the
/// multiplier. Inactive elements get zero.
pub fn recover_mu0(sol: &QpSolution, mesh: &RectMesh) -> ElementField {
    let quarter = 0.25 * mesh.element_area();
    let mut lumped = vec![0.0; mesh.n_nodes()];
    for e in mesh.active_elements() {
        for &n in &mesh.elements()[e] {
            lumped[n] += quarter;
        }
    }
    let pointwise: Vec<f64> = sol
        .nodal_multiplier
        .iter()
        .zip(&lumped)
        .zip(&sol.active_set)
        .map(|((&l, &m), &on_bound)| if on_bound && m > 0.0 { l / m } else { 0.0 })
        .collect();
    let mut mu = ElementField::zeros(mesh.n_elements());
    for e in mesh.active_elements() {
        let n = mesh.elements()[e];
        let mean = 0.25 * n.iter().map(|&i| pointwise[i]).sum::<f64>();
        mu[e] = mean.max(0.0);
    }
    mu
}
