//! Energy-norm errors, the energy gap and the two-sided estimate
//!
//! ```text
//! 1/2 |v - u|_E^2  <=  J(v) - J(u)  <=  M
//! ```
//!
//! The error is a quadratic form of the stiffness matrix on the mesh of `v`
//! or on one of its uniform refinements, where `v` is prolongated and the
//! exact solution interpolated. The twice-refined value is the one reported.

use crate::benchmarks::ExactSolution;
use crate::error::{Error, Result};
use crate::fem::{assemble_global, Operator};
use crate::field::{ElementField, NodalField};
use crate::majorant::{friedrichs_constant, LocalParts, MajorantOptions, MajorantParts, MajorantProblem, MajorantRun};
use crate::mesh::{ProlongationMap, RectMesh, RingMeshPair};
use crate::qp::discrete_energy;

/// Relative slack below which an inequality of the chain counts as violated.
pub const CHAIN_TOL: f64 = 1e-10;

/// A mesh and its two uniform refinements.
#[derive(Debug, Clone)]
pub struct MeshChain {
    levels: [RectMesh; 3],
    maps: [ProlongationMap; 2],
}

impl MeshChain {
    pub fn new(mesh: &RectMesh) -> Self {
        let (l1, m1) = mesh.refine();
        let (l2, m2) = l1.refine();
        Self {
            levels: [mesh.clone(), l1, l2],
            maps: [m1, m2],
        }
    }

    pub fn level(&self, level: usize) -> Result<&RectMesh> {
        self.levels.get(level).ok_or_else(|| missing(level))
    }

    /// Prolongates a field on level 0 to `level`.
    pub fn prolongate(&self, v: &NodalField, level: usize) -> Result<NodalField> {
        if level > 2 {
            return Err(missing(level));
        }
        let mut out = v.clone();
        for map in &self.maps[..level] {
            out = map.prolongate(&out)?;
        }
        Ok(out)
    }
}

fn missing(level: usize) -> Error {
    Error::Parameter(format!("mesh chain has levels 0..=2, asked for {level}"))
}

/// `(P v - I u)^T K (P v - I u)` on the given refinement level, where `P`
/// prolongates and `I` interpolates. Only active elements contribute.
pub fn energy_error_sq<F: Fn(f64, f64) -> f64>(
    chain: &MeshChain,
    v: &NodalField,
    u: F,
    level: usize,
) -> Result<f64> {
    let mesh = chain.level(level)?;
    let fine = chain.prolongate(v, level)?;
    let ui = mesh.interpolate(u);
    let e: Vec<f64> = fine.iter().zip(ui.iter()).map(|(a, b)| a - b).collect();
    let k = assemble_global(mesh, Operator::StiffnessBil);
    k.quad_form(&e, &e)
}

/// All three error levels.
pub fn energy_errors<F: Fn(f64, f64) -> f64>(chain: &MeshChain, v: &NodalField, u: F) -> Result<[f64; 3]> {
    Ok([
        energy_error_sq(chain, v, &u, 0)?,
        energy_error_sq(chain, v, &u, 1)?,
        energy_error_sq(chain, v, &u, 2)?,
    ])
}

/// Quantities entering the estimate for one benchmark and mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainInputs {
    pub benchmark: String,
    pub h: f64,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub err2: [f64; 3],
    pub j_v: f64,
    pub j_u: f64,
    pub parts: MajorantParts,
    pub majorant: f64,
    pub beta: f64,
    pub iterations: usize,
    pub contact_radius: Option<f64>,
    pub zero_extension_gap: Option<f64>,
}

/// One row of the convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct MajorantReport {
    pub benchmark: String,
    pub h: f64,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub err2: [f64; 3],
    pub j_v: f64,
    pub j_u: f64,
    pub energy_gap: f64,
    pub majorant: f64,
    pub parts: MajorantParts,
    pub beta: f64,
    pub iterations: usize,
    /// `M / (J(v) - J(u))`.
    pub ieff: f64,
    /// `(J(v) - J(u) - err2_l2 / 2) / |M|`.
    pub lower_slack: f64,
    /// `(M - (J(v) - J(u))) / |M|`.
    pub upper_slack: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    pub chain_ok: bool,
    /// Set when the mesh has no inscribed element; no chain is evaluated.
    pub degenerate: bool,
    pub contact_radius: Option<f64>,
    /// `|J(v_in) - J(v_out)|` for ring runs.
    pub zero_extension_gap: Option<f64>,
}

/// Records both inequalities of the chain with their relative slacks.
/// Violations are recorded, not raised.
pub fn estimate_chain(inp: ChainInputs) -> MajorantReport {
    let gap = inp.j_v - inp.j_u;
    let scale = inp.majorant.abs().max(gap.abs()).max(f64::MIN_POSITIVE);
    let lower_slack = (gap - 0.5 * inp.err2[2]) / scale;
    let upper_slack = (inp.majorant - gap) / scale;
    let lower_ok = lower_slack >= -CHAIN_TOL;
    let upper_ok = upper_slack >= -CHAIN_TOL;
    MajorantReport {
        benchmark: inp.benchmark,
        h: inp.h,
        n_nodes: inp.n_nodes,
        n_edges: inp.n_edges,
        err2: inp.err2,
        j_v: inp.j_v,
        j_u: inp.j_u,
        energy_gap: gap,
        majorant: inp.majorant,
        parts: inp.parts,
        beta: inp.beta,
        iterations: inp.iterations,
        ieff: inp.majorant / gap,
        lower_slack,
        upper_slack,
        lower_ok,
        upper_ok,
        chain_ok: lower_ok && upper_ok,
        degenerate: false,
        contact_radius: inp.contact_radius,
        zero_extension_gap: inp.zero_extension_gap,
    }
}

/// Report for a mesh on which nothing can be evaluated.
pub fn degenerate_report(benchmark: &str, h: f64, contact_radius: Option<f64>) -> MajorantReport {
    MajorantReport {
        benchmark: benchmark.to_string(),
        h,
        n_nodes: 0,
        n_edges: 0,
        err2: [f64::NAN; 3],
        j_v: f64::NAN,
        j_u: f64::NAN,
        energy_gap: f64::NAN,
        majorant: f64::NAN,
        parts: MajorantParts {
            p1: f64::NAN,
            p2: f64::NAN,
            p3: f64::NAN,
        },
        beta: f64::NAN,
        iterations: 0,
        ieff: f64::NAN,
        lower_slack: f64::NAN,
        upper_slack: f64::NAN,
        lower_ok: false,
        upper_ok: false,
        chain_ok: false,
        degenerate: true,
        contact_radius,
        zero_extension_gap: None,
    }
}

/// Energies of `v` on the inscribed and on the circumscribed rectangulation.
/// `v` must vanish on the boundary of the inscribed part and outside it.
pub fn zero_extension_energies(
    pair: &RingMeshPair,
    v: &NodalField,
    b_inscribed: &[f64],
    b_circumscribed: &[f64],
) -> Result<(f64, f64)> {
    let inscribed = pair.inscribed();
    let inside = inscribed.node_mask();
    let mut trace = pair
        .dirichlet_nodes_inscribed
        .iter()
        .map(|&n| v[n].abs())
        .fold(0.0, f64::max);
    for (n, &is_in) in inside.iter().enumerate() {
        if !is_in {
            trace = trace.max(v[n].abs());
        }
    }
    if trace > 0.0 {
        return Err(Error::NonzeroTrace(trace));
    }
    let k_in = assemble_global(&inscribed, Operator::StiffnessBil);
    let k_out = assemble_global(&pair.circumscribed(), Operator::StiffnessBil);
    Ok((
        discrete_energy(&k_in, b_inscribed, v)?,
        discrete_energy(&k_out, b_circumscribed, v)?,
    ))
}

/// Data for the estimate on a disk benchmark.
#[derive(Debug, Clone, Copy)]
pub struct RingChainInputs<'a> {
    pub pair: &'a RingMeshPair,
    pub h: f64,
    /// Discrete solution on the inscribed rectangulation, zero elsewhere.
    pub v: &'a NodalField,
    pub exact: &'a ExactSolution,
    /// Load vectors on the inscribed and circumscribed rectangulations.
    pub b_inscribed: &'a [f64],
    pub b_circumscribed: &'a [f64],
    /// Averaged loading on all elements.
    pub fbar: &'a ElementField,
    /// Obstacle at all nodes.
    pub phi: &'a NodalField,
    pub mu0: &'a ElementField,
    pub options: &'a MajorantOptions,
}

#[derive(Debug, Clone)]
pub struct RingEvaluation {
    pub report: MajorantReport,
    pub run: Option<MajorantRun>,
    pub local: Option<LocalParts>,
}

/// Estimate on a disk benchmark: `v` lives on the inscribed rectangulation,
/// is extended by zero to the circumscribed one, where the majorant is
/// computed; the error is measured on the inscribed elements.
pub fn ring_estimate_chain(inp: RingChainInputs<'_>) -> Result<RingEvaluation> {
    let id = inp.exact.spec().id();
    if inp.pair.is_degenerate() {
        return Ok(RingEvaluation {
            report: degenerate_report(id, inp.h, inp.exact.contact_radius()),
            run: None,
            local: None,
        });
    }
    let (j_in, j_out) =
        zero_extension_energies(inp.pair, inp.v, inp.b_inscribed, inp.b_circumscribed)?;

    let circ = inp.pair.circumscribed();
    let c_omega = friedrichs_constant(inp.exact.spec().domain());
    let problem = MajorantProblem::new(&circ, inp.v, inp.fbar, inp.phi, c_omega)?;
    let run = problem.run(inp.mu0, inp.options)?;
    let local = problem.local_parts(&run.state.tau, &run.state.mu);

    let inscribed = inp.pair.inscribed();
    let chain = MeshChain::new(&inscribed);
    let exact = inp.exact;
    let err2 = energy_errors(&chain, inp.v, |x, y| exact.u(x, y))?;

    let report = estimate_chain(ChainInputs {
        benchmark: id.to_string(),
        h: inp.h,
        n_nodes: inscribed.node_mask().iter().filter(|&&a| a).count(),
        n_edges: circ.edge_mask().iter().filter(|&&a| a).count(),
        err2,
        j_v: j_in,
        j_u: exact.energy(),
        parts: run.state.parts,
        majorant: run.state.total,
        beta: run.state.beta,
        iterations: run.iterations,
        contact_radius: exact.contact_radius(),
        zero_extension_gap: Some((j_in - j_out).abs()),
    });
    Ok(RingEvaluation {
        report,
        run: Some(run),
        local: Some(local),
    })
}
