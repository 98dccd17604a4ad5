//! One benchmark on one mesh, end to end: discrete obstacle problem,
//! multiplier recovery, majorant minimization and the error estimate.

use rayon::prelude::*;

use crate::benchmarks::{BenchmarkSpec, Domain, ExactSolution};
use crate::error::Result;
use crate::error_metrics::{
    energy_errors, estimate_chain, ring_estimate_chain, ChainInputs, MajorantReport, MeshChain,
    RingChainInputs,
};
use crate::fem::{assemble_global, element_average_fn, load_vector, load_vector_quadrature, Operator};
use crate::field::{EdgeFluxField, ElementField, NodalField};
use crate::majorant::{friedrichs_constant, LocalParts, MajorantOptions, MajorantProblem, MajorantTraceRow};
use crate::mesh::{classify_ring, BoundingBox, RectMesh};
use crate::qp::{discrete_energy, recover_mu0, solve_obstacle_qp, PsorOptions, PsorTraceRow, QpProblem, QpSolution};

/// How the load vector of the discrete problem is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LoadRule {
    /// Element averages of the four vertex values of `f`.
    #[default]
    Averaged,
    /// 3x3 Gauss quadrature of the exact `f`.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RunOptions {
    pub psor: PsorOptions,
    pub majorant: MajorantOptions,
    pub load: LoadRule,
}

/// Everything computed for one benchmark on one mesh.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: MajorantReport,
    pub exact: ExactSolution,
    /// Full mesh on `[-1,1]^2` with every element active.
    pub mesh: RectMesh,
    /// Elements on which `v` was computed.
    pub solve_mask: Vec<bool>,
    /// Elements on which the majorant was computed.
    pub majorant_mask: Vec<bool>,
    pub v: NodalField,
    pub mu0: ElementField,
    pub mu: ElementField,
    pub tau: EdgeFluxField,
    pub local: LocalParts,
    pub beta: f64,
    pub psor_trace: Vec<PsorTraceRow>,
    pub majorant_trace: Vec<MajorantTraceRow>,
}

pub fn load_for(mesh: &RectMesh, exact: &ExactSolution, rule: LoadRule) -> Vec<f64> {
    match rule {
        LoadRule::Averaged => {
            load_vector(mesh, &element_average_fn(mesh, |x, y| exact.load(x, y)))
        }
        LoadRule::Quadrature => load_vector_quadrature(mesh, |x, y| exact.load(x, y)),
    }
}

fn solve(mesh: &RectMesh, b: Vec<f64>, phi: &NodalField, dirichlet: &[(usize, f64)], psor: &PsorOptions) -> Result<QpSolution> {
    let k = assemble_global(mesh, Operator::StiffnessBil);
    let p = QpProblem::new(k, b, phi.to_vec(), dirichlet)?;
    solve_obstacle_qp(&p, psor)
}

/// Runs `spec` on the uniform mesh of size `h` over `[-1,1]^2`.
pub fn run_benchmark(spec: &BenchmarkSpec, h: f64, opts: &RunOptions) -> Result<RunOutput> {
    let exact = spec.exact()?;
    let full = RectMesh::uniform(BoundingBox::reference_square(), h)?;
    let phi = full.interpolate(|x, y| exact.obstacle(x, y));
    let fbar = element_average_fn(&full, |x, y| exact.load(x, y));
    match spec.domain() {
        Domain::Square => run_square(&exact, full, h, &phi, &fbar, opts),
        Domain::UnitDisk => run_ring(&exact, full, h, &phi, &fbar, opts),
    }
}

fn run_square(
    exact: &ExactSolution,
    mesh: RectMesh,
    h: f64,
    phi: &NodalField,
    fbar: &ElementField,
    opts: &RunOptions,
) -> Result<RunOutput> {
    let dirichlet: Vec<(usize, f64)> = mesh
        .boundary_node_mask()
        .iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(n, _)| {
            let [x, y] = mesh.nodes()[n];
            (n, exact.u(x, y))
        })
        .collect();
    let b = load_for(&mesh, exact, opts.load);
    let sol = solve(&mesh, b.clone(), phi, &dirichlet, &opts.psor)?;
    let k = assemble_global(&mesh, Operator::StiffnessBil);
    let j_v = discrete_energy(&k, &b, &sol.v)?;
    let mu0 = recover_mu0(&sol, &mesh);

    let c_omega = friedrichs_constant(Domain::Square);
    let problem = MajorantProblem::new(&mesh, &sol.v, fbar, phi, c_omega)?;
    let run = problem.run(&mu0, &opts.majorant)?;
    let local = problem.local_parts(&run.state.tau, &run.state.mu);

    let chain = MeshChain::new(&mesh);
    let err2 = energy_errors(&chain, &sol.v, |x, y| exact.u(x, y))?;
    let report = estimate_chain(ChainInputs {
        benchmark: exact.spec().id().to_string(),
        h,
        n_nodes: mesh.n_nodes(),
        n_edges: mesh.n_edges(),
        err2,
        j_v,
        j_u: exact.energy(),
        parts: run.state.parts,
        majorant: run.state.total,
        beta: run.state.beta,
        iterations: run.iterations,
        contact_radius: exact.contact_radius(),
        zero_extension_gap: None,
    });
    Ok(RunOutput {
        report,
        exact: *exact,
        solve_mask: mesh.active().to_vec(),
        majorant_mask: mesh.active().to_vec(),
        mesh,
        v: sol.v,
        mu0,
        mu: run.state.mu,
        tau: run.state.tau,
        local,
        beta: run.state.beta,
        psor_trace: sol.trace,
        majorant_trace: run.trace,
    })
}

fn run_ring(
    exact: &ExactSolution,
    full: RectMesh,
    h: f64,
    phi: &NodalField,
    fbar: &ElementField,
    opts: &RunOptions,
) -> Result<RunOutput> {
    let pair = classify_ring(&full);
    let inscribed = pair.inscribed();
    let circumscribed = pair.circumscribed();
    let b_in = load_for(&inscribed, exact, opts.load);
    let b_out = load_for(&circumscribed, exact, opts.load);

    let (v, mu0, psor_trace) = if pair.is_degenerate() {
        let n = full.n_nodes();
        (NodalField::zeros(n), ElementField::zeros(full.n_elements()), Vec::new())
    } else {
        let inside = inscribed.node_mask();
        let mut fixed = vec![false; full.n_nodes()];
        for &n in &pair.dirichlet_nodes_inscribed {
            fixed[n] = true;
        }
        let dirichlet: Vec<(usize, f64)> = (0..full.n_nodes())
            .filter(|&n| fixed[n] || !inside[n])
            .map(|n| (n, 0.0))
            .collect();
        let sol = solve(&inscribed, b_in.clone(), phi, &dirichlet, &opts.psor)?;
        let mu0 = recover_mu0(&sol, &inscribed);
        (sol.v, mu0, sol.trace)
    };

    let eval = ring_estimate_chain(RingChainInputs {
        pair: &pair,
        h,
        v: &v,
        exact,
        b_inscribed: &b_in,
        b_circumscribed: &b_out,
        fbar,
        phi,
        mu0: &mu0,
        options: &opts.majorant,
    })?;
    let (mu, tau, beta, trace) = match eval.run {
        Some(run) => (run.state.mu, run.state.tau, run.state.beta, run.trace),
        None => (
            ElementField::zeros(full.n_elements()),
            EdgeFluxField::zeros(full.n_edges()),
            f64::NAN,
            Vec::new(),
        ),
    };
    let local = eval.local.unwrap_or_else(|| LocalParts {
        p1: ElementField::zeros(full.n_elements()),
        p2: ElementField::zeros(full.n_elements()),
        p3: ElementField::zeros(full.n_elements()),
    });
    Ok(RunOutput {
        report: eval.report,
        exact: *exact,
        solve_mask: pair.inscribed_mask.clone(),
        majorant_mask: pair.circumscribed_mask.clone(),
        mesh: full,
        v,
        mu0,
        mu,
        tau,
        local,
        beta,
        psor_trace,
        majorant_trace: trace,
    })
}

/// Runs every `(spec, h)` pair in parallel; results keep the input order.
pub fn run_grid(cases: &[(BenchmarkSpec, f64)], opts: &RunOptions) -> Vec<Result<RunOutput>> {
    cases
        .par_iter()
        .map(|(spec, h)| run_benchmark(spec, *h, opts))
        .collect()
}

/// `h = 1/2, 1/4, ..., 1/2^levels`.
pub fn dyadic_levels(levels: u32) -> Vec<f64> {
    (1..=levels).map(|k| 0.5f64.powi(k as i32)).collect()
}
