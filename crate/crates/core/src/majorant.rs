//! Functional majorant of the energy gap and its minimization.
//!
//! For any `v` vanishing on the boundary, any flux `tau` in `H(div)`, any
//! `mu >= 0` and any `beta > 0`,
//!
//! ```text
//! J(v) - J(u) <= M = (1+beta)/2 P1 + (1+1/beta)/2 C^2 P2 + P3
//!   P1 = |grad v - tau|^2,  P2 = |div tau + f + mu|^2,  P3 = int mu (v - phi)
//! ```
//!
//! with `C` the Friedrichs constant of the domain. The free parameters are
//! chosen by block-coordinate descent: flux (lowest-order Raviart-Thomas),
//! then multiplier (piecewise constant), then `beta`.
//!
//! `P3` is integrated with the bilinear interpolant of the obstacle, so that
//! the multiplier update is the exact minimizer. For obstacles that are
//! concave or bilinear per element this never underestimates the true term.

use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;

use crate::benchmarks::Domain;
use crate::error::{Error, Result};
use crate::fem::{
    assemble_global, element_average, element_divergence, flux_at, flux_rhs, gauss2x2,
    gradient_at, Operator,
};
use crate::field::{EdgeFluxField, ElementField, NodalField};
use crate::mesh::RectMesh;
use crate::sparse::{cg_solve, CgOptions, SparseSymMatrix};

pub const BETA_MIN: f64 = 1e-8;
pub const BETA_MAX: f64 = 1e8;

/// Friedrichs constant used for each benchmark domain.
///
/// The disk benchmarks use the constant of the bounding square `(-1,1)^2`:
/// zero extension embeds every admissible field of a ring rectangulation
/// into that square.
pub fn friedrichs_constant(domain: Domain) -> f64 {
    match domain {
        Domain::Square | Domain::UnitDisk => SQRT_2 / PI,
    }
}

/// `1 / sqrt(lambda_1)` for the Dirichlet Laplacian on a `w x h` rectangle.
pub fn friedrichs_constant_rect(w: f64, h: f64) -> Result<f64> {
    if !(w > 0.0 && h > 0.0) {
        return Err(Error::Geometry(format!("rectangle {w} x {h} has no interior")));
    }
    Ok(1.0 / (PI * (1.0 / (w * w) + 1.0 / (h * h)).sqrt()))
}

/// How `beta` is updated from the current parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BetaRule {
    /// `beta = C sqrt(P2) / sqrt(P1)`, the exact minimizer over `beta`.
    #[default]
    Balanced,
    /// `beta = sqrt(P2) / sqrt(P1)`, without the Friedrichs constant.
    Unweighted,
    /// `beta` stays at its initial value.
    Fixed,
}

/// Which linear system the flux step solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FluxSystem {
    /// `[(1+b) M + (1+1/b) C^2 K] y = (1+b) c - (1+1/b) C^2 d`, the exact
    /// minimizer of the majorant over the flux space.
    #[default]
    Weighted,
    /// The same system with `C^2` dropped.
    Unweighted,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantOptions {
    pub n_iter: usize,
    pub beta0: f64,
    pub beta_rule: BetaRule,
    pub flux_system: FluxSystem,
    pub cg: CgOptions,
    /// Stop early once a full iteration lowers the total by less than this
    /// fraction.
    pub rel_decrease: Option<f64>,
}

impl Default for MajorantOptions {
    fn default() -> Self {
        Self {
            n_iter: 2,
            beta0: 1.0,
            beta_rule: BetaRule::default(),
            flux_system: FluxSystem::default(),
            cg: CgOptions::default(),
            rel_decrease: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MajorantParts {
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
}

impl MajorantParts {
    /// `(1+beta)/2 P1 + (1+1/beta)/2 C^2 P2 + P3`.
    pub fn total(&self, beta: f64, c_omega: f64) -> f64 {
        0.5 * (1.0 + beta) * self.p1
            + 0.5 * (1.0 + 1.0 / beta) * c_omega * c_omega * self.p2
            + self.p3
    }
}

/// Element-wise contributions to the three parts.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalParts {
    pub p1: ElementField,
    pub p2: ElementField,
    pub p3: ElementField,
}

impl LocalParts {
    pub fn sum(&self) -> MajorantParts {
        MajorantParts {
            p1: self.p1.iter().sum(),
            p2: self.p2.iter().sum(),
            p3: self.p3.iter().sum(),
        }
    }

    /// Local majorant `(1+beta)/2 P1_T + (1+1/beta)/2 C^2 P2_T + P3_T`.
    pub fn combined(&self, beta: f64, c_omega: f64) -> ElementField {
        ElementField(
            (0..self.p1.len())
                .map(|e| {
                    MajorantParts {
                        p1: self.p1[e],
                        p2: self.p2[e],
                        p3: self.p3[e],
                    }
                    .total(beta, c_omega)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorantState {
    pub beta: f64,
    pub mu: ElementField,
    pub tau: EdgeFluxField,
    pub parts: MajorantParts,
    pub total: f64,
    pub c_omega: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Init,
    Flux,
    Multiplier,
    Beta,
}

impl Step {
    pub fn name(self) -> &'static str {
        match self {
            Step::Init => "init",
            Step::Flux => "flux",
            Step::Multiplier => "multiplier",
            Step::Beta => "beta",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MajorantTraceRow {
    pub iter: usize,
    pub step: Step,
    pub beta: f64,
    pub parts: MajorantParts,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MajorantRun {
    pub state: MajorantState,
    pub trace: Vec<MajorantTraceRow>,
    pub iterations: usize,
}

/// New `beta` from `P1` and the unweighted `P2`, clamped to
/// `[BETA_MIN, BETA_MAX]`.
pub fn beta_step(p1: f64, p2: f64, c_omega: f64, rule: BetaRule) -> Result<f64> {
    if p1 <= 0.0 {
        return Err(Error::FluxEqualsGradient { p2 });
    }
    let scale = match rule {
        BetaRule::Balanced => c_omega,
        BetaRule::Unweighted => 1.0,
        BetaRule::Fixed => return Err(Error::Parameter("beta is fixed".into())),
    };
    Ok((scale * p2.max(0.0).sqrt() / p1.sqrt()).clamp(BETA_MIN, BETA_MAX))
}

/// Fixed data of the majorant for one discrete solution: mesh, `v`,
/// averaged loading, obstacle and the flux-space operators.
#[derive(Debug, Clone)]
pub struct MajorantProblem<'a> {
    mesh: &'a RectMesh,
    v: &'a NodalField,
    fbar: &'a ElementField,
    vbar: ElementField,
    phibar: ElementField,
    c_omega: f64,
    edges: Vec<usize>,
    mass: SparseSymMatrix,
    divdiv: SparseSymMatrix,
    c: Vec<f64>,
}

impl<'a> MajorantProblem<'a> {
    /// The majorant lives on the active elements of `mesh`; `phi` holds the
    /// obstacle at the nodes.
    pub fn new(
        mesh: &'a RectMesh,
        v: &'a NodalField,
        fbar: &'a ElementField,
        phi: &NodalField,
        c_omega: f64,
    ) -> Result<Self> {
        for (len, expected) in [
            (v.len(), mesh.n_nodes()),
            (phi.len(), mesh.n_nodes()),
            (fbar.len(), mesh.n_elements()),
        ] {
            if len != expected {
                return Err(Error::SizeMismatch { expected, got: len });
            }
        }
        if !(c_omega > 0.0) {
            return Err(Error::Parameter(format!(
                "Friedrichs constant must be positive, got {c_omega}"
            )));
        }
        let edges: Vec<usize> = mesh
            .edge_mask()
            .iter()
            .enumerate()
            .filter_map(|(i, &a)| a.then_some(i))
            .collect();
        let mass = assemble_global(mesh, Operator::MassRt0).restrict(&edges);
        let divdiv = assemble_global(mesh, Operator::StiffnessRt0).restrict(&edges);
        let (c_full, _) = flux_rhs(mesh, v, &ElementField::zeros(mesh.n_elements()));
        let c = edges.iter().map(|&i| c_full[i]).collect();
        Ok(Self {
            mesh,
            v,
            fbar,
            vbar: element_average(mesh, v),
            phibar: element_average(mesh, phi),
            c_omega,
            edges,
            mass,
            divdiv,
            c,
        })
    }

    pub fn c_omega(&self) -> f64 {
        self.c_omega
    }

    pub fn mesh(&self) -> &RectMesh {
        self.mesh
    }

    /// Minimizes over the flux for fixed `beta` and `mu`. `warm` seeds CG.
    pub fn flux_step(
        &self,
        beta: f64,
        mu: &ElementField,
        system: FluxSystem,
        cg: CgOptions,
        warm: Option<&EdgeFluxField>,
    ) -> Result<EdgeFluxField> {
        check_beta(beta)?;
        let weight = match system {
            FluxSystem::Weighted => self.c_omega * self.c_omega,
            FluxSystem::Unweighted => 1.0,
        };
        let a = 1.0 + beta;
        let b = (1.0 + 1.0 / beta) * weight;
        let g = self.shifted_load(mu);
        let (_, d_full) = flux_rhs(self.mesh, self.v, &g);
        let rhs: Vec<f64> = self
            .edges
            .iter()
            .zip(&self.c)
            .map(|(&i, &ci)| a * ci - b * d_full[i])
            .collect();
        let matrix = self.mass.linear_combination(a, &self.divdiv, b)?;
        let x0: Option<Vec<f64>> = warm.map(|w| self.edges.iter().map(|&i| w[i]).collect());
        let sol = cg_solve(&matrix, &rhs, x0.as_deref(), cg)?;
        let mut tau = EdgeFluxField::zeros(self.mesh.n_edges());
        for (&i, y) in self.edges.iter().zip(sol.x) {
            tau[i] = y;
        }
        Ok(tau)
    }

    /// Minimizes over nonnegative piecewise-constant multipliers:
    /// `mu = [-div tau - fbar - (vbar - phibar) / (C^2 (1 + 1/beta))]^+`.
    pub fn multiplier_step(&self, beta: f64, tau: &EdgeFluxField) -> Result<ElementField> {
        check_beta(beta)?;
        let div = element_divergence(self.mesh, tau);
        let denom = self.c_omega * self.c_omega * (1.0 + 1.0 / beta);
        let mut mu = ElementField::zeros(self.mesh.n_elements());
        for e in self.mesh.active_elements() {
            let gap = self.vbar[e] - self.phibar[e];
            mu[e] = (-div[e] - self.fbar[e] - gap / denom).max(0.0);
        }
        Ok(mu)
    }

    /// Element contributions to `P1`, `P2`, `P3`; zero on inactive elements.
    pub fn local_parts(&self, tau: &EdgeFluxField, mu: &ElementField) -> LocalParts {
        let mesh = self.mesh;
        let area = mesh.element_area();
        let rule = gauss2x2(mesh.hx(), mesh.hy());
        let div = element_divergence(mesh, tau);
        let active = mesh.active();
        let per_element: Vec<(f64, f64, f64)> = (0..mesh.n_elements())
            .into_par_iter()
            .map(|e| {
                if !active[e] {
                    return (0.0, 0.0, 0.0);
                }
                let p1 = rule
                    .iter()
                    .map(|&([x, y], w)| {
                        let gv = gradient_at(mesh, self.v, e, x, y);
                        let t = flux_at(mesh, tau, e, x, y);
                        w * ((gv[0] - t[0]).powi(2) + (gv[1] - t[1]).powi(2))
                    })
                    .sum();
                let r = div[e] + self.fbar[e] + mu[e];
                let p3 = mu[e] * area * (self.vbar[e] - self.phibar[e]);
                (p1, area * r * r, p3)
            })
            .collect();
        let mut out = LocalParts {
            p1: ElementField::zeros(mesh.n_elements()),
            p2: ElementField::zeros(mesh.n_elements()),
            p3: ElementField::zeros(mesh.n_elements()),
        };
        for (e, (a, b, c)) in per_element.into_iter().enumerate() {
            out.p1[e] = a;
            out.p2[e] = b;
            out.p3[e] = c;
        }
        out
    }

    pub fn evaluate(&self, beta: f64, tau: &EdgeFluxField, mu: &ElementField) -> (MajorantParts, f64) {
        let parts = self.local_parts(tau, mu).sum();
        (parts, parts.total(beta, self.c_omega))
    }

    /// Block-coordinate descent: flux, multiplier, `beta`, repeated
    /// `opts.n_iter` times from `tau = 0`, `mu = mu0`, `beta = opts.beta0`.
    /// The trace holds the total after every step.
    pub fn run(&self, mu0: &ElementField, opts: &MajorantOptions) -> Result<MajorantRun> {
        check_beta(opts.beta0)?;
        if mu0.len() != self.mesh.n_elements() {
            return Err(Error::SizeMismatch {
                expected: self.mesh.n_elements(),
                got: mu0.len(),
            });
        }
        if mu0.iter().any(|&m| !(m >= 0.0)) {
            return Err(Error::Parameter("initial multiplier must be nonnegative".into()));
        }
        let mut beta = opts.beta0;
        let mut mu = mu0.clone();
        let mut tau = EdgeFluxField::zeros(self.mesh.n_edges());
        let (mut parts, mut total) = self.evaluate(beta, &tau, &mu);
        let mut trace = vec![MajorantTraceRow {
            iter: 0,
            step: Step::Init,
            beta,
            parts,
            total,
        }];
        let mut iterations = 0;
        for iter in 1..=opts.n_iter {
            let before = total;
            tau = self.flux_step(beta, &mu, opts.flux_system, opts.cg, Some(&tau))?;
            (parts, total) = self.evaluate(beta, &tau, &mu);
            trace.push(MajorantTraceRow { iter, step: Step::Flux, beta, parts, total });

            mu = self.multiplier_step(beta, &tau)?;
            (parts, total) = self.evaluate(beta, &tau, &mu);
            trace.push(MajorantTraceRow { iter, step: Step::Multiplier, beta, parts, total });

            // With P1 = 0 the total does not depend on beta through P1; keep it.
            if let Ok(b) = beta_step(parts.p1, parts.p2, self.c_omega, opts.beta_rule) {
                beta = b;
            }
            total = parts.total(beta, self.c_omega);
            trace.push(MajorantTraceRow { iter, step: Step::Beta, beta, parts, total });
            iterations = iter;

            if let Some(tol) = opts.rel_decrease {
                if before - total <= tol * total.abs() {
                    break;
                }
            }
        }
        Ok(MajorantRun {
            state: MajorantState {
                beta,
                mu,
                tau,
                parts,
                total,
                c_omega: self.c_omega,
            },
            trace,
            iterations,
        })
    }

    /// `fbar + mu` on active elements.
    fn shifted_load(&self, mu: &ElementField) -> ElementField {
        ElementField(self.fbar.iter().zip(mu.iter()).map(|(f, m)| f + m).collect())
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Parameter(format!("beta must be positive, got {beta}")));
    }
    Ok(())
}
