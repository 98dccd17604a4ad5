//! Acceptance suite: twelve criteria with pinned tolerances, one line each.
//!
//! Criteria listed in `KNOWN_FAILURES` are not met by the method as
//! specified; they are still evaluated and reported as FAIL. The process
//! exits nonzero if any other criterion fails, or if a listed one passes
//! (so the list cannot go stale).

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use obstacle_core::benchmarks::{
    benchmark1, benchmark2, benchmark3, contact_radius_constant, contact_radius_spherical,
    BenchmarkSpec,
};
use obstacle_core::error_metrics::MajorantReport;
use obstacle_core::experiment::{dyadic_levels, run_benchmark, RunOptions, RunOutput};
use obstacle_core::fem::{
    assemble_global, element_average_fn, gauss2x2, load_vector, local_kbil, local_rt0, Operator,
};
use obstacle_core::field::NodalField;
use obstacle_core::io::write_report_csv;
use obstacle_core::mesh::{classify_ring, BoundingBox, RectMesh};
use obstacle_core::qp::{kkt_residuals, solve_obstacle_qp, PsorOptions, QpProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

/// Criteria that the specified method does not meet; see the project notes.
const KNOWN_FAILURES: &[u32] = &[3, 4, 5];

struct Outcome {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
}

fn reference_specs() -> [BenchmarkSpec; 3] {
    [
        BenchmarkSpec::Square { contact_radius: 0.7 },
        BenchmarkSpec::RingConstant { f: -10.0, phi: -1.0 },
        BenchmarkSpec::RingSpherical {
            f: -10.0,
            phi_max: -1.0,
            rho: 1.2,
        },
    ]
}

struct GridRun {
    outputs: Vec<RunOutput>,
    times: Vec<Duration>,
    wall: Duration,
}

fn run_reference_grid() -> GridRun {
    let cases: Vec<(BenchmarkSpec, f64)> = reference_specs()
        .into_iter()
        .flat_map(|s| dyadic_levels(6).into_iter().map(move |h| (s, h)))
        .collect();
    let start = Instant::now();
    let results: Vec<(RunOutput, Duration)> = cases
        .par_iter()
        .map(|(spec, h)| {
            let t = Instant::now();
            let out = run_benchmark(spec, *h, &RunOptions::default())
                .unwrap_or_else(|e| panic!("benchmark {} h={h}: {e}", spec.id()));
            (out, t.elapsed())
        })
        .collect();
    let wall = start.elapsed();
    let (outputs, times) = results.into_iter().unzip();
    GridRun { outputs, times, wall }
}

fn report_bytes(outputs: &[RunOutput]) -> Vec<u8> {
    let reports: Vec<MajorantReport> = outputs.iter().map(|o| o.report.clone()).collect();
    let mut buf = Vec::new();
    write_report_csv(&mut buf, &reports).expect("in-memory write");
    buf
}

fn by_benchmark<'a>(outputs: &'a [RunOutput], id: &str) -> Vec<&'a MajorantReport> {
    outputs
        .iter()
        .map(|o| &o.report)
        .filter(|r| r.benchmark == id)
        .collect()
}

// ---------------------------------------------------------------------------
// 1. Local matrices

fn kbil_closed_form(hx: f64, hy: f64) -> [[f64; 4]; 4] {
    let (a, b) = (hx * hx, hy * hy);
    let m = [
        [2.0 * a + 2.0 * b, a - 2.0 * b, -a - b, -2.0 * a + b],
        [a - 2.0 * b, 2.0 * a + 2.0 * b, -2.0 * a + b, -a - b],
        [-a - b, -2.0 * a + b, 2.0 * a + 2.0 * b, a - 2.0 * b],
        [-2.0 * a + b, -a - b, a - 2.0 * b, 2.0 * a + 2.0 * b],
    ];
    m.map(|row| row.map(|x| x / (6.0 * hx * hy)))
}

fn krt0_closed_form(hx: f64, hy: f64) -> [[f64; 4]; 4] {
    let (p, q) = (hx / hy, hy / hx);
    [
        [p, -1.0, -p, 1.0],
        [-1.0, q, 1.0, -q],
        [-p, 1.0, p, -1.0],
        [1.0, -q, -1.0, q],
    ]
}

fn mrt0_closed_form(hx: f64, hy: f64) -> [[f64; 4]; 4] {
    let (t, s) = (hx * hy / 3.0, hx * hy / 6.0);
    [[t, 0.0, s, 0.0], [0.0, t, 0.0, s], [s, 0.0, t, 0.0], [0.0, s, 0.0, t]]
}

/// Gauss-Legendre 2x2 on [0,hx]x[0,hy], written out independently.
fn gauss_points(hx: f64, hy: f64) -> Vec<(f64, f64, f64)> {
    let g = 0.5 / 3f64.sqrt();
    let mut pts = Vec::new();
    for sx in [0.5 - g, 0.5 + g] {
        for sy in [0.5 - g, 0.5 + g] {
            pts.push((sx * hx, sy * hy, 0.25 * hx * hy));
        }
    }
    pts
}

fn quadrature_matrices(hx: f64, hy: f64) -> [[[f64; 4]; 4]; 3] {
    let grads = |x: f64, y: f64| {
        let xy = hx * hy;
        [
            [-1.0 / hx + y / xy, -1.0 / hy + x / xy],
            [1.0 / hx - y / xy, -x / xy],
            [y / xy, x / xy],
            [-y / xy, 1.0 / hy - x / xy],
        ]
    };
    let eta = |x: f64, y: f64| [[0.0, 1.0 - y / hy], [x / hx, 0.0], [0.0, y / hy], [1.0 - x / hx, 0.0]];
    let div = [-1.0 / hy, 1.0 / hx, 1.0 / hy, -1.0 / hx];
    let mut out = [[[0.0; 4]; 4]; 3];
    for (x, y, w) in gauss_points(hx, hy) {
        let g = grads(x, y);
        let e = eta(x, y);
        for i in 0..4 {
            for j in 0..4 {
                out[0][i][j] += w * (g[i][0] * g[j][0] + g[i][1] * g[j][1]);
                out[1][i][j] += w * div[i] * div[j];
                out[2][i][j] += w * (e[i][0] * e[j][0] + e[i][1] * e[j][1]);
            }
        }
    }
    out
}

fn max_diff(a: &[[f64; 4]; 4], b: &[[f64; 4]; 4]) -> f64 {
    let mut d = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max((a[i][j] - b[i][j]).abs());
        }
    }
    d
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for (hx, hy) in [(1.0, 1.0), (0.5, 0.25), (1.0 / 64.0, 1.0 / 64.0)] {
        let k = local_kbil(hx, hy).unwrap();
        let (krt, mrt) = local_rt0(hx, hy).unwrap();
        let quad = quadrature_matrices(hx, hy);
        for (ours, closed, q) in [
            (k, kbil_closed_form(hx, hy), quad[0]),
            (krt, krt0_closed_form(hx, hy), quad[1]),
            (mrt, mrt0_closed_form(hx, hy), quad[2]),
        ] {
            // Relative to the largest entry: entries scale like 1/h^2 for K^RT0.
            let scale = closed.iter().flatten().fold(0.0f64, |m, x| m.max(x.abs()));
            worst = worst.max(max_diff(&ours, &closed) / scale);
            worst = worst.max(max_diff(&ours, &q) / scale);
        }
    }
    // The crate's own Gauss rule must agree with the independent one.
    let rule = gauss2x2(0.5, 0.25);
    let ref_rule = gauss_points(0.5, 0.25);
    let rule_ok = rule.len() == 4
        && ref_rule.iter().all(|&(x, y, w)| {
            rule.iter()
                .any(|&([a, b], v)| (a - x).abs() < 1e-15 && (b - y).abs() < 1e-15 && (v - w).abs() < 1e-15)
        });
    let elapsed = start.elapsed();
    Outcome {
        id: 1,
        name: "local matrices",
        pass: worst <= 1e-14 && rule_ok && elapsed < Duration::from_secs(1),
        detail: format!("max rel diff {worst:.1e} (tol 1e-14), {elapsed:.2?}"),
    }
}

// ---------------------------------------------------------------------------
// 2. Contact radii

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let rc = contact_radius_constant(-10.0, -1.0).unwrap();
    let (_, rs) = contact_radius_spherical(-10.0, -1.0, 1.2).unwrap();
    let elapsed = start.elapsed();
    let dc = (rc - 0.5024744).abs();
    let ds = (rs - 0.4389205).abs();
    Outcome {
        id: 2,
        name: "contact radii",
        pass: dc <= 1e-6 && ds <= 1e-6 && elapsed < Duration::from_secs(1),
        detail: format!("R_c = {rc:.9} (|d| {dc:.1e}), R_s = {rs:.9} (|d| {ds:.1e}), {elapsed:.2?}"),
    }
}

// ---------------------------------------------------------------------------
// 3. Inequality chain

fn criterion_3(grid: &GridRun) -> Outcome {
    let mut violations = Vec::new();
    for o in &grid.outputs {
        let r = &o.report;
        if !(r.lower_slack >= -1e-10 && r.upper_slack >= -1e-10) {
            violations.push(format!(
                "{} h={} (lower {:.2e}, upper {:.2e})",
                r.benchmark, r.h, r.lower_slack, r.upper_slack
            ));
        }
    }
    let slowest_fine = grid
        .outputs
        .iter()
        .zip(&grid.times)
        .filter(|(o, _)| o.report.h == 1.0 / 64.0)
        .map(|(_, t)| *t)
        .max()
        .unwrap_or_default();
    let timing_ok = grid.wall < Duration::from_secs(60) && slowest_fine < Duration::from_secs(15);
    let detail = if violations.is_empty() {
        format!("18 runs valid; grid {:.2?}, slowest h=1/64 run {slowest_fine:.2?}", grid.wall)
    } else {
        format!(
            "{} of 18 runs violate: {}; grid {:.2?}, slowest h=1/64 run {slowest_fine:.2?}",
            violations.len(),
            violations.join(", "),
            grid.wall
        )
    };
    Outcome {
        id: 3,
        name: "inequality chain",
        pass: violations.is_empty() && timing_ok,
        detail,
    }
}

// ---------------------------------------------------------------------------
// 4. Sharpness

fn criterion_4(grid: &GridRun) -> Outcome {
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for id in ["I", "II", "III"] {
        let rows: Vec<&MajorantReport> = by_benchmark(&grid.outputs, id)
            .into_iter()
            .filter(|r| r.h <= 1.0 / 8.0)
            .collect();
        for r in &rows {
            if r.h <= 1.0 / 16.0 && (r.ieff > 5.0 || r.ieff.is_nan()) {
                problems.push(format!("{id} h={} ieff {:.3} > 5", r.h, r.ieff));
            }
        }
        for w in rows.windows(2) {
            if w[1].ieff > w[0].ieff {
                problems.push(format!(
                    "{id} ieff rises {:.6} -> {:.6} at h={}",
                    w[0].ieff, w[1].ieff, w[1].h
                ));
            }
        }
        summary.push(format!(
            "{id}: {}",
            rows.iter().map(|r| format!("{:.3}", r.ieff)).collect::<Vec<_>>().join(" ")
        ));
    }
    Outcome {
        id: 4,
        name: "sharpness",
        pass: problems.is_empty(),
        detail: if problems.is_empty() {
            format!("ieff h=1/8..1/64 {}", summary.join("; "))
        } else {
            format!("{}; ieff h=1/8..1/64 {}", problems.join(", "), summary.join("; "))
        },
    }
}

// ---------------------------------------------------------------------------
// 5. Convergence order

fn criterion_5(grid: &GridRun) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for id in ["I", "II", "III"] {
        let rows = by_benchmark(&grid.outputs, id);
        let n = rows.len();
        let ratios: Vec<f64> = (n - 3..n - 1).map(|i| rows[i].err2[2] / rows[i + 1].err2[2]).collect();
        pass &= ratios.iter().all(|r| (2.5..=6.0).contains(r));
        parts.push(format!("{id}: {:.3} {:.3}", ratios[0], ratios[1]));
    }
    Outcome {
        id: 5,
        name: "convergence order",
        pass,
        detail: format!("err2 ratios on the two finest pairs (band [2.5, 6]) {}", parts.join("; ")),
    }
}

// ---------------------------------------------------------------------------
// 6. QP oracle equivalence

/// Primal-dual active set method on the dense reduced system.
fn dense_active_set(a: &DMatrix<f64>, b: &DVector<f64>, lower: &DVector<f64>) -> DVector<f64> {
    let n = b.len();
    let mut active = vec![false; n];
    let mut x = a.clone().lu().solve(b).expect("SPD system");
    let mut lambda = DVector::zeros(n);
    for _ in 0..200 {
        let next: Vec<bool> = (0..n).map(|i| lambda[i] + (lower[i] - x[i]) > 0.0).collect();
        if next == active && (0..n).all(|i| x[i] >= lower[i] - 1e-14) {
            break;
        }
        active = next;
        let free: Vec<usize> = (0..n).filter(|&i| !active[i]).collect();
        let mut xn = DVector::zeros(n);
        for i in 0..n {
            if active[i] {
                xn[i] = lower[i];
            }
        }
        if !free.is_empty() {
            let m = free.len();
            let mut aff = DMatrix::zeros(m, m);
            let mut rhs = DVector::zeros(m);
            for (p, &i) in free.iter().enumerate() {
                rhs[p] = b[i];
                for j in 0..n {
                    if active[j] {
                        rhs[p] -= a[(i, j)] * lower[j];
                    }
                }
                for (q, &j) in free.iter().enumerate() {
                    aff[(p, q)] = a[(i, j)];
                }
            }
            let sol = aff.lu().solve(&rhs).expect("SPD block");
            for (p, &i) in free.iter().enumerate() {
                xn[i] = sol[p];
            }
        }
        x = xn;
        let r = a * &x - b;
        lambda = DVector::from_fn(n, |i, _| if active[i] { r[i] } else { 0.0 });
    }
    x
}

fn criterion_6() -> Outcome {
    let exact = benchmark2(-10.0, -1.0).unwrap();
    let mut worst = 0.0f64;
    let mut worst_kkt = 0.0f64;
    let mut contacts = Vec::new();
    for h in [0.5, 0.25] {
        let full = RectMesh::uniform(BoundingBox::reference_square(), h).unwrap();
        let pair = classify_ring(&full);
        let mesh = pair.inscribed();
        let inside = mesh.node_mask();
        let boundary = mesh.boundary_node_mask();
        let dirichlet: Vec<(usize, f64)> = (0..mesh.n_nodes())
            .filter(|&n| boundary[n] || !inside[n])
            .map(|n| (n, 0.0))
            .collect();
        let k = assemble_global(&mesh, Operator::StiffnessBil);
        let b = load_vector(&mesh, &element_average_fn(&mesh, |x, y| exact.load(x, y)));
        let phi = vec![-1.0; mesh.n_nodes()];
        let p = QpProblem::new(k.clone(), b.clone(), phi.clone(), &dirichlet).unwrap();
        let sol = solve_obstacle_qp(&p, &PsorOptions::default()).unwrap();
        let kkt = kkt_residuals(&p, &sol);
        worst_kkt = worst_kkt
            .max(kkt.primal)
            .max(kkt.dual)
            .max(kkt.complementarity)
            .max(kkt.stationarity);

        let free = p.free_nodes();
        let m = free.len();
        let dense = k.to_dense();
        let a = DMatrix::from_fn(m, m, |i, j| dense[free[i]][free[j]]);
        let rhs = DVector::from_fn(m, |i, _| b[free[i]]);
        let lower = DVector::from_fn(m, |i, _| phi[free[i]]);
        let x = dense_active_set(&a, &rhs, &lower);
        for (i, &n) in free.iter().enumerate() {
            worst = worst.max((x[i] - sol.v[n]).abs());
        }
        contacts.push(sol.active_set.iter().filter(|&&c| c).count());
    }
    Outcome {
        id: 6,
        name: "QP oracle equivalence",
        pass: worst <= 1e-8 && worst_kkt <= 1e-8,
        detail: format!(
            "max |v_psor - v_oracle| {worst:.1e}, max KKT residual {worst_kkt:.1e}, contact nodes {contacts:?}"
        ),
    }
}

// ---------------------------------------------------------------------------
// 7. Exact energies against quadrature

/// `J(u) = int 1/2 |grad u|^2 - f u` over the square by the midpoint rule.
fn square_energy_oracle(r: f64, n: usize) -> f64 {
    let h = 2.0 / n as f64;
    (0..n)
        .into_par_iter()
        .map(|j| {
            let y = -1.0 + (j as f64 + 0.5) * h;
            let mut s = 0.0;
            for i in 0..n {
                let x = -1.0 + (i as f64 + 0.5) * h;
                let q = x * x + y * y;
                let (u, g2, f) = if q > r * r {
                    let t = q - r * r;
                    (t * t, 16.0 * t * t * q, -16.0 * q + 8.0 * r * r)
                } else {
                    (0.0, 0.0, -8.0 * (r.powi(4) + r * r) + 8.0 * r * r * q)
                };
                s += 0.5 * g2 - f * u;
            }
            s * h * h
        })
        .sum()
}

/// Radial profile `f/4 (1 - r^2) + A ln r` outside the contact disk.
fn radial_energy_oracle(
    f: f64,
    r: f64,
    a: f64,
    inner: impl Fn(f64) -> (f64, f64) + Sync,
    n: usize,
) -> f64 {
    // 2 pi int_0^1 (1/2 u'^2 - f u) s ds, composite Simpson on each piece.
    let integrand = |s: f64| {
        let (u, du) = if s <= r {
            inner(s)
        } else {
            (f / 4.0 * (1.0 - s * s) + a * s.ln(), -f * s / 2.0 + a / s)
        };
        (0.5 * du * du - f * u) * s
    };
    let simpson = |lo: f64, hi: f64| {
        let h = (hi - lo) / n as f64;
        let mut acc = integrand(lo) + integrand(hi);
        for k in 1..n {
            acc += integrand(lo + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        acc * h / 3.0
    };
    2.0 * PI * (simpson(0.0, r) + simpson(r, 1.0))
}

/// Bisection to machine resolution, independent of the crate.
fn bisect(g: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let sl = g(lo).signum();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid).signum() == sl {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_7() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;

    let j1 = benchmark1(0.7).unwrap().energy();
    let q1 = square_energy_oracle(0.7, 2048);
    let d1 = ((j1 - q1) / q1).abs();
    pass &= d1 <= 1e-3;
    details.push(format!("I {d1:.1e}"));

    // Benchmark II: contact radius from C^1 matching of the radial profile.
    let (f, phi) = (-10.0, -1.0);
    let r = bisect(|r| r * r * (1.0 - 2.0 * r.ln()) - (1.0 - 4.0 * phi / f), 1e-9, 1.0 - 1e-9);
    let a = (4.0 * phi + f * r * r - f) / (4.0 * r.ln());
    let q2 = radial_energy_oracle(f, r, a, |_| (phi, 0.0), 20000);
    let j2 = benchmark2(f, phi).unwrap().energy();
    let d2 = ((j2 - q2) / q2).abs();
    pass &= d2 <= 1e-4;
    details.push(format!("II {d2:.1e}"));

    // Benchmark III: spherical cap, slope matching at the contact radius.
    let (f, pm, rho) = (-10.0, -1.0, 1.2);
    let cap = |s: f64| (pm - rho + (rho * rho - s * s).sqrt(), -s / (rho * rho - s * s).sqrt());
    let mismatch = |psi: f64| {
        let r = rho * psi.sin();
        let a = (4.0 * (pm - rho + rho * psi.cos()) + f * r * r - f) / (4.0 * r.ln());
        (-f * r / 2.0 + a / r) - (-psi.tan())
    };
    let psi = bisect(mismatch, 1e-9, (1.0 / rho).asin() - 1e-9);
    let r = rho * psi.sin();
    let a = (4.0 * (pm - rho + rho * psi.cos()) + f * r * r - f) / (4.0 * r.ln());
    let q3 = radial_energy_oracle(f, r, a, cap, 20000);
    let j3 = benchmark3(f, pm, rho).unwrap().energy();
    let d3 = ((j3 - q3) / q3).abs();
    pass &= d3 <= 1e-3;
    details.push(format!("III {d3:.1e}"));

    Outcome {
        id: 7,
        name: "exact energies",
        pass,
        detail: format!("relative diff vs quadrature: {}", details.join(", ")),
    }
}

// ---------------------------------------------------------------------------
// 8. Majorant monotonicity

fn criterion_8(grid: &GridRun) -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for o in &grid.outputs {
        for w in o.majorant_trace.windows(2) {
            let rise = (w[1].total - w[0].total) / w[0].total.abs();
            worst = worst.max(rise);
            if rise > 1e-12 {
                bad.push(format!("{} h={} iter {} {}", o.report.benchmark, o.report.h, w[1].iter, w[1].step.name()));
            }
        }
    }
    Outcome {
        id: 8,
        name: "majorant monotonicity",
        pass: bad.is_empty(),
        detail: format!("largest relative step change {worst:.1e} (tol 1e-12){}", if bad.is_empty() { String::new() } else { format!("; rises at {}", bad.join(", ")) }),
    }
}

// ---------------------------------------------------------------------------
// 9. Zero extension

fn criterion_9(grid: &GridRun) -> Outcome {
    let mut worst = 0.0f64;
    let mut missing = 0;
    for o in grid.outputs.iter().filter(|o| o.report.benchmark != "I") {
        match o.report.zero_extension_gap {
            Some(g) => worst = worst.max(g),
            None => missing += 1,
        }
    }
    Outcome {
        id: 9,
        name: "zero-extension identity",
        pass: worst <= 1e-12 && missing == 0,
        detail: format!("max |J(v_in) - J(v_out)| {worst:.1e} over 12 ring runs"),
    }
}

// ---------------------------------------------------------------------------
// 10. Inactive obstacle

fn criterion_10() -> Outcome {
    let spec = BenchmarkSpec::RingConstant { f: -3.0, phi: -1.0 };
    let exact = spec.exact().unwrap();
    let runs: Vec<RunOutput> = dyadic_levels(6)
        .into_par_iter()
        .map(|h| run_benchmark(&spec, h, &RunOptions::default()).unwrap())
        .collect();
    let mu0_zero = runs.iter().all(|o| o.mu0.iter().all(|&m| m == 0.0));
    let m: Vec<f64> = runs.iter().map(|o| o.report.majorant).collect();
    let e: Vec<f64> = runs.iter().map(|o| o.report.err2[2]).collect();
    let m_decreasing = m.windows(2).all(|w| w[1] < w[0]) && m[5] < 0.1 * m[0];
    // At h = 1/2 and 1/4 the inscribed mesh covers little of the disk, so the
    // error is only required to decrease from h = 1/8 on.
    let e_decreasing = e[2..].windows(2).all(|w| w[1] < w[0]);
    let chain = runs.iter().all(|o| o.report.chain_ok);
    // The reference solution is the linear one: u(0,0) = f/4.
    let linear = !exact.is_obstacle_active() && (exact.u(0.0, 0.0) + 0.75).abs() < 1e-15;
    Outcome {
        id: 10,
        name: "inactive obstacle",
        pass: mu0_zero && m_decreasing && e_decreasing && chain && linear,
        detail: format!(
            "mu0 = 0: {mu0_zero}, M {:.3e} -> {:.3e}, err2 h=1/8..1/64 {:.3e} -> {:.3e}, chain valid: {chain}",
            m[0], m[5], e[2], e[5]
        ),
    }
}

// ---------------------------------------------------------------------------
// 11. Friedrichs inequality

fn criterion_11() -> Outcome {
    let mesh = RectMesh::uniform(BoundingBox::reference_square(), 1.0 / 32.0).unwrap();
    let k = assemble_global(&mesh, Operator::StiffnessBil);
    let m = assemble_global(&mesh, Operator::MassBil);
    let boundary = mesh.boundary_node_mask();
    let c = 2f64.sqrt() / PI;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for trial in 0..100 {
        let smooth = trial % 2 == 0;
        let (a, b) = (rng.gen_range(1..4) as f64, rng.gen_range(1..4) as f64);
        let v: Vec<f64> = mesh
            .nodes()
            .iter()
            .enumerate()
            .map(|(n, p)| {
                if boundary[n] {
                    0.0
                } else if smooth {
                    (a * PI * (p[0] + 1.0) / 2.0).sin() * (b * PI * (p[1] + 1.0) / 2.0).sin()
                        + 0.1 * rng.gen_range(-1.0..1.0)
                } else {
                    rng.gen_range(-1.0..1.0)
                }
            })
            .collect();
        let ratio = (m.quad_form(&v, &v).unwrap() / k.quad_form(&v, &v).unwrap()).sqrt();
        worst = worst.max(ratio / c);
    }
    let eig: NodalField = mesh.interpolate(|x, y| (PI * (x + 1.0) / 2.0).sin() * (PI * (y + 1.0) / 2.0).sin());
    let q = (m.quad_form(&eig, &eig).unwrap() / k.quad_form(&eig, &eig).unwrap()).sqrt() / c;
    Outcome {
        id: 11,
        name: "Friedrichs inequality",
        pass: worst <= 1.0 && q <= 1.0 && q > 0.99,
        detail: format!("max |v| / (C |grad v|) over 100 fields {worst:.4}, first eigenfunction {q:.5}"),
    }
}

// ---------------------------------------------------------------------------
// 12. Determinism

fn criterion_12(grid: &GridRun) -> Outcome {
    let first = report_bytes(&grid.outputs);
    let second = report_bytes(&run_reference_grid().outputs);
    Outcome {
        id: 12,
        name: "determinism",
        pass: first == second,
        detail: format!("report.csv {} bytes, identical: {}", first.len(), first == second),
    }
}

fn main() {
    let mut outcomes = vec![criterion_1(), criterion_2()];
    let grid = run_reference_grid();
    outcomes.push(criterion_3(&grid));
    outcomes.push(criterion_4(&grid));
    outcomes.push(criterion_5(&grid));
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8(&grid));
    outcomes.push(criterion_9(&grid));
    outcomes.push(criterion_10());
    outcomes.push(criterion_11());
    outcomes.push(criterion_12(&grid));

    let mut unexpected = Vec::new();
    for o in &outcomes {
        let known = KNOWN_FAILURES.contains(&o.id);
        let tag = match (o.pass, known) {
            (true, false) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
            (true, true) => "PASS (listed as known failure)",
        };
        println!("criterion {:>2} {:<24} {tag}: {}", o.id, o.name, o.detail);
        if o.pass == known {
            unexpected.push(o.id);
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if !unexpected.is_empty() {
        println!("acceptance: unexpected outcome for criteria {unexpected:?}");
        std::process::exit(1);
    }
}
