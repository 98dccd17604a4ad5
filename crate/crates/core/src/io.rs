//! Plain-text artifacts: the convergence report, mesh and field dumps in CSV
//! and legacy ASCII VTK, solver traces.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::Path;

use crate::error_metrics::MajorantReport;
use crate::experiment::RunOutput;
use crate::fem::{local_kbil, flux_at};
use crate::mesh::RectMesh;

/// Columns of `report.csv`. The trailing `contact_radius` is empty when the
/// obstacle is inactive.
pub const REPORT_COLUMNS: [&str; 16] = [
    "benchmark",
    "h",
    "n_nodes",
    "n_edges",
    "err2_l0",
    "err2_l1",
    "err2_l2",
    "energy_gap",
    "majorant",
    "P1",
    "P2",
    "P3",
    "beta",
    "ieff",
    "chain_ok",
    "contact_radius",
];

/// `1/n` when `1/h` is an integer, the decimal value otherwise.
pub fn format_h(h: f64) -> String {
    let n = (1.0 / h).round();
    if n >= 1.0 && (1.0 / n - h).abs() <= 1e-15 * h {
        format!("1/{}", n as u64)
    } else {
        format!("{h}")
    }
}

/// Parses `"1/64"`, `"0.5"` or `"2"`.
pub fn parse_h(s: &str) -> Option<f64> {
    let s = s.trim();
    let h = match s.split_once('/') {
        Some((a, b)) => a.trim().parse::<f64>().ok()? / b.trim().parse::<f64>().ok()?,
        None => s.parse().ok()?,
    };
    (h.is_finite() && h > 0.0).then_some(h)
}

fn report_record(r: &MajorantReport) -> Vec<String> {
    let e = |x: f64| format!("{x:e}");
    vec![
        r.benchmark.clone(),
        format!("{}", r.h),
        r.n_nodes.to_string(),
        r.n_edges.to_string(),
        e(r.err2[0]),
        e(r.err2[1]),
        e(r.err2[2]),
        e(r.energy_gap),
        e(r.majorant),
        e(r.parts.p1),
        e(r.parts.p2),
        e(r.parts.p3),
        e(r.beta),
        e(r.ieff),
        r.chain_ok.to_string(),
        r.contact_radius.map(e).unwrap_or_default(),
    ]
}

pub fn write_report_csv<W: Write>(w: W, reports: &[MajorantReport]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(REPORT_COLUMNS)?;
    for r in reports {
        out.write_record(report_record(r))?;
    }
    out.flush()
}

/// One parsed row of `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub benchmark: String,
    pub h: f64,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub err2: [f64; 3],
    pub energy_gap: f64,
    pub majorant: f64,
    pub p1: f64,
    pub p2: f64,
    pub p3: f64,
    pub beta: f64,
    pub ieff: f64,
    pub chain_ok: bool,
    pub contact_radius: Option<f64>,
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

pub fn read_report_csv<R: Read>(r: R) -> io::Result<Vec<ReportRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers()?.clone();
    let col = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| invalid(format!("report is missing column `{name}`")))
    };
    let idx: Vec<usize> = REPORT_COLUMNS[..15].iter().map(|c| col(c)).collect::<io::Result<_>>()?;
    let radius_idx = header.iter().position(|h| h == "contact_radius");
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(idx[i]).unwrap_or("");
        let num = |i: usize| -> io::Result<f64> {
            field(i).trim().parse().map_err(|_| {
                invalid(format!(
                    "row {}: column `{}` is not a number: `{}`",
                    line + 1,
                    REPORT_COLUMNS[i],
                    field(i)
                ))
            })
        };
        let count = |i: usize| -> io::Result<usize> {
            field(i).trim().parse().map_err(|_| {
                invalid(format!("row {}: column `{}` is not a count", line + 1, REPORT_COLUMNS[i]))
            })
        };
        let chain_ok = match field(14).trim() {
            "true" => true,
            "false" => false,
            other => return Err(invalid(format!("row {}: chain_ok is `{other}`", line + 1))),
        };
        let contact_radius = match radius_idx.and_then(|i| rec.get(i)).map(str::trim) {
            None | Some("") => None,
            Some(s) => Some(s.parse().map_err(|_| {
                invalid(format!("row {}: contact_radius is `{s}`", line + 1))
            })?),
        };
        rows.push(ReportRow {
            benchmark: field(0).to_string(),
            h: num(1)?,
            n_nodes: count(2)?,
            n_edges: count(3)?,
            err2: [num(4)?, num(5)?, num(6)?],
            energy_gap: num(7)?,
            majorant: num(8)?,
            p1: num(9)?,
            p2: num(10)?,
            p3: num(11)?,
            beta: num(12)?,
            ieff: num(13)?,
            chain_ok,
            contact_radius,
        });
    }
    Ok(rows)
}

/// Aligned convergence table. Within each benchmark, rows after the first
/// carry the ratio `err2_l2(previous h) / err2_l2(h)`.
pub fn convergence_table(rows: &[ReportRow]) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<4} {:>8} {:>12} {:>7} {:>12} {:>12} {:>12} {:>7} {:>6}",
        "id", "h", "err2_l2", "ratio", "err2/2", "J(v)-J(u)", "majorant", "ieff", "chain"
    );
    let mut prev: Option<&ReportRow> = None;
    for r in rows {
        let ratio = match prev {
            Some(p) if p.benchmark == r.benchmark => format!("{:.3}", p.err2[2] / r.err2[2]),
            _ => String::new(),
        };
        let _ = writeln!(
            s,
            "{:<4} {:>8} {:>12.5e} {:>7} {:>12.5e} {:>12.5e} {:>12.5e} {:>7.3} {:>6}",
            r.benchmark,
            format_h(r.h),
            r.err2[2],
            ratio,
            0.5 * r.err2[2],
            r.energy_gap,
            r.majorant,
            r.ieff,
            if r.chain_ok { "ok" } else { "FAIL" }
        );
        prev = Some(r);
    }
    s
}

/// `nodes.csv` (`id,x,y`).
pub fn write_nodes_csv<W: Write>(w: W, mesh: &RectMesh) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "x", "y"])?;
    for (i, p) in mesh.nodes().iter().enumerate() {
        out.write_record([i.to_string(), format!("{:e}", p[0]), format!("{:e}", p[1])])?;
    }
    out.flush()
}

/// `elements.csv` (`id,n1,n2,n3,n4,active`).
pub fn write_elements_csv<W: Write>(w: W, mesh: &RectMesh, active: &[bool]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["id", "n1", "n2", "n3", "n4", "active"])?;
    for (i, n) in mesh.elements().iter().enumerate() {
        let mut rec = vec![i.to_string()];
        rec.extend(n.iter().map(|k| k.to_string()));
        rec.push(u8::from(active[i]).to_string());
        out.write_record(rec)?;
    }
    out.flush()
}

/// Per-element quantities derived from a run.
#[derive(Debug, Clone)]
pub struct ElementFields {
    pub names: Vec<&'static str>,
    pub columns: Vec<Vec<f64>>,
}

/// Flux components at element centres, multipliers, local majorant parts,
/// and the local error `1/2 |grad(v - I u)|^2` on the mesh of `v`.
pub fn element_fields(run: &RunOutput) -> ElementFields {
    let mesh = &run.mesh;
    let (hx, hy) = (mesh.hx(), mesh.hy());
    let n = mesh.n_elements();
    let k = local_kbil(hx, hy).expect("mesh sizes are positive");
    let ui = mesh.interpolate(|x, y| run.exact.u(x, y));
    let mut tau_x = vec![0.0; n];
    let mut tau_y = vec![0.0; n];
    let mut error = vec![0.0; n];
    for e in 0..n {
        let t = flux_at(mesh, &run.tau, e, 0.5 * hx, 0.5 * hy);
        tau_x[e] = t[0];
        tau_y[e] = t[1];
        if run.solve_mask[e] {
            let d = mesh.elements()[e].map(|i| run.v[i] - ui[i]);
            let mut q = 0.0;
            for a in 0..4 {
                for b in 0..4 {
                    q += d[a] * k[a][b] * d[b];
                }
            }
            error[e] = 0.5 * q;
        }
    }
    let c_omega = crate::majorant::friedrichs_constant(run.exact.spec().domain());
    let local = run.local.combined(run.beta, c_omega);
    ElementFields {
        names: vec![
            "tau_x", "tau_y", "mu0", "mu", "P1", "P2", "P3", "majorant", "error", "solve", "majorant_domain",
        ],
        columns: vec![
            tau_x,
            tau_y,
            run.mu0.to_vec(),
            run.mu.to_vec(),
            run.local.p1.to_vec(),
            run.local.p2.to_vec(),
            run.local.p3.to_vec(),
            local.into_inner(),
            error,
            run.solve_mask.iter().map(|&a| f64::from(u8::from(a))).collect(),
            run.majorant_mask.iter().map(|&a| f64::from(u8::from(a))).collect(),
        ],
    }
}

/// Nodal values: discrete solution, obstacle and exact solution.
pub fn nodal_fields(run: &RunOutput) -> (Vec<&'static str>, Vec<Vec<f64>>) {
    let mesh = &run.mesh;
    (
        vec!["v", "phi", "u"],
        vec![
            run.v.to_vec(),
            mesh.interpolate(|x, y| run.exact.obstacle(x, y)).into_inner(),
            mesh.interpolate(|x, y| run.exact.u(x, y)).into_inner(),
        ],
    )
}

fn write_columns<W: Write>(w: W, names: &[&str], cols: &[Vec<f64>]) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let mut header = vec!["id"];
    header.extend_from_slice(names);
    out.write_record(&header)?;
    let n = cols.first().map_or(0, Vec::len);
    for i in 0..n {
        let mut rec = vec![i.to_string()];
        rec.extend(cols.iter().map(|c| format!("{:e}", c[i])));
        out.write_record(rec)?;
    }
    out.flush()
}

/// Legacy ASCII VTK unstructured grid of all elements with point and cell data.
pub fn write_vtk<W: Write>(
    mut w: W,
    mesh: &RectMesh,
    point_data: (&[&str], &[Vec<f64>]),
    cell_data: (&[&str], &[Vec<f64>]),
) -> io::Result<()> {
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "obstacle problem fields")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_nodes())?;
    for p in mesh.nodes() {
        writeln!(w, "{:e} {:e} 0", p[0], p[1])?;
    }
    let ne = mesh.n_elements();
    writeln!(w, "CELLS {} {}", ne, 5 * ne)?;
    for n in mesh.elements() {
        writeln!(w, "4 {} {} {} {}", n[0], n[1], n[2], n[3])?;
    }
    writeln!(w, "CELL_TYPES {ne}")?;
    for _ in 0..ne {
        writeln!(w, "9")?;
    }
    let block = |w: &mut W, names: &[&str], cols: &[Vec<f64>]| -> io::Result<()> {
        for (name, col) in names.iter().zip(cols) {
            writeln!(w, "SCALARS {name} double 1")?;
            writeln!(w, "LOOKUP_TABLE default")?;
            for x in col {
                writeln!(w, "{x:e}")?;
            }
        }
        Ok(())
    };
    writeln!(w, "POINT_DATA {}", mesh.n_nodes())?;
    block(&mut w, point_data.0, point_data.1)?;
    writeln!(w, "CELL_DATA {ne}")?;
    block(&mut w, cell_data.0, cell_data.1)?;
    w.flush()
}

pub fn write_majorant_trace<W: Write>(w: W, run: &RunOutput) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iter", "step", "beta", "P1", "P2", "P3", "total"])?;
    for r in &run.majorant_trace {
        out.write_record([
            r.iter.to_string(),
            r.step.name().to_string(),
            format!("{:e}", r.beta),
            format!("{:e}", r.parts.p1),
            format!("{:e}", r.parts.p2),
            format!("{:e}", r.parts.p3),
            format!("{:e}", r.total),
        ])?;
    }
    out.flush()
}

pub fn write_psor_trace<W: Write>(w: W, run: &RunOutput) -> io::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["sweep", "energy", "measure"])?;
    for r in &run.psor_trace {
        out.write_record([
            r.sweep.to_string(),
            format!("{:e}", r.energy),
            format!("{:e}", r.measure),
        ])?;
    }
    out.flush()
}

/// Writes every artifact of one run into `dir`: mesh CSVs, nodal and element
/// field CSVs, a VTK file and the solver traces.
pub fn dump_run(dir: &Path, run: &RunOutput) -> io::Result<()> {
    fs::create_dir_all(dir)?;
    let file = |name: &str| fs::File::create(dir.join(name)).map(io::BufWriter::new);
    write_nodes_csv(file("nodes.csv")?, &run.mesh)?;
    write_elements_csv(file("elements.csv")?, &run.mesh, &run.solve_mask)?;
    let (pn, pc) = nodal_fields(run);
    let cells = element_fields(run);
    write_columns(file("nodal_fields.csv")?, &pn, &pc)?;
    write_columns(file("element_fields.csv")?, &cells.names, &cells.columns)?;
    write_vtk(file("fields.vtk")?, &run.mesh, (&pn, &pc), (&cells.names, &cells.columns))?;
    write_majorant_trace(file("majorant_trace.csv")?, run)?;
    if !run.psor_trace.is_empty() {
        write_psor_trace(file("psor_trace.csv")?, run)?;
    }
    Ok(())
}

/// Directory name of a run, e.g. `II_h1-64`.
pub fn run_dir_name(benchmark: &str, h: f64) -> String {
    format!("{benchmark}_h{}", format_h(h).replace('/', "-"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundingBox;

    #[test]
    fn h_round_trip() {
        for (s, h) in [("1/64", 1.0 / 64.0), ("1/2", 0.5), ("1/1", 1.0)] {
            assert_eq!(parse_h(s), Some(h));
        }
        assert_eq!(format_h(1.0 / 64.0), "1/64");
        assert_eq!(format_h(1.0), "1/1");
        assert_eq!(format_h(0.4), "0.4");
        assert_eq!(parse_h("0.25"), Some(0.25));
        assert_eq!(parse_h("-1/2"), None);
        assert_eq!(parse_h("abc"), None);
        assert_eq!(run_dir_name("II", 1.0 / 16.0), "II_h1-16");
    }

    #[test]
    fn empty_report_has_header_only() {
        let mut buf = Vec::new();
        write_report_csv(&mut buf, &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.trim(), REPORT_COLUMNS.join(","));
        let rows = read_report_csv(text.as_bytes()).unwrap();
        assert!(rows.is_empty());
        assert_eq!(convergence_table(&rows).lines().count(), 1);
    }

    #[test]
    fn malformed_report_is_rejected() {
        assert!(read_report_csv("benchmark,h\nII,0.5\n".as_bytes()).is_err());
        let mut text = REPORT_COLUMNS.join(",");
        text.push_str("\nII,x,1,1,1,1,1,1,1,1,1,1,1,1,true,\n");
        assert!(read_report_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn vtk_header_and_counts() {
        let mesh = RectMesh::uniform(BoundingBox::reference_square(), 1.0).unwrap();
        let v = vec![vec![0.0; 9]];
        let c = vec![vec![1.0; 4]];
        let mut buf = Vec::new();
        write_vtk(&mut buf, &mesh, (&["v"], &v), (&["mu"], &c)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains("POINTS 9 double"));
        assert!(text.contains("CELLS 4 20"));
        assert!(text.contains("POINT_DATA 9"));
        assert!(text.contains("CELL_DATA 4"));
    }
}
