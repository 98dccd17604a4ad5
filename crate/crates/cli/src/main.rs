// Parameter checks are written as `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use obstacle_core::error_metrics::MajorantReport;
use obstacle_core::experiment::run_grid;
use obstacle_core::io::{
    convergence_table, dump_run, format_h, read_report_csv, run_dir_name, write_report_csv,
};
use rayon::ThreadPoolBuilder;

use crate::config::{RawConfig, Settings};

/// Obstacle problem benchmarks with a guaranteed error majorant.
#[derive(Parser)]
#[command(name = "obstacle", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run benchmarks over a list of mesh sizes and write the artifacts.
    Run(Box<RunArgs>),
    /// Print the convergence table of a report.csv.
    Table {
        report: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    /// `key = value` file; flags given here override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Benchmark id(s): I, II, III or a comma list.
    #[arg(long)]
    benchmark: Option<String>,
    /// Contact radius of benchmark I.
    #[arg(long = "R")]
    r: Option<f64>,
    /// Load of benchmarks II and III.
    #[arg(long, allow_hyphen_values = true)]
    f: Option<f64>,
    /// Obstacle level of benchmark II.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<f64>,
    /// Obstacle top of benchmark III.
    #[arg(long, allow_hyphen_values = true)]
    phimax: Option<f64>,
    /// Sphere radius of benchmark III.
    #[arg(long)]
    rho: Option<f64>,
    /// Mesh sizes: `1/2..1/64` (dyadic) or a comma list such as `1/8,1/16`.
    #[arg(long)]
    levels: Option<String>,
    /// Output directory (beats OBSTACLE_OUT and the config file).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: number of cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Skip per-level field dumps.
    #[arg(long)]
    no_dump: bool,
    /// PSOR relaxation factor.
    #[arg(long)]
    omega: Option<f64>,
    /// PSOR stopping tolerance.
    #[arg(long)]
    psor_tol: Option<f64>,
    /// Record the PSOR energy trace.
    #[arg(long)]
    psor_trace: bool,
    /// Majorant iterations.
    #[arg(long)]
    n_iter: Option<usize>,
    /// Initial beta.
    #[arg(long)]
    beta0: Option<f64>,
    /// balanced | unweighted | fixed
    #[arg(long)]
    beta_rule: Option<String>,
    /// weighted | unweighted
    #[arg(long)]
    flux_system: Option<String>,
    /// Assemble the load by 3x3 Gauss quadrature of the exact f.
    #[arg(long)]
    exact_load: bool,
}

impl RunArgs {
    fn settings(&self) -> Result<Settings> {
        let mut cfg = match &self.config {
            Some(p) => RawConfig::read(p)?,
            None => RawConfig::default(),
        };
        if let Ok(dir) = std::env::var("OBSTACLE_OUT") {
            if !dir.is_empty() {
                cfg.set("out", dir)?;
            }
        }
        let pairs: [(&str, Option<String>); 15] = [
            ("benchmark", self.benchmark.clone()),
            ("R", self.r.map(|v| v.to_string())),
            ("f", self.f.map(|v| v.to_string())),
            ("phi", self.phi.map(|v| v.to_string())),
            ("phimax", self.phimax.map(|v| v.to_string())),
            ("rho", self.rho.map(|v| v.to_string())),
            ("levels", self.levels.clone()),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
            ("jobs", self.jobs.map(|v| v.to_string())),
            ("omega", self.omega.map(|v| v.to_string())),
            ("psor_tol", self.psor_tol.map(|v| v.to_string())),
            ("n_iter", self.n_iter.map(|v| v.to_string())),
            ("beta0", self.beta0.map(|v| v.to_string())),
            ("beta_rule", self.beta_rule.clone()),
            ("flux_system", self.flux_system.clone()),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                cfg.set(k, v)?;
            }
        }
        if self.no_dump {
            cfg.set("dump", "false")?;
        }
        if self.psor_trace {
            cfg.set("psor_trace", "true")?;
        }
        if self.exact_load {
            cfg.set("load", "quadrature")?;
        }
        Settings::from_raw(&cfg)
    }
}

fn summary(reports: &[MajorantReport]) -> Result<String> {
    let mut csv = Vec::new();
    write_report_csv(&mut csv, reports)?;
    let rows = read_report_csv(csv.as_slice())?;
    let mut s = String::from("1/2 err2 <= J(v) - J(u) <= M\n\n");
    s.push_str(&convergence_table(&rows));
    let bad: Vec<String> = reports
        .iter()
        .filter(|r| !r.chain_ok)
        .map(|r| format!("{} h={}", r.benchmark, format_h(r.h)))
        .collect();
    let _ = writeln!(
        s,
        "\nchain holds on {}/{} runs{}",
        reports.len() - bad.len(),
        reports.len(),
        if bad.is_empty() { String::new() } else { format!("; violated at {}", bad.join(", ")) }
    );
    for r in reports {
        if let Some(radius) = r.contact_radius {
            let _ = writeln!(s, "{} h={}: contact radius R = {radius:.7}", r.benchmark, format_h(r.h));
        }
    }
    Ok(s)
}

fn run(args: &RunArgs) -> Result<()> {
    let settings = args.settings()?;
    fs::create_dir_all(&settings.out)
        .with_context(|| format!("creating output directory {}", settings.out.display()))?;
    let cases: Vec<_> = settings
        .specs
        .iter()
        .flat_map(|s| settings.levels.iter().map(move |&h| (*s, h)))
        .collect();

    let mut pool = ThreadPoolBuilder::new();
    if let Some(n) = settings.jobs {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("building worker pool")?;
    let results = pool.install(|| run_grid(&cases, &settings.options));

    let mut outputs = Vec::with_capacity(results.len());
    for ((spec, h), res) in cases.iter().zip(results) {
        outputs.push(res.with_context(|| format!("benchmark {} at h={}", spec.id(), format_h(*h)))?);
    }
    if settings.dump {
        for o in &outputs {
            let dir = settings.out.join(run_dir_name(&o.report.benchmark, o.report.h));
            dump_run(&dir, o).with_context(|| format!("writing {}", dir.display()))?;
        }
    }
    let reports: Vec<MajorantReport> = outputs.into_iter().map(|o| o.report).collect();
    let path = settings.out.join("report.csv");
    let file = fs::File::create(&path).with_context(|| format!("writing {}", path.display()))?;
    write_report_csv(BufWriter::new(file), &reports)?;
    let text = summary(&reports)?;
    fs::write(settings.out.join("summary.txt"), &text)?;
    print!("{text}");
    Ok(())
}

fn table(path: &PathBuf) -> Result<()> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let rows = read_report_csv(file).with_context(|| format!("reading {}", path.display()))?;
    print!("{}", convergence_table(&rows));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Run(args) => run(args),
        Command::Table { report } => table(report),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
