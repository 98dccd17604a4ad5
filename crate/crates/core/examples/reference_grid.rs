//! Runs the three reference benchmarks on h = 1/2 .. 1/64 and prints the
//! inequality chain `1/2 err2 <= J(v) - J(u) <= M` for every level.
//!
//! `cargo run --release -p obstacle-core --example reference_grid`

use obstacle_core::benchmarks::BenchmarkSpec;
use obstacle_core::experiment::{dyadic_levels, run_grid, RunOptions};
use obstacle_core::io::{convergence_table, read_report_csv, write_report_csv};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        BenchmarkSpec::Square { contact_radius: 0.7 },
        BenchmarkSpec::RingConstant { f: -10.0, phi: -1.0 },
        BenchmarkSpec::RingSpherical { f: -10.0, phi_max: -1.0, rho: 1.2 },
    ];
    let cases: Vec<_> = specs
        .iter()
        .flat_map(|s| dyadic_levels(6).into_iter().map(move |h| (*s, h)))
        .collect();
    let reports = run_grid(&cases, &RunOptions::default())
        .into_iter()
        .map(|r| r.map(|o| o.report))
        .collect::<Result<Vec<_>, _>>()?;
    let mut csv = Vec::new();
    write_report_csv(&mut csv, &reports)?;
    print!("{}", convergence_table(&read_report_csv(csv.as_slice())?));
    Ok(())
}
