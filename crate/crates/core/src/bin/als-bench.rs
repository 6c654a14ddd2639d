//! `als-bench`: accuracy/timing tables for randomized-start ALS, and the
//! verification suites.
//!
//! Exit status: 0 on success, 1 when a verification suite fails or a run
//! cannot complete, 2 on a configuration error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};

use als_core::bench::{self, Measurement, SuiteConfig, SuiteReport, TABLE_CELLS, TABLE_ITERATIONS};
use als_core::error::AlsError;
use als_core::{parallel, verify, AlsStart, Transform};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformArg {
    Dft,
    Real,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StartArg {
    Range,
    Gaussian,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "als-bench", version, about = "Rank-k approximation by alternating least squares from a random start")]
struct Cli {
    /// Rows of the test matrix [default: 512]
    #[arg(long, conflicts_with = "full")]
    m: Option<usize>,
    /// Columns of the test matrix [default: 1024]
    #[arg(long, conflicts_with = "full")]
    n: Option<usize>,
    /// Target ranks, comma separated (even) [default: 2,10]
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Best rank-k errors, comma separated [default: 1e-3,1e-11]
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    /// Iteration counts j, comma separated [default: 0,1,2,10]
    #[arg(long, value_delimiter = ',')]
    iters: Vec<usize>,
    /// A count N (seeds 1..=N) or an explicit comma list [default: 5, or 1 with --full]
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, value_enum, default_value = "dft")]
    transform: TransformArg,
    /// How S_0 is drawn
    #[arg(long, value_enum, default_value = "range")]
    start: StartArg,
    /// Seed of the orthogonal factors for --transform real
    #[arg(long, default_value_t = 0)]
    matrix_seed: u64,
    /// Power iterations used to measure epsilon
    #[arg(long, default_value_t = als_core::spectral::DEFAULT_POWER_ITERATIONS)]
    power_iters: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Output file [default: stdout]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table sizes 2048x4096, 4096x4096, 4096x8192
    #[arg(long)]
    full: bool,
    /// Single-threaded kernels
    #[arg(long)]
    serial: bool,
    /// Run the verification suites instead of the benchmark
    #[arg(long)]
    verify: bool,
    /// Suppress per-record progress on stderr
    #[arg(long, short)]
    quiet: bool,
}

fn parse_seeds(text: &str) -> Result<Vec<u64>, AlsError> {
    let text = text.trim();
    if !text.contains(',') {
        let count: u64 = text.parse().map_err(|_| AlsError::config(format!("bad seed count {text:?}")))?;
        return Ok((1..=count).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| AlsError::config(format!("bad seed {s:?}"))))
        .collect()
}

fn suite_config(cli: &Cli) -> Result<SuiteConfig, AlsError> {
    let mut c = if cli.full { SuiteConfig::full() } else { SuiteConfig::desk() };
    if !cli.full {
        c.sizes = vec![(cli.m.unwrap_or(512), cli.n.unwrap_or(1024))];
    }
    if !cli.k.is_empty() || !cli.delta.is_empty() {
        let ks = if cli.k.is_empty() { vec![2, 10] } else { cli.k.clone() };
        let ds = if cli.delta.is_empty() { vec![1e-3, 1e-11] } else { cli.delta.clone() };
        c.cells = ks.iter().flat_map(|&k| ds.iter().map(move |&d| (k, d))).collect();
    } else {
        c.cells = TABLE_CELLS.to_vec();
    }
    c.iterations = if cli.iters.is_empty() { TABLE_ITERATIONS.to_vec() } else { cli.iters.clone() };
    if let Some(s) = &cli.seeds {
        c.seeds = parse_seeds(s)?;
    }
    c.transform = match cli.transform {
        TransformArg::Dft => Transform::Dft,
        TransformArg::Real => Transform::RealOrthogonal,
    };
    c.matrix_seed = cli.matrix_seed;
    c.measurement = Measurement {
        start: match cli.start {
            StartArg::Range => AlsStart::Range,
            StartArg::Gaussian => AlsStart::Gaussian,
        },
        power_iterations: cli.power_iters,
        ..Measurement::default()
    };
    c.validate()?;
    Ok(c)
}

fn print_summary(report: &SuiteReport) {
    let s = &report.summary;
    eprintln!("max epsilon/delta by j:");
    for r in &s.ratio_by_j {
        eprintln!("  j = {:>2}: {:>10.3} over {} records", r.j, r.max_ratio, r.records);
    }
    eprintln!("median t by size (k, j):");
    for p in &s.scaling {
        let growth = match (p.growth, p.entries_growth) {
            (Some(g), Some(e)) => format!("  x{g:.2} for x{e:.2} entries"),
            _ => String::new(),
        };
        eprintln!("  k = {:>2} j = {:>2} {}x{}: {:.3e} s{growth}", p.k, p.j, p.m, p.n, p.median_t);
    }
    if s.floor_violations > 0 {
        eprintln!(
            "{} records have epsilon below delta - 1e-12 (power-method shortfall on a tail clustered at delta)",
            s.floor_violations
        );
    }
    for v in bench::table_shape(&report.records).iter().filter(|v| !v.pass) {
        eprintln!(
            "table pattern not met: {}x{} k = {} delta = {:e} j = {}: {}/{} seeds in band, ratios {:?}",
            v.m,
            v.n,
            v.k,
            v.delta,
            v.j,
            v.passing,
            v.ratios.len(),
            v.ratios
        );
    }
    for f in &report.failures {
        eprintln!("cell failed: {f:?}");
    }
}

fn run_verify() -> ExitCode {
    let outcomes = verify::run_all();
    let mut ok = true;
    for o in &outcomes {
        println!("{}", o.line());
        for f in &o.failures {
            println!("    {f}");
        }
        ok &= o.pass();
    }
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

/// `Ok(false)` when some cells failed.
fn run_bench(cli: &Cli, config: &SuiteConfig) -> Result<bool, AlsError> {
    if cli.full {
        for spec in config.specs() {
            eprintln!(
                "large tier: {}x{} {} needs about {:.2} GB while building A",
                spec.m,
                spec.n,
                spec.transform,
                spec.required_bytes() as f64 / 1e9
            );
        }
    }
    let quiet = cli.quiet;
    let report = bench::run_suite_with(config, |r| {
        if !quiet {
            eprintln!(
                "{}x{} k = {:>2} delta = {:e} j = {:>2} seed = {}: epsilon = {:.2e} (x{:.3}), t = {:.3e} s",
                r.m,
                r.n,
                r.k,
                r.delta,
                r.j,
                r.seed,
                r.epsilon,
                r.ratio(),
                r.t_seconds
            );
        }
    })?;
    let sink: Box<dyn Write> = match &cli.out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match cli.format {
        Format::Csv => bench::write_records_csv(&report.records, sink)?,
        Format::Json => bench::write_report_json(&report, sink)?,
    }
    print_summary(&report);
    Ok(report.failures.is_empty())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    parallel::set_serial(cli.serial);
    if cli.verify {
        return run_verify();
    }
    let config = match suite_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("als-bench: {e}");
            return ExitCode::from(2);
        }
    };
    match run_bench(&cli, &config) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e @ (AlsError::Config(_) | AlsError::BudgetExceeded { .. })) => {
            eprintln!("als-bench: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("als-bench: {e}");
            ExitCode::from(1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_count_or_list() {
        assert_eq!(parse_seeds("3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_seeds("7,9, 11").unwrap(), vec![7, 9, 11]);
        assert!(parse_seeds("x").is_err());
        assert!(parse_seeds("0").unwrap().is_empty());
    }

    #[test]
    fn defaults_are_the_desk_suite() {
        let cli = Cli::parse_from(["als-bench"]);
        assert_eq!(suite_config(&cli).unwrap(), SuiteConfig::desk());
    }

    #[test]
    fn empty_seed_list_is_a_config_error() {
        let cli = Cli::parse_from(["als-bench", "--seeds", "0"]);
        assert!(matches!(suite_config(&cli), Err(AlsError::Config(_))));
    }

    #[test]
    fn cells_are_the_product_of_k_and_delta() {
        let cli = Cli::parse_from(["als-bench", "--k", "2,4", "--delta", "0.1", "--m", "16", "--n", "20"]);
        let c = suite_config(&cli).unwrap();
        assert_eq!(c.cells, vec![(2, 0.1), (4, 0.1)]);
        assert_eq!(c.sizes, vec![(16, 20)]);
    }

    #[test]
    fn full_conflicts_with_explicit_size() {
        assert!(Cli::try_parse_from(["als-bench", "--full", "--m", "8"]).is_err());
    }
}
