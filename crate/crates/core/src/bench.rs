//! Benchmark harness: accuracy/timing experiments on synthetic test matrices.
//!
//! A cell is one `(m, n, k, delta, j, seed)` combination. Each test matrix is
//! built once per `(m, n, k, delta)` and reused for every `j` and seed.
//!
//! Runs start from the sampled range `A * Omega` ([`AlsStart::Range`]); with
//! an `m x k` Gaussian `S_0` the `j = 0` error is close to `||A||` instead of
//! a small multiple of `delta`.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::als::{als_run, approximation_error, AlsConfig, AlsStart, ErrorNorm};
use crate::error::{AlsError, Result};
use crate::io::AnyMatrix;
use crate::matrix::DenseMatrix;
use crate::scalar::Scalar;
use crate::spectral::{DEFAULT_POWER_ITERATIONS, DEFAULT_POWER_SEED};
use crate::testmat::{build_test_matrix, TestMatrixSpec, Transform};

/// CSV header of the record stream.
pub const CSV_HEADER: &str = "m,n,transform,k,delta,j,seed,epsilon,t_seconds";

/// The four `(k, delta)` rows of every accuracy table.
pub const TABLE_CELLS: [(usize, f64); 4] = [(2, 1e-3), (10, 1e-3), (2, 1e-11), (10, 1e-11)];

/// The `j` values of every accuracy table.
pub const TABLE_ITERATIONS: [usize; 4] = [0, 1, 2, 10];

/// One row of output. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub m: usize,
    pub n: usize,
    pub transform: String,
    pub k: usize,
    pub delta: f64,
    pub j: usize,
    pub seed: u64,
    /// Spectral error by the power method.
    pub epsilon: f64,
    /// Wall clock of `als_run` alone.
    pub t_seconds: f64,
}

impl ExperimentRecord {
    pub fn ratio(&self) -> f64 {
        self.epsilon / self.delta
    }

    /// `epsilon >= delta - 1e-12`.
    pub fn meets_floor(&self) -> bool {
        self.epsilon >= self.delta - 1e-12
    }
}

/// A cell that could not be run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub j: Option<usize>,
    pub seed: Option<u64>,
    pub error: String,
}

/// How a cell is run and how epsilon is measured.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub start: AlsStart,
    pub power_iterations: usize,
    pub power_seed: u64,
}

impl Default for Measurement {
    fn default() -> Self {
        Measurement {
            start: AlsStart::Range,
            power_iterations: DEFAULT_POWER_ITERATIONS,
            power_seed: DEFAULT_POWER_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub sizes: Vec<(usize, usize)>,
    pub cells: Vec<(usize, f64)>,
    pub iterations: Vec<usize>,
    pub seeds: Vec<u64>,
    pub transform: Transform,
    /// Seed of the orthogonal factors for the real transform.
    pub matrix_seed: u64,
    pub measurement: Measurement,
}

impl SuiteConfig {
    /// 512 x 1024, the four table cells, `j` in {0, 1, 2, 10}, seeds 1..=5.
    pub fn desk() -> Self {
        SuiteConfig {
            sizes: vec![(512, 1024)],
            cells: TABLE_CELLS.to_vec(),
            iterations: TABLE_ITERATIONS.to_vec(),
            seeds: (1..=5).collect(),
            transform: Transform::Dft,
            matrix_seed: 0,
            measurement: Measurement::default(),
        }
    }

    /// The three table sizes, one seed.
    pub fn full() -> Self {
        SuiteConfig {
            sizes: vec![(2048, 4096), (4096, 4096), (4096, 8192)],
            seeds: vec![1],
            ..Self::desk()
        }
    }

    pub fn specs(&self) -> Vec<TestMatrixSpec> {
        let mut out = Vec::new();
        for &(m, n) in &self.sizes {
            for &(k, delta) in &self.cells {
                out.push(TestMatrixSpec::new(m, n, k, delta, self.transform).with_seed(self.matrix_seed));
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(AlsError::config("size list is empty"));
        }
        if self.cells.is_empty() {
            return Err(AlsError::config("(k, delta) list is empty"));
        }
        if self.iterations.is_empty() {
            return Err(AlsError::config("iteration list is empty"));
        }
        if self.seeds.is_empty() {
            return Err(AlsError::config("seed list is empty"));
        }
        if self.measurement.power_iterations == 0 {
            return Err(AlsError::config("power iterations must be positive"));
        }
        for spec in self.specs() {
            spec.validate()?;
        }
        Ok(())
    }
}

/// Build the test matrix and run one cell.
pub fn run_cell(spec: &TestMatrixSpec, j: usize, seed: u64) -> Result<ExperimentRecord> {
    let a = build_test_matrix(spec)?;
    run_cell_on(&a, spec, j, seed, Measurement::default())
}

/// Run one cell on a prebuilt test matrix for `spec`.
pub fn run_cell_on(a: &AnyMatrix, spec: &TestMatrixSpec, j: usize, seed: u64, meas: Measurement) -> Result<ExperimentRecord> {
    if a.shape() != (spec.m, spec.n) {
        return Err(AlsError::DimensionMismatch { op: "run_cell", lhs: a.shape(), rhs: (spec.m, spec.n) });
    }
    let (epsilon, t_seconds) = match a {
        AnyMatrix::Real(a) => measure(a, spec.k, j, seed, meas)?,
        AnyMatrix::Complex(a) => measure(a, spec.k, j, seed, meas)?,
    };
    Ok(ExperimentRecord {
        m: spec.m,
        n: spec.n,
        transform: spec.transform.as_str().to_string(),
        k: spec.k,
        delta: spec.delta,
        j,
        seed,
        epsilon,
        t_seconds,
    })
}

fn measure<T: Scalar>(a: &DenseMatrix<T>, k: usize, j: usize, seed: u64, meas: Measurement) -> Result<(f64, f64)> {
    let config = AlsConfig::new(k, j, seed).with_start(meas.start);
    let start = Instant::now();
    let f = als_run(a, &config)?;
    let t = start.elapsed().as_secs_f64();
    let norm = ErrorNorm::Spectral { iterations: meas.power_iterations, seed: meas.power_seed };
    Ok((approximation_error(a, &f, norm)?, t))
}

/// Largest epsilon/delta seen for one `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub j: usize,
    pub max_ratio: f64,
    pub records: usize,
}

/// Median `als_run` time for one `(k, j)` at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub k: usize,
    pub j: usize,
    pub m: usize,
    pub n: usize,
    pub entries: usize,
    pub median_t: f64,
    /// `median_t` divided by the previous (smaller) size's `median_t`.
    pub growth: Option<f64>,
    /// The matching ratio of entry counts.
    pub entries_growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteSummary {
    pub ratio_by_j: Vec<RatioSummary>,
    pub scaling: Vec<ScalingPoint>,
    /// Records with `epsilon < delta - 1e-12`.
    pub floor_violations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub records: Vec<ExperimentRecord>,
    pub failures: Vec<CellFailure>,
    pub summary: SuiteSummary,
}

/// Run every cell. Failures are recorded and the suite moves on.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteReport> {
    run_suite_with(config, |_| {})
}

/// [`run_suite`] with a callback fired after each record.
pub fn run_suite_with(config: &SuiteConfig, mut on_record: impl FnMut(&ExperimentRecord)) -> Result<SuiteReport> {
    config.validate()?;
    let mut records = Vec::new();
    let mut failures = Vec::new();
    for spec in config.specs() {
        let a = match build_test_matrix(&spec) {
            Ok(a) => a,
            Err(e) => {
                failures.push(failure(&spec, None, None, &e));
                continue;
            }
        };
        for &j in &config.iterations {
            for &seed in &config.seeds {
                match run_cell_on(&a, &spec, j, seed, config.measurement) {
                    Ok(r) => {
                        on_record(&r);
                        records.push(r);
                    }
                    Err(e) => failures.push(failure(&spec, Some(j), Some(seed), &e)),
                }
            }
        }
    }
    let summary = summarize(&records);
    Ok(SuiteReport { records, failures, summary })
}

fn failure(spec: &TestMatrixSpec, j: Option<usize>, seed: Option<u64>, e: &AlsError) -> CellFailure {
    CellFailure { m: spec.m, n: spec.n, k: spec.k, delta: spec.delta, j, seed, error: e.to_string() }
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let h = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[h]
    } else {
        0.5 * (xs[h - 1] + xs[h])
    }
}

pub fn summarize(records: &[ExperimentRecord]) -> SuiteSummary {
    let mut by_j: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for r in records {
        let e = by_j.entry(r.j).or_insert((0.0, 0));
        e.0 = e.0.max(r.ratio());
        e.1 += 1;
    }
    let ratio_by_j = by_j
        .into_iter()
        .map(|(j, (max_ratio, records))| RatioSummary { j, max_ratio, records })
        .collect();

    // (k, j) -> entries -> (m, n, times)
    let mut times: BTreeMap<(usize, usize), BTreeMap<usize, (usize, usize, Vec<f64>)>> = BTreeMap::new();
    for r in records {
        times
            .entry((r.k, r.j))
            .or_default()
            .entry(r.m * r.n)
            .or_insert((r.m, r.n, Vec::new()))
            .2
            .push(r.t_seconds);
    }
    let mut scaling = Vec::new();
    for ((k, j), sizes) in times {
        let mut prev: Option<(usize, f64)> = None;
        for (entries, (m, n, mut ts)) in sizes {
            let median_t = median(&mut ts);
            scaling.push(ScalingPoint {
                k,
                j,
                m,
                n,
                entries,
                median_t,
                growth: prev.map(|(_, t)| median_t / t),
                entries_growth: prev.map(|(e, _)| entries as f64 / e as f64),
            });
            prev = Some((entries, median_t));
        }
    }

    SuiteSummary {
        ratio_by_j,
        scaling,
        floor_violations: records.iter().filter(|r| !r.meets_floor()).count(),
    }
}

/// Per-cell verdict on the accuracy-table pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeVerdict {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub j: usize,
    pub ratios: Vec<f64>,
    pub passing: usize,
    pub pass: bool,
}

/// Check the table pattern: for `j >= 2` at least 4 of every 5 seeds have
/// `epsilon/delta <= 1.25`, for `j = 1` the bound is 2.0, and `j = 0` ratios
/// must lie in `[1, 500]` for the same share of seeds.
pub fn table_shape(records: &[ExperimentRecord]) -> Vec<ShapeVerdict> {
    let mut groups: BTreeMap<(usize, usize, usize, u64, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        groups.entry((r.m, r.n, r.k, r.delta.to_bits(), r.j)).or_default().push(r.ratio());
    }
    groups
        .into_iter()
        .map(|((m, n, k, delta, j), ratios)| {
            let ok = |x: f64| match j {
                0 => (1.0..=500.0).contains(&x),
                1 => x <= 2.0,
                _ => x <= 1.25,
            };
            let passing = ratios.iter().filter(|&&x| ok(x)).count();
            // at least 4 of 5, scaled to the seed count
            let pass = 5 * passing >= 4 * ratios.len();
            ShapeVerdict { m, n, k, delta: f64::from_bits(delta), j, ratios, passing, pass }
        })
        .collect()
}

pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], w: W) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    wtr.write_record(CSV_HEADER.split(','))?;
    for r in records {
        wtr.serialize(r)?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn write_report_json<W: Write>(report: &SuiteReport, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, report)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(j: usize, k: usize, m: usize, n: usize, ratio: f64, t: f64) -> ExperimentRecord {
        ExperimentRecord {
            m,
            n,
            transform: "dft".into(),
            k,
            delta: 1e-3,
            j,
            seed: 1,
            epsilon: ratio * 1e-3,
            t_seconds: t,
        }
    }

    #[test]
    fn empty_lists_are_rejected() {
        let mut c = SuiteConfig::desk();
        c.seeds.clear();
        assert!(matches!(c.validate(), Err(AlsError::Config(_))));
        let mut c = SuiteConfig::desk();
        c.iterations.clear();
        assert!(c.validate().is_err());
        let mut c = SuiteConfig::desk();
        c.sizes.clear();
        assert!(run_suite(&c).is_err());
    }

    #[test]
    fn invalid_spec_is_a_config_error() {
        let mut c = SuiteConfig::desk();
        c.cells = vec![(3, 1e-3)];
        assert!(matches!(c.validate(), Err(AlsError::Config(_))));
    }

    #[test]
    fn default_suite_has_sixteen_rows_per_size() {
        let mut c = SuiteConfig::desk();
        c.seeds = vec![1];
        assert_eq!(c.specs().len() * c.iterations.len() * c.seeds.len(), 16);
        let c = SuiteConfig::full();
        assert_eq!(c.specs().len() * c.iterations.len(), 48);
        c.validate().unwrap();
    }

    #[test]
    fn csv_header_and_columns() {
        let mut buf = Vec::new();
        write_records_csv(&[record(2, 10, 4, 8, 1.5, 0.25)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(lines.next(), Some("4,8,dft,10,0.001,2,1,0.0015,0.25"));
        assert_eq!(lines.next(), None);
    }

    #[test]
    fn json_keeps_field_order() {
        let v = serde_json::to_string(&record(0, 2, 4, 8, 1.0, 0.5)).unwrap();
        let keys: Vec<&str> = CSV_HEADER.split(',').collect();
        let mut last = 0;
        for key in keys {
            let pos = v.find(&format!("\"{key}\"")).unwrap();
            assert!(pos >= last);
            last = pos;
        }
    }

    #[test]
    fn summary_ratios_and_scaling() {
        let rs = vec![
            record(0, 2, 4, 8, 20.0, 1.0),
            record(0, 2, 4, 8, 30.0, 3.0),
            record(2, 2, 4, 8, 1.0, 2.0),
            record(0, 2, 8, 16, 25.0, 8.0),
            record(2, 2, 4, 8, 0.5, 2.0),
        ];
        let s = summarize(&rs);
        assert_eq!(s.ratio_by_j[0], RatioSummary { j: 0, max_ratio: 30.0, records: 3 });
        assert_eq!(s.ratio_by_j[1].max_ratio, 1.0);
        assert_eq!(s.floor_violations, 1);
        let p: Vec<_> = s.scaling.iter().filter(|p| p.j == 0).collect();
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].median_t, 2.0);
        assert_eq!(p[1].growth, Some(4.0));
        assert_eq!(p[1].entries_growth, Some(4.0));
    }

    #[test]
    fn shape_allows_one_outlier_in_five() {
        let mut rs: Vec<_> = (0..5).map(|i| record(2, 2, 4, 8, 1.0 + 0.01 * i as f64, 1.0)).collect();
        assert!(table_shape(&rs)[0].pass);
        rs[0].epsilon = 3e-3;
        assert!(table_shape(&rs)[0].pass);
        rs[1].epsilon = 3e-3;
        let v = &table_shape(&rs)[0];
        assert!(!v.pass);
        assert_eq!(v.passing, 3);
    }

    #[test]
    fn small_cell_runs() {
        let spec = TestMatrixSpec::new(32, 48, 2, 1e-3, Transform::RealOrthogonal).with_seed(4);
        let r = run_cell(&spec, 2, 9).unwrap();
        assert_eq!((r.m, r.n, r.k, r.j, r.seed), (32, 48, 2, 2, 9));
        assert_eq!(r.transform, "real_orthogonal");
        assert!(r.t_seconds > 0.0);
        assert!(r.ratio() < 1.25, "{}", r.ratio());
        // The tail sits just below delta, so 100 power steps can land a hair
        // under it; the exact error never does.
        assert!(r.ratio() > 1.0 - 1e-3);
        let AnyMatrix::Real(a) = build_test_matrix(&spec).unwrap() else { unreachable!() };
        let f = als_run(&a, &AlsConfig::new(2, 2, 9).with_start(AlsStart::Range)).unwrap();
        assert!(approximation_error(&a, &f, ErrorNorm::SpectralExact).unwrap() >= spec.delta - 1e-12);
    }

    #[test]
    fn suite_is_repeatable() {
        let c = SuiteConfig {
            sizes: vec![(16, 24)],
            cells: vec![(2, 1e-3)],
            iterations: vec![0, 1],
            seeds: vec![1, 2],
            transform: Transform::Dft,
            matrix_seed: 0,
            measurement: Measurement::default(),
        };
        let report = run_suite(&c).unwrap();
        assert_eq!(report.records.len(), 4);
        assert!(report.failures.is_empty());
        let again = run_suite(&c).unwrap();
        let eps = |r: &SuiteReport| r.records.iter().map(|x| x.epsilon.to_bits()).collect::<Vec<_>>();
        assert_eq!(eps(&report), eps(&again));
    }
}
