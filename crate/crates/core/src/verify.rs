//! Numerical checks of the structural facts behind the iteration, run on
//! small random instances.
//!
//! Each suite returns a [`SuiteOutcome`] with the worst observed discrepancy
//! and a description of every failed check. `als-bench --verify` runs them all.

use std::time::Instant;

use serde::Serialize;

use crate::als::{als_init, als_run, approximation_error, AlsConfig, AlsMode, AlsStart, ErrorNorm};
use crate::error::Result;
use crate::io::AnyMatrix;
use crate::lstsq::lstsq_solve;
use crate::matrix::DenseMatrix;
use crate::qr::{projector, rank_estimate};
use crate::random::{gaussian_matrix, GaussianStream};
use crate::scalar::{c64, Scalar};
use crate::spectral::{power_method_norm, DEFAULT_POWER_SEED};
use crate::svd::singular_values;
use crate::testmat::{build_test_matrix, matrix_with_spectrum, sigma_spectrum, TestMatrixSpec, Transform};

#[derive(Debug, Clone, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub instances: usize,
    pub checks: usize,
    /// Largest discrepancy seen, in the units of `tolerance`.
    pub worst: f64,
    pub tolerance: f64,
    pub failures: Vec<String>,
    pub seconds: f64,
}

impl SuiteOutcome {
    fn new(name: &'static str, tolerance: f64) -> Self {
        SuiteOutcome { name, instances: 0, checks: 0, worst: 0.0, tolerance, failures: Vec::new(), seconds: 0.0 }
    }

    pub fn pass(&self) -> bool {
        self.failures.is_empty()
    }

    /// Record `value <= tolerance`.
    fn check(&mut self, value: f64, what: impl FnOnce() -> String) {
        self.checks += 1;
        self.worst = self.worst.max(value);
        if !(value <= self.tolerance) {
            self.failures.push(format!("{}: {value:.3e} > {:.1e}", what(), self.tolerance));
        }
    }

    /// Record a boolean condition; `worst` is untouched.
    fn require(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn timed(mut self, start: Instant) -> Self {
        self.seconds = start.elapsed().as_secs_f64();
        self
    }

    pub fn line(&self) -> String {
        format!(
            "{} {}: {} instances, {} checks, worst {:.3e} (tol {:.1e}), {:.3}s",
            if self.pass() { "PASS" } else { "FAIL" },
            self.name,
            self.instances,
            self.checks,
            self.worst,
            self.tolerance,
            self.seconds
        )
    }
}

/// Inverse of a small square matrix by Gauss-Jordan elimination with
/// partial pivoting, independent of the QR path used by the solver.
fn gauss_jordan_inverse(m: &DenseMatrix<f64>) -> DenseMatrix<f64> {
    let n = m.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut inv: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        inv.swap(c, p);
        let d = a[c][c];
        for j in 0..n {
            a[c][j] /= d;
            inv[c][j] /= d;
        }
        for r in 0..n {
            if r != c {
                let f = a[r][c];
                for j in 0..n {
                    a[r][j] -= f * a[c][j];
                    inv[r][j] -= f * inv[c][j];
                }
            }
        }
    }
    DenseMatrix::from_rows(&inv).expect("square")
}

fn aat<T: Scalar>(a: &DenseMatrix<T>, x: &DenseMatrix<T>) -> DenseMatrix<T> {
    a.matmul(&a.adjoint_matmul(x).expect("shapes")).expect("shapes")
}

/// Spectrum geometrically spaced from 1 down to `1/cond`.
fn graded(len: usize, cond: f64) -> Vec<f64> {
    (0..len).map(|i| cond.powf(-(i as f64) / (len.max(2) - 1) as f64)).collect()
}

/// `col(S_i) = col((A A*)^i S_0)` for `i = 1, 2, 3`, by projector distance.
pub fn column_space_suite(instances: usize) -> SuiteOutcome {
    let start = Instant::now();
    let mut out = SuiteOutcome::new("column space", 1e-8);
    for idx in 0..instances as u64 {
        out.instances += 1;
        let a = gaussian_matrix::<f64>(8, 6, 1000 + idx);
        let seed = 2000 + idx;
        let mut state = match als_init(&a, AlsConfig::new(2, 3, seed)) {
            Ok(s) => s,
            Err(e) => {
                out.require(false, || format!("instance {idx}: {e}"));
                continue;
            }
        };
        let mut w = gaussian_matrix::<f64>(8, 2, seed);
        for i in 1..=3 {
            if let Err(e) = state.update_t().and_then(|_| state.update_s()) {
                out.require(false, || format!("instance {idx}, i = {i}: {e}"));
                break;
            }
            w = aat(&a, &w);
            w = w.scale(1.0 / w.frobenius_norm());
            let d = projector(state.s()).sub(&projector(&w)).expect("shapes").frobenius_norm();
            out.check(d, || format!("instance {idx}, i = {i}"));
        }
    }
    out.timed(start)
}

/// The eight ranks of `S_0* A, T_0, A T_0*, S_1, S_1* A, T_1, A T_1*, S_2`.
pub fn rank_chain<T: Scalar>(a: &DenseMatrix<T>, k: usize, seed: u64) -> Result<[usize; 8]> {
    let cfg = AlsConfig::new(k, 2, seed).with_pinv_fallback(true);
    let mut st = als_init(a, cfg)?;
    let mut ranks = [0; 8];
    ranks[0] = rank_estimate(&st.s().adjoint_matmul(a)?);
    st.update_t()?;
    let t0 = st.t().expect("updated").clone();
    ranks[1] = rank_estimate(&t0);
    ranks[2] = rank_estimate(&a.matmul_adjoint(&t0)?);
    st.update_s()?;
    ranks[3] = rank_estimate(st.s());
    ranks[4] = rank_estimate(&st.s().adjoint_matmul(a)?);
    st.update_t()?;
    let t1 = st.t().expect("updated").clone();
    ranks[5] = rank_estimate(&t1);
    ranks[6] = rank_estimate(&a.matmul_adjoint(&t1)?);
    st.update_s()?;
    ranks[7] = rank_estimate(st.s());
    Ok(ranks)
}

/// All eight chain ranks agree, on generic instances (rank `k`) and on
/// instances with `rank(A) = k - 1` (rank `k - 1`).
pub fn rank_chain_suite(random: usize, deficient: usize) -> SuiteOutcome {
    let start = Instant::now();
    let mut out = SuiteOutcome::new("rank chain", 0.0);
    let run = |out: &mut SuiteOutcome, a: &DenseMatrix<f64>, k: usize, want: usize, label: String| {
        out.instances += 1;
        match rank_chain(a, k, 3000 + out.instances as u64) {
            Ok(r) => out.require(r.iter().all(|&x| x == want), || format!("{label}: ranks {r:?}, expected {want}")),
            Err(e) => out.require(false, || format!("{label}: {e}")),
        }
    };
    for idx in 0..random as u64 {
        let (m, n) = (10 + (idx % 3) as usize, 8 + (idx % 4) as usize);
        let k = 1 + (idx % 4) as usize;
        let a = gaussian_matrix::<f64>(m, n, 4000 + idx);
        run(&mut out, &a, k, k, format!("random {m}x{n} k = {k}"));
    }
    for idx in 0..deficient as u64 {
        let k = 2 + (idx % 3) as usize;
        let g = gaussian_matrix::<f64>(10, k - 1, 5000 + idx);
        let h = gaussian_matrix::<f64>(k - 1, 9, 6000 + idx);
        let a = g.matmul(&h).expect("shapes");
        run(&mut out, &a, k, k - 1, format!("rank {} of 10x9, k = {k}", k - 1));
    }
    out.timed(start)
}

/// Raw mode: `S_i = (A A*)^i S_0 B_0 ... B_{i-1}` with
/// `B_l = (S_l* A A* S_l)^{-1} S_l* S_l`, for `i <= 3` and `cond(A) <= 100`.
pub fn unrolled_recurrence_suite(instances: usize) -> SuiteOutcome {
    let start = Instant::now();
    let mut out = SuiteOutcome::new("unrolled recurrence", 1e-8);
    for idx in 0..instances as u64 {
        out.instances += 1;
        let (m, n, k) = (8 + (idx % 3) as usize, 6 + (idx % 2) as usize, 2 + (idx % 2) as usize);
        let a = matrix_with_spectrum::<f64>(m, n, &graded(m.min(n), 100.0), 7000 + idx);
        let cfg = AlsConfig::new(k, 3, 8000 + idx).with_mode(AlsMode::Raw);
        let mut st = match als_init(&a, cfg) {
            Ok(s) => s,
            Err(e) => {
                out.require(false, || format!("instance {idx}: {e}"));
                continue;
            }
        };
        let s0 = st.s().clone();
        let mut power = s0.clone();
        let mut bs = DenseMatrix::<f64>::identity(k);
        for i in 1..=3 {
            let si = st.s().clone();
            let gram_aa = si.adjoint_matmul(&aat(&a, &si)).expect("shapes");
            let b = gauss_jordan_inverse(&gram_aa).matmul(&si.adjoint_matmul(&si).expect("shapes")).expect("shapes");
            bs = bs.matmul(&b).expect("shapes");
            power = aat(&a, &power);
            if let Err(e) = st.update_t().and_then(|_| st.update_s()) {
                out.require(false, || format!("instance {idx}, i = {i}: {e}"));
                break;
            }
            let rhs = power.matmul(&bs).expect("shapes");
            let d = st.s().relative_distance(&rhs).expect("shapes");
            out.check(d, || format!("instance {idx} ({m}x{n}, k = {k}), i = {i}"));
        }
    }
    out.timed(start)
}

/// `T = lstsq_solve(S, A)` is never beaten by a perturbation in either the
/// Frobenius or the spectral norm (by more than `1e-12 ||A||`).
pub fn minimizer_suite(instances: usize, perturbations: usize) -> SuiteOutcome {
    let start = Instant::now();
    let mut out = SuiteOutcome::new("least-squares minimizer", 1e-12);
    let mut rng = GaussianStream::new(9000);
    for idx in 0..instances as u64 {
        out.instances += 1;
        let (m, n, k) = (8 + (idx % 4) as usize, 6 + (idx % 3) as usize, 1 + (idx % 4) as usize);
        let (sa, sb) = (9100 + idx, 9200 + idx);
        let r = if idx % 2 == 0 {
            check_minimizer(&gaussian_matrix::<f64>(m, k, sa), &gaussian_matrix::<f64>(m, n, sb), perturbations, &mut rng)
        } else {
            check_minimizer(&gaussian_matrix::<c64>(m, k, sa), &gaussian_matrix::<c64>(m, n, sb), perturbations, &mut rng)
        };
        record_minimizer(&mut out, idx, r);
    }
    out.timed(start)
}

/// Worst (frobenius, spectral) loss of the optimum relative to `||A||`.
fn check_minimizer<T: Scalar>(s: &DenseMatrix<T>, a: &DenseMatrix<T>, perturbations: usize, rng: &mut GaussianStream) -> Result<Vec<(f64, f64)>> {
    let t_opt = lstsq_solve(s, a)?;
    let fro = |t: &DenseMatrix<T>| a.sub(&s.matmul(t).expect("shapes")).expect("shapes").frobenius_norm();
    let spec = |t: &DenseMatrix<T>| singular_values(&a.sub(&s.matmul(t).expect("shapes")).expect("shapes"))[0];
    let (f0, s0) = (fro(&t_opt), spec(&t_opt));
    let (na_f, na_2) = (a.frobenius_norm(), singular_values(a)[0]);
    let mut out = Vec::with_capacity(perturbations);
    for p in 0..perturbations {
        // Perturbation sizes sweep 1e0 down to 1e-9.
        let size = 10f64.powi(-((p % 10) as i32));
        let d = DenseMatrix::from_vec(t_opt.rows(), t_opt.cols(), rng.vector::<T>(t_opt.rows() * t_opt.cols()))?;
        let t = t_opt.add(&d.scale(T::from_real(size)))?;
        out.push(((f0 - fro(&t)) / na_f, (s0 - spec(&t)) / na_2));
    }
    Ok(out)
}

fn record_minimizer(out: &mut SuiteOutcome, idx: u64, r: Result<Vec<(f64, f64)>>) {
    match r {
        Ok(losses) => {
            for (p, (lf, ls)) in losses.into_iter().enumerate() {
                out.check(lf, || format!("instance {idx}, perturbation {p}, Frobenius"));
                out.check(ls, || format!("instance {idx}, perturbation {p}, spectral"));
            }
        }
        Err(e) => out.require(false, || format!("instance {idx}: {e}")),
    }
}

/// Tracked Frobenius errors never increase (slack `1e-12 ||A||_F`) and the
/// final spectral error is at least `sigma_{k+1} - 1e-10 sigma_1`, by a dense
/// SVD of the residual. The power estimate must not exceed that exact value.
pub fn monotonicity_floor_suite() -> SuiteOutcome {
    let start = Instant::now();
    let mut out = SuiteOutcome::new("monotone trace and optimality floor", 1e-12);
    let mut idx = 0u64;
    for &(m, n) in &[(10usize, 8usize), (20, 15), (16, 40)] {
        for k in [1usize, 2, 4] {
            for j in [0usize, 1, 3] {
                for start_kind in [AlsStart::Gaussian, AlsStart::Range] {
                    idx += 1;
                    let cfg = AlsConfig::new(k, j, 100 + idx).with_tracking(true).with_start(start_kind);
                    if idx % 2 == 0 {
                        let a = gaussian_matrix::<f64>(m, n, 10_000 + idx);
                        monotone_case(&mut out, &a, &cfg);
                    } else {
                        let a = gaussian_matrix::<c64>(m, n, 10_000 + idx);
                        monotone_case(&mut out, &a, &cfg);
                    }
                }
            }
        }
    }
    for (transform, k, delta) in [(Transform::Dft, 2, 1e-3), (Transform::RealOrthogonal, 10, 1e-11), (Transform::Dft, 10, 1e-3)] {
        for j in [0usize, 1, 2] {
            idx += 1;
            let spec = TestMatrixSpec::new(48, 64, k, delta, transform).with_seed(idx);
            let cfg = AlsConfig::new(k, j, idx).with_tracking(true).with_start(AlsStart::Range);
            match build_test_matrix(&spec) {
                Ok(AnyMatrix::Real(a)) => monotone_case(&mut out, &a, &cfg),
                Ok(AnyMatrix::Complex(a)) => monotone_case(&mut out, &a, &cfg),
                Err(e) => out.require(false, || format!("{spec:?}: {e}")),
            }
        }
    }
    out.timed(start)
}

fn monotone_case<T: Scalar>(out: &mut SuiteOutcome, a: &DenseMatrix<T>, cfg: &AlsConfig) {
    out.instances += 1;
    let label = || format!("{}x{} k = {} j = {} {:?}", a.rows(), a.cols(), cfg.rank_k, cfg.iterations_j, cfg.start);
    let f = match als_run(a, cfg) {
        Ok(f) => f,
        Err(e) => {
            out.require(false, || format!("{}: {e}", label()));
            return;
        }
    };
    let trace = f.frobenius_error_trace.as_deref().unwrap_or(&[]);
    out.require(trace.len() == 2 * cfg.iterations_j + 1, || format!("{}: trace length {}", label(), trace.len()));
    let na = a.frobenius_norm();
    for (h, w) in trace.windows(2).enumerate() {
        out.check((w[1] - w[0]) / na, || format!("{}: half-step {h}", label()));
    }
    let sv = singular_values(a);
    let floor = sv.get(cfg.rank_k).copied().unwrap_or(0.0) - 1e-10 * sv[0];
    let exact = approximation_error(a, &f, ErrorNorm::SpectralExact).expect("shapes");
    out.require(exact >= floor, || format!("{}: spectral error {exact:.6e} below floor {floor:.6e}", label()));
    // Both values carry rounding of order eps ||A|| from forming the residual.
    let est = approximation_error(a, &f, ErrorNorm::spectral()).expect("shapes");
    out.require(est <= exact + 1e-12 * sv[0], || format!("{}: power estimate {est:.6e} above {exact:.6e}", label()));
}

/// Power-method estimates never exceed `sigma_1 (1 + 1e-12)` and are within
/// `1e-8` relative whenever `sigma_2 / sigma_1 <= 0.9`.
pub fn power_method_suite(operators: usize) -> SuiteOutcome {
    let start = Instant::now();
    let mut out = SuiteOutcome::new("power method", 1e-8);
    let mut gapped = 0;
    for idx in 0..operators as u64 {
        out.instances += 1;
        let m = 2 + (idx as usize * 37) % 63;
        let n = 2 + (idx as usize * 23 + 11) % 63;
        let seed = 11_000 + idx;
        // Thirds: plain Gaussian, prescribed gap, complex Gaussian.
        let (est, sv) = match idx % 3 {
            0 => {
                let a = gaussian_matrix::<f64>(m, n, seed);
                (power_method_norm(&a, 100, DEFAULT_POWER_SEED), singular_values(&a))
            }
            1 => {
                let r = m.min(n);
                let ratio = 0.3 + 0.6 * (idx as f64 / operators as f64);
                let mut sigma = vec![1.0, ratio];
                sigma.extend((2..r).map(|i| ratio * (0.9f64).powi(i as i32 - 1)));
                sigma.truncate(r);
                let a = matrix_with_spectrum::<f64>(m, n, &sigma, seed);
                (power_method_norm(&a, 100, DEFAULT_POWER_SEED), singular_values(&a))
            }
            _ => {
                let a = gaussian_matrix::<c64>(m, n, seed);
                (power_method_norm(&a, 100, DEFAULT_POWER_SEED), singular_values(&a))
            }
        };
        let est = match est {
            Ok(x) => x,
            Err(e) => {
                out.require(false, || format!("operator {idx}: {e}"));
                continue;
            }
        };
        let s1 = sv[0];
        out.require(est <= s1 * (1.0 + 1e-12), || format!("operator {idx} ({m}x{n}): {est:.17e} exceeds sigma_1 {s1:.17e}"));
        if sv.len() < 2 || sv[1] / s1 <= 0.9 {
            gapped += 1;
            out.check((s1 - est).abs() / s1, || format!("operator {idx} ({m}x{n}), gap {:.3}", sv.get(1).map_or(0.0, |x| x / s1)));
        }
    }
    out.require(gapped > 0, || "no operator had a gap of 0.9 or better".into());
    out.timed(start)
}

/// Singular values of generated test matrices match the prescribed spectrum
/// within `1e-12`, and `||A||_2 = 1`.
pub fn spectrum_fidelity_suite(max_dim: usize) -> SuiteOutcome {
    let start = Instant::now();
    let mut out = SuiteOutcome::new("spectrum fidelity", 1e-12);
    let sizes = [(4usize, 4usize), (6, 9), (16, 16), (40, 24), (64, 96), (128, 128), (96, 256), (256, 256)];
    for &(m, n) in sizes.iter().filter(|&&(m, n)| m.max(n) <= max_dim) {
        for (k, delta) in [(2usize, 0.5), (2, 1e-3), (10, 1e-11)] {
            for transform in [Transform::Dft, Transform::RealOrthogonal] {
                let spec = TestMatrixSpec::new(m, n, k, delta, transform).with_seed(m as u64 * 31 + n as u64);
                if spec.validate().is_err() {
                    continue;
                }
                out.instances += 1;
                let want = sigma_spectrum(&spec).expect("valid spec");
                let got = match build_test_matrix(&spec) {
                    Ok(AnyMatrix::Real(a)) => singular_values(&a),
                    Ok(AnyMatrix::Complex(a)) => singular_values(&a),
                    Err(e) => {
                        out.require(false, || format!("{spec:?}: {e}"));
                        continue;
                    }
                };
                let dev = got.iter().zip(&want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
                out.check(dev, || format!("{m}x{n} k = {k} delta = {delta:e} {transform}"));
                out.check((got[0] - 1.0).abs(), || format!("{m}x{n} k = {k} delta = {delta:e} {transform}: norm"));
            }
        }
    }
    out.timed(start)
}

/// Every suite at its default size.
pub fn run_all() -> Vec<SuiteOutcome> {
    vec![
        column_space_suite(20),
        rank_chain_suite(20, 5),
        unrolled_recurrence_suite(20),
        minimizer_suite(20, 100),
        monotonicity_floor_suite(),
        power_method_suite(50),
        spectrum_fidelity_suite(256),
    ]
}
