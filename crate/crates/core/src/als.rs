//! Alternating least squares from a random start.
//!
//! Starting from a random `S_0` (see [`AlsStart`]), each round solves
//! `T_i = argmin ||S_i T - A||` and then `S_{i+1} = argmin ||S T_i - A||`.
//! After `iterations_j` S-updates a final T-update produces `(S_j, T_j)`.
//! There is no convergence test: the number of rounds is fixed up front.
//!
//! In [`AlsMode::Stabilized`] (the default) every new `S` is replaced by an
//! orthonormal basis of its column space. The approximation `S_i T_i` only
//! depends on `col(S_i)`, which equals `col((A A*)^i S_0)`, so this changes
//! nothing mathematically while keeping the iterates well conditioned.
//! [`AlsMode::Raw`] keeps the unnormalized iterates and exists to check the
//! unrolled recurrence `S_{i+1} = A A* S_i B_i` directly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{AlsError, Result};
use crate::io::{load_matrix, save_matrix, AnyMatrix};
use crate::lstsq::{lstsq_solve, lstsq_solve_right, pinv_solve, pinv_solve_right};
use crate::matrix::DenseMatrix;
use crate::qr::{householder_qr, rank_tolerance};
use crate::random::gaussian_matrix;
use crate::scalar::{c64, Scalar};
use crate::spectral::{power_method_norm, ResidualOperator, DEFAULT_POWER_ITERATIONS, DEFAULT_POWER_SEED};
use crate::svd::small_svd;

/// Raw-mode runs longer than this need [`AlsConfig::acknowledge_raw_risk`].
pub const DEFAULT_RAW_ITERATION_CAP: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlsMode {
    #[default]
    Stabilized,
    Raw,
}

impl std::str::FromStr for AlsMode {
    type Err = AlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stabilized" => Ok(AlsMode::Stabilized),
            "raw" => Ok(AlsMode::Raw),
            other => Err(AlsError::config(format!("unknown mode {other:?}"))),
        }
    }
}

/// How `S_0` is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlsStart {
    /// `S_0` is an `m x k` matrix of i.i.d. standard normals.
    #[default]
    Gaussian,
    /// `S_0 = A * Omega` with `Omega` an `n x k` standard normal matrix: the
    /// sampled range. `(S_0, T_0)` is then the plain randomized range-finder
    /// approximation and costs one extra pass over `A`.
    Range,
}

impl std::str::FromStr for AlsStart {
    type Err = AlsError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(AlsStart::Gaussian),
            "range" => Ok(AlsStart::Range),
            other => Err(AlsError::config(format!("unknown start {other:?} (expected gaussian or range)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlsConfig {
    /// Target rank `k`.
    pub rank_k: usize,
    /// Number of S-updates `j`.
    pub iterations_j: usize,
    pub seed: u64,
    pub mode: AlsMode,
    pub start: AlsStart,
    /// Record `||S T - A||_F` after every half-step.
    pub track_errors: bool,
    /// Fall back to an SVD pseudoinverse when a least-squares operand is
    /// numerically rank deficient, instead of failing.
    pub pinv_fallback: bool,
    pub raw_iteration_cap: usize,
    pub raw_risk_acknowledged: bool,
}

impl AlsConfig {
    pub fn new(rank_k: usize, iterations_j: usize, seed: u64) -> Self {
        AlsConfig {
            rank_k,
            iterations_j,
            seed,
            mode: AlsMode::Stabilized,
            start: AlsStart::Gaussian,
            track_errors: false,
            pinv_fallback: false,
            raw_iteration_cap: DEFAULT_RAW_ITERATION_CAP,
            raw_risk_acknowledged: false,
        }
    }

    pub fn with_mode(mut self, mode: AlsMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_start(mut self, start: AlsStart) -> Self {
        self.start = start;
        self
    }

    pub fn with_tracking(mut self, on: bool) -> Self {
        self.track_errors = on;
        self
    }

    pub fn with_pinv_fallback(mut self, on: bool) -> Self {
        self.pinv_fallback = on;
        self
    }

    /// Allow raw mode past the iteration cap.
    pub fn acknowledge_raw_risk(mut self) -> Self {
        self.raw_risk_acknowledged = true;
        self
    }

    pub fn validate(&self, rows: usize, cols: usize) -> Result<()> {
        if self.rank_k == 0 {
            return Err(AlsError::config("rank_k must be positive"));
        }
        if self.rank_k > rows.min(cols) {
            return Err(AlsError::config(format!(
                "rank_k = {} exceeds min(m, n) = {} for a {rows}x{cols} matrix",
                self.rank_k,
                rows.min(cols)
            )));
        }
        if self.mode == AlsMode::Raw && self.iterations_j > self.raw_iteration_cap && !self.raw_risk_acknowledged {
            return Err(AlsError::config(format!(
                "raw mode with {} iterations exceeds the cap of {}; raw iterates lose all \
                 conditioning at high powers, use stabilized mode",
                self.iterations_j, self.raw_iteration_cap
            )));
        }
        Ok(())
    }
}

/// Output of [`als_run`]: `A ~ s * t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization<T: Scalar> {
    /// `m x k`.
    pub s: DenseMatrix<T>,
    /// `k x n`.
    pub t: DenseMatrix<T>,
    pub rank_k: usize,
    pub iterations_j: usize,
    pub seed: u64,
    pub mode: AlsMode,
    pub start: AlsStart,
    /// One entry per half-step when tracking was on.
    pub frobenius_error_trace: Option<Vec<f64>>,
}

/// JSON sidecar stored next to the `S` and `T` matrix files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizationMeta {
    pub rank_k: usize,
    pub iterations_j: usize,
    pub seed: u64,
    pub mode: AlsMode,
    #[serde(default)]
    pub start: AlsStart,
    pub error_trace: Option<Vec<f64>>,
}

/// Paths of a saved factorization: `<stem>.s.alsm`, `<stem>.t.alsm`,
/// `<stem>.json`.
pub fn factorization_paths(dir: &Path, stem: &str) -> (PathBuf, PathBuf, PathBuf) {
    (
        dir.join(format!("{stem}.s.alsm")),
        dir.join(format!("{stem}.t.alsm")),
        dir.join(format!("{stem}.json")),
    )
}

impl<T: Scalar> Factorization<T> {
    pub fn approximation(&self) -> DenseMatrix<T> {
        self.s.matmul(&self.t).expect("factor shapes agree")
    }

    pub fn meta(&self) -> FactorizationMeta {
        FactorizationMeta {
            rank_k: self.rank_k,
            iterations_j: self.iterations_j,
            seed: self.seed,
            mode: self.mode,
            start: self.start,
            error_trace: self.frobenius_error_trace.clone(),
        }
    }

    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        let (sp, tp, jp) = factorization_paths(dir, stem);
        save_matrix(&self.s, sp)?;
        save_matrix(&self.t, tp)?;
        fs::write(jp, serde_json::to_string_pretty(&self.meta())?)?;
        Ok(())
    }
}

/// Load a factorization saved with [`Factorization::save`]; the field is
/// whatever the files hold.
pub fn load_factorization(dir: &Path, stem: &str) -> Result<AnyFactorization> {
    let (sp, tp, jp) = factorization_paths(dir, stem);
    let meta: FactorizationMeta = serde_json::from_str(&fs::read_to_string(jp)?)?;
    fn build<T: Scalar>(s: DenseMatrix<T>, t: DenseMatrix<T>, meta: &FactorizationMeta) -> Factorization<T> {
        Factorization {
            s,
            t,
            rank_k: meta.rank_k,
            iterations_j: meta.iterations_j,
            seed: meta.seed,
            mode: meta.mode,
            start: meta.start,
            frobenius_error_trace: meta.error_trace.clone(),
        }
    }
    let f = match (load_matrix(sp)?, load_matrix(tp)?) {
        (AnyMatrix::Real(s), AnyMatrix::Real(t)) => AnyFactorization::Real(build(s, t, &meta)),
        (AnyMatrix::Complex(s), AnyMatrix::Complex(t)) => AnyFactorization::Complex(build(s, t, &meta)),
        _ => return Err(AlsError::Format("S and T fields differ".into())),
    };
    let (s_shape, t_shape) = f.factor_shapes();
    if s_shape.1 != meta.rank_k || t_shape.0 != meta.rank_k {
        return Err(AlsError::Format("factor shapes disagree with rank_k".into()));
    }
    Ok(f)
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnyFactorization {
    Real(Factorization<f64>),
    Complex(Factorization<c64>),
}

impl AnyFactorization {
    fn factor_shapes(&self) -> ((usize, usize), (usize, usize)) {
        match self {
            AnyFactorization::Real(f) => (f.s.shape(), f.t.shape()),
            AnyFactorization::Complex(f) => (f.s.shape(), f.t.shape()),
        }
    }
}

/// In-progress iteration. Drive it with [`update_t`](Self::update_t) and
/// [`update_s`](Self::update_s), or use [`als_run`].
#[derive(Debug, Clone)]
pub struct AlsState<'a, T: Scalar> {
    a: &'a DenseMatrix<T>,
    config: AlsConfig,
    s: DenseMatrix<T>,
    t: Option<DenseMatrix<T>>,
    s_updates: usize,
    trace: Vec<f64>,
}

/// Draw `S_0` and set up the iteration.
pub fn als_init<'a, T: Scalar>(a: &'a DenseMatrix<T>, config: AlsConfig) -> Result<AlsState<'a, T>> {
    AlsState::new(a, config)
}

impl<'a, T: Scalar> AlsState<'a, T> {
    pub fn new(a: &'a DenseMatrix<T>, config: AlsConfig) -> Result<Self> {
        config.validate(a.rows(), a.cols())?;
        let s0 = match config.start {
            AlsStart::Gaussian => gaussian_matrix::<T>(a.rows(), config.rank_k, config.seed),
            AlsStart::Range => a.matmul(&gaussian_matrix::<T>(a.cols(), config.rank_k, config.seed))?,
        };
        let s = match config.mode {
            AlsMode::Stabilized => orthonormalize(&s0, config.pinv_fallback)?,
            AlsMode::Raw => s0,
        };
        Ok(AlsState { a, config, s, t: None, s_updates: 0, trace: Vec::new() })
    }

    pub fn config(&self) -> &AlsConfig {
        &self.config
    }

    /// Current `S_i`.
    pub fn s(&self) -> &DenseMatrix<T> {
        &self.s
    }

    /// Latest `T`, if a T-update has run.
    pub fn t(&self) -> Option<&DenseMatrix<T>> {
        self.t.as_ref()
    }

    /// Number of S-updates performed so far (the `i` of `S_i`).
    pub fn s_updates(&self) -> usize {
        self.s_updates
    }

    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    /// `T_i = argmin_T ||S_i T - A||`.
    pub fn update_t(&mut self) -> Result<()> {
        let t = match lstsq_solve(&self.s, self.a) {
            Err(AlsError::RankDeficient { .. }) if self.config.pinv_fallback => pinv_solve(&self.s, self.a)?,
            other => other?,
        };
        if self.config.track_errors {
            self.trace.push(residual_frobenius(self.a, &self.s, &t));
        }
        self.t = Some(t);
        Ok(())
    }

    /// `S_{i+1} = argmin_S ||S T_i - A||`, then re-orthonormalized in
    /// stabilized mode. The tracked error uses the minimizer itself.
    pub fn update_s(&mut self) -> Result<()> {
        let t = self
            .t
            .as_ref()
            .ok_or_else(|| AlsError::config("update_s called before any update_t"))?;
        let s = match lstsq_solve_right(t, self.a) {
            Err(AlsError::RankDeficient { .. }) if self.config.pinv_fallback => pinv_solve_right(t, self.a)?,
            other => other?,
        };
        if self.config.track_errors {
            self.trace.push(residual_frobenius(self.a, &s, t));
        }
        self.s = match self.config.mode {
            AlsMode::Stabilized => orthonormalize(&s, self.config.pinv_fallback)?,
            AlsMode::Raw => s,
        };
        self.s_updates += 1;
        Ok(())
    }

    /// Finish with a T-update for the current `S` and package the result.
    pub fn finish(mut self) -> Result<Factorization<T>> {
        self.update_t()?;
        let t = self.t.take().expect("just updated");
        Ok(Factorization {
            s: self.s,
            t,
            rank_k: self.config.rank_k,
            iterations_j: self.s_updates,
            seed: self.config.seed,
            mode: self.config.mode,
            start: self.config.start,
            frobenius_error_trace: self.config.track_errors.then_some(self.trace),
        })
    }
}

/// Run `iterations_j` rounds and return `(S_j, T_j)`. `j = 0` is the plain
/// random projection `(S_0, T_0)`.
pub fn als_run<T: Scalar>(a: &DenseMatrix<T>, config: &AlsConfig) -> Result<Factorization<T>> {
    let mut state = AlsState::new(a, config.clone())?;
    for _ in 0..config.iterations_j {
        state.update_t()?;
        state.update_s()?;
    }
    state.finish()
}

/// Orthonormal basis of `col(s)` with the same number of columns. A full-rank
/// input maps to its QR `Q`; with the fallback enabled a rank-`r` input maps
/// to `r` orthonormal columns followed by zero columns.
pub fn orthonormalize<T: Scalar>(s: &DenseMatrix<T>, fallback: bool) -> Result<DenseMatrix<T>> {
    let (m, k) = s.shape();
    let qr = householder_qr(s)?;
    if qr.rank_estimate == k {
        return Ok(qr.q);
    }
    if !fallback {
        return Err(AlsError::RankDeficient { rows: m, cols: k, rank: qr.rank_estimate });
    }
    let svd = small_svd(s);
    let tol = rank_tolerance(m, k, svd.sigma.first().copied().unwrap_or(0.0));
    let r = svd.sigma.iter().filter(|&&x| x > tol && x > 0.0).count();
    let mut basis = DenseMatrix::zeros(m, k);
    for j in 0..r {
        basis.set_column(j, &svd.u.column(j));
    }
    Ok(basis)
}

fn residual_frobenius<T: Scalar>(a: &DenseMatrix<T>, s: &DenseMatrix<T>, t: &DenseMatrix<T>) -> f64 {
    a.sub(&s.matmul(t).expect("factor shapes")).expect("residual shape").frobenius_norm()
}

/// Norm used by [`approximation_error`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ErrorNorm {
    Frobenius,
    /// Power method on the implicit residual.
    Spectral { iterations: usize, seed: u64 },
    /// Largest singular value of the dense residual.
    SpectralExact,
}

impl ErrorNorm {
    /// The measurement behind the accuracy tables: 100 power iterations.
    pub fn spectral() -> Self {
        ErrorNorm::Spectral { iterations: DEFAULT_POWER_ITERATIONS, seed: DEFAULT_POWER_SEED }
    }
}

/// `||A - S T||` in the requested norm.
pub fn approximation_error<T: Scalar>(a: &DenseMatrix<T>, f: &Factorization<T>, norm: ErrorNorm) -> Result<f64> {
    if f.s.rows() != a.rows() || f.t.cols() != a.cols() {
        return Err(AlsError::DimensionMismatch {
            op: "approximation_error",
            lhs: (f.s.rows(), f.t.cols()),
            rhs: a.shape(),
        });
    }
    match norm {
        ErrorNorm::Frobenius => Ok(residual_frobenius(a, &f.s, &f.t)),
        ErrorNorm::Spectral { iterations, seed } => {
            let op = ResidualOperator::new(a, &f.s, &f.t)?;
            power_method_norm(&op, iterations, seed)
        }
        ErrorNorm::SpectralExact => {
            let e = a.sub(&f.s.matmul(&f.t)?)?;
            Ok(small_svd(&e).sigma[0])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qr::rank_estimate;
    use crate::svd::singular_values;

    fn orthonormal_defect<T: Scalar>(q: &DenseMatrix<T>) -> f64 {
        q.adjoint_matmul(q).unwrap().sub(&DenseMatrix::identity(q.cols())).unwrap().frobenius_norm()
    }

    #[test]
    fn init_draws_full_rank_start() {
        let a = gaussian_matrix::<f64>(8, 6, 100);
        let raw = als_init(&a, AlsConfig::new(2, 1, 1).with_mode(AlsMode::Raw)).unwrap();
        assert_eq!(raw.s().shape(), (8, 2));
        assert_eq!(rank_estimate(raw.s()), 2);
        assert_eq!(raw.s(), &gaussian_matrix::<f64>(8, 2, 1));

        let again = als_init(&a, AlsConfig::new(2, 1, 1).with_mode(AlsMode::Raw)).unwrap();
        assert_eq!(raw.s(), again.s());

        let st = als_init(&a, AlsConfig::new(2, 1, 1)).unwrap();
        assert!(orthonormal_defect(st.s()) <= 1e-12);
    }

    /// Closed-form 2x2 inverse.
    fn inv2(m: &DenseMatrix<f64>) -> DenseMatrix<f64> {
        let (a, b, c, d) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
        let det = a * d - b * c;
        DenseMatrix::from_rows(&[vec![d / det, -b / det], vec![-c / det, a / det]]).unwrap()
    }

    #[test]
    fn update_t_matches_normal_equations() {
        let a = gaussian_matrix::<f64>(6, 4, 3);
        let mut st = als_init(&a, AlsConfig::new(2, 1, 3).with_mode(AlsMode::Raw)).unwrap();
        st.update_t().unwrap();
        let s0 = st.s();
        let want = inv2(&s0.adjoint_matmul(s0).unwrap()).matmul(&s0.adjoint_matmul(&a).unwrap()).unwrap();
        assert!(st.t().unwrap().relative_distance(&want).unwrap() <= 1e-12);
    }

    #[test]
    fn raw_first_s_update_is_a_astar_s0_b0() {
        let a = gaussian_matrix::<f64>(6, 4, 3);
        let mut st = als_init(&a, AlsConfig::new(2, 1, 3).with_mode(AlsMode::Raw)).unwrap();
        let s0 = st.s().clone();
        st.update_t().unwrap();
        st.update_s().unwrap();
        let aas0 = a.matmul(&a.adjoint_matmul(&s0).unwrap()).unwrap();
        let b0 = inv2(&s0.adjoint_matmul(&aas0).unwrap()).matmul(&s0.adjoint_matmul(&s0).unwrap()).unwrap();
        let want = aas0.matmul(&b0).unwrap();
        assert!(st.s().relative_distance(&want).unwrap() <= 1e-10);
    }

    #[test]
    fn range_start_samples_the_range() {
        let a = gaussian_matrix::<f64>(8, 6, 100);
        let cfg = AlsConfig::new(2, 0, 4).with_mode(AlsMode::Raw).with_start(AlsStart::Range);
        let st = als_init(&a, cfg).unwrap();
        let want = a.matmul(&gaussian_matrix::<f64>(6, 2, 4)).unwrap();
        assert_eq!(st.s(), &want);
        let st = als_init(&a, AlsConfig::new(2, 0, 4).with_start(AlsStart::Range)).unwrap();
        assert!(orthonormal_defect(st.s()) <= 1e-12);
        let p = crate::qr::projector(st.s());
        assert!(p.sub(&crate::qr::projector(&want)).unwrap().frobenius_norm() <= 1e-12);
        assert_eq!("range".parse::<AlsStart>().unwrap(), AlsStart::Range);
        assert!("sketch".parse::<AlsStart>().is_err());
    }

    #[test]
    fn range_start_zero_rounds_beats_gaussian_start() {
        let a = crate::testmat::matrix_with_spectrum::<f64>(40, 30, &[1.0, 0.5, 1e-3, 1e-3, 5e-4], 2);
        let err = |start| {
            let f = als_run(&a, &AlsConfig::new(2, 0, 7).with_start(start)).unwrap();
            approximation_error(&a, &f, ErrorNorm::SpectralExact).unwrap()
        };
        // A Gaussian S_0 barely sees the top singular vectors; A * Omega does.
        assert!(err(AlsStart::Gaussian) > 0.1);
        assert!(err(AlsStart::Range) < 0.1);
    }

    #[test]
    fn init_rejects_bad_rank() {
        let a = gaussian_matrix::<f64>(4, 3, 1);
        assert!(matches!(als_init(&a, AlsConfig::new(4, 1, 1)), Err(AlsError::Config(_))));
        assert!(matches!(als_init(&a, AlsConfig::new(0, 1, 1)), Err(AlsError::Config(_))));
        let raw = AlsConfig::new(2, 5, 1).with_mode(AlsMode::Raw);
        assert!(als_init(&a, raw.clone()).is_err());
        assert!(als_init(&a, raw.acknowledge_raw_risk()).is_ok());
    }

    #[test]
    fn update_t_with_orthonormal_s_is_adjoint_product() {
        let a = gaussian_matrix::<c64>(6, 4, 3);
        let mut st = als_init(&a, AlsConfig::new(2, 0, 3)).unwrap();
        st.update_t().unwrap();
        let want = st.s().adjoint_matmul(&a).unwrap();
        assert!(st.t().unwrap().relative_distance(&want).unwrap() < 1e-13);
    }

    #[test]
    fn update_t_reproduces_representable_a() {
        // A in col(S_0): build it from the start drawn for the same seed.
        let s0 = gaussian_matrix::<f64>(6, 2, 7);
        let a = s0.matmul(&gaussian_matrix::<f64>(2, 4, 8)).unwrap();
        let mut st = als_init(&a, AlsConfig::new(2, 0, 7).with_tracking(true)).unwrap();
        st.update_t().unwrap();
        assert!(st.trace()[0] <= 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn update_s_reproduces_representable_a() {
        let a0 = gaussian_matrix::<f64>(6, 4, 3);
        let mut st = als_init(&a0, AlsConfig::new(2, 1, 3).with_mode(AlsMode::Raw)).unwrap();
        st.update_t().unwrap();
        let t = st.t().unwrap().clone();
        // A = X T_0 lies in the row space of T_0.
        let a = gaussian_matrix::<f64>(6, 2, 9).matmul(&t).unwrap();
        let s = lstsq_solve_right(&t, &a).unwrap();
        let resid = s.matmul(&t).unwrap().sub(&a).unwrap().frobenius_norm();
        assert!(resid <= 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn update_s_with_orthonormal_rows_is_adjoint_product() {
        let a = gaussian_matrix::<f64>(7, 5, 4);
        let q = householder_qr(&gaussian_matrix::<f64>(5, 2, 6)).unwrap().q;
        let s = lstsq_solve_right(&q.adjoint(), &a).unwrap();
        assert!(s.relative_distance(&a.matmul(&q).unwrap()).unwrap() < 1e-13);
    }

    #[test]
    fn update_s_before_update_t_is_an_error() {
        let a = gaussian_matrix::<f64>(5, 4, 1);
        let mut st = als_init(&a, AlsConfig::new(2, 1, 1)).unwrap();
        assert!(st.update_s().is_err());
    }

    #[test]
    fn exact_rank_k_recovered_after_one_round() {
        let g = gaussian_matrix::<c64>(20, 3, 1);
        let h = gaussian_matrix::<c64>(3, 15, 2);
        let a = g.matmul(&h).unwrap();
        let f = als_run(&a, &AlsConfig::new(3, 1, 9)).unwrap();
        let err = approximation_error(&a, &f, ErrorNorm::Frobenius).unwrap();
        assert!(err <= 1e-10 * a.frobenius_norm(), "{err}");
        assert_eq!(f.iterations_j, 1);
    }

    #[test]
    fn diag_five_three_one() {
        let a = DenseMatrix::from_diag(&[5.0, 3.0, 1.0]);
        for seed in 0..5 {
            let f = als_run(&a, &AlsConfig::new(1, 5, seed)).unwrap();
            let err = approximation_error(&a, &f, ErrorNorm::SpectralExact).unwrap();
            assert!((err - 3.0).abs() <= 1e-2 * 3.0, "seed {seed}: {err}");
        }
    }

    #[test]
    fn trace_is_monotone_and_has_one_entry_per_half_step() {
        let a = gaussian_matrix::<f64>(12, 9, 4);
        let f = als_run(&a, &AlsConfig::new(3, 4, 5).with_tracking(true)).unwrap();
        let trace = f.frobenius_error_trace.as_ref().unwrap();
        assert_eq!(trace.len(), 2 * 4 + 1);
        let slack = 1e-12 * a.frobenius_norm();
        assert!(trace.windows(2).all(|w| w[1] <= w[0] + slack), "{trace:?}");
        let last = approximation_error(&a, &f, ErrorNorm::Frobenius).unwrap();
        assert!((last - trace[trace.len() - 1]).abs() < 1e-12);
    }

    #[test]
    fn exact_factorization_has_zero_error() {
        let a = gaussian_matrix::<f64>(5, 4, 2);
        let f = Factorization {
            s: a.clone(),
            t: DenseMatrix::identity(4),
            rank_k: 4,
            iterations_j: 0,
            seed: 0,
            mode: AlsMode::Stabilized,
            start: AlsStart::Gaussian,
            frobenius_error_trace: None,
        };
        for norm in [ErrorNorm::Frobenius, ErrorNorm::spectral(), ErrorNorm::SpectralExact] {
            assert!(approximation_error(&a, &f, norm).unwrap() <= 1e-12 * a.frobenius_norm());
        }
    }

    #[test]
    fn long_run_matches_truncated_svd() {
        // sigma_3 / sigma_2 = 0.5, so 10 rounds shrink the excess error by ~4^-10.
        let a = crate::testmat::matrix_with_spectrum::<f64>(8, 6, &[4.0, 2.0, 1.0, 0.5, 0.2, 0.1], 31);
        let sv = singular_values(&a);
        let best: f64 = sv[2..].iter().map(|s| s * s).sum::<f64>().sqrt();
        let f = als_run(&a, &AlsConfig::new(2, 10, 1)).unwrap();
        let err = approximation_error(&a, &f, ErrorNorm::Frobenius).unwrap();
        assert!((err - best).abs() <= 1e-6 * best, "{err} vs {best}");
    }

    #[test]
    fn identical_runs_are_bitwise_identical() {
        let a = gaussian_matrix::<c64>(30, 20, 3);
        let cfg = AlsConfig::new(4, 3, 77).with_tracking(true);
        crate::parallel::set_serial(true);
        let x = als_run(&a, &cfg).unwrap();
        let y = als_run(&a, &cfg).unwrap();
        crate::parallel::set_serial(false);
        assert_eq!(x, y);
    }

    #[test]
    fn rank_deficient_input_needs_fallback() {
        let u = gaussian_matrix::<f64>(8, 1, 1);
        let v = gaussian_matrix::<f64>(1, 6, 2);
        let a = u.matmul(&v).unwrap();
        let strict = AlsConfig::new(2, 2, 3);
        assert!(matches!(als_run(&a, &strict), Err(AlsError::RankDeficient { .. })));
        let f = als_run(&a, &strict.with_pinv_fallback(true)).unwrap();
        let err = approximation_error(&a, &f, ErrorNorm::Frobenius).unwrap();
        assert!(err <= 1e-12 * a.frobenius_norm());
    }

    #[test]
    fn save_and_load_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let a = gaussian_matrix::<c64>(7, 5, 1);
        let f = als_run(&a, &AlsConfig::new(2, 2, 4).with_tracking(true)).unwrap();
        f.save(dir.path(), "run").unwrap();
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("run.json")).unwrap()).unwrap();
        assert_eq!(meta["rank_k"], 2);
        assert_eq!(meta["mode"], "stabilized");
        assert_eq!(meta["error_trace"].as_array().unwrap().len(), 5);
        match load_factorization(dir.path(), "run").unwrap() {
            AnyFactorization::Complex(g) => assert_eq!(g, f),
            AnyFactorization::Real(_) => panic!("field changed"),
        }
    }
}
