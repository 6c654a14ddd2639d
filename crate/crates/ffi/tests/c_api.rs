use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use als_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(als_last_error_message()) }.to_string_lossy().into_owned()
}

fn ok(s: AlsStatus) {
    assert_eq!(s, AlsStatus::Ok, "{}", last_error());
}

fn shape(m: *const AlsMatrix) -> (usize, usize) {
    let (mut r, mut c) = (0, 0);
    ok(unsafe { als_matrix_shape(m, &mut r, &mut c) });
    (r, c)
}

fn data(m: *const AlsMatrix) -> Vec<f64> {
    let (r, c) = shape(m);
    let mut field = AlsField::Real;
    ok(unsafe { als_matrix_field(m, &mut field) });
    let w = if field == AlsField::Complex { 2 } else { 1 };
    let mut buf = vec![0.0; w * r * c];
    ok(unsafe { als_matrix_copy_data(m, buf.as_mut_ptr(), buf.len()) });
    buf
}

#[test]
fn real_roundtrip_and_exact_rank_recovery() {
    // rank 2: rows are combinations of (1,0,1,0) and (0,1,0,1)
    let a = [1.0, 2.0, 1.0, 2.0, 3.0, -1.0, 3.0, -1.0, 0.5, 0.5, 0.5, 0.5];
    let mut m = ptr::null_mut();
    ok(unsafe { als_matrix_new_real(3, 4, a.as_ptr(), &mut m) });
    assert_eq!(shape(m), (3, 4));
    assert_eq!(data(m), a);

    let opts = als_options_default(2, 1, 7);
    let mut f = ptr::null_mut();
    ok(unsafe { als_run(m, &opts, &mut f) });
    let mut e = f64::NAN;
    ok(unsafe { als_approximation_error(m, f, AlsNorm::SpectralExact, &mut e) });
    assert!(e < 1e-12, "{e}");

    let (mut s, mut t) = (ptr::null_mut(), ptr::null_mut());
    ok(unsafe { als_factorization_s(f, &mut s) });
    ok(unsafe { als_factorization_t(f, &mut t) });
    assert_eq!(shape(s), (3, 2));
    assert_eq!(shape(t), (2, 4));

    let mut svd = ptr::null_mut();
    ok(unsafe { als_factorization_to_svd(f, &mut svd) });
    let mut r = 0;
    ok(unsafe { als_svd_rank(svd, &mut r) });
    assert_eq!(r, 2);
    let mut sigma = [0.0; 2];
    ok(unsafe { als_svd_sigma(svd, sigma.as_mut_ptr(), 2) });
    assert!(sigma[0] >= sigma[1] && sigma[1] > 0.0);
    let (mut u, mut v) = (ptr::null_mut(), ptr::null_mut());
    ok(unsafe { als_svd_u(svd, &mut u) });
    ok(unsafe { als_svd_v(svd, &mut v) });
    let (ud, vd) = (data(u), data(v));
    // U diag(sigma) V^T reproduces A
    for i in 0..3 {
        for j in 0..4 {
            let x: f64 = (0..2).map(|l| ud[i * 2 + l] * sigma[l] * vd[j * 2 + l]).sum();
            assert!((x - a[i * 4 + j]).abs() < 1e-12);
        }
    }

    unsafe {
        als_matrix_free(u);
        als_matrix_free(v);
        als_svd_free(svd);
        als_matrix_free(s);
        als_matrix_free(t);
        als_factorization_free(f);
        als_matrix_free(m);
    }
}

#[test]
fn complex_test_matrix_meets_its_floor() {
    let mut a = ptr::null_mut();
    ok(unsafe { als_test_matrix(32, 64, 2, 1e-3, AlsTransform::Dft, 0, &mut a) });
    let mut field = AlsField::Real;
    ok(unsafe { als_matrix_field(a, &mut field) });
    assert_eq!(field, AlsField::Complex);

    let mut opts = als_options_default(2, 2, 1);
    opts.start = AlsStart::Range;
    opts.track_errors = true;
    let mut f = ptr::null_mut();
    ok(unsafe { als_run(a, &opts, &mut f) });
    let mut e = 0.0;
    ok(unsafe { als_approximation_error(a, f, AlsNorm::SpectralExact, &mut e) });
    assert!(e >= 1e-3 - 1e-12 && e < 1.25e-3, "{e}");

    let mut n = 0;
    ok(unsafe { als_factorization_trace_len(f, &mut n) });
    assert_eq!(n, 2 * 2 + 1);
    let mut trace = vec![0.0; n];
    ok(unsafe { als_factorization_trace(f, trace.as_mut_ptr(), n) });
    assert!(trace.iter().all(|x| x.is_finite()));

    unsafe {
        als_factorization_free(f);
        als_matrix_free(a);
    }
}

#[test]
fn complex_interleaving_roundtrips() {
    let raw = [1.0, -1.0, 2.0, 0.5, 0.0, 3.0, -2.0, 0.0];
    let mut m = ptr::null_mut();
    ok(unsafe { als_matrix_new_complex(2, 2, raw.as_ptr(), &mut m) });
    assert_eq!(data(m), raw);
    unsafe { als_matrix_free(m) };
}

#[test]
fn file_roundtrip() {
    let dir = tempdir();
    let path = CString::new(dir.join("g.alsm").to_str().unwrap()).unwrap();
    let mut g = ptr::null_mut();
    ok(unsafe { als_matrix_gaussian(5, 3, AlsField::Complex, 11, &mut g) });
    ok(unsafe { als_matrix_write(g, path.as_ptr()) });
    let mut h = ptr::null_mut();
    ok(unsafe { als_matrix_read(path.as_ptr(), &mut h) });
    assert_eq!(data(g), data(h));
    unsafe {
        als_matrix_free(g);
        als_matrix_free(h);
    }
    std::fs::remove_dir_all(dir).unwrap();
}

fn tempdir() -> std::path::PathBuf {
    let d = Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("ffi-{}", std::process::id()));
    std::fs::create_dir_all(&d).unwrap();
    d
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut m = ptr::null_mut();
    assert_eq!(unsafe { als_matrix_new_real(2, 2, ptr::null(), &mut m) }, AlsStatus::NullPointer);
    assert!(last_error().contains("data"));

    let a = [1.0; 6];
    ok(unsafe { als_matrix_new_real(2, 3, a.as_ptr(), &mut m) });
    let mut f = ptr::null_mut();
    let opts = als_options_default(4, 1, 0);
    assert_eq!(unsafe { als_run(m, &opts, &mut f) }, AlsStatus::Config);
    assert!(!last_error().is_empty());
    assert!(f.is_null());

    let mut small = [0.0; 5];
    assert_eq!(unsafe { als_matrix_copy_data(m, small.as_mut_ptr(), 5) }, AlsStatus::InvalidArgument);

    let mut raw = als_options_default(1, 10, 0);
    raw.mode = AlsMode::Raw;
    assert_eq!(unsafe { als_run(m, &raw, &mut f) }, AlsStatus::Config);

    let mut c = ptr::null_mut();
    ok(unsafe { als_matrix_gaussian(2, 3, AlsField::Complex, 0, &mut c) });
    ok(unsafe { als_run(c, &als_options_default(1, 1, 0), &mut f) });
    let mut e = 0.0;
    assert_eq!(unsafe { als_approximation_error(m, f, AlsNorm::Frobenius, &mut e) }, AlsStatus::FieldMismatch);

    let missing = CString::new("/nonexistent/dir/x.alsm").unwrap();
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { als_matrix_read(missing.as_ptr(), &mut r) }, AlsStatus::Io);

    unsafe {
        als_factorization_free(f);
        als_matrix_free(c);
        als_matrix_free(m);
        als_matrix_free(ptr::null_mut());
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(als_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

const HEADER: &str = include_str!("../include/als_ffi.h");

#[test]
fn header_declares_every_entry_point() {
    let src = include_str!("../src/lib.rs");
    let exported: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|rest| rest.split('(').next().unwrap())
        .collect();
    assert!(exported.len() > 20);
    for name in exported {
        assert!(HEADER.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(HEADER.contains("typedef struct AlsMatrix AlsMatrix;"));
    assert!(HEADER.contains("ALS_STATUS_OK = 0"));
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else { return };
    let dir = tempdir();
    let file = dir.join("probe.c");
    std::fs::write(&file, "#include \"als_ffi.h\"\nint main(void) { return als_options_default(2, 1, 0).rank_k == 2 ? 0 : 1; }\n").unwrap();
    let inc = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let out = Command::new(cc).args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"]).arg(&inc).arg(&file).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

fn which_cc() -> Result<&'static str, ()> {
    ["cc", "gcc", "clang"]
        .into_iter()
        .find(|c| Command::new(c).arg("--version").output().is_ok_and(|o| o.status.success()))
        .ok_or(())
}
