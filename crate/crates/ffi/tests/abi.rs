use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use feynparts_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(fp_last_error()) }.to_str().unwrap().to_string()
}

fn functional(basis: &[&str], kernel: &str) -> Result<*mut FpFunctional, FpStatus> {
    let owned: Vec<CString> = basis.iter().map(|s| c(s)).collect();
    let ptrs: Vec<*const std::ffi::c_char> = owned.iter().map(|s| s.as_ptr()).collect();
    let mut out = ptr::null_mut();
    let k = c(kernel);
    let st = unsafe { fp_functional_new(ptrs.as_ptr().cast(), ptrs.len(), 1.0, k.as_ptr(), &mut out) };
    if st == FpStatus::FP_OK {
        Ok(out)
    } else {
        Err(st)
    }
}

#[test]
fn functions_and_inner_products() {
    let (mut u, mut v) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(
            fp_function_parse(c("poly(0, 1)").as_ptr(), 1.0, &mut u),
            FpStatus::FP_OK
        );
        assert_eq!(fp_function_parse(c("poly(1)").as_ptr(), 1.0, &mut v), FpStatus::FP_OK);
        let mut ip = 0.0;
        assert_eq!(fp_inner_product(u, v, &mut ip), FpStatus::FP_OK);
        assert!((ip - 0.5).abs() < 1e-15);
        let mut x = 0.0;
        assert_eq!(fp_function_eval(u, 0.25, &mut x), FpStatus::FP_OK);
        assert_eq!(x, 0.25);
        let mut w = ptr::null_mut();
        assert_eq!(fp_function_parse(c("poly(1)").as_ptr(), 2.0, &mut w), FpStatus::FP_OK);
        assert_eq!(fp_inner_product(u, w, &mut ip), FpStatus::FP_INCOMPATIBLE);
        assert!(last_error().contains("domain"), "{}", last_error());
        fp_function_free(u);
        fp_function_free(v);
        fp_function_free(w);
    }
}

#[test]
fn feynman_and_transform_round_trip() {
    let f = functional(&["poly(1)"], "term(1, [1; 0.5; 0])").unwrap();
    unsafe {
        assert_eq!(fp_functional_arity(f), 1);
        let mut z = FpComplex::default();
        assert_eq!(
            fp_feynman_integral(f, c("poly(1)").as_ptr(), 1.0, &mut z),
            FpStatus::FP_OK
        );
        assert!((z.re - 0.776886987015019).abs() < 1e-12 && (z.im + 0.321797126452791).abs() < 1e-12);

        let mut w = FpComplex::default();
        let one = FpComplex { re: 1.0, im: 0.0 };
        assert_eq!(
            fp_analytic_wiener_integral(f, c("poly(1)").as_ptr(), one, &mut w),
            FpStatus::FP_OK
        );
        assert!((w.re - f64::sqrt(0.5)).abs() < 1e-14 && w.im.abs() < 1e-14);

        let mut t = ptr::null_mut();
        assert_eq!(fp_gfft(f, c("poly(-1)").as_ptr(), 1.0, 1.5, &mut t), FpStatus::FP_OK);
        let mut at0 = FpComplex::default();
        assert_eq!(fp_functional_eval_at(t, [0.0].as_ptr(), 1, &mut at0), FpStatus::FP_OK);
        assert!((at0.re - z.re).abs() < 1e-12 && (at0.im - z.im).abs() < 1e-12);
        assert_eq!(
            fp_functional_eval_at(t, [0.0, 1.0].as_ptr(), 2, &mut at0),
            FpStatus::FP_INCOMPATIBLE
        );
        fp_functional_free(t);
        fp_functional_free(f);
    }
}

#[test]
fn error_codes() {
    assert_eq!(
        functional(&["poly(1)", "poly(0, 1)"], "term(1, [1; 0.5; 0], [1; 0.5; 0])"),
        Err(FpStatus::FP_INCOMPATIBLE)
    );
    assert!(last_error().contains("orthogonal"));
    assert_eq!(
        functional(&["poly(1"], "term(1, [1; 0.5; 0])"),
        Err(FpStatus::FP_PARSE_ERROR)
    );
    let f = functional(&["poly(1)"], "term(1, [1; -1; 0])").unwrap();
    unsafe {
        let mut z = FpComplex::default();
        assert_eq!(
            fp_feynman_integral(f, c("poly(1)").as_ptr(), 0.0, &mut z),
            FpStatus::FP_INVALID_ARGUMENT
        );
        assert_eq!(
            fp_feynman_integral(f, c("poly(1)").as_ptr(), 1.0, &mut z),
            FpStatus::FP_NO_DECAY
        );
        assert_eq!(
            fp_feynman_integral(f, ptr::null(), 1.0, &mut z),
            FpStatus::FP_NULL_POINTER
        );
        assert_eq!(
            fp_feynman_integral(ptr::null(), c("poly(1)").as_ptr(), 1.0, &mut z),
            FpStatus::FP_NULL_POINTER
        );
        assert_eq!(
            fp_feynman_integral(f, c("poly(1)").as_ptr(), 1.0, ptr::null_mut()),
            FpStatus::FP_NULL_POINTER
        );
        assert_eq!(
            fp_feynman_integral(f, c("indicator(0, 1/2)").as_ptr(), 1.0, &mut z),
            FpStatus::FP_INCOMPATIBLE
        );
        fp_functional_free(f);
        fp_functional_free(ptr::null_mut());
        fp_string_free(ptr::null_mut());
    }
    let ok = functional(&["poly(1)"], "term(1, [1; 0.5; 0])").unwrap();
    assert_eq!(last_error(), "");
    unsafe { fp_functional_free(ok) };
}

#[test]
fn verify_returns_json_and_check_status() {
    unsafe {
        let mut json = ptr::null_mut();
        let cfg = c("[verify]\nconfigs = 2\n");
        assert_eq!(fp_verify_json(cfg.as_ptr(), &mut json), FpStatus::FP_OK);
        let doc = CStr::from_ptr(json).to_str().unwrap().to_string();
        fp_string_free(json);
        let v: serde_json::Value = serde_json::from_str(&doc).unwrap();
        assert_eq!(v["failed"], 0);

        let strict = c("[verify]\nconfigs = 2\ntolerance = 1e-300\n");
        assert_eq!(fp_verify_json(strict.as_ptr(), &mut json), FpStatus::FP_CHECK_FAILED);
        assert!(!json.is_null());
        fp_string_free(json);

        assert_eq!(
            fp_verify_json(c("[run]\ngrid = 1\n").as_ptr(), &mut json),
            FpStatus::FP_CONFIG_ERROR
        );
        assert!(json.is_null());
    }
}

#[test]
fn version_matches_the_crate() {
    let v = unsafe { CStr::from_ptr(fp_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

fn target_dir() -> PathBuf {
    // target/<profile>/deps/abi-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libfeynparts_ffi.a");
    assert!(lib.exists(), "static library not built at {}", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let build = Command::new(cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lm", "-lpthread", "-ldl", "-o"])
        .arg(&exe)
        .output()
        .unwrap();
    assert!(build.status.success(), "{}", String::from_utf8_lossy(&build.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
