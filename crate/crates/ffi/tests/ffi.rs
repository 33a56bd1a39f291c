use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use ncerg_ffi::*;

fn last_error() -> String {
    let p = ncerg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn diagonal_operator_round_trip() {
    let dims = [2usize, 1];
    let weights = [1.0, 0.5];
    let vals = [3.0, -1.0, 2.0];
    let mut x = ptr::null_mut();
    unsafe {
        assert_eq!(
            ncerg_operator_diagonal(dims.as_ptr(), weights.as_ptr(), 2, vals.as_ptr(), 3, &mut x),
            NcergStatus::Ok
        );
        let (mut tr, mut ti) = (0.0, 1.0);
        assert_eq!(ncerg_operator_trace(x, &mut tr, &mut ti), NcergStatus::Ok);
        assert_eq!((tr, ti), (3.0, 0.0));
        let mut n = 0.0;
        assert_eq!(ncerg_operator_norm_p(x, f64::INFINITY, &mut n), NcergStatus::Ok);
        assert_eq!(n, 3.0);
        let desc = CString::new(r#"{"kind":"l1+linf"}"#).unwrap();
        assert_eq!(ncerg_operator_norm_json(x, desc.as_ptr(), &mut n), NcergStatus::Ok);
        assert!((n - 3.0).abs() < 1e-12);

        let mut len = 0;
        assert_eq!(
            ncerg_operator_mu(x, ptr::null_mut(), ptr::null_mut(), 0, &mut len),
            NcergStatus::BufferTooSmall
        );
        let (mut ends, mut values) = (vec![0.0; len], vec![0.0; len]);
        assert_eq!(
            ncerg_operator_mu(x, ends.as_mut_ptr(), values.as_mut_ptr(), len, &mut len),
            NcergStatus::Ok
        );
        assert_eq!(values, vec![3.0, 2.0, 1.0]);
        assert_eq!(ends, vec![1.0, 1.5, 2.5]);
        ncerg_operator_free(x);
    }
}

#[test]
fn complex_blocks_and_entries() {
    let dims = [2usize];
    let weights = [2.0];
    let re = [1.0, 2.0, 2.0, 1.0];
    let im = [0.0, 1.0, -1.0, 0.0];
    let mut x = ptr::null_mut();
    unsafe {
        assert_eq!(
            ncerg_operator_from_blocks(dims.as_ptr(), weights.as_ptr(), 1, re.as_ptr(), im.as_ptr(), 4, &mut x),
            NcergStatus::Ok
        );
        let mut n = 0;
        assert_eq!(ncerg_operator_len(x, &mut n), NcergStatus::Ok);
        let (mut r, mut i) = (vec![0.0; n], vec![0.0; n]);
        let mut len = 0;
        assert_eq!(ncerg_operator_entries(x, r.as_mut_ptr(), i.as_mut_ptr(), n, &mut len), NcergStatus::Ok);
        assert_eq!(r, re);
        assert_eq!(i, im);
        ncerg_operator_free(x);

        let mut y = ptr::null_mut();
        assert_eq!(
            ncerg_operator_from_blocks(dims.as_ptr(), weights.as_ptr(), 1, re.as_ptr(), ptr::null(), 3, &mut y),
            NcergStatus::ShapeMismatch
        );
        assert!(y.is_null());
        assert!(last_error().contains("expected 4"));
    }
}

#[test]
fn averages_agree() {
    let spec = CString::new(r#"{"family":"heat_cycle","n":4}"#).unwrap();
    let dims = [1usize; 4];
    let weights = [1.0; 4];
    let vals = [1.0, 0.0, 0.5, 0.0];
    unsafe {
        let mut sg = ptr::null_mut();
        assert_eq!(ncerg_semigroup_from_json(spec.as_ptr(), &mut sg), NcergStatus::Ok);
        let mut d = 0;
        assert_eq!(ncerg_semigroup_dim(sg, &mut d), NcergStatus::Ok);
        assert_eq!(d, 1);
        let mut x = ptr::null_mut();
        ncerg_operator_diagonal(dims.as_ptr(), weights.as_ptr(), 4, vals.as_ptr(), 4, &mut x);
        let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
        let mut est = -1.0;
        assert_eq!(ncerg_average_phi1(sg, x, 1.5, &mut a), NcergStatus::Ok);
        assert_eq!(ncerg_average_quadrature(sg, x, 1.5, 12, &mut b, &mut est), NcergStatus::Ok);
        assert!((0.0..1e-10).contains(&est));
        let (mut ra, mut ia, mut rb, mut ib) = ([0.0; 4], [0.0; 4], [0.0; 4], [0.0; 4]);
        let mut len = 0;
        ncerg_operator_entries(a, ra.as_mut_ptr(), ia.as_mut_ptr(), 4, &mut len);
        ncerg_operator_entries(b, rb.as_mut_ptr(), ib.as_mut_ptr(), 4, &mut len);
        for k in 0..4 {
            assert!((ra[k] - rb[k]).abs() < 1e-10);
        }
        assert_eq!(ncerg_average_quadrature(sg, x, 1.5, 0, &mut b, ptr::null_mut()), NcergStatus::InvalidArgument);
        ncerg_operator_free(a);
        ncerg_operator_free(b);
        ncerg_operator_free(x);
        ncerg_semigroup_free(sg);
    }
}

#[test]
fn null_and_bad_input() {
    unsafe {
        let mut n = 0.0;
        assert_eq!(ncerg_operator_norm_p(ptr::null(), 1.0, &mut n), NcergStatus::NullPointer);
        assert!(last_error().contains("null"));
        let bad = CString::new(r#"{"family":"heat_cycle"}"#).unwrap();
        let mut sg = ptr::null_mut();
        assert_eq!(ncerg_semigroup_from_json(bad.as_ptr(), &mut sg), NcergStatus::InvalidArgument);
        ncerg_operator_free(ptr::null_mut());
        ncerg_semigroup_free(ptr::null_mut());
        ncerg_string_free(ptr::null_mut());
    }
}

#[test]
fn scenario_exit_codes() {
    let ok = CString::new(
        r#"{"schema":"ncerg.scenario/1","algebra":[[2,1.0]],
            "experiment":{"type":"ds-verify","map":{"map":"scale","factor":2.0}}}"#,
    )
    .unwrap();
    let violated = CString::new(
        r#"{"schema":"ncerg.scenario/1","semigroup":{"family":"heat_cycle","n":4},
            "element":{"kind":"diagonal","values":[1,0,0,0]},
            "experiment":{"type":"bounds","slack":-1,"dyadic":[0.3]}}"#,
    )
    .unwrap();
    unsafe {
        let mut report = ptr::null_mut();
        let mut code = -1;
        assert_eq!(ncerg_run_scenario_json(ok.as_ptr(), true, 9, &mut report, &mut code), NcergStatus::Ok);
        assert_eq!(code, 0);
        let text = CStr::from_ptr(report).to_str().unwrap().to_owned();
        ncerg_string_free(report);
        assert!(text.contains("\"verdict\": false"));
        assert!(text.contains("\"seed\": 9"));

        assert_eq!(ncerg_run_scenario_json(violated.as_ptr(), false, 0, &mut report, &mut code), NcergStatus::Ok);
        assert_eq!(code, 2);
        ncerg_string_free(report);

        let junk = CString::new("{").unwrap();
        assert_eq!(ncerg_run_scenario_json(junk.as_ptr(), false, 0, &mut report, &mut code), NcergStatus::Scenario);
    }
}

#[test]
fn version_matches_core() {
    let v = unsafe { CStr::from_ptr(ncerg_version()) }.to_str().unwrap();
    assert_eq!(v, ncerg::VERSION);
}

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/ncerg.h")).unwrap();
    for name in [
        "ncerg_operator_diagonal",
        "ncerg_operator_from_blocks",
        "ncerg_operator_mu",
        "ncerg_semigroup_from_json",
        "ncerg_average_phi1",
        "ncerg_average_quadrature",
        "ncerg_run_scenario_json",
        "ncerg_string_free",
        "ncerg_last_error_message",
        "typedef struct NcergOperator NcergOperator",
        "NCERG_STATUS_BUFFER_TOO_SMALL = 7",
    ] {
        assert!(header.contains(name), "header lacks {name}");
    }
}

/// Compile and run the C smoke program against the static library.
#[test]
fn c_program_links_and_runs() {
    let tmp = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let profile_dir = tmp.parent().unwrap().join(if cfg!(debug_assertions) { "debug" } else { "release" });
    let lib = profile_dir.join("libncerg_ffi.a");
    if !lib.exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let exe = tmp.join("ncerg_smoke");
    let status = Command::new("cc")
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ok "));
}
