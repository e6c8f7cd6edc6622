use std::ffi::{c_int, c_void, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use atmr_ffi::*;

fn builtin(name: &str) -> *mut AtmrProblem {
    let name = CString::new(name).unwrap();
    let mut p = ptr::null_mut();
    let s = unsafe { atmr_problem_new(name.as_ptr(), ptr::null(), ptr::null(), 0, &mut p) };
    assert_eq!(s, AtmrStatus::Ok);
    p
}

fn small(p: *const AtmrProblem, seed: u64) -> AtmrConfig {
    let mut c = unsafe { atmr_config_default(p) };
    c.n = 20;
    c.max_fes = 600;
    c.seed = seed;
    c
}

fn last_error() -> String {
    let p = atmr_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn run_matches_the_library() {
    let p = builtin("TNK");
    let cfg = small(p, 11);
    let mut run = ptr::null_mut();
    assert_eq!(
        unsafe { atmr_run(p, AtmrAlgorithm::Atmr, &cfg, &mut run) },
        AtmrStatus::Ok
    );
    let n = unsafe { atmr_run_size(run) };
    assert_eq!(n, 20);
    assert_eq!(unsafe { atmr_run_fes(run) }, 600);
    assert_eq!(unsafe { atmr_run_generations(run) }, 30);
    let mut f = vec![0.0; n * 2];
    let mut x = vec![0.0; n * 2];
    let mut g = vec![0.0; n];
    unsafe {
        assert_eq!(
            atmr_run_objectives(run, f.as_mut_ptr(), f.len()),
            AtmrStatus::Ok
        );
        assert_eq!(
            atmr_run_decisions(run, x.as_mut_ptr(), x.len()),
            AtmrStatus::Ok
        );
        assert_eq!(
            atmr_run_violations(run, g.as_mut_ptr(), g.len()),
            AtmrStatus::Ok
        );
        assert_eq!(
            atmr_run_objectives(run, f.as_mut_ptr(), 3),
            AtmrStatus::BufferTooSmall
        );
    }
    let direct = atmr::run_atmr(
        &atmr::get_problem("TNK", &Default::default()).unwrap(),
        &(&cfg).into(),
    )
    .unwrap();
    for (i, s) in direct.final_population.iter().enumerate() {
        assert_eq!(&f[2 * i..2 * i + 2], &s.objectives[..]);
        assert_eq!(&x[2 * i..2 * i + 2], &s.x[..]);
        assert_eq!(g[i], s.violation);
    }
    unsafe {
        atmr_run_free(run);
        atmr_problem_free(p);
    }
}

#[test]
fn errors_are_reported_with_codes() {
    let name = CString::new("CTP9").unwrap();
    let mut p = ptr::null_mut();
    let s = unsafe { atmr_problem_new(name.as_ptr(), ptr::null(), ptr::null(), 0, &mut p) };
    assert_eq!(s, AtmrStatus::UnknownProblem);
    assert!(p.is_null());
    assert!(last_error().contains("CTP9"));

    let s = unsafe { atmr_problem_new(ptr::null(), ptr::null(), ptr::null(), 0, &mut p) };
    assert_eq!(s, AtmrStatus::NullPointer);

    let corridor = CString::new("CORRIDOR").unwrap();
    let key = CString::new("D").unwrap();
    let keys = [key.as_ptr()];
    let s =
        unsafe { atmr_problem_new(corridor.as_ptr(), keys.as_ptr(), [1.5].as_ptr(), 1, &mut p) };
    assert_eq!(s, AtmrStatus::Config, "{}", last_error());
    let s =
        unsafe { atmr_problem_new(corridor.as_ptr(), keys.as_ptr(), [4.0].as_ptr(), 1, &mut p) };
    assert_eq!(s, AtmrStatus::Ok);
    let mut n_var = 0;
    unsafe {
        atmr_problem_dims(
            p,
            &mut n_var,
            ptr::null_mut(),
            ptr::null_mut(),
            ptr::null_mut(),
        )
    };
    assert_eq!(n_var, 4);

    let mut cfg = small(p, 0);
    cfg.n = 7;
    let mut run = ptr::null_mut();
    assert_eq!(
        unsafe { atmr_run(p, AtmrAlgorithm::Atmr, &cfg, &mut run) },
        AtmrStatus::Config
    );
    assert!(run.is_null());
    unsafe { atmr_problem_free(p) };
    unsafe {
        atmr_problem_free(ptr::null_mut());
        atmr_run_free(ptr::null_mut());
    }
}

unsafe extern "C" fn sch(
    x: *const f64,
    _n: usize,
    f: *mut f64,
    _g: *mut f64,
    _h: *mut f64,
    ud: *mut c_void,
) -> c_int {
    let fail_above = *(ud as *const f64);
    let x = *x;
    *f = x * x;
    *f.add(1) = (x - 2.0) * (x - 2.0);
    c_int::from(x > fail_above)
}

#[test]
fn callback_problems() {
    let name = CString::new("SCH").unwrap();
    let (lo, hi) = ([-5.0], [5.0]);
    let mut p = ptr::null_mut();
    let fail_above = Box::into_raw(Box::new(f64::INFINITY));
    let ud = fail_above as *mut c_void;
    let s = unsafe {
        atmr_problem_new_callback(
            name.as_ptr(),
            1,
            2,
            0,
            0,
            lo.as_ptr(),
            hi.as_ptr(),
            Some(sch),
            ud,
            &mut p,
        )
    };
    assert_eq!(s, AtmrStatus::Ok);
    let cfg = small(p, 5);
    let mut run = ptr::null_mut();
    assert_eq!(
        unsafe { atmr_run(p, AtmrAlgorithm::Atmr, &cfg, &mut run) },
        AtmrStatus::Ok
    );
    let mut f = vec![0.0; 40];
    unsafe { atmr_run_objectives(run, f.as_mut_ptr(), 40) };
    // Pareto set is x in [0, 2], where sqrt(f1) + sqrt(f2) = 2.
    assert!(
        f.chunks(2)
            .all(|o| (o[0].sqrt() + o[1].sqrt() - 2.0).abs() < 0.5),
        "{f:?}"
    );
    unsafe { atmr_run_free(run) };

    // A failing callback aborts the run with an evaluation error.
    unsafe { *fail_above = 0.0 };
    let mut run = ptr::null_mut();
    assert_eq!(
        unsafe { atmr_run(p, AtmrAlgorithm::Nsga2Cdp, &cfg, &mut run) },
        AtmrStatus::Evaluation
    );
    assert!(last_error().contains("non-finite"));
    unsafe {
        atmr_problem_free(p);
        drop(Box::from_raw(fail_above));
    }
}

#[test]
fn metrics() {
    let mut out = 0.0;
    let pts = [0.2, 0.8, 0.8, 0.2];
    assert_eq!(
        unsafe { atmr_hypervolume(pts.as_ptr(), 2, 2, [1.0, 1.0].as_ptr(), &mut out) },
        AtmrStatus::Ok
    );
    assert!((out - 0.28).abs() < 1e-15);
    assert_eq!(
        unsafe { atmr_hypervolume(pts.as_ptr(), 1, 4, [1.0; 4].as_ptr(), &mut out) },
        AtmrStatus::Unsupported
    );
    assert_eq!(
        unsafe { atmr_igd([3.0, 4.0].as_ptr(), 1, [0.0, 0.0].as_ptr(), 1, 2, &mut out) },
        AtmrStatus::Ok
    );
    assert_eq!(out, 5.0);
    assert_eq!(
        unsafe { atmr_igd(ptr::null(), 0, [0.0, 0.0].as_ptr(), 1, 2, &mut out) },
        AtmrStatus::Ok
    );
    assert!(out.is_nan());
}

fn target_dir() -> PathBuf {
    // tests run from target/<profile>/deps
    std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf()
}

#[test]
fn header_compiles_and_links_from_c() {
    let crate_dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/atmr.h");
    let text = std::fs::read_to_string(&header).expect("generated header");
    for sym in [
        "atmr_run",
        "atmr_problem_new_callback",
        "ATMR_STATUS_OK",
        "typedef struct AtmrRun AtmrRun",
    ] {
        assert!(text.contains(sym), "{sym} missing from header");
    }
    let lib = target_dir().join("libatmr_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() || !lib.exists() {
        eprintln!("skipping C link check: no C compiler or static library");
        return;
    }
    let exe = std::env::temp_dir().join(format!("atmr_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(crate_dir.join("tests/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C smoke test failed to build");
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "smoke exited with {:?}", out.status);
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok 20");
}
