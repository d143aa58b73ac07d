use std::ffi::CStr;
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use corner_nystrom_ffi::*;

fn last_error() -> String {
    let p = cn_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn defaults(example: u32, m: u32) -> CnParams {
    let mut p = std::mem::MaybeUninit::<CnParams>::uninit();
    assert_eq!(unsafe { cn_params_default(example, m, f64::NAN, p.as_mut_ptr()) }, CnStatus::Ok);
    unsafe { p.assume_init() }
}

#[test]
fn solve_and_query() {
    let p = defaults(2, 64);
    assert_eq!((p.c, p.epsilon, p.delta), (1.0, 1e-6, 3.10e-8));
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { cn_solve(&p, &mut sol) }, CnStatus::Ok);
    assert!(!sol.is_null());

    let mut psi = 0.0;
    assert_eq!(unsafe { cn_solution_psi_norm(sol, &mut psi) }, CnStatus::Ok);
    assert!((psi - 0.44387).abs() < 0.01 * 0.44387);

    let mut cond = 0.0;
    assert_eq!(unsafe { cn_solution_cond_inf(sol, &mut cond) }, CnStatus::Ok);
    let mut again = 0.0;
    assert_eq!(unsafe { cn_solution_cond_inf(sol, &mut again) }, CnStatus::Ok);
    assert!(cond >= 1.0 && cond == again);

    let (mut u, mut r) = (0.0, 0.0);
    assert_eq!(unsafe { cn_solution_evaluate(sol, 0.8, 0.6, &mut u) }, CnStatus::Ok);
    assert_eq!(unsafe { cn_solution_reference(sol, 0.8, 0.6, &mut r) }, CnStatus::Ok);
    assert!((u - r).abs() < 1e-6);

    let mut needed = 0usize;
    let st = unsafe { cn_solution_nodal_values(sol, ptr::null_mut(), 0, &mut needed) };
    assert_eq!((st, needed), (CnStatus::Ok, 3 * 66));
    let mut buf = vec![0.0; needed];
    let st = unsafe { cn_solution_nodal_values(sol, buf.as_mut_ptr(), buf.len(), &mut needed) };
    assert_eq!(st, CnStatus::Ok);
    let mut d = 0.0;
    let nodes_m = 64;
    let mut x = vec![0.0; nodes_m + 2];
    let mut w = vec![0.0; nodes_m + 2];
    let st = unsafe { cn_lobatto_rule(64, x.as_mut_ptr(), w.as_mut_ptr(), x.len()) };
    assert_eq!(st, CnStatus::Ok);
    assert_eq!(unsafe { cn_solution_density(sol, 3, x[10], &mut d) }, CnStatus::Ok);
    assert!((d - buf[2 * 66 + 10]).abs() < 1e-10);

    let (mut res, mut mis) = (1.0, 1.0);
    assert_eq!(unsafe { cn_solution_diagnostics(sol, &mut res, &mut mis) }, CnStatus::Ok);
    assert!(res < 1e-10 && mis < 1e-8);
    unsafe { cn_solution_free(sol) };
}

#[test]
fn errors_are_reported() {
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { cn_solve(ptr::null(), &mut sol) }, CnStatus::NullPointer);
    assert!(last_error().contains("params"));

    let mut p = defaults(1, 32);
    p.m = 0;
    assert_eq!(unsafe { cn_solve(&p, &mut sol) }, CnStatus::InvalidArgument);
    assert!(sol.is_null());
    assert!(!last_error().is_empty());

    let mut q = std::mem::MaybeUninit::<CnParams>::uninit();
    assert_eq!(unsafe { cn_params_default(9, 32, 0.0, q.as_mut_ptr()) }, CnStatus::InvalidArgument);
    let st = unsafe { cn_params_default(4, 32, std::f64::consts::PI, q.as_mut_ptr()) };
    assert_eq!(st, CnStatus::InvalidArgument);

    let mut fam = std::mem::MaybeUninit::<CnParams>::uninit();
    let st = unsafe { cn_params_default(4, 32, 0.5 * std::f64::consts::PI, fam.as_mut_ptr()) };
    assert_eq!(st, CnStatus::Ok);
    let fam = unsafe { fam.assume_init() };
    assert_eq!(unsafe { cn_solve(&fam, &mut sol) }, CnStatus::Unsupported);
    let mut cond = 0.0;
    assert_eq!(unsafe { cn_family_condition(&fam, &mut cond) }, CnStatus::Ok);
    assert!(cond.is_finite() && cond >= 1.0);

    let mut v = 0.0;
    assert_eq!(unsafe { cn_solution_psi_norm(ptr::null(), &mut v) }, CnStatus::NullPointer);
    let (mut x, mut w) = ([0.0; 3], [0.0; 3]);
    assert_eq!(
        unsafe { cn_lobatto_rule(4, x.as_mut_ptr(), w.as_mut_ptr(), 3) },
        CnStatus::InvalidArgument
    );
    assert_eq!(unsafe { cn_lobatto_rule(1, x.as_mut_ptr(), w.as_mut_ptr(), 3) }, CnStatus::Ok);
    for (a, b) in w.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
        assert!((a - b).abs() < 1e-15);
    }
    assert_eq!(x, [0.0, 0.5, 1.0]);
    assert!(cn_last_error_message().is_null());
    unsafe { cn_solution_free(ptr::null_mut()) };
}

#[test]
fn boundary_evaluation_is_an_argument_error() {
    let p = defaults(2, 16);
    let mut sol = ptr::null_mut();
    assert_eq!(unsafe { cn_solve(&p, &mut sol) }, CnStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { cn_solution_evaluate(sol, 0.0, 0.0, &mut v) }, CnStatus::InvalidArgument);
    assert!(last_error().contains("boundary"));
    assert_eq!(unsafe { cn_solution_density(sol, 7, 0.5, &mut v) }, CnStatus::InvalidArgument);
    unsafe { cn_solution_free(sol) };
}

/// Compiles `tests/smoke.c` against the generated header and the static
/// library and runs it.
#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("corner_nystrom.h").exists());
    // The test binary lives in target/<profile>/deps.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libcorner_nystrom_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let out = profile_dir.join("cn_smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(&header_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "{}{}", stdout, String::from_utf8_lossy(&run.stderr));
    assert!(stdout.starts_with("n=198 psi=0.443"), "{stdout}");
}
