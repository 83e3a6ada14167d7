use std::ffi::{c_char, CStr, CString};
use std::ptr;

use iwatsuka_ffi::*;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; iw_last_error_length() + 1];
    let status = unsafe { iw_last_error_message(buf.as_mut_ptr(), buf.len()) };
    assert_eq!(status, IwStatus::Ok);
    unsafe { CStr::from_ptr(buf.as_ptr()) }
        .to_string_lossy()
        .into_owned()
}

fn builtin(name: &str) -> *mut IwProblem {
    let name = CString::new(name).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { iw_problem_builtin(name.as_ptr(), &mut p) },
        IwStatus::Ok
    );
    assert!(!p.is_null());
    p
}

#[test]
fn version_is_a_c_string() {
    let v = unsafe { CStr::from_ptr(iw_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn step_tails_and_verdict() {
    let p = builtin("iwatsuka-step");
    let mut t = IwTailBounds::default();
    assert_eq!(unsafe { iw_problem_tail_bounds(p, &mut t) }, IwStatus::Ok);
    assert_eq!((t.b_under_plus, t.b_over_minus, t.heuristic), (2.0, 1.0, 0));
    let mut d = IwAcDecision {
        verdict: -1,
        condition: IwAcCondition::None,
        margin: 0.0,
        heuristic: -1,
    };
    assert_eq!(unsafe { iw_problem_ac_decision(p, &mut d) }, IwStatus::Ok);
    assert_eq!(
        (d.verdict, d.condition, d.margin),
        (1, IwAcCondition::Cond13, 1.0)
    );
    let mut a = 0.0;
    assert_eq!(
        unsafe { iw_problem_vector_potential(p, 3.0, &mut a) },
        IwStatus::Ok
    );
    assert_eq!(a, 6.0);
    unsafe { iw_problem_free(p) };
}

#[test]
fn landau_band_values_and_sweep() {
    let p = builtin("landau");
    let mut vals = [0.0; 3];
    assert_eq!(
        unsafe { iw_problem_band_values(p, 2.0, 3, 0.0, vals.as_mut_ptr(), vals.len()) },
        IwStatus::Ok
    );
    for (n, v) in vals.iter().enumerate() {
        assert!((v - (2 * n + 1) as f64).abs() < 1e-3, "{v}");
    }

    let xi = [-5.0, 0.0, 5.0];
    let mut s = ptr::null_mut();
    assert_eq!(
        unsafe { iw_sweep_new(p, xi.as_ptr(), xi.len(), 2, 0.0, &mut s) },
        IwStatus::Ok
    );
    let (mut n_xi, mut k) = (0, 0);
    assert_eq!(unsafe { iw_sweep_dims(s, &mut n_xi, &mut k) }, IwStatus::Ok);
    assert_eq!((n_xi, k), (3, 2));
    let mut band = [0.0; 3];
    assert_eq!(
        unsafe { iw_sweep_band(s, 2, band.as_mut_ptr(), 3) },
        IwStatus::Ok
    );
    assert!(band.iter().all(|v| (v - 3.0).abs() < 1e-3));
    let mut gap = 0.0;
    assert_eq!(unsafe { iw_sweep_min_gap(s, &mut gap) }, IwStatus::Ok);
    assert!((gap - 2.0).abs() < 1e-2);
    assert_eq!(
        unsafe { iw_sweep_band(s, 3, band.as_mut_ptr(), 3) },
        IwStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { iw_sweep_band(s, 1, band.as_mut_ptr(), 2) },
        IwStatus::BufferTooSmall
    );
    unsafe {
        iw_sweep_free(s);
        iw_problem_free(p);
    }
}

#[test]
fn json_problems() {
    let json =
        CString::new(r#"{"b": {"kind": "step", "left": 1, "right": 2, "x_jump": 0}}"#).unwrap();
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { iw_problem_from_json(json.as_ptr(), &mut p) },
        IwStatus::Ok
    );
    let mut t = IwTailBounds::default();
    assert_eq!(unsafe { iw_problem_tail_bounds(p, &mut t) }, IwStatus::Ok);
    assert_eq!((t.b_under_minus, t.w_over_plus), (1.0, 0.0));
    unsafe { iw_problem_free(p) };

    let bad = CString::new(r#"{"b": {"kind": "zigzag"}}"#).unwrap();
    let mut q = ptr::null_mut();
    assert_eq!(
        unsafe { iw_problem_from_json(bad.as_ptr(), &mut q) },
        IwStatus::ParseError
    );
    assert!(q.is_null());
    assert!(last_error().contains("zigzag"));
}

#[test]
fn comparison_eigenvalues() {
    let mut out = [0.0; 2];
    let status = unsafe { iw_comparison_eigs(1.0, 1.0, 0.0, 0.0, 2, out.as_mut_ptr(), 2) };
    assert_eq!(status, IwStatus::Ok);
    assert!((out[0] - 1.0).abs() < 1e-3 && (out[1] - 3.0).abs() < 1e-3);
    let status = unsafe { iw_comparison_eigs(-1.0, 1.0, 0.0, 0.0, 2, out.as_mut_ptr(), 2) };
    assert_eq!(status, IwStatus::InvalidArgument);
}

#[test]
fn errors_are_reported() {
    let mut p = ptr::null_mut();
    assert_eq!(
        unsafe { iw_problem_builtin(ptr::null(), &mut p) },
        IwStatus::NullPointer
    );
    assert!(last_error().contains("name"));
    let mut t = IwTailBounds::default();
    assert_eq!(
        unsafe { iw_problem_tail_bounds(ptr::null(), &mut t) },
        IwStatus::NullPointer
    );

    let flat = CString::new(r#"{"b": {"kind": "constant", "value": 0}}"#).unwrap();
    assert_eq!(
        unsafe { iw_problem_from_json(flat.as_ptr(), &mut p) },
        IwStatus::Ok
    );
    let mut v = [0.0; 1];
    assert_eq!(
        unsafe { iw_problem_band_values(p, 0.0, 1, 0.0, v.as_mut_ptr(), 1) },
        IwStatus::NumericalError
    );
    assert!(iw_last_error_length() > 0);
    let mut tiny = [0 as c_char; 2];
    assert_eq!(
        unsafe { iw_last_error_message(tiny.as_mut_ptr(), 2) },
        IwStatus::BufferTooSmall
    );
    assert_eq!(
        unsafe { iw_problem_band_values(p, 0.0, 1, -1.0, v.as_mut_ptr(), 1) },
        IwStatus::InvalidArgument
    );
    unsafe { iw_problem_free(p) };

    let mut a = 0.0;
    let q = builtin("landau");
    assert_eq!(
        unsafe { iw_problem_vector_potential(q, 1.0, &mut a) },
        IwStatus::Ok
    );
    assert_eq!(iw_last_error_length(), 0);
    unsafe { iw_problem_free(q) };
}

#[test]
fn header_compiles_as_c() {
    let header = concat!(env!("CARGO_MANIFEST_DIR"), "/include/iwatsuka.h");
    let text = std::fs::read_to_string(header).unwrap();
    for name in [
        "iw_problem_builtin",
        "iw_sweep_new",
        "iw_comparison_eigs",
        "IW_STATUS_PANIC",
    ] {
        assert!(text.contains(name), "{name}");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        format!(
            "#include \"{header}\"\n\
             int main(void) {{ IwProblem *p = 0; IwStatus s = iw_problem_builtin(\"landau\", &p); \
             iw_problem_free(p); return (int)s; }}\n"
        ),
    )
    .unwrap();
    let out = std::process::Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only"])
        .arg(&src)
        .output()
        .expect("a C compiler is available");
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}
