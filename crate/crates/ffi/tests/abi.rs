use onebit::cli::{evaluate, Operation, Point};
use onebit::covariance::{is_member, CorrelationVector};
use onebit::orthant::pmf_exact;
use onebit_ffi::*;
use std::ffi::CStr;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(onebit_last_error()) }.to_string_lossy().into_owned()
}

fn cap_coherent(snr: f64, nt: u32, nr: u64, m: OnebitCoherentMethod) -> (OnebitStatus, OnebitCapacity) {
    let mut c = OnebitCapacity { bits: 0.0, std_err: 0.0, has_terms: 0, term_dimension: 0.0, term_volume: 0.0, term_alpha: 0.0 };
    let s = unsafe { onebit_capacity_coherent(snr, nt, nr, m, &mut c) };
    (s, c)
}

#[test]
fn coherent_capacity_matches_library() {
    let (s, c) = cap_coherent(1.0, 2, 4096, OnebitCoherentMethod::Exact);
    assert_eq!(s, OnebitStatus::Ok);
    let p = Point { snr: Some(1.0), nt: Some(2), nr: Some(4096), ..Point::default() };
    let lib = evaluate(Operation::CapacityCoherent, &p, "exact", 0, 0).unwrap();
    assert_eq!(c.bits.to_bits(), lib.value_bits.to_bits());
    assert!(c.std_err.is_nan());
    assert!((c.term_dimension + c.term_volume + c.term_alpha - c.bits).abs() < 1e-12);
}

#[test]
fn noncoherent_methods_order() {
    let run = |m| {
        let mut c = OnebitCapacity { bits: 0.0, std_err: 0.0, has_terms: 0, term_dimension: 0.0, term_volume: 0.0, term_alpha: 0.0 };
        assert_eq!(unsafe { onebit_capacity_noncoherent(1.0, 3, 3, 1_000_000, m, 100_000, 3, &mut c) }, OnebitStatus::Ok);
        c
    };
    let lb = run(OnebitNoncoherentMethod::LbUniform).bits;
    let ex = run(OnebitNoncoherentMethod::Exact);
    let ub = run(OnebitNoncoherentMethod::UbGenie).bits;
    assert!(lb <= ex.bits && ex.bits <= ub, "{lb} {} {ub}", ex.bits);
    assert!(ex.std_err > 0.0);
}

#[test]
fn errors_map_to_status_and_message() {
    let (s, _) = cap_coherent(-1.0, 1, 10, OnebitCoherentMethod::Exact);
    assert_eq!(s, OnebitStatus::InvalidParameter);
    assert!(last_error().contains("snr"), "{}", last_error());

    let mut v = 0.0;
    assert_eq!(unsafe { onebit_vol_q_exact(1, 1.0, &mut v) }, OnebitStatus::InvalidParameter);
    let mut c = OnebitCapacity { bits: 0.0, std_err: 0.0, has_terms: 0, term_dimension: 0.0, term_volume: 0.0, term_alpha: 0.0 };
    let s = unsafe { onebit_capacity_noncoherent(1.0, 5, 5, 1000, OnebitNoncoherentMethod::Exact, 0, 0, &mut c) };
    assert_eq!(s, OnebitStatus::Unsupported);
    assert_eq!(unsafe { onebit_zeta(1, 0.5, &mut v) }, OnebitStatus::InvalidParameter);
    assert_eq!(unsafe { onebit_zeta(0, 0.5, ptr::null_mut()) }, OnebitStatus::NullPointer);
    assert_eq!(unsafe { onebit_zeta(0, 0.5, &mut v) }, OnebitStatus::Ok);
    assert_eq!(last_error(), "");
}

#[test]
fn scalar_entry_points() {
    let mut v = 0.0;
    assert_eq!(unsafe { onebit_vol_q_exact(3, 1.0, &mut v) }, OnebitStatus::Ok);
    assert!((v - std::f64::consts::PI.powi(2) / 2.0).abs() < 1e-12);
    assert_eq!(unsafe { onebit_alpha_t2(0.5, &mut v) }, OnebitStatus::Ok);
    assert_eq!(v, onebit::noncoherent::alpha_t2(0.5).unwrap());
    assert_eq!(unsafe { onebit_alpha_coherent(1.0, 2, &mut v) }, OnebitStatus::Ok);
    assert_eq!(v, onebit::coherent::alpha_coherent(1.0, 2).unwrap());
    assert_eq!(unsafe { onebit_mi_exact_t2(256, 0.5, OnebitPrior::Jeffreys, &mut v) }, OnebitStatus::Ok);
    assert_eq!(v, onebit::simulator::mi_exact_t2(256, 0.5, onebit::simulator::Prior::Jeffreys, None).unwrap());

    let mut e = OnebitEstimate { value: 0.0, std_err: 0.0 };
    assert_eq!(unsafe { onebit_vol_q_mc(3, 1.0, 20_000, 5, &mut e) }, OnebitStatus::Ok);
    let lib = onebit::covariance::vol_q_mc(3, 1.0, 20_000, 5).unwrap();
    assert_eq!((e.value, e.std_err), (lib.value, lib.std_err));
    assert_eq!(unsafe { onebit_alpha_t3(0.5, 20_000, 5, &mut e) }, OnebitStatus::Ok);
    assert!(e.value > 0.0 && e.std_err > 0.0);
}

#[test]
fn pmf_handle_lifecycle() {
    let q = [0.3, -0.2, 0.4];
    let mut h: *mut OnebitPmf = ptr::null_mut();
    unsafe {
        assert_eq!(onebit_pmf_exact(3, q.as_ptr(), 3, &mut h), OnebitStatus::Ok);
        let mut n = 0usize;
        assert_eq!(onebit_pmf_len(h, &mut n), OnebitStatus::Ok);
        assert_eq!(n, 8);
        let mut buf = [0.0; 8];
        assert_eq!(onebit_pmf_copy(h, buf.as_mut_ptr(), 8), OnebitStatus::Ok);
        let lib = pmf_exact(&CorrelationVector::new(3, q.to_vec()).unwrap()).unwrap();
        assert_eq!(&buf[..], lib.pmf());
        let mut p = 0.0;
        assert_eq!(onebit_pmf_get(h, 8, &mut p), OnebitStatus::InvalidParameter);
        onebit_pmf_free(h);

        assert_eq!(onebit_pmf_mc(3, q.as_ptr(), 2, 1000, 0, &mut h), OnebitStatus::InvalidParameter);
        assert_eq!(onebit_pmf_mc(3, q.as_ptr(), 3, 200_000, 1, &mut h), OnebitStatus::Ok);
        let mut mc = [0.0; 8];
        assert_eq!(onebit_pmf_copy(h, mc.as_mut_ptr(), 8), OnebitStatus::Ok);
        let tv: f64 = 0.5 * mc.iter().zip(lib.pmf()).map(|(a, b)| (a - b).abs()).sum::<f64>();
        assert!(tv < 0.01, "{tv}");
        onebit_pmf_free(h);
        onebit_pmf_free(ptr::null_mut());
    }
}

#[test]
fn samplers_are_seeded_and_valid() {
    let draws = |seed| unsafe {
        let mut s: *mut OnebitQSampler = ptr::null_mut();
        assert_eq!(onebit_q_sampler_new(4, 0.8, seed, &mut s), OnebitStatus::Ok);
        let mut out = Vec::new();
        for _ in 0..50 {
            let mut b = [0.0; 6];
            assert_eq!(onebit_q_sampler_next(s, b.as_mut_ptr(), 6), OnebitStatus::Ok);
            out.push(b);
        }
        let mut small = [0.0; 5];
        assert_eq!(onebit_q_sampler_next(s, small.as_mut_ptr(), 5), OnebitStatus::BufferTooSmall);
        onebit_q_sampler_free(s);
        out
    };
    let a = draws(11);
    assert_eq!(a, draws(11));
    assert_ne!(a, draws(12));
    for q in &a {
        assert!(is_member(&CorrelationVector::new(4, q.to_vec()).unwrap(), 0.8));
    }

    unsafe {
        let mut r: *mut OnebitRadialSampler = ptr::null_mut();
        assert_eq!(onebit_radial_sampler_new(4.0, 3, 2, &mut r), OnebitStatus::Ok);
        for _ in 0..200 {
            let mut x = [0.0; 3];
            assert_eq!(onebit_radial_sampler_next(r, x.as_mut_ptr(), 3), OnebitStatus::Ok);
            assert!(x.iter().map(|v| v * v).sum::<f64>() <= 4.0 + 1e-9);
        }
        onebit_radial_sampler_free(r);
        assert_eq!(onebit_radial_sampler_new(4.0, 0, 2, &mut r), OnebitStatus::InvalidParameter);
    }
}

fn find_staticlib() -> Option<PathBuf> {
    let exe = std::env::current_exe().ok()?;
    let deps = exe.parent()?;
    let name = if cfg!(windows) { "onebit_ffi.lib" } else { "libonebit_ffi.a" };
    [deps.parent()?.join(name), deps.join(name)].into_iter().find(|p| p.exists())
}

#[test]
fn header_compiles_and_links_from_c() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR"));
    let header = dir.join("include/onebit.h");
    assert!(header.exists(), "header missing");
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler on PATH; skipping the C link check");
        return;
    }
    let lib = find_staticlib().expect("static library not built");
    let bin = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("onebit_smoke");
    let out = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-D_DEFAULT_SOURCE"])
        .arg("-I")
        .arg(dir.join("include"))
        .arg(dir.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .unwrap();
    assert!(out.status.success(), "cc failed: {}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    let stdout = String::from_utf8_lossy(&run.stdout);
    assert!(run.status.success(), "smoke failed: {stdout}");
    assert!(stdout.starts_with("ok "), "{stdout}");
}
