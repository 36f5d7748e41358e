use std::path::PathBuf;
use std::process::Command;

fn manifest_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(manifest_dir().join("include/fracpk.h")).unwrap();
    for name in [
        "typedef struct FpkSystem FpkSystem;",
        "typedef struct FpkSchedule FpkSchedule;",
        "typedef struct FpkTrajectory FpkTrajectory;",
        "FPK_STATUS_BUFFER_TOO_SMALL = 8",
        "fpk_last_error(",
        "fpk_mittag_leffler(",
        "fpk_system_schnider(",
        "fpk_solve_piecewise(",
        "fpk_trajectory_bis(",
        "fpk_trajectory_free(",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

fn static_lib() -> Option<PathBuf> {
    // target/<profile>/deps/<test binary> → target/<profile>/libfracpk_ffi.a
    let exe = std::env::current_exe().ok()?;
    let lib = exe.parent()?.parent()?.join("libfracpk_ffi.a");
    lib.exists().then_some(lib)
}

/// Compiles a small C program against the header and the static library.
/// Skipped when no C compiler or no static library is around.
#[test]
fn c_program_links_and_runs() {
    let Some(lib) = static_lib() else {
        eprintln!("static library not found; skipping");
        return;
    };
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    let dir = std::env::temp_dir().join(format!("fracpk-ffi-smoke-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let exe = dir.join("smoke");
    let status = Command::new(&cc)
        .arg(manifest_dir().join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest_dir().join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let out = Command::new(&exe).output().unwrap();
    assert!(
        out.status.success(),
        "smoke exited with {:?}",
        out.status.code()
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    let bis: f64 = stdout
        .strip_prefix("bis_end=")
        .and_then(|s| s.split_whitespace().next())
        .and_then(|s| s.parse().ok())
        .unwrap();
    assert!((bis - 50.0).abs() < 0.01, "{stdout}");
    let _ = std::fs::remove_dir_all(&dir);
}
