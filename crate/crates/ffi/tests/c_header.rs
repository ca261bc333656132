//! Compiles and links `tests/c_smoke.c` against the static library when a C
//! compiler is available.

use std::path::{Path, PathBuf};
use std::process::Command;

fn target_dir() -> PathBuf {
    // .../target/<profile>/deps/c_header-<hash>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let lib = target_dir().join("libpebbling_ffi.a");
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler; skipping");
        return;
    }
    if !lib.exists() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let out = std::env::temp_dir().join(format!("pebbling_c_smoke_{}", std::process::id()));
    let status = Command::new("cc")
        .arg(root.join("tests/c_smoke.c"))
        .arg("-I")
        .arg(root.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let run = Command::new(&out).output().unwrap();
    let _ = std::fs::remove_file(&out);
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/pebbling.h")).unwrap();
    for f in [
        "peb_last_error",
        "peb_dag_parse",
        "peb_dag_generate",
        "peb_dag_free",
        "peb_dag_vertex_count",
        "peb_dag_edge_count",
        "peb_dag_max_in_degree",
        "peb_schedule",
        "peb_report_free",
        "peb_report_space_bound",
        "peb_report_move_bound",
        "peb_report_peak",
        "peb_report_moves",
        "peb_report_schedule_text",
        "peb_verify",
        "peb_string_free",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
}
