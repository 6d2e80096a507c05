//! Helpers for the acceptance suite in `tests/acceptance.rs`.

use std::path::PathBuf;
use std::process::Command;

/// Path of the `themex` binary: `THEMEX_BIN` if set, otherwise the copy in
/// the target directory next to the running test, built on demand.
pub fn themex_bin() -> PathBuf {
    if let Some(path) = std::env::var_os("THEMEX_BIN") {
        return PathBuf::from(path);
    }
    let exe = std::env::current_exe().expect("current test executable");
    // target/<profile>/deps/<test> -> target/<profile>/themex
    let profile_dir = exe
        .parent()
        .and_then(|deps| deps.parent())
        .expect("test executable inside a target directory");
    let bin = profile_dir.join(format!("themex{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var_os("CARGO").unwrap_or_else(|| "cargo".into());
        let mut build = Command::new(cargo);
        build.args(["build", "-p", "themex", "--bin", "themex"]);
        if profile_dir.file_name().is_some_and(|p| p == "release") {
            build.arg("--release");
        }
        let status = build.status().expect("run cargo build");
        assert!(status.success(), "building themex failed");
    }
    bin
}
