//! Shared harness for the CLI golden reports.

use std::path::{Path, PathBuf};
use std::process::Command;

/// Golden runs: search-invariant grid points and H¹ table cells.
pub const GOLDEN_CASES: &[(&str, &[&str])] = &[
    ("search_n2_0_1o3_4o3", &["search-invariant", "--n", "2", "--lambda", "0", "--mu", "1/3", "--nu", "4/3", "--max-order", "4", "--json"]),
    ("search_n3_m1o2_1o4_m1o4", &["search-invariant", "--n", "3", "--lambda", "-1/2", "--mu", "1/4", "--nu", "-1/4", "--json"]),
    ("search_n2_1_1_3", &["search-invariant", "--n", "2", "--lambda", "1", "--mu", "1", "--nu", "3", "--json"]),
    ("h1_n2_1o3_1o3", &["h1-dim", "--n", "2", "--lambda", "1/3", "--mu", "1/3", "--json"]),
    ("h1_n3_1o4_1o4_o3", &["h1-dim", "--n", "3", "--lambda", "1/4", "--mu", "1/4", "--max-order", "3", "--json"]),
    ("h1_n3_0_1", &["h1-dim", "--n", "3", "--lambda", "0", "--mu", "1", "--json"]),
    ("relative_n3_i2", &["relative-h1", "--n", "3", "--relative", "2", "--lambda", "-1/2", "--mu", "0", "--json"]),
];

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run_bin(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_superk"));
    cmd.args(args).env_remove("SUPERK_CACHE_DIR");
    if let Some(dir) = cache {
        cmd.arg("--cache-dir").arg(dir);
    }
    let out = cmd.output().expect("binary runs");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).expect("utf-8"),
        stderr: String::from_utf8(out.stderr).expect("utf-8"),
    }
}

pub fn golden_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.json"))
}

/// Cold cache, warm cache and uncached runs must agree byte for byte with the stored golden.
/// Set `UPDATE_GOLDEN=1` to rewrite the stored file instead.
pub fn check_golden(name: &str, args: &[&str]) -> Result<(), String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cold = run_bin(args, Some(dir.path()));
    if cold.code != 0 {
        return Err(format!("{name}: exit {} ({})", cold.code, cold.stderr.trim()));
    }
    if cold.stderr.contains("cache hit") {
        return Err(format!("{name}: unexpected hit on a cold cache"));
    }
    let warm = run_bin(args, Some(dir.path()));
    if !warm.stderr.contains("cache hit") {
        return Err(format!("{name}: second run missed the cache"));
    }
    let bare = run_bin(args, None);
    if warm.stdout != cold.stdout || bare.stdout != cold.stdout {
        return Err(format!("{name}: output differs across cache states"));
    }
    let path = golden_path(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &cold.stdout).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let want = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if want != cold.stdout {
        return Err(format!("{name}: output differs from {}", path.display()));
    }
    Ok(())
}
