#![allow(dead_code)]

use std::path::{Path, PathBuf};
use visdsl_core::synth::TaylorGreen;

pub fn core_fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

pub fn rejects_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/rejects")
}

/// Runs the command line in-process; returns exit code, stdout and stderr.
pub fn visdsl(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("visdsl").chain(args.iter().copied());
    let code = visdsl_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

/// Small volume and table for the rejection corpus, plus a table with a
/// string column.
pub fn write_small_data(dir: &Path) {
    let tg = TaylorGreen::new(9);
    std::fs::write(dir.join("tg.vti"), tg.vti()).unwrap();
    std::fs::write(dir.join("tg.csv"), tg.csv(7)).unwrap();
    std::fs::write(
        dir.join("cities.csv"),
        "name,pop\nOslo,700000\nLima,9700000\n",
    )
    .unwrap();
}

/// Teaser program data: a 65-point-per-axis volume and its sampled table.
pub fn write_teaser_data(dir: &Path) {
    let tg = TaylorGreen::new(65);
    std::fs::write(dir.join("taylorgreen_9.vti"), tg.vti()).unwrap();
    std::fs::write(dir.join("tg9_sample.csv"), tg.csv(97)).unwrap();
    for name in ["teaser.indent.rvn", "teaser.brace.rvn"] {
        std::fs::copy(core_fixture(name), dir.join(name)).unwrap();
    }
}

/// Session script and the uploads it names.
pub fn write_session(dir: &Path) -> PathBuf {
    let tg = TaylorGreen::new(65);
    std::fs::write(dir.join("stats.csv"), tg.csv(97)).unwrap();
    std::fs::write(dir.join("tg9.vti"), tg.vti()).unwrap();
    let script = dir.join("script.json");
    std::fs::copy(core_fixture("session/teaser_script.json"), &script).unwrap();
    script
}

/// Expected diagnostic code of a corpus file: its name without extension.
pub fn expected_code(path: &Path) -> String {
    path.file_stem().unwrap().to_string_lossy().into_owned()
}

pub fn reject_files() -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(rejects_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "rvn"))
        .collect();
    files.sort();
    files
}
