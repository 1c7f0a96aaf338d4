//! End-to-end helpers: source text to verified spec, IR and bundle.

use crate::ast::{Ctor, Program};
use crate::emit::{emit_html, Bundle, DataPayload, EmitError, HtmlOptions};
use crate::probe::{probe_path, ProbeError};
use crate::realize::{realize, RealizeOptions, RenderIr};
use crate::syntax::{parse, ParseError};
use crate::verify::{verify, Diagnostic, Metas, ProgramSpec};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum CompileError {
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("{} diagnostic(s)", .0.len())]
    Diagnostics(Vec<Diagnostic>),
}

pub fn check(src: &str, metas: &Metas) -> Result<(Program, ProgramSpec), CompileError> {
    let program = parse(src)?;
    let spec = verify(&program, metas).map_err(CompileError::Diagnostics)?;
    Ok((program, spec))
}

pub fn compile_ir(
    src: &str,
    metas: &Metas,
    options: &RealizeOptions,
) -> Result<RenderIr, CompileError> {
    let (_, spec) = check(src, metas)?;
    Ok(realize(&spec, options))
}

#[derive(Debug, thiserror::Error)]
#[error("source `{source_name}` ({}): {error}", .path.display())]
pub struct LoadError {
    pub source_name: String,
    pub path: PathBuf,
    pub error: ProbeError,
}

/// Resolves a data path against the program's directory.
pub fn data_path(base: &Path, path: &str) -> PathBuf {
    let p = Path::new(path);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Probes every file-backed source. Procedural sources are skipped; the
/// verifier derives their metadata from arguments.
pub fn load_metas(program: &Program, base: &Path) -> Result<Metas, LoadError> {
    let mut metas = Metas::new();
    for decl in &program.data {
        let (Some(path), true) = (&decl.path, decl.ctor != Ctor::Func) else {
            continue;
        };
        let full = data_path(base, path);
        let format = decl.args.get("format").and_then(|v| v.as_str());
        let meta = probe_path(&full, decl.ctor, format).map_err(|error| LoadError {
            source_name: decl.name.clone(),
            path: full.clone(),
            error,
        })?;
        metas.insert(decl.name.clone(), meta);
    }
    Ok(metas)
}

/// Reads the bytes of every file-backed source for inlining.
pub fn load_payloads(
    program: &Program,
    base: &Path,
) -> std::io::Result<BTreeMap<String, DataPayload>> {
    let mut out = BTreeMap::new();
    for decl in &program.data {
        if let Some(path) = &decl.path {
            let bytes = std::fs::read(data_path(base, path))?;
            out.insert(decl.name.clone(), DataPayload::Bytes(bytes));
        }
    }
    Ok(out)
}

pub fn bundle(
    ir: &RenderIr,
    payloads: &BTreeMap<String, DataPayload>,
    options: &HtmlOptions,
) -> Result<Bundle, EmitError> {
    emit_html(ir, payloads, options)
}
