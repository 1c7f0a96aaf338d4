//! `visdsl` command line: check, compile, fmt, probe, session replay and
//! score. [`run`] takes the argument list and output streams so tests can
//! drive it in-process.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use visdsl_core::ast::Ctor;
use visdsl_core::emit::{DataPayload, HtmlOptions};
use visdsl_core::pipeline::{load_metas, load_payloads};
use visdsl_core::probe::{classify_file, probe_source};
use visdsl_core::session::{init_session, run_turns, Script, Upload};
use visdsl_core::syntax::parse_as;
use visdsl_core::vmpc::{aggregate, summarize, PromptResult};
use visdsl_core::{
    emit_html, emit_ir_json, parse, print_brace, print_indent, realize, verify, Diagnostic,
    Program, RealizeOptions, Syntax,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "visdsl",
    version,
    about = "Compiler for the visdsl visualization language"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and verify programs; print diagnostics only.
    Check(SourceArgs),
    /// Compile programs to an HTML bundle or, with --ir-only, render IR JSON.
    Compile(CompileArgs),
    /// Reprint programs in canonical form.
    Fmt(FmtArgs),
    /// Print the metadata extracted from a dataset file as JSON.
    Probe(ProbeArgs),
    /// Drive the conversational schema from a recorded script.
    #[command(subcommand)]
    Session(SessionCommand),
    /// Score grading records and print the per-category table.
    Score(ScoreArgs),
}

#[derive(Subcommand, Debug)]
enum SessionCommand {
    /// Replay a script file and print the resulting program.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SyntaxArg {
    Auto,
    Brace,
    Indent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
struct SourceArgs {
    /// Program files (.rvn).
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Input syntax.
    #[arg(long, value_enum, default_value = "auto")]
    syntax: SyntaxArg,
    /// Directory data paths resolve against; defaults to each program's directory.
    #[arg(long)]
    data_dir: Option<PathBuf>,
    /// Diagnostic output format.
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Output file, or a directory when several programs are given.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Emit only the render IR JSON (to stdout unless -o is given).
    #[arg(long)]
    ir_only: bool,
    /// Inline dataset bytes into the bundle (default).
    #[arg(long, overrides_with = "no_embed_data")]
    embed_data: bool,
    /// Reference datasets by URL instead of inlining them.
    #[arg(long, overrides_with = "embed_data")]
    no_embed_data: bool,
    /// Prefix for data URLs in the IR.
    #[arg(long, default_value = "")]
    data_base: String,
    /// Also write the IR JSON next to the bundle at this path.
    #[arg(long)]
    ir: Option<PathBuf>,
    /// Page title of the bundle.
    #[arg(long, default_value = "visualization")]
    title: String,
}

#[derive(Args, Debug)]
struct FmtArgs {
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Output syntax; `auto` keeps each file's own syntax.
    #[arg(long, value_enum, default_value = "auto")]
    syntax: SyntaxArg,
    /// Rewrite files in place instead of printing.
    #[arg(short, long)]
    write: bool,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Img,
    Tbl,
    Net,
    Geo,
}

#[derive(Args, Debug)]
struct ProbeArgs {
    file: PathBuf,
    /// Constructor to probe as; inferred from the file when omitted.
    #[arg(long, value_enum)]
    kind: Option<KindArg>,
    /// Table format (csv or json).
    #[arg(long)]
    data_format: Option<String>,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    /// Script JSON: uploads (paths relative to the script) and turns with proposals
    script: PathBuf,
    /// Syntax of the printed program.
    #[arg(long, value_enum, default_value = "indent")]
    syntax: SyntaxArg,
    /// Write the turn-by-turn transcript as JSON.
    #[arg(long)]
    transcript: Option<PathBuf>,
    /// Write the final schema as JSON.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    /// JSON array of prompt results.
    file: PathBuf,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

/// Outcome of a failed command, mapped to an exit code.
enum Failure {
    /// Diagnostics or parse errors, already rendered for stdout.
    Diagnostics,
    /// I/O or usage problem with a message for stderr.
    Usage(String),
}

type Outcome = Result<(), Failure>;

fn io_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, text).map_err(|e| io_error(path, e))
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Check(a) => check(&a, out, err),
        Command::Compile(a) => compile(&a, out, err),
        Command::Fmt(a) => fmt(&a, out),
        Command::Probe(a) => probe(&a, out),
        Command::Session(SessionCommand::Replay(a)) => replay(&a, out, err),
        Command::Score(a) => score(&a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Diagnostics) => EXIT_DIAGNOSTICS,
        Err(Failure::Usage(message)) => {
            let _ = writeln!(err, "error: {message}");
            EXIT_USAGE
        }
    }
}

/// Diagnostics for one input file, in verification order.
struct Report {
    file: PathBuf,
    diagnostics: Vec<Diagnostic>,
    notes: Vec<String>,
}

fn parse_file(path: &Path, syntax: SyntaxArg) -> Result<Result<Program, Diagnostic>, Failure> {
    let text = read(path)?;
    let parsed = match syntax {
        SyntaxArg::Auto => parse(&text),
        SyntaxArg::Brace => parse_as(&text, Syntax::Brace),
        SyntaxArg::Indent => parse_as(&text, Syntax::Indent),
    };
    Ok(parsed.map_err(|e| {
        Diagnostic::error(
            "parse-error",
            format!("{}:{}", e.span.line, e.span.column),
            e.to_string(),
        )
    }))
}

fn data_dir(args: &SourceArgs, file: &Path) -> PathBuf {
    args.data_dir
        .clone()
        .unwrap_or_else(|| file.parent().map(Path::to_path_buf).unwrap_or_default())
}

/// `where` clauses are kept but never evaluated; say so once per layer.
fn where_notes(program: &Program) -> Vec<String> {
    let mut notes = Vec::new();
    for view in &program.views {
        for (i, layer) in view.layers.iter().enumerate() {
            if layer.where_clause.is_some() {
                notes.push(format!(
                    "views.{}.layers[{i}]: `where` is accepted but not evaluated",
                    view.id
                ));
            }
        }
    }
    notes
}

/// A verified program with everything needed to emit it.
struct Checked {
    program: Program,
    spec: visdsl_core::ProgramSpec,
    data_dir: PathBuf,
}

fn check_one(args: &SourceArgs, file: &Path) -> Result<(Report, Option<Checked>), Failure> {
    let mut report = Report {
        file: file.to_path_buf(),
        diagnostics: Vec::new(),
        notes: Vec::new(),
    };
    let program = match parse_file(file, args.syntax)? {
        Ok(p) => p,
        Err(d) => {
            report.diagnostics.push(d);
            return Ok((report, None));
        }
    };
    report.notes = where_notes(&program);
    let dir = data_dir(args, file);
    let metas = load_metas(&program, &dir).map_err(|e| Failure::Usage(e.to_string()))?;
    match verify(&program, &metas) {
        Ok(spec) => Ok((
            report,
            Some(Checked {
                program,
                spec,
                data_dir: dir,
            }),
        )),
        Err(diags) => {
            report.diagnostics = diags;
            Ok((report, None))
        }
    }
}

fn check_all(args: &SourceArgs) -> Result<Vec<(Report, Option<Checked>)>, Failure> {
    // Parallel over inputs; collecting keeps input order.
    args.files.par_iter().map(|f| check_one(args, f)).collect()
}

fn print_reports(reports: &[&Report], format: Format, out: &mut dyn Write, err: &mut dyn Write) {
    for r in reports {
        for note in &r.notes {
            let _ = writeln!(err, "note: {}: {note}", r.file.display());
        }
    }
    match format {
        Format::Json if reports.len() == 1 => {
            let _ = writeln!(
                out,
                "{}",
                serde_json::to_string_pretty(&reports[0].diagnostics).expect("json")
            );
        }
        Format::Json => {
            for r in reports {
                let line =
                    json!({"file": r.file.display().to_string(), "diagnostics": r.diagnostics});
                let _ = writeln!(out, "{line}");
            }
        }
        Format::Text => {
            for r in reports {
                for d in &r.diagnostics {
                    let at = if d.path.is_empty() {
                        String::new()
                    } else {
                        format!(" at {}", d.path)
                    };
                    let _ = writeln!(
                        out,
                        "{}: error[{}]{at}: {}",
                        r.file.display(),
                        d.code,
                        d.message
                    );
                }
            }
        }
    }
}

fn check(args: &SourceArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let results = check_all(args)?;
    let reports: Vec<&Report> = results.iter().map(|(r, _)| r).collect();
    print_reports(&reports, args.format, out, err);
    if reports.iter().any(|r| !r.diagnostics.is_empty()) {
        Err(Failure::Diagnostics)
    } else {
        Ok(())
    }
}

fn output_for(base: &Path, input: &Path, many: bool, ext: &str) -> PathBuf {
    if many {
        let stem = input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        base.join(format!("{stem}.{ext}"))
    } else {
        base.to_path_buf()
    }
}

fn compile(args: &CompileArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    if !args.ir_only && args.output.is_none() {
        return Err(Failure::Usage(
            "compile needs -o/--output unless --ir-only is given".into(),
        ));
    }
    let many = args.source.files.len() > 1;
    if many && args.ir.is_some() {
        return Err(Failure::Usage("--ir takes a single input program".into()));
    }
    let results = check_all(&args.source)?;
    let reports: Vec<&Report> = results.iter().map(|(r, _)| r).collect();
    if reports.iter().any(|r| !r.diagnostics.is_empty()) {
        print_reports(&reports, args.source.format, out, err);
        return Err(Failure::Diagnostics);
    }
    for r in &reports {
        for note in &r.notes {
            let _ = writeln!(err, "note: {}: {note}", r.file.display());
        }
    }
    let options = RealizeOptions {
        data_base: args.data_base.clone(),
    };
    let embed = !args.no_embed_data;
    if let (Some(dir), true) = (&args.output, many) {
        std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    }

    // Emission is independent per program; output order follows input order.
    let emitted: Vec<Result<(String, Option<String>), Failure>> = results
        .par_iter()
        .map(|(_, checked)| {
            let c = checked.as_ref().expect("verified");
            let ir = realize(&c.spec, &options);
            let ir_json = emit_ir_json(&ir);
            if args.ir_only {
                return Ok((ir_json, None));
            }
            let payloads: BTreeMap<String, DataPayload> = if embed {
                load_payloads(&c.program, &c.data_dir).map_err(|e| Failure::Usage(e.to_string()))?
            } else {
                BTreeMap::new()
            };
            let html_options = HtmlOptions {
                title: args.title.clone(),
                embed_data: embed,
            };
            let bundle = emit_html(&ir, &payloads, &html_options)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            Ok((ir_json, Some(bundle.html)))
        })
        .collect();

    for ((report, _), result) in results.iter().zip(emitted) {
        let (ir_json, html) = result?;
        match (&args.output, html) {
            (None, _) => {
                let _ = out.write_all(ir_json.as_bytes());
            }
            (Some(base), None) => {
                let path = output_for(base, &report.file, many, "json");
                write_file(&path, &ir_json)?;
                let _ = writeln!(err, "wrote {}", path.display());
            }
            (Some(base), Some(html)) => {
                let path = output_for(base, &report.file, many, "html");
                write_file(&path, &html)?;
                let _ = writeln!(err, "wrote {}", path.display());
                if let Some(ir_path) = &args.ir {
                    write_file(ir_path, &ir_json)?;
                    let _ = writeln!(err, "wrote {}", ir_path.display());
                }
            }
        }
    }
    Ok(())
}

fn fmt(args: &FmtArgs, out: &mut dyn Write) -> Outcome {
    let mut reports = Vec::new();
    let mut printed = Vec::new();
    for file in &args.files {
        let text = read(file)?;
        let parsed = match args.syntax {
            SyntaxArg::Auto => {
                visdsl_core::detect_syntax(&text).and_then(|s| parse_as(&text, s).map(|p| (p, s)))
            }
            SyntaxArg::Brace => parse(&text).map(|p| (p, Syntax::Brace)),
            SyntaxArg::Indent => parse(&text).map(|p| (p, Syntax::Indent)),
        };
        match parsed {
            Ok((program, Syntax::Brace)) => printed.push((file, print_brace(&program))),
            Ok((program, Syntax::Indent)) => printed.push((file, print_indent(&program))),
            Err(e) => reports.push(Report {
                file: file.clone(),
                diagnostics: vec![Diagnostic::error(
                    "parse-error",
                    format!("{}:{}", e.span.line, e.span.column),
                    e.to_string(),
                )],
                notes: Vec::new(),
            }),
        }
    }
    if !reports.is_empty() {
        let refs: Vec<&Report> = reports.iter().collect();
        print_reports(&refs, args.format, out, &mut std::io::sink());
        return Err(Failure::Diagnostics);
    }
    for (file, text) in printed {
        if args.write {
            write_file(file, &text)?;
        } else {
            let _ = out.write_all(text.as_bytes());
        }
    }
    Ok(())
}

fn probe(args: &ProbeArgs, out: &mut dyn Write) -> Outcome {
    let bytes = std::fs::read(&args.file).map_err(|e| io_error(&args.file, e))?;
    let name = args.file.to_string_lossy();
    let (ctor, format) = match args.kind {
        Some(KindArg::Img) => (Ctor::Img, None),
        Some(KindArg::Tbl) => (Ctor::Tbl, None),
        Some(KindArg::Net) => (Ctor::Net, None),
        Some(KindArg::Geo) => (Ctor::Geo, None),
        None => {
            let (ctor, format) =
                classify_file(&name, &bytes).map_err(|e| io_error(&args.file, e))?;
            (ctor, Some(format))
        }
    };
    let format = args.data_format.as_deref().or(format);
    let meta = probe_source(&bytes, ctor, format, &name).map_err(|e| io_error(&args.file, e))?;
    let _ = writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(&meta).expect("json")
    );
    Ok(())
}

fn replay(args: &ReplayArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let script: Script =
        serde_json::from_str(&read(&args.script)?).map_err(|e| io_error(&args.script, e))?;
    let base = args
        .script
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let mut uploads = Vec::new();
    for upload in &script.uploads {
        let full = base.join(upload);
        let bytes = std::fs::read(&full).map_err(|e| io_error(&full, e))?;
        let name = Path::new(upload)
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| upload.clone());
        uploads.push(Upload {
            name,
            path: upload.clone(),
            bytes,
        });
    }
    let mut session = init_session(&uploads).map_err(|e| Failure::Usage(e.to_string()))?;
    let transcript = run_turns(&mut session, &mut script.provider(), &script.user_turns());
    if let Some(path) = &args.transcript {
        write_file(
            path,
            &serde_json::to_string_pretty(&transcript).expect("json"),
        )?;
    }
    if let Some(path) = &args.schema {
        write_file(path, &session.schema.to_json())?;
    }
    for entry in &transcript {
        if let Some(text) = &entry.result.clarification {
            let _ = writeln!(err, "[{}] {text}", entry.result.node.name());
        }
        for item in &entry.result.dropped {
            let _ = writeln!(err, "[{}] dropped: {item}", entry.result.node.name());
        }
    }
    let lowered = match session.to_dsl() {
        Ok(l) => l,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            return Err(Failure::Diagnostics);
        }
    };
    let text = match args.syntax {
        SyntaxArg::Brace => print_brace(&lowered.program),
        _ => print_indent(&lowered.program),
    };
    let _ = out.write_all(text.as_bytes());
    Ok(())
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.2}"))
}

fn score(args: &ScoreArgs, out: &mut dyn Write) -> Outcome {
    let results: Vec<PromptResult> =
        serde_json::from_str(&read(&args.file)?).map_err(|e| io_error(&args.file, e))?;
    let table = summarize(&results).map_err(|e| Failure::Usage(e.to_string()))?;
    match args.format {
        Format::Json => {
            let mut prompts = Vec::new();
            for r in &results {
                let agg = aggregate(r).map_err(|e| Failure::Usage(e.to_string()))?;
                prompts.push(json!({
                    "prompt": r.prompt,
                    "system": r.system,
                    "category": r.category,
                    "vmpc": agg.vmpc,
                    "vmpc_of_means": agg.vmpc_of_means,
                }));
            }
            let rows: Vec<_> = table
                .rows
                .iter()
                .map(|(label, values)| json!({"category": label, "vmpc": values}))
                .collect();
            let doc = json!({"systems": table.systems, "rows": rows, "prompts": prompts});
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("json"));
        }
        Format::Text => {
            let widths: Vec<usize> = table.systems.iter().map(|s| s.len().max(4)).collect();
            let mut header = format!("{:<8}", "VMPC");
            for (s, w) in table.systems.iter().zip(&widths) {
                header.push_str(&format!("  {s:>w$}"));
            }
            let _ = writeln!(out, "{}", header.trim_end());
            for (label, values) in &table.rows {
                let mut line = format!("{label:<8}");
                for (v, w) in values.iter().zip(&widths) {
                    line.push_str(&format!("  {:>w$}", cell(*v)));
                }
                let _ = writeln!(out, "{line}");
            }
        }
    }
    Ok(())
}
