mod common;

use common::*;
use serde_json::Value;
use visdsl_core::emit::{extract_ir, DATA_ELEMENT_ID, IR_ELEMENT_ID};

/// Parsed contents of the bundle's data block.
fn data_block(html: &str) -> Value {
    let marker = format!("id=\"{DATA_ELEMENT_ID}\">");
    let start = html.find(&marker).unwrap() + marker.len();
    let end = start + html[start..].find("</script>").unwrap();
    json(&html[start..end])
}
use visdsl_core::{ast_equal, parse, parse_ir_json};

fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

#[test]
fn check_reports_nothing_for_a_valid_program() {
    let dir = tempfile::tempdir().unwrap();
    write_teaser_data(dir.path());
    let file = dir.path().join("teaser.indent.rvn");
    let (code, out, _) = visdsl(&["check", file.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    assert_eq!(json(&out), Value::Array(vec![]));
    let (code, out, _) = visdsl(&["check", file.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (0, ""));
}

#[test]
fn check_prints_one_json_diagnostic_for_unknown_source() {
    let dir = tempfile::tempdir().unwrap();
    write_small_data(dir.path());
    let file = rejects_dir().join("unknown-source.rvn");
    let args = [
        "check",
        file.to_str().unwrap(),
        "--data-dir",
        dir.path().to_str().unwrap(),
        "--format",
        "json",
    ];
    let (code, out, _) = visdsl(&args);
    assert_eq!(code, 1);
    let diags = json(&out);
    assert_eq!(diags.as_array().unwrap().len(), 1);
    let d = &diags[0];
    assert_eq!(d["code"], "unknown-source");
    let keys: Vec<&str> = d.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(keys, ["code", "message", "path"]);

    let (code, out, _) = visdsl(&args[..4]);
    assert_eq!(code, 1);
    assert!(out.contains("error[unknown-source]"), "{out}");
}

#[test]
fn parse_errors_exit_one_with_a_location() {
    let dir = tempfile::tempdir().unwrap();
    let file = rejects_dir().join("parse-error.rvn");
    let (code, out, _) = visdsl(&[
        "check",
        file.to_str().unwrap(),
        "--data-dir",
        dir.path().to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code, 1);
    let d = &json(&out)[0];
    assert_eq!(d["code"], "parse-error");
    assert!(d["path"].as_str().unwrap().contains(':'));
}

#[test]
fn io_and_usage_errors_exit_two() {
    let (code, _, err) = visdsl(&["check", "/nonexistent/prog.rvn"]);
    assert_eq!(code, 2);
    assert!(err.starts_with("error:"));
    assert_eq!(visdsl(&["frobnicate"]).0, 2);
    assert_eq!(visdsl(&[]).0, 2);
    let (code, out, _) = visdsl(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("compile"));

    // Data file named by the program is missing.
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.rvn");
    std::fs::copy(core_fixture("teaser.brace.rvn"), &file).unwrap();
    assert_eq!(visdsl(&["check", file.to_str().unwrap()]).0, 2);
}

#[test]
fn compile_requires_an_output_path() {
    let dir = tempfile::tempdir().unwrap();
    write_teaser_data(dir.path());
    let file = dir.path().join("teaser.brace.rvn");
    let (code, _, err) = visdsl(&["compile", file.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("--output"));
}

#[test]
fn compile_writes_a_bundle_with_embedded_ir() {
    let dir = tempfile::tempdir().unwrap();
    write_teaser_data(dir.path());
    let file = dir.path().join("teaser.indent.rvn");
    let html_path = dir.path().join("out.html");
    let ir_path = dir.path().join("out.json");
    let (code, _, err) = visdsl(&[
        "compile",
        file.to_str().unwrap(),
        "-o",
        html_path.to_str().unwrap(),
        "--ir",
        ir_path.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let html = std::fs::read_to_string(&html_path).unwrap();
    assert!(html.contains(&format!("id=\"{IR_ELEMENT_ID}\"")));
    let ir = extract_ir(&html).unwrap();
    assert_eq!(
        ir,
        parse_ir_json(&std::fs::read_to_string(&ir_path).unwrap()).unwrap()
    );
    let data = data_block(&html);
    assert_eq!(data["vol"]["mode"], "inline-base64");
    assert_eq!(data["sample"]["mode"], "inline-text");
}

#[test]
fn compile_without_embedding_references_urls() {
    let dir = tempfile::tempdir().unwrap();
    write_teaser_data(dir.path());
    let file = dir.path().join("teaser.indent.rvn");
    let html_path = dir.path().join("out.html");
    let (code, _, _) = visdsl(&[
        "compile",
        file.to_str().unwrap(),
        "-o",
        html_path.to_str().unwrap(),
        "--no-embed-data",
        "--data-base",
        "data",
    ]);
    assert_eq!(code, 0);
    let html = std::fs::read_to_string(&html_path).unwrap();
    let data = data_block(&html);
    assert_eq!(data["vol"]["mode"], "relative-url");
    assert_eq!(data["sample"]["url"], "data/tg9_sample.csv");
    let ir = extract_ir(&html).unwrap();
    assert_eq!(ir.data[0].url.as_deref(), Some("data/taylorgreen_9.vti"));
}

#[test]
fn compile_ir_only_prints_canonical_json() {
    let dir = tempfile::tempdir().unwrap();
    write_teaser_data(dir.path());
    let file = dir.path().join("teaser.brace.rvn");
    let (code, out, _) = visdsl(&["compile", file.to_str().unwrap(), "--ir-only"]);
    assert_eq!(code, 0);
    let ir = parse_ir_json(&out).unwrap();
    assert_eq!(ir.views.len(), 2);
    assert_eq!(visdsl_core::emit_ir_json(&ir), out);
}

#[test]
fn compile_many_inputs_into_a_directory() {
    let dir = tempfile::tempdir().unwrap();
    write_teaser_data(dir.path());
    let a = dir.path().join("teaser.brace.rvn");
    let b = dir.path().join("teaser.indent.rvn");
    let out_dir = dir.path().join("out");
    let (code, _, err) = visdsl(&[
        "compile",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--ir-only",
        "-o",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    let brace = std::fs::read_to_string(out_dir.join("teaser.brace.json")).unwrap();
    let indent = std::fs::read_to_string(out_dir.join("teaser.indent.json")).unwrap();
    assert_eq!(brace, indent);

    // Without -o the IRs follow input order on stdout.
    let (code, out, _) = visdsl(&[
        "compile",
        a.to_str().unwrap(),
        b.to_str().unwrap(),
        "--ir-only",
    ]);
    assert_eq!(code, 0);
    assert_eq!(out, format!("{brace}{indent}"));
}

#[test]
fn compile_reports_diagnostics_without_writing() {
    let dir = tempfile::tempdir().unwrap();
    write_small_data(dir.path());
    let file = rejects_dir().join("mixed-backend.rvn");
    let html = dir.path().join("x.html");
    let (code, out, _) = visdsl(&[
        "compile",
        file.to_str().unwrap(),
        "--data-dir",
        dir.path().to_str().unwrap(),
        "-o",
        html.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)[0]["code"], "mixed-backend");
    assert!(!html.exists());
}

#[test]
fn fmt_converts_between_syntaxes() {
    let indent = core_fixture("teaser.indent.rvn");
    let brace_text = std::fs::read_to_string(core_fixture("teaser.brace.rvn")).unwrap();
    let (code, out, _) = visdsl(&["fmt", indent.to_str().unwrap(), "--syntax", "brace"]);
    assert_eq!(code, 0);
    assert!(ast_equal(
        &parse(&out).unwrap(),
        &parse(&brace_text).unwrap()
    ));
    assert_eq!(out.trim_end(), brace_text.trim_end());

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("p.rvn");
    std::fs::write(&file, &out).unwrap();
    let (_, again, _) = visdsl(&["fmt", file.to_str().unwrap()]);
    assert_eq!(again, out);

    std::fs::write(&file, "vis {\n  data { t: tbl(\"t.csv\"); }\n view \"a\" { layer { from: t; mark: kde; encode: { x: \"v\" }; } } }").unwrap();
    let (code, out, _) = visdsl(&[
        "fmt",
        file.to_str().unwrap(),
        "--syntax",
        "indent",
        "--write",
    ]);
    assert_eq!((code, out.as_str()), (0, ""));
    let written = std::fs::read_to_string(&file).unwrap();
    assert!(written.starts_with("vis:\n"));
}

#[test]
fn fmt_rejects_unparseable_input() {
    let file = rejects_dir().join("parse-error.rvn");
    assert_eq!(visdsl(&["fmt", file.to_str().unwrap()]).0, 1);
}

#[test]
fn where_clauses_produce_a_note() {
    let dir = tempfile::tempdir().unwrap();
    write_small_data(dir.path());
    let file = dir.path().join("w.rvn");
    std::fs::write(
        &file,
        "vis { data { t: tbl(\"tg.csv\"); } view \"h\" { layer { from: t; mark: histogram; encode: { x: \"ux\" }; where: ux > 0; } } }",
    )
    .unwrap();
    let (code, _, err) = visdsl(&["check", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(
        err.contains("`where` is accepted but not evaluated"),
        "{err}"
    );
}

#[test]
fn probe_prints_metadata() {
    let dir = tempfile::tempdir().unwrap();
    write_teaser_data(dir.path());
    let (code, out, _) = visdsl(&[
        "probe",
        dir.path().join("taylorgreen_9.vti").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let meta = json(&out);
    assert_eq!(meta["kind"], "ImageData");
    assert_eq!(meta["dimensions"], serde_json::json!([65, 65, 65]));

    let (code, out, _) = visdsl(&["probe", dir.path().join("tg9_sample.csv").to_str().unwrap()]);
    assert_eq!(code, 0);
    let vars = json(&out)["variables"].as_array().unwrap().clone();
    assert_eq!(vars.len(), 6);
    assert!(vars.iter().all(|v| v["data_type"] == "number"));

    let odd = dir.path().join("notes.txt");
    std::fs::write(&odd, "hello").unwrap();
    assert_eq!(visdsl(&["probe", odd.to_str().unwrap()]).0, 2);
    assert_eq!(
        visdsl(&[
            "probe",
            odd.to_str().unwrap(),
            "--kind",
            "tbl",
            "--data-format",
            "csv"
        ])
        .0,
        0
    );
}

#[test]
fn session_replay_prints_the_program() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_session(dir.path());
    let transcript = dir.path().join("t.json");
    let schema = dir.path().join("s.json");
    let (code, out, err) = visdsl(&[
        "session",
        "replay",
        script.to_str().unwrap(),
        "--transcript",
        transcript.to_str().unwrap(),
        "--schema",
        schema.to_str().unwrap(),
    ]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("vis:\n"));
    assert!(
        err.contains("[mark] You must specify the type of visualization"),
        "{err}"
    );
    assert_eq!(
        json(&std::fs::read_to_string(&transcript).unwrap())
            .as_array()
            .unwrap()
            .len(),
        7
    );
    assert!(json(&std::fs::read_to_string(&schema).unwrap())["task_summary"].is_string());

    // The printed program compiles against the uploaded files.
    let program = dir.path().join("out.rvn");
    std::fs::write(&program, &out).unwrap();
    assert_eq!(visdsl(&["check", program.to_str().unwrap()]).0, 0);
}

#[test]
fn session_replay_stops_when_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    let script = write_session(dir.path());
    let mut doc = json(&std::fs::read_to_string(&script).unwrap());
    doc["turns"].as_array_mut().unwrap().truncate(3);
    std::fs::write(&script, doc.to_string()).unwrap();
    let (code, out, err) = visdsl(&["session", "replay", script.to_str().unwrap()]);
    assert_eq!((code, out.as_str()), (1, ""));
    assert!(err.contains("incomplete"), "{err}");

    std::fs::write(&script, "{").unwrap();
    assert_eq!(
        visdsl(&["session", "replay", script.to_str().unwrap()]).0,
        2
    );
}

#[test]
fn score_prints_the_category_table() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("grades.json");
    let full = serde_json::json!({"v": 1, "m": 1, "e": 1, "h": 1, "l": 1});
    let partial = serde_json::json!({"v": 1, "m": 0, "e": 0, "h": 1, "l": 1});
    let doc = serde_json::json!([
        {"prompt": "p1", "n_views": 2, "category": "I", "system": "ours",
         "graders": [{"x": 1, "views": [full, partial]}]},
        {"prompt": "p2", "n_views": 1, "category": "S", "system": "ours",
         "graders": [{"x": 0, "views": [full]}]},
        {"prompt": "p1", "n_views": 2, "category": "I", "system": "other",
         "graders": [{"x": 1, "views": [full, full]}]},
    ]);
    std::fs::write(&file, doc.to_string()).unwrap();
    let (code, out, _) = visdsl(&["score", file.to_str().unwrap()]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(
        lines[0].split_whitespace().collect::<Vec<_>>(),
        ["VMPC", "ours", "other"]
    );
    assert_eq!(
        lines[1].split_whitespace().collect::<Vec<_>>(),
        ["I", "0.80", "1.00"]
    );
    assert_eq!(
        lines[2].split_whitespace().collect::<Vec<_>>(),
        ["S", "0.00", "-"]
    );
    assert_eq!(
        lines[3].split_whitespace().collect::<Vec<_>>(),
        ["all", "0.40", "1.00"]
    );

    let (code, out, _) = visdsl(&["score", file.to_str().unwrap(), "--format", "json"]);
    assert_eq!(code, 0);
    let doc = json(&out);
    assert_eq!(doc["prompts"].as_array().unwrap().len(), 3);
    assert_eq!(doc["systems"], serde_json::json!(["ours", "other"]));

    std::fs::write(&file, r#"[{"prompt": "p", "n_views": 1, "graders": [{"x": 1, "views": [{"v": 0, "m": 1, "e": 0, "h": 0, "l": 0}]}]}]"#).unwrap();
    assert_ne!(visdsl(&["score", file.to_str().unwrap()]).0, 0);
}
