//! Canonical IR serialization and the self-contained HTML bundle.

use crate::probe::MAX_INPUT_BYTES;
use crate::realize::{layout_grid, Grid, RenderIr};
use base64::Engine;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt::Write;

/// Element id of the `<script type="application/json">` block holding the IR.
pub const IR_ELEMENT_ID: &str = "visdsl-ir";
/// Element id of the data payload block.
pub const DATA_ELEMENT_ID: &str = "visdsl-data";
/// Version tag of the bundled runtime script.
pub const RUNTIME_VERSION: &str = "0.1.0";

const RUNTIME_JS: &str = include_str!("../assets/runtime.js");

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum EmitError {
    #[error("no data supplied for source `{0}`")]
    MissingData(String),
    #[error("inline data is {size} bytes, over the {limit}-byte limit")]
    TooLarge { size: usize, limit: usize },
    #[error("program has {0} views; a bundle holds 1 to 9")]
    ViewCount(usize),
}

/// Rewrites integral floats as integers so `1.0` prints as `1`.
fn canonical_numbers(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                *v = crate::value::json_number(f);
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(canonical_numbers),
        serde_json::Value::Object(map) => map.values_mut().for_each(canonical_numbers),
        _ => {}
    }
}

fn canonical_value(ir: &RenderIr) -> serde_json::Value {
    let mut v = serde_json::to_value(ir).expect("IR serializes");
    canonical_numbers(&mut v);
    v
}

/// Pretty-printed canonical JSON: fixed key order, integral numbers without
/// a fraction, trailing newline.
pub fn emit_ir_json(ir: &RenderIr) -> String {
    let mut out = serde_json::to_string_pretty(&canonical_value(ir)).expect("IR serializes");
    out.push('\n');
    out
}

pub fn parse_ir_json(text: &str) -> serde_json::Result<RenderIr> {
    serde_json::from_str(text)
}

/// JSON safe to place inside a `<script>` element.
fn script_json(v: &impl Serialize) -> String {
    serde_json::to_string(v)
        .expect("serializable")
        .replace('<', "\\u003c")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DataPayload {
    Bytes(Vec<u8>),
    Url(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataMode {
    InlineBase64,
    InlineText,
    RelativeUrl,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DataRefEntry {
    pub source: String,
    pub mode: DataMode,
    pub media_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bundle {
    pub html: String,
    pub embedded_ir: String,
    pub data_refs: Vec<DataRefEntry>,
}

#[derive(Debug, Clone)]
pub struct HtmlOptions {
    pub title: String,
    /// Inline payload bytes; otherwise reference each source by URL.
    pub embed_data: bool,
}

impl Default for HtmlOptions {
    fn default() -> Self {
        HtmlOptions {
            title: "visualization".to_string(),
            embed_data: true,
        }
    }
}

fn media_type(format: Option<&str>) -> (&'static str, bool) {
    match format {
        Some("csv") => ("text/csv", true),
        Some("json") => ("application/json", true),
        Some("geojson") => ("application/geo+json", false),
        Some("vti") => ("application/vnd.vtk.vti+xml", false),
        _ => ("application/octet-stream", false),
    }
}

fn html_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Builds the single-file bundle. `data` maps source names to bytes or to
/// URLs; procedural sources need no entry.
pub fn emit_html(
    ir: &RenderIr,
    data: &BTreeMap<String, DataPayload>,
    options: &HtmlOptions,
) -> Result<Bundle, EmitError> {
    let grid: Grid = layout_grid(ir.views.len()).ok_or(EmitError::ViewCount(ir.views.len()))?;
    let engine = base64::engine::general_purpose::STANDARD;

    let mut refs = Vec::new();
    let mut payload = serde_json::Map::new();
    let mut inline_bytes = 0usize;
    for source in &ir.data {
        if source.procedural.is_some() {
            continue;
        }
        let (media, textual) = media_type(source.format.as_deref());
        let mut entry = serde_json::Map::new();
        let mode = match (options.embed_data, data.get(&source.name)) {
            (true, Some(DataPayload::Bytes(bytes))) => {
                inline_bytes += bytes.len();
                if inline_bytes > MAX_INPUT_BYTES {
                    return Err(EmitError::TooLarge {
                        size: inline_bytes,
                        limit: MAX_INPUT_BYTES,
                    });
                }
                match std::str::from_utf8(bytes).ok().filter(|_| textual) {
                    Some(text) => {
                        entry.insert("data".into(), text.into());
                        DataMode::InlineText
                    }
                    None => {
                        entry.insert("data".into(), engine.encode(bytes).into());
                        DataMode::InlineBase64
                    }
                }
            }
            (_, Some(DataPayload::Url(url))) => {
                entry.insert("url".into(), url.clone().into());
                DataMode::RelativeUrl
            }
            (false, Some(DataPayload::Bytes(_))) | (false, None) => match &source.url {
                Some(url) => {
                    entry.insert("url".into(), url.clone().into());
                    DataMode::RelativeUrl
                }
                None => return Err(EmitError::MissingData(source.name.clone())),
            },
            (true, None) => return Err(EmitError::MissingData(source.name.clone())),
        };
        let mut full = serde_json::Map::new();
        full.insert("mode".into(), serde_json::to_value(mode).expect("mode"));
        full.insert("mediaType".into(), media.into());
        full.extend(entry);
        payload.insert(source.name.clone(), serde_json::Value::Object(full));
        refs.push(DataRefEntry {
            source: source.name.clone(),
            mode,
            media_type: media.to_string(),
        });
    }

    let embedded_ir = script_json(&canonical_value(ir));
    let mut html = String::new();
    let _ = writeln!(html, "<!DOCTYPE html>");
    let _ = writeln!(html, "<html lang=\"en\">");
    let _ = writeln!(html, "<head>");
    let _ = writeln!(html, "<meta charset=\"utf-8\">");
    let _ = writeln!(
        html,
        "<meta name=\"viewport\" content=\"width=device-width, initial-scale=1\">"
    );
    let _ = writeln!(
        html,
        "<meta name=\"generator\" content=\"visdsl-runtime {RUNTIME_VERSION}\">"
    );
    let _ = writeln!(html, "<title>{}</title>", html_escape(&options.title));
    let _ = writeln!(html, "<style>");
    let _ = writeln!(
        html,
        "html, body {{ margin: 0; height: 100%; font-family: sans-serif; }}"
    );
    let _ = writeln!(
        html,
        "#visdsl-grid {{ display: grid; grid-template-columns: repeat({}, minmax(0, 1fr)); \
         grid-template-rows: repeat({}, minmax(320px, 1fr)); gap: 8px; padding: 8px; box-sizing: border-box; \
         min-height: 100%; }}",
        grid.columns, grid.rows
    );
    let _ = writeln!(
        html,
        ".visdsl-view {{ position: relative; border: 1px solid #ddd; border-radius: 4px; overflow: hidden; }}"
    );
    let _ = writeln!(html, "</style>");
    let _ = writeln!(html, "</head>");
    let _ = writeln!(html, "<body>");
    let _ = writeln!(
        html,
        "<div id=\"visdsl-grid\" data-columns=\"{}\" data-rows=\"{}\">",
        grid.columns, grid.rows
    );
    for view in &ir.views {
        let backend = serde_json::to_value(view.backend).expect("backend");
        let _ = writeln!(
            html,
            "<section class=\"visdsl-view\" data-view-id=\"{}\" data-backend=\"{}\"></section>",
            html_escape(&view.view_id),
            backend.as_str().unwrap_or_default()
        );
    }
    let _ = writeln!(html, "</div>");
    let _ = writeln!(
        html,
        "<script type=\"application/json\" id=\"{IR_ELEMENT_ID}\">{embedded_ir}</script>"
    );
    let _ = writeln!(
        html,
        "<script type=\"application/json\" id=\"{DATA_ELEMENT_ID}\">{}</script>",
        script_json(&serde_json::Value::Object(payload))
    );
    let _ = writeln!(html, "<script>\n{RUNTIME_JS}</script>");
    let _ = writeln!(html, "</body>");
    let _ = writeln!(html, "</html>");

    Ok(Bundle {
        html,
        embedded_ir,
        data_refs: refs,
    })
}

/// Text of the element with the given id in a bundle, if present.
fn script_block<'a>(html: &'a str, id: &str) -> Option<&'a str> {
    let marker = format!("id=\"{id}\">");
    let start = html.find(&marker)? + marker.len();
    let end = html[start..].find("</script>")? + start;
    Some(&html[start..end])
}

/// Recovers the IR embedded in a bundle.
pub fn extract_ir(html: &str) -> Option<RenderIr> {
    serde_json::from_str(script_block(html, IR_ELEMENT_ID)?).ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn script_json_cannot_close_the_element() {
        let s = script_json(&serde_json::json!({ "a": "</script><!--" }));
        assert!(!s.contains("</"));
        assert!(!s.contains("<!--"));
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["a"], "</script><!--");
    }

    #[test]
    fn integral_floats_print_as_integers() {
        let mut v = serde_json::json!({ "a": 1.0, "b": [0.5, -0.0, 30.0] });
        canonical_numbers(&mut v);
        assert_eq!(v.to_string(), r#"{"a":1,"b":[0.5,0,30]}"#);
    }
}
