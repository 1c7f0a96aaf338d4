//! Dataset metadata extraction. Probes read a file once and keep only
//! names, types, extents and per-variable summaries.

mod geo;
mod network;
mod table;
mod vti;
pub mod vti_writer;

use crate::ast::Ctor;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub use geo::probe_geo;
pub use network::probe_network;
pub use table::{probe_table, TableFormat};
pub use vti::{probe_vti, Scalar};

/// Inputs above this size are rejected before parsing.
pub const MAX_INPUT_BYTES: usize = 100 * 1024 * 1024;

/// Distinct string values above this count are not recorded.
pub const MAX_CATEGORIES: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DataKind {
    ImageData,
    Table,
    Network,
    GeoJSON,
    Procedural,
}

impl DataKind {
    pub fn of(ctor: Ctor) -> DataKind {
        match ctor {
            Ctor::Img => DataKind::ImageData,
            Ctor::Tbl => DataKind::Table,
            Ctor::Net => DataKind::Network,
            Ctor::Geo => DataKind::GeoJSON,
            Ctor::Func => DataKind::Procedural,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            DataKind::ImageData => "ImageData",
            DataKind::Table => "Table",
            DataKind::Network => "Network",
            DataKind::GeoJSON => "GeoJSON",
            DataKind::Procedural => "Procedural",
        }
    }

    /// Volumetric sources render through the spatial backend.
    pub fn is_spatial(self) -> bool {
        matches!(self, DataKind::ImageData | DataKind::Procedural)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DataType {
    Number,
    String,
    Boolean,
    Date,
}

impl DataType {
    pub fn name(self) -> &'static str {
        match self {
            DataType::Number => "number",
            DataType::String => "string",
            DataType::Boolean => "boolean",
            DataType::Date => "date",
        }
    }
}

/// Count, mean and sample standard deviation of a numeric variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableDesc {
    pub name: String,
    pub data_type: DataType,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<Stats>,
    /// Distinct values of a string variable in lexicographic order, when
    /// there are at most [`MAX_CATEGORIES`] of them.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
    /// Components per point for image arrays (3 for vectors).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<usize>,
}

impl VariableDesc {
    pub fn new(name: impl Into<String>, data_type: DataType) -> Self {
        VariableDesc {
            name: name.into(),
            data_type,
            range: None,
            stats: None,
            categories: None,
            components: None,
        }
    }

    pub fn numeric(name: impl Into<String>, min: f64, max: f64) -> Self {
        VariableDesc {
            range: Some([min, max]),
            ..VariableDesc::new(name, DataType::Number)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub kind: DataKind,
    pub variables: Vec<VariableDesc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feature_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crs: Option<String>,
}

impl DatasetMeta {
    pub fn new(kind: DataKind) -> Self {
        DatasetMeta {
            kind,
            variables: Vec::new(),
            dimensions: None,
            row_count: None,
            feature_count: None,
            crs: None,
        }
    }

    /// Looks a field up by name. Network variables also match without
    /// their `node.` / `link.` prefix.
    pub fn variable(&self, name: &str) -> Option<&VariableDesc> {
        self.variables.iter().find(|v| v.name == name).or_else(|| {
            if self.kind != DataKind::Network {
                return None;
            }
            self.variables.iter().find(|v| {
                v.name
                    .strip_prefix("node.")
                    .or_else(|| v.name.strip_prefix("link."))
                    == Some(name)
            })
        })
    }

    /// First numeric single-component variable, in file order.
    pub fn first_scalar(&self) -> Option<&VariableDesc> {
        self.variables
            .iter()
            .find(|v| v.data_type == DataType::Number && v.components.unwrap_or(1) == 1)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ProbeError {
    #[error("input is {size} bytes, above the {MAX_INPUT_BYTES}-byte limit")]
    TooLarge { size: usize },
    #[error("input is empty")]
    Empty,
    #[error("malformed XML: {0}")]
    Xml(String),
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("malformed CSV: {0}")]
    Csv(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid data: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

pub(crate) fn check_size(bytes: &[u8]) -> Result<(), ProbeError> {
    if bytes.len() > MAX_INPUT_BYTES {
        return Err(ProbeError::TooLarge { size: bytes.len() });
    }
    if bytes.iter().all(u8::is_ascii_whitespace) {
        return Err(ProbeError::Empty);
    }
    Ok(())
}

/// Probes `bytes` as the format implied by the constructor, an explicit
/// `format` argument, or the file extension, in that order of priority
/// (the constructor only fixes the kind; `tbl` needs the format).
pub fn probe_source(
    bytes: &[u8],
    ctor: Ctor,
    format: Option<&str>,
    path: &str,
) -> Result<DatasetMeta, ProbeError> {
    match ctor {
        Ctor::Img => probe_vti(bytes),
        Ctor::Net => probe_network(bytes),
        Ctor::Geo => probe_geo(bytes),
        Ctor::Tbl => {
            let format = format
                .map(str::to_ascii_lowercase)
                .or_else(|| extension(path))
                .unwrap_or_default();
            match format.as_str() {
                "json" => probe_table(bytes, TableFormat::Json),
                "csv" | "" => probe_table(bytes, TableFormat::Csv),
                other => Err(ProbeError::Unsupported(format!("table format `{other}`"))),
            }
        }
        Ctor::Func => Err(ProbeError::Unsupported(
            "procedural sources have no file to probe".into(),
        )),
    }
}

pub fn probe_path(
    path: &Path,
    ctor: Ctor,
    format: Option<&str>,
) -> Result<DatasetMeta, ProbeError> {
    let io = |e: std::io::Error| ProbeError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let len = std::fs::metadata(path).map_err(io)?.len();
    if len > MAX_INPUT_BYTES as u64 {
        return Err(ProbeError::TooLarge { size: len as usize });
    }
    let bytes = std::fs::read(path).map_err(io)?;
    probe_source(&bytes, ctor, format, &path.to_string_lossy())
}

fn extension(path: &str) -> Option<String> {
    Path::new(path)
        .extension()
        .map(|e| e.to_string_lossy().to_ascii_lowercase())
}

fn file_extension(name: &str) -> String {
    name.rsplit_once('.')
        .map(|(_, e)| e.to_ascii_lowercase())
        .unwrap_or_default()
}

/// Constructor and format for a file, from its extension and, for
/// `.json`, its top-level shape.
pub fn classify_file(name: &str, bytes: &[u8]) -> Result<(Ctor, &'static str), ProbeError> {
    match file_extension(name).as_str() {
        "vti" => Ok((Ctor::Img, "vti")),
        "csv" => Ok((Ctor::Tbl, "csv")),
        "geojson" => Ok((Ctor::Geo, "geojson")),
        "json" => {
            let v: serde_json::Value =
                serde_json::from_slice(bytes).map_err(|e| ProbeError::Json(e.to_string()))?;
            let ty = v.get("type").and_then(|t| t.as_str());
            if matches!(ty, Some("FeatureCollection" | "Feature")) {
                Ok((Ctor::Geo, "json"))
            } else if v.get("nodes").is_some()
                && (v.get("links").is_some() || v.get("edges").is_some())
            {
                Ok((Ctor::Net, "json"))
            } else {
                Ok((Ctor::Tbl, "json"))
            }
        }
        other => Err(ProbeError::Unsupported(format!("file type `.{other}`"))),
    }
}

/// Streaming min/max/mean/variance (Welford).
#[derive(Debug, Clone, Default)]
pub(crate) struct Accum {
    count: usize,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Accum {
    pub fn push(&mut self, x: f64) {
        if x.is_nan() {
            return;
        }
        if self.count == 0 {
            self.min = x;
            self.max = x;
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn range(&self) -> Option<[f64; 2]> {
        (self.count > 0).then_some([self.min, self.max])
    }

    pub fn stats(&self) -> Option<Stats> {
        (self.count > 0).then(|| Stats {
            count: self.count,
            mean: self.mean,
            std: if self.count > 1 {
                (self.m2 / (self.count - 1) as f64).sqrt()
            } else {
                0.0
            },
        })
    }
}

/// Decimal in the grammar's NUMBER class: `[+-]?d+(.d+)?([eE][+-]?d+)?`.
pub(crate) fn parse_decimal(s: &str) -> Option<f64> {
    let b = s.as_bytes();
    let mut i = 0;
    if matches!(b.first(), Some(b'+' | b'-')) {
        i += 1;
    }
    let digits = |i: &mut usize| {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        *i > start
    };
    if !digits(&mut i) {
        return None;
    }
    if i < b.len() && b[i] == b'.' {
        i += 1;
        if !digits(&mut i) {
            return None;
        }
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        if !digits(&mut i) {
            return None;
        }
    }
    if i != b.len() {
        return None;
    }
    s.parse().ok()
}

pub(crate) fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "True" | "TRUE" => Some(true),
        "false" | "False" | "FALSE" => Some(false),
        _ => None,
    }
}

/// ISO-8601 calendar date, optionally with a time and offset.
pub(crate) fn is_iso_date(s: &str) -> bool {
    use chrono::{DateTime, NaiveDate, NaiveDateTime};
    NaiveDate::parse_from_str(s, "%Y-%m-%d").is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S%.f").is_ok()
        || NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S%.f").is_ok()
        || DateTime::parse_from_rfc3339(s).is_ok()
}

/// Type inference over the non-null cells of one column.
#[derive(Debug, Clone)]
pub(crate) struct ColumnInfer {
    all_number: bool,
    all_bool: bool,
    all_date: bool,
    seen: usize,
    accum: Accum,
    categories: std::collections::BTreeSet<String>,
    overflow: bool,
}

/// One cell, already classified by the caller's format.
pub(crate) enum Cell<'a> {
    Null,
    Number(f64),
    Bool(bool),
    Text(&'a str),
    Other,
}

impl Default for ColumnInfer {
    fn default() -> Self {
        ColumnInfer {
            all_number: true,
            all_bool: true,
            all_date: true,
            seen: 0,
            accum: Accum::default(),
            categories: Default::default(),
            overflow: false,
        }
    }
}

impl ColumnInfer {
    /// CSV cell: classified from its text.
    pub fn push_text(&mut self, raw: &str) {
        let s = raw.trim();
        if s.is_empty() {
            return self.push(Cell::Null);
        }
        if let Some(n) = parse_decimal(s) {
            self.push_number(n);
            self.all_bool = false;
            self.all_date = false;
            self.note_category(s);
            return;
        }
        self.seen += 1;
        self.all_number = false;
        if parse_bool(s).is_none() {
            self.all_bool = false;
        }
        if !is_iso_date(s) {
            self.all_date = false;
        }
        self.note_category(s);
    }

    pub fn push(&mut self, cell: Cell) {
        match cell {
            Cell::Null => {}
            Cell::Number(n) => {
                self.push_number(n);
                self.all_bool = false;
                self.all_date = false;
                self.note_category(&crate::print::number(n));
            }
            Cell::Bool(b) => {
                self.seen += 1;
                self.all_number = false;
                self.all_date = false;
                self.note_category(if b { "true" } else { "false" });
            }
            Cell::Text(s) => {
                self.seen += 1;
                self.all_number = false;
                self.all_bool = false;
                if !is_iso_date(s) {
                    self.all_date = false;
                }
                self.note_category(s);
            }
            Cell::Other => {
                self.seen += 1;
                self.all_number = false;
                self.all_bool = false;
                self.all_date = false;
                self.overflow = true;
            }
        }
    }

    fn push_number(&mut self, n: f64) {
        self.seen += 1;
        self.accum.push(n);
    }

    fn note_category(&mut self, s: &str) {
        if self.overflow {
            return;
        }
        if !self.categories.contains(s) {
            if self.categories.len() == MAX_CATEGORIES {
                self.overflow = true;
                self.categories.clear();
                return;
            }
            self.categories.insert(s.to_string());
        }
    }

    pub fn finish(self, name: &str) -> VariableDesc {
        let data_type = if self.seen == 0 {
            DataType::String
        } else if self.all_number {
            DataType::Number
        } else if self.all_bool {
            DataType::Boolean
        } else if self.all_date {
            DataType::Date
        } else {
            DataType::String
        };
        let mut var = VariableDesc::new(name, data_type);
        match data_type {
            DataType::Number => {
                var.range = self.accum.range();
                var.stats = self.accum.stats();
            }
            DataType::String if !self.overflow && self.seen > 0 => {
                var.categories = Some(self.categories.into_iter().collect());
            }
            _ => {}
        }
        var
    }
}

/// Column accumulator keyed by first-seen field order, for JSON records.
#[derive(Debug, Default)]
pub(crate) struct Columns {
    order: Vec<String>,
    cols: std::collections::HashMap<String, ColumnInfer>,
}

impl Columns {
    pub fn push_record(&mut self, record: &serde_json::Map<String, serde_json::Value>) {
        for (k, v) in record {
            if !self.cols.contains_key(k) {
                self.order.push(k.clone());
                self.cols.insert(k.clone(), ColumnInfer::default());
            }
            let col = self.cols.get_mut(k).expect("inserted above");
            col.push(json_cell(v));
        }
    }

    pub fn finish(mut self, prefix: &str) -> Vec<VariableDesc> {
        self.order
            .iter()
            .map(|k| {
                let col = self.cols.remove(k).expect("every ordered key has a column");
                col.finish(&format!("{prefix}{k}"))
            })
            .collect()
    }
}

pub(crate) fn json_cell(v: &serde_json::Value) -> Cell<'_> {
    match v {
        serde_json::Value::Null => Cell::Null,
        serde_json::Value::Bool(b) => Cell::Bool(*b),
        serde_json::Value::Number(n) => Cell::Number(n.as_f64().unwrap_or(f64::NAN)),
        serde_json::Value::String(s) => Cell::Text(s),
        _ => Cell::Other,
    }
}

pub(crate) fn parse_json(bytes: &[u8]) -> Result<serde_json::Value, ProbeError> {
    check_size(bytes)?;
    serde_json::from_slice(bytes).map_err(|e| ProbeError::Json(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimal_follows_token_class() {
        assert_eq!(parse_decimal("12"), Some(12.0));
        assert_eq!(parse_decimal("-1.5e3"), Some(-1500.0));
        assert_eq!(parse_decimal("+2"), Some(2.0));
        for bad in ["", "1.", ".5", "1e", "inf", "NaN", "0x10", "1,0", "1 2"] {
            assert_eq!(parse_decimal(bad), None, "{bad}");
        }
    }

    #[test]
    fn accum_matches_two_pass() {
        let xs = [3.0, -1.0, 4.5, 10.0, 2.25];
        let mut a = Accum::default();
        xs.iter().for_each(|&x| a.push(x));
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let s = a.stats().unwrap();
        assert!((s.mean - mean).abs() < 1e-12);
        assert!((s.std - var.sqrt()).abs() < 1e-12);
        assert_eq!(a.range(), Some([-1.0, 10.0]));
    }

    #[test]
    fn network_fields_match_without_prefix() {
        let mut meta = DatasetMeta::new(DataKind::Network);
        meta.variables
            .push(VariableDesc::new("node.group", DataType::String));
        meta.variables
            .push(VariableDesc::numeric("link.value", 1.0, 2.0));
        assert_eq!(meta.variable("value").unwrap().name, "link.value");
        assert_eq!(meta.variable("node.group").unwrap().name, "node.group");
        assert!(meta.variable("missing").is_none());
    }

    #[test]
    fn dates_are_iso_only() {
        assert!(is_iso_date("2024-02-29"));
        assert!(is_iso_date("2024-02-29T10:00:00Z"));
        assert!(!is_iso_date("02/29/2024"));
        assert!(!is_iso_date("2023-02-29"));
    }
}
