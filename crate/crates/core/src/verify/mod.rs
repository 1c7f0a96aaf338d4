//! Verification: lowers a parsed program to a typed [`ProgramSpec`] or
//! reports every structural problem it finds as a [`Diagnostic`].

pub mod capability;

use crate::ast::{Ctor, DataDecl, LinkDecl, LinkKind, Program};
use crate::palette;
use crate::probe::{DataKind, DataType, DatasetMeta, VariableDesc};
use crate::value::{Object, Value};
use capability::{BackendClass, BrushRole, FieldClass, MarkSpec, StyleType};
use serde::Serialize;
use std::collections::{BTreeMap, HashSet};

pub use capability::{can_layer, canonical_mark, mark_names, mark_spec};

/// Metadata for each declared source, keyed by source name.
pub type Metas = BTreeMap<String, DatasetMeta>;

/// Largest number of views a program may declare.
pub const MAX_VIEWS: usize = 9;

/// Diagnostic codes.
pub mod codes {
    pub const NO_DATA: &str = "no-data";
    pub const VIEW_COUNT: &str = "view-count";
    pub const DUPLICATE_SOURCE: &str = "duplicate-source";
    pub const DUPLICATE_VIEW: &str = "duplicate-view";
    pub const DUPLICATE_SELECTION: &str = "duplicate-selection";
    pub const DUPLICATE_KEY: &str = "duplicate-key";
    pub const EMPTY_VIEW: &str = "empty-view";
    pub const UNKNOWN_DATA_ARG: &str = "unknown-data-arg";
    pub const INVALID_DATA_ARG: &str = "invalid-data-arg";
    pub const MISSING_FUNC_ARG: &str = "missing-func-arg";
    pub const MISSING_METADATA: &str = "missing-metadata";
    pub const METADATA_KIND_MISMATCH: &str = "metadata-kind-mismatch";
    pub const MISSING_SELECTION_NAME: &str = "missing-selection-name";
    pub const INVALID_SELECTION_ARG: &str = "invalid-selection-arg";
    pub const MISSING_FROM: &str = "missing-from";
    pub const MISSING_MARK: &str = "missing-mark";
    pub const UNKNOWN_SOURCE: &str = "unknown-source";
    pub const UNKNOWN_MARK: &str = "unknown-mark";
    pub const MARK_DATA_MISMATCH: &str = "mark-data-mismatch";
    pub const GEO_NOT_GEOJSON: &str = "geo-not-geojson";
    pub const MISSING_GEO: &str = "missing-geo";
    pub const UNEXPECTED_GEO: &str = "unexpected-geo";
    pub const MISSING_REQUIRED_CHANNEL: &str = "missing-required-channel";
    pub const UNKNOWN_CHANNEL: &str = "unknown-channel";
    pub const UNKNOWN_FIELD: &str = "unknown-field";
    pub const INCOMPATIBLE_FIELD_TYPE: &str = "incompatible-field-type";
    pub const INVALID_CHANNEL_VALUE: &str = "invalid-channel-value";
    pub const UNKNOWN_STYLE_KEY: &str = "unknown-style-key";
    pub const INVALID_STYLE_VALUE: &str = "invalid-style-value";
    pub const UNKNOWN_PALETTE: &str = "unknown-palette";
    pub const MIXED_BACKEND: &str = "mixed-backend";
    pub const NON_LAYERABLE: &str = "non-layerable";
    pub const MISSING_LINK_KIND: &str = "missing-link-kind";
    pub const MULTIPLE_KINDS: &str = "multiple-kinds";
    pub const INVALID_LINK_ARG: &str = "invalid-link-arg";
    pub const UNKNOWN_LINK_ARG: &str = "unknown-link-arg";
    pub const MISSING_LINK_VIEWS: &str = "missing-link-views";
    pub const SLICE_LINK_MISSING_AXES: &str = "slice-link-missing-axes";
    pub const AXES_WITHOUT_SLICE: &str = "axes-without-slice";
    pub const UNKNOWN_VIEW: &str = "unknown-view";
    pub const CROSS_BACKEND_LINK: &str = "cross-backend-link";
    pub const LINK_BACKEND_MISMATCH: &str = "link-backend-mismatch";
    pub const SLICE_LINK_WITHOUT_SLICE: &str = "slice-link-without-slice";
    pub const TF_LINK_WITHOUT_TF: &str = "tf-link-without-tf";
    pub const UNDECLARED_SELECTION: &str = "undeclared-selection";
    pub const UNKNOWN_EVENT: &str = "unknown-event";
    pub const UNKNOWN_BIND_ARG: &str = "unknown-bind-arg";
    pub const BRUSH_NOT_SUPPORTED: &str = "brush-not-supported";
    pub const SELECTION_TYPE_MISMATCH: &str = "selection-type-mismatch";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    #[serde(skip)]
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
    /// Dotted location such as `views.main.layers[0].encode.x`.
    pub path: String,
}

impl Diagnostic {
    pub fn error(code: &'static str, path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            path: path.into(),
        }
    }

    fn under(mut self, prefix: &str) -> Self {
        self.path = if self.path.is_empty() {
            prefix.to_string()
        } else {
            format!("{prefix}.{}", self.path)
        };
        self
    }
}

impl std::fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error[{}] {}: {}", self.code, self.path, self.message)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionType {
    Interval,
    Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecSource {
    pub name: String,
    pub ctor: Ctor,
    pub kind: DataKind,
    pub path: Option<String>,
    pub args: Object,
    pub meta: DatasetMeta,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecLayer {
    /// `viewId:mark#index`
    pub id: String,
    /// Canonical mark (`bubble` already rewritten to `points`).
    pub mark: &'static str,
    pub from: String,
    pub geo: Option<String>,
    pub encode: Object,
    pub style: Object,
    pub where_clause: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecLink {
    pub kind: LinkKind,
    /// The shared channel name (the link's payload).
    pub channel: String,
    /// Member views, declaration order, no repeats.
    pub views: Vec<String>,
    pub target: Option<String>,
    pub axes: Vec<String>,
    pub mode: Option<String>,
    /// View whose block declared the link.
    pub declared_in: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecView {
    pub id: String,
    pub backend: BackendClass,
    pub layers: Vec<SpecLayer>,
    pub links: Vec<SpecLink>,
    /// Selections this view publishes its brush to.
    pub brushes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpecSelection {
    pub name: String,
    pub kind: SelectionType,
    /// View whose interaction feeds the selection.
    pub bind_view: Option<String>,
    pub bind_channels: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProgramSpec {
    pub data: Vec<SpecSource>,
    pub views: Vec<SpecView>,
    pub selections: Vec<SpecSelection>,
}

impl ProgramSpec {
    pub fn source(&self, name: &str) -> Option<&SpecSource> {
        self.data.iter().find(|s| s.name == name)
    }

    /// All links, with structurally identical declarations kept once.
    pub fn unique_links(&self) -> Vec<&SpecLink> {
        let mut out: Vec<&SpecLink> = Vec::new();
        for link in self.views.iter().flat_map(|v| &v.links) {
            if !out.iter().any(|l| same_link(l, link)) {
                out.push(link);
            }
        }
        out
    }
}

fn same_link(a: &SpecLink, b: &SpecLink) -> bool {
    a.kind == b.kind
        && a.channel == b.channel
        && a.views == b.views
        && a.target == b.target
        && a.axes == b.axes
        && a.mode == b.mode
}

/// Checks a program against its source metadata.
pub fn verify(program: &Program, metas: &Metas) -> Result<ProgramSpec, Vec<Diagnostic>> {
    let mut diags = Vec::new();

    if program.data.is_empty() {
        diags.push(Diagnostic::error(
            codes::NO_DATA,
            "data",
            "program declares no data sources",
        ));
    }
    let n = program.views.len();
    if n == 0 || n > MAX_VIEWS {
        diags.push(Diagnostic::error(
            codes::VIEW_COUNT,
            "views",
            format!("program declares {n} views; between 1 and {MAX_VIEWS} are allowed"),
        ));
    }

    let data = check_data(program, metas, &mut diags);
    let selections = check_selections(program, &mut diags);

    let declared: HashSet<&str> = program.data.iter().map(|d| d.name.as_str()).collect();
    let mut views = Vec::new();
    let mut seen_views = HashSet::new();
    for view in &program.views {
        let vpath = format!("views.{}", view.id);
        if !seen_views.insert(view.id.as_str()) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_VIEW,
                &vpath,
                format!("view `{}` is declared more than once", view.id),
            ));
        }
        if view.layers.is_empty() {
            diags.push(Diagnostic::error(
                codes::EMPTY_VIEW,
                &vpath,
                format!("view `{}` has no layers", view.id),
            ));
        }
        let mut layers = Vec::new();
        for (index, layer) in view.layers.iter().enumerate() {
            let lpath = format!("{vpath}.layers[{index}]");
            if let Some(l) =
                check_layer(&view.id, index, layer, &data, &declared, &lpath, &mut diags)
            {
                layers.push(l);
            }
        }
        let backend = check_layering(&view.id, &layers, &vpath, &mut diags);
        views.push(SpecView {
            id: view.id.clone(),
            backend: backend.unwrap_or(BackendClass::Chart),
            layers,
            links: Vec::new(),
            brushes: Vec::new(),
        });
    }

    check_links_into(program, &mut views, &selections, &mut diags);

    if diags.is_empty() {
        Ok(ProgramSpec {
            data: {
                let mut data = data;
                program
                    .data
                    .iter()
                    .filter_map(|d| data.remove(&d.name))
                    .collect()
            },
            views,
            selections,
        })
    } else {
        Err(diags)
    }
}

fn check_data(
    program: &Program,
    metas: &Metas,
    diags: &mut Vec<Diagnostic>,
) -> BTreeMap<String, SpecSource> {
    let mut out = BTreeMap::new();
    for decl in &program.data {
        let path = format!("data.{}", decl.name);
        if out.contains_key(&decl.name) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_SOURCE,
                &path,
                format!("source `{}` is declared more than once", decl.name),
            ));
            continue;
        }
        let mut local = check_data_args(decl);
        let kind = DataKind::of(decl.ctor);
        let meta = if decl.ctor == Ctor::Func {
            match procedural_meta(decl) {
                Ok(m) => Some(m),
                Err(errs) => {
                    local.extend(errs);
                    None
                }
            }
        } else {
            match metas.get(&decl.name) {
                None => {
                    local.push(Diagnostic::error(
                        codes::MISSING_METADATA,
                        "",
                        format!("no metadata available for source `{}`", decl.name),
                    ));
                    None
                }
                Some(m) if m.kind != kind => {
                    local.push(Diagnostic::error(
                        codes::METADATA_KIND_MISMATCH,
                        "",
                        format!(
                            "source `{}` is declared with `{}` but its metadata describes {}",
                            decl.name,
                            decl.ctor,
                            m.kind.name()
                        ),
                    ));
                    None
                }
                Some(m) => Some(m.clone()),
            }
        };
        diags.extend(local.into_iter().map(|d| d.under(&path)));
        if let Some(meta) = meta {
            out.insert(
                decl.name.clone(),
                SpecSource {
                    name: decl.name.clone(),
                    ctor: decl.ctor,
                    kind,
                    path: decl.path.clone(),
                    args: decl.args.clone(),
                    meta,
                },
            );
        }
    }
    out
}

fn allowed_formats(ctor: Ctor) -> &'static [&'static str] {
    match ctor {
        Ctor::Img => &["vti"],
        Ctor::Tbl => &["csv", "json"],
        Ctor::Net => &["json"],
        Ctor::Geo => &["geojson", "json"],
        Ctor::Func => &[],
    }
}

fn check_data_args(decl: &DataDecl) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if let Some(key) = decl.args.duplicate_key() {
        diags.push(Diagnostic::error(
            codes::DUPLICATE_KEY,
            format!("args.{key}"),
            format!("argument `{key}` is given more than once"),
        ));
    }
    let allowed: &[&str] = match decl.ctor {
        Ctor::Img | Ctor::Tbl | Ctor::Net => &["format"],
        Ctor::Geo => &["format", "crs"],
        Ctor::Func => &["equations", "dims", "bounds", "range", "params"],
    };
    for (key, value) in decl.args.iter() {
        let path = format!("args.{key}");
        if !allowed.contains(&key.as_str()) {
            diags.push(Diagnostic::error(
                codes::UNKNOWN_DATA_ARG,
                path,
                format!("`{}` does not accept argument `{key}`", decl.ctor),
            ));
            continue;
        }
        match key.as_str() {
            "format" => {
                let formats = allowed_formats(decl.ctor);
                if !value.as_str().is_some_and(|f| formats.contains(&f)) {
                    diags.push(Diagnostic::error(
                        codes::INVALID_DATA_ARG,
                        path,
                        format!(
                            "`format` for `{}` must be one of {}",
                            decl.ctor,
                            formats.join(", ")
                        ),
                    ));
                }
            }
            "crs" if value.as_str().is_none() => {
                diags.push(Diagnostic::error(
                    codes::INVALID_DATA_ARG,
                    path,
                    "`crs` must be a string",
                ));
            }
            _ => {}
        }
    }
    diags
}

fn positive_int(v: &Value) -> Option<usize> {
    v.as_f64()
        .filter(|n| *n >= 1.0 && n.fract() == 0.0 && *n <= 1e6)
        .map(|n| n as usize)
}

fn numbers(v: &Value) -> Option<Vec<f64>> {
    v.as_array()?.iter().map(Value::as_f64).collect()
}

/// Metadata for a `func` source: one numeric variable per equation, all
/// sharing the declared value range.
pub fn procedural_meta(decl: &DataDecl) -> Result<DatasetMeta, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let missing = |key: &str| {
        Diagnostic::error(
            codes::MISSING_FUNC_ARG,
            "args",
            format!("`func` source `{}` needs `{key}`", decl.name),
        )
    };
    let invalid = |key: &str, what: &str| {
        Diagnostic::error(
            codes::INVALID_DATA_ARG,
            format!("args.{key}"),
            format!("`{key}` must be {what}"),
        )
    };

    let dims = match decl.args.get("dims") {
        None => {
            diags.push(missing("dims"));
            None
        }
        Some(v) => {
            let d: Option<Vec<usize>> = v
                .as_array()
                .and_then(|a| a.iter().map(positive_int).collect());
            match d {
                Some(d) if d.len() == 3 => Some([d[0], d[1], d[2]]),
                _ => {
                    diags.push(invalid("dims", "a list of three positive integers"));
                    None
                }
            }
        }
    };
    let range = match decl.args.get("range") {
        None => {
            diags.push(missing("range"));
            None
        }
        Some(v) => match numbers(v) {
            Some(r) if r.len() == 2 && r[0] <= r[1] => Some([r[0], r[1]]),
            _ => {
                diags.push(invalid("range", "[min, max] with min <= max"));
                None
            }
        },
    };
    let equations = match decl.args.get("equations") {
        None => {
            diags.push(missing("equations"));
            None
        }
        Some(Value::Object(o)) if !o.is_empty() && o.iter().all(|(_, v)| v.as_str().is_some()) => {
            Some(o)
        }
        Some(_) => {
            diags.push(invalid(
                "equations",
                "a non-empty object of expression strings",
            ));
            None
        }
    };
    if let Some(b) = decl.args.get("bounds") {
        if !numbers(b).is_some_and(|b| b.len() == 6) {
            diags.push(invalid("bounds", "a list of six numbers"));
        }
    }
    if let Some(p) = decl.args.get("params") {
        if p.as_object().is_none() {
            diags.push(invalid("params", "an object"));
        }
    }
    match (dims, range, equations) {
        (Some(dims), Some(range), Some(eqs)) if diags.is_empty() => {
            let mut meta = DatasetMeta::new(DataKind::Procedural);
            meta.dimensions = Some(dims);
            meta.variables = eqs
                .keys()
                .map(|name| VariableDesc {
                    components: Some(1),
                    ..VariableDesc::numeric(name.clone(), range[0], range[1])
                })
                .collect();
            Ok(meta)
        }
        _ => Err(diags),
    }
}

fn check_selections(program: &Program, diags: &mut Vec<Diagnostic>) -> Vec<SpecSelection> {
    let mut out: Vec<SpecSelection> = Vec::new();
    for (i, sel) in program.selections.iter().enumerate() {
        let path = format!("selections[{i}]");
        let Some(name) = sel.name() else {
            diags.push(Diagnostic::error(
                codes::MISSING_SELECTION_NAME,
                path,
                "`select` needs a string `name`",
            ));
            continue;
        };
        let mut kind = SelectionType::Interval;
        let mut bind_view = None;
        let mut bind_channels = Vec::new();
        for (key, value) in sel.args.iter() {
            match (key.as_str(), value.as_str()) {
                ("name", _) => {}
                ("bind_view", Some(v)) if program.view(v).is_some() => {
                    bind_view = Some(v.to_string())
                }
                ("bind_view", Some(v)) => diags.push(Diagnostic::error(
                    codes::UNKNOWN_VIEW,
                    format!("{path}.bind_view"),
                    format!("selection `{name}` binds unknown view `{v}`"),
                )),
                ("bind_channels", _) if value.as_str_list().is_some() => {
                    bind_channels = value
                        .as_str_list()
                        .unwrap_or_default()
                        .into_iter()
                        .map(String::from)
                        .collect();
                }
                ("bind_view" | "bind_channels", _) => diags.push(Diagnostic::error(
                    codes::INVALID_SELECTION_ARG,
                    format!("{path}.{key}"),
                    format!("`{key}` of selection `{name}` must be a view id or list of names"),
                )),
                ("type", Some("interval")) => kind = SelectionType::Interval,
                ("type", Some("point")) => kind = SelectionType::Point,
                ("type", _) => diags.push(Diagnostic::error(
                    codes::INVALID_SELECTION_ARG,
                    format!("{path}.type"),
                    format!("selection `{name}` type must be \"interval\" or \"point\""),
                )),
                _ => diags.push(Diagnostic::error(
                    codes::INVALID_SELECTION_ARG,
                    format!("{path}.{key}"),
                    format!("`select` does not accept argument `{key}`"),
                )),
            }
        }
        if out.iter().any(|s| s.name == name) {
            diags.push(Diagnostic::error(
                codes::DUPLICATE_SELECTION,
                path,
                format!("selection `{name}` is declared more than once"),
            ));
            continue;
        }
        out.push(SpecSelection {
            name: name.to_string(),
            kind,
            bind_view,
            bind_channels,
        });
    }
    out
}

/// Marks that may carry a `geo` reference.
const GEO_MARKS: &[&str] = &["choropleth", "points", "hexbin"];

fn check_layer(
    view_id: &str,
    index: usize,
    layer: &crate::ast::LayerDecl,
    data: &BTreeMap<String, SpecSource>,
    declared: &HashSet<&str>,
    path: &str,
    diags: &mut Vec<Diagnostic>,
) -> Option<SpecLayer> {
    let mut ok = true;
    let from = match &layer.from {
        None => {
            diags.push(Diagnostic::error(
                codes::MISSING_FROM,
                path,
                "layer has no `from` source",
            ));
            ok = false;
            None
        }
        Some(name) => match data.get(name) {
            Some(src) => Some(src),
            None => {
                // Declared but unusable sources were already reported.
                if !declared.contains(name.as_str()) {
                    diags.push(Diagnostic::error(
                        codes::UNKNOWN_SOURCE,
                        format!("{path}.from"),
                        format!("unknown source `{name}`"),
                    ));
                }
                ok = false;
                None
            }
        },
    };
    let spec = match &layer.mark {
        None => {
            diags.push(Diagnostic::error(
                codes::MISSING_MARK,
                path,
                "layer has no `mark`",
            ));
            return None;
        }
        Some(m) => match mark_spec(m) {
            Some(s) => s,
            None => {
                diags.push(Diagnostic::error(
                    codes::UNKNOWN_MARK,
                    format!("{path}.mark"),
                    format!("unknown mark `{m}`"),
                ));
                return None;
            }
        },
    };
    let canonical = canonical_mark(spec.name).unwrap_or(spec);

    let mut geo_src = None;
    if let Some(geo) = &layer.geo {
        if !GEO_MARKS.contains(&canonical.name) {
            diags.push(Diagnostic::error(
                codes::UNEXPECTED_GEO,
                format!("{path}.geo"),
                format!("mark `{}` does not take a `geo` source", spec.name),
            ));
            ok = false;
        } else {
            match data.get(geo) {
                None if declared.contains(geo.as_str()) => ok = false,
                None => {
                    diags.push(Diagnostic::error(
                        codes::UNKNOWN_SOURCE,
                        format!("{path}.geo"),
                        format!("unknown source `{geo}`"),
                    ));
                    ok = false;
                }
                Some(src) if src.kind != DataKind::GeoJSON => {
                    diags.push(Diagnostic::error(
                        codes::GEO_NOT_GEOJSON,
                        format!("{path}.geo"),
                        format!("`geo` source `{geo}` is {}, not GeoJSON", src.kind.name()),
                    ));
                    ok = false;
                }
                Some(src) => geo_src = Some(src),
            }
        }
    }

    let encode = layer.encode.clone().unwrap_or_default();
    let style = layer.style.clone().unwrap_or_default();
    if let Some(src) = from {
        let local = check_mark_encoding(spec.name, &encode, &src.meta);
        ok &= local.is_empty();
        diags.extend(local.into_iter().map(|d| d.under(path)));
        if spec.name == "choropleth"
            && src.kind == DataKind::Table
            && geo_src.is_none()
            && layer.geo.is_none()
        {
            diags.push(Diagnostic::error(
                codes::MISSING_GEO,
                path,
                format!("choropleth over table `{}` needs a `geo` source", src.name),
            ));
            ok = false;
        }
    }
    let local = check_style(spec.name, &style);
    ok &= local.is_empty();
    diags.extend(local.into_iter().map(|d| d.under(path)));

    let from = from?;
    ok.then(|| SpecLayer {
        id: format!("{view_id}:{}#{index}", canonical.name),
        mark: canonical.name,
        from: from.name.clone(),
        geo: layer.geo.clone(),
        encode,
        style,
        where_clause: layer.where_clause.clone(),
    })
}

pub(crate) fn type_accepted(class: FieldClass, var: &VariableDesc) -> bool {
    match class {
        FieldClass::Any => true,
        FieldClass::Quantitative => matches!(var.data_type, DataType::Number | DataType::Date),
        FieldClass::Scalar => var.data_type == DataType::Number && var.components.unwrap_or(1) == 1,
    }
}

fn class_phrase(class: FieldClass) -> &'static str {
    match class {
        FieldClass::Any => "any field",
        FieldClass::Quantitative => "a numeric or date field",
        FieldClass::Scalar => "a single-component numeric array",
    }
}

/// Checks one layer's encoding against the capability table and the
/// source metadata. Paths are relative to the layer.
pub fn check_mark_encoding(mark: &str, encode: &Object, meta: &DatasetMeta) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let Some(spec) = mark_spec(mark) else {
        return vec![Diagnostic::error(
            codes::UNKNOWN_MARK,
            "mark",
            format!("unknown mark `{mark}`"),
        )];
    };
    if !spec.data.contains(&meta.kind) {
        let kinds: Vec<_> = spec.data.iter().map(|k| k.name()).collect();
        diags.push(Diagnostic::error(
            codes::MARK_DATA_MISMATCH,
            "mark",
            format!(
                "mark `{mark}` cannot draw {} data; it accepts {}",
                meta.kind.name(),
                kinds.join(", ")
            ),
        ));
        return diags;
    }
    if let Some(key) = encode.duplicate_key() {
        diags.push(Diagnostic::error(
            codes::DUPLICATE_KEY,
            format!("encode.{key}"),
            format!("channel `{key}` is encoded more than once"),
        ));
    }
    for (name, value) in encode.iter() {
        let path = format!("encode.{name}");
        let Some(channel) = spec.channel(name) else {
            diags.push(Diagnostic::error(
                codes::UNKNOWN_CHANNEL,
                path,
                format!("mark `{mark}` has no channel `{name}`"),
            ));
            continue;
        };
        let fields: Vec<&str> = match value {
            Value::Str(s) => vec![s.as_str()],
            Value::Array(_) if channel.list => match value.as_str_list() {
                Some(list) if !list.is_empty() => list,
                _ => {
                    diags.push(Diagnostic::error(
                        codes::INVALID_CHANNEL_VALUE,
                        path,
                        format!("channel `{name}` expects a non-empty list of field names"),
                    ));
                    continue;
                }
            },
            _ => {
                diags.push(Diagnostic::error(
                    codes::INVALID_CHANNEL_VALUE,
                    path,
                    format!(
                        "channel `{name}` expects a field name, found {}",
                        value.type_name()
                    ),
                ));
                continue;
            }
        };
        for field in fields {
            match meta.variable(field) {
                None => diags.push(Diagnostic::error(
                    codes::UNKNOWN_FIELD,
                    &path,
                    format!("field `{field}` does not exist in the source"),
                )),
                Some(var) if !type_accepted(channel.class, var) => diags.push(Diagnostic::error(
                    codes::INCOMPATIBLE_FIELD_TYPE,
                    &path,
                    format!(
                        "channel `{name}` of mark `{mark}` needs {}, but `{field}` is {}",
                        class_phrase(channel.class),
                        describe(var)
                    ),
                )),
                Some(_) => {}
            }
        }
    }
    for channel in spec.required {
        if !encode.contains_key(channel.name) {
            diags.push(Diagnostic::error(
                codes::MISSING_REQUIRED_CHANNEL,
                "encode",
                format!("mark `{mark}` requires channel `{}`", channel.name),
            ));
        }
    }
    if spec.channel("field").is_some()
        && !encode.contains_key("field")
        && meta.first_scalar().is_none()
    {
        diags.push(Diagnostic::error(
            codes::MISSING_REQUIRED_CHANNEL,
            "encode",
            format!(
                "mark `{mark}` needs a `field` and the source has no numeric array to default to"
            ),
        ));
    }
    diags
}

fn describe(var: &VariableDesc) -> String {
    match var.components {
        Some(c) if c > 1 => format!("a {c}-component {} array", var.data_type.name()),
        _ => format!("of type {}", var.data_type.name()),
    }
}

fn number_ok(v: &Value, min: f64, max: f64, integer: bool) -> bool {
    v.as_f64()
        .is_some_and(|n| n.is_finite() && n >= min && n <= max && (!integer || n.fract() == 0.0))
}

fn stops_ok(v: &Value, keys: &[&str]) -> bool {
    let Some(items) = v.as_array() else {
        return false;
    };
    if items.is_empty() {
        return false;
    }
    let mut last = f64::NEG_INFINITY;
    for item in items {
        let Some(obj) = item.as_object() else {
            return false;
        };
        if obj.len() != keys.len() + 1 {
            return false;
        }
        for key in keys {
            if !obj.get(key).is_some_and(|c| number_ok(c, 0.0, 1.0, false)) {
                return false;
            }
        }
        match obj.get("s").and_then(Value::as_f64) {
            Some(s) if s.is_finite() && s >= last => last = s,
            _ => return false,
        }
    }
    true
}

fn axes_ok(v: &Value) -> bool {
    let list = match v {
        Value::Str(s) => vec![s.as_str()],
        _ => match v.as_str_list() {
            Some(l) if !l.is_empty() => l,
            _ => return false,
        },
    };
    let mut seen = HashSet::new();
    list.iter()
        .all(|a| capability::AXES.contains(a) && seen.insert(*a))
}

fn expectation(ty: StyleType) -> String {
    match ty {
        StyleType::Number { min, max, integer } => {
            let what = if integer { "an integer" } else { "a number" };
            match (min <= f64::MIN, max >= f64::MAX) {
                (true, true) => what.to_string(),
                (false, true) if min == 0.0 => format!("{what} >= 0"),
                (false, true) => format!("{what} > 0"),
                _ => format!("{what} in [{min}, {max}]"),
            }
        }
        StyleType::Color => "a color such as \"#1f77b4\"".into(),
        StyleType::Bool => "true or false".into(),
        StyleType::Palette => format!("one of {}", palette::palette_names().join(", ")),
        StyleType::Choice(options) => format!("one of {}", options.join(", ")),
        StyleType::Axes => "an axis or list of distinct axes from XY, XZ, YZ, oblique".into(),
        StyleType::Quaternion => "four numbers".into(),
        StyleType::Bounds => "six numbers [xmin, xmax, ymin, ymax, zmin, zmax]".into(),
        StyleType::ColorStops => "a list of {r, g, b, s} stops with nondecreasing s".into(),
        StyleType::OpacityStops => "a list of {a, s} stops with nondecreasing s".into(),
    }
}

/// Checks style keys and value types for a mark. Paths are relative to
/// the layer.
pub fn check_style(mark: &str, style: &Object) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let Some(spec) = mark_spec(mark) else {
        return diags;
    };
    if let Some(key) = style.duplicate_key() {
        diags.push(Diagnostic::error(
            codes::DUPLICATE_KEY,
            format!("style.{key}"),
            format!("style `{key}` is set more than once"),
        ));
    }
    for (key, value) in style.iter() {
        let path = format!("style.{key}");
        let Some(slot) = spec.style_key(key) else {
            diags.push(Diagnostic::error(
                codes::UNKNOWN_STYLE_KEY,
                path,
                format!("mark `{mark}` has no style `{key}`"),
            ));
            continue;
        };
        let ok = match slot.ty {
            StyleType::Number { min, max, integer } => number_ok(value, min, max, integer),
            StyleType::Color => value.as_str().is_some_and(palette::is_color),
            StyleType::Bool => value.as_bool().is_some(),
            StyleType::Palette => match value.as_str() {
                Some(name) if palette::is_palette(name) => true,
                Some(name) => {
                    diags.push(Diagnostic::error(
                        codes::UNKNOWN_PALETTE,
                        path,
                        format!("unknown palette `{name}`"),
                    ));
                    continue;
                }
                None => false,
            },
            StyleType::Choice(options) => value.as_str().is_some_and(|s| options.contains(&s)),
            StyleType::Axes => axes_ok(value),
            StyleType::Quaternion => {
                numbers(value).is_some_and(|q| q.len() == 4 && q.iter().all(|x| x.is_finite()))
            }
            StyleType::Bounds => numbers(value)
                .is_some_and(|b| b.len() == 6 && b[0] <= b[1] && b[2] <= b[3] && b[4] <= b[5]),
            StyleType::ColorStops => stops_ok(value, &["r", "g", "b"]),
            StyleType::OpacityStops => stops_ok(value, &["a"]),
        };
        if !ok {
            diags.push(Diagnostic::error(
                codes::INVALID_STYLE_VALUE,
                path,
                format!(
                    "style `{key}` of mark `{mark}` expects {}",
                    expectation(slot.ty)
                ),
            ));
        }
    }
    diags
}

/// Backend class of a view, or `None` when its layers disagree.
fn check_layering(
    view_id: &str,
    layers: &[SpecLayer],
    path: &str,
    diags: &mut Vec<Diagnostic>,
) -> Option<BackendClass> {
    let class_of = |l: &SpecLayer| mark_spec(l.mark).map(|m| m.backend);
    let first = layers.first().and_then(class_of);
    if let Some(other) = layers.iter().find(|l| class_of(l) != first) {
        diags.push(Diagnostic::error(
            codes::MIXED_BACKEND,
            path,
            format!(
                "view `{view_id}` mixes `{}` and `{}`, which render on different backends",
                layers[0].mark, other.mark
            ),
        ));
        return None;
    }
    for (i, a) in layers.iter().enumerate() {
        for b in &layers[i + 1..] {
            if !can_layer(a.mark, b.mark) {
                diags.push(Diagnostic::error(
                    codes::NON_LAYERABLE,
                    path,
                    format!(
                        "marks `{}` and `{}` cannot be layered in view `{view_id}`",
                        a.mark, b.mark
                    ),
                ));
            }
        }
    }
    first
}

/// Link, selection-reference and interaction checks.
pub fn check_links_and_selections(program: &Program, spec_views: &[SpecView]) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let selections = check_selections(program, &mut Vec::new());
    let mut views = spec_views.to_vec();
    check_links_into(program, &mut views, &selections, &mut diags);
    diags
}

const LINK_ARGS: &[&str] = &[
    "selection",
    "tf",
    "slice",
    "views",
    "target",
    "axes",
    "mode",
];
const LINK_MODES: &[&str] = &["filter", "highlight", "color"];

fn check_links_into(
    program: &Program,
    views: &mut [SpecView],
    selections: &[SpecSelection],
    diags: &mut Vec<Diagnostic>,
) {
    // Backend class per view id, None when unknown or mixed.
    let classes: BTreeMap<&str, Option<BackendClass>> = program
        .views
        .iter()
        .map(|v| {
            let mut classes = v
                .layers
                .iter()
                .filter_map(|l| l.mark.as_deref().and_then(mark_spec).map(|m| m.backend));
            let first = classes.next();
            let uniform = classes.all(|c| Some(c) == first);
            (v.id.as_str(), if uniform { first } else { None })
        })
        .collect();
    let has_mark = |view: &str, pred: &dyn Fn(&MarkSpec) -> bool| {
        program.view(view).is_some_and(|v| {
            v.layers
                .iter()
                .any(|l| l.mark.as_deref().and_then(mark_spec).is_some_and(pred))
        })
    };

    for (vi, view) in program.views.iter().enumerate() {
        for (li, link) in view.links.iter().enumerate() {
            let path = format!("views.{}.links[{li}]", view.id);
            let before = diags.len();
            let parsed = check_link(
                link, &view.id, &path, &classes, selections, &has_mark, diags,
            );
            if let Some(spec_link) = parsed.filter(|_| diags.len() == before) {
                if let Some(v) = views.get_mut(vi) {
                    v.links.push(spec_link);
                }
            }
        }
        for (ii, inter) in view.interactions.iter().enumerate() {
            let path = format!("views.{}.interactions[{ii}]", view.id);
            if inter.event != "brush" {
                diags.push(Diagnostic::error(
                    codes::UNKNOWN_EVENT,
                    &path,
                    format!(
                        "unknown event `{}`; only \"brush\" is supported",
                        inter.event
                    ),
                ));
                continue;
            }
            if !has_mark(&view.id, &|m| m.brush == BrushRole::EmitFollow) {
                diags.push(Diagnostic::error(
                    codes::BRUSH_NOT_SUPPORTED,
                    &path,
                    format!("view `{}` has no mark that can emit a brush", view.id),
                ));
            }
            for (bi, bind) in inter.binds.iter().enumerate() {
                let bpath = format!("{path}.binds[{bi}]");
                if let Some((key, _)) = bind.args.iter().next() {
                    diags.push(Diagnostic::error(
                        codes::UNKNOWN_BIND_ARG,
                        &bpath,
                        format!("`bind` does not accept argument `{key}`"),
                    ));
                }
                match selections.iter().find(|s| s.name == bind.selection) {
                    None => diags.push(Diagnostic::error(
                        codes::UNDECLARED_SELECTION,
                        &bpath,
                        format!("selection `{}` is not declared", bind.selection),
                    )),
                    Some(s) if s.kind != SelectionType::Interval => diags.push(Diagnostic::error(
                        codes::SELECTION_TYPE_MISMATCH,
                        &bpath,
                        format!(
                            "brush cannot publish to point selection `{}`",
                            bind.selection
                        ),
                    )),
                    Some(_) => {
                        if let Some(v) = views.get_mut(vi) {
                            if !v.brushes.contains(&bind.selection) {
                                v.brushes.push(bind.selection.clone());
                            }
                        }
                    }
                }
            }
        }
    }
}

/// Whether a view holds a layer whose mark satisfies the predicate.
type HasMark<'a> = dyn Fn(&str, &dyn Fn(&MarkSpec) -> bool) -> bool + 'a;

#[allow(clippy::too_many_arguments)]
fn check_link(
    link: &LinkDecl,
    declared_in: &str,
    path: &str,
    classes: &BTreeMap<&str, Option<BackendClass>>,
    selections: &[SpecSelection],
    has_mark: &HasMark,
    diags: &mut Vec<Diagnostic>,
) -> Option<SpecLink> {
    let err = |diags: &mut Vec<Diagnostic>, code, sub: &str, msg: String| {
        let p = if sub.is_empty() {
            path.to_string()
        } else {
            format!("{path}.{sub}")
        };
        diags.push(Diagnostic::error(code, p, msg));
    };
    if let Some(key) = link.args.duplicate_key() {
        err(
            diags,
            codes::DUPLICATE_KEY,
            key,
            format!("link argument `{key}` is given more than once"),
        );
    }
    for (key, _) in link.args.iter() {
        if !LINK_ARGS.contains(&key.as_str()) {
            err(
                diags,
                codes::UNKNOWN_LINK_ARG,
                key,
                format!("`link` does not accept argument `{key}`"),
            );
        }
    }
    let kinds = link.kinds();
    let kind = match kinds.as_slice() {
        [] => {
            err(
                diags,
                codes::MISSING_LINK_KIND,
                "",
                "link must name exactly one of `selection`, `tf`, `slice`".into(),
            );
            return None;
        }
        [k] => *k,
        many => {
            let names: Vec<_> = many.iter().map(|k| format!("`{}`", k.key())).collect();
            err(
                diags,
                codes::MULTIPLE_KINDS,
                "",
                format!(
                    "link names {}; exactly one kind is allowed",
                    names.join(" and ")
                ),
            );
            return None;
        }
    };
    let Some(channel) = link.payload().map(str::to_string) else {
        err(
            diags,
            codes::INVALID_LINK_ARG,
            kind.key(),
            format!("`{}` must be a string", kind.key()),
        );
        return None;
    };

    let views_arg = link.args.get("views");
    let mut views: Vec<String> = Vec::new();
    if let Some(v) = views_arg {
        match v.as_str_list() {
            Some(list) => {
                for id in list {
                    if !views.iter().any(|x| x == id) {
                        views.push(id.to_string());
                    }
                }
            }
            None => err(
                diags,
                codes::INVALID_LINK_ARG,
                "views",
                "`views` must be a list of view ids".into(),
            ),
        }
    }
    let target = match link.args.get("target") {
        None => None,
        Some(Value::Str(t)) => Some(t.clone()),
        Some(_) => {
            err(
                diags,
                codes::INVALID_LINK_ARG,
                "target",
                "`target` must be a view id".into(),
            );
            None
        }
    };
    let mode = match link.args.get("mode") {
        None => None,
        Some(Value::Str(m)) if LINK_MODES.contains(&m.as_str()) => Some(m.clone()),
        Some(_) => {
            err(
                diags,
                codes::INVALID_LINK_ARG,
                "mode",
                format!("`mode` must be one of {}", LINK_MODES.join(", ")),
            );
            None
        }
    };
    if kind != LinkKind::Selection {
        if target.is_some() {
            err(
                diags,
                codes::INVALID_LINK_ARG,
                "target",
                "`target` applies only to selection links".into(),
            );
        }
        if mode.is_some() {
            err(
                diags,
                codes::INVALID_LINK_ARG,
                "mode",
                "`mode` applies only to selection links".into(),
            );
        }
    }

    let mut axes = Vec::new();
    match (kind, link.args.get("axes")) {
        (LinkKind::Slice, None) => err(
            diags,
            codes::SLICE_LINK_MISSING_AXES,
            "",
            format!("slice link `{channel}` needs `axes`"),
        ),
        (LinkKind::Slice, Some(a)) => {
            if axes_ok(a) {
                axes = match a {
                    Value::Str(s) => vec![s.clone()],
                    _ => a
                        .as_str_list()
                        .unwrap_or_default()
                        .into_iter()
                        .map(String::from)
                        .collect(),
                };
            } else {
                err(
                    diags,
                    codes::INVALID_LINK_ARG,
                    "axes",
                    format!("`axes` must be {}", expectation(StyleType::Axes)),
                );
            }
        }
        (_, Some(_)) => err(
            diags,
            codes::AXES_WITHOUT_SLICE,
            "axes",
            format!(
                "`axes` is only valid on slice links, not on `{}` links",
                kind.key()
            ),
        ),
        (_, None) => {}
    }

    match kind {
        LinkKind::Selection if views_arg.is_none() && target.is_none() => err(
            diags,
            codes::MISSING_LINK_VIEWS,
            "",
            format!("selection link `{channel}` needs `views` or `target`"),
        ),
        LinkKind::Tf | LinkKind::Slice if views_arg.is_none() => err(
            diags,
            codes::MISSING_LINK_VIEWS,
            "",
            format!("{} link `{channel}` needs `views`", kind.key()),
        ),
        _ => {}
    }

    if kind == LinkKind::Selection && !selections.iter().any(|s| s.name == channel) {
        err(
            diags,
            codes::UNDECLARED_SELECTION,
            "selection",
            format!("selection `{channel}` is not declared"),
        );
    }

    // Members: the listed views, else the declaring view plus the target.
    let mut members: Vec<String> = views.clone();
    if views.is_empty() {
        members.push(declared_in.to_string());
    }
    if let Some(t) = &target {
        if !members.contains(t) {
            members.push(t.clone());
        }
    }
    let mut known = true;
    for id in &members {
        if !classes.contains_key(id.as_str()) {
            err(
                diags,
                codes::UNKNOWN_VIEW,
                "views",
                format!("link refers to unknown view `{id}`"),
            );
            known = false;
        }
    }
    if known {
        let member_classes: Vec<Option<BackendClass>> =
            members.iter().map(|m| classes[m.as_str()]).collect();
        let has_chart = member_classes.contains(&Some(BackendClass::Chart));
        let has_spatial = member_classes.contains(&Some(BackendClass::Spatial));
        let wanted = if kind == LinkKind::Selection {
            BackendClass::Chart
        } else {
            BackendClass::Spatial
        };
        if has_chart && has_spatial {
            err(
                diags,
                codes::CROSS_BACKEND_LINK,
                "",
                format!(
                    "link `{channel}` joins views on different backends: {}",
                    members.join(", ")
                ),
            );
        } else if (wanted == BackendClass::Chart && has_spatial)
            || (wanted == BackendClass::Spatial && has_chart)
        {
            err(
                diags,
                codes::LINK_BACKEND_MISMATCH,
                "",
                format!(
                    "{} links only connect {} views",
                    kind.key(),
                    if wanted == BackendClass::Chart {
                        "chart"
                    } else {
                        "spatial"
                    }
                ),
            );
        } else {
            for id in &members {
                match kind {
                    LinkKind::Slice if !has_mark(id, &|m| m.name == "slice") => err(
                        diags,
                        codes::SLICE_LINK_WITHOUT_SLICE,
                        "views",
                        format!("view `{id}` in slice link `{channel}` has no slice layer"),
                    ),
                    LinkKind::Tf if !has_mark(id, &|m| m.name == "volume" || m.name == "slice") => {
                        err(
                            diags,
                            codes::TF_LINK_WITHOUT_TF,
                            "views",
                            format!(
                                "view `{id}` in tf link `{channel}` has no volume or slice layer"
                            ),
                        )
                    }
                    _ => {}
                }
            }
        }
    }

    Some(SpecLink {
        kind,
        channel,
        views: members,
        target,
        axes,
        mode,
        declared_in: declared_in.to_string(),
    })
}
