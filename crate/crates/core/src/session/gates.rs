//! Per-node completeness checks and the clarification text shown when a
//! node is not yet satisfied.

use super::lower::lower;
use super::schema::{LayerEntry, LinkingEntry, SessionSchema};
use crate::probe::{DataType, DatasetMeta};
use crate::value::Value;
use crate::verify::capability::{canonical_mark, mark_names, Channel, FieldClass};
use crate::verify::{codes, type_accepted, verify, Diagnostic, MAX_VIEWS};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeId {
    TaskDefinition,
    Data,
    ViewLayer,
    Mark,
    Encode,
    SelectionsLinking,
}

impl NodeId {
    pub const SEQUENCE: [NodeId; 6] = [
        NodeId::TaskDefinition,
        NodeId::Data,
        NodeId::ViewLayer,
        NodeId::Mark,
        NodeId::Encode,
        NodeId::SelectionsLinking,
    ];

    pub fn next(self) -> Option<NodeId> {
        let i = NodeId::SEQUENCE.iter().position(|n| *n == self)?;
        NodeId::SEQUENCE.get(i + 1).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeId::TaskDefinition => "task_definition",
            NodeId::Data => "data",
            NodeId::ViewLayer => "view_layer",
            NodeId::Mark => "mark",
            NodeId::Encode => "encode",
            NodeId::SelectionsLinking => "selections_linking",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeReport {
    pub node: NodeId,
    pub pass: bool,
    /// What is absent or invalid, as schema paths or short phrases.
    pub missing: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub clarification: Option<String>,
}

impl NodeReport {
    fn pass(node: NodeId) -> Self {
        NodeReport {
            node,
            pass: true,
            missing: Vec::new(),
            clarification: None,
        }
    }

    fn fail(node: NodeId, missing: Vec<String>, clarification: String) -> Self {
        NodeReport {
            node,
            pass: false,
            missing,
            clarification: Some(clarification),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompletionReport {
    pub nodes: Vec<NodeReport>,
}

impl CompletionReport {
    pub fn all_pass(&self) -> bool {
        self.nodes.iter().all(|n| n.pass)
    }

    pub fn node(&self, node: NodeId) -> &NodeReport {
        self.nodes
            .iter()
            .find(|n| n.node == node)
            .expect("every node is reported")
    }

    pub fn first_failure(&self) -> Option<&NodeReport> {
        self.nodes.iter().find(|n| !n.pass)
    }
}

pub fn validate_schema(schema: &SessionSchema) -> CompletionReport {
    CompletionReport {
        nodes: NodeId::SEQUENCE
            .iter()
            .map(|n| check_node(schema, *n))
            .collect(),
    }
}

pub fn check_node(schema: &SessionSchema, node: NodeId) -> NodeReport {
    match node {
        NodeId::TaskDefinition => check_task(schema),
        NodeId::Data => check_data(schema),
        NodeId::ViewLayer => check_views(schema),
        NodeId::Mark => check_marks(schema),
        NodeId::Encode => check_encode(schema),
        NodeId::SelectionsLinking => NodeReport::pass(node),
    }
}

pub const DESCRIBE_TASK: &str = "Please describe the visualization you want to create.";
pub const SPECIFY_DATASET: &str = "Please specify the dataset (file path or URL) you want to use.";
pub const SPECIFY_VIEW_DATASET: &str =
    "Please specify which dataset this view should use (or multiple views can share the same dataset).";

fn check_task(schema: &SessionSchema) -> NodeReport {
    if schema.task_summary.trim().is_empty() {
        NodeReport::fail(
            NodeId::TaskDefinition,
            vec!["task_summary".into()],
            DESCRIBE_TASK.into(),
        )
    } else {
        NodeReport::pass(NodeId::TaskDefinition)
    }
}

fn check_data(schema: &SessionSchema) -> NodeReport {
    let mut missing = Vec::new();
    if schema.data.is_empty() {
        missing.push("data".into());
    }
    for (name, source) in &schema.data {
        if crate::ast::Ctor::from_name(&source.kind).is_none() {
            missing.push(format!("data.{name}.type"));
        } else if source.kind != "func" && source.variables.is_empty() {
            missing.push(format!("data.{name}.variables"));
        }
    }
    if missing.is_empty() {
        NodeReport::pass(NodeId::Data)
    } else {
        NodeReport::fail(NodeId::Data, missing, SPECIFY_DATASET.into())
    }
}

pub fn multiple_datasets(names: &[&str]) -> String {
    format!(
        "You have multiple datasets: {}. Each view uses exactly one dataset; multiple views can share \
         the same dataset. Please specify which dataset each view uses.",
        names.join(", ")
    )
}

fn check_views(schema: &SessionSchema) -> NodeReport {
    let node = NodeId::ViewLayer;
    let names: Vec<&str> = schema.data.keys().map(String::as_str).collect();
    let source_prompt = || {
        if names.len() > 1 {
            multiple_datasets(&names)
        } else {
            SPECIFY_VIEW_DATASET.to_string()
        }
    };
    if schema.views.is_empty() || schema.views.iter().any(|v| v.layers.is_empty()) {
        let missing = if schema.views.is_empty() {
            vec!["views".to_string()]
        } else {
            schema
                .views
                .iter()
                .filter(|v| v.layers.is_empty())
                .map(|v| format!("views.{}.layers", v.view_id))
                .collect()
        };
        return NodeReport::fail(node, missing, source_prompt());
    }
    if schema.views.len() > MAX_VIEWS {
        return NodeReport::fail(
            node,
            vec!["views".into()],
            format!(
                "A visualization holds 1 to {MAX_VIEWS} views; {} were requested.",
                schema.views.len()
            ),
        );
    }
    let mut seen = BTreeSet::new();
    for view in &schema.views {
        if view.view_id.is_empty() || !seen.insert(view.view_id.as_str()) {
            return NodeReport::fail(
                node,
                vec![format!("views.{}.view_id", view.view_id)],
                format!(
                    "Each view needs its own name; '{}' is not unique.",
                    view.view_id
                ),
            );
        }
    }
    let mut missing = Vec::new();
    for view in &schema.views {
        for (i, layer) in view.layers.iter().enumerate() {
            if !schema.data.contains_key(&layer.from) {
                missing.push(format!("views.{}.layers[{i}].from", view.view_id));
            }
            if !layer.geo.is_empty() && !schema.data.contains_key(&layer.geo) {
                missing.push(format!("views.{}.layers[{i}].geo", view.view_id));
            }
        }
    }
    if missing.is_empty() {
        NodeReport::pass(node)
    } else {
        NodeReport::fail(node, missing, source_prompt())
    }
}

pub fn supported_types() -> String {
    mark_names().join(", ")
}

pub fn specify_mark() -> String {
    format!(
        "You must specify the type of visualization (chart type) you want. Supported types: {}. \
         For example: \"I want a histogram of b\", \"make a scatterplot of x and y\", \
         \"show a heatmap of a, b, and c\".",
        supported_types()
    )
}

fn check_marks(schema: &SessionSchema) -> NodeReport {
    let node = NodeId::Mark;
    let mut missing = Vec::new();
    let mut unsupported = Vec::new();
    for view in &schema.views {
        for (i, layer) in view.layers.iter().enumerate() {
            if layer.mark.is_empty() {
                missing.push(format!("views.{}.layers[{i}].mark", view.view_id));
            } else if canonical_mark(&layer.mark).is_none() {
                unsupported.push((view.view_id.clone(), i, layer.mark.clone()));
            }
        }
    }
    if !missing.is_empty() {
        return NodeReport::fail(node, missing, specify_mark());
    }
    if !unsupported.is_empty() {
        let explanation: Vec<String> = unsupported
            .iter()
            .map(|(v, _, m)| format!("'{m}' in view '{v}' is not a supported mark"))
            .collect();
        let paths = unsupported
            .iter()
            .map(|(v, i, _)| format!("views.{v}.layers[{i}].mark"))
            .collect();
        return NodeReport::fail(
            node,
            paths,
            format!(
                "{}. The mark type must be one of: {}.",
                capitalize(&explanation.join("; ")),
                supported_types()
            ),
        );
    }
    NodeReport::pass(node)
}

fn capitalize(s: &str) -> String {
    let mut c = s.chars();
    match c.next() {
        Some(f) => f.to_uppercase().chain(c).collect(),
        None => String::new(),
    }
}

/// The schema with every coordination construct removed, so that only
/// data, views and layers are checked.
fn layers_only(schema: &SessionSchema) -> SessionSchema {
    let mut s = schema.clone();
    s.selections.clear();
    s.linking = LinkingEntry::default();
    s.slice_linking.clear();
    s.tf_linking.clear();
    for v in &mut s.views {
        v.links_out.clear();
        v.interactions = Default::default();
    }
    s
}

/// Verifier diagnostics for the lowered schema.
pub fn lowered_diagnostics(schema: &SessionSchema) -> Vec<Diagnostic> {
    let lowered = lower(schema);
    match verify(&lowered.program, &lowered.metas(schema)) {
        Ok(_) => Vec::new(),
        Err(d) => d,
    }
}

fn view_of<'a>(schema: &'a SessionSchema, path: &str) -> Option<&'a str> {
    schema
        .views
        .iter()
        .map(|v| v.view_id.as_str())
        .filter(|id| path == format!("views.{id}") || path.starts_with(&format!("views.{id}.")))
        .max_by_key(|id| id.len())
}

fn marks_label(layers: &[LayerEntry]) -> String {
    layers
        .iter()
        .map(|l| l.mark.as_str())
        .collect::<Vec<_>>()
        .join(" + ")
}

/// One line per view: `View 'id' (marks): message; message`.
fn per_view(schema: &SessionSchema, diags: &[&Diagnostic]) -> String {
    let mut lines = Vec::new();
    for view in &schema.views {
        let msgs: Vec<&str> = diags
            .iter()
            .filter(|d| view_of(schema, &d.path) == Some(view.view_id.as_str()))
            .map(|d| d.message.as_str())
            .collect();
        if !msgs.is_empty() {
            lines.push(format!(
                "View '{}' ({}): {}",
                view.view_id,
                marks_label(&view.layers),
                msgs.join("; ")
            ));
        }
    }
    let general: Vec<&str> = diags
        .iter()
        .filter(|d| view_of(schema, &d.path).is_none())
        .map(|d| d.message.as_str())
        .collect();
    if !general.is_empty() {
        lines.push(general.join("; "));
    }
    lines.join("\n")
}

const FIELD_CODES: &[&str] = &[
    codes::UNKNOWN_FIELD,
    codes::INCOMPATIBLE_FIELD_TYPE,
    codes::UNKNOWN_CHANNEL,
    codes::INVALID_CHANNEL_VALUE,
    codes::DUPLICATE_KEY,
    codes::UNKNOWN_STYLE_KEY,
    codes::INVALID_STYLE_VALUE,
    codes::UNKNOWN_PALETTE,
];

/// How a channel is described to the user.
fn channel_phrase(channel: &Channel) -> &'static str {
    match channel.class {
        FieldClass::Quantitative | FieldClass::Scalar => "numerical",
        FieldClass::Any if matches!(channel.name, "color" | "group" | "label" | "region") => {
            "categorical"
        }
        FieldClass::Any => "numerical or categorical",
    }
}

fn fields_of(value: &Value) -> Vec<&str> {
    match value {
        Value::Str(s) => vec![s.as_str()],
        other => other.as_str_list().unwrap_or_default(),
    }
}

/// `all numerical variables` when a list covers every numeric variable of
/// the source, otherwise the field names.
fn assigned_phrase(value: &Value, meta: Option<&DatasetMeta>) -> String {
    let fields = fields_of(value);
    if let (Value::Array(_), Some(meta)) = (value, meta) {
        let numeric: BTreeSet<&str> = meta
            .variables
            .iter()
            .filter(|v| v.data_type == DataType::Number)
            .map(|v| v.name.as_str())
            .collect();
        let given: BTreeSet<&str> = fields.iter().copied().collect();
        if numeric.len() > 1 && given == numeric {
            return "all numerical variables".into();
        }
    }
    fields.join(", ")
}

fn missing_block(schema: &SessionSchema, view: &str, layer: &LayerEntry) -> Option<String> {
    let spec = canonical_mark(&layer.mark)?;
    let needed: Vec<&Channel> = spec
        .required
        .iter()
        .filter(|c| !layer.encode.contains_key(c.name))
        .collect();
    let first = needed.first()?;
    let meta = schema.data.get(&layer.from).and_then(|s| s.meta());
    let mut text = format!("View '{view}' ({}):", layer.mark);
    let specified: Vec<String> = layer
        .encode
        .iter()
        .map(|(k, v)| format!("{k} ({})", assigned_phrase(v, meta.as_ref())))
        .collect();
    if !specified.is_empty() {
        text.push_str(&format!(" Already specified: {}.", specified.join(", ")));
    }
    let still: Vec<String> = needed
        .iter()
        .map(|c| format!("{} ({})", c.name, channel_phrase(c)))
        .collect();
    text.push_str(&format!(" Still needed: {}.", still.join(", ")));
    let optional: Vec<String> = spec
        .optional
        .iter()
        .filter(|c| !layer.encode.contains_key(c.name))
        .map(|c| format!("{} ({})", c.name, channel_phrase(c)))
        .collect();
    if !optional.is_empty() {
        text.push_str(&format!(" Optionally: {}.", optional.join(", ")));
    }
    let used: BTreeSet<&str> = layer
        .encode
        .iter()
        .flat_map(|(_, v)| fields_of(v))
        .collect();
    let example = meta
        .as_ref()
        .and_then(|m| {
            m.variables
                .iter()
                .find(|v| !used.contains(v.name.as_str()) && type_accepted(first.class, v))
                .or_else(|| m.variables.first())
        })
        .map(|v| v.name.clone())
        .unwrap_or_else(|| first.name.to_string());
    let ch = first.name;
    text.push_str(&format!(
        " Please specify the {ch} variable (e.g. 'along {example}', 'plot them along {ch}', or '{ch} is {example}')."
    ));
    if let Some(meta) = &meta {
        let names: Vec<&str> = meta.variables.iter().map(|v| v.name.as_str()).collect();
        text.push_str(&format!("\nAvailable variables: {}", names.join(", ")));
    }
    if spec.name == "choropleth" && layer.geo.is_empty() {
        text.push_str(
            "\nA choropleth also needs region boundaries: upload a GeoJSON file whose feature \
             properties match the region values and name it in the layer's geo.",
        );
    }
    Some(text)
}

fn check_encode(schema: &SessionSchema) -> NodeReport {
    let node = NodeId::Encode;
    let diags = lowered_diagnostics(&layers_only(schema));
    if diags.is_empty() {
        return NodeReport::pass(node);
    }
    let missing: Vec<String> = diags.iter().map(|d| d.path.clone()).collect();
    let (channel_gaps, rest): (Vec<&Diagnostic>, Vec<&Diagnostic>) = diags
        .iter()
        .partition(|d| d.code == codes::MISSING_REQUIRED_CHANNEL);
    let (field_errors, combination): (Vec<&Diagnostic>, Vec<&Diagnostic>) = rest
        .into_iter()
        .partition(|d| FIELD_CODES.contains(&d.code));
    if !combination.is_empty() {
        return NodeReport::fail(
            node,
            missing,
            format!(
                "This combination isn't allowed:\n{}",
                per_view(schema, &combination)
            ),
        );
    }
    if !field_errors.is_empty() {
        return NodeReport::fail(
            node,
            missing,
            format!(
                "The variable encoding underspecified check is not satisfied.\n{}",
                per_view(schema, &field_errors)
            ),
        );
    }
    let blocks: Vec<String> = schema
        .views
        .iter()
        .flat_map(|v| {
            v.layers
                .iter()
                .filter_map(|l| missing_block(schema, &v.view_id, l))
        })
        .collect();
    let body = if blocks.is_empty() {
        per_view(schema, &channel_gaps)
    } else {
        blocks.join("\n")
    };
    NodeReport::fail(
        node,
        missing,
        format!("I need a few more details to complete.\n{body}"),
    )
}
