//! The session schema: a flat JSON object that accumulates what the user
//! asked for, node by node, before it is lowered to a program.

use crate::probe::{DataKind, DataType, DatasetMeta, VariableDesc};
use crate::value::{Object, Value};
use crate::verify::Metas;
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SessionSchema {
    #[serde(default)]
    pub task_summary: String,
    /// Keyed by the uploaded file name.
    #[serde(default)]
    pub data: IndexMap<String, SourceEntry>,
    #[serde(default)]
    pub views: Vec<ViewEntry>,
    #[serde(default)]
    pub selections: Vec<SelectionEntry>,
    #[serde(default)]
    pub linking: LinkingEntry,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub slice_linking: Vec<SliceLinkEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub tf_linking: Vec<TfLinkEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceEntry {
    /// Constructor name: tbl, img, net, geo or func.
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default)]
    pub path: String,
    #[serde(default)]
    pub args: Object,
    #[serde(default)]
    pub variables: Vec<SchemaVariable>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<[usize; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaVariable {
    pub name: String,
    pub data_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub semantic_type: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub role_hint: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub view_id: String,
    #[serde(default)]
    pub layers: Vec<LayerEntry>,
    /// Ids of views this one pushes its selection to.
    #[serde(default)]
    pub links_out: Vec<String>,
    /// Event name to the selection name(s) it publishes.
    #[serde(default)]
    pub interactions: Object,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LayerEntry {
    #[serde(default)]
    pub from: String,
    #[serde(default)]
    pub geo: String,
    #[serde(default)]
    pub mark: String,
    #[serde(default)]
    pub encode: Object,
    #[serde(default)]
    pub style: Object,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SelectionEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, rename = "type", skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bind_view: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bind_channels: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LinkingEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_data_source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linked_view_ids: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub link_style: Option<String>,
}

impl LinkingEntry {
    pub fn is_empty(&self) -> bool {
        self == &LinkingEntry::default()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceLinkEntry {
    #[serde(default)]
    pub linked_view_ids: Vec<String>,
    /// A single axis name or a list of them.
    pub axes: Value,
    pub slice_link_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tf_link_id: Option<String>,
}

impl SliceLinkEntry {
    pub fn axes_list(&self) -> Vec<String> {
        match &self.axes {
            Value::Str(s) => vec![s.clone()],
            other => other
                .as_str_list()
                .map(|l| l.into_iter().map(String::from).collect())
                .unwrap_or_default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfLinkEntry {
    #[serde(default)]
    pub linked_view_ids: Vec<String>,
    pub tf_link_id: String,
}

fn data_type(name: &str) -> DataType {
    match name {
        "number" => DataType::Number,
        "boolean" => DataType::Boolean,
        "date" => DataType::Date,
        _ => DataType::String,
    }
}

impl SourceEntry {
    pub fn from_meta(
        kind: &str,
        path: impl Into<String>,
        args: Object,
        meta: &DatasetMeta,
    ) -> Self {
        SourceEntry {
            kind: kind.to_string(),
            path: path.into(),
            args,
            variables: meta
                .variables
                .iter()
                .map(|v| SchemaVariable {
                    name: v.name.clone(),
                    data_type: v.data_type.name().to_string(),
                    semantic_type: None,
                    role_hint: None,
                })
                .collect(),
            dimensions: meta.dimensions,
        }
    }

    /// Metadata rebuilt from the schema alone: names, types and dimensions.
    pub fn meta(&self) -> Option<DatasetMeta> {
        let ctor = crate::ast::Ctor::from_name(&self.kind)?;
        let mut meta = DatasetMeta::new(DataKind::of(ctor));
        meta.dimensions = self.dimensions;
        meta.variables = self
            .variables
            .iter()
            .map(|v| VariableDesc::new(v.name.clone(), data_type(&v.data_type)))
            .collect();
        Some(meta)
    }
}

impl SessionSchema {
    /// Per-source metadata keyed by schema source name. Procedural
    /// sources are left out; the verifier derives them from arguments.
    pub fn metas(&self) -> Metas {
        self.data
            .iter()
            .filter(|(_, s)| s.kind != "func")
            .filter_map(|(name, s)| Some((name.clone(), s.meta()?)))
            .collect()
    }

    pub fn view(&self, id: &str) -> Option<&ViewEntry> {
        self.views.iter().find(|v| v.view_id == id)
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("schema serializes");
        out.push('\n');
        out
    }
}
