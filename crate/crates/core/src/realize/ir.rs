//! Render IR: the fully resolved, backend-tagged program handed to the
//! browser runtime.

use crate::probe::DataKind;
use crate::value::{Object, Value};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// Bumped whenever the IR shape changes incompatibly.
pub const IR_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Backend {
    #[serde(rename = "d3")]
    Chart,
    #[serde(rename = "vtkjs")]
    Spatial,
    #[serde(rename = "multi")]
    Multi,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderIr {
    pub version: u32,
    pub backend: Backend,
    pub layout: Grid,
    pub data: Vec<DataRef>,
    pub views: Vec<RealizedView>,
    pub links: Vec<LinkBinding>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub columns: usize,
    pub rows: usize,
}

/// Grid for `n` views: `ceil(sqrt n)` columns, as many rows as needed.
/// `None` outside 1..=9.
pub fn layout_grid(n: usize) -> Option<Grid> {
    if !(1..=crate::verify::MAX_VIEWS).contains(&n) {
        return None;
    }
    let mut columns = 1;
    while columns * columns < n {
        columns += 1;
    }
    Some(Grid {
        columns,
        rows: n.div_ceil(columns),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataRef {
    pub name: String,
    pub kind: DataKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<String>,
    /// `func` arguments, evaluated by the runtime.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub procedural: Option<Object>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Camera {
    Trackball,
    Image2d,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RealizedView {
    pub view_id: String,
    pub backend: Backend,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub camera: Option<Camera>,
    pub layers: Vec<RealizedLayer>,
    pub controls: ViewControls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SliceMode {
    #[serde(rename = "2d")]
    Flat,
    #[serde(rename = "3d")]
    Spatial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryColor {
    pub value: String,
    pub color: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoRef {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizedLayer {
    #[serde(rename = "type")]
    pub mark: String,
    pub id: String,
    pub from: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub url: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geo: Option<GeoRef>,
    /// Encode with inferred channels filled in (spatial `field`).
    pub encode: Object,
    /// Every style slot of the mark; authored values verbatim.
    pub style: Object,
    /// Scalar range of the rendered field.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dimensions: Option<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<SliceMode>,
    /// Channel → numeric `[min, max]` or list of categories.
    #[serde(default, skip_serializing_if = "Object::is_empty")]
    pub domains: Object,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<CategoryColor>>,
    #[serde(default, rename = "where", skip_serializing_if = "Option::is_none")]
    pub where_clause: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slider {
    pub min: f64,
    pub max: f64,
    pub default: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ViewControls {
    /// Spatial views always get orbit/zoom/pan or pan/zoom/scroll.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub navigation: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub palette: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_distance: Option<Slider>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ctf_stops: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub otf_stops: Option<Value>,
    /// Controls per layer id, in layer order.
    pub layers: IndexMap<String, Vec<Control>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlKind {
    Slider,
    RangeSlider,
    Color,
    Dropdown,
    Toggle,
    Button,
    TfEditor,
    Categories,
    Gizmo,
    FieldPicker,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Control {
    pub name: String,
    pub kind: ControlKind,
    /// Style slot the control edits; its default equals that slot's value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub style_key: Option<String>,
    pub default: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub options: Option<Vec<String>>,
    /// Created by the runtime after data load rather than at compile time.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub deferred: bool,
    /// Changes apply only when the user confirms (expensive recomputation).
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub apply_on_confirm: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BindingKind {
    BrushFilter,
    PointHighlight,
    SharedColor,
    SharedTf,
    SliceIndex,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkBinding {
    pub kind: BindingKind,
    pub channel: String,
    pub views: Vec<String>,
    /// Participating layer ids.
    pub layers: Vec<String>,
    /// Views that publish into the channel.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub emitters: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub axes: Vec<String>,
    /// Generated without a declaration in the program.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub auto: bool,
}
