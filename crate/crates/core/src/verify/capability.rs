//! Static mark capability table: backend class, accepted data kinds,
//! encode channels, style keys and layering compatibility.

use crate::probe::DataKind;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendClass {
    Chart,
    Spatial,
}

impl BackendClass {
    /// Wire tag used in the render IR.
    pub fn tag(self) -> &'static str {
        match self {
            BackendClass::Chart => "d3",
            BackendClass::Spatial => "vtkjs",
        }
    }
}

/// What field types a channel accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldClass {
    /// number or date
    Quantitative,
    /// single-component numeric image array
    Scalar,
    Any,
}

#[derive(Debug, Clone, Copy)]
pub struct Channel {
    pub name: &'static str,
    pub class: FieldClass,
    /// Accepts a list of fields.
    pub list: bool,
}

const fn ch(name: &'static str, class: FieldClass) -> Channel {
    Channel {
        name,
        class,
        list: false,
    }
}

const fn list(name: &'static str, class: FieldClass) -> Channel {
    Channel {
        name,
        class,
        list: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StyleType {
    /// Number within `[min, max]`; `integer` additionally requires a whole number.
    Number {
        min: f64,
        max: f64,
        integer: bool,
    },
    Color,
    Bool,
    Palette,
    /// One of a fixed set of strings.
    Choice(&'static [&'static str]),
    Axes,
    Quaternion,
    Bounds,
    ColorStops,
    OpacityStops,
}

const fn num(min: f64, max: f64) -> StyleType {
    StyleType::Number {
        min,
        max,
        integer: false,
    }
}

const fn int(min: f64, max: f64) -> StyleType {
    StyleType::Number {
        min,
        max,
        integer: true,
    }
}

const POS: StyleType = num(f64::MIN_POSITIVE, f64::MAX);
const NONNEG: StyleType = num(0.0, f64::MAX);
const UNIT: StyleType = num(0.0, 1.0);
const ANY_NUM: StyleType = num(f64::MIN, f64::MAX);

#[derive(Debug, Clone, Copy)]
pub struct StyleKey {
    pub name: &'static str,
    pub ty: StyleType,
}

const fn st(name: &'static str, ty: StyleType) -> StyleKey {
    StyleKey { name, ty }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrushRole {
    None,
    Follow,
    EmitFollow,
}

#[derive(Debug)]
pub struct MarkSpec {
    pub name: &'static str,
    pub backend: BackendClass,
    pub data: &'static [DataKind],
    pub required: &'static [Channel],
    pub optional: &'static [Channel],
    pub style: &'static [StyleKey],
    /// Marks this one may share a view with (before symmetric closure).
    pub layerable: &'static [&'static str],
    pub brush: BrushRole,
    /// Another mark this one is an alias of.
    pub alias_of: Option<&'static str>,
}

impl MarkSpec {
    pub fn channel(&self, name: &str) -> Option<&Channel> {
        self.required
            .iter()
            .chain(self.optional)
            .find(|c| c.name == name)
    }

    pub fn style_key(&self, name: &str) -> Option<&StyleKey> {
        self.style.iter().find(|s| s.name == name)
    }
}

use DataKind::{GeoJSON, ImageData, Network, Procedural, Table};
use FieldClass::{Any, Quantitative as Q, Scalar};

const VOLUMETRIC: &[DataKind] = &[ImageData, Procedural];
const SPATIAL_PEERS: &[&str] = &["volume", "isosurface", "slice", "streamline"];

pub const AXES: &[&str] = &["XY", "XZ", "YZ", "oblique"];
pub const SANKEY_ALIGN: &[&str] = &["left", "right", "center", "justify"];
pub const SANKEY_LINK_COLOR: &[&str] = &["static", "source", "target", "interpolate"];
pub const PROJECTIONS: &[&str] = &[
    "mercator",
    "equalEarth",
    "naturalEarth1",
    "equirectangular",
    "orthographic",
    "albersUsa",
];

macro_rules! mark {
    ($name:expr, $backend:expr, $data:expr, req: [$($r:expr),*], opt: [$($o:expr),*],
     style: [$($s:expr),*], layer: $layer:expr, brush: $brush:expr) => {
        MarkSpec {
            name: $name,
            backend: $backend,
            data: $data,
            required: &[$($r),*],
            optional: &[$($o),*],
            style: &[$($s),*],
            layerable: $layer,
            brush: $brush,
            alias_of: None,
        }
    };
}

const POINT_STYLE: &[StyleKey] = &[st("radius", NONNEG), st("fill_color", StyleType::Color)];

pub static MARKS: &[MarkSpec] = &[
    mark!("volume", BackendClass::Spatial, VOLUMETRIC, req: [], opt: [ch("field", Scalar)],
        style: [st("sample_distance", POS), st("palette", StyleType::Palette),
                st("ctf", StyleType::ColorStops), st("otf", StyleType::OpacityStops)],
        layer: SPATIAL_PEERS, brush: BrushRole::None),
    mark!("isosurface", BackendClass::Spatial, VOLUMETRIC, req: [], opt: [ch("field", Scalar)],
        style: [st("iso_value", ANY_NUM), st("color", StyleType::Color), st("opacity", UNIT)],
        layer: SPATIAL_PEERS, brush: BrushRole::None),
    mark!("slice", BackendClass::Spatial, VOLUMETRIC, req: [], opt: [ch("field", Scalar)],
        style: [st("axes", StyleType::Axes), st("palette", StyleType::Palette),
                st("ctf", StyleType::ColorStops), st("quaternion", StyleType::Quaternion),
                st("offset", ANY_NUM), st("is3DPlane", StyleType::Bool)],
        layer: SPATIAL_PEERS, brush: BrushRole::None),
    mark!("streamline", BackendClass::Spatial, VOLUMETRIC,
        req: [ch("vx", Scalar), ch("vy", Scalar), ch("vz", Scalar)], opt: [],
        style: [st("seed_bounds", StyleType::Bounds), st("seed_count", int(1.0, 1e6)),
                st("integration_step", POS), st("max_steps", int(1.0, 1e7)),
                st("color", StyleType::Color), st("tube_radius", NONNEG)],
        layer: SPATIAL_PEERS, brush: BrushRole::None),
    mark!("lic", BackendClass::Spatial, VOLUMETRIC, req: [ch("vx", Scalar), ch("vy", Scalar)], opt: [],
        style: [st("number_of_steps", int(1.0, 1e4)), st("step_size", POS),
                st("enhanced_lic", StyleType::Bool), st("lic_intensity", UNIT)],
        layer: &[], brush: BrushRole::None),
    mark!("points", BackendClass::Chart, &[Table], req: [ch("x", Q), ch("y", Q)],
        opt: [ch("color", Any), ch("size", Q)],
        style: [POINT_STYLE[0], POINT_STYLE[1]],
        layer: &["hexbin", "choropleth"], brush: BrushRole::EmitFollow),
    MarkSpec {
        name: "bubble",
        backend: BackendClass::Chart,
        data: &[Table],
        required: &[ch("x", Q), ch("y", Q), ch("size", Q)],
        optional: &[ch("color", Any)],
        style: POINT_STYLE,
        layerable: &["hexbin", "choropleth"],
        brush: BrushRole::EmitFollow,
        alias_of: Some("points"),
    },
    mark!("hexbin", BackendClass::Chart, &[Table], req: [ch("x", Q), ch("y", Q)], opt: [ch("color", Q)],
        style: [st("radius", POS), st("color_scheme", StyleType::Palette)],
        layer: &["points", "choropleth"], brush: BrushRole::None),
    mark!("heatmap", BackendClass::Chart, &[Table], req: [ch("x", Any), ch("y", Any)], opt: [ch("color", Q)],
        style: [st("color_scheme", StyleType::Palette)],
        layer: &[], brush: BrushRole::EmitFollow),
    mark!("histogram", BackendClass::Chart, &[Table], req: [ch("x", Q)], opt: [],
        style: [st("bins", int(1.0, 1000.0)), st("fill_color", StyleType::Color),
                st("stroke_color", StyleType::Color)],
        layer: &["kde", "histogram"], brush: BrushRole::Follow),
    mark!("kde", BackendClass::Chart, &[Table], req: [ch("x", Q)], opt: [],
        style: [st("bandwidth", POS), st("stroke_width", NONNEG), st("stroke_color", StyleType::Color)],
        layer: &["histogram"], brush: BrushRole::Follow),
    mark!("boxplot", BackendClass::Chart, &[Table], req: [ch("x", Any), ch("y", Q)], opt: [ch("color", Any)],
        style: [st("width", POS), st("fill_color", StyleType::Color), st("stroke_color", StyleType::Color),
                st("stroke_width", NONNEG)],
        layer: &[], brush: BrushRole::None),
    mark!("violin", BackendClass::Chart, &[Table], req: [ch("x", Any), ch("y", Q)], opt: [ch("color", Any)],
        style: [st("bandwidth", POS), st("fill_color", StyleType::Color), st("stroke_color", StyleType::Color),
                st("stroke_width", NONNEG), st("show_median", StyleType::Bool)],
        layer: &[], brush: BrushRole::None),
    mark!("ridgeline", BackendClass::Chart, &[Table], req: [ch("x", Q), ch("y", Any)], opt: [ch("color", Any)],
        style: [st("bandwidth", POS), st("fill_color", StyleType::Color), st("stroke_color", StyleType::Color),
                st("stroke_width", NONNEG), st("overlap", NONNEG), st("height", POS)],
        layer: &[], brush: BrushRole::None),
    mark!("line", BackendClass::Chart, &[Table], req: [ch("x", Any), list("y", Q)], opt: [ch("color", Any)],
        style: [st("stroke_width", NONNEG), st("stroke_color", StyleType::Color)],
        layer: &["line", "band"], brush: BrushRole::None),
    mark!("band", BackendClass::Chart, &[Table], req: [ch("x", Any), ch("y0", Q), ch("y1", Q)],
        opt: [ch("color", Any), ch("opacity", Q)],
        style: [st("fill_color", StyleType::Color), st("fill_opacity", UNIT),
                st("stroke_color", StyleType::Color), st("stroke_width", NONNEG)],
        layer: &["line"], brush: BrushRole::None),
    mark!("bar", BackendClass::Chart, &[Table], req: [ch("x", Any), ch("y", Q)], opt: [ch("color", Any)],
        style: [st("fill_color", StyleType::Color), st("stroke_color", StyleType::Color)],
        layer: &[], brush: BrushRole::None),
    mark!("pie", BackendClass::Chart, &[Table], req: [ch("label", Any), ch("value", Q)], opt: [ch("color", Any)],
        style: [st("inner_radius", NONNEG), st("outer_radius", POS)],
        layer: &[], brush: BrushRole::None),
    mark!("chord", BackendClass::Chart, &[Table, Network],
        req: [ch("source", Any), ch("target", Any), ch("value", Q)], opt: [ch("group", Any)],
        style: [st("pad_angle", NONNEG), st("inner_radius", NONNEG), st("outer_radius", POS)],
        layer: &[], brush: BrushRole::None),
    mark!("sankey", BackendClass::Chart, &[Table, Network],
        req: [ch("source", Any), ch("target", Any), ch("value", Q)], opt: [ch("node", Any)],
        style: [st("node_width", POS), st("node_padding", NONNEG), st("link_opacity", UNIT),
                st("align", StyleType::Choice(SANKEY_ALIGN)),
                st("link_color", StyleType::Choice(SANKEY_LINK_COLOR))],
        layer: &[], brush: BrushRole::None),
    mark!("force_graph", BackendClass::Chart, &[Network],
        req: [ch("source", Any), ch("target", Any)], opt: [ch("value", Q), ch("color", Any)],
        style: [st("node_radius", POS), st("link_distance", NONNEG), st("link_strength", UNIT),
                st("charge_strength", ANY_NUM), st("stroke_width", NONNEG), st("stroke_opacity", UNIT),
                st("fill_color", StyleType::Color), st("stroke_color", StyleType::Color),
                st("color_scheme", StyleType::Palette)],
        layer: &[], brush: BrushRole::None),
    mark!("choropleth", BackendClass::Chart, &[Table, GeoJSON],
        req: [ch("region", Any), ch("value", Q)], opt: [ch("color", Q)],
        style: [st("color_scheme", StyleType::Palette), st("stroke_color", StyleType::Color),
                st("stroke_width", NONNEG), st("projection", StyleType::Choice(PROJECTIONS))],
        layer: &["points", "hexbin"], brush: BrushRole::None),
    mark!("parallel_coordinates", BackendClass::Chart, &[Table], req: [list("dimensions", Q)],
        opt: [ch("color", Any)],
        style: [st("stroke_width", NONNEG), st("stroke_opacity", UNIT), st("color_scheme", StyleType::Palette)],
        layer: &[], brush: BrushRole::EmitFollow),
];

pub fn mark_spec(name: &str) -> Option<&'static MarkSpec> {
    MARKS.iter().find(|m| m.name == name)
}

/// Names of the distinct marks (aliases excluded), in table order.
pub fn mark_names() -> Vec<&'static str> {
    MARKS
        .iter()
        .filter(|m| m.alias_of.is_none())
        .map(|m| m.name)
        .collect()
}

/// The mark a name normalizes to (`bubble` becomes `points`).
pub fn canonical_mark(name: &str) -> Option<&'static MarkSpec> {
    let spec = mark_spec(name)?;
    match spec.alias_of {
        Some(target) => mark_spec(target),
        None => Some(spec),
    }
}

/// Whether two marks may share a view: same backend class, and for chart
/// marks the pair appears in either mark's layerable list. Spatial marks
/// all combine except `lic`, which combines with nothing.
pub fn can_layer(a: &str, b: &str) -> bool {
    let (Some(ma), Some(mb)) = (canonical_mark(a), canonical_mark(b)) else {
        return false;
    };
    if ma.backend != mb.backend {
        return false;
    }
    match ma.backend {
        BackendClass::Spatial => ma.name != "lic" && mb.name != "lic",
        BackendClass::Chart => ma.layerable.contains(&mb.name) || mb.layerable.contains(&ma.name),
    }
}
