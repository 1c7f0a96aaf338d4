//! Realization: backend routing, default resolution, control generation
//! and link compilation. Input is a verified [`ProgramSpec`]; output is a
//! [`RenderIr`] with no unresolved style slots.

mod controls;
pub mod ir;
mod links;

pub use controls::build_controls;
pub use ir::*;
pub use links::compile_links;

use crate::palette::{self, CATEGORY10};
use crate::probe::{DataType, DatasetMeta, VariableDesc};
use crate::value::{Object, Value};
use crate::verify::capability::{mark_spec, BackendClass};
use crate::verify::{ProgramSpec, SpecLayer, SpecSource, SpecView};

/// Default volume ray step.
pub const SAMPLE_DISTANCE: f64 = 0.7;
/// Relative positions and alphas of the default opacity ramp.
pub const OTF_POSITIONS: [f64; 3] = [0.0, 0.35, 1.0];
pub const OTF_ALPHAS: [f64; 3] = [0.0, 0.3, 0.9];
pub const DEFAULT_PALETTE: &str = "viridis";
pub const DEFAULT_FILL: &str = "#1f77b4";
pub const ISOSURFACE_COLOR: &str = "#d3d3d3";

#[derive(Debug, Clone, Default)]
pub struct RealizeOptions {
    /// Prefix joined to relative data paths to form runtime URLs.
    pub data_base: String,
}

/// Rounds a derived quantity to four decimals.
pub fn round4(x: f64) -> f64 {
    let r = (x * 1e4).round() / 1e4;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

pub fn route_backend(view: &SpecView) -> BackendClass {
    let spatial = view
        .layers
        .iter()
        .all(|l| mark_spec(l.mark).is_some_and(|m| m.backend == BackendClass::Spatial));
    if spatial && !view.layers.is_empty() {
        BackendClass::Spatial
    } else {
        BackendClass::Chart
    }
}

fn backend_of(class: BackendClass) -> Backend {
    match class {
        BackendClass::Chart => Backend::Chart,
        BackendClass::Spatial => Backend::Spatial,
    }
}

/// Joins a data path onto the base; absolute paths and URLs pass through.
pub fn resolve_url(path: &str, options: &RealizeOptions) -> String {
    if options.data_base.is_empty() || path.starts_with('/') || path.contains("://") {
        return path.to_string();
    }
    format!("{}/{}", options.data_base.trim_end_matches('/'), path)
}

fn source_format(src: &SpecSource) -> Option<String> {
    if let Some(f) = src.args.get("format").and_then(Value::as_str) {
        return Some(f.to_string());
    }
    let path = src.path.as_deref()?;
    let ext = path.rsplit_once('.')?.1.to_ascii_lowercase();
    Some(ext)
}

pub fn realize(spec: &ProgramSpec, options: &RealizeOptions) -> RenderIr {
    let data = spec
        .data
        .iter()
        .map(|src| DataRef {
            name: src.name.clone(),
            kind: src.kind,
            url: src.path.as_deref().map(|p| resolve_url(p, options)),
            format: source_format(src),
            procedural: (src.ctor == crate::ast::Ctor::Func).then(|| src.args.clone()),
        })
        .collect();

    let views: Vec<RealizedView> = spec
        .views
        .iter()
        .map(|v| realize_view(v, spec, options))
        .collect();
    let first = views.first().map(|v| v.backend).unwrap_or(Backend::Chart);
    let backend = if views.iter().all(|v| v.backend == first) {
        first
    } else {
        Backend::Multi
    };
    let links = compile_links(spec, &views);
    RenderIr {
        version: IR_VERSION,
        backend,
        layout: layout_grid(views.len()).unwrap_or(Grid {
            columns: 1,
            rows: 1,
        }),
        data,
        views,
        links,
    }
}

fn realize_view(view: &SpecView, spec: &ProgramSpec, options: &RealizeOptions) -> RealizedView {
    let class = route_backend(view);
    let layers: Vec<RealizedLayer> = view
        .layers
        .iter()
        .map(|layer| {
            let src = spec
                .source(&layer.from)
                .expect("verified layers reference declared sources");
            let mut realized = match class {
                BackendClass::Spatial => {
                    resolve_spatial_defaults(layer, &src.meta, view.layers.len())
                }
                BackendClass::Chart => resolve_chart_defaults(layer, &src.meta),
            };
            realized.url = src.path.as_deref().map(|p| resolve_url(p, options));
            realized.geo = layer.geo.as_ref().map(|g| GeoRef {
                source: g.clone(),
                url: spec
                    .source(g)
                    .and_then(|s| s.path.as_deref())
                    .map(|p| resolve_url(p, options)),
            });
            realized
        })
        .collect();
    let camera = match class {
        BackendClass::Chart => None,
        BackendClass::Spatial => {
            let flat = layers.iter().any(|l| l.mark == "lic")
                || (layers.len() == 1 && layers[0].mode == Some(SliceMode::Flat));
            Some(if flat {
                Camera::Image2d
            } else {
                Camera::Trackball
            })
        }
    };
    let mut realized = RealizedView {
        view_id: view.id.clone(),
        backend: backend_of(class),
        camera,
        layers,
        controls: ViewControls::default(),
    };
    realized.controls = build_controls(&realized);
    realized
}

fn base_layer(layer: &SpecLayer, encode: Object, style: Object) -> RealizedLayer {
    RealizedLayer {
        mark: layer.mark.to_string(),
        id: layer.id.clone(),
        from: layer.from.clone(),
        url: None,
        geo: None,
        encode,
        style,
        range: None,
        dimensions: None,
        mode: None,
        domains: Object::new(),
        categories: None,
        where_clause: layer.where_clause.clone(),
    }
}

/// Authored keys first (author order, values verbatim), then every other
/// slot of the mark in table order.
fn merge_style(mark: &str, authored: &Object, mut default_of: impl FnMut(&str) -> Value) -> Object {
    let mut out = authored.clone();
    if let Some(spec) = mark_spec(mark) {
        for slot in spec.style {
            if !out.contains_key(slot.name) {
                out.push(slot.name, default_of(slot.name));
            }
        }
    }
    out
}

fn num(n: f64) -> Value {
    Value::Number(n)
}

fn color_stops(anchors: &palette::Anchors, range: [f64; 2]) -> Value {
    let [lo, hi] = range;
    let stops = anchors
        .iter()
        .enumerate()
        .map(|(i, rgb)| {
            let s = match i {
                0 => lo,
                7 => hi,
                _ => round4(lo + (hi - lo) * i as f64 / 7.0),
            };
            let mut o = Object::new();
            o.push("r", num(round4(rgb[0])));
            o.push("g", num(round4(rgb[1])));
            o.push("b", num(round4(rgb[2])));
            o.push("s", num(s));
            Value::Object(o)
        })
        .collect();
    Value::Array(stops)
}

fn opacity_stops(range: [f64; 2]) -> Value {
    let [lo, hi] = range;
    let stops = OTF_POSITIONS
        .iter()
        .zip(OTF_ALPHAS)
        .enumerate()
        .map(|(i, (t, a))| {
            let s = match i {
                0 => lo,
                2 => hi,
                _ => round4(lo + (hi - lo) * t),
            };
            let mut o = Object::new();
            o.push("a", num(a));
            o.push("s", num(s));
            Value::Object(o)
        })
        .collect();
    Value::Array(stops)
}

fn field_range(var: Option<&VariableDesc>) -> [f64; 2] {
    var.and_then(|v| v.range).unwrap_or([0.0, 1.0])
}

/// Volume, isosurface, slice, streamline and lic defaults. `siblings` is
/// the number of layers in the view, which decides slice rendering mode.
pub fn resolve_spatial_defaults(
    layer: &SpecLayer,
    meta: &DatasetMeta,
    siblings: usize,
) -> RealizedLayer {
    let mut encode = layer.encode.clone();
    let takes_field = mark_spec(layer.mark).is_some_and(|m| m.channel("field").is_some());
    if takes_field && !encode.contains_key("field") {
        if let Some(first) = meta.first_scalar() {
            encode.push("field", Value::str(first.name.clone()));
        }
    }
    let field = encode
        .get("field")
        .and_then(Value::as_str)
        .and_then(|f| meta.variable(f));
    let range = field_range(field);
    let authored = &layer.style;
    let palette_name = authored
        .get("palette")
        .and_then(Value::as_str)
        .unwrap_or(DEFAULT_PALETTE)
        .to_string();
    let anchors = palette::anchors(&palette_name).unwrap_or(&palette::VIRIDIS);

    let axes: Vec<String> = match authored.get("axes") {
        Some(Value::Str(a)) => vec![a.clone()],
        Some(v) => v
            .as_str_list()
            .unwrap_or_default()
            .into_iter()
            .map(String::from)
            .collect(),
        None => vec!["XY".to_string()],
    };
    let mode = (layer.mark == "slice").then(|| {
        let single = siblings == 1 && axes.len() == 1;
        let forced_3d = authored.get("is3DPlane").and_then(Value::as_bool) == Some(true);
        if single && (axes[0] != "oblique" || !forced_3d) {
            SliceMode::Flat
        } else {
            SliceMode::Spatial
        }
    });

    let style = merge_style(layer.mark, authored, |key| match key {
        "sample_distance" => num(SAMPLE_DISTANCE),
        "palette" => Value::str(palette_name.clone()),
        "ctf" => color_stops(anchors, range),
        "otf" => opacity_stops(range),
        "iso_value" => num(round4(range[0] + (range[1] - range[0]) / 3.0)),
        "color" if layer.mark == "isosurface" => Value::str(ISOSURFACE_COLOR),
        "color" => Value::str("#ffffff"),
        "opacity" => num(1.0),
        "axes" => Value::str_array(axes.iter().cloned()),
        "quaternion" => Value::Array(vec![num(0.0), num(0.0), num(0.0), num(1.0)]),
        "offset" => num(0.0),
        "is3DPlane" => Value::Bool(mode == Some(SliceMode::Spatial)),
        "seed_bounds" => Value::Null,
        "seed_count" => num(100.0),
        "integration_step" => num(0.5),
        "max_steps" => num(1000.0),
        "tube_radius" => num(0.0),
        "number_of_steps" => num(50.0),
        "step_size" => num(1.0),
        "enhanced_lic" => Value::Bool(true),
        "lic_intensity" => num(0.8),
        _ => Value::Null,
    });

    let mut out = base_layer(layer, encode, style);
    out.range = field.map(|_| range);
    out.dimensions = meta.dimensions;
    out.mode = mode;
    out
}

/// Normal-reference KDE bandwidth, `1.06 σ n^(-1/5)`, falling back to a
/// thirtieth of the range when the spread is unknown or zero.
pub fn kde_bandwidth(var: Option<&VariableDesc>) -> f64 {
    if let Some(stats) = var.and_then(|v| v.stats) {
        if stats.count >= 2 && stats.std > 0.0 {
            return round4(1.06 * stats.std * (stats.count as f64).powf(-0.2));
        }
    }
    match var.and_then(|v| v.range) {
        Some([lo, hi]) if hi > lo => round4((hi - lo) / 30.0),
        _ => 1.0,
    }
}

/// The field whose categories drive discrete colors for a layer.
fn category_field<'a>(mark: &str, encode: &'a Object) -> Option<&'a str> {
    let get = |k: &str| encode.get(k).and_then(Value::as_str);
    get("color").or_else(|| match mark {
        "pie" => get("label"),
        "chord" => get("group").or_else(|| get("source")),
        _ => None,
    })
}

/// Categorical palette colors in lexicographic category order.
pub fn assign_categories(var: &VariableDesc) -> Option<Vec<CategoryColor>> {
    if var.data_type == DataType::Number || var.data_type == DataType::Date {
        return None;
    }
    let mut cats = var.categories.clone()?;
    cats.sort();
    cats.dedup();
    Some(
        cats.into_iter()
            .enumerate()
            .map(|(i, value)| CategoryColor {
                value,
                color: CATEGORY10[i % CATEGORY10.len()].to_string(),
            })
            .collect(),
    )
}

fn domain_of(var: &VariableDesc) -> Option<Value> {
    if let Some([lo, hi]) = var.range {
        return Some(Value::Array(vec![num(lo), num(hi)]));
    }
    var.categories
        .as_ref()
        .map(|c| Value::str_array(c.iter().cloned()))
}

/// Chart-mark defaults, scale domains and categorical colors.
pub fn resolve_chart_defaults(layer: &SpecLayer, meta: &DatasetMeta) -> RealizedLayer {
    let encode = layer.encode.clone();
    let var = |channel: &str| {
        encode
            .get(channel)
            .and_then(Value::as_str)
            .and_then(|f| meta.variable(f))
    };
    let density_field = match layer.mark {
        "violin" => var("y"),
        _ => var("x"),
    };
    let bandwidth = kde_bandwidth(density_field);

    let style = merge_style(layer.mark, &layer.style, |key| match (layer.mark, key) {
        ("points", "radius") => num(3.0),
        ("hexbin", "radius") => num(10.0),
        (_, "fill_color") => Value::str(DEFAULT_FILL),
        ("histogram" | "bar", "stroke_color") => Value::str("#ffffff"),
        ("kde", "stroke_color") => Value::str("#ff7f0e"),
        ("line" | "band", "stroke_color") => Value::str(DEFAULT_FILL),
        ("force_graph", "stroke_color") => Value::str("#999999"),
        ("choropleth", "stroke_color") => Value::str("#ffffff"),
        (_, "stroke_color") => Value::str("#333333"),
        ("kde" | "line", "stroke_width") => num(2.0),
        ("band", "stroke_width") => num(0.0),
        ("force_graph", "stroke_width") => num(1.5),
        ("choropleth", "stroke_width") => num(0.5),
        (_, "stroke_width") => num(1.0),
        ("choropleth", "color_scheme") => Value::str("Greens"),
        ("force_graph" | "parallel_coordinates", "color_scheme") => {
            Value::str(palette::CATEGORICAL_NAME)
        }
        (_, "color_scheme") => Value::str(DEFAULT_PALETTE),
        (_, "bins") => num(30.0),
        (_, "bandwidth") => num(bandwidth),
        (_, "width") => num(0.8),
        (_, "show_median") => Value::Bool(true),
        (_, "overlap") => num(0.5),
        (_, "height") => num(40.0),
        (_, "fill_opacity") => num(0.3),
        ("pie", "inner_radius") => num(0.0),
        ("pie", "outer_radius") => num(150.0),
        ("chord", "pad_angle") => num(0.05),
        ("chord", "inner_radius") => num(180.0),
        ("chord", "outer_radius") => num(200.0),
        (_, "node_width") => num(15.0),
        (_, "node_padding") => num(10.0),
        (_, "link_opacity") => num(0.5),
        (_, "align") => Value::str("justify"),
        (_, "link_color") => Value::str("source"),
        (_, "node_radius") => num(5.0),
        (_, "link_distance") => num(30.0),
        (_, "link_strength") => num(0.5),
        (_, "charge_strength") => num(-30.0),
        ("parallel_coordinates", "stroke_opacity") => num(0.4),
        (_, "stroke_opacity") => num(0.6),
        (_, "projection") => Value::str("equalEarth"),
        _ => Value::Null,
    });

    let mut domains = Object::new();
    for (channel, value) in encode.iter() {
        match value {
            Value::Str(f) => {
                if let Some(d) = meta.variable(f).and_then(domain_of) {
                    domains.push(channel.clone(), d);
                }
            }
            Value::Array(_) => {
                let mut per_field = Object::new();
                for f in value.as_str_list().unwrap_or_default() {
                    if let Some(d) = meta.variable(f).and_then(domain_of) {
                        per_field.push(f, d);
                    }
                }
                domains.push(channel.clone(), Value::Object(per_field));
            }
            _ => {}
        }
    }
    let categories = category_field(layer.mark, &encode)
        .and_then(|f| meta.variable(f))
        .and_then(assign_categories);

    let mut out = base_layer(layer, encode, style);
    out.domains = domains;
    out.categories = categories;
    out
}
